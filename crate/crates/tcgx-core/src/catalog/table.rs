//! Uniform catalog tables.
//!
//! A table has typed columns and rows of cells matching them one to one.
//! Beside the visible columns every row carries three classification
//! attributes: a slash-separated class path, an optional measured-quantity
//! symbol and an instrument rank.

use super::units::UnitRegistry;
use super::CatalogError;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnKind {
    Text,
    /// Values are stored in this source unit.
    Number { unit: String },
    /// Cells hold per-row option lists; a pick is required before the cell
    /// yields a scalar.
    Menu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub key: String,
    pub kind: ColumnKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Text(String),
    Number(f64),
    Menu(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentRank {
    Primary,
    Secondary,
    None,
}

impl InstrumentRank {
    pub fn as_str(self) -> &'static str {
        match self {
            InstrumentRank::Primary => "primary",
            InstrumentRank::Secondary => "secondary",
            InstrumentRank::None => "-",
        }
    }

    pub fn parse(s: &str) -> Option<InstrumentRank> {
        match s {
            "primary" => Some(InstrumentRank::Primary),
            "secondary" => Some(InstrumentRank::Secondary),
            "-" => Some(InstrumentRank::None),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<CellValue>,
    /// Slash-separated classifier path, e.g. "Оборудование/Насосы".
    pub class_path: String,
    pub quantity_symbol: Option<String>,
    pub rank: InstrumentRank,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataTable {
    pub id: String,
    pub source_catalog: String,
    pub profile_tags: BTreeSet<String>,
    pub columns: Vec<Column>,
    pub rows: Vec<Row>,
}

impl DataTable {
    pub fn column_index(&self, key: &str) -> Result<usize, CatalogError> {
        self.columns
            .iter()
            .position(|c| c.key == key)
            .ok_or_else(|| CatalogError::UnknownColumn(key.to_string()))
    }

    pub fn column(&self, key: &str) -> Result<&Column, CatalogError> {
        Ok(&self.columns[self.column_index(key)?])
    }

    /// Checks the structural invariants: distinct column keys, known units,
    /// row arity, cell kinds matching column kinds, finite numbers and
    /// non-empty embedded menus.
    pub fn validate(&self, units: &UnitRegistry) -> Result<(), CatalogError> {
        let mut seen = BTreeSet::new();
        for c in &self.columns {
            if !seen.insert(c.key.as_str()) {
                return Err(CatalogError::Table(format!("duplicate column key '{}'", c.key)));
            }
            if let ColumnKind::Number { unit } = &c.kind {
                units.get(unit)?;
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.cells.len() != self.columns.len() {
                return Err(CatalogError::Table(format!(
                    "row {} has {} cells, table has {} columns",
                    i,
                    row.cells.len(),
                    self.columns.len()
                )));
            }
            for (cell, col) in row.cells.iter().zip(&self.columns) {
                match (cell, &col.kind) {
                    (CellValue::Text(_), ColumnKind::Text) => {}
                    (CellValue::Number(v), ColumnKind::Number { .. }) => {
                        if !v.is_finite() {
                            return Err(CatalogError::Table(format!(
                                "row {} column '{}' holds a non-finite number",
                                i, col.key
                            )));
                        }
                    }
                    (CellValue::Menu(opts), ColumnKind::Menu) => {
                        if opts.is_empty() {
                            return Err(CatalogError::Table(format!(
                                "row {} column '{}' holds an empty menu",
                                i, col.key
                            )));
                        }
                    }
                    _ => {
                        return Err(CatalogError::Table(format!(
                            "row {} column '{}' cell kind does not match column kind",
                            i, col.key
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// True when `prefix` matches whole leading path components of `path`.
/// "Оборудование/Нас" does not match "Оборудование/Насосы".
pub(crate) fn class_path_starts_with(path: &str, prefix: &str) -> bool {
    if prefix.is_empty() {
        return true;
    }
    let mut p = path.split('/');
    for want in prefix.split('/') {
        match p.next() {
            Some(got) if got == want => {}
            _ => return false,
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> DataTable {
        DataTable {
            id: "t".into(),
            source_catalog: "s".into(),
            profile_tags: BTreeSet::new(),
            columns: vec![
                Column { key: "name".into(), kind: ColumnKind::Text },
                Column { key: "dn".into(), kind: ColumnKind::Number { unit: "mm".into() } },
                Column { key: "mat".into(), kind: ColumnKind::Menu },
            ],
            rows: vec![Row {
                cells: vec![
                    CellValue::Text("Труба".into()),
                    CellValue::Number(57.0),
                    CellValue::Menu(vec!["Ст3".into(), "12Х18Н10Т".into()]),
                ],
                class_path: "Трубы/Стальные".into(),
                quantity_symbol: None,
                rank: InstrumentRank::None,
            }],
        }
    }

    #[test]
    fn well_formed_table_validates() {
        tiny().validate(&UnitRegistry::standard()).unwrap();
    }

    #[test]
    fn arity_and_kind_mismatches_rejected() {
        let units = UnitRegistry::standard();
        let mut t = tiny();
        t.rows[0].cells.pop();
        assert!(matches!(t.validate(&units), Err(CatalogError::Table(_))));

        let mut t = tiny();
        t.rows[0].cells[1] = CellValue::Text("57".into());
        assert!(matches!(t.validate(&units), Err(CatalogError::Table(_))));

        let mut t = tiny();
        t.rows[0].cells[2] = CellValue::Menu(vec![]);
        assert!(matches!(t.validate(&units), Err(CatalogError::Table(_))));

        let mut t = tiny();
        t.columns[1].kind = ColumnKind::Number { unit: "furlong".into() };
        assert!(matches!(t.validate(&units), Err(CatalogError::UnknownUnit(_))));
    }

    #[test]
    fn class_prefix_respects_component_boundaries() {
        assert!(class_path_starts_with("Оборудование/Насосы", "Оборудование"));
        assert!(class_path_starts_with("Оборудование/Насосы", "Оборудование/Насосы"));
        assert!(!class_path_starts_with("Оборудование/Насосы", "Оборудование/Нас"));
        assert!(!class_path_starts_with("Оборудование", "Оборудование/Насосы"));
        assert!(class_path_starts_with("a/b/c", ""));
    }
}
