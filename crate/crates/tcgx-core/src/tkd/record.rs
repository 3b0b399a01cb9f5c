//! Records, style overrides, and document validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::tree::{BlockNode, Parts, SplitAxis};
use super::TkdError;
use crate::catalog::UnitRegistry;
use crate::geom::{FontHeightId, GeomError, LineTypeId, StyleTables};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RecordKind {
    Header,
    Data,
    /// Full-width section title row; cell values are kept for arity but carry
    /// no content.
    SectionHeader(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TkdRecord {
    pub kind: RecordKind,
    /// One value per leaf cell, in leaf order.
    pub values: Vec<String>,
}

/// Style overrides. Resolution order is cell, then column, then the document
/// default; the outer frame always uses `frame_line`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TkdStyle {
    pub default_font: FontHeightId,
    pub frame_line: LineTypeId,
    pub grid_line: LineTypeId,
    pub column_font: BTreeMap<String, FontHeightId>,
    pub column_line: BTreeMap<String, LineTypeId>,
    pub cell_font: BTreeMap<(usize, String), FontHeightId>,
    pub cell_line: BTreeMap<(usize, String), LineTypeId>,
}

impl Default for TkdStyle {
    fn default() -> Self {
        TkdStyle {
            default_font: FontHeightId(1),
            frame_line: LineTypeId(0),
            grid_line: LineTypeId(1),
            column_font: BTreeMap::new(),
            column_line: BTreeMap::new(),
            cell_font: BTreeMap::new(),
            cell_line: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StyleTarget {
    Column(String),
    Cell { record: usize, column: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StylePatch {
    Font(FontHeightId),
    Line(LineTypeId),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Arity { record: usize, got: usize, want: usize },
    DuplicateKey { key: String },
    EmptyKey,
    MissingHeader,
    HeaderNotFirst { record: usize },
    FixedTooFew { children: usize },
    ArbitraryMisplaced,
    UnknownUnit { column: String, unit: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Arity { record, got, want } => {
                write!(f, "record {record} has {got} values under {want} cells")
            }
            Violation::DuplicateKey { key } => write!(f, "two cells share key {key:?}"),
            Violation::EmptyKey => write!(f, "cell with an empty column key"),
            Violation::MissingHeader => write!(f, "record 0 must be the header"),
            Violation::HeaderNotFirst { record } => {
                write!(f, "record {record} is a second header")
            }
            Violation::FixedTooFew { children } => {
                write!(f, "fixed split into {children} parts; at least 2 required")
            }
            Violation::ArbitraryMisplaced => {
                write!(f, "repeating split allowed only as a horizontal root with one child")
            }
            Violation::UnknownUnit { column, unit } => {
                write!(f, "column {column:?} uses unknown unit {unit:?}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tkd {
    pub tree: BlockNode,
    pub records: Vec<TkdRecord>,
    pub style: TkdStyle,
}

impl Tkd {
    /// Document over `tree` with the header record prefilled from the leaf
    /// captions.
    pub fn new(tree: BlockNode) -> Tkd {
        let header: Vec<String> = tree
            .leaf_cells()
            .iter()
            .map(|c| c.header_text.clone())
            .collect();
        Tkd {
            tree,
            records: vec![TkdRecord {
                kind: RecordKind::Header,
                values: header,
            }],
            style: TkdStyle::default(),
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.tree.leaf_cells().len()
    }

    pub fn push_data(&mut self, values: Vec<String>) {
        self.records.push(TkdRecord {
            kind: RecordKind::Data,
            values,
        });
    }

    pub fn push_section(&mut self, title: &str) {
        let blank = vec![String::new(); self.leaf_count()];
        self.records.push(TkdRecord {
            kind: RecordKind::SectionHeader(title.to_string()),
            values: blank,
        });
    }

    /// Index of the leaf carrying `key`, in leaf order.
    pub fn column_index(&self, key: &str) -> Option<usize> {
        self.tree
            .leaf_cells()
            .iter()
            .position(|c| c.column_key == key)
    }

    /// Structural check; problems are reported, not thrown.
    pub fn validate(&self, units: &UnitRegistry) -> Vec<Violation> {
        let mut out = Vec::new();
        check_node(&self.tree, true, &mut out);
        let cells = self.tree.leaf_cells();
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for cell in &cells {
            if cell.column_key.is_empty() {
                out.push(Violation::EmptyKey);
            } else if !seen.insert(cell.column_key.as_str()) {
                out.push(Violation::DuplicateKey {
                    key: cell.column_key.clone(),
                });
            }
            if let Some(unit) = &cell.unit {
                if units.get(unit).is_err() {
                    out.push(Violation::UnknownUnit {
                        column: cell.column_key.clone(),
                        unit: unit.clone(),
                    });
                }
            }
        }
        if !matches!(self.records.first().map(|r| &r.kind), Some(RecordKind::Header)) {
            out.push(Violation::MissingHeader);
        }
        for (i, record) in self.records.iter().enumerate() {
            if i > 0 && record.kind == RecordKind::Header {
                out.push(Violation::HeaderNotFirst { record: i });
            }
            if record.values.len() != cells.len() {
                out.push(Violation::Arity {
                    record: i,
                    got: record.values.len(),
                    want: cells.len(),
                });
            }
        }
        out
    }

    /// Records a font or line override; layout picks it up on the next call.
    pub fn restyle(&mut self, target: StyleTarget, patch: StylePatch) -> Result<(), TkdError> {
        let tables = StyleTables::standard();
        match patch {
            StylePatch::Font(id) => {
                tables.font_height(id)?;
            }
            StylePatch::Line(id) => {
                tables.line_type(id)?;
            }
        }
        let column = match &target {
            StyleTarget::Column(key) => key,
            StyleTarget::Cell { record, column } => {
                if *record >= self.records.len() {
                    return Err(TkdError::UnknownTarget(format!("record {record}")));
                }
                column
            }
        };
        if self.column_index(column).is_none() {
            return Err(TkdError::UnknownTarget(format!("column {column:?}")));
        }
        match (target, patch) {
            (StyleTarget::Column(key), StylePatch::Font(id)) => {
                self.style.column_font.insert(key, id);
            }
            (StyleTarget::Column(key), StylePatch::Line(id)) => {
                self.style.column_line.insert(key, id);
            }
            (StyleTarget::Cell { record, column }, StylePatch::Font(id)) => {
                self.style.cell_font.insert((record, column), id);
            }
            (StyleTarget::Cell { record, column }, StylePatch::Line(id)) => {
                self.style.cell_line.insert((record, column), id);
            }
        }
        Ok(())
    }

    /// Resolved text height for a cell, in mm.
    pub(crate) fn font_mm(&self, record: usize, column: &str) -> Result<f64, GeomError> {
        let id = self
            .style
            .cell_font
            .get(&(record, column.to_string()))
            .or_else(|| self.style.column_font.get(column))
            .copied()
            .unwrap_or(self.style.default_font);
        StyleTables::standard().font_height(id)
    }

    /// Resolved grid-line override for a cell with its precedence rank:
    /// 2 cell, 1 column, 0 default.
    pub(crate) fn line_for(&self, record: usize, column: &str) -> (u8, LineTypeId) {
        if let Some(id) = self.style.cell_line.get(&(record, column.to_string())) {
            return (2, *id);
        }
        if let Some(id) = self.style.column_line.get(column) {
            return (1, *id);
        }
        (0, self.style.grid_line)
    }
}

fn check_node(node: &BlockNode, is_root: bool, out: &mut Vec<Violation>) {
    if let BlockNode::Split {
        axis,
        parts,
        children,
        ..
    } = node
    {
        match parts {
            Parts::Fixed => {
                if children.len() < 2 {
                    out.push(Violation::FixedTooFew {
                        children: children.len(),
                    });
                }
            }
            Parts::Arbitrary => {
                if !is_root || *axis != SplitAxis::Horizontal || children.len() != 1 {
                    out.push(Violation::ArbitraryMisplaced);
                }
            }
        }
        for child in children {
            check_node(child, false, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_column() -> Tkd {
        let tree = BlockNode::repeating(BlockNode::split(
            SplitAxis::Vertical,
            vec![BlockNode::leaf("pos", "Поз."), BlockNode::leaf("name", "Наименование")],
        ));
        Tkd::new(tree)
    }

    #[test]
    fn fresh_document_is_valid() {
        let mut tkd = two_column();
        tkd.push_data(vec!["1".into(), "Болт М10".into()]);
        tkd.push_data(vec!["2".into(), "Гайка М10".into()]);
        assert!(tkd.validate(&UnitRegistry::standard()).is_empty());
    }

    #[test]
    fn short_record_is_an_arity_violation() {
        let mut tkd = two_column();
        tkd.push_data(vec!["1".into()]);
        let violations = tkd.validate(&UnitRegistry::standard());
        assert_eq!(
            violations,
            vec![Violation::Arity {
                record: 1,
                got: 1,
                want: 2
            }]
        );
    }

    #[test]
    fn shared_key_is_reported() {
        let tree = BlockNode::split(
            SplitAxis::Vertical,
            vec![BlockNode::leaf("mass", "m1"), BlockNode::leaf("mass", "m2")],
        );
        let tkd = Tkd::new(tree);
        let violations = tkd.validate(&UnitRegistry::standard());
        assert!(violations.contains(&Violation::DuplicateKey {
            key: "mass".into()
        }));
    }

    #[test]
    fn unknown_unit_is_reported() {
        let mut cell = match BlockNode::leaf("p", "P") {
            BlockNode::Leaf(c) => c,
            _ => unreachable!(),
        };
        cell.unit = Some("furlong".into());
        let tree = BlockNode::split(
            SplitAxis::Vertical,
            vec![BlockNode::Leaf(cell), BlockNode::leaf("q", "Q")],
        );
        let violations = Tkd::new(tree).validate(&UnitRegistry::standard());
        assert!(violations.contains(&Violation::UnknownUnit {
            column: "p".into(),
            unit: "furlong".into()
        }));
    }

    #[test]
    fn misplaced_repeating_split_is_reported() {
        let inner = BlockNode::Split {
            axis: SplitAxis::Horizontal,
            parts: Parts::Arbitrary,
            visible_in_header: true,
            visible_in_data: true,
            children: vec![BlockNode::leaf("a", "A")],
        };
        let tree = BlockNode::split(SplitAxis::Vertical, vec![inner, BlockNode::leaf("b", "B")]);
        let violations = Tkd::new(tree).validate(&UnitRegistry::standard());
        assert!(violations.contains(&Violation::ArbitraryMisplaced));
    }

    #[test]
    fn second_header_is_reported() {
        let mut tkd = two_column();
        tkd.records.push(TkdRecord {
            kind: RecordKind::Header,
            values: vec![String::new(), String::new()],
        });
        let violations = tkd.validate(&UnitRegistry::standard());
        assert!(violations.contains(&Violation::HeaderNotFirst { record: 1 }));
    }

    #[test]
    fn restyle_rejects_unknown_targets_and_styles() {
        let mut tkd = two_column();
        let err = tkd
            .restyle(StyleTarget::Column("mass".into()), StylePatch::Font(FontHeightId(0)))
            .unwrap_err();
        assert!(matches!(err, TkdError::UnknownTarget(_)));
        let err = tkd
            .restyle(StyleTarget::Column("pos".into()), StylePatch::Font(FontHeightId(200)))
            .unwrap_err();
        assert!(matches!(err, TkdError::Style(_)));
    }

    #[test]
    fn cell_override_beats_column_override() {
        let mut tkd = two_column();
        tkd.push_data(vec!["1".into(), "x".into()]);
        tkd.restyle(StyleTarget::Column("name".into()), StylePatch::Font(FontHeightId(0)))
            .unwrap();
        tkd.restyle(
            StyleTarget::Cell {
                record: 1,
                column: "name".into(),
            },
            StylePatch::Font(FontHeightId(3)),
        )
        .unwrap();
        assert_eq!(tkd.font_mm(1, "name").unwrap(), 7.0);
        assert_eq!(tkd.font_mm(0, "name").unwrap(), 2.5);
        assert_eq!(tkd.font_mm(0, "pos").unwrap(), 3.5);
    }
}
