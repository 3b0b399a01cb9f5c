//! Routing records into table documents.

use std::collections::BTreeSet;
use std::ops::Range;

use super::record::{PropValue, Property, Source, SpecRecord};
use super::SpecError;
use crate::catalog::UnitRegistry;
use crate::textio::{fmt_f64, fmt_sig};
use crate::tkd::{RecordKind, Tkd};

/// Quantities route to this column key.
pub const QTY_KEY: &str = "qty";

/// Cell format for converted numeric properties.
const CELL_SIG_DIGITS: u32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Unmatched {
    pub key: String,
    pub source: Source,
}

#[derive(Debug, Default, PartialEq)]
pub struct FillReport {
    pub unmatched: Vec<Unmatched>,
}

impl FillReport {
    /// One warning line per unmatched property.
    pub fn warn_lines(&self) -> Vec<String> {
        self.unmatched
            .iter()
            .map(|u| format!("WARN unmatched {} from {}#{}", u.key, u.source.file, u.source.module_id))
            .collect()
    }
}

/// Appends one data row per record. Properties land in the leaf sharing
/// their key; numbers convert into the leaf's unit and print at 5
/// significant digits; quantity goes to the `qty` leaf verbatim so later
/// merges stay exact. Properties matching no leaf are reported, not dropped.
pub fn fill(
    tkd: &mut Tkd,
    records: &[SpecRecord],
    units: &UnitRegistry,
) -> Result<FillReport, SpecError> {
    let violations = tkd.validate(units);
    if !violations.is_empty() {
        let texts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(SpecError::InvalidDoc(texts.join("; ")));
    }
    let leaves: Vec<(String, Option<String>)> = tkd
        .tree
        .leaf_cells()
        .into_iter()
        .map(|leaf| (leaf.column_key.clone(), leaf.unit.clone()))
        .collect();

    let mut report = FillReport::default();
    for (ri, record) in records.iter().enumerate() {
        let mut values = vec![String::new(); leaves.len()];
        let mut matched: BTreeSet<&str> = BTreeSet::new();
        for (ci, (key, leaf_unit)) in leaves.iter().enumerate() {
            if key == QTY_KEY {
                values[ci] = fmt_f64(record.quantity);
                continue;
            }
            let Some(prop) = record.properties.get(key) else {
                continue;
            };
            values[ci] = cell_text(ri, key, prop, leaf_unit.as_deref(), units)?;
            matched.insert(key.as_str());
        }
        for key in record.properties.keys() {
            if !matched.contains(key.as_str()) {
                report.unmatched.push(Unmatched {
                    key: key.clone(),
                    source: record.source.clone(),
                });
            }
        }
        tkd.push_data(values);
    }
    Ok(report)
}

fn cell_text(
    record: usize,
    column: &str,
    prop: &Property,
    leaf_unit: Option<&str>,
    units: &UnitRegistry,
) -> Result<String, SpecError> {
    match &prop.value {
        PropValue::Text(s) => Ok(s.clone()),
        PropValue::Number(v) => {
            let shown = match (prop.unit.as_deref(), leaf_unit) {
                (Some(from), Some(to)) => {
                    units
                        .convert(*v, from, to)
                        .map_err(|e| SpecError::UnitMismatch {
                            record,
                            column: column.to_string(),
                            from: from.to_string(),
                            to: to.to_string(),
                            why: e.to_string(),
                        })?
                }
                // Without a unit on either side the value passes through.
                _ => *v,
            };
            Ok(fmt_sig(shown, CELL_SIG_DIGITS))
        }
    }
}

/// Rows detached from any document: properties keep the source column keys
/// and units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ItemBuffer {
    pub rows: Vec<SpecRecord>,
}

/// Lifts data records back into records. Cells that parse as numbers become
/// numeric properties in the leaf's unit; empty cells drop out; the `qty`
/// column becomes the quantity (1 when absent or blank).
pub fn buffer_extract(tkd: &Tkd, range: Range<usize>) -> Result<ItemBuffer, SpecError> {
    if range.start < 1 || range.end > tkd.records.len() || range.start > range.end {
        return Err(SpecError::BadRange {
            lo: range.start,
            hi: range.end,
            len: tkd.records.len(),
        });
    }
    let leaves: Vec<(String, Option<String>)> = tkd
        .tree
        .leaf_cells()
        .into_iter()
        .map(|leaf| (leaf.column_key.clone(), leaf.unit.clone()))
        .collect();
    let mut rows = Vec::new();
    for record in &tkd.records[range] {
        if record.kind != RecordKind::Data {
            continue;
        }
        let mut out = SpecRecord::new(1.0);
        for (ci, (key, unit)) in leaves.iter().enumerate() {
            let cell = &record.values[ci];
            if key == QTY_KEY {
                if let Ok(q) = cell.parse::<f64>() {
                    out.quantity = q;
                }
                continue;
            }
            if cell.is_empty() {
                continue;
            }
            let prop = match cell.parse::<f64>() {
                Ok(v) => Property {
                    value: PropValue::Number(v),
                    unit: unit.clone(),
                },
                Err(_) => Property {
                    value: PropValue::Text(cell.clone()),
                    unit: None,
                },
            };
            out.properties.insert(key.clone(), prop);
        }
        rows.push(out);
    }
    Ok(ItemBuffer { rows })
}

/// Routes buffered rows into another document by column key, converting
/// units on the way; keys the target lacks are reported.
pub fn buffer_insert(
    tkd: &mut Tkd,
    buffer: &ItemBuffer,
    units: &UnitRegistry,
) -> Result<FillReport, SpecError> {
    fill(tkd, &buffer.rows, units)
}
