//! Row post-processing on table documents.
//!
//! All four operations act on the record list in place. Section headers
//! bound the reach of sorting, merging, and factoring; packing rebuilds the
//! sectioning from scratch. Cells compare numerically when both sides parse
//! as numbers and by code points otherwise.

use std::cmp::Ordering;

use super::SpecError;
use crate::textio::fmt_f64;
use crate::tkd::{RecordKind, Tkd, TkdRecord};

fn column(tkd: &Tkd, key: &str) -> Result<usize, SpecError> {
    tkd.column_index(key)
        .ok_or_else(|| SpecError::NoSuchColumn(key.to_string()))
}

fn cmp_cells(a: &str, b: &str) -> Ordering {
    match (a.parse::<f64>(), b.parse::<f64>()) {
        (Ok(x), Ok(y)) => x.total_cmp(&y),
        _ => a.cmp(b),
    }
}

/// Runs of data records, bounded by section headers. Yields index ranges
/// into `records`.
fn data_runs(records: &[TkdRecord]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, r) in records.iter().enumerate() {
        match (&r.kind, start) {
            (RecordKind::Data, None) => start = Some(i),
            (RecordKind::Data, Some(_)) => {}
            (_, Some(s)) => {
                out.push(s..i);
                start = None;
            }
            (_, None) => {}
        }
    }
    if let Some(s) = start {
        out.push(s..records.len());
    }
    out
}

/// Rebuilds sectioning by one column: data rows stable-sort on that column,
/// consecutive equal values group under a section header carrying the value,
/// and the value clears from member rows. Rows with an empty section value
/// stay ungrouped at the front; previous section headers dissolve.
pub fn pack_sections(tkd: &mut Tkd, section_key: &str) -> Result<(), SpecError> {
    let ci = column(tkd, section_key)?;
    let mut data: Vec<TkdRecord> = tkd
        .records
        .drain(1..)
        .filter(|r| r.kind == RecordKind::Data)
        .collect();
    data.sort_by(|a, b| cmp_cells(&a.values[ci], &b.values[ci]));
    let width = tkd.leaf_count();
    let mut i = 0;
    while i < data.len() {
        let title = data[i].values[ci].clone();
        let mut j = i;
        while j < data.len() && data[j].values[ci] == title {
            j += 1;
        }
        if !title.is_empty() {
            tkd.records.push(TkdRecord {
                kind: RecordKind::SectionHeader(title),
                values: vec![String::new(); width],
            });
            for row in &mut data[i..j] {
                row.values[ci].clear();
            }
        }
        tkd.records.extend(data[i..j].iter().cloned());
        i = j;
    }
    Ok(())
}

/// Stable multi-key sort of data rows, each section separately.
pub fn sort_rows(tkd: &mut Tkd, keys: &[&str]) -> Result<(), SpecError> {
    let cols: Vec<usize> = keys
        .iter()
        .map(|k| column(tkd, k))
        .collect::<Result<_, _>>()?;
    for run in data_runs(&tkd.records) {
        tkd.records[run].sort_by(|a, b| {
            cols.iter()
                .map(|&ci| cmp_cells(&a.values[ci], &b.values[ci]))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        });
    }
    Ok(())
}

fn neumaier(values: &[f64]) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() {
            (sum - t) + v
        } else {
            (v - t) + sum
        };
        sum = t;
    }
    sum + comp
}

/// Collapses adjacent data rows that agree in every cell but the quantity
/// into one row with the summed quantity. Runs that stay single keep their
/// cells byte-for-byte.
pub fn merge_identical(tkd: &mut Tkd, qty_key: &str) -> Result<(), SpecError> {
    let qi = column(tkd, qty_key)?;
    let records = std::mem::take(&mut tkd.records);
    let mut out: Vec<TkdRecord> = Vec::with_capacity(records.len());
    let mut run: Vec<TkdRecord> = Vec::new();

    fn same_item(a: &TkdRecord, b: &TkdRecord, qi: usize) -> bool {
        a.values
            .iter()
            .zip(&b.values)
            .enumerate()
            .all(|(i, (x, y))| i == qi || x == y)
    }

    fn flush(
        out: &mut Vec<TkdRecord>,
        run: &mut Vec<TkdRecord>,
        qi: usize,
        base: usize,
    ) -> Result<(), SpecError> {
        if run.len() > 1 {
            let quantities: Vec<f64> = run
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    r.values[qi].parse::<f64>().map_err(|_| SpecError::BadNumber {
                        record: base + k,
                        column: "qty".to_string(),
                        text: r.values[qi].clone(),
                    })
                })
                .collect::<Result<_, _>>()?;
            let mut merged = run.remove(0);
            merged.values[qi] = fmt_f64(neumaier(&quantities));
            out.push(merged);
            run.clear();
        } else {
            out.append(run);
        }
        Ok(())
    }

    for (i, record) in records.into_iter().enumerate() {
        let extends = record.kind == RecordKind::Data
            && run.last().map(|last| same_item(last, &record, qi)).unwrap_or(false);
        if extends {
            run.push(record);
            continue;
        }
        let base = i - run.len();
        flush(&mut out, &mut run, qi, base)?;
        if record.kind == RecordKind::Data {
            run.push(record);
        } else {
            out.push(record);
        }
    }
    let base = tkd.records.len();
    flush(&mut out, &mut run, qi, base)?;
    tkd.records = out;
    Ok(())
}

/// Groups maximal runs of ≥2 consecutive data rows whose names share a
/// prefix of at least `min_prefix_chars` characters ending at a word
/// boundary. The group gets a section-header row carrying the prefix and
/// member names keep only the remainder.
pub fn factor_common_names(
    tkd: &mut Tkd,
    name_key: &str,
    min_prefix_chars: usize,
) -> Result<(), SpecError> {
    let ni = column(tkd, name_key)?;
    let width = tkd.leaf_count();
    let records = std::mem::take(&mut tkd.records);
    let mut out: Vec<TkdRecord> = Vec::with_capacity(records.len());
    let mut pending: Vec<TkdRecord> = Vec::new();

    for record in records {
        if record.kind == RecordKind::Data {
            pending.push(record);
        } else {
            factor_run(&mut out, &mut pending, ni, min_prefix_chars, width);
            out.push(record);
        }
    }
    factor_run(&mut out, &mut pending, ni, min_prefix_chars, width);
    tkd.records = out;
    Ok(())
}

/// Longest common prefix of `names` in chars, retreated to just past the
/// last space so the cut lands between words.
fn word_prefix_chars(names: &[&str]) -> usize {
    let first: Vec<char> = names[0].chars().collect();
    let mut lcp = first.len();
    for name in &names[1..] {
        let mut keep = 0;
        for (a, b) in first.iter().take(lcp).zip(name.chars()) {
            if *a != b {
                break;
            }
            keep += 1;
        }
        lcp = keep;
    }
    first[..lcp]
        .iter()
        .rposition(|c| *c == ' ')
        .map(|p| p + 1)
        .unwrap_or(0)
}

fn trimmed_prefix(name: &str, cut: usize) -> String {
    name.chars().take(cut).collect::<String>().trim_end().to_string()
}

fn factor_run(
    out: &mut Vec<TkdRecord>,
    pending: &mut Vec<TkdRecord>,
    ni: usize,
    min_prefix_chars: usize,
    width: usize,
) {
    let mut i = 0;
    while i < pending.len() {
        let mut j = i;
        let mut cut = 0;
        while j + 1 < pending.len() {
            let names: Vec<&str> = pending[i..=j + 1]
                .iter()
                .map(|r| r.values[ni].as_str())
                .collect();
            let p = word_prefix_chars(&names);
            if p > 0 && trimmed_prefix(names[0], p).chars().count() >= min_prefix_chars {
                cut = p;
                j += 1;
            } else {
                break;
            }
        }
        if j > i {
            out.push(TkdRecord {
                kind: RecordKind::SectionHeader(trimmed_prefix(&pending[i].values[ni], cut)),
                values: vec![String::new(); width],
            });
            for row in &mut pending[i..=j] {
                row.values[ni] = row.values[ni].chars().skip(cut).collect();
            }
        }
        out.extend(pending[i..=j].iter().cloned());
        i = j + 1;
    }
    pending.clear();
}
