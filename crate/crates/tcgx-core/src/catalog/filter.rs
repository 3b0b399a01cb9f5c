//! Selection filters.
//!
//! A filter is a predicate tree over row attributes and cell values.
//! `apply_filter` first binds the tree against the table (column lookups,
//! unit checks) and folds the table-constant leaves (profile, source
//! catalog); only the row-dependent part is evaluated per row, with column
//! indices and unit conversions resolved once. `apply_filter_naive` is the
//! reference implementation kept for differential tests: it re-evaluates the
//! original tree row by row.

use super::table::{class_path_starts_with, CellValue, ColumnKind, DataTable, InstrumentRank};
use super::units::UnitRegistry;
use super::CatalogError;

#[derive(Debug, Clone, PartialEq)]
pub enum Filter {
    And(Vec<Filter>),
    Or(Vec<Filter>),
    Not(Box<Filter>),
    /// The table is tagged for this work profile.
    ProfileIs(String),
    SourceCatalogIs(String),
    QuantitySymbolIs(String),
    InstrumentRankIs(InstrumentRank),
    /// Matches whole leading path components of the row's class path.
    ClassPrefix(String),
    /// Inclusive bounds given in `unit`; cells are converted before comparing.
    Interval {
        column: String,
        lo: f64,
        hi: f64,
        unit: String,
    },
    ColumnEquals {
        column: String,
        value: String,
    },
}

enum Pred {
    All(Vec<Pred>),
    Any(Vec<Pred>),
    Not(Box<Pred>),
    Symbol(String),
    Rank(InstrumentRank),
    ClassPrefix(String),
    // Bounds pre-converted to the quantity's base unit; the cell maps there
    // through its column unit's affine coefficients.
    NumInBase {
        col: usize,
        factor: f64,
        offset: f64,
        lo: f64,
        hi: f64,
    },
    TextEq {
        col: usize,
        value: String,
    },
    NumEq {
        col: usize,
        value: f64,
    },
    MenuHas {
        col: usize,
        value: String,
    },
}

enum Reduced {
    Const(bool),
    Pred(Pred),
}

// Binds every node (also inside branches that fold away, so that errors never
// depend on data) and folds table-level constants.
fn reduce(f: &Filter, t: &DataTable, units: &UnitRegistry) -> Result<Reduced, CatalogError> {
    Ok(match f {
        Filter::And(kids) => {
            let mut preds = Vec::new();
            let mut constant = true;
            for k in kids {
                match reduce(k, t, units)? {
                    Reduced::Const(false) => constant = false,
                    Reduced::Const(true) => {}
                    Reduced::Pred(p) => preds.push(p),
                }
            }
            if !constant {
                Reduced::Const(false)
            } else if preds.is_empty() {
                Reduced::Const(true)
            } else if preds.len() == 1 {
                Reduced::Pred(preds.into_iter().next().unwrap())
            } else {
                Reduced::Pred(Pred::All(preds))
            }
        }
        Filter::Or(kids) => {
            let mut preds = Vec::new();
            let mut constant = false;
            for k in kids {
                match reduce(k, t, units)? {
                    Reduced::Const(true) => constant = true,
                    Reduced::Const(false) => {}
                    Reduced::Pred(p) => preds.push(p),
                }
            }
            if constant {
                Reduced::Const(true)
            } else if preds.is_empty() {
                Reduced::Const(false)
            } else if preds.len() == 1 {
                Reduced::Pred(preds.into_iter().next().unwrap())
            } else {
                Reduced::Pred(Pred::Any(preds))
            }
        }
        Filter::Not(inner) => match reduce(inner, t, units)? {
            Reduced::Const(b) => Reduced::Const(!b),
            Reduced::Pred(p) => Reduced::Pred(Pred::Not(Box::new(p))),
        },
        Filter::ProfileIs(p) => Reduced::Const(t.profile_tags.contains(p)),
        Filter::SourceCatalogIs(s) => Reduced::Const(&t.source_catalog == s),
        Filter::QuantitySymbolIs(q) => Reduced::Pred(Pred::Symbol(q.clone())),
        Filter::InstrumentRankIs(r) => Reduced::Pred(Pred::Rank(*r)),
        Filter::ClassPrefix(p) => Reduced::Pred(Pred::ClassPrefix(p.clone())),
        Filter::Interval { column, lo, hi, unit } => {
            let col = t.column_index(column)?;
            let cell_unit = match &t.columns[col].kind {
                ColumnKind::Number { unit } => units.get(unit)?.clone(),
                _ => {
                    return Err(CatalogError::IntervalOnNonNumber { column: column.clone() });
                }
            };
            let bound_unit = units.get(unit)?;
            if bound_unit.quantity != cell_unit.quantity {
                return Err(CatalogError::QuantityMismatch {
                    from: bound_unit.name.clone(),
                    to: cell_unit.name.clone(),
                });
            }
            let lo_b = lo * bound_unit.factor + bound_unit.offset;
            let hi_b = hi * bound_unit.factor + bound_unit.offset;
            if lo_b > hi_b {
                Reduced::Const(false)
            } else {
                Reduced::Pred(Pred::NumInBase {
                    col,
                    factor: cell_unit.factor,
                    offset: cell_unit.offset,
                    lo: lo_b,
                    hi: hi_b,
                })
            }
        }
        Filter::ColumnEquals { column, value } => {
            let col = t.column_index(column)?;
            match &t.columns[col].kind {
                ColumnKind::Text => Reduced::Pred(Pred::TextEq { col, value: value.clone() }),
                ColumnKind::Menu => Reduced::Pred(Pred::MenuHas { col, value: value.clone() }),
                ColumnKind::Number { .. } => match value.parse::<f64>() {
                    // No numeric cell can equal an unparsable value.
                    Err(_) => Reduced::Const(false),
                    Ok(v) => Reduced::Pred(Pred::NumEq { col, value: v }),
                },
            }
        }
    })
}

fn eval_pred(p: &Pred, t: &DataTable, row: usize) -> bool {
    let r = &t.rows[row];
    match p {
        Pred::All(kids) => kids.iter().all(|k| eval_pred(k, t, row)),
        Pred::Any(kids) => kids.iter().any(|k| eval_pred(k, t, row)),
        Pred::Not(k) => !eval_pred(k, t, row),
        Pred::Symbol(q) => r.quantity_symbol.as_deref() == Some(q.as_str()),
        Pred::Rank(want) => r.rank == *want,
        Pred::ClassPrefix(prefix) => class_path_starts_with(&r.class_path, prefix),
        Pred::NumInBase { col, factor, offset, lo, hi } => match &r.cells[*col] {
            CellValue::Number(v) => {
                let base = v * factor + offset;
                *lo <= base && base <= *hi
            }
            _ => false,
        },
        Pred::TextEq { col, value } => matches!(&r.cells[*col], CellValue::Text(s) if s == value),
        Pred::NumEq { col, value } => matches!(&r.cells[*col], CellValue::Number(v) if v == value),
        Pred::MenuHas { col, value } => {
            matches!(&r.cells[*col], CellValue::Menu(opts) if opts.iter().any(|o| o == value))
        }
    }
}

/// Indices of the rows satisfying `f`, in table order.
pub fn apply_filter(t: &DataTable, f: &Filter, units: &UnitRegistry) -> Result<Vec<usize>, CatalogError> {
    match reduce(f, t, units)? {
        Reduced::Const(false) => Ok(Vec::new()),
        Reduced::Const(true) => Ok((0..t.rows.len()).collect()),
        Reduced::Pred(p) => Ok((0..t.rows.len()).filter(|&i| eval_pred(&p, t, i)).collect()),
    }
}

/// Reference implementation without binding-time simplification; every node
/// is re-resolved per row. Kept for differential testing.
pub fn apply_filter_naive(t: &DataTable, f: &Filter, units: &UnitRegistry) -> Result<Vec<usize>, CatalogError> {
    let mut out = Vec::new();
    for i in 0..t.rows.len() {
        if naive_row(f, t, units, i)? {
            out.push(i);
        }
    }
    Ok(out)
}

fn naive_row(f: &Filter, t: &DataTable, units: &UnitRegistry, row: usize) -> Result<bool, CatalogError> {
    let r = &t.rows[row];
    Ok(match f {
        Filter::And(kids) => {
            let mut all = true;
            for k in kids {
                all &= naive_row(k, t, units, row)?;
            }
            all
        }
        Filter::Or(kids) => {
            let mut any = false;
            for k in kids {
                any |= naive_row(k, t, units, row)?;
            }
            any
        }
        Filter::Not(k) => !naive_row(k, t, units, row)?,
        Filter::ProfileIs(p) => t.profile_tags.contains(p),
        Filter::SourceCatalogIs(s) => &t.source_catalog == s,
        Filter::QuantitySymbolIs(q) => r.quantity_symbol.as_deref() == Some(q.as_str()),
        Filter::InstrumentRankIs(want) => r.rank == *want,
        Filter::ClassPrefix(p) => class_path_starts_with(&r.class_path, p),
        Filter::Interval { column, lo, hi, unit } => {
            let col = t.column_index(column)?;
            let cell_unit = match &t.columns[col].kind {
                ColumnKind::Number { unit } => unit.clone(),
                _ => return Err(CatalogError::IntervalOnNonNumber { column: column.clone() }),
            };
            let bu = units.get(unit)?;
            let cu = units.get(&cell_unit)?;
            if bu.quantity != cu.quantity {
                return Err(CatalogError::QuantityMismatch {
                    from: bu.name.clone(),
                    to: cu.name.clone(),
                });
            }
            match &r.cells[col] {
                CellValue::Number(v) => {
                    let base = units.to_base(*v, &cell_unit)?;
                    units.to_base(*lo, unit)? <= base && base <= units.to_base(*hi, unit)?
                }
                _ => false,
            }
        }
        Filter::ColumnEquals { column, value } => {
            let col = t.column_index(column)?;
            match &r.cells[col] {
                CellValue::Text(s) => s == value,
                CellValue::Number(v) => value.parse::<f64>().map(|p| p == *v).unwrap_or(false),
                CellValue::Menu(opts) => opts.iter().any(|o| o == value),
            }
        }
    })
}

/// Parses the textual filter form used on command lines:
///
/// ```text
/// and(class("Трубы/Стальные"), interval(dn, 10, 100, mm))
/// or(rank(primary), not(symbol("P")))
/// profile("КИП и автоматика")  source("ГОСТ")  equals(mat, "Ст3")
/// ```
///
/// Arguments may be bare words or quoted strings; `and`/`or` take any number
/// of sub-filters, `rank` takes primary, secondary or `-`.
pub fn parse_filter(text: &str) -> Result<Filter, CatalogError> {
    let mut p = FilterParser { chars: text.chars().collect(), pos: 0 };
    p.skip_ws();
    let f = p.expr()?;
    p.skip_ws();
    if let Some(c) = p.peek() {
        return Err(p.err(p.pos, format!("unexpected '{c}' after filter")));
    }
    Ok(f)
}

struct FilterParser {
    chars: Vec<char>,
    pos: usize,
}

impl FilterParser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, pos: usize, msg: impl Into<String>) -> CatalogError {
        CatalogError::RuleSyntax { pos: pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CatalogError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(self.pos, format!("expected '{c}'")))
        }
    }

    fn word(&mut self) -> Result<String, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | ',' | '"') {
                break;
            }
            out.push(c);
            self.pos += 1;
        }
        if out.is_empty() {
            return Err(self.err(start, "expected a word"));
        }
        Ok(out)
    }

    fn string_or_word(&mut self) -> Result<String, CatalogError> {
        self.skip_ws();
        if self.peek() != Some('"') {
            return self.word();
        }
        let start = self.pos;
        self.pos += 1;
        let mut out = String::new();
        loop {
            match self.peek() {
                Some('"') => {
                    self.pos += 1;
                    return Ok(out);
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some('"') => out.push('"'),
                        Some('\\') => out.push('\\'),
                        Some('n') => out.push('\n'),
                        Some(c) => return Err(self.err(self.pos, format!("bad escape '\\{c}'"))),
                        None => return Err(self.err(start, "unterminated string")),
                    }
                    self.pos += 1;
                }
                Some(c) => {
                    out.push(c);
                    self.pos += 1;
                }
                None => return Err(self.err(start, "unterminated string")),
            }
        }
    }

    fn number(&mut self) -> Result<f64, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        let w = self.word()?;
        w.parse::<f64>().map_err(|_| self.err(start, format!("expected a number, got '{w}'")))
    }

    fn expr(&mut self) -> Result<Filter, CatalogError> {
        self.skip_ws();
        let start = self.pos;
        let name = self.word()?;
        self.expect('(')?;
        let f = match name.as_str() {
            "and" | "or" => {
                let mut kids = Vec::new();
                loop {
                    self.skip_ws();
                    if self.peek() == Some(')') {
                        break;
                    }
                    kids.push(self.expr()?);
                    self.skip_ws();
                    if self.peek() == Some(',') {
                        self.pos += 1;
                    }
                }
                if name == "and" {
                    Filter::And(kids)
                } else {
                    Filter::Or(kids)
                }
            }
            "not" => Filter::Not(Box::new(self.expr()?)),
            "profile" => Filter::ProfileIs(self.string_or_word()?),
            "source" => Filter::SourceCatalogIs(self.string_or_word()?),
            "symbol" => Filter::QuantitySymbolIs(self.string_or_word()?),
            "rank" => {
                let at = self.pos;
                let w = self.string_or_word()?;
                let r = InstrumentRank::parse(&w)
                    .or(if w == "none" { Some(InstrumentRank::None) } else { None })
                    .ok_or_else(|| self.err(at, format!("unknown rank '{w}'")))?;
                Filter::InstrumentRankIs(r)
            }
            "class" => Filter::ClassPrefix(self.string_or_word()?),
            "interval" => {
                let column = self.string_or_word()?;
                self.expect(',')?;
                let lo = self.number()?;
                self.expect(',')?;
                let hi = self.number()?;
                self.expect(',')?;
                let unit = self.string_or_word()?;
                Filter::Interval { column, lo, hi, unit }
            }
            "equals" => {
                let column = self.string_or_word()?;
                self.expect(',')?;
                let value = self.string_or_word()?;
                Filter::ColumnEquals { column, value }
            }
            other => return Err(self.err(start, format!("unknown filter '{other}'"))),
        };
        self.expect(')')?;
        Ok(f)
    }
}
