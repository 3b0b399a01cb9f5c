//! Rule evaluation.
//!
//! Evaluating a rule set over one table row produces the generated fields in
//! rule order. All rules of one evaluation share a variable store, so a value
//! asked once can feed several fields. Interactive fragments pull answers
//! from an `InputProvider`; evaluation is deterministic given the row and the
//! provider's answers.

use std::collections::BTreeMap;
use std::collections::VecDeque;
use std::io::{BufRead, Write};

use super::rule::{Fragment, MenuDef, RuleSet};
use super::table::{CellValue, DataTable};
use super::CatalogError;
use crate::textio::fmt_f64;

pub trait InputProvider {
    fn choose_menu(&mut self, menu: &MenuDef) -> Result<String, CatalogError>;
    fn input_number(&mut self, prompt: &str, unit: &str) -> Result<f64, CatalogError>;
    fn input_text(&mut self, prompt: &str) -> Result<String, CatalogError>;
}

/// Canned answers consumed front to back; used by tests and batch runs.
#[derive(Debug, Clone, Default)]
pub struct ScriptedInput {
    answers: VecDeque<String>,
}

impl ScriptedInput {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(answers: I) -> Self {
        ScriptedInput { answers: answers.into_iter().map(Into::into).collect() }
    }

    pub fn remaining(&self) -> usize {
        self.answers.len()
    }

    fn next(&mut self) -> Result<String, CatalogError> {
        self.answers.pop_front().ok_or(CatalogError::InputExhausted)
    }
}

impl InputProvider for ScriptedInput {
    fn choose_menu(&mut self, _menu: &MenuDef) -> Result<String, CatalogError> {
        self.next()
    }

    fn input_number(&mut self, prompt: &str, _unit: &str) -> Result<f64, CatalogError> {
        let raw = self.next()?;
        raw.trim().parse::<f64>().map_err(|e| CatalogError::BadInput {
            prompt: prompt.to_string(),
            msg: format!("'{raw}': {e}"),
        })
    }

    fn input_text(&mut self, _prompt: &str) -> Result<String, CatalogError> {
        self.next()
    }
}

/// Prompts on stderr, reads answers line by line. Menu answers may be the
/// 1-based option number or the option text.
pub struct ConsoleInput<R: BufRead, W: Write> {
    input: R,
    prompt_out: W,
}

impl<R: BufRead, W: Write> ConsoleInput<R, W> {
    pub fn new(input: R, prompt_out: W) -> Self {
        ConsoleInput { input, prompt_out }
    }

    fn read_line(&mut self) -> Result<String, CatalogError> {
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Err(CatalogError::InputExhausted);
        }
        Ok(line.trim_end_matches(['\r', '\n']).to_string())
    }
}

impl<R: BufRead, W: Write> InputProvider for ConsoleInput<R, W> {
    fn choose_menu(&mut self, menu: &MenuDef) -> Result<String, CatalogError> {
        writeln!(self.prompt_out, "{}:", menu.name)?;
        for (i, o) in menu.options.iter().enumerate() {
            writeln!(self.prompt_out, "  {}. {}", i + 1, o)?;
        }
        write!(self.prompt_out, "> ")?;
        self.prompt_out.flush()?;
        let ans = self.read_line()?;
        if let Ok(n) = ans.trim().parse::<usize>() {
            if n >= 1 && n <= menu.options.len() {
                return Ok(menu.options[n - 1].clone());
            }
        }
        Ok(ans)
    }

    fn input_number(&mut self, prompt: &str, unit: &str) -> Result<f64, CatalogError> {
        write!(self.prompt_out, "{prompt} [{unit}]: ")?;
        self.prompt_out.flush()?;
        let raw = self.read_line()?;
        raw.trim().parse::<f64>().map_err(|e| CatalogError::BadInput {
            prompt: prompt.to_string(),
            msg: format!("'{raw}': {e}"),
        })
    }

    fn input_text(&mut self, prompt: &str) -> Result<String, CatalogError> {
        write!(self.prompt_out, "{prompt}: ")?;
        self.prompt_out.flush()?;
        self.read_line()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedCell {
    Text(String),
    Number(f64),
}

/// A row whose embedded menus are replaced by picked scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRow {
    pub cells: Vec<ResolvedCell>,
}

/// Applies `choices` (column key -> option) to the row's embedded menus.
/// A chosen option that parses as a number becomes a numeric cell. Choices
/// for non-menu columns are ignored.
pub fn resolve_embedded(
    table: &DataTable,
    row_index: usize,
    choices: &BTreeMap<String, String>,
) -> Result<ResolvedRow, CatalogError> {
    let row = table.rows.get(row_index).ok_or(CatalogError::RowOutOfRange(row_index))?;
    let mut cells = Vec::with_capacity(row.cells.len());
    for (cell, col) in row.cells.iter().zip(&table.columns) {
        cells.push(match cell {
            CellValue::Text(s) => ResolvedCell::Text(s.clone()),
            CellValue::Number(v) => ResolvedCell::Number(*v),
            CellValue::Menu(opts) => {
                let choice = choices
                    .get(&col.key)
                    .ok_or_else(|| CatalogError::MissingChoice { column: col.key.clone() })?;
                if !opts.iter().any(|o| o == choice) {
                    return Err(CatalogError::ChoiceNotInMenu {
                        menu: col.key.clone(),
                        choice: choice.clone(),
                    });
                }
                match choice.parse::<f64>() {
                    Ok(v) if v.is_finite() => ResolvedCell::Number(v),
                    _ => ResolvedCell::Text(choice.clone()),
                }
            }
        });
    }
    Ok(ResolvedRow { cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Generated (field key, value) pairs in rule order.
    pub fields: Vec<(String, String)>,
    /// Final variable store.
    pub vars: BTreeMap<String, String>,
}

enum CellView<'a> {
    Text(&'a str),
    Number(f64),
    Unresolved,
}

fn cell_text(view: &CellView) -> Option<String> {
    match view {
        CellView::Text(s) => Some((*s).to_string()),
        CellView::Number(v) => Some(fmt_f64(*v)),
        CellView::Unresolved => None,
    }
}

fn eval_views(
    table: &DataTable,
    views: &[CellView],
    ruleset: &RuleSet,
    menus: &BTreeMap<String, MenuDef>,
    input: &mut dyn InputProvider,
) -> Result<Evaluation, CatalogError> {
    let mut vars: BTreeMap<String, String> = BTreeMap::new();
    let mut fields = Vec::with_capacity(ruleset.rules.len());
    for (target, rule) in &ruleset.rules {
        let mut value = String::new();
        for f in &rule.fragments {
            let piece = match &f.fragment {
                Fragment::Const(v) => v.clone(),
                Fragment::Field(key) => {
                    let idx = table.column_index(key)?;
                    cell_text(&views[idx])
                        .ok_or_else(|| CatalogError::UnresolvedEmbeddedMenu { column: key.clone() })?
                }
                Fragment::ExtMenu(name) => {
                    let menu = menus
                        .get(name)
                        .ok_or_else(|| CatalogError::UnknownMenu(name.clone()))?;
                    let choice = input.choose_menu(menu)?;
                    if !menu.options.iter().any(|o| *o == choice) {
                        return Err(CatalogError::ChoiceNotInMenu { menu: name.clone(), choice });
                    }
                    choice
                }
                Fragment::NumInput { prompt, unit } => {
                    let v = input.input_number(prompt, unit)?;
                    if !v.is_finite() {
                        return Err(CatalogError::BadInput {
                            prompt: prompt.clone(),
                            msg: "not a finite number".into(),
                        });
                    }
                    fmt_f64(v)
                }
                Fragment::StrInput { prompt } => input.input_text(prompt)?,
                Fragment::VarRead(name) => vars
                    .get(name)
                    .cloned()
                    .ok_or_else(|| CatalogError::UnknownVariable(name.clone()))?,
            };
            if let Some(save) = &f.save_as {
                vars.insert(save.clone(), piece.clone());
            }
            value.push_str(&piece);
        }
        fields.push((target.clone(), value));
    }
    Ok(Evaluation { fields, vars })
}

/// Evaluates over the raw row. A `[key]` reference to an embedded-menu cell
/// fails; resolve the row first when rules touch menu columns.
pub fn eval_ruleset(
    table: &DataTable,
    row_index: usize,
    ruleset: &RuleSet,
    menus: &BTreeMap<String, MenuDef>,
    input: &mut dyn InputProvider,
) -> Result<Evaluation, CatalogError> {
    let row = table.rows.get(row_index).ok_or(CatalogError::RowOutOfRange(row_index))?;
    let views: Vec<CellView> = row
        .cells
        .iter()
        .map(|c| match c {
            CellValue::Text(s) => CellView::Text(s),
            CellValue::Number(v) => CellView::Number(*v),
            CellValue::Menu(_) => CellView::Unresolved,
        })
        .collect();
    eval_views(table, &views, ruleset, menus, input)
}

pub fn eval_ruleset_resolved(
    table: &DataTable,
    row: &ResolvedRow,
    ruleset: &RuleSet,
    menus: &BTreeMap<String, MenuDef>,
    input: &mut dyn InputProvider,
) -> Result<Evaluation, CatalogError> {
    if row.cells.len() != table.columns.len() {
        return Err(CatalogError::Table(format!(
            "resolved row has {} cells, table has {} columns",
            row.cells.len(),
            table.columns.len()
        )));
    }
    let views: Vec<CellView> = row
        .cells
        .iter()
        .map(|c| match c {
            ResolvedCell::Text(s) => CellView::Text(s),
            ResolvedCell::Number(v) => CellView::Number(*v),
        })
        .collect();
    eval_views(table, &views, ruleset, menus, input)
}
