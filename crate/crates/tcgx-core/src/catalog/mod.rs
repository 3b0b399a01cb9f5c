//! Electronic nomenclature catalogs.
//!
//! Industry product data lives in uniform tables with typed columns; each
//! catalog carries generation rules that assemble designation, name and other
//! specification fields from string fragments, plus external menus and input
//! forms. Filters narrow the tables by profile, source catalog, hierarchical
//! classification group, measured-quantity symbol, instrument rank and value
//! intervals with automatic unit conversion.

mod bundle;
mod eval;
mod filter;
mod rule;
mod table;
mod units;

pub use bundle::{load_bundle, save_bundle, CatalogBundle};
pub use eval::{eval_ruleset, eval_ruleset_resolved, resolve_embedded, ConsoleInput, Evaluation, InputProvider, ResolvedCell, ResolvedRow, ScriptedInput};
pub use filter::{apply_filter, apply_filter_naive, parse_filter, Filter};
pub use rule::{parse_rule, Fragment, MenuDef, Rule, RuleFragment, RuleSet};
pub use table::{CellValue, Column, ColumnKind, DataTable, InstrumentRank, Row};
pub use units::{convert, round_trip_ulp, Unit, UnitRegistry};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("syntax error at {pos}: {msg}")]
    RuleSyntax { pos: usize, msg: String },
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("unknown column '{0}'")]
    UnknownColumn(String),
    #[error("unknown menu '{0}'")]
    UnknownMenu(String),
    #[error("variable '${0}' read before it is saved")]
    UnknownVariable(String),
    #[error("rule set invalid: {0}")]
    RuleSet(String),
    #[error("embedded menu in column '{column}' is not resolved")]
    UnresolvedEmbeddedMenu { column: String },
    #[error("scripted input exhausted")]
    InputExhausted,
    #[error("bad input for '{prompt}': {msg}")]
    BadInput { prompt: String, msg: String },
    #[error("'{choice}' is not an option of menu '{menu}'")]
    ChoiceNotInMenu { menu: String, choice: String },
    #[error("no choice given for embedded menu in column '{column}'")]
    MissingChoice { column: String },
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
    #[error("units '{from}' and '{to}' measure different quantities")]
    QuantityMismatch { from: String, to: String },
    #[error("interval filter on non-numeric column '{column}'")]
    IntervalOnNonNumber { column: String },
    #[error("row {0} out of range")]
    RowOutOfRange(usize),
    #[error("table invariant violated: {0}")]
    Table(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
