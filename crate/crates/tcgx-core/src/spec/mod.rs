//! Specification records and the pipeline that turns them into filled
//! table documents: harvesting from modules across a scope, routing
//! properties into columns with unit conversion, and row post-processing
//! (sectioning, ordering, merging, common-name factoring, the item buffer).

mod blank;
mod collect;
mod fill;
mod record;
mod rowops;

pub use blank::standard_blank;
pub use collect::{collect, Collected, CollectScope, CollectTarget};
pub use fill::{buffer_extract, buffer_insert, fill, FillReport, ItemBuffer, Unmatched};
pub use record::{PropValue, Property, Source, SpecRecord};
pub use rowops::{factor_common_names, merge_identical, pack_sections, sort_rows};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("no column keyed {0:?}")]
    NoSuchColumn(String),
    #[error("record {record}, column {column:?}: cannot convert {from:?} to {to:?}: {why}")]
    UnitMismatch {
        record: usize,
        column: String,
        from: String,
        to: String,
        why: String,
    },
    #[error("record {record}, column {column:?}: {text:?} is not a number")]
    BadNumber {
        record: usize,
        column: String,
        text: String,
    },
    #[error("rows {lo}..{hi} out of range, document has {len} records")]
    BadRange { lo: usize, hi: usize, len: usize },
    #[error("document is invalid: {0}")]
    InvalidDoc(String),
}
