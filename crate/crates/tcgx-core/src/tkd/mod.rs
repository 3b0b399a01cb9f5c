//! Parametric table documents.
//!
//! A table is a tree of block splits whose leaves are the cells of one record
//! band, plus an ordered record list where record 0 is the header. Layout is a
//! pure function from the document and a layout request to drawing primitives:
//! grid segments are emitted merged-maximal, and a segment appears only where
//! its owning split is visible in that region (header vs data). Documents that
//! outgrow a chunk height continue sideways in chunks, repeating the header
//! row or a column-number row.
//!
//! Region rules: the boundary between the leading band of a chunk (header or
//! number row) and the first data band follows the root's header visibility;
//! boundaries between data bands follow its data visibility. A number row is
//! styled like the header region. The outer frame is always drawn and is not
//! restyled by column or cell overrides.

mod chunks;
mod io;
mod layout;
mod record;
mod tree;

pub use chunks::{continue_chunks, Chunk};
pub use io::{load_tkd, parse_sections, save_tkd, sections_to_string};
pub use layout::{layout, LaidOut, LayoutSpec, LayoutWarning, Prim, RepeatBand, RunDirection, TextPlace};
pub use record::{RecordKind, StylePatch, StyleTarget, Tkd, TkdRecord, TkdStyle, Violation};
pub use tree::{BlockNode, LeafCell, Parts, SplitAxis};

use thiserror::Error;

/// Primitives of the whole document in one local frame: chunked when the
/// spec carries a chunk height, a single block otherwise.
pub fn placed_prims(tkd: &Tkd, spec: &LayoutSpec) -> Result<LaidOut, TkdError> {
    if spec.chunk_height.is_none() {
        return layout(tkd, spec);
    }
    let mut prims = Vec::new();
    let mut warnings = Vec::new();
    for chunk in continue_chunks(tkd, spec)? {
        prims.extend(chunk.laid.prims);
        warnings.extend(chunk.laid.warnings);
    }
    Ok(LaidOut { prims, warnings })
}

#[derive(Debug, Error)]
pub enum TkdError {
    #[error("document is invalid: {}", fmt_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("layout expects {want} column widths, got {got}")]
    WidthsCount { want: usize, got: usize },
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error("stacked blocks disagree on width: {want} vs {got} mm")]
    InconsistentWidths { want: f64, got: f64 },
    #[error("chunk height {chunk_height} mm fits no data row at row height {row_height} mm")]
    ChunkTooSmall { chunk_height: f64, row_height: f64 },
    #[error("chunked continuation needs a chunk height")]
    MissingChunkHeight,
    #[error("no such style target: {0}")]
    UnknownTarget(String),
    #[error(transparent)]
    Style(#[from] crate::geom::GeomError),
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_violations(list: &[Violation]) -> String {
    let texts: Vec<String> = list.iter().map(|v| v.to_string()).collect();
    texts.join("; ")
}
