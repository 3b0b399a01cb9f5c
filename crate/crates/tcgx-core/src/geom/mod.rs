//! The 2D drawing model.
//!
//! Coordinates are millimeters in one of two systems sharing their origin at
//! the sheet center: *natural* (object space) and *paper* (sheet space),
//! related by the drawing scale. Coordinates persist at 32-bit precision and
//! widen to 64 bits for geometric computation. Elements whose paper-space
//! footprint is under 0.3 mm are not accepted into a drawing, and all style
//! attributes must reference entries of the restricted style tables.

mod coord;
mod drawing;
mod element;
mod io;
mod scale;
mod style;

pub use coord::{f32_ulp_at, f64_ulp_at, quantize, Point, Rect, StoredCoord, StoredPoint, WorkCoord};
pub use drawing::{Advisory, Drawing, EXTENT_ADVISORY_MM, MIN_FOOTPRINT_MM};
pub use io::{drawing_to_string, load_drawing, parse_drawing, save_drawing};
pub use element::{magistral_marks, Element, Magistral, ModulePayload, RasterRef, Space};
pub use scale::DrawingScale;
pub use style::{
    FontHeightId, LineTypeDef, LineTypeId, StyleTables, TextAngleId, TEXT_ADVANCE_RATIO,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("coordinate is not representable: {0}")]
    InvalidCoordinate(f64),
    #[error("non-standard scale {0}:{1}")]
    InvalidScale(f64, f64),
    #[error("element paper footprint {footprint:.4} mm is below the 0.3 mm minimum")]
    TooSmall { footprint: f64 },
    #[error("style {what} #{id} is not in the style tables")]
    InvalidStyle { what: &'static str, id: u8 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("drawing has no extents")]
    EmptyExtent,
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("module error: {0}")]
    Module(String),
}
