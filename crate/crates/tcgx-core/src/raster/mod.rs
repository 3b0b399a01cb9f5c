//! Monochrome raster underlays.
//!
//! Scanned sheets are 1-bit bitmaps placed on the paper plane by a
//! translate-plus-scale mapping (no rotation). Display and queries work
//! through a tile index so regions outside a window are never touched;
//! scans of one sheet can be stitched, and vector segments can be fitted to
//! raster linework near a sketched approximation.

mod fit;
mod mono;
mod pbm;
mod stitch;
mod tiles;

pub use fit::{fit_segment, rasterize_segment, FittedSegment};
pub use mono::MonoRaster;
pub use pbm::{load_raster, save_raster, sidecar_path};
pub use stitch::stitch;
pub use tiles::{TileGrid, TILE_SIZE};

use thiserror::Error;

pub const DPI_MIN: u32 = 75;
pub const DPI_MAX: u32 = 300;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("dpi {0} outside {DPI_MIN}..={DPI_MAX}")]
    DpiOutOfRange(u32),
    #[error("cannot stitch {a} dpi with {b} dpi")]
    DpiMismatch { a: u32, b: u32 },
    #[error("raster has no size")]
    EmptySize,
    #[error("no set pixels inside the corridor")]
    NoInk,
    #[error("corridor must be positive, got {0}")]
    BadCorridor(f64),
    #[error("approximation segment has zero length")]
    DegenerateApprox,
    #[error("{file}: {msg}")]
    Pbm { file: String, msg: String },
    #[error("missing placement sidecar {0}")]
    MissingPlacement(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
