//! Stitching scans of one sheet.
//!
//! `offset` is the pixel displacement of b's (0,0) relative to a's (0,0);
//! the result is the minimal raster covering both, overlapping pixels
//! combined by OR (scanned linework is ink-positive). The placement origin
//! moves with the expansion so the combined raster stays where `a` was.

use super::{MonoRaster, RasterError};
use crate::geom::Point;

pub fn stitch(a: &MonoRaster, b: &MonoRaster, offset: (i64, i64)) -> Result<MonoRaster, RasterError> {
    if a.dpi() != b.dpi() {
        return Err(RasterError::DpiMismatch { a: a.dpi(), b: b.dpi() });
    }
    let (ox, oy) = offset;
    let min_x = ox.min(0);
    let min_y = oy.min(0);
    let max_x = (ox + i64::from(b.width())).max(i64::from(a.width()));
    let max_y = (oy + i64::from(b.height())).max(i64::from(a.height()));
    let width = (max_x - min_x) as u32;
    let height = (max_y - min_y) as u32;

    let mm = a.mm_per_pixel();
    let origin = Point::new(
        a.origin().x + min_x as f64 * mm,
        a.origin().y - min_y as f64 * mm,
    );
    let mut out = MonoRaster::new(width, height, a.dpi(), origin)?;

    let (ax, ay) = ((-min_x) as u32, (-min_y) as u32);
    for y in 0..a.height() {
        for x in 0..a.width() {
            if a.get(x, y) {
                out.set(ax + x, ay + y, true);
            }
        }
    }
    let (bx, by) = ((ox - min_x) as u32, (oy - min_y) as u32);
    for y in 0..b.height() {
        for x in 0..b.width() {
            if b.get(x, y) {
                out.set(bx + x, by + y, true);
            }
        }
    }
    Ok(out)
}
