//! Tile index for partial display.
//!
//! The bitmap is split into fixed-size square tiles and the index remembers
//! which ones hold ink. A region query returns only the non-empty tiles
//! whose paper footprint touches the window, so painting a window never
//! walks pixels outside it; compositing the returned tiles clipped to the
//! window is pixel-identical to clipping a whole-raster render.

use std::collections::BTreeSet;

use super::MonoRaster;
use crate::geom::{Point, Rect};

pub const TILE_SIZE: u32 = 256;

#[derive(Debug, Clone)]
pub struct TileGrid {
    tile_size: u32,
    nonempty: BTreeSet<(u32, u32)>,
}

impl TileGrid {
    pub fn build(r: &MonoRaster) -> TileGrid {
        TileGrid::with_tile_size(r, TILE_SIZE)
    }

    pub fn with_tile_size(r: &MonoRaster, tile_size: u32) -> TileGrid {
        assert!(tile_size.is_power_of_two(), "tile size must be a power of two");
        let mut nonempty = BTreeSet::new();
        for y in 0..r.height() {
            for x in 0..r.width() {
                if r.get(x, y) {
                    nonempty.insert((x / tile_size, y / tile_size));
                }
            }
        }
        TileGrid { tile_size, nonempty }
    }

    pub fn tile_size(&self) -> u32 {
        self.tile_size
    }

    pub fn nonempty_tiles(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.nonempty.iter().copied()
    }

    pub fn nonempty_count(&self) -> usize {
        self.nonempty.len()
    }

    /// Pixel bounds [x0..x1) x [y0..y1) of a tile, clamped to the raster.
    pub fn tile_pixel_bounds(&self, r: &MonoRaster, tile: (u32, u32)) -> (u32, u32, u32, u32) {
        let x0 = tile.0 * self.tile_size;
        let y0 = tile.1 * self.tile_size;
        (
            x0,
            y0,
            (x0 + self.tile_size).min(r.width()),
            (y0 + self.tile_size).min(r.height()),
        )
    }

    /// Paper-mm rectangle covered by a tile's pixels.
    pub fn tile_rect(&self, r: &MonoRaster, tile: (u32, u32)) -> Rect {
        let (x0, y0, x1, y1) = self.tile_pixel_bounds(r, tile);
        let mm = r.mm_per_pixel();
        let o = r.origin();
        Rect::new(
            Point::new(o.x + f64::from(x0) * mm, o.y - f64::from(y1) * mm),
            Point::new(o.x + f64::from(x1) * mm, o.y - f64::from(y0) * mm),
        )
    }

    /// Non-empty tiles whose footprint intersects the paper-mm window,
    /// in row-major tile order.
    pub fn query_region(&self, r: &MonoRaster, window: &Rect) -> Vec<(u32, u32)> {
        self.nonempty
            .iter()
            .copied()
            .filter(|&t| self.tile_rect(r, t).intersects(window))
            .collect()
    }
}
