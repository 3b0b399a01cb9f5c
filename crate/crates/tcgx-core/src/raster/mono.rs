//! The bitmap and its paper placement.
//!
//! Pixels are stored row-major, 8 per byte, most significant bit leftmost.
//! `origin` is the paper position of the top-left corner of pixel (0,0);
//! rows run toward smaller y, so the raster hangs below-right of its origin
//! in paper space. Pixel pitch is 25.4/dpi millimeters.

use super::{RasterError, DPI_MAX, DPI_MIN};
use crate::geom::{Point, Rect};

#[derive(Debug, Clone, PartialEq)]
pub struct MonoRaster {
    width: u32,
    height: u32,
    dpi: u32,
    origin: Point,
    bits: Vec<u8>,
}

impl MonoRaster {
    pub fn new(width: u32, height: u32, dpi: u32, origin: Point) -> Result<MonoRaster, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptySize);
        }
        if !(DPI_MIN..=DPI_MAX).contains(&dpi) {
            return Err(RasterError::DpiOutOfRange(dpi));
        }
        let stride = (width as usize).div_ceil(8);
        Ok(MonoRaster {
            width,
            height,
            dpi,
            origin,
            bits: vec![0; stride * height as usize],
        })
    }

    pub fn from_bits(
        width: u32,
        height: u32,
        dpi: u32,
        origin: Point,
        bits: Vec<u8>,
    ) -> Result<MonoRaster, RasterError> {
        let mut r = MonoRaster::new(width, height, dpi, origin)?;
        if bits.len() != r.bits.len() {
            return Err(RasterError::Pbm {
                file: String::new(),
                msg: format!("bitmap is {} bytes, {}x{} needs {}", bits.len(), width, height, r.bits.len()),
            });
        }
        r.bits = bits;
        Ok(r)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn dpi(&self) -> u32 {
        self.dpi
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn set_origin(&mut self, origin: Point) {
        self.origin = origin;
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn row_stride(&self) -> usize {
        (self.width as usize).div_ceil(8)
    }

    pub fn mm_per_pixel(&self) -> f64 {
        25.4 / f64::from(self.dpi)
    }

    pub fn get(&self, x: u32, y: u32) -> bool {
        debug_assert!(x < self.width && y < self.height);
        let byte = y as usize * self.row_stride() + (x as usize) / 8;
        self.bits[byte] & (0x80 >> (x % 8)) != 0
    }

    pub fn set(&mut self, x: u32, y: u32, on: bool) {
        debug_assert!(x < self.width && y < self.height);
        let stride = self.row_stride();
        let byte = y as usize * stride + (x as usize) / 8;
        let mask = 0x80 >> (x % 8);
        if on {
            self.bits[byte] |= mask;
        } else {
            self.bits[byte] &= !mask;
        }
    }

    pub fn count_ink(&self) -> usize {
        // Padding bits past the row end are kept zero by `set`.
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn pixel_center(&self, x: u32, y: u32) -> Point {
        let mm = self.mm_per_pixel();
        Point::new(
            self.origin.x + (f64::from(x) + 0.5) * mm,
            self.origin.y - (f64::from(y) + 0.5) * mm,
        )
    }

    /// Paper-mm rectangle covered by one pixel.
    pub fn pixel_rect(&self, x: u32, y: u32) -> Rect {
        let mm = self.mm_per_pixel();
        Rect::new(
            Point::new(self.origin.x + f64::from(x) * mm, self.origin.y - f64::from(y + 1) * mm),
            Point::new(self.origin.x + f64::from(x + 1) * mm, self.origin.y - f64::from(y) * mm),
        )
    }

    /// Paper-mm rectangle covered by the whole raster.
    pub fn bounds(&self) -> Rect {
        let mm = self.mm_per_pixel();
        Rect::new(
            Point::new(self.origin.x, self.origin.y - f64::from(self.height) * mm),
            Point::new(self.origin.x + f64::from(self.width) * mm, self.origin.y),
        )
    }

    /// Set pixels within the pixel rectangle [x0..x1) x [y0..y1).
    pub fn ink_in(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for y in y0..y1.min(self.height) {
            for x in x0..x1.min(self.width) {
                if self.get(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }
}
