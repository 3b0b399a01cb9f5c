//! Storage and working coordinate precision.
//!
//! Coordinates persist in 4-byte floats: with a 23-bit mantissa the stored
//! grid still distinguishes 15000 mm from 15000.001 mm. Geometric
//! computations run on the 8-byte working format, whose 52-bit mantissa is
//! finer by a factor of 2^29 at any magnitude. Results are quantized back to
//! the stored grid only when an element is created.

use super::GeomError;

/// Working-precision coordinate, millimeters.
pub type WorkCoord = f64;

/// A stored coordinate: millimeters on the 32-bit grid.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StoredCoord(f32);

impl StoredCoord {
    pub const ZERO: StoredCoord = StoredCoord(0.0);

    /// Widen to working precision (exact).
    pub fn value(self) -> WorkCoord {
        f64::from(self.0)
    }

    pub fn raw(self) -> f32 {
        self.0
    }

    pub fn from_raw(v: f32) -> Result<StoredCoord, GeomError> {
        if v.is_finite() {
            Ok(StoredCoord(v))
        } else {
            Err(GeomError::InvalidCoordinate(f64::from(v)))
        }
    }
}

/// Nearest stored-grid value for a working coordinate.
///
/// Idempotent: quantizing an already stored value returns it unchanged.
pub fn quantize(x: WorkCoord) -> Result<StoredCoord, GeomError> {
    if !x.is_finite() {
        return Err(GeomError::InvalidCoordinate(x));
    }
    let v = x as f32;
    if !v.is_finite() {
        return Err(GeomError::InvalidCoordinate(x));
    }
    Ok(StoredCoord(v))
}

/// Distance to the next representable `f32` above `x`.
pub fn f32_ulp_at(x: f32) -> f64 {
    debug_assert!(x.is_finite() && x >= 0.0);
    f64::from(f32::from_bits(x.to_bits() + 1)) - f64::from(x)
}

/// Distance to the next representable `f64` above `x`.
pub fn f64_ulp_at(x: f64) -> f64 {
    debug_assert!(x.is_finite() && x >= 0.0);
    f64::from_bits(x.to_bits() + 1) - x
}

/// A stored point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoredPoint {
    pub x: StoredCoord,
    pub y: StoredCoord,
}

impl StoredPoint {
    pub fn new(x: WorkCoord, y: WorkCoord) -> Result<StoredPoint, GeomError> {
        Ok(StoredPoint {
            x: quantize(x)?,
            y: quantize(y)?,
        })
    }

    pub fn work(self) -> Point {
        Point {
            x: self.x.value(),
            y: self.y.value(),
        }
    }
}

/// A working-precision point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: WorkCoord,
    pub y: WorkCoord,
}

impl Point {
    pub fn new(x: WorkCoord, y: WorkCoord) -> Point {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle in working precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    /// Rectangle spanning two corners given in any order.
    pub fn new(a: Point, b: Point) -> Rect {
        let mut r = Rect::from_point(a);
        r.include(b);
        r
    }

    pub fn from_point(p: Point) -> Rect {
        Rect { min: p, max: p }
    }

    /// Closed-interval overlap: touching edges count as intersecting.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.min.x <= other.max.x
            && other.min.x <= self.max.x
            && self.min.y <= other.max.y
            && other.min.y <= self.max.y
    }

    pub fn include(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(mut self, other: Rect) -> Rect {
        self.include(other.min);
        self.include(other.max);
        self
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Largest dimension; the quantity the 0.3 mm rule compares against.
    pub fn footprint(&self) -> f64 {
        self.width().max(self.height())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_grid_distinguishes_adjacent_station_points() {
        let a = quantize(15000.0).unwrap();
        let b = quantize(15000.001).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_is_exact() {
        assert_eq!(quantize(0.0).unwrap().value(), 0.0);
    }

    #[test]
    fn work_to_stored_resolution_ratio_is_2_pow_29() {
        let ratio = f32_ulp_at(15000.0) / f64_ulp_at(15000.0);
        assert_eq!(ratio, (1u64 << 29) as f64);
    }

    #[test]
    fn quantize_is_idempotent() {
        for x in [0.0, 0.1, 15000.001, -3.75, 29999.99] {
            let once = quantize(x).unwrap();
            let twice = quantize(once.value()).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn quantize_rejects_non_finite() {
        assert!(quantize(f64::NAN).is_err());
        assert!(quantize(f64::INFINITY).is_err());
        assert!(quantize(1e39).is_err());
    }
}
