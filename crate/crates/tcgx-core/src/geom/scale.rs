//! Drawing scales, restricted to the standard enumeration.

use std::fmt;

use super::{GeomError, Point};
use crate::textio::fmt_f64;

/// Standard scales as (paper units, natural units) pairs: `1:100` reads
/// "1 paper mm per 100 natural mm".
pub const STANDARD_SCALES: &[(f64, f64)] = &[
    (1.0, 1.0),
    // reductions
    (1.0, 2.0),
    (1.0, 2.5),
    (1.0, 4.0),
    (1.0, 5.0),
    (1.0, 10.0),
    (1.0, 15.0),
    (1.0, 20.0),
    (1.0, 25.0),
    (1.0, 40.0),
    (1.0, 50.0),
    (1.0, 75.0),
    (1.0, 100.0),
    (1.0, 200.0),
    (1.0, 400.0),
    (1.0, 500.0),
    (1.0, 800.0),
    (1.0, 1000.0),
    // enlargements
    (2.0, 1.0),
    (2.5, 1.0),
    (4.0, 1.0),
    (5.0, 1.0),
    (10.0, 1.0),
    (20.0, 1.0),
    (40.0, 1.0),
    (50.0, 1.0),
    (100.0, 1.0),
];

/// A drawing scale from the standard enumeration.
///
/// Both coordinate systems share the origin at the sheet center, so the
/// conversion is a pure ratio with no translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrawingScale {
    paper_units: f64,
    natural_units: f64,
}

impl DrawingScale {
    /// `1:1`.
    pub const FULL: DrawingScale = DrawingScale {
        paper_units: 1.0,
        natural_units: 1.0,
    };

    pub fn new(paper_units: f64, natural_units: f64) -> Result<DrawingScale, GeomError> {
        if STANDARD_SCALES.contains(&(paper_units, natural_units)) {
            Ok(DrawingScale {
                paper_units,
                natural_units,
            })
        } else {
            Err(GeomError::InvalidScale(paper_units, natural_units))
        }
    }

    /// Reduction scale `1:n`.
    pub fn reduction(n: f64) -> Result<DrawingScale, GeomError> {
        DrawingScale::new(1.0, n)
    }

    /// Natural millimeters per paper millimeter.
    pub fn ratio(&self) -> f64 {
        self.natural_units / self.paper_units
    }

    pub fn to_paper(&self, p: Point) -> Point {
        Point::new(p.x / self.ratio(), p.y / self.ratio())
    }

    pub fn to_natural(&self, p: Point) -> Point {
        Point::new(p.x * self.ratio(), p.y * self.ratio())
    }

    pub fn parse(text: &str) -> Result<DrawingScale, GeomError> {
        let bad = || GeomError::InvalidGeometry(format!("bad scale '{text}'"));
        let (a, b) = text.split_once(':').ok_or_else(bad)?;
        let a: f64 = a.trim().parse().map_err(|_| bad())?;
        let b: f64 = b.trim().parse().map_err(|_| bad())?;
        DrawingScale::new(a, b)
    }
}

impl fmt::Display for DrawingScale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", fmt_f64(self.paper_units), fmt_f64(self.natural_units))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_divides_natural_coordinates() {
        let s = DrawingScale::reduction(100.0).unwrap();
        let p = s.to_paper(Point::new(2500.0, 0.0));
        assert_eq!(p, Point::new(25.0, 0.0));
    }

    #[test]
    fn origin_maps_to_origin_for_any_scale() {
        for &(a, b) in STANDARD_SCALES {
            let s = DrawingScale::new(a, b).unwrap();
            assert_eq!(s.to_paper(Point::new(0.0, 0.0)), Point::new(0.0, 0.0));
            assert_eq!(s.to_natural(Point::new(0.0, 0.0)), Point::new(0.0, 0.0));
        }
    }

    #[test]
    fn non_standard_scale_rejected() {
        assert!(DrawingScale::new(1.0, 3.0).is_err());
        assert!(DrawingScale::new(0.0, 1.0).is_err());
    }

    #[test]
    fn display_and_parse_round_trip() {
        for &(a, b) in STANDARD_SCALES {
            let s = DrawingScale::new(a, b).unwrap();
            assert_eq!(DrawingScale::parse(&s.to_string()).unwrap(), s);
        }
        assert_eq!(DrawingScale::parse("1:2.5").unwrap().ratio(), 2.5);
    }
}
