//! Fitting a vector segment to raster linework.
//!
//! The user sketches an approximate segment; ink within the corridor around
//! it is gathered and a total-least-squares line is fitted through the pixel
//! centers (principal direction of their covariance, so the result does not
//! depend on the line's slope the way ordinary regression would). Endpoints
//! come from the extreme projections of the supporting pixels onto that
//! line. The fit is flagged low-confidence when the RMS normal residual
//! exceeds one pixel pitch, e.g. when the corridor caught two parallel
//! strokes.

use super::{MonoRaster, RasterError};
use crate::geom::{Point, Rect};

#[derive(Debug, Clone, PartialEq)]
pub struct FittedSegment {
    pub a: Point,
    pub b: Point,
    /// RMS distance of supporting pixel centers to the fitted line, mm.
    pub rms: f64,
    /// True when rms exceeds one pixel pitch.
    pub low_confidence: bool,
    /// Number of supporting pixels.
    pub support: usize,
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (abx, aby) = (b.x - a.x, b.y - a.y);
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * abx, a.y + t * aby))
}

// Pixel index window covering a paper rectangle, clamped to the raster.
fn pixel_window(r: &MonoRaster, rect: &Rect) -> (u32, u32, u32, u32) {
    let mm = r.mm_per_pixel();
    let o = r.origin();
    let clamp_w = |v: f64| (v.max(0.0) as u32).min(r.width());
    let clamp_h = |v: f64| (v.max(0.0) as u32).min(r.height());
    (
        clamp_w(((rect.min.x - o.x) / mm).floor()),
        clamp_h(((o.y - rect.max.y) / mm).floor()),
        clamp_w(((rect.max.x - o.x) / mm).ceil()),
        clamp_h(((o.y - rect.min.y) / mm).ceil()),
    )
}

pub fn fit_segment(
    r: &MonoRaster,
    approx: (Point, Point),
    corridor: f64,
) -> Result<FittedSegment, RasterError> {
    if !(corridor > 0.0) || !corridor.is_finite() {
        return Err(RasterError::BadCorridor(corridor));
    }
    let (pa, pb) = approx;
    let alen = pa.distance(pb);
    if alen == 0.0 {
        return Err(RasterError::DegenerateApprox);
    }
    let adir = ((pb.x - pa.x) / alen, (pb.y - pa.y) / alen);

    let mut search = Rect::new(pa, pb);
    search.include(Point::new(search.min.x - corridor, search.min.y - corridor));
    search.include(Point::new(search.max.x + corridor, search.max.y + corridor));
    let (x0, y0, x1, y1) = pixel_window(r, &search);

    let mut pts = Vec::new();
    for y in y0..y1 {
        for x in x0..x1 {
            if r.get(x, y) {
                let c = r.pixel_center(x, y);
                if segment_distance(c, pa, pb) <= corridor {
                    pts.push(c);
                }
            }
        }
    }
    if pts.is_empty() {
        return Err(RasterError::NoInk);
    }

    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in &pts {
        let (dx, dy) = (p.x - mx, p.y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }

    let mut dir = if sxx == 0.0 && syy == 0.0 {
        adir
    } else {
        let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
        (theta.cos(), theta.sin())
    };
    if dir.0 * adir.0 + dir.1 * adir.1 < 0.0 {
        dir = (-dir.0, -dir.1);
    }

    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut sq = 0.0;
    for p in &pts {
        let (dx, dy) = (p.x - mx, p.y - my);
        let t = dx * dir.0 + dy * dir.1;
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        let s = -dx * dir.1 + dy * dir.0;
        sq += s * s;
    }
    let rms = (sq / n).sqrt();
    Ok(FittedSegment {
        a: Point::new(mx + tmin * dir.0, my + tmin * dir.1),
        b: Point::new(mx + tmax * dir.0, my + tmax * dir.1),
        rms,
        low_confidence: rms > r.mm_per_pixel(),
        support: pts.len(),
    })
}

/// Renders a one-pixel-wide stroke of the segment, for tests and demos.
/// The raster is margin-padded and placed so the segment lies at its true
/// paper position.
pub fn rasterize_segment(a: Point, b: Point, dpi: u32, margin: f64) -> Result<MonoRaster, RasterError> {
    let mm = 25.4 / f64::from(dpi);
    let mut rect = Rect::new(a, b);
    rect.include(Point::new(rect.min.x - margin, rect.min.y - margin));
    rect.include(Point::new(rect.max.x + margin, rect.max.y + margin));
    let width = (rect.width() / mm).ceil().max(1.0) as u32;
    let height = (rect.height() / mm).ceil().max(1.0) as u32;
    let origin = Point::new(rect.min.x, rect.max.y);
    let mut r = MonoRaster::new(width, height, dpi, origin)?;
    for y in 0..height {
        for x in 0..width {
            if segment_distance(r.pixel_center(x, y), a, b) <= 0.5 * mm {
                r.set(x, y, true);
            }
        }
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hausdorff(a: (Point, Point), b: (Point, Point)) -> f64 {
        // For segments the maximum is attained at an endpoint.
        segment_distance(a.0, b.0, b.1)
            .max(segment_distance(a.1, b.0, b.1))
            .max(segment_distance(b.0, a.0, a.1))
            .max(segment_distance(b.1, a.0, a.1))
    }

    #[test]
    fn recovers_a_rasterized_segment_within_one_pitch() {
        let truth = (Point::new(10.0, 10.0), Point::new(90.0, 42.0));
        let r = rasterize_segment(truth.0, truth.1, 300, 3.0).unwrap();
        let approx = (Point::new(10.7, 9.4), Point::new(89.5, 42.8));
        let fit = fit_segment(&r, approx, 2.0).unwrap();
        let pitch = r.mm_per_pixel();
        assert!(hausdorff((fit.a, fit.b), truth) <= pitch, "err {}", hausdorff((fit.a, fit.b), truth));
        assert!(!fit.low_confidence);
        assert!(fit.rms <= pitch);
        assert!(fit.support > 100);
    }

    #[test]
    fn random_segments_across_the_dpi_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xA5);
        for dpi in [75u32, 150, 300] {
            for _ in 0..8 {
                let a = Point::new(rng.gen_range(0.0..40.0), rng.gen_range(0.0..40.0));
                let d = loop {
                    let d = Point::new(rng.gen_range(-60.0..60.0), rng.gen_range(-60.0..60.0));
                    if a.distance(Point::new(a.x + d.x, a.y + d.y)) > 20.0 {
                        break d;
                    }
                };
                let b = Point::new(a.x + d.x, a.y + d.y);
                let r = rasterize_segment(a, b, dpi, 4.0).unwrap();
                let pitch = r.mm_per_pixel();
                // Corridor at the documented minimum of two pixel pitches.
                let fit = fit_segment(&r, (a, b), 2.0 * pitch).unwrap();
                let err = hausdorff((fit.a, fit.b), (a, b));
                assert!(err <= pitch, "dpi {dpi}: err {err} vs pitch {pitch}");
                assert!(!fit.low_confidence);
            }
        }
    }

    #[test]
    fn blank_raster_has_no_ink() {
        let r = MonoRaster::new(50, 50, 150, Point::new(0.0, 10.0)).unwrap();
        let res = fit_segment(&r, (Point::new(0.0, 5.0), Point::new(8.0, 5.0)), 2.0);
        assert!(matches!(res, Err(RasterError::NoInk)));
    }

    #[test]
    fn two_parallel_strokes_fit_between_with_low_confidence() {
        let lo = (Point::new(10.0, 20.0), Point::new(50.0, 20.0));
        let hi = (Point::new(10.0, 21.0), Point::new(50.0, 21.0));
        let a = rasterize_segment(lo.0, lo.1, 300, 3.0).unwrap();
        let b = rasterize_segment(hi.0, hi.1, 300, 3.0).unwrap();
        // Same grid alignment: b is one mm of rows above a.
        let mm = a.mm_per_pixel();
        let dy = ((b.origin().y - a.origin().y) / mm).round() as i64;
        let dx = ((b.origin().x - a.origin().x) / mm).round() as i64;
        let both = crate::raster::stitch(&a, &b, (dx, -dy)).unwrap();
        let approx = (Point::new(10.0, 20.5), Point::new(50.0, 20.5));
        let fit = fit_segment(&both, approx, 2.0).unwrap();
        assert!(fit.low_confidence, "rms {}", fit.rms);
        let mid_y = (fit.a.y + fit.b.y) / 2.0;
        assert!(mid_y > 20.0 && mid_y < 21.0, "fit sits at {mid_y}");
    }

    #[test]
    fn corridor_and_approx_validated() {
        let r = rasterize_segment(Point::new(0.0, 0.0), Point::new(10.0, 0.0), 150, 2.0).unwrap();
        assert!(matches!(
            fit_segment(&r, (Point::new(0.0, 0.0), Point::new(10.0, 0.0)), 0.0),
            Err(RasterError::BadCorridor(_))
        ));
        assert!(matches!(
            fit_segment(&r, (Point::new(5.0, 0.0), Point::new(5.0, 0.0)), 1.0),
            Err(RasterError::DegenerateApprox)
        ));
    }

    #[test]
    fn vertical_strokes_fit_cleanly() {
        let truth = (Point::new(20.0, 5.0), Point::new(20.0, 61.0));
        let r = rasterize_segment(truth.0, truth.1, 150, 3.0).unwrap();
        let approx = (Point::new(20.6, 5.5), Point::new(19.6, 60.2));
        let fit = fit_segment(&r, approx, 2.0).unwrap();
        assert!(hausdorff((fit.a, fit.b), truth) <= r.mm_per_pixel());
    }
}
