//! Drawing elements and their extents.

use super::coord::{Point, Rect, StoredPoint};
use super::scale::DrawingScale;
use super::style::{FontHeightId, LineTypeId, StyleTables, TextAngleId, TEXT_ADVANCE_RATIO};
use super::GeomError;
use crate::parmod::ModuleInstance;
use crate::tkd::{self, LayoutSpec, Prim, Tkd};

/// Coordinate space an element lives in. Natural coordinates shrink by the
/// drawing scale on the way to paper; paper coordinates are sheet millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Natural,
    Paper,
}

/// A main line with repeated marks along it. Mark stations are arc lengths
/// in the path's own space; only stations strictly inside the path produce
/// marks.
#[derive(Debug, Clone, PartialEq)]
pub struct Magistral {
    pub path: Vec<StoredPoint>,
    pub mark_code: String,
    pub mark_interval: f64,
    pub first_mark_offset: f64,
    pub line: LineTypeId,
    pub space: Space,
}

impl Magistral {
    pub fn new(
        path: Vec<StoredPoint>,
        mark_code: &str,
        mark_interval: f64,
        first_mark_offset: f64,
        line: LineTypeId,
        space: Space,
    ) -> Result<Magistral, GeomError> {
        if path.len() < 2 {
            return Err(GeomError::InvalidGeometry(
                "a magistral path needs at least two points".to_string(),
            ));
        }
        if !(mark_interval.is_finite() && mark_interval > 0.0) {
            return Err(GeomError::InvalidGeometry(format!(
                "mark interval {mark_interval} must be positive"
            )));
        }
        if !(first_mark_offset.is_finite() && first_mark_offset >= 0.0) {
            return Err(GeomError::InvalidGeometry(format!(
                "first mark offset {first_mark_offset} must be non-negative"
            )));
        }
        Ok(Magistral {
            path,
            mark_code: mark_code.to_string(),
            mark_interval,
            first_mark_offset,
            line,
            space,
        })
    }

    pub fn length(&self) -> f64 {
        self.path
            .windows(2)
            .map(|w| w[0].work().distance(w[1].work()))
            .sum()
    }
}

/// Positions of the marks along a magistral, with the code each carries.
pub fn magistral_marks(m: &Magistral) -> Result<Vec<(Point, String)>, GeomError> {
    let total = m.length();
    if total <= 0.0 {
        return Err(GeomError::InvalidGeometry(
            "magistral path has zero length".to_string(),
        ));
    }
    let mut out = Vec::new();
    let mut k = 0u32;
    loop {
        let station = m.first_mark_offset + f64::from(k) * m.mark_interval;
        if station >= total {
            break;
        }
        if station > 0.0 {
            out.push((point_at(&m.path, station), m.mark_code.clone()));
        }
        k += 1;
    }
    Ok(out)
}

fn point_at(path: &[StoredPoint], station: f64) -> Point {
    let mut walked = 0.0;
    for w in path.windows(2) {
        let a = w[0].work();
        let b = w[1].work();
        let seg = a.distance(b);
        if walked + seg >= station && seg > 0.0 {
            let t = (station - walked) / seg;
            return Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
        }
        walked += seg;
    }
    path.last().expect("validated non-empty").work()
}

/// Placement of a monochrome raster underlay on the sheet. `origin` is the
/// paper position of pixel (0,0); rows extend toward smaller y.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterRef {
    pub file: String,
    pub dpi: u32,
    pub width_px: u32,
    pub height_px: u32,
    pub origin: StoredPoint,
}

impl RasterRef {
    pub fn mm_per_px(&self) -> f64 {
        25.4 / f64::from(self.dpi)
    }

    pub fn rect(&self) -> Rect {
        let o = self.origin.work();
        let s = self.mm_per_px();
        Rect::new(
            o,
            Point::new(
                o.x + f64::from(self.width_px) * s,
                o.y - f64::from(self.height_px) * s,
            ),
        )
    }
}

/// What an embedded module is: a parametric instance regenerating its own
/// geometry, or a table document laid out at a sheet position.
#[derive(Debug, Clone, PartialEq)]
pub enum ModulePayload {
    Parametric(ModuleInstance),
    Table {
        origin: StoredPoint,
        tkd: Tkd,
        layout: LayoutSpec,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Segment {
        a: StoredPoint,
        b: StoredPoint,
        line: LineTypeId,
        space: Space,
    },
    Polyline {
        points: Vec<StoredPoint>,
        line: LineTypeId,
        space: Space,
    },
    Text {
        at: StoredPoint,
        content: String,
        font: FontHeightId,
        angle: TextAngleId,
        space: Space,
    },
    Magistral(Magistral),
    Raster(RasterRef),
    Module(Box<ModulePayload>),
}

impl Element {
    pub fn module(payload: ModulePayload) -> Element {
        Element::Module(Box::new(payload))
    }

    /// Extent in the requested space, or None for elements with no extent.
    /// Text extents use the estimated glyph box, rasters their placement
    /// rectangle, table modules their laid-out primitives.
    pub fn bbox(
        &self,
        space: Space,
        scale: &DrawingScale,
        styles: &StyleTables,
    ) -> Result<Option<Rect>, GeomError> {
        let native = self.native_bbox(scale, styles)?;
        let Some((rect, own)) = native else {
            return Ok(None);
        };
        Ok(Some(convert_rect(rect, own, space, scale)))
    }

    fn native_bbox(
        &self,
        scale: &DrawingScale,
        styles: &StyleTables,
    ) -> Result<Option<(Rect, Space)>, GeomError> {
        match self {
            Element::Segment { a, b, space, .. } => Ok(Some((
                Rect::new(a.work(), b.work()),
                *space,
            ))),
            Element::Polyline { points, space, .. } => Ok(points_rect(points).map(|r| (r, *space))),
            Element::Text {
                at,
                content,
                font,
                angle,
                space,
            } => {
                let h = styles.font_height(*font)?;
                let w = content.chars().count() as f64 * TEXT_ADVANCE_RATIO * h;
                let deg = styles.text_angle(*angle)?;
                let o = at.work();
                let far = match deg {
                    90 => Point::new(o.x - h, o.y + w),
                    270 => Point::new(o.x + h, o.y - w),
                    _ => Point::new(o.x + w, o.y + h),
                };
                Ok(Some((Rect::new(o, far), *space)))
            }
            Element::Magistral(m) => Ok(points_rect(&m.path).map(|r| (r, m.space))),
            Element::Raster(r) => Ok(Some((r.rect(), Space::Paper))),
            Element::Module(payload) => match payload.as_ref() {
                ModulePayload::Parametric(inst) => {
                    let mut acc: Option<Rect> = None;
                    for e in inst.geometry() {
                        if let Some((r, own)) = e.native_bbox(scale, styles)? {
                            let r = convert_rect(r, own, Space::Paper, scale);
                            acc = Some(match acc {
                                Some(prev) => prev.union(r),
                                None => r,
                            });
                        }
                    }
                    Ok(acc.map(|r| (r, Space::Paper)))
                }
                ModulePayload::Table { origin, tkd, layout } => {
                    let laid = tkd::placed_prims(tkd, layout).map_err(module_err)?;
                    let o = origin.work();
                    let mut acc: Option<Rect> = None;
                    let mut push = |x: f64, y: f64| {
                        let p = Point::new(o.x + x, o.y - y);
                        acc = Some(match acc.take() {
                            Some(mut r) => {
                                r.include(p);
                                r
                            }
                            None => Rect::from_point(p),
                        });
                    };
                    for prim in &laid.prims {
                        match prim {
                            Prim::Segment { a, b, .. } => {
                                push(a.0, a.1);
                                push(b.0, b.1);
                            }
                            Prim::Text { at, .. } => push(at.0, at.1),
                        }
                    }
                    Ok(acc.map(|r| (r, Space::Paper)))
                }
            },
        }
    }

    /// Checks every style id the element uses against the tables.
    pub fn check_styles(&self, styles: &StyleTables) -> Result<(), GeomError> {
        match self {
            Element::Segment { line, .. } | Element::Polyline { line, .. } => {
                styles.line_type(*line)?;
            }
            Element::Text { font, angle, .. } => {
                styles.font_height(*font)?;
                styles.text_angle(*angle)?;
            }
            Element::Magistral(m) => {
                styles.line_type(m.line)?;
            }
            Element::Raster(_) => {}
            Element::Module(payload) => match payload.as_ref() {
                ModulePayload::Parametric(inst) => {
                    for e in inst.geometry() {
                        e.check_styles(styles)?;
                    }
                }
                ModulePayload::Table { tkd, .. } => {
                    styles.font_height(tkd.style.default_font)?;
                    styles.line_type(tkd.style.frame_line)?;
                    styles.line_type(tkd.style.grid_line)?;
                    for id in tkd.style.column_font.values().chain(tkd.style.cell_font.values()) {
                        styles.font_height(*id)?;
                    }
                    for id in tkd.style.column_line.values().chain(tkd.style.cell_line.values()) {
                        styles.line_type(*id)?;
                    }
                }
            },
        }
        Ok(())
    }
}

fn module_err(e: tkd::TkdError) -> GeomError {
    GeomError::Module(e.to_string())
}

fn points_rect(points: &[StoredPoint]) -> Option<Rect> {
    let mut it = points.iter();
    let first = it.next()?;
    let mut rect = Rect::from_point(first.work());
    for p in it {
        rect.include(p.work());
    }
    Some(rect)
}

fn convert_rect(rect: Rect, from: Space, to: Space, scale: &DrawingScale) -> Rect {
    if from == to {
        return rect;
    }
    let map = |p: Point| match to {
        Space::Paper => scale.to_paper(p),
        Space::Natural => scale.to_natural(p),
    };
    Rect::new(map(rect.min), map(rect.max))
}
