//! SVG and CSV export.
//!
//! SVG uses millimeter user units (1 unit = 1 mm), black strokes and
//! 6-significant-digit coordinates, so the same input always exports the
//! same bytes. Table primitives are emitted as-is in their y-down frame;
//! drawings are flipped from the paper's y-up frame at export. Rasters
//! render as their placement frame, not pixel by pixel.

use std::fmt::Write as _;

use crate::geom::{
    magistral_marks, DrawingScale, Element, GeomError, LineTypeDef, ModulePayload, Point, Space,
    StyleTables, TEXT_ADVANCE_RATIO,
};
use crate::geom::Drawing;
use crate::textio::fmt_sig;
use crate::tkd::{placed_prims, LayoutSpec, Prim, RecordKind, Tkd, TkdError};

const MARGIN_MM: f64 = 2.0;
/// Условные marks: arm length of the tick cross, mm paper.
const MARK_ARM_MM: f64 = 1.5;
/// Mark code labels render in the smallest drafting font.
const MARK_FONT_MM: f64 = 2.5;

fn n(v: f64) -> String {
    fmt_sig(v, 6)
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    /// Baseline start: drawing texts anchored at their lower left corner.
    Start,
    /// Box center: table cell texts.
    Middle,
}

/// Shape in the output frame (y down).
enum Shape {
    Line { a: (f64, f64), b: (f64, f64), def: LineTypeDef },
    Text { at: (f64, f64), content: String, height: f64, anchor: Anchor, rotate: u16 },
}

impl Shape {
    fn include(&self, bounds: &mut Option<(f64, f64, f64, f64)>) {
        let mut add = |x: f64, y: f64| match bounds {
            None => *bounds = Some((x, y, x, y)),
            Some((x0, y0, x1, y1)) => {
                *x0 = x0.min(x);
                *y0 = y0.min(y);
                *x1 = x1.max(x);
                *y1 = y1.max(y);
            }
        };
        match self {
            Shape::Line { a, b, .. } => {
                add(a.0, a.1);
                add(b.0, b.1);
            }
            Shape::Text { at, content, height, anchor, rotate } => {
                let w = content.chars().count() as f64 * TEXT_ADVANCE_RATIO * height;
                let (x, y) = *at;
                match anchor {
                    Anchor::Middle => {
                        add(x - w / 2.0, y - height / 2.0);
                        add(x + w / 2.0, y + height / 2.0);
                    }
                    // The box hangs off the anchor by the rotation, mirrored
                    // into the y-down frame.
                    Anchor::Start => match rotate {
                        90 => {
                            add(x, y);
                            add(x + height, y - w);
                        }
                        270 => {
                            add(x, y);
                            add(x - height, y + w);
                        }
                        _ => {
                            add(x, y);
                            add(x + w, y - height);
                        }
                    },
                }
            }
        }
    }

    fn emit(&self, out: &mut String) {
        match self {
            Shape::Line { a, b, def } => {
                write!(
                    out,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\" stroke-width=\"{}\"",
                    n(a.0),
                    n(a.1),
                    n(b.0),
                    n(b.1),
                    n(def.width)
                )
                .unwrap();
                if !def.dash.is_empty() {
                    let pattern: Vec<String> = def.dash.iter().map(|d| n(*d)).collect();
                    write!(out, " stroke-dasharray=\"{}\"", pattern.join(" ")).unwrap();
                }
                out.push_str("/>\n");
            }
            Shape::Text { at, content, height, anchor, rotate } => {
                write!(out, "<text x=\"{}\" y=\"{}\" font-size=\"{}\"", n(at.0), n(at.1), n(*height))
                    .unwrap();
                if *anchor == Anchor::Middle {
                    out.push_str(" text-anchor=\"middle\" dominant-baseline=\"central\"");
                }
                if *rotate != 0 {
                    // The paper angle is counterclockwise; the y-down frame
                    // mirrors it.
                    write!(
                        out,
                        " transform=\"rotate({} {} {})\"",
                        360 - rotate,
                        n(at.0),
                        n(at.1)
                    )
                    .unwrap();
                }
                write!(out, " font-family=\"monospace\">{}</text>\n", xml_escape(content)).unwrap();
            }
        }
    }
}

fn svg_wrap(shapes: &[Shape]) -> String {
    let mut bounds = None;
    for s in shapes {
        s.include(&mut bounds);
    }
    let (x0, y0, x1, y1) = bounds.unwrap_or((0.0, 0.0, 1.0 - 2.0 * MARGIN_MM, 1.0 - 2.0 * MARGIN_MM));
    let w = (x1 - x0) + 2.0 * MARGIN_MM;
    let h = (y1 - y0) + 2.0 * MARGIN_MM;
    let mut out = String::new();
    write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"{x} {y} {w} {h}\">\n",
        w = n(w),
        h = n(h),
        x = n(x0 - MARGIN_MM),
        y = n(y0 - MARGIN_MM),
    )
    .unwrap();
    for s in shapes {
        s.emit(&mut out);
    }
    out.push_str("</svg>\n");
    out
}

/// Table-document primitives to a standalone SVG document.
pub fn svg_document(prims: &[Prim], styles: &StyleTables) -> Result<String, GeomError> {
    let mut shapes = Vec::with_capacity(prims.len());
    for p in prims {
        shapes.push(match p {
            Prim::Segment { a, b, line } => Shape::Line { a: *a, b: *b, def: *styles.line_type(*line)? },
            Prim::Text { at, content, height_mm } => Shape::Text {
                at: *at,
                content: content.clone(),
                height: *height_mm,
                anchor: Anchor::Middle,
                rotate: 0,
            },
        });
    }
    Ok(svg_wrap(&shapes))
}

/// Lays the document out and exports it in one step.
pub fn tkd_svg(tkd: &Tkd, spec: &LayoutSpec) -> Result<String, TkdError> {
    let laid = placed_prims(tkd, spec)?;
    Ok(svg_document(&laid.prims, StyleTables::standard())?)
}

fn csv_cell(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Data records as CSV: a header row of column keys, then one line per data
/// row. Section titling is presentation and does not export.
pub fn tkd_csv(tkd: &Tkd) -> String {
    let mut out = String::new();
    let header: Vec<String> = tkd
        .tree
        .leaf_cells()
        .iter()
        .map(|c| csv_cell(&c.column_key))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in &tkd.records {
        if r.kind != RecordKind::Data {
            continue;
        }
        let cells: Vec<String> = r.values.iter().map(|v| csv_cell(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Whole drawing to SVG in paper millimeters. Natural-space elements pass
/// through the sheet scale; the paper's y axis flips into the SVG frame.
pub fn drawing_svg(d: &Drawing) -> Result<String, GeomError> {
    let styles = StyleTables::standard();
    let mut shapes = Vec::new();
    for el in d.elements() {
        flatten(el, &d.scale, styles, &mut shapes)?;
    }
    // Paper y up; SVG y down. Negation is exact, so equal inputs stay equal.
    for s in &mut shapes {
        match s {
            Shape::Line { a, b, .. } => {
                a.1 = -a.1;
                b.1 = -b.1;
            }
            Shape::Text { at, .. } => at.1 = -at.1,
        }
    }
    Ok(svg_wrap(&shapes))
}

fn to_paper(p: Point, space: Space, scale: &DrawingScale) -> (f64, f64) {
    let q = match space {
        Space::Natural => scale.to_paper(p),
        Space::Paper => p,
    };
    (q.x, q.y)
}

fn flatten(
    el: &Element,
    scale: &DrawingScale,
    styles: &StyleTables,
    out: &mut Vec<Shape>,
) -> Result<(), GeomError> {
    match el {
        Element::Segment { a, b, line, space } => out.push(Shape::Line {
            a: to_paper(a.work(), *space, scale),
            b: to_paper(b.work(), *space, scale),
            def: *styles.line_type(*line)?,
        }),
        Element::Polyline { points, line, space } => {
            let def = *styles.line_type(*line)?;
            for w in points.windows(2) {
                out.push(Shape::Line {
                    a: to_paper(w[0].work(), *space, scale),
                    b: to_paper(w[1].work(), *space, scale),
                    def,
                });
            }
        }
        Element::Text { at, content, font, angle, space } => out.push(Shape::Text {
            at: to_paper(at.work(), *space, scale),
            content: content.clone(),
            height: styles.font_height(*font)?,
            anchor: Anchor::Start,
            rotate: styles.text_angle(*angle)?,
        }),
        Element::Magistral(m) => {
            let def = *styles.line_type(m.line)?;
            for w in m.path.windows(2) {
                out.push(Shape::Line {
                    a: to_paper(w[0].work(), m.space, scale),
                    b: to_paper(w[1].work(), m.space, scale),
                    def,
                });
            }
            for (p, code) in magistral_marks(m)? {
                let (x, y) = to_paper(p, m.space, scale);
                out.push(Shape::Line {
                    a: (x - MARK_ARM_MM, y),
                    b: (x + MARK_ARM_MM, y),
                    def,
                });
                out.push(Shape::Line {
                    a: (x, y - MARK_ARM_MM),
                    b: (x, y + MARK_ARM_MM),
                    def,
                });
                out.push(Shape::Text {
                    at: (x + MARK_ARM_MM / 2.0, y + MARK_ARM_MM / 2.0),
                    content: code,
                    height: MARK_FONT_MM,
                    anchor: Anchor::Start,
                    rotate: 0,
                });
            }
        }
        Element::Raster(r) => {
            let rect = r.rect();
            let def = *styles.line_type(crate::geom::LineTypeId(1))?;
            let (x0, y0, x1, y1) = (rect.min.x, rect.min.y, rect.max.x, rect.max.y);
            for (a, b) in [
                ((x0, y0), (x1, y0)),
                ((x1, y0), (x1, y1)),
                ((x1, y1), (x0, y1)),
                ((x0, y1), (x0, y0)),
            ] {
                out.push(Shape::Line { a, b, def });
            }
        }
        Element::Module(payload) => match payload.as_ref() {
            ModulePayload::Parametric(inst) => {
                for sub in inst.geometry() {
                    flatten(sub, scale, styles, out)?;
                }
            }
            ModulePayload::Table { origin, tkd, layout } => {
                let laid = placed_prims(tkd, layout).map_err(|e| GeomError::Module(e.to_string()))?;
                let o = origin.work();
                for p in laid.prims {
                    match p {
                        Prim::Segment { a, b, line } => out.push(Shape::Line {
                            a: (o.x + a.0, o.y - a.1),
                            b: (o.x + b.0, o.y - b.1),
                            def: *styles.line_type(line)?,
                        }),
                        Prim::Text { at, content, height_mm } => out.push(Shape::Text {
                            at: (o.x + at.0, o.y - at.1),
                            content,
                            height: height_mm,
                            anchor: Anchor::Middle,
                            rotate: 0,
                        }),
                    }
                }
            }
        },
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{FontHeightId, LineTypeId, StoredPoint, TextAngleId};
    use crate::tkd::{BlockNode, LeafCell, SplitAxis};

    fn sp(x: f64, y: f64) -> StoredPoint {
        StoredPoint::new(x, y).unwrap()
    }

    #[test]
    fn no_primitives_is_a_valid_empty_document() {
        let svg = svg_document(&[], StyleTables::standard()).unwrap();
        assert!(svg.starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\""));
        assert!(svg.ends_with("</svg>\n"));
        assert!(!svg.contains("<line"));
        assert!(!svg.contains("<text"));
        assert!(svg.contains("width=\"1mm\" height=\"1mm\""));
    }

    #[test]
    fn one_segment_keeps_its_coordinates() {
        let prims = [Prim::Segment { a: (0.0, 0.0), b: (10.0, 0.0), line: LineTypeId(0) }];
        let svg = svg_document(&prims, StyleTables::standard()).unwrap();
        assert!(svg.contains("<line x1=\"0\" y1=\"0\" x2=\"10\" y2=\"0\""), "{svg}");
        assert_eq!(svg.matches("<line").count(), 1);
        assert!(svg.contains("viewBox=\"-2 -2 14 4\""), "{svg}");
    }

    #[test]
    fn dashes_and_escaping_come_through() {
        let prims = [
            Prim::Segment { a: (0.0, 0.0), b: (5.0, 5.0), line: LineTypeId(2) },
            Prim::Text { at: (2.0, 2.0), content: "d<5 & x".into(), height_mm: 2.5 },
        ];
        let svg = svg_document(&prims, StyleTables::standard()).unwrap();
        assert!(svg.contains("stroke-dasharray=\"4 1.5\""), "{svg}");
        assert!(svg.contains("d&lt;5 &amp; x"), "{svg}");
    }

    #[test]
    fn csv_quotes_only_what_needs_quoting() {
        let tree = BlockNode::split(
            SplitAxis::Vertical,
            vec![
                BlockNode::Leaf(LeafCell {
                    column_key: "name".into(),
                    header_text: "Наименование".into(),
                    unit: None,
                    enk_keyword: None,
                }),
                BlockNode::Leaf(LeafCell {
                    column_key: "qty".into(),
                    header_text: "Кол.".into(),
                    unit: None,
                    enk_keyword: None,
                }),
            ],
        );
        let mut tkd = Tkd::new(tree);
        tkd.push_data(vec!["Труба 57, черная".into(), "2".into()]);
        tkd.push_section("Раздел");
        tkd.push_data(vec!["Отвод \"тяжелый\"".into(), "1".into()]);
        let csv = tkd_csv(&tkd);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines,
            vec![
                "name,qty",
                "\"Труба 57, черная\",2",
                "\"Отвод \"\"тяжелый\"\"\",1",
            ]
        );
    }

    #[test]
    fn drawing_export_flips_y_and_scales_natural_space() {
        let mut d = Drawing::new(DrawingScale::reduction(100.0).unwrap(), "Лист 1");
        d.add_element(Element::Segment {
            a: sp(0.0, 0.0),
            b: sp(10000.0, 5000.0),
            line: LineTypeId(0),
            space: Space::Natural,
        })
        .unwrap();
        d.add_element(Element::Text {
            at: sp(0.0, 60.0),
            content: "Ось".into(),
            font: FontHeightId(1),
            angle: TextAngleId(0),
            space: Space::Paper,
        })
        .unwrap();
        let svg = drawing_svg(&d).unwrap();
        // 10000 mm at 1:100 is 100 mm paper; y flips sign.
        assert!(svg.contains("<line x1=\"0\" y1=\"0\" x2=\"100\" y2=\"-50\""), "{svg}");
        assert!(svg.contains("<text x=\"0\" y=\"-60\""), "{svg}");
        let again = drawing_svg(&d).unwrap();
        assert_eq!(svg, again);
    }

    #[test]
    fn magistral_marks_render_as_crosses_with_codes() {
        let mut d = Drawing::new(DrawingScale::reduction(1.0).unwrap(), "Лист");
        let m = crate::geom::Magistral::new(
            vec![sp(0.0, 0.0), sp(100.0, 0.0)],
            "В1",
            40.0,
            20.0,
            LineTypeId(0),
            Space::Paper,
        )
        .unwrap();
        d.add_element(Element::Magistral(m)).unwrap();
        let svg = drawing_svg(&d).unwrap();
        // Path + 2 marks x 2 arms.
        assert_eq!(svg.matches("<line").count(), 5);
        assert_eq!(svg.matches(">В1</text>").count(), 2);
    }
}
