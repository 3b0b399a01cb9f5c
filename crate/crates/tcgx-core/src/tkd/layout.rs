//! Deterministic layout of a table document to drawing primitives.
//!
//! Coordinates are band-local paper mm with the origin at the table's top
//! left corner and y growing downward. Every band (header, data row, section
//! row, column-number row) is one row height tall. Grid segments are emitted
//! merged-maximal: collinear touching pieces with one line type become one
//! segment, so a division visible through several bands is a single segment,
//! and a piece restyled through a cell or column override breaks the run.

use super::record::{RecordKind, Tkd};
use super::tree::{BlockNode, Parts, SplitAxis};
use super::TkdError;
use crate::geom::{LineTypeId, StyleTables, TEXT_ADVANCE_RATIO};

/// Geometry tolerance, mm. Positions closer than this are the same boundary.
const EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunDirection {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepeatBand {
    HeaderRow,
    ColumnNumberRow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutSpec {
    /// Column widths in leaf order, mm.
    pub widths: Vec<f64>,
    /// Uniform band height, mm.
    pub row_height: f64,
    /// Height budget of one chunk, mm; None lays the table out as one block.
    pub chunk_height: Option<f64>,
    /// Where continuation chunks go.
    pub continuation: RunDirection,
    /// What chunks after the first start with.
    pub repeat: RepeatBand,
}

impl LayoutSpec {
    pub fn new(widths: Vec<f64>, row_height: f64) -> LayoutSpec {
        LayoutSpec {
            widths,
            row_height,
            chunk_height: None,
            continuation: RunDirection::Right,
            repeat: RepeatBand::HeaderRow,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Prim {
    Segment {
        a: (f64, f64),
        b: (f64, f64),
        line: LineTypeId,
    },
    Text {
        /// Center of the text box.
        at: (f64, f64),
        content: String,
        /// Font height, mm.
        height_mm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum TextPlace {
    Record(usize),
    NumberRow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LayoutWarning {
    /// Estimated text extent leaves the cell; the text is drawn anyway.
    OverflowingText {
        place: TextPlace,
        /// None for section titles, which span the full width.
        column: Option<String>,
        text: String,
        needed_mm: f64,
        avail_mm: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaidOut {
    pub prims: Vec<Prim>,
    pub warnings: Vec<LayoutWarning>,
}

/// One row slot of a laid-out block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Band {
    Header,
    Data(usize),
    Section(usize),
    NumberRow,
}

/// Cell rectangle within one band, y down from the band top.
#[derive(Debug, Clone, Copy)]
struct CellRect {
    leaf: usize,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

/// Cut line a split introduces, in band-local coordinates.
#[derive(Debug, Clone, Copy)]
struct Division {
    axis: SplitAxis,
    pos: f64,
    lo: f64,
    hi: f64,
    vis_header: bool,
    vis_data: bool,
}

struct BandTemplate {
    width: f64,
    cells: Vec<CellRect>,
    divisions: Vec<Division>,
}

/// Styled elementary interval on a grid line before merging.
#[derive(Debug, Clone, Copy)]
struct Piece {
    pos: f64,
    lo: f64,
    hi: f64,
    line: LineTypeId,
}

pub fn layout(tkd: &Tkd, spec: &LayoutSpec) -> Result<LaidOut, TkdError> {
    let bands = all_bands(tkd);
    let (_, prims, warnings) = layout_bands(tkd, spec, &bands)?;
    Ok(LaidOut { prims, warnings })
}

pub(crate) fn all_bands(tkd: &Tkd) -> Vec<Band> {
    tkd.records
        .iter()
        .enumerate()
        .map(|(i, r)| match r.kind {
            RecordKind::Header => Band::Header,
            RecordKind::Data => Band::Data(i),
            RecordKind::SectionHeader(_) => Band::Section(i),
        })
        .collect()
}

fn check_spec(tkd: &Tkd, spec: &LayoutSpec) -> Result<(), TkdError> {
    let want = tkd.leaf_count();
    if spec.widths.len() != want {
        return Err(TkdError::WidthsCount {
            want,
            got: spec.widths.len(),
        });
    }
    if spec.widths.iter().any(|w| !(*w > 0.0)) {
        return Err(TkdError::NonPositive("column width"));
    }
    if !(spec.row_height > 0.0) {
        return Err(TkdError::NonPositive("row height"));
    }
    if let Some(ch) = spec.chunk_height {
        if !(ch > 0.0) {
            return Err(TkdError::NonPositive("chunk height"));
        }
    }
    Ok(())
}

/// Width of a subtree; stacked children of a horizontal split must agree.
fn node_width(node: &BlockNode, widths: &[f64], next: &mut usize) -> Result<f64, TkdError> {
    match node {
        BlockNode::Leaf(_) => {
            let w = widths[*next];
            *next += 1;
            Ok(w)
        }
        BlockNode::Split { axis, children, .. } => match axis {
            SplitAxis::Vertical => {
                let mut sum = 0.0;
                for child in children {
                    sum += node_width(child, widths, next)?;
                }
                Ok(sum)
            }
            SplitAxis::Horizontal => {
                let mut first: Option<f64> = None;
                for child in children {
                    let w = node_width(child, widths, next)?;
                    match first {
                        None => first = Some(w),
                        Some(want) => {
                            if (want - w).abs() > EPS {
                                return Err(TkdError::InconsistentWidths { want, got: w });
                            }
                        }
                    }
                }
                Ok(first.unwrap_or(0.0))
            }
        },
    }
}

fn walk(
    node: &BlockNode,
    rect: (f64, f64, f64, f64),
    widths: &[f64],
    next: &mut usize,
    cells: &mut Vec<CellRect>,
    divisions: &mut Vec<Division>,
) -> Result<(), TkdError> {
    let (x0, x1, y0, y1) = rect;
    match node {
        BlockNode::Leaf(_) => {
            cells.push(CellRect {
                leaf: *next,
                x0,
                x1,
                y0,
                y1,
            });
            *next += 1;
            Ok(())
        }
        BlockNode::Split {
            axis,
            children,
            visible_in_header,
            visible_in_data,
            ..
        } => match axis {
            SplitAxis::Vertical => {
                let mut cum = x0;
                for (i, child) in children.iter().enumerate() {
                    let mut probe = *next;
                    let w = node_width(child, widths, &mut probe)?;
                    if i > 0 {
                        divisions.push(Division {
                            axis: SplitAxis::Vertical,
                            pos: cum,
                            lo: y0,
                            hi: y1,
                            vis_header: *visible_in_header,
                            vis_data: *visible_in_data,
                        });
                    }
                    walk(child, (cum, cum + w, y0, y1), widths, next, cells, divisions)?;
                    cum += w;
                }
                Ok(())
            }
            SplitAxis::Horizontal => {
                let n = children.len().max(1) as f64;
                let h = (y1 - y0) / n;
                for (i, child) in children.iter().enumerate() {
                    let cy0 = y0 + i as f64 * h;
                    let cy1 = y0 + (i + 1) as f64 * h;
                    if i > 0 {
                        divisions.push(Division {
                            axis: SplitAxis::Horizontal,
                            pos: cy0,
                            lo: x0,
                            hi: x1,
                            vis_header: *visible_in_header,
                            vis_data: *visible_in_data,
                        });
                    }
                    walk(child, (x0, x1, cy0, cy1), widths, next, cells, divisions)?;
                }
                Ok(())
            }
        },
    }
}

fn band_template(tkd: &Tkd, spec: &LayoutSpec) -> Result<BandTemplate, TkdError> {
    let template = tkd.tree.template();
    let mut probe = 0;
    let width = node_width(template, &spec.widths, &mut probe)?;
    let mut cells = Vec::new();
    let mut divisions = Vec::new();
    let mut next = 0;
    walk(
        template,
        (0.0, width, 0.0, spec.row_height),
        &spec.widths,
        &mut next,
        &mut cells,
        &mut divisions,
    )?;
    Ok(BandTemplate {
        width,
        cells,
        divisions,
    })
}

/// Header-like bands follow header visibility, the rest data visibility.
fn header_like(band: Band) -> bool {
    matches!(band, Band::Header | Band::NumberRow)
}

fn division_visible(d: &Division, band: Band) -> bool {
    if header_like(band) {
        d.vis_header
    } else {
        d.vis_data
    }
}

fn band_record(band: Band) -> Option<usize> {
    match band {
        Band::Header => Some(0),
        Band::Data(r) | Band::Section(r) => Some(r),
        Band::NumberRow => None,
    }
}

/// Line override of the cell on one side of a boundary, with its precedence
/// rank. None when the side has no cell.
fn side_style(tkd: &Tkd, keys: &[&str], band: Band, leaf: Option<usize>) -> Option<(u8, LineTypeId)> {
    let leaf = leaf?;
    let key = keys[leaf];
    Some(match band_record(band) {
        Some(record) => tkd.line_for(record, key),
        None => match tkd.style.column_line.get(key) {
            Some(id) => (1, *id),
            None => (0, tkd.style.grid_line),
        },
    })
}

fn pick_line(
    near: Option<(u8, LineTypeId)>,
    far: Option<(u8, LineTypeId)>,
    default: LineTypeId,
) -> LineTypeId {
    match (near, far) {
        (None, None) => default,
        (Some((_, id)), None) => id,
        (None, Some((_, id))) => id,
        (Some((ra, ia)), Some((rb, ib))) => {
            if rb > ra {
                ib
            } else {
                ia
            }
        }
    }
}

/// Elementary interval boundaries: `outer` endpoints plus the interior cuts.
fn elementary(outer: (f64, f64), mut cuts: Vec<f64>) -> Vec<(f64, f64)> {
    let (lo, hi) = outer;
    cuts.retain(|c| *c > lo + EPS && *c < hi - EPS);
    cuts.sort_by(|a, b| a.total_cmp(b));
    cuts.dedup_by(|a, b| (*a - *b).abs() <= EPS);
    let mut points = Vec::with_capacity(cuts.len() + 2);
    points.push(lo);
    points.extend(cuts);
    points.push(hi);
    points.windows(2).map(|w| (w[0], w[1])).collect()
}

fn merge_pieces(mut pieces: Vec<Piece>) -> Vec<Piece> {
    // Boundaries reached through different cumulative sums may differ by an
    // ulp; snap each tolerance cluster to its first coordinate before sorting
    // by interval, or a lower piece could follow a higher one and get lost.
    pieces.sort_by(|a, b| a.pos.total_cmp(&b.pos));
    let mut canon = f64::NEG_INFINITY;
    for p in &mut pieces {
        if (p.pos - canon).abs() > EPS {
            canon = p.pos;
        }
        p.pos = canon;
    }
    pieces.sort_by(|a, b| {
        a.pos
            .total_cmp(&b.pos)
            .then(a.lo.total_cmp(&b.lo))
            .then(a.hi.total_cmp(&b.hi))
    });
    let mut out: Vec<Piece> = Vec::new();
    for p in pieces {
        if let Some(last) = out.last_mut() {
            if p.pos == last.pos && p.line == last.line && p.lo <= last.hi + EPS {
                if p.hi > last.hi {
                    last.hi = p.hi;
                }
                continue;
            }
        }
        out.push(p);
    }
    out
}

/// Lays out the given bands as one block. Returns the block width along with
/// primitives and warnings; chunked continuation reuses this per chunk.
pub(crate) fn layout_bands(
    tkd: &Tkd,
    spec: &LayoutSpec,
    bands: &[Band],
) -> Result<(f64, Vec<Prim>, Vec<LayoutWarning>), TkdError> {
    check_spec(tkd, spec)?;
    let bt = band_template(tkd, spec)?;
    let leaf_cells = tkd.tree.leaf_cells();
    let keys: Vec<&str> = leaf_cells.iter().map(|c| c.column_key.as_str()).collect();
    let rh = spec.row_height;
    let width = bt.width;
    let height = bands.len() as f64 * rh;
    let (root_vis_header, root_vis_data) = match &tkd.tree {
        BlockNode::Split {
            parts: Parts::Arbitrary,
            visible_in_header,
            visible_in_data,
            ..
        } => (*visible_in_header, *visible_in_data),
        _ => (true, true),
    };

    let frame = tkd.style.frame_line;
    let mut horizontals = vec![
        Piece {
            pos: 0.0,
            lo: 0.0,
            hi: width,
            line: frame,
        },
        Piece {
            pos: height,
            lo: 0.0,
            hi: width,
            line: frame,
        },
    ];
    let mut verticals = vec![
        Piece {
            pos: 0.0,
            lo: 0.0,
            hi: height,
            line: frame,
        },
        Piece {
            pos: width,
            lo: 0.0,
            hi: height,
            line: frame,
        },
    ];

    // Divisions inside each band; sections span the full width and get none.
    for (bi, band) in bands.iter().enumerate() {
        if matches!(band, Band::Section(_)) {
            continue;
        }
        let y_off = bi as f64 * rh;
        for d in &bt.divisions {
            if !division_visible(d, *band) {
                continue;
            }
            match d.axis {
                SplitAxis::Vertical => {
                    let mut cuts = Vec::new();
                    for c in &bt.cells {
                        if (c.x1 - d.pos).abs() <= EPS || (c.x0 - d.pos).abs() <= EPS {
                            cuts.push(c.y0);
                            cuts.push(c.y1);
                        }
                    }
                    for (a, b) in elementary((d.lo, d.hi), cuts) {
                        let mid = 0.5 * (a + b);
                        let left = bt
                            .cells
                            .iter()
                            .find(|c| (c.x1 - d.pos).abs() <= EPS && c.y0 - EPS <= mid && mid <= c.y1 + EPS)
                            .map(|c| c.leaf);
                        let right = bt
                            .cells
                            .iter()
                            .find(|c| (c.x0 - d.pos).abs() <= EPS && c.y0 - EPS <= mid && mid <= c.y1 + EPS)
                            .map(|c| c.leaf);
                        let line = pick_line(
                            side_style(tkd, &keys, *band, left),
                            side_style(tkd, &keys, *band, right),
                            tkd.style.grid_line,
                        );
                        verticals.push(Piece {
                            pos: d.pos,
                            lo: y_off + a,
                            hi: y_off + b,
                            line,
                        });
                    }
                }
                SplitAxis::Horizontal => {
                    let mut cuts = Vec::new();
                    for c in &bt.cells {
                        if (c.y1 - d.pos).abs() <= EPS || (c.y0 - d.pos).abs() <= EPS {
                            cuts.push(c.x0);
                            cuts.push(c.x1);
                        }
                    }
                    for (a, b) in elementary((d.lo, d.hi), cuts) {
                        let mid = 0.5 * (a + b);
                        let above = bt
                            .cells
                            .iter()
                            .find(|c| (c.y1 - d.pos).abs() <= EPS && c.x0 - EPS <= mid && mid <= c.x1 + EPS)
                            .map(|c| c.leaf);
                        let below = bt
                            .cells
                            .iter()
                            .find(|c| (c.y0 - d.pos).abs() <= EPS && c.x0 - EPS <= mid && mid <= c.x1 + EPS)
                            .map(|c| c.leaf);
                        let line = pick_line(
                            side_style(tkd, &keys, *band, above),
                            side_style(tkd, &keys, *band, below),
                            tkd.style.grid_line,
                        );
                        horizontals.push(Piece {
                            pos: y_off + d.pos,
                            lo: a,
                            hi: b,
                            line,
                        });
                    }
                }
            }
        }
    }

    // Boundaries between bands. The junction under a header-like band follows
    // the root's header visibility, the rest its data visibility.
    for k in 1..bands.len() {
        let above_band = bands[k - 1];
        let below_band = bands[k];
        let visible = if header_like(above_band) {
            root_vis_header
        } else {
            root_vis_data
        };
        if !visible {
            continue;
        }
        let y = k as f64 * rh;
        let above_cells = !matches!(above_band, Band::Section(_));
        let below_cells = !matches!(below_band, Band::Section(_));
        let mut cuts = Vec::new();
        if above_cells || below_cells {
            for c in &bt.cells {
                if (above_cells && (c.y1 - rh).abs() <= EPS) || (below_cells && c.y0.abs() <= EPS) {
                    cuts.push(c.x0);
                    cuts.push(c.x1);
                }
            }
        }
        for (a, b) in elementary((0.0, width), cuts) {
            let mid = 0.5 * (a + b);
            let above = if above_cells {
                bt.cells
                    .iter()
                    .find(|c| (c.y1 - rh).abs() <= EPS && c.x0 - EPS <= mid && mid <= c.x1 + EPS)
                    .map(|c| c.leaf)
            } else {
                None
            };
            let below = if below_cells {
                bt.cells
                    .iter()
                    .find(|c| c.y0.abs() <= EPS && c.x0 - EPS <= mid && mid <= c.x1 + EPS)
                    .map(|c| c.leaf)
            } else {
                None
            };
            let line = pick_line(
                side_style(tkd, &keys, above_band, above),
                side_style(tkd, &keys, below_band, below),
                tkd.style.grid_line,
            );
            horizontals.push(Piece {
                pos: y,
                lo: a,
                hi: b,
                line,
            });
        }
    }

    let mut prims = Vec::new();
    for p in merge_pieces(horizontals) {
        prims.push(Prim::Segment {
            a: (p.lo, p.pos),
            b: (p.hi, p.pos),
            line: p.line,
        });
    }
    for p in merge_pieces(verticals) {
        prims.push(Prim::Segment {
            a: (p.pos, p.lo),
            b: (p.pos, p.hi),
            line: p.line,
        });
    }

    // Texts, band by band, cells in leaf order.
    let tables = StyleTables::standard();
    let mut warnings = Vec::new();
    for (bi, band) in bands.iter().enumerate() {
        let y_off = bi as f64 * rh;
        if let Band::Section(r) = band {
            let title = match &tkd.records[*r].kind {
                RecordKind::SectionHeader(t) => t.clone(),
                _ => String::new(),
            };
            if title.is_empty() {
                continue;
            }
            let font = tables.font_height(tkd.style.default_font)?;
            push_text(
                &mut prims,
                &mut warnings,
                (0.5 * width, y_off + 0.5 * rh),
                title,
                font,
                (width, rh),
                TextPlace::Record(*r),
                None,
            );
            continue;
        }
        for cell in &bt.cells {
            let key = keys[cell.leaf];
            let (content, font, place) = match band {
                Band::Header => (
                    leaf_cells[cell.leaf].header_text.clone(),
                    tkd.font_mm(0, key)?,
                    TextPlace::Record(0),
                ),
                Band::Data(r) => (
                    tkd.records[*r].values[cell.leaf].clone(),
                    tkd.font_mm(*r, key)?,
                    TextPlace::Record(*r),
                ),
                Band::NumberRow => {
                    let id = tkd
                        .style
                        .column_font
                        .get(key)
                        .copied()
                        .unwrap_or(tkd.style.default_font);
                    (
                        (cell.leaf + 1).to_string(),
                        tables.font_height(id)?,
                        TextPlace::NumberRow,
                    )
                }
                Band::Section(_) => unreachable!(),
            };
            if content.is_empty() {
                continue;
            }
            let at = (
                0.5 * (cell.x0 + cell.x1),
                y_off + 0.5 * (cell.y0 + cell.y1),
            );
            let box_size = (cell.x1 - cell.x0, cell.y1 - cell.y0);
            push_text(
                &mut prims,
                &mut warnings,
                at,
                content,
                font,
                box_size,
                place,
                Some(key.to_string()),
            );
        }
    }

    Ok((width, prims, warnings))
}

#[allow(clippy::too_many_arguments)]
fn push_text(
    prims: &mut Vec<Prim>,
    warnings: &mut Vec<LayoutWarning>,
    at: (f64, f64),
    content: String,
    font_mm: f64,
    box_size: (f64, f64),
    place: TextPlace,
    column: Option<String>,
) {
    let est_width = content.chars().count() as f64 * TEXT_ADVANCE_RATIO * font_mm;
    let (avail_w, avail_h) = box_size;
    if est_width > avail_w + EPS {
        warnings.push(LayoutWarning::OverflowingText {
            place: place.clone(),
            column: column.clone(),
            text: content.clone(),
            needed_mm: est_width,
            avail_mm: avail_w,
        });
    } else if font_mm > avail_h + EPS {
        warnings.push(LayoutWarning::OverflowingText {
            place: place.clone(),
            column: column.clone(),
            text: content.clone(),
            needed_mm: font_mm,
            avail_mm: avail_h,
        });
    }
    prims.push(Prim::Text {
        at,
        content,
        height_mm: font_mm,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tkd::record::{StylePatch, StyleTarget};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::collections::BTreeMap;

    fn two_column(rows: usize) -> Tkd {
        let tree = BlockNode::repeating(BlockNode::split(
            SplitAxis::Vertical,
            vec![BlockNode::leaf("pos", "Поз."), BlockNode::leaf("name", "Имя")],
        ));
        let mut tkd = Tkd::new(tree);
        for i in 0..rows {
            tkd.push_data(vec![format!("{}", i + 1), format!("r{}", i + 1)]);
        }
        tkd
    }

    fn spec_for(tkd: &Tkd, widths: Vec<f64>, rh: f64) -> LayoutSpec {
        assert_eq!(widths.len(), tkd.leaf_count());
        LayoutSpec::new(widths, rh)
    }

    fn segments(prims: &[Prim]) -> Vec<((f64, f64), (f64, f64), LineTypeId)> {
        prims
            .iter()
            .filter_map(|p| match p {
                Prim::Segment { a, b, line } => Some((*a, *b, *line)),
                _ => None,
            })
            .collect()
    }

    fn texts(prims: &[Prim]) -> Vec<(String, (f64, f64))> {
        prims
            .iter()
            .filter_map(|p| match p {
                Prim::Text { at, content, .. } => Some((content.clone(), *at)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn two_columns_one_row_is_six_segments_four_texts() {
        let tkd = two_column(1);
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        let segs = segments(&out.prims);
        assert_eq!(segs.len(), 6);
        assert_eq!(texts(&out.prims).len(), 4);
        // The internal vertical merges across header and data into one segment.
        let mid: Vec<_> = segs
            .iter()
            .filter(|(a, _, _)| (a.0 - 15.0).abs() < 1e-9 && a.1 < 1e-9)
            .collect();
        assert_eq!(mid.len(), 1);
        assert_eq!(mid[0].1, (15.0, 16.0));
        assert_eq!(mid[0].2, LineTypeId(1));
        // Frame edges carry the frame line type.
        let top = segs
            .iter()
            .find(|(a, b, _)| a.1 == 0.0 && b.1 == 0.0)
            .unwrap();
        assert_eq!(top.2, LineTypeId(0));
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn hidden_data_division_is_drawn_only_in_header() {
        let template = BlockNode::Split {
            axis: SplitAxis::Vertical,
            parts: Parts::Fixed,
            visible_in_header: true,
            visible_in_data: false,
            children: vec![BlockNode::leaf("pos", "Поз."), BlockNode::leaf("name", "Имя")],
        };
        let mut tkd = Tkd::new(BlockNode::repeating(template));
        tkd.push_data(vec!["1".into(), "x".into()]);
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        let mids: Vec<_> = segments(&out.prims)
            .into_iter()
            .filter(|(a, _, _)| (a.0 - 15.0).abs() < 1e-9)
            .collect();
        assert_eq!(mids.len(), 1);
        assert_eq!(mids[0].0, (15.0, 0.0));
        assert_eq!(mids[0].1, (15.0, 8.0));
    }

    #[test]
    fn header_only_block() {
        let tkd = two_column(0);
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        assert_eq!(segments(&out.prims).len(), 5);
        assert_eq!(texts(&out.prims).len(), 2);
    }

    #[test]
    fn section_band_interrupts_verticals_and_centers_title() {
        let mut tkd = two_column(1);
        tkd.push_section("Сталь");
        tkd.push_data(vec!["2".into(), "y".into()]);
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        let mids: Vec<_> = segments(&out.prims)
            .into_iter()
            .filter(|(a, _, _)| (a.0 - 15.0).abs() < 1e-9)
            .collect();
        assert_eq!(mids.len(), 2);
        assert_eq!((mids[0].0 .1, mids[0].1 .1), (0.0, 16.0));
        assert_eq!((mids[1].0 .1, mids[1].1 .1), (24.0, 32.0));
        let title = texts(&out.prims)
            .into_iter()
            .find(|(t, _)| t == "Сталь")
            .unwrap();
        assert_eq!(title.1, (42.5, 20.0));
    }

    #[test]
    fn sub_row_split_geometry() {
        let template = BlockNode::split(
            SplitAxis::Vertical,
            vec![
                BlockNode::leaf("a", "A"),
                BlockNode::split(
                    SplitAxis::Horizontal,
                    vec![BlockNode::leaf("b", "B"), BlockNode::leaf("c", "C")],
                ),
            ],
        );
        let mut tkd = Tkd::new(BlockNode::repeating(template));
        tkd.push_data(vec!["1".into(), "2".into(), "3".into()]);
        let spec = spec_for(&tkd, vec![15.0, 70.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        let segs = segments(&out.prims);
        assert_eq!(segs.len(), 8);
        assert_eq!(texts(&out.prims).len(), 6);
        // Sub-row cut sits at half height and spans only the split column.
        assert!(segs
            .iter()
            .any(|(a, b, _)| *a == (15.0, 4.0) && *b == (85.0, 4.0)));
        assert!(segs
            .iter()
            .any(|(a, b, _)| *a == (15.0, 12.0) && *b == (85.0, 12.0)));
        // Text centers of the stacked cells.
        let t = texts(&out.prims);
        assert!(t.iter().any(|(s, at)| s == "2" && *at == (50.0, 10.0)));
        assert!(t.iter().any(|(s, at)| s == "3" && *at == (50.0, 14.0)));
    }

    #[test]
    fn stacked_width_mismatch_is_rejected() {
        let template = BlockNode::split(
            SplitAxis::Vertical,
            vec![
                BlockNode::leaf("a", "A"),
                BlockNode::split(
                    SplitAxis::Horizontal,
                    vec![BlockNode::leaf("b", "B"), BlockNode::leaf("c", "C")],
                ),
            ],
        );
        let tkd = Tkd::new(BlockNode::repeating(template));
        let spec = LayoutSpec::new(vec![15.0, 70.0, 60.0], 8.0);
        assert!(matches!(
            layout(&tkd, &spec),
            Err(TkdError::InconsistentWidths { .. })
        ));
    }

    #[test]
    fn column_line_override_splits_boundary_runs() {
        let mut tkd = two_column(1);
        tkd.restyle(StyleTarget::Column("name".into()), StylePatch::Line(LineTypeId(2)))
            .unwrap();
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        let segs = segments(&out.prims);
        // The band boundary splits at the column edge into two styles.
        assert!(segs
            .iter()
            .any(|(a, b, l)| *a == (0.0, 8.0) && *b == (15.0, 8.0) && *l == LineTypeId(1)));
        assert!(segs
            .iter()
            .any(|(a, b, l)| *a == (15.0, 8.0) && *b == (85.0, 8.0) && *l == LineTypeId(2)));
        // The internal vertical adjacent to the restyled column follows it.
        assert!(segs
            .iter()
            .any(|(a, b, l)| *a == (15.0, 0.0) && *b == (15.0, 16.0) && *l == LineTypeId(2)));
        // The frame does not change.
        assert!(segs
            .iter()
            .any(|(a, b, l)| *a == (0.0, 0.0) && *b == (85.0, 0.0) && *l == LineTypeId(0)));
    }

    #[test]
    fn cell_line_override_beats_column_override() {
        let mut tkd = two_column(1);
        tkd.restyle(StyleTarget::Column("name".into()), StylePatch::Line(LineTypeId(2)))
            .unwrap();
        tkd.restyle(
            StyleTarget::Cell {
                record: 1,
                column: "name".into(),
            },
            StylePatch::Line(LineTypeId(3)),
        )
        .unwrap();
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        let segs = segments(&out.prims);
        assert!(segs
            .iter()
            .any(|(a, b, l)| *a == (15.0, 0.0) && *b == (15.0, 8.0) && *l == LineTypeId(2)));
        assert!(segs
            .iter()
            .any(|(a, b, l)| *a == (15.0, 8.0) && *b == (15.0, 16.0) && *l == LineTypeId(3)));
    }

    #[test]
    fn narrow_cell_reports_overflow() {
        let mut tkd = two_column(1);
        tkd.records[1].values[1] = "Очень длинное наименование".into();
        let spec = spec_for(&tkd, vec![15.0, 20.0], 8.0);
        let out = layout(&tkd, &spec).unwrap();
        assert!(out.warnings.iter().any(|w| {
            let LayoutWarning::OverflowingText {
                place,
                column,
                needed_mm,
                avail_mm,
                ..
            } = w;
            *place == TextPlace::Record(1)
                && column.as_deref() == Some("name")
                && *needed_mm > *avail_mm
        }));
        // Drawn regardless.
        assert!(texts(&out.prims)
            .iter()
            .any(|(t, _)| t == "Очень длинное наименование"));
    }

    #[test]
    fn layout_is_deterministic() {
        let mut tkd = two_column(5);
        tkd.push_section("Прочее");
        tkd.restyle(StyleTarget::Column("pos".into()), StylePatch::Font(FontHeightId(0)))
            .unwrap();
        let spec = spec_for(&tkd, vec![15.0, 70.0], 8.0);
        let a = layout(&tkd, &spec).unwrap();
        let b = layout(&tkd, &spec).unwrap();
        assert_eq!(a, b);
    }

    use crate::geom::FontHeightId;

    #[test]
    fn flat_tables_match_the_counting_formula() {
        // For a flat all-visible table: bands + columns + 2 segments.
        let mut rng = StdRng::seed_from_u64(0x7B01);
        for _ in 0..40 {
            let cols = rng.gen_range(2..=6);
            let rows = rng.gen_range(1..=8);
            let children: Vec<BlockNode> = (0..cols)
                .map(|i| BlockNode::leaf(&format!("c{i}"), &format!("C{i}")))
                .collect();
            let mut tkd = Tkd::new(BlockNode::repeating(BlockNode::split(
                SplitAxis::Vertical,
                children,
            )));
            for r in 0..rows {
                tkd.push_data((0..cols).map(|c| format!("{r}:{c}")).collect());
            }
            let widths: Vec<f64> = (0..cols).map(|_| rng.gen_range(5..=30) as f64).collect();
            let out = layout(&tkd, &LayoutSpec::new(widths, 8.0)).unwrap();
            let bands = 1 + rows;
            assert_eq!(segments(&out.prims).len(), bands + cols + 2);
        }
    }

    // Random all-visible trees: merged segments must cover exactly the union
    // of every cell rectangle's edges, band by band.
    #[test]
    fn random_trees_cover_cell_rectangle_edges() {
        let mut rng = StdRng::seed_from_u64(0x7B02);
        for _ in 0..60 {
            let mut names = 0;
            let tree = gen_tree(&mut rng, 0, &mut names);
            let mut widths = Vec::new();
            let total = rng.gen_range(40..=120) as f64;
            assign_widths(&tree, total, &mut rng, &mut widths);
            let mut tkd = Tkd::new(BlockNode::repeating(tree));
            let cols = tkd.leaf_count();
            let rows = rng.gen_range(0..=4);
            for r in 0..rows {
                tkd.push_data((0..cols).map(|c| format!("{r}{c}")).collect());
            }
            let rh = rng.gen_range(6..=12) as f64;
            let spec = LayoutSpec::new(widths.clone(), rh);
            let out = layout(&tkd, &spec).unwrap();

            let mut got = CoverageMap::new();
            for (a, b, _) in segments(&out.prims) {
                got.add_segment(a, b);
            }
            let mut want = CoverageMap::new();
            let bt = band_template(&tkd, &spec).unwrap();
            for bi in 0..tkd.records.len() {
                let y = bi as f64 * rh;
                for c in &bt.cells {
                    want.add_segment((c.x0, y + c.y0), (c.x1, y + c.y0));
                    want.add_segment((c.x0, y + c.y1), (c.x1, y + c.y1));
                    want.add_segment((c.x0, y + c.y0), (c.x0, y + c.y1));
                    want.add_segment((c.x1, y + c.y0), (c.x1, y + c.y1));
                }
            }
            assert_eq!(got.normalized(), want.normalized());
        }
    }

    fn gen_tree(rng: &mut StdRng, depth: usize, names: &mut usize) -> BlockNode {
        let make_leaf = depth >= 3 || rng.gen_bool(if depth == 0 { 0.0 } else { 0.45 });
        if make_leaf {
            let id = *names;
            *names += 1;
            return BlockNode::leaf(&format!("k{id}"), &format!("K{id}"));
        }
        let axis = if rng.gen_bool(0.6) {
            SplitAxis::Vertical
        } else {
            SplitAxis::Horizontal
        };
        let n = rng.gen_range(2..=3);
        let children = (0..n).map(|_| gen_tree(rng, depth + 1, names)).collect();
        BlockNode::split(axis, children)
    }

    // Leaf widths satisfying the stacking constraint: all children of a
    // horizontal split share their parent's width.
    fn assign_widths(node: &BlockNode, width: f64, rng: &mut StdRng, out: &mut Vec<f64>) {
        match node {
            BlockNode::Leaf(_) => out.push(width),
            BlockNode::Split { axis, children, .. } => match axis {
                SplitAxis::Horizontal => {
                    for child in children {
                        assign_widths(child, width, rng, out);
                    }
                }
                SplitAxis::Vertical => {
                    let n = children.len();
                    let mut parts = vec![width / n as f64; n];
                    // Integer-mm jitter keeps the partition exact in sum.
                    if width >= 2.0 * n as f64 + 2.0 {
                        let shift = rng.gen_range(0.0..1.0_f64).floor() + 1.0;
                        parts[0] += shift;
                        parts[n - 1] -= shift;
                    }
                    for (child, part) in children.iter().zip(parts) {
                        assign_widths(child, part, rng, out);
                    }
                }
            },
        }
    }

    // Interval coverage per grid line, micrometer-keyed.
    struct CoverageMap {
        lines: BTreeMap<(u8, i64), Vec<(i64, i64)>>,
    }

    impl CoverageMap {
        fn new() -> CoverageMap {
            CoverageMap {
                lines: BTreeMap::new(),
            }
        }

        fn add_segment(&mut self, a: (f64, f64), b: (f64, f64)) {
            let um = |v: f64| (v * 1000.0).round() as i64;
            if (a.1 - b.1).abs() <= EPS {
                let (lo, hi) = if a.0 <= b.0 { (a.0, b.0) } else { (b.0, a.0) };
                self.lines
                    .entry((0, um(a.1)))
                    .or_default()
                    .push((um(lo), um(hi)));
            } else {
                let (lo, hi) = if a.1 <= b.1 { (a.1, b.1) } else { (b.1, a.1) };
                self.lines
                    .entry((1, um(a.0)))
                    .or_default()
                    .push((um(lo), um(hi)));
            }
        }

        fn normalized(&self) -> BTreeMap<(u8, i64), Vec<(i64, i64)>> {
            let mut out = BTreeMap::new();
            for (key, intervals) in &self.lines {
                let mut sorted = intervals.clone();
                sorted.sort_unstable();
                let mut merged: Vec<(i64, i64)> = Vec::new();
                for (lo, hi) in sorted {
                    match merged.last_mut() {
                        Some(last) if lo <= last.1 + 1 => last.1 = last.1.max(hi),
                        _ => merged.push((lo, hi)),
                    }
                }
                out.insert(*key, merged);
            }
            out
        }
    }
}
