//! The drawing file format.
//!
//! UTF-8, line oriented:
//! ```text
//! TCGXD 1
//! SHEET "<name>"
//! SCALE 1:<n>
//! ELEM segment   <space> <line> <x0> <y0> <x1> <y1>
//! ELEM polyline  <space> <line> <n> <x y>...
//! ELEM text      <space> <font> <angle> <x> <y> "<content>"
//! ELEM magistral <space> <line> <interval> <offset> "<code>" <n> <x y>...
//! ELEM raster    paper   -      "<file>" <dpi> <w_px> <h_px> <x> <y>
//! MODULE parametric            (prototype sections follow, then END)
//! MODULE table <x> <y>         (table sections follow, then END)
//! END
//! ```
//! Spaces are `natural` or `paper`; style slots are table ids. Coordinates
//! write at stored precision in shortest round-trip form, so save and load
//! compose to the identity byte-for-byte.

use std::path::Path;

use super::coord::{StoredCoord, StoredPoint};
use super::drawing::Drawing;
use super::element::{Element, Magistral, ModulePayload, RasterRef, Space};
use super::scale::DrawingScale;
use super::style::{FontHeightId, LineTypeId, TextAngleId};
use super::GeomError;
use crate::parmod::{instance_to_sections, parse_instance_sections, TypeRegistry};
use crate::textio::{fmt_f32, fmt_f64, quote, tokenize, Token};
use crate::tkd::{parse_sections, sections_to_string};

const MAGIC: &str = "TCGXD 1";

fn space_word(s: Space) -> &'static str {
    match s {
        Space::Natural => "natural",
        Space::Paper => "paper",
    }
}

fn coord(out: &mut String, c: StoredCoord) {
    out.push(' ');
    out.push_str(&fmt_f32(c.raw()));
}

fn point(out: &mut String, p: StoredPoint) {
    coord(out, p.x);
    coord(out, p.y);
}

pub fn drawing_to_string(drawing: &Drawing) -> String {
    let mut out = format!(
        "{MAGIC}\nSHEET {}\nSCALE {}\n",
        quote(&drawing.sheet),
        drawing.scale
    );
    for element in drawing.elements() {
        match element {
            Element::Segment { a, b, line, space } => {
                out.push_str(&format!("ELEM segment {} {}", space_word(*space), line.0));
                point(&mut out, *a);
                point(&mut out, *b);
                out.push('\n');
            }
            Element::Polyline { points, line, space } => {
                out.push_str(&format!(
                    "ELEM polyline {} {} {}",
                    space_word(*space),
                    line.0,
                    points.len()
                ));
                for p in points {
                    point(&mut out, *p);
                }
                out.push('\n');
            }
            Element::Text {
                at,
                content,
                font,
                angle,
                space,
            } => {
                out.push_str(&format!(
                    "ELEM text {} {} {}",
                    space_word(*space),
                    font.0,
                    angle.0
                ));
                point(&mut out, *at);
                out.push(' ');
                out.push_str(&quote(content));
                out.push('\n');
            }
            Element::Magistral(m) => {
                out.push_str(&format!(
                    "ELEM magistral {} {} {} {} {} {}",
                    space_word(m.space),
                    m.line.0,
                    fmt_f64(m.mark_interval),
                    fmt_f64(m.first_mark_offset),
                    quote(&m.mark_code),
                    m.path.len()
                ));
                for p in &m.path {
                    point(&mut out, *p);
                }
                out.push('\n');
            }
            Element::Raster(r) => {
                out.push_str(&format!(
                    "ELEM raster paper - {} {} {} {}",
                    quote(&r.file),
                    r.dpi,
                    r.width_px,
                    r.height_px
                ));
                point(&mut out, r.origin);
                out.push('\n');
            }
            Element::Module(payload) => match payload.as_ref() {
                ModulePayload::Parametric(instance) => {
                    out.push_str("MODULE parametric\n");
                    out.push_str(&instance_to_sections(instance));
                    out.push_str("END\n");
                }
                ModulePayload::Table { origin, tkd, layout } => {
                    out.push_str("MODULE table");
                    point(&mut out, *origin);
                    out.push('\n');
                    out.push_str(&sections_to_string(tkd, layout));
                    out.push_str("END\n");
                }
            },
        }
    }
    out.push_str("END\n");
    out
}

pub fn save_drawing(path: &Path, drawing: &Drawing) -> Result<(), GeomError> {
    std::fs::write(path, drawing_to_string(drawing))?;
    Ok(())
}

pub fn load_drawing(path: &Path, registry: &TypeRegistry) -> Result<Drawing, GeomError> {
    let text = std::fs::read_to_string(path)?;
    parse_drawing(&text, &path.display().to_string(), registry)
}

struct Reader<'a> {
    file: &'a str,
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Reader<'a> {
    fn err(&self, line: usize, msg: String) -> GeomError {
        GeomError::Parse {
            file: self.file.to_string(),
            line,
            msg,
        }
    }

    fn next_nonempty(&mut self) -> Option<(usize, &'a str)> {
        while self.pos < self.lines.len() {
            let (n, text) = self.lines[self.pos];
            self.pos += 1;
            if !text.trim().is_empty() {
                return Some((n, text));
            }
        }
        None
    }

    fn tokens(&self, line: usize, text: &str) -> Result<Vec<Token>, GeomError> {
        tokenize(text, self.file, line).map_err(|e| self.err(line, e.to_string()))
    }

    /// Collects raw lines until a bare END, exclusive.
    fn block(&mut self, start: usize) -> Result<(usize, String), GeomError> {
        let first = self
            .lines
            .get(self.pos)
            .map(|(n, _)| *n)
            .ok_or_else(|| self.err(start, "unterminated block".to_string()))?;
        let mut body = String::new();
        while self.pos < self.lines.len() {
            let (_, text) = self.lines[self.pos];
            if text.trim() == "END" {
                self.pos += 1;
                return Ok((first, body));
            }
            body.push_str(text);
            body.push('\n');
            self.pos += 1;
        }
        Err(self.err(start, "unterminated block".to_string()))
    }
}

struct Args<'a, 'r> {
    reader: &'a Reader<'r>,
    line: usize,
    tokens: &'a [Token],
    at: usize,
}

impl Args<'_, '_> {
    fn take(&mut self) -> Result<&Token, GeomError> {
        let t = self
            .tokens
            .get(self.at)
            .ok_or_else(|| self.reader.err(self.line, "missing argument".to_string()))?;
        self.at += 1;
        Ok(t)
    }

    fn word(&mut self, what: &str) -> Result<String, GeomError> {
        let line = self.line;
        let t = self.take()?;
        match t {
            Token::Word(w) => Ok(w.clone()),
            Token::Quoted(_) => Err(self.reader.err(line, format!("{what} must be unquoted"))),
        }
    }

    fn text(&mut self) -> Result<String, GeomError> {
        Ok(self.take()?.text().to_string())
    }

    fn space(&mut self) -> Result<Space, GeomError> {
        let line = self.line;
        match self.word("space")?.as_str() {
            "natural" => Ok(Space::Natural),
            "paper" => Ok(Space::Paper),
            other => Err(self.reader.err(line, format!("unknown space '{other}'"))),
        }
    }

    fn id(&mut self, what: &str) -> Result<u8, GeomError> {
        let line = self.line;
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| self.reader.err(line, format!("bad {what} '{w}'")))
    }

    fn int(&mut self, what: &str) -> Result<u32, GeomError> {
        let line = self.line;
        let w = self.word(what)?;
        w.parse()
            .map_err(|_| self.reader.err(line, format!("bad {what} '{w}'")))
    }

    fn count(&mut self) -> Result<usize, GeomError> {
        Ok(self.int("count")? as usize)
    }

    fn number(&mut self, what: &str) -> Result<f64, GeomError> {
        let line = self.line;
        let w = self.word(what)?;
        let v: f64 = w
            .parse()
            .map_err(|_| self.reader.err(line, format!("bad {what} '{w}'")))?;
        if !v.is_finite() {
            return Err(self.reader.err(line, format!("bad {what} '{w}'")));
        }
        Ok(v)
    }

    fn coord(&mut self) -> Result<StoredCoord, GeomError> {
        let line = self.line;
        let w = self.word("coordinate")?;
        let raw: f32 = w
            .parse()
            .map_err(|_| self.reader.err(line, format!("bad coordinate '{w}'")))?;
        StoredCoord::from_raw(raw)
    }

    fn point(&mut self) -> Result<StoredPoint, GeomError> {
        Ok(StoredPoint {
            x: self.coord()?,
            y: self.coord()?,
        })
    }

    fn points(&mut self, n: usize) -> Result<Vec<StoredPoint>, GeomError> {
        (0..n).map(|_| self.point()).collect()
    }

    fn finish(self) -> Result<(), GeomError> {
        if self.at != self.tokens.len() {
            return Err(self
                .reader
                .err(self.line, "trailing tokens".to_string()));
        }
        Ok(())
    }
}

pub fn parse_drawing(
    text: &str,
    file: &str,
    registry: &TypeRegistry,
) -> Result<Drawing, GeomError> {
    let mut reader = Reader {
        file,
        lines: text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect(),
        pos: 0,
    };

    let (n, magic) = reader
        .next_nonempty()
        .ok_or_else(|| reader.err(1, "empty file".to_string()))?;
    if magic.trim() != MAGIC {
        return Err(reader.err(n, format!("expected '{MAGIC}'")));
    }

    let (n, sheet_line) = reader
        .next_nonempty()
        .ok_or_else(|| reader.err(n, "expected SHEET".to_string()))?;
    let sheet_tokens = reader.tokens(n, sheet_line)?;
    if sheet_tokens.len() != 2 || sheet_tokens[0].text() != "SHEET" {
        return Err(reader.err(n, "expected SHEET \"<name>\"".to_string()));
    }
    let sheet = sheet_tokens[1].text().to_string();

    let (n, scale_line) = reader
        .next_nonempty()
        .ok_or_else(|| reader.err(n, "expected SCALE".to_string()))?;
    let scale_tokens = reader.tokens(n, scale_line)?;
    if scale_tokens.len() != 2 || scale_tokens[0].text() != "SCALE" {
        return Err(reader.err(n, "expected SCALE <a>:<b>".to_string()));
    }
    let scale =
        DrawingScale::parse(scale_tokens[1].text()).map_err(|e| reader.err(n, e.to_string()))?;

    let mut drawing = Drawing::new(scale, &sheet);
    let mut closed = false;
    while let Some((n, line)) = reader.next_nonempty() {
        if line.trim() == "END" {
            closed = true;
            break;
        }
        let tokens = reader.tokens(n, line)?;
        let element = match tokens[0].text() {
            "ELEM" => {
                let mut args = Args {
                    reader: &reader,
                    line: n,
                    tokens: &tokens,
                    at: 1,
                };
                let kind = args.word("kind")?;
                let element = match kind.as_str() {
                    "segment" => {
                        let space = args.space()?;
                        let line_id = LineTypeId(args.id("line type")?);
                        let a = args.point()?;
                        let b = args.point()?;
                        Element::Segment {
                            a,
                            b,
                            line: line_id,
                            space,
                        }
                    }
                    "polyline" => {
                        let space = args.space()?;
                        let line_id = LineTypeId(args.id("line type")?);
                        let count = args.count()?;
                        Element::Polyline {
                            points: args.points(count)?,
                            line: line_id,
                            space,
                        }
                    }
                    "text" => {
                        let space = args.space()?;
                        let font = FontHeightId(args.id("font height")?);
                        let angle = TextAngleId(args.id("text angle")?);
                        let at = args.point()?;
                        let content = args.text()?;
                        Element::Text {
                            at,
                            content,
                            font,
                            angle,
                            space,
                        }
                    }
                    "magistral" => {
                        let space = args.space()?;
                        let line_id = LineTypeId(args.id("line type")?);
                        let interval = args.number("mark interval")?;
                        let offset = args.number("mark offset")?;
                        let code = args.text()?;
                        let count = args.count()?;
                        let path = args.points(count)?;
                        Element::Magistral(
                            Magistral::new(path, &code, interval, offset, line_id, space)
                                .map_err(|e| reader.err(n, e.to_string()))?,
                        )
                    }
                    "raster" => {
                        let space = args.space()?;
                        if space != Space::Paper {
                            return Err(reader.err(n, "rasters live on paper".to_string()));
                        }
                        let dash = args.word("style")?;
                        if dash != "-" {
                            return Err(reader.err(n, "rasters take no style".to_string()));
                        }
                        let file_name = args.text()?;
                        let dpi = args.int("dpi")?;
                        let width_px = args.int("width")?;
                        let height_px = args.int("height")?;
                        let origin = args.point()?;
                        Element::Raster(RasterRef {
                            file: file_name,
                            dpi,
                            width_px,
                            height_px,
                            origin,
                        })
                    }
                    other => return Err(reader.err(n, format!("unknown element kind '{other}'"))),
                };
                args.finish()?;
                element
            }
            "MODULE" => {
                let mut args = Args {
                    reader: &reader,
                    line: n,
                    tokens: &tokens,
                    at: 1,
                };
                let form = args.word("module form")?;
                match form.as_str() {
                    "parametric" => {
                        args.finish()?;
                        let (first, body) = reader.block(n)?;
                        let mut instance =
                            parse_instance_sections(&body, file, first, registry)
                                .map_err(|e| GeomError::Module(e.to_string()))?;
                        let dangling = instance.validate_integrity();
                        if !dangling.is_empty() {
                            return Err(GeomError::Module(format!(
                                "{file}:{first}: dangling references in embedded module"
                            )));
                        }
                        instance
                            .regenerate(registry)
                            .map_err(|e| GeomError::Module(e.to_string()))?;
                        Element::module(ModulePayload::Parametric(instance))
                    }
                    "table" => {
                        let origin = args.point()?;
                        args.finish()?;
                        let (first, body) = reader.block(n)?;
                        let (tkd, layout) = parse_sections(&body, file, first)
                            .map_err(|e| GeomError::Module(e.to_string()))?;
                        Element::module(ModulePayload::Table {
                            origin,
                            tkd,
                            layout,
                        })
                    }
                    other => return Err(reader.err(n, format!("unknown module form '{other}'"))),
                }
            }
            other => return Err(reader.err(n, format!("unexpected '{other}'"))),
        };
        drawing
            .add_element(element)
            .map_err(|e| reader.err(n, e.to_string()))?;
    }
    if !closed {
        let last = reader.lines.last().map(|(n, _)| *n).unwrap_or(1);
        return Err(reader.err(last, "missing END trailer".to_string()));
    }
    if let Some((n, extra)) = reader.next_nonempty() {
        return Err(reader.err(n, format!("unexpected '{}' after END", extra.trim())));
    }
    Ok(drawing)
}
