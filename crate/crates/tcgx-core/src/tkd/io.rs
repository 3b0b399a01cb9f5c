//! Table-document text format.
//!
//! A standalone `.tkd` file is `TKD 1`, the sections `TREE`, `RECORDS`,
//! `STYLE` and `LAYOUT`, then `END`. The same section block embeds verbatim
//! inside drawing files. Writers emit one canonical form: quoted strings,
//! single spaces, style overrides in key order; loading and saving a
//! canonical file reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::layout::{LayoutSpec, RepeatBand, RunDirection};
use super::record::{RecordKind, Tkd, TkdRecord, TkdStyle};
use super::tree::{BlockNode, LeafCell, Parts, SplitAxis};
use super::TkdError;
use crate::geom::{FontHeightId, LineTypeId, StyleTables};
use crate::textio::{fmt_f64, join, quote, tokenize, Token};

pub fn save_tkd(path: &Path, tkd: &Tkd, spec: &LayoutSpec) -> Result<(), TkdError> {
    let mut out = String::from("TKD 1\n");
    out.push_str(&sections_to_string(tkd, spec));
    out.push_str("END\n");
    fs::write(path, out)?;
    Ok(())
}

pub fn load_tkd(path: &Path) -> Result<(Tkd, LayoutSpec), TkdError> {
    let file = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let lines: Vec<&str> = text.lines().collect();
    if lines.first().copied() != Some("TKD 1") {
        return Err(TkdError::Parse {
            file,
            line: 1,
            msg: "expected 'TKD 1'".into(),
        });
    }
    if lines.last().copied() != Some("END") {
        return Err(TkdError::Parse {
            file,
            line: lines.len(),
            msg: "expected trailing 'END'".into(),
        });
    }
    let body = lines[1..lines.len() - 1].join("\n");
    parse_sections(&body, &file, 2)
}

/// The TREE/RECORDS/STYLE/LAYOUT block without framing lines.
pub fn sections_to_string(tkd: &Tkd, spec: &LayoutSpec) -> String {
    let mut out = String::from("TREE\n");
    write_node(&mut out, &tkd.tree);

    out.push_str("RECORDS\n");
    for record in &tkd.records {
        let mut tokens: Vec<String> = vec!["REC".into()];
        match &record.kind {
            RecordKind::Header => {
                tokens.push("header".into());
                tokens.extend(record.values.iter().map(|v| quote(v)));
            }
            RecordKind::Data => {
                tokens.push("data".into());
                tokens.extend(record.values.iter().map(|v| quote(v)));
            }
            RecordKind::SectionHeader(title) => {
                tokens.push("section".into());
                tokens.push(quote(title));
            }
        }
        out.push_str(&join(&tokens));
        out.push('\n');
    }

    out.push_str("STYLE\n");
    let s = &tkd.style;
    out.push_str(&format!("DEFAULT font {}\n", s.default_font.0));
    out.push_str(&format!("FRAME line {}\n", s.frame_line.0));
    out.push_str(&format!("GRID line {}\n", s.grid_line.0));
    for (key, id) in &s.column_font {
        out.push_str(&format!("COL {} font {}\n", quote(key), id.0));
    }
    for (key, id) in &s.column_line {
        out.push_str(&format!("COL {} line {}\n", quote(key), id.0));
    }
    for ((record, key), id) in &s.cell_font {
        out.push_str(&format!("CELL {record} {} font {}\n", quote(key), id.0));
    }
    for ((record, key), id) in &s.cell_line {
        out.push_str(&format!("CELL {record} {} line {}\n", quote(key), id.0));
    }

    out.push_str("LAYOUT\n");
    let widths: Vec<String> = spec.widths.iter().map(|w| fmt_f64(*w)).collect();
    out.push_str(&format!("WIDTHS {}\n", join(&widths)));
    out.push_str(&format!("ROWH {}\n", fmt_f64(spec.row_height)));
    if let Some(ch) = spec.chunk_height {
        out.push_str(&format!("CHUNKH {}\n", fmt_f64(ch)));
    }
    out.push_str(match spec.continuation {
        RunDirection::Right => "DIR right\n",
        RunDirection::Left => "DIR left\n",
    });
    out.push_str(match spec.repeat {
        RepeatBand::HeaderRow => "REPEAT header\n",
        RepeatBand::ColumnNumberRow => "REPEAT numbers\n",
    });
    out
}

fn write_node(out: &mut String, node: &BlockNode) {
    match node {
        BlockNode::Leaf(c) => {
            let unit = c.unit.as_deref().map(quote).unwrap_or_else(|| "-".into());
            let enk = c
                .enk_keyword
                .as_deref()
                .map(quote)
                .unwrap_or_else(|| "-".into());
            let tokens = [
                "CELL".to_string(),
                quote(&c.column_key),
                quote(&c.header_text),
                unit,
                enk,
            ];
            out.push_str(&join(&tokens));
            out.push('\n');
        }
        BlockNode::Split {
            axis,
            parts,
            visible_in_header,
            visible_in_data,
            children,
        } => {
            out.push_str(&format!(
                "SPLIT {} {} {} {} {}\n",
                match axis {
                    SplitAxis::Vertical => "V",
                    SplitAxis::Horizontal => "H",
                },
                match parts {
                    Parts::Fixed => "fixed",
                    Parts::Arbitrary => "arbitrary",
                },
                u8::from(*visible_in_header),
                u8::from(*visible_in_data),
                children.len()
            ));
            for child in children {
                write_node(out, child);
            }
        }
    }
}

/// Parses a TREE/RECORDS/STYLE/LAYOUT block. `first_line` is the file line
/// number of the block's first line, so errors in embedded blocks point into
/// the surrounding file.
pub fn parse_sections(text: &str, file: &str, first_line: usize) -> Result<(Tkd, LayoutSpec), TkdError> {
    let mut cur = Cursor {
        file: file.to_string(),
        lines: text
            .lines()
            .enumerate()
            .map(|(i, l)| (first_line + i, l.to_string()))
            .collect(),
        pos: 0,
    };

    cur.expect_keyword("TREE")?;
    let tree = parse_node(&mut cur)?;
    let leaf_count = tree.leaf_cells().len();

    cur.expect_keyword("RECORDS")?;
    let mut records = Vec::new();
    while cur.peek_word("REC") {
        let (line, tokens) = cur.next()?;
        let kind = word(&cur, line, &tokens, 1)?;
        match kind {
            "header" | "data" => {
                let values: Vec<String> =
                    tokens[2..].iter().map(|t| t.text().to_string()).collect();
                records.push(TkdRecord {
                    kind: if kind == "header" {
                        RecordKind::Header
                    } else {
                        RecordKind::Data
                    },
                    values,
                });
            }
            "section" => {
                let title = text_at(&cur, line, &tokens, 2)?;
                records.push(TkdRecord {
                    kind: RecordKind::SectionHeader(title.to_string()),
                    values: vec![String::new(); leaf_count],
                });
            }
            other => return Err(cur.err(line, format!("unknown record kind '{other}'"))),
        }
    }

    cur.expect_keyword("STYLE")?;
    let mut style = TkdStyle {
        default_font: parse_fixed_style(&mut cur, "DEFAULT", "font")?.into_font(),
        frame_line: LineTypeId(0),
        grid_line: LineTypeId(1),
        column_font: BTreeMap::new(),
        column_line: BTreeMap::new(),
        cell_font: BTreeMap::new(),
        cell_line: BTreeMap::new(),
    };
    style.frame_line = parse_fixed_style(&mut cur, "FRAME", "line")?.into_line();
    style.grid_line = parse_fixed_style(&mut cur, "GRID", "line")?.into_line();
    loop {
        if cur.peek_word("COL") {
            let (line, tokens) = cur.next()?;
            let key = text_at(&cur, line, &tokens, 1)?.to_string();
            match style_patch(&cur, line, &tokens, 2)? {
                StyleKind::Font(f) => {
                    style.column_font.insert(key, f);
                }
                StyleKind::Line(l) => {
                    style.column_line.insert(key, l);
                }
            }
        } else if cur.peek_word("CELL") {
            let (line, tokens) = cur.next()?;
            let record: usize = word(&cur, line, &tokens, 1)?
                .parse()
                .map_err(|_| cur.err(line, "bad record index"))?;
            let key = text_at(&cur, line, &tokens, 2)?.to_string();
            match style_patch(&cur, line, &tokens, 3)? {
                StyleKind::Font(f) => {
                    style.cell_font.insert((record, key), f);
                }
                StyleKind::Line(l) => {
                    style.cell_line.insert((record, key), l);
                }
            }
        } else {
            break;
        }
    }

    cur.expect_keyword("LAYOUT")?;
    let (line, tokens) = cur.next()?;
    if word(&cur, line, &tokens, 0)? != "WIDTHS" {
        return Err(cur.err(line, "expected WIDTHS"));
    }
    let mut widths = Vec::new();
    for t in &tokens[1..] {
        widths.push(number(&cur, line, t)?);
    }
    let (line, tokens) = cur.next()?;
    if word(&cur, line, &tokens, 0)? != "ROWH" {
        return Err(cur.err(line, "expected ROWH"));
    }
    let row_height = number(&cur, line, token_at(&cur, line, &tokens, 1)?)?;
    let mut spec = LayoutSpec::new(widths, row_height);
    if cur.peek_word("CHUNKH") {
        let (line, tokens) = cur.next()?;
        spec.chunk_height = Some(number(&cur, line, token_at(&cur, line, &tokens, 1)?)?);
    }
    let (line, tokens) = cur.next()?;
    if word(&cur, line, &tokens, 0)? != "DIR" {
        return Err(cur.err(line, "expected DIR"));
    }
    spec.continuation = match word(&cur, line, &tokens, 1)? {
        "right" => RunDirection::Right,
        "left" => RunDirection::Left,
        other => return Err(cur.err(line, format!("unknown direction '{other}'"))),
    };
    let (line, tokens) = cur.next()?;
    if word(&cur, line, &tokens, 0)? != "REPEAT" {
        return Err(cur.err(line, "expected REPEAT"));
    }
    spec.repeat = match word(&cur, line, &tokens, 1)? {
        "header" => RepeatBand::HeaderRow,
        "numbers" => RepeatBand::ColumnNumberRow,
        other => return Err(cur.err(line, format!("unknown repeat row '{other}'"))),
    };
    if let Some((line, text)) = cur.peek_raw() {
        return Err(cur.err(line, format!("unexpected trailing line '{text}'")));
    }

    Ok((Tkd {
        tree,
        records,
        style,
    },
    spec))
}

fn parse_node(cur: &mut Cursor) -> Result<BlockNode, TkdError> {
    let (line, tokens) = cur.next()?;
    match word(cur, line, &tokens, 0)? {
        "CELL" => {
            let key = text_at(cur, line, &tokens, 1)?.to_string();
            let header = text_at(cur, line, &tokens, 2)?.to_string();
            let unit = optional_at(cur, line, &tokens, 3)?;
            let enk = optional_at(cur, line, &tokens, 4)?;
            Ok(BlockNode::Leaf(LeafCell {
                column_key: key,
                header_text: header,
                unit,
                enk_keyword: enk,
            }))
        }
        "SPLIT" => {
            let axis = match word(cur, line, &tokens, 1)? {
                "V" => SplitAxis::Vertical,
                "H" => SplitAxis::Horizontal,
                other => return Err(cur.err(line, format!("unknown axis '{other}'"))),
            };
            let parts = match word(cur, line, &tokens, 2)? {
                "fixed" => Parts::Fixed,
                "arbitrary" => Parts::Arbitrary,
                other => return Err(cur.err(line, format!("unknown split kind '{other}'"))),
            };
            let visible_in_header = flag(cur, line, &tokens, 3)?;
            let visible_in_data = flag(cur, line, &tokens, 4)?;
            let n: usize = word(cur, line, &tokens, 5)?
                .parse()
                .map_err(|_| cur.err(line, "bad child count"))?;
            let mut children = Vec::with_capacity(n);
            for _ in 0..n {
                children.push(parse_node(cur)?);
            }
            Ok(BlockNode::Split {
                axis,
                parts,
                visible_in_header,
                visible_in_data,
                children,
            })
        }
        other => Err(cur.err(line, format!("expected CELL or SPLIT, got '{other}'"))),
    }
}

enum StyleKind {
    Font(FontHeightId),
    Line(LineTypeId),
}

impl StyleKind {
    fn into_font(self) -> FontHeightId {
        match self {
            StyleKind::Font(f) => f,
            StyleKind::Line(_) => unreachable!("checked by the caller"),
        }
    }

    fn into_line(self) -> LineTypeId {
        match self {
            StyleKind::Line(l) => l,
            StyleKind::Font(_) => unreachable!("checked by the caller"),
        }
    }
}

fn parse_fixed_style(cur: &mut Cursor, keyword: &str, want: &str) -> Result<StyleKind, TkdError> {
    let (line, tokens) = cur.next()?;
    if word(cur, line, &tokens, 0)? != keyword {
        return Err(cur.err(line, format!("expected {keyword}")));
    }
    let kind = style_patch(cur, line, &tokens, 1)?;
    let ok = matches!(
        (&kind, want),
        (StyleKind::Font(_), "font") | (StyleKind::Line(_), "line")
    );
    if !ok {
        return Err(cur.err(line, format!("{keyword} takes a {want} id")));
    }
    Ok(kind)
}

/// `font <id>` or `line <id>` at token offset `at`; the id must resolve in
/// the style tables.
fn style_patch(
    cur: &Cursor,
    line: usize,
    tokens: &[Token],
    at: usize,
) -> Result<StyleKind, TkdError> {
    let which = word(cur, line, tokens, at)?;
    let id: u8 = word(cur, line, tokens, at + 1)?
        .parse()
        .map_err(|_| cur.err(line, "bad style id"))?;
    let tables = StyleTables::standard();
    match which {
        "font" => {
            tables
                .font_height(FontHeightId(id))
                .map_err(|e| cur.err(line, e.to_string()))?;
            Ok(StyleKind::Font(FontHeightId(id)))
        }
        "line" => {
            tables
                .line_type(LineTypeId(id))
                .map_err(|e| cur.err(line, e.to_string()))?;
            Ok(StyleKind::Line(LineTypeId(id)))
        }
        other => Err(cur.err(line, format!("expected font or line, got '{other}'"))),
    }
}

struct Cursor {
    file: String,
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl Cursor {
    fn err(&self, line: usize, msg: impl Into<String>) -> TkdError {
        TkdError::Parse {
            file: self.file.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn peek_raw(&self) -> Option<(usize, &str)> {
        self.lines.get(self.pos).map(|(n, l)| (*n, l.as_str()))
    }

    fn peek_word(&self, keyword: &str) -> bool {
        match self.peek_raw() {
            Some((_, l)) => {
                l == keyword || l.starts_with(&format!("{keyword} "))
            }
            None => false,
        }
    }

    fn next(&mut self) -> Result<(usize, Vec<Token>), TkdError> {
        let (line, text) = self
            .peek_raw()
            .map(|(n, l)| (n, l.to_string()))
            .ok_or_else(|| {
                let last = self.lines.last().map(|(n, _)| *n).unwrap_or(1);
                self.err(last, "unexpected end of block")
            })?;
        self.pos += 1;
        let tokens = tokenize(&text, &self.file, line).map_err(|e| self.err(line, e.to_string()))?;
        Ok((line, tokens))
    }

    fn expect_keyword(&mut self, keyword: &str) -> Result<(), TkdError> {
        let (line, tokens) = self.next()?;
        if tokens.len() == 1 && tokens[0].text() == keyword {
            Ok(())
        } else {
            Err(self.err(line, format!("expected {keyword}")))
        }
    }
}

fn token_at<'a>(
    cur: &Cursor,
    line: usize,
    tokens: &'a [Token],
    at: usize,
) -> Result<&'a Token, TkdError> {
    tokens
        .get(at)
        .ok_or_else(|| cur.err(line, "missing field"))
}

fn word<'a>(cur: &Cursor, line: usize, tokens: &'a [Token], at: usize) -> Result<&'a str, TkdError> {
    match token_at(cur, line, tokens, at)? {
        Token::Word(w) => Ok(w),
        Token::Quoted(_) => Err(cur.err(line, "expected a bare word, got a string")),
    }
}

fn text_at<'a>(cur: &Cursor, line: usize, tokens: &'a [Token], at: usize) -> Result<&'a str, TkdError> {
    Ok(token_at(cur, line, tokens, at)?.text())
}

/// Quoted string or the bare placeholder `-` for absent.
fn optional_at(
    cur: &Cursor,
    line: usize,
    tokens: &[Token],
    at: usize,
) -> Result<Option<String>, TkdError> {
    match token_at(cur, line, tokens, at)? {
        Token::Word(w) if w == "-" => Ok(None),
        Token::Quoted(s) => Ok(Some(s.clone())),
        Token::Word(_) => Err(cur.err(line, "expected a quoted string or '-'")),
    }
}

fn flag(cur: &Cursor, line: usize, tokens: &[Token], at: usize) -> Result<bool, TkdError> {
    match word(cur, line, tokens, at)? {
        "1" => Ok(true),
        "0" => Ok(false),
        other => Err(cur.err(line, format!("expected 0 or 1, got '{other}'"))),
    }
}

fn number(cur: &Cursor, line: usize, token: &Token) -> Result<f64, TkdError> {
    let v: f64 = token
        .text()
        .parse()
        .map_err(|_| cur.err(line, format!("bad number '{}'", token.text())))?;
    if !v.is_finite() {
        return Err(cur.err(line, "number must be finite"));
    }
    Ok(v)
}
