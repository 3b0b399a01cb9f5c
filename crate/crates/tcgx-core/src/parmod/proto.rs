//! Prototype libraries: parametric representations serialized to text.
//!
//! File shape:
//! ```text
//! PROTO "<type name>" <version>
//! PARAMS <n>
//! P "<name>" <value>
//! LIST "<name>" <count>
//! O <field values in schema order>
//! END
//! ```
//! Params are written sorted by name and lists in schema order, so the
//! serialization is byte-stable. Values encode by declared kind: numbers in
//! shortest round-trip form, texts quoted, flags as 0/1, points as two
//! stored-precision numbers, refs and style ids as integers.

use std::path::{Path, PathBuf};

use super::descriptor::{FieldKind, TypeRegistry, Value};
use super::instance::ModuleInstance;
use super::ModError;
use crate::geom::{LineTypeId, StoredCoord, StoredPoint};
use crate::textio::{fmt_f32, fmt_f64, quote, tokenize, Token};

/// A directory of prototypes keyed by name.
#[derive(Debug, Clone)]
pub struct PrototypeLibrary {
    dir: PathBuf,
}

impl PrototypeLibrary {
    pub fn open(dir: &Path) -> Result<PrototypeLibrary, ModError> {
        std::fs::create_dir_all(dir)?;
        Ok(PrototypeLibrary {
            dir: dir.to_path_buf(),
        })
    }

    pub fn path_for(&self, name: &str) -> Result<PathBuf, ModError> {
        if name.is_empty()
            || name.starts_with('.')
            || name.chars().any(|c| c == '/' || c == '\\' || c.is_control())
        {
            return Err(ModError::BadName(name.to_string()));
        }
        Ok(self.dir.join(format!("{name}.pmod")))
    }

    pub fn save(&self, name: &str, instance: &ModuleInstance) -> Result<PathBuf, ModError> {
        let path = self.path_for(name)?;
        let mut text = instance_to_sections(instance);
        text.push_str("END\n");
        std::fs::write(&path, text)?;
        Ok(path)
    }

    /// Loads, checks integrity, and regenerates.
    pub fn load(
        &self,
        name: &str,
        registry: &TypeRegistry,
    ) -> Result<ModuleInstance, ModError> {
        let path = self.path_for(name)?;
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                return Err(ModError::NotFound(name.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        let file = path.display().to_string();
        let mut lines: Vec<(usize, &str)> = text.lines().enumerate().map(|(i, l)| (i + 1, l)).collect();
        match lines.iter().rposition(|(_, l)| !l.trim().is_empty()) {
            Some(last) if lines[last].1.trim() == "END" => lines.truncate(last),
            _ => {
                return Err(ModError::Parse {
                    file,
                    line: lines.len(),
                    msg: "missing END trailer".to_string(),
                })
            }
        }
        let body: String = lines.iter().map(|(_, l)| format!("{l}\n")).collect();
        let mut instance = parse_instance_sections(&body, &file, 1, registry)?;
        let dangling = instance.validate_integrity();
        if !dangling.is_empty() {
            return Err(ModError::Integrity(dangling));
        }
        instance.regenerate(registry)?;
        Ok(instance)
    }

    /// Prototype names present in the library, sorted.
    pub fn names(&self) -> Result<Vec<String>, ModError> {
        let mut out = Vec::new();
        for entry in std::fs::read_dir(&self.dir)? {
            let path = entry?.path();
            if path.extension().and_then(|e| e.to_str()) == Some("pmod") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    out.push(stem.to_string());
                }
            }
        }
        out.sort();
        Ok(out)
    }
}

fn write_value(out: &mut String, v: &Value) {
    match v {
        Value::Number(x) => out.push_str(&fmt_f64(*x)),
        Value::Text(s) => out.push_str(&quote(s)),
        Value::Flag(b) => out.push(if *b { '1' } else { '0' }),
        Value::Color(c) => out.push_str(&c.to_string()),
        Value::Line(id) => out.push_str(&id.0.to_string()),
        Value::Point(p) => {
            out.push_str(&fmt_f32(p.x.raw()));
            out.push(' ');
            out.push_str(&fmt_f32(p.y.raw()));
        }
        Value::Ref(i) => out.push_str(&i.to_string()),
    }
}

/// The PROTO header and sections, without the END trailer.
pub fn instance_to_sections(instance: &ModuleInstance) -> String {
    let d = instance.descriptor();
    let mut out = String::new();
    out.push_str(&format!("PROTO {} {}\n", quote(&d.type_name), d.version));
    out.push_str(&format!("PARAMS {}\n", instance.params().len()));
    for (name, value) in instance.params() {
        out.push_str(&format!("P {} ", quote(name)));
        write_value(&mut out, value);
        out.push('\n');
    }
    for list in instance.lists() {
        out.push_str(&format!("LIST {} {}\n", quote(&list.name), list.len()));
        for obj in list.objects() {
            out.push('O');
            for v in obj {
                out.push(' ');
                write_value(&mut out, v);
            }
            out.push('\n');
        }
    }
    out
}

struct Cursor<'a> {
    file: &'a str,
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, line: usize, msg: String) -> ModError {
        ModError::Parse {
            file: self.file.to_string(),
            line,
            msg,
        }
    }

    fn next(&mut self) -> Option<(usize, Vec<Token>)> {
        while self.pos < self.lines.len() {
            let (n, text) = &self.lines[self.pos];
            self.pos += 1;
            if text.trim().is_empty() {
                continue;
            }
            return Some((*n, tokenize_line(text)));
        }
        None
    }

    fn expect(&mut self, keyword: &str) -> Result<(usize, Vec<Token>), ModError> {
        let end = self.lines.last().map(|(n, _)| *n).unwrap_or(0);
        let (n, tokens) = self
            .next()
            .ok_or_else(|| self.err(end, format!("expected {keyword}")))?;
        if tokens.first().map(Token::text) != Some(keyword) {
            return Err(self.err(n, format!("expected {keyword}")));
        }
        Ok((n, tokens))
    }
}

fn tokenize_line(text: &str) -> Vec<Token> {
    tokenize(text, "", 0).unwrap_or_default()
}

fn parse_value(
    cur: &Cursor<'_>,
    line: usize,
    kind: &FieldKind,
    tokens: &[Token],
    at: &mut usize,
) -> Result<Value, ModError> {
    let mut take = || -> Result<&Token, ModError> {
        let t = tokens
            .get(*at)
            .ok_or_else(|| cur.err(line, "missing value".to_string()))?;
        *at += 1;
        Ok(t)
    };
    let int = |t: &Token| -> Result<usize, ModError> {
        t.text()
            .parse()
            .map_err(|_| cur.err(line, format!("bad integer '{}'", t.text())))
    };
    match kind {
        FieldKind::Number { .. } => {
            let t = take()?;
            let v: f64 = t
                .text()
                .parse()
                .map_err(|_| cur.err(line, format!("bad number '{}'", t.text())))?;
            Ok(Value::Number(v))
        }
        FieldKind::Text => {
            let t = take()?;
            Ok(Value::Text(t.text().to_string()))
        }
        FieldKind::Flag => {
            let t = take()?;
            match t.text() {
                "0" => Ok(Value::Flag(false)),
                "1" => Ok(Value::Flag(true)),
                other => Err(cur.err(line, format!("bad flag '{other}'"))),
            }
        }
        FieldKind::Color => {
            let t = take()?;
            let v = int(t)?;
            u8::try_from(v)
                .map(Value::Color)
                .map_err(|_| cur.err(line, format!("color {v} out of range")))
        }
        FieldKind::LineType => {
            let t = take()?;
            let v = int(t)?;
            let id = u8::try_from(v)
                .map_err(|_| cur.err(line, format!("line type {v} out of range")))?;
            Ok(Value::Line(LineTypeId(id)))
        }
        FieldKind::Point => {
            let xt = take()?.text().to_string();
            let yt = take()?.text().to_string();
            let parse = |s: &str| -> Result<StoredCoord, ModError> {
                let raw: f32 = s
                    .parse()
                    .map_err(|_| cur.err(line, format!("bad coordinate '{s}'")))?;
                Ok(StoredCoord::from_raw(raw)?)
            };
            Ok(Value::Point(StoredPoint {
                x: parse(&xt)?,
                y: parse(&yt)?,
            }))
        }
        FieldKind::Ref { .. } => {
            let t = take()?;
            Ok(Value::Ref(int(t)?))
        }
    }
}

/// Parses the PROTO header and sections. `first_line` is the number of the
/// PROTO line in the enclosing file.
pub fn parse_instance_sections(
    text: &str,
    file: &str,
    first_line: usize,
    registry: &TypeRegistry,
) -> Result<ModuleInstance, ModError> {
    let lines: Vec<(usize, String)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (first_line + i, l.to_string()))
        .collect();
    let mut cur = Cursor {
        file,
        lines,
        pos: 0,
    };

    let (header_line, header) = cur.expect("PROTO")?;
    if header.len() != 3 {
        return Err(cur.err(header_line, "PROTO takes a type name and a version".to_string()));
    }
    let type_name = header[1].text().to_string();
    let version: u32 = header[2]
        .text()
        .parse()
        .map_err(|_| cur.err(header_line, format!("bad version '{}'", header[2].text())))?;
    let descriptor = registry.descriptor(&type_name)?.clone();
    if version != descriptor.version {
        return Err(ModError::Version {
            file: file.to_string(),
            type_name,
            want: descriptor.version,
            got: version,
        });
    }
    let mut instance = ModuleInstance::new(registry, &type_name)?;

    let (params_line, params_head) = cur.expect("PARAMS")?;
    let n_params: usize = params_head
        .get(1)
        .map(Token::text)
        .unwrap_or("")
        .parse()
        .map_err(|_| cur.err(params_line, "PARAMS takes a count".to_string()))?;
    for _ in 0..n_params {
        let (line, tokens) = cur.expect("P")?;
        let name = tokens
            .get(1)
            .ok_or_else(|| cur.err(line, "P takes a name".to_string()))?
            .text()
            .to_string();
        let def = descriptor
            .param(&name)
            .ok_or_else(|| cur.err(line, format!("unknown parameter {name:?}")))?;
        let mut at = 2;
        let value = parse_value(&cur, line, &def.kind, &tokens, &mut at)?;
        if at != tokens.len() {
            return Err(cur.err(line, format!("trailing tokens after parameter {name:?}")));
        }
        instance.set_param_unchecked(&name, value);
    }

    for (li, schema) in descriptor.lists.iter().enumerate() {
        let (line, tokens) = cur.expect("LIST")?;
        let name = tokens.get(1).map(Token::text).unwrap_or("");
        if name != schema.name {
            return Err(cur.err(line, format!("expected list {:?}, got {name:?}", schema.name)));
        }
        let count: usize = tokens
            .get(2)
            .map(Token::text)
            .unwrap_or("")
            .parse()
            .map_err(|_| cur.err(line, "LIST takes a count".to_string()))?;
        for _ in 0..count {
            let (oline, otokens) = cur.expect("O")?;
            let mut at = 1;
            let mut values = Vec::with_capacity(schema.fields.len());
            for f in &schema.fields {
                values.push(parse_value(&cur, oline, &f.kind, &otokens, &mut at)?);
            }
            if at != otokens.len() {
                return Err(cur.err(oline, format!("trailing tokens in list {:?}", schema.name)));
            }
            instance.push_object_unchecked(li, values);
        }
    }
    if let Some((line, tokens)) = cur.next() {
        return Err(cur.err(line, format!("unexpected {}", tokens[0].text())));
    }
    Ok(instance)
}
