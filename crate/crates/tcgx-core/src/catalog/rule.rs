//! String-generation rules.
//!
//! A rule is an ordered list of fragments; evaluating one concatenates the
//! fragment values left to right. Fragment forms:
//!
//! ```text
//! "text"            literal
//! [key]             cell of the current row
//! {menu:Name}       pick from the external menu Name
//! {num:Prompt:unit} numeric input in the given unit
//! {str:Prompt}      free text input
//! $name             read a saved variable
//! ```
//!
//! Any fragment may end with `=>$name`, which saves the produced value under
//! that name for later fragments and rules of the same evaluation. Reading
//! and saving the same variable in one fragment is rejected.

use super::CatalogError;
use crate::textio;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq)]
pub enum Fragment {
    Const(String),
    Field(String),
    ExtMenu(String),
    NumInput { prompt: String, unit: String },
    StrInput { prompt: String },
    VarRead(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleFragment {
    pub fragment: Fragment,
    pub save_as: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub fragments: Vec<RuleFragment>,
}

/// An external menu: a named option list shared by many rules.
#[derive(Debug, Clone, PartialEq)]
pub struct MenuDef {
    pub name: String,
    pub options: Vec<String>,
}

impl MenuDef {
    pub fn validate(&self) -> Result<(), CatalogError> {
        if self.options.is_empty() {
            return Err(CatalogError::RuleSet(format!("menu '{}' has no options", self.name)));
        }
        let mut seen = BTreeSet::new();
        for o in &self.options {
            if !seen.insert(o.as_str()) {
                return Err(CatalogError::RuleSet(format!(
                    "menu '{}' repeats option '{}'",
                    self.name, o
                )));
            }
        }
        Ok(())
    }
}

/// Rules keyed by the document field they generate, in generation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RuleSet {
    pub rules: Vec<(String, Rule)>,
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    _text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { chars: text.chars().collect(), pos: 0, _text: text }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    // Positions in errors are 1-based character columns.
    fn err(&self, pos: usize, msg: impl Into<String>) -> CatalogError {
        CatalogError::RuleSyntax { pos: pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    /// Consumes characters up to the delimiter, which is also consumed.
    fn until(&mut self, delim: char, what: &str) -> Result<String, CatalogError> {
        let start = self.pos;
        let mut out = String::new();
        loop {
            match self.bump() {
                Some(c) if c == delim => return Ok(out),
                Some(c) => out.push(c),
                None => return Err(self.err(start, format!("unterminated {what}"))),
            }
        }
    }

    fn quoted(&mut self) -> Result<String, CatalogError> {
        let start = self.pos - 1;
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('"') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some('n') => out.push('\n'),
                    Some(c) => return Err(self.err(self.pos - 1, format!("bad escape '\\{c}'"))),
                    None => return Err(self.err(start, "unterminated literal")),
                },
                Some(c) => out.push(c),
                None => return Err(self.err(start, "unterminated literal")),
            }
        }
    }

    fn var_name(&mut self) -> Result<String, CatalogError> {
        let start = self.pos;
        let mut out = String::new();
        while matches!(self.peek(), Some(c) if c.is_alphanumeric() || c == '_') {
            out.push(self.bump().unwrap());
        }
        if out.is_empty() {
            return Err(self.err(start, "expected a variable name after '$'"));
        }
        Ok(out)
    }

    fn braced(&mut self) -> Result<Fragment, CatalogError> {
        let start = self.pos - 1;
        let kw = self.until(':', "fragment form")?;
        match kw.as_str() {
            "menu" => Ok(Fragment::ExtMenu(self.until('}', "menu fragment")?)),
            "num" => {
                let prompt = self.until(':', "numeric fragment")?;
                let unit = self.until('}', "numeric fragment")?;
                Ok(Fragment::NumInput { prompt, unit })
            }
            "str" => Ok(Fragment::StrInput { prompt: self.until('}', "text fragment")? }),
            other => Err(self.err(start, format!("unknown fragment form '{{{other}:'"))),
        }
    }

    fn fragment(&mut self) -> Result<RuleFragment, CatalogError> {
        let start = self.pos;
        let atom = match self.bump().unwrap() {
            '"' => Fragment::Const(self.quoted()?),
            '[' => Fragment::Field(self.until(']', "column reference")?),
            '{' => self.braced()?,
            '$' => Fragment::VarRead(self.var_name()?),
            c => return Err(self.err(start, format!("unexpected character '{c}'"))),
        };
        self.skip_ws();
        let save_as = if self.peek() == Some('=') {
            let at = self.pos;
            self.bump();
            if self.bump() != Some('>') {
                return Err(self.err(at, "expected '=>'"));
            }
            self.skip_ws();
            if self.bump() != Some('$') {
                return Err(self.err(self.pos.saturating_sub(1), "expected '$' after '=>'"));
            }
            Some(self.var_name()?)
        } else {
            None
        };
        if let (Fragment::VarRead(r), Some(s)) = (&atom, &save_as) {
            if r == s {
                return Err(self.err(start, format!("fragment reads and saves the same variable '${r}'")));
            }
        }
        Ok(RuleFragment { fragment: atom, save_as })
    }
}

pub fn parse_rule(text: &str) -> Result<Rule, CatalogError> {
    let mut p = Parser::new(text);
    let mut fragments = Vec::new();
    loop {
        p.skip_ws();
        if p.peek().is_none() {
            break;
        }
        fragments.push(p.fragment()?);
    }
    Ok(Rule { fragments })
}

impl Rule {
    /// Canonical text form; `parse_rule` reads it back unchanged.
    pub fn to_text(&self) -> String {
        let parts: Vec<String> = self
            .fragments
            .iter()
            .map(|f| {
                let mut s = match &f.fragment {
                    Fragment::Const(v) => textio::quote(v),
                    Fragment::Field(k) => format!("[{k}]"),
                    Fragment::ExtMenu(n) => format!("{{menu:{n}}}"),
                    Fragment::NumInput { prompt, unit } => format!("{{num:{prompt}:{unit}}}"),
                    Fragment::StrInput { prompt } => format!("{{str:{prompt}}}"),
                    Fragment::VarRead(n) => format!("${n}"),
                };
                if let Some(v) = &f.save_as {
                    s.push_str("=>$");
                    s.push_str(v);
                }
                s
            })
            .collect();
        parts.join(" ")
    }
}

impl RuleSet {
    /// Static checks that need no inputs: referenced columns and menus exist
    /// and every variable is saved by an earlier fragment before it is read.
    /// `columns` are the keys of the catalog table the set is bound to.
    pub fn validate(&self, columns: &[&str], menus: &BTreeSet<&str>) -> Result<(), CatalogError> {
        let mut targets = BTreeSet::new();
        let mut defined: BTreeSet<&str> = BTreeSet::new();
        for (target, rule) in &self.rules {
            if !targets.insert(target.as_str()) {
                return Err(CatalogError::RuleSet(format!("two rules generate field '{target}'")));
            }
            for f in &rule.fragments {
                match &f.fragment {
                    Fragment::Field(k) => {
                        if !columns.contains(&k.as_str()) {
                            return Err(CatalogError::UnknownColumn(k.clone()));
                        }
                    }
                    Fragment::ExtMenu(n) => {
                        if !menus.contains(n.as_str()) {
                            return Err(CatalogError::UnknownMenu(n.clone()));
                        }
                    }
                    Fragment::VarRead(n) => {
                        if !defined.contains(n.as_str()) {
                            return Err(CatalogError::UnknownVariable(n.clone()));
                        }
                    }
                    _ => {}
                }
                if let Some(v) = &f.save_as {
                    defined.insert(v);
                }
            }
        }
        Ok(())
    }
}
