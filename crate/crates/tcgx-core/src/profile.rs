//! Work profiles.
//!
//! A profile names a discipline and gates which catalog bundles its user
//! sees, plus the default units and styles new documents start with. The
//! five built-in profiles are always present; a `profiles.txt` file can
//! replace their tag sets and defaults but not add or remove names.
//!
//! `profiles.txt` holds one block per profile:
//!
//! ```text
//! PROFILE "КИП и автоматика"
//! TAGS КИП Приборы
//! UNIT давление кПа
//! LINE 1
//! FONT 2
//! END
//! ```
//!
//! `TAGS` may list nothing; `UNIT` repeats per quantity. A bundle is
//! visible in a profile when the bundle carries no tags at all or shares at
//! least one tag with the profile.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::geom::{FontHeightId, LineTypeId, StyleTables};
use crate::textio::{tokenize, Token};

pub const PROFILE_NAMES: [&str; 5] = [
    "Монтажно-технологический",
    "КИП и автоматика",
    "Строительный",
    "Электротехнический",
    "Производственные регламенты",
];

/// Environment variable consulted when no profile is named explicitly.
pub const PROFILE_ENV: &str = "TCGX_PROFILE";

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("unknown profile '{name}'; profiles are {}", PROFILE_NAMES.join(", "))]
    UnknownProfile { name: String },
    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("profile '{name}': {msg}")]
    Invalid { name: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkProfile {
    pub name: String,
    /// Catalog bundle tags this profile may read.
    pub catalog_tags: BTreeSet<String>,
    /// Default unit per quantity for new documents.
    pub default_units: BTreeMap<String, String>,
    pub default_line: LineTypeId,
    pub default_font: FontHeightId,
}

impl WorkProfile {
    /// Whether a bundle with these tags is readable under this profile.
    /// Untagged bundles are common stock and always visible.
    pub fn allows(&self, bundle_tags: &BTreeSet<String>) -> bool {
        bundle_tags.is_empty() || bundle_tags.iter().any(|t| self.catalog_tags.contains(t))
    }
}

fn profile(
    name: &str,
    tags: &[&str],
    units: &[(&str, &str)],
    line: u8,
    font: u8,
) -> WorkProfile {
    WorkProfile {
        name: name.to_string(),
        catalog_tags: tags.iter().map(|t| t.to_string()).collect(),
        default_units: units
            .iter()
            .map(|(q, u)| (q.to_string(), u.to_string()))
            .collect(),
        default_line: LineTypeId(line),
        default_font: FontHeightId(font),
    }
}

/// The five built-in profiles. The last one ships with an empty tag set:
/// its users work from regulations, not catalogs.
pub fn builtin_profiles() -> Vec<WorkProfile> {
    vec![
        profile(
            PROFILE_NAMES[0],
            &["АСТС", "Трубы", "Арматура"],
            &[("length", "мм"), ("pressure", "МПа")],
            0,
            1,
        ),
        profile(
            PROFILE_NAMES[1],
            &["КИП", "Приборы"],
            &[("length", "мм"), ("pressure", "кПа"), ("temperature", "°C")],
            0,
            1,
        ),
        profile(PROFILE_NAMES[2], &["Строительные"], &[("length", "мм")], 0, 2),
        profile(
            PROFILE_NAMES[3],
            &["Электро", "МЗС"],
            &[("length", "мм")],
            0,
            1,
        ),
        profile(PROFILE_NAMES[4], &[], &[("length", "мм")], 0, 1),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSet {
    profiles: Vec<WorkProfile>,
}

impl ProfileSet {
    pub fn builtin() -> ProfileSet {
        ProfileSet { profiles: builtin_profiles() }
    }

    pub fn profiles(&self) -> &[WorkProfile] {
        &self.profiles
    }

    pub fn get(&self, name: &str) -> Result<&WorkProfile, ProfileError> {
        self.profiles
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| ProfileError::UnknownProfile { name: name.to_string() })
    }

    /// The profile to run under: the explicit name if given, else the
    /// `TCGX_PROFILE` environment variable, else the first profile.
    pub fn select(&self, explicit: Option<&str>) -> Result<&WorkProfile, ProfileError> {
        match explicit {
            Some(name) => self.get(name),
            None => match std::env::var(PROFILE_ENV) {
                Ok(name) if !name.is_empty() => self.get(&name),
                _ => Ok(&self.profiles[0]),
            },
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in &self.profiles {
            writeln!(out, "PROFILE \"{}\"", p.name).unwrap();
            let tags: Vec<&str> = p.catalog_tags.iter().map(String::as_str).collect();
            writeln!(out, "TAGS {}", tags.join(" ")).unwrap();
            for (q, u) in &p.default_units {
                writeln!(out, "UNIT {q} {u}").unwrap();
            }
            writeln!(out, "LINE {}", p.default_line.0).unwrap();
            writeln!(out, "FONT {}", p.default_font.0).unwrap();
            writeln!(out, "END").unwrap();
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<(), ProfileError> {
        Ok(fs::write(path, self.to_text())?)
    }

    pub fn load(path: &Path) -> Result<ProfileSet, ProfileError> {
        let text = fs::read_to_string(path)?;
        parse_profiles(&text, &path.display().to_string())
    }
}

fn perr(file: &str, line: usize, msg: impl Into<String>) -> ProfileError {
    ProfileError::Parse { file: file.to_string(), line, msg: msg.into() }
}

/// Parses a profiles file. Every block must name a built-in profile; each
/// of the five must appear exactly once.
pub fn parse_profiles(text: &str, file: &str) -> Result<ProfileSet, ProfileError> {
    let styles = StyleTables::standard();
    let mut found: BTreeMap<String, WorkProfile> = BTreeMap::new();
    let mut current: Option<WorkProfile> = None;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let tokens = tokenize(line, file, line_no)
            .map_err(|e| perr(file, line_no, e.to_string()))?;
        let words: Vec<&Token> = tokens.iter().collect();
        let keyword = match words.first() {
            Some(Token::Word(w)) => w.as_str(),
            _ => return Err(perr(file, line_no, "expected a keyword")),
        };
        match (keyword, &mut current) {
            ("PROFILE", None) => {
                let name = match words.as_slice() {
                    [_, Token::Quoted(name)] => name.clone(),
                    _ => return Err(perr(file, line_no, "expected PROFILE \"<name>\"")),
                };
                if !PROFILE_NAMES.contains(&name.as_str()) {
                    return Err(perr(file, line_no, format!("unknown profile '{name}'")));
                }
                if found.contains_key(&name) {
                    return Err(perr(file, line_no, format!("profile '{name}' appears twice")));
                }
                current = Some(WorkProfile {
                    name,
                    catalog_tags: BTreeSet::new(),
                    default_units: BTreeMap::new(),
                    default_line: LineTypeId(0),
                    default_font: FontHeightId(1),
                });
            }
            ("PROFILE", Some(_)) => {
                return Err(perr(file, line_no, "PROFILE before the previous END"))
            }
            ("TAGS", Some(p)) => {
                for t in &words[1..] {
                    p.catalog_tags.insert(t.text().to_string());
                }
            }
            ("UNIT", Some(p)) => match words.as_slice() {
                [_, q, u] => {
                    p.default_units.insert(q.text().to_string(), u.text().to_string());
                }
                _ => return Err(perr(file, line_no, "expected UNIT <quantity> <unit>")),
            },
            ("LINE", Some(p)) => {
                let id = parse_id(&words, file, line_no, "LINE")?;
                p.default_line = LineTypeId(id);
            }
            ("FONT", Some(p)) => {
                let id = parse_id(&words, file, line_no, "FONT")?;
                p.default_font = FontHeightId(id);
            }
            ("END", Some(_)) => {
                let p = current.take().unwrap();
                styles.line_type(p.default_line).map_err(|e| ProfileError::Invalid {
                    name: p.name.clone(),
                    msg: e.to_string(),
                })?;
                styles.font_height(p.default_font).map_err(|e| ProfileError::Invalid {
                    name: p.name.clone(),
                    msg: e.to_string(),
                })?;
                found.insert(p.name.clone(), p);
            }
            ("END", None) => return Err(perr(file, line_no, "END without PROFILE")),
            (kw, _) => return Err(perr(file, line_no, format!("unknown keyword '{kw}'"))),
        }
    }
    if current.is_some() {
        return Err(perr(file, text.lines().count(), "unterminated PROFILE block"));
    }
    for name in PROFILE_NAMES {
        if !found.contains_key(name) {
            return Err(perr(file, text.lines().count(), format!("profile '{name}' is missing")));
        }
    }
    // Keep canonical order regardless of file order.
    let profiles = PROFILE_NAMES
        .iter()
        .map(|n| found.remove(*n).unwrap())
        .collect();
    Ok(ProfileSet { profiles })
}

fn parse_id(words: &[&Token], file: &str, line: usize, kw: &str) -> Result<u8, ProfileError> {
    match words {
        [_, t] => t
            .text()
            .parse::<u8>()
            .map_err(|_| perr(file, line, format!("{kw} wants a small integer id"))),
        _ => Err(perr(file, line, format!("expected {kw} <id>"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_profiles_with_fixed_names() {
        let set = ProfileSet::builtin();
        let names: Vec<&str> = set.profiles().iter().map(|p| p.name.as_str()).collect();
        assert_eq!(names, PROFILE_NAMES);
        assert!(set.get("Строительный").is_ok());
        let err = set.get("Сантехнический").unwrap_err();
        assert!(err.to_string().contains("Сантехнический"));
        assert!(err.to_string().contains("Монтажно-технологический"));
    }

    #[test]
    fn untagged_bundles_are_visible_everywhere() {
        let set = ProfileSet::builtin();
        let none = BTreeSet::new();
        let pipes: BTreeSet<String> = ["Трубы".to_string()].into();
        for p in set.profiles() {
            assert!(p.allows(&none), "{}", p.name);
        }
        assert!(set.get(PROFILE_NAMES[0]).unwrap().allows(&pipes));
        assert!(!set.get(PROFILE_NAMES[1]).unwrap().allows(&pipes));
        // The regulations profile sees no tagged bundle at all.
        assert!(!set.get(PROFILE_NAMES[4]).unwrap().allows(&pipes));
    }

    #[test]
    fn text_round_trip_is_identity() {
        let set = ProfileSet::builtin();
        let text = set.to_text();
        let back = parse_profiles(&text, "profiles.txt").unwrap();
        assert_eq!(back, set);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn files_must_cover_all_five_profiles() {
        let mut text = ProfileSet::builtin().to_text();
        text = text.replacen("PROFILE \"Строительный\"", "PROFILE \"Чужой\"", 1);
        let err = parse_profiles(&text, "profiles.txt").unwrap_err();
        assert!(err.to_string().contains("Чужой"), "{err}");

        let text2 = "PROFILE \"Строительный\"\nEND\n";
        let err2 = parse_profiles(text2, "profiles.txt").unwrap_err();
        assert!(err2.to_string().contains("missing"), "{err2}");
    }

    #[test]
    fn explicit_name_beats_environment() {
        let set = ProfileSet::builtin();
        assert_eq!(set.select(Some("Строительный")).unwrap().name, "Строительный");
        assert!(set.select(Some("нет такого")).is_err());
    }
}
