//! Catalog bundles on disk.
//!
//! A bundle is a directory of four UTF-8 files. `table.tsv` holds the column
//! keys on the first row, the column kinds on the second (`text`,
//! `num:<unit>`, `menu`) and one row per product after that; the reserved
//! trailing columns `@class`, `@symbol` and `@rank` (kind `-`) carry the row
//! attributes. Embedded menu cells are written `⟨opt|opt|...⟩`. `rules.txt`
//! holds `field := rule` lines, `menus.txt` holds `Name = opt|opt|...` lines
//! and `meta.txt` names the source catalog and profile tags.
//!
//! Saving is canonical: loading a saved bundle and saving it again produces
//! identical bytes.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use super::rule::{parse_rule, MenuDef, Rule, RuleSet};
use super::table::{CellValue, Column, ColumnKind, DataTable, InstrumentRank, Row};
use super::units::UnitRegistry;
use super::CatalogError;
use crate::textio::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogBundle {
    pub table: DataTable,
    pub ruleset: RuleSet,
    pub menus: BTreeMap<String, MenuDef>,
}

fn perr(file: &str, line: usize, msg: impl Into<String>) -> CatalogError {
    CatalogError::Parse { file: file.to_string(), line, msg: msg.into() }
}

fn read_lines(path: &Path) -> Result<Vec<String>, CatalogError> {
    let text = fs::read_to_string(path)?;
    let mut lines: Vec<String> = text.split('\n').map(|l| l.trim_end_matches('\r').to_string()).collect();
    if lines.last().is_some_and(String::is_empty) {
        lines.pop();
    }
    Ok(lines)
}

const RESERVED: [&str; 3] = ["@class", "@symbol", "@rank"];

fn parse_kind(token: &str) -> Option<ColumnKind> {
    match token {
        "text" => Some(ColumnKind::Text),
        "menu" => Some(ColumnKind::Menu),
        _ => token.strip_prefix("num:").map(|u| ColumnKind::Number { unit: u.to_string() }),
    }
}

fn kind_token(kind: &ColumnKind) -> String {
    match kind {
        ColumnKind::Text => "text".into(),
        ColumnKind::Menu => "menu".into(),
        ColumnKind::Number { unit } => format!("num:{unit}"),
    }
}

fn parse_menu_cell(file: &str, line: usize, raw: &str) -> Result<Vec<String>, CatalogError> {
    let inner = raw
        .strip_prefix('⟨')
        .and_then(|s| s.strip_suffix('⟩'))
        .ok_or_else(|| perr(file, line, format!("menu cell must look like ⟨a|b⟩, got '{raw}'")))?;
    let opts: Vec<String> = inner.split('|').map(str::to_string).collect();
    if opts.iter().any(String::is_empty) {
        return Err(perr(file, line, "menu cell has an empty option"));
    }
    Ok(opts)
}

fn load_table(dir: &Path, id: &str) -> Result<DataTable, CatalogError> {
    let file = "table.tsv";
    let lines = read_lines(&dir.join(file))?;
    if lines.len() < 2 {
        return Err(perr(file, 1, "expected a key row and a kind row"));
    }
    let keys: Vec<&str> = lines[0].split('\t').collect();
    let kinds: Vec<&str> = lines[1].split('\t').collect();
    if keys.len() != kinds.len() {
        return Err(perr(file, 2, format!("{} kinds for {} keys", kinds.len(), keys.len())));
    }

    let mut columns = Vec::new();
    // Positions of data columns and of each reserved column.
    let mut data_pos = Vec::new();
    let (mut class_pos, mut symbol_pos, mut rank_pos) = (None, None, None);
    for (i, (key, kind)) in keys.iter().zip(&kinds).enumerate() {
        if RESERVED.contains(key) {
            if *kind != "-" {
                return Err(perr(file, 2, format!("reserved column {key} must have kind '-'")));
            }
            match *key {
                "@class" => class_pos = Some(i),
                "@symbol" => symbol_pos = Some(i),
                _ => rank_pos = Some(i),
            }
            continue;
        }
        let kind = parse_kind(kind).ok_or_else(|| perr(file, 2, format!("unknown column kind '{kind}'")))?;
        columns.push(Column { key: (*key).to_string(), kind });
        data_pos.push(i);
    }

    let mut rows = Vec::new();
    for (n, line) in lines.iter().enumerate().skip(2) {
        let lineno = n + 1;
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != keys.len() {
            return Err(perr(file, lineno, format!("{} cells for {} columns", fields.len(), keys.len())));
        }
        let mut cells = Vec::with_capacity(columns.len());
        for (col, &pos) in columns.iter().zip(&data_pos) {
            let raw = fields[pos];
            cells.push(match &col.kind {
                ColumnKind::Text => CellValue::Text(raw.to_string()),
                ColumnKind::Number { .. } => {
                    let v: f64 = raw.parse().map_err(|_| {
                        perr(file, lineno, format!("column '{}': '{raw}' is not a number", col.key))
                    })?;
                    CellValue::Number(v)
                }
                ColumnKind::Menu => CellValue::Menu(parse_menu_cell(file, lineno, raw)?),
            });
        }
        let class_path = class_pos.map(|i| fields[i].to_string()).unwrap_or_default();
        let quantity_symbol = symbol_pos.and_then(|i| match fields[i] {
            "-" => None,
            s => Some(s.to_string()),
        });
        let rank = match rank_pos {
            None => InstrumentRank::None,
            Some(i) => InstrumentRank::parse(fields[i])
                .ok_or_else(|| perr(file, lineno, format!("unknown rank '{}'", fields[i])))?,
        };
        rows.push(Row { cells, class_path, quantity_symbol, rank });
    }

    Ok(DataTable {
        id: id.to_string(),
        source_catalog: String::new(),
        profile_tags: BTreeSet::new(),
        columns,
        rows,
    })
}

fn load_meta(dir: &Path) -> Result<(String, BTreeSet<String>), CatalogError> {
    let file = "meta.txt";
    let mut source = None;
    let mut profiles = BTreeSet::new();
    for (n, line) in read_lines(&dir.join(file))?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| perr(file, n + 1, "expected 'key = value'"))?;
        match key.trim() {
            "source" => source = Some(value.trim().to_string()),
            "profiles" => {
                profiles = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
            }
            other => return Err(perr(file, n + 1, format!("unknown key '{other}'"))),
        }
    }
    let source = source.ok_or_else(|| perr(file, 1, "missing 'source'"))?;
    Ok((source, profiles))
}

fn load_menus(dir: &Path) -> Result<BTreeMap<String, MenuDef>, CatalogError> {
    let file = "menus.txt";
    let path = dir.join(file);
    let mut menus = BTreeMap::new();
    if !path.exists() {
        return Ok(menus);
    }
    for (n, line) in read_lines(&path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (name, opts) = line
            .split_once('=')
            .ok_or_else(|| perr(file, n + 1, "expected 'Name = opt|opt'"))?;
        let name = name.trim().to_string();
        let menu = MenuDef {
            name: name.clone(),
            options: opts.trim().split('|').map(str::to_string).collect(),
        };
        menu.validate().map_err(|e| perr(file, n + 1, e.to_string()))?;
        if menus.insert(name.clone(), menu).is_some() {
            return Err(perr(file, n + 1, format!("menu '{name}' defined twice")));
        }
    }
    Ok(menus)
}

fn load_rules(dir: &Path) -> Result<RuleSet, CatalogError> {
    let file = "rules.txt";
    let path = dir.join(file);
    let mut rules: Vec<(String, Rule)> = Vec::new();
    if !path.exists() {
        return Ok(RuleSet { rules });
    }
    for (n, line) in read_lines(&path)?.iter().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (key, text) = line
            .split_once(":=")
            .ok_or_else(|| perr(file, n + 1, "expected 'field := rule'"))?;
        let rule = parse_rule(text.trim()).map_err(|e| perr(file, n + 1, e.to_string()))?;
        rules.push((key.trim().to_string(), rule));
    }
    Ok(RuleSet { rules })
}

/// Loads and fully binds a bundle; the table id is the directory name.
pub fn load_bundle(dir: &Path, units: &UnitRegistry) -> Result<CatalogBundle, CatalogError> {
    let id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut table = load_table(dir, &id)?;
    let (source, profiles) = load_meta(dir)?;
    table.source_catalog = source;
    table.profile_tags = profiles;
    let menus = load_menus(dir)?;
    let ruleset = load_rules(dir)?;

    table.validate(units)?;
    let columns: Vec<&str> = table.columns.iter().map(|c| c.key.as_str()).collect();
    let menu_names: BTreeSet<&str> = menus.keys().map(String::as_str).collect();
    ruleset.validate(&columns, &menu_names)?;
    Ok(CatalogBundle { table, ruleset, menus })
}

fn check_plain(what: &str, s: &str) -> Result<(), CatalogError> {
    if s.contains('\t') || s.contains('\n') {
        return Err(CatalogError::Table(format!("{what} '{s}' contains a tab or newline")));
    }
    Ok(())
}

/// Writes the bundle in canonical form (reserved columns last, menus sorted,
/// canonical number and rule text).
pub fn save_bundle(dir: &Path, bundle: &CatalogBundle) -> Result<(), CatalogError> {
    fs::create_dir_all(dir)?;
    let t = &bundle.table;

    let mut keys: Vec<String> = t.columns.iter().map(|c| c.key.clone()).collect();
    let mut kinds: Vec<String> = t.columns.iter().map(|c| kind_token(&c.kind)).collect();
    keys.extend(RESERVED.iter().map(|s| s.to_string()));
    kinds.extend(["-", "-", "-"].map(String::from));
    for k in &keys {
        check_plain("column key", k)?;
    }
    let mut tsv = String::new();
    tsv.push_str(&keys.join("\t"));
    tsv.push('\n');
    tsv.push_str(&kinds.join("\t"));
    tsv.push('\n');
    for row in &t.rows {
        let mut fields = Vec::with_capacity(keys.len());
        for cell in &row.cells {
            fields.push(match cell {
                CellValue::Text(s) => {
                    check_plain("cell", s)?;
                    s.clone()
                }
                CellValue::Number(v) => fmt_f64(*v),
                CellValue::Menu(opts) => {
                    for o in opts {
                        check_plain("menu option", o)?;
                        if o.contains('|') || o.contains('⟩') {
                            return Err(CatalogError::Table(format!("menu option '{o}' contains a delimiter")));
                        }
                    }
                    format!("⟨{}⟩", opts.join("|"))
                }
            });
        }
        check_plain("class path", &row.class_path)?;
        fields.push(row.class_path.clone());
        fields.push(match &row.quantity_symbol {
            None => "-".to_string(),
            Some(s) => {
                check_plain("quantity symbol", s)?;
                s.clone()
            }
        });
        fields.push(row.rank.as_str().to_string());
        tsv.push_str(&fields.join("\t"));
        tsv.push('\n');
    }
    fs::write(dir.join("table.tsv"), tsv)?;

    let mut meta = String::new();
    meta.push_str(&format!("source = {}\n", t.source_catalog));
    let tags: Vec<&str> = t.profile_tags.iter().map(String::as_str).collect();
    meta.push_str(&format!("profiles = {}\n", tags.join(", ")));
    fs::write(dir.join("meta.txt"), meta)?;

    let mut menus = String::new();
    for m in bundle.menus.values() {
        m.validate()?;
        menus.push_str(&format!("{} = {}\n", m.name, m.options.join("|")));
    }
    fs::write(dir.join("menus.txt"), menus)?;

    let mut rules = String::new();
    for (key, rule) in &bundle.ruleset.rules {
        rules.push_str(&format!("{} := {}\n", key, rule.to_text()));
    }
    fs::write(dir.join("rules.txt"), rules)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_bundle() -> CatalogBundle {
        let table = DataTable {
            id: "pipes".into(),
            source_catalog: "ГОСТ 8732-78".into(),
            profile_tags: BTreeSet::from(["Монтажно-технологический".to_string()]),
            columns: vec![
                Column { key: "dn".into(), kind: ColumnKind::Number { unit: "mm".into() } },
                Column { key: "name".into(), kind: ColumnKind::Text },
                Column { key: "wall".into(), kind: ColumnKind::Menu },
            ],
            rows: vec![
                Row {
                    cells: vec![
                        CellValue::Number(57.0),
                        CellValue::Text("Труба стальная".into()),
                        CellValue::Menu(vec!["3.5".into(), "4".into()]),
                    ],
                    class_path: "Трубы/Стальные".into(),
                    quantity_symbol: None,
                    rank: InstrumentRank::None,
                },
                Row {
                    cells: vec![
                        CellValue::Number(108.0),
                        CellValue::Text("Труба стальная".into()),
                        CellValue::Menu(vec!["4".into(), "5".into()]),
                    ],
                    class_path: "Трубы/Стальные".into(),
                    quantity_symbol: Some("P".into()),
                    rank: InstrumentRank::Primary,
                },
            ],
        };
        let ruleset = RuleSet {
            rules: vec![
                ("designation".into(), parse_rule(r#""Труба " [dn] "x" {num:Стенка:mm}=>$w"#).unwrap()),
                ("name".into(), parse_rule(r#"[name] " " {menu:Исполнение}"#).unwrap()),
            ],
        };
        let menus = BTreeMap::from([(
            "Исполнение".to_string(),
            MenuDef { name: "Исполнение".into(), options: vec!["У1".into(), "ХЛ1".into()] },
        )]);
        CatalogBundle { table, ruleset, menus }
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let units = UnitRegistry::standard();
        let tmp = tempfile::tempdir().unwrap();
        let d1 = tmp.path().join("pipes");
        let d2 = tmp.path().join("pipes2");
        let b = sample_bundle();
        save_bundle(&d1, &b).unwrap();
        let loaded = load_bundle(&d1, &units).unwrap();
        assert_eq!(loaded.table.rows, b.table.rows);
        assert_eq!(loaded.ruleset, b.ruleset);
        assert_eq!(loaded.menus, b.menus);
        let mut again = loaded;
        again.table.id = "pipes".into();
        save_bundle(&d2, &again).unwrap();
        for f in ["table.tsv", "meta.txt", "menus.txt", "rules.txt"] {
            let a = fs::read(d1.join(f)).unwrap();
            let b = fs::read(d2.join(f)).unwrap();
            assert_eq!(a, b, "{f}");
        }
    }

    #[test]
    fn unknown_references_fail_at_load() {
        let units = UnitRegistry::standard();
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("b");
        let mut b = sample_bundle();
        b.ruleset.rules.push(("extra".into(), parse_rule("[nope]").unwrap()));
        save_bundle(&dir, &b).unwrap();
        assert!(matches!(load_bundle(&dir, &units), Err(CatalogError::UnknownColumn(_))));

        let mut b = sample_bundle();
        b.ruleset.rules.push(("extra".into(), parse_rule("{menu:Нет}").unwrap()));
        save_bundle(&dir, &b).unwrap();
        assert!(matches!(load_bundle(&dir, &units), Err(CatalogError::UnknownMenu(_))));
    }

    #[test]
    fn parse_errors_carry_file_and_line() {
        let units = UnitRegistry::standard();
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("b");
        save_bundle(&dir, &sample_bundle()).unwrap();
        fs::write(dir.join("rules.txt"), "designation := [open\n").unwrap();
        match load_bundle(&dir, &units) {
            Err(CatalogError::Parse { file, line, .. }) => {
                assert_eq!(file, "rules.txt");
                assert_eq!(line, 1);
            }
            other => panic!("{other:?}"),
        }

        save_bundle(&dir, &sample_bundle()).unwrap();
        let mut tsv = fs::read_to_string(dir.join("table.tsv")).unwrap();
        tsv = tsv.replace("57", "пятьдесят");
        fs::write(dir.join("table.tsv"), tsv).unwrap();
        match load_bundle(&dir, &units) {
            Err(CatalogError::Parse { file, line, .. }) => {
                assert_eq!(file, "table.tsv");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_rows_section_is_a_valid_table() {
        let units = UnitRegistry::standard();
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("b");
        let mut b = sample_bundle();
        b.table.rows.clear();
        save_bundle(&dir, &b).unwrap();
        let loaded = load_bundle(&dir, &units).unwrap();
        assert!(loaded.table.rows.is_empty());
        assert_eq!(loaded.table.columns.len(), 3);
    }

    #[test]
    fn table_without_reserved_columns_gets_defaults() {
        let units = UnitRegistry::standard();
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path().join("b");
        fs::create_dir_all(&dir).unwrap();
        fs::write(dir.join("table.tsv"), "dn\nnum:mm\n25\n").unwrap();
        fs::write(dir.join("meta.txt"), "source = ТУ\nprofiles =\n").unwrap();
        let loaded = load_bundle(&dir, &units).unwrap();
        assert_eq!(loaded.table.rows[0].class_path, "");
        assert_eq!(loaded.table.rows[0].quantity_symbol, None);
        assert_eq!(loaded.table.rows[0].rank, InstrumentRank::None);
        assert!(loaded.table.profile_tags.is_empty());
    }
}
