//! End-to-end runs of the installed binary: exit-code contract, profile
//! gating, determinism of the writing paths.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tcgx_core::catalog::{
    save_bundle, CatalogBundle, CellValue, Column, ColumnKind, DataTable, InstrumentRank,
    MenuDef, Row, RuleSet,
};
use tcgx_core::geom::{save_drawing, Element, ModulePayload, Point};
use tcgx_core::parmod::{builtin_registry, ModuleInstance, Value, TRACE_TYPE};
use tcgx_core::raster::{rasterize_segment, save_raster};
use tcgx_core::spec::standard_blank;
use tcgx_core::tkd::load_tkd;
use tcgx_core::{Drawing, DrawingScale};

fn tcgx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcgx"))
        .args(args)
        .current_dir(dir)
        .env_remove("TCGX_PROFILE")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn no_arguments_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcgx(dir.path(), &[]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("Usage"), "{}", stderr(&out));
}

#[test]
fn unknown_flags_and_subcommands_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&tcgx(dir.path(), &["drawing", "info", "--nonsense"])), 2);
    assert_eq!(code(&tcgx(dir.path(), &["fly"])), 2);
    let bad_approx = tcgx(
        dir.path(),
        &["raster", "fit", "--pbm", "x.pbm", "--approx", "1,2,3"],
    );
    assert_eq!(code(&bad_approx), 2);
}

#[test]
fn missing_input_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcgx(dir.path(), &["drawing", "info", "--in", "нет.dwt"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).starts_with("error:"), "{}", stderr(&out));
    assert!(stdout(&out).is_empty());
}

#[test]
fn unknown_profile_is_a_domain_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = tcgx(
        dir.path(),
        &["--profile", "Сантехнический", "bench", "catalog", "--tables", "1", "--rows", "1"],
    );
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("Сантехнический"));
}

fn trace_drawing() -> Drawing {
    let registry = builtin_registry();
    let mut instance = ModuleInstance::new(&registry, TRACE_TYPE).unwrap();
    instance.add_object("узлы", vec![Value::point(0.0, 0.0).unwrap()]).unwrap();
    instance.add_object("узлы", vec![Value::point(100.0, 0.0).unwrap()]).unwrap();
    instance.regenerate(&registry).unwrap();
    let mut second = ModuleInstance::new(&registry, TRACE_TYPE).unwrap();
    second.add_object("узлы", vec![Value::point(0.0, 50.0).unwrap()]).unwrap();
    second.add_object("узлы", vec![Value::point(100.0, 50.0).unwrap()]).unwrap();
    second.regenerate(&registry).unwrap();
    let mut d = Drawing::new(DrawingScale::reduction(1.0).unwrap(), "Лист 1");
    d.add_element(Element::module(ModulePayload::Parametric(instance))).unwrap();
    d.add_element(Element::module(ModulePayload::Parametric(second))).unwrap();
    d
}

#[test]
fn spec_collect_fills_sorts_and_merges() {
    let dir = tempfile::tempdir().unwrap();
    let dwt = dir.path().join("trace.dwt");
    save_drawing(&dwt, &trace_drawing()).unwrap();

    let out = tcgx(
        dir.path(),
        &[
            "spec", "collect", "--files", "trace.dwt", "--into", "spec.tkd", "--sort",
            "наименование,длина", "--merge", "qty",
        ],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).is_empty(), "{}", stderr(&out));

    let (tkd, _) = load_tkd(&dir.path().join("spec.tkd")).unwrap();
    // Both traces are 100 mm of code В1: one merged row with qty 2.
    assert_eq!(tkd.records.len(), 2);
    let row = &tkd.records[1];
    assert_eq!(row.values, vec!["Трасса В1", "В1", "100", "2"]);
}

#[test]
fn spec_collect_type_filter_can_exclude_everything() {
    let dir = tempfile::tempdir().unwrap();
    let dwt = dir.path().join("trace.dwt");
    save_drawing(&dwt, &trace_drawing()).unwrap();
    let out = tcgx(
        dir.path(),
        &["spec", "collect", "--files", "trace.dwt", "--types", "Другое", "--into", "empty.tkd"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (tkd, _) = load_tkd(&dir.path().join("empty.tkd")).unwrap();
    assert_eq!(tkd.records.len(), 1);
}

#[test]
fn spec_collect_warns_about_unreadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let dwt = dir.path().join("trace.dwt");
    save_drawing(&dwt, &trace_drawing()).unwrap();
    let out = tcgx(
        dir.path(),
        &["spec", "collect", "--files", "trace.dwt", "битый.dwt", "--into", "спец.tkd"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("WARN битый.dwt"), "{}", stderr(&out));
    // The readable file still contributes.
    let (tkd, _) = load_tkd(&dir.path().join("спец.tkd")).unwrap();
    assert_eq!(tkd.records.len(), 3);
}

#[test]
fn drawing_info_and_render_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let dwt = dir.path().join("trace.dwt");
    save_drawing(&dwt, &trace_drawing()).unwrap();

    let info = tcgx(dir.path(), &["drawing", "info", "--in", "trace.dwt"]);
    assert_eq!(code(&info), 0, "{}", stderr(&info));
    let text = stdout(&info);
    assert!(text.contains("sheet \"Лист 1\""), "{text}");
    assert!(text.contains("elements 2"), "{text}");

    let a = tcgx(dir.path(), &["drawing", "render", "--in", "trace.dwt"]);
    let b = tcgx(dir.path(), &["drawing", "render", "--in", "trace.dwt", "--out", "d.svg"]);
    assert_eq!(code(&a), 0);
    assert_eq!(code(&b), 0);
    let on_disk = fs::read_to_string(dir.path().join("d.svg")).unwrap();
    assert_eq!(stdout(&a), on_disk);
    assert!(on_disk.starts_with("<svg "));
}

#[test]
fn tkd_render_same_input_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (mut tkd, layout) = standard_blank();
    tkd.push_data(vec!["Труба 57х3.5".into(), "В1".into(), "100".into(), "2".into()]);
    tkd.push_data(vec!["Отвод 90".into(), "В2".into(), "".into(), "4".into()]);
    tcgx_core::tkd::save_tkd(&dir.path().join("t.tkd"), &tkd, &layout).unwrap();

    let args = ["tkd", "render", "--in", "t.tkd", "--svg", "a.svg", "--csv", "a.csv"];
    assert_eq!(code(&tcgx(dir.path(), &args)), 0);
    let first_svg = fs::read(dir.path().join("a.svg")).unwrap();
    let first_csv = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(code(&tcgx(dir.path(), &args)), 0);
    assert_eq!(fs::read(dir.path().join("a.svg")).unwrap(), first_svg);
    assert_eq!(fs::read(dir.path().join("a.csv")).unwrap(), first_csv);

    let chunked = tcgx(
        dir.path(),
        &["tkd", "render", "--in", "t.tkd", "--svg", "c.svg", "--chunk-height", "30", "--repeat", "header", "--dir", "right"],
    );
    assert_eq!(code(&chunked), 0, "{}", stderr(&chunked));
}

fn pipe_bundle() -> CatalogBundle {
    let table = DataTable {
        id: "pipes_gost".into(),
        source_catalog: "ГОСТ 8732-78".into(),
        profile_tags: ["Трубы".to_string()].into(),
        columns: vec![
            Column { key: "наименование".into(), kind: ColumnKind::Text },
            Column { key: "dn".into(), kind: ColumnKind::Number { unit: "mm".into() } },
        ],
        rows: vec![
            Row {
                cells: vec![CellValue::Text("Труба 57х3.5".into()), CellValue::Number(50.0)],
                class_path: "Трубы/Стальные".into(),
                quantity_symbol: None,
                rank: InstrumentRank::None,
            },
            Row {
                cells: vec![CellValue::Text("Труба 76х4".into()), CellValue::Number(65.0)],
                class_path: "Трубы/Стальные".into(),
                quantity_symbol: None,
                rank: InstrumentRank::None,
            },
        ],
    };
    let mut ruleset = RuleSet::default();
    ruleset.rules.push((
        "обозначение".to_string(),
        tcgx_core::catalog::parse_rule("[наименование] \" ГОСТ 8732-78\"").unwrap(),
    ));
    CatalogBundle { table, ruleset, menus: BTreeMap::<String, MenuDef>::new() }
}

#[test]
fn catalog_query_is_gated_by_profile() {
    let dir = tempfile::tempdir().unwrap();
    let bundle_dir = dir.path().join("pipes");
    fs::create_dir(&bundle_dir).unwrap();
    save_bundle(&bundle_dir, &pipe_bundle()).unwrap();

    let denied = tcgx(
        dir.path(),
        &["--profile", "КИП и автоматика", "catalog", "query", "--bundle", "pipes"],
    );
    assert_eq!(code(&denied), 1);
    assert!(stderr(&denied).contains("КИП и автоматика"), "{}", stderr(&denied));
    assert!(stdout(&denied).is_empty());

    let allowed = tcgx(
        dir.path(),
        &[
            "--profile", "Монтажно-технологический", "catalog", "query", "--bundle", "pipes",
            "--filter", "interval(dn, 60, 70, mm)",
        ],
    );
    assert_eq!(code(&allowed), 0, "{}", stderr(&allowed));
    let text = stdout(&allowed);
    assert!(text.contains("Труба 76х4"), "{text}");
    assert!(!text.contains("57х3.5"), "{text}");
}

#[test]
fn catalog_pick_runs_the_rules() {
    let dir = tempfile::tempdir().unwrap();
    let bundle_dir = dir.path().join("pipes");
    fs::create_dir(&bundle_dir).unwrap();
    save_bundle(&bundle_dir, &pipe_bundle()).unwrap();

    let out = tcgx(
        dir.path(),
        &["--profile", "Монтажно-технологический", "catalog", "pick", "--bundle", "pipes", "--row", "1"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "обозначение\tТруба 76х4 ГОСТ 8732-78\n");
}

#[test]
fn raster_fit_recovers_a_drawn_segment_and_stitch_merges() {
    let dir = tempfile::tempdir().unwrap();
    let a = Point::new(10.0, 10.0);
    let b = Point::new(60.0, 35.0);
    let raster = rasterize_segment(a, b, 300, 5.0).unwrap();
    save_raster(&dir.path().join("scan.pbm"), &raster).unwrap();

    let fit = tcgx(
        dir.path(),
        &["raster", "fit", "--pbm", "scan.pbm", "--approx", "9,11,61,34", "--corridor", "2"],
    );
    assert_eq!(code(&fit), 0, "{}", stderr(&fit));
    let report = stdout(&fit);
    assert!(report.contains("confidence ok"), "{report}");
    let endpoints: Vec<f64> = report
        .lines()
        .take(2)
        .flat_map(|l| l.split_whitespace().skip(1).map(|t| t.parse().unwrap()))
        .collect();
    let pitch = 25.4 / 300.0;
    assert!((endpoints[0] - a.x).abs() < 2.0 * pitch, "{report}");
    assert!((endpoints[1] - a.y).abs() < 2.0 * pitch, "{report}");

    // Two halves of one sheet, placed by their sidecars.
    let left = rasterize_segment(Point::new(0.0, 0.0), Point::new(20.0, 0.0), 300, 2.0).unwrap();
    let right = rasterize_segment(Point::new(20.0, 0.0), Point::new(40.0, 0.0), 300, 2.0).unwrap();
    save_raster(&dir.path().join("l.pbm"), &left).unwrap();
    save_raster(&dir.path().join("r.pbm"), &right).unwrap();
    let st = tcgx(
        dir.path(),
        &["raster", "stitch", "--a", "l.pbm", "--b", "r.pbm", "--out", "whole.pbm"],
    );
    assert_eq!(code(&st), 0, "{}", stderr(&st));
    assert!(dir.path().join("whole.pbm").exists());
    assert!(dir.path().join("whole.rplace").exists());
    let merged = tcgx_core::raster::load_raster(&dir.path().join("whole.pbm")).unwrap();
    assert_eq!(merged.count_ink(), {
        let mut u = left.clone();
        let du = ((right.origin().x - left.origin().x) / left.mm_per_pixel()).round() as i64;
        let dv = ((left.origin().y - right.origin().y) / left.mm_per_pixel()).round() as i64;
        u = tcgx_core::raster::stitch(&u, &right, (du, dv)).unwrap();
        u.count_ink()
    });
}

#[test]
fn bench_hash_depends_only_on_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bench", "catalog", "--tables", "4", "--rows", "80", "--seed", "7"];
    let first = tcgx(dir.path(), &args);
    let second = tcgx(dir.path(), &args);
    assert_eq!(code(&first), 0);
    let line = |o: &Output| stdout(o).lines().find(|l| l.starts_with("sha256")).unwrap().to_string();
    assert_eq!(line(&first), line(&second));
    let other = tcgx(
        dir.path(),
        &["bench", "catalog", "--tables", "4", "--rows", "80", "--seed", "8"],
    );
    assert_ne!(line(&first), line(&other));
}

#[test]
fn profiles_file_in_the_working_directory_applies() {
    let dir = tempfile::tempdir().unwrap();
    let bundle_dir = dir.path().join("pipes");
    fs::create_dir(&bundle_dir).unwrap();
    save_bundle(&bundle_dir, &pipe_bundle()).unwrap();

    // A profiles.txt granting the instrumentation profile the pipe tag.
    let mut text = tcgx_core::profile::ProfileSet::builtin().to_text();
    text = text.replace("TAGS КИП Приборы", "TAGS КИП Приборы Трубы");
    fs::write(dir.path().join("profiles.txt"), text).unwrap();

    let out = tcgx(
        dir.path(),
        &["--profile", "КИП и автоматика", "catalog", "query", "--bundle", "pipes"],
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("Труба 57х3.5"));
}
