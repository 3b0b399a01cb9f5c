//! Batch front end.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error. Diagnostics go to
//! standard error; machine output goes to standard output or the named
//! output files. Every writing path is deterministic for equal inputs.

use std::collections::{BTreeMap, BTreeSet};
use std::error::Error;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tcgx_core::catalog::{
    eval_ruleset, eval_ruleset_resolved, load_bundle, parse_filter, resolve_embedded,
    CatalogBundle, CellValue, ScriptedInput, UnitRegistry,
};
use tcgx_core::export::{drawing_svg, svg_document, tkd_csv};
use tcgx_core::geom::{load_drawing, Space};
use tcgx_core::parmod::builtin_registry;
use tcgx_core::profile::{ProfileSet, WorkProfile};
use tcgx_core::raster::{fit_segment, load_raster, save_raster, stitch};
use tcgx_core::spec::{
    collect, fill, merge_identical, pack_sections, sort_rows, standard_blank, CollectScope,
    CollectTarget,
};
use tcgx_core::synth::{corpus_hash, generate_corpus, run_battery, BenchSpec};
use tcgx_core::textio::fmt_f64;
use tcgx_core::tkd::{load_tkd, placed_prims, save_tkd, RepeatBand, RunDirection};
use tcgx_core::geom::Point;
use tcgx_core::StyleTables;

#[derive(Parser)]
#[command(
    name = "tcgx",
    version,
    about = "Drawing, catalog, table-document, specification and raster operations",
    arg_required_else_help = true,
    subcommand_required = true
)]
struct Cli {
    /// Work profile; the TCGX_PROFILE variable applies when omitted.
    #[arg(long, global = true)]
    profile: Option<String>,

    /// Profile definitions file; `profiles.txt` in the working directory,
    /// then the built-ins, apply when omitted.
    #[arg(long, global = true)]
    profiles: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Drawing files.
    #[command(subcommand)]
    Drawing(DrawingCmd),
    /// Nomenclature catalogs.
    #[command(subcommand)]
    Catalog(CatalogCmd),
    /// Table documents.
    #[command(subcommand)]
    Tkd(TkdCmd),
    /// Specification assembly.
    #[command(subcommand)]
    Spec(SpecCmd),
    /// Raster underlays.
    #[command(subcommand)]
    Raster(RasterCmd),
    /// Benchmarks.
    #[command(subcommand)]
    Bench(BenchCmd),
}

#[derive(Subcommand)]
enum DrawingCmd {
    /// Print sheet name, scale, element count, extents and advisories.
    Info {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Export the drawing as SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CatalogCmd {
    /// List the rows of a bundle matching a filter.
    Query {
        /// Bundle directory.
        #[arg(long)]
        bundle: PathBuf,
        /// Filter expression, e.g. 'and(class("Трубы"), interval(dn, 10, 100, mm))'.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Run the generation rules of one row.
    Pick {
        /// Bundle directory.
        #[arg(long)]
        bundle: PathBuf,
        /// Row index, zero-based.
        #[arg(long)]
        row: usize,
        /// Scripted answers for external menu prompts, in prompt order.
        #[arg(long, value_delimiter = ',')]
        answers: Vec<String>,
        /// Embedded-menu choices as column=option; resolves the row first.
        #[arg(long = "choose", value_parser = parse_key_value)]
        choices: Vec<(String, String)>,
    },
}

#[derive(Subcommand)]
enum TkdCmd {
    /// Lay a table document out and export SVG and optionally CSV.
    Render(TkdRender),
}

#[derive(Args)]
struct TkdRender {
    #[arg(long = "in")]
    input: PathBuf,
    /// SVG output file; standard output when omitted.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Also export the records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Chunk height in mm; overrides the stored layout.
    #[arg(long)]
    chunk_height: Option<f64>,
    /// Band repeated at each continuation chunk.
    #[arg(long)]
    repeat: Option<RepeatArg>,
    /// Where continuation chunks go.
    #[arg(long)]
    dir: Option<DirArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RepeatArg {
    Header,
    Numbers,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirArg {
    Left,
    Right,
}

#[derive(Subcommand)]
enum SpecCmd {
    /// Harvest specifying properties from drawings into a table document.
    Collect(SpecCollect),
}

#[derive(Args)]
struct SpecCollect {
    /// Drawing files to harvest.
    #[arg(long, num_args = 1.., required = true)]
    files: Vec<PathBuf>,
    /// Only modules of these types; all types when omitted.
    #[arg(long, value_delimiter = ',')]
    types: Vec<String>,
    /// Blank table document to fill; the built-in blank when omitted.
    #[arg(long)]
    blank: Option<PathBuf>,
    /// Output table document.
    #[arg(long)]
    into: PathBuf,
    /// Pack rows into sections by this column first.
    #[arg(long)]
    sections: Option<String>,
    /// Then sort rows by these columns within sections.
    #[arg(long, value_delimiter = ',')]
    sort: Vec<String>,
    /// Finally merge adjacent identical rows, summing this quantity column.
    #[arg(long)]
    merge: Option<String>,
}

#[derive(Subcommand)]
enum RasterCmd {
    /// Fit a segment to scanned linework near an approximate stroke.
    Fit {
        /// PBM file with its placement sidecar.
        #[arg(long)]
        pbm: PathBuf,
        /// Approximate stroke as x1,y1,x2,y2 in paper mm.
        #[arg(long, value_parser = parse_quad)]
        approx: Quad,
        /// Search corridor half-width in mm.
        #[arg(long, default_value_t = 2.0)]
        corridor: f64,
    },
    /// Combine two scans of one sheet by their placements.
    Stitch {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum BenchCmd {
    /// Generate the synthetic corpus and time the filter battery.
    Catalog {
        #[arg(long, default_value_t = 265)]
        tables: usize,
        #[arg(long, default_value_t = 68213)]
        rows: usize,
        /// Corpus seed; the fixed default reproduces the reference corpus.
        #[arg(long)]
        seed: Option<u64>,
        /// Also check the battery against the reference scan on a table sample.
        #[arg(long)]
        check: bool,
    },
}

#[derive(Clone, Copy, Debug)]
struct Quad(f64, f64, f64, f64);

fn parse_quad(s: &str) -> Result<Quad, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("expected x1,y1,x2,y2".to_string());
    }
    let mut v = [0.0; 4];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = p
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("'{p}' is not a number"))?;
    }
    Ok(Quad(v[0], v[1], v[2], v[3]))
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err("expected column=option".to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

type RunResult = Result<(), Box<dyn Error>>;

fn run(cli: Cli) -> RunResult {
    let profile = active_profile(&cli)?;
    match cli.command {
        Command::Drawing(cmd) => run_drawing(cmd),
        Command::Catalog(cmd) => run_catalog(cmd, &profile),
        Command::Tkd(TkdCmd::Render(args)) => run_tkd_render(args),
        Command::Spec(SpecCmd::Collect(args)) => run_spec_collect(args),
        Command::Raster(cmd) => run_raster(cmd),
        Command::Bench(cmd) => run_bench(cmd),
    }
}

fn active_profile(cli: &Cli) -> Result<WorkProfile, Box<dyn Error>> {
    let set = match &cli.profiles {
        Some(path) => ProfileSet::load(path)?,
        None => {
            let local = Path::new("profiles.txt");
            if local.exists() {
                ProfileSet::load(local)?
            } else {
                ProfileSet::builtin()
            }
        }
    };
    Ok(set.select(cli.profile.as_deref())?.clone())
}

fn write_or_print(target: Option<&Path>, content: &str) -> RunResult {
    match target {
        Some(path) => Ok(fs::write(path, content)?),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run_drawing(cmd: DrawingCmd) -> RunResult {
    let registry = builtin_registry();
    match cmd {
        DrawingCmd::Info { input } => {
            let d = load_drawing(&input, &registry)?;
            println!("sheet {:?}", d.sheet);
            println!("scale 1:{}", fmt_f64(d.scale.ratio()));
            println!("elements {}", d.elements().len());
            for (label, space) in [("natural", Space::Natural), ("paper", Space::Paper)] {
                match d.bbox(space) {
                    Ok(r) => println!(
                        "extent {label} {} {} {} {}",
                        fmt_f64(r.min.x),
                        fmt_f64(r.min.y),
                        fmt_f64(r.max.x),
                        fmt_f64(r.max.y)
                    ),
                    Err(_) => println!("extent {label} empty"),
                }
            }
            for advisory in d.advisories() {
                println!("advisory {advisory}");
            }
            Ok(())
        }
        DrawingCmd::Render { input, out } => {
            let d = load_drawing(&input, &registry)?;
            let svg = drawing_svg(&d)?;
            write_or_print(out.as_deref(), &svg)
        }
    }
}

fn load_gated_bundle(
    dir: &Path,
    units: &UnitRegistry,
    profile: &WorkProfile,
) -> Result<CatalogBundle, Box<dyn Error>> {
    let bundle = load_bundle(dir, units)?;
    if !profile.allows(&bundle.table.profile_tags) {
        return Err(format!(
            "catalog '{}' is not available under profile '{}'",
            bundle.table.id, profile.name
        )
        .into());
    }
    Ok(bundle)
}

fn cell_to_text(cell: &CellValue) -> String {
    match cell {
        CellValue::Text(s) => s.clone(),
        CellValue::Number(v) => fmt_f64(*v),
        CellValue::Menu(opts) => opts.join("|"),
    }
}

fn run_catalog(cmd: CatalogCmd, profile: &WorkProfile) -> RunResult {
    let units = UnitRegistry::standard();
    match cmd {
        CatalogCmd::Query { bundle, filter } => {
            let b = load_gated_bundle(&bundle, &units, profile)?;
            let rows: Vec<usize> = match filter {
                Some(expr) => {
                    let f = parse_filter(&expr)?;
                    tcgx_core::catalog::apply_filter(&b.table, &f, &units)?
                }
                None => (0..b.table.rows.len()).collect(),
            };
            for i in rows {
                let row = &b.table.rows[i];
                let cells: Vec<String> = row.cells.iter().map(cell_to_text).collect();
                println!("{i}\t{}", cells.join("\t"));
            }
            Ok(())
        }
        CatalogCmd::Pick { bundle, row, answers, choices } => {
            let b = load_gated_bundle(&bundle, &units, profile)?;
            let mut input = ScriptedInput::new(answers);
            let evaluation = if choices.is_empty() {
                eval_ruleset(&b.table, row, &b.ruleset, &b.menus, &mut input)?
            } else {
                let map: BTreeMap<String, String> = choices.into_iter().collect();
                let resolved = resolve_embedded(&b.table, row, &map)?;
                eval_ruleset_resolved(&b.table, &resolved, &b.ruleset, &b.menus, &mut input)?
            };
            for (key, value) in &evaluation.fields {
                println!("{key}\t{value}");
            }
            Ok(())
        }
    }
}

fn run_tkd_render(args: TkdRender) -> RunResult {
    let (tkd, mut layout) = load_tkd(&args.input)?;
    if let Some(h) = args.chunk_height {
        layout.chunk_height = Some(h);
    }
    if let Some(repeat) = args.repeat {
        layout.repeat = match repeat {
            RepeatArg::Header => RepeatBand::HeaderRow,
            RepeatArg::Numbers => RepeatBand::ColumnNumberRow,
        };
    }
    if let Some(dir) = args.dir {
        layout.continuation = match dir {
            DirArg::Left => RunDirection::Left,
            DirArg::Right => RunDirection::Right,
        };
    }
    let laid = placed_prims(&tkd, &layout)?;
    for warning in &laid.warnings {
        eprintln!("WARN {warning:?}");
    }
    let svg = svg_document(&laid.prims, StyleTables::standard())?;
    write_or_print(args.svg.as_deref(), &svg)?;
    if let Some(csv) = &args.csv {
        fs::write(csv, tkd_csv(&tkd))?;
    }
    Ok(())
}

fn run_spec_collect(args: SpecCollect) -> RunResult {
    let registry = builtin_registry();
    let scope = CollectScope {
        target: CollectTarget::Files(args.files),
        module_types: if args.types.is_empty() {
            None
        } else {
            Some(args.types.into_iter().collect::<BTreeSet<String>>())
        },
    };
    let collected = collect(&scope, &registry);
    for (file, message) in &collected.errors {
        eprintln!("WARN {file}: {message}");
    }
    let units = UnitRegistry::standard();
    let (mut tkd, layout) = match &args.blank {
        Some(path) => load_tkd(path)?,
        None => standard_blank(),
    };
    let report = fill(&mut tkd, &collected.records, &units)?;
    for line in report.warn_lines() {
        eprintln!("{line}");
    }
    if let Some(key) = &args.sections {
        pack_sections(&mut tkd, key)?;
    }
    if !args.sort.is_empty() {
        let keys: Vec<&str> = args.sort.iter().map(String::as_str).collect();
        sort_rows(&mut tkd, &keys)?;
    }
    if let Some(key) = &args.merge {
        merge_identical(&mut tkd, key)?;
    }
    save_tkd(&args.into, &tkd, &layout)?;
    Ok(())
}

fn run_raster(cmd: RasterCmd) -> RunResult {
    match cmd {
        RasterCmd::Fit { pbm, approx, corridor } => {
            let raster = load_raster(&pbm)?;
            let Quad(x1, y1, x2, y2) = approx;
            let fitted = fit_segment(&raster, (Point::new(x1, y1), Point::new(x2, y2)), corridor)?;
            println!("a {} {}", fmt_f64(fitted.a.x), fmt_f64(fitted.a.y));
            println!("b {} {}", fmt_f64(fitted.b.x), fmt_f64(fitted.b.y));
            println!("support {}", fitted.support);
            println!("rms {}", fmt_f64(fitted.rms));
            println!("confidence {}", if fitted.low_confidence { "low" } else { "ok" });
            Ok(())
        }
        RasterCmd::Stitch { a, b, out } => {
            let ra = load_raster(&a)?;
            let rb = load_raster(&b)?;
            let mm = ra.mm_per_pixel();
            let offset = (
                ((rb.origin().x - ra.origin().x) / mm).round() as i64,
                ((ra.origin().y - rb.origin().y) / mm).round() as i64,
            );
            let merged = stitch(&ra, &rb, offset)?;
            save_raster(&out, &merged)?;
            println!(
                "stitched {}x{} at {} dpi",
                merged.width(),
                merged.height(),
                merged.dpi()
            );
            Ok(())
        }
    }
}

fn run_bench(cmd: BenchCmd) -> RunResult {
    match cmd {
        BenchCmd::Catalog { tables, rows, seed, check } => {
            let spec = BenchSpec {
                n_tables: tables,
                n_rows_total: rows,
                seed: seed.unwrap_or(BenchSpec::default().seed),
            };
            let corpus = generate_corpus(&spec);
            let total_rows: usize = corpus.iter().map(|t| t.rows.len()).sum();
            println!("tables {}", corpus.len());
            println!("rows {total_rows}");
            println!("sha256 {}", corpus_hash(&corpus));
            let units = UnitRegistry::standard();
            if check {
                let mut compared = 0usize;
                for table in corpus.iter().step_by(100) {
                    for (name, filter) in tcgx_core::synth::filter_battery() {
                        let fast = tcgx_core::catalog::apply_filter(table, &filter, &units)?;
                        let slow = tcgx_core::catalog::apply_filter_naive(table, &filter, &units)?;
                        if fast != slow {
                            return Err(format!("filter '{name}' diverges on table {}", table.id).into());
                        }
                        compared += 1;
                    }
                }
                println!("check ok over {compared} filter runs");
            }
            let report = run_battery(&corpus, &units)?;
            for line in report.lines() {
                println!("{line}");
            }
            Ok(())
        }
    }
}
