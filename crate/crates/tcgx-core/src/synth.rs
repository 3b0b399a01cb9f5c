//! Synthetic catalog corpus and the filter benchmark.
//!
//! Generation is a pure function of the spec: same seed, same corpus, same
//! hash. Row counts split as evenly as possible over the tables so the
//! total is hit exactly.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::catalog::{
    apply_filter, CatalogError, CellValue, Column, ColumnKind, DataTable, Filter, InstrumentRank,
    Row, UnitRegistry,
};
use crate::textio::fmt_f64;

/// Corpus dimensions. The default reproduces the reference scale of 265
/// tables holding 68213 rows in total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchSpec {
    pub n_tables: usize,
    pub n_rows_total: usize,
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> BenchSpec {
        BenchSpec { n_tables: 265, n_rows_total: 68213, seed: 0x454E4B }
    }
}

const NAME_STEMS: [&str; 8] = [
    "Труба", "Отвод", "Фланец", "Задвижка", "Клапан", "Датчик", "Кабель", "Швеллер",
];

const CLASS_PATHS: [&str; 8] = [
    "Трубы/Стальные",
    "Трубы/Нержавеющие",
    "Арматура/Задвижки",
    "Арматура/Клапаны",
    "КИПиА/Датчики",
    "КИПиА/Вторичные",
    "Электро/Кабели",
    "Строительные/Прокат",
];

const SOURCES: [&str; 4] = ["ГОСТ 8732-78", "ГОСТ 5762-2002", "ТУ 26-07-1443-87", "ОСТ 36-146-88"];

const TAG_SETS: [&[&str]; 6] = [
    &["Трубы"],
    &["Арматура"],
    &["КИП"],
    &["Приборы"],
    &["Электро"],
    &["Строительные"],
];

const DN_SERIES: [f64; 15] = [
    10.0, 15.0, 20.0, 25.0, 32.0, 40.0, 50.0, 65.0, 80.0, 100.0, 125.0, 150.0, 200.0, 250.0,
    300.0,
];

const PN_SERIES: [f64; 7] = [0.6, 1.0, 1.6, 2.5, 4.0, 6.3, 10.0];

const VARIANTS: [&str; 5] = ["У1", "У2", "Т3", "ХЛ1", "УХЛ4"];

const SYMBOLS: [&str; 4] = ["P", "T", "F", "L"];

fn synth_columns() -> Vec<Column> {
    vec![
        Column { key: "наименование".into(), kind: ColumnKind::Text },
        Column { key: "dn".into(), kind: ColumnKind::Number { unit: "mm".into() } },
        Column { key: "py".into(), kind: ColumnKind::Number { unit: "MPa".into() } },
        Column { key: "масса".into(), kind: ColumnKind::Number { unit: "kg".into() } },
        Column { key: "исполнение".into(), kind: ColumnKind::Menu },
    ]
}

fn synth_row(rng: &mut ChaCha8Rng) -> Row {
    let stem = NAME_STEMS[rng.gen_range(0..NAME_STEMS.len())];
    let dn = DN_SERIES[rng.gen_range(0..DN_SERIES.len())];
    let py = PN_SERIES[rng.gen_range(0..PN_SERIES.len())];
    let mass = (rng.gen_range(0.1..500.0_f64) * 1000.0).round() / 1000.0;
    let name = format!("{stem} {dn}-{py}");
    let n_opts = rng.gen_range(2..=4);
    let mut opts: Vec<String> = Vec::with_capacity(n_opts);
    for _ in 0..n_opts {
        let v = VARIANTS[rng.gen_range(0..VARIANTS.len())];
        if !opts.iter().any(|o| o == v) {
            opts.push(v.to_string());
        }
    }
    Row {
        cells: vec![
            CellValue::Text(name),
            CellValue::Number(dn),
            CellValue::Number(py),
            CellValue::Number(mass),
            CellValue::Menu(opts),
        ],
        class_path: CLASS_PATHS[rng.gen_range(0..CLASS_PATHS.len())].to_string(),
        quantity_symbol: if rng.gen_ratio(1, 3) {
            Some(SYMBOLS[rng.gen_range(0..SYMBOLS.len())].to_string())
        } else {
            None
        },
        rank: match rng.gen_range(0..4) {
            0 => InstrumentRank::Primary,
            1 => InstrumentRank::Secondary,
            _ => InstrumentRank::None,
        },
    }
}

/// Deterministic corpus: `n_tables` tables whose row counts differ by at
/// most one and sum exactly to `n_rows_total`.
pub fn generate_corpus(spec: &BenchSpec) -> Vec<DataTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base = spec.n_rows_total / spec.n_tables.max(1);
    let extra = spec.n_rows_total % spec.n_tables.max(1);
    let mut out = Vec::with_capacity(spec.n_tables);
    for t in 0..spec.n_tables {
        let n_rows = base + usize::from(t < extra);
        let tags: BTreeSet<String> = TAG_SETS[t % TAG_SETS.len()]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let rows = (0..n_rows).map(|_| synth_row(&mut rng)).collect();
        out.push(DataTable {
            id: format!("T{:03}", t + 1),
            source_catalog: SOURCES[t % SOURCES.len()].to_string(),
            profile_tags: tags,
            columns: synth_columns(),
            rows,
        });
    }
    out
}

/// SHA-256 over a canonical text dump of the corpus, hex-encoded.
pub fn corpus_hash(corpus: &[DataTable]) -> String {
    let mut h = Sha256::new();
    for t in corpus {
        h.update(t.id.as_bytes());
        h.update(b"\x1f");
        h.update(t.source_catalog.as_bytes());
        for tag in &t.profile_tags {
            h.update(b"\x1f");
            h.update(tag.as_bytes());
        }
        h.update(b"\n");
        for c in &t.columns {
            h.update(c.key.as_bytes());
            h.update(b"\x1f");
        }
        h.update(b"\n");
        for r in &t.rows {
            for cell in &r.cells {
                match cell {
                    CellValue::Text(s) => h.update(s.as_bytes()),
                    CellValue::Number(v) => h.update(fmt_f64(*v).as_bytes()),
                    CellValue::Menu(opts) => h.update(opts.join("|").as_bytes()),
                }
                h.update(b"\x1f");
            }
            h.update(r.class_path.as_bytes());
            h.update(b"\x1f");
            if let Some(s) = &r.quantity_symbol {
                h.update(s.as_bytes());
            }
            h.update(b"\x1f");
            h.update(r.rank.as_str().as_bytes());
            h.update(b"\n");
        }
    }
    let digest = h.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        use std::fmt::Write as _;
        write!(hex, "{b:02x}").unwrap();
    }
    hex
}

/// The fixed battery the benchmark runs: mixed structural, classifier and
/// numeric predicates, including one that converts units on the fly.
pub fn filter_battery() -> Vec<(String, Filter)> {
    let f = |name: &str, filter: Filter| (name.to_string(), filter);
    vec![
        f(
            "dn-10-50-mm",
            Filter::Interval { column: "dn".into(), lo: 10.0, hi: 50.0, unit: "mm".into() },
        ),
        f(
            "dn-1-5-cm",
            Filter::Interval { column: "dn".into(), lo: 1.0, hi: 5.0, unit: "cm".into() },
        ),
        f(
            "py-under-16-kgf",
            Filter::Interval { column: "py".into(), lo: 0.0, hi: 16.0, unit: "kgf/cm2".into() },
        ),
        f("class-pipes", Filter::ClassPrefix("Трубы".into())),
        f("class-valves", Filter::ClassPrefix("Арматура/Задвижки".into())),
        f("rank-primary", Filter::InstrumentRankIs(InstrumentRank::Primary)),
        f("symbol-pressure", Filter::QuantitySymbolIs("P".into())),
        f(
            "dn100-exact",
            Filter::ColumnEquals { column: "dn".into(), value: "100".into() },
        ),
        f(
            "pipes-mid-range",
            Filter::And(vec![
                Filter::ClassPrefix("Трубы".into()),
                Filter::Interval { column: "dn".into(), lo: 50.0, hi: 150.0, unit: "mm".into() },
            ]),
        ),
        f(
            "primary-or-flow",
            Filter::Or(vec![
                Filter::InstrumentRankIs(InstrumentRank::Primary),
                Filter::QuantitySymbolIs("F".into()),
            ]),
        ),
        f(
            "instrument-tables",
            Filter::And(vec![
                Filter::ProfileIs("КИП".into()),
                Filter::Not(Box::new(Filter::InstrumentRankIs(InstrumentRank::None))),
            ]),
        ),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterTiming {
    pub name: String,
    pub matches: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatteryReport {
    pub per_filter: Vec<FilterTiming>,
    pub total: Duration,
}

impl BatteryReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .per_filter
            .iter()
            .map(|t| {
                format!("{:<20} {:>7} rows  {:>9.3} ms", t.name, t.matches, t.elapsed.as_secs_f64() * 1e3)
            })
            .collect();
        out.push(format!("{:<20} {:>7}      {:>9.3} ms", "total", "", self.total.as_secs_f64() * 1e3));
        out
    }
}

/// Runs every battery filter over every table, counting matched rows.
pub fn run_battery(corpus: &[DataTable], units: &UnitRegistry) -> Result<BatteryReport, CatalogError> {
    let mut per_filter = Vec::new();
    let mut total = Duration::ZERO;
    for (name, filter) in filter_battery() {
        let start = Instant::now();
        let mut matches = 0usize;
        for t in corpus {
            matches += apply_filter(t, &filter, units)?.len();
        }
        let elapsed = start.elapsed();
        total += elapsed;
        per_filter.push(FilterTiming { name, matches, elapsed });
    }
    Ok(BatteryReport { per_filter, total })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::apply_filter_naive;

    #[test]
    fn default_spec_hits_the_reference_scale() {
        let corpus = generate_corpus(&BenchSpec::default());
        assert_eq!(corpus.len(), 265);
        let rows: usize = corpus.iter().map(|t| t.rows.len()).sum();
        assert_eq!(rows, 68213);
        let units = UnitRegistry::standard();
        for t in corpus.iter().step_by(53) {
            t.validate(&units).unwrap();
        }
    }

    #[test]
    fn same_seed_same_hash_different_seed_different_hash() {
        let small = BenchSpec { n_tables: 7, n_rows_total: 123, seed: 5 };
        let a = corpus_hash(&generate_corpus(&small));
        let b = corpus_hash(&generate_corpus(&small));
        assert_eq!(a, b);
        let c = corpus_hash(&generate_corpus(&BenchSpec { seed: 6, ..small }));
        assert_ne!(a, c);
    }

    #[test]
    fn battery_agrees_with_the_naive_scan() {
        let corpus = generate_corpus(&BenchSpec { n_tables: 6, n_rows_total: 900, seed: 11 });
        let units = UnitRegistry::standard();
        for (name, filter) in filter_battery() {
            for t in &corpus {
                let fast = apply_filter(t, &filter, &units).unwrap();
                let slow = apply_filter_naive(t, &filter, &units).unwrap();
                assert_eq!(fast, slow, "{name} on {}", t.id);
            }
        }
        let report = run_battery(&corpus, &units).unwrap();
        assert_eq!(report.per_filter.len(), filter_battery().len());
        assert!(report.per_filter.iter().any(|t| t.matches > 0));
        assert_eq!(report.lines().len(), filter_battery().len() + 1);
    }
}
