//! Benchmark support: the corpus under test is built once per process.

use std::sync::OnceLock;

use tcgx_core::catalog::UnitRegistry;
use tcgx_core::synth::{generate_corpus, BenchSpec};
use tcgx_core::DataTable;

pub fn corpus() -> &'static [DataTable] {
    static CORPUS: OnceLock<Vec<DataTable>> = OnceLock::new();
    CORPUS.get_or_init(|| generate_corpus(&BenchSpec::default()))
}

pub fn units() -> &'static UnitRegistry {
    static UNITS: OnceLock<UnitRegistry> = OnceLock::new();
    UNITS.get_or_init(UnitRegistry::standard)
}
