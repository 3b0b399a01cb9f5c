//! Document-automation kernel: drawings with governed precision, monochrome
//! raster underlays, nomenclature catalogs with a string-generation rule
//! language, parametric table documents, and specification assembly.

pub mod catalog;
pub mod export;
pub mod geom;
pub mod parmod;
pub mod profile;
pub mod raster;
pub mod spec;
pub mod synth;
pub mod textio;
pub mod tkd;

pub use catalog::{DataTable, Filter, Rule, RuleSet, UnitRegistry};
pub use geom::{Drawing, DrawingScale, StoredCoord, StyleTables};
pub use profile::{ProfileSet, WorkProfile};
pub use synth::BenchSpec;
pub use tkd::{BlockNode, LayoutSpec, Tkd, TkdRecord};
