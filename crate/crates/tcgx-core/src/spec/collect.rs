//! Harvesting specifying records from modules.

use std::collections::BTreeSet;
use std::path::PathBuf;

use super::record::SpecRecord;
use crate::geom::{load_drawing, Drawing, Element, ModulePayload};
use crate::parmod::TypeRegistry;

#[derive(Debug)]
pub enum CollectTarget<'a> {
    CurrentDrawing(&'a Drawing),
    Files(Vec<PathBuf>),
}

/// Where to harvest and which module types to take.
#[derive(Debug)]
pub struct CollectScope<'a> {
    pub target: CollectTarget<'a>,
    /// None takes every type; an explicit set takes only those named.
    pub module_types: Option<BTreeSet<String>>,
}

#[derive(Debug, Default)]
pub struct Collected {
    /// Records in file order, then element order within each drawing.
    pub records: Vec<SpecRecord>,
    /// (file, message) per input that failed to load; never fatal.
    pub errors: Vec<(String, String)>,
}

pub fn collect(scope: &CollectScope<'_>, registry: &TypeRegistry) -> Collected {
    let mut out = Collected::default();
    match &scope.target {
        CollectTarget::CurrentDrawing(drawing) => {
            harvest(drawing, &drawing.sheet, scope.module_types.as_ref(), &mut out);
        }
        CollectTarget::Files(paths) => {
            for path in paths {
                let label = path.display().to_string();
                match load_drawing(path, registry) {
                    Ok(drawing) => {
                        harvest(&drawing, &label, scope.module_types.as_ref(), &mut out)
                    }
                    Err(e) => out.errors.push((label, e.to_string())),
                }
            }
        }
    }
    out
}

fn harvest(
    drawing: &Drawing,
    file: &str,
    filter: Option<&BTreeSet<String>>,
    out: &mut Collected,
) {
    for (index, element) in drawing.elements().iter().enumerate() {
        let Element::Module(payload) = element else {
            continue;
        };
        let ModulePayload::Parametric(instance) = payload.as_ref() else {
            continue;
        };
        if let Some(allowed) = filter {
            if !allowed.contains(instance.type_name()) {
                continue;
            }
        }
        for record in instance.spec_records() {
            let mut record = record.clone();
            record.source.file = file.to_string();
            record.source.module_id = index;
            record.source.module_type = instance.type_name().to_string();
            out.records.push(record);
        }
    }
}
