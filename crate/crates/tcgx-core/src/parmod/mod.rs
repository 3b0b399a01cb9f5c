//! Typed parametric modules.
//!
//! A module type declares object lists (typed fields, including references
//! to objects of other lists by index) and general parameters, plus a pure
//! generator from parametric state to geometry, specifying records, and snap
//! points. Instances behave as a small relational store: the guarded
//! mutation API preserves referential integrity, removal offers reject and
//! cascade policies, and regeneration re-derives all output from state.
//! Prototype libraries hold serialized instances on disk.

mod demo;
mod descriptor;
mod instance;
mod proto;

pub use demo::{builtin_registry, trace_descriptor, TraceGenerator, TRACE_TYPE};
pub use descriptor::{
    FieldDef, FieldKind, Generator, GeneratorOutput, ListSchema, ModuleTypeDescriptor, ParamDef,
    TypeRegistry, Value,
};
pub use instance::{ModuleInstance, ObjectList, RemovePolicy};
pub use proto::{instance_to_sections, parse_instance_sections, PrototypeLibrary};

use thiserror::Error;

/// One dangling reference: the holding object and where it points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingRef {
    pub list: String,
    pub index: usize,
    pub field: String,
    pub target_list: String,
    pub target_index: usize,
}

impl std::fmt::Display for DanglingRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}[{}].{} -> {}[{}] does not exist",
            self.list, self.index, self.field, self.target_list, self.target_index
        )
    }
}

#[derive(Debug, Error)]
pub enum ModError {
    #[error("unknown module type {0:?}")]
    UnknownType(String),
    #[error("module type {0:?} is already registered")]
    DuplicateType(String),
    #[error("bad schema for {type_name:?}: {msg}")]
    Schema { type_name: String, msg: String },
    #[error("module type {type_name:?} has no list {list:?}")]
    NoSuchList { type_name: String, list: String },
    #[error("list {list:?} has no object {index}")]
    NoSuchObject { list: String, index: usize },
    #[error("{list:?} has no field {field:?}")]
    NoSuchField { list: String, field: String },
    #[error("{list:?}.{field:?} wants a {want}, got a {got}")]
    KindMismatch {
        list: String,
        field: String,
        want: &'static str,
        got: &'static str,
    },
    #[error("{list:?}.{field:?} points at {target:?}[{index}], but the list has {len} objects")]
    BadRef {
        list: String,
        field: String,
        target: String,
        index: usize,
        len: usize,
    },
    #[error("{list:?}[{index}] is still referenced by {} object(s)", by.len())]
    StillReferenced {
        list: String,
        index: usize,
        by: Vec<(String, usize)>,
    },
    #[error("referential integrity is broken: {}", fmt_dangling(.0))]
    Integrity(Vec<DanglingRef>),
    #[error("generator of {type_name:?} failed: {msg}")]
    Generator { type_name: String, msg: String },
    #[error("no prototype named {0:?}")]
    NotFound(String),
    #[error("{0:?} is not a plain file stem")]
    BadName(String),
    #[error("{file}: prototype of {type_name:?} has version {got}, this build reads {want}")]
    Version {
        file: String,
        type_name: String,
        want: u32,
        got: u32,
    },
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Geom(#[from] crate::geom::GeomError),
}

fn fmt_dangling(list: &[DanglingRef]) -> String {
    let texts: Vec<String> = list.iter().map(|d| d.to_string()).collect();
    texts.join("; ")
}
