//! Module type descriptors and the startup type registry.

use std::collections::{BTreeMap, BTreeSet};

use super::instance::ModuleInstance;
use super::ModError;
use crate::geom::{Element, LineTypeId, Point, StoredPoint};
use crate::spec::SpecRecord;

/// Kind of a field in an object list or of a general parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldKind {
    Number { unit: Option<String> },
    Text,
    Flag,
    Color,
    LineType,
    Point,
    /// Index of an object in another list of the same module.
    Ref { list: String },
}

impl FieldKind {
    pub fn number(unit: &str) -> FieldKind {
        FieldKind::Number {
            unit: Some(unit.to_string()),
        }
    }

    pub fn bare_number() -> FieldKind {
        FieldKind::Number { unit: None }
    }

    pub fn reference(list: &str) -> FieldKind {
        FieldKind::Ref {
            list: list.to_string(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Number { .. } => "number",
            FieldKind::Text => "text",
            FieldKind::Flag => "flag",
            FieldKind::Color => "color",
            FieldKind::LineType => "line type",
            FieldKind::Point => "point",
            FieldKind::Ref { .. } => "ref",
        }
    }
}

/// A typed value held by an object field or a general parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
    Flag(bool),
    Color(u8),
    Line(LineTypeId),
    Point(StoredPoint),
    Ref(usize),
}

impl Value {
    pub fn text(s: &str) -> Value {
        Value::Text(s.to_string())
    }

    pub fn point(x: f64, y: f64) -> Result<Value, ModError> {
        Ok(Value::Point(StoredPoint::new(x, y)?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "number",
            Value::Text(_) => "text",
            Value::Flag(_) => "flag",
            Value::Color(_) => "color",
            Value::Line(_) => "line type",
            Value::Point(_) => "point",
            Value::Ref(_) => "ref",
        }
    }

    pub fn matches(&self, kind: &FieldKind) -> bool {
        matches!(
            (self, kind),
            (Value::Number(_), FieldKind::Number { .. })
                | (Value::Text(_), FieldKind::Text)
                | (Value::Flag(_), FieldKind::Flag)
                | (Value::Color(_), FieldKind::Color)
                | (Value::Line(_), FieldKind::LineType)
                | (Value::Point(_), FieldKind::Point)
                | (Value::Ref(_), FieldKind::Ref { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub name: String,
    pub kind: FieldKind,
}

impl FieldDef {
    pub fn new(name: &str, kind: FieldKind) -> FieldDef {
        FieldDef {
            name: name.to_string(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDef {
    pub name: String,
    pub kind: FieldKind,
    pub default: Value,
    /// Marked parameters act as remembered settings for newly created
    /// instances.
    pub setting: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListSchema {
    pub name: String,
    pub fields: Vec<FieldDef>,
}

impl ListSchema {
    pub fn new(name: &str, fields: Vec<FieldDef>) -> ListSchema {
        ListSchema {
            name: name.to_string(),
            fields,
        }
    }

    pub fn field(&self, name: &str) -> Option<(usize, &FieldDef)> {
        self.fields.iter().enumerate().find(|(_, f)| f.name == name)
    }
}

/// Static description of one module type: its object lists, its general
/// parameters, its prototype file version.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleTypeDescriptor {
    pub type_name: String,
    pub version: u32,
    pub lists: Vec<ListSchema>,
    pub params: Vec<ParamDef>,
}

impl ModuleTypeDescriptor {
    pub fn list(&self, name: &str) -> Option<(usize, &ListSchema)> {
        self.lists.iter().enumerate().find(|(_, l)| l.name == name)
    }

    pub fn param(&self, name: &str) -> Option<&ParamDef> {
        self.params.iter().find(|p| p.name == name)
    }

    /// Structural soundness: unique non-empty names, refs across lists only,
    /// params without refs and with defaults of the declared kind.
    fn check(&self) -> Result<(), ModError> {
        let fail = |msg: String| {
            Err(ModError::Schema {
                type_name: self.type_name.clone(),
                msg,
            })
        };
        if self.type_name.is_empty() {
            return fail("empty type name".to_string());
        }
        let mut list_names = BTreeSet::new();
        for schema in &self.lists {
            if schema.name.is_empty() {
                return fail("empty list name".to_string());
            }
            if !list_names.insert(&schema.name) {
                return fail(format!("duplicate list {:?}", schema.name));
            }
            let mut field_names = BTreeSet::new();
            for f in &schema.fields {
                if f.name.is_empty() {
                    return fail(format!("empty field name in list {:?}", schema.name));
                }
                if !field_names.insert(&f.name) {
                    return fail(format!("duplicate field {:?} in list {:?}", f.name, schema.name));
                }
                if let FieldKind::Ref { list } = &f.kind {
                    if list == &schema.name {
                        return fail(format!(
                            "field {:?} of list {:?} may not reference its own list",
                            f.name, schema.name
                        ));
                    }
                    if self.list(list).is_none() {
                        return fail(format!(
                            "field {:?} references unknown list {:?}",
                            f.name, list
                        ));
                    }
                }
            }
        }
        let mut param_names = BTreeSet::new();
        for p in &self.params {
            if p.name.is_empty() {
                return fail("empty parameter name".to_string());
            }
            if !param_names.insert(&p.name) {
                return fail(format!("duplicate parameter {:?}", p.name));
            }
            if matches!(p.kind, FieldKind::Ref { .. }) {
                return fail(format!("parameter {:?} may not be a ref", p.name));
            }
            if !p.default.matches(&p.kind) {
                return fail(format!(
                    "parameter {:?} default is {} but the kind is {}",
                    p.name,
                    p.default.kind_name(),
                    p.kind.name()
                ));
            }
        }
        Ok(())
    }
}

/// What one regeneration produces: visible geometry, invisible specifying
/// records, and the points other elements may snap to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneratorOutput {
    pub geometry: Vec<Element>,
    pub records: Vec<SpecRecord>,
    pub snaps: Vec<Point>,
}

/// A pure mapping from parametric state to output. Equal instances must
/// produce equal output.
pub trait Generator: Send + Sync {
    fn generate(&self, instance: &ModuleInstance) -> Result<GeneratorOutput, ModError>;
}

struct RegisteredType {
    descriptor: ModuleTypeDescriptor,
    generator: Box<dyn Generator>,
}

/// All module types known to the session. Written once at startup, read-only
/// afterwards.
#[derive(Default)]
pub struct TypeRegistry {
    types: BTreeMap<String, RegisteredType>,
}

impl TypeRegistry {
    pub fn new() -> TypeRegistry {
        TypeRegistry::default()
    }

    pub fn register(
        &mut self,
        descriptor: ModuleTypeDescriptor,
        generator: Box<dyn Generator>,
    ) -> Result<(), ModError> {
        descriptor.check()?;
        let name = descriptor.type_name.clone();
        if self.types.contains_key(&name) {
            return Err(ModError::DuplicateType(name));
        }
        self.types.insert(
            name,
            RegisteredType {
                descriptor,
                generator,
            },
        );
        Ok(())
    }

    pub fn descriptor(&self, type_name: &str) -> Result<&ModuleTypeDescriptor, ModError> {
        self.types
            .get(type_name)
            .map(|t| &t.descriptor)
            .ok_or_else(|| ModError::UnknownType(type_name.to_string()))
    }

    pub fn generator(&self, type_name: &str) -> Result<&dyn Generator, ModError> {
        self.types
            .get(type_name)
            .map(|t| t.generator.as_ref())
            .ok_or_else(|| ModError::UnknownType(type_name.to_string()))
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.keys().map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Silent;
    impl Generator for Silent {
        fn generate(&self, _: &ModuleInstance) -> Result<GeneratorOutput, ModError> {
            Ok(GeneratorOutput::default())
        }
    }

    fn plain(type_name: &str, lists: Vec<ListSchema>, params: Vec<ParamDef>) -> ModuleTypeDescriptor {
        ModuleTypeDescriptor {
            type_name: type_name.to_string(),
            version: 1,
            lists,
            params,
        }
    }

    #[test]
    fn refs_must_name_another_existing_list() {
        let mut reg = TypeRegistry::new();
        let missing = plain(
            "т1",
            vec![ListSchema::new("а", vec![FieldDef::new("к", FieldKind::reference("нет"))])],
            vec![],
        );
        assert!(matches!(reg.register(missing, Box::new(Silent)), Err(ModError::Schema { .. })));
        let own = plain(
            "т2",
            vec![ListSchema::new("а", vec![FieldDef::new("к", FieldKind::reference("а"))])],
            vec![],
        );
        assert!(matches!(reg.register(own, Box::new(Silent)), Err(ModError::Schema { .. })));
    }

    #[test]
    fn params_are_ref_free_and_defaults_typed() {
        let mut reg = TypeRegistry::new();
        let with_ref = plain(
            "т1",
            vec![ListSchema::new("а", vec![])],
            vec![ParamDef {
                name: "п".to_string(),
                kind: FieldKind::reference("а"),
                default: Value::Ref(0),
                setting: false,
            }],
        );
        assert!(reg.register(with_ref, Box::new(Silent)).is_err());
        let mismatched = plain(
            "т2",
            vec![],
            vec![ParamDef {
                name: "п".to_string(),
                kind: FieldKind::bare_number(),
                default: Value::text("сорок"),
                setting: false,
            }],
        );
        assert!(reg.register(mismatched, Box::new(Silent)).is_err());
    }

    #[test]
    fn type_names_register_once() {
        let mut reg = TypeRegistry::new();
        reg.register(plain("т", vec![], vec![]), Box::new(Silent)).unwrap();
        assert!(matches!(
            reg.register(plain("т", vec![], vec![]), Box::new(Silent)),
            Err(ModError::DuplicateType(_))
        ));
        assert!(reg.descriptor("т").is_ok());
        assert!(matches!(reg.descriptor("нет"), Err(ModError::UnknownType(_))));
    }
}
