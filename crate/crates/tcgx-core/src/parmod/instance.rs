//! Module instances: relational object lists with guarded mutation.

use std::collections::{BTreeMap, BTreeSet};

use super::descriptor::{
    FieldKind, GeneratorOutput, ListSchema, ModuleTypeDescriptor, TypeRegistry, Value,
};
use super::{DanglingRef, ModError};
use crate::geom::{Element, Point, StyleTables};
use crate::spec::SpecRecord;

/// What to do when the object being removed is still referenced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovePolicy {
    Reject,
    Cascade,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectList {
    pub name: String,
    objects: Vec<Vec<Value>>,
}

impl ObjectList {
    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[Vec<Value>] {
        &self.objects
    }
}

/// One parametric module. All mutation goes through the guarded methods, so
/// a reference can only dangle if state was injected from outside (loading);
/// loaders must run `validate_integrity` before trusting an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleInstance {
    descriptor: ModuleTypeDescriptor,
    lists: Vec<ObjectList>,
    params: BTreeMap<String, Value>,
    cache: Option<GeneratorOutput>,
}

impl ModuleInstance {
    pub fn new(registry: &TypeRegistry, type_name: &str) -> Result<ModuleInstance, ModError> {
        let descriptor = registry.descriptor(type_name)?.clone();
        let lists = descriptor
            .lists
            .iter()
            .map(|schema| ObjectList {
                name: schema.name.clone(),
                objects: Vec::new(),
            })
            .collect();
        let params = descriptor
            .params
            .iter()
            .map(|p| (p.name.clone(), p.default.clone()))
            .collect();
        Ok(ModuleInstance {
            descriptor,
            lists,
            params,
            cache: None,
        })
    }

    pub fn type_name(&self) -> &str {
        &self.descriptor.type_name
    }

    pub fn descriptor(&self) -> &ModuleTypeDescriptor {
        &self.descriptor
    }

    pub fn lists(&self) -> &[ObjectList] {
        &self.lists
    }

    pub fn list(&self, name: &str) -> Result<&ObjectList, ModError> {
        let (i, _) = self.list_schema(name)?;
        Ok(&self.lists[i])
    }

    pub fn params(&self) -> &BTreeMap<String, Value> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Result<&Value, ModError> {
        self.params.get(name).ok_or_else(|| ModError::NoSuchField {
            list: "параметры".to_string(),
            field: name.to_string(),
        })
    }

    fn list_schema(&self, name: &str) -> Result<(usize, &ListSchema), ModError> {
        self.descriptor
            .list(name)
            .ok_or_else(|| ModError::NoSuchList {
                type_name: self.descriptor.type_name.clone(),
                list: name.to_string(),
            })
    }

    fn check_value(
        &self,
        list: &str,
        field: &str,
        kind: &FieldKind,
        value: &Value,
    ) -> Result<(), ModError> {
        if !value.matches(kind) {
            return Err(ModError::KindMismatch {
                list: list.to_string(),
                field: field.to_string(),
                want: kind.name(),
                got: value.kind_name(),
            });
        }
        match (kind, value) {
            (FieldKind::Ref { list: target }, Value::Ref(idx)) => {
                let len = self.list(target)?.len();
                if *idx >= len {
                    return Err(ModError::BadRef {
                        list: list.to_string(),
                        field: field.to_string(),
                        target: target.clone(),
                        index: *idx,
                        len,
                    });
                }
            }
            (FieldKind::LineType, Value::Line(id)) => {
                StyleTables::standard().line_type(*id)?;
            }
            (FieldKind::Number { .. }, Value::Number(v)) => {
                if !v.is_finite() {
                    return Err(ModError::Schema {
                        type_name: self.descriptor.type_name.clone(),
                        msg: format!("field {field:?} of list {list:?} is not finite"),
                    });
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Appends an object; values come in schema field order.
    pub fn add_object(&mut self, list: &str, values: Vec<Value>) -> Result<usize, ModError> {
        let (i, schema) = self.list_schema(list)?;
        if values.len() != schema.fields.len() {
            return Err(ModError::Schema {
                type_name: self.descriptor.type_name.clone(),
                msg: format!(
                    "list {:?} takes {} fields, got {}",
                    list,
                    schema.fields.len(),
                    values.len()
                ),
            });
        }
        for (f, v) in schema.fields.iter().zip(&values) {
            self.check_value(list, &f.name, &f.kind, v)?;
        }
        self.cache = None;
        self.lists[i].objects.push(values);
        Ok(self.lists[i].objects.len() - 1)
    }

    pub fn set_field(
        &mut self,
        list: &str,
        index: usize,
        field: &str,
        value: Value,
    ) -> Result<(), ModError> {
        let (i, schema) = self.list_schema(list)?;
        let (fi, def) = schema.field(field).ok_or_else(|| ModError::NoSuchField {
            list: list.to_string(),
            field: field.to_string(),
        })?;
        if index >= self.lists[i].objects.len() {
            return Err(ModError::NoSuchObject {
                list: list.to_string(),
                index,
            });
        }
        self.check_value(list, field, &def.kind, &value)?;
        self.cache = None;
        self.lists[i].objects[index][fi] = value;
        Ok(())
    }

    pub fn set_param(&mut self, name: &str, value: Value) -> Result<(), ModError> {
        let def = self
            .descriptor
            .param(name)
            .ok_or_else(|| ModError::NoSuchField {
                list: "параметры".to_string(),
                field: name.to_string(),
            })?
            .clone();
        self.check_value("параметры", name, &def.kind, &value)?;
        self.cache = None;
        self.params.insert(name.to_string(), value);
        Ok(())
    }

    /// Injects a raw object while loading; callers must follow with
    /// `validate_integrity`. Does not invalidate the cache.
    pub(crate) fn push_object_unchecked(&mut self, list_index: usize, values: Vec<Value>) {
        self.lists[list_index].objects.push(values);
    }

    pub(crate) fn set_param_unchecked(&mut self, name: &str, value: Value) {
        self.params.insert(name.to_string(), value);
    }

    /// Every reference site in the instance: (list index, object index,
    /// field index, target list name, target object index).
    fn ref_sites(&self) -> Vec<(usize, usize, usize, &str, usize)> {
        let mut out = Vec::new();
        for (li, schema) in self.descriptor.lists.iter().enumerate() {
            for (fi, def) in schema.fields.iter().enumerate() {
                let FieldKind::Ref { list: target } = &def.kind else {
                    continue;
                };
                for (oi, obj) in self.lists[li].objects.iter().enumerate() {
                    if let Value::Ref(idx) = obj[fi] {
                        out.push((li, oi, fi, target.as_str(), idx));
                    }
                }
            }
        }
        out
    }

    /// Brute-force scan for dangling references.
    pub fn validate_integrity(&self) -> Vec<DanglingRef> {
        let mut out = Vec::new();
        for (li, oi, fi, target, idx) in self.ref_sites() {
            let target_len = self
                .descriptor
                .list(target)
                .map(|(ti, _)| self.lists[ti].len())
                .unwrap_or(0);
            if idx >= target_len {
                out.push(DanglingRef {
                    list: self.lists[li].name.clone(),
                    index: oi,
                    field: self.descriptor.lists[li].fields[fi].name.clone(),
                    target_list: target.to_string(),
                    target_index: idx,
                });
            }
        }
        out
    }

    /// Removes an object. Under `Reject` the removal fails while anything
    /// still references the object. Under `Cascade` every transitive
    /// referencer is removed too, surviving indices are compacted, and all
    /// references are re-pointed. Returns the removed objects as
    /// (list, original index), outermost first.
    pub fn remove_object(
        &mut self,
        list: &str,
        index: usize,
        policy: RemovePolicy,
    ) -> Result<Vec<(String, usize)>, ModError> {
        let (li, _) = self.list_schema(list)?;
        if index >= self.lists[li].objects.len() {
            return Err(ModError::NoSuchObject {
                list: list.to_string(),
                index,
            });
        }

        if policy == RemovePolicy::Reject {
            let by: Vec<(String, usize)> = self
                .ref_sites()
                .into_iter()
                .filter(|&(_, _, _, target, idx)| target == list && idx == index)
                .map(|(rli, oi, _, _, _)| (self.lists[rli].name.clone(), oi))
                .collect();
            if !by.is_empty() {
                return Err(ModError::StillReferenced {
                    list: list.to_string(),
                    index,
                    by,
                });
            }
            self.cache = None;
            self.lists[li].objects.remove(index);
            self.repoint_after_removal(&BTreeMap::from([(li, BTreeSet::from([index]))]));
            return Ok(vec![(list.to_string(), index)]);
        }

        // Transitive closure of referencers over the reverse reference graph.
        let mut doomed: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        doomed.entry(li).or_default().insert(index);
        let mut work = vec![(li, index)];
        while let Some((tli, tidx)) = work.pop() {
            let target_name = self.lists[tli].name.clone();
            for (rli, oi, _, target, idx) in self.ref_sites() {
                if target == target_name && idx == tidx && !doomed.entry(rli).or_default().contains(&oi) {
                    doomed.entry(rli).or_default().insert(oi);
                    work.push((rli, oi));
                }
            }
        }

        let mut removed = Vec::new();
        for (&rli, indices) in &doomed {
            for &oi in indices {
                removed.push((self.lists[rli].name.clone(), oi));
            }
        }
        self.cache = None;
        for (&rli, indices) in &doomed {
            self.lists[rli].objects = std::mem::take(&mut self.lists[rli].objects)
                .into_iter()
                .enumerate()
                .filter(|(oi, _)| !indices.contains(oi))
                .map(|(_, obj)| obj)
                .collect();
        }
        self.repoint_after_removal(&doomed);
        Ok(removed)
    }

    /// Rewrites every Ref for the new compacted indices of its target list.
    /// All refs to removed objects are gone by now: their holders were
    /// removed (Cascade) or proven absent (Reject).
    fn repoint_after_removal(&mut self, removed: &BTreeMap<usize, BTreeSet<usize>>) {
        let remap: BTreeMap<usize, Vec<usize>> = removed
            .iter()
            .map(|(&tli, gone)| {
                // old index -> how many removed indices precede it
                let len = self.lists[tli].len() + gone.len();
                let mut shift = vec![0usize; len];
                let mut below = 0usize;
                for (old, s) in shift.iter_mut().enumerate() {
                    *s = below;
                    if gone.contains(&old) {
                        below += 1;
                    }
                }
                (tli, shift)
            })
            .collect();
        for (li, schema) in self.descriptor.lists.iter().enumerate() {
            for (fi, def) in schema.fields.iter().enumerate() {
                let FieldKind::Ref { list: target } = &def.kind else {
                    continue;
                };
                let Some((tli, _)) = self.descriptor.list(target) else {
                    continue;
                };
                let Some(shift) = remap.get(&tli) else {
                    continue;
                };
                for obj in &mut self.lists[li].objects {
                    if let Value::Ref(idx) = &mut obj[fi] {
                        *idx -= shift[*idx];
                    }
                }
            }
        }
    }

    /// Applies the registered generator to the current state. Fails without
    /// touching the cache when integrity is broken or the generator faults.
    pub fn regenerate(&mut self, registry: &TypeRegistry) -> Result<(), ModError> {
        let dangling = self.validate_integrity();
        if !dangling.is_empty() {
            return Err(ModError::Integrity(dangling));
        }
        let output = registry
            .generator(self.type_name())?
            .generate(self)?;
        self.cache = Some(output);
        Ok(())
    }

    pub fn generated(&self) -> bool {
        self.cache.is_some()
    }

    pub fn geometry(&self) -> &[Element] {
        self.cache.as_ref().map(|c| c.geometry.as_slice()).unwrap_or(&[])
    }

    pub fn spec_records(&self) -> &[SpecRecord] {
        self.cache.as_ref().map(|c| c.records.as_slice()).unwrap_or(&[])
    }

    pub fn snap_points(&self) -> &[Point] {
        self.cache.as_ref().map(|c| c.snaps.as_slice()).unwrap_or(&[])
    }

    /// Shifts every Point field and Point parameter, then regenerates if
    /// geometry was cached.
    pub fn translate(
        &mut self,
        dx: f64,
        dy: f64,
        registry: &TypeRegistry,
    ) -> Result<(), ModError> {
        let had_cache = self.cache.is_some();
        for (li, schema) in self.descriptor.lists.iter().enumerate() {
            for (fi, def) in schema.fields.iter().enumerate() {
                if def.kind != FieldKind::Point {
                    continue;
                }
                for obj in &mut self.lists[li].objects {
                    if let Value::Point(p) = &obj[fi] {
                        let moved = crate::geom::StoredPoint::new(
                            p.work().x + dx,
                            p.work().y + dy,
                        )?;
                        obj[fi] = Value::Point(moved);
                    }
                }
            }
        }
        let moved_params: Vec<(String, Value)> = self
            .params
            .iter()
            .filter_map(|(name, v)| match v {
                Value::Point(p) => Some((
                    name.clone(),
                    crate::geom::StoredPoint::new(p.work().x + dx, p.work().y + dy)
                        .map(Value::Point),
                )),
                _ => None,
            })
            .map(|(name, r)| r.map(|v| (name, v)))
            .collect::<Result<_, _>>()?;
        for (name, v) in moved_params {
            self.params.insert(name, v);
        }
        self.cache = None;
        if had_cache {
            self.regenerate(registry)?;
        }
        Ok(())
    }
}
