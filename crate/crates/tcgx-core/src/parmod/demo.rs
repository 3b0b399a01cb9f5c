//! The built-in module type: a magistral trace over a node list.
//!
//! Parametric state: a list of nodes (polyline vertices in natural space), a
//! list of labels pinned to nodes, and general parameters for the mark code,
//! mark interval, first mark offset, and line type. Regeneration emits the
//! marked main line, one text per label, one specifying record carrying the
//! trace length, and the node points as snap points.

use super::descriptor::{
    FieldDef, FieldKind, Generator, GeneratorOutput, ListSchema, ModuleTypeDescriptor, ParamDef,
    TypeRegistry, Value,
};
use super::instance::ModuleInstance;
use super::ModError;
use crate::geom::{
    Element, FontHeightId, LineTypeId, Magistral, Space, StoredPoint, TextAngleId,
};
use crate::spec::{Property, SpecRecord};

pub const TRACE_TYPE: &str = "Магистральная трасса";

pub fn trace_descriptor() -> ModuleTypeDescriptor {
    ModuleTypeDescriptor {
        type_name: TRACE_TYPE.to_string(),
        version: 1,
        lists: vec![
            ListSchema::new("узлы", vec![FieldDef::new("точка", FieldKind::Point)]),
            ListSchema::new(
                "надписи",
                vec![
                    FieldDef::new("текст", FieldKind::Text),
                    FieldDef::new("узел", FieldKind::reference("узлы")),
                ],
            ),
        ],
        params: vec![
            ParamDef {
                name: "код".to_string(),
                kind: FieldKind::Text,
                default: Value::text("В1"),
                setting: false,
            },
            ParamDef {
                name: "интервал".to_string(),
                kind: FieldKind::number("мм"),
                default: Value::Number(40.0),
                setting: true,
            },
            ParamDef {
                name: "отступ".to_string(),
                kind: FieldKind::number("мм"),
                default: Value::Number(20.0),
                setting: true,
            },
            ParamDef {
                name: "линия".to_string(),
                kind: FieldKind::LineType,
                default: Value::Line(LineTypeId(0)),
                setting: true,
            },
        ],
    }
}

pub struct TraceGenerator;

impl TraceGenerator {
    fn fault(msg: String) -> ModError {
        ModError::Generator {
            type_name: TRACE_TYPE.to_string(),
            msg,
        }
    }
}

impl Generator for TraceGenerator {
    fn generate(&self, instance: &ModuleInstance) -> Result<GeneratorOutput, ModError> {
        let nodes = instance.list("узлы")?;
        let mut path: Vec<StoredPoint> = Vec::with_capacity(nodes.len());
        for obj in nodes.objects() {
            let Value::Point(p) = obj[0] else {
                return Err(Self::fault("список \"узлы\": поле 0 не точка".to_string()));
            };
            path.push(p);
        }
        if path.len() < 2 {
            return Err(Self::fault(format!(
                "список \"узлы\": трассе нужно не меньше двух узлов, есть {}",
                path.len()
            )));
        }
        let Value::Text(code) = instance.param("код")? else {
            return Err(Self::fault("параметр \"код\" не текст".to_string()));
        };
        let Value::Number(interval) = *instance.param("интервал")? else {
            return Err(Self::fault("параметр \"интервал\" не число".to_string()));
        };
        let Value::Number(offset) = *instance.param("отступ")? else {
            return Err(Self::fault("параметр \"отступ\" не число".to_string()));
        };
        let Value::Line(line) = *instance.param("линия")? else {
            return Err(Self::fault("параметр \"линия\" не тип линии".to_string()));
        };

        let main = Magistral::new(path.clone(), code, interval, offset, line, Space::Natural)
            .map_err(|e| Self::fault(e.to_string()))?;
        let length = main.length();
        let mut geometry = vec![Element::Magistral(main)];

        for (i, obj) in instance.list("надписи")?.objects().iter().enumerate() {
            let (Value::Text(text), Value::Ref(node)) = (&obj[0], &obj[1]) else {
                return Err(Self::fault(format!("список \"надписи\": объект {i} испорчен")));
            };
            geometry.push(Element::Text {
                at: path[*node],
                content: text.clone(),
                font: FontHeightId(1),
                angle: TextAngleId(0),
                space: Space::Natural,
            });
        }

        let mut record = SpecRecord::new(1.0)
            .with("наименование", Property::text(&format!("Трасса {code}")))
            .with("код", Property::text(code))
            .with("длина", Property::number(length, "мм"));
        record.source.module_type = TRACE_TYPE.to_string();

        Ok(GeneratorOutput {
            geometry,
            records: vec![record],
            snaps: path.iter().map(|p| p.work()).collect(),
        })
    }
}

/// The registry every session starts from.
pub fn builtin_registry() -> TypeRegistry {
    let mut reg = TypeRegistry::new();
    reg.register(trace_descriptor(), Box::new(TraceGenerator))
        .expect("built-in types are sound");
    reg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::magistral_marks;

    fn two_node_trace(reg: &TypeRegistry) -> ModuleInstance {
        let mut m = ModuleInstance::new(reg, TRACE_TYPE).unwrap();
        m.add_object("узлы", vec![Value::point(0.0, 0.0).unwrap()]).unwrap();
        m.add_object("узлы", vec![Value::point(100.0, 0.0).unwrap()]).unwrap();
        m
    }

    #[test]
    fn two_nodes_make_a_marked_line_and_one_record() {
        let reg = builtin_registry();
        let mut m = two_node_trace(&reg);
        m.regenerate(&reg).unwrap();

        assert_eq!(m.geometry().len(), 1);
        let Element::Magistral(main) = &m.geometry()[0] else {
            panic!("expected the main line first");
        };
        let marks = magistral_marks(main).unwrap();
        let xs: Vec<f64> = marks.iter().map(|(p, _)| p.x).collect();
        assert_eq!(xs, vec![20.0, 60.0]);
        assert!(marks.iter().all(|(_, code)| code == "В1"));

        assert_eq!(m.spec_records().len(), 1);
        let record = &m.spec_records()[0];
        assert_eq!(record.quantity, 1.0);
        assert_eq!(record.properties["длина"], Property::number(100.0, "мм"));
        assert_eq!(record.source.module_type, TRACE_TYPE);

        let snaps: Vec<(f64, f64)> = m.snap_points().iter().map(|p| (p.x, p.y)).collect();
        assert_eq!(snaps, vec![(0.0, 0.0), (100.0, 0.0)]);
    }

    #[test]
    fn labels_land_on_their_nodes() {
        let reg = builtin_registry();
        let mut m = two_node_trace(&reg);
        m.add_object("надписи", vec![Value::text("В1 ввод"), Value::Ref(1)]).unwrap();
        m.regenerate(&reg).unwrap();
        assert_eq!(m.geometry().len(), 2);
        let Element::Text { at, content, .. } = &m.geometry()[1] else {
            panic!("expected the label");
        };
        assert_eq!(content, "В1 ввод");
        assert_eq!(at.work().x, 100.0);
    }

    #[test]
    fn regeneration_is_pure() {
        let reg = builtin_registry();
        let mut m = two_node_trace(&reg);
        m.regenerate(&reg).unwrap();
        let first = m.clone();
        m.regenerate(&reg).unwrap();
        assert_eq!(m, first);
    }

    #[test]
    fn translation_shifts_every_cached_vertex() {
        let reg = builtin_registry();
        let mut m = two_node_trace(&reg);
        m.add_object("надписи", vec![Value::text("т"), Value::Ref(0)]).unwrap();
        m.regenerate(&reg).unwrap();
        m.translate(10.0, -2.5, &reg).unwrap();
        assert!(m.generated());
        let Element::Magistral(main) = &m.geometry()[0] else {
            panic!("expected the main line");
        };
        let ends: Vec<(f64, f64)> = main.path.iter().map(|p| (p.work().x, p.work().y)).collect();
        assert_eq!(ends, vec![(10.0, -2.5), (110.0, -2.5)]);
        let Element::Text { at, .. } = &m.geometry()[1] else {
            panic!("expected the label");
        };
        assert_eq!((at.work().x, at.work().y), (10.0, -2.5));
        assert_eq!(m.snap_points()[1].x, 110.0);
    }

    #[test]
    fn lone_node_fails_with_list_context() {
        let reg = builtin_registry();
        let mut m = ModuleInstance::new(&reg, TRACE_TYPE).unwrap();
        m.add_object("узлы", vec![Value::point(0.0, 0.0).unwrap()]).unwrap();
        let err = m.regenerate(&reg);
        match err {
            Err(ModError::Generator { type_name, msg }) => {
                assert_eq!(type_name, TRACE_TYPE);
                assert!(msg.contains("узлы"), "{msg}");
            }
            other => panic!("expected a generator fault, got {other:?}"),
        }
        assert!(!m.generated());
    }
}
