//! Specifying properties harvested from modules.

use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub enum PropValue {
    Number(f64),
    Text(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Property {
    pub value: PropValue,
    pub unit: Option<String>,
}

impl Property {
    pub fn number(v: f64, unit: &str) -> Property {
        Property {
            value: PropValue::Number(v),
            unit: Some(unit.to_string()),
        }
    }

    pub fn bare_number(v: f64) -> Property {
        Property {
            value: PropValue::Number(v),
            unit: None,
        }
    }

    pub fn text(s: &str) -> Property {
        Property {
            value: PropValue::Text(s.to_string()),
            unit: None,
        }
    }
}

/// Where a record came from; stamped by the collector.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Source {
    pub file: String,
    /// Element index within its drawing.
    pub module_id: usize,
    pub module_type: String,
}

/// One invisible specifying record carried by a module.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecRecord {
    pub properties: BTreeMap<String, Property>,
    pub quantity: f64,
    pub source: Source,
}

impl SpecRecord {
    pub fn new(quantity: f64) -> SpecRecord {
        SpecRecord {
            properties: BTreeMap::new(),
            quantity,
            source: Source::default(),
        }
    }

    pub fn with(mut self, key: &str, prop: Property) -> SpecRecord {
        self.properties.insert(key.to_string(), prop);
        self
    }

    /// Structural problems, if any: non-finite or negative quantity, empty
    /// property keys, non-finite numeric values.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if !self.quantity.is_finite() || self.quantity < 0.0 {
            out.push(format!("quantity {} is not a finite non-negative number", self.quantity));
        }
        for (key, prop) in &self.properties {
            if key.is_empty() {
                out.push("empty property key".to_string());
            }
            if let PropValue::Number(v) = prop.value {
                if !v.is_finite() {
                    out.push(format!("property {key:?} is not finite"));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn problems_flag_bad_quantity_and_values() {
        let good = SpecRecord::new(2.0).with("имя", Property::text("Труба"));
        assert!(good.problems().is_empty());
        let bad = SpecRecord::new(-1.0).with("p", Property::bare_number(f64::NAN));
        let problems = bad.problems();
        assert_eq!(problems.len(), 2);
    }
}
