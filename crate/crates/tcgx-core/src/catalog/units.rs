//! Measurement units and conversion.
//!
//! Every unit belongs to one quantity and maps to that quantity's base unit
//! affinely: base = value * factor + offset. Conversion between units of one
//! quantity goes through the base, so adding a unit is one registration and
//! conversion is defined for every pair automatically.

use std::collections::BTreeMap;

use super::CatalogError;

#[derive(Debug, Clone, PartialEq)]
pub struct Unit {
    pub name: String,
    pub quantity: String,
    /// Base units per this unit.
    pub factor: f64,
    /// Offset in base units; zero for all ratio scales.
    pub offset: f64,
}

#[derive(Debug, Clone)]
pub struct UnitRegistry {
    units: Vec<Unit>,
    // Name or alias -> index into `units`.
    by_name: BTreeMap<String, usize>,
}

impl UnitRegistry {
    pub fn empty() -> Self {
        UnitRegistry {
            units: Vec::new(),
            by_name: BTreeMap::new(),
        }
    }

    /// The units every catalog may rely on. Pressure is based in MPa,
    /// length in mm, temperature in K, mass in kg, count in pieces.
    pub fn standard() -> Self {
        let mut r = UnitRegistry::empty();
        r.register("MPa", "pressure", 1.0, 0.0, &["МПа"]);
        r.register("kPa", "pressure", 1e-3, 0.0, &["кПа"]);
        r.register("Pa", "pressure", 1e-6, 0.0, &["Па"]);
        r.register("bar", "pressure", 0.1, 0.0, &["бар"]);
        r.register("atm", "pressure", 0.101325, 0.0, &["атм"]);
        // Technical atmosphere: 1 kgf/cm2 = 0.0980665 MPa by definition.
        r.register("kgf/cm2", "pressure", 0.0980665, 0.0, &["кгс/см2", "kgf/cm²", "кгс/см²"]);
        r.register("mH2O", "pressure", 0.00980665, 0.0, &["м вод.ст."]);
        r.register("mmHg", "pressure", 101325.0 / 760.0 * 1e-6, 0.0, &["мм рт.ст."]);
        r.register("mm", "length", 1.0, 0.0, &["мм"]);
        r.register("cm", "length", 10.0, 0.0, &["см"]);
        r.register("m", "length", 1000.0, 0.0, &["м"]);
        r.register("km", "length", 1e6, 0.0, &["км"]);
        r.register("in", "length", 25.4, 0.0, &["дюйм"]);
        r.register("K", "temperature", 1.0, 0.0, &["К"]);
        r.register("C", "temperature", 1.0, 273.15, &["°C", "гр.C"]);
        r.register("F", "temperature", 5.0 / 9.0, 459.67 * 5.0 / 9.0, &["°F"]);
        r.register("kg", "mass", 1.0, 0.0, &["кг"]);
        r.register("g", "mass", 1e-3, 0.0, &["г"]);
        r.register("t", "mass", 1e3, 0.0, &["т"]);
        r.register("pcs", "count", 1.0, 0.0, &["шт", "шт."]);
        r
    }

    /// Registers a unit under its canonical name plus aliases.
    /// Later registrations shadow earlier ones by name.
    pub fn register(&mut self, name: &str, quantity: &str, factor: f64, offset: f64, aliases: &[&str]) {
        let idx = self.units.len();
        self.units.push(Unit {
            name: name.to_string(),
            quantity: quantity.to_string(),
            factor,
            offset,
        });
        self.by_name.insert(name.to_string(), idx);
        for a in aliases {
            self.by_name.insert((*a).to_string(), idx);
        }
    }

    pub fn get(&self, name: &str) -> Result<&Unit, CatalogError> {
        self.by_name
            .get(name)
            .map(|&i| &self.units[i])
            .ok_or_else(|| CatalogError::UnknownUnit(name.to_string()))
    }

    pub fn to_base(&self, value: f64, unit: &str) -> Result<f64, CatalogError> {
        let u = self.get(unit)?;
        Ok(value * u.factor + u.offset)
    }

    pub fn convert(&self, value: f64, from: &str, to: &str) -> Result<f64, CatalogError> {
        convert(self, value, from, to)
    }
}

pub fn convert(reg: &UnitRegistry, value: f64, from: &str, to: &str) -> Result<f64, CatalogError> {
    let uf = reg.get(from)?;
    let ut = reg.get(to)?;
    if uf.quantity != ut.quantity {
        return Err(CatalogError::QuantityMismatch {
            from: uf.name.clone(),
            to: ut.name.clone(),
        });
    }
    Ok(((value * uf.factor + uf.offset) - ut.offset) / ut.factor)
}

/// One ulp at the magnitude a round trip from -> to -> from actually works
/// at, expressed in the source unit. For ratio units this is the ulp of `v`
/// itself; when an offset is in play it dominates near zero and bounds the
/// achievable absolute error, e.g. 0.016 K passes through -273.134 C.
pub fn round_trip_ulp(reg: &UnitRegistry, v: f64, from: &str, to: &str) -> f64 {
    let uf = reg.get(from).expect("registered unit");
    let ut = reg.get(to).expect("registered unit");
    let base = v * uf.factor + uf.offset;
    let magnitude = base.abs().max(uf.offset.abs()).max(ut.offset.abs());
    let scale = (magnitude / uf.factor).max(v.abs());
    crate::geom::f64_ulp_at(scale)
}
