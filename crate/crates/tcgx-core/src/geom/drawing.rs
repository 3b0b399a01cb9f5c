//! A sheet of elements guarded by the acceptance rules.

use super::coord::Rect;
use super::element::{Element, ModulePayload, Space};
use super::scale::DrawingScale;
use super::style::StyleTables;
use super::GeomError;
use crate::catalog::UnitRegistry;
use crate::tkd;

/// Elements whose paper footprint falls below this are unprintable and are
/// rejected outright; the bound itself is still printable.
pub const MIN_FOOTPRINT_MM: f64 = 0.3;

/// Natural extent past which precision advice is issued. Never a rejection.
pub const EXTENT_ADVISORY_MM: f64 = 30000.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Advisory {
    /// Natural extent exceeds the advisory bound; far coordinates lose
    /// stored precision.
    ExtentBeyondAdvisory { extent_mm: f64 },
}

impl std::fmt::Display for Advisory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Advisory::ExtentBeyondAdvisory { extent_mm } => write!(
                f,
                "natural extent {extent_mm} mm exceeds {EXTENT_ADVISORY_MM} mm; stored precision degrades"
            ),
        }
    }
}

/// One drawing file: a single sheet with a scale and an element list.
#[derive(Debug, Clone, PartialEq)]
pub struct Drawing {
    pub scale: DrawingScale,
    pub sheet: String,
    elements: Vec<Element>,
}

impl Drawing {
    pub fn new(scale: DrawingScale, sheet: &str) -> Drawing {
        Drawing {
            scale,
            sheet: sheet.to_string(),
            elements: Vec::new(),
        }
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    /// Admits an element or rejects it. Styles must exist; primitives must
    /// have a paper footprint of at least the printable minimum. Rasters and
    /// modules are exempt from the footprint rule, but module payloads must
    /// be internally sound: generated geometry for parametric modules, a
    /// valid document and layout for tables.
    pub fn add_element(&mut self, element: Element) -> Result<usize, GeomError> {
        let styles = StyleTables::standard();
        element.check_styles(styles)?;
        match &element {
            Element::Raster(_) => {}
            Element::Module(payload) => match payload.as_ref() {
                ModulePayload::Parametric(inst) => {
                    if !inst.generated() {
                        return Err(GeomError::Module(
                            "module has no generated geometry".to_string(),
                        ));
                    }
                }
                ModulePayload::Table { tkd: doc, layout, .. } => {
                    let violations = doc.validate(&UnitRegistry::standard());
                    if !violations.is_empty() {
                        let texts: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                        return Err(GeomError::Module(texts.join("; ")));
                    }
                    tkd::placed_prims(doc, layout)
                        .map_err(|e| GeomError::Module(e.to_string()))?;
                }
            },
            _ => {
                let bbox = element
                    .bbox(Space::Paper, &self.scale, styles)?
                    .ok_or_else(|| {
                        GeomError::InvalidGeometry("element has no extent".to_string())
                    })?;
                let footprint = bbox.footprint();
                if footprint < MIN_FOOTPRINT_MM {
                    return Err(GeomError::TooSmall { footprint });
                }
            }
        }
        self.elements.push(element);
        Ok(self.elements.len() - 1)
    }

    /// Union extent of all elements in the requested space.
    pub fn bbox(&self, space: Space) -> Result<Rect, GeomError> {
        let styles = StyleTables::standard();
        let mut acc: Option<Rect> = None;
        for e in &self.elements {
            if let Some(r) = e.bbox(space, &self.scale, styles)? {
                acc = Some(match acc {
                    Some(prev) => prev.union(r),
                    None => r,
                });
            }
        }
        acc.ok_or(GeomError::EmptyExtent)
    }

    /// Non-blocking advice about the drawing as a whole.
    pub fn advisories(&self) -> Vec<Advisory> {
        let mut out = Vec::new();
        if let Ok(r) = self.bbox(Space::Natural) {
            let extent = r.footprint();
            if extent > EXTENT_ADVISORY_MM {
                out.push(Advisory::ExtentBeyondAdvisory { extent_mm: extent });
            }
        }
        out
    }
}
