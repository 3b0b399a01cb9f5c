//! Restricted style tables.
//!
//! Line types, font heights, arrow and serif sizes, and text angles come from
//! fixed enumerations; element styles hold indices into these tables and
//! free-form values are rejected at element creation. The concrete dash
//! patterns and the arrow/serif series are documented placeholders for the
//! standard sets.

use super::GeomError;

/// Estimated glyph advance as a fraction of font height, used for text
/// overflow checks. A width model, not a renderer.
pub const TEXT_ADVANCE_RATIO: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LineTypeId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FontHeightId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct TextAngleId(pub u8);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineTypeDef {
    pub name: &'static str,
    /// Stroke width on paper, mm.
    pub width: f64,
    /// Dash pattern on paper, mm; empty means solid.
    pub dash: &'static [f64],
}

/// The fixed style enumerations shared by drawings and table documents.
#[derive(Debug)]
pub struct StyleTables {
    pub line_types: &'static [LineTypeDef],
    /// Drafting font heights, mm.
    pub font_heights: &'static [f64],
    /// Dimension arrow lengths, mm.
    pub arrow_sizes: &'static [f64],
    /// Serif tick lengths, mm.
    pub serif_sizes: &'static [f64],
    /// Allowed text rotations, degrees; the 75-degree slant is a separate flag.
    pub text_angles: &'static [u16],
}

const LINE_TYPES: &[LineTypeDef] = &[
    LineTypeDef {
        name: "сплошная основная",
        width: 0.5,
        dash: &[],
    },
    LineTypeDef {
        name: "сплошная тонкая",
        width: 0.25,
        dash: &[],
    },
    LineTypeDef {
        name: "штриховая",
        width: 0.25,
        dash: &[4.0, 1.5],
    },
    LineTypeDef {
        name: "штрихпунктирная тонкая",
        width: 0.25,
        dash: &[12.0, 2.0, 1.5, 2.0],
    },
    LineTypeDef {
        name: "штрихпунктирная утолщенная",
        width: 0.5,
        dash: &[12.0, 2.0, 1.5, 2.0],
    },
    LineTypeDef {
        name: "штрихпунктирная с двумя точками",
        width: 0.25,
        dash: &[12.0, 2.0, 1.5, 2.0, 1.5, 2.0],
    },
];

const STANDARD: StyleTables = StyleTables {
    line_types: LINE_TYPES,
    font_heights: &[2.5, 3.5, 5.0, 7.0, 10.0, 14.0, 20.0],
    arrow_sizes: &[2.5, 3.5, 5.0],
    serif_sizes: &[1.0, 2.0],
    text_angles: &[0, 90, 270],
};

impl StyleTables {
    pub fn standard() -> &'static StyleTables {
        &STANDARD
    }

    pub fn line_type(&self, id: LineTypeId) -> Result<&LineTypeDef, GeomError> {
        self.line_types.get(id.0 as usize).ok_or(GeomError::InvalidStyle {
            what: "line type",
            id: id.0,
        })
    }

    pub fn font_height(&self, id: FontHeightId) -> Result<f64, GeomError> {
        self.font_heights
            .get(id.0 as usize)
            .copied()
            .ok_or(GeomError::InvalidStyle {
                what: "font height",
                id: id.0,
            })
    }

    pub fn text_angle(&self, id: TextAngleId) -> Result<u16, GeomError> {
        self.text_angles
            .get(id.0 as usize)
            .copied()
            .ok_or(GeomError::InvalidStyle {
                what: "text angle",
                id: id.0,
            })
    }
}
