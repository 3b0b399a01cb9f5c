//! The built-in specification blank.
//!
//! Four columns: item name, designation code, length in millimeters and
//! quantity. Collected records land here when no custom blank is given.

use crate::tkd::{BlockNode, LayoutSpec, LeafCell, SplitAxis, Tkd};

fn leaf(key: &str, header: &str, unit: Option<&str>) -> BlockNode {
    BlockNode::Leaf(LeafCell {
        column_key: key.to_string(),
        header_text: header.to_string(),
        unit: unit.map(str::to_string),
        enk_keyword: None,
    })
}

/// A fresh blank and the layout it prints with.
pub fn standard_blank() -> (Tkd, LayoutSpec) {
    let tree = BlockNode::split(
        SplitAxis::Vertical,
        vec![
            leaf("наименование", "Наименование", None),
            leaf("код", "Код", None),
            leaf("длина", "Длина, мм", Some("мм")),
            leaf("qty", "Кол.", None),
        ],
    );
    let tkd = Tkd::new(tree);
    let layout = LayoutSpec::new(vec![110.0, 30.0, 25.0, 15.0], 8.0);
    (tkd, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::UnitRegistry;

    #[test]
    fn blank_is_valid_and_empty() {
        let (tkd, layout) = standard_blank();
        assert!(tkd.validate(&UnitRegistry::standard()).is_empty());
        assert_eq!(tkd.records.len(), 1);
        assert_eq!(layout.widths.len(), tkd.leaf_count());
    }
}
