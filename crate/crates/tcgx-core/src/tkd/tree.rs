//! The block-split tree.
//!
//! A table region splits along one axis into a fixed number of parts or, on
//! the record-growth axis only, into an arbitrary number of identical bands.
//! Horizontal splits stack children top to bottom, vertical splits place them
//! left to right, and the leaves carry the column cells.

/// Direction of the cut lines a split introduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitAxis {
    /// Cuts are vertical lines; children sit side by side.
    Vertical,
    /// Cuts are horizontal lines; children stack top to bottom.
    Horizontal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parts {
    /// As many parts as there are children; at least two.
    Fixed,
    /// One template child repeated per record. Root only, horizontal only.
    Arbitrary,
}

/// One table cell of the record band.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeafCell {
    /// Key the cell is addressed by; unique within the tree.
    pub column_key: String,
    /// Caption drawn in the header band.
    pub header_text: String,
    /// Measurement unit of numeric values in this column, if any.
    pub unit: Option<String>,
    /// Keyword for nomenclature-catalog lookups, if any.
    pub enk_keyword: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockNode {
    Leaf(LeafCell),
    Split {
        axis: SplitAxis,
        parts: Parts,
        visible_in_header: bool,
        visible_in_data: bool,
        children: Vec<BlockNode>,
    },
}

impl BlockNode {
    /// Fixed split with cut lines visible everywhere.
    pub fn split(axis: SplitAxis, children: Vec<BlockNode>) -> BlockNode {
        BlockNode::Split {
            axis,
            parts: Parts::Fixed,
            visible_in_header: true,
            visible_in_data: true,
            children,
        }
    }

    /// Root node that repeats `template` once per record band.
    pub fn repeating(template: BlockNode) -> BlockNode {
        BlockNode::Split {
            axis: SplitAxis::Horizontal,
            parts: Parts::Arbitrary,
            visible_in_header: true,
            visible_in_data: true,
            children: vec![template],
        }
    }

    pub fn leaf(key: &str, header: &str) -> BlockNode {
        BlockNode::Leaf(LeafCell {
            column_key: key.to_string(),
            header_text: header.to_string(),
            unit: None,
            enk_keyword: None,
        })
    }

    /// The band template: the single child of a repeating root, or the node
    /// itself when the tree has no repeating root.
    pub fn template(&self) -> &BlockNode {
        match self {
            BlockNode::Split {
                parts: Parts::Arbitrary,
                children,
                ..
            } if children.len() == 1 => &children[0],
            other => other,
        }
    }

    /// Leaf cells in drawing order: depth first, left to right within
    /// vertical splits, top to bottom within horizontal ones.
    pub fn leaf_cells(&self) -> Vec<&LeafCell> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a LeafCell>) {
        match self {
            BlockNode::Leaf(cell) => out.push(cell),
            BlockNode::Split { children, .. } => {
                for child in children {
                    child.collect_leaves(out);
                }
            }
        }
    }
}
