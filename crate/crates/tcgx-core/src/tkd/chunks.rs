//! Chunked continuation of a table that outgrows its height budget.
//!
//! Rows fill chunks greedily top-down; each following chunk is placed in the
//! continuation direction and starts with the header row or a column-number
//! row. Section titles do not repeat across chunks.

use super::layout::{layout_bands, Band, LaidOut, LayoutSpec, Prim, RepeatBand, RunDirection};
use super::record::{RecordKind, Tkd};
use super::TkdError;

#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub index: usize,
    /// Offset of the chunk's top-left corner from the first chunk's, mm.
    pub offset: (f64, f64),
    /// Record indices of the rows in this chunk, in document order.
    pub records: Vec<usize>,
    pub laid: LaidOut,
}

/// Splits the document into placed chunks of at most `chunk_height`.
pub fn continue_chunks(tkd: &Tkd, spec: &LayoutSpec) -> Result<Vec<Chunk>, TkdError> {
    let chunk_height = spec.chunk_height.ok_or(TkdError::MissingChunkHeight)?;
    if !(chunk_height > 0.0) {
        return Err(TkdError::NonPositive("chunk height"));
    }
    // One slot goes to the leading band (header or number row).
    let slots = (chunk_height / spec.row_height).floor() as i64 - 1;
    if slots < 1 {
        return Err(TkdError::ChunkTooSmall {
            chunk_height,
            row_height: spec.row_height,
        });
    }
    let capacity = slots as usize;

    let body: Vec<usize> = (1..tkd.records.len()).collect();
    let runs: Vec<&[usize]> = if body.is_empty() {
        vec![&[]]
    } else {
        body.chunks(capacity).collect()
    };

    let mut out = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let lead = if i == 0 {
            Band::Header
        } else {
            match spec.repeat {
                RepeatBand::HeaderRow => Band::Header,
                RepeatBand::ColumnNumberRow => Band::NumberRow,
            }
        };
        let mut bands = vec![lead];
        for &r in run.iter() {
            bands.push(match &tkd.records[r].kind {
                RecordKind::SectionHeader(_) => Band::Section(r),
                _ => Band::Data(r),
            });
        }
        let (width, mut prims, warnings) = layout_bands(tkd, spec, &bands)?;
        let dx = match spec.continuation {
            RunDirection::Right => i as f64 * width,
            RunDirection::Left => -(i as f64) * width,
        };
        for prim in &mut prims {
            match prim {
                Prim::Segment { a, b, .. } => {
                    a.0 += dx;
                    b.0 += dx;
                }
                Prim::Text { at, .. } => at.0 += dx,
            }
        }
        out.push(Chunk {
            index: i,
            offset: (dx, 0.0),
            records: run.to_vec(),
            laid: LaidOut { prims, warnings },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tkd::tree::{BlockNode, SplitAxis};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn table(rows: usize) -> Tkd {
        let tree = BlockNode::repeating(BlockNode::split(
            SplitAxis::Vertical,
            vec![BlockNode::leaf("pos", "Поз."), BlockNode::leaf("name", "Имя")],
        ));
        let mut tkd = Tkd::new(tree);
        for i in 0..rows {
            tkd.push_data(vec![format!("{}", i + 1), format!("r{}", i + 1)]);
        }
        tkd
    }

    fn spec(chunk_height: Option<f64>) -> LayoutSpec {
        let mut s = LayoutSpec::new(vec![15.0, 70.0], 8.0);
        s.chunk_height = chunk_height;
        s
    }

    #[test]
    fn ten_rows_at_capacity_four_make_three_chunks() {
        let tkd = table(10);
        // 40 mm holds 5 bands: the leading band plus 4 rows.
        let chunks = continue_chunks(&tkd, &spec(Some(40.0))).unwrap();
        let sizes: Vec<usize> = chunks.iter().map(|c| c.records.len()).collect();
        assert_eq!(sizes, [4, 4, 2]);
        assert_eq!(chunks[1].offset, (85.0, 0.0));
        assert_eq!(chunks[2].offset, (170.0, 0.0));
    }

    #[test]
    fn everything_fits_in_one_chunk() {
        let tkd = table(3);
        let chunks = continue_chunks(&tkd, &spec(Some(100.0))).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks[0].records, [1, 2, 3]);
        assert_eq!(chunks[0].offset, (0.0, 0.0));
    }

    #[test]
    fn too_small_budget_is_rejected() {
        let tkd = table(3);
        assert!(matches!(
            continue_chunks(&tkd, &spec(Some(15.0))),
            Err(TkdError::ChunkTooSmall { .. })
        ));
        assert!(matches!(
            continue_chunks(&tkd, &spec(None)),
            Err(TkdError::MissingChunkHeight)
        ));
    }

    #[test]
    fn repeated_header_row_carries_captions() {
        let tkd = table(6);
        let chunks = continue_chunks(&tkd, &spec(Some(40.0))).unwrap();
        assert_eq!(chunks.len(), 2);
        let captions: Vec<&str> = chunks[1]
            .laid
            .prims
            .iter()
            .filter_map(|p| match p {
                Prim::Text { content, .. } if content == "Поз." || content == "Имя" => {
                    Some(content.as_str())
                }
                _ => None,
            })
            .collect();
        assert_eq!(captions, ["Поз.", "Имя"]);
    }

    #[test]
    fn number_row_labels_columns_with_ordinals() {
        let tkd = table(6);
        let mut s = spec(Some(40.0));
        s.repeat = RepeatBand::ColumnNumberRow;
        let chunks = continue_chunks(&tkd, &s).unwrap();
        let texts: Vec<(String, (f64, f64))> = chunks[1]
            .laid
            .prims
            .iter()
            .filter_map(|p| match p {
                Prim::Text { at, content, .. } => Some((content.clone(), *at)),
                _ => None,
            })
            .collect();
        // Ordinals sit in the leading band of the second chunk.
        assert!(texts.iter().any(|(t, at)| t == "1" && at.1 == 4.0));
        assert!(texts.iter().any(|(t, at)| t == "2" && at.1 == 4.0));
        assert!(!texts.iter().any(|(t, _)| t == "Поз."));
    }

    #[test]
    fn leftward_continuation_mirrors_offsets() {
        let tkd = table(10);
        let mut s = spec(Some(40.0));
        s.continuation = RunDirection::Left;
        let chunks = continue_chunks(&tkd, &s).unwrap();
        assert_eq!(chunks[1].offset, (-85.0, 0.0));
        assert_eq!(chunks[2].offset, (-170.0, 0.0));
    }

    #[test]
    fn chunked_rows_concatenate_to_the_original_order() {
        let mut rng = StdRng::seed_from_u64(0x7B03);
        for _ in 0..50 {
            let rows = rng.gen_range(0..40);
            let mut tkd = table(rows);
            // Sprinkle sections; they take slots like any row.
            if rows > 2 && rng.gen_bool(0.5) {
                tkd.push_section("Раздел");
            }
            let total = tkd.records.len() - 1;
            let bands = rng.gen_range(2..=7);
            let mut s = spec(Some(bands as f64 * 8.0));
            if rng.gen_bool(0.5) {
                s.repeat = RepeatBand::ColumnNumberRow;
            }
            let chunks = continue_chunks(&tkd, &s).unwrap();
            let spliced: Vec<usize> = chunks.iter().flat_map(|c| c.records.clone()).collect();
            let want: Vec<usize> = (1..=total).collect();
            assert_eq!(spliced, want);
            let capacity = bands - 1;
            for (i, chunk) in chunks.iter().enumerate() {
                if i + 1 < chunks.len() {
                    assert_eq!(chunk.records.len(), capacity);
                } else {
                    assert!(chunk.records.len() <= capacity);
                }
            }
        }
    }
}
