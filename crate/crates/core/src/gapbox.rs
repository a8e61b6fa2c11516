//! Gap-box construction: the dyadic boxes adjacent to the data but free of it.
//!
//! The construction collects every dyadic box containing a tuple, flips the
//! last bit of each non-empty prefix of those boxes, and keeps the flipped
//! boxes that contain no tuple. The result covers every maximal dyadic gap
//! box, so its union is exactly the tuple-free part of the lattice.

use std::collections::HashSet;

use crate::dyadic::{enumerate_containing, DyadicBox};
use crate::geom::Point;
use crate::ingest::Relation;

/// Gap boxes of one relation, sorted for deterministic output.
///
/// An empty relation yields the single box spanning the whole lattice.
pub fn construct_gap_boxes(rel: &Relation) -> Vec<DyadicBox> {
    let bits = rel.bits();
    let d = rel.schema.arity();
    if rel.is_empty() {
        return vec![DyadicBox::all_empty(bits, d)];
    }
    let dims: Vec<usize> = (0..d).collect();
    let mut covering = HashSet::new();
    for row in rel.rows() {
        let p = Point::new(row.clone());
        for b in enumerate_containing(&p, bits, &dims) {
            covering.insert(b);
        }
    }
    let mut gaps = HashSet::new();
    for b in &covering {
        for nb in flip_neighbors(b) {
            if !covering.contains(&nb) {
                gaps.insert(nb);
            }
        }
    }
    let mut out: Vec<DyadicBox> = gaps.into_iter().collect();
    out.sort_unstable();
    out
}

/// One neighbor per non-empty dimension: the same box with that prefix's last
/// bit flipped.
pub(crate) fn flip_neighbors(b: &DyadicBox) -> Vec<DyadicBox> {
    (0..b.dim())
        .filter_map(|i| b.prefix(i).sibling().map(|s| b.with_prefix(i, s)))
        .collect()
}

/// Conservative size bound on the construction: `m * d_i * (L+1)^{d_i}`.
pub fn gap_box_count_bound(rel: &Relation) -> u128 {
    let d = rel.schema.arity() as u32;
    rel.rows().len() as u128 * d as u128 * (rel.bits() as u128 + 1).pow(d)
}
