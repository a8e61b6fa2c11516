//! Counting and rank-indexed sampling of the lattice points a box union does
//! not cover.
//!
//! One recursion serves both operations: it clips and deduplicates boxes,
//! stops early on full cover, resolves small cells by inclusion-exclusion
//! (at most four boxes, so at most fifteen subset terms), removes fully
//! spanning slabs with coordinate compression, and otherwise bisects along a
//! round-robin dimension at the median interior box endpoint. Because a
//! sampling pass visits the exact cells a counting pass visits, the count a
//! sample reports always equals the measure.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::geom::{AxisBox, Interval, Point};

/// Leaf threshold: cells with at most this many distinct boxes are resolved
/// by inclusion-exclusion.
const LEAF_MAX: usize = 4;

/// A recursion cell: current bounds plus the per-dimension slab intervals
/// that were compressed away, recorded in pre-removal coordinates.
#[derive(Debug, Clone)]
pub struct Cell {
    bounds: AxisBox,
    removed: Vec<Vec<(u64, u64)>>,
}

impl Cell {
    /// A cell with nothing removed.
    pub fn from_bounds(bounds: AxisBox) -> Cell {
        let d = bounds.dim();
        Cell { bounds, removed: vec![Vec::new(); d] }
    }

    /// A cell with removal records; records must be sorted, disjoint, and
    /// nonempty per dimension.
    pub fn new(bounds: AxisBox, removed: Vec<Vec<(u64, u64)>>) -> Result<Cell> {
        if removed.len() != bounds.dim() {
            return Err(Error::Schema(format!(
                "{} removal records for {} dimensions",
                removed.len(),
                bounds.dim()
            )));
        }
        for recs in &removed {
            let ok = recs.iter().all(|&(a, b)| a < b)
                && recs.windows(2).all(|w| w[0].1 <= w[1].0);
            if !ok {
                return Err(Error::Schema(
                    "removal records must be sorted, disjoint, nonempty intervals".into(),
                ));
            }
        }
        Ok(Cell { bounds, removed })
    }

    pub fn bounds(&self) -> &AxisBox {
        &self.bounds
    }

    /// Maps a point from this cell's compressed coordinates back to the
    /// pre-removal coordinates.
    pub fn restore_point(&self, p: &Point) -> Point {
        restore(p, &self.removed)
    }
}

/// A sorted multiset of 1-based ranks into the uncovered point sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankList {
    ranks: Vec<i128>,
}

impl RankList {
    pub fn new(mut ranks: Vec<i128>) -> RankList {
        ranks.sort_unstable();
        RankList { ranks }
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn as_slice(&self) -> &[i128] {
        &self.ranks
    }
}

/// Number of lattice points in the cell not covered by any box.
pub fn measure(boxes: &[AxisBox], cell: &Cell) -> i128 {
    let mut sink = Vec::new();
    walk(boxes, &cell.bounds, 0, &[], 0, &mut sink)
}

/// Counts the uncovered points and materializes the ones whose global rank
/// (offset by `v_before`) appears in `ranks`. Ranks must lie in
/// `v_before+1 ..= v_before+count`; anything else reports an internal
/// inconsistency between the caller's measure and this cell.
pub fn sample(
    boxes: &[AxisBox],
    cell: &Cell,
    ranks: &RankList,
    v_before: i128,
) -> Result<(i128, Vec<Point>)> {
    let mut picked = Vec::with_capacity(ranks.len());
    let total = walk(boxes, &cell.bounds, 0, ranks.as_slice(), v_before, &mut picked);
    if let (Some(&lo), Some(&hi)) = (ranks.as_slice().first(), ranks.as_slice().last()) {
        if lo <= v_before || hi > v_before + total {
            let bad = if lo <= v_before { lo } else { hi };
            return Err(Error::RankOutOfRange {
                rank: bad,
                lo: v_before + 1,
                hi: v_before + total,
            });
        }
    }
    debug_assert_eq!(picked.len(), ranks.len());
    Ok((total, picked.iter().map(|p| cell.restore_point(p)).collect()))
}

/// Result of drawing uniform uncovered points.
#[derive(Debug, Clone)]
pub struct Draw {
    /// Uncovered point count at draw time; zero means the cover is complete.
    pub uncovered: i128,
    pub points: Vec<Point>,
}

impl Draw {
    pub fn is_fully_covered(&self) -> bool {
        self.uncovered == 0
    }
}

/// Draws `k` uncovered points independently and uniformly (with replacement),
/// returned in the order the ranks were drawn so that any prefix is itself an
/// unbiased sample. Returns no points when the boxes cover the whole cell.
pub fn draw_uniform_uncovered<R: Rng + ?Sized>(
    boxes: &[AxisBox],
    cell: &Cell,
    k: usize,
    rng: &mut R,
) -> Draw {
    assert!(k >= 1, "draw needs a positive sample count");
    let uncovered = measure(boxes, cell);
    if uncovered == 0 {
        return Draw { uncovered: 0, points: Vec::new() };
    }
    let drawn: Vec<i128> = (0..k).map(|_| rng.random_range(1..=uncovered)).collect();
    let ranks = RankList::new(drawn.clone());
    let (total, points) =
        sample(boxes, cell, &ranks, 0).expect("drawn ranks lie within the measured range");
    debug_assert_eq!(total, uncovered);
    let by_rank: HashMap<i128, Point> =
        ranks.as_slice().iter().copied().zip(points).collect();
    let points = drawn.iter().map(|r| by_rank[r].clone()).collect();
    Draw { uncovered, points }
}

fn walk(
    parent_boxes: &[AxisBox],
    bounds: &AxisBox,
    depth: usize,
    ranks: &[i128],
    v_before: i128,
    out: &mut Vec<Point>,
) -> i128 {
    let mut boxes: Vec<AxisBox> = parent_boxes
        .iter()
        .filter_map(|b| b.intersect(bounds))
        .collect();
    boxes.sort_unstable();
    boxes.dedup();
    if boxes.iter().any(|b| b == bounds) {
        return 0;
    }
    if boxes.len() <= LEAF_MAX {
        return leaf(&boxes, bounds, ranks, v_before, out);
    }
    match simplify(&boxes, bounds) {
        Simplified::FullyCovered => 0,
        Simplified::Reduced { bounds: sub_bounds, boxes: sub_boxes, removed } => {
            let mut inner = Vec::new();
            let count = walk(&sub_boxes, &sub_bounds, depth + 1, ranks, v_before, &mut inner);
            out.extend(inner.iter().map(|p| restore(p, &removed)));
            count
        }
        Simplified::Unchanged => {
            let (left, right) = cut(&boxes, bounds, depth);
            let left_count = walk(&boxes, &left, depth + 1, ranks, v_before, out);
            let right_count = walk(&boxes, &right, depth + 1, ranks, v_before + left_count, out);
            left_count + right_count
        }
    }
}

/// Inclusion-exclusion leaf: counts the uncovered points and materializes the
/// requested ranks in lexicographic order.
fn leaf(
    boxes: &[AxisBox],
    bounds: &AxisBox,
    ranks: &[i128],
    v_before: i128,
    out: &mut Vec<Point>,
) -> i128 {
    let refs: Vec<&AxisBox> = boxes.iter().collect();
    let count = uncovered_tail(&refs, bounds, 0);
    if count > 0 && !ranks.is_empty() {
        let lo = ranks.partition_point(|&r| r <= v_before);
        let hi = ranks.partition_point(|&r| r <= v_before + count);
        for &r in &ranks[lo..hi] {
            out.push(select_uncovered(boxes, bounds, r - v_before));
        }
    }
    count
}

/// Uncovered volume of `bounds` restricted to dimensions `from..`, with boxes
/// projected the same way. Inclusion-exclusion over all box subsets.
fn uncovered_tail(boxes: &[&AxisBox], bounds: &AxisBox, from: usize) -> i128 {
    debug_assert!(boxes.len() <= LEAF_MAX);
    let d = bounds.dim();
    let total: i128 = (from..d).map(|i| bounds.interval(i).len() as i128).product();
    let mut union = 0i128;
    for mask in 1u32..1 << boxes.len() {
        let mut vol = 1i128;
        for i in from..d {
            let mut lo = bounds.interval(i).lo;
            let mut hi = bounds.interval(i).hi;
            for (j, b) in boxes.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    lo = lo.max(b.interval(i).lo);
                    hi = hi.min(b.interval(i).hi);
                }
            }
            if lo >= hi {
                vol = 0;
                break;
            }
            vol *= (hi - lo) as i128;
        }
        if mask.count_ones() % 2 == 1 {
            union += vol;
        } else {
            union -= vol;
        }
    }
    total - union
}

/// The `rank`-th uncovered point of the leaf in lexicographic order (1-based).
fn select_uncovered(boxes: &[AxisBox], bounds: &AxisBox, mut rank: i128) -> Point {
    let d = bounds.dim();
    let mut active: Vec<&AxisBox> = boxes.iter().collect();
    let mut coords = Vec::with_capacity(d);
    for dim in 0..d {
        let iv = bounds.interval(dim);
        let mut cuts = vec![iv.lo, iv.hi];
        for b in &active {
            cuts.push(b.interval(dim).lo);
            cuts.push(b.interval(dim).hi);
        }
        cuts.sort_unstable();
        cuts.dedup();
        let mut placed = false;
        // Box edges segment the dimension; within a segment every x has the
        // same uncovered volume over the remaining dimensions.
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let covering: Vec<&AxisBox> = active
                .iter()
                .copied()
                .filter(|bx| bx.interval(dim).lo <= a && b <= bx.interval(dim).hi)
                .collect();
            let per_x = uncovered_tail(&covering, bounds, dim + 1);
            if per_x == 0 {
                continue;
            }
            let seg_total = per_x * (b - a) as i128;
            if rank > seg_total {
                rank -= seg_total;
                continue;
            }
            let offset = (rank - 1) / per_x;
            coords.push(a + offset as u64);
            rank -= offset * per_x;
            active = covering;
            placed = true;
            break;
        }
        assert!(placed, "rank exceeds the uncovered volume of the leaf");
    }
    debug_assert_eq!(rank, 1);
    Point::new(coords)
}

enum Simplified {
    Unchanged,
    FullyCovered,
    Reduced {
        bounds: AxisBox,
        boxes: Vec<AxisBox>,
        removed: Vec<Vec<(u64, u64)>>,
    },
}

/// Removes, per dimension, the extent covered by boxes spanning the cell in
/// every other dimension, compressing coordinates monotonically. A dimension
/// that loses its whole extent means the cell is fully covered.
fn simplify(boxes: &[AxisBox], bounds: &AxisBox) -> Simplified {
    let d = bounds.dim();
    let mut removed: Vec<Vec<(u64, u64)>> = vec![Vec::new(); d];
    let mut any = false;
    for (dim, slot) in removed.iter_mut().enumerate() {
        let mut slabs: Vec<Interval> = boxes
            .iter()
            .filter(|b| (0..d).all(|j| j == dim || b.interval(j) == bounds.interval(j)))
            .map(|b| b.interval(dim))
            .collect();
        if slabs.is_empty() {
            continue;
        }
        slabs.sort_unstable_by_key(|iv| iv.lo);
        let mut merged: Vec<(u64, u64)> = Vec::new();
        for iv in slabs {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.1 => last.1 = last.1.max(iv.hi),
                _ => merged.push((iv.lo, iv.hi)),
            }
        }
        let mass: u64 = merged.iter().map(|&(a, b)| b - a).sum();
        if mass == bounds.interval(dim).len() {
            return Simplified::FullyCovered;
        }
        *slot = merged;
        any = true;
    }
    if !any {
        return Simplified::Unchanged;
    }
    let new_bounds = AxisBox::new(
        (0..d)
            .map(|i| {
                let iv = bounds.interval(i);
                Interval::new(compress(iv.lo, &removed[i]), compress(iv.hi, &removed[i]))
            })
            .collect(),
    );
    let mut new_boxes = Vec::with_capacity(boxes.len());
    'next_box: for b in boxes {
        let mut dims = Vec::with_capacity(d);
        for (i, rem) in removed.iter().enumerate() {
            let iv = b.interval(i);
            let lo = compress(iv.lo, rem);
            let hi = compress(iv.hi, rem);
            if lo >= hi {
                continue 'next_box;
            }
            dims.push(Interval::new(lo, hi));
        }
        new_boxes.push(AxisBox::new(dims));
    }
    Simplified::Reduced { bounds: new_bounds, boxes: new_boxes, removed }
}

/// Splits the cell in two along one dimension: round-robin by depth, at the
/// median interior box endpoint, bisecting when no endpoint is interior.
fn cut(boxes: &[AxisBox], bounds: &AxisBox, depth: usize) -> (AxisBox, AxisBox) {
    let d = bounds.dim();
    for k in 0..d {
        let dim = (depth + k) % d;
        let iv = bounds.interval(dim);
        let mut ends: Vec<u64> = Vec::new();
        for b in boxes {
            for v in [b.interval(dim).lo, b.interval(dim).hi] {
                if v > iv.lo && v < iv.hi {
                    ends.push(v);
                }
            }
        }
        let pivot = if !ends.is_empty() {
            ends.sort_unstable();
            ends[ends.len() / 2]
        } else if iv.len() >= 2 {
            iv.lo + iv.len() / 2
        } else {
            continue;
        };
        return (
            bounds.with_interval(dim, Interval::new(iv.lo, pivot)),
            bounds.with_interval(dim, Interval::new(pivot, iv.hi)),
        );
    }
    unreachable!("a cell that reaches the cut step always has a splittable dimension")
}

fn compress(x: u64, removed: &[(u64, u64)]) -> u64 {
    let mut shift = 0;
    for &(a, b) in removed {
        shift += x.min(b) - x.min(a);
    }
    x - shift
}

fn restore_coord(mut x: u64, removed: &[(u64, u64)]) -> u64 {
    for &(a, b) in removed {
        if x >= a {
            x += b - a;
        }
    }
    x
}

fn restore(p: &Point, removed: &[Vec<(u64, u64)>]) -> Point {
    Point::new(
        p.coords
            .iter()
            .zip(removed)
            .map(|(&x, recs)| restore_coord(x, recs))
            .collect(),
    )
}
