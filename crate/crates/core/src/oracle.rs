//! Exhaustive reference implementations used by the test suites.
//!
//! Everything here prefers clarity over speed, refuses inputs beyond its
//! guard limits, and never approximates.

use std::collections::{HashMap, HashSet};

use crate::dyadic::{enumerate_containing, DyadicBox, Prefix};
use crate::error::{Error, Result};
use crate::geom::{AxisBox, Interval, Point};
use crate::ingest::Relation;
use crate::schema::JoinSchema;

/// Largest box count accepted by subset inclusion-exclusion.
pub const MAX_IE_BOXES: usize = 20;

/// Largest lattice accepted by grid-marking operations.
pub const MAX_GRID_POINTS: i128 = 1 << 20;

/// Largest join intermediate the hash join materializes.
pub const MAX_JOIN_RESULT: u128 = 1 << 20;

/// Largest dyadic box population the gap-box oracle enumerates.
const MAX_DYADIC_ENUM: u128 = 1 << 20;

/// Largest general box population the maximal-gap oracle enumerates.
const MAX_GENERAL_BOXES: u128 = 1 << 17;

/// Largest candidate set the set-cover search accepts.
const MAX_COVER_CANDIDATES: usize = 20;

/// Spaces up to this volume get an automatic grid cross-check inside
/// [`union_volume_ie`].
const CROSS_CHECK_POINTS: i128 = 1 << 12;

/// The exact join result, computed by a progressive hash join. Sorted.
pub fn exact_join(relations: &[Relation], schema: &JoinSchema) -> Result<Vec<Point>> {
    validate_input(relations, schema)?;
    let d = schema.arity();
    const UNBOUND: u64 = u64::MAX;
    let mut acc: Vec<Vec<u64>> = vec![vec![UNBOUND; d]];
    let mut bound = vec![false; d];
    for rel in relations {
        let attrs = &rel.schema.attrs;
        let shared: Vec<usize> = (0..attrs.len()).filter(|&i| bound[attrs[i]]).collect();
        let fresh: Vec<usize> = (0..attrs.len()).filter(|&i| !bound[attrs[i]]).collect();
        let mut by_key: HashMap<Vec<u64>, Vec<&Vec<u64>>> = HashMap::new();
        for row in rel.rows() {
            let key: Vec<u64> = shared.iter().map(|&i| row[i]).collect();
            by_key.entry(key).or_default().push(row);
        }
        let mut next_len: u128 = 0;
        for a in &acc {
            let key: Vec<u64> = shared.iter().map(|&i| a[attrs[i]]).collect();
            next_len += by_key.get(&key).map_or(0, |v| v.len() as u128);
        }
        if next_len > MAX_JOIN_RESULT {
            return Err(Error::OracleGuard(format!(
                "join intermediate would hold {next_len} rows (limit {MAX_JOIN_RESULT})"
            )));
        }
        let mut next = Vec::with_capacity(next_len as usize);
        for a in &acc {
            let key: Vec<u64> = shared.iter().map(|&i| a[attrs[i]]).collect();
            for row in by_key.get(&key).into_iter().flatten() {
                let mut b = a.clone();
                for &i in &fresh {
                    b[attrs[i]] = row[i];
                }
                next.push(b);
            }
        }
        acc = next;
        for &a in attrs {
            bound[a] = true;
        }
    }
    debug_assert!(bound.iter().all(|&b| b));
    let mut points: Vec<Point> = acc.into_iter().map(Point::new).collect();
    points.sort_unstable();
    Ok(points)
}

/// The exact join result by scanning the whole lattice. Sorted.
pub fn exact_join_enumerated(relations: &[Relation], schema: &JoinSchema) -> Result<Vec<Point>> {
    validate_input(relations, schema)?;
    if schema.lattice_volume() > MAX_GRID_POINTS {
        return Err(Error::OracleGuard(format!(
            "lattice holds {} points (limit {MAX_GRID_POINTS})",
            schema.lattice_volume()
        )));
    }
    let d = schema.arity();
    let n = schema.domain_size();
    let row_sets: Vec<HashSet<&[u64]>> = relations
        .iter()
        .map(|r| r.rows().iter().map(Vec::as_slice).collect())
        .collect();
    let mut out = Vec::new();
    let mut coords = vec![0u64; d];
    loop {
        let joins = relations.iter().zip(&row_sets).all(|(rel, rows)| {
            let local: Vec<u64> = rel.schema.attrs.iter().map(|&a| coords[a]).collect();
            rows.contains(local.as_slice())
        });
        if joins {
            out.push(Point::new(coords.clone()));
        }
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            coords[i] += 1;
            if coords[i] < n {
                break;
            }
            coords[i] = 0;
        }
    }
}

fn validate_input(relations: &[Relation], schema: &JoinSchema) -> Result<()> {
    if relations.len() != schema.tables().len() {
        return Err(Error::Schema(format!(
            "{} relations for {} tables",
            relations.len(),
            schema.tables().len()
        )));
    }
    for (rel, t) in relations.iter().zip(schema.tables()) {
        if rel.schema.name != t.name || rel.schema.attrs != t.attrs || rel.bits() != schema.bits() {
            return Err(Error::Schema(format!(
                "relation {} does not match its schema entry",
                rel.schema.name
            )));
        }
    }
    Ok(())
}

/// Lattice volume of the union of `boxes` inside `space`, by subset
/// inclusion-exclusion. Small spaces are cross-checked by grid marking.
pub fn union_volume_ie(boxes: &[AxisBox], space: &AxisBox) -> Result<i128> {
    let clipped: Vec<AxisBox> = boxes.iter().filter_map(|b| b.intersect(space)).collect();
    if clipped.len() > MAX_IE_BOXES {
        return Err(Error::OracleGuard(format!(
            "{} boxes intersect the space (limit {MAX_IE_BOXES})",
            clipped.len()
        )));
    }
    let d = space.dim();
    let mut union = 0i128;
    for mask in 1u32..1 << clipped.len() {
        let mut vol = 1i128;
        for i in 0..d {
            let mut lo = space.interval(i).lo;
            let mut hi = space.interval(i).hi;
            for (j, b) in clipped.iter().enumerate() {
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
    if space.volume() <= CROSS_CHECK_POINTS {
        let grid = union_volume_grid(boxes, space)?;
        assert_eq!(union, grid, "inclusion-exclusion disagrees with grid marking");
    }
    Ok(union)
}

/// Lattice volume of the union of `boxes` inside `space`, by marking every
/// point.
pub fn union_volume_grid(boxes: &[AxisBox], space: &AxisBox) -> Result<i128> {
    if space.volume() > MAX_GRID_POINTS {
        return Err(Error::OracleGuard(format!(
            "space holds {} points (limit {MAX_GRID_POINTS})",
            space.volume()
        )));
    }
    let d = space.dim();
    let mut coords: Vec<u64> = (0..d).map(|i| space.interval(i).lo).collect();
    let mut covered = 0i128;
    loop {
        let p = Point::new(coords.clone());
        if boxes.iter().any(|b| b.contains_point(&p)) {
            covered += 1;
        }
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(covered);
            }
            i -= 1;
            coords[i] += 1;
            if coords[i] < space.interval(i).hi {
                break;
            }
            coords[i] = space.interval(i).lo;
        }
    }
}

/// Every maximal dyadic box containing no tuple of the relation, by full
/// enumeration. Sorted.
pub fn maximal_dyadic_gap_boxes(rel: &Relation) -> Result<Vec<DyadicBox>> {
    let bits = rel.bits();
    let d = rel.schema.arity();
    let per_dim: u128 = (1u128 << (bits + 1)) - 1;
    let total = per_dim.checked_pow(d as u32).filter(|&t| t <= MAX_DYADIC_ENUM);
    if total.is_none() {
        return Err(Error::OracleGuard(format!(
            "dyadic box population {per_dim}^{d} exceeds limit {MAX_DYADIC_ENUM}"
        )));
    }
    let dims: Vec<usize> = (0..d).collect();
    let mut covering = HashSet::new();
    for row in rel.rows() {
        let p = Point::new(row.clone());
        for b in enumerate_containing(&p, bits, &dims) {
            covering.insert(b);
        }
    }
    let mut all_prefixes = Vec::new();
    for len in 0..=bits {
        for v in 0..1u64 << len {
            all_prefixes.push(Prefix::new(v, len));
        }
    }
    let mut gaps: HashSet<DyadicBox> = HashSet::new();
    let mut idx = vec![0usize; d];
    loop {
        let b = DyadicBox::new(bits, idx.iter().map(|&i| all_prefixes[i]).collect())
            .expect("enumerated box is valid");
        if !covering.contains(&b) {
            gaps.insert(b);
        }
        let mut i = d;
        loop {
            if i == 0 {
                // A gap box is maximal exactly when no one-step parent is a
                // gap box: any strictly containing gap box contains such a
                // parent.
                let mut out: Vec<DyadicBox> = gaps
                    .iter()
                    .filter(|b| {
                        (0..d).all(|dim| match b.prefix(dim).parent() {
                            Some(p) => !gaps.contains(&b.with_prefix(dim, p)),
                            None => true,
                        })
                    })
                    .cloned()
                    .collect();
                out.sort_unstable();
                return Ok(out);
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < all_prefixes.len() {
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Every maximal axis box inside `space` containing none of `points`, by full
/// enumeration with one-step extension tests. Sorted.
pub fn maximal_gap_boxes(points: &[Point], space: &AxisBox) -> Result<Vec<AxisBox>> {
    let d = space.dim();
    let mut population: u128 = 1;
    for i in 0..d {
        let len = space.interval(i).len() as u128;
        population = population.saturating_mul(len * (len + 1) / 2);
    }
    if population > MAX_GENERAL_BOXES {
        return Err(Error::OracleGuard(format!(
            "box population {population} exceeds limit {MAX_GENERAL_BOXES}"
        )));
    }
    let hits = |b: &AxisBox| points.iter().any(|p| b.contains_point(p));
    let mut out = Vec::new();
    // Odometer over all (lo, hi) interval pairs per dimension.
    let mut ivs: Vec<(u64, u64)> = (0..d)
        .map(|i| (space.interval(i).lo, space.interval(i).lo + 1))
        .collect();
    loop {
        let b = AxisBox::new(ivs.iter().map(|&(a, z)| Interval::new(a, z)).collect());
        if !hits(&b) {
            let maximal = (0..d).all(|i| {
                let iv = b.interval(i);
                let s = space.interval(i);
                let lo_blocked = iv.lo == s.lo
                    || hits(&b.with_interval(i, Interval::new(iv.lo - 1, iv.lo)));
                let hi_blocked = iv.hi == s.hi
                    || hits(&b.with_interval(i, Interval::new(iv.hi, iv.hi + 1)));
                lo_blocked && hi_blocked
            });
            if maximal {
                out.push(b);
            }
        }
        let mut i = d;
        loop {
            if i == 0 {
                out.sort_unstable();
                return Ok(out);
            }
            i -= 1;
            let s = space.interval(i);
            if ivs[i].1 < s.hi {
                ivs[i].1 += 1;
                break;
            }
            if ivs[i].0 + 1 < s.hi {
                ivs[i].0 += 1;
                ivs[i].1 = ivs[i].0 + 1;
                break;
            }
            ivs[i] = (s.lo, s.lo + 1);
        }
    }
}

/// Size of a smallest subset of `candidates` covering every target point, by
/// branch and bound. Errors when some target point is not coverable at all.
pub fn min_cover_size(candidates: &[AxisBox], target: &[Point]) -> Result<usize> {
    if candidates.len() > MAX_COVER_CANDIDATES {
        return Err(Error::OracleGuard(format!(
            "{} cover candidates (limit {MAX_COVER_CANDIDATES})",
            candidates.len()
        )));
    }
    if target.is_empty() {
        return Ok(0);
    }
    let blocks = target.len().div_ceil(64);
    let masks: Vec<Vec<u64>> = candidates
        .iter()
        .map(|c| {
            let mut m = vec![0u64; blocks];
            for (i, p) in target.iter().enumerate() {
                if c.contains_point(p) {
                    m[i / 64] |= 1 << (i % 64);
                }
            }
            m
        })
        .collect();
    let mut point_cover: Vec<Vec<usize>> = vec![Vec::new(); target.len()];
    for (ci, m) in masks.iter().enumerate() {
        for (i, pc) in point_cover.iter_mut().enumerate() {
            if m[i / 64] >> (i % 64) & 1 == 1 {
                pc.push(ci);
            }
        }
    }
    if let Some(i) = point_cover.iter().position(Vec::is_empty) {
        return Err(Error::OracleGuard(format!(
            "target point {:?} is covered by no candidate",
            target[i]
        )));
    }
    // Branch on the candidates covering the first uncovered point.
    let full: Vec<u64> = (0..blocks)
        .map(|b| {
            let hi = (target.len() - b * 64).min(64);
            if hi == 64 { u64::MAX } else { (1u64 << hi) - 1 }
        })
        .collect();
    let mut best = usize::MAX;
    let mut stack = vec![(vec![0u64; blocks], 0usize)];
    let mut order: Vec<Vec<usize>> = point_cover.clone();
    for pc in &mut order {
        pc.sort_by_key(|&c| std::cmp::Reverse(masks[c].iter().map(|w| w.count_ones()).sum::<u32>()));
    }
    while let Some((covered, used)) = stack.pop() {
        if used + 1 >= best {
            continue;
        }
        let first = (0..target.len())
            .find(|&i| covered[i / 64] >> (i % 64) & 1 == 0 && full[i / 64] >> (i % 64) & 1 == 1);
        let Some(first) = first else {
            best = best.min(used);
            continue;
        };
        for &c in &order[first] {
            let mut cv = covered.clone();
            for (w, m) in cv.iter_mut().zip(&masks[c]) {
                *w |= m;
            }
            if cv == full {
                best = best.min(used + 1);
            } else {
                stack.push((cv, used + 1));
            }
        }
    }
    Ok(best)
}
