//! Shared instance generators for the integration suites.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use welltris::gapbox::construct_gap_boxes;
use welltris::geom::{AxisBox, Interval, Point};
use welltris::ingest::Relation;
use welltris::schema::{JoinSchema, TableSchema};
use welltris::trie::GapBoxIndex;

/// Attribute names whose lexicographic order matches their index (d <= 10).
pub fn attr_names(d: usize) -> Vec<String> {
    assert!(d <= 10);
    (0..d).map(|i| format!("a{i}")).collect()
}

/// A random schema of `t` tables over `d` attributes; every attribute bound.
pub fn random_schema(rng: &mut ChaCha8Rng, t: usize, d: usize, bits: u32) -> JoinSchema {
    let mut table_attrs: Vec<Vec<usize>> = (0..t)
        .map(|_| {
            let size = rng.random_range(1..=d);
            let mut idx: Vec<usize> = (0..d).collect();
            for i in 0..size {
                let j = rng.random_range(i..d);
                idx.swap(i, j);
            }
            let mut s = idx[..size].to_vec();
            s.sort_unstable();
            s
        })
        .collect();
    for a in 0..d {
        if !table_attrs.iter().any(|s| s.contains(&a)) {
            let k = rng.random_range(0..t);
            table_attrs[k].push(a);
            table_attrs[k].sort_unstable();
        }
    }
    let tables = table_attrs
        .into_iter()
        .enumerate()
        .map(|(i, attrs)| TableSchema::new(format!("t{i}"), attrs, 0).unwrap())
        .collect();
    JoinSchema::new(attr_names(d), bits, tables).unwrap()
}

/// Uniform random rows, up to `max_rows` per table.
pub fn random_relations(
    rng: &mut ChaCha8Rng,
    schema: &JoinSchema,
    max_rows: usize,
) -> Vec<Relation> {
    let n = schema.domain_size();
    schema
        .tables()
        .iter()
        .map(|t| {
            let m = rng.random_range(0..=max_rows);
            let rows = (0..m)
                .map(|_| (0..t.arity()).map(|_| rng.random_range(0..n)).collect())
                .collect();
            Relation::new(t.clone(), schema.bits(), rows).unwrap()
        })
        .collect()
}

/// Projects `planted` shared global points into every table, then adds noise
/// rows. The planted points guarantee a nonempty join.
pub fn planted_relations(
    rng: &mut ChaCha8Rng,
    schema: &JoinSchema,
    planted: usize,
    max_noise: usize,
) -> Vec<Relation> {
    let n = schema.domain_size();
    let points: Vec<Vec<u64>> = (0..planted)
        .map(|_| (0..schema.arity()).map(|_| rng.random_range(0..n)).collect())
        .collect();
    schema
        .tables()
        .iter()
        .map(|t| {
            let mut rows: Vec<Vec<u64>> = points
                .iter()
                .map(|p| t.attrs.iter().map(|&a| p[a]).collect())
                .collect();
            for _ in 0..rng.random_range(0..=max_noise) {
                rows.push((0..t.arity()).map(|_| rng.random_range(0..n)).collect());
            }
            Relation::new(t.clone(), schema.bits(), rows).unwrap()
        })
        .collect()
}

/// A single standalone relation over attributes `0..d`.
pub fn random_relation(rng: &mut ChaCha8Rng, d: usize, bits: u32, max_rows: usize) -> Relation {
    let n = 1u64 << bits;
    let m = rng.random_range(0..=max_rows);
    let rows = (0..m)
        .map(|_| (0..d).map(|_| rng.random_range(0..n)).collect())
        .collect();
    let schema = TableSchema::new("t", (0..d).collect(), 0).unwrap();
    Relation::new(schema, bits, rows).unwrap()
}

pub fn build_index(schema: &JoinSchema, relations: &[Relation]) -> GapBoxIndex {
    let boxes: Vec<_> = relations.iter().map(construct_gap_boxes).collect();
    GapBoxIndex::build(schema, &boxes).unwrap()
}

/// A join instance for estimator criteria: 2-3 tables, up to 4 attributes,
/// up to 3 bits, sized so a debug build stays fast.
pub struct Instance {
    pub schema: JoinSchema,
    pub relations: Vec<Relation>,
}

pub fn estimation_instance(rng: &mut ChaCha8Rng, plant: bool) -> Instance {
    let profile = rng.random_range(0..10u32);
    let (t, d, bits) = match profile {
        0..=4 => (2, rng.random_range(2..=3), rng.random_range(1..=2)),
        5..=6 => (3, 3, rng.random_range(1..=2)),
        7..=8 => (rng.random_range(2..=3), 4, rng.random_range(1..=2)),
        _ => (2, rng.random_range(2..=3), 3),
    };
    let schema = random_schema(rng, t, d, bits);
    let relations = if plant {
        let planted = rng.random_range(1..=3);
        planted_relations(rng, &schema, planted, 6)
    } else {
        random_relations(rng, &schema, 8)
    };
    Instance { schema, relations }
}

/// Random axis boxes inside `[0, n)^d`.
pub fn random_boxes(rng: &mut ChaCha8Rng, d: usize, n: u64, count: usize) -> Vec<AxisBox> {
    (0..count)
        .map(|_| {
            AxisBox::new(
                (0..d)
                    .map(|_| {
                        let lo = rng.random_range(0..n);
                        Interval::new(lo, rng.random_range(lo + 1..=n))
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Grid-scan enumeration of the points no box covers, in lexicographic order.
pub fn grid_uncovered(boxes: &[AxisBox], bounds: &AxisBox) -> Vec<Point> {
    let d = bounds.dim();
    let mut coords: Vec<u64> = (0..d).map(|i| bounds.interval(i).lo).collect();
    let mut out = Vec::new();
    loop {
        let p = Point::new(coords.clone());
        if !boxes.iter().any(|b| b.contains_point(&p)) {
            out.push(p);
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            coords[i] += 1;
            if coords[i] < bounds.interval(i).hi {
                break;
            }
            coords[i] = bounds.interval(i).lo;
        }
    }
}
