//! Join-size estimation and uniform join-row sampling.
//!
//! The loop keeps a growing set `E` of already-selected gap boxes. Each pass
//! draws `k` points uniformly from the part of the lattice `E` does not cover
//! and probes them in rank order. The first covered point donates all its
//! covering boxes to `E`; if no drawn point is covered, the current uncovered
//! count is the estimate. Every completed pass adds at least one box, so the
//! pass count never exceeds the number of stored boxes.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dyadic::DyadicBox;
use crate::error::{Error, Result};
use crate::geom::{AxisBox, Point};
use crate::klee::{draw_uniform_uncovered, Cell};
use crate::trie::GapBoxIndex;

/// Estimation parameters.
#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Relative accuracy target; must be positive.
    pub epsilon: f64,
    /// Failure probability target; must lie strictly between 0 and 1.
    pub delta: f64,
    pub seed: u64,
    /// Overrides the derived per-pass sample count when set.
    pub k_override: Option<usize>,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Result<Self> {
        let cfg = EstimatorConfig { epsilon, delta, seed, k_override: None };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie strictly between 0 and 1, got {}",
                self.delta
            )));
        }
        if self.k_override == Some(0) {
            return Err(Error::Config("k override must be positive".into()));
        }
        Ok(())
    }
}

/// Per-pass sample count: `ceil((4/eps) * (ln |B| + ln(1/delta)))`, at least 1.
pub fn sample_budget(epsilon: f64, delta: f64, stored_boxes: usize) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!(
            "delta must lie strictly between 0 and 1, got {delta}"
        )));
    }
    assert!(stored_boxes >= 1, "sample budget needs a nonempty box set");
    let raw = (4.0 / epsilon) * ((stored_boxes as f64).ln() + (1.0 / delta).ln());
    Ok((raw.ceil() as usize).max(1))
}

/// The selected boxes `E` plus run counters.
pub struct CoverState {
    boxes: Vec<AxisBox>,
    selected: HashSet<DyadicBox>,
    pub iterations: usize,
    pub samples_drawn: usize,
    pub last_uncovered: Option<i128>,
}

impl Default for CoverState {
    fn default() -> Self {
        Self::new()
    }
}

impl CoverState {
    pub fn new() -> Self {
        CoverState {
            boxes: Vec::new(),
            selected: HashSet::new(),
            iterations: 0,
            samples_drawn: 0,
            last_uncovered: None,
        }
    }

    /// The selected boxes in global axis form.
    pub fn boxes(&self) -> &[AxisBox] {
        &self.boxes
    }

    /// Number of distinct selected boxes.
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Lifts each covering box to the global space and adds the new ones;
    /// returns how many were new.
    pub fn absorb(&mut self, covering: &[(usize, DyadicBox)], idx: &GapBoxIndex) -> usize {
        let mut added = 0;
        for (table, local) in covering {
            let global = local
                .lift(idx.tables()[*table].attrs(), idx.arity())
                .expect("indexed boxes lift cleanly");
            if self.selected.insert(global.clone()) {
                self.boxes.push(global.to_axis());
                added += 1;
            }
        }
        added
    }
}

/// Join-size estimate plus run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub value: u128,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Completed passes that grew the selected set.
    pub iterations: usize,
    pub boxes_in_e: usize,
    pub samples_drawn: usize,
    pub k_used: usize,
}

/// Upper bound on how many boxes a single pass can add: one point is covered
/// by at most `(L+1)^{d_i}` boxes per table.
pub fn per_iteration_box_bound(idx: &GapBoxIndex) -> u128 {
    idx.tables()
        .iter()
        .map(|t| (idx.bits() as u128 + 1).pow(t.arity() as u32))
        .sum()
}

/// Estimates the join size from an index without enumerating the join.
///
/// The estimate never undershoots the true size; with the derived budget it
/// overshoots `(1+eps)` times the true size with probability at most `delta`.
pub fn estimate_join_size(idx: &GapBoxIndex, cfg: &EstimatorConfig) -> Result<Estimate> {
    cfg.validate()?;
    let mut est = Estimate {
        value: 0,
        epsilon: cfg.epsilon,
        delta: cfg.delta,
        seed: cfg.seed,
        iterations: 0,
        boxes_in_e: 0,
        samples_drawn: 0,
        k_used: 0,
    };
    let stored = idx.total_boxes();
    if stored == 0 {
        // Nothing can be covered: the join is the whole lattice.
        est.value = idx.lattice_volume() as u128;
        return Ok(est);
    }
    let k = match cfg.k_override {
        Some(k) => k,
        None => sample_budget(cfg.epsilon, cfg.delta, stored)?,
    };
    est.k_used = k;
    let cell = Cell::from_bounds(AxisBox::cube(idx.arity(), idx.domain_size()));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = CoverState::new();
    let growth_bound = per_iteration_box_bound(idx);
    loop {
        let draw = draw_uniform_uncovered(state.boxes(), &cell, k, &mut rng);
        state.last_uncovered = Some(draw.uncovered);
        if draw.is_fully_covered() {
            break;
        }
        state.samples_drawn += draw.points.len();
        let mut first_covered = None;
        for p in &draw.points {
            let covering = idx.covering_boxes(p)?;
            if !covering.is_empty() {
                first_covered = Some(covering);
                break;
            }
        }
        let Some(covering) = first_covered else {
            est.value = draw.uncovered as u128;
            break;
        };
        let added = state.absorb(&covering, idx);
        state.iterations += 1;
        assert!(added >= 1, "a covered point always contributes a new box");
        assert!(
            added as u128 <= growth_bound,
            "pass added {added} boxes, over the bound {growth_bound}"
        );
        assert!(
            state.iterations <= stored,
            "pass count exceeded the {stored} stored boxes"
        );
    }
    est.iterations = state.iterations;
    est.boxes_in_e = state.len();
    est.samples_drawn = state.samples_drawn;
    Ok(est)
}

/// Whether a lattice point is a join row: no stored box covers it.
pub fn is_join_row(idx: &GapBoxIndex, p: &Point) -> Result<bool> {
    Ok(idx.covering_boxes(p)?.is_empty())
}

/// Draws `q` join rows independently and uniformly (with replacement) by
/// rejection against the growing selected set. Errors with
/// [`Error::EmptyJoin`] when the join turns out to be empty.
pub fn sample_join_rows(idx: &GapBoxIndex, q: usize, cfg: &EstimatorConfig) -> Result<Vec<Point>> {
    cfg.validate()?;
    if q == 0 {
        return Ok(Vec::new());
    }
    let stored = idx.total_boxes();
    let cell = Cell::from_bounds(AxisBox::cube(idx.arity(), idx.domain_size()));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = CoverState::new();
    let mut accepted = Vec::with_capacity(q);
    loop {
        let draw = draw_uniform_uncovered(state.boxes(), &cell, q, &mut rng);
        state.last_uncovered = Some(draw.uncovered);
        if draw.is_fully_covered() {
            return Err(Error::EmptyJoin);
        }
        state.samples_drawn += draw.points.len();
        let mut first_covered = None;
        for p in draw.points {
            let covering = idx.covering_boxes(&p)?;
            if covering.is_empty() {
                accepted.push(p);
                if accepted.len() == q {
                    return Ok(accepted);
                }
            } else if first_covered.is_none() {
                first_covered = Some(covering);
            }
        }
        if let Some(covering) = first_covered {
            let added = state.absorb(&covering, idx);
            state.iterations += 1;
            assert!(added >= 1, "a covered point always contributes a new box");
            assert!(
                state.iterations <= stored,
                "pass count exceeded the {stored} stored boxes"
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gapbox::construct_gap_boxes;
    use crate::ingest::Relation;
    use crate::schema::{JoinSchema, TableSchema};
    use rand::prelude::*;

    fn cfg(epsilon: f64, delta: f64, seed: u64) -> EstimatorConfig {
        EstimatorConfig::new(epsilon, delta, seed).unwrap()
    }

    fn build_index(schema: &JoinSchema, relations: &[Relation]) -> GapBoxIndex {
        let boxes: Vec<_> = relations.iter().map(construct_gap_boxes).collect();
        GapBoxIndex::build(schema, &boxes).unwrap()
    }

    fn chain_instance() -> (JoinSchema, Vec<Relation>) {
        let schema = JoinSchema::new(
            vec!["a".into(), "b".into(), "c".into()],
            1,
            vec![
                TableSchema::new("t1", vec![0, 1], 0).unwrap(),
                TableSchema::new("t2", vec![1, 2], 0).unwrap(),
            ],
        )
        .unwrap();
        let rels = vec![
            Relation::new(schema.tables()[0].clone(), 1, vec![vec![0, 0], vec![1, 1]]).unwrap(),
            Relation::new(schema.tables()[1].clone(), 1, vec![vec![0, 0], vec![1, 0]]).unwrap(),
        ];
        (schema, rels)
    }

    #[test]
    fn budget_formula_frozen_values() {
        assert_eq!(sample_budget(2.0, 0.5, 8).unwrap(), 6);
        assert_eq!(sample_budget(0.5, 0.1, 100).unwrap(), 56);
        assert_eq!(sample_budget(1000.0, 0.9, 1).unwrap(), 1);
    }

    #[test]
    fn budget_rejects_bad_parameters() {
        assert!(sample_budget(0.0, 0.1, 4).is_err());
        assert!(sample_budget(-1.0, 0.1, 4).is_err());
        assert!(sample_budget(f64::NAN, 0.1, 4).is_err());
        assert!(sample_budget(0.5, 0.0, 4).is_err());
        assert!(sample_budget(0.5, 1.0, 4).is_err());
        assert!(EstimatorConfig::new(0.5, 2.0, 0).is_err());
        let mut c = cfg(0.5, 0.1, 0);
        c.k_override = Some(0);
        assert!(c.validate().is_err());
    }

    #[test]
    fn full_tables_estimate_the_whole_lattice() {
        let schema = JoinSchema::new(
            vec!["a".into(), "b".into()],
            1,
            vec![
                TableSchema::new("t1", vec![0], 0).unwrap(),
                TableSchema::new("t2", vec![1], 0).unwrap(),
            ],
        )
        .unwrap();
        let rels = vec![
            Relation::new(schema.tables()[0].clone(), 1, vec![vec![0], vec![1]]).unwrap(),
            Relation::new(schema.tables()[1].clone(), 1, vec![vec![0], vec![1]]).unwrap(),
        ];
        let idx = build_index(&schema, &rels);
        assert_eq!(idx.total_boxes(), 0);
        let est = estimate_join_size(&idx, &cfg(0.5, 0.1, 0)).unwrap();
        assert_eq!(est.value, 4);
        assert_eq!(est.iterations, 0);
        assert_eq!(est.samples_drawn, 0);
    }

    #[test]
    fn empty_table_estimates_zero() {
        let (schema, mut rels) = chain_instance();
        rels[0] = Relation::new(schema.tables()[0].clone(), 1, vec![]).unwrap();
        let idx = build_index(&schema, &rels);
        let est = estimate_join_size(&idx, &cfg(0.5, 0.1, 3)).unwrap();
        assert_eq!(est.value, 0);
        assert!(est.iterations >= 1);
    }

    #[test]
    fn chain_estimate_is_sound_and_deterministic() {
        let (schema, rels) = chain_instance();
        let idx = build_index(&schema, &rels);
        let est = estimate_join_size(&idx, &cfg(0.5, 0.1, 7)).unwrap();
        // The true join has two rows.
        assert!(est.value >= 2);
        assert!(est.value <= 8);
        let again = estimate_join_size(&idx, &cfg(0.5, 0.1, 7)).unwrap();
        assert_eq!(est, again);
        assert!(est.iterations <= idx.total_boxes());
    }

    #[test]
    fn estimates_never_undershoot_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        for trial in 0..40u64 {
            let bits = rng.random_range(1..=2u32);
            let n = 1u64 << bits;
            let schema = JoinSchema::new(
                vec!["a".into(), "b".into(), "c".into()],
                bits,
                vec![
                    TableSchema::new("t1", vec![0, 1], 0).unwrap(),
                    TableSchema::new("t2", vec![1, 2], 0).unwrap(),
                ],
            )
            .unwrap();
            let rels: Vec<Relation> = schema
                .tables()
                .iter()
                .map(|t| {
                    let m = rng.random_range(0..=5);
                    let rows = (0..m)
                        .map(|_| (0..t.arity()).map(|_| rng.random_range(0..n)).collect())
                        .collect();
                    Relation::new(t.clone(), bits, rows).unwrap()
                })
                .collect();
            let idx = build_index(&schema, &rels);
            let z = crate::oracle::exact_join(&rels, &schema).unwrap().len() as u128;
            let est = estimate_join_size(&idx, &cfg(0.5, 0.1, trial)).unwrap();
            assert!(est.value >= z, "estimate {} under true size {z}", est.value);
        }
    }

    #[test]
    fn join_row_membership() {
        let (schema, rels) = chain_instance();
        let idx = build_index(&schema, &rels);
        assert!(is_join_row(&idx, &Point::new(vec![0, 0, 0])).unwrap());
        assert!(is_join_row(&idx, &Point::new(vec![1, 1, 0])).unwrap());
        assert!(!is_join_row(&idx, &Point::new(vec![0, 1, 0])).unwrap());
        assert!(!is_join_row(&idx, &Point::new(vec![0, 0, 1])).unwrap());
        assert!(is_join_row(&idx, &Point::new(vec![0, 0])).is_err());
    }

    #[test]
    fn sampled_rows_are_join_rows() {
        let (schema, rels) = chain_instance();
        let idx = build_index(&schema, &rels);
        let rows = sample_join_rows(&idx, 50, &cfg(0.5, 0.1, 9)).unwrap();
        assert_eq!(rows.len(), 50);
        let a = Point::new(vec![0, 0, 0]);
        let b = Point::new(vec![1, 1, 0]);
        assert!(rows.iter().all(|p| p == &a || p == &b));
        assert!(rows.contains(&a) && rows.contains(&b));
        let again = sample_join_rows(&idx, 50, &cfg(0.5, 0.1, 9)).unwrap();
        assert_eq!(rows, again);
    }

    #[test]
    fn sampling_an_empty_join_errors() {
        let (schema, mut rels) = chain_instance();
        rels[1] = Relation::new(schema.tables()[1].clone(), 1, vec![]).unwrap();
        let idx = build_index(&schema, &rels);
        assert!(matches!(
            sample_join_rows(&idx, 3, &cfg(0.5, 0.1, 1)),
            Err(Error::EmptyJoin)
        ));
        assert!(sample_join_rows(&idx, 0, &cfg(0.5, 0.1, 1)).unwrap().is_empty());
    }

    #[test]
    fn cross_product_sampling_covers_the_lattice() {
        let schema = JoinSchema::new(
            vec!["a".into(), "b".into()],
            1,
            vec![
                TableSchema::new("t1", vec![0], 0).unwrap(),
                TableSchema::new("t2", vec![1], 0).unwrap(),
            ],
        )
        .unwrap();
        let rels = vec![
            Relation::new(schema.tables()[0].clone(), 1, vec![vec![0], vec![1]]).unwrap(),
            Relation::new(schema.tables()[1].clone(), 1, vec![vec![0], vec![1]]).unwrap(),
        ];
        let idx = build_index(&schema, &rels);
        let rows = sample_join_rows(&idx, 400, &cfg(0.5, 0.1, 2)).unwrap();
        let distinct: std::collections::HashSet<&Point> = rows.iter().collect();
        assert_eq!(distinct.len(), 4);
    }
}
