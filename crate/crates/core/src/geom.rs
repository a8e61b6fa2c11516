//! Plain axis-aligned geometry on the integer lattice.

/// A lattice point; one coordinate per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub coords: Vec<u64>,
}

impl Point {
    pub fn new(coords: Vec<u64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// Half-open interval `[lo, hi)` of lattice coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: u64,
    pub hi: u64,
}

impl Interval {
    pub fn new(lo: u64, hi: u64) -> Self {
        Interval { lo, hi }
    }

    pub fn len(&self) -> u64 {
        self.hi.saturating_sub(self.lo)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn contains(&self, x: u64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

/// Axis-aligned box with a nonempty interval in every dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AxisBox {
    dims: Vec<Interval>,
}

impl AxisBox {
    /// Builds a box from per-dimension intervals; every interval must be nonempty.
    pub fn new(dims: Vec<Interval>) -> Self {
        assert!(
            dims.iter().all(|iv| !iv.is_empty()),
            "axis box requires a nonempty interval in every dimension"
        );
        AxisBox { dims }
    }

    /// The full cube `[0, n)^d`.
    pub fn cube(dim: usize, n: u64) -> Self {
        AxisBox::new(vec![Interval::new(0, n); dim])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn interval(&self, dim: usize) -> Interval {
        self.dims[dim]
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.dims
    }

    /// Copy of this box with one interval replaced.
    pub fn with_interval(&self, dim: usize, iv: Interval) -> AxisBox {
        let mut dims = self.dims.clone();
        dims[dim] = iv;
        AxisBox::new(dims)
    }

    /// Number of lattice points inside the box.
    pub fn volume(&self) -> i128 {
        self.dims.iter().map(|iv| iv.len() as i128).product()
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && self
                .dims
                .iter()
                .zip(&p.coords)
                .all(|(iv, &x)| iv.contains(x))
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        other.dim() == self.dim()
            && self
                .dims
                .iter()
                .zip(&other.dims)
                .all(|(a, b)| a.contains_interval(b))
    }

    pub fn intersect(&self, other: &AxisBox) -> Option<AxisBox> {
        debug_assert_eq!(self.dim(), other.dim());
        let mut dims = Vec::with_capacity(self.dim());
        for (a, b) in self.dims.iter().zip(&other.dims) {
            dims.push(a.intersect(b)?);
        }
        Some(AxisBox { dims })
    }
}
