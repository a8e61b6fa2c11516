//! Dyadic boxes: per-dimension binary prefixes over an `L`-bit lattice.
//!
//! A prefix of length `l` denotes the half-open interval of all coordinates
//! that start with those `l` bits (MSB first); the empty prefix spans the
//! whole dimension.

use std::fmt;

use crate::error::{Error, Result};
use crate::geom::{AxisBox, Interval, Point};

/// One dimension of a dyadic box: the leading `len` bits of a coordinate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prefix {
    len: u32,
    bits: u64,
}

impl Prefix {
    /// The empty prefix, spanning the whole dimension.
    pub const EMPTY: Prefix = Prefix { len: 0, bits: 0 };

    pub fn new(bits: u64, len: u32) -> Self {
        assert!(len <= 64, "prefix length out of range");
        assert!(
            len == 64 || bits < (1u64 << len),
            "prefix value {bits} does not fit in {len} bits"
        );
        Prefix { len, bits }
    }

    /// The leading `len` bits of `coord` on an `l_bits`-bit lattice.
    pub fn of_coord(coord: u64, l_bits: u32, len: u32) -> Self {
        assert!(len <= l_bits && l_bits <= 63);
        debug_assert!(coord < (1u64 << l_bits));
        if len == 0 {
            Prefix::EMPTY
        } else {
            Prefix::new(coord >> (l_bits - len), len)
        }
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    /// True for the empty prefix.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// True when every coordinate matching `other` also matches `self`.
    pub fn contains(&self, other: &Prefix) -> bool {
        self.len <= other.len && other.bits >> (other.len - self.len) == self.bits
    }

    /// True when `coord` starts with this prefix on an `l_bits`-bit lattice.
    pub fn matches_coord(&self, coord: u64, l_bits: u32) -> bool {
        debug_assert!(self.len <= l_bits);
        self.len == 0 || coord >> (l_bits - self.len) == self.bits
    }

    /// Prefix with the last bit dropped; `None` for the empty prefix.
    pub fn parent(&self) -> Option<Prefix> {
        (self.len > 0).then(|| Prefix::new(self.bits >> 1, self.len - 1))
    }

    /// Prefix with the last bit flipped; `None` for the empty prefix.
    pub fn sibling(&self) -> Option<Prefix> {
        (self.len > 0).then(|| Prefix::new(self.bits ^ 1, self.len))
    }

    /// The half-open coordinate interval this prefix spans.
    pub fn to_interval(&self, l_bits: u32) -> Interval {
        debug_assert!(self.len <= l_bits && l_bits <= 63);
        let span = 1u64 << (l_bits - self.len);
        Interval::new(self.bits * span, (self.bits + 1) * span)
    }
}

impl fmt::Display for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("λ");
        }
        for i in (0..self.len).rev() {
            f.write_str(if self.bits >> i & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Prefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// A box of the dyadic lattice: one prefix per dimension on a shared bit budget.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicBox {
    bits: u32,
    prefixes: Vec<Prefix>,
}

impl DyadicBox {
    pub fn new(bits: u32, prefixes: Vec<Prefix>) -> Result<Self> {
        if bits == 0 || bits > 63 {
            return Err(Error::Schema(format!("bit budget {bits} out of range")));
        }
        if prefixes.is_empty() {
            return Err(Error::Schema("dyadic box needs at least one dimension".into()));
        }
        if let Some(p) = prefixes.iter().find(|p| p.len() > bits) {
            return Err(Error::Schema(format!(
                "prefix {p} longer than the {bits}-bit budget"
            )));
        }
        Ok(DyadicBox { bits, prefixes })
    }

    /// The box spanning the whole lattice: empty prefix in every dimension.
    pub fn all_empty(bits: u32, dim: usize) -> Self {
        DyadicBox::new(bits, vec![Prefix::EMPTY; dim]).expect("valid span box")
    }

    pub fn dim(&self) -> usize {
        self.prefixes.len()
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn prefixes(&self) -> &[Prefix] {
        &self.prefixes
    }

    pub fn prefix(&self, dim: usize) -> Prefix {
        self.prefixes[dim]
    }

    /// Copy of this box with one prefix replaced.
    pub fn with_prefix(&self, dim: usize, p: Prefix) -> DyadicBox {
        let mut prefixes = self.prefixes.clone();
        prefixes[dim] = p;
        DyadicBox { bits: self.bits, prefixes }
    }

    pub fn contains_point(&self, p: &Point) -> Result<bool> {
        if p.dim() != self.dim() {
            return Err(Error::Schema(format!(
                "point has {} dimensions, box has {}",
                p.dim(),
                self.dim()
            )));
        }
        if let Some(&c) = p.coords.iter().find(|&&c| c >= 1u64 << self.bits) {
            return Err(Error::Schema(format!(
                "coordinate {c} does not fit in {} bits",
                self.bits
            )));
        }
        Ok(self
            .prefixes
            .iter()
            .zip(&p.coords)
            .all(|(pre, &c)| pre.matches_coord(c, self.bits)))
    }

    pub fn contains_box(&self, inner: &DyadicBox) -> Result<bool> {
        if inner.dim() != self.dim() || inner.bits != self.bits {
            return Err(Error::Schema(
                "box containment requires matching dimensions and bit budgets".into(),
            ));
        }
        Ok(self
            .prefixes
            .iter()
            .zip(&inner.prefixes)
            .all(|(a, b)| a.contains(b)))
    }

    /// The axis-aligned box this dyadic box denotes.
    pub fn to_axis(&self) -> AxisBox {
        AxisBox::new(
            self.prefixes
                .iter()
                .map(|p| p.to_interval(self.bits))
                .collect(),
        )
    }

    /// Number of lattice points inside the box.
    pub fn lattice_volume(&self) -> i128 {
        self.prefixes
            .iter()
            .map(|p| (1i128) << (self.bits - p.len()))
            .product()
    }

    /// Embeds a table-local box into the global attribute space: local
    /// prefixes land on `attrs`, all other dimensions span fully.
    pub fn lift(&self, attrs: &[usize], global_dim: usize) -> Result<DyadicBox> {
        if attrs.len() != self.dim() {
            return Err(Error::Schema(format!(
                "box has {} dimensions but table binds {} attributes",
                self.dim(),
                attrs.len()
            )));
        }
        let mut prefixes = vec![Prefix::EMPTY; global_dim];
        for (&a, &p) in attrs.iter().zip(&self.prefixes) {
            if a >= global_dim {
                return Err(Error::Schema(format!(
                    "attribute index {a} out of range for arity {global_dim}"
                )));
            }
            prefixes[a] = p;
        }
        DyadicBox::new(self.bits, prefixes)
    }
}

impl fmt::Debug for DyadicBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, p) in self.prefixes.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// Every dyadic box that contains `p` with non-trivial prefixes confined to
/// `dims`: each listed dimension ranges over the `L+1` prefixes of its
/// coordinate, every other dimension is the empty prefix. Exactly
/// `(L+1)^|dims|` boxes, in a fixed odometer order.
pub fn enumerate_containing(p: &Point, bits: u32, dims: &[usize]) -> Vec<DyadicBox> {
    assert!(!dims.is_empty(), "enumerate_containing needs at least one dimension");
    assert!(dims.iter().all(|&d| d < p.dim()));
    let mut out = Vec::with_capacity((bits as usize + 1).pow(dims.len() as u32));
    let mut lens = vec![0u32; dims.len()];
    loop {
        let mut prefixes = vec![Prefix::EMPTY; p.dim()];
        for (i, &d) in dims.iter().enumerate() {
            prefixes[d] = Prefix::of_coord(p.coords[d], bits, lens[i]);
        }
        out.push(DyadicBox::new(bits, prefixes).expect("valid enumerated box"));
        let mut i = dims.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if lens[i] < bits {
                lens[i] += 1;
                break;
            }
            lens[i] = 0;
        }
    }
}
