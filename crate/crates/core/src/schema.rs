//! Join schemas: global attribute order, per-dimension bit budget, and the
//! attribute sets of the participating tables.

use crate::error::{Error, Result};

/// Largest supported per-dimension bit width.
pub const MAX_BITS: u32 = 62;

/// Largest supported total bit width `d * L`; keeps lattice volumes in `i128`.
pub const MAX_TOTAL_BITS: u32 = 126;

/// One table of the join: its name and the global attribute indices it binds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableSchema {
    pub name: String,
    /// Global attribute indices, strictly increasing.
    pub attrs: Vec<usize>,
    pub row_count: usize,
}

impl TableSchema {
    pub fn new(name: impl Into<String>, attrs: Vec<usize>, row_count: usize) -> Result<Self> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(Error::Schema(format!(
                "table name {name:?} must be nonempty and contain no whitespace"
            )));
        }
        if attrs.is_empty() {
            return Err(Error::Schema(format!("table {name} binds no attributes")));
        }
        if !attrs.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Schema(format!(
                "table {name} attribute indices must be strictly increasing"
            )));
        }
        Ok(TableSchema { name, attrs, row_count })
    }

    /// Number of attributes the table binds.
    pub fn arity(&self) -> usize {
        self.attrs.len()
    }
}

/// The full join: attribute names in global order, the shared bit budget, and
/// the table layouts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinSchema {
    attributes: Vec<String>,
    bits: u32,
    tables: Vec<TableSchema>,
}

impl JoinSchema {
    /// Validates and assembles a schema. Attribute names must already be in
    /// global (lexicographic) order; every attribute must be bound by some table.
    pub fn new(attributes: Vec<String>, bits: u32, tables: Vec<TableSchema>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Schema("join binds no attributes".into()));
        }
        if !attributes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Schema(
                "attribute names must be unique and sorted".into(),
            ));
        }
        let d = attributes.len() as u32;
        if bits == 0 || bits > MAX_BITS || d * bits > MAX_TOTAL_BITS {
            return Err(Error::Schema(format!(
                "bit budget out of range: L={bits}, d={d} (need 1 <= L <= {MAX_BITS} and d*L <= {MAX_TOTAL_BITS})"
            )));
        }
        let mut bound = vec![false; attributes.len()];
        for t in &tables {
            for &a in &t.attrs {
                if a >= attributes.len() {
                    return Err(Error::Schema(format!(
                        "table {} references attribute index {a} out of range",
                        t.name
                    )));
                }
                bound[a] = true;
            }
        }
        if let Some(i) = bound.iter().position(|b| !b) {
            return Err(Error::Schema(format!(
                "attribute {} is bound by no table",
                attributes[i]
            )));
        }
        for (i, t) in tables.iter().enumerate() {
            if tables[..i].iter().any(|u| u.name == t.name) {
                return Err(Error::Schema(format!("duplicate table name {}", t.name)));
            }
        }
        Ok(JoinSchema { attributes, bits, tables })
    }

    /// Total number of join attributes.
    pub fn arity(&self) -> usize {
        self.attributes.len()
    }

    /// Bits per dimension.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Per-dimension domain size `n = 2^L`.
    pub fn domain_size(&self) -> u64 {
        1u64 << self.bits
    }

    /// Number of points in the full lattice, `n^d`.
    pub fn lattice_volume(&self) -> i128 {
        1i128 << (self.bits * self.arity() as u32)
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn tables(&self) -> &[TableSchema] {
        &self.tables
    }
}
