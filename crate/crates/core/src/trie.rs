//! Tries over serialized dyadic boxes, and the on-disk index format.
//!
//! A box serializes dimension by dimension: the prefix bits (or `λ` for the
//! empty prefix), with commas between dimensions. The trie alphabet is
//! `{0, 1, λ, ,}`; a coverage query walks every root-to-terminal path that is
//! compatible with the probe point, so it touches at most `(L+1)^d` paths.

use std::io;

use crate::dyadic::{DyadicBox, Prefix};
use crate::error::{Error, Result};
use crate::geom::Point;
use crate::schema::JoinSchema;

const SYM_ZERO: usize = 0;
const SYM_ONE: usize = 1;
const SYM_LAMBDA: usize = 2;
const SYM_SEP: usize = 3;
const UNSET: u32 = u32::MAX;

/// The canonical string form of a box, e.g. `00,λ,1`.
pub fn serialize_box(b: &DyadicBox) -> String {
    let mut s = String::new();
    for (i, p) in b.prefixes().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&p.to_string());
    }
    s
}

/// Parses the string form; `_` is accepted as an ASCII spelling of `λ`.
pub fn parse_box(s: &str, bits: u32) -> Result<DyadicBox> {
    let mut prefixes = Vec::new();
    for token in s.split(',') {
        if token == "λ" || token == "_" {
            prefixes.push(Prefix::EMPTY);
            continue;
        }
        if token.is_empty() || token.len() as u32 > bits {
            return Err(Error::Index(format!("bad prefix {token:?} in box {s:?}")));
        }
        let mut v = 0u64;
        for c in token.chars() {
            match c {
                '0' => v <<= 1,
                '1' => v = v << 1 | 1,
                _ => return Err(Error::Index(format!("bad prefix {token:?} in box {s:?}"))),
            }
        }
        prefixes.push(Prefix::new(v, token.len() as u32));
    }
    DyadicBox::new(bits, prefixes).map_err(|e| Error::Index(e.to_string()))
}

#[derive(Clone)]
struct Node {
    children: [u32; 4],
    terminal: bool,
}

impl Node {
    fn new() -> Self {
        Node { children: [UNSET; 4], terminal: false }
    }

    fn child(&self, sym: usize) -> Option<usize> {
        let c = self.children[sym];
        (c != UNSET).then_some(c as usize)
    }
}

/// Arena trie holding the serialized boxes of one table.
pub struct BoxTrie {
    bits: u32,
    arity: usize,
    nodes: Vec<Node>,
    len: usize,
}

/// Mutable state threaded through a coverage probe.
struct Probe<'a> {
    coords: &'a [u64],
    prefixes: Vec<Prefix>,
    out: Vec<DyadicBox>,
}

impl BoxTrie {
    pub fn new(bits: u32, arity: usize) -> Self {
        BoxTrie { bits, arity, nodes: vec![Node::new()], len: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn symbols(b: &DyadicBox) -> Vec<usize> {
        let mut out = Vec::new();
        for (i, p) in b.prefixes().iter().enumerate() {
            if i > 0 {
                out.push(SYM_SEP);
            }
            if p.is_empty() {
                out.push(SYM_LAMBDA);
            } else {
                for k in (0..p.len()).rev() {
                    out.push(if p.bits() >> k & 1 == 1 { SYM_ONE } else { SYM_ZERO });
                }
            }
        }
        out
    }

    /// Inserts a box; returns whether it was newly added.
    pub fn insert(&mut self, b: &DyadicBox) -> Result<bool> {
        if b.dim() != self.arity || b.bits() != self.bits {
            return Err(Error::Index(format!(
                "box {b:?} does not match a {}-dimension, {}-bit trie",
                self.arity, self.bits
            )));
        }
        let mut node = 0usize;
        for sym in Self::symbols(b) {
            node = match self.nodes[node].child(sym) {
                Some(c) => c,
                None => {
                    let c = self.nodes.len();
                    self.nodes.push(Node::new());
                    self.nodes[node].children[sym] = c as u32;
                    c
                }
            };
        }
        let fresh = !self.nodes[node].terminal;
        self.nodes[node].terminal = true;
        self.len += fresh as usize;
        Ok(fresh)
    }

    /// Exact membership; subsumed boxes do not count.
    pub fn contains(&self, b: &DyadicBox) -> bool {
        if b.dim() != self.arity || b.bits() != self.bits {
            return false;
        }
        let mut node = 0usize;
        for sym in Self::symbols(b) {
            match self.nodes[node].child(sym) {
                Some(c) => node = c,
                None => return false,
            }
        }
        self.nodes[node].terminal
    }

    /// Every stored box that contains the point, in trie path order.
    pub fn covering(&self, coords: &[u64]) -> Vec<DyadicBox> {
        assert_eq!(coords.len(), self.arity, "probe arity mismatch");
        debug_assert!(coords.iter().all(|&c| c < 1u64 << self.bits));
        let mut probe =
            Probe { coords, prefixes: Vec::with_capacity(self.arity), out: Vec::new() };
        if self.len > 0 {
            self.cover_dfs(0, 0, 0, 0, &mut probe);
        }
        probe.out
    }

    fn cover_dfs(&self, node: usize, dim: usize, plen: u32, pbits: u64, probe: &mut Probe) {
        if plen == 0 {
            if let Some(c) = self.nodes[node].child(SYM_LAMBDA) {
                probe.prefixes.push(Prefix::EMPTY);
                self.end_dim(c, dim, probe);
                probe.prefixes.pop();
            }
        } else {
            probe.prefixes.push(Prefix::new(pbits, plen));
            self.end_dim(node, dim, probe);
            probe.prefixes.pop();
        }
        if plen < self.bits {
            let bit = probe.coords[dim] >> (self.bits - 1 - plen) & 1;
            if let Some(c) = self.nodes[node].child(bit as usize) {
                self.cover_dfs(c, dim, plen + 1, pbits << 1 | bit, probe);
            }
        }
    }

    fn end_dim(&self, node: usize, dim: usize, probe: &mut Probe) {
        if dim + 1 == self.arity {
            if self.nodes[node].terminal {
                let b = DyadicBox::new(self.bits, probe.prefixes.clone())
                    .expect("stored box is valid");
                probe.out.push(b);
            }
        } else if let Some(c) = self.nodes[node].child(SYM_SEP) {
            self.cover_dfs(c, dim + 1, 0, 0, probe);
        }
    }

    /// All stored boxes in symbol-lexicographic path order; depends only on
    /// the stored set, not on insertion order.
    pub fn boxes(&self) -> Vec<DyadicBox> {
        let mut out = Vec::with_capacity(self.len);
        let mut prefixes = Vec::with_capacity(self.arity);
        self.collect(0, Slot::Fresh, &mut prefixes, &mut out);
        out
    }

    fn collect(
        &self,
        node: usize,
        slot: Slot,
        prefixes: &mut Vec<Prefix>,
        out: &mut Vec<DyadicBox>,
    ) {
        let nd = &self.nodes[node];
        if nd.terminal {
            let mut full = prefixes.clone();
            full.push(slot.finish());
            out.push(DyadicBox::new(self.bits, full).expect("stored box is valid"));
        }
        for sym in [SYM_ZERO, SYM_ONE, SYM_LAMBDA, SYM_SEP] {
            let Some(c) = nd.child(sym) else { continue };
            match sym {
                SYM_ZERO | SYM_ONE => {
                    let (len, bits) = slot.bits();
                    let next = Slot::Bits(len + 1, bits << 1 | (sym == SYM_ONE) as u64);
                    self.collect(c, next, prefixes, out);
                }
                SYM_LAMBDA => self.collect(c, Slot::Lambda, prefixes, out),
                _ => {
                    prefixes.push(slot.finish());
                    self.collect(c, Slot::Fresh, prefixes, out);
                    prefixes.pop();
                }
            }
        }
    }
}

/// Partial state of the dimension currently being read off the trie path.
#[derive(Clone, Copy)]
enum Slot {
    Fresh,
    Bits(u32, u64),
    Lambda,
}

impl Slot {
    fn bits(self) -> (u32, u64) {
        match self {
            Slot::Fresh => (0, 0),
            Slot::Bits(l, b) => (l, b),
            Slot::Lambda => panic!("bit after λ in trie path"),
        }
    }

    fn finish(self) -> Prefix {
        match self {
            Slot::Bits(l, b) => Prefix::new(b, l),
            Slot::Lambda => Prefix::EMPTY,
            Slot::Fresh => panic!("empty dimension in trie path"),
        }
    }
}

/// One indexed table: its trie plus the global attributes it binds.
pub struct IndexedTable {
    name: String,
    attrs: Vec<usize>,
    trie: BoxTrie,
}

impl IndexedTable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn attrs(&self) -> &[usize] {
        &self.attrs
    }

    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn len(&self) -> usize {
        self.trie.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trie.is_empty()
    }

    pub fn contains(&self, b: &DyadicBox) -> bool {
        self.trie.contains(b)
    }

    pub fn boxes(&self) -> Vec<DyadicBox> {
        self.trie.boxes()
    }
}

/// The gap boxes of every table, indexed for point-coverage probes.
pub struct GapBoxIndex {
    arity: usize,
    bits: u32,
    tables: Vec<IndexedTable>,
}

impl GapBoxIndex {
    /// Indexes per-table gap boxes; `boxes[i]` belongs to `schema.tables()[i]`.
    pub fn build(schema: &JoinSchema, boxes: &[Vec<DyadicBox>]) -> Result<GapBoxIndex> {
        if boxes.len() != schema.tables().len() {
            return Err(Error::Index(format!(
                "{} box lists for {} tables",
                boxes.len(),
                schema.tables().len()
            )));
        }
        let mut tables = Vec::with_capacity(boxes.len());
        for (t, list) in schema.tables().iter().zip(boxes) {
            let mut trie = BoxTrie::new(schema.bits(), t.arity());
            for b in list {
                trie.insert(b)?;
            }
            tables.push(IndexedTable { name: t.name.clone(), attrs: t.attrs.clone(), trie });
        }
        Ok(GapBoxIndex { arity: schema.arity(), bits: schema.bits(), tables })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn domain_size(&self) -> u64 {
        1u64 << self.bits
    }

    /// Number of points in the full lattice, `n^d`.
    pub fn lattice_volume(&self) -> i128 {
        1i128 << (self.bits * self.arity as u32)
    }

    pub fn tables(&self) -> &[IndexedTable] {
        &self.tables
    }

    /// Total stored boxes across tables.
    pub fn total_boxes(&self) -> usize {
        self.tables.iter().map(IndexedTable::len).sum()
    }

    /// Every stored box covering the global point, as (table index, local box)
    /// pairs in table order.
    pub fn covering_boxes(&self, p: &Point) -> Result<Vec<(usize, DyadicBox)>> {
        if p.dim() != self.arity {
            return Err(Error::Schema(format!(
                "point has {} dimensions, index has {}",
                p.dim(),
                self.arity
            )));
        }
        if let Some(&c) = p.coords.iter().find(|&&c| c >= 1u64 << self.bits) {
            return Err(Error::Schema(format!(
                "coordinate {c} does not fit in {} bits",
                self.bits
            )));
        }
        let mut out = Vec::new();
        for (i, t) in self.tables.iter().enumerate() {
            let local: Vec<u64> = t.attrs.iter().map(|&a| p.coords[a]).collect();
            out.extend(t.trie.covering(&local).into_iter().map(|b| (i, b)));
        }
        Ok(out)
    }

    /// Writes the index in its line-oriented file format (`_` stands for `λ`).
    pub fn write_to<W: io::Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "welltris-index v1 d={} L={}", self.arity, self.bits)?;
        for t in &self.tables {
            let attrs: Vec<String> = t.attrs.iter().map(usize::to_string).collect();
            writeln!(w, "table {} attrs={}", t.name, attrs.join(","))?;
            for b in t.trie.boxes() {
                writeln!(w, "{}", serialize_box(&b).replace('λ', "_"))?;
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("index file is UTF-8")
    }

    /// Parses the file format produced by [`GapBoxIndex::write_to`].
    pub fn parse(text: &str) -> Result<GapBoxIndex> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::Index("index file is empty".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("welltris-index") || parts.next() != Some("v1") {
            return Err(Error::Index(format!("bad index header: {header}")));
        }
        let (mut arity, mut bits) = (None, None);
        for p in parts {
            if let Some(v) = p.strip_prefix("d=") {
                arity = v.parse::<usize>().ok();
            } else if let Some(v) = p.strip_prefix("L=") {
                bits = v.parse::<u32>().ok();
            }
        }
        let (arity, bits) = match (arity, bits) {
            (Some(d), Some(l)) if d > 0 && l > 0 && l <= 63 => (d, l),
            _ => return Err(Error::Index(format!("bad index header: {header}"))),
        };
        let mut tables: Vec<IndexedTable> = Vec::new();
        for (ln, line) in lines {
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("table ") {
                let (name, attrs_text) = rest
                    .rsplit_once(" attrs=")
                    .ok_or_else(|| Error::Index(format!("line {}: bad table line", ln + 1)))?;
                let attrs = attrs_text
                    .split(',')
                    .map(|s| s.parse::<usize>().map_err(|_| ()))
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Index(format!("line {}: bad attribute list", ln + 1)))?;
                if attrs.is_empty() || !attrs.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Index(format!(
                        "line {}: attributes must be strictly increasing",
                        ln + 1
                    )));
                }
                if attrs.iter().any(|&a| a >= arity) {
                    return Err(Error::Index(format!(
                        "line {}: attribute index out of range",
                        ln + 1
                    )));
                }
                if tables.iter().any(|t| t.name == name) {
                    return Err(Error::Index(format!("line {}: duplicate table {name}", ln + 1)));
                }
                let trie = BoxTrie::new(bits, attrs.len());
                tables.push(IndexedTable { name: name.to_owned(), attrs, trie });
            } else {
                let t = tables
                    .last_mut()
                    .ok_or_else(|| Error::Index(format!("line {}: box before any table", ln + 1)))?;
                let b = parse_box(line, bits)?;
                t.trie.insert(&b)?;
            }
        }
        Ok(GapBoxIndex { arity, bits, tables })
    }
}
