//! CSV ingestion: parse raw tables, build a shared domain encoding, and
//! encode relations onto the lattice.
//!
//! The CSV dialect is deliberately small: UTF-8, comma separators, one header
//! row, no quoting or escaping. Values are opaque tokens.

use std::collections::HashMap;
use std::io;
use std::path::Path;

use crate::error::{Error, Result};
use crate::schema::{JoinSchema, TableSchema};

/// A parsed CSV table: header names plus string-valued rows.
#[derive(Debug, Clone)]
pub struct RawTable {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl RawTable {
    /// Parses CSV text. Every row must have exactly as many fields as the header.
    pub fn parse_csv(name: impl Into<String>, text: &str) -> Result<RawTable> {
        let name = name.into();
        let mut lines = text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l));
        let header = lines
            .next()
            .filter(|l| !l.is_empty())
            .ok_or_else(|| Error::Ingest(format!("table {name}: empty header")))?;
        let columns: Vec<String> = header.split(',').map(str::to_owned).collect();
        validate_columns(&name, &columns)?;
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(str::to_owned).collect();
            if fields.len() != columns.len() {
                return Err(Error::Ingest(format!(
                    "table {name}, data row {}: expected {} fields, found {}",
                    i + 1,
                    columns.len(),
                    fields.len()
                )));
            }
            rows.push(fields);
        }
        Ok(RawTable { name, columns, rows })
    }

    /// Reads and parses a CSV file; the table is named after the file stem.
    pub fn from_path(path: &Path) -> Result<RawTable> {
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| Error::Ingest(format!("cannot derive a table name from {path:?}")))?
            .to_owned();
        let text = std::fs::read_to_string(path)?;
        RawTable::parse_csv(name, &text)
    }
}

fn validate_columns(table: &str, columns: &[String]) -> Result<()> {
    for (i, c) in columns.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::Ingest(format!("table {table}: empty column name")));
        }
        if columns[..i].contains(c) {
            return Err(Error::Ingest(format!("table {table}: duplicate column {c}")));
        }
    }
    Ok(())
}

/// Dense value-to-code dictionaries, one per global attribute, shared by every
/// table that binds the attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainEncoding {
    attributes: Vec<String>,
    values: Vec<Vec<String>>,
    codes: Vec<HashMap<String, u64>>,
    bits: u32,
}

impl DomainEncoding {
    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn domain_size(&self) -> u64 {
        1u64 << self.bits
    }

    pub fn encode(&self, attr: usize, value: &str) -> Option<u64> {
        self.codes.get(attr)?.get(value).copied()
    }

    pub fn decode(&self, attr: usize, code: u64) -> Option<&str> {
        self.values.get(attr)?.get(code as usize).map(String::as_str)
    }

    /// Writes the dictionary in its line-oriented file format.
    pub fn write_to<W: io::Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "welltris-encoding v1 attrs={} L={}",
            self.attributes.len(),
            self.bits
        )?;
        for (name, vals) in self.attributes.iter().zip(&self.values) {
            writeln!(w, "attr {name} values={}", vals.len())?;
            for v in vals {
                writeln!(w, "{v}")?;
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("encoding file is UTF-8")
    }

    /// Parses the file format produced by [`DomainEncoding::write_to`].
    pub fn parse(text: &str) -> Result<DomainEncoding> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Index("encoding file is empty".into()))?;
        let mut attr_count = None;
        let mut bits = None;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("welltris-encoding") || parts.next() != Some("v1") {
            return Err(Error::Index(format!("bad encoding header: {header}")));
        }
        for p in parts {
            if let Some(v) = p.strip_prefix("attrs=") {
                attr_count = v.parse::<usize>().ok();
            } else if let Some(v) = p.strip_prefix("L=") {
                bits = v.parse::<u32>().ok();
            }
        }
        let (attr_count, bits) = match (attr_count, bits) {
            (Some(a), Some(b)) if a > 0 && b > 0 => (a, b),
            _ => return Err(Error::Index(format!("bad encoding header: {header}"))),
        };
        let mut attributes = Vec::with_capacity(attr_count);
        let mut values = Vec::with_capacity(attr_count);
        let mut codes = Vec::with_capacity(attr_count);
        for _ in 0..attr_count {
            let line = lines
                .next()
                .ok_or_else(|| Error::Index("encoding file truncated".into()))?;
            let rest = line
                .strip_prefix("attr ")
                .ok_or_else(|| Error::Index(format!("expected attr line, found: {line}")))?;
            let (name, count) = rest
                .rsplit_once(" values=")
                .ok_or_else(|| Error::Index(format!("bad attr line: {line}")))?;
            let count: usize = count
                .parse()
                .map_err(|_| Error::Index(format!("bad value count in: {line}")))?;
            let mut vals = Vec::with_capacity(count);
            let mut map = HashMap::with_capacity(count);
            for i in 0..count {
                let v = lines
                    .next()
                    .ok_or_else(|| Error::Index("encoding file truncated".into()))?;
                vals.push(v.to_owned());
                map.insert(v.to_owned(), i as u64);
            }
            attributes.push(name.to_owned());
            values.push(vals);
            codes.push(map);
        }
        Ok(DomainEncoding { attributes, values, codes, bits })
    }
}

/// A table encoded onto the lattice: rows are code vectors in ascending global
/// attribute order, deduplicated and sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub schema: TableSchema,
    bits: u32,
    rows: Vec<Vec<u64>>,
}

impl Relation {
    /// Validates coordinates against the bit budget, then sorts and
    /// deduplicates the rows.
    pub fn new(schema: TableSchema, bits: u32, mut rows: Vec<Vec<u64>>) -> Result<Relation> {
        let n = 1u64 << bits;
        for row in &rows {
            if row.len() != schema.arity() {
                return Err(Error::Schema(format!(
                    "table {}: row width {} does not match arity {}",
                    schema.name,
                    row.len(),
                    schema.arity()
                )));
            }
            if let Some(&c) = row.iter().find(|&&c| c >= n) {
                return Err(Error::Schema(format!(
                    "table {}: code {c} exceeds domain size {n}",
                    schema.name
                )));
            }
        }
        rows.sort_unstable();
        rows.dedup();
        let schema = TableSchema { row_count: rows.len(), ..schema };
        Ok(Relation { schema, bits, rows })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn contains_row(&self, row: &[u64]) -> bool {
        self.rows.binary_search_by(|r| r.as_slice().cmp(row)).is_ok()
    }
}

/// Builds the join schema and the shared dictionaries from raw tables.
///
/// Global attribute order is lexicographic by name. Codes are dense and
/// assigned in first-seen order scanning tables, then rows, then columns. The
/// domain size is the smallest power of two that fits every dictionary, at
/// least 2.
pub fn build_encoding(tables: &[RawTable]) -> Result<(JoinSchema, DomainEncoding)> {
    if tables.is_empty() {
        return Err(Error::Ingest("no input tables".into()));
    }
    let mut attributes: Vec<String> = tables
        .iter()
        .flat_map(|t| t.columns.iter().cloned())
        .collect();
    attributes.sort_unstable();
    attributes.dedup();
    let attr_index: HashMap<&str, usize> = attributes
        .iter()
        .enumerate()
        .map(|(i, a)| (a.as_str(), i))
        .collect();

    let mut values: Vec<Vec<String>> = vec![Vec::new(); attributes.len()];
    let mut codes: Vec<HashMap<String, u64>> = vec![HashMap::new(); attributes.len()];
    for t in tables {
        validate_columns(&t.name, &t.columns)?;
        let cols: Vec<usize> = t.columns.iter().map(|c| attr_index[c.as_str()]).collect();
        for row in &t.rows {
            if row.len() != t.columns.len() {
                return Err(Error::Ingest(format!(
                    "table {}: ragged row of width {}",
                    t.name,
                    row.len()
                )));
            }
            for (&attr, value) in cols.iter().zip(row) {
                if !codes[attr].contains_key(value) {
                    codes[attr].insert(value.clone(), values[attr].len() as u64);
                    values[attr].push(value.clone());
                }
            }
        }
    }

    let max_distinct = values.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let n = (max_distinct as u64).next_power_of_two().max(2);
    let bits = n.trailing_zeros();

    let table_schemas = tables
        .iter()
        .map(|t| {
            let mut attrs: Vec<usize> =
                t.columns.iter().map(|c| attr_index[c.as_str()]).collect();
            attrs.sort_unstable();
            TableSchema::new(t.name.clone(), attrs, t.rows.len())
        })
        .collect::<Result<Vec<_>>>()?;
    let schema = JoinSchema::new(attributes.clone(), bits, table_schemas)?;
    Ok((schema, DomainEncoding { attributes, values, codes, bits }))
}

/// Encodes one raw table against a prepared schema and dictionary. Columns are
/// reordered to ascending global attribute index.
pub fn encode_relation(
    raw: &RawTable,
    schema: &JoinSchema,
    enc: &DomainEncoding,
) -> Result<Relation> {
    let table = schema
        .tables()
        .iter()
        .find(|t| t.name == raw.name)
        .ok_or_else(|| Error::Ingest(format!("table {} is not in the schema", raw.name)))?;
    let col_attr: Vec<usize> = raw
        .columns
        .iter()
        .map(|c| {
            enc.attributes
                .iter()
                .position(|a| a == c)
                .ok_or_else(|| Error::Ingest(format!("unknown attribute {c}")))
        })
        .collect::<Result<Vec<_>>>()?;
    // Position of each schema attribute within the raw column list.
    let positions: Vec<usize> = table
        .attrs
        .iter()
        .map(|&a| {
            col_attr
                .iter()
                .position(|&c| c == a)
                .ok_or_else(|| {
                    Error::Ingest(format!(
                        "table {}: schema attribute {} missing from columns",
                        raw.name, schema.attributes()[a]
                    ))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(raw.rows.len());
    for row in &raw.rows {
        let mut coded = Vec::with_capacity(table.arity());
        for (&pos, &attr) in positions.iter().zip(&table.attrs) {
            let value = &row[pos];
            let code = enc.encode(attr, value).ok_or_else(|| {
                Error::Ingest(format!(
                    "table {}: value {value:?} is not in the dictionary for {}",
                    raw.name,
                    schema.attributes()[attr]
                ))
            })?;
            coded.push(code);
        }
        rows.push(coded);
    }
    Relation::new(table.clone(), schema.bits(), rows)
}
