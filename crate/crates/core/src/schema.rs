//! Categorical microdata: variables with finite value sets, role assignments,
//! datasets as ordered record lists, and the enumerable dataset domain.
//!
//! Records are identified by position. A "record change" is always an in-place
//! edit; insertion and deletion are outside the model, which keeps the
//! record-level Hamming distance total on same-size datasets.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Whether a variable's values are shuffled by a swapping mechanism or held
/// in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Swapping,
    Holding,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
    pub role: Role,
    /// Matching variables stratify swapping; only holding variables may match.
    pub matching: bool,
}

impl Variable {
    pub fn new(name: &str, values: &[&str], role: Role, matching: bool) -> Self {
        Variable {
            name: name.to_string(),
            values: values.iter().map(|v| v.to_string()).collect(),
            role,
            matching,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    variables: Vec<Variable>,
}

impl Schema {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidSchema("schema has no variables".into()));
        }
        let mut names = BTreeSet::new();
        for var in &variables {
            if var.values.is_empty() {
                return Err(Error::InvalidSchema(format!(
                    "variable {:?} has no values",
                    var.name
                )));
            }
            if var.values.len() > u16::MAX as usize {
                return Err(Error::InvalidSchema(format!(
                    "variable {:?} has too many values",
                    var.name
                )));
            }
            let distinct: BTreeSet<_> = var.values.iter().collect();
            if distinct.len() != var.values.len() {
                return Err(Error::InvalidSchema(format!(
                    "variable {:?} has duplicate values",
                    var.name
                )));
            }
            if !names.insert(var.name.clone()) {
                return Err(Error::InvalidSchema(format!(
                    "duplicate variable name {:?}",
                    var.name
                )));
            }
            if var.matching && var.role != Role::Holding {
                return Err(Error::InvalidSchema(format!(
                    "matching variable {:?} must have the holding role",
                    var.name
                )));
            }
        }
        Ok(Schema { variables })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }

    pub fn value_index(&self, var: usize, value: &str) -> Option<u16> {
        self.variables[var]
            .values
            .iter()
            .position(|v| v == value)
            .map(|i| i as u16)
    }

    /// Indices of swapping variables, in declaration order.
    pub fn swapping_vars(&self) -> Vec<usize> {
        self.indices(|v| v.role == Role::Swapping)
    }

    pub fn holding_vars(&self) -> Vec<usize> {
        self.indices(|v| v.role == Role::Holding)
    }

    pub fn matching_vars(&self) -> Vec<usize> {
        self.indices(|v| v.matching)
    }

    fn indices(&self, pred: impl Fn(&Variable) -> bool) -> Vec<usize> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| pred(v))
            .map(|(i, _)| i)
            .collect()
    }

    /// Number of distinct records expressible under this schema.
    pub fn record_space_size(&self) -> u128 {
        self.variables
            .iter()
            .fold(1u128, |acc, v| acc.saturating_mul(v.values.len() as u128))
    }

    /// Every expressible record, in lexicographic value-index order.
    pub fn record_space(&self) -> Vec<Vec<u16>> {
        let mut out = Vec::new();
        let mut current = vec![0u16; self.variables.len()];
        loop {
            out.push(current.clone());
            let mut pos = self.variables.len();
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if (current[pos] as usize) + 1 < self.variables[pos].values.len() {
                    current[pos] += 1;
                    current[pos + 1..].fill(0);
                    break;
                }
            }
        }
    }
}

/// Percent-encodes the bytes that the canonical serializations use as
/// separators, so arbitrary value strings cannot collide.
pub(crate) fn escape_value(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '%' => out.push_str("%25"),
            ',' => out.push_str("%2C"),
            ';' => out.push_str("%3B"),
            '=' => out.push_str("%3D"),
            ':' => out.push_str("%3A"),
            '\n' => out.push_str("%0A"),
            _ => out.push(ch),
        }
    }
    out
}

/// An ordered list of records conforming to a schema. Position is meaningful:
/// swapping moves values between positions, never records themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    schema: Arc<Schema>,
    records: Vec<Vec<u16>>,
}

impl Dataset {
    pub fn new(schema: Arc<Schema>, records: Vec<Vec<u16>>) -> Result<Self> {
        for (i, rec) in records.iter().enumerate() {
            if rec.len() != schema.len() {
                return Err(Error::InvalidRecord {
                    index: i,
                    detail: format!("expected {} fields, got {}", schema.len(), rec.len()),
                });
            }
            for (v, &val) in rec.iter().enumerate() {
                if val as usize >= schema.variables()[v].values.len() {
                    return Err(Error::InvalidRecord {
                        index: i,
                        detail: format!(
                            "value index {val} out of range for variable {:?}",
                            schema.variables()[v].name
                        ),
                    });
                }
            }
        }
        Ok(Dataset { schema, records })
    }

    /// Builds a dataset from value names, reporting the first offending record.
    pub fn from_names(schema: Arc<Schema>, rows: &[Vec<&str>]) -> Result<Self> {
        let mut records = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != schema.len() {
                return Err(Error::InvalidRecord {
                    index: i,
                    detail: format!("expected {} fields, got {}", schema.len(), row.len()),
                });
            }
            let mut rec = Vec::with_capacity(row.len());
            for (v, value) in row.iter().enumerate() {
                let idx = schema.value_index(v, value).ok_or_else(|| Error::InvalidRecord {
                    index: i,
                    detail: format!(
                        "value {:?} not in the value set of variable {:?}",
                        value,
                        schema.variables()[v].name
                    ),
                })?;
                rec.push(idx);
            }
            records.push(rec);
        }
        Ok(Dataset { schema, records })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn records(&self) -> &[Vec<u16>] {
        &self.records
    }

    pub fn record(&self, i: usize) -> &[u16] {
        &self.records[i]
    }

    pub fn value_name(&self, record: usize, var: usize) -> &str {
        &self.schema.variables()[var].values[self.records[record][var] as usize]
    }

    /// The tuple of swapping-variable values at a position; swapping moves
    /// these as a block.
    pub fn swap_block(&self, record: usize, swap_vars: &[usize]) -> Vec<u16> {
        swap_vars.iter().map(|&v| self.records[record][v]).collect()
    }

    pub(crate) fn set_swap_block(&mut self, record: usize, swap_vars: &[usize], block: &[u16]) {
        for (&v, &val) in swap_vars.iter().zip(block) {
            self.records[record][v] = val;
        }
    }

    pub(crate) fn set_value(&mut self, record: usize, var: usize, value: u16) {
        self.records[record][var] = value;
    }

    /// Canonical one-line serialization: fields joined by `,`, records by `;`,
    /// separator bytes percent-encoded. Equal datasets serialize identically.
    pub fn canonical_label(&self) -> String {
        self.records
            .iter()
            .map(|rec| {
                rec.iter()
                    .enumerate()
                    .map(|(v, &val)| escape_value(&self.schema.variables()[v].values[val as usize]))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    fn check_comparable(&self, other: &Dataset) -> Result<()> {
        if self.schema.as_ref() != other.schema.as_ref() {
            return Err(Error::SchemaMismatch);
        }
        if self.n() != other.n() {
            return Err(Error::SizeMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }
}

/// Number of positions at which two same-size datasets differ in at least one
/// variable.
pub fn hamming_distance(x: &Dataset, y: &Dataset) -> Result<u64> {
    x.check_comparable(y)?;
    Ok(x.records
        .iter()
        .zip(&y.records)
        .filter(|(a, b)| a != b)
        .count() as u64)
}

/// Number of (position, variable) cells at which two datasets differ. The
/// sub-record refinement of [`hamming_distance`].
pub fn cell_distance(x: &Dataset, y: &Dataset) -> Result<u64> {
    x.check_comparable(y)?;
    Ok(x.records
        .iter()
        .zip(&y.records)
        .map(|(a, b)| a.iter().zip(b).filter(|(p, q)| p != q).count() as u64)
        .sum())
}

/// Size policy of a dataset domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizePolicy {
    FixedN(usize),
    AnyUpTo(usize),
}

/// The set of datasets eligible for protection: everything conforming to the
/// schema under the size policy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub schema: Arc<Schema>,
    pub size_policy: SizePolicy,
}

impl Domain {
    pub fn fixed(schema: Arc<Schema>, n: usize) -> Self {
        Domain {
            schema,
            size_policy: SizePolicy::FixedN(n),
        }
    }

    pub fn contains(&self, x: &Dataset) -> bool {
        if x.schema().as_ref() != self.schema.as_ref() {
            return false;
        }
        match self.size_policy {
            SizePolicy::FixedN(n) => x.n() == n,
            SizePolicy::AnyUpTo(cap) => x.n() <= cap,
        }
    }

    /// Exhaustively enumerates the domain, each member exactly once. Errors
    /// when the member count would exceed `cap`.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<Dataset>> {
        let sizes: Vec<usize> = match self.size_policy {
            SizePolicy::FixedN(n) => vec![n],
            SizePolicy::AnyUpTo(max) => (0..=max).collect(),
        };
        let space = self.schema.record_space_size();
        let mut total: u128 = 0;
        for &n in &sizes {
            let members = space.checked_pow(n as u32).unwrap_or(u128::MAX);
            total = total.saturating_add(members);
        }
        if total > cap as u128 {
            return Err(Error::CapExceeded {
                what: "domain enumeration".into(),
                estimate: total,
                cap: cap as u128,
            });
        }
        let records = self.schema.record_space();
        let mut out = Vec::new();
        for &n in &sizes {
            let mut idx = vec![0usize; n];
            loop {
                let recs: Vec<Vec<u16>> = idx.iter().map(|&i| records[i].clone()).collect();
                out.push(Dataset::new(self.schema.clone(), recs)?);
                if !odometer_next(&mut idx, records.len()) {
                    break;
                }
            }
        }
        Ok(out)
    }
}

/// Advances a mixed-radix counter with a uniform base; false once exhausted.
pub(crate) fn odometer_next(idx: &mut [usize], base: usize) -> bool {
    for pos in (0..idx.len()).rev() {
        if idx[pos] + 1 < base {
            idx[pos] += 1;
            idx[pos + 1..].fill(0);
            return true;
        }
    }
    false
}
