//! The statistics a swapping mechanism releases exactly, and the universe key
//! they induce.
//!
//! Swapping within matching strata keeps two contingency tables fixed: the
//! joint table over all holding variables, and the joint table over the
//! matching and swapping variables. Those two tables jointly determine the
//! marginals of all three variable groups, so they are the maximal statistics
//! stored here. Equal invariant values define membership in the same
//! universe.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mechanisms::{stratify, MechanismDescriptor};
use crate::schema::{escape_value, Dataset, Schema};
use crate::Caps;

/// One statistic released exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// A contingency table over a subset of variables. The empty subset is
    /// the record count.
    Table { variables: Vec<String> },
    /// The full position-indexed microdata. The degenerate extreme: every
    /// universe collapses to a single dataset.
    FullMicrodata,
}

/// The list of statistics whose equality defines a universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantSpec {
    pub statistics: Vec<StatisticKind>,
}

impl InvariantSpec {
    pub fn tables(variable_sets: Vec<Vec<String>>) -> Self {
        InvariantSpec {
            statistics: variable_sets
                .into_iter()
                .map(|variables| StatisticKind::Table { variables })
                .collect(),
        }
    }

    /// A copy with an extra statistic appended.
    pub fn with_statistic(&self, stat: StatisticKind) -> Self {
        let mut statistics = self.statistics.clone();
        statistics.push(stat);
        InvariantSpec { statistics }
    }
}

/// The statistics held fixed by permutation swapping under this schema's
/// roles: the joint table over all holding variables, and the joint table
/// over matching and swapping variables (the swapping marginal when the
/// matching set is empty).
pub fn derive_invariants(schema: &Schema) -> Result<InvariantSpec> {
    let swapping = schema.swapping_vars();
    if swapping.is_empty() {
        return Err(Error::InvalidParameter(
            "schema has no swapping variable".into(),
        ));
    }
    let name = |i: &usize| schema.variables()[*i].name.clone();
    let holding: Vec<String> = schema.holding_vars().iter().map(name).collect();
    let mut match_swap: Vec<usize> = schema.matching_vars();
    match_swap.extend(&swapping);
    match_swap.sort_unstable();
    let match_swap: Vec<String> = match_swap.iter().map(name).collect();
    Ok(InvariantSpec::tables(vec![holding, match_swap]))
}

/// An exact contingency table: a variable subset and its nonzero cell counts.
/// Cells not listed have count zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub variables: Vec<String>,
    pub cells: BTreeMap<Vec<String>, u64>,
}

impl ContingencyTable {
    pub fn total(&self) -> u64 {
        self.cells.values().sum()
    }
}

#[derive(Serialize, Deserialize)]
struct CellRepr {
    values: Vec<String>,
    count: u64,
}

#[derive(Serialize, Deserialize)]
struct TableRepr {
    variables: Vec<String>,
    cells: Vec<CellRepr>,
}

impl Serialize for ContingencyTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        TableRepr {
            variables: self.variables.clone(),
            cells: self
                .cells
                .iter()
                .map(|(values, &count)| CellRepr {
                    values: values.clone(),
                    count,
                })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ContingencyTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let repr = TableRepr::deserialize(deserializer)?;
        let mut cells = BTreeMap::new();
        for cell in repr.cells {
            if cell.values.len() != repr.variables.len() {
                return Err(D::Error::custom(format!(
                    "cell {:?} has {} values for {} variables",
                    cell.values,
                    cell.values.len(),
                    repr.variables.len()
                )));
            }
            if cells.insert(cell.values.clone(), cell.count).is_some() {
                return Err(D::Error::custom(format!("duplicate cell {:?}", cell.values)));
            }
        }
        Ok(ContingencyTable {
            variables: repr.variables,
            cells,
        })
    }
}

/// The structured `invariants.json` document: evaluated tables plus the run
/// manifest. Also the input format for reconstruction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TablesDocument {
    pub report_schema: String,
    pub n: usize,
    pub tables: Vec<ContingencyTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<serde_json::Value>,
}

/// Counts records by their value tuple on `variables`. The empty variable
/// list yields a single cell holding the record count.
pub fn evaluate_table(x: &Dataset, variables: &[String]) -> Result<ContingencyTable> {
    let indices: Vec<usize> = variables
        .iter()
        .map(|name| {
            x.schema()
                .var_index(name)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown variable {name:?}")))
        })
        .collect::<Result<_>>()?;
    let mut cells: BTreeMap<Vec<String>, u64> = BTreeMap::new();
    for i in 0..x.n() {
        let key: Vec<String> = indices
            .iter()
            .map(|&v| x.value_name(i, v).to_string())
            .collect();
        *cells.entry(key).or_default() += 1;
    }
    Ok(ContingencyTable {
        variables: variables.to_vec(),
        cells,
    })
}

/// The evaluated invariants in canonical text form. Equality of two values
/// means the datasets share a universe.
///
/// Wire format (UTF-8, newline-delimited, bit-exact): for each statistic in
/// spec order, a header line `table:<vars>` or `microdata:`, followed by
/// sorted `cellkey=count` lines (respectively `position:values` lines), with
/// separator bytes percent-encoded inside values. Zero cells are omitted, so
/// all empty datasets over a schema share one key.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InvariantValue {
    canonical: String,
}

impl InvariantValue {
    pub fn canonical_text(&self) -> &str {
        &self.canonical
    }

    /// SHA-256 of the canonical text, hex.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.canonical.as_bytes());
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Evaluates every statistic of `spec` on `x` and serializes canonically.
pub fn evaluate_invariants(x: &Dataset, spec: &InvariantSpec) -> Result<InvariantValue> {
    let mut out = String::new();
    for stat in &spec.statistics {
        match stat {
            StatisticKind::Table { variables } => {
                let table = evaluate_table(x, variables)?;
                out.push_str("table:");
                out.push_str(
                    &variables
                        .iter()
                        .map(|v| escape_value(v))
                        .collect::<Vec<_>>()
                        .join(","),
                );
                out.push('\n');
                for (key, count) in &table.cells {
                    let rendered: Vec<String> = key.iter().map(|v| escape_value(v)).collect();
                    out.push_str(&format!("{}={}\n", rendered.join(","), count));
                }
            }
            StatisticKind::FullMicrodata => {
                out.push_str("microdata:\n");
                for i in 0..x.n() {
                    let row: Vec<String> = (0..x.schema().len())
                        .map(|v| escape_value(x.value_name(i, v)))
                        .collect();
                    out.push_str(&format!("{i}:{}\n", row.join(",")));
                }
            }
        }
    }
    Ok(InvariantValue { canonical: out })
}

/// Evaluates only the table statistics, for structured output. Errors if the
/// spec contains a non-table statistic.
pub fn evaluate_contingency_tables(x: &Dataset, spec: &InvariantSpec) -> Result<Vec<ContingencyTable>> {
    spec.statistics
        .iter()
        .map(|stat| match stat {
            StatisticKind::Table { variables } => evaluate_table(x, variables),
            StatisticKind::FullMicrodata => Err(Error::InvalidParameter(
                "full-microdata statistic has no table form".into(),
            )),
        })
        .collect()
}

/// How an invariance check was performed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    /// Every support point of the exact output distribution was scanned.
    Exact,
    /// A fixed number of seeded samples was drawn.
    Sampling,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub holds: bool,
    pub mode: CheckMode,
    pub trials: u64,
    /// Canonical label of the first violating output, if any.
    pub counterexample: Option<String>,
}

/// Checks that a mechanism's outputs always share the input's invariant
/// value. Uses the exact support when the mechanism has an oracle, seeded
/// samples (seeds `0..trials`) otherwise.
pub fn check_invariance(
    mech: &MechanismDescriptor,
    x: &Dataset,
    spec: &InvariantSpec,
    trials: u64,
    caps: &Caps,
) -> Result<InvarianceReport> {
    let reference = evaluate_invariants(x, spec)?;
    if mech.has_exact_oracle() {
        for (output, _) in mech.exact_support(x, caps)? {
            if evaluate_invariants(&output, spec)? != reference {
                return Ok(InvarianceReport {
                    holds: false,
                    mode: CheckMode::Exact,
                    trials: 0,
                    counterexample: Some(output.canonical_label()),
                });
            }
        }
        Ok(InvarianceReport {
            holds: true,
            mode: CheckMode::Exact,
            trials: 0,
            counterexample: None,
        })
    } else {
        if trials == 0 {
            return Err(Error::InvalidParameter(
                "sampling invariance check needs at least one trial".into(),
            ));
        }
        for seed in 0..trials {
            let output = mech.sample(x, seed)?;
            if evaluate_invariants(&output, spec)? != reference {
                return Ok(InvarianceReport {
                    holds: false,
                    mode: CheckMode::Sampling,
                    trials,
                    counterexample: Some(output.canonical_label()),
                });
            }
        }
        Ok(InvarianceReport {
            holds: true,
            mode: CheckMode::Sampling,
            trials,
            counterexample: None,
        })
    }
}

/// Size of the largest matching stratum, the `b` of the closed-form swap
/// bound. Within a universe this is constant, since the holding table pins
/// every matching-variable count; the verifier asserts that rather than
/// assuming it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LargestStratum {
    pub size: usize,
    /// Set when the dataset has no records, in which case `size` is 0.
    pub empty_dataset: bool,
}

pub fn largest_stratum(x: &Dataset) -> LargestStratum {
    if x.n() == 0 {
        return LargestStratum {
            size: 0,
            empty_dataset: true,
        };
    }
    LargestStratum {
        size: stratify(x).values().map(Vec::len).max().unwrap_or(0),
        empty_dataset: false,
    }
}
