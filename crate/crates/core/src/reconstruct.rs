//! Desk-scale reconstruction demonstrator: given exactly published
//! contingency tables over a known schema and record count, enumerate every
//! record multiset consistent with all of them.
//!
//! Tables are permutation-invariant, so the target is the dataset as a
//! multiset of records; claiming positional recovery would overstate what
//! published tables support. Agreement against a known ground truth is
//! reported descriptively, with no claimed relation to any budget value.

use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::invariants::{ContingencyTable, TablesDocument};
use crate::report::{RunManifest, REPORT_SCHEMA_RECONSTRUCTION};
use crate::schema::{Dataset, Schema};
use crate::Caps;

/// Published exact statistics: a record count and contingency tables.
#[derive(Debug, Clone)]
pub struct PublishedTables {
    pub n: usize,
    pub tables: Vec<ContingencyTable>,
}

impl PublishedTables {
    pub fn from_document(doc: &TablesDocument) -> Result<Self> {
        let out = PublishedTables {
            n: doc.n,
            tables: doc.tables.clone(),
        };
        out.validate()?;
        Ok(out)
    }

    /// Every table's counts must sum to the published record count.
    pub fn validate(&self) -> Result<()> {
        for table in &self.tables {
            if table.total() != self.n as u64 {
                return Err(Error::InvalidParameter(format!(
                    "table over ({}) sums to {}, expected n = {}",
                    table.variables.join(","),
                    table.total(),
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// All record multisets consistent with the published tables, in canonical
/// (lexicographic) order.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub schema: Arc<Schema>,
    pub n: usize,
    pub candidates_scanned: u64,
    /// Each multiset is a sorted list of record value-index tuples.
    pub multisets: Vec<Vec<Vec<u16>>>,
}

impl ReconstructionResult {
    pub fn count(&self) -> usize {
        self.multisets.len()
    }

    fn render_multiset(&self, multiset: &[Vec<u16>]) -> Vec<String> {
        multiset
            .iter()
            .map(|rec| {
                rec.iter()
                    .enumerate()
                    .map(|(v, &val)| self.schema.variables()[v].values[val as usize].clone())
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect()
    }
}

fn binomial_u128(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)?;
        acc /= i + 1;
    }
    Some(acc)
}

struct TableCheck {
    /// record-space index to published cell index; None when the record's
    /// tuple was not published (count zero).
    cell_of_record: Vec<Option<usize>>,
    expected: Vec<u64>,
}

/// Exhaustively enumerates the record multisets of size `tables.n` over the
/// schema's record space that reproduce every published table exactly.
pub fn reconstruct(
    tables: &PublishedTables,
    schema: &Arc<Schema>,
    caps: &Caps,
) -> Result<ReconstructionResult> {
    tables.validate()?;
    let space = schema.record_space();
    let r = space.len();
    let n = tables.n;

    let candidates = binomial_u128((r + n - 1) as u128, n as u128).unwrap_or(u128::MAX);
    if candidates > caps.reconstruct_candidates as u128 {
        return Err(Error::CapExceeded {
            what: "reconstruction candidate multisets".into(),
            estimate: candidates,
            cap: caps.reconstruct_candidates as u128,
        });
    }

    let mut checks = Vec::with_capacity(tables.tables.len());
    for table in &tables.tables {
        let var_indices: Vec<usize> = table
            .variables
            .iter()
            .map(|name| {
                schema
                    .var_index(name)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown variable {name:?}")))
            })
            .collect::<Result<_>>()?;
        let cell_keys: Vec<&Vec<String>> = table.cells.keys().collect();
        let expected: Vec<u64> = table.cells.values().copied().collect();
        let cell_of_record: Vec<Option<usize>> = space
            .iter()
            .map(|rec| {
                let key: Vec<String> = var_indices
                    .iter()
                    .map(|&v| schema.variables()[v].values[rec[v] as usize].clone())
                    .collect();
                cell_keys.iter().position(|k| **k == key)
            })
            .collect();
        checks.push(TableCheck {
            cell_of_record,
            expected,
        });
    }

    let mut multisets = Vec::new();
    let mut scanned: u64 = 0;
    let mut idx = vec![0usize; n];
    let mut counts: Vec<Vec<u64>> = checks.iter().map(|c| vec![0; c.expected.len()]).collect();
    'scan: loop {
        scanned += 1;
        let mut consistent = true;
        'tables: for (check, count_buf) in checks.iter().zip(counts.iter_mut()) {
            count_buf.fill(0);
            for &record in &idx {
                match check.cell_of_record[record] {
                    Some(cell) => count_buf[cell] += 1,
                    None => {
                        consistent = false;
                        break 'tables;
                    }
                }
            }
            if *count_buf != check.expected {
                consistent = false;
                break;
            }
        }
        if consistent {
            multisets.push(idx.iter().map(|&i| space[i].clone()).collect());
        }

        // next nondecreasing index tuple
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'scan;
            }
            pos -= 1;
            if idx[pos] + 1 < r {
                idx[pos] += 1;
                let v = idx[pos];
                for slot in idx[pos + 1..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }

    Ok(ReconstructionResult {
        schema: schema.clone(),
        n,
        candidates_scanned: scanned,
        multisets,
    })
}

/// Agreement of a reconstruction against known ground truth: the best and the
/// expected (under a uniform choice among consistent multisets) fraction of
/// truth records recovered.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementReport {
    pub best: f64,
    pub expected: f64,
    pub best_exact: String,
    pub expected_exact: String,
}

pub fn agreement(result: &ReconstructionResult, truth: &Dataset) -> Result<AgreementReport> {
    if truth.schema().as_ref() != result.schema.as_ref() {
        return Err(Error::SchemaMismatch);
    }
    if truth.n() != result.n {
        return Err(Error::SizeMismatch {
            left: truth.n(),
            right: result.n,
        });
    }
    let mut truth_records: Vec<Vec<u16>> = truth.records().to_vec();
    truth_records.sort();

    let n = result.n.max(1) as i64;
    let mut best = Rational::new(0.into(), 1.into());
    let mut total = Rational::new(0.into(), 1.into());
    for multiset in &result.multisets {
        let overlap = multiset_intersection(multiset, &truth_records) as i64;
        let frac = Rational::new(overlap.into(), n.into());
        if frac > best {
            best = frac.clone();
        }
        total += frac;
    }
    let expected = if result.multisets.is_empty() {
        Rational::new(0.into(), 1.into())
    } else {
        total / Rational::new((result.multisets.len() as i64).into(), 1.into())
    };
    Ok(AgreementReport {
        best: best.to_f64().unwrap_or(0.0),
        expected: expected.to_f64().unwrap_or(0.0),
        best_exact: crate::exact::format_rational(&best),
        expected_exact: crate::exact::format_rational(&expected),
    })
}

/// Size of the multiset intersection of two sorted record lists.
fn multiset_intersection(a: &[Vec<u16>], b: &[Vec<u16>]) -> usize {
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    common
}

/// JSON report for a reconstruction run.
#[derive(Debug, Clone, Serialize)]
pub struct ReconstructionReport {
    pub report_schema: &'static str,
    pub n: usize,
    pub candidates_scanned: u64,
    pub consistent_count: usize,
    pub multisets: Vec<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agreement: Option<AgreementReport>,
    pub manifest: RunManifest,
}

impl ReconstructionReport {
    pub fn new(result: &ReconstructionResult, agreement: Option<AgreementReport>) -> Self {
        ReconstructionReport {
            report_schema: REPORT_SCHEMA_RECONSTRUCTION,
            n: result.n,
            candidates_scanned: result.candidates_scanned,
            consistent_count: result.count(),
            multisets: result
                .multisets
                .iter()
                .map(|m| result.render_multiset(m))
                .collect(),
            agreement,
            manifest: RunManifest::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::evaluate_table;
    use crate::schema::{Role, Variable};

    fn bit_schema() -> Arc<Schema> {
        Arc::new(
            Schema::new(vec![Variable::new("bit", &["0", "1"], Role::Holding, false)]).unwrap(),
        )
    }

    fn table(vars: &[&str], cells: &[(&[&str], u64)]) -> ContingencyTable {
        ContingencyTable {
            variables: vars.iter().map(|s| s.to_string()).collect(),
            cells: cells
                .iter()
                .map(|(k, c)| (k.iter().map(|s| s.to_string()).collect(), *c))
                .collect(),
        }
    }

    #[test]
    fn published_marginal_pins_the_multiset() {
        let schema = bit_schema();
        let tables = PublishedTables {
            n: 2,
            tables: vec![table(&["bit"], &[(&["0"], 1), (&["1"], 1)])],
        };
        let result = reconstruct(&tables, &schema, &Caps::default()).unwrap();
        assert_eq!(result.count(), 1);
        assert_eq!(result.multisets[0], vec![vec![0u16], vec![1u16]]);
    }

    #[test]
    fn count_only_leaves_three_multisets() {
        let schema = bit_schema();
        let tables = PublishedTables {
            n: 2,
            tables: vec![],
        };
        let result = reconstruct(&tables, &schema, &Caps::default()).unwrap();
        assert_eq!(result.count(), 3); // {00, 01, 11}
    }

    #[test]
    fn inconsistent_totals_are_rejected() {
        let schema = bit_schema();
        let tables = PublishedTables {
            n: 3,
            tables: vec![table(&["bit"], &[(&["0"], 1), (&["1"], 1)])],
        };
        assert!(reconstruct(&tables, &schema, &Caps::default()).is_err());
    }

    #[test]
    fn every_returned_multiset_reproduces_every_table() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("a", &["0", "1"], Role::Holding, false),
                Variable::new("b", &["0", "1"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let truth = Dataset::from_names(
            schema.clone(),
            &[vec!["0", "0"], vec!["0", "1"], vec!["1", "1"], vec!["1", "1"]],
        )
        .unwrap();
        let published = PublishedTables {
            n: 4,
            tables: vec![
                evaluate_table(&truth, &["a".to_string()]).unwrap(),
                evaluate_table(&truth, &["b".to_string()]).unwrap(),
            ],
        };
        let result = reconstruct(&published, &schema, &Caps::default()).unwrap();
        assert!(result.count() >= 1);
        // soundness: re-evaluate each table on each returned multiset
        for multiset in &result.multisets {
            let ds = Dataset::new(schema.clone(), multiset.clone()).unwrap();
            for t in &published.tables {
                let again = evaluate_table(&ds, &t.variables).unwrap();
                assert_eq!(&again, t);
            }
        }
    }

    #[test]
    fn completeness_matches_assignment_enumeration() {
        // second, independent enumerator: iterate assignments, canonicalize
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("a", &["0", "1"], Role::Holding, false),
                Variable::new("b", &["0", "1"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let truth = Dataset::from_names(
            schema.clone(),
            &[vec!["0", "0"], vec!["1", "1"], vec!["1", "0"]],
        )
        .unwrap();
        let published = PublishedTables {
            n: 3,
            tables: vec![evaluate_table(&truth, &["a".to_string()]).unwrap()],
        };
        let result = reconstruct(&published, &schema, &Caps::default()).unwrap();

        let space = schema.record_space();
        let mut seen: std::collections::BTreeSet<Vec<Vec<u16>>> = Default::default();
        let mut idx = vec![0usize; 3];
        loop {
            let mut records: Vec<Vec<u16>> = idx.iter().map(|&i| space[i].clone()).collect();
            let ds = Dataset::new(schema.clone(), records.clone()).unwrap();
            let ok = published.tables.iter().all(|t| {
                evaluate_table(&ds, &t.variables).unwrap() == *t
            });
            if ok {
                records.sort();
                seen.insert(records);
            }
            if !crate::schema::odometer_next(&mut idx, space.len()) {
                break;
            }
        }
        assert_eq!(result.count(), seen.len());
        let from_result: std::collections::BTreeSet<Vec<Vec<u16>>> =
            result.multisets.iter().cloned().collect();
        assert_eq!(from_result, seen);
    }

    #[test]
    fn more_tables_never_enlarge_the_consistent_set() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("a", &["0", "1"], Role::Holding, false),
                Variable::new("b", &["0", "1"], Role::Holding, false),
                Variable::new("c", &["0", "1"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let truth = Dataset::from_names(
            schema.clone(),
            &[
                vec!["0", "0", "1"],
                vec!["0", "1", "0"],
                vec!["1", "1", "1"],
                vec!["1", "0", "0"],
            ],
        )
        .unwrap();
        let t = |vars: &[&str]| {
            evaluate_table(&truth, &vars.iter().map(|s| s.to_string()).collect::<Vec<_>>())
                .unwrap()
        };
        let nested: Vec<Vec<ContingencyTable>> = vec![
            vec![],
            vec![t(&["a"])],
            vec![t(&["a"]), t(&["b"])],
            vec![t(&["a"]), t(&["b"]), t(&["c"])],
            vec![t(&["a"]), t(&["b"]), t(&["c"]), t(&["a", "b"])],
        ];
        let mut last_count = usize::MAX;
        let mut last_expected = -1.0f64;
        for tables in nested {
            let published = PublishedTables { n: 4, tables };
            let result = reconstruct(&published, &schema, &Caps::default()).unwrap();
            assert!(result.count() <= last_count);
            let agree = agreement(&result, &truth).unwrap();
            assert!(agree.expected >= last_expected - 1e-12);
            last_count = result.count();
            last_expected = agree.expected;
        }
    }

    #[test]
    fn unique_reconstruction_agrees_fully() {
        let schema = bit_schema();
        let truth = Dataset::from_names(schema.clone(), &[vec!["0"], vec!["1"]]).unwrap();
        let published = PublishedTables {
            n: 2,
            tables: vec![evaluate_table(&truth, &["bit".to_string()]).unwrap()],
        };
        let result = reconstruct(&published, &schema, &Caps::default()).unwrap();
        let agree = agreement(&result, &truth).unwrap();
        assert_eq!(agree.best, 1.0);
        assert_eq!(agree.expected, 1.0);
    }

    #[test]
    fn count_only_expected_agreement_is_the_uniform_average() {
        let schema = bit_schema();
        let truth = Dataset::from_names(schema.clone(), &[vec!["0"], vec!["1"]]).unwrap();
        let published = PublishedTables { n: 2, tables: vec![] };
        let result = reconstruct(&published, &schema, &Caps::default()).unwrap();
        let agree = agreement(&result, &truth).unwrap();
        // consistent multisets {00, 01, 11} overlap 1/2, 1, 1/2 with truth
        assert_eq!(agree.best, 1.0);
        assert!((agree.expected - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(agree.expected_exact, "2/3");
    }

    #[test]
    fn cap_is_enforced() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("a", &(0..30).map(|i| i.to_string()).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect::<Vec<_>>(), Role::Holding, false),
                Variable::new("b", &(0..30).map(|i| i.to_string()).collect::<Vec<_>>().iter().map(|s| s.as_str()).collect::<Vec<_>>(), Role::Swapping, false),
            ])
            .unwrap(),
        );
        let tables = PublishedTables { n: 8, tables: vec![] };
        let err = reconstruct(&tables, &schema, &Caps::default()).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { .. }));
    }

    #[test]
    fn tables_round_trip_through_json() {
        let t = table(&["a", "b"], &[(&["0", "1"], 2), (&["1", "1"], 1)]);
        let doc = TablesDocument {
            report_schema: crate::report::REPORT_SCHEMA_INVARIANTS.to_string(),
            n: 3,
            tables: vec![t.clone()],
            manifest: None,
        };
        let text = serde_json::to_string(&doc).unwrap();
        let back: TablesDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back.tables[0], t);
        assert_eq!(back.n, 3);
    }

    #[test]
    fn rejects_malformed_cells() {
        let text = r#"{"report_schema":"dpspec/invariants/v1","n":1,
            "tables":[{"variables":["a"],"cells":[{"values":["0","1"],"count":1}]}]}"#;
        assert!(serde_json::from_str::<TablesDocument>(text).is_err());
    }
}
