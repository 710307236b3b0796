//! The five pieces of a protection standard and the Lipschitz check that
//! gives them meaning: within every universe, the output-premetric distance
//! between two datasets' output distributions may be at most the budget times
//! their input-premetric distance.

use rayon::prelude::*;

use crate::divergences::{psa_plb_bound, OutputDistribution, OutputPremetricKind};
use crate::error::{Error, Result};
use crate::exact::{format_rational, PlbValue, Rational};
use crate::invariants::{evaluate_invariants, largest_stratum, InvariantSpec, InvariantValue};
use crate::mechanisms::stratify;
use crate::report::{MaxPairJson, PlbReport, RunManifest, REPORT_SCHEMA_PLB};
use crate::schema::{cell_distance, hamming_distance, Dataset, Domain};

/// The granularity at which input datasets are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputPremetric {
    /// Record positions are the protection unit.
    HammingRecords,
    /// (position, variable) cells are the protection unit: the sub-record
    /// refinement that inflates distances.
    HammingCells,
}

impl InputPremetric {
    pub fn distance(&self, x: &Dataset, y: &Dataset) -> Result<u64> {
        match self {
            InputPremetric::HammingRecords => hamming_distance(x, y),
            InputPremetric::HammingCells => cell_distance(x, y),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InputPremetric::HammingRecords => "hamming-records",
            InputPremetric::HammingCells => "hamming-cells",
        }
    }
}

/// The per-universe budget. Total over every universe it is asked about.
#[derive(Debug, Clone)]
pub enum PlbFunction {
    /// The same budget everywhere.
    Constant(PlbValue),
    /// The closed-form swapping bound at rate `p`, evaluated with the
    /// universe's largest matching-group size.
    SwapBound { p: Rational },
}

impl PlbFunction {
    /// Budget for the universe containing `member`.
    pub fn eval(&self, member: &Dataset) -> Result<PlbValue> {
        match self {
            PlbFunction::Constant(v) => Ok(v.clone()),
            PlbFunction::SwapBound { p } => {
                let stats = largest_stratum(member);
                psa_plb_bound(p, stats.size as u64)
            }
        }
    }

    pub fn summary(&self) -> String {
        match self {
            PlbFunction::Constant(v) => format!("constant budget {}", v.to_f64()),
            PlbFunction::SwapBound { p } => {
                format!("swap bound at rate {}", format_rational(p))
            }
        }
    }
}

/// Universes are the level sets of an invariant function; two datasets share
/// a universe exactly when their evaluated invariants agree. Intensional
/// level sets always partition the domain; overlapping universe collections
/// are outside this representation.
#[derive(Debug, Clone)]
pub struct Multiverse {
    pub invariant_spec: InvariantSpec,
}

impl Multiverse {
    pub fn key(&self, x: &Dataset) -> Result<InvariantValue> {
        evaluate_invariants(x, &self.invariant_spec)
    }
}

/// A complete protection standard.
#[derive(Debug, Clone)]
pub struct DpSpecification {
    pub domain: Domain,
    pub multiverse: Multiverse,
    pub input_premetric: InputPremetric,
    pub output_premetric: OutputPremetricKind,
    pub plb: PlbFunction,
}

impl DpSpecification {
    pub fn summary(&self) -> String {
        let stats: Vec<String> = self
            .multiverse
            .invariant_spec
            .statistics
            .iter()
            .map(|s| match s {
                crate::invariants::StatisticKind::Table { variables } => {
                    format!("table({})", variables.join(","))
                }
                crate::invariants::StatisticKind::FullMicrodata => "full-microdata".into(),
            })
            .collect();
        let premetric = match &self.output_premetric {
            OutputPremetricKind::Multiplicative => "max-log-ratio".to_string(),
            OutputPremetricKind::DeltaMultiplicative { delta } => {
                format!("max-log-ratio(delta={})", format_rational(delta))
            }
            OutputPremetricKind::RenyiOfOrder { alpha } => {
                format!("renyi(alpha={})", format_rational(alpha))
            }
            OutputPremetricKind::ZcdpSupremum { alpha_max } => {
                format!("zcdp(alpha_max={})", format_rational(alpha_max))
            }
        };
        format!(
            "invariants=[{}] input={} output={} plb={}",
            stats.join(" "),
            self.input_premetric.name(),
            premetric,
            self.plb.summary()
        )
    }
}

/// Evaluates the invariant key of `x`, first checking domain membership.
pub fn universe_key(spec: &DpSpecification, x: &Dataset) -> Result<InvariantValue> {
    if !spec.domain.contains(x) {
        return Err(Error::OutsideDomain(
            "dataset does not conform to the specification's domain".into(),
        ));
    }
    spec.multiverse.key(x)
}

/// Tight budget over one universe: the maximum, over unordered dataset pairs
/// at positive input distance, of the output-premetric distance divided by
/// the input distance. Returns the value and the first maximizing pair.
fn compute_tight<F>(
    mech_dist: F,
    spec: &DpSpecification,
    universe: &[Dataset],
) -> Result<(PlbValue, Option<(u64, usize, usize)>)>
where
    F: Fn(&Dataset) -> Result<OutputDistribution> + Sync,
{
    let distributions: Vec<OutputDistribution> = universe
        .par_iter()
        .map(&mech_dist)
        .collect::<Result<Vec<_>>>()?;

    let mut pairs = Vec::new();
    for i in 0..universe.len() {
        for j in (i + 1)..universe.len() {
            pairs.push((i, j));
        }
    }
    let candidates: Vec<(PlbValue, u64, usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = spec.input_premetric.distance(&universe[i], &universe[j])?;
            if d == 0 {
                return Err(Error::InvalidParameter(
                    "distinct universe members at input distance zero".into(),
                ));
            }
            let div = spec
                .output_premetric
                .eval(&distributions[i], &distributions[j])?;
            Ok((div.divide(d), d, i, j))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut eps_tight = PlbValue::zero();
    let mut max_pair: Option<(u64, usize, usize)> = None;
    for (value, d, i, j) in &candidates {
        if value.total_cmp(&eps_tight) == std::cmp::Ordering::Greater {
            eps_tight = value.clone();
            max_pair = Some((*d, *i, *j));
        }
    }
    Ok((eps_tight, max_pair))
}

/// The tight budget alone; see [`check_specification`] for the full report.
pub fn tight_budget<F>(
    mech_dist: F,
    spec: &DpSpecification,
    universe: &[Dataset],
) -> Result<PlbValue>
where
    F: Fn(&Dataset) -> Result<OutputDistribution> + Sync,
{
    spec.output_premetric.validate()?;
    Ok(compute_tight(mech_dist, spec, universe)?.0)
}

/// Computes the tight per-universe budget of a mechanism over one complete
/// universe and compares it against the specification's budget.
///
/// Universes with fewer than two datasets report a tight budget of zero and
/// are flagged, not rejected. Pair evaluation is parallel; exact arithmetic
/// and a fixed tie-break keep the report independent of evaluation order.
pub fn check_specification<F>(
    mech_dist: F,
    spec: &DpSpecification,
    universe: &[Dataset],
) -> Result<PlbReport>
where
    F: Fn(&Dataset) -> Result<OutputDistribution> + Sync,
{
    spec.output_premetric.validate()?;
    let representative = universe
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty universe".into()))?;

    let key = spec.multiverse.key(representative)?;
    for member in universe {
        if spec.multiverse.key(member)? != key {
            return Err(Error::InvalidParameter(
                "universe members have differing invariant values".into(),
            ));
        }
    }

    let budget = spec.plb.eval(representative)?;
    let degenerate = universe.len() < 2;

    let (eps_tight, max_pair) = compute_tight(mech_dist, spec, universe)?;

    let pass = eps_tight.le_with_tol(&budget, 1e-9);
    let eps_f = eps_tight.to_f64();
    let budget_f = budget.to_f64();
    let gap = if eps_f.is_infinite() && budget_f.is_infinite() {
        None
    } else {
        Some(budget_f - eps_f)
    };

    let maximizing_pair = max_pair.map(|(d, i, j)| {
        let divergence = match &eps_tight {
            PlbValue::Infinite => PlbValue::Infinite,
            other => {
                // undo the distance division for display
                match other.exact_parts() {
                    Some((arg, divisor)) => PlbValue::Exact {
                        arg: arg.clone(),
                        divisor: divisor / d,
                    },
                    None => PlbValue::Approx(other.to_f64() * d as f64),
                }
            }
        };
        MaxPairJson {
            x: universe[i].canonical_label(),
            x_prime: universe[j].canonical_label(),
            distance: d,
            divergence: (&divergence).into(),
        }
    });

    Ok(PlbReport {
        report_schema: REPORT_SCHEMA_PLB,
        universe_digest: key.digest(),
        universe_size: universe.len(),
        n_records: representative.n(),
        strata_sizes: stratify(representative).values().map(Vec::len).collect(),
        swap_rate: None,
        eps_tight: (&eps_tight).into(),
        budget: (&budget).into(),
        gap,
        pass,
        degenerate_universe: degenerate,
        maximizing_pair,
        notes: Vec::new(),
        manifest: RunManifest::new(),
    })
}
