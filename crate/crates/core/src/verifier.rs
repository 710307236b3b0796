//! End-to-end brute-force verification: enumerate a universe, obtain exact
//! output distributions, compute the tight per-universe budget, and compare
//! it against the closed-form swap bound. Also hosts the budget-gaming
//! demonstrations and the seeded instance battery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::divergences::OutputPremetricKind;
use crate::error::{Error, Result};
use crate::exact::{format_rational, rat, PlbValue, Rational};
use crate::invariants::{
    derive_invariants, evaluate_invariants, largest_stratum, InvariantSpec, StatisticKind,
};
use crate::mechanisms::psa_exact_distribution;
use crate::report::{
    GamingScenarioReport, PlbReport, PlbValueJson, RunManifest, ScenarioSide,
    REPORT_SCHEMA_BATTERY, REPORT_SCHEMA_GAMING,
};
use crate::schema::{Dataset, Domain, Role, Schema, Variable};
use crate::spec::{check_specification, DpSpecification, InputPremetric, Multiverse, PlbFunction};
use crate::Caps;

/// All datasets that share `x0`'s record count, its per-position holding
/// values, and its invariant value.
///
/// Datasets differing in any holding value differ in the holding table and
/// cannot share the universe, so the scan ranges over swapping-value
/// assignments only; within that slice it is exhaustive.
pub fn enumerate_universe(
    x0: &Dataset,
    spec: &InvariantSpec,
    caps: &Caps,
) -> Result<Vec<Dataset>> {
    let schema = x0.schema();
    let swap_vars = schema.swapping_vars();
    let n = x0.n();

    let combos: u128 = swap_vars
        .iter()
        .map(|&v| schema.variables()[v].values.len() as u128)
        .product();
    let estimate = checked_pow_u128(combos, n as u32).unwrap_or(u128::MAX);
    if estimate > caps.universe_candidates as u128 {
        return Err(Error::CapExceeded {
            what: "universe candidate scan".into(),
            estimate,
            cap: caps.universe_candidates as u128,
        });
    }

    // all swapping-value blocks, lexicographic
    let mut blocks: Vec<Vec<u16>> = vec![vec![]];
    for &v in &swap_vars {
        let count = schema.variables()[v].values.len() as u16;
        let mut next = Vec::with_capacity(blocks.len() * count as usize);
        for block in &blocks {
            for val in 0..count {
                let mut b = block.clone();
                b.push(val);
                next.push(b);
            }
        }
        blocks = next;
    }

    let key0 = evaluate_invariants(x0, spec)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let mut candidate = x0.clone();
        for (pos, &choice) in idx.iter().enumerate() {
            candidate.set_swap_block(pos, &swap_vars, &blocks[choice]);
        }
        if evaluate_invariants(&candidate, spec)? == key0 {
            out.push(candidate);
        }
        if !crate::schema::odometer_next(&mut idx, blocks.len()) {
            break;
        }
    }
    Ok(out)
}

fn checked_pow_u128(base: u128, exp: u32) -> Option<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// The specification induced by permutation swapping on `x0`'s schema:
/// fixed-n domain, swapping-induced invariants, record-level Hamming input
/// premetric, max-log-ratio output premetric, closed-form budget at rate `p`.
pub fn psa_specification(x0: &Dataset, p: &Rational) -> Result<DpSpecification> {
    Ok(DpSpecification {
        domain: Domain::fixed(x0.schema().clone(), x0.n()),
        multiverse: Multiverse {
            invariant_spec: derive_invariants(x0.schema())?,
        },
        input_premetric: InputPremetric::HammingRecords,
        output_premetric: OutputPremetricKind::Multiplicative,
        plb: PlbFunction::SwapBound { p: p.clone() },
    })
}

/// Enumerates `x0`'s universe, computes exact swap distributions for every
/// member, and checks the tight budget against the closed-form bound.
pub fn verify_psa(x0: &Dataset, p: &Rational, caps: &Caps) -> Result<PlbReport> {
    let spec = psa_specification(x0, p)?;
    let universe = enumerate_universe(x0, &spec.multiverse.invariant_spec, caps)?;

    // The holding table pins matching-variable counts, so the largest group
    // size must be constant across the universe; assert rather than assume.
    let b0 = largest_stratum(x0).size;
    for member in &universe {
        if largest_stratum(member).size != b0 {
            return Err(Error::InvalidParameter(
                "largest matching group varies within a universe".into(),
            ));
        }
    }

    let mut report = check_specification(
        |x| psa_exact_distribution(x, p, caps),
        &spec,
        &universe,
    )?;
    report.swap_rate = Some(format_rational(p));
    Ok(report)
}

/// Verifies the constant mechanism whose released value is the confidential
/// dataset itself. The tight budget is still zero: the release does not vary
/// with the input, so the standard cannot see that the constant was chosen
/// to equal the data. The note records the resolution: mechanism design must
/// not depend on the confidential dataset, else the design step itself is the
/// release to assess (and that one is the identity, with infinite budget).
pub fn constant_paradox_report(x0: &Dataset, caps: &Caps) -> Result<PlbReport> {
    let inv = derive_invariants(x0.schema())?;
    let spec = DpSpecification {
        domain: Domain::fixed(x0.schema().clone(), x0.n()),
        multiverse: Multiverse {
            invariant_spec: inv.clone(),
        },
        input_premetric: InputPremetric::HammingRecords,
        output_premetric: OutputPremetricKind::Multiplicative,
        plb: PlbFunction::Constant(PlbValue::zero()),
    };
    let universe = enumerate_universe(x0, &inv, caps)?;
    let constant = crate::mechanisms::MechanismDescriptor::Constant { value: x0.clone() };
    let mut report =
        check_specification(|x| constant.exact_distribution(x, caps), &spec, &universe)?;
    report.notes.push(
        "constant release equals the confidential dataset, yet the tight budget is 0: \
         the output does not vary with the input, so no budget accounting can flag it"
            .into(),
    );
    report.notes.push(
        "resolution: treat the data-dependent design step as the mechanism under \
         assessment; that mechanism is the identity and its budget is infinite"
            .into(),
    );
    Ok(report)
}

/// The budget-gaming maneuvers: each changes the nominal budget while the
/// mechanism's exact output distributions stay byte-identical.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GamingScenarioKind {
    /// Finer matching strata shrink the largest group and with it the
    /// closed-form bound.
    RefineStrata,
    /// A positive failure mass δ in the output premetric shrinks every
    /// divergence.
    IncreaseDelta,
    /// Sub-record protection units inflate input distances, deflating the
    /// tight budget by the inflation factor.
    RefineGranularity,
    /// Extra released statistics shatter universes until nothing is left to
    /// compare.
    AddInvariants,
}

impl GamingScenarioKind {
    pub fn all() -> [GamingScenarioKind; 4] {
        [
            GamingScenarioKind::RefineStrata,
            GamingScenarioKind::IncreaseDelta,
            GamingScenarioKind::RefineGranularity,
            GamingScenarioKind::AddInvariants,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            GamingScenarioKind::RefineStrata => "refine-strata",
            GamingScenarioKind::IncreaseDelta => "increase-delta",
            GamingScenarioKind::RefineGranularity => "refine-granularity",
            GamingScenarioKind::AddInvariants => "add-invariants",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "refine-strata" => Ok(GamingScenarioKind::RefineStrata),
            "increase-delta" => Ok(GamingScenarioKind::IncreaseDelta),
            "refine-granularity" => Ok(GamingScenarioKind::RefineGranularity),
            "add-invariants" => Ok(GamingScenarioKind::AddInvariants),
            other => Err(Error::InvalidParameter(format!(
                "unknown scenario {other:?}; expected one of refine-strata, increase-delta, \
                 refine-granularity, add-invariants"
            ))),
        }
    }
}

fn tight_eps(
    spec: &DpSpecification,
    universe: &[Dataset],
    p: &Rational,
    caps: &Caps,
) -> Result<PlbValue> {
    crate::spec::tight_budget(|x| psa_exact_distribution(x, p, caps), spec, universe)
}

/// Runs one gaming maneuver on its built-in fixture and reports the nominal
/// budgets on both sides together with the byte comparison of the exact
/// output distributions.
pub fn run_gaming_scenario(kind: GamingScenarioKind, caps: &Caps) -> Result<GamingScenarioReport> {
    match kind {
        GamingScenarioKind::RefineStrata => refine_strata_scenario(caps),
        GamingScenarioKind::IncreaseDelta => increase_delta_scenario(caps),
        GamingScenarioKind::RefineGranularity => refine_granularity_scenario(caps),
        GamingScenarioKind::AddInvariants => add_invariants_scenario(caps),
    }
}

fn scenario_report(
    kind: GamingScenarioKind,
    description: &str,
    before: (String, PlbValue),
    after: (String, PlbValue),
    identical: bool,
    notes: Vec<String>,
) -> GamingScenarioReport {
    let strictly_decreased =
        after.1.total_cmp(&before.1) == std::cmp::Ordering::Less;
    GamingScenarioReport {
        report_schema: REPORT_SCHEMA_GAMING,
        scenario: kind.name().to_string(),
        description: description.to_string(),
        before: ScenarioSide {
            spec_summary: before.0,
            nominal_eps: PlbValueJson::from(&before.1),
        },
        after: ScenarioSide {
            spec_summary: after.0,
            nominal_eps: PlbValueJson::from(&after.1),
        },
        distributions_identical: identical,
        nominal_strictly_decreased: strictly_decreased,
        notes,
        manifest: RunManifest::new(),
    }
}

/// Fixture: one large stratum whose swapping values are constant (swaps are
/// no-ops there) plus one small active stratum. Refining the matching set
/// splits only the inert stratum, so the exact output distribution is
/// unchanged while the largest group, and with it the bound, drops.
fn refine_strata_scenario(caps: &Caps) -> Result<GamingScenarioReport> {
    let p = rat(1, 2);
    let coarse_schema = std::sync::Arc::new(Schema::new(vec![
        Variable::new("state", &["A", "B"], Role::Holding, true),
        Variable::new("size", &["1", "2", "3"], Role::Holding, false),
        Variable::new("county", &["x", "y", "z"], Role::Swapping, false),
    ])?);
    let fine_schema = std::sync::Arc::new(Schema::new(vec![
        Variable::new("state", &["A", "B"], Role::Holding, true),
        Variable::new("size", &["1", "2", "3"], Role::Holding, true),
        Variable::new("county", &["x", "y", "z"], Role::Swapping, false),
    ])?);
    let rows = vec![
        vec!["A", "1", "x"],
        vec!["A", "1", "x"],
        vec!["A", "2", "x"],
        vec!["A", "2", "x"],
        vec!["B", "3", "y"],
        vec!["B", "3", "z"],
    ];
    let x_coarse = Dataset::from_names(coarse_schema, &rows)?;
    let x_fine = Dataset::from_names(fine_schema, &rows)?;

    let dist_coarse = psa_exact_distribution(&x_coarse, &p, caps)?;
    let dist_fine = psa_exact_distribution(&x_fine, &p, caps)?;
    let identical = dist_coarse.canonical_bytes() == dist_fine.canonical_bytes();

    let b_coarse = largest_stratum(&x_coarse).size as u64;
    let b_fine = largest_stratum(&x_fine).size as u64;
    let before = crate::divergences::psa_plb_bound(&p, b_coarse)?;
    let after = crate::divergences::psa_plb_bound(&p, b_fine)?;

    let spec_coarse = psa_specification(&x_coarse, &p)?;
    let spec_fine = psa_specification(&x_fine, &p)?;
    Ok(scenario_report(
        GamingScenarioKind::RefineStrata,
        "add a matching variable so strata are finer; the nominal bound falls with the \
         largest group size although the release mechanism's distribution is unchanged",
        (spec_coarse.summary(), before),
        (spec_fine.summary(), after),
        identical,
        vec![
            format!("largest matching group: {b_coarse} before, {b_fine} after"),
            "the finer matching set also enlarges the released joint table, shrinking \
             every universe"
                .into(),
        ],
    ))
}

fn two_record_fixture() -> Result<Dataset> {
    let schema = std::sync::Arc::new(Schema::new(vec![
        Variable::new("keep", &["k"], Role::Holding, false),
        Variable::new("move", &["a", "b"], Role::Swapping, false),
    ])?);
    Dataset::from_names(schema, &[vec!["k", "a"], vec!["k", "b"]])
}

/// Fixture: the two-record swap pair. The mechanism stays fixed; only δ in
/// the output premetric grows.
fn increase_delta_scenario(caps: &Caps) -> Result<GamingScenarioReport> {
    let p = rat(1, 2);
    let x0 = two_record_fixture()?;
    let mut spec = psa_specification(&x0, &p)?;
    let universe = enumerate_universe(&x0, &spec.multiverse.invariant_spec, caps)?;

    let dist_before = psa_exact_distribution(&x0, &p, caps)?;
    let dist_after = psa_exact_distribution(&x0, &p, caps)?;
    let identical = dist_before.canonical_bytes() == dist_after.canonical_bytes();

    let mut notes = Vec::new();
    let mut at = |delta: Rational| -> Result<PlbValue> {
        spec.output_premetric = if delta == crate::exact::rat_zero() {
            OutputPremetricKind::Multiplicative
        } else {
            OutputPremetricKind::DeltaMultiplicative { delta }
        };
        tight_eps(&spec, &universe, &p, caps)
    };
    let eps0 = at(rat(0, 1))?;
    let eps_mid = at(rat(1, 100))?;
    let eps_high = at(rat(1, 10))?;
    notes.push(format!(
        "tight budget at delta 0, 1/100, 1/10: {}, {}, {}",
        crate::exact::sig10(eps0.to_f64()),
        crate::exact::sig10(eps_mid.to_f64()),
        crate::exact::sig10(eps_high.to_f64()),
    ));
    if !(eps_high.le_with_tol(&eps_mid, 0.0) && eps_mid.le_with_tol(&eps0, 0.0)) {
        return Err(Error::InvalidParameter(
            "delta relaxation failed to be monotone".into(),
        ));
    }

    let before_summary = {
        let mut s = psa_specification(&x0, &p)?;
        s.output_premetric = OutputPremetricKind::Multiplicative;
        s.summary()
    };
    let after_summary = {
        let mut s = psa_specification(&x0, &p)?;
        s.output_premetric = OutputPremetricKind::DeltaMultiplicative { delta: rat(1, 10) };
        s.summary()
    };
    Ok(scenario_report(
        GamingScenarioKind::IncreaseDelta,
        "allow a failure mass delta in the output premetric; every finite divergence \
         shrinks although the release mechanism is untouched",
        (before_summary, eps0),
        (after_summary, eps_high),
        identical,
        notes,
    ))
}

/// Fixture: two swapping variables whose values move in lockstep, so every
/// record-level difference is exactly two cell-level differences. Distances
/// double uniformly and the tight budget halves exactly.
fn refine_granularity_scenario(caps: &Caps) -> Result<GamingScenarioReport> {
    let p = rat(1, 2);
    let schema = std::sync::Arc::new(Schema::new(vec![
        Variable::new("keep", &["k"], Role::Holding, false),
        Variable::new("county", &["a", "b"], Role::Swapping, false),
        Variable::new("tract", &["1", "2"], Role::Swapping, false),
    ])?);
    let x0 = Dataset::from_names(schema, &[vec!["k", "a", "1"], vec!["k", "b", "2"]])?;
    let mut spec = psa_specification(&x0, &p)?;
    let universe = enumerate_universe(&x0, &spec.multiverse.invariant_spec, caps)?;

    let dist = psa_exact_distribution(&x0, &p, caps)?;
    let identical = dist.canonical_bytes() == psa_exact_distribution(&x0, &p, caps)?.canonical_bytes();

    spec.input_premetric = InputPremetric::HammingRecords;
    let before_summary = spec.summary();
    let eps_records = tight_eps(&spec, &universe, &p, caps)?;
    spec.input_premetric = InputPremetric::HammingCells;
    let after_summary = spec.summary();
    let eps_cells = tight_eps(&spec, &universe, &p, caps)?;

    // uniform inflation by 2: the cell-level budget is exactly half
    let halved = eps_records.clone().divide(2);
    if eps_cells != halved {
        return Err(Error::InvalidParameter(
            "cell-level tight budget is not exactly half the record-level one".into(),
        ));
    }

    Ok(scenario_report(
        GamingScenarioKind::RefineGranularity,
        "declare (position, variable) cells the protection unit; input distances inflate \
         by the two lockstep swapping variables and the nominal budget halves",
        (before_summary, eps_records),
        (after_summary, eps_cells),
        identical,
        vec!["every differing record differs in both swapping cells, so inflation is \
              uniformly 2"
            .into()],
    ))
}

/// Fixture: the two-record swap pair again. Releasing the full microdata as
/// an extra statistic shatters every universe to a singleton.
fn add_invariants_scenario(caps: &Caps) -> Result<GamingScenarioReport> {
    let p = rat(1, 2);
    let x0 = two_record_fixture()?;
    let mut spec = psa_specification(&x0, &p)?;

    let dist = psa_exact_distribution(&x0, &p, caps)?;
    let identical = dist.canonical_bytes() == psa_exact_distribution(&x0, &p, caps)?.canonical_bytes();

    let universe_before = enumerate_universe(&x0, &spec.multiverse.invariant_spec, caps)?;
    let before_summary = spec.summary();
    let eps_before = tight_eps(&spec, &universe_before, &p, caps)?;

    let extended = spec
        .multiverse
        .invariant_spec
        .with_statistic(StatisticKind::FullMicrodata);
    spec.multiverse = Multiverse {
        invariant_spec: extended.clone(),
    };
    let universe_after = enumerate_universe(&x0, &extended, caps)?;
    let after_summary = spec.summary();
    let eps_after = tight_eps(&spec, &universe_after, &p, caps)?;

    Ok(scenario_report(
        GamingScenarioKind::AddInvariants,
        "release the full microdata as an additional exact statistic; universes shatter \
         to singletons and the tight budget collapses to zero",
        (before_summary, eps_before),
        (after_summary, eps_after),
        identical,
        vec![format!(
            "universe size: {} before, {} after",
            universe_before.len(),
            universe_after.len()
        )],
    ))
}

/// Configuration of the seeded random-instance battery.
#[derive(Debug, Clone)]
pub struct BatteryConfig {
    pub master_seed: u64,
    pub instances: u32,
    pub max_records: usize,
    pub max_strata: usize,
    pub p_grid: Vec<Rational>,
}

/// The committed master seed of the default battery.
pub const BATTERY_MASTER_SEED: u64 = 0x5eed_cafe;

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig {
            master_seed: BATTERY_MASTER_SEED,
            instances: 200,
            max_records: 6,
            max_strata: 3,
            p_grid: (1..=9).map(|k| rat(k, 10)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryInstanceResult {
    pub id: u32,
    pub n_records: usize,
    pub strata_sizes: Vec<usize>,
    pub largest_group: usize,
    pub swap_rate: String,
    pub universe_size: usize,
    pub eps_tight: PlbValueJson,
    pub bound: PlbValueJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub report_schema: &'static str,
    pub master_seed: u64,
    pub total: u32,
    pub passed: u32,
    pub all_pass: bool,
    pub instances: Vec<BatteryInstanceResult>,
    pub manifest: RunManifest,
}

/// Draws one battery instance: a schema with one matching variable (up to
/// `max_strata` values), an occasional extra holding variable, one swapping
/// variable, and random records. Universe sizes are kept desk-scale by
/// resampling overly diverse instances.
fn battery_instance(cfg: &BatteryConfig, id: u32) -> Result<(Dataset, Rational)> {
    let mut rng = ChaCha12Rng::seed_from_u64(
        cfg.master_seed ^ (id as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
    );
    let p = cfg.p_grid[rng.gen_range(0..cfg.p_grid.len() as u32) as usize].clone();
    for _attempt in 0..64 {
        let strata_values = rng.gen_range(1..=cfg.max_strata as u32) as usize;
        let swap_values = rng.gen_range(2..=4u32) as usize;
        let extra_holding = rng.gen_range(0..2u32) == 1;
        let n = rng.gen_range(2..=cfg.max_records as u32) as usize;

        let group_names: Vec<String> = (0..strata_values).map(|i| format!("g{i}")).collect();
        let swap_names: Vec<String> = (0..swap_values).map(|i| format!("s{i}")).collect();
        let mut variables = vec![Variable {
            name: "group".into(),
            values: group_names.clone(),
            role: Role::Holding,
            matching: true,
        }];
        if extra_holding {
            variables.push(Variable::new("note", &["u", "v"], Role::Holding, false));
        }
        variables.push(Variable {
            name: "swap".into(),
            values: swap_names.clone(),
            role: Role::Swapping,
            matching: false,
        });
        let schema = std::sync::Arc::new(Schema::new(variables)?);

        let mut records: Vec<Vec<u16>> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut rec = vec![rng.gen_range(0..strata_values as u32) as u16];
            if extra_holding {
                rec.push(rng.gen_range(0..2u32) as u16);
            }
            rec.push(rng.gen_range(0..swap_values as u32) as u16);
            records.push(rec);
        }
        let x = Dataset::new(schema, records)?;
        if universe_size_estimate(&x) <= 120 {
            return Ok((x, p));
        }
    }
    Err(Error::InvalidParameter(format!(
        "battery instance {id} could not be sampled within the diversity cap"
    )))
}

/// Exact universe size: the product over strata of the number of distinct
/// arrangements of the stratum's swapping-block multiset.
fn universe_size_estimate(x: &Dataset) -> u128 {
    let swap_vars = x.schema().swapping_vars();
    let mut total: u128 = 1;
    for (_, positions) in crate::mechanisms::stratify(x) {
        let mut counts: std::collections::BTreeMap<Vec<u16>, u64> = Default::default();
        for &i in &positions {
            *counts.entry(x.swap_block(i, &swap_vars)).or_default() += 1;
        }
        let mut arrangements: u128 = factorial_u128(positions.len() as u64);
        for &c in counts.values() {
            arrangements /= factorial_u128(c);
        }
        total = total.saturating_mul(arrangements);
    }
    total
}

fn factorial_u128(k: u64) -> u128 {
    (1..=k as u128).product::<u128>().max(1)
}

/// Runs the seeded battery in parallel; results are merged by instance id so
/// the report is deterministic.
pub fn run_battery(cfg: &BatteryConfig, caps: &Caps) -> Result<BatteryReport> {
    let mut instances: Vec<BatteryInstanceResult> = (0..cfg.instances)
        .into_par_iter()
        .map(|id| {
            let (x, p) = battery_instance(cfg, id)?;
            let report = verify_psa(&x, &p, caps)?;
            Ok(BatteryInstanceResult {
                id,
                n_records: report.n_records,
                strata_sizes: report.strata_sizes.clone(),
                largest_group: report.strata_sizes.iter().copied().max().unwrap_or(0),
                swap_rate: format_rational(&p),
                universe_size: report.universe_size,
                eps_tight: report.eps_tight.clone(),
                bound: report.budget.clone(),
                gap: report.gap,
                pass: report.pass,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    instances.sort_by_key(|r| r.id);
    let passed = instances.iter().filter(|r| r.pass).count() as u32;
    Ok(BatteryReport {
        report_schema: REPORT_SCHEMA_BATTERY,
        master_seed: cfg.master_seed,
        total: cfg.instances,
        passed,
        all_pass: passed == cfg.instances,
        instances,
        manifest: RunManifest::new().with_seed(cfg.master_seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::delta_mult_divergence;
    use crate::exact::{rat_to_f64, rat_zero};
    use std::sync::Arc;

    fn pair_dataset() -> Dataset {
        two_record_fixture().unwrap()
    }

    #[test]
    fn two_record_universe_is_the_swap_pair() {
        let x0 = pair_dataset();
        let spec = derive_invariants(x0.schema()).unwrap();
        let universe = enumerate_universe(&x0, &spec, &Caps::default()).unwrap();
        assert_eq!(universe.len(), 2);
        let labels: Vec<String> = universe.iter().map(|d| d.canonical_label()).collect();
        assert!(labels.contains(&x0.canonical_label()));
        assert!(labels.contains(&"k,b;k,a".to_string()));
    }

    #[test]
    fn constant_swap_values_make_a_singleton_universe() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("keep", &["k"], Role::Holding, false),
                Variable::new("move", &["a", "b"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let x0 = Dataset::from_names(schema, &[vec!["k", "a"], vec!["k", "a"], vec!["k", "a"]])
            .unwrap();
        let spec = derive_invariants(x0.schema()).unwrap();
        let universe = enumerate_universe(&x0, &spec, &Caps::default()).unwrap();
        assert_eq!(universe.len(), 1);
    }

    #[test]
    fn universe_size_is_member_independent() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("g", &["A", "B"], Role::Holding, true),
                Variable::new("s", &["x", "y", "z"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let x0 = Dataset::from_names(
            schema,
            &[vec!["A", "x"], vec!["A", "y"], vec!["A", "z"], vec!["B", "x"]],
        )
        .unwrap();
        let spec = derive_invariants(x0.schema()).unwrap();
        let universe = enumerate_universe(&x0, &spec, &Caps::default()).unwrap();
        assert_eq!(universe.len(), 6);
        for member in &universe {
            let again = enumerate_universe(member, &spec, &Caps::default()).unwrap();
            assert_eq!(again.len(), universe.len());
        }
        assert_eq!(universe.len() as u128, universe_size_estimate(&x0));
    }

    #[test]
    fn universe_cap_errors_with_estimate() {
        let schema = Arc::new(
            Schema::new(vec![Variable::new(
                "s",
                &["a", "b", "c", "d"],
                Role::Swapping,
                false,
            )])
            .unwrap(),
        );
        let rows: Vec<Vec<&str>> = (0..12).map(|_| vec!["a"]).collect();
        let x0 = Dataset::from_names(schema, &rows).unwrap();
        let spec = derive_invariants(x0.schema()).unwrap();
        let err = enumerate_universe(&x0, &spec, &Caps::default()).unwrap_err();
        match err {
            Error::CapExceeded { estimate, cap, .. } => {
                assert_eq!(estimate, 4u128.pow(12));
                assert_eq!(cap, 1_000_000);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn verify_two_record_pair() {
        let x0 = pair_dataset();
        let report = verify_psa(&x0, &rat(1, 2), &Caps::default()).unwrap();
        assert!(report.pass);
        assert_eq!(report.eps_tight.exact_ln_arg.as_deref(), Some("7/1"));
        assert_eq!(report.eps_tight.exact_divisor, Some(2));
        assert!((report.eps_tight.value - 0.5 * (7.0f64).ln()).abs() < 1e-12);
        assert!((report.budget.value - (3.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn verify_sweeps_the_rate_grid() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("g", &["A", "B"], Role::Holding, true),
                Variable::new("s", &["x", "y"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let x0 = Dataset::from_names(
            schema,
            &[vec!["A", "x"], vec!["A", "y"], vec!["B", "x"], vec!["B", "y"]],
        )
        .unwrap();
        for k in 1..=9 {
            let report = verify_psa(&x0, &rat(k, 10), &Caps::default()).unwrap();
            assert!(report.pass, "rate {k}/10 failed: gap {:?}", report.gap);
        }
    }

    #[test]
    fn singleton_universe_verifies_trivially() {
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("keep", &["k"], Role::Holding, false),
                Variable::new("move", &["a", "b"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let x0 =
            Dataset::from_names(schema, &[vec!["k", "a"], vec!["k", "a"]]).unwrap();
        let report = verify_psa(&x0, &rat(1, 2), &Caps::default()).unwrap();
        assert!(report.degenerate_universe);
        assert_eq!(report.eps_tight.value, 0.0);
        assert!(report.pass);
    }

    #[test]
    fn delta_relaxation_never_raises_the_tight_budget() {
        // across every dataset of a small fixed-n domain
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("g", &["A", "B"], Role::Holding, true),
                Variable::new("s", &["x", "y"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let caps = Caps::default();
        let p = rat(1, 2);
        for n in 1..=3usize {
            let domain = Domain::fixed(schema.clone(), n);
            for x0 in domain.enumerate(10_000).unwrap() {
                let inv = derive_invariants(x0.schema()).unwrap();
                let universe = enumerate_universe(&x0, &inv, &caps).unwrap();
                let mut spec = psa_specification(&x0, &p).unwrap();
                let strict = tight_eps(&spec, &universe, &p, &caps).unwrap();
                spec.output_premetric = OutputPremetricKind::DeltaMultiplicative {
                    delta: rat(1, 8),
                };
                let relaxed = tight_eps(&spec, &universe, &p, &caps).unwrap();
                assert!(
                    relaxed.le_with_tol(&strict, 0.0),
                    "delta relaxation increased the budget on {}",
                    x0.canonical_label()
                );
            }
        }
    }

    #[test]
    fn tight_budget_matches_ordered_pair_rescan() {
        // independent double loop over ordered pairs
        let schema = Arc::new(
            Schema::new(vec![
                Variable::new("g", &["A"], Role::Holding, true),
                Variable::new("s", &["x", "y", "z"], Role::Swapping, false),
            ])
            .unwrap(),
        );
        let x0 = Dataset::from_names(schema, &[vec!["A", "x"], vec!["A", "y"], vec!["A", "z"]])
            .unwrap();
        let caps = Caps::default();
        let p = rat(3, 10);
        let report = verify_psa(&x0, &p, &caps).unwrap();

        let inv = derive_invariants(x0.schema()).unwrap();
        let universe = enumerate_universe(&x0, &inv, &caps).unwrap();
        let mut best = 0.0f64;
        for a in &universe {
            for b in &universe {
                if a == b {
                    continue;
                }
                let d = crate::schema::hamming_distance(a, b).unwrap();
                let pa = psa_exact_distribution(a, &p, &caps).unwrap();
                let pb = psa_exact_distribution(b, &p, &caps).unwrap();
                let div = crate::divergences::mult_divergence(&pa, &pb);
                best = best.max(div.to_f64() / d as f64);
            }
        }
        assert!((best - report.eps_tight.value).abs() < 1e-12);
    }

    #[test]
    fn gaming_scenarios_hold_their_contracts() {
        let caps = Caps::default();
        for kind in GamingScenarioKind::all() {
            let report = run_gaming_scenario(kind, &caps).unwrap();
            assert!(
                report.distributions_identical,
                "{}: distributions changed",
                report.scenario
            );
            assert!(
                report.nominal_strictly_decreased,
                "{}: nominal budget did not strictly decrease",
                report.scenario
            );
        }
    }

    #[test]
    fn delta_zero_vs_delta_tenth_is_strict_on_the_pair() {
        let caps = Caps::default();
        let p = rat(1, 2);
        let x0 = pair_dataset();
        let y = {
            let mut y = x0.clone();
            // the swapped partner
            let swap_vars = x0.schema().swapping_vars();
            let b0 = x0.swap_block(1, &swap_vars);
            let a0 = x0.swap_block(0, &swap_vars);
            y.set_swap_block(0, &swap_vars, &b0);
            y.set_swap_block(1, &swap_vars, &a0);
            y
        };
        let px = psa_exact_distribution(&x0, &p, &caps).unwrap();
        let py = psa_exact_distribution(&y, &p, &caps).unwrap();
        let strict = crate::divergences::mult_divergence(&px, &py);
        let relaxed = delta_mult_divergence(&px, &py, &rat(1, 10)).unwrap();
        assert_eq!(
            relaxed.total_cmp(&strict),
            std::cmp::Ordering::Less,
            "positive delta must strictly shrink a finite nonzero divergence"
        );
        assert!(rat_to_f64(&rat_zero()) == 0.0);
    }

    #[test]
    fn constant_paradox_reports_zero() {
        let x0 = pair_dataset();
        let report = constant_paradox_report(&x0, &Caps::default()).unwrap();
        assert_eq!(report.eps_tight.value, 0.0);
        assert!(report.pass);
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn small_battery_passes() {
        let cfg = BatteryConfig {
            instances: 20,
            ..BatteryConfig::default()
        };
        let report = run_battery(&cfg, &Caps::default()).unwrap();
        assert!(report.all_pass, "failures: {:?}", report
            .instances
            .iter()
            .filter(|i| !i.pass)
            .map(|i| i.id)
            .collect::<Vec<_>>());
        // determinism: rerun and byte-compare
        let again = run_battery(&cfg, &Caps::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&report).unwrap(),
            serde_json::to_string(&again).unwrap()
        );
    }
}
