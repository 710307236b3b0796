//! JSON report forms. Every machine-readable output carries a versioned
//! `report_schema` field and a run manifest (tool version, config hash, seed)
//! so results can be reproduced from the report alone.

use serde::Serialize;

use crate::exact::{format_rational, sig10, PlbValue};

pub const REPORT_SCHEMA_PLB: &str = "dpspec/plb-report/v1";
pub const REPORT_SCHEMA_GAMING: &str = "dpspec/gaming-scenario/v1";
pub const REPORT_SCHEMA_INVARIANTS: &str = "dpspec/invariants/v1";
pub const REPORT_SCHEMA_RECONSTRUCTION: &str = "dpspec/reconstruction/v1";
pub const REPORT_SCHEMA_BATTERY: &str = "dpspec/battery/v1";
pub const REPORT_SCHEMA_SWAP: &str = "dpspec/swap-run/v1";

/// A budget value in report form. `value` is null when infinite (JSON has no
/// infinity); `rendered` always carries the 10-significant-digit rendering,
/// and exact values keep their symbolic `ln(arg)/divisor` parts.
#[derive(Debug, Clone, Serialize)]
pub struct PlbValueJson {
    pub value: f64,
    pub rendered: String,
    pub infinite: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_ln_arg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_divisor: Option<u64>,
}

impl From<&PlbValue> for PlbValueJson {
    fn from(v: &PlbValue) -> Self {
        let value = v.to_f64();
        let (arg, divisor) = match v.exact_parts() {
            Some((arg, d)) => (Some(format_rational(arg)), Some(d)),
            None => (None, None),
        };
        PlbValueJson {
            value,
            rendered: sig10(value),
            infinite: v.is_infinite(),
            exact_ln_arg: arg,
            exact_divisor: divisor,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn new() -> Self {
        RunManifest {
            tool: "dpspec",
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: None,
            seed: None,
        }
    }

    pub fn with_config_hash(mut self, hash: String) -> Self {
        self.config_sha256 = Some(hash);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

impl Default for RunManifest {
    fn default() -> Self {
        Self::new()
    }
}

/// The pair attaining the tight budget.
#[derive(Debug, Clone, Serialize)]
pub struct MaxPairJson {
    pub x: String,
    pub x_prime: String,
    pub distance: u64,
    pub divergence: PlbValueJson,
}

/// Result of verifying one universe: the tight per-universe budget against
/// the specification's budget.
#[derive(Debug, Clone, Serialize)]
pub struct PlbReport {
    pub report_schema: &'static str,
    pub universe_digest: String,
    pub universe_size: usize,
    pub n_records: usize,
    pub strata_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_rate: Option<String>,
    pub eps_tight: PlbValueJson,
    pub budget: PlbValueJson,
    /// `budget - eps_tight` as floats; absent when not meaningful (both
    /// infinite).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    pub pass: bool,
    pub degenerate_universe: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maximizing_pair: Option<MaxPairJson>,
    pub notes: Vec<String>,
    pub manifest: RunManifest,
}

/// One side of a budget-gaming comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSide {
    pub spec_summary: String,
    pub nominal_eps: PlbValueJson,
}

/// A nominal-budget maneuver: the specification changes, the mechanism's
/// exact output distributions do not.
#[derive(Debug, Clone, Serialize)]
pub struct GamingScenarioReport {
    pub report_schema: &'static str,
    pub scenario: String,
    pub description: String,
    pub before: ScenarioSide,
    pub after: ScenarioSide,
    /// Byte comparison of the exact output PMFs under both specifications.
    pub distributions_identical: bool,
    pub nominal_strictly_decreased: bool,
    pub notes: Vec<String>,
    pub manifest: RunManifest,
}
