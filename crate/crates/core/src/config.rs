//! The structured run configuration: schema and roles, mechanism parameters,
//! seed, premetric choice, and enumeration caps. One TOML file; unknown keys
//! are rejected. Numeric rates may be written as strings (`p = "0.3"`) for an
//! exact decimal reading, or as TOML floats, which are taken at their binary
//! value.

use std::path::Path;
use std::sync::Arc;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::divergences::OutputPremetricKind;
use crate::error::{Error, Result};
use crate::exact::{parse_rational, Rational};
use crate::mechanisms::MechanismDescriptor;
use crate::schema::{Role, Schema, Variable};
use crate::spec::InputPremetric;
use crate::verifier::BatteryConfig;
use crate::Caps;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum NumberOrText {
    Int(i64),
    Float(f64),
    Text(String),
}

impl NumberOrText {
    pub fn to_rational(&self) -> Result<Rational> {
        match self {
            NumberOrText::Int(i) => Ok(Rational::from_integer((*i).into())),
            NumberOrText::Float(f) => Rational::from_float(*f)
                .ok_or_else(|| Error::Config(format!("non-finite number {f}"))),
            NumberOrText::Text(s) => parse_rational(s),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: Option<SchemaConfig>,
    pub mechanism: Option<MechanismConfig>,
    pub seed: Option<u64>,
    pub premetric: Option<PremetricConfig>,
    pub caps: Option<CapsConfig>,
    pub battery: Option<BatterySection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaConfig {
    pub variables: Vec<VariableConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableConfig {
    pub name: String,
    pub values: Vec<String>,
    pub role: RoleConfig,
    #[serde(default)]
    pub matching: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleConfig {
    Swapping,
    Holding,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MechanismConfig {
    pub kind: MechanismKind,
    pub p: Option<NumberOrText>,
    pub alpha_cross: Option<NumberOrText>,
    pub flip: Option<NumberOrText>,
    /// For the constant mechanism: CSV with the released dataset, resolved
    /// relative to the config file. Defaults to the run's input dataset.
    pub constant_csv: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MechanismKind {
    Psa,
    Pum,
    RandomizedResponse,
    Constant,
    Identity,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PremetricConfig {
    pub output: OutputKindConfig,
    pub delta: Option<NumberOrText>,
    pub alpha: Option<NumberOrText>,
    pub alpha_max: Option<NumberOrText>,
    pub input: Option<InputKindConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKindConfig {
    Multiplicative,
    DeltaMultiplicative,
    Renyi,
    Zcdp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputKindConfig {
    HammingRecords,
    HammingCells,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapsConfig {
    pub universe_candidates: Option<u64>,
    pub stratum: Option<usize>,
    pub reconstruct_candidates: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatterySection {
    pub master_seed: Option<u64>,
    pub instances: Option<u32>,
    pub max_records: Option<usize>,
    pub max_strata: Option<usize>,
    pub p_grid: Option<Vec<NumberOrText>>,
}

impl RunConfig {
    /// Loads and parses a config file, returning it with the SHA-256 of the
    /// raw bytes for the run manifest.
    pub fn load(path: &Path) -> Result<(RunConfig, String)> {
        let bytes = std::fs::read(path)?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|_| Error::Config("config is not UTF-8".into()))?;
        let cfg: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        let mut hasher = Sha256::new();
        hasher.update(&bytes);
        let hash = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok((cfg, hash))
    }

    pub fn build_schema(&self) -> Result<Arc<Schema>> {
        let schema_cfg = self
            .schema
            .as_ref()
            .ok_or_else(|| Error::Config("missing [schema] section".into()))?;
        let variables = schema_cfg
            .variables
            .iter()
            .map(|v| Variable {
                name: v.name.clone(),
                values: v.values.clone(),
                role: match v.role {
                    RoleConfig::Swapping => Role::Swapping,
                    RoleConfig::Holding => Role::Holding,
                },
                matching: v.matching,
            })
            .collect();
        Ok(Arc::new(Schema::new(variables)?))
    }

    pub fn build_caps(&self) -> Caps {
        let mut caps = Caps::default();
        if let Some(c) = &self.caps {
            if let Some(v) = c.universe_candidates {
                caps.universe_candidates = v;
            }
            if let Some(v) = c.stratum {
                caps.stratum = v;
            }
            if let Some(v) = c.reconstruct_candidates {
                caps.reconstruct_candidates = v;
            }
        }
        caps
    }

    /// Builds the mechanism descriptor. `config_dir` resolves the constant
    /// mechanism's CSV; `fallback_constant` is used when none is configured.
    pub fn build_mechanism(
        &self,
        schema: &Arc<Schema>,
        config_dir: &Path,
        fallback_constant: Option<&crate::schema::Dataset>,
    ) -> Result<MechanismDescriptor> {
        let mech = self
            .mechanism
            .as_ref()
            .ok_or_else(|| Error::Config("missing [mechanism] section".into()))?;
        let rate = |field: &Option<NumberOrText>, name: &str| -> Result<Rational> {
            field
                .as_ref()
                .ok_or_else(|| Error::Config(format!("mechanism.{name} is required")))?
                .to_rational()
        };
        match mech.kind {
            MechanismKind::Psa => Ok(MechanismDescriptor::Psa {
                p: rate(&mech.p, "p")?,
            }),
            MechanismKind::Pum => Ok(MechanismDescriptor::Pum {
                p: rate(&mech.p, "p")?,
                alpha_cross: rate(&mech.alpha_cross, "alpha_cross")?,
            }),
            MechanismKind::RandomizedResponse => Ok(MechanismDescriptor::RandomizedResponse {
                flip: rate(&mech.flip, "flip")?,
            }),
            MechanismKind::Constant => {
                let value = match &mech.constant_csv {
                    Some(rel) => {
                        let path = config_dir.join(rel);
                        crate::csvio::read_dataset_csv(&path, schema)?
                    }
                    None => fallback_constant
                        .ok_or_else(|| {
                            Error::Config(
                                "constant mechanism needs constant_csv or an input dataset".into(),
                            )
                        })?
                        .clone(),
                };
                Ok(MechanismDescriptor::Constant { value })
            }
            MechanismKind::Identity => Ok(MechanismDescriptor::Identity),
        }
    }

    /// The swap rate, for commands that require the swapping mechanism.
    pub fn swap_rate(&self) -> Result<Rational> {
        let mech = self
            .mechanism
            .as_ref()
            .ok_or_else(|| Error::Config("missing [mechanism] section".into()))?;
        if mech.kind != MechanismKind::Psa {
            return Err(Error::Config(
                "this command verifies the swapping mechanism; set mechanism.kind = \"psa\"".into(),
            ));
        }
        mech.p
            .as_ref()
            .ok_or_else(|| Error::Config("mechanism.p is required".into()))?
            .to_rational()
    }

    pub fn build_output_premetric(&self) -> Result<Option<OutputPremetricKind>> {
        let Some(pm) = &self.premetric else {
            return Ok(None);
        };
        let kind = match pm.output {
            OutputKindConfig::Multiplicative => OutputPremetricKind::Multiplicative,
            OutputKindConfig::DeltaMultiplicative => OutputPremetricKind::DeltaMultiplicative {
                delta: pm
                    .delta
                    .as_ref()
                    .ok_or_else(|| Error::Config("premetric.delta is required".into()))?
                    .to_rational()?,
            },
            OutputKindConfig::Renyi => OutputPremetricKind::RenyiOfOrder {
                alpha: pm
                    .alpha
                    .as_ref()
                    .ok_or_else(|| Error::Config("premetric.alpha is required".into()))?
                    .to_rational()?,
            },
            OutputKindConfig::Zcdp => OutputPremetricKind::ZcdpSupremum {
                alpha_max: pm
                    .alpha_max
                    .as_ref()
                    .ok_or_else(|| Error::Config("premetric.alpha_max is required".into()))?
                    .to_rational()?,
            },
        };
        kind.validate()?;
        Ok(Some(kind))
    }

    pub fn build_input_premetric(&self) -> InputPremetric {
        match self.premetric.as_ref().and_then(|p| p.input) {
            Some(InputKindConfig::HammingCells) => InputPremetric::HammingCells,
            _ => InputPremetric::HammingRecords,
        }
    }

    pub fn build_battery(&self) -> Result<Option<BatteryConfig>> {
        let Some(b) = &self.battery else {
            return Ok(None);
        };
        let mut cfg = BatteryConfig::default();
        if let Some(v) = b.master_seed {
            cfg.master_seed = v;
        }
        if let Some(v) = b.instances {
            cfg.instances = v;
        }
        if let Some(v) = b.max_records {
            cfg.max_records = v;
        }
        if let Some(v) = b.max_strata {
            cfg.max_strata = v;
        }
        if let Some(grid) = &b.p_grid {
            cfg.p_grid = grid
                .iter()
                .map(|v| v.to_rational())
                .collect::<Result<Vec<_>>>()?;
        }
        if cfg.p_grid.is_empty() {
            return Err(Error::Config("battery.p_grid must not be empty".into()));
        }
        Ok(Some(cfg))
    }
}
