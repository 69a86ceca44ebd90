//! Scenario configuration files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use rkhs_purity::dilation::{BCLTriple, Colligation};
use rkhs_purity::kernels::{BallKernelSpec, KernelSpec1D};
use rkhs_purity::purity::Verdict;
use rkhs_purity::spaces::{Domain, TruncatedBasis};
use rkhs_purity::wire::{self, SymbolLiteral};
use rkhs_purity::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Purity,
    Identity,
    Cnp,
    Bcl,
    Colligation,
    Decay,
    Witness,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Purity => "purity",
            Task::Identity => "identity",
            Task::Cnp => "cnp",
            Task::Bcl => "bcl",
            Task::Colligation => "colligation",
            Task::Decay => "decay",
            Task::Witness => "witness",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Hardy,
    Bergman,
    Dirichlet,
    WeightedBergman,
    DruryArveson,
    Hm,
    UnitarilyInvariant,
}

/// Flat description of a truncated space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub family: Family,
    pub n: usize,
    pub degree_cap: usize,
    #[serde(default = "one")]
    pub coeff_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_coeffs: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

/// Kernel behind a space, for series-level tasks.
pub enum KernelRef {
    Factor(KernelSpec1D),
    Ball(BallKernelSpec),
}

impl SpaceConfig {
    pub fn kernel(&self) -> Result<KernelRef, CliError> {
        let unused = |name: &str, present: bool| {
            if present {
                Err(CliError::Config(format!("field `{name}` does not apply to family {:?}", self.family)))
            } else {
                Ok(())
            }
        };
        let needs = |name: &str| CliError::Config(format!("family {:?} needs field `{name}`", self.family));
        match self.family {
            Family::WeightedBergman => {}
            _ => unused("alpha", self.alpha.is_some())?,
        }
        match self.family {
            Family::Hm => {}
            _ => unused("m", self.m.is_some())?,
        }
        match self.family {
            Family::UnitarilyInvariant => {}
            _ => unused("a_coeffs", self.a_coeffs.is_some())?,
        }
        Ok(match self.family {
            Family::Hardy => KernelRef::Factor(KernelSpec1D::Hardy),
            Family::Bergman => KernelRef::Factor(KernelSpec1D::Bergman),
            Family::Dirichlet => KernelRef::Factor(KernelSpec1D::Dirichlet),
            Family::WeightedBergman => {
                KernelRef::Factor(KernelSpec1D::weighted_bergman(self.alpha.ok_or_else(|| needs("alpha"))?)?)
            }
            Family::DruryArveson => KernelRef::Ball(BallKernelSpec::drury_arveson(self.n)?),
            Family::Hm => KernelRef::Ball(BallKernelSpec::hm(self.n, self.m.ok_or_else(|| needs("m"))?)?),
            Family::UnitarilyInvariant => KernelRef::Ball(BallKernelSpec::unitarily_invariant(
                self.n,
                self.a_coeffs.clone().ok_or_else(|| needs("a_coeffs"))?,
            )?),
        })
    }

    pub fn domain(&self) -> Result<Domain, CliError> {
        Ok(match self.kernel()? {
            KernelRef::Factor(f) => Domain::polydisc(f, self.n),
            KernelRef::Ball(k) => Domain::ball(k),
        })
    }

    pub fn basis(&self) -> Result<TruncatedBasis, CliError> {
        Ok(TruncatedBasis::new(self.domain()?, self.degree_cap, self.coeff_dim)?)
    }

    pub fn is_hardy_polydisc(&self) -> bool {
        self.family == Family::Hardy
    }
}

/// Commuting tuple `X` and defect split `G` for the colligation task.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefectData {
    pub x: Vec<MatrixLiteral>,
    pub g: Vec<MatrixLiteral>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MatrixLiteral(#[serde(with = "wire::matrix")] pub DMatrix<C64>);

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub count: usize,
    #[serde(default = "one")]
    pub symbol_degree: usize,
    /// Extra symbols whose constant term is forced unitary.
    #[serde(default)]
    pub forced_unitary: usize,
    /// Upper bound on the coefficient dimension of random BCL triples and
    /// colligations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_dim_max: Option<usize>,
    /// Block sizes of random colligations; one per variable.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_dims: Option<Vec<usize>>,
}

/// Expected outcomes; a mismatch is a failed property.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub is_cnp: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_violation: Option<usize>,
    /// The task is expected to refuse its input with this error kind.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refused: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub scenario_id: String,
    pub task: Task,
    pub space: SpaceConfig,
    /// Task variant: `slice` for purity; `defect` or `chen` for identity;
    /// `restriction` for decay.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<SymbolLiteral>,
    /// Inner symbol for the restriction mode of the decay task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<SymbolLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triple: Option<BCLTriple>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colligation: Option<Colligation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub defects: Option<DefectData>,
    /// Monomial generators of an invariant subspace for the witness task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<usize>>>,
    /// Number of powers in decay curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expectation>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

/// Named tolerances with their defaults.
pub const TOLERANCES: &[(&str, f64, &str)] = &[
    ("purity", 1e-8, "spectral radius margin below one"),
    ("residual", 1e-10, "operator identity and commutator residuals"),
    ("identity", 1e-12, "polynomial coefficient identities"),
    ("cnp", 1e-12, "sign tolerance of series coefficients"),
    ("contractivity", 1e-10, "excess of a norm over one"),
    ("ratio", 1e-8, "relative error of decay ratios"),
    ("witness", 1e-8, "invariance residual of a witness"),
    ("monotone", 1e-12, "increase allowed in nonincreasing sequences"),
];

#[derive(Clone, Debug)]
pub struct Tolerances(BTreeMap<&'static str, f64>);

impl Tolerances {
    pub fn resolve(overrides: &BTreeMap<String, f64>) -> Result<Self, CliError> {
        let mut map: BTreeMap<&'static str, f64> = TOLERANCES.iter().map(|(k, v, _)| (*k, *v)).collect();
        for (name, &value) in overrides {
            let Some((key, _, _)) = TOLERANCES.iter().find(|(k, _, _)| k == name) else {
                return Err(CliError::Config(format!("unknown tolerance `{name}`")));
            };
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Config(format!("tolerance `{name}` must be positive, got {value}")));
            }
            map.insert(key, value);
        }
        Ok(Tolerances(map))
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0[name]
    }

    pub fn as_map(&self) -> BTreeMap<String, f64> {
        self.0.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: ScenarioConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.scenario_id.is_empty() {
            return Err(CliError::Config("scenario_id is empty".into()));
        }
        if self.sweep.is_some() && self.seed.is_none() {
            return Err(CliError::Config("a sweep needs a seed".into()));
        }
        Tolerances::resolve(&self.tolerances)?;
        self.space.kernel()?;
        Ok(())
    }

    /// Applies a `name=value` tolerance override.
    pub fn override_tolerance(&mut self, spec: &str) -> Result<(), CliError> {
        let (name, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("tolerance override `{spec}` is not name=value")))?;
        let value: f64 =
            value.trim().parse().map_err(|_| CliError::Config(format!("tolerance value `{value}` is not a number")))?;
        self.tolerances.insert(name.trim().to_string(), value);
        Tolerances::resolve(&self.tolerances).map(|_| ())
    }
}
