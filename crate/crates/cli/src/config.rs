//! Experiment configuration: a strict, versioned JSON schema. Unknown
//! fields are rejected everywhere, and tolerance blocks are all-or-nothing
//! so that a config file pins every threshold it mentions (library
//! defaults apply only when a block is absent entirely). The schema is
//! documented in `schemas/experiment-config.schema.json`.

use serde::{Deserialize, Serialize};

use rotcap_core::aoperator::{AOperator, ClaimedConstants};
use rotcap_core::criteria::{CriteriaOpts, ShellStrategy};
use rotcap_core::{make_profile, ImproperOpts, ModelSpace, ProfileParams, QuadOpts};

/// Errors found while loading or validating a configuration; they map to
/// exit code 2 and the message names the offending field.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub space: SpaceSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacitySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator_check: Option<OperatorCheckSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    pub profile: ProfileSpec,
    pub n: u32,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ProfileParamsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub kind: String,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<OperatorParamsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claimed_constants: Option<ClaimedSpec>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorParamsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimedSpec {
    pub alpha: f64,
    pub beta: f64,
    pub d1: f64,
    pub d2: f64,
}

/// All fields required: a config that pins tolerances pins all of them.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub quad_abs: f64,
    pub quad_rel: f64,
    pub divergence_threshold: f64,
    pub max_doublings: u32,
    pub stagnation_ratio: f64,
    pub stagnation_window: u32,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell_k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shell_window: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capseq_k_max: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capseq_max_doublings: Option<u32>,
    /// Explicit (r_k, s_k) shells for the volume-growth search; dyadic
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shells: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySpec {
    pub r1: f64,
    pub r2_values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_intervals: Option<usize>,
    #[serde(default)]
    pub include_numerical: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveSpec {
    pub solution: SolutionSpec,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum SolutionSpec {
    Constant {
        value: f64,
        from: f64,
        to: f64,
        intervals: usize,
    },
    Flux {
        a: f64,
        c: f64,
        r_max: f64,
        intervals: usize,
    },
    EtaAnnulus {
        r1: f64,
        r2: f64,
        intervals: usize,
    },
    EtaExterior {
        a: f64,
        r_max: f64,
        intervals: usize,
    },
    AnnulusProfile {
        a: f64,
        r: f64,
        intervals: usize,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSpec {
    pub a: f64,
    pub u: SolutionSpec,
    pub v: SolutionSpec,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub profiles: Vec<ProfileSpec>,
    pub dims: Vec<u32>,
    pub ps: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classify: Option<ClassifySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<CapacitySpec>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorCheckSpec {
    pub samples: usize,
    pub dim: usize,
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != SUPPORTED_VERSION {
            return Err(ConfigError(format!(
                "version: expected {SUPPORTED_VERSION}, got {}",
                self.version
            )));
        }
        if let Some(cap) = &self.capacity {
            cap.validate("capacity")?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.profiles.is_empty() || sweep.dims.is_empty() || sweep.ps.is_empty() {
                return Err(ConfigError(
                    "sweep.profiles, sweep.dims and sweep.ps must be nonempty".into(),
                ));
            }
            if let Some(cap) = &sweep.capacity {
                cap.validate("sweep.capacity")?;
            }
        }
        if let Some(cmp) = &self.compare {
            if !(cmp.a > 0.0) {
                return Err(ConfigError(format!(
                    "compare.a: must be positive, got {}",
                    cmp.a
                )));
            }
            if !(cmp.tol >= 0.0) {
                return Err(ConfigError(format!(
                    "compare.tol: must be nonnegative, got {}",
                    cmp.tol
                )));
            }
            cmp.u.validate("compare.u")?;
            cmp.v.validate("compare.v")?;
        }
        if let Some(solve) = &self.solve {
            solve.solution.validate("solve.solution")?;
        }
        if let Some(check) = &self.operator_check {
            if check.samples == 0 || check.dim == 0 {
                return Err(ConfigError(
                    "operator_check.samples and operator_check.dim must be positive".into(),
                ));
            }
            if self.operator.is_none() {
                return Err(ConfigError(
                    "operator_check requires an operator block".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn build_space(&self) -> Result<ModelSpace, ConfigError> {
        build_space_from(&self.space)
    }

    pub fn build_operator(&self) -> Result<AOperator, ConfigError> {
        match &self.operator {
            Some(spec) => build_operator_from(spec),
            // default operator: the p-Laplacian of the space exponent
            None => {
                AOperator::p_power(self.space.p).map_err(|e| ConfigError(format!("space.p: {e}")))
            }
        }
    }

    pub fn quad_opts(&self) -> QuadOpts {
        match &self.tolerances {
            Some(t) => QuadOpts {
                abs_tol: t.quad_abs,
                rel_tol: t.quad_rel,
                ..QuadOpts::default()
            },
            None => QuadOpts::default(),
        }
    }

    pub fn improper_opts(&self) -> ImproperOpts {
        match &self.tolerances {
            Some(t) => ImproperOpts {
                quad: QuadOpts {
                    abs_tol: t.quad_abs,
                    rel_tol: t.quad_rel,
                    ..QuadOpts::default()
                },
                divergence_threshold: t.divergence_threshold,
                max_doublings: t.max_doublings,
                stagnation_ratio: t.stagnation_ratio,
                stagnation_window: t.stagnation_window,
            },
            None => ImproperOpts::default(),
        }
    }

    pub fn criteria_opts(
        &self,
        block: &Option<ClassifySpec>,
        mode: rotcap_core::exec::Mode,
    ) -> (CriteriaOpts, ShellStrategy) {
        let mut opts = CriteriaOpts {
            improper: self.improper_opts(),
            mode,
            ..CriteriaOpts::default()
        };
        let mut strategy = ShellStrategy::Dyadic;
        if let Some(c) = block {
            if let Some(v) = c.base_radius {
                opts.base_radius = v;
            }
            if let Some(v) = c.shell_k_max {
                opts.shell_k_max = v;
            }
            if let Some(v) = c.shell_window {
                opts.shell_window = v;
            }
            if let Some(v) = c.capseq_k_max {
                opts.capseq_k_max = v;
            }
            if let Some(v) = c.capseq_max_doublings {
                opts.capseq_max_doublings = v;
            }
            if let Some(shells) = &c.shells {
                strategy = ShellStrategy::Explicit(shells.clone());
            }
        }
        (opts, strategy)
    }
}

impl CapacitySpec {
    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        if !(self.r1 > 0.0) {
            return Err(ConfigError(format!(
                "{path}.r1: must be positive, got {}",
                self.r1
            )));
        }
        if self.r2_values.is_empty() {
            return Err(ConfigError(format!("{path}.r2_values: must be nonempty")));
        }
        for (i, &r2) in self.r2_values.iter().enumerate() {
            if !(r2 > self.r1) {
                return Err(ConfigError(format!(
                    "{path}.r2_values[{i}]: {r2} must exceed r1 = {}",
                    self.r1
                )));
            }
        }
        if let Some(m) = self.mesh_intervals {
            if m < 16 {
                return Err(ConfigError(format!(
                    "{path}.mesh_intervals: must be at least 16, got {m}"
                )));
            }
        }
        Ok(())
    }
}

impl SolutionSpec {
    fn validate(&self, path: &str) -> Result<(), ConfigError> {
        let bad = |f: &str, v: f64| ConfigError(format!("{path}.{f}: invalid value {v}"));
        match self {
            SolutionSpec::Constant {
                from,
                to,
                intervals,
                ..
            } => {
                if !(*from > 0.0) {
                    return Err(bad("from", *from));
                }
                if !(*to > *from) {
                    return Err(bad("to", *to));
                }
                if *intervals < 1 {
                    return Err(ConfigError(format!("{path}.intervals: must be positive")));
                }
            }
            SolutionSpec::Flux { a, c, r_max, .. } => {
                if !(*a > 0.0) {
                    return Err(bad("a", *a));
                }
                if !(*c >= 0.0) {
                    return Err(bad("c", *c));
                }
                if !(*r_max > *a) {
                    return Err(bad("r_max", *r_max));
                }
            }
            SolutionSpec::EtaAnnulus { r1, r2, .. } => {
                if !(*r1 > 0.0) {
                    return Err(bad("r1", *r1));
                }
                if !(*r2 > *r1) {
                    return Err(bad("r2", *r2));
                }
            }
            SolutionSpec::EtaExterior { a, r_max, .. } => {
                if !(*a > 0.0) {
                    return Err(bad("a", *a));
                }
                if !(*r_max > *a) {
                    return Err(bad("r_max", *r_max));
                }
            }
            SolutionSpec::AnnulusProfile { a, r, .. } => {
                if !(*a > 0.0) {
                    return Err(bad("a", *a));
                }
                if !(*r > *a) {
                    return Err(bad("r", *r));
                }
            }
        }
        Ok(())
    }
}

pub fn build_space_from(spec: &SpaceSpec) -> Result<ModelSpace, ConfigError> {
    let params = ProfileParams {
        b: spec.profile.params.as_ref().and_then(|p| p.b),
        lambda: spec.profile.params.as_ref().and_then(|p| p.lambda),
        table: spec.profile.table.clone(),
    };
    let profile = make_profile(&spec.profile.kind, &params)
        .map_err(|e| ConfigError(format!("space.profile: {e}")))?;
    ModelSpace::new(profile, spec.n, spec.p).map_err(|e| ConfigError(format!("space: {e}")))
}

pub fn build_operator_from(spec: &OperatorSpec) -> Result<AOperator, ConfigError> {
    let op = match spec.kind.as_str() {
        "p_power" => AOperator::p_power(spec.p),
        "scaled_p_power" => {
            let kappa = spec
                .params
                .as_ref()
                .and_then(|p| p.kappa)
                .ok_or_else(|| ConfigError("operator.params.kappa: required".into()))?;
            AOperator::scaled_p_power(spec.p, kappa)
        }
        "blended" => {
            let theta = spec
                .params
                .as_ref()
                .and_then(|p| p.theta)
                .ok_or_else(|| ConfigError("operator.params.theta: required".into()))?;
            AOperator::blended(spec.p, theta)
        }
        other => return Err(ConfigError(format!(
            "operator.kind: unknown kind `{other}` (expected p_power, scaled_p_power or blended)"
        ))),
    }
    .map_err(|e| ConfigError(format!("operator: {e}")))?;

    Ok(match spec.claimed_constants {
        Some(c) => op.with_claimed(ClaimedConstants {
            alpha: c.alpha,
            beta: c.beta,
            d1: c.d1,
            d2: c.d2,
        }),
        None => op,
    })
}
