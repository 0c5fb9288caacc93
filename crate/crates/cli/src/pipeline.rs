//! Command pipelines: each takes a validated config, computes through the
//! core crate, and writes its artifacts into the output directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rotcap_core::aoperator::{
    structure_inequalities_check, validate_conditions, AOperator, GridOpts, StructureCheckOpts,
    StructureReport, ValidationReport,
};
use rotcap_core::capacity::{
    annulus_capacity_closed_form, cutoff_upper_bound, global_capacity, numerical_capacity,
    CapacityEstimate, MeshOpts,
};
use rotcap_core::criteria::{classify, pggb_search, ParabolicityVerdict};
use rotcap_core::exec::{map_collect, Mode};
use rotcap_core::radial::{
    annulus_profile, comparison_experiment, eta_annulus, eta_exterior, flux_tail_bound, log_grid,
    radial_a_harmonic, ComparisonReport, RadialFunction,
};
use rotcap_core::{Error as CoreError, ModelSpace};

use crate::config::{
    CapacitySpec, ConfigError, ExperimentConfig, ProfileSpec, SolutionSpec, SpaceSpec,
};
use crate::output::{write_csv, write_json, Cell};

/// Anything a pipeline can fail with, already sorted by exit code.
#[derive(Debug)]
pub enum PipelineError {
    Config(ConfigError),
    Numerical(CoreError),
    Io(std::io::Error),
}

impl std::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PipelineError::Config(e) => write!(f, "config error: {e}"),
            PipelineError::Numerical(e) => write!(f, "numerical error: {e}"),
            PipelineError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl From<ConfigError> for PipelineError {
    fn from(e: ConfigError) -> Self {
        PipelineError::Config(e)
    }
}

impl From<CoreError> for PipelineError {
    fn from(e: CoreError) -> Self {
        PipelineError::Numerical(e)
    }
}

impl From<std::io::Error> for PipelineError {
    fn from(e: std::io::Error) -> Self {
        PipelineError::Io(e)
    }
}

/// Whether a finished run carries indeterminate verdicts (exit 4 under
/// --strict).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Determinacy {
    Decided,
    Indeterminate,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunMeta {
    pub version: u32,
    pub seed: u64,
}

pub struct PipelineContext {
    pub out_dir: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub mode: Mode,
}

impl PipelineContext {
    fn meta(&self) -> RunMeta {
        RunMeta {
            version: crate::config::SUPPORTED_VERSION,
            seed: self.seed,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

fn ensure_out_dir(ctx: &PipelineContext) -> Result<(), PipelineError> {
    std::fs::create_dir_all(&ctx.out_dir)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyReport {
    pub meta: RunMeta,
    pub space: String,
    pub verdict: ParabolicityVerdict,
}

pub fn run_classify(
    cfg: &ExperimentConfig,
    ctx: &PipelineContext,
) -> Result<Determinacy, PipelineError> {
    ensure_out_dir(ctx)?;
    let space = cfg.build_space()?;
    let (opts, strategy) = cfg.criteria_opts(&cfg.classify, ctx.mode);
    let mut verdict = classify(&space, &opts)?;
    // explicit shells override the dyadic search inside classify
    if let rotcap_core::criteria::ShellStrategy::Explicit(_) = &strategy {
        let (v, w) = pggb_search(&space, &strategy, &opts)?;
        verdict.pggb = v;
        verdict.pggb_witness = w;
        verdict.recompute_consistency();
    }
    let indeterminate = verdict.aggregate == rotcap_core::criteria::CriterionVerdict::Indeterminate;
    let report = ClassifyReport {
        meta: ctx.meta(),
        space: space.label(),
        verdict,
    };
    write_json(&ctx.path("classify.json"), &report)?;
    Ok(if indeterminate {
        Determinacy::Indeterminate
    } else {
        Determinacy::Decided
    })
}

// ---------------------------------------------------------------------------
// capacity
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityRow {
    pub r2: f64,
    pub closed_form: f64,
    pub numerical: Option<f64>,
    pub bound: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityReport {
    pub meta: RunMeta,
    pub space: String,
    pub r1: f64,
    pub rows: Vec<CapacityRow>,
    /// The capacity limit of the inner ball; absent when its tail
    /// integral cannot be evaluated (e.g. table profiles end before the
    /// doubling cutoffs), with the reason recorded alongside.
    pub global: Option<CapacityEstimate>,
    pub global_error: Option<String>,
}

fn capacity_rows(
    space: &ModelSpace,
    cfg: &ExperimentConfig,
    spec: &CapacitySpec,
    mode: Mode,
) -> Result<(Vec<CapacityRow>, Vec<Option<RadialFunction>>), PipelineError> {
    let quad = cfg.quad_opts();
    let mesh = MeshOpts {
        intervals: spec.mesh_intervals.unwrap_or(2000),
        ..MeshOpts::default()
    };
    let rows: Vec<Result<(CapacityRow, Option<RadialFunction>), CoreError>> =
        map_collect(mode, &spec.r2_values, |&r2| {
            let closed = annulus_capacity_closed_form(space, spec.r1, r2, &quad)?;
            let bound = cutoff_upper_bound(space, spec.r1, r2, &quad)?;
            let (numerical, minimizer) = if spec.include_numerical {
                let est = numerical_capacity(space, spec.r1, r2, &mesh)?;
                (Some(est.value), est.minimizer)
            } else {
                (None, None)
            };
            Ok((
                CapacityRow {
                    r2,
                    closed_form: closed.value,
                    numerical,
                    bound: bound.value,
                },
                minimizer,
            ))
        });
    let pairs = rows
        .into_iter()
        .collect::<Result<Vec<_>, _>>()
        .map_err(PipelineError::from)?;
    Ok(pairs.into_iter().unzip())
}

pub fn run_capacity(
    cfg: &ExperimentConfig,
    ctx: &PipelineContext,
) -> Result<Determinacy, PipelineError> {
    ensure_out_dir(ctx)?;
    let spec = cfg
        .capacity
        .as_ref()
        .ok_or_else(|| ConfigError("capacity: block required for this command".into()))?;
    let space = cfg.build_space()?;
    let (rows, minimizers) = capacity_rows(&space, cfg, spec, ctx.mode)?;

    // minimizer curves per annulus, indexed like the rows
    for (i, minimizer) in minimizers.iter().enumerate() {
        if let Some(m) = minimizer {
            write_minimizer_csv(&ctx.path(&format!("minimizer_{i:03}.csv")), m)?;
        }
    }

    let (global, global_error) = match global_capacity(&space, spec.r1, &cfg.improper_opts()) {
        Ok(g) => (Some(g), None),
        Err(e @ (CoreError::EvaluationFailure(_) | CoreError::Overflow { .. })) => {
            (None, Some(e.to_string()))
        }
        Err(e) => return Err(e.into()),
    };

    let csv_rows: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Num(r.r2),
                Cell::Num(r.closed_form),
                match r.numerical {
                    Some(v) => Cell::Num(v),
                    None => Cell::Text(String::new()),
                },
                Cell::Num(r.bound),
            ]
        })
        .collect();
    write_csv(
        &ctx.path("capacity.csv"),
        &["r2", "closed_form", "numerical", "bound"],
        &csv_rows,
    )?;

    let report = CapacityReport {
        meta: ctx.meta(),
        space: space.label(),
        r1: spec.r1,
        rows,
        global,
        global_error,
    };
    write_json(&ctx.path("capacity.json"), &report)?;
    Ok(Determinacy::Decided)
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

pub fn build_solution(
    space: &ModelSpace,
    op: &AOperator,
    spec: &SolutionSpec,
) -> Result<RadialFunction, CoreError> {
    match spec {
        SolutionSpec::Constant {
            value,
            from,
            to,
            intervals,
        } => RadialFunction::constant(log_grid(*from, *to, *intervals), *value),
        SolutionSpec::Flux {
            a,
            c,
            r_max,
            intervals,
        } => radial_a_harmonic(space, op, *a, *c, *r_max, *intervals),
        SolutionSpec::EtaAnnulus { r1, r2, intervals } => eta_annulus(space, *r1, *r2, *intervals),
        SolutionSpec::EtaExterior {
            a,
            r_max,
            intervals,
        } => eta_exterior(space, *a, *r_max, *intervals),
        SolutionSpec::AnnulusProfile { a, r, intervals } => {
            annulus_profile(space, op, *a, *r, *intervals)
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub meta: RunMeta,
    pub space: String,
    pub operator: String,
    pub solution_meta: rotcap_core::radial::SolutionMeta,
    pub nodes: usize,
    pub truncation_tail_bound: Option<f64>,
}

pub fn run_solve(
    cfg: &ExperimentConfig,
    ctx: &PipelineContext,
) -> Result<Determinacy, PipelineError> {
    ensure_out_dir(ctx)?;
    let spec = cfg
        .solve
        .as_ref()
        .ok_or_else(|| ConfigError("solve: block required for this command".into()))?;
    let space = cfg.build_space()?;
    let op = cfg.build_operator()?;
    let u = build_solution(&space, &op, &spec.solution)?;

    let residuals = u.flux_residuals(&space, &op)?;
    let tail = match &spec.solution {
        SolutionSpec::Flux { c, r_max, .. } => flux_tail_bound(&space, &op, *c, *r_max)?,
        _ => None,
    };

    let rows: Vec<Vec<Cell>> = u
        .grid()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            vec![
                Cell::Num(r),
                Cell::Num(u.values()[i]),
                Cell::Num(u.derivs()[i]),
                match &residuals {
                    Some(res) => Cell::Num(res[i]),
                    None => Cell::Text(String::new()),
                },
            ]
        })
        .collect();
    write_csv(
        &ctx.path("solution.csv"),
        &["r", "u", "du", "flux_residual"],
        &rows,
    )?;

    let report = SolveReport {
        meta: ctx.meta(),
        space: space.label(),
        operator: op.describe(),
        solution_meta: u.meta().clone(),
        nodes: u.grid().len(),
        truncation_tail_bound: tail,
    };
    write_json(&ctx.path("solution.json"), &report)?;
    Ok(Determinacy::Decided)
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareArtifact {
    pub meta: RunMeta,
    pub space: String,
    pub report: ComparisonReport,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorCheckArtifact {
    pub meta: RunMeta,
    pub validation: ValidationReport,
    pub structure: StructureReport,
}

pub fn run_compare(
    cfg: &ExperimentConfig,
    ctx: &PipelineContext,
) -> Result<Determinacy, PipelineError> {
    ensure_out_dir(ctx)?;
    let spec = cfg
        .compare
        .as_ref()
        .ok_or_else(|| ConfigError("compare: block required for this command".into()))?;
    let space = cfg.build_space()?;
    let op = cfg.build_operator()?;
    let u = build_solution(&space, &op, &spec.u)?;
    let v = build_solution(&space, &op, &spec.v)?;
    let report = comparison_experiment(&space, &op, spec.a, &u, &v, spec.tol)?;

    write_json(
        &ctx.path("compare.json"),
        &CompareArtifact {
            meta: ctx.meta(),
            space: space.label(),
            report,
        },
    )?;

    if let Some(check) = &cfg.operator_check {
        let validation = validate_conditions(&op, &GridOpts::default())?;
        let structure = structure_inequalities_check(
            &op,
            &StructureCheckOpts {
                pairs: check.samples,
                dim: check.dim,
                seed: ctx.seed,
                mode: ctx.mode,
            },
        )?;
        write_json(
            &ctx.path("operator_check.json"),
            &OperatorCheckArtifact {
                meta: ctx.meta(),
                validation,
                structure,
            },
        )?;
    }
    Ok(Determinacy::Decided)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepCell {
    pub index: usize,
    pub profile: ProfileSpec,
    pub n: u32,
    pub p: f64,
    pub verdict: ParabolicityVerdict,
    pub capacity_rows: Option<Vec<CapacityRow>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepReport {
    pub meta: RunMeta,
    pub cells: Vec<SweepCell>,
}

pub fn run_sweep(
    cfg: &ExperimentConfig,
    ctx: &PipelineContext,
) -> Result<Determinacy, PipelineError> {
    ensure_out_dir(ctx)?;
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| ConfigError("sweep: block required for this command".into()))?;

    // cells in config order: profiles outer, dims middle, ps inner
    let mut cell_specs: Vec<(usize, ProfileSpec, u32, f64)> = Vec::new();
    for profile in &spec.profiles {
        for &n in &spec.dims {
            for &p in &spec.ps {
                cell_specs.push((cell_specs.len(), profile.clone(), n, p));
            }
        }
    }

    let results: Vec<Result<SweepCell, PipelineError>> =
        map_collect(ctx.mode, &cell_specs, |(index, profile, n, p)| {
            let space_spec = SpaceSpec {
                profile: profile.clone(),
                n: *n,
                p: *p,
            };
            let space = crate::config::build_space_from(&space_spec)?;
            // cells run their inner criteria sequentially; parallelism is
            // across cells
            let (opts, strategy) = cfg.criteria_opts(&spec.classify, Mode::Sequential);
            let mut verdict = classify(&space, &opts)?;
            if let rotcap_core::criteria::ShellStrategy::Explicit(_) = &strategy {
                let (v, w) = pggb_search(&space, &strategy, &opts)?;
                verdict.pggb = v;
                verdict.pggb_witness = w;
                verdict.recompute_consistency();
            }
            let capacity_rows = match &spec.capacity {
                Some(cap) => Some(capacity_rows_for_cell(&space, cfg, cap)?),
                None => None,
            };
            Ok(SweepCell {
                index: *index,
                profile: profile.clone(),
                n: *n,
                p: *p,
                verdict,
                capacity_rows,
            })
        });

    let cells: Vec<SweepCell> = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    // per-cell artifacts, then the merged report, all in config order
    let cell_dir = ctx.path("cells");
    std::fs::create_dir_all(&cell_dir)?;
    for cell in &cells {
        write_json(&cell_dir.join(format!("cell_{:03}.json", cell.index)), cell)?;
    }

    let mut header = vec![
        "index",
        "profile",
        "n",
        "p",
        "milnor",
        "holopainen_rv",
        "holopainen_vprime",
        "pggb",
        "capacity_sequence",
        "capacity_limit",
        "aggregate",
        "consistent",
    ];
    let has_capacity = spec.capacity.is_some();
    if has_capacity {
        header.extend_from_slice(&["cap_r2", "cap_closed_form", "cap_bound"]);
    }
    let verdict_text = |v: rotcap_core::criteria::CriterionVerdict| -> &'static str {
        match v {
            rotcap_core::criteria::CriterionVerdict::Parabolic => "parabolic",
            rotcap_core::criteria::CriterionVerdict::Nonparabolic => "nonparabolic",
            rotcap_core::criteria::CriterionVerdict::NoConclusion => "no_conclusion",
            rotcap_core::criteria::CriterionVerdict::Indeterminate => "indeterminate",
        }
    };
    let rows: Vec<Vec<Cell>> = cells
        .iter()
        .map(|c| {
            let mut row = vec![
                Cell::Int(c.index as i64),
                Cell::Text(profile_text(&c.profile)),
                Cell::Int(c.n as i64),
                Cell::Num(c.p),
                Cell::Text(verdict_text(c.verdict.milnor).into()),
                Cell::Text(verdict_text(c.verdict.holopainen_rv).into()),
                Cell::Text(verdict_text(c.verdict.holopainen_vprime).into()),
                Cell::Text(verdict_text(c.verdict.pggb).into()),
                Cell::Text(verdict_text(c.verdict.capacity_sequence).into()),
                Cell::Text(verdict_text(c.verdict.capacity_limit).into()),
                Cell::Text(verdict_text(c.verdict.aggregate).into()),
                Cell::Text(
                    if c.verdict.consistent {
                        "true"
                    } else {
                        "false"
                    }
                    .into(),
                ),
            ];
            if has_capacity {
                match c.capacity_rows.as_ref().and_then(|r| r.first()) {
                    Some(first) => {
                        row.push(Cell::Num(first.r2));
                        row.push(Cell::Num(first.closed_form));
                        row.push(Cell::Num(first.bound));
                    }
                    None => {
                        row.push(Cell::Text(String::new()));
                        row.push(Cell::Text(String::new()));
                        row.push(Cell::Text(String::new()));
                    }
                }
            }
            row
        })
        .collect();
    write_csv(&ctx.path("sweep.csv"), &header, &rows)?;

    let indeterminate = cells
        .iter()
        .any(|c| c.verdict.aggregate == rotcap_core::criteria::CriterionVerdict::Indeterminate);
    write_json(
        &ctx.path("sweep.json"),
        &SweepReport {
            meta: ctx.meta(),
            cells,
        },
    )?;

    if let Some(check) = &cfg.operator_check {
        let op = cfg.build_operator()?;
        let validation = validate_conditions(&op, &GridOpts::default())?;
        let structure = structure_inequalities_check(
            &op,
            &StructureCheckOpts {
                pairs: check.samples,
                dim: check.dim,
                seed: ctx.seed,
                mode: ctx.mode,
            },
        )?;
        write_json(
            &ctx.path("operator_check.json"),
            &OperatorCheckArtifact {
                meta: ctx.meta(),
                validation,
                structure,
            },
        )?;
    }
    Ok(if indeterminate {
        Determinacy::Indeterminate
    } else {
        Determinacy::Decided
    })
}

fn capacity_rows_for_cell(
    space: &ModelSpace,
    cfg: &ExperimentConfig,
    spec: &CapacitySpec,
) -> Result<Vec<CapacityRow>, PipelineError> {
    Ok(capacity_rows(space, cfg, spec, Mode::Sequential)?.0)
}

fn profile_text(p: &ProfileSpec) -> String {
    match p.kind.as_str() {
        "power" => format!(
            "power(b={})",
            p.params.as_ref().and_then(|q| q.b).unwrap_or(f64::NAN)
        ),
        "exponential" => format!(
            "exponential(lambda={})",
            p.params.as_ref().and_then(|q| q.lambda).unwrap_or(f64::NAN)
        ),
        other => other.to_string(),
    }
}

/// Write capacity sweeps of a minimizer curve: (r, v, dv) columns.
pub fn write_minimizer_csv(path: &Path, f: &RadialFunction) -> Result<(), PipelineError> {
    let rows: Vec<Vec<Cell>> = f
        .grid()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            vec![
                Cell::Num(r),
                Cell::Num(f.values()[i]),
                Cell::Num(f.derivs()[i]),
            ]
        })
        .collect();
    write_csv(path, &["r", "v", "dv"], &rows)?;
    Ok(())
}
