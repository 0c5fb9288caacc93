//! Scalar nonlinearities A(s) for the degenerate elliptic operator
//! div(A(|∇u|)/|∇u| ∇u), their structure conditions, and the induced
//! vector map 𝒜(v) = A(|v|) v/|v|.
//!
//! An operator carries claimed constants (α, β, D1, D2): growth bounds
//! α A ≤ s A' ≤ β A and the power envelope D1 s^{p-1} ≤ A ≤ D2 s^{p-1}.
//! These are verified numerically on a log grid; the claims also supply
//! the bracket that makes inverting A a plain bisection.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_collect, Mode};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Growth and envelope constants claimed for an operator.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ClaimedConstants {
    pub alpha: f64,
    pub beta: f64,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Clone)]
pub enum OperatorKind {
    /// A(s) = s^(p-1), the p-Laplacian.
    PPower,
    /// A(s) = κ s^(p-1).
    ScaledPPower { kappa: f64 },
    /// A(s) = s^(p-1) (1 + θ s/(1+s)), θ ≥ 0.
    Blended { theta: f64 },
    /// User-supplied A; derivative falls back to a central difference
    /// with step h = s * 1e-6 when not provided.
    Custom {
        eval: ScalarFn,
        deriv: Option<ScalarFn>,
    },
}

impl fmt::Debug for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::PPower => write!(f, "PPower"),
            OperatorKind::ScaledPPower { kappa } => write!(f, "ScaledPPower(kappa={kappa})"),
            OperatorKind::Blended { theta } => write!(f, "Blended(theta={theta})"),
            OperatorKind::Custom { deriv, .. } => {
                write!(
                    f,
                    "Custom(deriv={})",
                    if deriv.is_some() {
                        "given"
                    } else {
                        "finite-difference"
                    }
                )
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct AOperator {
    kind: OperatorKind,
    p: f64,
    claimed: ClaimedConstants,
}

impl AOperator {
    pub fn p_power(p: f64) -> Result<Self> {
        check_p(p)?;
        Ok(Self {
            kind: OperatorKind::PPower,
            p,
            claimed: ClaimedConstants {
                alpha: p - 1.0,
                beta: p - 1.0,
                d1: 1.0,
                d2: 1.0,
            },
        })
    }

    pub fn scaled_p_power(p: f64, kappa: f64) -> Result<Self> {
        check_p(p)?;
        if !(kappa > 0.0) {
            return Err(Error::InvalidProfile(format!(
                "scaled operator needs kappa > 0, got {kappa}"
            )));
        }
        Ok(Self {
            kind: OperatorKind::ScaledPPower { kappa },
            p,
            claimed: ClaimedConstants {
                alpha: p - 1.0,
                beta: p - 1.0,
                d1: kappa,
                d2: kappa,
            },
        })
    }

    pub fn blended(p: f64, theta: f64) -> Result<Self> {
        check_p(p)?;
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "blended operator needs theta >= 0, got {theta}"
            )));
        }
        // sup of s A'/A - (p-1) = θ s / ((1+s)(1+(1+θ)s)), attained at
        // s* = (1+θ)^(-1/2); the envelope is exactly [1, 1+θ].
        let s_star = (1.0 + theta).powf(-0.5);
        let h_max = theta * s_star / ((1.0 + s_star) * (1.0 + (1.0 + theta) * s_star));
        Ok(Self {
            kind: OperatorKind::Blended { theta },
            p,
            claimed: ClaimedConstants {
                alpha: p - 1.0,
                beta: p - 1.0 + h_max,
                d1: 1.0,
                d2: 1.0 + theta,
            },
        })
    }

    /// Custom operator; the caller is responsible for plausible claims,
    /// which `validate_conditions` then audits.
    pub fn custom(
        p: f64,
        claimed: ClaimedConstants,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: Option<ScalarFn>,
    ) -> Result<Self> {
        check_p(p)?;
        Ok(Self {
            kind: OperatorKind::Custom {
                eval: Arc::new(eval),
                deriv,
            },
            p,
            claimed,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn claimed(&self) -> ClaimedConstants {
        self.claimed
    }

    /// Same operator with user-claimed constants; `validate_conditions`
    /// audits them and `a_inverse` uses them as its bracket.
    pub fn with_claimed(mut self, claimed: ClaimedConstants) -> Self {
        self.claimed = claimed;
        self
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            OperatorKind::PPower => "p_power",
            OperatorKind::ScaledPPower { .. } => "scaled_p_power",
            OperatorKind::Blended { .. } => "blended",
            OperatorKind::Custom { .. } => "custom",
        }
    }

    pub fn describe(&self) -> String {
        match self.kind {
            OperatorKind::ScaledPPower { kappa } => {
                format!("scaled_p_power(kappa={kappa}), p={}", self.p)
            }
            OperatorKind::Blended { theta } => format!("blended(theta={theta}), p={}", self.p),
            _ => format!("{}, p={}", self.kind_name(), self.p),
        }
    }

    /// A(s) for s ≥ 0.
    pub fn evaluate(&self, s: f64) -> f64 {
        debug_assert!(s >= 0.0);
        if s == 0.0 {
            return 0.0;
        }
        let base = s.powf(self.p - 1.0);
        match &self.kind {
            OperatorKind::PPower => base,
            OperatorKind::ScaledPPower { kappa } => kappa * base,
            OperatorKind::Blended { theta } => base * (1.0 + theta * s / (1.0 + s)),
            OperatorKind::Custom { eval, .. } => eval(s),
        }
    }

    /// A'(s) for s > 0.
    pub fn derivative(&self, s: f64) -> f64 {
        debug_assert!(s > 0.0);
        match &self.kind {
            OperatorKind::PPower => (self.p - 1.0) * s.powf(self.p - 2.0),
            OperatorKind::ScaledPPower { kappa } => kappa * (self.p - 1.0) * s.powf(self.p - 2.0),
            OperatorKind::Blended { theta } => {
                let g = 1.0 + theta * s / (1.0 + s);
                let gp = theta / ((1.0 + s) * (1.0 + s));
                (self.p - 1.0) * s.powf(self.p - 2.0) * g + s.powf(self.p - 1.0) * gp
            }
            OperatorKind::Custom { eval, deriv } => match deriv {
                Some(d) => d(s),
                None => {
                    let h = s * 1e-6;
                    (eval(s + h) - eval(s - h)) / (2.0 * h)
                }
            },
        }
    }

    /// The induced vector map 𝒜(v) = A(|v|) v/|v|, with 𝒜(0) = 0.
    pub fn vector_map(&self, v: &[f64]) -> Vec<f64> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return vec![0.0; v.len()];
        }
        let scale = self.evaluate(norm) / norm;
        v.iter().map(|x| x * scale).collect()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidProfile(format!(
            "operator needs p > 1, got {p}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Condition validation on a log grid
// ---------------------------------------------------------------------------

/// Validation grid: `points` log-spaced samples in [s_min, s_max].
#[derive(Clone, Copy, Debug)]
pub struct GridOpts {
    pub points: usize,
    pub s_min: f64,
    pub s_max: f64,
}

impl Default for GridOpts {
    fn default() -> Self {
        Self {
            points: 512,
            s_min: 1e-8,
            s_max: 1e8,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub worst_s: f64,
    pub worst_ratio: f64,
    pub claimed: f64,
    pub passed: bool,
}

/// Tightest constants observed on the grid.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EmpiricalConstants {
    pub growth_inf: f64,
    pub growth_sup: f64,
    pub envelope_inf: f64,
    pub envelope_sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub operator: String,
    pub p: f64,
    pub checks: Vec<ConditionCheck>,
    pub empirical: EmpiricalConstants,
    pub passed: bool,
}

impl ValidationReport {
    /// Surfaces the first failed condition as a `ConditionViolated` error.
    pub fn ensure(&self) -> Result<&Self> {
        for c in &self.checks {
            if !c.passed {
                return Err(Error::ConditionViolated {
                    condition: match c.condition.as_str() {
                        "positivity" => "positivity",
                        "growth_lower" => "growth_lower",
                        "growth_upper" => "growth_upper",
                        "envelope_lower" => "envelope_lower",
                        _ => "envelope_upper",
                    },
                    s: c.worst_s,
                    ratio: c.worst_ratio,
                    claimed: c.claimed,
                });
            }
        }
        Ok(self)
    }
}

fn log_grid(opts: &GridOpts) -> Vec<f64> {
    let n = opts.points.max(2);
    let l0 = opts.s_min.ln();
    let l1 = opts.s_max.ln();
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Checks conditions (positivity, growth bounds, power envelope) against
/// the claimed constants on a log grid. A grid check is a certificate for
/// this artifact, not a proof.
pub fn validate_conditions(op: &AOperator, grid: &GridOpts) -> Result<ValidationReport> {
    let tol = 1e-9;
    let ss = log_grid(grid);
    let claimed = op.claimed();
    let p = op.p();

    // positivity: A(0) = 0 and A > 0 on the grid
    let mut positivity = ConditionCheck {
        condition: "positivity".into(),
        worst_s: 0.0,
        worst_ratio: op.evaluate(0.0),
        claimed: 0.0,
        passed: op.evaluate(0.0) == 0.0,
    };

    let mut growth_inf = f64::INFINITY;
    let mut growth_sup = f64::NEG_INFINITY;
    let mut growth_inf_s = ss[0];
    let mut growth_sup_s = ss[0];
    let mut env_inf = f64::INFINITY;
    let mut env_sup = f64::NEG_INFINITY;
    let mut env_inf_s = ss[0];
    let mut env_sup_s = ss[0];

    for &s in &ss {
        let a = op.evaluate(s);
        if !(a > 0.0) || !a.is_finite() {
            positivity.passed = false;
            positivity.worst_s = s;
            positivity.worst_ratio = a;
            continue;
        }
        let growth = s * op.derivative(s) / a;
        if growth < growth_inf {
            growth_inf = growth;
            growth_inf_s = s;
        }
        if growth > growth_sup {
            growth_sup = growth;
            growth_sup_s = s;
        }
        let env = a / s.powf(p - 1.0);
        if env < env_inf {
            env_inf = env;
            env_inf_s = s;
        }
        if env > env_sup {
            env_sup = env;
            env_sup_s = s;
        }
    }

    let near = |x: f64| tol * x.abs().max(1.0);
    let checks = vec![
        positivity,
        ConditionCheck {
            condition: "growth_lower".into(),
            worst_s: growth_inf_s,
            worst_ratio: growth_inf,
            claimed: claimed.alpha,
            passed: growth_inf >= claimed.alpha - near(claimed.alpha),
        },
        ConditionCheck {
            condition: "growth_upper".into(),
            worst_s: growth_sup_s,
            worst_ratio: growth_sup,
            claimed: claimed.beta,
            passed: growth_sup <= claimed.beta + near(claimed.beta),
        },
        ConditionCheck {
            condition: "envelope_lower".into(),
            worst_s: env_inf_s,
            worst_ratio: env_inf,
            claimed: claimed.d1,
            passed: env_inf >= claimed.d1 - near(claimed.d1),
        },
        ConditionCheck {
            condition: "envelope_upper".into(),
            worst_s: env_sup_s,
            worst_ratio: env_sup,
            claimed: claimed.d2,
            passed: env_sup <= claimed.d2 + near(claimed.d2),
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        operator: op.describe(),
        p,
        checks,
        empirical: EmpiricalConstants {
            growth_inf,
            growth_sup,
            envelope_inf: env_inf,
            envelope_sup: env_sup,
        },
        passed,
    })
}

// ---------------------------------------------------------------------------
// Vector-pair structure inequalities
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug)]
pub struct StructureCheckOpts {
    pub pairs: usize,
    pub dim: usize,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for StructureCheckOpts {
    fn default() -> Self {
        Self {
            pairs: 10_000,
            dim: 3,
            seed: 0,
            mode: Mode::default(),
        }
    }
}

/// Empirical constants for the monotonicity and Lipschitz inequalities of
/// the vector map, plus the p-dependent coercivity/boundedness forms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StructureReport {
    pub operator: String,
    pub p: f64,
    pub dim: usize,
    pub seed: u64,
    pub pairs_used: usize,
    /// min over pairs of (𝒜(v2)-𝒜(v1))·(v2-v1) / ((|v1|+|v2|)^(p-2) |v2-v1|^2)
    pub c1: f64,
    /// max over pairs of |𝒜(v2)-𝒜(v1)| / ((|v1|+|v2|)^(p-2) |v2-v1|)
    pub c2: f64,
    /// p ≥ 2 only: min of (𝒜(v2)-𝒜(v1))·(v2-v1) / |v2-v1|^p
    pub coercivity_min: Option<f64>,
    /// p ≤ 2 only: max of |𝒜(v2)-𝒜(v1)| / |v2-v1|^(p-1)
    pub boundedness_max: Option<f64>,
    /// range of |𝒜(v)| / |v|^(p-1) over sampled vectors
    pub amplitude_min: f64,
    pub amplitude_max: f64,
    /// amplitude range sits inside [D1, D2] up to tolerance
    pub amplitude_within_envelope: bool,
}

struct PairStats {
    mono_ratio: f64,
    lip_ratio: f64,
    coercivity: f64,
    boundedness: f64,
    amp_min: f64,
    amp_max: f64,
    inner: f64,
}

/// Samples seeded vector pairs and measures the structure inequalities.
///
/// Pair generation is sequential in the seed; per-pair evaluation fans out
/// and is folded with order-independent min/max, so the report is
/// identical in sequential and parallel mode.
pub fn structure_inequalities_check(
    op: &AOperator,
    opts: &StructureCheckOpts,
) -> Result<StructureReport> {
    if opts.dim < 1 || opts.pairs == 0 {
        return Err(Error::BadSequence(
            "structure check needs dim >= 1 and pairs >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut pairs: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(opts.pairs);
    while pairs.len() < opts.pairs {
        let v1 = sample_vector(&mut rng, opts.dim);
        let v2 = sample_vector(&mut rng, opts.dim);
        let dist2: f64 = v1.iter().zip(&v2).map(|(a, b)| (a - b) * (a - b)).sum();
        let norms = norm(&v1) + norm(&v2);
        if dist2 > 0.0 && norms > 0.0 {
            pairs.push((v1, v2));
        }
    }

    let p = op.p();
    let stats: Vec<PairStats> = map_collect(opts.mode, &pairs, |(v1, v2)| {
        let a1 = op.vector_map(v1);
        let a2 = op.vector_map(v2);
        let diff: Vec<f64> = v2.iter().zip(v1).map(|(b, a)| b - a).collect();
        let adiff: Vec<f64> = a2.iter().zip(&a1).map(|(b, a)| b - a).collect();
        let dn = norm(&diff);
        let an = norm(&adiff);
        let weight = (norm(v1) + norm(v2)).powf(p - 2.0);
        let inner: f64 = adiff.iter().zip(&diff).map(|(a, d)| a * d).sum();
        let amp = |v: &[f64], av: &[f64]| {
            let nv = norm(v);
            if nv > 0.0 {
                norm(av) / nv.powf(p - 1.0)
            } else {
                f64::NAN
            }
        };
        let amps = [amp(v1, &a1), amp(v2, &a2)];
        PairStats {
            mono_ratio: inner / (weight * dn * dn),
            lip_ratio: an / (weight * dn),
            coercivity: inner / dn.powf(p),
            boundedness: an / dn.powf(p - 1.0),
            amp_min: amps.iter().copied().fold(f64::INFINITY, f64::min),
            amp_max: amps.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            inner,
        }
    });

    let mut c1 = f64::INFINITY;
    let mut c2 = f64::NEG_INFINITY;
    let mut coercivity = f64::INFINITY;
    let mut boundedness = f64::NEG_INFINITY;
    let mut amp_min = f64::INFINITY;
    let mut amp_max = f64::NEG_INFINITY;
    for (i, s) in stats.iter().enumerate() {
        if !(s.inner > 0.0) {
            return Err(Error::NonMonotone {
                index: i,
                value: s.inner,
            });
        }
        c1 = c1.min(s.mono_ratio);
        c2 = c2.max(s.lip_ratio);
        coercivity = coercivity.min(s.coercivity);
        boundedness = boundedness.max(s.boundedness);
        if s.amp_min.is_finite() {
            amp_min = amp_min.min(s.amp_min);
        }
        if s.amp_max.is_finite() {
            amp_max = amp_max.max(s.amp_max);
        }
    }

    let claimed = op.claimed();
    let tol = 1e-9;
    Ok(StructureReport {
        operator: op.describe(),
        p,
        dim: opts.dim,
        seed: opts.seed,
        pairs_used: stats.len(),
        c1,
        c2,
        coercivity_min: (p >= 2.0).then_some(coercivity),
        boundedness_max: (p <= 2.0).then_some(boundedness),
        amplitude_min: amp_min,
        amplitude_max: amp_max,
        amplitude_within_envelope: amp_min >= claimed.d1 * (1.0 - tol)
            && amp_max <= claimed.d2 * (1.0 + tol),
    })
}

fn sample_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    // components uniform in [-1, 1], then a log-uniform scale over four
    // decades to probe both the degenerate and the large-gradient regime
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    (0..dim)
        .map(|_| rng.random_range(-1.0f64..1.0) * scale)
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---------------------------------------------------------------------------
// Inversion
// ---------------------------------------------------------------------------

/// Solves A(s) = t for s ≥ 0 on the bracket
/// [(t/D2)^(1/(p-1)), (t/D1)^(1/(p-1))] guaranteed by the envelope
/// conditions. Bisection localizes the root, then safeguarded Newton
/// steps polish it well past the 1e-12 contract (the flux invariant of
/// radial solutions needs the residual |A(s) - t| small relative to t
/// even when s itself is tiny).
pub fn a_inverse(op: &AOperator, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::EvaluationFailure(format!(
            "a_inverse needs finite t >= 0, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let claimed = op.claimed();
    let inv_pm1 = 1.0 / (op.p() - 1.0);
    let mut lo = (t / claimed.d2).powf(inv_pm1);
    let mut hi = (t / claimed.d1).powf(inv_pm1);
    if lo == hi {
        return Ok(lo);
    }
    // tiny relative slack so boundary roots stay inside the bracket
    lo *= 1.0 - 1e-12;
    hi *= 1.0 + 1e-12;
    if op.evaluate(lo) > t || op.evaluate(hi) < t {
        return Err(Error::BracketFailure { t });
    }

    for _ in 0..12 {
        let mid = 0.5 * (lo + hi);
        if op.evaluate(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let mut s = 0.5 * (lo + hi);
    for _ in 0..60 {
        let a = op.evaluate(s);
        let resid = a - t;
        if resid.abs() <= 1e-15 * t && hi - lo <= 1e-12 {
            break;
        }
        if resid > 0.0 {
            hi = hi.min(s);
        } else {
            lo = lo.max(s);
        }
        let d = op.derivative(s);
        let step = if d > 0.0 && d.is_finite() {
            resid / d
        } else {
            f64::NAN
        };
        let next = s - step;
        s = if next.is_finite() && next > lo && next < hi {
            next
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * s.abs() {
            break;
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn p_power_conditions_are_exact() {
        let op = AOperator::p_power(2.0).unwrap();
        let r = validate_conditions(&op, &GridOpts::default()).unwrap();
        assert!(r.passed);
        assert_relative_eq!(r.empirical.growth_inf, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.empirical.growth_sup, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.empirical.envelope_inf, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.empirical.envelope_sup, 1.0, max_relative = 1e-12);

        let op = AOperator::p_power(3.0).unwrap();
        let r = validate_conditions(&op, &GridOpts::default()).unwrap();
        assert!(r.passed);
        assert_relative_eq!(r.empirical.growth_inf, 2.0, max_relative = 1e-12);
        assert_relative_eq!(r.empirical.growth_sup, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn blended_conditions_match_direct_evaluation() {
        // direct oracle: s A'/A = 1 + θ s/((1+s)(1+s+θs)) for p = 2
        let theta = 0.5;
        let op = AOperator::blended(2.0, theta).unwrap();
        for &s in &[0.01f64, 0.1, 1.0, 10.0, 100.0] {
            let oracle = 1.0 + theta * s / ((1.0 + s) * (1.0 + s + theta * s));
            let got = s * op.derivative(s) / op.evaluate(s);
            assert_relative_eq!(got, oracle, max_relative = 1e-12);
        }
        let r = validate_conditions(&op, &GridOpts::default()).unwrap();
        assert!(r.passed, "blended theta=0.5 must pass: {r:?}");
        assert!(r.empirical.growth_inf >= 1.0 - 1e-9);
        assert_relative_eq!(r.empirical.envelope_inf, 1.0, max_relative = 1e-6);
        assert_relative_eq!(r.empirical.envelope_sup, 1.5, max_relative = 1e-6);
    }

    #[test]
    fn wrong_claims_are_reported_and_surfaced() {
        // claim D2 too small for the blended family
        let blended = AOperator::blended(2.0, 0.5).unwrap();
        let op = AOperator::custom(
            2.0,
            ClaimedConstants {
                alpha: 1.0,
                beta: 1.2,
                d1: 1.0,
                d2: 1.1,
            },
            move |s| blended.evaluate(s),
            None,
        )
        .unwrap();
        let r = validate_conditions(&op, &GridOpts::default()).unwrap();
        assert!(!r.passed);
        let err = r.ensure();
        assert!(matches!(err, Err(Error::ConditionViolated { .. })));
    }

    #[test]
    fn structure_check_identity_for_p2() {
        let op = AOperator::p_power(2.0).unwrap();
        let r = structure_inequalities_check(
            &op,
            &StructureCheckOpts {
                pairs: 500,
                dim: 3,
                seed: 7,
                mode: Mode::Sequential,
            },
        )
        .unwrap();
        // 𝒜 is the identity: every ratio is exactly 1
        assert_relative_eq!(r.c1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(r.c2, 1.0, max_relative = 1e-12);
        assert!(r.amplitude_within_envelope);
    }

    #[test]
    fn structure_check_unit_vector_case_p4() {
        // v1 = 0, v2 = e1: inner product = 1 = |v2-v1|^4
        let op = AOperator::p_power(4.0).unwrap();
        let v1 = vec![0.0, 0.0, 0.0];
        let v2 = vec![1.0, 0.0, 0.0];
        let a1 = op.vector_map(&v1);
        let a2 = op.vector_map(&v2);
        let inner: f64 = a2
            .iter()
            .zip(&a1)
            .zip(v2.iter().zip(&v1))
            .map(|((b, a), (x, y))| (b - a) * (x - y))
            .sum();
        assert_relative_eq!(inner, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn structure_check_blended_is_reproducible() {
        let op = AOperator::blended(2.0, 0.5).unwrap();
        let opts = StructureCheckOpts {
            pairs: 10_000,
            dim: 3,
            seed: 42,
            mode: Mode::Sequential,
        };
        let r1 = structure_inequalities_check(&op, &opts).unwrap();
        let r2 = structure_inequalities_check(&op, &opts).unwrap();
        assert!(r1.c1 > 0.0);
        assert!(r1.c2.is_finite());
        assert!(r1.c1 <= r1.c2);
        assert_eq!(r1.c1.to_bits(), r2.c1.to_bits());
        assert_eq!(r1.c2.to_bits(), r2.c2.to_bits());
    }

    #[test]
    fn structure_check_parallel_matches_sequential() {
        let op = AOperator::blended(3.0, 0.5).unwrap();
        let mk = |mode| StructureCheckOpts {
            pairs: 4000,
            dim: 2,
            seed: 11,
            mode,
        };
        let seq = structure_inequalities_check(&op, &mk(Mode::Sequential)).unwrap();
        let par = structure_inequalities_check(&op, &mk(Mode::Parallel)).unwrap();
        assert_eq!(seq.c1.to_bits(), par.c1.to_bits());
        assert_eq!(seq.c2.to_bits(), par.c2.to_bits());
    }

    #[test]
    fn scaled_operator_doubles_both_constants() {
        let base = AOperator::p_power(2.5).unwrap();
        let scaled = AOperator::scaled_p_power(2.5, 2.0).unwrap();
        let opts = StructureCheckOpts {
            pairs: 2000,
            dim: 3,
            seed: 3,
            mode: Mode::Sequential,
        };
        let r1 = structure_inequalities_check(&base, &opts).unwrap();
        let r2 = structure_inequalities_check(&scaled, &opts).unwrap();
        assert_relative_eq!(r2.c1, 2.0 * r1.c1, max_relative = 1e-12);
        assert_relative_eq!(r2.c2, 2.0 * r1.c2, max_relative = 1e-12);
    }

    #[test]
    fn nonmonotone_operator_is_rejected() {
        // A decreasing "operator" violates monotonicity of 𝒜
        let op = AOperator::custom(
            2.0,
            ClaimedConstants {
                alpha: 1.0,
                beta: 1.0,
                d1: 0.01,
                d2: 100.0,
            },
            |s| if s > 0.0 { 1.0 / (1.0 + s) } else { 0.0 },
            None,
        )
        .unwrap();
        let r = structure_inequalities_check(
            &op,
            &StructureCheckOpts {
                pairs: 200,
                dim: 2,
                seed: 1,
                mode: Mode::Sequential,
            },
        );
        assert!(matches!(r, Err(Error::NonMonotone { .. })));
    }

    #[test]
    fn a_inverse_examples() {
        let id = AOperator::p_power(2.0).unwrap();
        assert_relative_eq!(a_inverse(&id, 5.0).unwrap(), 5.0, max_relative = 1e-12);

        let sq = AOperator::p_power(3.0).unwrap();
        assert_relative_eq!(a_inverse(&sq, 4.0).unwrap(), 2.0, max_relative = 1e-12);

        // root of s (1 + 0.5 s/(1+s)) = 1, i.e. 1.5 s^2 = 1:
        // independent closed-form oracle sqrt(2/3)
        let blended = AOperator::blended(2.0, 0.5).unwrap();
        let s = a_inverse(&blended, 1.0).unwrap();
        assert_relative_eq!(s, (2.0f64 / 3.0).sqrt(), epsilon = 1e-10);
        assert_relative_eq!(s, 0.816_496_580_927_726, epsilon = 1e-10);
    }

    #[test]
    fn a_inverse_round_trip_on_log_grid() {
        for op in [
            AOperator::p_power(1.5).unwrap(),
            AOperator::p_power(3.0).unwrap(),
            AOperator::blended(2.0, 0.5).unwrap(),
            AOperator::blended(1.5, 1.0).unwrap(),
            AOperator::scaled_p_power(2.0, 2.0).unwrap(),
        ] {
            for k in 0..=18 {
                let s = 10f64.powf(-6.0 + 0.5 * k as f64); // 1e-6 ..= 1e3
                let t = op.evaluate(s);
                let back = a_inverse(&op, t).unwrap();
                assert!(
                    (back - s).abs() <= 1e-10,
                    "{}: s = {s:e}, back = {back:e}",
                    op.describe()
                );
            }
        }
    }

    #[test]
    fn a_inverse_bracket_failure_with_bogus_claims() {
        // claims say A sits in [10 s, 20 s] but it is actually s
        let op = AOperator::custom(
            2.0,
            ClaimedConstants {
                alpha: 1.0,
                beta: 1.0,
                d1: 10.0,
                d2: 20.0,
            },
            |s| s,
            None,
        )
        .unwrap();
        assert!(matches!(
            a_inverse(&op, 1.0),
            Err(Error::BracketFailure { .. })
        ));
    }

    #[test]
    fn monotone_on_grid_for_validated_operators() {
        for op in [
            AOperator::p_power(1.5).unwrap(),
            AOperator::blended(2.0, 1.0).unwrap(),
        ] {
            let mut prev = 0.0;
            for k in 1..200 {
                let s = 10f64.powf(-6.0 + k as f64 * 0.05);
                let a = op.evaluate(s);
                assert!(a > prev, "A must be strictly increasing");
                prev = a;
            }
        }
    }
}
