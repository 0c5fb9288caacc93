//! Radial A-harmonic functions, η-profiles and comparison experiments.
//!
//! On a rotationally symmetric manifold any radial solution of
//! div 𝒜(∇u) = 0 has a conserved flux f^{n-1}(r) A(|u'(r)|) = C, so
//! solutions are constructed by inverting A along the flux and
//! integrating. For the p-Laplacian this reproduces the classical radial
//! ODE (p-1) η'' + (n-1) (f'/f) η' = 0 and its closed-form annulus
//! profile, which is kept as the regression anchor.

use serde::{Deserialize, Serialize};

use crate::aoperator::{a_inverse, AOperator};
use crate::capacity;
use crate::error::{Error, Result};
use crate::geometry::interp::MonotoneCubic;
use crate::geometry::quad::{improper_integral, integrate, Classification, ImproperOpts, QuadOpts};
use crate::geometry::ModelSpace;

/// How a radial function was constructed; carried for reports and for the
/// flux-residual diagnostic.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolutionMeta {
    /// Flux construction from the inner radius with constant C.
    Flux { a: f64, c: f64 },
    /// Closed-form p-harmonic annulus profile with boundary values 1, 0.
    EtaAnnulus { r1: f64, r2: f64 },
    /// Exterior profile η_{a,∞}; `tail_mass` is the fraction of the
    /// defining integral beyond the truncation radius, i.e. η(r_max).
    EtaExterior { a: f64, r_max: f64, tail_mass: f64 },
    /// General-A annulus profile found by shooting on the flux constant.
    AnnulusProfile { a: f64, r: f64, c: f64 },
    /// Discrete energy minimizer.
    Minimizer { r1: f64, r2: f64 },
    /// Sampled from a user closure.
    Sampled { label: String },
}

/// A grid-sampled radial function with values and radial derivatives.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    derivs: Vec<f64>,
    meta: SolutionMeta,
}

impl RadialFunction {
    pub fn from_samples(
        grid: Vec<f64>,
        values: Vec<f64>,
        derivs: Vec<f64>,
        meta: SolutionMeta,
    ) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() || grid.len() != derivs.len() {
            return Err(Error::GridMismatch(format!(
                "inconsistent sample lengths: {} radii, {} values, {} derivatives",
                grid.len(),
                values.len(),
                derivs.len()
            )));
        }
        for w in grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::GridMismatch(format!(
                    "grid must be strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if values.iter().chain(derivs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::GridMismatch("non-finite sample".into()));
        }
        Ok(Self {
            grid,
            values,
            derivs,
            meta,
        })
    }

    /// Samples a closure (value and derivative) on the given grid.
    pub fn from_fn(
        grid: Vec<f64>,
        label: &str,
        f: impl Fn(f64) -> f64,
        fp: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let values = grid.iter().map(|&r| f(r)).collect();
        let derivs = grid.iter().map(|&r| fp(r)).collect();
        Self::from_samples(
            grid,
            values,
            derivs,
            SolutionMeta::Sampled {
                label: label.to_string(),
            },
        )
    }

    /// The constant function on a grid.
    pub fn constant(grid: Vec<f64>, value: f64) -> Result<Self> {
        Self::from_fn(grid, &format!("constant {value}"), |_| value, |_| 0.0)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    pub fn meta(&self) -> &SolutionMeta {
        &self.meta
    }

    pub fn r_min(&self) -> f64 {
        self.grid[0]
    }

    pub fn r_max(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    /// Monotone interpolants for resampling onto other grids.
    fn interpolants(&self) -> Result<(MonotoneCubic, MonotoneCubic)> {
        Ok((
            MonotoneCubic::new(self.grid.clone(), self.values.clone())?,
            MonotoneCubic::new(self.grid.clone(), self.derivs.clone())?,
        ))
    }

    /// Interpolated value at a radius inside the sampled domain.
    pub fn value_at(&self, r: f64) -> Result<f64> {
        MonotoneCubic::new(self.grid.clone(), self.values.clone())?.value(r)
    }

    /// Interpolated derivative at a radius inside the sampled domain.
    pub fn derivative_at(&self, r: f64) -> Result<f64> {
        MonotoneCubic::new(self.grid.clone(), self.derivs.clone())?.value(r)
    }

    /// Relative flux residuals |f^{n-1} A(|u'|) - C| / C per node, for
    /// flux-constructed solutions.
    pub fn flux_residuals(&self, space: &ModelSpace, op: &AOperator) -> Result<Option<Vec<f64>>> {
        let c = match self.meta {
            SolutionMeta::Flux { c, .. } => c,
            SolutionMeta::AnnulusProfile { c, .. } => c,
            _ => return Ok(None),
        };
        if c == 0.0 {
            return Ok(Some(vec![0.0; self.grid.len()]));
        }
        let mut out = Vec::with_capacity(self.grid.len());
        for (&r, &du) in self.grid.iter().zip(&self.derivs) {
            let flux = space.volume_density(r)? * op.evaluate(du.abs());
            out.push((flux - c).abs() / c);
        }
        Ok(Some(out))
    }
}

/// Log-spaced grid with `intervals + 1` nodes from `a` to `b` inclusive.
pub fn log_grid(a: f64, b: f64, intervals: usize) -> Vec<f64> {
    let n = intervals.max(1);
    let la = a.ln();
    let lb = b.ln();
    let mut grid: Vec<f64> = (0..=n)
        .map(|i| (la + (lb - la) * i as f64 / n as f64).exp())
        .collect();
    grid[0] = a;
    grid[n] = b;
    grid
}

use log_grid as log_spaced;

// ---------------------------------------------------------------------------
// Flux construction
// ---------------------------------------------------------------------------

/// The flux argument t(r) = C f(r)^{1-n}; underflows to 0 harmlessly
/// where the volume density is enormous.
fn flux_argument(space: &ModelSpace, c: f64, r: f64) -> Result<f64> {
    let f = space.profile().value(r)?;
    let t = c * f.powi(1 - space.dimension() as i32);
    if t.is_finite() {
        Ok(t)
    } else {
        Err(Error::EvaluationFailure(format!(
            "flux argument overflowed at r = {r:e}"
        )))
    }
}

/// Radial A-harmonic function with u(a) = 0 and conserved flux C:
/// u'(r) = -a_inverse(A, C f(r)^{1-n}), integrated on a log grid.
pub fn radial_a_harmonic(
    space: &ModelSpace,
    op: &AOperator,
    a: f64,
    c: f64,
    r_max: f64,
    intervals: usize,
) -> Result<RadialFunction> {
    if !(a > 0.0) || !(r_max > a) {
        return Err(Error::BadAnnulus { r1: a, r2: r_max });
    }
    if !(c >= 0.0) {
        return Err(Error::EvaluationFailure(format!(
            "flux constant must be nonnegative, got {c}"
        )));
    }
    if intervals < 64 {
        return Err(Error::GridMismatch(format!(
            "flux solver needs at least 64 intervals, got {intervals}"
        )));
    }
    let grid = log_spaced(a, r_max, intervals);
    let speed = |r: f64| -> Result<f64> { a_inverse(op, flux_argument(space, c, r)?) };

    let derivs: Vec<f64> = grid
        .iter()
        .map(|&r| Ok(-speed(r)?))
        .collect::<Result<_>>()?;

    let quad = QuadOpts {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_panels: 64,
    };
    let mut values = Vec::with_capacity(grid.len());
    values.push(0.0);
    let mut acc = 0.0;
    for w in grid.windows(2) {
        let drop = integrate(|r| speed(r), w[0], w[1], &quad)?;
        acc -= drop.value;
        values.push(acc);
    }

    RadialFunction::from_samples(grid, values, derivs, SolutionMeta::Flux { a, c })
}

/// f^{-(n-1)/(p_A - 1)}(r): the tail integrand matching the operator's
/// exponent, which the envelope bounds on a_inverse produce. Coincides
/// with the space's capacity integrand when the exponents agree.
fn operator_tail_integrand(space: &ModelSpace, op: &AOperator, r: f64) -> Result<f64> {
    let f = space.profile().value(r)?;
    let q = (space.dimension() as f64 - 1.0) / (op.p() - 1.0);
    let v = f.powf(-q);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            context: "f^(-q)",
            at: r,
        })
    }
}

/// Bound on the missing tail |u(∞) - u(r_max)| of a flux solution, from
/// the envelope a_inverse(t) ≤ (t/D1)^{1/(p-1)}:
/// (C/D1)^{1/(p-1)} ∫_{r_max}^∞ f^{-(n-1)/(p-1)}. `None` when that
/// integral diverges (the solution is unbounded and no finite certificate
/// exists).
pub fn flux_tail_bound(
    space: &ModelSpace,
    op: &AOperator,
    c: f64,
    r_max: f64,
) -> Result<Option<f64>> {
    if c == 0.0 {
        return Ok(Some(0.0));
    }
    let opts = ImproperOpts {
        quad: QuadOpts {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_panels: 2048,
        },
        ..ImproperOpts::default()
    };
    let tail = improper_integral(|r| operator_tail_integrand(space, op, r), r_max, &opts)?;
    match tail.classification {
        Classification::Converged => {
            let scale = (c / op.claimed().d1).powf(1.0 / (op.p() - 1.0));
            Ok(Some(scale * tail.value))
        }
        _ => Ok(None),
    }
}

// ---------------------------------------------------------------------------
// η-profiles
// ---------------------------------------------------------------------------

/// The p-harmonic annulus profile
/// η(r) = ∫_r^{R2} f^{-q} / ∫_{R1}^{R2} f^{-q}, q = (n-1)/(p-1),
/// with η(R1) = 1 and η(R2) = 0.
pub fn eta_annulus(
    space: &ModelSpace,
    r1: f64,
    r2: f64,
    intervals: usize,
) -> Result<RadialFunction> {
    crate::geometry::check_annulus(r1, r2)?;
    if intervals < 2 {
        return Err(Error::GridMismatch(
            "eta profile needs at least 2 intervals".into(),
        ));
    }
    let grid = log_spaced(r1, r2, intervals);
    let quad = QuadOpts {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_panels: 64,
    };
    let mut interval_mass = Vec::with_capacity(intervals);
    for w in grid.windows(2) {
        let m = integrate(|r| space.capacity_integrand(r), w[0], w[1], &quad)?;
        interval_mass.push(m.value);
    }
    let total: f64 = interval_mass.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::EvaluationFailure(
            "capacity integrand has vanishing or non-finite mass".into(),
        ));
    }

    // suffix sums so that η(R1) = 1 and η(R2) = 0 exactly
    let mut values = vec![0.0; grid.len()];
    let mut tail = 0.0;
    for i in (0..intervals).rev() {
        tail += interval_mass[i];
        values[i] = tail / total;
    }
    values[intervals] = 0.0;
    values[0] = 1.0;

    let derivs: Vec<f64> = grid
        .iter()
        .map(|&r| Ok(-space.capacity_integrand(r)? / total))
        .collect::<Result<_>>()?;

    RadialFunction::from_samples(grid, values, derivs, SolutionMeta::EtaAnnulus { r1, r2 })
}

/// The exterior profile η_{a,∞}(r) = ∫_r^∞ f^{-q} / ∫_a^∞ f^{-q},
/// sampled on [a, r_max]. Exists exactly when the defining integral
/// converges; on a parabolic profile this errors with `ParabolicProfile`,
/// which is the radial form of the nonexistence statement.
pub fn eta_exterior(
    space: &ModelSpace,
    a: f64,
    r_max: f64,
    intervals: usize,
) -> Result<RadialFunction> {
    crate::geometry::check_annulus(a, r_max)?;
    let improper = ImproperOpts::default();
    let tail_integral = improper_integral(|r| space.capacity_integrand(r), a, &improper)?;
    match tail_integral.classification {
        Classification::Diverged => return Err(Error::ParabolicProfile),
        Classification::Indeterminate => {
            return Err(Error::Indeterminate(
                "tail integral of f^(-q) could not be classified".into(),
            ))
        }
        Classification::Converged => {}
    }
    let total = tail_integral.value;

    let grid = log_spaced(a, r_max, intervals.max(2));
    let quad = QuadOpts {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_panels: 64,
    };
    let mut interval_mass = Vec::with_capacity(grid.len() - 1);
    for w in grid.windows(2) {
        let m = integrate(|r| space.capacity_integrand(r), w[0], w[1], &quad)?;
        interval_mass.push(m.value);
    }
    // suffix accumulation keeps the tiny far-out tail values exact instead
    // of cancelling them against the full integral
    let covered: f64 = interval_mass.iter().sum();
    let beyond = (total - covered).max(0.0);
    let mut values = vec![0.0; grid.len()];
    let mut tail = beyond;
    *values.last_mut().unwrap() = tail / total;
    for i in (0..interval_mass.len()).rev() {
        tail += interval_mass[i];
        values[i] = tail / total;
    }
    values[0] = 1.0;
    let tail_mass = *values.last().unwrap();

    let derivs: Vec<f64> = grid
        .iter()
        .map(|&r| Ok(-space.capacity_integrand(r)? / total))
        .collect::<Result<_>>()?;

    RadialFunction::from_samples(
        grid,
        values,
        derivs,
        SolutionMeta::EtaExterior {
            a,
            r_max,
            tail_mass,
        },
    )
}

/// General-A annulus profile: the radial A-harmonic function with
/// w(a) = 1, w(r) = 0, found by shooting on the flux constant C. For the
/// p-power operator this coincides with [`eta_annulus`].
pub fn annulus_profile(
    space: &ModelSpace,
    op: &AOperator,
    a: f64,
    r: f64,
    intervals: usize,
) -> Result<RadialFunction> {
    crate::geometry::check_annulus(a, r)?;
    let intervals = intervals.max(16);
    let grid = log_spaced(a, r, intervals);
    let quad = QuadOpts {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_panels: 64,
    };

    // total drop across the annulus for a trial flux constant
    let drops_for = |c: f64| -> Result<Vec<f64>> {
        grid.windows(2)
            .map(|w| {
                Ok(integrate(
                    |x| a_inverse(op, flux_argument(space, c, x)?),
                    w[0],
                    w[1],
                    &quad,
                )?
                .value)
            })
            .collect()
    };
    let total_drop = |c: f64| -> Result<f64> { Ok(drops_for(c)?.iter().sum()) };

    // The envelope D1 s^{p-1} <= A <= D2 s^{p-1} brackets the matching C
    // through the tail integral taken at the operator's own exponent.
    let iq = integrate(
        |x| operator_tail_integrand(space, op, x),
        a,
        r,
        &QuadOpts::default(),
    )?
    .value;
    let claimed = op.claimed();
    let scale = iq.powf(-(op.p() - 1.0));
    let mut c_lo = claimed.d1 * scale * (1.0 - 1e-9);
    let mut c_hi = claimed.d2 * scale * (1.0 + 1e-9);
    let mut g_lo = total_drop(c_lo)? - 1.0;
    let mut g_hi = total_drop(c_hi)? - 1.0;
    if g_lo > 0.0 || g_hi < 0.0 {
        return Err(Error::BracketFailure { t: 1.0 });
    }

    // Illinois regula falsi on g(C) = drop(C) - 1
    let mut c_star = 0.5 * (c_lo + c_hi);
    let mut side = 0i32;
    for _ in 0..80 {
        if (c_hi - c_lo).abs() <= 1e-14 * c_hi {
            break;
        }
        c_star = (c_lo * g_hi - c_hi * g_lo) / (g_hi - g_lo);
        if !c_star.is_finite() || c_star <= c_lo || c_star >= c_hi {
            c_star = 0.5 * (c_lo + c_hi);
        }
        let g = total_drop(c_star)? - 1.0;
        if g.abs() <= 1e-13 {
            break;
        }
        if g > 0.0 {
            c_hi = c_star;
            g_hi = g;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        } else {
            c_lo = c_star;
            g_lo = g;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        }
    }

    let drops = drops_for(c_star)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut acc = 1.0;
    values.push(1.0);
    for d in &drops {
        acc -= d;
        values.push(acc);
    }
    // the shooting residual lands on the outer boundary; pin it to 0
    let n = values.len();
    values[n - 1] = 0.0;

    let derivs: Vec<f64> = grid
        .iter()
        .map(|&x| Ok(-a_inverse(op, flux_argument(space, c_star, x)?)?))
        .collect::<Result<_>>()?;

    RadialFunction::from_samples(
        grid,
        values,
        derivs,
        SolutionMeta::AnnulusProfile { a, r, c: c_star },
    )
}

// ---------------------------------------------------------------------------
// Comparison experiments
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonOutcome {
    Holds,
    Violated,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Violation {
    pub radius: f64,
    pub gap: f64,
}

/// One functional sequence along an annulus family, with its running
/// supremum and a boundedness flag (not growing over the trailing window).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FunctionalSeries {
    pub values: Vec<f64>,
    pub sup: f64,
    pub bounded: bool,
}

impl FunctionalSeries {
    fn new(values: Vec<f64>) -> Self {
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w = values.len().saturating_sub(1).min(5);
        let mut growing = w > 0;
        if w > 0 {
            let tail = &values[values.len() - 1 - w..];
            for pair in tail.windows(2) {
                if pair[1] <= pair[0] {
                    growing = false;
                    break;
                }
            }
            if growing {
                growing = tail[w] > 1.05 * tail[0];
            }
        }
        Self {
            values,
            sup,
            bounded: !growing,
        }
    }

    /// Tends to zero: decreasing over the trailing window and the last
    /// value at most 1% of the peak.
    fn vanishes(&self) -> bool {
        let n = self.values.len();
        if n < 2 {
            return false;
        }
        let w = (n - 1).min(3);
        let tail = &self.values[n - 1 - w..];
        tail.windows(2).all(|p| p[1] <= p[0]) && tail[w] <= 0.01 * self.sup.max(f64::MIN_POSITIVE)
    }
}

/// The two growth functionals for one function along an annulus family:
/// `volume` is max|w|^p Vol(A)/(R2-R1)^p, `capacity` is (osc w)^p cap_p.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFunctionals {
    pub volume: FunctionalSeries,
    pub capacity: FunctionalSeries,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrowthFlags {
    pub annuli: Vec<(f64, f64)>,
    pub u: GrowthFunctionals,
    pub v: GrowthFunctionals,
    /// max|v-u|^p cap_p per annulus; its decay to zero is the p = 2
    /// difference condition.
    pub difference_capacity: FunctionalSeries,
    pub difference_vanishes: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub outcome: ComparisonOutcome,
    /// min over the common grid of v - u.
    pub margin: f64,
    pub violation: Option<Violation>,
    pub growth_flags: Option<GrowthFlags>,
    pub operator: String,
    pub tol: f64,
}

fn merge_grids(a: &[f64], b: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut g: Vec<f64> = a
        .iter()
        .chain(b.iter())
        .copied()
        .filter(|&r| r >= lo && r <= hi)
        .collect();
    g.sort_by(f64::total_cmp);
    g.dedup_by(|x, y| (*x - *y).abs() <= f64::EPSILON * y.abs());
    g
}

/// Compares two radial functions on their common domain: `holds` when
/// v - u ≥ -tol everywhere, otherwise `violated` at the first offending
/// radius. Growth flags are evaluated along dyadic annuli inside the
/// common domain when at least one fits.
pub fn comparison_experiment(
    space: &ModelSpace,
    op: &AOperator,
    a: f64,
    u: &RadialFunction,
    v: &RadialFunction,
    tol: f64,
) -> Result<ComparisonReport> {
    let lo = u.r_min().max(v.r_min());
    let hi = u.r_max().min(v.r_max());
    if !(hi > lo) {
        return Err(Error::GridMismatch(format!(
            "domains [{}, {}] and [{}, {}] do not overlap",
            u.r_min(),
            u.r_max(),
            v.r_min(),
            v.r_max()
        )));
    }
    if (lo - a).abs() > 1e-9 * a.max(1.0) {
        return Err(Error::GridMismatch(format!(
            "common domain starts at {lo}, expected the exterior boundary a = {a}"
        )));
    }

    let grid = merge_grids(u.grid(), v.grid(), lo, hi);
    let (ui, _) = u.interpolants()?;
    let (vi, _) = v.interpolants()?;
    let mut uvals = Vec::with_capacity(grid.len());
    let mut vvals = Vec::with_capacity(grid.len());
    for &r in &grid {
        uvals.push(ui.value(r)?);
        vvals.push(vi.value(r)?);
    }

    if uvals[0] > vvals[0] + tol {
        return Err(Error::GridMismatch(format!(
            "boundary data not ordered: u(a) = {} > v(a) + tol = {}",
            uvals[0],
            vvals[0] + tol
        )));
    }

    let mut margin = f64::INFINITY;
    let mut violation = None;
    for ((&r, &uu), &vv) in grid.iter().zip(&uvals).zip(&vvals) {
        let gap = vv - uu;
        margin = margin.min(gap);
        if violation.is_none() && gap < -tol {
            violation = Some(Violation {
                radius: r,
                gap: -gap,
            });
        }
    }

    let annuli = dyadic_annuli_within(lo, hi);
    let growth_flags = if annuli.is_empty() {
        None
    } else {
        Some(growth_condition_check(space, u, v, &annuli)?)
    };

    Ok(ComparisonReport {
        outcome: if violation.is_some() {
            ComparisonOutcome::Violated
        } else {
            ComparisonOutcome::Holds
        },
        margin,
        violation,
        growth_flags,
        operator: op.describe(),
        tol,
    })
}

fn dyadic_annuli_within(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut r = lo;
    while 2.0 * r <= hi {
        out.push((r, 2.0 * r));
        r *= 2.0;
    }
    out
}

/// Evaluates the growth functionals of u, v and v-u along the given
/// annulus family. Every annulus must lie inside both domains.
pub fn growth_condition_check(
    space: &ModelSpace,
    u: &RadialFunction,
    v: &RadialFunction,
    annuli: &[(f64, f64)],
) -> Result<GrowthFlags> {
    if annuli.is_empty() {
        return Err(Error::BadSequence("empty annulus family".into()));
    }
    let mut prev_r1 = 0.0;
    for &(r1, r2) in annuli {
        if !(r1 > 0.0) || !(r2 > r1) {
            return Err(Error::BadSequence(format!("bad annulus ({r1}, {r2})")));
        }
        if r1 < prev_r1 {
            return Err(Error::BadSequence(
                "annulus sequence must move outward".into(),
            ));
        }
        prev_r1 = r1;
        let lo = u.r_min().max(v.r_min());
        let hi = u.r_max().min(v.r_max());
        if r1 < lo - 1e-12 || r2 > hi * (1.0 + 1e-12) {
            return Err(Error::GridMismatch(format!(
                "annulus ({r1}, {r2}) outside the sampled domain [{lo}, {hi}]"
            )));
        }
    }

    let (ui, _) = u.interpolants()?;
    let (vi, _) = v.interpolants()?;
    let p = space.p();
    let quad = QuadOpts::default();

    let mut u_vol = Vec::new();
    let mut u_cap = Vec::new();
    let mut v_vol = Vec::new();
    let mut v_cap = Vec::new();
    let mut d_cap = Vec::new();

    for &(r1, r2) in annuli {
        let vol = crate::geometry::annulus_volume(space, r1, r2, &quad)?.value;
        let cap = capacity::annulus_capacity_closed_form(space, r1, r2, &quad)?.value;
        let width_pow = (r2 - r1).powf(p);

        let u_range = range_on(&ui, u.grid(), r1, r2)?;
        let v_range = range_on(&vi, v.grid(), r1, r2)?;
        let d_max = max_abs_diff_on(&ui, &vi, u.grid(), v.grid(), r1, r2)?;

        let max_abs = |range: (f64, f64)| range.0.abs().max(range.1.abs());
        u_vol.push(max_abs(u_range).powf(p) * vol / width_pow);
        v_vol.push(max_abs(v_range).powf(p) * vol / width_pow);
        u_cap.push((u_range.1 - u_range.0).powf(p) * cap);
        v_cap.push((v_range.1 - v_range.0).powf(p) * cap);
        d_cap.push(d_max.powf(p) * cap);
    }

    let difference_capacity = FunctionalSeries::new(d_cap);
    let difference_vanishes = difference_capacity.vanishes();
    Ok(GrowthFlags {
        annuli: annuli.to_vec(),
        u: GrowthFunctionals {
            volume: FunctionalSeries::new(u_vol),
            capacity: FunctionalSeries::new(u_cap),
        },
        v: GrowthFunctionals {
            volume: FunctionalSeries::new(v_vol),
            capacity: FunctionalSeries::new(v_cap),
        },
        difference_capacity,
        difference_vanishes,
    })
}

/// (min, max) of an interpolated function over [r1, r2], scanning grid
/// nodes inside the annulus plus the interpolated endpoints.
fn range_on(interp: &MonotoneCubic, grid: &[f64], r1: f64, r2: f64) -> Result<(f64, f64)> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &r in grid.iter().filter(|&&r| r >= r1 && r <= r2) {
        let v = interp.value(r)?;
        min = min.min(v);
        max = max.max(v);
    }
    for r in [r1, r2] {
        let v = interp.value(r)?;
        min = min.min(v);
        max = max.max(v);
    }
    Ok((min, max))
}

fn max_abs_diff_on(
    ui: &MonotoneCubic,
    vi: &MonotoneCubic,
    ugrid: &[f64],
    vgrid: &[f64],
    r1: f64,
    r2: f64,
) -> Result<f64> {
    let mut max = 0.0f64;
    for &r in ugrid
        .iter()
        .chain(vgrid.iter())
        .filter(|&&r| r >= r1 && r <= r2)
        .chain([r1, r2].iter())
    {
        max = max.max((vi.value(r)? - ui.value(r)?).abs());
    }
    Ok(max)
}

// ---------------------------------------------------------------------------
// Energies and growth bounds
// ---------------------------------------------------------------------------

/// The p-Dirichlet energy n ω_n ∫_a^R |u'|^p f^{n-1} dr of a sampled
/// radial function, with u' interpolated between nodes.
pub fn lp_gradient_norm(space: &ModelSpace, u: &RadialFunction, a: f64, r: f64) -> Result<f64> {
    if a < u.r_min() - 1e-12 || r > u.r_max() * (1.0 + 1e-12) || !(r > a) {
        return Err(Error::GridMismatch(format!(
            "energy window [{a}, {r}] outside the sampled domain [{}, {}]",
            u.r_min(),
            u.r_max()
        )));
    }
    let (_, di) = u.interpolants()?;
    let p = space.p();
    let quad = QuadOpts {
        abs_tol: 1e-12,
        rel_tol: 1e-10,
        max_panels: 8192,
    };
    let e = integrate(
        |x| Ok(di.value(x)?.abs().powf(p) * space.volume_density(x)?),
        a,
        r.min(u.r_max()),
        &quad,
    )?;
    Ok(space.area_constant() * e.value)
}

/// Checks |u(r)| ≤ E2 (ln r)^{(n-1)/n} and f(r) ≤ E1 r at every grid node
/// beyond r_min. Requires p = n.
pub fn log_growth_check(
    space: &ModelSpace,
    u: &RadialFunction,
    e1: f64,
    e2: f64,
    r_min: f64,
) -> Result<bool> {
    let n = space.dimension();
    if (space.p() - n as f64).abs() > 1e-12 {
        return Err(Error::PNotEqualN { p: space.p(), n });
    }
    if !(r_min >= 1.0) {
        return Err(Error::EvaluationFailure(format!(
            "log growth check needs r_min >= 1 so that ln r > 0, got {r_min}"
        )));
    }
    let exponent = (n as f64 - 1.0) / n as f64;
    for (&r, &val) in u.grid().iter().zip(u.values()) {
        if r <= r_min {
            continue;
        }
        if val.abs() > e2 * r.ln().powf(exponent) {
            return Ok(false);
        }
        if space.profile().value(r)? > e1 * r {
            return Ok(false);
        }
    }
    Ok(true)
}
