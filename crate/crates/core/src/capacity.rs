//! Condenser capacities on model spaces, three ways: the closed form from
//! the radial profile, the cutoff-function upper bound, and direct
//! minimization of the discretized radial p-Dirichlet energy. The global
//! capacity of a ball is the limit of annulus capacities and is decided
//! through the improper-integral classifier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::quad::{improper_integral, integrate, Classification, ImproperOpts, QuadOpts};
use crate::geometry::{annulus_volume, check_annulus, ModelSpace};
use crate::radial::{log_grid, RadialFunction, SolutionMeta};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    ClosedForm,
    CutoffBound,
    Numerical,
}

/// A capacity value with provenance. `r2 = f64::INFINITY` marks the
/// global (exterior) problem; `value = 0` there means the capacity limit
/// vanishes, the parabolic-compatible outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityEstimate {
    pub value: f64,
    pub method: CapacityMethod,
    pub error_estimate: f64,
    pub minimizer: Option<RadialFunction>,
    pub r1: f64,
    /// The unbounded marker serializes as JSON null.
    #[serde(with = "radius_marker")]
    pub r2: f64,
    /// Classification of the defining integral (only the global problem
    /// can legitimately be `Diverged`, which encodes capacity zero).
    pub integral_classification: Classification,
}

mod radius_marker {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// ∫_{r1}^{r2} f^{-q}, the radial capacity integral.
pub fn capacity_integral(
    space: &ModelSpace,
    r1: f64,
    r2: f64,
    opts: &QuadOpts,
) -> Result<crate::geometry::QuadratureResult> {
    check_annulus(r1, r2)?;
    integrate(|r| space.capacity_integrand(r), r1, r2, opts)
}

/// Closed-form annulus capacity
/// cap_p(R1, R2) = n ω_n ( ∫_{R1}^{R2} f^{-q} )^{-(p-1)}, q = (n-1)/(p-1),
/// attained by the radial profile η_{R1,R2}.
pub fn annulus_capacity_closed_form(
    space: &ModelSpace,
    r1: f64,
    r2: f64,
    opts: &QuadOpts,
) -> Result<CapacityEstimate> {
    let integral = capacity_integral(space, r1, r2, opts)?;
    if integral.classification == Classification::Indeterminate {
        return Err(Error::Indeterminate(format!(
            "capacity integral over ({r1}, {r2}) did not reach tolerance"
        )));
    }
    let pm1 = space.p() - 1.0;
    let c = space.area_constant();
    let value = c * integral.value.powf(-pm1);
    // first-order error propagation through I ↦ n ω_n I^{-(p-1)}
    let error = pm1 * c * integral.value.powf(-pm1 - 1.0) * integral.error_estimate;
    Ok(CapacityEstimate {
        value,
        method: CapacityMethod::ClosedForm,
        error_estimate: error,
        minimizer: None,
        r1,
        r2,
        integral_classification: Classification::Converged,
    })
}

/// Cutoff-function upper bound (2/(R2-R1))^p · Vol(A_{R1,R2}), from the
/// mollified piecewise-linear cutoff with |∇w| ≤ 2/(R2-R1).
pub fn cutoff_upper_bound(
    space: &ModelSpace,
    r1: f64,
    r2: f64,
    opts: &QuadOpts,
) -> Result<CapacityEstimate> {
    check_annulus(r1, r2)?;
    let vol = annulus_volume(space, r1, r2, opts)?;
    let factor = (2.0 / (r2 - r1)).powf(space.p());
    Ok(CapacityEstimate {
        value: factor * vol.value,
        method: CapacityMethod::CutoffBound,
        error_estimate: factor * vol.error_estimate,
        minimizer: None,
        r1,
        r2,
        integral_classification: Classification::Converged,
    })
}

/// The capacity limit Cap_p(B(o, R1)) = lim_{R2→∞} cap_p(R1, R2):
/// zero when ∫_{R1}^∞ f^{-q} diverges, n ω_n I^{-(p-1)} when it
/// converges. An indeterminate tail is surfaced, never silently resolved.
pub fn global_capacity(
    space: &ModelSpace,
    r1: f64,
    opts: &ImproperOpts,
) -> Result<CapacityEstimate> {
    if !(r1 > 0.0) || !r1.is_finite() {
        return Err(Error::BadAnnulus {
            r1,
            r2: f64::INFINITY,
        });
    }
    let integral = improper_integral(|r| space.capacity_integrand(r), r1, opts)?;
    match integral.classification {
        Classification::Diverged => Ok(CapacityEstimate {
            value: 0.0,
            method: CapacityMethod::ClosedForm,
            error_estimate: 0.0,
            minimizer: None,
            r1,
            r2: f64::INFINITY,
            integral_classification: Classification::Diverged,
        }),
        Classification::Converged => {
            let pm1 = space.p() - 1.0;
            let c = space.area_constant();
            Ok(CapacityEstimate {
                value: c * integral.value.powf(-pm1),
                method: CapacityMethod::ClosedForm,
                error_estimate: pm1 * c * integral.value.powf(-pm1 - 1.0) * integral.error_estimate,
                minimizer: None,
                r1,
                r2: f64::INFINITY,
                integral_classification: Classification::Converged,
            })
        }
        Classification::Indeterminate => Err(Error::Indeterminate(format!(
            "tail of f^(-q) from {r1} not classified within the doubling budget"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Direct minimization of the discrete p-Dirichlet energy
// ---------------------------------------------------------------------------

/// Mesh and termination controls for [`numerical_capacity`].
#[derive(Clone, Copy, Debug)]
pub struct MeshOpts {
    /// Number of mesh intervals (≥ 16); log-spaced between R1 and R2.
    pub intervals: usize,
    pub max_iterations: usize,
    /// Relative energy-decrease threshold.
    pub energy_tol: f64,
    /// Max nodal update threshold.
    pub step_tol: f64,
}

impl Default for MeshOpts {
    fn default() -> Self {
        Self {
            intervals: 2000,
            max_iterations: 500,
            energy_tol: 1e-12,
            step_tol: 1e-10,
        }
    }
}

/// Piecewise-linear energy model on a fixed grid:
/// E(v) = n ω_n Σ_i f^{n-1}(m_i) h_i φ((v_{i+1}-v_i)/h_i),
/// φ(s) = (ε² + s²)^{p/2} with midpoint-sampled weights.
struct EnergyModel {
    /// n ω_n f^{n-1}(m_i) h_i per interval.
    coef: Vec<f64>,
    h: Vec<f64>,
    p: f64,
}

impl EnergyModel {
    fn new(space: &ModelSpace, grid: &[f64]) -> Result<Self> {
        let mut coef = Vec::with_capacity(grid.len() - 1);
        let mut h = Vec::with_capacity(grid.len() - 1);
        for w in grid.windows(2) {
            let hi = w[1] - w[0];
            let mid = 0.5 * (w[0] + w[1]);
            coef.push(space.area_constant() * space.volume_density(mid)? * hi);
            h.push(hi);
        }
        Ok(Self {
            coef,
            h,
            p: space.p(),
        })
    }

    fn energy(&self, v: &[f64], eps: f64) -> f64 {
        let half_p = 0.5 * self.p;
        let mut e = 0.0;
        for i in 0..self.coef.len() {
            let s = (v[i + 1] - v[i]) / self.h[i];
            e += self.coef[i] * (eps * eps + s * s).powf(half_p);
        }
        e
    }

    /// Gradient w.r.t. interior nodes and the SPD tridiagonal Hessian
    /// (diagonal, super-diagonal).
    fn assemble(&self, v: &[f64], eps: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let p = self.p;
        let m = self.coef.len(); // intervals
        let interior = m - 1;
        let mut phi_p = vec![0.0; m];
        let mut phi_pp = vec![0.0; m];
        for i in 0..m {
            let s = (v[i + 1] - v[i]) / self.h[i];
            let w = eps * eps + s * s;
            phi_p[i] = p * s * w.powf(0.5 * p - 1.0);
            phi_pp[i] = p * w.powf(0.5 * p - 2.0) * (eps * eps + (p - 1.0) * s * s);
        }
        let mut grad = vec![0.0; interior];
        let mut diag = vec![0.0; interior];
        let mut off = vec![0.0; interior.saturating_sub(1)];
        for j in 0..interior {
            let i = j + 1; // node index
            grad[j] = self.coef[i - 1] * phi_p[i - 1] / self.h[i - 1]
                - self.coef[i] * phi_p[i] / self.h[i];
            diag[j] = self.coef[i - 1] * phi_pp[i - 1] / (self.h[i - 1] * self.h[i - 1])
                + self.coef[i] * phi_pp[i] / (self.h[i] * self.h[i]);
            if j + 1 < interior {
                off[j] = -self.coef[i] * phi_pp[i] / (self.h[i] * self.h[i]);
            }
        }
        (grad, diag, off)
    }
}

/// Thomas solve for a symmetric tridiagonal system.
fn tridiag_solve(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 || !denom.is_finite() {
        return None;
    }
    if n > 1 {
        c[0] = off[0] / denom;
    }
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - off[i - 1] * c[i - 1];
        if denom == 0.0 || !denom.is_finite() {
            return None;
        }
        if i < n - 1 {
            c[i] = off[i] / denom;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Some(x)
}

struct MinimizeOutcome {
    values: Vec<f64>,
    energy: f64,
    last_decrease: f64,
}

/// Damped Newton on the ε-regularized energy, warm-started from `v0`.
/// Falls back to a diagonal-preconditioned gradient step whenever the
/// Newton direction fails to decrease the energy.
fn minimize_once(
    model: &EnergyModel,
    v0: &[f64],
    eps: f64,
    opts: &MeshOpts,
) -> Result<MinimizeOutcome> {
    let mut v = v0.to_vec();
    let mut energy = model.energy(&v, eps);
    let mut last_decrease = f64::INFINITY;

    for iter in 0..opts.max_iterations {
        let (grad, diag, off) = model.assemble(&v, eps);
        let residual = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));

        // Newton direction: H d = -g
        let newton = tridiag_solve(&diag, &off, &grad.iter().map(|g| -g).collect::<Vec<_>>());
        let mut moved = false;
        let mut max_step = 0.0f64;
        if let Some(dir) = newton {
            if dir.iter().all(|d| d.is_finite()) {
                let mut t = 1.0;
                for _ in 0..40 {
                    let mut cand = v.clone();
                    for (c, d) in cand[1..].iter_mut().zip(&dir) {
                        *c += t * d;
                    }
                    let e = model.energy(&cand, eps);
                    if e < energy {
                        max_step = dir.iter().fold(0.0f64, |m, d| m.max((t * d).abs()));
                        last_decrease = energy - e;
                        v = cand;
                        energy = e;
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
            }
        }

        if !moved {
            // preconditioned gradient fallback: d = -g / diag(H)
            let dir: Vec<f64> = grad
                .iter()
                .zip(&diag)
                .map(|(g, d)| -g / d.max(1e-300))
                .collect();
            let mut t = 1.0;
            for _ in 0..60 {
                let mut cand = v.clone();
                for (c, d) in cand[1..].iter_mut().zip(&dir) {
                    *c += t * d;
                }
                let e = model.energy(&cand, eps);
                if e < energy {
                    max_step = dir.iter().fold(0.0f64, |m, d| m.max((t * d).abs()));
                    last_decrease = energy - e;
                    v = cand;
                    energy = e;
                    moved = true;
                    break;
                }
                t *= 0.5;
            }
        }

        if !moved {
            // Neither direction can lower a convex energy through 40+
            // dyadic backtracking steps: the iterate sits at the f64
            // resolution floor, where the attainable gradient scales like
            // sqrt(H * E * eps). Anything clearly above that scale means
            // the directions themselves are broken.
            let hessian_scale = diag.iter().fold(0.0f64, |m, d| m.max(*d));
            let floor = (hessian_scale * energy.abs().max(1e-300) * f64::EPSILON)
                .sqrt()
                .max(1e-9 * energy.abs().max(1.0));
            if residual <= 100.0 * floor {
                return Ok(MinimizeOutcome {
                    values: v,
                    energy,
                    last_decrease: 0.0,
                });
            }
            return Err(Error::NonConvergence {
                iterations: iter,
                residual,
            });
        }

        if last_decrease < opts.energy_tol * energy.abs().max(1e-300) && max_step < opts.step_tol {
            return Ok(MinimizeOutcome {
                values: v,
                energy,
                last_decrease,
            });
        }
    }

    let (grad, _, _) = model.assemble(&v, eps);
    Err(Error::NonConvergence {
        iterations: opts.max_iterations,
        residual: grad.iter().fold(0.0f64, |m, g| m.max(g.abs())),
    })
}

/// Direct minimization of J(v) = n ω_n ∫ |v'|^p f^{n-1} dr over
/// piecewise-linear v on a log-spaced grid with v(R1) = 1, v(R2) = 0.
///
/// The integrand is regularized to (ε² + |v'|²)^{p/2} with ε = 1e-10;
/// for p < 2 a continuation ladder drives ε from 1e-2 down to 0.
pub fn numerical_capacity(
    space: &ModelSpace,
    r1: f64,
    r2: f64,
    opts: &MeshOpts,
) -> Result<CapacityEstimate> {
    check_annulus(r1, r2)?;
    if opts.intervals < 16 {
        return Err(Error::GridMismatch(format!(
            "mesh needs at least 16 intervals, got {}",
            opts.intervals
        )));
    }
    let grid = log_grid(r1, r2, opts.intervals);
    let model = EnergyModel::new(space, &grid)?;

    // start from the profile linear in ln r
    let lr1 = r1.ln();
    let lr2 = r2.ln();
    let mut v: Vec<f64> = grid.iter().map(|&r| (lr2 - r.ln()) / (lr2 - lr1)).collect();
    v[0] = 1.0;
    *v.last_mut().unwrap() = 0.0;

    let ladder: &[f64] = if space.p() < 2.0 {
        &[1e-2, 1e-4, 1e-6, 1e-8, 1e-10]
    } else {
        &[1e-10]
    };
    let mut outcome = None;
    for &eps in ladder {
        let o = minimize_once(&model, &v, eps, opts)?;
        v = o.values.clone();
        outcome = Some(o);
    }
    // final polish at ε = 0 where the bare integrand is smooth along the
    // current iterate (slopes bounded away from zero)
    if space.p() < 2.0 {
        let min_slope = grid
            .windows(2)
            .zip(v.windows(2))
            .map(|(gw, vw)| ((vw[1] - vw[0]) / (gw[1] - gw[0])).abs())
            .fold(f64::INFINITY, f64::min);
        if min_slope > 1e-12 {
            let o = minimize_once(&model, &v, 0.0, opts)?;
            v = o.values.clone();
            outcome = Some(o);
        }
    }
    let outcome = outcome.expect("ladder nonempty");

    // nodal derivative: one-sided at the ends, averaged slopes inside
    let slopes: Vec<f64> = grid
        .windows(2)
        .zip(v.windows(2))
        .map(|(gw, vw)| (vw[1] - vw[0]) / (gw[1] - gw[0]))
        .collect();
    let mut derivs = Vec::with_capacity(grid.len());
    derivs.push(slopes[0]);
    for i in 1..grid.len() - 1 {
        derivs.push(0.5 * (slopes[i - 1] + slopes[i]));
    }
    derivs.push(*slopes.last().unwrap());

    let minimizer =
        RadialFunction::from_samples(grid, v, derivs, SolutionMeta::Minimizer { r1, r2 })?;

    Ok(CapacityEstimate {
        value: outcome.energy,
        method: CapacityMethod::Numerical,
        error_estimate: outcome.last_decrease,
        minimizer: Some(minimizer),
        r1,
        r2,
        integral_classification: Classification::Converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpProfile;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, PI};

    fn euclid(n: u32, p: f64) -> ModelSpace {
        ModelSpace::new(WarpProfile::euclidean(), n, p).unwrap()
    }

    fn hyper(n: u32, p: f64) -> ModelSpace {
        ModelSpace::new(WarpProfile::hyperbolic(), n, p).unwrap()
    }

    fn q() -> QuadOpts {
        QuadOpts::default()
    }

    // ---- closed form ----

    #[test]
    fn closed_form_newtonian_annulus() {
        // 4π / (1/R1 - 1/R2) = 8π for (1,2)
        let cap = annulus_capacity_closed_form(&euclid(3, 2.0), 1.0, 2.0, &q()).unwrap();
        assert_relative_eq!(cap.value, 8.0 * PI, max_relative = 1e-10);
        assert!(cap.error_estimate < 1e-6);
    }

    #[test]
    fn closed_form_log_annulus() {
        // ∫_1^e 1/r = 1 analytically, so cap = 2π
        let cap = annulus_capacity_closed_form(&euclid(2, 2.0), 1.0, E, &q()).unwrap();
        assert_relative_eq!(cap.value, 2.0 * PI, max_relative = 1e-10);
    }

    #[test]
    fn closed_form_hyperbolic_truncated_tail() {
        // antiderivative of 1/sinh is ln tanh(s/2)
        let i = (20f64.tanh()).ln() - (0.5f64.tanh()).ln();
        let oracle = 2.0 * PI / i;
        let cap = annulus_capacity_closed_form(&hyper(2, 2.0), 1.0, 40.0, &q()).unwrap();
        assert_relative_eq!(cap.value, oracle, max_relative = 1e-10);
        assert_relative_eq!(cap.value, 8.139_507_067_607_9, max_relative = 1e-10);
    }

    #[test]
    fn closed_form_monotonicity() {
        let s = hyper(2, 2.0);
        // decreasing in R2
        let mut prev = f64::INFINITY;
        for &r2 in &[2.0, 4.0, 8.0, 16.0] {
            let c = annulus_capacity_closed_form(&s, 1.0, r2, &q())
                .unwrap()
                .value;
            assert!(c < prev);
            prev = c;
        }
        // increasing in R1
        let mut prev = 0.0;
        for &r1 in &[1.0, 2.0, 3.0] {
            let c = annulus_capacity_closed_form(&s, r1, 20.0, &q())
                .unwrap()
                .value;
            assert!(c > prev);
            prev = c;
        }
    }

    // ---- cutoff bound ----

    #[test]
    fn cutoff_bound_examples() {
        // (2/1)^2 · 3π = 12π
        let b = cutoff_upper_bound(&euclid(2, 2.0), 1.0, 2.0, &q()).unwrap();
        assert_relative_eq!(b.value, 12.0 * PI, max_relative = 1e-10);
        assert_eq!(b.method, CapacityMethod::CutoffBound);

        // (2/2)^2 · 8π = 8π dominates the closed form 2π/ln 3
        let b = cutoff_upper_bound(&euclid(2, 2.0), 1.0, 3.0, &q()).unwrap();
        let c = annulus_capacity_closed_form(&euclid(2, 2.0), 1.0, 3.0, &q()).unwrap();
        assert_relative_eq!(b.value, 8.0 * PI, max_relative = 1e-10);
        assert_relative_eq!(c.value, 2.0 * PI / 3f64.ln(), max_relative = 1e-10);
        assert!(b.value >= c.value);
    }

    #[test]
    fn cutoff_bound_dominates_on_degenerate_annulus() {
        let s = hyper(2, 2.0);
        let eps = 1e-3;
        let b = cutoff_upper_bound(&s, 2.0, 2.0 + eps, &q()).unwrap();
        let c = annulus_capacity_closed_form(&s, 2.0, 2.0 + eps, &q()).unwrap();
        assert!(b.value >= c.value);
        assert!(b.value > 1e3, "both blow up as the annulus degenerates");
    }

    #[test]
    fn cutoff_bound_dominates_closed_form_on_sample_grid() {
        for space in [euclid(2, 2.0), euclid(3, 3.0), hyper(2, 2.0), hyper(3, 1.5)] {
            for &(r1, r2) in &[(0.5, 1.0), (1.0, 2.0), (1.0, 8.0), (3.0, 4.5)] {
                let b = cutoff_upper_bound(&space, r1, r2, &q()).unwrap().value;
                let c = annulus_capacity_closed_form(&space, r1, r2, &q())
                    .unwrap()
                    .value;
                assert!(
                    b >= c * (1.0 - 1e-10),
                    "bound {b} under closed form {c} on {}",
                    space.label()
                );
            }
        }
    }

    // ---- global capacity ----

    #[test]
    fn global_capacity_examples() {
        let o = ImproperOpts::default();
        // ∫ 1/r diverges → capacity 0
        let g = global_capacity(&euclid(2, 2.0), 1.0, &o).unwrap();
        assert_eq!(g.value, 0.0);
        assert_eq!(g.integral_classification, Classification::Diverged);
        assert!(g.r2.is_infinite());

        // 4π/(1/R1) = 4π
        let g = global_capacity(&euclid(3, 2.0), 1.0, &o).unwrap();
        assert_relative_eq!(g.value, 4.0 * PI, max_relative = 1e-8);

        let g = global_capacity(&hyper(2, 2.0), 1.0, &o).unwrap();
        assert_relative_eq!(g.value, 8.139_507_067_607_9, max_relative = 1e-8);
    }

    #[test]
    fn global_capacity_bounded_by_annulus_capacity() {
        let s = hyper(2, 2.0);
        let g = global_capacity(&s, 1.0, &ImproperOpts::default()).unwrap();
        for &r2 in &[1.5, 2.0, 8.0, 64.0] {
            let c = annulus_capacity_closed_form(&s, 1.0, r2, &q()).unwrap();
            assert!(g.value <= c.value + 1e-9);
        }
    }

    #[test]
    fn global_capacity_dichotomy_independent_of_ball() {
        // zero/positive classification must not depend on R1
        for space in [
            euclid(2, 2.0),
            euclid(3, 2.0),
            hyper(2, 2.0),
            euclid(4, 4.0),
        ] {
            let mut verdicts = Vec::new();
            for &r1 in &[0.5, 1.0, 2.0, 5.0] {
                let g = global_capacity(&space, r1, &ImproperOpts::default()).unwrap();
                verdicts.push(g.value == 0.0);
            }
            assert!(
                verdicts.windows(2).all(|w| w[0] == w[1]),
                "dichotomy violated on {}",
                space.label()
            );
        }
    }

    // ---- numerical minimizer ----

    #[test]
    fn numerical_capacity_newtonian() {
        let s = euclid(3, 2.0);
        let got = numerical_capacity(&s, 1.0, 2.0, &MeshOpts::default()).unwrap();
        assert_relative_eq!(got.value, 8.0 * PI, max_relative = 1e-3);
        let m = got.minimizer.as_ref().unwrap();
        assert_relative_eq!(m.values()[0], 1.0);
        assert_relative_eq!(*m.values().last().unwrap(), 0.0);
    }

    #[test]
    fn numerical_capacity_p3_matches_sqrt_antiderivative() {
        // closed form n ω_n (∫_1^2 r^(-1/2))^(-2) with ∫ = 2(√2 - 1)
        let s = euclid(2, 3.0);
        let oracle = 2.0 * PI * (2.0 * (2f64.sqrt() - 1.0)).powi(-2);
        let got = numerical_capacity(&s, 1.0, 2.0, &MeshOpts::default()).unwrap();
        assert_relative_eq!(got.value, oracle, max_relative = 1e-3);
        assert_relative_eq!(oracle, 9.155_271_918_543_05, max_relative = 1e-12);
    }

    #[test]
    fn numerical_capacity_hyperbolic() {
        let s = hyper(2, 2.0);
        let closed = annulus_capacity_closed_form(&s, 1.0, 5.0, &q()).unwrap();
        let got = numerical_capacity(&s, 1.0, 5.0, &MeshOpts::default()).unwrap();
        assert_relative_eq!(got.value, closed.value, max_relative = 1e-3);
    }

    #[test]
    fn numerical_capacity_p_less_than_two() {
        let s = euclid(2, 1.5);
        let closed = annulus_capacity_closed_form(&s, 1.0, 2.0, &q()).unwrap();
        let got = numerical_capacity(&s, 1.0, 2.0, &MeshOpts::default()).unwrap();
        assert_relative_eq!(got.value, closed.value, max_relative = 1e-3);
    }

    #[test]
    fn discrete_minimum_dominates_continuum_and_refines() {
        let cells = [
            (euclid(3, 2.0), 1.0, 2.0),
            (euclid(2, 3.0), 1.0, 2.0),
            (hyper(2, 2.0), 1.0, 5.0),
        ];
        for (space, r1, r2) in cells {
            let closed = annulus_capacity_closed_form(&space, r1, r2, &q())
                .unwrap()
                .value;
            let mut prev_gap = f64::INFINITY;
            for intervals in [250usize, 500, 1000] {
                let opts = MeshOpts {
                    intervals,
                    ..MeshOpts::default()
                };
                let got = numerical_capacity(&space, r1, r2, &opts).unwrap().value;
                // PL trials are admissible: discrete min sits above the
                // continuum value up to the energy assembly tolerance
                assert!(
                    got >= closed * (1.0 - 1e-6),
                    "discrete {got} undercuts {closed} on {}",
                    space.label()
                );
                let gap = got - closed;
                assert!(
                    gap < prev_gap,
                    "gap must shrink under refinement on {}",
                    space.label()
                );
                prev_gap = gap;
            }
        }
    }

    #[test]
    fn minimizer_is_monotone_and_bounded() {
        for (space, r1, r2) in [
            (euclid(3, 2.0), 1.0, 2.0),
            (euclid(2, 1.5), 1.0, 4.0),
            (hyper(2, 3.0), 1.0, 3.0),
        ] {
            let got = numerical_capacity(
                &space,
                r1,
                r2,
                &MeshOpts {
                    intervals: 200,
                    ..MeshOpts::default()
                },
            )
            .unwrap();
            let m = got.minimizer.unwrap();
            let mut prev = f64::INFINITY;
            for &v in m.values() {
                assert!((-1e-12..=1.0 + 1e-12).contains(&v));
                assert!(v <= prev + 1e-12, "minimizer must be nonincreasing");
                prev = v;
            }
        }
    }

    #[test]
    fn mesh_too_small_is_rejected() {
        let e = numerical_capacity(
            &euclid(2, 2.0),
            1.0,
            2.0,
            &MeshOpts {
                intervals: 8,
                ..MeshOpts::default()
            },
        );
        assert!(matches!(e, Err(Error::GridMismatch(_))));
    }

    #[test]
    fn iteration_starved_minimizer_reports_nonconvergence() {
        let e = numerical_capacity(
            &hyper(2, 2.0),
            1.0,
            5.0,
            &MeshOpts {
                intervals: 64,
                max_iterations: 1,
                energy_tol: 0.0,
                step_tol: 0.0,
            },
        );
        match e {
            Err(Error::NonConvergence { residual, .. }) => assert!(residual >= 0.0),
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }
}
