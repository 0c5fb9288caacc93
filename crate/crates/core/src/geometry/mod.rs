//! Warping profiles, model spaces and volume integrals.
//!
//! A rotationally symmetric manifold is described by its warping function
//! `f` in the metric `ds^2 = dr^2 + f^2(r) dw^2` over the half-line
//! `(0, inf)`. Everything downstream (capacity, parabolicity criteria,
//! radial solutions) reduces to one-dimensional integrals of powers of `f`.

pub mod interp;
pub mod quad;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use interp::MonotoneCubic;
pub use quad::{
    improper_integral, integrate, Classification, ImproperOpts, QuadOpts, QuadratureResult,
};

/// Warping function of the metric. Positive and piecewise C¹ on (0, ∞).
#[derive(Clone, Debug)]
pub enum WarpProfile {
    /// f(r) = r (flat space).
    Euclidean,
    /// f(r) = sinh r (constant curvature -1).
    Hyperbolic,
    /// f(r) = r^b, b > 0.
    Power { exponent: f64 },
    /// f(r) = e^(λr) - 1, λ > 0, so f(r) ~ λr near 0.
    Exponential { rate: f64 },
    /// Sampled profile, interpolated by a shape-preserving monotone cubic.
    /// Evaluation outside the sampled range is an error.
    Table(MonotoneCubic),
}

impl WarpProfile {
    pub fn euclidean() -> Self {
        WarpProfile::Euclidean
    }

    pub fn hyperbolic() -> Self {
        WarpProfile::Hyperbolic
    }

    pub fn power(exponent: f64) -> Result<Self> {
        if !(exponent > 0.0) || !exponent.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "power profile needs exponent b > 0, got {exponent}"
            )));
        }
        Ok(WarpProfile::Power { exponent })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "exponential profile needs rate λ > 0, got {rate}"
            )));
        }
        Ok(WarpProfile::Exponential { rate })
    }

    /// Builds a table profile from (radius, value) samples.
    pub fn from_table(points: &[(f64, f64)]) -> Result<Self> {
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
        if xs.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::InvalidProfile(
                "table radii must be strictly positive".into(),
            ));
        }
        if ys.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::InvalidProfile(
                "table values must be strictly positive".into(),
            ));
        }
        Ok(WarpProfile::Table(MonotoneCubic::new(xs, ys)?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            WarpProfile::Euclidean => "euclidean",
            WarpProfile::Hyperbolic => "hyperbolic",
            WarpProfile::Power { .. } => "power",
            WarpProfile::Exponential { .. } => "exponential",
            WarpProfile::Table(_) => "table",
        }
    }

    /// f(r). Errors for r ≤ 0 and, for table profiles, outside the table.
    pub fn value(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::EvaluationFailure(format!(
                "profile evaluated at r = {r}, domain is (0, inf)"
            )));
        }
        let v = match self {
            WarpProfile::Euclidean => r,
            WarpProfile::Hyperbolic => r.sinh(),
            WarpProfile::Power { exponent } => r.powf(*exponent),
            WarpProfile::Exponential { rate } => (rate * r).exp_m1(),
            WarpProfile::Table(t) => t.value(r)?,
        };
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else if v == f64::INFINITY {
            Err(Error::Overflow {
                context: "warping profile",
                at: r,
            })
        } else {
            Err(Error::EvaluationFailure(format!(
                "profile value f({r:e}) = {v:e} is not positive finite"
            )))
        }
    }

    /// f'(r); at table knots this is the right-derivative of the interpolant.
    pub fn derivative(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::EvaluationFailure(format!(
                "profile derivative at r = {r}, domain is (0, inf)"
            )));
        }
        let d = match self {
            WarpProfile::Euclidean => 1.0,
            WarpProfile::Hyperbolic => r.cosh(),
            WarpProfile::Power { exponent } => exponent * r.powf(exponent - 1.0),
            WarpProfile::Exponential { rate } => rate * (rate * r).exp(),
            WarpProfile::Table(t) => t.derivative(r)?,
        };
        if d.is_finite() {
            Ok(d)
        } else {
            Err(Error::Overflow {
                context: "profile derivative",
                at: r,
            })
        }
    }
}

/// Volume of the unit ball in Euclidean n-space, via the recurrence
/// ω_n = ω_{n-2} · 2π/n (equivalent to π^{n/2} / Γ(n/2 + 1)).
pub fn unit_ball_volume(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// A warping profile together with the dimension and the exponent p.
#[derive(Clone, Debug)]
pub struct ModelSpace {
    profile: WarpProfile,
    n: u32,
    p: f64,
    omega_n: f64,
}

impl ModelSpace {
    pub fn new(profile: WarpProfile, n: u32, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidProfile(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidProfile(format!(
                "exponent must satisfy p > 1, got {p}"
            )));
        }
        Ok(Self {
            profile,
            n,
            p,
            omega_n: unit_ball_volume(n),
        })
    }

    pub fn profile(&self) -> &WarpProfile {
        &self.profile
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }

    /// n · ω_n, the area constant in the volume element n ω_n f^{n-1} dr.
    pub fn area_constant(&self) -> f64 {
        self.n as f64 * self.omega_n
    }

    /// The capacity exponent q = (n-1)/(p-1).
    pub fn capacity_exponent(&self) -> f64 {
        (self.n as f64 - 1.0) / (self.p - 1.0)
    }

    /// Same space with a different exponent p; ω_n is recomputed.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.profile.clone(), self.n, p)
    }

    /// Same profile in a different dimension; ω_n is recomputed.
    pub fn with_dimension(&self, n: u32) -> Result<Self> {
        Self::new(self.profile.clone(), n, self.p)
    }

    /// f^{n-1}(r), the density of the volume element up to n ω_n.
    pub fn volume_density(&self, r: f64) -> Result<f64> {
        let f = self.profile.value(r)?;
        let v = f.powi(self.n as i32 - 1);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow {
                context: "f^(n-1)",
                at: r,
            })
        }
    }

    /// V'(R) = n ω_n f^{n-1}(R), the derivative of the ball volume.
    pub fn volume_derivative(&self, r: f64) -> Result<f64> {
        Ok(self.area_constant() * self.volume_density(r)?)
    }

    /// f^{-q}(r) with q = (n-1)/(p-1), the capacity integrand.
    pub fn capacity_integrand(&self, r: f64) -> Result<f64> {
        let f = self.profile.value(r)?;
        let v = f.powf(-self.capacity_exponent());
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvaluationFailure(format!(
                "f^(-q) overflowed at r = {r:e}"
            )))
        }
    }

    /// A short human-readable description for reports.
    pub fn label(&self) -> String {
        let prof = match &self.profile {
            WarpProfile::Power { exponent } => format!("power(b={exponent})"),
            WarpProfile::Exponential { rate } => format!("exponential(λ={rate})"),
            other => other.kind_name().to_string(),
        };
        format!("{prof}, n={}, p={}", self.n, self.p)
    }
}

/// Constructs a profile by kind name and parameters, as used by the CLI.
pub fn make_profile(kind: &str, params: &ProfileParams) -> Result<WarpProfile> {
    match kind {
        "euclidean" => Ok(WarpProfile::euclidean()),
        "hyperbolic" => Ok(WarpProfile::hyperbolic()),
        "power" => {
            let b = params.b.ok_or_else(|| {
                Error::InvalidProfile("power profile requires parameter b".into())
            })?;
            WarpProfile::power(b)
        }
        "exponential" => {
            let lambda = params.lambda.ok_or_else(|| {
                Error::InvalidProfile("exponential profile requires parameter lambda".into())
            })?;
            WarpProfile::exponential(lambda)
        }
        "table" => {
            let table = params.table.as_ref().ok_or_else(|| {
                Error::InvalidProfile("table profile requires sample points".into())
            })?;
            WarpProfile::from_table(table)
        }
        other => Err(Error::InvalidProfile(format!(
            "unknown profile kind: {other}"
        ))),
    }
}

/// Parameter bag for [`make_profile`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ProfileParams {
    pub b: Option<f64>,
    pub lambda: Option<f64>,
    pub table: Option<Vec<(f64, f64)>>,
}

/// Volume of the geodesic ball B(o, R): n ω_n ∫_0^R f^{n-1}(s) ds.
///
/// Integrability of f^{n-1} at the origin is probed by comparing dyadic
/// shells; a non-decaying shell sequence means the volume integral does
/// not exist and is reported as `DivergentAtOrigin`.
pub fn ball_volume(space: &ModelSpace, radius: f64, opts: &QuadOpts) -> Result<QuadratureResult> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::EvaluationFailure(format!(
            "ball radius must be positive finite, got {radius}"
        )));
    }
    origin_integrability_probe(space, radius)?;
    let mut r = integrate(|s| space.volume_density(s), 0.0, radius, opts)?;
    r.value *= space.area_constant();
    r.error_estimate *= space.area_constant();
    Ok(r)
}

/// Volume of the annulus B(o, R2) \ B(o, R1), computed directly as
/// n ω_n ∫_{R1}^{R2} f^{n-1}; identical to ball_volume(R2) - ball_volume(R1)
/// by additivity but avoids touching the origin.
pub fn annulus_volume(
    space: &ModelSpace,
    r1: f64,
    r2: f64,
    opts: &QuadOpts,
) -> Result<QuadratureResult> {
    check_annulus(r1, r2)?;
    let mut r = integrate(|s| space.volume_density(s), r1, r2, opts)?;
    r.value *= space.area_constant();
    r.error_estimate *= space.area_constant();
    Ok(r)
}

pub(crate) fn check_annulus(r1: f64, r2: f64) -> Result<()> {
    if !(r1 > 0.0) || !(r2 > r1) || !r2.is_finite() {
        return Err(Error::BadAnnulus { r1, r2 });
    }
    Ok(())
}

/// Compares dyadic shell integrals of f^{n-1} approaching the origin.
/// For an integrable density the shells decay; growth over several
/// consecutive shells flags `DivergentAtOrigin`.
fn origin_integrability_probe(space: &ModelSpace, radius: f64) -> Result<()> {
    origin_probe_density(|s| space.volume_density(s), radius)
}

fn origin_probe_density<F>(density: F, radius: f64) -> Result<()>
where
    F: Fn(f64) -> Result<f64>,
{
    let probe_opts = QuadOpts {
        abs_tol: 1e-8,
        rel_tol: 1e-8,
        max_panels: 256,
    };
    let mut prev: Option<f64> = None;
    let mut growing = 0u32;
    for k in 8..=16 {
        let hi = radius * 2f64.powi(-k);
        let lo = radius * 2f64.powi(-k - 1);
        let shell = integrate(&density, lo, hi, &probe_opts)?;
        if let Some(prev) = prev {
            if shell.value >= prev * 0.999 {
                growing += 1;
                if growing >= 3 {
                    return Err(Error::DivergentAtOrigin(format!(
                        "dyadic shells of f^(n-1) do not decay near 0 (shell [{lo:e}, {hi:e}] = {:e})",
                        shell.value
                    )));
                }
            } else {
                growing = 0;
            }
        }
        prev = Some(shell.value);
    }
    Ok(())
}
