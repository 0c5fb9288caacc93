//! Adaptive Gauss–Kronrod quadrature and improper-integral classification.
//!
//! Finite intervals use a 15-point Kronrod rule with global adaptive
//! bisection (worst panel first). Semi-infinite integrals are built from
//! doubling cutoffs `R_j = a * 2^j`; the tail is classified from the decay
//! pattern of the shell increments, never assumed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// QUADPACK 15-point Kronrod abscissae (positive half, zero last).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

/// Embedded 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// 15-point Kronrod weights.
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Outcome of an integral evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Converged,
    Diverged,
    Indeterminate,
}

/// Value, error estimate and classification of a quadrature run.
///
/// When `classification` is `Diverged`, `value` holds the partial integral
/// at the truncation cutoff and is a lower bound for a positive integrand.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub classification: Classification,
    pub nodes_used: usize,
}

/// Tolerances for adaptive refinement on a finite interval.
#[derive(Clone, Copy, Debug)]
pub struct QuadOpts {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_panels: 4096,
        }
    }
}

/// Controls for the doubling-cutoff improper integral.
#[derive(Clone, Copy, Debug)]
pub struct ImproperOpts {
    pub quad: QuadOpts,
    /// Partial integrals above this are classified diverged outright.
    pub divergence_threshold: f64,
    /// Number of doublings of the cutoff, `R_j = a * 2^j`.
    pub max_doublings: u32,
    /// Increments decaying slower than this factor count as stagnation.
    pub stagnation_ratio: f64,
    /// Consecutive stagnating doublings needed to declare divergence.
    pub stagnation_window: u32,
}

impl Default for ImproperOpts {
    fn default() -> Self {
        Self {
            quad: QuadOpts::default(),
            divergence_threshold: 1e12,
            max_doublings: 60,
            stagnation_ratio: 1.05,
            stagnation_window: 5,
        }
    }
}

struct Panel {
    value: f64,
    error: f64,
    a: f64,
    b: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One GK15 application on [a, b]. Returns (kronrod value, error estimate).
fn gk15<F>(f: &F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let eval = |x: f64| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvaluationFailure(format!(
                "integrand returned non-finite value at x = {x:e}"
            )))
        }
    };

    let fc = eval(center)?;
    let mut fv1 = [0.0f64; 7];
    let mut fv2 = [0.0f64; 7];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut res_g = fc * WG[3];

    for j in 0..3 {
        let idx = 2 * j + 1;
        let x = half * XGK[idx];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv1[idx] = f1;
        fv2[idx] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[idx] * (f1 + f2);
        res_abs += WGK[idx] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let idx = 2 * j;
        let x = half * XGK[idx];
        let f1 = eval(center - x)?;
        let f2 = eval(center + x)?;
        fv1[idx] = f1;
        fv2[idx] = f2;
        res_k += WGK[idx] * (f1 + f2);
        res_abs += WGK[idx] * (f1.abs() + f2.abs());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let raw_err = ((res_k - res_g) * half).abs();
    let value = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK error rescale.
    let mut err = raw_err;
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }

    if !value.is_finite() {
        return Err(Error::Overflow {
            context: "quadrature panel",
            at: b,
        });
    }
    Ok((value, err))
}

/// Adaptive integral of `f` over the finite interval [a, b].
pub fn integrate<F>(f: F, a: f64, b: f64, opts: &QuadOpts) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::EvaluationFailure(
            "integrate requires finite bounds".into(),
        ));
    }
    if a == b {
        return Ok(QuadratureResult {
            value: 0.0,
            error_estimate: 0.0,
            classification: Classification::Converged,
            nodes_used: 0,
        });
    }

    let (v0, e0) = gk15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Panel {
        value: v0,
        error: e0,
        a,
        b,
    });
    let mut total_value = v0;
    let mut total_error = e0;
    let mut nodes = 15usize;
    let mut panels = 1usize;

    while total_error > opts.abs_tol.max(opts.rel_tol * total_value.abs()) {
        if panels >= opts.max_panels {
            return Ok(QuadratureResult {
                value: total_value,
                error_estimate: total_error,
                classification: Classification::Indeterminate,
                nodes_used: nodes,
            });
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval no longer splittable in f64; accept its estimate.
            total_error -= worst.error;
            continue;
        }
        let (vl, el) = gk15(&f, worst.a, mid)?;
        let (vr, er) = gk15(&f, mid, worst.b)?;
        total_value += vl + vr - worst.value;
        total_error += el + er - worst.error;
        nodes += 30;
        panels += 1;
        heap.push(Panel {
            value: vl,
            error: el,
            a: worst.a,
            b: mid,
        });
        heap.push(Panel {
            value: vr,
            error: er,
            a: mid,
            b: worst.b,
        });
    }

    Ok(QuadratureResult {
        value: total_value,
        error_estimate: total_error,
        classification: Classification::Converged,
        nodes_used: nodes,
    })
}

/// Integral of `f` over [a, ∞) with explicit divergence detection.
///
/// Shell increments over `[a*2^j, a*2^(j+1)]` are accumulated until one of:
/// * the partial integral exceeds `divergence_threshold` → diverged;
/// * increments stagnate (decay factor below `stagnation_ratio`) for
///   `stagnation_window` consecutive doublings → diverged;
/// * increments decay geometrically with a stable ratio and the
///   extrapolated tail is below tolerance → converged, with the geometric
///   tail added to the value and its instability added to the error;
/// * the doubling budget runs out → indeterminate.
pub fn improper_integral<F>(f: F, a: f64, opts: &ImproperOpts) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::EvaluationFailure(format!(
            "improper integral requires a finite lower bound a > 0, got {a}"
        )));
    }

    let mut total = 0.0f64;
    let mut quad_err = 0.0f64;
    let mut nodes = 0usize;
    let mut prev_inc: Option<f64> = None;
    let mut prev_ratio: Option<f64> = None;
    let mut stagnant = 0u32;
    let mut tiny_in_a_row = 0u32;

    let tol_for = |total: f64| opts.quad.abs_tol.max(opts.quad.rel_tol * total.abs());

    for j in 0..opts.max_doublings {
        let lo = a * 2f64.powi(j as i32);
        let hi = a * 2f64.powi(j as i32 + 1);
        let shell = integrate(&f, lo, hi, &opts.quad)?;
        nodes += shell.nodes_used;
        if shell.classification == Classification::Indeterminate {
            return Ok(QuadratureResult {
                value: total + shell.value,
                error_estimate: quad_err + shell.error_estimate,
                classification: Classification::Indeterminate,
                nodes_used: nodes,
            });
        }
        let inc = shell.value;
        total += inc;
        quad_err += shell.error_estimate;

        if total > opts.divergence_threshold {
            return Ok(QuadratureResult {
                value: total,
                error_estimate: quad_err,
                classification: Classification::Diverged,
                nodes_used: nodes,
            });
        }

        // Negligible consecutive increments: the tail is already below
        // tolerance regardless of its decay pattern.
        if inc.abs() <= 0.01 * tol_for(total) {
            tiny_in_a_row += 1;
            if tiny_in_a_row >= 2 {
                return Ok(QuadratureResult {
                    value: total,
                    error_estimate: quad_err + inc.abs(),
                    classification: Classification::Converged,
                    nodes_used: nodes,
                });
            }
        } else {
            tiny_in_a_row = 0;
        }

        if let Some(prev) = prev_inc {
            if prev > 0.0 && inc > 0.0 {
                let ratio = inc / prev;

                // Geometric tail extrapolation when the decay ratio is
                // stable and bounded away from 1.
                if ratio < 0.98 {
                    if let Some(pr) = prev_ratio {
                        let drift = (ratio - pr).abs();
                        if drift < 0.05 * (1.0 - ratio) {
                            let tail = inc * ratio / (1.0 - ratio);
                            let tail_uncert =
                                inc * drift / ((1.0 - ratio) * (1.0 - ratio)) + quad_err;
                            if tail_uncert <= tol_for(total + tail) {
                                return Ok(QuadratureResult {
                                    value: total + tail,
                                    error_estimate: tail_uncert,
                                    classification: Classification::Converged,
                                    nodes_used: nodes,
                                });
                            }
                        }
                    }
                }

                // Stagnation: increments barely decay (or grow), which for
                // a positive integrand signals a divergent tail.
                if prev / inc < opts.stagnation_ratio {
                    stagnant += 1;
                    if stagnant >= opts.stagnation_window {
                        return Ok(QuadratureResult {
                            value: total,
                            error_estimate: quad_err,
                            classification: Classification::Diverged,
                            nodes_used: nodes,
                        });
                    }
                } else {
                    stagnant = 0;
                }
                prev_ratio = Some(ratio);
            } else {
                prev_ratio = None;
                stagnant = 0;
            }
        }
        prev_inc = Some(inc);
    }

    Ok(QuadratureResult {
        value: total,
        error_estimate: quad_err,
        classification: Classification::Indeterminate,
        nodes_used: nodes,
    })
}
