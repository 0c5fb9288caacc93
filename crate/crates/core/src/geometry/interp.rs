//! Shape-preserving monotone cubic interpolation (Fritsch–Carlson).
//!
//! Used by table warping profiles and for resampling radial functions onto
//! a common grid. The interpolant is C¹, stays within the node values on
//! every interval, and is monotone wherever the data is monotone.
//! Evaluation outside the knot range is an error, never extrapolation.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Node slopes after Fritsch–Carlson limiting.
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from strictly increasing abscissae.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidProfile(format!(
                "table length mismatch: {} radii vs {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidProfile(
                "table needs at least two points".into(),
            ));
        }
        for w in xs.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidProfile(format!(
                    "table radii must be strictly increasing: {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if xs.iter().chain(ys.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidProfile("table entries must be finite".into()));
        }
        let slopes = fritsch_carlson_slopes(&xs, &ys);
        Ok(Self { xs, ys, slopes })
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    fn interval_of(&self, x: f64) -> Result<usize> {
        if !x.is_finite() || x < self.x_min() || x > self.x_max() {
            return Err(Error::EvaluationFailure(format!(
                "x = {x} outside table range [{}, {}]; extrapolation is not allowed",
                self.x_min(),
                self.x_max()
            )));
        }
        // partition_point returns the first index with xs[i] > x, so the
        // interval is [xs[i-1], xs[i]].
        let idx = self.xs.partition_point(|&k| k <= x);
        Ok(idx.clamp(1, self.xs.len() - 1) - 1)
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(t);
        Ok(h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1])
    }

    /// Derivative of the interpolant. At a knot this is the (one-sided
    /// coincident) node slope, i.e. the right-derivative.
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let i = self.interval_of(x)?;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (d00, d10, d01, d11) = hermite_basis_deriv(t);
        Ok(d00 * self.ys[i] / h
            + d10 * self.slopes[i]
            + d01 * self.ys[i + 1] / h
            + d11 * self.slopes[i + 1])
    }
}

fn hermite_basis(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

fn hermite_basis_deriv(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    (
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 2.0 * t,
    )
}

fn fritsch_carlson_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = ys
        .windows(2)
        .zip(&h)
        .map(|(w, hi)| (w[1] - w[0]) / hi)
        .collect();

    let mut m = vec![0.0; n];
    m[0] = endpoint_slope(
        h[0],
        h.get(1).copied().unwrap_or(h[0]),
        d[0],
        *d.get(1).unwrap_or(&d[0]),
    );
    m[n - 1] = endpoint_slope(
        h[n - 2],
        if n >= 3 { h[n - 3] } else { h[n - 2] },
        d[n - 2],
        if n >= 3 { d[n - 3] } else { d[n - 2] },
    );
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            // Weighted harmonic mean keeps |m| <= 3 min(|d-|, |d+|).
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

/// Three-point endpoint slope with the usual monotonicity clamp.
fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let mut m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        m = 0.0;
    } else if d0 * d1 < 0.0 && m.abs() > 3.0 * d0.abs() {
        m = 3.0 * d0;
    }
    m
}
