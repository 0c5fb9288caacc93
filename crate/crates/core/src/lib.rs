//! Capacities, parabolicity and exterior comparison principles on
//! rotationally symmetric manifolds.
//!
//! The metric ds² = dr² + f²(r) dω² reduces every quantity of interest to
//! one-dimensional integrals of the warping function `f`: condenser
//! capacities (closed form, cutoff upper bound, direct energy
//! minimization), parabolicity criteria with witnesses, and radial
//! A-harmonic solutions for comparison-principle experiments. The three
//! two-sided criteria must agree and the comparison dichotomy follows the
//! zero/positive capacity classification; the test suites check exactly
//! that.
//!
//! Batch work (suite classification, sweeps, sampled inequality checks)
//! runs through [`exec`], data-parallel under the default `parallel`
//! feature with a sequential fallback, producing identical results both
//! ways.

// `!(x > 0.0)` deliberately rejects NaN along with the out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aoperator;
pub mod capacity;
pub mod criteria;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod models;
pub mod radial;

pub use error::{Error, Result};
pub use geometry::{
    annulus_volume, ball_volume, make_profile, unit_ball_volume, Classification, ImproperOpts,
    ModelSpace, ProfileParams, QuadOpts, QuadratureResult, WarpProfile,
};
