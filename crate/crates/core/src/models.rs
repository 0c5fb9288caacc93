//! Reference model spaces used across tests, benches and the sweep demos.

use crate::error::Result;
use crate::geometry::{ModelSpace, WarpProfile};

/// A named reference space with its analytic classification: parabolic
/// iff the tail integral of f^{-(n-1)/(p-1)} diverges, evaluated by hand
/// per profile family (power-type tails diverge iff b(n-1)/(p-1) ≤ 1,
/// exponentially growing profiles always converge).
#[derive(Clone, Debug)]
pub struct SuiteSpace {
    pub name: &'static str,
    pub space: ModelSpace,
    pub parabolic: bool,
}

pub fn euclidean(n: u32, p: f64) -> Result<ModelSpace> {
    ModelSpace::new(WarpProfile::euclidean(), n, p)
}

pub fn hyperbolic(n: u32, p: f64) -> Result<ModelSpace> {
    ModelSpace::new(WarpProfile::hyperbolic(), n, p)
}

pub fn power(b: f64, n: u32, p: f64) -> Result<ModelSpace> {
    ModelSpace::new(WarpProfile::power(b)?, n, p)
}

pub fn exponential(lambda: f64, n: u32, p: f64) -> Result<ModelSpace> {
    ModelSpace::new(WarpProfile::exponential(lambda)?, n, p)
}

/// The twelve-space model suite exercised by the equivalence tests.
pub fn standard_suite() -> Vec<SuiteSpace> {
    let mk = |name, space: Result<ModelSpace>, parabolic| SuiteSpace {
        name,
        space: space.expect("suite member construction"),
        parabolic,
    };
    vec![
        // flat spaces: parabolic iff p >= n
        mk("euclidean n=2 p=2", euclidean(2, 2.0), true),
        mk("euclidean n=2 p=3", euclidean(2, 3.0), true),
        mk("euclidean n=2 p=1.5", euclidean(2, 1.5), false),
        mk("euclidean n=3 p=2", euclidean(3, 2.0), false),
        mk("euclidean n=3 p=3", euclidean(3, 3.0), true),
        mk("euclidean n=4 p=4", euclidean(4, 4.0), true),
        // exponential volume growth: never parabolic for p > 1
        mk("hyperbolic n=2 p=2", hyperbolic(2, 2.0), false),
        mk("hyperbolic n=3 p=2", hyperbolic(3, 2.0), false),
        // power profiles r^b: parabolic iff b(n-1) <= p-1
        mk("power b=0.5 n=2 p=2", power(0.5, 2, 2.0), true),
        mk("power b=2 n=2 p=2", power(2.0, 2, 2.0), false),
        mk("power b=1 n=2 p=3", power(1.0, 2, 3.0), true),
        mk("exponential λ=1 n=2 p=2", exponential(1.0, 2, 2.0), false),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_has_twelve_members_and_both_classes() {
        let suite = standard_suite();
        assert_eq!(suite.len(), 12);
        assert!(suite.iter().any(|s| s.parabolic));
        assert!(suite.iter().any(|s| !s.parabolic));
    }

    #[test]
    fn analytic_classification_matches_exponent_arithmetic() {
        // independent re-derivation: for f = r^b the tail integrand is
        // r^(-b(n-1)/(p-1)), divergent iff the exponent is <= 1
        for s in standard_suite() {
            if let WarpProfile::Power { exponent } = s.space.profile() {
                let tail_exp = exponent * s.space.capacity_exponent();
                assert_eq!(s.parabolic, tail_exp <= 1.0, "{}", s.name);
            }
            if matches!(s.space.profile(), WarpProfile::Euclidean) {
                let tail_exp = s.space.capacity_exponent();
                assert_eq!(s.parabolic, tail_exp <= 1.0, "{}", s.name);
            }
        }
    }
}
