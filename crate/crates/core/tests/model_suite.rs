//! Cross-criterion equivalence on the twelve-space model suite: the
//! two-sided criteria agree with each other and with the analytic
//! classification, sufficient criteria never contradict them, and the
//! volume-derivative test tracks the radial integral test exactly.

use rotcap_core::criteria::{
    capacity_limit_test, capacity_sequence_test, classify, holopainen_tests, milnor_test,
    CriteriaOpts, CriterionVerdict,
};
use rotcap_core::models::standard_suite;

fn opts() -> CriteriaOpts {
    CriteriaOpts::default()
}

#[test]
fn iff_criteria_agree_on_every_suite_member() {
    for member in standard_suite() {
        let expected = if member.parabolic {
            CriterionVerdict::Parabolic
        } else {
            CriterionVerdict::Nonparabolic
        };
        let milnor = milnor_test(&member.space, &opts()).unwrap();
        let (capseq, _) = capacity_sequence_test(&member.space, &opts()).unwrap();
        let caplim = capacity_limit_test(&member.space, &opts()).unwrap();
        assert_eq!(milnor, expected, "radial integral test on {}", member.name);
        assert_eq!(capseq, expected, "capacity sequence on {}", member.name);
        assert_eq!(caplim, expected, "capacity limit on {}", member.name);
    }
}

#[test]
fn sufficient_criteria_never_contradict() {
    for member in standard_suite() {
        let v = classify(&member.space, &opts()).unwrap();
        assert!(
            v.consistent,
            "inconsistent verdicts on {}: {v:?}",
            member.name
        );
        for (name, sufficient) in [
            ("holopainen R/V", v.holopainen_rv),
            ("holopainen V'", v.holopainen_vprime),
            ("shell test", v.pggb),
        ] {
            if sufficient == CriterionVerdict::Parabolic {
                assert_eq!(
                    v.aggregate,
                    CriterionVerdict::Parabolic,
                    "{name} fired on non-parabolic {}",
                    member.name
                );
            }
            assert_ne!(
                sufficient,
                CriterionVerdict::Nonparabolic,
                "{name} is one-directional and must never say nonparabolic ({})",
                member.name
            );
        }
    }
}

#[test]
fn volume_derivative_test_tracks_radial_integral_test() {
    // V'(R) = n ω_n f^{n-1}(R), so the V' criterion integrand is the
    // radial integrand times the constant (n ω_n)^{-1/(p-1)}: divergence
    // classifications must coincide member by member.
    for member in standard_suite() {
        let milnor = milnor_test(&member.space, &opts()).unwrap();
        let (_, vprime) = holopainen_tests(&member.space, &opts()).unwrap();
        let milnor_diverged = milnor == CriterionVerdict::Parabolic;
        let vprime_diverged = vprime == CriterionVerdict::Parabolic;
        assert_eq!(
            milnor_diverged, vprime_diverged,
            "divergence classification differs on {}",
            member.name
        );
    }
}

#[test]
fn iff_agreement_on_extended_flat_grid() {
    // the fuller grid over flat spaces: n in {2,3,4}, p in {1.5, 2, 3, n};
    // the analytic rule is parabolic iff (n-1)/(p-1) <= 1
    for n in [2u32, 3, 4] {
        for p in [1.5f64, 2.0, 3.0, n as f64] {
            let space = rotcap_core::models::euclidean(n, p).unwrap();
            let expected = if (n as f64 - 1.0) / (p - 1.0) <= 1.0 {
                CriterionVerdict::Parabolic
            } else {
                CriterionVerdict::Nonparabolic
            };
            let milnor = milnor_test(&space, &opts()).unwrap();
            let (capseq, _) = capacity_sequence_test(&space, &opts()).unwrap();
            let caplim = capacity_limit_test(&space, &opts()).unwrap();
            assert_eq!(milnor, expected, "n={n} p={p}");
            assert_eq!(capseq, expected, "n={n} p={p}");
            assert_eq!(caplim, expected, "n={n} p={p}");
        }
    }
}

#[test]
fn aggregate_matches_analytic_classification() {
    for member in standard_suite() {
        let v = classify(&member.space, &opts()).unwrap();
        let expected = if member.parabolic {
            CriterionVerdict::Parabolic
        } else {
            CriterionVerdict::Nonparabolic
        };
        assert_eq!(v.aggregate, expected, "{}", member.name);
    }
}
