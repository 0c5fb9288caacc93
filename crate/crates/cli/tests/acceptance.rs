//! Acceptance suite: nine numbered criteria, one test each, every
//! tolerance pinned in code. Each test prints a single PASS line (visible
//! with `cargo test -p rotcap-cli --test acceptance -- --nocapture`); a
//! failed assertion fails the corresponding criterion.

use std::f64::consts::{E, PI};
use std::path::Path;

use approx::assert_relative_eq;
use clap::Parser;

use rotcap_cli::{run, Cli, EXIT_OK};
use rotcap_core::aoperator::{structure_inequalities_check, AOperator, StructureCheckOpts};
use rotcap_core::capacity::{
    annulus_capacity_closed_form, global_capacity, numerical_capacity, MeshOpts,
};
use rotcap_core::criteria::{classify, pggb_search, CriteriaOpts, CriterionVerdict, ShellStrategy};
use rotcap_core::exec::Mode;
use rotcap_core::models::{euclidean, hyperbolic, power, standard_suite};
use rotcap_core::radial::{
    annulus_profile, comparison_experiment, eta_annulus, eta_exterior, growth_condition_check,
    log_grid, lp_gradient_norm, ComparisonOutcome, RadialFunction,
};
use rotcap_core::{ImproperOpts, ModelSpace, QuadOpts};

/// Slack for the midpoint assembly of the discrete energy: the discrete
/// minimum may undercut the continuum value by at most this relative
/// amount.
const ENERGY_QUADRATURE_REL_TOL: f64 = 1e-6;

fn quad() -> QuadOpts {
    QuadOpts::default()
}

fn pass(n: u32, what: &str) {
    println!("acceptance criterion {n}: PASS — {what}");
}

#[test]
fn criterion_1_closed_form_capacity_oracles() {
    // 8π on the (1,2) annulus of flat 3-space
    let cap = annulus_capacity_closed_form(&euclidean(3, 2.0).unwrap(), 1.0, 2.0, &quad()).unwrap();
    assert_relative_eq!(cap.value, 8.0 * PI, max_relative = 1e-8);

    // 2π on the (1,e) annulus of the flat plane
    let cap = annulus_capacity_closed_form(&euclidean(2, 2.0).unwrap(), 1.0, E, &quad()).unwrap();
    assert_relative_eq!(cap.value, 2.0 * PI, max_relative = 1e-8);

    // hyperbolic plane: 2π / (ln tanh(R2/2) - ln tanh(1/2))
    let hyp = hyperbolic(2, 2.0).unwrap();
    for r2 in [2.0f64, 5.0, 40.0] {
        let oracle = 2.0 * PI / ((r2 / 2.0).tanh().ln() - 0.5f64.tanh().ln());
        let cap = annulus_capacity_closed_form(&hyp, 1.0, r2, &quad()).unwrap();
        assert_relative_eq!(cap.value, oracle, max_relative = 1e-8);
    }
    pass(1, "closed-form capacities match analytic oracles to 1e-8");
}

#[test]
fn criterion_2_variational_consistency() {
    let cells: Vec<(ModelSpace, f64, f64)> = vec![
        (euclidean(2, 1.5).unwrap(), 1.0, 2.0),
        (euclidean(2, 2.0).unwrap(), 1.0, E),
        (euclidean(2, 3.0).unwrap(), 1.0, 2.0),
        (euclidean(3, 1.5).unwrap(), 1.0, 3.0),
        (euclidean(3, 2.0).unwrap(), 1.0, 2.0),
        (euclidean(3, 3.0).unwrap(), 1.0, 4.0),
        (hyperbolic(2, 1.5).unwrap(), 1.0, 3.0),
        (hyperbolic(2, 2.0).unwrap(), 1.0, 5.0),
        (power(2.0, 2, 3.0).unwrap(), 1.0, 2.0),
    ];
    assert_eq!(cells.len(), 9);
    for (space, r1, r2) in &cells {
        let closed = annulus_capacity_closed_form(space, *r1, *r2, &quad())
            .unwrap()
            .value;

        // agreement at the production mesh
        let fine = numerical_capacity(
            space,
            *r1,
            *r2,
            &MeshOpts {
                intervals: 2000,
                ..MeshOpts::default()
            },
        )
        .unwrap();
        assert_relative_eq!(fine.value, closed, max_relative = 1e-3);
        assert!(
            fine.value >= closed * (1.0 - ENERGY_QUADRATURE_REL_TOL),
            "discrete minimum undercuts the continuum value on {}",
            space.label()
        );

        // halving the mesh spacing shrinks the gap, every cell
        let mut prev_gap = f64::INFINITY;
        for intervals in [500usize, 1000, 2000] {
            let est = numerical_capacity(
                space,
                *r1,
                *r2,
                &MeshOpts {
                    intervals,
                    ..MeshOpts::default()
                },
            )
            .unwrap();
            let gap = est.value - closed;
            assert!(
                gap < prev_gap,
                "gap did not shrink at {intervals} intervals on {}",
                space.label()
            );
            prev_gap = gap;
        }
    }
    pass(
        2,
        "numerical capacity tracks closed forms over 9 cells with monotone refinement",
    );
}

#[test]
fn criterion_3_criteria_equivalence_on_model_suite() {
    let suite = standard_suite();
    assert_eq!(suite.len(), 12);
    for member in &suite {
        let v = classify(&member.space, &CriteriaOpts::default()).unwrap();
        let expected = if member.parabolic {
            CriterionVerdict::Parabolic
        } else {
            CriterionVerdict::Nonparabolic
        };
        // the two-sided criteria agree exactly
        assert_eq!(
            v.milnor, expected,
            "radial integral test on {}",
            member.name
        );
        assert_eq!(
            v.capacity_sequence, expected,
            "capacity sequence on {}",
            member.name
        );
        assert_eq!(
            v.capacity_limit, expected,
            "capacity limit on {}",
            member.name
        );
        // sufficient criteria only ever point at parabolic
        for s in [v.holopainen_rv, v.holopainen_vprime, v.pggb] {
            if s == CriterionVerdict::Parabolic {
                assert_eq!(expected, CriterionVerdict::Parabolic, "{}", member.name);
            }
            assert_ne!(s, CriterionVerdict::Nonparabolic, "{}", member.name);
        }
        assert!(v.consistent, "inconsistency on {}", member.name);
    }
    pass(
        3,
        "two-sided criteria agree on all 12 spaces, zero inconsistencies",
    );
}

#[test]
fn criterion_4_shell_witness_constant_sup() {
    let space = euclidean(2, 2.0).unwrap();
    let (verdict, witness) =
        pggb_search(&space, &ShellStrategy::Dyadic, &CriteriaOpts::default()).unwrap();
    assert_eq!(verdict, CriterionVerdict::Parabolic);
    let w = witness.unwrap();
    assert_eq!(w.pairs.len(), 40);
    assert_relative_eq!(w.sup, 12.0 * PI, max_relative = 1e-10);
    for (k, value) in w.values.iter().enumerate() {
        assert_relative_eq!(*value, 12.0 * PI, max_relative = 1e-10,);
        let (r, s) = w.pairs[k];
        assert_eq!(s, 2.0 * r);
    }
    pass(
        4,
        "dyadic shells on the plane give the constant supremum 12π across k ≤ 40",
    );
}

#[test]
fn criterion_5_comparison_dichotomy() {
    let tol = 1e-7;
    for member in standard_suite() {
        let space = &member.space;
        let p_op = AOperator::p_power(space.p()).unwrap();
        let blended = AOperator::blended(space.p(), 0.5).unwrap();
        if member.parabolic {
            // bounded radial A-harmonic pairs must satisfy the comparison
            for op in [&p_op, &blended] {
                // constants
                let grid = log_grid(1.0, 64.0, 128);
                let u = RadialFunction::constant(grid.clone(), 0.0).unwrap();
                let v = RadialFunction::constant(grid, 1.0).unwrap();
                let r = comparison_experiment(space, op, 1.0, &u, &v, tol).unwrap();
                assert_eq!(r.outcome, ComparisonOutcome::Holds, "{}", member.name);

                // complement of the annulus profile against the constant 1
                let w = annulus_profile(space, op, 1.0, 8.0, 192).unwrap();
                let u = RadialFunction::from_samples(
                    w.grid().to_vec(),
                    w.values().iter().map(|&x| 1.0 - x).collect(),
                    w.derivs().iter().map(|&d| -d).collect(),
                    rotcap_core::radial::SolutionMeta::Sampled {
                        label: "1 - annulus profile".into(),
                    },
                )
                .unwrap();
                let v = RadialFunction::constant(w.grid().to_vec(), 1.0).unwrap();
                let r = comparison_experiment(space, op, 1.0, &u, &v, tol).unwrap();
                assert_eq!(
                    r.outcome,
                    ComparisonOutcome::Holds,
                    "{} with {}",
                    member.name,
                    op.describe()
                );
                assert!(r.margin >= -tol);
            }
        } else {
            // the counterexample construction: u ≡ 1, v = η_{1,∞}
            let v = eta_exterior(space, 1.0, 40.0, 256).unwrap();
            let u = RadialFunction::constant(v.grid().to_vec(), 1.0).unwrap();
            let r = comparison_experiment(space, &p_op, 1.0, &u, &v, tol).unwrap();
            assert_eq!(r.outcome, ComparisonOutcome::Violated, "{}", member.name);
            let viol = r.violation.unwrap();
            assert!(viol.radius > 1.0 && viol.gap > tol, "{}", member.name);
        }
    }
    pass(5, "comparison holds on parabolic members, exterior-profile counterexample violates on the rest");
}

#[test]
fn criterion_6_energy_identity_and_gradient_integrability() {
    // energy of η_{1,∞} equals the capacity limit on the hyperbolic plane
    let hyp = hyperbolic(2, 2.0).unwrap();
    let eta = eta_exterior(&hyp, 1.0, 40.0, 2000).unwrap();
    let energy = lp_gradient_norm(&hyp, &eta, 1.0, 40.0).unwrap();
    let global = global_capacity(&hyp, 1.0, &ImproperOpts::default()).unwrap();
    assert_relative_eq!(energy, global.value, max_relative = 1e-4);
    assert_relative_eq!(energy, 8.139_507_067_607_9, max_relative = 1e-4);

    // monotone in R and bounded by the capacity on non-parabolic members
    for member in standard_suite().iter().filter(|m| !m.parabolic) {
        let eta = eta_exterior(&member.space, 1.0, 40.0, 512).unwrap();
        let cap = global_capacity(&member.space, 1.0, &ImproperOpts::default())
            .unwrap()
            .value;
        let mut prev = 0.0;
        for r in [2.0f64, 5.0, 10.0, 40.0] {
            let e = lp_gradient_norm(&member.space, &eta, 1.0, r).unwrap();
            assert!(e >= prev - 1e-12, "energy not monotone on {}", member.name);
            assert!(
                e <= cap * (1.0 + 1e-4),
                "energy {e} above capacity {cap} on {}",
                member.name
            );
            prev = e;
        }
    }
    pass(
        6,
        "η-energy equals the capacity limit (1e-4) and stays monotone and bounded",
    );
}

#[test]
fn criterion_7_growth_functionals_and_p2_remark() {
    let plane = euclidean(2, 2.0).unwrap();
    let grid = log_grid(1.0, 1024.0, 768);
    let annuli: Vec<(f64, f64)> = (0..10).map(|k| (2f64.powi(k), 2f64.powi(k + 1))).collect();

    // ln r is flagged unbounded along dyadic annuli
    let lnr = RadialFunction::from_fn(grid.clone(), "ln r", |r| r.ln(), |r| 1.0 / r).unwrap();
    let zero = RadialFunction::constant(grid.clone(), 0.0).unwrap();
    let flags = growth_condition_check(&plane, &lnr, &zero, &annuli).unwrap();
    assert!(!flags.u.volume.bounded, "ln r must be flagged unbounded");

    // every bounded solution is flagged bounded
    let eta = eta_annulus(&plane, 1.0, 1024.0, 768).unwrap();
    let one = RadialFunction::constant(eta.grid().to_vec(), 1.0).unwrap();
    let flags = growth_condition_check(&plane, &eta, &one, &annuli).unwrap();
    assert!(flags.u.volume.bounded);
    assert!(flags.v.volume.bounded);

    // the p = 2 remark: both solutions unbounded, difference decaying;
    // the experiment still reports holds and the difference product
    // vanishes while each function's own volume functional diverges
    let op = AOperator::p_power(2.0).unwrap();
    let u = RadialFunction::from_fn(
        grid.clone(),
        "0.5 ln r + 0.3",
        |r| 0.5 * r.ln() + 0.3,
        |r| 0.5 / r,
    )
    .unwrap();
    let v = RadialFunction::from_fn(
        grid,
        "u + 1/r",
        |r| 0.5 * r.ln() + 0.3 + 1.0 / r,
        |r| 0.5 / r - 1.0 / (r * r),
    )
    .unwrap();
    let report = comparison_experiment(&plane, &op, 1.0, &u, &v, 1e-7).unwrap();
    assert_eq!(report.outcome, ComparisonOutcome::Holds);
    let flags = report.growth_flags.unwrap();
    assert!(!flags.u.volume.bounded, "own product of u must diverge");
    assert!(!flags.v.volume.bounded, "own product of v must diverge");
    assert!(
        flags.difference_vanishes,
        "difference product must tend to 0"
    );
    pass(
        7,
        "growth functionals separate ln r from bounded solutions; p=2 difference case holds",
    );
}

#[test]
fn criterion_8_structure_inequalities() {
    let mut operators = Vec::new();
    for p in [1.5f64, 2.0, 3.0] {
        operators.push(AOperator::p_power(p).unwrap());
        operators.push(AOperator::blended(p, 0.5).unwrap());
    }
    for op in &operators {
        for dim in [2usize, 3] {
            let report = structure_inequalities_check(
                op,
                &StructureCheckOpts {
                    pairs: 10_000,
                    dim,
                    seed: 1234,
                    mode: Mode::default(),
                },
            )
            .unwrap(); // NonMonotone would fail the whole criterion
            assert_eq!(report.pairs_used, 10_000);
            assert!(
                report.c1 > 0.0 && report.c1.is_finite(),
                "monotonicity constant must be positive: {} dim {dim}",
                op.describe()
            );
            assert!(
                report.c2.is_finite() && report.c2 > 0.0,
                "Lipschitz constant must be finite: {} dim {dim}",
                op.describe()
            );
            assert!(report.c1 <= report.c2);
            assert!(report.amplitude_within_envelope);
            if op.p() >= 2.0 {
                let coercivity = report.coercivity_min.unwrap();
                assert!(
                    coercivity > 0.0,
                    "coercivity form must hold for p >= 2: {}",
                    op.describe()
                );
            }
            if op.p() <= 2.0 {
                assert!(report.boundedness_max.unwrap().is_finite());
            }
        }
    }
    pass(
        8,
        "10^4 seeded pairs satisfy monotonicity and Lipschitz bounds for all six operators",
    );
}

#[test]
fn criterion_9_sweep_determinism() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sweep_suite.json");
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();

    let run_sweep = |out: &Path, jobs: &str| {
        let cli = Cli::parse_from([
            "rotcap",
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
            "--seed",
            "42",
        ]);
        assert_eq!(run(&cli), EXIT_OK);
    };
    // parallel and sequential runs with the same seed
    run_sweep(dir_a.path(), "0");
    run_sweep(dir_b.path(), "1");

    let mut compared = 0;
    for name in ["sweep.json", "sweep.csv", "operator_check.json"] {
        let a = std::fs::read(dir_a.path().join(name)).unwrap();
        let b = std::fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between runs");
        compared += 1;
    }
    for i in 0..30 {
        let name = format!("cells/cell_{i:03}.json");
        let a = std::fs::read(dir_a.path().join(&name)).unwrap();
        let b = std::fs::read(dir_b.path().join(&name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between runs");
        compared += 1;
    }
    assert_eq!(compared, 33);
    pass(
        9,
        "sweep artifacts are byte-identical across runs and thread counts",
    );
}
