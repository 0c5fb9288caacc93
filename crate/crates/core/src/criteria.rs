//! Parabolicity criteria and their cross-check.
//!
//! Three criteria are two-sided on model spaces (the radial integral test,
//! the capacity-sequence test, the capacity limit) and must agree; the
//! volume-growth tests are sufficient conditions only, so their negative
//! outcome is "no conclusion", a distinct state from nonparabolic.

use serde::{Deserialize, Serialize};

use crate::capacity::global_capacity;
use crate::error::{Error, Result};
use crate::exec::{map_collect, Mode};
use crate::geometry::quad::{improper_integral, Classification, ImproperOpts, QuadOpts};
use crate::geometry::{annulus_volume, ball_volume, ModelSpace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionVerdict {
    Parabolic,
    Nonparabolic,
    /// A sufficient condition did not fire; nothing follows.
    NoConclusion,
    /// The underlying integral could not be classified, or a constructive
    /// search ran out of budget. Exhausting a search never demonstrates
    /// that no witness sequences exist.
    Indeterminate,
}

/// Controls shared by the criteria.
#[derive(Clone, Copy, Debug)]
pub struct CriteriaOpts {
    /// Inner radius `a` for the tail integrals.
    pub base_radius: f64,
    pub improper: ImproperOpts,
    /// Shell budget and sup-stabilization window for the volume-growth
    /// shell search.
    pub shell_k_max: u32,
    pub shell_window: u32,
    /// Number of inner radii 2^k tried by the capacity-sequence search.
    pub capseq_k_max: u32,
    /// Outer-radius doubling budget per inner radius.
    pub capseq_max_doublings: u32,
    pub mode: Mode,
}

impl Default for CriteriaOpts {
    fn default() -> Self {
        Self {
            base_radius: 1.0,
            improper: ImproperOpts::default(),
            shell_k_max: 40,
            shell_window: 8,
            capseq_k_max: 12,
            capseq_max_doublings: 512,
            mode: Mode::default(),
        }
    }
}

/// Shell sequence for the volume-growth test.
#[derive(Clone, Debug)]
pub enum ShellStrategy {
    /// r_k = 2^k, s_k = 2^(k+1), k = 1..=k_max.
    Dyadic,
    /// User-supplied (r_k, s_k); must satisfy s_k > r_k, r_k increasing.
    Explicit(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShellWitness {
    pub pairs: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    pub sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacitySequenceWitness {
    pub pairs: Vec<(f64, f64)>,
    pub capacities: Vec<f64>,
}

/// Everything `classify` produces: one verdict per criterion, witnesses
/// where the criteria are witness-producing, the aggregate, and the
/// cross-criterion consistency flag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParabolicityVerdict {
    pub space: String,
    pub milnor: CriterionVerdict,
    pub holopainen_rv: CriterionVerdict,
    pub holopainen_vprime: CriterionVerdict,
    pub pggb: CriterionVerdict,
    pub capacity_sequence: CriterionVerdict,
    pub capacity_limit: CriterionVerdict,
    pub pggb_witness: Option<ShellWitness>,
    pub capacity_witness: Option<CapacitySequenceWitness>,
    pub aggregate: CriterionVerdict,
    pub consistent: bool,
}

impl ParabolicityVerdict {
    /// Re-derives the consistency flag from the per-criterion verdicts;
    /// call after replacing one of them (e.g. a shell search rerun with
    /// explicit sequences).
    pub fn recompute_consistency(&mut self) {
        let all = [
            self.milnor,
            self.holopainen_rv,
            self.holopainen_vprime,
            self.pggb,
            self.capacity_sequence,
            self.capacity_limit,
        ];
        let any_parabolic = all.iter().any(|&v| v == CriterionVerdict::Parabolic);
        let any_nonparabolic = all.iter().any(|&v| v == CriterionVerdict::Nonparabolic);
        self.consistent = !(any_parabolic && any_nonparabolic);
    }
}

fn verdict_from(classification: Classification) -> CriterionVerdict {
    match classification {
        Classification::Diverged => CriterionVerdict::Parabolic,
        Classification::Converged => CriterionVerdict::Nonparabolic,
        Classification::Indeterminate => CriterionVerdict::Indeterminate,
    }
}

/// Radial integral criterion: parabolic iff ∫_a^∞ f^{-(n-1)/(p-1)} = ∞.
pub fn milnor_test(space: &ModelSpace, opts: &CriteriaOpts) -> Result<CriterionVerdict> {
    let r = improper_integral(
        |s| space.capacity_integrand(s),
        opts.base_radius,
        &opts.improper,
    )?;
    Ok(verdict_from(r.classification))
}

/// Volume-growth criteria: ∫^∞ (R/V(R))^{1/(p-1)} = ∞ or
/// ∫^∞ (1/V'(R))^{1/(p-1)} = ∞ each imply parabolicity. Divergence fires
/// `Parabolic`; convergence is only `NoConclusion`. Volumes beyond the
/// f64 range saturate to ∞, which sends the integrands to 0.
pub fn holopainen_tests(
    space: &ModelSpace,
    opts: &CriteriaOpts,
) -> Result<(CriterionVerdict, CriterionVerdict)> {
    let a = opts.base_radius;
    let quad = QuadOpts {
        abs_tol: 1e-9,
        rel_tol: 1e-9,
        max_panels: 2048,
    };
    let v_base = ball_volume(space, a, &quad)?.value;
    let exp = 1.0 / (space.p() - 1.0);

    let volume_at = |r: f64| -> Result<f64> {
        if r <= a {
            return Ok(v_base);
        }
        match annulus_volume(space, a, r, &quad) {
            Ok(v) => Ok(v_base + v.value),
            Err(Error::Overflow { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let rv = improper_integral(
        |r| {
            let v = volume_at(r)?;
            Ok(if v.is_finite() {
                (r / v).powf(exp)
            } else {
                0.0
            })
        },
        a,
        &opts.improper,
    )?;

    let vprime = improper_integral(
        |r| match space.volume_derivative(r) {
            Ok(dv) => Ok(dv.powf(-exp)),
            Err(Error::Overflow { .. }) => Ok(0.0),
            Err(e) => Err(e),
        },
        a,
        &opts.improper,
    )?;

    let to_verdict = |c: Classification| match c {
        Classification::Diverged => CriterionVerdict::Parabolic,
        Classification::Converged => CriterionVerdict::NoConclusion,
        Classification::Indeterminate => CriterionVerdict::Indeterminate,
    };
    Ok((
        to_verdict(rv.classification),
        to_verdict(vprime.classification),
    ))
}

/// Shell test: parabolic when sup_k (2/(s_k-r_k))^p Vol(A_{r_k,s_k})
/// stabilizes; the stabilization window is `shell_window` consecutive k.
pub fn pggb_search(
    space: &ModelSpace,
    strategy: &ShellStrategy,
    opts: &CriteriaOpts,
) -> Result<(CriterionVerdict, Option<ShellWitness>)> {
    let pairs: Vec<(f64, f64)> = match strategy {
        ShellStrategy::Dyadic => (1..=opts.shell_k_max)
            .map(|k| (2f64.powi(k as i32), 2f64.powi(k as i32 + 1)))
            .collect(),
        ShellStrategy::Explicit(pairs) => {
            if pairs.is_empty() {
                return Err(Error::BadSequence("empty shell sequence".into()));
            }
            let mut prev = 0.0;
            for &(r, s) in pairs {
                if !(r > 0.0) || !(s > r) {
                    return Err(Error::BadSequence(format!("bad shell ({r}, {s})")));
                }
                if r <= prev {
                    return Err(Error::BadSequence(
                        "shell radii must be strictly increasing".into(),
                    ));
                }
                prev = r;
            }
            pairs.clone()
        }
    };

    let quad = QuadOpts {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_panels: 2048,
    };
    let p = space.p();
    let mut values = Vec::with_capacity(pairs.len());
    let mut used = Vec::with_capacity(pairs.len());
    let mut sup = f64::NEG_INFINITY;
    let mut since_sup_moved = 0u32;
    let mut saturated = false;

    for &(r, s) in &pairs {
        let vol = match annulus_volume(space, r, s, &quad) {
            Ok(v) => v.value,
            Err(Error::Overflow { .. }) => {
                saturated = true;
                break;
            }
            Err(e) => return Err(e),
        };
        let t = (2.0 / (s - r)).powf(p) * vol;
        if !t.is_finite() {
            saturated = true;
            break;
        }
        used.push((r, s));
        values.push(t);
        if t > sup * (1.0 + 1e-12) {
            sup = t;
            since_sup_moved = 0;
        } else {
            since_sup_moved += 1;
        }
    }

    let window = opts.shell_window.min(used.len().saturating_sub(1) as u32);
    let stabilized = !saturated && !used.is_empty() && window > 0 && since_sup_moved >= window;
    if stabilized {
        Ok((
            CriterionVerdict::Parabolic,
            Some(ShellWitness {
                pairs: used,
                values,
                sup,
            }),
        ))
    } else {
        Ok((CriterionVerdict::NoConclusion, None))
    }
}

/// Capacity-sequence test: find R1^k = 2^k and R2^k with
/// cap_p(R1^k, R2^k) < 1/k for every k up to the budget. Nonparabolic as
/// soon as the capacity limit is positive (capacities are bounded below);
/// "search exhausted" is reported as indeterminate, never as nonexistence.
pub fn capacity_sequence_test(
    space: &ModelSpace,
    opts: &CriteriaOpts,
) -> Result<(CriterionVerdict, Option<CapacitySequenceWitness>)> {
    let global = match global_capacity(space, opts.base_radius, &opts.improper) {
        Ok(g) => g,
        Err(Error::Indeterminate(_)) => return Ok((CriterionVerdict::Indeterminate, None)),
        Err(e) => return Err(e),
    };
    if global.value > 0.0 {
        return Ok((CriterionVerdict::Nonparabolic, None));
    }

    let quad = QuadOpts {
        abs_tol: 1e-10,
        rel_tol: 1e-10,
        max_panels: 2048,
    };
    let pm1 = space.p() - 1.0;
    let area = space.area_constant();
    let mut pairs = Vec::new();
    let mut caps = Vec::new();

    for k in 1..=opts.capseq_k_max {
        let r1 = 2f64.powi(k as i32);
        // cap < 1/k  ⇔  ∫ f^{-q} > (n ω_n k)^{1/(p-1)}
        let threshold = (area * k as f64).powf(1.0 / pm1);
        let mut integral = 0.0;
        let mut r = r1;
        let mut found = None;
        for _ in 0..opts.capseq_max_doublings {
            let next = 2.0 * r;
            integral +=
                crate::geometry::integrate(|s| space.capacity_integrand(s), r, next, &quad)?.value;
            r = next;
            if integral > threshold {
                found = Some((r, area * integral.powf(-pm1)));
                break;
            }
        }
        match found {
            Some((r2, cap)) => {
                pairs.push((r1, r2));
                caps.push(cap);
            }
            None => return Ok((CriterionVerdict::Indeterminate, None)),
        }
    }

    Ok((
        CriterionVerdict::Parabolic,
        Some(CapacitySequenceWitness {
            pairs,
            capacities: caps,
        }),
    ))
}

/// The zero/positive classification of the capacity limit.
pub fn capacity_limit_test(space: &ModelSpace, opts: &CriteriaOpts) -> Result<CriterionVerdict> {
    match global_capacity(space, opts.base_radius, &opts.improper) {
        Ok(g) => Ok(if g.value == 0.0 {
            CriterionVerdict::Parabolic
        } else {
            CriterionVerdict::Nonparabolic
        }),
        Err(Error::Indeterminate(_)) => Ok(CriterionVerdict::Indeterminate),
        Err(e) => Err(e),
    }
}

enum CriterionJob {
    Milnor,
    Holopainen,
    Pggb,
    CapacitySequence,
    CapacityLimit,
}

enum CriterionOutcome {
    Milnor(CriterionVerdict),
    Holopainen(CriterionVerdict, CriterionVerdict),
    Pggb(CriterionVerdict, Option<ShellWitness>),
    CapacitySequence(CriterionVerdict, Option<CapacitySequenceWitness>),
    CapacityLimit(CriterionVerdict),
}

/// Runs every criterion (concurrently under the parallel mode), merges
/// deterministically, aggregates the two-sided criteria and flags any
/// parabolic/nonparabolic disagreement.
pub fn classify(space: &ModelSpace, opts: &CriteriaOpts) -> Result<ParabolicityVerdict> {
    let jobs = [
        CriterionJob::Milnor,
        CriterionJob::Holopainen,
        CriterionJob::Pggb,
        CriterionJob::CapacitySequence,
        CriterionJob::CapacityLimit,
    ];
    let outcomes: Vec<Result<CriterionOutcome>> = map_collect(opts.mode, &jobs, |job| match job {
        CriterionJob::Milnor => milnor_test(space, opts).map(CriterionOutcome::Milnor),
        CriterionJob::Holopainen => {
            holopainen_tests(space, opts).map(|(a, b)| CriterionOutcome::Holopainen(a, b))
        }
        CriterionJob::Pggb => pggb_search(space, &ShellStrategy::Dyadic, opts)
            .map(|(v, w)| CriterionOutcome::Pggb(v, w)),
        CriterionJob::CapacitySequence => capacity_sequence_test(space, opts)
            .map(|(v, w)| CriterionOutcome::CapacitySequence(v, w)),
        CriterionJob::CapacityLimit => {
            capacity_limit_test(space, opts).map(CriterionOutcome::CapacityLimit)
        }
    });

    let mut milnor = CriterionVerdict::Indeterminate;
    let mut holo_rv = CriterionVerdict::Indeterminate;
    let mut holo_vp = CriterionVerdict::Indeterminate;
    let mut pggb = CriterionVerdict::Indeterminate;
    let mut capseq = CriterionVerdict::Indeterminate;
    let mut caplim = CriterionVerdict::Indeterminate;
    let mut pggb_witness = None;
    let mut capacity_witness = None;
    for outcome in outcomes {
        match outcome? {
            CriterionOutcome::Milnor(v) => milnor = v,
            CriterionOutcome::Holopainen(a, b) => {
                holo_rv = a;
                holo_vp = b;
            }
            CriterionOutcome::Pggb(v, w) => {
                pggb = v;
                pggb_witness = w;
            }
            CriterionOutcome::CapacitySequence(v, w) => {
                capseq = v;
                capacity_witness = w;
            }
            CriterionOutcome::CapacityLimit(v) => caplim = v,
        }
    }

    let iff = [milnor, capseq, caplim];
    let decided: Vec<CriterionVerdict> = iff
        .iter()
        .copied()
        .filter(|v| {
            matches!(
                v,
                CriterionVerdict::Parabolic | CriterionVerdict::Nonparabolic
            )
        })
        .collect();
    let aggregate = if decided.is_empty() {
        CriterionVerdict::Indeterminate
    } else if decided.iter().all(|&v| v == decided[0]) {
        decided[0]
    } else {
        CriterionVerdict::Indeterminate
    };

    let all = [milnor, holo_rv, holo_vp, pggb, capseq, caplim];
    let any_parabolic = all.iter().any(|&v| v == CriterionVerdict::Parabolic);
    let any_nonparabolic = all.iter().any(|&v| v == CriterionVerdict::Nonparabolic);
    let consistent = !(any_parabolic && any_nonparabolic);

    Ok(ParabolicityVerdict {
        space: space.label(),
        milnor,
        holopainen_rv: holo_rv,
        holopainen_vprime: holo_vp,
        pggb,
        capacity_sequence: capseq,
        capacity_limit: caplim,
        pggb_witness,
        capacity_witness,
        aggregate,
        consistent,
    })
}
