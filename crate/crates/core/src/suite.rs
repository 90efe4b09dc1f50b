//! Full verification suite for one case.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cayley::{cayley_fd_report, cayley_symbolic_report};
use crate::error::Result;
use crate::measures::{check_equivariance, gaussian, m_grid, polar_ratio_check};
use crate::models::{frame, orbit_point, polar_decomposition, AlgebraElement, LeviElement};
use crate::measures::ConePoint;
use crate::quad::{Mode, QuadratureSpec};
use crate::rankk::{g_l2_rank1, l2_certificate_report, rank_additivity_violations, rankk_fourier_check, stability_restriction_check};
use crate::registry::{check_invariants, l2_threshold, CaseDescriptor};
use crate::report::{exit_code, Quantity, Verdict, VerificationReport};
use crate::spherical::{bessel_selftest, phi_l2_verdict, phi_power_identity, random_points, rank1_fourier_check, SphericalParams};

/// Spread of the random Levi elements used for equivariance; larger values
/// make the character, and the MC variance, explode.
pub const RANDOM_LEVI_SPREAD: f64 = 0.1;
/// Random Levi elements per rank in the suite.
pub const SUITE_LEVI_COUNT: usize = 3;
/// Relative tolerance for the rank-one Fourier ratio spread.
pub const FOURIER_SPREAD_TOL: f64 = 2e-2;
/// Step in t on either side of the L² threshold.
pub const THRESHOLD_OFFSET: f64 = 0.1;
/// Draws for the rank-additivity check in the suite.
pub const SUITE_RANK_DRAWS: u64 = 10_000;

/// Resolves `Hybrid` per case: grids where they exist, Monte Carlo
/// elsewhere. Explicit modes are kept.
pub fn suite_mode(case: &CaseDescriptor, quad: &QuadratureSpec) -> Mode {
    match quad.mode {
        Mode::Hybrid if m_grid(case, quad.angle_points).is_ok() => Mode::Deterministic,
        Mode::Hybrid => Mode::MonteCarlo,
        m => m,
    }
}

fn rng_for(quad: &QuadratureSpec, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(quad.seed);
    rng.set_stream(stream);
    rng
}

/// Runs one step; errors and panics become failure reports.
fn guarded<F>(claim: &str, case: &CaseDescriptor, out: &mut Vec<VerificationReport>, step: F)
where
    F: FnOnce() -> Result<Vec<VerificationReport>>,
{
    let id = case.case_id.to_string();
    match catch_unwind(AssertUnwindSafe(step)) {
        Ok(Ok(reports)) => out.extend(reports),
        Ok(Err(e)) => out.push(VerificationReport::failure(claim, &id, e)),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            out.push(VerificationReport::failure(claim, &id, format!("panic: {msg}")));
        }
    }
}

fn registry_report(case: &CaseDescriptor) -> VerificationReport {
    let r = VerificationReport::new("registry", case)
        .param("n", case.n)
        .param("d", case.d)
        .param("e", case.e)
        .param("ambient_dim", case.ambient_dim);
    match check_invariants(case) {
        Ok(()) => r.with_verdict(Verdict::Pass),
        Err(why) => r.with_verdict(Verdict::Fail).with_note(why),
    }
}

/// Coordinates and polar decomposition reproduce random elements.
pub fn model_round_trip(case: &CaseDescriptor, rng: &mut ChaCha8Rng) -> Result<VerificationReport> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let points = random_points(case, 20, 1.0, rng)?;
    for x in &points {
        let back = AlgebraElement::from_coords(case, &x.coords())?;
        worst = worst.max((&back - x).norm_squared().sqrt() / x.norm_squared().sqrt());
        let (m, z) = polar_decomposition(x)?;
        let y = orbit_point(&m, &ConePoint::new(z)?)?;
        worst = worst.max((&y - x).norm_squared().sqrt() / x.norm_squared().sqrt());
    }
    let mut r = VerificationReport::new("model-round-trip", case)
        .param("points", points.len())
        .with_quantities(Quantity::Number(0.0), Quantity::Number(worst), 1e-10);
    r.verdict = if worst <= 1e-10 { Verdict::Pass } else { Verdict::Fail };
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

fn rank_additivity_report(case: &CaseDescriptor, k: usize, draws: u64, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let bad = rank_additivity_violations(case, k, draws, seed)?;
    let mut r = VerificationReport::new("rank-additivity", case)
        .param("k", k)
        .param("draws", draws)
        .with_quantities(Quantity::Number(0.0), Quantity::Number(bad as f64), 0.0)
        .with_seed(seed)
        .with_anchor("a sum of k rank-one elements in general position has rank k");
    r.verdict = if bad == 0 { Verdict::Pass } else { Verdict::Fail };
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Runs every applicable check for `case` and appends a `suite` summary.
pub fn run_suite(case: &CaseDescriptor, quad: &QuadratureSpec) -> Vec<VerificationReport> {
    let start = Instant::now();
    let id = case.case_id.to_string();
    let mut out = vec![registry_report(case)];
    if let Err(e) = quad.validate() {
        out.push(VerificationReport::failure("quadrature", &id, e));
        return finish(case, out, start);
    }
    if case.backend().is_none() {
        for claim in [
            "model-round-trip",
            "polar-open",
            "equivariance",
            "phi-l2-threshold",
            "bessel-selftest",
            "rank1-fourier",
            "rankk-fourier",
            "cayley-identity",
            "l2-certificate",
            "stability",
        ] {
            out.push(VerificationReport::skipped(claim, &id, "no matrix model for this case"));
        }
        return finish(case, out, start);
    }
    let mut q = quad.clone();
    q.mode = suite_mode(case, quad);
    let n = case.n;

    guarded("model-round-trip", case, &mut out, || {
        Ok(vec![model_round_trip(case, &mut rng_for(&q, 1))?])
    });
    guarded("polar-open", case, &mut out, || polar_ratio_check(case, &q));
    guarded("equivariance", case, &mut out, || {
        let mut rng = rng_for(&q, 2);
        let ks = if n == 1 { vec![1] } else { vec![1, n] };
        let mut reps = Vec::new();
        for k in ks {
            for i in 0..SUITE_LEVI_COUNT {
                let l = LeviElement::random(case, RANDOM_LEVI_SPREAD, &mut rng)?;
                reps.push(check_equivariance(case, k, &l, gaussian, &q)?.param("levi_index", i));
            }
        }
        Ok(reps)
    });
    guarded("phi-l2-threshold", case, &mut out, || {
        let thr = l2_threshold(case);
        let mut ts = vec![thr - THRESHOLD_OFFSET, thr + THRESHOLD_OFFSET];
        if case.is_sp_c() {
            ts.push(-(case.d as f64) * n as f64);
        }
        ts.into_iter()
            .map(|t| phi_l2_verdict(&SphericalParams { case: *case, t }, &q))
            .collect()
    });
    guarded("phi-power", case, &mut out, || {
        let pts = random_points(case, 100, 1.0, &mut rng_for(&q, 3))?;
        (1..=n).map(|k| phi_power_identity(case, k, &pts)).collect()
    });
    guarded("bessel-selftest", case, &mut out, || {
        Ok(bessel_selftest()?
            .into_iter()
            .map(|mut r| {
                r.case_id = id.clone();
                r
            })
            .collect())
    });
    guarded("rank1-fourier", case, &mut out, || {
        let f = frame::<f64>(case)?;
        let mut pts = vec![AlgebraElement::zeros(case)?, f[0].clone(), f[0].scale(2.0)];
        pts.push(if n >= 2 { &f[0] + &f[1] } else { f[0].scale(0.5) });
        Ok(vec![rank1_fourier_check(case, &pts, &q, FOURIER_SPREAD_TOL)?])
    });
    if n >= 3 {
        guarded("rankk-fourier", case, &mut out, || {
            let f = frame::<f64>(case)?;
            let x = &f[0].scale(0.5) + &f[1].scale(0.25);
            let mut mc = q.clone();
            mc.mode = Mode::MonteCarlo;
            Ok(vec![
                rankk_fourier_check(case, 2, &x, &mc)?,
                rank_additivity_report(case, 2, SUITE_RANK_DRAWS, q.seed)?,
            ])
        });
    } else {
        out.push(VerificationReport::skipped("rankk-fourier", &id, "needs n >= 3"));
    }
    if case.is_sp_c() && n <= crate::cayley::CAYLEY_MAX_N {
        guarded("cayley-identity", case, &mut out, || {
            Ok(vec![cayley_symbolic_report(case, 4)?, cayley_fd_report(case, 3.0, 5, q.seed)?])
        });
    } else if case.is_sp_c() {
        out.push(VerificationReport::skipped("cayley-identity", &id, "symbolic operator limited to n <= 2"));
    } else {
        out.push(VerificationReport::skipped("cayley-identity", &id, "complex symmetric model only"));
    }
    if n >= 2 {
        guarded("l2-certificate", case, &mut out, || {
            let mut reps: Vec<_> = (1..n).map(|k| l2_certificate_report(case, k)).collect::<Result<_>>()?;
            reps.push(g_l2_rank1(case, &q)?);
            Ok(reps)
        });
        guarded("stability", case, &mut out, || {
            let mut rng = rng_for(&q, 4);
            (1..n).map(|k| stability_restriction_check(case, k, &mut rng)).collect()
        });
    } else {
        out.push(VerificationReport::skipped("l2-certificate", &id, "needs k < n"));
        out.push(VerificationReport::skipped("stability", &id, "needs k < n"));
    }
    finish(case, out, start)
}

fn finish(case: &CaseDescriptor, mut out: Vec<VerificationReport>, start: Instant) -> Vec<VerificationReport> {
    let count = |v: Verdict| out.iter().filter(|r| r.verdict == v).count();
    let (pass, fail, inc, skip) = (
        count(Verdict::Pass),
        count(Verdict::Fail),
        count(Verdict::Inconclusive),
        count(Verdict::Skipped),
    );
    let verdict = match exit_code(&out) {
        0 => Verdict::Pass,
        1 => Verdict::Fail,
        _ => Verdict::Inconclusive,
    };
    let mut r = VerificationReport::new("suite", case)
        .param("pass", pass)
        .param("fail", fail)
        .param("inconclusive", inc)
        .param("skipped", skip)
        .with_quantities(Quantity::Label("pass".into()), Quantity::Label(verdict.to_string()), 0.0)
        .with_verdict(verdict);
    r.runtime_seconds = start.elapsed().as_secs_f64();
    out.push(r);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::{list_cases, lookup_case};

    #[test]
    fn metadata_only_suite_is_skips() {
        let meta = list_cases().into_iter().find(|c| c.backend().is_none()).unwrap();
        let reps = run_suite(&meta, &QuadratureSpec::default());
        assert_eq!(reps[0].claim_id, "registry");
        assert_eq!(reps[0].verdict, Verdict::Pass);
        assert!(reps[1..reps.len() - 1].iter().all(|r| r.verdict == Verdict::Skipped));
        assert_eq!(reps.last().unwrap().verdict, Verdict::Pass);
        assert_eq!(exit_code(&reps), 0);
    }

    #[test]
    fn mode_policy() {
        let q = QuadratureSpec::default();
        assert_eq!(suite_mode(&lookup_case("gl_r", 2).unwrap(), &q), Mode::Deterministic);
        assert_eq!(suite_mode(&lookup_case("gl_c", 2).unwrap(), &q), Mode::MonteCarlo);
        let mc = q.clone().with_mode(Mode::MonteCarlo);
        assert_eq!(suite_mode(&lookup_case("gl_r", 2).unwrap(), &mc), Mode::MonteCarlo);
    }

    #[test]
    fn bad_spec_is_a_failure_not_a_panic() {
        let gl = lookup_case("gl_r", 2).unwrap();
        let mut q = QuadratureSpec::default();
        q.points_per_axis = 2;
        let reps = run_suite(&gl, &q);
        assert!(reps.iter().any(|r| r.claim_id == "quadrature" && r.verdict == Verdict::Fail));
        assert_eq!(exit_code(&reps), 1);
    }

    #[test]
    fn round_trips() {
        for id in ["gl_r", "gl_c", "sp_c", "o_2n2n"] {
            let case = lookup_case(id, 3).unwrap();
            let r = model_round_trip(&case, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        }
    }
}
