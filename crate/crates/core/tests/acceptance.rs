//! Acceptance gate: one line per criterion, nonzero exit if any fails.
//!
//! Run with `cargo test -p jordan-orbits --test acceptance`.

use std::time::Instant;

use nalgebra::DMatrix;
use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;

use jordan_orbits::cayley::{cayley_fd_report, cayley_symbolic_report, symbolic_cayley_constant};
use jordan_orbits::measures::{
    check_equivariance, gaussian, integrate_polar, integrate_polar_mapped, polar_ratio_check,
};
use jordan_orbits::models::{frame, GroupFactors};
use jordan_orbits::rankk::{
    l2_certificate, l2_certificate_report, rank1_l2_integral, rank_additivity_violations, rankk_fourier_check,
    stability_restriction_check,
};
use jordan_orbits::registry::{list_cases, lookup, lookup_case, CaseDescriptor};
use jordan_orbits::report::normalized_json;
use jordan_orbits::spherical::{
    bessel_cosine_transform, phi_l2_verdict, phi_power_deviation, random_points, rank1_fourier_check, rank1_mass,
    SphericalParams,
};
use jordan_orbits::suite::{run_suite, RANDOM_LEVI_SPREAD};
use jordan_orbits::{AlgebraElement, Levi, Mode, PolarMeasure, QuadratureSpec, ScanVerdict, Verdict};

const BACKENDS: [&str; 4] = ["gl_r", "gl_c", "sp_c", "o_2n2n"];

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn case(id: &str, n: usize) -> CaseDescriptor {
    lookup_case(id, n).expect("backend case")
}

fn det_quad() -> QuadratureSpec {
    QuadratureSpec::default().with_mode(Mode::Deterministic)
}

/// Polar ratios against direct Lebesgue ratios, 1e-3, under 60 s each.
fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut times = Vec::new();
    for id in ["gl_r", "sp_c"] {
        let start = Instant::now();
        let reps = polar_ratio_check(&case(id, 2), &det_quad()).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        ensure(reps.len() == 3, "three integrand pairs")?;
        for r in &reps {
            let (p, m) = (r.predicted.as_number(), r.measured.as_number());
            let rel = (m / p - 1.0).abs();
            worst = worst.max(rel);
            ensure(rel <= 1e-3, format!("{id} {:?}: ratio error {rel:e}", r.parameters))?;
        }
        ensure(secs < 60.0, format!("{id} took {secs:.1}s"))?;
        times.push(format!("{id} {secs:.1}s"));
    }
    Ok(format!("worst relative error {worst:.2e}; {}", times.join(", ")))
}

fn diag_levi(c: &CaseDescriptor) -> Levi {
    Levi::new(
        c,
        GroupFactors::RealPair(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0])), DMatrix::identity(2, 2)),
    )
    .expect("invertible")
}

/// Equivariance character: fixed element by MC and grid, then random ones.
fn criterion_2() -> Outcome {
    let gl = case("gl_r", 2);
    let l = diag_levi(&gl);
    let mc = QuadratureSpec::default().with_mode(Mode::MonteCarlo).with_mc_samples(1_000_000);
    let r = check_equivariance(&gl, 1, &l, gaussian, &mc).map_err(|e| e.to_string())?;
    let mc_ratio = r.measured.as_number();
    ensure((mc_ratio / 0.5 - 1.0).abs() <= 0.02, format!("MC ratio {mc_ratio}"))?;

    let q = det_quad();
    let base = integrate_polar(&gl, PolarMeasure::Rank(1), gaussian, &q).map_err(|e| e.to_string())?;
    let moved = integrate_polar_mapped(&gl, PolarMeasure::Rank(1), Some(&l), gaussian, &q).map_err(|e| e.to_string())?;
    let det_ratio = moved.value / base.value;
    ensure((det_ratio / 0.5 - 1.0).abs() <= 0.002, format!("deterministic ratio {det_ratio}"))?;

    let q = QuadratureSpec::default().with_mode(Mode::MonteCarlo).with_mc_samples(200_000);
    let mut worst: f64 = 0.0;
    for id in BACKENDS {
        let c = case(id, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for i in 0..20 {
            let l = Levi::random(&c, RANDOM_LEVI_SPREAD, &mut rng).map_err(|e| e.to_string())?;
            for k in [1, c.n] {
                let r = check_equivariance(&c, k, &l, gaussian, &q).map_err(|e| e.to_string())?;
                let rel = (r.measured.as_number() / r.predicted.as_number() - 1.0).abs();
                worst = worst.max(rel);
                ensure(rel <= 0.02, format!("{id} levi {i} k={k}: error {rel:.4}"))?;
            }
        }
    }
    Ok(format!(
        "MC ratio {mc_ratio:.5}, grid ratio {det_ratio:.6}, random Levi worst {:.2}%",
        100.0 * worst
    ))
}

/// Φ_t L² dichotomy, each scan under 10 s.
fn criterion_3() -> Outcome {
    let q = QuadratureSpec::default();
    let cases = [
        ("gl_r", -1.6, ScanVerdict::Finite),
        ("gl_r", -1.4, ScanVerdict::Divergent),
        ("o_2n2n", -2.6, ScanVerdict::Finite),
        ("o_2n2n", -2.4, ScanVerdict::Divergent),
        ("sp_c", -2.0, ScanVerdict::Divergent),
    ];
    let mut slowest: f64 = 0.0;
    for (id, t, expect) in cases {
        let start = Instant::now();
        let r = phi_l2_verdict(&SphericalParams { case: case(id, 2), t }, &q).map_err(|e| e.to_string())?;
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let got = r.measured.to_string();
        ensure(got == expect.to_string(), format!("{id} t={t}: measured {got}"))?;
        ensure(r.verdict == Verdict::Pass, format!("{id} t={t}: {:?}", r.verdict))?;
        ensure(secs < 10.0, format!("{id} t={t} took {secs:.1}s"))?;
    }
    Ok(format!("5 verdicts as predicted, slowest scan {slowest:.2}s"))
}

/// Rank-one Fourier ratio constant within 2%; cosine transform of K_0.
fn criterion_4() -> Outcome {
    let gl = case("gl_r", 2);
    let f = frame::<f64>(&gl).map_err(|e| e.to_string())?;
    let pts = vec![
        AlgebraElement::zeros(&gl).map_err(|e| e.to_string())?,
        f[0].clone(),
        f[0].scale(2.0),
        &f[0] + &f[1],
    ];
    let r = rank1_fourier_check(&gl, &pts, &det_quad(), 0.02).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Pass, format!("spread {} verdict {:?}", r.measured, r.verdict))?;
    let mut worst: f64 = 0.0;
    for x in [0.0f64, 1.0, 5.0] {
        let oracle = std::f64::consts::FRAC_PI_2 / (1.0 + x * x).sqrt();
        let got = bessel_cosine_transform(0.0, 0.0, x).map_err(|e| e.to_string())?;
        let rel = (got / oracle - 1.0).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-6, format!("cosine transform at x={x}: {got} vs {oracle}"))?;
    }
    Ok(format!("ratio spread {:.2e}, cosine oracle worst {worst:.1e}", r.measured.as_number()))
}

/// Mass and L² integrals of the GL n=2 kernel against Mellin values.
fn criterion_5() -> Outcome {
    let gl = case("gl_r", 2);
    // ∫ K_nu(z) z^{mu-1} dz = 2^{mu-2} Γ((mu-nu)/2) Γ((mu+nu)/2), at mu = 2, nu = 0
    let mass_oracle = gamma(1.0) * gamma(1.0);
    // ∫ K_0(z)^2 z dz = 1/2
    let l2_oracle = 0.5 * gamma(2.0);
    let mass = rank1_mass(&gl).map_err(|e| e.to_string())?.value;
    let l2 = rank1_l2_integral(&gl).map_err(|e| e.to_string())?.value;
    ensure((mass - mass_oracle).abs() <= 1e-8, format!("mass {mass}"))?;
    ensure((l2 - l2_oracle).abs() <= 1e-6, format!("l2 {l2}"))?;
    Ok(format!(
        "mass error {:.1e}, L2 error {:.1e}",
        (mass - mass_oracle).abs(),
        (l2 - l2_oracle).abs()
    ))
}

/// Symbolic Cayley identity s = 1..4, and the holomorphic FD check.
fn criterion_6() -> Outcome {
    let sp = case("sp_c", 2);
    let c1 = symbolic_cayley_constant(2, 1).map_err(|e| e.to_string())?;
    ensure(c1 == Some(Rational64::new(3, 2)), format!("c_1 = {c1:?}"))?;
    let sym = cayley_symbolic_report(&sp, 4).map_err(|e| e.to_string())?;
    ensure(sym.verdict == Verdict::Pass, format!("symbolic pattern: {:?}", sym.note))?;
    let fd = cayley_fd_report(&sp, 3.0, 5, 7).map_err(|e| e.to_string())?;
    ensure(fd.verdict == Verdict::Pass, format!("FD: {:?} {:?}", fd.measured, fd.note))?;
    let spread = fd.parameters.get("spread").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
    ensure(spread < 1e-4, format!("FD spread {spread}"))?;
    Ok(format!("c_1 = 3/2, pattern {}, FD spread {spread:.1e}", sym.measured))
}

/// Φ power identity, rank-k Fourier by MC, rank additivity.
fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    for id in BACKENDS {
        for n in [2, 3] {
            let c = case(id, n);
            let pts = random_points(&c, 100, 1.0, &mut rng).map_err(|e| e.to_string())?;
            for k in 1..=n {
                worst = worst.max(phi_power_deviation(&c, k, &pts));
            }
        }
    }
    ensure(worst <= 1e-12, format!("power identity deviation {worst:e}"))?;

    let gl3 = case("gl_r", 3);
    let f = frame::<f64>(&gl3).map_err(|e| e.to_string())?;
    let x = &f[0].scale(0.5) + &f[1].scale(0.25);
    let q = QuadratureSpec::default()
        .with_mode(Mode::MonteCarlo)
        .with_mc_samples(1_000_000)
        .with_seed(11);
    let r = rankk_fourier_check(&gl3, 2, &x, &q).map_err(|e| e.to_string())?;
    let sigmas = r.parameters["deviation_in_std_errors"].as_f64().unwrap_or(f64::NAN);
    ensure(r.verdict == Verdict::Pass && sigmas <= 5.0, format!("rank-2 Fourier off by {sigmas:.2} SE"))?;

    let mut draws = 0;
    for id in BACKENDS {
        let c = case(id, 3);
        for k in 1..=3 {
            let bad = rank_additivity_violations(&c, k, 100_000, 5).map_err(|e| e.to_string())?;
            ensure(bad == 0, format!("{id} k={k}: {bad} rank violations"))?;
            draws += 100_000;
        }
    }
    Ok(format!(
        "power identity worst {worst:.1e}, rank-2 Fourier {sigmas:.2} SE, {draws} sums all of exact rank"
    ))
}

/// Exact L² certificates and stability for every 1 <= k < n <= 4.
fn criterion_8() -> Outcome {
    let mut certs = 0;
    let mut stab = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for row in list_cases() {
        for n in 2..=4 {
            let Ok(c) = lookup(row.case_id, n) else { continue };
            for k in 1..n {
                let cert = l2_certificate(&c, k).map_err(|e| e.to_string())?;
                cert.verify(&c).map_err(|e| format!("{} n={n} k={k}: {e}", c.case_id))?;
                let rep = l2_certificate_report(&c, k).map_err(|e| e.to_string())?;
                ensure(rep.verdict == Verdict::Pass, format!("{} n={n} k={k} report", c.case_id))?;
                certs += 1;
                let s = stability_restriction_check(&c, k, &mut rng).map_err(|e| e.to_string())?;
                ensure(s.verdict == Verdict::Pass, format!("{} n={n} k={k} stability {}", c.case_id, s.measured))?;
                stab += 1;
            }
        }
    }
    ensure(certs > 0, "no certificates checked")?;
    Ok(format!("{certs} certificates and {stab} stability checks"))
}

/// Same seed and config give byte-identical suite JSON.
fn criterion_9() -> Outcome {
    let q = QuadratureSpec::default().with_seed(99);
    for id in ["gl_r", "o_2n2n"] {
        let c = case(id, 2);
        let a = normalized_json(&run_suite(&c, &q)).map_err(|e| e.to_string())?;
        let b = normalized_json(&run_suite(&c, &q)).map_err(|e| e.to_string())?;
        ensure(a == b, format!("{id}: suite JSON differs between runs"))?;
        ensure(a.contains("\"claim_id\": \"suite\""), "suite summary missing")?;
    }
    Ok("gl_r and o_2n2n suites reproduce byte for byte".into())
}

trait AsNumber {
    fn as_number(&self) -> f64;
}

impl AsNumber for jordan_orbits::Quantity {
    fn as_number(&self) -> f64 {
        match self {
            jordan_orbits::Quantity::Number(v) => *v,
            _ => f64::NAN,
        }
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("polar integral formula", criterion_1),
        ("equivariance character", criterion_2),
        ("L2 threshold dichotomy", criterion_3),
        ("rank-one Fourier identity", criterion_4),
        ("rank-one mass and L2 integrals", criterion_5),
        ("Cayley identities", criterion_6),
        ("rank-k factorization", criterion_7),
        ("L2 certificates and stability", criterion_8),
        ("engine determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({why}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
