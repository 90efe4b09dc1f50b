//! Spherical vectors Φ_t, their L² threshold, and the rank-one Bessel
//! kernel with its Fourier identity.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;

use crate::bessel::{bessel_k, RadialRule, RADIAL_Z_MAX};
use crate::error::{Error, Result};
use crate::measures::{density_open, m_grid};
use crate::models::{
    frame, frame_images, haar_sample_m, singular_spectrum, AlgebraElement, Pairing,
};
use crate::quad::{
    batch_estimate, chunk_rng, chunk_sizes, classify_trace, integrate_cone, Estimate, Mode,
    QuadratureSpec, ScanVerdict,
};
use crate::registry::{lebesgue_exponent, CaseDescriptor};
use crate::report::{Quantity, Verdict, VerificationReport};
use crate::scalar::Scalar;

/// Φ_t on a given case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalParams {
    pub case: CaseDescriptor,
    pub t: f64,
}

/// Φ_t(x) = prod (1 + σ_i(x)^2)^(t/2).
pub fn phi_t<T: Scalar>(t: T, x: &AlgebraElement<T>) -> T {
    let half = t * T::lit(0.5);
    singular_spectrum(x)
        .into_iter()
        .fold(T::one(), |acc, s| acc * (T::one() + s * s).powf(half))
}

/// Largest relative deviation of Φ_{-dk}(x) from Φ_{-d}(x)^k over `points`.
pub fn phi_power_deviation(case: &CaseDescriptor, k: usize, points: &[AlgebraElement<f64>]) -> f64 {
    let d = case.d as f64;
    points
        .iter()
        .map(|x| {
            let lhs = phi_t(-d * k as f64, x);
            let rhs = phi_t(-d, x).powi(k as i32);
            (lhs / rhs - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Checks Φ_{-dk} = Φ_{-d}^k at the given points.
pub fn phi_power_identity(
    case: &CaseDescriptor,
    k: usize,
    points: &[AlgebraElement<f64>],
) -> Result<VerificationReport> {
    if k == 0 || k > case.n {
        return Err(Error::RankOutOfRange { k, n: case.n });
    }
    let start = Instant::now();
    let dev = phi_power_deviation(case, k, points);
    let mut r = VerificationReport::new("phi-power", case)
        .param("k", k)
        .param("points", points.len())
        .with_quantities(Quantity::Number(0.0), Quantity::Number(dev), 1e-12)
        .with_anchor("Phi_{-dk} = (Phi_{-d})^k");
    r.verdict = if dev <= 1e-12 { Verdict::Pass } else { Verdict::Fail };
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Standard Gaussian random points in real coordinates, scaled by `scale`.
pub fn random_points<R: Rng + ?Sized>(
    case: &CaseDescriptor,
    count: usize,
    scale: f64,
    rng: &mut R,
) -> Result<Vec<AlgebraElement<f64>>> {
    (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..case.ambient_dim)
                .map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            AlgebraElement::from_coords(case, &c)
        })
        .collect()
}

/// Largest radius of the Φ_t L² scan.
pub const PHI_SCAN_MAX_EXPONENT: i32 = 48;

/// Truncation radii of the Φ_t scan: the configured radii, continued by doubling
/// up to 2^48.
pub fn phi_scan_radii(quad: &QuadratureSpec) -> Vec<f64> {
    let mut radii = quad.truncation_radii.clone();
    let mut r = *radii.last().expect("nonempty radii");
    let top = (PHI_SCAN_MAX_EXPONENT as f64).exp2();
    while r < top {
        r *= 2.0;
        radii.push(r);
    }
    radii
}

/// Truncated integrals of |Φ_t|^2 dλ at each scan radius.
pub fn phi_l2_trace(params: &SphericalParams, quad: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    quad.validate()?;
    let case = params.case;
    case.require_backend()?;
    let t = params.t;
    Ok(integrate_cone(case.n, &phi_scan_radii(quad), quad.points_per_axis, |z| {
        let log_phi2: f64 = z.iter().map(|v| t * v.mul_add(*v, 1.0).ln()).sum();
        (density_open(&case, z).expect("length n").log_value + log_phi2).exp()
    }))
}

/// Predicted L² verdict: finite iff 2t + e + 2d(n-1) + 1 < 0.
pub fn predicted_phi_l2(params: &SphericalParams) -> ScanVerdict {
    let c = &params.case;
    let lhs = 2.0 * params.t + c.e as f64 + 2.0 * c.d as f64 * (c.n as f64 - 1.0) + 1.0;
    if lhs < 0.0 {
        ScanVerdict::Finite
    } else {
        ScanVerdict::Divergent
    }
}

/// Scans ∫ |Φ_t|^2 dλ over growing truncations and compares the verdict
/// with the threshold condition.
pub fn phi_l2_verdict(params: &SphericalParams, quad: &QuadratureSpec) -> Result<VerificationReport> {
    let start = Instant::now();
    let trace = phi_l2_trace(params, quad)?;
    let measured = classify_trace(&trace);
    let predicted = predicted_phi_l2(params);
    let tail: Vec<[f64; 2]> = trace.iter().rev().take(4).rev().map(|&(r, v)| [r, v]).collect();
    let mut r = VerificationReport::new("phi-l2-threshold", &params.case)
        .param("t", params.t)
        .param("threshold", crate::registry::l2_threshold(&params.case))
        .param("max_radius", trace.last().map(|x| x.0).unwrap_or(0.0))
        .param("trace_tail", tail)
        .with_quantities(
            Quantity::Label(predicted.to_string()),
            Quantity::Label(measured.to_string()),
            0.0,
        )
        .with_anchor("Phi_t in L^2(dlambda) iff 2t + e + 2d(n-1) < -1")
        .judge_labels();
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

fn radial_power(case: &CaseDescriptor, tau: f64) -> f64 {
    (case.d * case.n as u32) as f64 - 1.0 - tau
}

fn radial_coefficients(case: &CaseDescriptor, rule: &RadialRule) -> Result<Vec<f64>> {
    let tau = crate::registry::bessel_parameter(case);
    let p = radial_power(case, tau);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&z, &w)| Ok(w * bessel_k(tau, z)? * z.powf(p)))
        .collect()
}

fn truncated_trace(rule: &RadialRule, coeffs: &[f64]) -> Vec<(f64, f64)> {
    let mut acc = 0.0;
    let mut start = 0;
    let mut trace = Vec::new();
    for &(r, end) in &rule.breaks {
        acc += coeffs[start..end].iter().sum::<f64>();
        start = end;
        if r >= 4.0 && (r.log2().fract() == 0.0 || r == RADIAL_Z_MAX) {
            trace.push((r, acc));
        }
    }
    trace
}

/// ∫_0^∞ K_tau(z) z^{-tau} z^{dn-1} dz.
pub fn rank1_mass(case: &CaseDescriptor) -> Result<Estimate> {
    rank1_mass_with(case, 16)
}

fn rank1_mass_with(case: &CaseDescriptor, order: usize) -> Result<Estimate> {
    let rule = RadialRule::new(order, 1.0, RADIAL_Z_MAX);
    let coeffs = radial_coefficients(case, &rule)?;
    let trace = truncated_trace(&rule, &coeffs);
    let value = coeffs.iter().sum();
    Ok(Estimate {
        value,
        imag: None,
        std_error: 0.0,
        samples_used: coeffs.len() as u64,
        seed: None,
        truncation_trace: trace,
    })
}

/// ∫_0^∞ K_tau(z) z^power cos(xz) dz.
pub fn bessel_cosine_transform(tau: f64, power: f64, x: f64) -> Result<f64> {
    let width = if x.abs() > 0.0 {
        (std::f64::consts::TAU / x.abs()).min(1.0)
    } else {
        1.0
    };
    let rule = RadialRule::new(16, width, RADIAL_Z_MAX);
    let mut s = 0.0;
    for (&z, &w) in rule.nodes.iter().zip(&rule.weights) {
        s += w * bessel_k(tau, z)? * z.powf(power) * (x * z).cos();
    }
    Ok(s)
}

/// ∫_0^∞ ∫_M exp(-i z <x, m.y_1>) upsilon(z) z^{dn-1} dz dm.
///
/// The M-average uses the deterministic grid when the case has one and
/// Haar Monte Carlo with `quad.mc_samples` draws otherwise.
pub fn rank1_fourier(case: &CaseDescriptor, x: &AlgebraElement<f64>, quad: &QuadratureSpec) -> Result<Estimate> {
    quad.validate()?;
    if x.case() != case {
        return Err(Error::CaseMismatch {
            expected: case.case_id.to_string(),
            found: x.case().case_id.to_string(),
        });
    }
    if x.norm_squared() == 0.0 {
        return rank1_mass_with(case, quad.points_per_axis);
    }
    let pairing = Pairing::<f64>::new(case)?;
    let y1 = frame::<f64>(case)?.swap_remove(0);
    let w_max = pairing.scale().abs() * x.norm_squared().sqrt() * y1.norm_squared().sqrt();
    let rule = RadialRule::new(
        quad.points_per_axis,
        (std::f64::consts::TAU / w_max).min(1.0),
        RADIAL_Z_MAX,
    );
    let coeffs = radial_coefficients(case, &rule)?;
    let half_idx = rule
        .breaks
        .iter()
        .find(|(r, _)| *r >= 0.5 * RADIAL_Z_MAX)
        .map(|b| b.1)
        .unwrap_or(coeffs.len());
    // radial transform at frequency w, truncated at z_max / 2 and at z_max
    let radial = |w: f64| -> (Complex64, Complex64) {
        let mut full = Complex64::new(0.0, 0.0);
        let mut half = full;
        for (j, (&z, &c)) in rule.nodes.iter().zip(&coeffs).enumerate() {
            let (s, co) = (w * z).sin_cos();
            full += Complex64::new(c * co, -c * s);
            if j + 1 == half_idx {
                half = full;
            }
        }
        (half, full)
    };
    let (value, half_value, std_error, samples, seed) = match m_grid(case, quad.angle_points) {
        Ok(grid) if quad.mode != Mode::MonteCarlo => {
            let mut full = Complex64::new(0.0, 0.0);
            let mut half = full;
            for (m, wt) in &grid {
                let ym = frame_images(m, 1)?.swap_remove(0);
                let (h, f) = radial(pairing.eval_unchecked(x, &ym));
                full += f * wt;
                half += h * wt;
            }
            (full, half, 0.0, grid.len() as u64, None)
        }
        _ => {
            let sizes = chunk_sizes(quad.mc_samples);
            let mut re_b = Vec::new();
            let mut im_b = Vec::new();
            let mut full = Complex64::new(0.0, 0.0);
            let mut half = full;
            for (chunk, &size) in sizes.iter().enumerate() {
                if size == 0 {
                    continue;
                }
                let mut rng = chunk_rng(quad.seed, chunk);
                let mut acc = Complex64::new(0.0, 0.0);
                let mut acc_half = acc;
                for _ in 0..size {
                    let m = haar_sample_m::<f64, _>(case, &mut rng)?;
                    let ym = frame_images(&m, 1)?.swap_remove(0);
                    let (h, f) = radial(pairing.eval_unchecked(x, &ym));
                    acc += f;
                    acc_half += h;
                }
                re_b.push(acc.re / size as f64);
                im_b.push(acc.im / size as f64);
                full += acc;
                half += acc_half;
            }
            let total = quad.mc_samples as f64;
            let (_, e_re) = batch_estimate(&re_b);
            let (_, e_im) = batch_estimate(&im_b);
            (full / total, half / total, e_re.max(e_im), quad.mc_samples, Some(quad.seed))
        }
    };
    Ok(Estimate {
        value: value.re,
        imag: Some(value.im),
        std_error,
        samples_used: samples,
        seed,
        truncation_trace: vec![(0.5 * RADIAL_Z_MAX, half_value.re), (RADIAL_Z_MAX, value.re)],
    })
}

/// Allowed relative size of the [z_max/2, z_max] piece. The tail past
/// z_max is smaller again by roughly e^{-z_max/2}.
pub const FOURIER_TAIL_TOL: f64 = 1e-6;

/// True when the z-truncation trace of a Fourier estimate has settled, up
/// to its statistical error.
pub fn fourier_converged(est: &Estimate) -> bool {
    match est.truncation_trace.as_slice() {
        [.., (_, a), (_, b)] => (a - b).abs() <= FOURIER_TAIL_TOL * b.abs() + est.std_error,
        _ => true,
    }
}

/// Ratio of rank1_fourier(x) to Φ_{-d}(x) at each point, with the spread
/// `max |ratio / ratio_0 - 1|` reported against `tolerance`.
pub fn rank1_fourier_check(
    case: &CaseDescriptor,
    points: &[AlgebraElement<f64>],
    quad: &QuadratureSpec,
    tolerance: f64,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let d = case.d as f64;
    let mut ratios = Vec::with_capacity(points.len());
    let mut settled = true;
    let mut max_err: f64 = 0.0;
    let mut max_imag: f64 = 0.0;
    for x in points {
        let est = rank1_fourier(case, x, quad)?;
        settled &= fourier_converged(&est);
        let phi = phi_t(-d, x);
        ratios.push(est.value / phi);
        max_err = max_err.max(est.std_error / est.value.abs());
        max_imag = max_imag.max(est.imag.unwrap_or(0.0).abs() / est.value.abs());
    }
    let spread = ratios
        .iter()
        .map(|r| (r / ratios[0] - 1.0).abs())
        .fold(0.0, f64::max);
    let mut r = VerificationReport::new("rank1-fourier", case)
        .param("points", points.len())
        .param("ratios", &ratios)
        .param("max_relative_imag", max_imag)
        .param("mode", quad.mode)
        .with_quantities(Quantity::Number(0.0), Quantity::Number(spread), tolerance)
        .with_std_error(Some(max_err))
        .with_anchor("Fourier transform of upsilon dmu_1 is a multiple of Phi_{-d} dlambda");
    if quad.mode != Mode::Deterministic {
        r = r.with_seed(quad.seed);
    }
    r.verdict = if !settled {
        Verdict::Inconclusive
    } else if spread <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Self-test of the Bessel kernel against closed forms and classical
/// integrals.
pub fn bessel_selftest() -> Result<Vec<VerificationReport>> {
    use std::f64::consts::PI;
    let mut out = Vec::new();
    let mut push = |id: &str, params: Vec<(&str, f64)>, predicted: f64, measured: f64, tol: f64| {
        let mut r = VerificationReport::bare(id, "-")
            .with_quantities(Quantity::Number(predicted), Quantity::Number(measured), tol)
            .with_anchor("one-variable K-Bessel kernel");
        for (k, v) in params {
            r = r.param(k, v);
        }
        out.push(r.judge_ratio());
    };
    let half = (PI / 2.0).sqrt() * (-1.0f64).exp();
    push("bessel-half-integer", vec![("tau", 0.5), ("z", 1.0)], half, bessel_k(0.5, 1.0)?, 1e-10);
    push("bessel-k0", vec![("tau", 0.0), ("z", 1.0)], 0.42102443824070834, bessel_k(0.0, 1.0)?, 1e-10);
    push("bessel-k1", vec![("tau", 1.0), ("z", 1.0)], 0.6019072301972346, bessel_k(1.0, 1.0)?, 1e-10);
    let mut worst: f64 = 0.0;
    let mut worst_refl: f64 = 0.0;
    for tau in [-3.5, -1.0, 0.0, 0.5, 1.25, 4.0] {
        for z in [1e-6, 1e-2, 0.5, 2.0, 10.0, 45.0] {
            let k = |t: f64| bessel_k(t, z);
            let lhs = k(tau + 1.0)? - k(tau - 1.0)?;
            let rhs = 2.0 * tau / z * k(tau)?;
            let scale = k(tau + 1.0)?.max(k(tau - 1.0)?);
            worst = worst.max((lhs - rhs).abs() / scale);
            worst_refl = worst_refl.max((k(tau)? / k(-tau)? - 1.0).abs());
        }
    }
    out.push(
        VerificationReport::bare("bessel-recurrence", "-")
            .with_quantities(Quantity::Number(0.0), Quantity::Number(worst), 1e-9)
            .with_anchor("K_{t+1} - K_{t-1} = (2t/z) K_t")
            .with_verdict(if worst <= 1e-9 { Verdict::Pass } else { Verdict::Fail }),
    );
    out.push(
        VerificationReport::bare("bessel-reflection", "-")
            .with_quantities(Quantity::Number(0.0), Quantity::Number(worst_refl), 1e-12)
            .with_anchor("K_{-t} = K_t")
            .with_verdict(if worst_refl <= 1e-12 { Verdict::Pass } else { Verdict::Fail }),
    );
    let mut push = |id: &str, params: Vec<(&str, f64)>, predicted: f64, measured: f64, tol: f64| {
        let mut r = VerificationReport::bare(id, "-")
            .with_quantities(Quantity::Number(predicted), Quantity::Number(measured), tol)
            .with_anchor("one-variable K-Bessel kernel");
        for (k, v) in params {
            r = r.param(k, v);
        }
        out.push(r.judge_ratio());
    };
    for x in [0.0, 1.0, 5.0] {
        let want = 0.5 * PI / (1.0f64 + x * x).sqrt();
        push("bessel-cosine", vec![("x", x)], want, bessel_cosine_transform(0.0, 0.0, x)?, 1e-6);
    }
    let gl = crate::registry::lookup_case("gl_r", 2)?;
    push("bessel-mass", vec![], 1.0, rank1_mass(&gl)?.value, 1e-8);
    push("bessel-l2", vec![], 0.5, crate::rankk::rank1_l2_integral(&gl)?.value, 1e-6);
    Ok(out)
}

/// Lebesgue equivariance exponent 2r, re-exported for reports.
pub fn lebesgue_nu_exponent(case: &CaseDescriptor) -> f64 {
    lebesgue_exponent(case)
}
