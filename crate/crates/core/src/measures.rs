//! Polar densities of the Lebesgue measure and of the rank-k equivariant
//! measures, and the integration drivers built on them.
//!
//! With P_k(z) = z_1 ... z_k and V_k(z) = prod_{i<j} (z_i^2 - z_j^2):
//!
//! * Lebesgue measure: P_n^(e+1) V_n^d d^x z
//! * rank-k measure:   P_k^(d(n-k+1)) V_k^d d^x z
//!
//! where d^x z = dz / P. Every density here is relative to dz.

use std::time::Instant;

use nalgebra::{Complex, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{
    character_nu, frame_images, haar_sample_m, levi_act, AlgebraElement, CompactElement,
    GroupFactors, LeviElement,
};
use crate::quad::{
    batch_estimate, chunk_rng, chunk_sizes, classify_trace, cumulative_trace, for_each_cone_node,
    scan_breaks, Estimate, GaussRule, Mode, QuadratureSpec, ScanVerdict, MC_CHUNKS,
};
use crate::registry::{equivariance_exponent, Backend, CaseDescriptor};
use crate::report::{Quantity, Verdict, VerificationReport};
use crate::scalar::Scalar;

/// Point of the open cone z_1 > z_2 > ... > z_k > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ConePoint<T: Scalar> {
    values: Vec<T>,
}

impl<T: Scalar> ConePoint<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ShapeMismatch("cone point must be nonempty".into()));
        }
        let ordered = values.windows(2).all(|w| w[0] > w[1]);
        let positive = values.last().is_some_and(|&v| v > T::zero());
        if !ordered || !positive {
            return Err(Error::ShapeMismatch(
                "cone point must be strictly decreasing and positive".into(),
            ));
        }
        Ok(ConePoint { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Natural log of a density weight relative to dz_1 ... dz_k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityValue<T: Scalar> {
    pub log_value: T,
}

impl<T: Scalar> DensityValue<T> {
    pub fn value(&self) -> T {
        self.log_value.exp()
    }

    /// True on the boundary of the cone, where the density vanishes.
    pub fn is_boundary(&self) -> bool {
        self.log_value == T::min_value().unwrap_or(T::lit(f64::MIN)) || !self.log_value.is_finite()
    }
}

fn log_density<T: Scalar>(z: &[T], p_exponent: T, d: u32) -> T {
    let neg_inf = T::lit(f64::NEG_INFINITY);
    let mut acc = T::zero();
    if p_exponent != T::zero() {
        for &zi in z {
            if !(zi > T::zero()) {
                return neg_inf;
            }
            acc += p_exponent * zi.ln();
        }
    }
    if d > 0 {
        let d = T::lit(d as f64);
        for i in 0..z.len() {
            for j in (i + 1)..z.len() {
                let v = (z[i] * z[i] - z[j] * z[j]).abs();
                if v == T::zero() {
                    return neg_inf;
                }
                acc += d * v.ln();
            }
        }
    }
    acc
}

/// Lebesgue density P^(e+1) V^d / P at a length-n point.
pub fn density_open<T: Scalar>(case: &CaseDescriptor, z: &[T]) -> Result<DensityValue<T>> {
    if z.len() != case.n {
        return Err(Error::ShapeMismatch(format!(
            "open-orbit density needs {} coordinates, got {}",
            case.n,
            z.len()
        )));
    }
    Ok(DensityValue {
        log_value: log_density(z, T::lit(case.e as f64), case.d),
    })
}

/// Rank-k density P^(d(n-k+1)) V^d / P at a length-k point.
pub fn density_rank_k<T: Scalar>(case: &CaseDescriptor, k: usize, z: &[T]) -> Result<DensityValue<T>> {
    if k == 0 || k > case.n {
        return Err(Error::RankOutOfRange { k, n: case.n });
    }
    if z.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "rank-{k} density needs {k} coordinates, got {}",
            z.len()
        )));
    }
    let p = (case.d as f64) * (case.n - k + 1) as f64 - 1.0;
    Ok(DensityValue {
        log_value: log_density(z, T::lit(p), case.d),
    })
}

/// Right-hand side of the T_a Jacobian, a^(-2d(n-1)nu) prod |a^(4e_i) - a^(4e_j)|^d,
/// with a^(e_i) = exp(c_i) and a^nu = exp(c_1 + ... + c_n).
pub fn jacobian_ta(case: &CaseDescriptor, c: &[f64]) -> Result<f64> {
    if c.len() != case.n {
        return Err(Error::ShapeMismatch(format!(
            "expected {} exponents, got {}",
            case.n,
            c.len()
        )));
    }
    let d = case.d as f64;
    let prefactor = (-2.0 * d * (case.n as f64 - 1.0) * c.iter().sum::<f64>()).exp();
    let mut prod = 1.0;
    for i in 0..c.len() {
        for j in (i + 1)..c.len() {
            prod *= ((4.0 * c[i]).exp() - (4.0 * c[j]).exp()).abs().powf(d);
        }
    }
    Ok(prefactor * prod)
}

/// Which polar density an integral is taken against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolarMeasure {
    Lebesgue,
    Rank(usize),
}

impl PolarMeasure {
    fn rank(self, case: &CaseDescriptor) -> usize {
        match self {
            PolarMeasure::Lebesgue => case.n,
            PolarMeasure::Rank(k) => k,
        }
    }

    fn log_density(self, case: &CaseDescriptor, z: &[f64]) -> f64 {
        let dv = match self {
            PolarMeasure::Lebesgue => density_open(case, z),
            PolarMeasure::Rank(k) => density_rank_k(case, k, z),
        };
        dv.expect("length checked by caller").log_value
    }
}

fn rotation(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

/// Weighted deterministic quadrature grid on M (weights sum to 1), available
/// for the real full model and the complex symmetric model at n <= 2.
pub fn m_grid(case: &CaseDescriptor, points: usize) -> Result<Vec<(CompactElement<f64>, f64)>> {
    let backend = case.require_backend()?;
    let tau = std::f64::consts::TAU;
    let mut out = Vec::new();
    match (backend, case.n) {
        (Backend::RealFull, 1) => {
            for s in [1.0, -1.0] {
                let f = GroupFactors::RealPair(
                    DMatrix::from_element(1, 1, s),
                    DMatrix::from_element(1, 1, 1.0),
                );
                out.push((CompactElement::new(case, f)?, 0.5));
            }
        }
        (Backend::RealFull, 2) => {
            // (reflection, 1) and (1, reflection) give the same images of diagonal points
            let refl = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
            // images are even in each angle; an odd count avoids aliasing
            let points = points | 1;
            let w = 1.0 / (2 * points * points) as f64;
            for flip in [false, true] {
                for i in 0..points {
                    let mut a = rotation(tau * i as f64 / points as f64);
                    if flip {
                        a *= &refl;
                    }
                    for j in 0..points {
                        let b = rotation(tau * j as f64 / points as f64);
                        let f = GroupFactors::RealPair(a.clone(), b);
                        out.push((CompactElement::new(case, f)?, w));
                    }
                }
            }
        }
        (Backend::ComplexSymmetric, 1) => {
            let w = 1.0 / points as f64;
            for i in 0..points {
                let ph = Complex::from_polar(1.0, tau * i as f64 / points as f64);
                let f = GroupFactors::Complex(DMatrix::from_element(1, 1, ph));
                out.push((CompactElement::new(case, f)?, w));
            }
        }
        (Backend::ComplexSymmetric, 2) => {
            // u = e^{i alpha} [[a, -conj b], [b, conj a]], (a, b) uniform on S^3:
            // |b|^2 = s uniform on [0, 1], independent uniform phases. Images
            // carry phase frequencies in multiples of 4; an odd phase count
            // keeps them from aliasing onto 0, and what survives the phase
            // average is polynomial in s.
            let rule = GaussRule::get(points.max(2));
            let np = points | 1;
            let p = np as f64;
            let mut phases = Vec::with_capacity(np);
            for i in 0..np {
                phases.push(Complex::from_polar(1.0, tau * i as f64 / p));
            }
            for (sx, sw) in rule.nodes.iter().zip(&rule.weights) {
                let s = 0.5 * (sx + 1.0);
                let (ca, cb) = ((1.0 - s).sqrt(), s.sqrt());
                let sw = 0.5 * sw;
                let w = sw / (p * p * p);
                for &ea in &phases {
                    for &ex in &phases {
                        for &eb in &phases {
                            let a = ex * ca;
                            let b = eb * cb;
                            let u = DMatrix::from_row_slice(
                                2,
                                2,
                                &[a * ea, -b.conj() * ea, b * ea, a.conj() * ea],
                            );
                            out.push((CompactElement::new(case, GroupFactors::Complex(u))?, w));
                        }
                    }
                }
            }
        }
        _ => {
            return Err(Error::Capability(format!(
                "no deterministic M grid for {} at n = {}",
                case.case_id, case.n
            )))
        }
    }
    Ok(out)
}

/// Frame images m.y_1..m.y_k, optionally mapped by l, for one M sample.
fn images(m: &CompactElement<f64>, k: usize, l: Option<&LeviElement<f64>>) -> Result<Vec<AlgebraElement<f64>>> {
    let imgs = frame_images(m, k)?;
    match l {
        None => Ok(imgs),
        Some(l) => imgs.iter().map(|y| levi_act(l, y)).collect(),
    }
}

/// `∫_{C_k} [∫_M f(m.z) dm] d_k z` with the polar constant set to 1.
pub fn integrate_polar<F>(
    case: &CaseDescriptor,
    measure: PolarMeasure,
    f: F,
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(&AlgebraElement<f64>) -> f64 + Sync,
{
    integrate_polar_mapped(case, measure, None, f, quad)
}

/// As [`integrate_polar`] for the integrand `x -> f(l.x)`.
pub fn integrate_polar_mapped<F>(
    case: &CaseDescriptor,
    measure: PolarMeasure,
    l: Option<&LeviElement<f64>>,
    f: F,
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(&AlgebraElement<f64>) -> f64 + Sync,
{
    quad.validate()?;
    case.require_backend()?;
    let k = measure.rank(case);
    if k == 0 || k > case.n {
        return Err(Error::RankOutOfRange { k, n: case.n });
    }
    if let Some(l) = l {
        if l.case() != case {
            return Err(Error::CaseMismatch {
                expected: case.case_id.to_string(),
                found: l.case().case_id.to_string(),
            });
        }
    }
    let est = match quad.mode {
        Mode::Deterministic => {
            let grid = m_grid(case, quad.angle_points)?;
            let (imgs, weights): (Vec<_>, Vec<_>) = grid
                .iter()
                .map(|(m, w)| images(m, k, l).map(|i| (i, *w)))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip();
            let (trace, _) = cone_sweep(case, measure, k, &imgs, &weights, &[imgs.len()], &f, quad)?;
            Estimate {
                value: trace.last().unwrap().1,
                imag: None,
                std_error: 0.0,
                samples_used: imgs.len() as u64,
                seed: None,
                truncation_trace: trace,
            }
        }
        Mode::Hybrid => {
            let sizes = chunk_sizes(quad.mc_samples);
            let mut imgs = Vec::new();
            let mut bounds = Vec::with_capacity(MC_CHUNKS);
            for (chunk, &size) in sizes.iter().enumerate() {
                let mut rng = chunk_rng(quad.seed, chunk);
                for _ in 0..size {
                    let m = haar_sample_m::<f64, _>(case, &mut rng)?;
                    imgs.push(images(&m, k, l)?);
                }
                bounds.push(imgs.len());
            }
            let weights: Vec<f64> = sizes
                .iter()
                .flat_map(|&s| std::iter::repeat_n(1.0 / s.max(1) as f64, s as usize))
                .collect();
            let (trace, batches) = cone_sweep(case, measure, k, &imgs, &weights, &bounds, &f, quad)?;
            let nonempty: Vec<f64> = batches
                .iter()
                .zip(&sizes)
                .filter(|(_, &s)| s > 0)
                .map(|(b, _)| *b)
                .collect();
            let (mean, err) = batch_estimate(&nonempty);
            let scale = mean / trace.last().unwrap().1;
            let trace: Vec<(f64, f64)> = trace
                .into_iter()
                .map(|(r, v)| (r, if scale.is_finite() { v * scale } else { v }))
                .collect();
            Estimate {
                value: mean,
                imag: None,
                std_error: err,
                samples_used: quad.mc_samples,
                seed: Some(quad.seed),
                truncation_trace: trace,
            }
        }
        Mode::MonteCarlo => joint_monte_carlo(case, measure, k, l, &f, quad)?,
    };
    if classify_trace(&est.truncation_trace) == ScanVerdict::Divergent {
        return Err(Error::Divergent {
            trace: est.truncation_trace,
        });
    }
    Ok(est)
}

/// Gauss sweep over the cone. `weights` are per-sample M weights and
/// `bounds` the end offsets of each batch. Returns the truncation trace of
/// the full weighted sum and the per-batch totals at the largest radius.
#[allow(clippy::too_many_arguments)]
fn cone_sweep<F>(
    case: &CaseDescriptor,
    measure: PolarMeasure,
    k: usize,
    imgs: &[Vec<AlgebraElement<f64>>],
    weights: &[f64],
    bounds: &[usize],
    f: &F,
    quad: &QuadratureSpec,
) -> Result<(Vec<(f64, f64)>, Vec<f64>)>
where
    F: Fn(&AlgebraElement<f64>) -> f64 + Sync,
{
    let breaks = scan_breaks(&quad.truncation_radii);
    let mut panel_sums = vec![0.0; breaks.len() - 1];
    let mut batch_sums = vec![0.0; bounds.len()];
    let mut buf = AlgebraElement::zeros(case)?;
    let mut poisoned = None;
    let mut node_index = 0usize;
    for_each_cone_node(k, &breaks, quad.points_per_axis, |p, z, w| {
        node_index += 1;
        if poisoned.is_some() {
            return;
        }
        let dens = measure.log_density(case, z).exp();
        let wz = w * dens;
        if wz == 0.0 {
            return;
        }
        let mut start = 0;
        for (b, &end) in bounds.iter().enumerate() {
            let mut acc = 0.0;
            for s in start..end {
                buf.assign_combination(&imgs[s], z);
                let v = f(&buf);
                if !v.is_finite() {
                    poisoned = Some(Error::PoisonedSample {
                        chunk: b,
                        index: node_index,
                    });
                    return;
                }
                acc += weights[s] * v;
            }
            batch_sums[b] += wz * acc;
            panel_sums[p] += wz * acc;
            start = end;
        }
    });
    if let Some(e) = poisoned {
        return Err(e);
    }
    let nb = bounds.len() as f64;
    if bounds.len() > 1 {
        // panel sums carry the sum over batches, each a full estimate
        panel_sums.iter_mut().for_each(|v| *v /= nb);
    }
    Ok((cumulative_trace(&breaks, &panel_sums, &quad.truncation_radii), batch_sums))
}

/// Joint Monte Carlo: k iid Exp(1) coordinates sorted descending, Haar m.
fn joint_monte_carlo<F>(
    case: &CaseDescriptor,
    measure: PolarMeasure,
    k: usize,
    l: Option<&LeviElement<f64>>,
    f: &F,
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    F: Fn(&AlgebraElement<f64>) -> f64 + Sync,
{
    use rayon::prelude::*;
    let radii = &quad.truncation_radii;
    let log_kfact: f64 = (1..=k).map(|i| (i as f64).ln()).sum();
    let sizes = chunk_sizes(quad.mc_samples);
    let per_chunk: Vec<Result<Vec<f64>>> = sizes
        .par_iter()
        .enumerate()
        .map(|(chunk, &size)| {
            let mut rng = chunk_rng(quad.seed, chunk);
            let mut sums = vec![0.0; radii.len()];
            let mut buf = AlgebraElement::zeros(case)?;
            let mut z = vec![0.0; k];
            for index in 0..size {
                for zi in z.iter_mut() {
                    *zi = rng.sample::<f64, _>(Exp1);
                }
                z.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let m = haar_sample_m::<f64, _>(case, &mut rng)?;
                let imgs = images(&m, k, l)?;
                let log_prop = log_kfact - z.iter().sum::<f64>();
                let logw = measure.log_density(case, &z) - log_prop;
                buf.assign_combination(&imgs, &z);
                let v = f(&buf) * logw.exp();
                if !v.is_finite() {
                    return Err(Error::PoisonedSample {
                        chunk,
                        index: index as usize,
                    });
                }
                for (s, &r) in sums.iter_mut().zip(radii) {
                    if z[0] <= r {
                        *s += v;
                    }
                }
            }
            Ok(sums.into_iter().map(|s| s / size.max(1) as f64).collect())
        })
        .collect();
    let mut batches: Vec<Vec<f64>> = Vec::with_capacity(MC_CHUNKS);
    for (r, &s) in per_chunk.into_iter().zip(&sizes) {
        let r = r?;
        if s > 0 {
            batches.push(r);
        }
    }
    let trace: Vec<(f64, f64)> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let col: Vec<f64> = batches.iter().map(|b| b[i]).collect();
            (r, batch_estimate(&col).0)
        })
        .collect();
    let last: Vec<f64> = batches.iter().map(|b| b[radii.len() - 1]).collect();
    let (value, std_error) = batch_estimate(&last);
    Ok(Estimate {
        value,
        imag: None,
        std_error,
        samples_used: quad.mc_samples,
        seed: Some(quad.seed),
        truncation_trace: trace,
    })
}

/// Physicists' Gauss-Hermite rule (weight e^{-x^2}) via Golub-Welsch.
fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        j[(i, i - 1)] = b;
        j[(i - 1, i)] = b;
    }
    let eig = j.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Largest tensor grid (points^dim) evaluated by [`integrate_lebesgue_direct`].
pub const MAX_TENSOR_NODES: u64 = 50_000_000;

/// Direct integral over the ambient space in real coordinates: tensor
/// Gauss-Hermite grid with the Gaussian weight split off for ambient_dim <= 6,
/// Gaussian importance Monte Carlo above that.
pub fn integrate_lebesgue_direct<F>(case: &CaseDescriptor, f: F, quad: &QuadratureSpec) -> Result<Estimate>
where
    F: Fn(&AlgebraElement<f64>) -> f64 + Sync,
{
    quad.validate()?;
    case.require_backend()?;
    let dim = case.ambient_dim;
    let npts = quad.points_per_axis;
    let total = (npts as u64).checked_pow(dim as u32);
    let grid_ok = dim <= 6 && total.is_some_and(|t| t <= MAX_TENSOR_NODES);
    if grid_ok {
        let (nodes, weights) = gauss_hermite(npts);
        let mut idx = vec![0usize; dim];
        let mut coords = vec![0.0; dim];
        let mut x = AlgebraElement::zeros(case)?;
        let mut sum = 0.0;
        let count = total.unwrap();
        for _ in 0..count {
            let mut w = 1.0;
            let mut r2 = 0.0;
            for (c, &i) in coords.iter_mut().zip(&idx) {
                *c = nodes[i];
                w *= weights[i];
                r2 += nodes[i] * nodes[i];
            }
            x.set_coords(&coords)?;
            let v = f(&x);
            if !v.is_finite() {
                return Err(Error::PoisonedSample { chunk: 0, index: 0 });
            }
            sum += w * r2.exp() * v;
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < npts {
                    break;
                }
                *slot = 0;
            }
        }
        return Ok(Estimate {
            value: sum,
            imag: None,
            std_error: 0.0,
            samples_used: count,
            seed: None,
            truncation_trace: vec![(f64::INFINITY, sum)],
        });
    }
    if quad.mode == Mode::Deterministic {
        return Err(Error::Capability(format!(
            "tensor grid with {npts}^{dim} nodes exceeds the deterministic limit"
        )));
    }
    // x ~ N(0, I/2), density pi^{-dim/2} e^{-|x|^2}
    let log_norm = 0.5 * dim as f64 * std::f64::consts::PI.ln();
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let case = *case;
    crate::quad::mc_integrate(
        move |rng| {
            let c: DVector<f64> =
                DVector::from_fn(dim, |_, _| half * rng.sample::<f64, _>(StandardNormal));
            let r2 = c.norm_squared();
            let x = AlgebraElement::from_coords(&case, c.as_slice()).expect("dimension matches");
            (x, (log_norm + r2).exp())
        },
        f,
        quad.mc_samples,
        quad.seed,
    )
}

/// Standard Gaussian test function exp(-|x|^2).
pub fn gaussian(x: &AlgebraElement<f64>) -> f64 {
    (-x.norm_squared()).exp()
}

/// Default relative tolerance of [`check_equivariance`] for a quadrature mode.
pub fn equivariance_tolerance(mode: Mode) -> f64 {
    match mode {
        Mode::Deterministic => 1e-3,
        _ => 2e-2,
    }
}

/// Compares the pushforward ratio `∫ f(l.x) dμ_k / ∫ f dμ_k` with the
/// character e^{2dk nu}(l).
pub fn check_equivariance<F>(
    case: &CaseDescriptor,
    k: usize,
    l: &LeviElement<f64>,
    f: F,
    quad: &QuadratureSpec,
) -> Result<VerificationReport>
where
    F: Fn(&AlgebraElement<f64>) -> f64 + Sync,
{
    let start = Instant::now();
    let exponent = equivariance_exponent(case, k)?;
    let chi = character_nu(l).powf(exponent);
    let base = integrate_polar(case, PolarMeasure::Rank(k), &f, quad)?;
    let moved = integrate_polar_mapped(case, PolarMeasure::Rank(k), Some(l), &f, quad)?;
    let ratio = moved.value / base.value;
    let rel_err = ((moved.std_error / moved.value).powi(2) + (base.std_error / base.value).powi(2)).sqrt();
    let tolerance = equivariance_tolerance(quad.mode);
    let verdict = if (ratio / chi - 1.0).abs() <= tolerance {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let mut report = VerificationReport::new("equivariance", case)
        .param("k", k)
        .param("mode", quad.mode)
        .param("exponent_of_nu", exponent)
        .with_quantities(Quantity::Number(chi), Quantity::Number(ratio), tolerance)
        .with_std_error(Some(rel_err * ratio.abs()))
        .with_seed(quad.seed)
        .with_anchor("the rank-k orbit measure is e^{2dk nu}-equivariant under L");
    report.verdict = verdict;
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Homogeneity degree of a polar measure under x -> c x.
pub fn measure_degree(case: &CaseDescriptor, measure: PolarMeasure) -> usize {
    match measure {
        PolarMeasure::Lebesgue => case.ambient_dim,
        PolarMeasure::Rank(k) => case.d as usize * k * case.n,
    }
}

/// Scaling check on a rank-k orbit: the measure is homogeneous of degree
/// dkn, so ∫ exp(-|x|^2) / ∫ exp(-2|x|^2) = 2^{dkn/2}.
pub fn polar_scaling_check(
    case: &CaseDescriptor,
    measure: PolarMeasure,
    quad: &QuadratureSpec,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let k = measure.rank(case);
    let deg = measure_degree(case, measure);
    let wide = integrate_polar(case, measure, gaussian, quad)?;
    let narrow = integrate_polar(case, measure, narrow_gaussian, quad)?;
    let measured = wide.value / narrow.value;
    let predicted = 2f64.powf(deg as f64 / 2.0);
    let rel = ((wide.std_error / wide.value).powi(2) + (narrow.std_error / narrow.value).powi(2)).sqrt();
    let mut r = VerificationReport::new("polar-scaling", case)
        .param("k", k)
        .param("measure", measure)
        .param("degree", deg)
        .param("mode", quad.mode)
        .with_quantities(Quantity::Number(predicted), Quantity::Number(measured), equivariance_tolerance(quad.mode))
        .with_std_error(Some(rel * measured))
        .with_anchor("the rank-k orbit measure is e^{2dk nu}-equivariant under L");
    if quad.mode != Mode::Deterministic {
        r = r.with_seed(quad.seed);
    }
    r = r.judge_ratio();
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Gaussian of width 1/sqrt(2): exp(-2|x|^2).
pub fn narrow_gaussian(x: &AlgebraElement<f64>) -> f64 {
    (-2.0 * x.norm_squared()).exp()
}

/// Anisotropic Gaussian times a polynomial in the real coordinates.
pub fn anisotropic_poly(x: &AlgebraElement<f64>) -> f64 {
    let c = x.coords();
    let q: f64 = c.iter().enumerate().map(|(j, v)| (1.0 + 0.05 * j as f64) * v * v).sum();
    let p = 1.0 + c[0] * c[0] + 0.5 * c[c.len() - 1] * c[c.len() - 1];
    p * (-q).exp()
}

type TestFn = fn(&AlgebraElement<f64>) -> f64;

/// Test-function pairs of the polar ratio check.
pub const POLAR_PAIRS: [(&str, TestFn, &str, TestFn); 3] = [
    ("gaussian", gaussian, "narrow_gaussian", narrow_gaussian),
    ("gaussian", gaussian, "anisotropic_poly", anisotropic_poly),
    ("narrow_gaussian", narrow_gaussian, "anisotropic_poly", anisotropic_poly),
];

/// Ratios of polar integrals against ratios of direct Lebesgue integrals,
/// one report per test-function pair.
pub fn polar_ratio_check(case: &CaseDescriptor, quad: &QuadratureSpec) -> Result<Vec<VerificationReport>> {
    let start = Instant::now();
    let fns: [(&str, TestFn); 3] = [
        ("gaussian", gaussian),
        ("narrow_gaussian", narrow_gaussian),
        ("anisotropic_poly", anisotropic_poly),
    ];
    let mut polar = Vec::new();
    let mut direct = Vec::new();
    for (_, f) in fns {
        polar.push(integrate_polar(case, PolarMeasure::Lebesgue, f, quad)?);
        direct.push(integrate_lebesgue_direct(case, f, quad)?);
    }
    let find = |name: &str| fns.iter().position(|(n, _)| *n == name).expect("known name");
    let tolerance = equivariance_tolerance(quad.mode);
    let elapsed = start.elapsed().as_secs_f64() / POLAR_PAIRS.len() as f64;
    let rel = |e: &Estimate| e.std_error / e.value.abs();
    Ok(POLAR_PAIRS
        .iter()
        .map(|&(a, _, b, _)| {
            let (i, j) = (find(a), find(b));
            let measured = polar[i].value / polar[j].value;
            let predicted = direct[i].value / direct[j].value;
            let err = (rel(&polar[i]).powi(2) + rel(&polar[j]).powi(2) + rel(&direct[i]).powi(2) + rel(&direct[j]).powi(2)).sqrt();
            let mut r = VerificationReport::new("polar-open", case)
                .param("numerator", a)
                .param("denominator", b)
                .param("mode", quad.mode)
                .param("points_per_axis", quad.points_per_axis)
                .with_quantities(Quantity::Number(predicted), Quantity::Number(measured), tolerance)
                .with_std_error(Some(err * measured.abs()))
                .with_anchor("Lebesgue measure on the algebra in polar coordinates: density P^{e+1} V^d on the open cone times Haar on M");
            if quad.mode != Mode::Deterministic {
                r = r.with_seed(quad.seed);
            }
            r = r.judge_ratio();
            r.runtime_seconds = elapsed;
            r
        })
        .collect())
}
