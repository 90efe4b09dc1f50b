//! Quadrature rules, cone integration, seeded Monte Carlo and the
//! nested-truncation divergence scan.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of independent streams (and batches) used by every Monte Carlo
/// estimator.
pub const MC_CHUNKS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Gauss panels on the cone and a fixed angle grid on M.
    Deterministic,
    /// Joint Monte Carlo over the cone and M.
    MonteCarlo,
    /// Gauss panels on the cone, Haar Monte Carlo on M.
    #[default]
    Hybrid,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" => Ok(Mode::Deterministic),
            "monte_carlo" | "monte-carlo" | "mc" => Ok(Mode::MonteCarlo),
            "hybrid" => Ok(Mode::Hybrid),
            other => Err(Error::Parse(format!("unknown quadrature mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    /// Gauss-Legendre points on each radial panel.
    pub points_per_axis: usize,
    pub truncation_radii: Vec<f64>,
    pub mc_samples: u64,
    pub seed: u64,
    pub mode: Mode,
    /// Points per angle on the deterministic M grids.
    pub angle_points: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points_per_axis: 16,
            truncation_radii: vec![4.0, 8.0, 16.0, 32.0],
            mc_samples: 100_000,
            seed: 7,
            mode: Mode::Hybrid,
            angle_points: 10,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_axis < 8 {
            return Err(Error::InvalidSpec(format!(
                "points_per_axis must be at least 8, got {}",
                self.points_per_axis
            )));
        }
        if self.truncation_radii.len() < 2 {
            return Err(Error::InvalidSpec(
                "at least two truncation radii are required".into(),
            ));
        }
        let ascending = self.truncation_radii.windows(2).all(|w| w[0] < w[1]);
        if !ascending || !(self.truncation_radii[0] > 0.0) {
            return Err(Error::InvalidSpec(
                "truncation radii must be positive and strictly ascending".into(),
            ));
        }
        if self.mc_samples < MC_CHUNKS as u64 {
            return Err(Error::InvalidSpec(format!(
                "mc_samples must be at least {MC_CHUNKS}"
            )));
        }
        if self.angle_points < 4 {
            return Err(Error::InvalidSpec("angle_points must be at least 4".into()));
        }
        Ok(())
    }

    pub fn max_radius(&self) -> f64 {
        *self.truncation_radii.last().expect("validated spec")
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_mc_samples(mut self, n: u64) -> Self {
        self.mc_samples = n;
        self
    }
}

/// Numerical integral with error bar and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Imaginary part, for oscillatory integrals.
    pub imag: Option<f64>,
    pub std_error: f64,
    pub samples_used: u64,
    pub seed: Option<u64>,
    /// (radius, value) pairs; a single entry when no truncation applies.
    pub truncation_trace: Vec<(f64, f64)>,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            imag: None,
            std_error: 0.0,
            samples_used: 0,
            seed: None,
            truncation_trace: vec![(f64::INFINITY, value)],
        }
    }

    pub fn complex_value(&self) -> Complex64 {
        Complex64::new(self.value, self.imag.unwrap_or(0.0))
    }
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn compute(n: usize) -> GaussRule {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nf * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n == 1 {
            nodes[0] = 0.0;
            weights[0] = 2.0;
        }
        GaussRule { nodes, weights }
    }

    /// Cached rule with `n` points.
    pub fn get(n: usize) -> Arc<GaussRule> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("gauss cache poisoned");
        guard
            .entry(n)
            .or_insert_with(|| Arc::new(GaussRule::compute(n)))
            .clone()
    }

    /// Integrates `f` over [a, b].
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x);
        }
        s * half
    }
}

/// Gauss-Legendre nodes and weights on [a, b].
pub fn gauss_nodes<T: Scalar>(npoints: usize, a: T, b: T) -> Result<(Vec<T>, Vec<T>)> {
    if npoints < 2 {
        return Err(Error::InvalidSpec(format!(
            "Gauss rule needs at least 2 points, got {npoints}"
        )));
    }
    let rule = GaussRule::get(npoints);
    let (a, b) = (a.as_f64(), b.as_f64());
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = rule.nodes.iter().map(|x| T::lit(mid + half * x)).collect();
    let weights = rule.weights.iter().map(|w| T::lit(w * half)).collect();
    Ok((nodes, weights))
}

/// Breakpoints 0, first, 2 first, 4 first, ... up to `upper` (inclusive),
/// with `extra` inserted.
pub fn doubling_breaks(first: f64, upper: f64, extra: &[f64]) -> Vec<f64> {
    let mut breaks = vec![0.0];
    let mut b = first;
    while b < upper {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(upper);
    for &x in extra {
        if x > 0.0 && x < upper {
            breaks.push(x);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    breaks
}

/// Geometric refinement toward 0: [0, 2^-levels], ..., [1/2, 1], then
/// doubling panels up to `upper`.
pub fn graded_breaks(levels: u32, upper: f64) -> Vec<f64> {
    let mut breaks = vec![0.0];
    for j in (1..=levels).rev() {
        let b = (-(j as f64)).exp2();
        if b < upper {
            breaks.push(b);
        }
    }
    let mut b = 1.0;
    while b < upper {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(upper);
    breaks
}

/// Panel-by-panel Gauss integral over consecutive breakpoints.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(breaks: &[f64], order: usize, mut f: F) -> Vec<f64> {
    let rule = GaussRule::get(order);
    breaks
        .windows(2)
        .map(|w| rule.integrate(w[0], w[1], &mut f))
        .collect()
}

/// Half-line integral with doubling panels, extended until the last panel
/// contributes less than `rel_tol` of the total.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    order: usize,
    near_zero_levels: u32,
    rel_tol: f64,
    mut f: F,
) -> Result<Estimate> {
    let rule = GaussRule::get(order);
    let mut total = 0.0;
    let mut trace = Vec::new();
    let mut lo = 0.0;
    for j in (1..=near_zero_levels).rev() {
        let hi = (-(j as f64)).exp2();
        total += rule.integrate(lo, hi, &mut f);
        lo = hi;
    }
    let mut hi = 1.0;
    let mut small_in_a_row = 0;
    while hi <= 2f64.powi(60) {
        let part = rule.integrate(lo, hi, &mut f);
        if !part.is_finite() {
            return Err(Error::PoisonedSample { chunk: 0, index: trace.len() });
        }
        total += part;
        trace.push((hi, total));
        if part.abs() <= rel_tol * total.abs() {
            small_in_a_row += 1;
            if small_in_a_row >= 2 {
                return Ok(Estimate {
                    value: total,
                    imag: None,
                    std_error: 0.0,
                    samples_used: 0,
                    seed: None,
                    truncation_trace: trace,
                });
            }
        } else {
            small_in_a_row = 0;
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::Divergent { trace })
}

/// Visits the Gauss nodes of the ordered cone z_1 > ... > z_k > 0 with z_1
/// restricted to `[outer[0], outer.last()]`. Inner coordinates use doubling
/// panels on (0, z_{j-1}). The callback receives the outer panel index, the
/// node and its weight.
pub fn for_each_cone_node<F: FnMut(usize, &[f64], f64)>(
    k: usize,
    outer: &[f64],
    order: usize,
    mut visit: F,
) {
    assert!(k >= 1);
    let rule = GaussRule::get(order);
    let mut z = vec![0.0; k];
    for (p, w) in outer.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            z[0] = mid + half * x;
            inner(&rule, 1, wt * half, &mut z, &mut |zz, ww| visit(p, zz, ww));
        }
    }

    fn inner<G: FnMut(&[f64], f64)>(
        rule: &GaussRule,
        level: usize,
        weight: f64,
        z: &mut Vec<f64>,
        visit: &mut G,
    ) {
        if level == z.len() {
            visit(z, weight);
            return;
        }
        let upper = z[level - 1];
        let mut lo = 0.0;
        let mut hi = upper.min(1.0);
        loop {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                z[level] = mid + half * x;
                inner(rule, level + 1, weight * wt * half, z, visit);
            }
            if hi >= upper {
                break;
            }
            lo = hi;
            hi = (2.0 * hi).min(upper);
        }
    }
}

/// Outer breakpoints for a truncation scan: doubling panels to the largest
/// radius with every radius as a breakpoint.
pub fn scan_breaks(radii: &[f64]) -> Vec<f64> {
    doubling_breaks(1.0, *radii.last().expect("nonempty radii"), radii)
}

/// Cumulative values at each radius from per-panel contributions.
pub fn cumulative_trace(breaks: &[f64], panel_sums: &[f64], radii: &[f64]) -> Vec<(f64, f64)> {
    let mut trace = Vec::with_capacity(radii.len());
    let mut acc = 0.0;
    let mut p = 0;
    for &r in radii {
        while p < panel_sums.len() && breaks[p + 1] <= r * (1.0 + 1e-14) {
            acc += panel_sums[p];
            p += 1;
        }
        trace.push((r, acc));
    }
    trace
}

/// Integral of a function of the cone coordinates over C_k, truncated at
/// each radius (on z_1).
pub fn integrate_cone<F: FnMut(&[f64]) -> f64>(
    k: usize,
    radii: &[f64],
    order: usize,
    mut g: F,
) -> Vec<(f64, f64)> {
    let breaks = scan_breaks(radii);
    let mut sums = vec![0.0; breaks.len() - 1];
    for_each_cone_node(k, &breaks, order, |p, z, w| sums[p] += w * g(z));
    cumulative_trace(&breaks, &sums, radii)
}

/// Independent random stream for one Monte Carlo chunk. The stream of a
/// chunk index depends only on (seed, chunk).
pub fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Splits `n` samples over [`MC_CHUNKS`] chunks.
pub fn chunk_sizes(n: u64) -> Vec<u64> {
    let c = MC_CHUNKS as u64;
    (0..c).map(|i| n / c + u64::from(i < n % c)).collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkSum {
    re: f64,
    im: f64,
    count: u64,
}

fn batch_error(batches: &[f64]) -> f64 {
    let b = batches.len() as f64;
    if batches.len() < 2 {
        return 0.0;
    }
    let mean = batches.iter().sum::<f64>() / b;
    let var = batches.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (b - 1.0);
    (var / b).sqrt()
}

/// Complex-valued Monte Carlo estimate of `E[w * f(p)]` with `(p, w)` drawn
/// by `sampler`. Chunks run on the rayon pool and are reduced in index
/// order, so the result is bitwise reproducible for a given seed.
pub fn mc_integrate_complex<P, S, F>(sampler: S, integrand: F, nsamples: u64, seed: u64) -> Result<Estimate>
where
    S: Fn(&mut ChaCha8Rng) -> (P, f64) + Sync,
    F: Fn(&P) -> Complex64 + Sync,
{
    if nsamples == 0 {
        return Err(Error::InvalidSpec("Monte Carlo needs at least one sample".into()));
    }
    let sizes = chunk_sizes(nsamples);
    let sums: Vec<Result<ChunkSum>> = sizes
        .par_iter()
        .enumerate()
        .map(|(chunk, &size)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut acc = ChunkSum::default();
            for index in 0..size {
                let (p, w) = sampler(&mut rng);
                let v = integrand(&p) * w;
                if !(v.re.is_finite() && v.im.is_finite()) {
                    return Err(Error::PoisonedSample {
                        chunk,
                        index: index as usize,
                    });
                }
                acc.re += v.re;
                acc.im += v.im;
                acc.count += 1;
            }
            Ok(acc)
        })
        .collect();
    let mut re_batches = Vec::with_capacity(MC_CHUNKS);
    let mut im_batches = Vec::with_capacity(MC_CHUNKS);
    let (mut re, mut im, mut count) = (0.0, 0.0, 0u64);
    for s in sums {
        let s = s?;
        re += s.re;
        im += s.im;
        count += s.count;
        if s.count > 0 {
            re_batches.push(s.re / s.count as f64);
            im_batches.push(s.im / s.count as f64);
        }
    }
    let value = re / count as f64;
    let imag = im / count as f64;
    let std_error = batch_error(&re_batches).max(batch_error(&im_batches));
    Ok(Estimate {
        value,
        imag: Some(imag),
        std_error,
        samples_used: count,
        seed: Some(seed),
        truncation_trace: vec![(f64::INFINITY, value)],
    })
}

/// Real Monte Carlo estimate; see [`mc_integrate_complex`].
pub fn mc_integrate<P, S, F>(sampler: S, integrand: F, nsamples: u64, seed: u64) -> Result<Estimate>
where
    S: Fn(&mut ChaCha8Rng) -> (P, f64) + Sync,
    F: Fn(&P) -> f64 + Sync,
{
    let mut est = mc_integrate_complex(sampler, |p| Complex64::new(integrand(p), 0.0), nsamples, seed)?;
    est.imag = None;
    Ok(est)
}

/// Batch means of a list of per-batch estimates of the same integral.
pub fn batch_estimate(batches: &[f64]) -> (f64, f64) {
    let mean = batches.iter().sum::<f64>() / batches.len() as f64;
    (mean, batch_error(batches))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanVerdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for ScanVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ScanVerdict::Finite => "finite",
            ScanVerdict::Divergent => "divergent",
            ScanVerdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub verdict: ScanVerdict,
    pub trace: Vec<(f64, f64)>,
}

/// Relative change on the last step below which a trace counts as converged.
pub const FINITE_REL_CHANGE: f64 = 0.01;
/// Per-step relative growth above which a trace counts as divergent.
pub const DIVERGENT_GROWTH: f64 = 0.10;

/// Classifies a truncation trace of a nonnegative integrand.
///
/// Finite: last relative change below 1% with nonincreasing increments.
/// Divergent: growth above 10% on each of the last two steps, or three
/// consecutive non-shrinking increments (logarithmic or slow power growth).
pub fn classify_trace(trace: &[(f64, f64)]) -> ScanVerdict {
    let v: Vec<f64> = trace.iter().map(|t| t.1).collect();
    let m = v.len();
    if m < 2 || v.iter().any(|x| !x.is_finite()) {
        return if v.iter().any(|x| x.is_infinite()) {
            ScanVerdict::Divergent
        } else {
            ScanVerdict::Inconclusive
        };
    }
    let inc: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let last = v[m - 1];
    let scale = last.abs().max(f64::MIN_POSITIVE);

    let growth = |i: usize| inc[i] / v[i].abs().max(f64::MIN_POSITIVE);
    let steps = inc.len();
    let fast = if steps >= 2 {
        growth(steps - 1) > DIVERGENT_GROWTH && growth(steps - 2) > DIVERGENT_GROWTH
    } else {
        growth(steps - 1) > DIVERGENT_GROWTH
    };
    let sustained = steps >= 3
        && inc[steps - 3..].iter().all(|&d| d > 1e-6 * scale)
        && inc[steps - 2] >= 0.999 * inc[steps - 3]
        && inc[steps - 1] >= 0.999 * inc[steps - 2];
    if fast || sustained {
        return ScanVerdict::Divergent;
    }

    let rel_last = inc[steps - 1].abs() / scale;
    let shrinking = steps < 2
        || inc[steps - 1].abs() <= inc[steps - 2].abs()
        || inc[steps - 1].abs() <= 1e-12 * scale;
    if rel_last < FINITE_REL_CHANGE && shrinking {
        ScanVerdict::Finite
    } else {
        ScanVerdict::Inconclusive
    }
}

/// Evaluates `integral_at_radius` at each radius and classifies the trace.
pub fn divergence_scan<F: FnMut(f64) -> f64>(mut integral_at_radius: F, radii: &[f64]) -> Result<ScanResult> {
    if radii.len() < 2 {
        return Err(Error::InvalidSpec(
            "divergence scan needs at least two radii".into(),
        ));
    }
    let trace: Vec<(f64, f64)> = radii.iter().map(|&r| (r, integral_at_radius(r))).collect();
    Ok(ScanResult {
        verdict: classify_trace(&trace),
        trace,
    })
}

/// Radii 2^from, 2^(from+1), ..., 2^to.
pub fn power_of_two_radii(from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|j| (j as f64).exp2()).collect()
}
