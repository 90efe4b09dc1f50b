//! Modified Bessel function of the second kind from its integral
//! representation `K_tau(z) = ∫_0^∞ exp(-z cosh u) cosh(tau u) du`, and
//! radial quadrature on the half line adapted to Bessel-type integrands.

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use crate::scalar::Scalar;

const BESSEL_ORDER: usize = 16;
/// Log-range below the peak after which the u-integral is cut.
const LOG_CUTOFF: f64 = 46.0;

fn bessel_k_f64(tau: f64, z: f64) -> f64 {
    let tau = tau.abs();
    let rule = GaussRule::get(BESSEL_ORDER);
    // the exponent -z cosh u + tau u peaks at sinh u = tau / z
    let u_peak = (tau / z).asinh();
    let peak = -z * u_peak.cosh() + tau * u_peak;
    let width = (z * z + tau * tau).powf(-0.25).min(0.5);
    let mut total = 0.0;
    let mut lo = 0.0;
    loop {
        let hi = lo + width;
        total += rule.integrate(lo, hi, |u| {
            let c = -z * u.cosh() - peak;
            0.5 * ((c + tau * u).exp() + (c - tau * u).exp())
        });
        let e_hi = -z * hi.cosh() + tau * hi;
        if hi > u_peak && e_hi < peak - LOG_CUTOFF {
            break;
        }
        lo = hi;
    }
    total * peak.exp()
}

/// K_tau(z) for z > 0.
pub fn bessel_k<T: Scalar>(tau: T, z: T) -> Result<T> {
    let zf = z.as_f64();
    if !(zf > 0.0) {
        return Err(Error::NonPositiveArgument(zf));
    }
    Ok(T::lit(bessel_k_f64(tau.as_f64(), zf)))
}

/// The rank-one kernel z -> K_tau(z) / z^tau.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselKernel {
    pub tau: f64,
}

impl BesselKernel {
    pub fn new(tau: f64) -> Self {
        BesselKernel { tau }
    }

    pub fn for_case(case: &crate::registry::CaseDescriptor) -> Self {
        BesselKernel::new(crate::registry::bessel_parameter(case))
    }

    pub fn upsilon(&self, z: f64) -> Result<f64> {
        Ok(bessel_k(self.tau, z)? / z.powf(self.tau))
    }
}

/// upsilon(z) = K_tau(z) / z^tau.
pub fn upsilon<T: Scalar>(kernel: &BesselKernel, z: T) -> Result<T> {
    let zf = z.as_f64();
    Ok(T::lit(kernel.upsilon(zf)?))
}

/// Node/weight rule on (0, z_max] for integrands with at most logarithmic
/// singularities at 0: the first panel [0, a] uses z = a u^4, then panels
/// double up to 1 and have width at most `max_width` beyond.
#[derive(Debug, Clone)]
pub struct RadialRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Index of the first node beyond each truncation break.
    pub breaks: Vec<(f64, usize)>,
}

/// Start of the first ordinary panel.
pub const RADIAL_FIRST_PANEL: f64 = 1e-3;
/// Upper end of the radial rules.
pub const RADIAL_Z_MAX: f64 = 64.0;

impl RadialRule {
    pub fn new(order: usize, max_width: f64, z_max: f64) -> Self {
        let rule = GaussRule::get(order);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut breaks = Vec::new();
        let a = RADIAL_FIRST_PANEL;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            let u = 0.5 * (x + 1.0);
            let u3 = u * u * u;
            nodes.push(a * u3 * u);
            weights.push(0.5 * w * 4.0 * a * u3);
        }
        let mut edges = vec![a];
        let mut b = a;
        while b < 1.0 {
            b = (2.0 * b).min(1.0);
            edges.push(b);
        }
        let step = max_width.min(1.0);
        let mut b = 1.0;
        while b < z_max {
            b = (b + step).min(z_max);
            edges.push(b);
        }
        for w in edges.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
                nodes.push(mid + half * x);
                weights.push(wt * half);
            }
            breaks.push((hi, nodes.len()));
        }
        RadialRule {
            nodes,
            weights,
            breaks,
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn half_integer_closed_form(order: f64, z: f64) -> f64 {
        // K_{1/2} and K_{3/2} from elementary functions
        let base = (PI / (2.0 * z)).sqrt() * (-z).exp();
        if (order.abs() - 0.5).abs() < 1e-15 {
            base
        } else {
            base * (1.0 + 1.0 / z)
        }
    }

    #[test]
    fn half_integer_values() {
        let v: f64 = bessel_k(0.5, 1.0).unwrap();
        assert!((v - 0.461068).abs() < 1e-6);
        for z in [1e-6, 1e-3, 0.1, 1.0, 7.0, 30.0, 50.0] {
            for order in [0.5, 1.5] {
                let want = half_integer_closed_form(order, z);
                let got: f64 = bessel_k(order, z).unwrap();
                assert!((got / want - 1.0).abs() < 1e-10, "K_{order}({z}): {got} vs {want}");
            }
        }
    }

    #[test]
    fn integer_reference_values() {
        let k0: f64 = bessel_k(0.0, 1.0).unwrap();
        let k1: f64 = bessel_k(1.0, 1.0).unwrap();
        assert!((k0 / 0.42102443824070834 - 1.0).abs() < 1e-12);
        assert!((k1 / 0.6019072301972346 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reflection_and_recurrence() {
        for tau in [-4.0, -1.3, 0.0, 0.25, 2.7, 4.0] {
            for z in [1e-6, 1e-3, 0.05, 0.7, 3.0, 12.0, 49.0] {
                let k = |t: f64| bessel_k_f64(t, z);
                assert_eq!(k(tau), k(-tau));
                let lhs = k(tau + 1.0) - k(tau - 1.0);
                let rhs = 2.0 * tau / z * k(tau);
                let scale = k(tau + 1.0).abs().max(k(tau - 1.0).abs());
                assert!((lhs - rhs).abs() <= 1e-9 * scale, "tau={tau} z={z}");
            }
        }
    }

    #[test]
    fn small_argument_log() {
        let gamma = 0.5772156649015329;
        let z = 1e-4;
        let want = -(z / 2.0f64).ln() - gamma;
        let got = upsilon(&BesselKernel::new(0.0), z).unwrap();
        assert!((got / want - 1.0).abs() < 0.01);
    }

    #[test]
    fn exponential_decay() {
        let k = BesselKernel::new(0.0);
        let r = k.upsilon(20.0).unwrap() / k.upsilon(10.0).unwrap();
        let want = (-10.0f64).exp() * (10.0f64 / 20.0).sqrt();
        assert!((r / want - 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_nonpositive() {
        assert_eq!(bessel_k(0.0, 0.0), Err(Error::NonPositiveArgument(0.0)));
        assert!(bessel_k(0.0, -1.0).is_err());
        assert!(BesselKernel::new(0.5).upsilon(-2.0).is_err());
    }

    #[test]
    fn single_precision() {
        let v: f32 = bessel_k(0.5f32, 1.0f32).unwrap();
        assert!((v - 0.461068).abs() < 1e-5);
    }

    #[test]
    fn radial_rule_moments() {
        let r = RadialRule::new(16, 1.0, 64.0);
        assert!((r.integrate(|z| (-z).exp()) - 1.0).abs() < 1e-13);
        // ∫_0^1 ln z dz = -1 over the first panels
        let s: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .filter(|(z, _)| **z <= 1.0)
            .map(|(z, w)| w * z.ln())
            .sum();
        assert!((s + 1.0).abs() < 1e-9, "{s}");
    }
}
