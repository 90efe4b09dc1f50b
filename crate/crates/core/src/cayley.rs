//! The Cayley operator det(∂) on complex symmetric matrices, exactly on
//! polynomials and by finite differences on smooth holomorphic functions.
//!
//! Coordinates are the upper-triangle entries u_ij (i <= j) in row order.
//! On an off-diagonal coordinate the matrix derivative is half the
//! coordinate derivative, so det(∂) exp(tr(uy)) = det(y) exp(tr(uy)).

use std::time::Instant;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::registry::CaseDescriptor;
use crate::report::{Quantity, Verdict, VerificationReport};

pub type ExactPoly = Poly<Rational64>;

/// Largest rank handled by the operator.
pub const CAYLEY_MAX_N: usize = 2;
/// Finite-difference step.
pub const FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CayleyScheme {
    SymbolicPolynomial,
    FiniteDifference,
}

impl std::str::FromStr for CayleyScheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symbolic" | "symbolic_polynomial" => Ok(CayleyScheme::SymbolicPolynomial),
            "fd" | "finite_difference" => Ok(CayleyScheme::FiniteDifference),
            other => Err(Error::Parse(format!("unknown scheme `{other}`"))),
        }
    }
}

/// What the operator is applied to.
pub enum CayleyInput<'a> {
    Polynomial(&'a ExactPoly),
    Smooth(&'a (dyn Fn(&[Complex64]) -> Complex64 + Sync)),
}

/// Number of symmetric coordinates at rank n.
pub fn sym_vars(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Coordinate index of u_ij.
pub fn sym_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

fn permutations(n: usize) -> Vec<(Vec<usize>, i64)> {
    fn go(prefix: &mut Vec<usize>, left: &mut Vec<usize>, sign: i64, out: &mut Vec<(Vec<usize>, i64)>) {
        if left.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for pos in 0..left.len() {
            let v = left.remove(pos);
            prefix.push(v);
            // moving element `pos` to the front costs `pos` transpositions
            go(prefix, left, if pos % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            left.insert(pos, v);
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut (0..n).collect(), 1, &mut out);
    out
}

/// det(u) as a polynomial in the symmetric coordinates.
pub fn sym_det(n: usize) -> ExactPoly {
    let nv = sym_vars(n);
    let mut det = ExactPoly::zero(nv);
    for (perm, sign) in permutations(n) {
        let term = perm
            .iter()
            .enumerate()
            .fold(ExactPoly::constant(nv, Rational64::from_integer(sign)), |acc, (i, &j)| {
                &acc * &ExactPoly::var(nv, sym_index(n, i, j))
            });
        det = &det + &term;
    }
    det
}

/// tr(u y) for a fixed symmetric y.
pub fn sym_trace_pairing(n: usize, y: &[Vec<Rational64>]) -> ExactPoly {
    let nv = sym_vars(n);
    let mut p = ExactPoly::zero(nv);
    for i in 0..n {
        for j in i..n {
            let w = if i == j { y[i][j] } else { y[i][j] * 2 };
            p = &p + &ExactPoly::var(nv, sym_index(n, i, j)).scale(&w);
        }
    }
    p
}

/// Leibniz expansion of det(∂): (sign * weight, coordinate list) per term.
fn operator_terms(n: usize) -> Vec<(Rational64, Vec<usize>)> {
    permutations(n)
        .into_iter()
        .map(|(perm, sign)| {
            let mut c = Rational64::from_integer(sign);
            let vars = perm
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    if i != j {
                        c /= 2;
                    }
                    sym_index(n, i, j)
                })
                .collect();
            (c, vars)
        })
        .collect()
}

/// det(∂) applied exactly to a polynomial in the rank-n symmetric
/// coordinates.
pub fn det_operator(n: usize, p: &ExactPoly) -> Result<ExactPoly> {
    if p.nvars() != sym_vars(n) {
        return Err(Error::ShapeMismatch(format!(
            "polynomial in {} variables, rank {n} needs {}",
            p.nvars(),
            sym_vars(n)
        )));
    }
    let mut out = ExactPoly::zero(p.nvars());
    for (c, vars) in operator_terms(n) {
        let d = vars.iter().fold(p.clone(), |acc, &v| acc.derivative(v));
        out = &out + &d.scale(&c);
    }
    Ok(out)
}

/// det(∂) f at u by central differences of step h in each coordinate.
pub fn det_operator_fd(n: usize, f: &dyn Fn(&[Complex64]) -> Complex64, u: &[Complex64], h: f64) -> Result<Complex64> {
    if u.len() != sym_vars(n) {
        return Err(Error::ShapeMismatch(format!("point has {} coordinates", u.len())));
    }
    let mut total = Complex64::zero();
    for (c, vars) in operator_terms(n) {
        let order = vars.len();
        let mut acc = Complex64::zero();
        for mask in 0..(1u32 << order) {
            let mut p = u.to_vec();
            let mut sign = 1.0;
            for (bit, &v) in vars.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    p[v] -= h;
                    sign = -sign;
                } else {
                    p[v] += h;
                }
            }
            acc += f(&p) * sign;
        }
        total += acc * (c.to_f64().unwrap_or(f64::NAN) / (2.0 * h).powi(order as i32));
    }
    Ok(total)
}

fn require_cayley_case(case: &CaseDescriptor) -> Result<()> {
    if !case.is_sp_c() || case.n > CAYLEY_MAX_N {
        return Err(Error::Capability(format!(
            "the Cayley operator is implemented for sp_c with n <= {CAYLEY_MAX_N}, not {} n={}",
            case.case_id, case.n
        )));
    }
    Ok(())
}

/// Applies det(∂) to `f` and evaluates at `x` (symmetric coordinates).
pub fn cayley_operator_apply(
    case: &CaseDescriptor,
    f: CayleyInput<'_>,
    x: &[Complex64],
    scheme: CayleyScheme,
) -> Result<Complex64> {
    require_cayley_case(case)?;
    let n = case.n;
    if x.len() != sym_vars(n) {
        return Err(Error::ShapeMismatch(format!("point has {} coordinates", x.len())));
    }
    match (scheme, f) {
        (CayleyScheme::SymbolicPolynomial, CayleyInput::Polynomial(p)) => Ok(det_operator(n, p)?.eval_complex(x)),
        (CayleyScheme::SymbolicPolynomial, CayleyInput::Smooth(_)) => Err(Error::Unsupported(
            "the symbolic scheme needs a polynomial".into(),
        )),
        (CayleyScheme::FiniteDifference, CayleyInput::Polynomial(p)) => {
            det_operator_fd(n, &|u| p.eval_complex(u), x, FD_STEP)
        }
        (CayleyScheme::FiniteDifference, CayleyInput::Smooth(g)) => det_operator_fd(n, g, x, FD_STEP),
    }
}

/// c_s = prod_{j<n} (s + j/2).
pub fn cayley_constant(n: usize, s: Rational64) -> Rational64 {
    (0..n).fold(Rational64::from_integer(1), |acc, j| acc * (s + Rational64::new(j as i64, 2)))
}

/// Constant c with det(∂) det(u)^s = c det(u)^{s-1}, if the result has
/// that form.
pub fn symbolic_cayley_constant(n: usize, s: u32) -> Result<Option<Rational64>> {
    if s == 0 {
        return Ok(Some(Rational64::zero()));
    }
    let det = sym_det(n);
    let lhs = det_operator(n, &det.pow(s))?;
    Ok(lhs.ratio_to(&det.pow(s - 1)))
}

fn sym_matrix(n: usize, c: &[Complex64]) -> Vec<Vec<Complex64>> {
    (0..n)
        .map(|i| (0..n).map(|j| c[sym_index(n, i, j)]).collect())
        .collect()
}

fn det_small(m: &[Vec<Complex64>]) -> Complex64 {
    match m.len() {
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        _ => {
            let a = nalgebra::DMatrix::from_fn(m.len(), m.len(), |i, j| m[i][j]);
            a.determinant()
        }
    }
}

/// det(1 + w u) for symmetric w, u given by coordinates.
pub fn det_one_plus(n: usize, w: &[Complex64], u: &[Complex64]) -> Complex64 {
    let (wm, um) = (sym_matrix(n, w), sym_matrix(n, u));
    let prod: Vec<Vec<Complex64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let s: Complex64 = (0..n).map(|l| wm[i][l] * um[l][j]).sum();
                    s + if i == j { 1.0 } else { 0.0 }
                })
                .collect()
        })
        .collect();
    det_small(&prod)
}

/// Fitted c at one point from det(∂) det(1+wu)^s = c det(w) det(1+wu)^{s-1}.
pub fn fd_fitted_constant(n: usize, s: f64, w: &[Complex64], u: &[Complex64]) -> Result<Complex64> {
    let f = |v: &[Complex64]| det_one_plus(n, w, v).powf(s);
    let lhs = det_operator_fd(n, &f, u, FD_STEP)?;
    let det_w = det_small(&sym_matrix(n, w));
    Ok(lhs / (det_w * det_one_plus(n, w, u).powf(s - 1.0)))
}

fn random_sym<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Vec<Complex64> {
    (0..sym_vars(n))
        .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

/// Exact check of det(∂) det(u)^s = c_s det(u)^{s-1} for s = 1..=s_max.
pub fn cayley_symbolic_report(case: &CaseDescriptor, s_max: u32) -> Result<VerificationReport> {
    require_cayley_case(case)?;
    let start = Instant::now();
    let n = case.n;
    let mut constants = Vec::new();
    let mut ok = true;
    for s in 1..=s_max {
        match symbolic_cayley_constant(n, s)? {
            Some(c) => {
                ok &= c == cayley_constant(n, Rational64::from_integer(s as i64));
                constants.push(c.to_string());
            }
            None => {
                ok = false;
                constants.push("not a multiple".into());
            }
        }
    }
    let mut r = VerificationReport::new("cayley-identity", case)
        .param("scheme", CayleyScheme::SymbolicPolynomial)
        .param("s_max", s_max)
        .param("constants", &constants)
        .with_quantities(
            Quantity::Label("prod_{j<n} (s + j/2)".into()),
            Quantity::Label(if ok { "prod_{j<n} (s + j/2)" } else { "mismatch" }.into()),
            0.0,
        )
        .with_anchor("det(d) det(u)^s is a constant multiple of det(u)^{s-1}")
        .judge_labels();
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

/// Finite-difference check of the det(1+wu)^s identity at random points.
pub fn cayley_fd_report(case: &CaseDescriptor, s: f64, points: usize, seed: u64) -> Result<VerificationReport> {
    require_cayley_case(case)?;
    if points == 0 {
        return Err(Error::InvalidSpec("need at least one point".into()));
    }
    let start = Instant::now();
    let n = case.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fitted = Vec::with_capacity(points);
    for _ in 0..points {
        let w = random_sym(n, 0.4, &mut rng);
        let u = random_sym(n, 0.4, &mut rng);
        fitted.push(fd_fitted_constant(n, s, &w, &u)?);
    }
    let mean = fitted.iter().sum::<Complex64>() / points as f64;
    let spread = fitted.iter().map(|c| (c / mean - 1.0).norm()).fold(0.0, f64::max);
    let predicted: f64 = (0..n).map(|j| s + j as f64 / 2.0).product();
    let fit_err = (mean.re / predicted - 1.0).abs().max(mean.im.abs() / predicted.abs());
    let tol = 1e-4;
    let mut r = VerificationReport::new("cayley-identity", case)
        .param("scheme", CayleyScheme::FiniteDifference)
        .param("s", s)
        .param("points", points)
        .param("step", FD_STEP)
        .param("spread", spread)
        .with_quantities(Quantity::Number(predicted), Quantity::Number(mean.re), tol)
        .with_seed(seed)
        .with_anchor("det(d_u) det(1+wu)^s = c_s det(w) det(1+wu)^{s-1} by analytic continuation");
    r.verdict = if spread < tol && fit_err <= tol { Verdict::Pass } else { Verdict::Fail };
    r.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::lookup_case;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn indexing() {
        assert_eq!((0..2).flat_map(|i| (i..2).map(move |j| sym_index(2, i, j))).collect::<Vec<_>>(), [0, 1, 2]);
        assert_eq!(sym_index(3, 2, 1), 4);
        assert_eq!(permutations(3).iter().map(|p| p.1).sum::<i64>(), 0);
    }

    #[test]
    fn det_of_det_is_three_halves() {
        let d = sym_det(2);
        assert_eq!(det_operator(2, &d).unwrap(), ExactPoly::constant(3, q(3, 2)));
    }

    #[test]
    fn constants_follow_pattern() {
        for s in 1..=4u32 {
            let c = symbolic_cayley_constant(2, s).unwrap().unwrap();
            assert_eq!(c, q(s as i64, 1) * (q(s as i64, 1) + q(1, 2)));
            assert_eq!(c, cayley_constant(2, q(s as i64, 1)));
        }
        assert_eq!(symbolic_cayley_constant(2, 1).unwrap(), Some(q(3, 2)));
        // rank 1 and 3 follow the same product
        assert_eq!(symbolic_cayley_constant(1, 3).unwrap(), Some(q(3, 1)));
        assert_eq!(symbolic_cayley_constant(3, 2).unwrap(), Some(cayley_constant(3, q(2, 1))));
    }

    #[test]
    fn symbol_is_the_norm() {
        // det(∂) (tr uy)^m / m! = det(y) (tr uy)^{m-2} / (m-2)!
        let y = vec![vec![q(2, 1), q(-1, 3)], vec![q(-1, 3), q(5, 7)]];
        let det_y = y[0][0] * y[1][1] - y[0][1] * y[1][0];
        let t = sym_trace_pairing(2, &y);
        let fact = |m: i64| (1..=m).fold(q(1, 1), |a, k| a * q(k, 1));
        for m in 2..6i64 {
            let lhs = det_operator(2, &t.pow(m as u32).scale(&(q(1, 1) / fact(m)))).unwrap();
            let rhs = t.pow(m as u32 - 2).scale(&(det_y / fact(m - 2)));
            assert_eq!(lhs, rhs, "m={m}");
        }
    }

    #[test]
    fn fd_matches_symbolic() {
        let sp = lookup_case("sp_c", 2).unwrap();
        let p = sym_det(2).pow(3);
        let x = [Complex64::new(0.3, 0.1), Complex64::new(-0.2, 0.4), Complex64::new(0.5, -0.3)];
        let a = cayley_operator_apply(&sp, CayleyInput::Polynomial(&p), &x, CayleyScheme::SymbolicPolynomial).unwrap();
        let b = cayley_operator_apply(&sp, CayleyInput::Polynomial(&p), &x, CayleyScheme::FiniteDifference).unwrap();
        // O(h^2) truncation with h = 1e-3
        assert!((a - b).norm() < 1e-4 * a.norm(), "{a} {b}");
        let g = |u: &[Complex64]| u[0].exp();
        assert!(
            cayley_operator_apply(&sp, CayleyInput::Smooth(&g), &x, CayleyScheme::SymbolicPolynomial).is_err()
        );
    }

    #[test]
    fn capability_limits() {
        let gl = lookup_case("gl_r", 2).unwrap();
        let p = sym_det(2);
        let x = [Complex64::zero(); 3];
        assert!(matches!(
            cayley_operator_apply(&gl, CayleyInput::Polynomial(&p), &x, CayleyScheme::FiniteDifference),
            Err(Error::Capability(_))
        ));
        let sp3 = lookup_case("sp_c", 3).unwrap();
        assert!(cayley_symbolic_report(&sp3, 2).is_err());
    }

    #[test]
    fn fd_reports() {
        let sp = lookup_case("sp_c", 2).unwrap();
        for s in [3.0, 2.5] {
            let r = cayley_fd_report(&sp, s, 5, 17).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        }
        assert_eq!(cayley_symbolic_report(&sp, 4).unwrap().verdict, Verdict::Pass);
    }
}
