//! Sparse multivariate polynomials with exact or floating coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

/// Coefficient ring for [`Poly`].
pub trait Coeff:
    Clone + PartialEq + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn from_u32(v: u32) -> Self;
}

impl Coeff for Rational64 {
    fn from_u32(v: u32) -> Self {
        Rational64::from_integer(v as i64)
    }
}

impl Coeff for f64 {
    fn from_u32(v: u32) -> Self {
        v as f64
    }
}

/// Polynomial in `nvars` variables, monomials keyed by exponent vectors.
#[derive(Clone, PartialEq)]
pub struct Poly<C: Coeff> {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, C>,
}

impl<C: Coeff> Poly<C> {
    pub fn zero(nvars: usize) -> Self {
        Poly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn one(nvars: usize) -> Self {
        Poly::constant(nvars, C::one())
    }

    /// The i-th coordinate function.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Poly::zero(nvars);
        p.add_term(e, C::one());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &C)> {
        self.terms.iter()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    fn add_term(&mut self, exps: Vec<u32>, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut p = Poly::zero(self.nvars);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v.clone() * c.clone());
        }
        p
    }

    pub fn pow(&self, m: u32) -> Self {
        (0..m).fold(Poly::one(self.nvars), |acc, _| &acc * self)
    }

    /// ∂/∂x_i.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Poly::zero(self.nvars);
        for (e, v) in &self.terms {
            if e[i] > 0 {
                let mut f = e.clone();
                f[i] -= 1;
                p.add_term(f, v.clone() * C::from_u32(e[i]));
            }
        }
        p
    }

    /// Some `c` with `self = c * other`, if one exists.
    pub fn ratio_to(&self, other: &Self) -> Option<C>
    where
        C: std::ops::Div<Output = C>,
    {
        let (e, v) = other.terms.iter().next()?;
        let c = self.terms.get(e).cloned().unwrap_or_else(C::zero) / v.clone();
        (other.scale(&c) == *self).then_some(c)
    }
}

impl Poly<Rational64> {
    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let coef = c.to_f64().unwrap_or(f64::NAN);
                e.iter()
                    .zip(x)
                    .fold(Complex64::new(coef, 0.0), |acc, (&k, v)| acc * v.powu(k))
            })
            .sum()
    }
}

impl<'a, C: Coeff> Add for &'a Poly<C> {
    type Output = Poly<C>;
    fn add(self, rhs: Self) -> Poly<C> {
        let mut p = self.clone();
        for (e, v) in &rhs.terms {
            p.add_term(e.clone(), v.clone());
        }
        p
    }
}

impl<'a, C: Coeff> Sub for &'a Poly<C> {
    type Output = Poly<C>;
    fn sub(self, rhs: Self) -> Poly<C> {
        let mut p = self.clone();
        for (e, v) in &rhs.terms {
            p.add_term(e.clone(), -v.clone());
        }
        p
    }
}

impl<'a, C: Coeff> Mul for &'a Poly<C> {
    type Output = Poly<C>;
    fn mul(self, rhs: Self) -> Poly<C> {
        let mut p = Poly::zero(self.nvars);
        for (e1, v1) in &self.terms {
            for (e2, v2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, v1.clone() * v2.clone());
            }
        }
        p
    }
}

impl<C: Coeff + fmt::Display> fmt::Debug for Poly<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mono: Vec<String> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| if k == 1 { format!("x{i}") } else { format!("x{i}^{k}") })
                    .collect();
                if mono.is_empty() {
                    format!("{c}")
                } else {
                    format!("({c})*{}", mono.join("*"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Poly<Rational64>;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn arithmetic() {
        let x = Q::var(2, 0);
        let y = Q::var(2, 1);
        let s = &x + &y;
        let sq = s.pow(2);
        let expect = &(&x.pow(2) + &(&x.scale(&r(2, 1)) * &y)) + &y.pow(2);
        assert_eq!(sq, expect);
        assert!((&sq - &sq).is_zero());
        assert_eq!(sq.degree(), 2);
    }

    #[test]
    fn derivatives() {
        let x = Q::var(1, 0);
        let p = x.pow(5);
        assert_eq!(p.derivative(0), x.pow(4).scale(&r(5, 1)));
        assert!(Q::one(1).derivative(0).is_zero());
    }

    #[test]
    fn ratio() {
        let x = Q::var(2, 0);
        let y = Q::var(2, 1);
        let p = &x + &y;
        assert_eq!(p.scale(&r(3, 2)).ratio_to(&p), Some(r(3, 2)));
        assert_eq!(x.ratio_to(&p), None);
    }

    #[test]
    fn complex_eval() {
        let x = Q::var(2, 0);
        let y = Q::var(2, 1);
        let p = &x.pow(2).scale(&r(1, 2)) - &y;
        let v = p.eval_complex(&[Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)]);
        assert!((v - Complex64::new(-3.0, 0.0)).norm() < 1e-15);
    }
}
