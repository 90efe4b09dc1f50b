//! Matrix realizations of the Jordan algebra, its structure group L and
//! the compact subgroup M = L ∩ K.
//!
//! | backend            | algebra                       | L acts by    | M               |
//! |--------------------|-------------------------------|--------------|-----------------|
//! | `RealFull`         | n x n real                    | `a x b^T`    | O(n) x O(n)     |
//! | `ComplexFull`      | n x n complex                 | `a x b^T`    | U(n) x U(n)     |
//! | `ComplexSymmetric` | n x n complex symmetric       | `l x l^T`    | U(n)            |
//! | `RealSkew`         | 2n x 2n real skew-symmetric   | `l x l^T`    | O(2n)           |
//!
//! Real coordinates are orthonormal for `Re tr(x y^*)`, so Lebesgue measure
//! in coordinates is the Euclidean measure of the Frobenius norm.

use std::ops::{Add, Mul, Sub};

use nalgebra::{Complex, ComplexField, DMatrix};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::measures::ConePoint;
use crate::registry::{Backend, CaseDescriptor};
use crate::scalar::{unitary_tolerance, Scalar};

/// Default relative tolerance for [`orbit_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum Entries<T: Scalar> {
    Real(DMatrix<T>),
    Complex(DMatrix<Complex<T>>),
}

/// A point of the Jordan algebra in its matrix model. Symmetric and
/// skew-symmetric models are stored with the constraint holding exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement<T: Scalar> {
    case: CaseDescriptor,
    entries: Entries<T>,
}

fn shape_err(case: &CaseDescriptor, what: &str) -> Error {
    Error::ShapeMismatch(format!("{}: {what}", case.case_id))
}

fn check_same_case(a: &CaseDescriptor, b: &CaseDescriptor) -> Result<()> {
    if a != b {
        return Err(Error::CaseMismatch {
            expected: format!("{} (n={})", a.case_id, a.n),
            found: format!("{} (n={})", b.case_id, b.n),
        });
    }
    Ok(())
}

fn symmetrize_complex<T: Scalar>(m: &mut DMatrix<Complex<T>>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)]) * Complex::new(half, T::zero());
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

fn antisymmetrize_real<T: Scalar>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = T::lit(0.5);
    for i in 0..n {
        m[(i, i)] = T::zero();
        for j in (i + 1)..n {
            let v = (m[(i, j)] - m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
    }
}

impl<T: Scalar> AlgebraElement<T> {
    pub fn zeros(case: &CaseDescriptor) -> Result<Self> {
        let backend = case.require_backend()?;
        let size = backend.matrix_size(case.n);
        let entries = if backend.is_complex() {
            Entries::Complex(DMatrix::zeros(size, size))
        } else {
            Entries::Real(DMatrix::zeros(size, size))
        };
        Ok(AlgebraElement {
            case: *case,
            entries,
        })
    }

    /// Real model element. Skew input must be skew to within 1e-12 relative;
    /// it is then stored exactly antisymmetric.
    pub fn from_real(case: &CaseDescriptor, mut m: DMatrix<T>) -> Result<Self> {
        let backend = case.require_backend()?;
        let size = backend.matrix_size(case.n);
        if backend.is_complex() {
            return Err(shape_err(case, "complex model given real entries"));
        }
        if m.nrows() != size || m.ncols() != size {
            return Err(shape_err(
                case,
                &format!("expected {size}x{size}, got {}x{}", m.nrows(), m.ncols()),
            ));
        }
        if backend == Backend::RealSkew {
            let asym = (&m + m.transpose()).norm();
            if asym > T::lit(1e-12) * m.norm().max(T::one()) {
                return Err(shape_err(case, "matrix is not skew-symmetric"));
            }
            antisymmetrize_real(&mut m);
        }
        Ok(AlgebraElement {
            case: *case,
            entries: Entries::Real(m),
        })
    }

    pub fn from_complex(case: &CaseDescriptor, mut m: DMatrix<Complex<T>>) -> Result<Self> {
        let backend = case.require_backend()?;
        let size = backend.matrix_size(case.n);
        if !backend.is_complex() {
            return Err(shape_err(case, "real model given complex entries"));
        }
        if m.nrows() != size || m.ncols() != size {
            return Err(shape_err(
                case,
                &format!("expected {size}x{size}, got {}x{}", m.nrows(), m.ncols()),
            ));
        }
        if backend == Backend::ComplexSymmetric {
            let asym = (&m - m.transpose()).norm();
            if asym > T::lit(1e-12) * m.norm().max(T::one()) {
                return Err(shape_err(case, "matrix is not symmetric"));
            }
            symmetrize_complex(&mut m);
        }
        Ok(AlgebraElement {
            case: *case,
            entries: Entries::Complex(m),
        })
    }

    pub fn case(&self) -> &CaseDescriptor {
        &self.case
    }

    pub fn entries(&self) -> &Entries<T> {
        &self.entries
    }

    pub fn backend(&self) -> Backend {
        self.case.backend().expect("element exists only for backend cases")
    }

    /// Real coordinates, orthonormal for `Re tr(x y^*)`; length `ambient_dim`.
    pub fn coords(&self) -> Vec<T> {
        let root2 = T::lit(std::f64::consts::SQRT_2);
        let mut out = Vec::with_capacity(self.case.ambient_dim);
        match (&self.entries, self.backend()) {
            (Entries::Real(m), Backend::RealFull) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        out.push(m[(i, j)]);
                    }
                }
            }
            (Entries::Real(m), _) => {
                for i in 0..m.nrows() {
                    for j in (i + 1)..m.ncols() {
                        out.push(m[(i, j)] * root2);
                    }
                }
            }
            (Entries::Complex(m), Backend::ComplexFull) => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        out.push(m[(i, j)].re);
                        out.push(m[(i, j)].im);
                    }
                }
            }
            (Entries::Complex(m), _) => {
                for i in 0..m.nrows() {
                    out.push(m[(i, i)].re);
                    out.push(m[(i, i)].im);
                    for j in (i + 1)..m.ncols() {
                        out.push(m[(i, j)].re * root2);
                        out.push(m[(i, j)].im * root2);
                    }
                }
            }
        }
        out
    }

    pub fn from_coords(case: &CaseDescriptor, c: &[T]) -> Result<Self> {
        let mut x = Self::zeros(case)?;
        x.set_coords(c)?;
        Ok(x)
    }

    /// Overwrites the entries in place from real coordinates.
    pub fn set_coords(&mut self, c: &[T]) -> Result<()> {
        if c.len() != self.case.ambient_dim {
            return Err(shape_err(
                &self.case,
                &format!("expected {} coordinates, got {}", self.case.ambient_dim, c.len()),
            ));
        }
        let inv = T::lit(std::f64::consts::FRAC_1_SQRT_2);
        let backend = self.backend();
        let mut it = c.iter().copied();
        match &mut self.entries {
            Entries::Real(m) if backend == Backend::RealFull => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        m[(i, j)] = it.next().unwrap();
                    }
                }
            }
            Entries::Real(m) => {
                for i in 0..m.nrows() {
                    m[(i, i)] = T::zero();
                    for j in (i + 1)..m.ncols() {
                        let v = it.next().unwrap() * inv;
                        m[(i, j)] = v;
                        m[(j, i)] = -v;
                    }
                }
            }
            Entries::Complex(m) if backend == Backend::ComplexFull => {
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        let re = it.next().unwrap();
                        let im = it.next().unwrap();
                        m[(i, j)] = Complex::new(re, im);
                    }
                }
            }
            Entries::Complex(m) => {
                for i in 0..m.nrows() {
                    let re = it.next().unwrap();
                    let im = it.next().unwrap();
                    m[(i, i)] = Complex::new(re, im);
                    for j in (i + 1)..m.ncols() {
                        let re = it.next().unwrap() * inv;
                        let im = it.next().unwrap() * inv;
                        m[(i, j)] = Complex::new(re, im);
                        m[(j, i)] = Complex::new(re, im);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn norm_squared(&self) -> T {
        match &self.entries {
            Entries::Real(m) => m.norm_squared(),
            Entries::Complex(m) => m.norm_squared(),
        }
    }

    pub fn scale(&self, alpha: T) -> Self {
        let entries = match &self.entries {
            Entries::Real(m) => Entries::Real(m * alpha),
            Entries::Complex(m) => Entries::Complex(m * Complex::new(alpha, T::zero())),
        };
        AlgebraElement {
            case: self.case,
            entries,
        }
    }

    /// Entry (i, j) of the underlying matrix as a complex number.
    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        match &self.entries {
            Entries::Real(m) => Complex::new(m[(i, j)], T::zero()),
            Entries::Complex(m) => m[(i, j)],
        }
    }

    /// `self = sum_i c_i * parts_i`, reusing the allocation.
    pub fn assign_combination(&mut self, parts: &[AlgebraElement<T>], coeffs: &[T]) {
        debug_assert_eq!(parts.len(), coeffs.len());
        match &mut self.entries {
            Entries::Real(out) => {
                out.fill(T::zero());
                for (p, &c) in parts.iter().zip(coeffs) {
                    if let Entries::Real(m) = &p.entries {
                        out.zip_apply(m, |o, v| *o += v * c);
                    }
                }
            }
            Entries::Complex(out) => {
                out.fill(Complex::new(T::zero(), T::zero()));
                for (p, &c) in parts.iter().zip(coeffs) {
                    if let Entries::Complex(m) = &p.entries {
                        out.zip_apply(m, |o, v| *o += v * c);
                    }
                }
            }
        }
    }

    /// Conversion between scalar types, e.g. f64 to f32.
    pub fn cast<U: Scalar>(&self) -> AlgebraElement<U> {
        let entries = match &self.entries {
            Entries::Real(m) => Entries::Real(m.map(|v| U::lit(v.as_f64()))),
            Entries::Complex(m) => Entries::Complex(
                m.map(|v| Complex::new(U::lit(v.re.as_f64()), U::lit(v.im.as_f64()))),
            ),
        };
        AlgebraElement {
            case: self.case,
            entries,
        }
    }
}

impl<T: Scalar> Add for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;

    fn add(self, rhs: Self) -> AlgebraElement<T> {
        assert_eq!(self.case, rhs.case, "adding elements of different cases");
        let entries = match (&self.entries, &rhs.entries) {
            (Entries::Real(a), Entries::Real(b)) => Entries::Real(a + b),
            (Entries::Complex(a), Entries::Complex(b)) => Entries::Complex(a + b),
            _ => unreachable!("same case implies same field"),
        };
        AlgebraElement {
            case: self.case,
            entries,
        }
    }
}

impl<T: Scalar> Sub for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;

    fn sub(self, rhs: Self) -> AlgebraElement<T> {
        self + &rhs.scale(-T::one())
    }
}

impl<T: Scalar> Mul<T> for &AlgebraElement<T> {
    type Output = AlgebraElement<T>;

    fn mul(self, rhs: T) -> AlgebraElement<T> {
        self.scale(rhs)
    }
}

/// Matrix data of a group element of L (or M) in the model.
#[derive(Debug, Clone, PartialEq)]
pub enum GroupFactors<T: Scalar> {
    /// (a, b) acting by `a x b^T` on real matrices.
    RealPair(DMatrix<T>, DMatrix<T>),
    /// (a, b) acting by `a x b^T` on complex matrices.
    ComplexPair(DMatrix<Complex<T>>, DMatrix<Complex<T>>),
    /// l acting by `l x l^T` on complex symmetric matrices.
    Complex(DMatrix<Complex<T>>),
    /// l acting by `l x l^T` on real skew matrices.
    Real(DMatrix<T>),
}

impl<T: Scalar> GroupFactors<T> {
    fn identity(backend: Backend, n: usize) -> Self {
        let size = backend.matrix_size(n);
        match backend {
            Backend::RealFull => {
                GroupFactors::RealPair(DMatrix::identity(size, size), DMatrix::identity(size, size))
            }
            Backend::ComplexFull => GroupFactors::ComplexPair(
                DMatrix::identity(size, size),
                DMatrix::identity(size, size),
            ),
            Backend::ComplexSymmetric => GroupFactors::Complex(DMatrix::identity(size, size)),
            Backend::RealSkew => GroupFactors::Real(DMatrix::identity(size, size)),
        }
    }

    fn fits(&self, backend: Backend, n: usize) -> bool {
        let size = backend.matrix_size(n);
        let sq = |r: usize, c: usize| r == size && c == size;
        match (self, backend) {
            (GroupFactors::RealPair(a, b), Backend::RealFull) => {
                sq(a.nrows(), a.ncols()) && sq(b.nrows(), b.ncols())
            }
            (GroupFactors::ComplexPair(a, b), Backend::ComplexFull) => {
                sq(a.nrows(), a.ncols()) && sq(b.nrows(), b.ncols())
            }
            (GroupFactors::Complex(l), Backend::ComplexSymmetric) => sq(l.nrows(), l.ncols()),
            (GroupFactors::Real(l), Backend::RealSkew) => sq(l.nrows(), l.ncols()),
            _ => false,
        }
    }

    fn apply(&self, x: &Entries<T>) -> Entries<T> {
        match (self, x) {
            (GroupFactors::RealPair(a, b), Entries::Real(m)) => Entries::Real(a * m * b.transpose()),
            (GroupFactors::Real(l), Entries::Real(m)) => {
                let mut out = l * m * l.transpose();
                antisymmetrize_real(&mut out);
                Entries::Real(out)
            }
            (GroupFactors::ComplexPair(a, b), Entries::Complex(m)) => {
                Entries::Complex(a * m * b.transpose())
            }
            (GroupFactors::Complex(l), Entries::Complex(m)) => {
                let mut out = l * m * l.transpose();
                symmetrize_complex(&mut out);
                Entries::Complex(out)
            }
            _ => unreachable!("factor kind is tied to the backend"),
        }
    }

    fn compose(&self, other: &Self) -> Self {
        match (self, other) {
            (GroupFactors::RealPair(a1, b1), GroupFactors::RealPair(a2, b2)) => {
                GroupFactors::RealPair(a1 * a2, b1 * b2)
            }
            (GroupFactors::ComplexPair(a1, b1), GroupFactors::ComplexPair(a2, b2)) => {
                GroupFactors::ComplexPair(a1 * a2, b1 * b2)
            }
            (GroupFactors::Complex(l1), GroupFactors::Complex(l2)) => GroupFactors::Complex(l1 * l2),
            (GroupFactors::Real(l1), GroupFactors::Real(l2)) => GroupFactors::Real(l1 * l2),
            _ => unreachable!("composition within one backend"),
        }
    }

    /// Largest condition number among the factors.
    fn condition(&self) -> T {
        match self {
            GroupFactors::RealPair(a, b) => {
                linalg::condition_number_real(a).max(linalg::condition_number_real(b))
            }
            GroupFactors::ComplexPair(a, b) => {
                linalg::condition_number_complex(a).max(linalg::condition_number_complex(b))
            }
            GroupFactors::Complex(l) => linalg::condition_number_complex(l),
            GroupFactors::Real(l) => linalg::condition_number_real(l),
        }
    }

    fn unitarity_residual(&self) -> T {
        match self {
            GroupFactors::RealPair(a, b) => {
                linalg::unitarity_residual_real(a).max(linalg::unitarity_residual_real(b))
            }
            GroupFactors::ComplexPair(a, b) => {
                linalg::unitarity_residual_complex(a).max(linalg::unitarity_residual_complex(b))
            }
            GroupFactors::Complex(l) => linalg::unitarity_residual_complex(l),
            GroupFactors::Real(l) => linalg::unitarity_residual_real(l),
        }
    }
}

/// Element of the structure group L.
#[derive(Debug, Clone, PartialEq)]
pub struct LeviElement<T: Scalar> {
    case: CaseDescriptor,
    factors: GroupFactors<T>,
}

impl<T: Scalar> LeviElement<T> {
    /// Rejects factors with condition number above `1/sqrt(eps)`.
    pub fn new(case: &CaseDescriptor, factors: GroupFactors<T>) -> Result<Self> {
        let backend = case.require_backend()?;
        if !factors.fits(backend, case.n) {
            return Err(shape_err(case, "group factors do not match the model"));
        }
        let cond = factors.condition();
        let limit = T::one() / T::eps().sqrt();
        if !(cond <= limit) {
            return Err(Error::SingularLevi {
                condition: cond.as_f64(),
            });
        }
        Ok(LeviElement {
            case: *case,
            factors,
        })
    }

    pub fn identity(case: &CaseDescriptor) -> Result<Self> {
        let backend = case.require_backend()?;
        Ok(LeviElement {
            case: *case,
            factors: GroupFactors::identity(backend, case.n),
        })
    }

    pub fn case(&self) -> &CaseDescriptor {
        &self.case
    }

    pub fn factors(&self) -> &GroupFactors<T> {
        &self.factors
    }

    /// Group product `self * other` (acts as `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same_case(&self.case, &other.case)?;
        LeviElement::new(&self.case, self.factors.compose(&other.factors))
    }

    /// Random well-conditioned element `1 + spread * G` per factor.
    pub fn random<R: Rng + ?Sized>(case: &CaseDescriptor, spread: f64, rng: &mut R) -> Result<Self> {
        let backend = case.require_backend()?;
        let size = backend.matrix_size(case.n);
        let s = T::lit(spread);
        let real = |rng: &mut R| {
            DMatrix::<T>::identity(size, size) + linalg::gaussian_real::<T, R>(size, size, rng) * s
        };
        let cplx = |rng: &mut R| {
            DMatrix::<Complex<T>>::identity(size, size)
                + linalg::gaussian_complex::<T, R>(size, size, rng) * Complex::new(s, T::zero())
        };
        let factors = match backend {
            Backend::RealFull => GroupFactors::RealPair(real(rng), real(rng)),
            Backend::ComplexFull => GroupFactors::ComplexPair(cplx(rng), cplx(rng)),
            Backend::ComplexSymmetric => GroupFactors::Complex(cplx(rng)),
            Backend::RealSkew => GroupFactors::Real(real(rng)),
        };
        LeviElement::new(case, factors)
    }
}

impl<T: Scalar> From<CompactElement<T>> for LeviElement<T> {
    fn from(m: CompactElement<T>) -> Self {
        LeviElement {
            case: m.case,
            factors: m.factors,
        }
    }
}

/// Element of M = L ∩ K: orthogonal / unitary factors.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactElement<T: Scalar> {
    case: CaseDescriptor,
    factors: GroupFactors<T>,
}

impl<T: Scalar> CompactElement<T> {
    pub fn new(case: &CaseDescriptor, factors: GroupFactors<T>) -> Result<Self> {
        let backend = case.require_backend()?;
        if !factors.fits(backend, case.n) {
            return Err(shape_err(case, "group factors do not match the model"));
        }
        let residual = factors.unitarity_residual();
        if !(residual <= unitary_tolerance::<T>()) {
            return Err(Error::NotUnitary {
                residual: residual.as_f64(),
            });
        }
        Ok(CompactElement {
            case: *case,
            factors,
        })
    }

    pub fn identity(case: &CaseDescriptor) -> Result<Self> {
        let backend = case.require_backend()?;
        Ok(CompactElement {
            case: *case,
            factors: GroupFactors::identity(backend, case.n),
        })
    }

    pub fn case(&self) -> &CaseDescriptor {
        &self.case
    }

    pub fn factors(&self) -> &GroupFactors<T> {
        &self.factors
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        check_same_case(&self.case, &other.case)?;
        Ok(CompactElement {
            case: self.case,
            factors: self.factors.compose(&other.factors),
        })
    }

    pub fn unitarity_residual(&self) -> T {
        self.factors.unitarity_residual()
    }
}

/// Frame idempotents y_1, ..., y_n.
pub fn frame<T: Scalar>(case: &CaseDescriptor) -> Result<Vec<AlgebraElement<T>>> {
    let backend = case.require_backend()?;
    let size = backend.matrix_size(case.n);
    let mut out = Vec::with_capacity(case.n);
    for i in 0..case.n {
        let el = match backend {
            Backend::RealFull => {
                let mut m = DMatrix::<T>::zeros(size, size);
                m[(i, i)] = T::one();
                AlgebraElement {
                    case: *case,
                    entries: Entries::Real(m),
                }
            }
            Backend::RealSkew => {
                let mut m = DMatrix::<T>::zeros(size, size);
                m[(2 * i, 2 * i + 1)] = T::one();
                m[(2 * i + 1, 2 * i)] = -T::one();
                AlgebraElement {
                    case: *case,
                    entries: Entries::Real(m),
                }
            }
            Backend::ComplexFull | Backend::ComplexSymmetric => {
                let mut m = DMatrix::<Complex<T>>::zeros(size, size);
                m[(i, i)] = Complex::new(T::one(), T::zero());
                AlgebraElement {
                    case: *case,
                    entries: Entries::Complex(m),
                }
            }
        };
        out.push(el);
    }
    Ok(out)
}

/// Images `m . y_1, ..., m . y_k` of the first k frame elements.
pub fn frame_images<T: Scalar>(m: &CompactElement<T>, k: usize) -> Result<Vec<AlgebraElement<T>>> {
    let case = m.case;
    if k > case.n {
        return Err(Error::RankOutOfRange { k, n: case.n });
    }
    let fr = frame::<T>(&case)?;
    Ok(fr
        .iter()
        .take(k)
        .map(|y| AlgebraElement {
            case,
            entries: m.factors.apply(&y.entries),
        })
        .collect())
}

/// `m . z = Ad m (z_1 y_1 + ... + z_k y_k)`.
pub fn orbit_point<T: Scalar>(m: &CompactElement<T>, z: &ConePoint<T>) -> Result<AlgebraElement<T>> {
    let k = z.len();
    if k > m.case.n {
        return Err(shape_err(
            &m.case,
            &format!("cone point of length {k} exceeds rank {}", m.case.n),
        ));
    }
    let parts = frame::<T>(&m.case)?;
    let mut base = AlgebraElement::zeros(&m.case)?;
    base.assign_combination(&parts[..k], z.values());
    Ok(compact_act(m, &base).expect("same case"))
}

pub fn levi_act<T: Scalar>(l: &LeviElement<T>, x: &AlgebraElement<T>) -> Result<AlgebraElement<T>> {
    check_same_case(&l.case, &x.case)?;
    Ok(AlgebraElement {
        case: x.case,
        entries: l.factors.apply(&x.entries),
    })
}

pub fn compact_act<T: Scalar>(
    m: &CompactElement<T>,
    x: &AlgebraElement<T>,
) -> Result<AlgebraElement<T>> {
    check_same_case(&m.case, &x.case)?;
    Ok(AlgebraElement {
        case: x.case,
        entries: m.factors.apply(&x.entries),
    })
}

/// Jordan norm: det for full and symmetric models, Pfaffian for skew.
/// Real models return a zero imaginary part.
pub fn jordan_norm<T: Scalar>(x: &AlgebraElement<T>) -> Complex<T> {
    match (&x.entries, x.backend()) {
        (Entries::Real(m), Backend::RealSkew) => Complex::new(linalg::pfaffian(m), T::zero()),
        (Entries::Real(m), _) => Complex::new(linalg::det_real(m), T::zero()),
        (Entries::Complex(m), _) => linalg::det_complex(m),
    }
}

/// `Re tr(x y^*)` before normalization.
fn raw_trace_pairing<T: Scalar>(x: &Entries<T>, y: &Entries<T>) -> T {
    match (x, y) {
        (Entries::Real(a), Entries::Real(b)) => a.dot(b),
        (Entries::Complex(a), Entries::Complex(b)) => {
            // Re sum a_ij conj(b_ij)
            b.dotc(a).re
        }
        _ => unreachable!("same case implies same field"),
    }
}

/// Normalized bilinear pairing between n and n-bar.
#[derive(Debug, Clone, Copy)]
pub struct Pairing<T: Scalar> {
    case: CaseDescriptor,
    scale: T,
}

impl<T: Scalar> Pairing<T> {
    /// Fixes the scale so that the first frame element pairs to 1 with itself.
    pub fn new(case: &CaseDescriptor) -> Result<Self> {
        let y1 = frame::<T>(case)?.swap_remove(0);
        let raw = raw_trace_pairing(&y1.entries, &y1.entries);
        Ok(Pairing {
            case: *case,
            scale: T::one() / raw,
        })
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn eval(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> Result<T> {
        check_same_case(&self.case, &x.case)?;
        check_same_case(&self.case, &y.case)?;
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub fn eval_unchecked(&self, x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> T {
        raw_trace_pairing(&x.entries, &y.entries) * self.scale
    }
}

pub fn pairing<T: Scalar>(x: &AlgebraElement<T>, y: &AlgebraElement<T>) -> Result<T> {
    Pairing::new(&x.case)?.eval(x, y)
}

/// Descending radial coordinates (z_1, ..., z_n): singular values for the
/// full models, Takagi values for the symmetric model, block magnitudes for
/// the skew model.
pub fn singular_spectrum<T: Scalar>(x: &AlgebraElement<T>) -> Vec<T> {
    match (&x.entries, x.backend()) {
        (Entries::Real(m), Backend::RealSkew) => {
            // singular values of a skew matrix come in equal pairs
            let s = linalg::singular_values_real(m);
            s.chunks(2)
                .map(|p| (p[0] + p[1]) * T::lit(0.5))
                .collect()
        }
        (Entries::Real(m), _) => linalg::singular_values_real(m),
        (Entries::Complex(m), _) => linalg::singular_values_complex(m),
    }
}

/// Number of spectrum entries above `tol * max(z_1, 1)`.
pub fn orbit_rank<T: Scalar>(x: &AlgebraElement<T>, tol: T) -> usize {
    let s = singular_spectrum(x);
    let top = s.first().copied().unwrap_or(T::zero()).max(T::one());
    s.iter().filter(|&&v| v > tol * top).count()
}

/// Leading block of x, viewed in the rank-k Peirce subalgebra.
pub fn peirce_restrict<T: Scalar>(x: &AlgebraElement<T>, k: usize) -> Result<AlgebraElement<T>> {
    let sub = x.case.sub_case(k)?;
    let size = x.backend().matrix_size(k);
    let entries = match &x.entries {
        Entries::Real(m) => Entries::Real(m.view((0, 0), (size, size)).into_owned()),
        Entries::Complex(m) => Entries::Complex(m.view((0, 0), (size, size)).into_owned()),
    };
    Ok(AlgebraElement {
        case: sub,
        entries,
    })
}

/// Zero-padded embedding of a Peirce subalgebra element into the rank-n
/// algebra of the same family.
pub fn peirce_embed<T: Scalar>(
    x: &AlgebraElement<T>,
    ambient: &CaseDescriptor,
) -> Result<AlgebraElement<T>> {
    if ambient.case_id != x.case.case_id || ambient.n < x.case.n {
        return Err(Error::CaseMismatch {
            expected: format!("{} (n >= {})", x.case.case_id, x.case.n),
            found: format!("{} (n={})", ambient.case_id, ambient.n),
        });
    }
    let mut out = AlgebraElement::zeros(ambient)?;
    match (&mut out.entries, &x.entries) {
        (Entries::Real(o), Entries::Real(m)) => {
            o.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m)
        }
        (Entries::Complex(o), Entries::Complex(m)) => {
            o.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m)
        }
        _ => unreachable!("same family implies same field"),
    }
    Ok(out)
}

/// |det| of `x -> l . x` on the real ambient space, closed form per model.
pub fn adjoint_determinant<T: Scalar>(l: &LeviElement<T>) -> T {
    let n = T::lit(l.case.n as f64);
    let two = T::lit(2.0);
    match &l.factors {
        GroupFactors::RealPair(a, b) => {
            (linalg::det_real(a).abs() * linalg::det_real(b).abs()).powf(n)
        }
        GroupFactors::ComplexPair(a, b) => {
            (linalg::det_complex(a).modulus() * linalg::det_complex(b).modulus()).powf(two * n)
        }
        GroupFactors::Complex(m) => linalg::det_complex(m).modulus().powf(two * (n + T::one())),
        GroupFactors::Real(m) => linalg::det_real(m).abs().powf(two * n - T::one()),
    }
}

/// Dense `ambient_dim x ambient_dim` matrix of `x -> l . x` in coordinates.
pub fn adjoint_matrix<T: Scalar>(l: &LeviElement<T>) -> DMatrix<T> {
    let dim = l.case.ambient_dim;
    let mut out = DMatrix::<T>::zeros(dim, dim);
    let mut basis = vec![T::zero(); dim];
    let mut x = AlgebraElement::zeros(&l.case).expect("levi element has a backend");
    for j in 0..dim {
        basis.iter_mut().for_each(|v| *v = T::zero());
        basis[j] = T::one();
        x.set_coords(&basis).expect("dimension matches");
        let y = levi_act(l, &x).expect("same case");
        for (i, v) in y.coords().into_iter().enumerate() {
            out[(i, j)] = v;
        }
    }
    out
}

/// e^nu(l) = adjoint_determinant(l)^(-1/(2r)).
pub fn character_nu<T: Scalar>(l: &LeviElement<T>) -> T {
    let r = T::lit(l.case.r() as f64);
    adjoint_determinant(l).powf(-T::one() / (T::lit(2.0) * r))
}

/// Haar-distributed element of M.
pub fn haar_sample_m<T: Scalar, R: Rng + ?Sized>(
    case: &CaseDescriptor,
    rng: &mut R,
) -> Result<CompactElement<T>> {
    let backend = case.require_backend()?;
    let size = backend.matrix_size(case.n);
    let factors = match backend {
        Backend::RealFull => GroupFactors::RealPair(
            linalg::haar_orthogonal(size, rng),
            linalg::haar_orthogonal(size, rng),
        ),
        Backend::ComplexFull => GroupFactors::ComplexPair(
            linalg::haar_unitary(size, rng),
            linalg::haar_unitary(size, rng),
        ),
        Backend::ComplexSymmetric => GroupFactors::Complex(linalg::haar_unitary(size, rng)),
        Backend::RealSkew => GroupFactors::Real(linalg::haar_orthogonal(size, rng)),
    };
    Ok(CompactElement {
        case: *case,
        factors,
    })
}

/// Compact element realizing the polar decomposition `x = m . z` together
/// with z (descending, length n). Non-unique when z has repeated or zero
/// entries; any valid m is returned.
pub fn polar_decomposition<T: Scalar>(
    x: &AlgebraElement<T>,
) -> Result<(CompactElement<T>, Vec<T>)> {
    let case = x.case;
    match (&x.entries, x.backend()) {
        (Entries::Real(m), Backend::RealFull) => {
            let svd = m.clone().svd(true, true);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let mut idx: Vec<usize> = (0..case.n).collect();
            idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
            let a = DMatrix::from_fn(case.n, case.n, |i, j| u[(i, idx[j])]);
            let b = DMatrix::from_fn(case.n, case.n, |i, j| vt[(idx[j], i)]);
            let z = idx.iter().map(|&i| svd.singular_values[i]).collect();
            Ok((CompactElement::new(&case, GroupFactors::RealPair(a, b))?, z))
        }
        (Entries::Complex(m), Backend::ComplexFull) => {
            let svd = m.clone().svd(true, true);
            let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let mut idx: Vec<usize> = (0..case.n).collect();
            idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
            // x = u s v^*, and the model acts by a x b^T, so b = conj(v)
            let a = DMatrix::from_fn(case.n, case.n, |i, j| u[(i, idx[j])]);
            let b = DMatrix::from_fn(case.n, case.n, |i, j| vt[(idx[j], i)]);
            let z = idx.iter().map(|&i| svd.singular_values[i]).collect();
            Ok((CompactElement::new(&case, GroupFactors::ComplexPair(a, b))?, z))
        }
        (Entries::Complex(m), _) => {
            let (u, z) = linalg::takagi(m);
            Ok((CompactElement::new(&case, GroupFactors::Complex(u))?, z))
        }
        (Entries::Real(m), _) => {
            let (q, z) = linalg::skew_canonical(m);
            Ok((CompactElement::new(&case, GroupFactors::Real(q))?, z))
        }
    }
}
