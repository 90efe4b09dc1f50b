//! Dense helpers the models need beyond what nalgebra ships: Pfaffian,
//! Takagi factorization, skew canonical form, Haar-distributed QR.

use nalgebra::{Complex, ComplexField, DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::Scalar;

/// Pfaffian of a real skew-symmetric matrix by Parlett-Reid style
/// elimination with partial pivoting. Odd sizes give zero.
pub fn pfaffian<T: Scalar>(x: &DMatrix<T>) -> T {
    let n = x.nrows();
    assert_eq!(n, x.ncols(), "pfaffian of a non-square matrix");
    if n % 2 == 1 {
        return T::zero();
    }
    let mut a = x.clone();
    let mut pf = T::one();
    let mut k = 0;
    while k + 1 < n {
        // pivot: largest entry in column k below the diagonal
        let mut kp = k + 1;
        let mut best = a[(k + 1, k)].abs();
        for i in (k + 2)..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        if a[(k + 1, k)] == T::zero() {
            return T::zero();
        }
        let pivot = a[(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<T> = ((k + 2)..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<T> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in ((k + 2)..n).enumerate() {
                for (jj, j) in ((k + 2)..n).enumerate() {
                    let upd = tau[ii] * col[jj] - col[ii] * tau[jj];
                    a[(i, j)] += upd;
                }
            }
        }
        k += 2;
    }
    pf
}

pub fn det_real<T: Scalar>(x: &DMatrix<T>) -> T {
    if x.nrows() == 0 {
        return T::one();
    }
    x.clone().lu().determinant()
}

pub fn det_complex<T: Scalar>(x: &DMatrix<Complex<T>>) -> Complex<T> {
    if x.nrows() == 0 {
        return Complex::new(T::one(), T::zero());
    }
    x.clone().lu().determinant()
}

/// Descending singular values.
pub fn singular_values_real<T: Scalar>(x: &DMatrix<T>) -> Vec<T> {
    let mut s: Vec<T> = x.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn singular_values_complex<T: Scalar>(x: &DMatrix<Complex<T>>) -> Vec<T> {
    let mut s: Vec<T> = x.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

pub fn condition_number_real<T: Scalar>(x: &DMatrix<T>) -> T {
    let s = singular_values_real(x);
    ratio_cond(&s)
}

pub fn condition_number_complex<T: Scalar>(x: &DMatrix<Complex<T>>) -> T {
    let s = singular_values_complex(x);
    ratio_cond(&s)
}

fn ratio_cond<T: Scalar>(s: &[T]) -> T {
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > T::zero() => hi / lo,
        _ => T::max_value().unwrap_or_else(|| T::lit(f64::MAX)),
    }
}

pub fn gaussian_real<T: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<T> {
    DMatrix::from_fn(rows, cols, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

pub fn gaussian_complex<T: Scalar, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> DMatrix<Complex<T>> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex::new(T::lit(re * h), T::lit(im * h))
    })
}

/// Haar-distributed orthogonal matrix: QR of a Ginibre matrix with the
/// signs of diag(R) moved into Q.
pub fn haar_orthogonal<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<T> {
    let g = gaussian_real::<T, R>(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Haar-distributed unitary matrix, phases of diag(R) moved into Q.
pub fn haar_unitary<T: Scalar, R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<Complex<T>> {
    let g = gaussian_complex::<T, R>(n, n, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let rjj = r[(j, j)];
        let mag = rjj.modulus();
        if mag > T::zero() {
            let phase = rjj / Complex::new(mag, T::zero());
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// max |m^* m - I| entry.
pub fn unitarity_residual_real<T: Scalar>(m: &DMatrix<T>) -> T {
    let p = m.transpose() * m;
    let mut worst = T::zero();
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((p[(i, j)] - target).abs());
        }
    }
    worst
}

pub fn unitarity_residual_complex<T: Scalar>(m: &DMatrix<Complex<T>>) -> T {
    let p = m.adjoint() * m;
    let mut worst = T::zero();
    for i in 0..p.nrows() {
        for j in 0..p.ncols() {
            let target = if i == j { T::one() } else { T::zero() };
            worst = worst.max((p[(i, j)] - Complex::new(target, T::zero())).modulus());
        }
    }
    worst
}

/// Takagi factorization `x = u diag(sigma) u^T` of a complex symmetric
/// matrix, with `u` unitary and `sigma` descending.
///
/// Uses the real symmetric eigenproblem of `[[Re x, Im x], [Im x, -Re x]]`,
/// whose spectrum is `{+sigma_i, -sigma_i}`; eigenvectors `[p; q]` for the
/// positive half give Takagi vectors `p + i q`. Columns belonging to zero
/// singular values are completed to a unitary basis.
pub fn takagi<T: Scalar>(x: &DMatrix<Complex<T>>) -> (DMatrix<Complex<T>>, Vec<T>) {
    let n = x.nrows();
    let mut big = DMatrix::<T>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let b = x[(i, j)].re;
            let c = x[(i, j)].im;
            big[(i, j)] = b;
            big[(i, j + n)] = c;
            big[(i + n, j)] = c;
            big[(i + n, j + n)] = -b;
        }
    }
    let eig = SymmetricEigen::new(big);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let scale = eig
        .eigenvalues
        .iter()
        .fold(T::zero(), |m, v| m.max(v.abs()))
        .max(T::one());
    let zero_tol = scale * T::eps() * T::lit(1e3);

    let mut cols: Vec<DVector<Complex<T>>> = Vec::with_capacity(n);
    let mut sigma = Vec::with_capacity(n);
    for &idx in order.iter() {
        if cols.len() == n {
            break;
        }
        let lam = eig.eigenvalues[idx];
        if lam <= zero_tol {
            break;
        }
        let v = eig.eigenvectors.column(idx);
        let u = DVector::from_fn(n, |i, _| Complex::new(v[i], v[i + n]));
        cols.push(u);
        sigma.push(lam);
    }
    // complete with an orthonormal basis of the complement
    let mut e = 0;
    while cols.len() < n && e < n {
        let mut cand = DVector::<Complex<T>>::zeros(n);
        cand[e] = Complex::new(T::one(), T::zero());
        for c in &cols {
            let proj = c.dotc(&cand);
            cand -= c * proj;
        }
        let nrm = cand.norm();
        if nrm > T::lit(1e-6) {
            cols.push(cand.unscale(nrm));
            sigma.push(T::zero());
        }
        e += 1;
    }
    let u = DMatrix::from_columns(&cols);
    (u, sigma)
}

/// Canonical form `x = q (z_1 J + ... + z_n J) q^T` of a real 2n x 2n
/// skew-symmetric matrix via its real Schur decomposition; `z` descending.
pub fn skew_canonical<T: Scalar>(x: &DMatrix<T>) -> (DMatrix<T>, Vec<T>) {
    let size = x.nrows();
    let n = size / 2;
    let (mut q, t) = x.clone().schur().unpack();
    // Walk the quasi-triangular factor and collect 2x2 blocks.
    let mut blocks: Vec<(usize, T)> = Vec::with_capacity(n);
    let mut singles: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < size {
        if i + 1 < size && t[(i + 1, i)].abs() > T::zero() {
            let b = t[(i, i + 1)];
            let c = t[(i + 1, i)];
            let z = (-(b * c)).max(T::zero()).sqrt();
            if b < T::zero() {
                // flip orientation so the block reads +z J
                q.column_mut(i + 1).neg_mut();
            }
            blocks.push((i, z));
            i += 2;
        } else {
            singles.push(i);
            i += 1;
        }
    }
    // zero eigenvalues come as 1x1 blocks; pair them up
    for pair in singles.chunks(2) {
        if pair.len() == 2 {
            blocks.push((usize::MAX, T::zero()));
        }
    }
    let mut pairs: Vec<(Vec<usize>, T)> = Vec::with_capacity(n);
    let mut single_iter = singles.chunks(2);
    for (start, z) in blocks {
        if start == usize::MAX {
            let p = single_iter.next().expect("paired singles");
            pairs.push((p.to_vec(), z));
        } else {
            pairs.push((vec![start, start + 1], z));
        }
    }
    pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = DMatrix::<T>::zeros(size, size);
    let mut z = Vec::with_capacity(n);
    for (slot, (cols, val)) in pairs.iter().enumerate() {
        out.set_column(2 * slot, &q.column(cols[0]));
        out.set_column(2 * slot + 1, &q.column(cols[1]));
        z.push(*val);
    }
    (out, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let g = gaussian_real::<f64, _>(n, n, rng);
        &g - g.transpose()
    }

    #[test]
    fn pfaffian_small_cases() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, -3.0, 0.0]);
        assert_eq!(pfaffian(&j), 3.0);
        // pf of 4x4 = a12 a34 - a13 a24 + a14 a23
        let (a12, a13, a14, a23, a24, a34) = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0);
        let m = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, a12, a13, a14, -a12, 0.0, a23, a24, -a13, -a23, 0.0, a34, -a14, -a24, -a34,
                0.0,
            ],
        );
        let expect = a12 * a34 - a13 * a24 + a14 * a23;
        assert!((pfaffian(&m) - expect).abs() < 1e-12);
        assert_eq!(pfaffian(&DMatrix::<f64>::zeros(3, 3)), 0.0);
    }

    #[test]
    fn pfaffian_squares_to_determinant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for size in [2, 4, 6, 8] {
            let a = random_skew(size, &mut rng);
            let pf = pfaffian(&a);
            let det = det_real(&a);
            assert!((pf * pf - det).abs() < 1e-9 * det.abs().max(1.0), "size {size}");
        }
    }

    #[test]
    fn pfaffian_congruence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_skew(6, &mut rng);
        let l = gaussian_real::<f64, _>(6, 6, &mut rng);
        let lhs = pfaffian(&(&l * &a * l.transpose()));
        let rhs = det_real(&l) * pfaffian(&a);
        assert!((lhs - rhs).abs() < 1e-9 * rhs.abs().max(1.0));
    }

    #[test]
    fn haar_factors_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let o = haar_orthogonal::<f64, _>(5, &mut rng);
        assert!(unitarity_residual_real(&o) < 1e-12);
        let u = haar_unitary::<f64, _>(4, &mut rng);
        assert!(unitarity_residual_complex(&u) < 1e-12);
    }

    #[test]
    fn takagi_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            let g = gaussian_complex::<f64, _>(n, n, &mut rng);
            let x = &g + g.transpose();
            let (u, s) = takagi(&x);
            assert!(unitarity_residual_complex(&u) < 1e-10);
            let d = DMatrix::from_diagonal(&DVector::from_iterator(
                n,
                s.iter().map(|&v| Complex::new(v, 0.0)),
            ));
            let back = &u * d * u.transpose();
            assert!((back - &x).norm() < 1e-9 * x.norm());
            let sv = singular_values_complex(&x);
            for (a, b) in s.iter().zip(sv.iter()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn takagi_rank_deficient() {
        let u = DVector::from_vec(vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
        let x = &u * u.transpose() * Complex::new(2.0, 0.0);
        let (w, s) = takagi(&x);
        assert!((s[0] - 2.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
        assert!(unitarity_residual_complex(&w) < 1e-10);
    }

    #[test]
    fn skew_canonical_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for n in 1..=3 {
            let a = random_skew(2 * n, &mut rng);
            let (q, z) = skew_canonical(&a);
            assert!(unitarity_residual_real(&q) < 1e-10);
            let mut canon = DMatrix::<f64>::zeros(2 * n, 2 * n);
            for (i, zi) in z.iter().enumerate() {
                canon[(2 * i, 2 * i + 1)] = *zi;
                canon[(2 * i + 1, 2 * i)] = -*zi;
            }
            let back = &q * canon * q.transpose();
            assert!((back - &a).norm() < 1e-9 * a.norm(), "n={n}");
            assert!(z.windows(2).all(|w| w[0] >= w[1]));
        }
    }
}
