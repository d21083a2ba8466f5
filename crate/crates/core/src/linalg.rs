//! Small dense complex matrices.
//!
//! Codewords are at most 8×8 and channel matrices at most 8×16, so everything
//! here is dense, row-major and allocation-light. Eigenvalues of Hermitian
//! products are found with cyclic complex Jacobi sweeps, which are
//! unconditionally stable at these sizes.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, IndexMut, Mul, Sub};

/// Maximum number of Jacobi sweeps before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative off-diagonal mass at which a Jacobi iteration is converged.
pub const JACOBI_TOLERANCE: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(CMatrix {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    /// Real matrix from row-major `f64` entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        CMatrix {
            rows,
            cols,
            data: entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Row-major entries, mutable.
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, k: Complex64) -> Self {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(Complex64::new(k, 0.0))
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &CMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "vstack of {}x{} and {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(CMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// Splits off the first `k` rows.
    pub fn split_rows(&self, k: usize) -> (CMatrix, CMatrix) {
        assert!(k <= self.rows);
        let (top, bottom) = self.data.split_at(k * self.cols);
        (
            CMatrix {
                rows: k,
                cols: self.cols,
                data: top.to_vec(),
            },
            CMatrix {
                rows: self.rows - k,
                cols: self.cols,
                data: bottom.to_vec(),
            },
        )
    }

    pub fn mat_mul(&self, other: &CMatrix) -> Result<CMatrix> {
        mat_mul(self, other)
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn determinant(&self) -> Result<Complex64> {
        determinant(self)
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        singular_values(self)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        is_unitary(self, tol)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

fn zip_with(a: &CMatrix, b: &CMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> CMatrix {
    assert!(
        a.rows == b.rows && a.cols == b.cols,
        "elementwise op on {}x{} and {}x{}",
        a.rows,
        a.cols,
        b.rows,
        b.cols
    );
    CMatrix {
        rows: a.rows,
        cols: a.cols,
        data: a.data.iter().zip(&b.data).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        zip_with(self, rhs, |x, y| x + y)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        zip_with(self, rhs, |x, y| x - y)
    }
}

/// Panics on dimension mismatch; use [`mat_mul`] for the checked version.
impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        mat_mul(self, rhs).expect("matrix product dimension mismatch")
    }
}

pub fn mat_mul(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "product of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            if aik.re == 0.0 && aik.im == 0.0 {
                continue;
            }
            let brow = b.row(k);
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, &bkj) in orow.iter_mut().zip(brow) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

pub fn frobenius_norm(a: &CMatrix) -> f64 {
    a.frobenius_norm_sqr().sqrt()
}

/// Determinant by partial-pivot elimination (closed form for side 2).
pub fn determinant(a: &CMatrix) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "determinant of {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    match n {
        0 => return Ok(Complex64::new(1.0, 0.0)),
        1 => return Ok(a[(0, 0)]),
        2 => return Ok(a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)]),
        _ => {}
    }
    let mut m = a.data.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x * n + col].norm().total_cmp(&m[y * n + col].norm()))
            .unwrap();
        let p = m[pivot * n + col];
        if p.norm() == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if pivot != col {
            for j in 0..n {
                m.swap(col * n + j, pivot * n + j);
            }
            det = -det;
        }
        det *= p;
        for i in col + 1..n {
            let factor = m[i * n + col] / p;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[col * n + j];
                m[i * n + j] -= factor * v;
            }
        }
    }
    Ok(det)
}

/// Eigenvalues of a Hermitian matrix in descending order.
///
/// Only the upper triangle and the real part of the diagonal are trusted.
pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues of {}x{}",
            a.rows, a.cols
        )));
    }
    let n = a.rows;
    if n == 2 {
        let (p, q, b) = (a[(0, 0)].re, a[(1, 1)].re, a[(0, 1)]);
        let mid = 0.5 * (p + q);
        let rad = (0.5 * (p - q)).hypot(b.norm());
        return Ok(vec![mid + rad, mid - rad]);
    }
    let mut m = CMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => a[(i, j)],
        std::cmp::Ordering::Equal => Complex64::new(a[(i, i)].re, 0.0),
        std::cmp::Ordering::Greater => a[(j, i)].conj(),
    });
    let total = m.frobenius_norm();
    let off_mass = |m: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let threshold = JACOBI_TOLERANCE * total.max(f64::MIN_POSITIVE);

    let mut sweeps = 0;
    while off_mass(&m) > threshold {
        if sweeps == MAX_JACOBI_SWEEPS {
            return Err(Error::NoConvergence(MAX_JACOBI_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let beta = m[(p, q)];
                let mag = beta.norm();
                if mag == 0.0 {
                    continue;
                }
                let alpha = m[(p, p)].re;
                let gamma = m[(q, q)].re;
                // U = [[c, -s e^{iφ}], [s e^{-iφ}, c]] zeroes entry (p, q) of U* A U
                let phase = beta / mag;
                let theta = 0.5 * (2.0 * mag).atan2(alpha - gamma);
                let (s, c) = theta.sin_cos();
                let u_pp = Complex64::new(c, 0.0);
                let u_pq = -phase * s;
                let u_qp = phase.conj() * s;
                let u_qq = Complex64::new(c, 0.0);
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * u_pp + akq * u_qp;
                    m[(k, q)] = akp * u_pq + akq * u_qq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    m[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

/// Singular values in descending order, as square roots of the eigenvalues of A·A*.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    let gram = if a.rows <= a.cols {
        mat_mul(a, &a.adjoint())?
    } else {
        mat_mul(&a.adjoint(), a)?
    };
    Ok(hermitian_eigenvalues(&gram)?
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect())
}

/// True iff ‖A*·A − I‖_F ≤ tol. Non-square input is never unitary.
pub fn is_unitary(a: &CMatrix, tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let n = a.rows;
    let mut err = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..n {
                acc += a[(k, i)].conj() * a[(k, j)];
            }
            if i == j {
                acc -= 1.0;
            }
            err += acc.norm_sqr();
        }
    }
    err.sqrt() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    fn su2(a: Complex64, b: Complex64) -> CMatrix {
        CMatrix::from_rows(&[vec![a, b], vec![-b.conj(), a.conj()]]).unwrap()
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_matrix(&mut rng, 2, 2);
        assert_eq!(mat_mul(&CMatrix::identity(2), &x).unwrap(), x);
    }

    #[test]
    fn imaginary_unit_squares_to_minus_one() {
        let i2 = CMatrix::diag(&[c(0.0, 1.0), c(0.0, 1.0)]);
        let p = &i2 * &i2;
        assert_eq!(p, CMatrix::diag(&[c(-1.0, 0.0), c(-1.0, 0.0)]));
    }

    #[test]
    fn unitary_inverse_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 2, 2);
            let (x, y, z, w): (f64, f64, f64, f64) = (
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            let norm = (x * x + y * y + z * z + w * w).sqrt();
            let b = su2(c(x / norm, y / norm), c(z / norm, w / norm));
            let back = &(&a * &b) * &b.adjoint();
            assert!((&back - &a).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn product_dimension_mismatch() {
        let a = CMatrix::zeros(2, 3);
        let b = CMatrix::zeros(2, 3);
        assert!(matches!(mat_mul(&a, &b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn frobenius_norms() {
        assert_eq!(CMatrix::zeros(4, 4).frobenius_norm(), 0.0);
        assert!((CMatrix::identity(2).frobenius_norm() - 2f64.sqrt()).abs() < 1e-15);
        // a unitary 8x8: a signed permutation with phases
        let u = CMatrix::from_fn(8, 8, |i, j| {
            if j == (i * 3) % 8 {
                Complex64::from_polar(1.0, i as f64)
            } else {
                c(0.0, 0.0)
            }
        });
        assert!(u.is_unitary(1e-12));
        assert!((u.frobenius_norm() - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn determinants() {
        assert!((determinant(&CMatrix::identity(4)).unwrap() - 1.0).norm() < 1e-15);
        let a = Complex64::from_polar(0.6, 0.4);
        let b = Complex64::from_polar(0.8, -1.3);
        assert!((determinant(&su2(a, b)).unwrap() - 1.0).norm() < 1e-15);
        assert!(matches!(
            determinant(&CMatrix::zeros(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
        let singular = CMatrix::from_real(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 1.0, 0.0, 1.0]);
        assert!(determinant(&singular).unwrap().norm() < 1e-12);
    }

    #[test]
    fn determinant_matches_cofactor_expansion() {
        fn cofactor_det(m: &CMatrix) -> Complex64 {
            let n = m.rows();
            if n == 1 {
                return m[(0, 0)];
            }
            let mut acc = c(0.0, 0.0);
            for j in 0..n {
                let minor = CMatrix::from_fn(n - 1, n - 1, |r, s| {
                    m[(r + 1, if s < j { s } else { s + 1 })]
                });
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += m[(0, j)] * cofactor_det(&minor) * sign;
            }
            acc
        }
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [2, 3, 4, 5] {
            let m = random_matrix(&mut rng, n, n);
            let d = determinant(&m).unwrap();
            assert!((d - cofactor_det(&m)).norm() < 1e-12 * (1.0 + d.norm()));
        }
    }

    #[test]
    fn singular_values_simple() {
        let sv = singular_values(&CMatrix::identity(2)).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-15 && (sv[1] - 1.0).abs() < 1e-15);
        let sv = singular_values(&CMatrix::diag(&[c(3.0, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(sv, vec![3.0, 0.0]);
    }

    #[test]
    fn singular_values_of_rectangular() {
        let m = CMatrix::from_real(2, 3, &[3.0, 0.0, 0.0, 0.0, 0.0, 4.0]);
        let sv = singular_values(&m).unwrap();
        assert!((sv[0] - 4.0).abs() < 1e-12 && (sv[1] - 3.0).abs() < 1e-12);
        let sv_t = singular_values(&m.adjoint()).unwrap();
        assert_eq!(sv.len(), sv_t.len());
    }

    #[test]
    fn unitarity() {
        assert!(CMatrix::identity(8).is_unitary(1e-12));
        assert!(!CMatrix::identity(2).scale_real(2.0).is_unitary(1e-12));
        assert!(!CMatrix::zeros(2, 3).is_unitary(1e-12));
    }

    #[test]
    fn stacking_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_matrix(&mut rng, 2, 3);
        let b = random_matrix(&mut rng, 4, 3);
        let s = a.vstack(&b).unwrap();
        let (top, bottom) = s.split_rows(2);
        assert_eq!(top, a);
        assert_eq!(bottom, b);
        assert!(a.vstack(&CMatrix::zeros(1, 2)).is_err());
    }
}
