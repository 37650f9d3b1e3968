//! Dense complex linear algebra for the small Hermitian problems in this crate.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest matrix the Jacobi solver accepts.
pub const MAX_EIG_DIM: usize = 64;
/// Smallest eigenvalue accepted by [`inv_sqrt_psd`].
pub const EPS_PSD: f64 = 1e-12;

const HERMITIAN_TOL: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;
const JACOBI_TOL: f64 = 1e-13;
// sigma_min >= 1e-8 for the polar map
const POLAR_GRAM_MIN: f64 = 1e-16;

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// Stacks equal-length column vectors side by side.
    pub fn from_columns(columns: &[Vec<C64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: c.len() });
            }
            for (i, &v) in c.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, values: &[C64]) {
        for (i, &v) in values.iter().enumerate() {
            self[(i, j)] = v;
        }
    }

    /// Columns `start..start + count` as a new matrix.
    pub fn columns(&self, start: usize, count: usize) -> Self {
        Self::from_fn(self.rows, count, |i, j| self[(i, start + j)])
    }

    /// Concatenates matrices with equal row counts.
    pub fn hstack(parts: &[&ComplexMatrix]) -> Result<Self> {
        let rows = parts.first().map_or(0, |m| m.rows);
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut out = Self::zeros(rows, cols);
        let mut offset = 0;
        for m in parts {
            if m.rows != rows {
                return Err(Error::DimensionMismatch { expected: rows, found: m.rows });
            }
            for i in 0..rows {
                for j in 0..m.cols {
                    out[(i, offset + j)] = m[(i, j)];
                }
            }
            offset += m.cols;
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * c).collect(),
        }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self† · other` without forming the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "adjoint_mul shape mismatch");
        let mut out = Self::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = &self.data[k * self.cols..(k + 1) * self.cols];
            let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
            for (i, &a) in a_row.iter().enumerate() {
                let ac = a.conj();
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(b_row) {
                    *d += ac * b;
                }
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `‖M − M†‖_F`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut acc = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                acc += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol * self.frobenius_norm().max(1.0)
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `‖M†M − I‖_F`, the isometry defect of a frame.
    pub fn orthonormality_defect(&self) -> f64 {
        (&self.adjoint_mul(self) - &Self::identity(self.cols)).frobenius_norm()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `M · M†`, the projector onto the column span of an isometry.
    pub fn projector(&self) -> Self {
        self.matmul(&self.adjoint())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let v = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", v.re, v.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Eigendecomposition of a Hermitian matrix with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEig {
    /// `V · diag(f(λ)) · V†`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| self.vectors[(i, j)] * f(self.values[j]));
        scaled.matmul(&self.vectors.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices up to [`MAX_EIG_DIM`].
pub fn hermitian_eig(m: &ComplexMatrix) -> Result<HermitianEig> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    let n = m.rows;
    if n > MAX_EIG_DIM {
        return Err(Error::DimensionCap { dim: n, cap: MAX_EIG_DIM });
    }
    let norm = m.frobenius_norm();
    if m.hermitian_defect() > HERMITIAN_TOL * norm.max(1.0) {
        return Err(Error::NotHermitian { defect: m.hermitian_defect() });
    }
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let threshold = JACOBI_TOL * norm;

    let off_norm = |a: &ComplexMatrix| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += a[(i, j)].norm_sqr();
                }
            }
        }
        acc.sqrt()
    };

    let mut converged = off_norm(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let h = a[(p, q)];
                let g = h.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = h / g;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // U = diag(1, conj(phase)) · [[c, s], [-s, c]]
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * u_pp + akq * u_qp;
                    a[(k, q)] = akp * u_pq + akq * u_qq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * u_pp + vkq * u_qp;
                    v[(k, q)] = vkp * u_pq + vkq * u_qq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = u_pp.conj() * apk + u_qp.conj() * aqk;
                    a[(q, k)] = u_pq.conj() * apk + u_qq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
            }
        }
        sweeps += 1;
        converged = off_norm(&a) <= threshold;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// `M^{-1/2}` for a Hermitian positive definite matrix.
pub fn inv_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eig(m)?;
    let min = eig.values.first().copied().unwrap_or(1.0);
    if min < EPS_PSD {
        return Err(Error::NearSingular { min_eigenvalue: min });
    }
    Ok(eig.apply_fn(|x| 1.0 / x.sqrt()))
}

/// Polar factor of a full-rank `θ`, kept together with the Gram spectrum
/// needed to differentiate through it.
#[derive(Clone, Debug)]
pub struct Polar {
    pub psi: ComplexMatrix,
    pub inv_sqrt: ComplexMatrix,
    pub gram_eig: HermitianEig,
}

pub fn polar(theta: &ComplexMatrix) -> Result<Polar> {
    let gram = theta.adjoint_mul(theta);
    let gram_eig = hermitian_eig(&gram)?;
    let min = gram_eig.values.first().copied().unwrap_or(1.0);
    if !(min >= POLAR_GRAM_MIN) {
        return Err(Error::RankDeficient { sigma_min: min.max(0.0).sqrt() });
    }
    let inv_sqrt = gram_eig.apply_fn(|x| 1.0 / x.sqrt());
    let psi = theta.matmul(&inv_sqrt);
    Ok(Polar { psi, inv_sqrt, gram_eig })
}

/// `θ (θ†θ)^{-1/2}`.
pub fn polar_orthonormalize(theta: &ComplexMatrix) -> Result<ComplexMatrix> {
    polar(theta).map(|p| p.psi)
}

/// Orthonormal basis for the null space of a real matrix, by reduced row
/// echelon form followed by Gram-Schmidt. Used where dimensions exceed
/// the eigensolver cap.
pub fn real_null_space(rows: usize, cols: usize, a: &[f64], tol: f64) -> Vec<Vec<f64>> {
    let mut m = a.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (best, best_abs) = (r..rows)
            .map(|i| (i, m[i * cols + c].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_abs <= tol {
            continue;
        }
        for j in 0..cols {
            m.swap(r * cols + j, best * cols + j);
        }
        let p = m[r * cols + c];
        for j in 0..cols {
            m[r * cols + j] /= p;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i * cols + c];
                if f != 0.0 {
                    for j in 0..cols {
                        m[i * cols + j] -= f * m[r * cols + j];
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &f in &free {
        let mut v = vec![0.0; cols];
        v[f] = 1.0;
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[row * cols + f];
        }
        for b in &basis {
            let d: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= d * bi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > tol {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        random_matrix(n, n, rng).hermitian_part()
    }

    #[test]
    fn diagonal_input_sorted() {
        let m = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let eig = hermitian_eig(&m).unwrap();
        assert_eq!(eig.values, vec![-1.0, 1.0]);
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [1, 2, 3, 5, 8, 17, 32] {
            let m = random_hermitian(n, &mut rng);
            let eig = hermitian_eig(&m).unwrap();
            let err = (&m - &eig.reconstruct()).frobenius_norm();
            assert!(err <= 1e-10 * m.frobenius_norm().max(1.0), "n={n} err={err}");
            assert!(eig.vectors.orthonormality_defect() < 1e-12);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn two_by_two_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = random_hermitian(2, &mut rng);
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = m[(0, 1)].norm_sqr();
            let disc = ((a - d) * (a - d) / 4.0 + b).sqrt();
            let eig = hermitian_eig(&m).unwrap();
            assert!((eig.values[0] - ((a + d) / 2.0 - disc)).abs() < 1e-10);
            assert!((eig.values[1] - ((a + d) / 2.0 + disc)).abs() < 1e-10);
        }
    }

    #[test]
    fn three_by_three_are_characteristic_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random_hermitian(3, &mut rng);
            let eig = hermitian_eig(&m).unwrap();
            for &lambda in &eig.values {
                // det(M - λI) by cofactor expansion
                let s = &m - &ComplexMatrix::identity(3).scale_real(lambda);
                let det = s[(0, 0)] * (s[(1, 1)] * s[(2, 2)] - s[(1, 2)] * s[(2, 1)])
                    - s[(0, 1)] * (s[(1, 0)] * s[(2, 2)] - s[(1, 2)] * s[(2, 0)])
                    + s[(0, 2)] * (s[(1, 0)] * s[(2, 1)] - s[(1, 1)] * s[(2, 0)]);
                assert!(det.norm() < 1e-10, "det {det}");
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(hermitian_eig(&ComplexMatrix::zeros(2, 3)), Err(Error::NotSquare { .. })));
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
        assert!(matches!(
            hermitian_eig(&ComplexMatrix::identity(65)),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn inverse_square_root() {
        let id = ComplexMatrix::identity(3);
        assert!((&inv_sqrt_psd(&id).unwrap() - &id).frobenius_norm() < 1e-14);
        let r = inv_sqrt_psd(&ComplexMatrix::from_real_diagonal(&[4.0, 1.0])).unwrap();
        assert!((&r - &ComplexMatrix::from_real_diagonal(&[0.5, 1.0])).frobenius_norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_matrix(6, 6, &mut rng);
        let m = a.adjoint_mul(&a);
        let r = inv_sqrt_psd(&m).unwrap();
        let check = r.matmul(&m).matmul(&r);
        assert!((&check - &ComplexMatrix::identity(6)).frobenius_norm() < 1e-10);

        let singular = ComplexMatrix::from_real_diagonal(&[1.0, 0.0]);
        assert!(matches!(inv_sqrt_psd(&singular), Err(Error::NearSingular { .. })));
    }

    #[test]
    fn polar_fixed_point_and_scale() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let iso = polar_orthonormalize(&random_matrix(32, 2, &mut rng)).unwrap();
        assert!(iso.orthonormality_defect() < 1e-10);
        assert!((&polar_orthonormalize(&iso).unwrap() - &iso).frobenius_norm() < 1e-12);
        let scaled = iso.scale_real(3.0);
        assert!((&polar_orthonormalize(&scaled).unwrap() - &iso).frobenius_norm() < 1e-12);
        let mut flat = ComplexMatrix::zeros(4, 2);
        flat[(0, 0)] = ONE;
        flat[(0, 1)] = ONE;
        assert!(matches!(polar_orthonormalize(&flat), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn null_space_of_small_matrix() {
        // x + y + z = 0
        let basis = real_null_space(1, 3, &[1.0, 1.0, 1.0], 1e-12);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(v.iter().sum::<f64>().abs() < 1e-12);
        }
    }
}
