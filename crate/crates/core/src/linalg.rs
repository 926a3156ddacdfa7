//! Small dense square matrices and the symmetric eigen-solver they need.
//!
//! Dimensions here are tiny (the process dimension, rarely above 8), so a
//! row-major `Vec` and cyclic Jacobi rotations are both simpler and more
//! accurate than pulling in a general linear-algebra crate.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues above `-PSD_CLAMP * lambda_max` are treated as rounding noise.
pub const PSD_CLAMP: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::zero(); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, T::one())
    }

    pub fn scalar(dim: usize, value: T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = value;
        }
        m
    }

    pub fn diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a square.
    pub fn from_row_major(dim: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self { dim, data: entries })
    }

    pub fn outer(v: &[T]) -> Self {
        let d = v.len();
        let mut m = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = v[i] * v[j];
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * s).collect(),
        }
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self[(i, j)] == T::zero()))
    }

    pub fn diag(&self) -> Vec<T> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        debug_assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).fold(T::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// `out = self * v` without allocating.
    #[inline]
    pub fn mul_vec_into(&self, v: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.data[i * self.dim..(i + 1) * self.dim];
            *o = row.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        }
    }

    /// Quadratic form `v' M v`.
    pub fn quad_form(&self, v: &[T]) -> T {
        let mv = self.mul_vec(v);
        mv.iter().zip(v).fold(T::zero(), |acc, (&a, &b)| acc + a * b)
    }

    /// Eigen-decomposition of the symmetrised matrix `(M + M') / 2`.
    pub fn symmetric_eigen(&self) -> SymmetricEigen<T> {
        jacobi_eigen(self)
    }

    /// Operator (spectral) norm, `sqrt(lambda_max(M'M))`.
    pub fn op_norm(&self) -> T {
        let gram = &self.transpose() * self;
        gram.symmetric_eigen()
            .values
            .iter()
            .fold(T::zero(), |acc, &x| acc.max(x))
            .max(T::zero())
            .sqrt()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                for j in 0..d {
                    m[(i, j)] = m[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        m
    }
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Matrix<T>,
}

impl<T: Real> SymmetricEigen<T> {
    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// `V f(Λ) V'`.
    pub fn recompose(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let d = self.values.len();
        let mapped: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let mut m = Matrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = T::zero();
                for k in 0..d {
                    acc = acc + self.vectors[(i, k)] * mapped[k] * self.vectors[(j, k)];
                }
                m[(i, j)] = acc;
            }
        }
        m
    }
}

fn jacobi_eigen<T: Real>(m: &Matrix<T>) -> SymmetricEigen<T> {
    let d = m.dim();
    let half = T::lit(0.5);
    let mut a = Matrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            a[(i, j)] = (m[(i, j)] + m[(j, i)]) * half;
        }
    }
    let mut v = Matrix::identity(d);
    let scale = a.frobenius_norm();
    if scale > T::zero() {
        for _sweep in 0..64 {
            let mut off = T::zero();
            for i in 0..d {
                for j in (i + 1)..d {
                    off = off + a[(i, j)] * a[(i, j)];
                }
            }
            if off.sqrt() <= T::epsilon() * T::lit(1e-2) * scale {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a[(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (apq + apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..d {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(d);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..d {
            vectors[(k, col)] = v[(k, src)];
        }
    }
    SymmetricEigen { values, vectors }
}

/// Unique positive semi-definite square root of a symmetric PSD matrix.
///
/// Eigenvalues in `[-PSD_CLAMP * lambda_max, 0)` are clamped to zero;
/// anything more negative is rejected. Eigenvalues at rounding level
/// (`16 d eps lambda_max`) are also zeroed, since their square roots would
/// otherwise inject `O(sqrt(eps))` noise into rank-deficient inputs.
pub fn psd_sqrt<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = m.symmetric_eigen();
    check_psd(&eig)?;
    let floor = T::lit(16.0) * T::from_usize_lossy(m.dim()) * T::epsilon() * eig.max().max(T::zero());
    Ok(eig.recompose(|x| if x <= floor { T::zero() } else { x.sqrt() }))
}

/// Inverse of a symmetric positive definite matrix via its eigenvalues.
pub fn spd_inverse<T: Real>(m: &Matrix<T>, tol: T) -> Result<Matrix<T>> {
    let eig = m.symmetric_eigen();
    if eig.min() <= tol {
        return Err(Error::DegenerateScaling {
            min_eigenvalue: eig.min().to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }
    Ok(eig.recompose(|x| x.recip()))
}

pub fn check_psd<T: Real>(eig: &SymmetricEigen<T>) -> Result<()> {
    let lmax = eig.max().max(T::zero());
    let lmin = eig.min();
    if lmin < -(T::lit(PSD_CLAMP) * lmax) || (lmax == T::zero() && lmin < T::zero()) {
        return Err(Error::NotPsd {
            min_eigenvalue: lmin.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Checks the square-root monotonicity inequality for `N1, N2 >= 0`:
/// returns `(sqrt(tr((M3 - M1)^2)), tr(M3 - M1), lambda_min(M3 - M1))` with
/// `M1 = sqrt(N1)` and `M3 = sqrt(N1 + N2)`.
pub fn sqrt_increment_traces<T: Real>(n1: &Matrix<T>, n2: &Matrix<T>) -> Result<(T, T, T)> {
    let m1 = psd_sqrt(n1)?;
    let m3 = psd_sqrt(&(n1 + n2))?;
    let diff = &m3 - &m1;
    let sq = &diff * &diff;
    Ok((sq.trace().max(T::zero()).sqrt(), diff.trace(), diff.symmetric_eigen().min()))
}
