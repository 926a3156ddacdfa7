use crate::error::{Error, Result};
use crate::scalar::Real;

/// `n x d` matrix of simulated process values at time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch<T> {
    pub t: T,
    pub dim: usize,
    /// Row-major values.
    pub values: Vec<T>,
    pub seed: u64,
    /// Hash of the generating configuration, 0 when not applicable.
    pub fingerprint: u64,
    /// Set when small jumps were replaced by a Gaussian.
    pub approximate: bool,
    /// Jumps per row, empty when not tracked.
    pub jump_counts: Vec<u32>,
    /// Largest jump radius per row (0 without jumps), empty when not tracked.
    pub max_jump: Vec<T>,
}

impl<T: Real> SampleBatch<T> {
    pub fn from_rows(t: T, dim: usize, values: Vec<T>, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if values.len() % dim != 0 {
            return Err(Error::invalid(format!("{} values do not form rows of length {dim}", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample contains non-finite values"));
        }
        Ok(Self {
            t,
            dim,
            values,
            seed,
            fingerprint: 0,
            approximate: false,
            jump_counts: Vec::new(),
            max_jump: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        self.rows().map(|r| r[j]).collect()
    }

    /// `|row - center|` for every row.
    pub fn radii(&self, center: &[T]) -> Vec<T> {
        self.rows()
            .map(|r| r.iter().zip(center).fold(T::zero(), |acc, (&x, &c)| acc + (x - c) * (x - c)).sqrt())
            .collect()
    }

    /// `<w, row>` for every row.
    pub fn project(&self, w: &[T]) -> Vec<T> {
        self.rows().map(|r| r.iter().zip(w).fold(T::zero(), |acc, (&x, &c)| acc + x * c)).collect()
    }

    /// Per-coordinate sample mean.
    pub fn mean(&self) -> Vec<T> {
        let n = T::from_usize_lossy(self.n().max(1));
        let mut m = vec![T::zero(); self.dim];
        for r in self.rows() {
            for (a, &x) in m.iter_mut().zip(r) {
                *a = *a + x;
            }
        }
        m.into_iter().map(|a| a / n).collect()
    }

    /// Row-wise affine map `row -> M (row - shift)`.
    pub fn normalized(&self, shift: &[T], m: &crate::linalg::Matrix<T>) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        let mut centred = vec![T::zero(); self.dim];
        let mut out = vec![T::zero(); self.dim];
        for r in self.rows() {
            for ((c, &x), &s) in centred.iter_mut().zip(r).zip(shift) {
                *c = x - s;
            }
            m.mul_vec_into(&centred, &mut out);
            values.extend_from_slice(&out);
        }
        Self {
            values,
            jump_counts: Vec::new(),
            max_jump: Vec::new(),
            ..self.clone_meta()
        }
    }

    fn clone_meta(&self) -> Self {
        Self {
            t: self.t,
            dim: self.dim,
            values: Vec::new(),
            seed: self.seed,
            fingerprint: self.fingerprint,
            approximate: self.approximate,
            jump_counts: Vec::new(),
            max_jump: Vec::new(),
        }
    }
}
