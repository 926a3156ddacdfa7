use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Atom<T> {
    pub weight: T,
    pub point: Vec<T>,
}

/// Finite Levy measure made of weighted point masses.
///
/// Used for anisotropic test cases and as the jump law of a Poisson-embedded
/// random walk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AtomicMeasure<T> {
    dim: usize,
    atoms: Vec<Atom<T>>,
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt()
}

impl<T: Real> AtomicMeasure<T> {
    pub fn new(dim: usize, atoms: Vec<Atom<T>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.point.len() != dim {
                return Err(Error::invalid(format!("atom {i} has dimension {}, expected {dim}", a.point.len())));
            }
            if !(a.weight >= T::zero() && a.weight.is_finite()) {
                return Err(Error::invalid(format!("atom {i} has invalid weight {}", a.weight)));
            }
            if a.point.iter().any(|x| !x.is_finite()) || norm(&a.point) == T::zero() {
                return Err(Error::invalid(format!("atom {i} must be a finite non-zero point")));
            }
        }
        Ok(Self { dim, atoms })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    fn sum_where(&self, keep: impl Fn(T) -> bool, f: impl Fn(&Atom<T>, T) -> T) -> T {
        self.atoms
            .iter()
            .filter_map(|a| {
                let r = norm(&a.point);
                keep(r).then(|| f(a, r))
            })
            .fold(T::zero(), |acc, x| acc + x)
    }

    pub fn tail_mass(&self, r: T) -> T {
        self.sum_where(|s| s > r, |a, _| a.weight)
    }

    pub fn total_mass(&self) -> T {
        self.sum_where(|_| true, |a, _| a.weight)
    }

    pub fn truncated_moment(&self, p: u32, r: T) -> T {
        self.sum_where(|s| s <= r, |a, s| a.weight * s.powi(p as i32))
    }

    pub fn tail_moment(&self, p: u32, r: T) -> T {
        self.sum_where(|s| s > r, |a, s| a.weight * s.powi(p as i32))
    }

    /// `int_{B_0(r)} v v^T nu(dv)`.
    pub fn truncated_second_moment_matrix(&self, r: T) -> Matrix<T> {
        let mut m = Matrix::zeros(self.dim);
        for a in &self.atoms {
            if norm(&a.point) <= r {
                m = &m + &Matrix::outer(&a.point).scale(a.weight);
            }
        }
        m
    }

    /// `int_{S} v nu(dv)` over the atoms whose radius satisfies `keep`.
    pub fn first_moment_vector(&self, keep: impl Fn(T) -> bool) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim];
        for a in &self.atoms {
            if keep(norm(&a.point)) {
                for (o, &x) in out.iter_mut().zip(&a.point) {
                    *o = *o + a.weight * x;
                }
            }
        }
        out
    }

    /// True when the measure is invariant under `v -> -v`.
    pub fn is_symmetric(&self) -> bool {
        let tol = T::lit(1e-12) * self.total_mass().max(T::one());
        self.atoms.iter().all(|a| {
            let mirror: Vec<T> = a.point.iter().map(|&x| -x).collect();
            let here = self.mass_at(&a.point);
            let there = self.mass_at(&mirror);
            (here - there).abs() <= tol
        })
    }

    fn mass_at(&self, p: &[T]) -> T {
        self.atoms
            .iter()
            .filter(|a| a.point.iter().zip(p).all(|(&x, &y)| x == y))
            .fold(T::zero(), |acc, a| acc + a.weight)
    }
}
