use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::AtomicMeasure;
use crate::rng::{tag, RngStream, BLOCK_ROWS};
use crate::scalar::Real;

use super::batch::SampleBatch;

/// I.i.d. step law of a random walk.
pub trait StepLaw<T>: Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [T]);
}

/// Step identically zero.
pub struct ZeroStep(pub usize);

impl<T: Real> StepLaw<T> for ZeroStep {
    fn dim(&self) -> usize {
        self.0
    }
    fn sample(&self, _rng: &mut ChaCha8Rng, out: &mut [T]) {
        out.fill(T::zero());
    }
}

/// Standard Gaussian step in `R^d`.
pub struct GaussianStep(pub usize);

impl<T: Real> StepLaw<T> for GaussianStep {
    fn dim(&self) -> usize {
        self.0
    }
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [T]) {
        for o in out.iter_mut() {
            *o = T::sample_normal(rng);
        }
    }
}

/// Step drawn from a finite measure normalised to a probability law.
pub struct AtomicStep<T> {
    measure: AtomicMeasure<T>,
    cumulative: Vec<T>,
}

impl<T: Real> AtomicStep<T> {
    pub fn new(measure: AtomicMeasure<T>) -> Result<Self> {
        let mut acc = T::zero();
        let cumulative: Vec<T> = measure
            .atoms()
            .iter()
            .map(|a| {
                acc = acc + a.weight;
                acc
            })
            .collect();
        if !(acc > T::zero()) {
            return Err(Error::invalid("step law needs positive total weight"));
        }
        Ok(Self { measure, cumulative })
    }

    /// Symmetric `+-1` steps in one dimension.
    pub fn rademacher() -> Self {
        use crate::measures::Atom;
        let m = AtomicMeasure::new(
            1,
            vec![
                Atom { weight: T::lit(0.5), point: vec![T::one()] },
                Atom { weight: T::lit(0.5), point: vec![-T::one()] },
            ],
        )
        .expect("valid atoms");
        Self::new(m).expect("positive weight")
    }
}

impl<T: Real> StepLaw<T> for AtomicStep<T> {
    fn dim(&self) -> usize {
        self.measure.dim()
    }
    fn sample(&self, rng: &mut ChaCha8Rng, out: &mut [T]) {
        let total = *self.cumulative.last().expect("non-empty");
        let u = T::sample_open01(rng) * total;
        let i = self.cumulative.partition_point(|&c| c < u).min(self.cumulative.len() - 1);
        out.copy_from_slice(&self.measure.atoms()[i].point);
    }
}

/// `X_t = Y_{N_t}` with `N_t ~ Poisson(t)` and `Y` the random walk with the
/// given steps. The induced Levy measure is the step law.
pub fn embed_random_walk<T: Real>(steps: &dyn StepLaw<T>, t: T, n: usize, seed: u64) -> Result<SampleBatch<T>> {
    if !(t > T::zero() && t.is_finite()) {
        return Err(Error::invalid(format!("time must be positive and finite, got {t}")));
    }
    let d = steps.dim();
    let poisson = Poisson::new(t.to_f64_lossy()).map_err(|e| Error::invalid(e.to_string()))?;
    let stream = RngStream::new(seed, tag::WALK, 0);
    let mut values = vec![T::zero(); n * d];
    let mut counts = vec![0u32; n];
    values
        .par_chunks_mut(BLOCK_ROWS * d)
        .zip(counts.par_chunks_mut(BLOCK_ROWS))
        .enumerate()
        .for_each(|(b, (vals, counts))| {
            let mut rng = stream.block(b as u64);
            let mut step = vec![T::zero(); d];
            for (row, c) in vals.chunks_exact_mut(d).zip(counts.iter_mut()) {
                let k: f64 = poisson.sample(&mut rng);
                *c = k as u32;
                for _ in 0..*c {
                    steps.sample(&mut rng, &mut step);
                    for (x, &s) in row.iter_mut().zip(&step) {
                        *x = *x + s;
                    }
                }
            }
        });
    let mut batch = SampleBatch::from_rows(t, d, values, seed)?;
    batch.jump_counts = counts;
    Ok(batch)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(b: &SampleBatch<f64>) -> (f64, f64, f64) {
        let n = b.n() as f64;
        let x = b.column(0);
        let m = x.iter().sum::<f64>() / n;
        let m2 = x.iter().map(|v| v * v).sum::<f64>() / n;
        let m4 = x.iter().map(|v| v.powi(4)).sum::<f64>() / n;
        (m, m2, ((m4 - m2 * m2) / n).sqrt())
    }

    #[test]
    fn zero_steps_stay_at_origin() {
        let b = embed_random_walk::<f64>(&ZeroStep(2), 5.0, 1000, 1).unwrap();
        assert!(b.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rademacher_moments() {
        let n = 200_000;
        let b = embed_random_walk(&AtomicStep::<f64>::rademacher(), 1.0, n, 2).unwrap();
        let (m, m2, se2) = moments(&b);
        assert!(m.abs() < 3.0 * (1.0 / n as f64).sqrt());
        assert!((m2 - 1.0).abs() < 3.0 * se2);
    }

    #[test]
    fn gaussian_steps_variance() {
        let n = 200_000;
        let b = embed_random_walk::<f64>(&GaussianStep(1), 4.0, n, 3).unwrap();
        let (_, m2, se2) = moments(&b);
        assert!((m2 - 4.0).abs() < 3.0 * se2);
    }
}
