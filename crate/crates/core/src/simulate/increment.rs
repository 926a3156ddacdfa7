use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{psd_sqrt, Matrix};
use crate::measures::LevyTriplet;
use crate::rng::{tag, RngStream, BLOCK_ROWS};
use crate::scalar::Real;

use super::batch::SampleBatch;
use super::sampler::{Cutoff, JumpSampler};

/// Exact (or small-jump approximated) sampler of `X_t` for one triplet.
///
/// Building the simulator tabulates the jump law once; it can then be reused
/// across times and cutoffs.
#[derive(Clone, Debug)]
pub struct Simulator<T> {
    triplet: LevyTriplet<T>,
    sampler: JumpSampler<T>,
    gauss_root: Option<Matrix<T>>,
    drift: Vec<T>,
}

/// Per-row bookkeeping returned alongside the values.
struct RowMeta<T> {
    jumps: u32,
    max_radius: T,
}

impl<T: Real> Simulator<T> {
    pub fn new(triplet: &LevyTriplet<T>) -> Result<Self> {
        let mass = triplet.measure().total_mass()?;
        if !mass.is_finite() {
            return Err(Error::InfiniteActivity);
        }
        let cov = triplet.gaussian_cov();
        let gauss_root = if cov.max_abs() > T::zero() { Some(psd_sqrt(cov)?) } else { None };
        Ok(Self {
            triplet: triplet.clone(),
            sampler: JumpSampler::new(triplet.measure())?,
            gauss_root,
            drift: triplet.compound_drift()?,
        })
    }

    pub fn triplet(&self) -> &LevyTriplet<T> {
        &self.triplet
    }

    pub fn sampler(&self) -> &JumpSampler<T> {
        &self.sampler
    }

    /// `n` exact draws of `X_t`.
    pub fn sample(&self, t: T, n: usize, stream: RngStream) -> Result<SampleBatch<T>> {
        self.sample_with_cutoff(t, n, T::zero(), stream)
    }

    /// `n` draws of `X_t` with jumps of radius at most `eps` replaced by a
    /// Gaussian of matched second moment. `eps = 0` is exact.
    pub fn sample_with_cutoff(&self, t: T, n: usize, eps: T, stream: RngStream) -> Result<SampleBatch<T>> {
        if !(t > T::zero() && t.is_finite()) {
            return Err(Error::invalid(format!("time must be positive and finite, got {t}")));
        }
        if !(eps >= T::zero()) || !eps.is_finite() {
            return Err(Error::InvalidCutoff(eps.to_f64_lossy()));
        }
        let d = self.triplet.dim();
        let measure = self.triplet.measure();
        let cut = self.sampler.cutoff(measure, eps)?;
        let small_root = if eps > T::zero() {
            let m = measure.truncated_second_moment_matrix(eps)?.scale(t);
            if m.max_abs() > T::zero() {
                Some(psd_sqrt(&m)?)
            } else {
                None
            }
        } else {
            None
        };
        // Mean of the removed jumps moves into the drift.
        let small_mean = measure.truncated_first_moment(eps);
        let shift: Vec<T> = self.drift.iter().zip(&small_mean).map(|(&b, &m)| (b + m) * t).collect();
        let lambda = (cut.rate * t).to_f64_lossy();
        let poisson = if lambda > 0.0 {
            Some(Poisson::new(lambda).map_err(|e| Error::invalid(format!("jump rate {lambda}: {e}")))?)
        } else {
            None
        };
        let sqrt_t = t.sqrt();
        let gauss_root = self.gauss_root.as_ref().map(|g| g.scale(sqrt_t));
        let ctx = BlockContext {
            dim: d,
            cut,
            gauss_root: gauss_root.as_ref(),
            small_root: small_root.as_ref(),
            shift: &shift,
            poisson: poisson.as_ref(),
            sampler: &self.sampler,
        };
        let mut values = vec![T::zero(); n * d];
        let mut meta: Vec<(u32, T)> = vec![(0, T::zero()); n];
        values
            .par_chunks_mut(BLOCK_ROWS * d)
            .zip(meta.par_chunks_mut(BLOCK_ROWS))
            .enumerate()
            .for_each(|(b, (vals, meta))| {
                let mut rng = stream.block(b as u64);
                ctx.fill(&mut rng, vals, meta);
            });
        let mut batch = SampleBatch::from_rows(t, d, values, stream.root)?;
        batch.fingerprint = self.triplet.fingerprint();
        batch.approximate = eps > T::zero() && small_root.is_some();
        batch.jump_counts = meta.iter().map(|m| m.0).collect();
        batch.max_jump = meta.into_iter().map(|m| m.1).collect();
        Ok(batch)
    }
}

struct BlockContext<'a, T> {
    dim: usize,
    cut: Cutoff<T>,
    gauss_root: Option<&'a Matrix<T>>,
    small_root: Option<&'a Matrix<T>>,
    shift: &'a [T],
    poisson: Option<&'a Poisson<f64>>,
    sampler: &'a JumpSampler<T>,
}

impl<T: Real> BlockContext<'_, T> {
    fn fill(&self, rng: &mut ChaCha8Rng, vals: &mut [T], meta: &mut [(u32, T)]) {
        let d = self.dim;
        let mut z = vec![T::zero(); d];
        let mut tmp = vec![T::zero(); d];
        let mut jump = vec![T::zero(); d];
        for (row, m) in vals.chunks_exact_mut(d).zip(meta.iter_mut()) {
            row.copy_from_slice(self.shift);
            for root in [self.gauss_root, self.small_root].into_iter().flatten() {
                for zi in z.iter_mut() {
                    *zi = T::sample_normal(rng);
                }
                root.mul_vec_into(&z, &mut tmp);
                for (r, &g) in row.iter_mut().zip(&tmp) {
                    *r = *r + g;
                }
            }
            let info = self.add_jumps(rng, row, &mut jump);
            *m = (info.jumps, info.max_radius);
        }
    }

    fn add_jumps(&self, rng: &mut ChaCha8Rng, row: &mut [T], jump: &mut [T]) -> RowMeta<T> {
        let count = match self.poisson {
            Some(p) => draw_count(p, rng),
            None => 0,
        };
        let mut max_radius = T::zero();
        for _ in 0..count {
            let r = self.sampler.sample_into(&self.cut, rng, jump);
            max_radius = max_radius.max(r);
            for (x, &j) in row.iter_mut().zip(jump.iter()) {
                *x = *x + j;
            }
        }
        RowMeta { jumps: count, max_radius }
    }
}

fn draw_count<R: Rng + ?Sized>(p: &Poisson<f64>, rng: &mut R) -> u32 {
    let k: f64 = p.sample(rng);
    k as u32
}

/// `n` exact draws of `X_t` (compound Poisson plus Gaussian part).
pub fn sample_increment<T: Real>(triplet: &LevyTriplet<T>, t: T, n: usize, seed: u64) -> Result<SampleBatch<T>> {
    Simulator::new(triplet)?.sample(t, n, RngStream::new(seed, tag::INCREMENT, 0))
}

/// `n` draws of `X_t` with jumps of radius at most `eps` replaced by a
/// Gaussian of matched second moment; the batch is flagged approximate.
pub fn small_jump_approx<T: Real>(triplet: &LevyTriplet<T>, eps: T, t: T, n: usize, seed: u64) -> Result<SampleBatch<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidCutoff(eps.to_f64_lossy()));
    }
    let mut b = Simulator::new(triplet)?.sample_with_cutoff(t, n, eps, RngStream::new(seed, tag::INCREMENT, 0))?;
    b.approximate = true;
    Ok(b)
}

/// Cutoff `eps` with `t nu_bar(eps) = budget`, or 0 when the exact jump
/// count already fits the budget.
pub fn cutoff_for_budget<T: Real>(triplet: &LevyTriplet<T>, t: T, budget: T) -> Result<T> {
    let measure = triplet.measure();
    if t * measure.total_mass()? <= budget {
        return Ok(T::zero());
    }
    // nu_bar is non-increasing; bisect in log-radius.
    let mut lo = T::zero();
    let mut hi = T::one();
    while t * measure.tail_mass(hi.exp())? > budget {
        lo = hi;
        hi = hi * T::lit(2.0);
        if hi > T::lit(700.0) {
            return Err(Error::invalid("jump budget cannot be met"));
        }
    }
    for _ in 0..100 {
        let mid = (lo + hi) * T::lit(0.5);
        if t * measure.tail_mass(mid.exp())? > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < T::lit(1e-12) {
            break;
        }
    }
    Ok(hi.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{full_covariance, RadialLevyMeasure};
    use std::f64::consts::E;

    #[test]
    fn pure_gaussian_covariance() {
        let tr = LevyTriplet::<f64>::gaussian(Matrix::identity(2)).unwrap();
        let n = 100_000;
        let b = sample_increment(&tr, 3.0, n, 11).unwrap();
        let m = b.mean();
        let mut c = [0.0f64; 3];
        for r in b.rows() {
            c[0] += (r[0] - m[0]).powi(2) / n as f64;
            c[1] += (r[0] - m[0]) * (r[1] - m[1]) / n as f64;
            c[2] += (r[1] - m[1]).powi(2) / n as f64;
        }
        let band = 4.0 / (n as f64).sqrt() * 3.0 * 2.0f64.sqrt();
        assert!((c[0] - 3.0).abs() < band && (c[2] - 3.0).abs() < band && c[1].abs() < band);
        assert!(b.jump_counts.iter().all(|&k| k == 0));
    }

    #[test]
    fn power_log_second_moment() {
        let tr = LevyTriplet::pure_jump(RadialLevyMeasure::power_log(E, 3.0, 2).unwrap()).unwrap();
        let target = full_covariance(&tr).unwrap().trace();
        let n = 200_000;
        let b = sample_increment(&tr, 1.0, n, 12).unwrap();
        let sq: Vec<f64> = b.rows().map(|r| r[0] * r[0] + r[1] * r[1]).collect();
        let mean = sq.iter().sum::<f64>() / n as f64;
        let var = sq.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - target).abs() < 3.0 * se, "{mean} vs {target} (se {se})");
    }

    #[test]
    fn jump_counts_have_poisson_mean() {
        let m = RadialLevyMeasure::power_log(E, 2.0, 1).unwrap();
        let rate = m.total_mass().unwrap();
        let tr = LevyTriplet::pure_jump(m).unwrap();
        let n = 100_000;
        let t = 20.0;
        let b = sample_increment(&tr, t, n, 13).unwrap();
        let mean = b.jump_counts.iter().map(|&k| k as f64).sum::<f64>() / n as f64;
        let se = (t * rate / n as f64).sqrt();
        assert!((mean - t * rate).abs() < 3.0 * se);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let tr = LevyTriplet::pure_jump(RadialLevyMeasure::power_log(E, 2.0, 2).unwrap()).unwrap();
        let sim = Simulator::new(&tr).unwrap();
        let s = RngStream::new(99, tag::INCREMENT, 4);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sim.sample(50.0, 10_000, s).unwrap());
        let b = four.install(|| sim.sample(50.0, 10_000, s).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn small_jump_cutoff_below_support_is_exact() {
        let tr = LevyTriplet::pure_jump(RadialLevyMeasure::power_log(E, 2.0, 1).unwrap()).unwrap();
        let sim = Simulator::new(&tr).unwrap();
        let s = RngStream::new(5, tag::INCREMENT, 0);
        let exact = sim.sample(10.0, 5000, s).unwrap();
        let approx = sim.sample_with_cutoff(10.0, 5000, 2.0, s).unwrap();
        assert_eq!(exact.values, approx.values);
        assert!(!approx.approximate);
        let flagged = small_jump_approx(&tr, 2.0, 10.0, 10, 5).unwrap();
        assert!(flagged.approximate);
        assert!(matches!(small_jump_approx(&tr, 0.0, 1.0, 10, 5), Err(Error::InvalidCutoff(_))));
    }

    #[test]
    fn gaussian_share_shrinks_with_cutoff() {
        let tr = LevyTriplet::pure_jump(RadialLevyMeasure::power_log(E, 2.0, 1).unwrap()).unwrap();
        let m = tr.measure();
        let t = 100.0;
        let shares: Vec<f64> = [1e3, 1e2, 10.0].iter().map(|&e| t * m.truncated_moment(2, e).unwrap()).collect();
        assert!(shares[0] > shares[1] && shares[1] > shares[2]);
        let eps = cutoff_for_budget(&tr, 1e6, 256.0).unwrap();
        assert!((1e6 * m.tail_mass(eps).unwrap() - 256.0).abs() < 1e-6);
        assert_eq!(cutoff_for_budget(&tr, 1.0, 256.0).unwrap(), 0.0);
    }
}
