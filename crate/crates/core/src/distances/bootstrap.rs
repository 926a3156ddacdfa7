use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Real;
use crate::simulate::SampleBatch;

/// Default number of bootstrap resamples.
pub const BOOTSTRAP_RESAMPLES: usize = 200;

/// Half-width of the central 95% percentile interval of `stat` over
/// row resamples of `sample`. Resample `i` draws from `stream.block(i)`.
pub fn bootstrap_half_width<T, F>(sample: &SampleBatch<T>, resamples: usize, stream: RngStream, stat: F) -> Result<T>
where
    T: Real,
    F: Fn(&SampleBatch<T>) -> Result<T> + Sync,
{
    let n = sample.n();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if resamples < 2 {
        return Err(Error::invalid("bootstrap needs at least two resamples"));
    }
    let mut stats = (0..resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.block(i as u64);
            let mut values = Vec::with_capacity(sample.values.len());
            for _ in 0..n {
                values.extend_from_slice(sample.row(rng.random_range(0..n)));
            }
            let b = SampleBatch::from_rows(sample.t, sample.dim, values, sample.seed)?;
            stat(&b)
        })
        .collect::<Result<Vec<T>>>()?;
    stats.sort_by(|a, b| a.partial_cmp(b).expect("finite statistics"));
    let pick = |p: f64| stats[((p * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    Ok((pick(0.975) - pick(0.025)) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::tag;

    #[test]
    fn mean_half_width_scales_like_standard_error() {
        let mut rng = RngStream::new(1, tag::REFERENCE, 0).block(0);
        let v: Vec<f64> = (0..2000).map(|_| f64::sample_normal(&mut rng)).collect();
        let s = SampleBatch::from_rows(1.0, 1, v, 1).unwrap();
        let stream = RngStream::new(2, tag::BOOTSTRAP, 0);
        let h = bootstrap_half_width(&s, BOOTSTRAP_RESAMPLES, stream, |b| Ok(b.mean()[0])).unwrap();
        let se = 1.0 / (2000f64).sqrt();
        assert!(h > 1.5 * se && h < 2.5 * se, "{h}");
        assert_eq!(h, bootstrap_half_width(&s, BOOTSTRAP_RESAMPLES, stream, |b| Ok(b.mean()[0])).unwrap());
    }
}
