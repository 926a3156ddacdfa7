use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::{tag, RngStream, BLOCK_ROWS};
use crate::scalar::Real;

use super::batch::SampleBatch;

/// Uniform law on the circle of radius `1 + 1/n_param` in the first two
/// coordinates of `R^d`.
pub fn sample_circle<T: Real>(n_param: u64, size: usize, dim: usize, seed: u64) -> Result<SampleBatch<T>> {
    if dim < 2 {
        return Err(Error::invalid("circle sampler needs dimension at least 2"));
    }
    if n_param == 0 {
        return Err(Error::invalid("circle parameter must be positive"));
    }
    let radius = T::one() + T::one() / T::lit(n_param as f64);
    circle_rows(radius, size, dim, RngStream::new(seed, tag::CIRCLE, n_param))
}

/// Uniform law on the circle of the given radius.
pub fn circle_rows<T: Real>(radius: T, size: usize, dim: usize, stream: RngStream) -> Result<SampleBatch<T>> {
    let mut values = vec![T::zero(); size * dim];
    values.par_chunks_mut(BLOCK_ROWS * dim).enumerate().for_each(|(b, vals)| {
        let mut rng = stream.block(b as u64);
        for row in vals.chunks_exact_mut(dim) {
            let theta = T::sample_open01(&mut rng) * T::TAU();
            let (s, c) = theta.sin_cos();
            row[0] = radius * c;
            row[1] = radius * s;
        }
    });
    SampleBatch::from_rows(T::one(), dim, values, stream.root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_lie_on_the_circle() {
        for &n in &[1u64, 7, 1000] {
            let b = sample_circle::<f64>(n, 5000, 3, 4).unwrap();
            let r = 1.0 + 1.0 / n as f64;
            for row in b.rows() {
                assert!(((row[0].hypot(row[1])) - r).abs() < 1e-12);
                assert_eq!(row[2], 0.0);
            }
        }
    }

    #[test]
    fn coordinates_are_centred() {
        let size = 100_000;
        let b = sample_circle::<f64>(10, size, 2, 5).unwrap();
        let m = b.mean();
        assert!(m.iter().all(|v| v.abs() < 4.0 / (size as f64).sqrt()));
    }

    #[test]
    fn rejects_dimension_one() {
        assert!(sample_circle::<f64>(3, 10, 1, 0).is_err());
    }
}
