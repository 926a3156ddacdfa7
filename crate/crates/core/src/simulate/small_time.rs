use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::LevyTriplet;
use crate::rng::{tag, RngStream};
use crate::scalar::Real;

use super::increment::Simulator;

/// One row of the small-time moment table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SmallTimeRow<T> {
    pub n: u64,
    /// Monte Carlo estimate of `n E[|X_{1/n}|^p]`.
    pub estimate: T,
    /// 95% normal-approximation half-width.
    pub ci: T,
    /// `int |v|^p nu(dv)`, infinite when the moment diverges.
    pub target: T,
}

/// `n E[|X_{1/n}|^p]` for each `n`, against its small-time limit
/// `int |v|^p nu(dv)`.
pub fn asmussen_small_time<T: Real>(
    triplet: &LevyTriplet<T>,
    p: u32,
    n_list: &[u64],
    mc_size: usize,
    seed: u64,
) -> Result<Vec<SmallTimeRow<T>>> {
    if !(1..=3).contains(&p) {
        return Err(Error::invalid(format!("moment order must be 1, 2 or 3, got {p}")));
    }
    if n_list.is_empty() || n_list.contains(&0) {
        return Err(Error::invalid("divisor list must be non-empty and positive"));
    }
    if mc_size < 2 {
        return Err(Error::invalid("Monte Carlo size must be at least 2"));
    }
    let target = triplet.measure().moment(p)?.as_real();
    let sim = Simulator::new(triplet)?;
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    ns.iter()
        .map(|&n| {
            let nf = T::lit(n as f64);
            let batch = sim.sample(nf.recip(), mc_size, RngStream::new(seed, tag::SMALL_TIME, n))?;
            let vals: Vec<T> = batch
                .rows()
                .map(|r| r.iter().fold(T::zero(), |s, &x| s + x * x).sqrt().powi(p as i32))
                .collect();
            let m = T::from_usize_lossy(mc_size);
            let mean = vals.iter().fold(T::zero(), |s, &v| s + v) / m;
            let var = vals.iter().fold(T::zero(), |s, &v| s + (v - mean) * (v - mean)) / (m - T::one());
            Ok(SmallTimeRow {
                n,
                estimate: nf * mean,
                ci: T::lit(1.96) * nf * (var / m).sqrt(),
                target,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::measures::RadialLevyMeasure;

    #[test]
    fn zero_measure_vanishes() {
        let tr = LevyTriplet::<f64>::gaussian(Matrix::identity(2)).unwrap();
        let rows = asmussen_small_time(&tr, 3, &[16, 4096], 20_000, 1).unwrap();
        assert_eq!(rows[0].target, 0.0);
        // n E|X_{1/n}|^3 = n^{-1/2} E|Z|^3 for Brownian motion.
        assert!(rows[1].estimate < rows[0].estimate && rows[1].estimate < 0.1);
    }

    #[test]
    fn bounded_shell_converges_to_third_moment() {
        let m = RadialLevyMeasure::bounded_shell(1.5, 4.0, 2).unwrap();
        let tr = LevyTriplet::pure_jump(m).unwrap();
        let rows = asmussen_small_time::<f64>(&tr, 3, &[4096, 64], 400_000, 2).unwrap();
        assert_eq!(rows[0].n, 64);
        let last = rows[1];
        assert!(last.target.is_finite() && last.target > 0.0);
        assert!((last.estimate / last.target - 1.0).abs() < 0.05);
    }
}
