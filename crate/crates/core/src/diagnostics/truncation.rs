use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::LevyTriplet;
use crate::rng::{tag, RngStream};
use crate::scalar::Real;
use crate::simulate::{cutoff_for_budget, Simulator};

use super::DEFAULT_JUMP_BUDGET;

/// Probability of at least one jump larger than `kappa sqrt t` by time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TruncationProb<T> {
    /// `1 - exp(-t nu_bar(kappa sqrt t))`
    pub formula: T,
    /// `t nu_bar(kappa sqrt t)`
    pub bound: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct TruncationFrequency<T> {
    pub reps: usize,
    pub hits: usize,
    pub frequency: T,
    /// Binomial standard error of `frequency` under the formula value.
    pub se: T,
}

fn check_args<T: Real>(t: T, kappa: T) -> Result<()> {
    if !(t >= T::one() && t.is_finite()) {
        return Err(Error::invalid(format!("time must be finite and >= 1, got {t}")));
    }
    if !(kappa > T::zero() && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    Ok(())
}

pub fn truncation_event_prob<T: Real>(triplet: &LevyTriplet<T>, t: T, kappa: T) -> Result<TruncationProb<T>> {
    check_args(t, kappa)?;
    let bound = t * triplet.measure().tail_mass(kappa * t.sqrt())?;
    Ok(TruncationProb {
        formula: -(-bound).exp_m1(),
        bound,
    })
}

/// Monte Carlo frequency of a jump with radius above `kappa sqrt t`.
///
/// Jumps below `min(kappa sqrt t, eps)` may be replaced by a Gaussian to
/// keep the jump count bounded; that does not change the event.
pub fn truncation_event_mc<T: Real>(triplet: &LevyTriplet<T>, t: T, kappa: T, reps: usize, seed: u64) -> Result<TruncationFrequency<T>> {
    check_args(t, kappa)?;
    if reps == 0 {
        return Err(Error::EmptySample);
    }
    let level = kappa * t.sqrt();
    let eps = cutoff_for_budget(triplet, t, T::lit(DEFAULT_JUMP_BUDGET))?.min(level);
    let batch = Simulator::new(triplet)?.sample_with_cutoff(t, reps, eps, RngStream::new(seed, tag::TRUNCATION, 0))?;
    let hits = batch.max_jump.iter().filter(|&&r| r > level).count();
    let p = truncation_event_prob(triplet, t, kappa)?.formula;
    let n = T::from_usize_lossy(reps);
    Ok(TruncationFrequency {
        reps,
        hits,
        frequency: T::from_usize_lossy(hits) / n,
        se: (p * (T::one() - p) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::measures::{Atom, AtomicMeasure, RadialLevyMeasure};

    #[test]
    fn zero_measure() {
        let tr = LevyTriplet::gaussian(Matrix::identity(2)).unwrap();
        let p = truncation_event_prob(&tr, 10.0, 1.0).unwrap();
        assert_eq!((p.formula, p.bound), (0.0, 0.0));
    }

    #[test]
    fn unit_intensity() {
        // Two atoms of weight 1/20 beyond kappa sqrt t at t = 10.
        let atoms = [-10.0f64, 10.0].map(|x| Atom { weight: 0.05, point: vec![x] }).to_vec();
        let tr = LevyTriplet::centered(Matrix::zeros(1), AtomicMeasure::new(1, atoms).unwrap()).unwrap();
        let p = truncation_event_prob(&tr, 10.0, 1.0).unwrap();
        assert!((p.bound - 1.0).abs() < 1e-15);
        assert!((p.formula - 0.632_120_558_828_557_7).abs() < 1e-15);
    }

    #[test]
    fn formula_below_bound() {
        let m = RadialLevyMeasure::power_log(std::f64::consts::E, 1.0, 3).unwrap();
        let tr = LevyTriplet::centered(Matrix::zeros(3), m).unwrap();
        for t in [1.0, 10.0, 1e4] {
            let p = truncation_event_prob(&tr, t, 1.0).unwrap();
            assert!(p.formula <= p.bound && (0.0..=1.0).contains(&p.formula));
        }
    }

    #[test]
    fn mc_matches_formula() {
        let m = RadialLevyMeasure::power_log(std::f64::consts::E, 2.0, 1).unwrap();
        let tr = LevyTriplet::centered(Matrix::zeros(1), m).unwrap();
        let t = 4f64.exp();
        let p = truncation_event_prob(&tr, t, 1.0).unwrap();
        let mc = truncation_event_mc(&tr, t, 1.0, 20_000, 3).unwrap();
        assert!((mc.frequency - p.formula).abs() <= 3.0 * mc.se, "{mc:?} {p:?}");
    }
}
