//! Sweeps over time grids and the checks built on them.

mod cf;
mod rates;
mod regime;
mod sweep;
mod time_change;
mod truncation;
mod vanishing;

use serde::{Deserialize, Serialize};

use crate::distances::DistanceClass;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub use cf::{cf_clt_check, CfRow};
pub use rates::{compare_models, rate_fit, rate_fit_points, RateFit, RateModel, MIN_FIT_POINTS};
pub use regime::{power_log_triplet, regime_report, RegimeConfig, RegimeReport, RegimeRow};
pub use sweep::{
    default_grid, gaussian_batch, geometric_grid, standard_gaussian_distance, sweep, ScalingMode, SweepConfig, SweepReport, SweepRow,
    DEFAULT_JUMP_BUDGET, MIN_MC_SIZE, SEARCH_CANDIDATES,
};
pub use time_change::{time_change_check, TimeChange, TimeChangeRow};
pub use truncation::{truncation_event_mc, truncation_event_prob, TruncationFrequency, TruncationProb};
pub use vanishing::{extract_vanishing_sequence, Schedule, VanishingPoint, VanishingSequence};

/// Last-decade increment below this multiple of the first is `Bounded`.
pub const BOUNDED_RATIO: f64 = 0.5;
/// Last-decade increment at or above this multiple of the first is `Growing`.
pub const GROWING_RATIO: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct DecadeIncrement<T> {
    pub from: T,
    pub to: T,
    pub increment: T,
}

/// `I(T_k) = int_{T_0}^{T_k} d(t) dt / t` by the trapezoid rule in `log t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct PartialIntegral<T> {
    pub class: DistanceClass,
    pub t: Vec<T>,
    pub value: Vec<T>,
    /// Consecutive decades starting at the first grid point.
    pub decades: Vec<DecadeIncrement<T>>,
    /// Increment over the last decade `[T / 10, T]`.
    pub last_decade: Option<DecadeIncrement<T>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Bounded,
    Growing,
    Inconclusive,
}

/// Piecewise-linear interpolant of the estimates in `s = log t` together with
/// its running integral.
struct LogTrapezoid<T> {
    s: Vec<T>,
    d: Vec<T>,
    cum: Vec<T>,
}

impl<T: Real> LogTrapezoid<T> {
    fn new(t: &[T], d: &[T]) -> Self {
        let s: Vec<T> = t.iter().map(|x| x.ln()).collect();
        let mut cum = vec![T::zero(); t.len()];
        for k in 1..t.len() {
            cum[k] = cum[k - 1] + (s[k] - s[k - 1]) * (d[k] + d[k - 1]) * T::lit(0.5);
        }
        Self { s, d: d.to_vec(), cum }
    }

    /// Integral from the first point to `log t = x` (clamped to the grid).
    fn at(&self, x: T) -> T {
        let n = self.s.len();
        if x <= self.s[0] {
            return T::zero();
        }
        if x >= self.s[n - 1] {
            return self.cum[n - 1];
        }
        let k = self.s.partition_point(|&v| v <= x) - 1;
        let h = self.s[k + 1] - self.s[k];
        let w = (x - self.s[k]) / h;
        let dx = self.d[k] + w * (self.d[k + 1] - self.d[k]);
        self.cum[k] + (x - self.s[k]) * (self.d[k] + dx) * T::lit(0.5)
    }
}

/// Partial integrals of `t^{-1} d(t)` for one class of a sweep.
pub fn partial_integral<T: Real>(report: &SweepReport<T>, class: DistanceClass) -> Result<PartialIntegral<T>> {
    let series = report.series(class);
    if series.is_empty() {
        return Err(Error::invalid(format!("report has no {class:?} estimates")));
    }
    let t: Vec<T> = series.iter().map(|p| p.0).collect();
    let d: Vec<T> = series.iter().map(|p| p.1.max(T::zero())).collect();
    Ok(partial_integral_points(class, &t, &d))
}

/// [`partial_integral`] on raw `(t, d)` points.
pub fn partial_integral_points<T: Real>(class: DistanceClass, t: &[T], d: &[T]) -> PartialIntegral<T> {
    let tr = LogTrapezoid::new(t, d);
    let ten = T::lit(10.0);
    let ln10 = ten.ln();
    let (s0, s_end) = (tr.s[0], tr.s[tr.s.len() - 1]);
    let slack = T::lit(1e-9);
    let mut decades = Vec::new();
    let mut k = 0;
    loop {
        let lo = s0 + ln10 * T::from_usize_lossy(k);
        let hi = lo + ln10;
        if hi > s_end + slack {
            break;
        }
        decades.push(DecadeIncrement {
            from: lo.exp(),
            to: hi.exp(),
            increment: tr.at(hi) - tr.at(lo),
        });
        k += 1;
    }
    let last_decade = (s_end - ln10 >= s0 - slack).then(|| DecadeIncrement {
        from: (s_end - ln10).exp(),
        to: s_end.exp(),
        increment: tr.at(s_end) - tr.at(s_end - ln10),
    });
    PartialIntegral {
        class,
        t: t.to_vec(),
        value: tr.cum,
        decades,
        last_decade,
    }
}

impl<T: Real> PartialIntegral<T> {
    /// Ratio of the last-decade increment to the first-decade increment.
    pub fn decade_ratio(&self) -> Option<T> {
        let first = self.decades.first()?.increment;
        let last = self.last_decade?.increment;
        (first > T::zero()).then(|| last / first)
    }

    pub fn verdict(&self) -> Verdict {
        match self.decade_ratio() {
            Some(r) if r < T::lit(BOUNDED_RATIO) => Verdict::Bounded,
            Some(r) if r >= T::lit(GROWING_RATIO) => Verdict::Growing,
            _ => Verdict::Inconclusive,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_over_one_decade() {
        let t: Vec<f64> = (0..5).map(|k| 100.0 * 10f64.powf(k as f64 / 4.0)).collect();
        let p = partial_integral_points(DistanceClass::KolmogorovRays, &t, &[0.3; 5]);
        assert_eq!(p.value.len(), 5);
        assert_eq!(p.decades.len(), 1);
        assert!((p.decades[0].increment - 0.3 * 10f64.ln()).abs() < 1e-12);
        assert_eq!(p.verdict(), Verdict::Growing);
    }

    #[test]
    fn inverse_log_matches_log_log() {
        // d = 1/log t, so int d dt/t = log log T - log log T0.
        let t: Vec<f64> = (0..=400).map(|k| 100.0 * 10f64.powf(k as f64 / 100.0)).collect();
        let d: Vec<f64> = t.iter().map(|x| 1.0 / x.ln()).collect();
        let p = partial_integral_points(DistanceClass::KolmogorovRays, &t, &d);
        // Trapezoid error bound h^2/12 * int |d''| ds with h = ln(10)/100.
        let h = 10f64.ln() / 100.0;
        for dec in &p.decades {
            let (a, b) = (dec.from.ln(), dec.to.ln());
            let exact = b.ln() - a.ln();
            let bound = h * h / 12.0 * (1.0 / (a * a) - 1.0 / (b * b));
            assert!((dec.increment - exact).abs() <= bound * 1.01, "{dec:?}");
        }
        assert!(p.value.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn single_point_series() {
        let p = partial_integral_points(DistanceClass::HalfSpaces, &[10.0], &[0.5]);
        assert_eq!(p.value, vec![0.0]);
        assert!(p.decades.is_empty() && p.last_decade.is_none());
        assert_eq!(p.verdict(), Verdict::Inconclusive);
    }

    #[test]
    fn fast_decay_is_bounded() {
        let t: Vec<f64> = (0..17).map(|k| 100.0 * 10f64.powf(k as f64 / 4.0)).collect();
        let d: Vec<f64> = t.iter().map(|x| 1.0 / x.ln().powi(2)).collect();
        assert_eq!(partial_integral_points(DistanceClass::KolmogorovRays, &t, &d).verdict(), Verdict::Bounded);
    }
}
