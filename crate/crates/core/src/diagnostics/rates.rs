use serde::{Deserialize, Serialize};

use crate::distances::DistanceClass;
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::SweepReport;

/// Points needed above twice their CI before a fit is attempted.
pub const MIN_FIT_POINTS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RateModel {
    /// `a t^{-p}`
    PowerLaw,
    /// `a / log t`
    LogDecay,
    /// `a`
    Constant,
}

impl RateModel {
    pub const ALL: [RateModel; 3] = [RateModel::PowerLaw, RateModel::LogDecay, RateModel::Constant];
}

/// Least-squares fit of `log d` against the model's log-prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct RateFit<T> {
    pub model: RateModel,
    pub a: T,
    /// Exponent of the power law; `None` for the other models.
    pub p: Option<T>,
    /// Root mean square of the log residuals.
    pub rms: T,
    pub points: usize,
}

/// Fits `model` to the estimates of `class` in a sweep.
pub fn rate_fit<T: Real>(report: &SweepReport<T>, class: DistanceClass, model: RateModel) -> Result<RateFit<T>> {
    rate_fit_points(&report.series(class), model)
}

/// Fits `model` to `(t, d, ci)` points, keeping those with `d > 2 ci` and `t > 1`.
pub fn rate_fit_points<T: Real>(points: &[(T, T, T)], model: RateModel) -> Result<RateFit<T>> {
    let usable: Vec<(T, T)> = points
        .iter()
        .filter(|(t, d, ci)| *t > T::one() && *d > T::lit(2.0) * *ci && *d > T::zero() && d.is_finite())
        .map(|&(t, d, _)| (t.ln(), d.ln()))
        .collect();
    if usable.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientSignal {
            usable: usable.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let n = T::from_usize_lossy(usable.len());
    let mean = |f: &dyn Fn(&(T, T)) -> T| usable.iter().map(f).fold(T::zero(), |a, b| a + b) / n;
    let (log_a, p) = match model {
        RateModel::Constant => (mean(&|q| q.1), None),
        RateModel::LogDecay => (mean(&|q| q.1 + q.0.ln()), None),
        RateModel::PowerLaw => {
            let (mx, my) = (mean(&|q| q.0), mean(&|q| q.1));
            let sxx = mean(&|q| (q.0 - mx) * (q.0 - mx));
            let sxy = mean(&|q| (q.0 - mx) * (q.1 - my));
            if !(sxx > T::zero()) {
                return Err(Error::InsufficientSignal {
                    usable: 1,
                    required: MIN_FIT_POINTS,
                });
            }
            let slope = sxy / sxx;
            (my - slope * mx, Some(-slope))
        }
    };
    let predict = |s: T| match model {
        RateModel::Constant => log_a,
        RateModel::LogDecay => log_a - s.ln(),
        RateModel::PowerLaw => log_a - p.expect("power law has an exponent") * s,
    };
    let rms = mean(&|q| {
        let r = q.1 - predict(q.0);
        r * r
    })
    .sqrt();
    Ok(RateFit {
        model,
        a: log_a.exp(),
        p,
        rms,
        points: usable.len(),
    })
}

/// All models fitted to the same points, best residual first.
pub fn compare_models<T: Real>(points: &[(T, T, T)]) -> Result<Vec<RateFit<T>>> {
    let mut fits = RateModel::ALL.iter().map(|&m| rate_fit_points(points, m)).collect::<Result<Vec<_>>>()?;
    fits.sort_by(|a, b| a.rms.partial_cmp(&b.rms).expect("finite residuals"));
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{tag, RngStream};

    fn grid() -> Vec<f64> {
        (0..17).map(|k| 100.0 * 10f64.powf(k as f64 / 4.0)).collect()
    }

    #[test]
    fn exact_log_decay() {
        let pts: Vec<_> = grid().into_iter().map(|t| (t, 3.0 / t.ln(), 0.0)).collect();
        let f = rate_fit_points(&pts, RateModel::LogDecay).unwrap();
        assert!((f.a - 3.0).abs() < 1e-12 && f.rms <= 1e-12);
        assert_eq!(compare_models(&pts).unwrap()[0].model, RateModel::LogDecay);
    }

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = grid().into_iter().map(|t| (t, t.powf(-0.5), 0.0)).collect();
        let f = rate_fit_points(&pts, RateModel::PowerLaw).unwrap();
        assert!((f.p.unwrap() - 0.5).abs() < 1e-12 && (f.a - 1.0).abs() < 1e-10);
    }

    #[test]
    fn noisy_log_decay() {
        let mut rng = RngStream::new(5, tag::REFERENCE, 0).block(0);
        let pts: Vec<_> = grid()
            .into_iter()
            .map(|t| (t, 2.0 / t.ln() * (1.0 + 0.05 * f64::sample_normal(&mut rng)), 0.001))
            .collect();
        let f = rate_fit_points(&pts, RateModel::LogDecay).unwrap();
        assert!((f.a / 2.0 - 1.0).abs() < 0.15);
    }

    #[test]
    fn ci_dominated_points_are_rejected() {
        let pts: Vec<_> = grid().into_iter().map(|t| (t, 0.01, 0.01)).collect();
        assert!(matches!(
            rate_fit_points(&pts, RateModel::Constant),
            Err(Error::InsufficientSignal { usable: 0, required: 5 })
        ));
    }
}
