use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// `value(n) = scale * n^{-power}` for `n >= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Schedule<T> {
    pub scale: T,
    pub power: T,
}

impl<T: Real> Default for Schedule<T> {
    fn default() -> Self {
        Self {
            scale: T::one(),
            power: T::lit(0.5),
        }
    }
}

impl<T: Real> Schedule<T> {
    pub fn value(&self, n: usize) -> T {
        self.scale * T::from_usize_lossy(n).powf(-self.power)
    }

    fn check(&self, name: &str, max_power: Option<T>) -> Result<()> {
        let ok = self.scale > T::zero() && self.scale.is_finite() && self.power > T::zero() && max_power.is_none_or(|m| self.power <= m);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("{name} schedule must be positive and decreasing to 0 (scale {}, power {})", self.scale, self.power)))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VanishingPoint<T> {
    pub t: T,
    /// `log t`
    pub u: T,
    pub g: T,
    /// Schedule index whose window and threshold selected this point.
    pub m: usize,
    pub delta: T,
    pub upsilon: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct VanishingSequence<T> {
    pub points: Vec<VanishingPoint<T>>,
    /// Last grid time; the construction stops when its next window passes it.
    pub horizon: T,
}

impl<T: Real> VanishingSequence<T> {
    /// Checks `|g(t_n)| <= upsilon_m` and, for consecutive points,
    /// `delta_m <= log(t_{n+1}/t_n) <= 2 delta_m`, with `m` the index that
    /// selected `t_{n+1}`.
    pub fn verify(&self) -> bool {
        let slack = T::lit(1e-12);
        let values = self.points.iter().all(|p| p.g.abs() <= p.upsilon);
        let windows = self.points.windows(2).all(|w| {
            let step = w[1].u - w[0].u;
            step >= w[1].delta - slack && step <= T::lit(2.0) * w[1].delta + slack
        });
        values && windows
    }

    pub fn times(&self) -> Vec<T> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// Builds an increasing sequence `t_n` along which `g` vanishes, following
/// the constructive selection with thresholds `S_m` for `eps_m = delta_m upsilon_m`.
///
/// `h(u) = |g(e^u)|` is integrated by the trapezoid rule on the grid. `S_m` is
/// the first grid point whose suffix integral is at most `eps_m` and that
/// leaves room for a window of length `2 delta_m` before the horizon.
pub fn extract_vanishing_sequence<T: Real>(t: &[T], g: &[T], delta: Schedule<T>, upsilon: Schedule<T>) -> Result<VanishingSequence<T>> {
    delta.check("delta", Some(T::one()))?;
    upsilon.check("upsilon", None)?;
    if t.len() != g.len() {
        return Err(Error::invalid("time grid and values differ in length"));
    }
    if t.len() < 2 {
        return Err(Error::HorizonExhausted);
    }
    if t[0] < T::one() || t.windows(2).any(|w| !(w[1] > w[0])) || !t[t.len() - 1].is_finite() {
        return Err(Error::invalid("time grid must be strictly increasing and start at t >= 1"));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("tabulated values must be finite"));
    }
    let u: Vec<T> = t.iter().map(|x| x.ln()).collect();
    let h: Vec<T> = g.iter().map(|x| x.abs()).collect();
    let end = u[u.len() - 1];
    let mut suffix = vec![T::zero(); u.len()];
    for k in (0..u.len() - 1).rev() {
        suffix[k] = suffix[k + 1] + (u[k + 1] - u[k]) * (h[k] + h[k + 1]) * T::lit(0.5);
    }

    // Some(u) for a certified threshold, None when the grid cannot provide one.
    let mut thresholds: Vec<Option<T>> = Vec::new();
    let mut s = |m: usize| -> Option<T> {
        while thresholds.len() < m {
            let j = thresholds.len() + 1;
            let eps = delta.value(j) * upsilon.value(j);
            let k = suffix.partition_point(|&v| v > eps);
            thresholds.push((k < u.len() && u[k] + T::lit(2.0) * delta.value(j) <= end).then(|| u[k]));
        }
        thresholds[m - 1]
    };

    // Grid index of the smallest h on [lo, hi], earliest on ties.
    let pick = |lo: T, hi: T| -> Option<usize> {
        let a = u.partition_point(|&v| v < lo);
        let b = u.partition_point(|&v| v <= hi);
        (a..b).min_by(|&i, &j| h[i].partial_cmp(&h[j]).expect("finite").then(i.cmp(&j)))
    };
    let failure = |lo: T, hi: T, threshold: T| Error::SelectionFailure {
        lo: lo.exp().to_f64_lossy(),
        hi: hi.exp().to_f64_lossy(),
        threshold: threshold.to_f64_lossy(),
    };

    let Some(s1) = s(1) else {
        return Err(failure(u[0], end, upsilon.value(1)));
    };
    let (d1, v1) = (delta.value(1), upsilon.value(1));
    let first = pick(s1, s1 + d1).filter(|&i| h[i] <= v1).ok_or_else(|| failure(s1, s1 + d1, v1))?;
    let point = |i: usize, m: usize| VanishingPoint {
        t: t[i],
        u: u[i],
        g: g[i],
        m,
        delta: delta.value(m),
        upsilon: upsilon.value(m),
    };
    let mut points = vec![point(first, 1)];
    loop {
        let n = points.len();
        let un = points[n - 1].u;
        let m = (1..=n).rev().find(|&m| s(m).is_some_and(|sm| sm <= un)).unwrap_or(1);
        let (dm, vm) = (delta.value(m), upsilon.value(m));
        let (lo, hi) = (un + dm, un + T::lit(2.0) * dm);
        if hi > end {
            break;
        }
        let next = pick(lo, hi).filter(|&i| h[i] <= vm).ok_or_else(|| failure(lo, hi, vm))?;
        points.push(point(next, m));
    }
    let seq = VanishingSequence { points, horizon: t[t.len() - 1] };
    debug_assert!(seq.verify());
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::index::sample;

    use crate::rng::{tag, RngStream};

    fn log_grid(step: f64, end: f64) -> Vec<f64> {
        let n = (end / step).round() as usize;
        (1..=n).map(|k| (k as f64 * step).exp()).collect()
    }

    #[test]
    fn inverse_t_ratios_shrink() {
        let t = log_grid(1e-3, 1e6f64.ln());
        let g: Vec<f64> = t.iter().map(|x| 1.0 / x).collect();
        let seq = extract_vanishing_sequence(&t, &g, Schedule::default(), Schedule::default()).unwrap();
        assert!(seq.verify() && seq.points.len() > 5);
        let steps: Vec<f64> = seq.points.windows(2).map(|w| w[1].u - w[0].u).collect();
        assert!(steps.last().unwrap() < &steps[0]);
    }

    #[test]
    fn spikes_are_avoided() {
        let t = log_grid(1e-3, 1e6f64.ln());
        let mut rng = RngStream::new(11, tag::REFERENCE, 9).block(0);
        let spikes: Vec<usize> = sample(&mut rng, t.len(), 100).into_vec();
        let mut g: Vec<f64> = t.iter().map(|x| 1.0 / x.ln().powi(2)).collect();
        for &i in &spikes {
            g[i] = 1.0;
        }
        let seq = extract_vanishing_sequence(&t, &g, Schedule::default(), Schedule::default()).unwrap();
        assert!(seq.verify());
        assert!(seq.points.iter().all(|p| !spikes.iter().any(|&i| t[i] == p.t)));
        assert!(seq.points.windows(2).all(|w| w[1].m >= w[0].m));
    }

    #[test]
    fn constant_one_fails() {
        let t = log_grid(1e-2, 1e6f64.ln());
        let g = vec![1.0; t.len()];
        assert!(matches!(
            extract_vanishing_sequence(&t, &g, Schedule::default(), Schedule::default()),
            Err(Error::SelectionFailure { .. })
        ));
    }

    #[test]
    fn short_grid() {
        assert!(matches!(
            extract_vanishing_sequence(&[2.0], &[0.0], Schedule::default(), Schedule::default()),
            Err(Error::HorizonExhausted)
        ));
    }

    #[test]
    fn schedule_validation() {
        let bad = Schedule { scale: 1.0, power: 1.5 };
        assert!(extract_vanishing_sequence(&[1.0, 2.0], &[0.0, 0.0], bad, Schedule::default()).is_err());
    }
}
