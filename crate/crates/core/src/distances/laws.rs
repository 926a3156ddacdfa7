use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_to_infinity, QuadOptions};
use crate::scalar::Real;
use crate::special::{chi_radius_cdf, norm_cdf, norm_pdf, norm_quantile};

/// One-dimensional reference law as seen by the distance estimators.
pub trait Law1d<T: Real>: Sync {
    fn cdf(&self, x: T) -> T;

    /// `P(X < x)`; equal to [`Law1d::cdf`] for continuous laws.
    fn cdf_left(&self, x: T) -> T {
        self.cdf(x)
    }

    /// Generalised inverse `inf { x : F(x) >= p }`.
    fn quantile(&self, p: T) -> T;

    /// `int_{-inf}^x F`.
    fn lower_partial(&self, x: T) -> Result<T>;

    /// `int_x^inf (1 - F)`.
    fn upper_partial(&self, x: T) -> Result<T>;

    /// `int_a^b F` for `a <= b`, using whichever tail keeps cancellation small.
    fn cdf_integral(&self, a: T, b: T) -> Result<T> {
        if b <= a {
            return Ok(T::zero());
        }
        let m = self.quantile(T::lit(0.5));
        if b <= m {
            Ok(self.lower_partial(b)? - self.lower_partial(a)?)
        } else if a >= m {
            Ok((b - a) - (self.upper_partial(a)? - self.upper_partial(b)?))
        } else {
            Ok(self.cdf_integral(a, m)? + self.cdf_integral(m, b)?)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalLaw<T> {
    pub mean: T,
    pub sd: T,
}

impl<T: Real> NormalLaw<T> {
    pub fn new(mean: T, sd: T) -> Result<Self> {
        if !(sd > T::zero() && sd.is_finite() && mean.is_finite()) {
            return Err(Error::invalid(format!("normal law needs finite mean and sd > 0, got sd = {sd}")));
        }
        Ok(Self { mean, sd })
    }

    pub fn standard() -> Self {
        Self { mean: T::zero(), sd: T::one() }
    }

    fn z(&self, x: T) -> T {
        (x - self.mean) / self.sd
    }
}

impl<T: Real> Law1d<T> for NormalLaw<T> {
    fn cdf(&self, x: T) -> T {
        norm_cdf(self.z(x))
    }

    fn quantile(&self, p: T) -> T {
        self.mean + self.sd * norm_quantile(p)
    }

    fn lower_partial(&self, x: T) -> Result<T> {
        if x == T::neg_infinity() {
            return Ok(T::zero());
        }
        let z = self.z(x);
        Ok(self.sd * (z * norm_cdf(z) + norm_pdf(z)))
    }

    fn upper_partial(&self, x: T) -> Result<T> {
        if x == T::infinity() {
            return Ok(T::zero());
        }
        let z = self.z(x);
        Ok(self.sd * (norm_pdf(z) - z * norm_cdf(-z)))
    }
}

/// Empirical law of a finite sample.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalLaw<T> {
    sorted: Vec<T>,
    /// `prefix[k] = sum of the k smallest values`.
    prefix: Vec<T>,
}

impl<T: Real> EmpiricalLaw<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("empirical law needs finite values"));
        }
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
        let mut prefix = Vec::with_capacity(values.len() + 1);
        let mut acc = T::zero();
        prefix.push(acc);
        for &v in &values {
            acc = acc + v;
            prefix.push(acc);
        }
        Ok(Self { sorted: values, prefix })
    }

    pub fn sorted(&self) -> &[T] {
        &self.sorted
    }

    fn n(&self) -> T {
        T::from_usize_lossy(self.sorted.len())
    }

    fn count_le(&self, x: T) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }
}

impl<T: Real> Law1d<T> for EmpiricalLaw<T> {
    fn cdf(&self, x: T) -> T {
        T::from_usize_lossy(self.count_le(x)) / self.n()
    }

    fn cdf_left(&self, x: T) -> T {
        T::from_usize_lossy(self.sorted.partition_point(|&v| v < x)) / self.n()
    }

    fn quantile(&self, p: T) -> T {
        let n = self.sorted.len();
        let k = (p * self.n()).ceil().to_f64_lossy();
        let k = if k.is_finite() { k.max(1.0) as usize } else { 1 };
        self.sorted[k.min(n) - 1]
    }

    fn lower_partial(&self, x: T) -> Result<T> {
        let k = self.count_le(x);
        Ok((T::from_usize_lossy(k) * x - self.prefix[k]) / self.n())
    }

    fn upper_partial(&self, x: T) -> Result<T> {
        let n = self.sorted.len();
        let k = self.count_le(x);
        Ok((self.prefix[n] - self.prefix[k] - T::from_usize_lossy(n - k) * x) / self.n())
    }

    fn cdf_integral(&self, a: T, b: T) -> Result<T> {
        if b <= a {
            return Ok(T::zero());
        }
        // Exact step integral, free of the large-|x| cancellation above.
        let (ka, kb) = (self.count_le(a), self.count_le(b));
        let mut acc = T::from_usize_lossy(ka) * ((if kb > ka { self.sorted[ka] } else { b }) - a);
        for k in ka..kb {
            let next = if k + 1 < kb { self.sorted[k + 1] } else { b };
            acc = acc + T::from_usize_lossy(k + 1) * (next - self.sorted[k]);
        }
        Ok(acc / self.n())
    }
}

/// Point mass at `at`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointMass<T> {
    pub at: T,
}

impl<T: Real> Law1d<T> for PointMass<T> {
    fn cdf(&self, x: T) -> T {
        if x >= self.at {
            T::one()
        } else {
            T::zero()
        }
    }

    fn cdf_left(&self, x: T) -> T {
        if x > self.at {
            T::one()
        } else {
            T::zero()
        }
    }

    fn quantile(&self, _p: T) -> T {
        self.at
    }

    fn lower_partial(&self, x: T) -> Result<T> {
        Ok((x - self.at).max(T::zero()))
    }

    fn upper_partial(&self, x: T) -> Result<T> {
        Ok((self.at - x).max(T::zero()))
    }
}

/// Law of `|sigma Z|` for a standard Gaussian `Z` in `R^d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiRadius<T> {
    pub dim: usize,
    pub sigma: T,
}

impl<T: Real> ChiRadius<T> {
    pub fn new(dim: usize, sigma: T) -> Result<Self> {
        if dim == 0 || !(sigma > T::zero() && sigma.is_finite()) {
            return Err(Error::invalid("chi radius law needs dim >= 1 and sigma > 0"));
        }
        Ok(Self { dim, sigma })
    }
}

const TAIL_TOL: f64 = 1e-12;

impl<T: Real> Law1d<T> for ChiRadius<T> {
    fn cdf(&self, x: T) -> T {
        chi_radius_cdf(self.dim, self.sigma, x)
    }

    fn quantile(&self, p: T) -> T {
        if p <= T::zero() {
            return T::zero();
        }
        if p >= T::one() {
            return T::infinity();
        }
        let mut hi = self.sigma;
        while self.cdf(hi) < p {
            hi = hi * T::lit(2.0);
        }
        let mut lo = T::zero();
        for _ in 0..200 {
            let mid = (lo + hi) * T::lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }

    fn lower_partial(&self, x: T) -> Result<T> {
        if x <= T::zero() {
            return Ok(T::zero());
        }
        integrate(|r| self.cdf(r), T::zero(), x, QuadOptions::with_rel_tol(TAIL_TOL))
            .map(|q| q.value)
            .map_err(|_| Error::TailDivergence)
    }

    fn upper_partial(&self, x: T) -> Result<T> {
        let start = x.max(T::zero());
        let tail = integrate_to_infinity(|r| T::one() - self.cdf(r), start, QuadOptions::with_rel_tol(TAIL_TOL))
            .map_err(|_| Error::TailDivergence)?
            .value;
        Ok(tail + (start - x))
    }
}

/// Continuous CDF tabulated at increasing abscissae and interpolated linearly;
/// zero before the first knot and one after the last.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedCdf<T> {
    xs: Vec<T>,
    fs: Vec<T>,
}

impl<T: Real> TabulatedCdf<T> {
    pub fn new(xs: Vec<T>, fs: Vec<T>) -> Result<Self> {
        if xs.len() < 2 || xs.len() != fs.len() {
            return Err(Error::invalid("tabulated CDF needs at least two matching knots"));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().chain(&fs).any(|v| !v.is_finite()) {
            return Err(Error::invalid("tabulated CDF abscissae must be finite and strictly increasing"));
        }
        if fs.windows(2).any(|w| w[1] < w[0]) || fs[0] != T::zero() || fs[fs.len() - 1] != T::one() {
            return Err(Error::invalid("tabulated CDF must be non-decreasing from 0 to 1"));
        }
        Ok(Self { xs, fs })
    }

    fn segment(&self, x: T) -> usize {
        self.xs.partition_point(|&v| v <= x).clamp(1, self.xs.len() - 1) - 1
    }

    /// `int_{x_0}^x F` for `x` inside the table.
    fn area_to(&self, x: T) -> T {
        let k = self.segment(x);
        let mut acc = T::zero();
        for j in 0..k {
            acc = acc + (self.xs[j + 1] - self.xs[j]) * (self.fs[j] + self.fs[j + 1]) * T::lit(0.5);
        }
        acc + (x - self.xs[k]) * (self.fs[k] + self.cdf(x)) * T::lit(0.5)
    }
}

impl<T: Real> Law1d<T> for TabulatedCdf<T> {
    fn cdf(&self, x: T) -> T {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return T::zero();
        }
        if x >= self.xs[n - 1] {
            return T::one();
        }
        let k = self.segment(x);
        let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.fs[k] + w * (self.fs[k + 1] - self.fs[k])
    }

    fn quantile(&self, p: T) -> T {
        let k = self.fs.partition_point(|&f| f < p);
        if k == 0 {
            return self.xs[0];
        }
        if k >= self.fs.len() {
            return self.xs[self.xs.len() - 1];
        }
        let (f0, f1) = (self.fs[k - 1], self.fs[k]);
        self.xs[k - 1] + (p - f0) / (f1 - f0) * (self.xs[k] - self.xs[k - 1])
    }

    fn lower_partial(&self, x: T) -> Result<T> {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return Ok(T::zero());
        }
        if x >= self.xs[n - 1] {
            return Ok(self.area_to(self.xs[n - 1]) + (x - self.xs[n - 1]));
        }
        Ok(self.area_to(x))
    }

    fn upper_partial(&self, x: T) -> Result<T> {
        let n = self.xs.len();
        let last = self.xs[n - 1];
        if x >= last {
            return Ok(T::zero());
        }
        let lo = x.max(self.xs[0]);
        let inside = (last - lo) - (self.area_to(last) - self.area_to(lo));
        Ok(inside + (lo - x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn normal_partials_match_quadrature() {
        let law = NormalLaw::new(0.3, 1.7).unwrap();
        for &x in &[-3.0, -0.2, 0.0, 1.5, 4.0] {
            let lower = simpson(|y| law.cdf(y), -20.0, x, 200_000);
            let upper = simpson(|y| 1.0 - law.cdf(y), x, 25.0, 200_000);
            assert!((law.lower_partial(x).unwrap() - lower).abs() < 1e-10, "{x}");
            assert!((law.upper_partial(x).unwrap() - upper).abs() < 1e-10, "{x}");
        }
        let direct = simpson(|y| law.cdf(y), -1.0, 2.5, 100_000);
        assert!((law.cdf_integral(-1.0, 2.5).unwrap() - direct).abs() < 1e-11);
    }

    #[test]
    fn empirical_cdf_and_partials() {
        let law = EmpiricalLaw::new(vec![3.0f64, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(law.cdf(2.0), 0.75);
        assert_eq!(law.cdf_left(2.0), 0.25);
        assert_eq!(law.quantile(0.5), 2.0);
        assert_eq!(law.quantile(0.51), 2.0);
        assert_eq!(law.quantile(0.76), 3.0);
        assert_eq!(law.lower_partial(2.5).unwrap(), (1.5 + 0.5 + 0.5) / 4.0);
        assert_eq!(law.upper_partial(2.5).unwrap(), 0.5 / 4.0);
        assert!((law.cdf_integral(0.0, 2.5).unwrap() - law.lower_partial(2.5).unwrap()).abs() < 1e-15);
        assert!(EmpiricalLaw::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn chi_radius_quantile_and_tail() {
        let law = ChiRadius::new(2, 1.0f64).unwrap();
        let q = law.quantile(0.5);
        assert!((q - (2.0f64 * 2f64.ln()).sqrt()).abs() < 1e-12);
        // E|Z| in two dimensions is sqrt(pi/2).
        assert!((law.upper_partial(0.0).unwrap() - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn tabulated_cdf_is_piecewise_linear() {
        let law = TabulatedCdf::new(vec![0.0f64, 1.0, 3.0], vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(law.cdf(0.5), 0.25);
        assert_eq!(law.cdf(2.0), 0.75);
        assert_eq!(law.quantile(0.75), 2.0);
        assert!((law.lower_partial(3.0).unwrap() - (0.25 + 1.5)).abs() < 1e-15);
        assert!((law.upper_partial(0.0).unwrap() - (3.0 - 1.75)).abs() < 1e-15);
        assert!(TabulatedCdf::new(vec![0.0, 1.0], vec![0.1, 1.0]).is_err());
    }

    #[test]
    fn point_mass_left_limit() {
        let law = PointMass { at: 1.0 };
        assert_eq!(law.cdf(1.0), 1.0);
        assert_eq!(law.cdf_left(1.0), 0.0);
        assert_eq!(law.cdf_integral(0.0, 3.0).unwrap(), 2.0);
    }
}
