use rand::Rng;

use crate::error::{Error, Result};
use crate::measures::{Atom, LevyMeasure, RadialFamily, RadialLevyMeasure};
use crate::scalar::Real;

/// Initial knots of the radial tail table.
pub const TABLE_KNOTS: usize = 512;
/// Tail ratio `nu_bar(r) / nu_bar(sigma)` at the last knot.
const TABLE_FLOOR: f64 = 1e-17;
/// Target accuracy of the interpolated log-radius.
const KNOT_TOL: f64 = 1e-8;
const MAX_REFINE_PASSES: usize = 12;
const MAX_KNOTS: usize = 1 << 15;

/// Inverse of the normalised radial tail, tabulated in
/// `y = ln(nu_bar(e^x) / nu_bar(sigma))` against `x = ln r` and interpolated
/// by a monotone cubic.
#[derive(Clone, Debug)]
pub struct RadialTable<T> {
    /// Ascending `y` (from the floor up to 0).
    ys: Vec<T>,
    xs: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> RadialTable<T> {
    pub fn build(measure: &RadialLevyMeasure<T>) -> Result<Self> {
        let (sigma, beta) = match *measure.family() {
            RadialFamily::PowerLog { sigma_shell, beta } => (sigma_shell, beta),
            _ => return Err(Error::invalid("radial table needs a power-log measure")),
        };
        let x0 = sigma.ln();
        let area = measure.sphere_area();
        let s0 = measure.scaled_tail_mass_at_log_radius(x0)?;
        // Knot (x, y, dy/dx); d ln nu_bar / d ln r = -S (ln r)^{-beta} / (r^2 nu_bar(r)).
        let knot = |x: T| -> Result<(T, T, T)> {
            let s = measure.scaled_tail_mass_at_log_radius(x)?;
            let y = T::lit(-2.0) * (x - x0) + (s / s0).ln();
            Ok((x, y, -area * x.powf(-beta) / s))
        };
        let floor = T::lit(TABLE_FLOOR.ln());
        let mut x_max = x0 + T::lit(20.0);
        while knot(x_max)?.1 > floor {
            x_max = x_max + T::lit(5.0);
        }
        let step = (x_max - x0) / T::from_usize_lossy(TABLE_KNOTS - 1);
        let mut pts: Vec<(T, T, T)> = (0..TABLE_KNOTS)
            .map(|i| {
                let x = if i == TABLE_KNOTS - 1 { x_max } else { x0 + step * T::from_usize_lossy(i) };
                let mut k = knot(x)?;
                if i == 0 {
                    k.1 = T::zero();
                }
                Ok(k)
            })
            .collect::<Result<_>>()?;
        let mut table = Self::from_points(&pts)?;
        for _ in 0..MAX_REFINE_PASSES {
            let mut inserted = Vec::new();
            for w in pts.windows(2) {
                let km = knot((w[0].0 + w[1].0) * T::lit(0.5))?;
                if (table.x_at(km.1) - km.0).abs() > T::tolerance(KNOT_TOL) {
                    inserted.push(km);
                }
            }
            if inserted.is_empty() {
                return Ok(table);
            }
            pts.extend(inserted);
            pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite knots"));
            if pts.len() > MAX_KNOTS {
                break;
            }
            table = Self::from_points(&pts)?;
        }
        Ok(table)
    }

    /// Knots `(x, y, dy/dx)` with `x` ascending and `y` strictly decreasing.
    fn from_points(pts: &[(T, T, T)]) -> Result<Self> {
        for (i, w) in pts.windows(2).enumerate() {
            if !(w[1].1 < w[0].1) || !w[1].1.is_finite() || !(w[1].2 < T::zero()) {
                return Err(Error::TableBuildFailure(i + 1));
            }
        }
        let ys: Vec<T> = pts.iter().rev().map(|p| p.1).collect();
        let xs: Vec<T> = pts.iter().rev().map(|p| p.0).collect();
        let slopes: Vec<T> = pts.iter().rev().map(|p| p.2.recip()).collect();
        Ok(Self { ys, xs, slopes })
    }

    pub fn knots(&self) -> usize {
        self.ys.len()
    }

    /// Interpolated `x(y)` for `y <= 0`, extrapolated linearly below the floor.
    pub fn x_at(&self, y: T) -> T {
        let n = self.ys.len();
        if y >= self.ys[n - 1] {
            return self.xs[n - 1];
        }
        if y <= self.ys[0] {
            return self.xs[0] + (y - self.ys[0]) * self.slopes[0];
        }
        let k = self.ys.partition_point(|&v| v <= y).clamp(1, n - 1) - 1;
        let h = self.ys[k + 1] - self.ys[k];
        let s = (y - self.ys[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        h00 * self.xs[k] + h10 * h * self.slopes[k] + h01 * self.xs[k + 1] + h11 * h * self.slopes[k + 1]
    }
}

#[derive(Clone, Debug)]
enum Kind<T> {
    Empty,
    Table { x0: T, table: RadialTable<T> },
    Shell { inner: T, outer: T },
    /// Atoms sorted by decreasing radius with running mass.
    Atoms { atoms: Vec<Atom<T>>, radii: Vec<T>, cumulative: Vec<T> },
}

/// Draws jumps from the normalised Levy measure, optionally conditioned on
/// the jump radius exceeding a cutoff.
#[derive(Clone, Debug)]
pub struct JumpSampler<T> {
    dim: usize,
    kind: Kind<T>,
}

/// Jump law restricted to `|v| > eps`.
#[derive(Clone, Copy, Debug)]
pub struct Cutoff<T> {
    pub eps: T,
    /// `nu_bar(eps)`.
    pub rate: T,
    /// Log of the conditional tail at the support start (table families).
    y_shift: T,
    /// Number of leading atoms above `eps`.
    atoms_above: usize,
    /// Lower radius for the shell family.
    shell_lo: T,
}

impl<T: Real> JumpSampler<T> {
    pub fn new(measure: &LevyMeasure<T>) -> Result<Self> {
        let dim = measure.dim();
        let kind = match measure {
            LevyMeasure::Radial(m) => match *m.family() {
                RadialFamily::Zero => Kind::Empty,
                RadialFamily::BoundedShell { inner, outer } => Kind::Shell { inner, outer },
                RadialFamily::PowerLog { sigma_shell, .. } => {
                    let mass = m.total_mass()?;
                    if !mass.is_finite() {
                        return Err(Error::InfiniteActivity);
                    }
                    Kind::Table {
                        x0: sigma_shell.ln(),
                        table: RadialTable::build(m)?,
                    }
                }
            },
            LevyMeasure::Atomic(a) => {
                let mut atoms: Vec<Atom<T>> = a.atoms().iter().filter(|x| x.weight > T::zero()).cloned().collect();
                let radius = |p: &[T]| p.iter().fold(T::zero(), |s, &c| s + c * c).sqrt();
                atoms.sort_by(|x, y| radius(&y.point).partial_cmp(&radius(&x.point)).expect("finite atoms"));
                let radii = atoms.iter().map(|x| radius(&x.point)).collect();
                let mut acc = T::zero();
                let cumulative = atoms
                    .iter()
                    .map(|x| {
                        acc = acc + x.weight;
                        acc
                    })
                    .collect();
                Kind::Atoms { atoms, radii, cumulative }
            }
        };
        Ok(Self { dim, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Prepares the law of jumps with radius above `eps` (all jumps for `eps = 0`).
    pub fn cutoff(&self, measure: &LevyMeasure<T>, eps: T) -> Result<Cutoff<T>> {
        if eps < T::zero() {
            return Err(Error::InvalidCutoff(eps.to_f64_lossy()));
        }
        let rate = measure.tail_mass(eps)?;
        let mut c = Cutoff {
            eps,
            rate,
            y_shift: T::zero(),
            atoms_above: 0,
            shell_lo: T::zero(),
        };
        match &self.kind {
            Kind::Empty => {}
            Kind::Table { x0, .. } => {
                let m = measure.as_radial().expect("table sampler comes from a radial measure");
                let xe = eps.max(x0.exp()).ln().max(*x0);
                let se = m.scaled_tail_mass_at_log_radius(xe)?;
                let s0 = m.scaled_tail_mass_at_log_radius(*x0)?;
                c.y_shift = T::lit(-2.0) * (xe - *x0) + (se / s0).ln();
            }
            Kind::Shell { inner, .. } => c.shell_lo = eps.max(*inner),
            Kind::Atoms { radii, .. } => c.atoms_above = radii.partition_point(|&r| r > eps),
        }
        Ok(c)
    }

    /// Writes one jump into `out` and returns its radius.
    pub fn sample_into<R: Rng + ?Sized>(&self, cut: &Cutoff<T>, rng: &mut R, out: &mut [T]) -> T {
        match &self.kind {
            Kind::Empty => {
                out.fill(T::zero());
                T::zero()
            }
            Kind::Atoms { atoms, cumulative, .. } => {
                let k = cut.atoms_above;
                if k == 0 {
                    out.fill(T::zero());
                    return T::zero();
                }
                let u = T::sample_open01(rng) * cumulative[k - 1];
                let i = cumulative[..k].partition_point(|&c| c < u).min(k - 1);
                out.copy_from_slice(&atoms[i].point);
                out.iter().fold(T::zero(), |s, &c| s + c * c).sqrt()
            }
            Kind::Shell { outer, .. } => {
                // P(R > r) proportional to r^{-2} - outer^{-2} on [lo, outer].
                let u = T::sample_open01(rng);
                let a = cut.shell_lo.powi(-2);
                let b = outer.powi(-2);
                let r = (b + u * (a - b)).sqrt().recip();
                scatter(r, self.dim, rng, out);
                r
            }
            Kind::Table { table, .. } => {
                let y = T::sample_open01(rng).ln() + cut.y_shift;
                let r = table.x_at(y).exp();
                scatter(r, self.dim, rng, out);
                r
            }
        }
    }
}

/// `out = r * theta` with `theta` uniform on the unit sphere.
fn scatter<T: Real, R: Rng + ?Sized>(r: T, dim: usize, rng: &mut R, out: &mut [T]) {
    if dim == 1 {
        out[0] = if rng.random::<bool>() { r } else { -r };
        return;
    }
    loop {
        let mut norm2 = T::zero();
        for o in out.iter_mut() {
            let z = T::sample_normal(rng);
            *o = z;
            norm2 = norm2 + z * z;
        }
        if norm2 > T::zero() {
            let scale = r / norm2.sqrt();
            for o in out.iter_mut() {
                *o = *o * scale;
            }
            return;
        }
    }
}

/// Single jump from the full normalised measure.
pub fn sample_radial_jump<T: Real, R: Rng + ?Sized>(sampler: &JumpSampler<T>, full: &Cutoff<T>, rng: &mut R) -> Vec<T> {
    let mut out = vec![T::zero(); sampler.dim()];
    sampler.sample_into(full, rng, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{tag, RngStream};
    use std::f64::consts::E;

    fn power_log(d: usize) -> (LevyMeasure<f64>, JumpSampler<f64>) {
        let m: LevyMeasure<f64> = RadialLevyMeasure::power_log(E, 2.0, d).unwrap().into();
        let s = JumpSampler::new(&m).unwrap();
        (m, s)
    }

    #[test]
    fn table_inverse_matches_forward_tail() {
        let m = RadialLevyMeasure::power_log(E, 2.0, 2).unwrap();
        let table = RadialTable::build(&m).unwrap();
        assert!(table.knots() >= TABLE_KNOTS);
        let nb0 = m.tail_mass(E).unwrap();
        for r in (0..400).map(|i| E * (1.0 + 0.0137 * i as f64)).chain([123.0, 1e4, 1e7]) {
            let y = (m.tail_mass(r).unwrap() / nb0).ln();
            let back = table.x_at(y).exp();
            assert!(((back - r) / r).abs() < 1e-8, "{r}: {back}");
        }
    }

    #[test]
    fn empirical_tail_probability() {
        let (m, s) = power_log(1);
        let full = s.cutoff(&m, 0.0).unwrap();
        let mut rng = RngStream::new(7, tag::INCREMENT, 0).block(0);
        let n = 1_000_000;
        let r0 = E * E;
        let p = m.tail_mass(r0).unwrap() / m.tail_mass(E).unwrap();
        let mut hits = 0usize;
        let mut out = [0.0];
        for _ in 0..n {
            let r = s.sample_into(&full, &mut rng, &mut out);
            assert!(r >= E * (1.0 - 1e-12));
            hits += (r > r0) as usize;
        }
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((hits as f64 / n as f64) - p).abs() < 3.0 * se);
    }

    #[test]
    fn directions_are_centred() {
        let (m, s) = power_log(3);
        let full = s.cutoff(&m, 0.0).unwrap();
        let mut rng = RngStream::new(8, tag::INCREMENT, 0).block(0);
        let n = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let v = sample_radial_jump(&s, &full, &mut rng);
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            for k in 0..3 {
                mean[k] += v[k] / r / n as f64;
            }
        }
        assert!(mean.iter().all(|m| m.abs() < 4.0 / (n as f64).sqrt()));
    }

    #[test]
    fn conditioned_draws_exceed_cutoff() {
        let (m, s) = power_log(2);
        let cut = s.cutoff(&m, 50.0).unwrap();
        assert!((cut.rate - m.tail_mass(50.0).unwrap()).abs() < 1e-15);
        let mut rng = RngStream::new(9, tag::INCREMENT, 0).block(0);
        let mut out = [0.0; 2];
        let n = 200_000;
        let mut above = 0usize;
        let p = m.tail_mass(100.0).unwrap() / cut.rate;
        for _ in 0..n {
            let r = s.sample_into(&cut, &mut rng, &mut out);
            assert!(r >= 50.0 * (1.0 - 1e-9));
            above += (r > 100.0) as usize;
        }
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((above as f64 / n as f64) - p).abs() < 4.0 * se);
    }

    #[test]
    fn shell_sampler_respects_support() {
        let m: LevyMeasure<f64> = RadialLevyMeasure::bounded_shell(1.5, 4.0, 2).unwrap().into();
        let s = JumpSampler::new(&m).unwrap();
        let full = s.cutoff(&m, 0.0).unwrap();
        let mut rng = RngStream::new(10, tag::INCREMENT, 0).block(0);
        let mut out = [0.0; 2];
        let n = 200_000;
        let p = m.tail_mass(2.0).unwrap() / m.total_mass().unwrap();
        let mut hits = 0;
        for _ in 0..n {
            let r = s.sample_into(&full, &mut rng, &mut out);
            assert!((1.5..=4.0).contains(&r));
            hits += (r > 2.0) as usize;
        }
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((hits as f64 / n as f64) - p).abs() < 4.0 * se);
    }
}
