use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{extract_vanishing_sequence, regime_report, sweep, RegimeConfig, SweepConfig, SEARCH_CANDIDATES};
use crate::distances::{
    ball_class_distance, dk_two_sample, ks_1d_law, sorted_copy, w1_1d, NormalLaw, PointMass, TwoSampleOptions,
};
use crate::measures::{choose_kappa, full_covariance, scaling_pair, LevyMeasure, LevyTriplet, RadialFamily, ScalingPair, KAPPA_TOL};
use crate::rng::{tag, RngStream};
use crate::simulate::{asmussen_small_time, circle_rows, cutoff_for_budget, sample_circle, Simulator};

use super::{CliError, RunConfig};

/// Files produced by a command, keyed by extension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outputs {
    pub files: Vec<(String, String)>,
}

fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = OsString::from(stem.as_os_str());
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

impl Outputs {
    fn push(&mut self, ext: &str, content: String) {
        self.files.push((ext.to_string(), content));
    }

    fn json(&mut self, value: &impl Serialize) -> Result<(), CliError> {
        let s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
        self.push("json", s + "\n");
        Ok(())
    }

    pub fn get(&self, ext: &str) -> Option<&str> {
        self.files.iter().find(|f| f.0 == ext).map(|f| f.1.as_str())
    }

    /// Writes `<stem>.<ext>` for every file plus `<stem>.config.json`.
    pub fn write(&self, stem: &Path, cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
        let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
        if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        let mut written = Vec::new();
        let config = serde_json::to_string_pretty(cfg).map_err(|e| CliError::Io(e.to_string()))? + "\n";
        for (ext, content) in self.files.iter().map(|(e, c)| (e.as_str(), c)).chain([("config.json", &config)]) {
            let path = with_ext(stem, ext);
            std::fs::write(&path, content).map_err(|e| io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn kappa_for(cfg: &RunConfig, triplet: &LevyTriplet<f64>) -> Result<f64, CliError> {
    match cfg.triplet.kappa {
        Some(k) => Ok(k),
        None => Ok(choose_kappa(triplet, KAPPA_TOL)?),
    }
}

/// `Sigma(t)` diagonal in closed form for radial measures and a diagonal Gaussian part.
fn closed_form_cov(triplet: &LevyTriplet<f64>, radius: f64) -> Option<Vec<f64>> {
    let LevyMeasure::Radial(m) = triplet.measure() else {
        return None;
    };
    if !triplet.gaussian_cov().is_diagonal() {
        return None;
    }
    let radial = match *m.family() {
        RadialFamily::Zero => 0.0,
        RadialFamily::PowerLog { sigma_shell, beta } => {
            if radius <= sigma_shell {
                0.0
            } else if beta == 1.0 {
                radius.ln().ln() - sigma_shell.ln().ln()
            } else {
                (sigma_shell.ln().powf(1.0 - beta) - radius.ln().powf(1.0 - beta)) / (beta - 1.0)
            }
        }
        RadialFamily::BoundedShell { inner, outer } => (radius.min(outer) / inner).ln().max(0.0),
    };
    let c = m.angular_coefficient() * radial;
    Some(triplet.gaussian_cov().diag().into_iter().map(|g| g + c).collect())
}

#[derive(Serialize)]
struct ScalingRow {
    pair: ScalingPair<f64>,
    closed_form_delta: Option<Vec<f64>>,
}

pub fn cmd_scaling(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let triplet = cfg.triplet.build()?;
    let kappa = kappa_for(cfg, &triplet)?;
    let d = triplet.dim();
    let mut csv = String::from("t,kappa");
    for i in 0..d {
        let _ = write!(csv, ",A_{i}");
    }
    for name in ["B", "Delta"] {
        for i in 0..d {
            for j in 0..d {
                let _ = write!(csv, ",{name}_{i}{j}");
            }
        }
    }
    for i in 0..d {
        let _ = write!(csv, ",closed_Delta_{i}{i}");
    }
    csv.push('\n');
    let mut rows = Vec::new();
    for &t in &cfg.scaling.times {
        let pair = scaling_pair(&triplet, t, kappa)?;
        let closed = closed_form_cov(&triplet, kappa * t.sqrt()).map(|v| v.into_iter().map(f64::sqrt).collect::<Vec<_>>());
        let _ = write!(csv, "{},{}", num(t), num(kappa));
        for x in pair.centering.iter().chain(pair.scaling.as_slice()).chain(pair.delta.as_slice()) {
            let _ = write!(csv, ",{}", num(*x));
        }
        for i in 0..d {
            let _ = write!(csv, ",{}", closed.as_ref().map(|c| num(c[i])).unwrap_or_default());
        }
        csv.push('\n');
        rows.push(ScalingRow {
            pair,
            closed_form_delta: closed,
        });
    }
    let mut out = Outputs::default();
    out.push("csv", csv);
    out.json(&rows)?;
    Ok(out)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let triplet = cfg.triplet.build()?;
    let s = &cfg.sweep;
    let mut sc = SweepConfig::new(s.mode, s.grid(), s.mc_size, cfg.seed());
    sc.classes = s.classes.clone();
    sc.kappa = cfg.triplet.kappa;
    sc.jump_budget = (s.jump_budget > 0.0).then_some(s.jump_budget);
    eprintln!("sweep: {:?}, {} grid points, {} draws each", s.mode, sc.grid.len(), s.mc_size);
    let report = sweep(&triplet, &sc)?;
    let mut jsonl = String::new();
    for row in &report.rows {
        for e in &row.estimates {
            jsonl.push_str(&e.to_json_line());
            jsonl.push('\n');
        }
    }
    let mut out = Outputs::default();
    out.push("csv", report.to_csv());
    out.json(&report)?;
    out.push("jsonl", jsonl);
    Ok(out)
}

#[derive(Serialize)]
struct CircleRow {
    n_param: u64,
    ball: f64,
    two_sample: f64,
    two_sample_exact: bool,
    two_sample_ci: Option<f64>,
}

pub fn cmd_demo_circle(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let c = &cfg.circle;
    if c.dim < 2 {
        return Err(CliError::Config(format!("circle example needs dim >= 2, got {}", c.dim)));
    }
    let seed = cfg.seed();
    let reference = circle_rows(1.0, c.reference_size, c.dim, RngStream::new(seed, tag::CIRCLE, 0))?;
    let origin = vec![0.0; c.dim];
    let mut rows = Vec::new();
    let mut csv = String::from("n_param,ball,two_sample,two_sample_exact\n");
    for &n in &c.n_params {
        eprintln!("demo-circle: n_param {n}");
        let y = sample_circle::<f64>(n, c.size, c.dim, seed)?;
        let ball = ball_class_distance(&y, &PointMass { at: 1.0 }, &origin)?.value;
        let opts = TwoSampleOptions {
            allow_approximate: true,
            candidates: SEARCH_CANDIDATES,
            seed: RngStream::new(seed, tag::CORNER_SEARCH, n).child(0).root,
        };
        let ts = dk_two_sample(&y, &reference, &opts)?;
        let _ = writeln!(csv, "{n},{},{},{}", num(ball), num(ts.value), ts.exact);
        rows.push(CircleRow {
            n_param: n,
            ball,
            two_sample: ts.value,
            two_sample_exact: ts.exact,
            two_sample_ci: ts.ci,
        });
    }
    let mut out = Outputs::default();
    out.push("csv", csv);
    out.json(&rows)?;
    Ok(out)
}

pub fn cmd_asmussen(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let a = &cfg.asmussen;
    let p = a.power()?;
    let triplet = cfg.triplet.build()?;
    eprintln!("asmussen: p = {p}, {} divisors, {} draws each", a.n_list.len(), a.mc_size);
    let rows = asmussen_small_time(&triplet, p, &a.n_list, a.mc_size, cfg.seed())?;
    let mut csv = String::from("n,estimate,ci,target,relative_error\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            r.n,
            num(r.estimate),
            num(r.ci),
            num(r.target),
            num(r.estimate / r.target - 1.0)
        );
    }
    let mut out = Outputs::default();
    out.push("csv", csv);
    out.json(&rows)?;
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WassersteinRow {
    pub t: f64,
    pub axis: usize,
    pub dk: f64,
    pub w1: f64,
    /// `dk / sqrt(w1)`
    pub ratio: f64,
}

pub fn cmd_wasserstein(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let w = &cfg.wasserstein;
    let triplet = cfg.triplet.build()?;
    let sigma2 = full_covariance(&triplet)?.diag();
    let sim = Simulator::new(&triplet)?;
    let mean = triplet.mean()?;
    let mut rows = Vec::new();
    for (k, &t) in w.times.iter().enumerate() {
        eprintln!("wasserstein: t = {t}");
        let eps = if w.jump_budget > 0.0 { cutoff_for_budget(&triplet, t, w.jump_budget)? } else { 0.0 };
        let batch = sim.sample_with_cutoff(t, w.mc_size, eps, RngStream::new(cfg.seed(), tag::SWEEP, k as u64))?;
        for (axis, &s2) in sigma2.iter().enumerate() {
            let scale = (t * s2).sqrt();
            let z: Vec<f64> = sorted_copy(&batch.column(axis)).iter().map(|x| (x - t * mean[axis]) / scale).collect();
            let dk = ks_1d_law(&z, &NormalLaw::standard())?.value;
            let w1 = w1_1d(&z, &NormalLaw::standard())?.value;
            rows.push(WassersteinRow {
                t,
                axis,
                dk,
                w1,
                ratio: dk / w1.sqrt(),
            });
        }
    }
    let mut csv = String::from("t,axis,d_K,W1,ratio\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{}", num(r.t), r.axis, num(r.dk), num(r.w1), num(r.ratio));
    }
    let mut out = Outputs::default();
    out.push("csv", csv);
    out.json(&rows)?;
    Ok(out)
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.kind() {
        csv::ErrorKind::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
        _ => CliError::Config(format!("{}: {e}", path.display())),
    })?;
    let headers = rdr.headers().map_err(|e| CliError::Config(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Config(format!("{}: missing column {name:?}", path.display())))
    };
    let (ti, gi) = (col("t")?, col("g")?);
    let (mut t, mut g) = (Vec::new(), Vec::new());
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| CliError::Config(format!("{}: bad number on data row {}", path.display(), line + 1)))
        };
        t.push(parse(ti)?);
        g.push(parse(gi)?);
    }
    Ok((t, g))
}

pub fn cmd_extract_seq(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let e = &cfg.extract;
    let input = e.input.as_ref().ok_or_else(|| CliError::Config("extract-seq needs an input CSV".into()))?;
    let (t, g) = read_table(input)?;
    let seq = extract_vanishing_sequence(&t, &g, e.delta, e.upsilon)?;
    let mut csv = String::from("n,t,u,g,m,delta,upsilon\n");
    for (n, p) in seq.points.iter().enumerate() {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            n + 1,
            num(p.t),
            num(p.u),
            num(p.g),
            p.m,
            num(p.delta),
            num(p.upsilon)
        );
    }
    let mut out = Outputs::default();
    out.push("csv", csv);
    out.json(&seq)?;
    Ok(out)
}

pub fn cmd_regime(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let r = &cfg.regime;
    let rc = RegimeConfig {
        betas: r.betas.clone(),
        d: cfg.triplet.dim,
        grid: r.times.clone(),
        mc_size: r.mc_size,
        seed: cfg.seed(),
        kappa: cfg.triplet.kappa,
    };
    eprintln!("regime: betas {:?}, {} grid points", rc.betas, rc.grid.len());
    let report = regime_report(&rc)?;
    let mut out = Outputs::default();
    out.push("txt", report.to_table());
    out.json(&report)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::measures::RadialLevyMeasure;

    #[test]
    fn closed_form_matches_quadrature() {
        for beta in [1.0, 2.0, 3.0] {
            let m = RadialLevyMeasure::power_log(std::f64::consts::E, beta, 2).unwrap();
            let tr = LevyTriplet::centered(Matrix::identity(2), m).unwrap();
            for t in [1.0, 1e3, 1e6] {
                let pair = scaling_pair(&tr, t, 3.0).unwrap();
                let closed = closed_form_cov(&tr, 3.0 * t.sqrt()).unwrap();
                let quad = pair.delta.as_slice()[0].powi(2);
                assert!((quad / closed[0] - 1.0).abs() < 1e-8, "{beta} {t}");
            }
        }
    }

    #[test]
    fn stem_extension() {
        assert_eq!(with_ext(Path::new("a/b.v1"), "config.json"), PathBuf::from("a/b.v1.config.json"));
    }
}
