//! KL and total-variation quantities for the epoch adversary, plus
//! regret-scaling fits over horizon sweeps.
//!
//! Divergences are in nats.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fits use only horizons at or above this.
pub const MIN_FIT_HORIZON: u64 = 1 << 10;

/// Largest epoch length for [`exact_tv_small_epoch`].
pub const MAX_EXACT_TV_EPOCH: u32 = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("{what} = {value} is out of range")]
    Domain { what: &'static str, value: f64 },
    #[error("constraint violated: 8ε²d ≤ 1 (8ε²d = {0})")]
    Budget(f64),
    #[error("epoch length {0} exceeds the enumeration limit {MAX_EXACT_TV_EPOCH}")]
    EpochTooLong(u32),
    #[error("horizons must be strictly increasing")]
    Unsorted,
    #[error("only {0} usable points, need at least 3")]
    TooFewPoints(usize),
    #[error("horizon {0} has fewer than 2 runs")]
    TooFewRuns(u64),
    #[error("malformed aggregate CSV at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// `p ln(p/q) + (1-p) ln((1-p)/(1-q))` with `0 ln 0 = 0`. Returns infinity
/// when `q` puts zero mass where `p` does not.
pub fn kl_bernoulli(p: f64, q: f64) -> Result<f64, AnalysisError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalysisError::Domain { what: "p", value: p });
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(AnalysisError::Domain { what: "q", value: q });
    }
    let term = |a: f64, b: f64| -> f64 {
        if a == 0.0 {
            0.0
        } else if b == 0.0 {
            f64::INFINITY
        } else {
            a * (a / b).ln()
        }
    };
    Ok(term(p, q) + term(1.0 - p, 1.0 - q))
}

/// KL between Bernoulli(1/2) and Bernoulli(1/2 + eps):
/// `(1/2) ln(1 + 4 eps^2 / (1 - 4 eps^2))`.
pub fn per_step_kl(eps: f64) -> Result<f64, AnalysisError> {
    if !(0.0..0.5).contains(&eps) {
        return Err(AnalysisError::Domain { what: "ε", value: eps });
    }
    let e2 = 4.0 * eps * eps;
    Ok(0.5 * (e2 / (1.0 - e2)).ln_1p())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochMeasurePair {
    pub epsilon: f64,
    pub epoch_length: u32,
    pub per_step_kl: f64,
    /// `4 eps^2 d`
    pub epoch_kl_bound: f64,
    /// `eps sqrt(2 d)`
    pub tv_bound: f64,
}

pub fn epoch_bounds(eps: f64, d: u32) -> Result<EpochMeasurePair, AnalysisError> {
    let per = per_step_kl(eps)?;
    let df = f64::from(d);
    let budget = 8.0 * eps * eps * df;
    if budget > 1.0 {
        return Err(AnalysisError::Budget(budget));
    }
    Ok(EpochMeasurePair {
        epsilon: eps,
        epoch_length: d,
        per_step_kl: per,
        epoch_kl_bound: 4.0 * eps * eps * df,
        tv_bound: eps * (2.0 * df).sqrt(),
    })
}

/// Total variation between the `d`-fold products of Bernoulli(1/2) and
/// Bernoulli(1/2 + eps), summed over all `2^d` outcome strings.
pub fn exact_tv_small_epoch(eps: f64, d: u32) -> Result<f64, AnalysisError> {
    if d > MAX_EXACT_TV_EPOCH {
        return Err(AnalysisError::EpochTooLong(d));
    }
    if !(0.0..=0.5).contains(&eps) {
        return Err(AnalysisError::Domain { what: "ε", value: eps });
    }
    let q = 0.5 + eps;
    let p_uniform = 0.5f64.powi(d as i32);
    let mut total = 0.0;
    for outcome in 0u32..(1 << d) {
        let ones = outcome.count_ones() as i32;
        let p_tilt = q.powi(ones) * (1.0 - q).powi(d as i32 - ones);
        total += (p_uniform - p_tilt).abs();
    }
    Ok(0.5 * total)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub horizon: u64,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingFit {
    pub points: Vec<ScalingPoint>,
    pub alpha: f64,
    pub prefactor: f64,
    pub r2: f64,
}

/// The fit report as serialized to JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub alpha: f64,
    pub prefactor: f64,
    pub r2: f64,
    pub points_used: usize,
}

impl ScalingFit {
    pub fn report(&self) -> FitReport {
        FitReport {
            alpha: self.alpha,
            prefactor: self.prefactor,
            r2: self.r2,
            points_used: self.points.len(),
        }
    }
}

/// Least-squares slope of `ln R` on `ln T` over points with
/// `T >= min_horizon` and `R > 0`.
pub fn fit_scaling_exponent_from(points: &[ScalingPoint], min_horizon: u64) -> Result<ScalingFit, AnalysisError> {
    if points.windows(2).any(|w| w[0].horizon >= w[1].horizon) {
        return Err(AnalysisError::Unsorted);
    }
    let mut used = Vec::new();
    for p in points.iter().filter(|p| p.horizon >= min_horizon) {
        if p.mean > 0.0 && p.mean.is_finite() {
            used.push(*p);
        } else {
            log::warn!("dropping T = {} with non-positive regret {}", p.horizon, p.mean);
        }
    }
    if used.len() < 3 {
        return Err(AnalysisError::TooFewPoints(used.len()));
    }
    let xs: Vec<f64> = used.iter().map(|p| (p.horizon as f64).ln()).collect();
    let ys: Vec<f64> = used.iter().map(|p| p.mean.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let alpha = sxy / sxx;
    let intercept = my - alpha * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - alpha * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Ok(ScalingFit {
        points: used,
        alpha,
        prefactor: intercept.exp(),
        r2,
    })
}

/// [`fit_scaling_exponent_from`] with the default burn-in.
pub fn fit_scaling_exponent(points: &[ScalingPoint]) -> Result<ScalingFit, AnalysisError> {
    fit_scaling_exponent_from(points, MIN_FIT_HORIZON)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AggregatePoint {
    pub horizon: u64,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
    pub lower95: f64,
    pub upper95: f64,
}

impl AggregatePoint {
    pub fn scaling_point(&self) -> ScalingPoint {
        ScalingPoint {
            horizon: self.horizon,
            mean: self.mean,
            stderr: self.stderr,
        }
    }
}

/// Mean and standard error per horizon from `(T, seed, final regret)`
/// records. Records are sorted by `(T, seed)` first, so the result does not
/// depend on input order.
pub fn aggregate_runs(records: &[(u64, u64, f64)]) -> Result<Vec<AggregatePoint>, AnalysisError> {
    let mut sorted = records.to_vec();
    sorted.sort_by_key(|r| (r.0, r.1));
    let mut out = Vec::new();
    for group in sorted.chunk_by(|a, b| a.0 == b.0) {
        let horizon = group[0].0;
        if group.len() < 2 {
            return Err(AnalysisError::TooFewRuns(horizon));
        }
        let (mean, stderr) = mean_stderr(group.iter().map(|r| r.2));
        out.push(AggregatePoint {
            horizon,
            runs: group.len(),
            mean,
            stderr,
            lower95: mean - 1.96 * stderr,
            upper95: mean + 1.96 * stderr,
        });
    }
    Ok(out)
}

fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pointwise mean and 95% band of equally long cumulative-regret curves.
pub fn curve_band(curves: &[&[f64]]) -> Vec<(f64, f64, f64)> {
    let len = curves.iter().map(|c| c.len()).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let (mean, se) = mean_stderr(curves.iter().map(|c| c[i]));
            (mean, mean - 1.96 * se, mean + 1.96 * se)
        })
        .collect()
}

pub fn write_aggregate_csv<W: Write>(mut w: W, points: &[AggregatePoint]) -> io::Result<()> {
    writeln!(w, "T,mean_regret,stderr")?;
    for p in points {
        writeln!(w, "{},{},{}", p.horizon, p.mean, p.stderr)?;
    }
    Ok(())
}

pub fn read_aggregate_csv<R: BufRead>(r: R) -> Result<Vec<ScalingPoint>, AnalysisError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| AnalysisError::Parse { line: i + 1, msg: e.to_string() })?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let bad = |msg: &str| AnalysisError::Parse { line: i + 1, msg: msg.into() };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 3 {
            return Err(bad("expected 3 fields"));
        }
        out.push(ScalingPoint {
            horizon: f[0].trim().parse().map_err(|_| bad("bad T"))?,
            mean: f[1].trim().parse().map_err(|_| bad("bad mean"))?,
            stderr: f[2].trim().parse().map_err(|_| bad("bad stderr"))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_examples() {
        assert_eq!(kl_bernoulli(0.3, 0.3).unwrap(), 0.0);
        assert!((kl_bernoulli(1.0, 0.5).unwrap() - 2f64.ln()).abs() < 1e-15);
        // 0.5 ln(0.5/0.625) + 0.5 ln(0.5/0.375)
        let oracle = 0.5 * (0.8f64).ln() + 0.5 * (4.0f64 / 3.0).ln();
        assert!((kl_bernoulli(0.5, 0.625).unwrap() - oracle).abs() < 1e-15);
        assert!((oracle - 0.032269260568785).abs() < 1e-14);
        assert_eq!(kl_bernoulli(0.5, 0.0).unwrap(), f64::INFINITY);
        assert_eq!(kl_bernoulli(0.0, 0.0).unwrap(), 0.0);
        assert!(kl_bernoulli(1.2, 0.5).is_err());
    }

    #[test]
    fn per_step_kl_examples() {
        assert_eq!(per_step_kl(0.0).unwrap(), 0.0);
        let a = per_step_kl(0.125).unwrap();
        assert!((a - 0.5 * (16.0f64 / 15.0).ln()).abs() < 1e-15);
        assert!((a - kl_bernoulli(0.5, 0.625).unwrap()).abs() < 1e-15);
        assert!(a <= 0.0625);
        let b = per_step_kl(0.25).unwrap();
        assert!((b - 0.5 * (4.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!(per_step_kl(0.5).is_err());
    }

    #[test]
    fn epoch_bound_examples() {
        let e = epoch_bounds(0.125, 2).unwrap();
        assert_eq!(e.epoch_kl_bound, 0.125);
        assert_eq!(e.tv_bound, 0.25);
        let z = epoch_bounds(0.0, 7).unwrap();
        assert_eq!((z.per_step_kl, z.epoch_kl_bound, z.tv_bound), (0.0, 0.0, 0.0));
        let f = epoch_bounds(0.1, 12).unwrap();
        assert!((f.tv_bound - 0.1 * 24f64.sqrt()).abs() < 1e-15);
        assert!(f.tv_bound <= 0.5);
        assert!(matches!(epoch_bounds(0.2, 12), Err(AnalysisError::Budget(_))));
    }

    #[test]
    fn exact_tv_examples() {
        assert_eq!(exact_tv_small_epoch(0.125, 1).unwrap(), 0.125);
        assert_eq!(exact_tv_small_epoch(0.0, 9).unwrap(), 0.0);
        // outcomes 00, 01, 10, 11: |1/4 - q^k (1-q)^(2-k)| with q = 5/8
        let q: f64 = 0.625;
        let oracle = 0.5 * ((0.25 - (1.0 - q).powi(2)).abs() + 2.0 * (0.25 - q * (1.0 - q)).abs() + (0.25 - q * q).abs());
        let tv = exact_tv_small_epoch(0.125, 2).unwrap();
        assert!((tv - oracle).abs() < 1e-15);
        assert!((tv - 0.140625).abs() < 1e-15);
        assert!(tv <= 0.25);
        assert!(exact_tv_small_epoch(0.1, 13).is_err());
    }

    fn synth(f: impl Fn(f64) -> f64, lo: u32, hi: u32) -> Vec<ScalingPoint> {
        (lo..=hi)
            .map(|k| {
                let t = 1u64 << k;
                ScalingPoint {
                    horizon: t,
                    mean: f(t as f64),
                    stderr: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn fit_recovers_power_laws() {
        let f = fit_scaling_exponent(&synth(|t| 3.0 * t.powf(2.0 / 3.0), 10, 16)).unwrap();
        assert!((f.alpha - 2.0 / 3.0).abs() < 1e-9);
        assert!((f.r2 - 1.0).abs() < 1e-12);
        assert!((f.prefactor - 3.0).abs() < 1e-6);
        let lin = fit_scaling_exponent(&synth(|t| 0.4 * t, 10, 16)).unwrap();
        assert!((lin.alpha - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_of_logarithm_is_flat() {
        let pts = synth(|t| 5.0 * t.ln(), 10, 18);
        let f = fit_scaling_exponent(&pts).unwrap();
        // independent slope: d ln ln T / d ln T, regressed by Cramer's rule
        let xs: Vec<f64> = pts.iter().map(|p| (p.horizon as f64).ln()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (5.0 * x).ln()).collect();
        let n = xs.len() as f64;
        let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
        let sxx: f64 = xs.iter().map(|x| x * x).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((f.alpha - slope).abs() < 1e-9);
        assert!(f.alpha < 0.11);
    }

    #[test]
    fn fit_filters_and_rejects() {
        let mut pts = synth(|t| t, 8, 12);
        // 2^8 and 2^9 are burn-in, leaving 3 points
        assert_eq!(fit_scaling_exponent(&pts).unwrap().points.len(), 3);
        pts[4].mean = 0.0;
        assert_eq!(fit_scaling_exponent(&pts), Err(AnalysisError::TooFewPoints(2)));
        pts.swap(0, 1);
        assert_eq!(fit_scaling_exponent(&pts), Err(AnalysisError::Unsorted));
    }

    #[test]
    fn aggregate_examples() {
        let a = aggregate_runs(&[(100, 1, 14.0), (100, 0, 10.0)]).unwrap();
        assert_eq!(a[0].mean, 12.0);
        assert!((a[0].stderr - 2.0).abs() < 1e-12);
        let same = aggregate_runs(&[(5, 0, 3.0), (5, 1, 3.0), (5, 2, 3.0)]).unwrap();
        assert_eq!(same[0].stderr, 0.0);
        assert!(aggregate_runs(&[(5, 0, 3.0)]).is_err());
    }

    #[test]
    fn aggregate_mean_obeys_clt() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let recs: Vec<(u64, u64, f64)> = (0..100).map(|s| (1, s, 4.0 + std_normal(&mut rng))).collect();
        let a = aggregate_runs(&recs).unwrap();
        assert!((a[0].mean - 4.0).abs() < 3.0 / 10.0);
    }

    /// Box-Muller from two uniforms.
    fn std_normal<R: rand::Rng>(rng: &mut R) -> f64 {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    #[test]
    fn aggregate_csv_round_trip() {
        let agg = aggregate_runs(&[(1024, 0, 1.5), (1024, 1, 2.5), (2048, 0, 3.0), (2048, 1, 3.25)]).unwrap();
        let mut buf = Vec::new();
        write_aggregate_csv(&mut buf, &agg).unwrap();
        let back = read_aggregate_csv(&buf[..]).unwrap();
        let direct: Vec<ScalingPoint> = agg.iter().map(|a| a.scaling_point()).collect();
        assert_eq!(back, direct);
    }

    #[test]
    fn curve_band_is_pointwise() {
        let a = [1.0, 2.0];
        let b = [3.0, 2.0];
        let band = curve_band(&[&a, &b]);
        assert_eq!(band[0].0, 2.0);
        assert_eq!(band[1], (2.0, 2.0, 2.0));
    }
}
