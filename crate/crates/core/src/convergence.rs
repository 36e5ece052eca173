//! Deviation series, power-law rate fits and bound checks.
//!
//! For every prefix size `N_k` of a checkpoint schedule the binned empirical
//! cdf of the first `N_k` events is compared with `F_B` at the upper bin
//! edges of a scheme fixed from the full log:
//!
//! ```text
//! D_k = max_j | F̂_{N_k}(x_j) − F_B(x_j) |
//! ```
//!
//! [`fit_rate`] regresses `ln D` on `ln N`; [`check_bound`] reports the
//! smallest `C` with `D_k ≤ C / N_k^α` on the data and how `N_k^α · D_k`
//! trends with `ln N_k`. Neither turns its numbers into a verdict.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::binning::{choose_binning_for, empirical_cdf, BinnedCounts, BinningScheme, EmpiricalCdf};
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::rng::replica_seed;
use crate::sampler::{sample_events, DetectorModel, EventLog};
use crate::scalar::Real;
use crate::wavefunction::{BornDistribution, CumulativeDistribution};

/// Default first checkpoint.
pub const DEFAULT_CHECKPOINT_BASE: u64 = 10;
/// Default geometric ratio between checkpoints.
pub const DEFAULT_CHECKPOINT_RATIO: f64 = 2.0;
/// Checkpoints with `N_k` below this are left out of fits by default.
pub const DEFAULT_BURN_IN: u64 = 100;
/// Default number of interior bins.
pub const DEFAULT_BINS: usize = 64;

/// `max_j |emp.values[j] − F_B(emp.edges[j])|`.
pub fn sup_deviation<T, C>(emp: &EmpiricalCdf<T>, dist: &C) -> T
where
    T: Real,
    C: CumulativeDistribution<T> + ?Sized,
{
    emp.values
        .iter()
        .zip(&emp.edges)
        .map(|(&v, &x)| (v - dist.cdf(x)).abs())
        .fold(T::zero(), T::max)
}

/// Geometric prefix sizes `round(base · ratio^k)`, capped at `N` with `N`
/// itself always included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointSchedule {
    pub base: u64,
    pub ratio: f64,
}

impl Default for CheckpointSchedule {
    fn default() -> Self {
        Self {
            base: DEFAULT_CHECKPOINT_BASE,
            ratio: DEFAULT_CHECKPOINT_RATIO,
        }
    }
}

impl CheckpointSchedule {
    pub fn new(base: u64, ratio: f64) -> Result<Self> {
        if base < 1 {
            return Err(Error::InvalidParameter {
                name: "checkpoint_base",
                reason: "must be at least 1".into(),
            });
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "checkpoint_ratio",
                reason: format!("must be a finite number > 1, got {ratio}"),
            });
        }
        Ok(Self { base, ratio })
    }

    /// Checkpoints for a log of `n` events.
    pub fn points(&self, n: u64) -> Result<Vec<u64>> {
        if n < self.base {
            return Err(Error::InsufficientData(format!(
                "{n} events is fewer than the first checkpoint {}",
                self.base
            )));
        }
        let mut out: Vec<u64> = Vec::new();
        for k in 0.. {
            let v = (self.base as f64 * self.ratio.powi(k)).round();
            if v >= n as f64 {
                break;
            }
            let v = v as u64;
            if out.last() != Some(&v) {
                out.push(v);
            }
        }
        out.push(n);
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSeries<T> {
    /// `(N_k, D_k)`, `N_k` strictly increasing.
    pub checkpoints: Vec<(u64, T)>,
    pub scheme: BinningScheme<T>,
    pub efficiency: f64,
}

/// Deviation series for the events of `log`.
pub fn convergence_series<C>(
    log: &EventLog,
    dist: &C,
    bins: usize,
    schedule: &CheckpointSchedule,
) -> Result<ConvergenceSeries<f64>>
where
    C: CumulativeDistribution<f64> + ?Sized,
{
    convergence_series_for(
        &log.positions(),
        dist,
        bins,
        schedule,
        log.detector.efficiency(),
    )
}

/// Deviation series for bare positions in detection order.
pub fn convergence_series_for<T, C>(
    positions: &[T],
    dist: &C,
    bins: usize,
    schedule: &CheckpointSchedule,
    efficiency: f64,
) -> Result<ConvergenceSeries<T>>
where
    T: Real,
    C: CumulativeDistribution<T> + ?Sized,
{
    let points = schedule.points(positions.len() as u64)?;
    let scheme = choose_binning_for(positions, bins)?;
    let mut counts = BinnedCounts::empty(scheme);
    let mut checkpoints = Vec::with_capacity(points.len());
    let mut next = 0usize;
    for &target in &points {
        while (next as u64) < target {
            counts.push(next as u64 + 1, positions[next])?;
            next += 1;
        }
        let emp = empirical_cdf(&counts)?;
        checkpoints.push((target, sup_deviation(&emp, dist)));
    }
    Ok(ConvergenceSeries {
        checkpoints,
        scheme,
        efficiency,
    })
}

impl ConvergenceSeries<f64> {
    /// CSV `N,D` with the scheme and efficiency in `#` headers.
    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let mut out = String::new();
        for (k, v) in meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# bins={}", self.scheme.bins());
        let _ = writeln!(out, "# m_minus={}", sig17(self.scheme.m_minus()));
        let _ = writeln!(out, "# m_plus={}", sig17(self.scheme.m_plus()));
        let _ = writeln!(out, "# e={}", self.efficiency);
        out.push_str("N,D\n");
        for (n, d) in &self.checkpoints {
            let _ = writeln!(out, "{n},{}", sig17(*d));
        }
        out
    }
}

/// Parses `N,D` rows, returning the `#` headers alongside the points.
#[allow(clippy::type_complexity)]
pub fn parse_series_csv(text: &str) -> Result<(Vec<(String, String)>, Vec<(u64, f64)>)> {
    let mut headers = Vec::new();
    let mut points: Vec<(u64, f64)> = Vec::new();
    let mut seen_columns = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some((k, v)) = h.trim().split_once('=') {
                headers.push((k.to_string(), v.to_string()));
            }
            continue;
        }
        if !seen_columns {
            if line != "N,D" {
                return Err(Error::parse(lineno, "expected column header `N,D`"));
            }
            seen_columns = true;
            continue;
        }
        let Some((n, d)) = line.split_once(',') else {
            return Err(Error::parse(lineno, "expected `N,D`"));
        };
        let n = n
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::parse(lineno, format!("invalid N `{n}`")))?;
        let d = d
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|d| (0.0..=1.0).contains(d))
            .ok_or_else(|| Error::parse(lineno, format!("invalid D `{d}`")))?;
        if points.last().is_some_and(|&(prev, _)| prev >= n) {
            return Err(Error::parse(lineno, "N must be strictly increasing"));
        }
        points.push((n, d));
    }
    if !seen_columns {
        return Err(Error::parse(0, "missing column header `N,D`"));
    }
    Ok((headers, points))
}

/// Ordinary least squares line `y = intercept + slope · x`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct LineFit<T> {
    slope: T,
    intercept: T,
    slope_se: Option<T>,
    r_squared: T,
}

fn ols<T: Real>(xs: &[T], ys: &[T]) -> LineFit<T> {
    let n = T::from_usize(xs.len()).unwrap();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .fold(T::zero(), |a, b| a + b);
    let r_squared = if syy > T::zero() {
        (T::one() - ssr / syy).max(T::zero()).min(T::one())
    } else {
        T::one()
    };
    let slope_se = (xs.len() > 2)
        .then(|| (ssr / (n - T::lit(2.0)) / sxx).sqrt());
    LineFit {
        slope,
        intercept,
        slope_se,
        r_squared,
    }
}

/// Log-log least-squares fit `D ≈ C · N^(-α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit<T> {
    pub alpha_hat: T,
    /// Standard error of `alpha_hat`; needs three or more points.
    pub alpha_se: Option<T>,
    pub c_hat: T,
    pub r_squared: T,
    pub points_used: usize,
    /// Checkpoints past burn-in dropped because `D_k = 0`.
    pub zero_deviation_dropped: usize,
}

/// Fits the checkpoints with `N_k ≥ burn_in` and `D_k > 0`.
pub fn fit_rate<T: Real>(series: &ConvergenceSeries<T>, burn_in: u64) -> Result<RateFit<T>> {
    fit_points(&series.checkpoints, burn_in)
}

pub fn fit_points<T: Real>(checkpoints: &[(u64, T)], burn_in: u64) -> Result<RateFit<T>> {
    let past: Vec<(u64, T)> = checkpoints
        .iter()
        .copied()
        .filter(|&(n, _)| n >= burn_in)
        .collect();
    let usable: Vec<(u64, T)> = past.iter().copied().filter(|&(_, d)| d > T::zero()).collect();
    if usable.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} usable checkpoints after burn-in {burn_in}, need 2",
            usable.len()
        )));
    }
    let xs: Vec<T> = usable.iter().map(|&(n, _)| T::from_count(n).ln()).collect();
    let ys: Vec<T> = usable.iter().map(|&(_, d)| d.ln()).collect();
    let line = ols(&xs, &ys);
    Ok(RateFit {
        alpha_hat: -line.slope,
        alpha_se: line.slope_se,
        c_hat: line.intercept.exp(),
        r_squared: line.r_squared,
        points_used: usable.len(),
        zero_deviation_dropped: past.len() - usable.len(),
    })
}

/// Smallest constant satisfying `D_k ≤ C / N_k^α` on the data and the trend
/// of the rescaled deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck<T> {
    pub alpha: T,
    /// `max_k N_k^α · D_k`.
    pub c_min: T,
    /// Index of the checkpoint attaining `c_min` (last one on ties).
    pub c_min_index: usize,
    /// OLS slope of `N_k^α · D_k` against `ln N_k`; zero for one point.
    pub c_trend: T,
}

pub fn check_bound<T: Real>(series: &ConvergenceSeries<T>, alpha: T) -> Result<BoundCheck<T>> {
    bound_points(&series.checkpoints, alpha)
}

pub fn bound_points<T: Real>(checkpoints: &[(u64, T)], alpha: T) -> Result<BoundCheck<T>> {
    if checkpoints.is_empty() {
        return Err(Error::InsufficientData("empty series".into()));
    }
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("must be positive, got {alpha}"),
        });
    }
    let xs: Vec<T> = checkpoints.iter().map(|&(n, _)| T::from_count(n).ln()).collect();
    let scaled: Vec<T> = checkpoints
        .iter()
        .map(|&(n, d)| T::from_count(n).powf(alpha) * d)
        .collect();
    let (c_min_index, c_min) = scaled
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::neg_infinity()), |best, (i, v)| {
            if v >= best.1 {
                (i, v)
            } else {
                best
            }
        });
    let c_trend = if checkpoints.len() >= 2 {
        ols(&xs, &scaled).slope
    } else {
        T::zero()
    };
    Ok(BoundCheck {
        alpha,
        c_min,
        c_min_index,
        c_trend,
    })
}

/// Series, fit and both bound checks for one log.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub series: ConvergenceSeries<f64>,
    pub fit: RateFit<f64>,
    pub bound_inverse_n: BoundCheck<f64>,
    pub bound_inverse_sqrt_n: BoundCheck<f64>,
}

pub fn analyze_log(
    log: &EventLog,
    dist: &BornDistribution<f64>,
    bins: usize,
    schedule: &CheckpointSchedule,
    burn_in: u64,
) -> Result<Analysis> {
    let series = convergence_series(log, dist, bins, schedule)?;
    let fit = fit_rate(&series, burn_in)?;
    let bound_inverse_n = check_bound(&series, 1.0)?;
    let bound_inverse_sqrt_n = check_bound(&series, 0.5)?;
    Ok(Analysis {
        series,
        fit,
        bound_inverse_n,
        bound_inverse_sqrt_n,
    })
}

/// Parameters of a full-factorial `(M, e)` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPlan {
    pub bins: Vec<usize>,
    pub efficiencies: Vec<f64>,
    pub emitted: u64,
    pub replicas: u64,
    pub base_seed: u64,
    pub schedule: CheckpointSchedule,
    pub burn_in: u64,
}

/// One `(M, e)` cell: medians over replicas.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub bins: usize,
    pub efficiency: f64,
    pub replicas: u64,
    pub median_alpha_hat: f64,
    pub median_c_min_alpha1: f64,
    pub median_c_min_alpha05: f64,
    pub median_recorded: f64,
    pub median_final_d: f64,
}

/// Runs every `(M, e)` cell. Replica `r` uses `replica_seed(base_seed, r)`
/// in every cell, so cells differing only in `M` see identical data and
/// cells differing only in `e` see the same particle positions.
///
/// Replicas run on the current rayon pool; results are collected by replica
/// index so the output does not depend on scheduling.
pub fn efficiency_sweep(dist: &BornDistribution<f64>, plan: &SweepPlan) -> Result<Vec<SweepRow>> {
    if plan.bins.is_empty() || plan.efficiencies.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sweep",
            reason: "bin and efficiency lists must be non-empty".into(),
        });
    }
    if plan.replicas < 1 {
        return Err(Error::InvalidParameter {
            name: "replicas",
            reason: "need at least one replica".into(),
        });
    }
    let detectors = plan
        .efficiencies
        .iter()
        .map(|&e| DetectorModel::new(e))
        .collect::<Result<Vec<_>>>()?;

    // analyses[e_idx][replica][m_idx]
    let mut analyses: Vec<Vec<Vec<Analysis>>> = Vec::with_capacity(detectors.len());
    for &detector in &detectors {
        let per_replica = (0..plan.replicas)
            .into_par_iter()
            .map(|r| {
                let seed = replica_seed(plan.base_seed, r);
                let log = sample_events(dist, detector, plan.emitted, seed);
                plan.bins
                    .iter()
                    .map(|&m| analyze_log(&log, dist, m, &plan.schedule, plan.burn_in))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        analyses.push(per_replica);
    }

    let mut rows = Vec::with_capacity(plan.bins.len() * detectors.len());
    for (mi, &m) in plan.bins.iter().enumerate() {
        for (ei, &e) in plan.efficiencies.iter().enumerate() {
            let cell: Vec<&Analysis> = analyses[ei].iter().map(|r| &r[mi]).collect();
            let med = |f: &dyn Fn(&Analysis) -> f64| median(cell.iter().map(|a| f(a)).collect());
            rows.push(SweepRow {
                bins: m,
                efficiency: e,
                replicas: plan.replicas,
                median_alpha_hat: med(&|a| a.fit.alpha_hat),
                median_c_min_alpha1: med(&|a| a.bound_inverse_n.c_min),
                median_c_min_alpha05: med(&|a| a.bound_inverse_sqrt_n.c_min),
                median_recorded: med(&|a| a.series.checkpoints.last().unwrap().0 as f64),
                median_final_d: med(&|a| a.series.checkpoints.last().unwrap().1),
            });
        }
    }
    Ok(rows)
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(mut v: Vec<f64>) -> f64 {
    assert!(!v.is_empty());
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Sweep table as CSV.
pub fn sweep_to_csv(rows: &[SweepRow], meta: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(
        "M,e,median_alpha_hat,median_C_min_alpha1,median_C_min_alpha05,replicas,median_N,median_final_D\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.bins,
            r.efficiency,
            sig17(r.median_alpha_hat),
            sig17(r.median_c_min_alpha1),
            sig17(r.median_c_min_alpha05),
            r.replicas,
            sig17(r.median_recorded),
            sig17(r.median_final_d),
        );
    }
    out
}
