//! The M+2 bin construction: two empty outer regions `(-∞, m₋)` and
//! `(m₊, ∞)` around `M` equal bins of width `Δℓ`, the per-bin counts and
//! the count-ratio empirical cdf at the upper bin edges.
//!
//! Bins are half-open `[lower, upper)` except the last, which is closed so
//! that the maximum event (which sits at `m₊`) is counted in bin `M`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::sampler::{DetectionEvent, EventLog};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinningScheme<T> {
    m_minus: T,
    m_plus: T,
    bins: usize,
    delta_ell: T,
}

impl<T: Real> BinningScheme<T> {
    pub fn new(m_minus: T, m_plus: T, bins: usize) -> Result<Self> {
        if bins < 1 {
            return Err(Error::InvalidParameter {
                name: "bins",
                reason: "need at least one interior bin".into(),
            });
        }
        if !(m_minus.is_finite() && m_plus.is_finite() && m_minus < m_plus) {
            return Err(Error::DegenerateData(format!(
                "binned region [{m_minus}, {m_plus}] has no width"
            )));
        }
        let delta_ell = (m_plus - m_minus) / T::from_usize(bins).unwrap();
        Ok(Self {
            m_minus,
            m_plus,
            bins,
            delta_ell,
        })
    }

    pub fn m_minus(&self) -> T {
        self.m_minus
    }

    pub fn m_plus(&self) -> T {
        self.m_plus
    }

    /// `M`, the number of interior bins.
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn delta_ell(&self) -> T {
        self.delta_ell
    }

    /// Edge `j` for `j = 0..=M`; edge 0 is `m₋`, edge `M` is `m₊`.
    #[inline]
    pub fn edge(&self, j: usize) -> T {
        if j >= self.bins {
            self.m_plus
        } else {
            (self.m_minus + T::from_usize(j).unwrap() * self.delta_ell).min(self.m_plus)
        }
    }

    /// Upper edges `x_1..x_M`.
    pub fn upper_edges(&self) -> Vec<T> {
        (1..=self.bins).map(|j| self.edge(j)).collect()
    }

    /// Same scheme under `x → a·x + b` with `a > 0`.
    pub fn affine(&self, a: T, b: T) -> Result<Self> {
        Self::new(a * self.m_minus + b, a * self.m_plus + b, self.bins)
    }
}

/// Result of [`bin_index`]: an interior bin `1..=M` or one of the outer
/// regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinIndex {
    OuterLow,
    Bin(usize),
    OuterHigh,
}

/// `j(x)`: the bin whose half-open span `[edge(j-1), edge(j))` contains `x`;
/// `m₊` maps to `M`. NaN maps to `OuterHigh`.
#[inline]
pub fn bin_index<T: Real>(scheme: &BinningScheme<T>, x: T) -> BinIndex {
    if x < scheme.m_minus {
        return BinIndex::OuterLow;
    }
    if !(x <= scheme.m_plus) {
        return BinIndex::OuterHigh;
    }
    let last = scheme.bins - 1;
    let guess = ((x - scheme.m_minus) / scheme.delta_ell)
        .floor()
        .to_usize()
        .unwrap_or(0)
        .min(last);
    // settle rounding against the materialized edges
    let mut j = guess;
    while j > 0 && x < scheme.edge(j) {
        j -= 1;
    }
    while j < last && x >= scheme.edge(j + 1) {
        j += 1;
    }
    BinIndex::Bin(j + 1)
}

/// Tightest admissible scheme for the full log: `m₋` and `m₊` are the sample
/// minimum and maximum.
pub fn choose_binning(log: &EventLog, bins: usize) -> Result<BinningScheme<f64>> {
    choose_binning_for(&log.positions(), bins)
}

pub fn choose_binning_for<T: Real>(positions: &[T], bins: usize) -> Result<BinningScheme<T>> {
    if bins < 1 {
        return Err(Error::InvalidParameter {
            name: "bins",
            reason: "need at least one interior bin".into(),
        });
    }
    let (lo, hi) = positions
        .iter()
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    if positions.len() < 2 || !(lo < hi) {
        return Err(Error::DegenerateData(
            "need at least two distinct event positions".into(),
        ));
    }
    BinningScheme::new(lo, hi, bins)
}

/// Per-bin counts `N_1..N_M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedCounts<T> {
    pub counts: Vec<u64>,
    pub total: u64,
    pub scheme: BinningScheme<T>,
}

impl<T: Real> BinnedCounts<T> {
    pub fn empty(scheme: BinningScheme<T>) -> Self {
        Self {
            counts: vec![0; scheme.bins()],
            total: 0,
            scheme,
        }
    }

    /// Adds one position; outer-region positions are rejected.
    #[inline]
    pub fn push(&mut self, seq: u64, x: T) -> Result<()> {
        match bin_index(&self.scheme, x) {
            BinIndex::Bin(j) => {
                self.counts[j - 1] += 1;
                self.total += 1;
                Ok(())
            }
            _ => Err(Error::OuterRegionViolation {
                seq,
                x: x.as_f64(),
                lower: self.scheme.m_minus().as_f64(),
                upper: self.scheme.m_plus().as_f64(),
            }),
        }
    }

    /// Elementwise sum with counts over the same scheme.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.scheme != other.scheme {
            return Err(Error::InvalidParameter {
                name: "scheme",
                reason: "cannot merge counts over different schemes".into(),
            });
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.total += other.total;
        Ok(())
    }
}

/// Counts a prefix of a log against a fixed scheme.
pub fn bin_events(events: &[DetectionEvent], scheme: &BinningScheme<f64>) -> Result<BinnedCounts<f64>> {
    let mut out = BinnedCounts::empty(*scheme);
    for e in events {
        out.push(e.seq, e.x)?;
    }
    Ok(out)
}

/// Counts bare positions; errors report 1-based positions as `seq`.
pub fn bin_positions<T: Real>(positions: &[T], scheme: &BinningScheme<T>) -> Result<BinnedCounts<T>> {
    let mut out = BinnedCounts::empty(*scheme);
    for (i, &x) in positions.iter().enumerate() {
        out.push(i as u64 + 1, x)?;
    }
    Ok(out)
}

/// Normalized measured cdf at the upper bin edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf<T> {
    pub edges: Vec<T>,
    pub values: Vec<T>,
    /// Integer partial sums `Σ_{i≤j} N_i`.
    pub partial: Vec<u64>,
    pub total: u64,
}

impl<T: Real> EmpiricalCdf<T> {
    /// Exact value at edge `j` (0-based) as `(numerator, denominator)`.
    pub fn ratio(&self, j: usize) -> (u64, u64) {
        (self.partial[j], self.total)
    }
}

/// `F̂(x_j) = (Σ_{i≤j} N_i) / N`, accumulated in integers with one final
/// division per edge. The common bin width cancels and never enters.
pub fn empirical_cdf<T: Real>(counts: &BinnedCounts<T>) -> Result<EmpiricalCdf<T>> {
    if counts.total == 0 {
        return Err(Error::InsufficientData("no binned events".into()));
    }
    let n = T::from_count(counts.total);
    let mut partial = Vec::with_capacity(counts.counts.len());
    let mut acc = 0u64;
    for &c in &counts.counts {
        acc += c;
        partial.push(acc);
    }
    debug_assert_eq!(acc, counts.total);
    let values = partial.iter().map(|&k| T::from_count(k) / n).collect();
    Ok(EmpiricalCdf {
        edges: counts.scheme.upper_edges(),
        values,
        partial,
        total: counts.total,
    })
}

impl BinnedCounts<f64> {
    /// CSV `bin,lower_edge,upper_edge,count` with the scheme in `#` headers.
    pub fn to_csv(&self, meta: &[(String, String)]) -> String {
        let s = &self.scheme;
        let mut out = String::new();
        for (k, v) in meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        let _ = writeln!(out, "# m_minus={}", sig17(s.m_minus()));
        let _ = writeln!(out, "# m_plus={}", sig17(s.m_plus()));
        let _ = writeln!(out, "# bins={}", s.bins());
        let _ = writeln!(out, "# delta_ell={}", sig17(s.delta_ell()));
        let _ = writeln!(out, "# total={}", self.total);
        out.push_str("bin,lower_edge,upper_edge,count\n");
        for (j, c) in self.counts.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                j + 1,
                sig17(s.edge(j)),
                sig17(s.edge(j + 1)),
                c
            );
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let (mut lo, mut hi, mut bins) = (None, None, None);
        let mut counts = Vec::new();
        let mut seen_columns = false;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(h) = line.strip_prefix('#') {
                if let Some((k, v)) = h.trim().split_once('=') {
                    let bad = || Error::parse(lineno, format!("invalid `{k}`"));
                    match k {
                        "m_minus" => lo = Some(v.parse::<f64>().map_err(|_| bad())?),
                        "m_plus" => hi = Some(v.parse::<f64>().map_err(|_| bad())?),
                        "bins" => bins = Some(v.parse::<usize>().map_err(|_| bad())?),
                        _ => {}
                    }
                }
                continue;
            }
            if !seen_columns {
                if line != "bin,lower_edge,upper_edge,count" {
                    return Err(Error::parse(lineno, "expected column header"));
                }
                seen_columns = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::parse(lineno, "expected 4 columns"));
            }
            let c = cols[3]
                .parse::<u64>()
                .map_err(|_| Error::parse(lineno, "invalid count"))?;
            counts.push(c);
        }
        let missing = |k: &str| Error::parse(0, format!("missing header `{k}`"));
        let scheme = BinningScheme::new(
            lo.ok_or_else(|| missing("m_minus"))?,
            hi.ok_or_else(|| missing("m_plus"))?,
            bins.ok_or_else(|| missing("bins"))?,
        )?;
        if counts.len() != scheme.bins() {
            return Err(Error::parse(0, "row count does not match `bins`"));
        }
        let total = counts.iter().sum();
        Ok(Self {
            counts,
            total,
            scheme,
        })
    }
}
