//! Reproducible detection-event streams.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::rng::{self, CounterRng};
use crate::wavefunction::{BornDistribution, CumulativeDistribution, WavefunctionSpec};

/// Probability that an emitted particle is recorded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorModel {
    efficiency: f64,
}

impl DetectorModel {
    pub fn new(efficiency: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&efficiency) {
            return Err(Error::InvalidParameter {
                name: "efficiency",
                reason: format!("must lie in [0, 1], got {efficiency}"),
            });
        }
        Ok(Self { efficiency })
    }

    pub fn perfect() -> Self {
        Self { efficiency: 1.0 }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionEvent {
    /// 1-based detection order.
    pub seq: u64,
    pub x: f64,
}

/// Ordered detections plus everything needed to regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct EventLog {
    pub events: Vec<DetectionEvent>,
    pub seed: u64,
    pub spec: WavefunctionSpec,
    pub detector: DetectorModel,
    pub emitted_count: u64,
    /// RNG algorithm identifier.
    pub rng: String,
    /// Additional `# key=value` header lines, kept in order.
    pub meta: Vec<(String, String)>,
}

impl EventLog {
    /// Number of recorded events, the `N` of the analysis.
    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.x).collect()
    }

    /// Serializes to the text event-log format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(32 * self.events.len() + 256);
        let spec = serde_json::to_string(&self.spec).expect("spec serializes");
        let _ = writeln!(out, "# seed={}", self.seed);
        let _ = writeln!(out, "# e={}", self.detector.efficiency());
        let _ = writeln!(out, "# spec={spec}");
        let _ = writeln!(out, "# emitted={}", self.emitted_count);
        let _ = writeln!(out, "# rng={}", self.rng);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("seq,x\n");
        for e in &self.events {
            let _ = writeln!(out, "{},{}", e.seq, sig17(e.x));
        }
        out
    }

    /// Parses the text event-log format. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seed = None;
        let mut efficiency = None;
        let mut spec = None;
        let mut emitted = None;
        let mut rng_id = None;
        let mut meta = Vec::new();
        let mut events = Vec::new();
        let mut seen_columns = false;

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                if seen_columns {
                    return Err(Error::parse(lineno, "header line after data"));
                }
                let header = header.trim_start();
                let Some((key, value)) = header.split_once('=') else {
                    return Err(Error::parse(lineno, "header must be `# key=value`"));
                };
                let bad = |what: &str| Error::parse(lineno, format!("invalid {what} `{value}`"));
                match key {
                    "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                    "e" => {
                        let e = value.parse::<f64>().map_err(|_| bad("efficiency"))?;
                        efficiency = Some(DetectorModel::new(e).map_err(|_| bad("efficiency"))?);
                    }
                    "spec" => {
                        spec = Some(
                            serde_json::from_str::<WavefunctionSpec>(value)
                                .map_err(|err| Error::parse(lineno, format!("spec: {err}")))?,
                        )
                    }
                    "emitted" => {
                        emitted = Some(value.parse::<u64>().map_err(|_| bad("emitted count"))?)
                    }
                    "rng" => rng_id = Some(value.to_string()),
                    _ => meta.push((key.to_string(), value.to_string())),
                }
                continue;
            }
            if !seen_columns {
                if line.trim() != "seq,x" {
                    return Err(Error::parse(lineno, "expected column header `seq,x`"));
                }
                seen_columns = true;
                continue;
            }
            let Some((s, x)) = line.split_once(',') else {
                return Err(Error::parse(lineno, "expected `seq,x`"));
            };
            let seq = s
                .trim()
                .parse::<u64>()
                .map_err(|_| Error::parse(lineno, format!("invalid seq `{s}`")))?;
            let x = x
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("invalid position `{x}`")))?;
            if seq != events.len() as u64 + 1 {
                return Err(Error::parse(
                    lineno,
                    format!("seq {seq} out of order, expected {}", events.len() + 1),
                ));
            }
            events.push(DetectionEvent { seq, x });
        }

        let missing = |what: &str| Error::parse(0, format!("missing header `{what}`"));
        let emitted_count = emitted.ok_or_else(|| missing("emitted"))?;
        if events.len() as u64 > emitted_count {
            return Err(Error::parse(
                0,
                format!(
                    "{} events exceed emitted count {emitted_count}",
                    events.len()
                ),
            ));
        }
        Ok(Self {
            events,
            seed: seed.ok_or_else(|| missing("seed"))?,
            spec: spec.ok_or_else(|| missing("spec"))?,
            detector: efficiency.ok_or_else(|| missing("e"))?,
            emitted_count,
            rng: rng_id.unwrap_or_else(|| rng::ALGORITHM.to_string()),
            meta,
        })
    }
}

/// Draws `emitted_count` particles by inverse-transform sampling and keeps
/// each with probability `e`.
///
/// Particle `i` uses counter `i` of the position substream and counter `i`
/// of the thinning substream, so changing `e` never moves a surviving
/// particle.
pub fn sample_events(
    dist: &BornDistribution<f64>,
    detector: DetectorModel,
    emitted_count: u64,
    seed: u64,
) -> EventLog {
    let position = CounterRng::derive(seed, rng::STREAM_POSITION);
    let thinning = CounterRng::derive(seed, rng::STREAM_THINNING);
    let e = detector.efficiency();
    let mut events = Vec::with_capacity((emitted_count as f64 * e).ceil() as usize);
    for i in 0..emitted_count {
        if thinning.uniform_at(i) >= e {
            continue;
        }
        let x = dist.quantile_unchecked(position.uniform_at(i));
        events.push(DetectionEvent {
            seq: events.len() as u64 + 1,
            x,
        });
    }
    EventLog {
        events,
        seed,
        spec: dist.spec().clone(),
        detector,
        emitted_count,
        rng: rng::ALGORITHM.to_string(),
        meta: Vec::new(),
    }
}

/// Unbinned Kolmogorov–Smirnov self-check of a sampled log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    /// `sup_x |F̂_raw(x) − F_B(x)|` over the unbinned step ecdf.
    pub d_raw: f64,
    pub n: usize,
    /// 99.9% DKW half-width `sqrt(ln(2/0.001) / 2N)`.
    pub band: f64,
    pub passed: bool,
}

/// Two-sided DKW half-width at confidence `1 − alpha`.
pub fn dkw_band(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}

/// Kolmogorov–Smirnov sup deviation of `positions` from `cdf`. Ties are
/// handled by evaluating the step ecdf on both sides of each distinct value.
pub fn ks_statistic<C: CumulativeDistribution<f64> + ?Sized>(positions: &[f64], cdf: &C) -> f64 {
    let mut xs = positions.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i + 1;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let f = cdf.cdf(xs[i]);
        d = d.max((j as f64 / n - f).abs()).max((f - i as f64 / n).abs());
        i = j;
    }
    d
}

pub fn goodness_of_fit<C: CumulativeDistribution<f64> + ?Sized>(
    log: &EventLog,
    dist: &C,
) -> Result<GoodnessOfFit> {
    if log.is_empty() {
        return Err(Error::InsufficientData("event log is empty".into()));
    }
    let n = log.len();
    let d_raw = ks_statistic(&log.positions(), dist);
    let band = dkw_band(n, 0.001);
    Ok(GoodnessOfFit {
        d_raw,
        n,
        band,
        passed: d_raw <= band,
    })
}
