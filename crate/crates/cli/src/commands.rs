use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bornrate::convergence::{
    analyze_log, bound_points, fit_points, parse_series_csv, sweep_to_csv, SweepPlan,
};
use bornrate::format::sig17;
use bornrate::{efficiency_sweep, sample_events, BornDistribution, DetectorModel, EventLog};
use serde::{Deserialize, Serialize};

use crate::config::{short_hash, RunConfig};
use crate::error::CliError;

pub const TOOL: &str = concat!("bornrate ", env!("CARGO_PKG_VERSION"));

/// Contents of `fit.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub tool: String,
    pub config_hash: String,
    pub run_id: String,
    pub alpha_hat: f64,
    pub alpha_se: Option<f64>,
    #[serde(rename = "C_hat")]
    pub c_hat: f64,
    pub r_squared: f64,
    #[serde(rename = "C_min_alpha1")]
    pub c_min_alpha1: f64,
    #[serde(rename = "C_trend_alpha1")]
    pub c_trend_alpha1: f64,
    #[serde(rename = "C_min_alpha05")]
    pub c_min_alpha05: f64,
    #[serde(rename = "C_trend_alpha05")]
    pub c_trend_alpha05: f64,
    #[serde(rename = "M")]
    pub bins: usize,
    pub e: f64,
    pub seed: Option<u64>,
    pub burn_in: u64,
    pub points_used: usize,
    pub zero_deviation_dropped: usize,
    /// `[N, D]` pairs of the fitted series.
    pub series: Vec<(u64, f64)>,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

fn meta(pairs: &[(&str, String)]) -> Vec<(String, String)> {
    pairs
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect()
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let e = cfg.single_efficiency()?;
    let dist = BornDistribution::new(&cfg.spec)?;
    let mut log = sample_events(&dist, DetectorModel::new(e)?, cfg.emitted, cfg.seed);
    log.meta = meta(&[("tool", TOOL.into()), ("config_hash", cfg.hash())]);
    let path = write(&cfg.out, "events.csv", &log.to_text())?;
    println!("recorded N={} path={}", log.len(), path.display());
    Ok(())
}

#[derive(Serialize)]
struct AnalysisKey<'a> {
    input: String,
    bins: usize,
    checkpoint_base: u64,
    checkpoint_ratio: f64,
    burn_in: u64,
    mode: &'a str,
}

pub fn analyze(cfg: &RunConfig, log_path: Option<&Path>, series_in: Option<&Path>) -> Result<(), CliError> {
    let bins_flag = cfg.single_bins()?;
    let report = match (log_path, series_in) {
        (Some(path), None) => {
            let text = read(path)?;
            let log = EventLog::parse(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let dist = BornDistribution::new(&log.spec)?;
            let schedule = cfg.schedule()?;
            let a = analyze_log(&log, &dist, bins_flag, &schedule, cfg.burn_in)?;
            let hash = analysis_hash(cfg, &text, bins_flag, "log");
            let series_csv = a.series.to_csv(&meta(&[
                ("tool", TOOL.into()),
                ("config_hash", hash.clone()),
                ("seed", log.seed.to_string()),
            ]));
            write(&cfg.out, "series.csv", &series_csv)?;
            FitReport {
                tool: TOOL.into(),
                config_hash: hash,
                run_id: format!(
                    "{}-M{}-e{}-seed{}",
                    log.spec.kind(),
                    bins_flag,
                    log.detector.efficiency(),
                    log.seed
                ),
                alpha_hat: a.fit.alpha_hat,
                alpha_se: a.fit.alpha_se,
                c_hat: a.fit.c_hat,
                r_squared: a.fit.r_squared,
                c_min_alpha1: a.bound_inverse_n.c_min,
                c_trend_alpha1: a.bound_inverse_n.c_trend,
                c_min_alpha05: a.bound_inverse_sqrt_n.c_min,
                c_trend_alpha05: a.bound_inverse_sqrt_n.c_trend,
                bins: bins_flag,
                e: log.detector.efficiency(),
                seed: Some(log.seed),
                burn_in: cfg.burn_in,
                points_used: a.fit.points_used,
                zero_deviation_dropped: a.fit.zero_deviation_dropped,
                series: a.series.checkpoints,
            }
        }
        (None, Some(path)) => {
            // injected series: fit a precomputed `N,D` table
            let text = read(path)?;
            let (headers, points) = parse_series_csv(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
            let header = |k: &str| headers.iter().find(|(hk, _)| hk == k).map(|(_, v)| v.clone());
            let bins = match header("bins") {
                Some(v) => v
                    .parse()
                    .map_err(|_| CliError::Data(format!("{}: invalid bins header", path.display())))?,
                None => bins_flag,
            };
            let e = header("e").and_then(|v| v.parse().ok()).unwrap_or(1.0);
            let seed = header("seed").and_then(|v| v.parse().ok());
            let fit = fit_points(&points, cfg.burn_in)?;
            let b1 = bound_points(&points, 1.0)?;
            let b05 = bound_points(&points, 0.5)?;
            let hash = analysis_hash(cfg, &text, bins, "series");
            let mut series_csv = String::new();
            let _ = writeln!(series_csv, "# tool={TOOL}");
            let _ = writeln!(series_csv, "# config_hash={hash}");
            if let Some(s) = seed {
                let _ = writeln!(series_csv, "# seed={s}");
            }
            series_csv.push_str("N,D\n");
            for (n, d) in &points {
                let _ = writeln!(series_csv, "{n},{}", sig17(*d));
            }
            write(&cfg.out, "series.csv", &series_csv)?;
            FitReport {
                tool: TOOL.into(),
                config_hash: hash,
                run_id: format!(
                    "series-{}",
                    path.file_stem().and_then(|s| s.to_str()).unwrap_or("input")
                ),
                alpha_hat: fit.alpha_hat,
                alpha_se: fit.alpha_se,
                c_hat: fit.c_hat,
                r_squared: fit.r_squared,
                c_min_alpha1: b1.c_min,
                c_trend_alpha1: b1.c_trend,
                c_min_alpha05: b05.c_min,
                c_trend_alpha05: b05.c_trend,
                bins,
                e,
                seed,
                burn_in: cfg.burn_in,
                points_used: fit.points_used,
                zero_deviation_dropped: fit.zero_deviation_dropped,
                series: points,
            }
        }
        _ => {
            return Err(CliError::Config(
                "analyze needs exactly one of <LOG> or --series-in".into(),
            ))
        }
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write(&cfg.out, "fit.json", &json)?;
    println!(
        "alpha_hat={} C_min_alpha1={} C_min_alpha05={}",
        report.alpha_hat, report.c_min_alpha1, report.c_min_alpha05
    );
    Ok(())
}

fn analysis_hash(cfg: &RunConfig, input: &str, bins: usize, mode: &str) -> String {
    let key = AnalysisKey {
        input: short_hash(input.as_bytes()),
        bins,
        checkpoint_base: cfg.checkpoint_base,
        checkpoint_ratio: cfg.checkpoint_ratio,
        burn_in: cfg.burn_in,
        mode,
    };
    short_hash(serde_json::to_string(&key).unwrap().as_bytes())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let dist = BornDistribution::new(&cfg.spec)?;
    let plan = SweepPlan {
        bins: cfg.bins.clone(),
        efficiencies: cfg.efficiency.clone(),
        emitted: cfg.emitted,
        replicas: cfg.replicas,
        base_seed: cfg.seed,
        schedule: cfg.schedule()?,
        burn_in: cfg.burn_in,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("workers: {e}")))?;
    let rows = pool.install(|| efficiency_sweep(&dist, &plan))?;
    let spec = serde_json::to_string(&cfg.spec).unwrap();
    let csv = sweep_to_csv(
        &rows,
        &meta(&[
            ("tool", TOOL.into()),
            ("config_hash", cfg.hash()),
            ("seed", cfg.seed.to_string()),
            ("spec", spec),
            ("emitted", cfg.emitted.to_string()),
        ]),
    );
    let path = write(&cfg.out, "sweep.csv", &csv)?;
    println!("cells={} path={}", rows.len(), path.display());
    Ok(())
}

pub const REPORT_COLUMNS: &str = "run,N,D,log_N,log_D,alpha_hat,C_hat,fit_log_D";

/// One data row of the combined report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub run: String,
    pub n: u64,
    pub d: f64,
    pub alpha_hat: f64,
    pub c_hat: f64,
}

impl ReportRow {
    fn line(&self) -> String {
        let log_n = (self.n as f64).ln();
        let log_d = if self.d > 0.0 {
            sig17(self.d.ln())
        } else {
            "-inf".to_string()
        };
        format!(
            "{},{},{},{},{},{},{},{}",
            self.run,
            self.n,
            sig17(self.d),
            sig17(log_n),
            log_d,
            sig17(self.alpha_hat),
            sig17(self.c_hat),
            sig17(self.c_hat.ln() - self.alpha_hat * log_n),
        )
    }
}

fn parse_report_csv(text: &str, path: &Path) -> Result<(Vec<u64>, Vec<ReportRow>), CliError> {
    let bad = |line: usize, msg: &str| {
        CliError::Data(format!("{}: line {line}: {msg}", path.display()))
    };
    let mut seeds = Vec::new();
    let mut rows = Vec::new();
    let mut seen_columns = false;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some(v) = h.trim().strip_prefix("seeds=") {
                seeds.extend(v.split(',').filter_map(|s| s.parse::<u64>().ok()));
            }
            continue;
        }
        if !seen_columns {
            if line != REPORT_COLUMNS {
                return Err(bad(lineno, "schema mismatch: unexpected columns"));
            }
            seen_columns = true;
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 8 {
            return Err(bad(lineno, "schema mismatch: expected 8 columns"));
        }
        let num = |i: usize| cols[i].parse::<f64>().map_err(|_| bad(lineno, "non-numeric value"));
        rows.push(ReportRow {
            run: cols[0].to_string(),
            n: cols[1].parse().map_err(|_| bad(lineno, "invalid N"))?,
            d: num(2)?,
            alpha_hat: num(5)?,
            c_hat: num(6)?,
        });
    }
    if !seen_columns {
        return Err(bad(0, "schema mismatch: missing column header"));
    }
    Ok((seeds, rows))
}

pub fn report(inputs: &[PathBuf], out: &Path) -> Result<(), CliError> {
    if inputs.is_empty() {
        return Err(CliError::Config("report needs at least one input".into()));
    }
    let mut rows: Vec<ReportRow> = Vec::new();
    let mut seeds: Vec<u64> = Vec::new();
    let mut used_runs = BTreeSet::new();
    for path in inputs {
        let text = read(path)?;
        if text.trim_start().starts_with('{') {
            let fit: FitReport = serde_json::from_str(&text).map_err(|e| {
                CliError::Data(format!("{}: schema mismatch: {e}", path.display()))
            })?;
            let mut run = fit.run_id.clone();
            let mut k = 2;
            while used_runs.contains(&run) {
                run = format!("{}#{k}", fit.run_id);
                k += 1;
            }
            used_runs.insert(run.clone());
            seeds.extend(fit.seed);
            rows.extend(fit.series.iter().map(|&(n, d)| ReportRow {
                run: run.clone(),
                n,
                d,
                alpha_hat: fit.alpha_hat,
                c_hat: fit.c_hat,
            }));
        } else {
            let (s, r) = parse_report_csv(&text, path)?;
            seeds.extend(s);
            used_runs.extend(r.iter().map(|row| row.run.clone()));
            rows.extend(r);
        }
    }
    let mut body = String::new();
    body.push_str(REPORT_COLUMNS);
    body.push('\n');
    for r in &rows {
        body.push_str(&r.line());
        body.push('\n');
    }
    let mut dedup = Vec::new();
    for s in seeds {
        if !dedup.contains(&s) {
            dedup.push(s);
        }
    }
    let seed_list: Vec<String> = dedup.iter().map(u64::to_string).collect();
    let mut text = String::new();
    let _ = writeln!(text, "# tool={TOOL}");
    let _ = writeln!(text, "# config_hash={}", short_hash(body.as_bytes()));
    let _ = writeln!(text, "# seeds={}", seed_list.join(","));
    text.push_str(&body);
    let path = write(out, "report.csv", &text)?;
    println!("rows={} path={}", rows.len(), path.display());
    Ok(())
}
