//! Run configuration: a JSON file with flag overrides.

use std::path::{Path, PathBuf};

use bornrate::convergence::{
    DEFAULT_BINS, DEFAULT_BURN_IN, DEFAULT_CHECKPOINT_BASE, DEFAULT_CHECKPOINT_RATIO,
};
use bornrate::wavefunction::parse_table_csv;
use bornrate::{CheckpointSchedule, WavefunctionSpec};
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> From<OneOrMany<T>> for Vec<T> {
    fn from(v: OneOrMany<T>) -> Self {
        match v {
            OneOrMany::One(x) => vec![x],
            OneOrMany::Many(xs) => xs,
        }
    }
}

/// On-disk config. Every field is optional; `bins` and `efficiency` take a
/// number or a list.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    spec: Option<serde_json::Value>,
    efficiency: Option<OneOrMany<f64>>,
    emitted: Option<u64>,
    seed: Option<u64>,
    bins: Option<OneOrMany<usize>>,
    checkpoint_base: Option<u64>,
    checkpoint_ratio: Option<f64>,
    burn_in: Option<u64>,
    replicas: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Wavefunction spec as inline JSON, e.g. '{"kind":"gaussian","sigma":1,"support_halfwidth":8}'
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of interior bins, or a comma-separated list for sweeps
    #[arg(long, value_delimiter = ',')]
    pub bins: Option<Vec<usize>>,
    /// Detector efficiency, or a comma-separated list for sweeps
    #[arg(long, value_delimiter = ',')]
    pub efficiency: Option<Vec<f64>>,
    /// Particles emitted before thinning
    #[arg(long)]
    pub emitted: Option<u64>,
    #[arg(long)]
    pub checkpoint_base: Option<u64>,
    #[arg(long)]
    pub checkpoint_ratio: Option<f64>,
    /// Checkpoints with N below this are left out of the rate fit
    #[arg(long)]
    pub burn_in: Option<u64>,
    /// Replicas per sweep cell
    #[arg(long)]
    pub replicas: Option<u64>,
    /// Output directory
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps
    #[arg(long)]
    pub workers: Option<usize>,
}

/// Effective configuration after merging file and flags. Serialized
/// (without output directory and worker count) for the config hash.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub spec: WavefunctionSpec,
    pub efficiency: Vec<f64>,
    pub emitted: u64,
    pub seed: u64,
    pub bins: Vec<usize>,
    pub checkpoint_base: u64,
    pub checkpoint_ratio: f64,
    pub burn_in: u64,
    pub replicas: u64,
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub out: PathBuf,
}

impl RunConfig {
    pub fn load(o: &Overrides) -> Result<Self, CliError> {
        let (file, base_dir) = match &o.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                let file: ConfigFile = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
                let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (file, dir)
            }
            None => (ConfigFile::default(), PathBuf::new()),
        };

        let spec_value = match &o.spec {
            Some(text) => Some(
                serde_json::from_str::<serde_json::Value>(text)
                    .map_err(|e| CliError::Config(format!("--spec: {e}")))?,
            ),
            None => file.spec,
        };
        let spec = match spec_value {
            Some(v) => resolve_spec(v, &base_dir)?,
            None => WavefunctionSpec::gaussian(1.0, 8.0),
        };

        let cfg = RunConfig {
            spec,
            efficiency: o
                .efficiency
                .clone()
                .or(file.efficiency.map(Into::into))
                .unwrap_or_else(|| vec![1.0]),
            emitted: o.emitted.or(file.emitted).unwrap_or(100_000),
            seed: o.seed.or(file.seed).unwrap_or(0),
            bins: o
                .bins
                .clone()
                .or(file.bins.map(Into::into))
                .unwrap_or_else(|| vec![DEFAULT_BINS]),
            checkpoint_base: o
                .checkpoint_base
                .or(file.checkpoint_base)
                .unwrap_or(DEFAULT_CHECKPOINT_BASE),
            checkpoint_ratio: o
                .checkpoint_ratio
                .or(file.checkpoint_ratio)
                .unwrap_or(DEFAULT_CHECKPOINT_RATIO),
            burn_in: o.burn_in.or(file.burn_in).unwrap_or(DEFAULT_BURN_IN),
            replicas: o.replicas.or(file.replicas).unwrap_or(10),
            workers: o.workers.or(file.workers),
            out: o
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.spec.check()?;
        if self.efficiency.is_empty() || self.bins.is_empty() {
            return Err(CliError::Config("bins and efficiency must be non-empty".into()));
        }
        for &e in &self.efficiency {
            bornrate::DetectorModel::new(e)?;
        }
        if let Some(&m) = self.bins.iter().find(|&&m| m < 1) {
            return Err(CliError::Config(format!("bins: need at least 1, got {m}")));
        }
        self.schedule()?;
        if self.replicas < 1 {
            return Err(CliError::Config("replicas: need at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(CliError::Config("workers: need at least 1".into()));
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<CheckpointSchedule, CliError> {
        Ok(CheckpointSchedule::new(
            self.checkpoint_base,
            self.checkpoint_ratio,
        )?)
    }

    pub fn single_efficiency(&self) -> Result<f64, CliError> {
        match self.efficiency.as_slice() {
            [e] => Ok(*e),
            _ => Err(CliError::Config(
                "efficiency: expected a single value for this command".into(),
            )),
        }
    }

    pub fn single_bins(&self) -> Result<usize, CliError> {
        match self.bins.as_slice() {
            [m] => Ok(*m),
            _ => Err(CliError::Config(
                "bins: expected a single value for this command".into(),
            )),
        }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        short_hash(json.as_bytes())
    }
}

pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    hex::encode(&digest[..8])
}

/// Parses a spec value, inlining `table_csv` (relative to the config file)
/// into `table` for tabulated specs.
fn resolve_spec(mut v: serde_json::Value, base_dir: &Path) -> Result<WavefunctionSpec, CliError> {
    if let Some(obj) = v.as_object_mut() {
        if let Some(path) = obj.remove("table_csv") {
            let path = path
                .as_str()
                .ok_or_else(|| CliError::Config("spec.table_csv must be a string".into()))?;
            let full = base_dir.join(path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
            let rows = parse_table_csv(&text)
                .map_err(|e| CliError::Data(format!("{}: {e}", full.display())))?;
            obj.insert("table".into(), serde_json::to_value(rows).unwrap());
        }
    }
    serde_json::from_value(v).map_err(|e| CliError::Config(format!("spec: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"spec":{"kind":"single_slit","beta":2,"support_halfwidth":10},"bins":[8,16],"efficiency":0.5,"seed":3}"#,
        )
        .unwrap();
        let o = Overrides {
            config: Some(path),
            seed: Some(9),
            ..Default::default()
        };
        let cfg = RunConfig::load(&o).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.bins, vec![8, 16]);
        assert_eq!(cfg.efficiency, vec![0.5]);
        assert_eq!(cfg.spec, WavefunctionSpec::single_slit(2.0, 10.0));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::load(&Overrides {
            out: Some("a".into()),
            ..Default::default()
        })
        .unwrap();
        let b = RunConfig::load(&Overrides {
            out: Some("b".into()),
            workers: Some(3),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig::load(&Overrides {
            seed: Some(1),
            ..Default::default()
        })
        .unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn table_csv_is_inlined() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("t.csv"), "x,intensity\n-1,0\n0,1\n1,0\n").unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(
            &path,
            r#"{"spec":{"kind":"tabulated","table_csv":"t.csv","support_halfwidth":2}}"#,
        )
        .unwrap();
        let cfg = RunConfig::load(&Overrides {
            config: Some(path),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(
            cfg.spec,
            WavefunctionSpec::tabulated(vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)], 2.0)
        );
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for o in [
            Overrides {
                spec: Some(r#"{"kind":"gaussian","sigma":-1,"support_halfwidth":8}"#.into()),
                ..Default::default()
            },
            Overrides {
                efficiency: Some(vec![1.5]),
                ..Default::default()
            },
            Overrides {
                checkpoint_ratio: Some(1.0),
                ..Default::default()
            },
            Overrides {
                bins: Some(vec![0]),
                ..Default::default()
            },
        ] {
            assert!(matches!(RunConfig::load(&o), Err(CliError::Config(_))), "{o:?}");
        }
    }

}
