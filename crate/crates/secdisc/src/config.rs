//! Run configuration: a TOML file whose values command-line flags override.
//! The effective configuration is hashed and the hash, with the master seed,
//! is written into every artifact.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use secdisc_core::eval::{CvMode, ReportFormat, Rounding};
use secdisc_core::{ModelSpec, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    pub train: Option<PathBuf>,
    pub unseen: Vec<PathBuf>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourcePaths {
    pub stopwords: Option<PathBuf>,
    pub contractions: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub aliases: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
}

/// Overrides of the deep-model training regime; unset fields keep the defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainOverrides {
    pub epochs: Option<usize>,
    pub patience: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub validation_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub folds: usize,
    pub stratify: bool,
    pub pooled: bool,
    pub maxlen: usize,
    pub threshold: f64,
    /// Report names such as `TF-IDF+DT`, or `all` for the fifteen configurations.
    pub models: Vec<String>,
    pub baseline: bool,
    pub rounding: Rounding,
    pub format: ReportFormat,
    pub output_dir: Option<PathBuf>,
    pub data: DataPaths,
    pub resources: ResourcePaths,
    pub train: TrainOverrides,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            folds: 10,
            stratify: false,
            pooled: false,
            maxlen: 100,
            threshold: secdisc_core::baseline::DEFAULT_THRESHOLD,
            models: Vec::new(),
            baseline: false,
            rounding: Rounding::default(),
            format: ReportFormat::Csv,
            output_dir: None,
            data: DataPaths::default(),
            resources: ResourcePaths::default(),
            train: TrainOverrides::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// The file's values, or the defaults when no file is given.
    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        path.map(Self::load).unwrap_or_else(|| Ok(Self::default()))
    }

    /// SHA-256 of the canonical JSON encoding, in hex.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }

    pub fn header(&self) -> Vec<String> {
        vec![format!("config_hash: {}", self.hash()), format!("seed: {}", self.seed)]
    }

    /// Every referenced file must exist.
    pub fn validate(&self) -> Result<()> {
        let r = &self.resources;
        let files = [&self.data.train, &r.stopwords, &r.contractions, &r.lexicon, &r.aliases, &r.embeddings];
        for p in files.into_iter().flatten().chain(&self.data.unseen) {
            if !p.is_file() {
                bail!("referenced file {} does not exist", p.display());
            }
        }
        if self.folds < 2 {
            bail!("folds must be at least 2");
        }
        if !(self.threshold >= 0.0 && self.threshold < 1.0) {
            bail!("threshold must be in [0, 1)");
        }
        if self.maxlen == 0 {
            bail!("maxlen must be positive");
        }
        self.train_config().validate()?;
        self.specs()?;
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        let t = &self.train;
        TrainConfig {
            max_epochs: t.epochs.unwrap_or(d.max_epochs),
            patience: t.patience.unwrap_or(d.patience),
            batch_size: t.batch_size.unwrap_or(d.batch_size),
            learning_rate: t.learning_rate.unwrap_or(d.learning_rate),
            validation_fraction: t.validation_fraction.unwrap_or(d.validation_fraction),
            seed: self.seed,
            ..d
        }
    }

    pub fn cv_mode(&self) -> CvMode {
        if self.pooled {
            CvMode::Pooled
        } else {
            CvMode::MeanOfFolds
        }
    }

    pub fn spec(&self, name: &str) -> Result<ModelSpec> {
        let spec = ModelSpec::parse_name(name, self.seed)?;
        Ok(self.adjust(spec))
    }

    fn adjust(&self, spec: ModelSpec) -> ModelSpec {
        if spec.family.is_deep() {
            spec.with("maxlen", self.maxlen as f64)
        } else {
            spec
        }
    }

    /// The selected model specs in report order.
    pub fn specs(&self) -> Result<Vec<ModelSpec>> {
        let mut out = Vec::new();
        for name in &self.models {
            if name.eq_ignore_ascii_case("all") {
                out.extend(ModelSpec::all(self.seed).into_iter().map(|s| self.adjust(s)));
            } else {
                out.push(self.spec(name)?);
            }
        }
        Ok(out)
    }

    /// Includes the keyword baseline row: asked for, or `all` models selected.
    pub fn wants_baseline(&self) -> bool {
        self.baseline || self.models.iter().any(|m| m.eq_ignore_ascii_case("all"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_with_partial_sections() {
        let cfg: RunConfig = toml::from_str(
            "seed = 7\nmodels = [\"TF-IDF+DT\", \"DeepM2\"]\nrounding = \"half_up\"\n[train]\nepochs = 5\npatience = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.folds, 10);
        assert_eq!(cfg.rounding, Rounding::HalfUp);
        let tc = cfg.train_config();
        assert_eq!((tc.max_epochs, tc.patience, tc.seed), (5, 2, 7));
        let specs = cfg.specs().unwrap();
        assert_eq!(specs[1].hyperparameter("maxlen"), 100.0);
        assert_eq!(specs[0].hyperparameters.len(), 0);
        assert!(toml::from_str::<RunConfig>("sede = 1\n").is_err());
    }

    #[test]
    fn all_expands_to_fifteen_plus_baseline() {
        let cfg = RunConfig { models: vec!["all".into()], ..RunConfig::default() };
        assert_eq!(cfg.specs().unwrap().len(), 15);
        assert!(cfg.wants_baseline());
    }

    #[test]
    fn hash_tracks_every_field() {
        let a = RunConfig::default();
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_eq!(a.hash().len(), 64);
        let b = RunConfig { seed: 43, ..RunConfig::default() };
        assert_ne!(a.hash(), b.hash());
        let c = RunConfig { stratify: true, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn validation_catches_missing_files_and_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.resources.embeddings = Some("/definitely/missing.txt".into());
        assert!(cfg.validate().unwrap_err().to_string().contains("missing.txt"));
        let cfg = RunConfig { train: TrainOverrides { epochs: Some(3), ..Default::default() }, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { models: vec!["GloVe+DeepM1".into()], ..RunConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
