//! Trained-model artifacts: a versioned binary file plus a human-readable
//! text sidecar next to it.
//!
//! Binary layout: the 8-byte magic `SECDMDL\0`, the format version as a
//! little-endian `u32`, then the bincode (standard configuration) encoding
//! of [`ModelArtifact`].

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use secdisc_core::{PreprocessConfig, TrainedModel};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atomic_write;

pub const MAGIC: &[u8; 8] = b"SECDMDL\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub config_hash: String,
    pub master_seed: u64,
    /// The preprocessing the model was trained with; prediction must reuse it.
    pub preprocess: PreprocessConfig,
    pub model: TrainedModel,
}

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}: not a model file")]
    BadMagic(String),
    #[error("{path}: format version {found} is not supported (expected {FORMAT_VERSION})")]
    UnsupportedVersion { path: String, found: u32 },
    #[error("{path}: {message}")]
    Codec { path: String, message: String },
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".txt");
    PathBuf::from(s)
}

pub fn encode(artifact: &ModelArtifact) -> Result<Vec<u8>, String> {
    let mut out = MAGIC.to_vec();
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    let body = bincode::serde::encode_to_vec(artifact, bincode::config::standard()).map_err(|e| e.to_string())?;
    out.extend(body);
    Ok(out)
}

pub fn decode(bytes: &[u8], path: &str) -> Result<ModelArtifact, ModelFileError> {
    if bytes.len() < 12 || &bytes[..8] != MAGIC {
        return Err(ModelFileError::BadMagic(path.into()));
    }
    let found = u32::from_le_bytes(bytes[8..12].try_into().expect("four bytes"));
    if found != FORMAT_VERSION {
        return Err(ModelFileError::UnsupportedVersion { path: path.into(), found });
    }
    let (artifact, used) = bincode::serde::decode_from_slice(&bytes[12..], bincode::config::standard())
        .map_err(|e| ModelFileError::Codec { path: path.into(), message: e.to_string() })?;
    if used != bytes.len() - 12 {
        return Err(ModelFileError::Codec { path: path.into(), message: "trailing bytes".into() });
    }
    Ok(artifact)
}

pub fn describe(artifact: &ModelArtifact) -> String {
    let m = &artifact.model;
    let mut s = String::new();
    let _ = writeln!(s, "model: {}", m.name());
    let _ = writeln!(s, "family: {}", m.spec.family.as_str());
    let _ = writeln!(s, "feature_scheme: {}", m.spec.feature_scheme.as_str());
    let _ = writeln!(s, "config_hash: {}", artifact.config_hash);
    let _ = writeln!(s, "master_seed: {}", artifact.master_seed);
    let _ = writeln!(s, "model_seed: {}", m.spec.seed);
    let _ = writeln!(s, "feature_width: {}", m.featurizer.width());
    for (k, v) in m.spec.resolved_hyperparameters() {
        let _ = writeln!(s, "hyperparameter.{k}: {v}");
    }
    if let Some(log) = &m.training_log {
        let _ = writeln!(
            s,
            "training: {} epochs, best epoch {} (validation accuracy {:.4}), stopped early: {}",
            log.epochs.len(),
            log.best_epoch,
            log.best_val_accuracy,
            log.stopped_early
        );
    }
    for w in &m.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

/// Writes the binary artifact and its `.txt` sidecar.
pub fn save_model(artifact: &ModelArtifact, path: &Path) -> Result<(), ModelFileError> {
    let io = |p: &Path| {
        let p = p.display().to_string();
        move |source| ModelFileError::Io { path: p, source }
    };
    let bytes = encode(artifact).map_err(|message| ModelFileError::Codec { path: path.display().to_string(), message })?;
    atomic_write(path, &bytes).map_err(io(path))?;
    let side = sidecar_path(path);
    atomic_write(&side, describe(artifact).as_bytes()).map_err(io(&side))
}

pub fn load_model(path: &Path) -> Result<ModelArtifact, ModelFileError> {
    let p = path.display().to_string();
    let bytes = fs::read(path).map_err(|source| ModelFileError::Io { path: p.clone(), source })?;
    decode(&bytes, &p)
}
