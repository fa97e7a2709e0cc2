//! Mini-batch Adam training with validation-accuracy early stopping.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{bce, Network};
use crate::classifiers::ModelError;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Per-step inverse-time decay: `lr / (1 + decay * step)`.
    pub decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            decay: 1e-6,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            batch_size: 64,
            max_epochs: 100,
            patience: 10,
            validation_fraction: 0.1,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |what: &'static str| Err(ModelError::InvalidTrainConfig(what));
        if self.patience >= self.max_epochs {
            return bad("patience must be smaller than max_epochs");
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 0.5) {
            return bad("validation_fraction must be in (0, 0.5)");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.decay >= 0.0 && self.epsilon > 0.0) {
            return bad("learning_rate, decay and epsilon must be non-negative");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub loss: f64,
    /// Running accuracy over the epoch's mini-batches, in training mode.
    pub train_accuracy: f64,
    pub val_accuracy: f64,
    pub improved: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    /// 1-based epoch whose weights were restored.
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub stopped_early: bool,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl Adam {
    fn new(n: usize) -> Self {
        Adam { m: vec![0.0; n], v: vec![0.0; n], step: 0 }
    }

    fn update(&mut self, params: &mut [f64], grad: &[f64], cfg: &TrainConfig) {
        let lr = cfg.learning_rate / (1.0 + cfg.decay * self.step as f64);
        self.step += 1;
        let t = self.step as f64;
        let lr_t = lr * libm::sqrt(1.0 - libm::pow(cfg.beta2, t)) / (1.0 - libm::pow(cfg.beta1, t));
        for (((p, &g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
            *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
            *p -= lr_t * *m / (libm::sqrt(*v) + cfg.epsilon);
        }
    }
}

pub fn accuracy(net: &Network, data: &[(&[u32], bool)]) -> f64 {
    if data.is_empty() {
        return 0.0;
    }
    let hits = data.iter().filter(|(x, y)| (net.predict_proba(x) > 0.5) == *y).count();
    hits as f64 / data.len() as f64
}

/// Trains in place. Stops once validation accuracy has not strictly improved
/// for `patience` epochs and restores the best epoch's weights.
pub fn train_network(
    net: &mut Network,
    train: &[(&[u32], bool)],
    validation: &[(&[u32], bool)],
    cfg: &TrainConfig,
) -> TrainingLog {
    let mut adam = Adam::new(net.n_params());
    let mut rng = seed::rng_for(cfg.seed, 0x0074_7261_696e);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = vec![0.0; net.n_params()];
    let mut log = TrainingLog { best_val_accuracy: f64::NEG_INFINITY, ..TrainingLog::default() };
    let mut best_params = net.params.clone();
    let mut wait = 0;
    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let (mut loss, mut hits) = (0.0, 0usize);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (x, y) = train[i];
                let p = net.accumulate(x, y, scale, Some(&mut rng), &mut grad);
                loss += bce(p, y);
                hits += usize::from((p > 0.5) == y);
            }
            adam.update(&mut net.params, &grad, cfg);
        }
        let n = train.len().max(1) as f64;
        let val_accuracy = accuracy(net, validation);
        let improved = val_accuracy > log.best_val_accuracy;
        if improved {
            log.best_val_accuracy = val_accuracy;
            log.best_epoch = epoch;
            best_params.copy_from_slice(&net.params);
            wait = 0;
        } else {
            wait += 1;
        }
        log.epochs.push(EpochLog {
            epoch,
            loss: loss / n,
            train_accuracy: hits as f64 / n,
            val_accuracy,
            improved,
        });
        if wait >= cfg.patience {
            log.stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }
    net.params.copy_from_slice(&best_params);
    log
}
