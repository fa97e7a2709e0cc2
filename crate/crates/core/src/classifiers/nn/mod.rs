//! CNN / Bi-LSTM text classifiers over padded token-index sequences.

mod layers;
mod train;

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use layers::{Layer, Shape};
pub use train::{train_network, EpochLog, TrainConfig, TrainingLog};

use super::ensemble::sigmoid;
use layers::Cache;

/// Hyperparameters of the three deep configurations. `blocks` selects which
/// of the five building blocks are stacked:
/// 1 embedding + noise, 2 convolution/pooling, 3 stacked Bi-LSTM,
/// 4 dense/flatten/dense, 5 dropout + sigmoid output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeepArchitecture {
    pub maxlen: usize,
    pub embedding_dim: usize,
    pub noise_std: f64,
    /// (kernel, filters) per convolution, each followed by pooling.
    pub conv_layers: Vec<(usize, usize)>,
    pub pool: usize,
    pub dropout: f64,
    pub lstm_layers: usize,
    pub lstm_hidden: usize,
    pub dense_units: usize,
    pub blocks: Vec<u8>,
}

impl DeepArchitecture {
    fn with_blocks(blocks: &[u8]) -> Self {
        DeepArchitecture {
            maxlen: 100,
            embedding_dim: 100,
            noise_std: 0.1,
            conv_layers: vec![(7, 10), (5, 20), (3, 30)],
            pool: 2,
            dropout: 0.25,
            lstm_layers: 2,
            lstm_hidden: 10,
            dense_units: 10,
            blocks: blocks.to_vec(),
        }
    }

    pub fn deep_m1() -> Self {
        Self::with_blocks(&[1, 2, 3, 4, 5])
    }

    pub fn deep_m2() -> Self {
        Self::with_blocks(&[1, 2, 5])
    }

    pub fn deep_m3() -> Self {
        Self::with_blocks(&[1, 3, 5])
    }

    pub fn layers(&self, vocab: usize) -> Vec<Layer> {
        let mut out = Vec::new();
        for &b in &self.blocks {
            match b {
                1 => {
                    out.push(Layer::Embedding { vocab, dim: self.embedding_dim });
                    out.push(Layer::GaussianNoise { std: self.noise_std });
                }
                2 => {
                    for &(kernel, filters) in &self.conv_layers {
                        out.push(Layer::Conv1d { kernel, input: 0, filters });
                        out.push(Layer::MaxPool { pool: self.pool });
                    }
                }
                3 => {
                    for _ in 0..self.lstm_layers {
                        out.push(Layer::BiLstm { input: 0, hidden: self.lstm_hidden });
                    }
                }
                4 => {
                    out.push(Layer::Dense { input: 0, units: self.dense_units, relu: true });
                    out.push(Layer::Flatten);
                    out.push(Layer::Dense { input: 0, units: self.dense_units, relu: true });
                }
                _ => {
                    if !matches!(out.last(), Some(Layer::Flatten | Layer::Dense { .. })) {
                        out.push(Layer::Flatten);
                    }
                    out.push(Layer::Dropout { rate: self.dropout });
                    out.push(Layer::Dense { input: 0, units: 1, relu: false });
                }
            }
        }
        resolve_inputs(&mut out, Shape { steps: 1, channels: self.maxlen, flat: true });
        out
    }

    /// Input shape followed by the output shape of every traced layer.
    pub fn shape_trace(&self) -> Vec<Vec<usize>> {
        trace(&self.layers(1), self.maxlen)
    }
}

/// Fills in layer input widths from the running shape.
pub fn resolve_inputs(layers: &mut [Layer], mut s: Shape) {
    for l in layers.iter_mut() {
        match l {
            Layer::Conv1d { input, .. } | Layer::BiLstm { input, .. } | Layer::Dense { input, .. } => {
                *input = s.channels
            }
            _ => {}
        }
        s = l.output_shape(s);
    }
}

pub fn trace(layers: &[Layer], maxlen: usize) -> Vec<Vec<usize>> {
    let mut s = Shape { steps: 1, channels: maxlen, flat: true };
    let mut out = vec![s.dims()];
    for l in layers {
        s = l.output_shape(s);
        if l.is_traced() {
            out.push(s.dims());
        }
    }
    out
}

/// Layer stack plus one flat parameter buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub layers: Vec<Layer>,
    pub maxlen: usize,
    offsets: Vec<usize>,
    pub params: Vec<f64>,
}

impl Network {
    /// The first layer must be an embedding; the last must emit one value.
    pub fn new(layers: Vec<Layer>, maxlen: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut offsets = Vec::with_capacity(layers.len() + 1);
        let mut total = 0;
        for l in &layers {
            offsets.push(total);
            total += l.n_params();
        }
        offsets.push(total);
        let mut params = vec![0.0; total];
        for (k, l) in layers.iter().enumerate() {
            l.init(&mut params[offsets[k]..offsets[k + 1]], rng);
        }
        Network { layers, maxlen, offsets, params }
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    fn slice(&self, k: usize) -> &[f64] {
        &self.params[self.offsets[k]..self.offsets[k + 1]]
    }

    fn run(
        &self,
        indices: &[u32],
        mut rng: Option<&mut ChaCha8Rng>,
        keep: bool,
    ) -> (f64, Vec<(Cache, Shape)>) {
        let Layer::Embedding { dim, .. } = self.layers[0] else {
            panic!("network must start with an embedding");
        };
        let emb = self.slice(0);
        let mut x = Vec::with_capacity(indices.len() * dim);
        for &i in indices {
            let i = i as usize;
            x.extend_from_slice(&emb[i * dim..(i + 1) * dim]);
        }
        let mut s = Shape { steps: indices.len(), channels: dim, flat: false };
        let mut caches = Vec::with_capacity(self.layers.len());
        caches.push((Cache::Indices(indices.to_vec()), Shape { steps: 1, channels: indices.len(), flat: true }));
        for (k, l) in self.layers.iter().enumerate().skip(1) {
            let (y, c) = l.forward(self.slice(k), x, s, rng.as_deref_mut(), keep);
            caches.push((c, s));
            s = l.output_shape(s);
            x = y;
        }
        (x[0], caches)
    }

    pub fn logit(&self, indices: &[u32]) -> f64 {
        self.run(indices, None, false).0
    }

    pub fn predict_proba(&self, indices: &[u32]) -> f64 {
        sigmoid(self.logit(indices))
    }

    /// Adds the gradient of the binary cross-entropy of one example, scaled by
    /// `scale`, into `grad`. Returns the predicted probability.
    pub(crate) fn accumulate(
        &self,
        indices: &[u32],
        target: bool,
        scale: f64,
        rng: Option<&mut ChaCha8Rng>,
        grad: &mut [f64],
    ) -> f64 {
        let (z, caches) = self.run(indices, rng, true);
        let p = sigmoid(z);
        let y = if target { 1.0 } else { 0.0 };
        let mut dy = vec![(p - y) * scale];
        for (k, (cache, s)) in caches.into_iter().enumerate().rev() {
            let range = self.offsets[k]..self.offsets[k + 1];
            if k == 0 {
                let Layer::Embedding { dim, .. } = self.layers[0] else { unreachable!() };
                let Cache::Indices(ix) = cache else { unreachable!() };
                let g = &mut grad[range];
                for (t, &i) in ix.iter().enumerate() {
                    let i = i as usize;
                    for d in 0..dim {
                        g[i * dim + d] += dy[t * dim + d];
                    }
                }
                break;
            }
            dy = self.layers[k].backward(&self.params[range.clone()], &mut grad[range], cache, dy, s);
        }
        p
    }
}

/// Binary cross-entropy of a probability, clipped as Keras does.
pub(crate) fn bce(p: f64, target: bool) -> f64 {
    let eps = 1e-7;
    let p = p.clamp(eps, 1.0 - eps);
    if target {
        -libm::log(p)
    } else {
        -libm::log(1.0 - p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn documented_shape_traces() {
        let m1 = DeepArchitecture::deep_m1().shape_trace();
        let expected: Vec<Vec<usize>> = vec![
            vec![100],
            vec![100, 100],
            vec![100, 10],
            vec![50, 10],
            vec![50, 20],
            vec![25, 20],
            vec![25, 30],
            vec![12, 30],
            vec![12, 20],
            vec![12, 20],
            vec![12, 10],
            vec![120],
            vec![10],
            vec![1],
        ];
        assert_eq!(m1, expected);
        let m2 = DeepArchitecture::deep_m2().shape_trace();
        assert_eq!(m2[m2.len() - 2..], [vec![360], vec![1]]);
        let m3 = DeepArchitecture::deep_m3().shape_trace();
        assert_eq!(
            m3,
            vec![vec![100], vec![100, 100], vec![100, 20], vec![100, 20], vec![2000], vec![1]]
        );
    }

    fn small() -> Network {
        let mut layers = vec![
            Layer::Embedding { vocab: 6, dim: 3 },
            Layer::GaussianNoise { std: 0.1 },
            Layer::Conv1d { kernel: 3, input: 0, filters: 4 },
            Layer::MaxPool { pool: 2 },
            Layer::BiLstm { input: 4, hidden: 2 },
            Layer::BiLstm { input: 4, hidden: 2 },
            Layer::Dense { input: 4, units: 3, relu: true },
            Layer::Flatten,
            Layer::Dropout { rate: 0.25 },
            Layer::Dense { input: 0, units: 1, relu: false },
        ];
        resolve_inputs(&mut layers, Shape { steps: 1, channels: 7, flat: true });
        let mut net = Network::new(layers, 7, &mut seed::rng(3));
        // push pre-activations away from the ReLU kinks
        for (k, v) in net.params.iter_mut().enumerate() {
            *v += 0.05 * ((k % 7) as f64 - 3.0) / 3.0;
        }
        net
    }

    #[test]
    fn gradients_match_finite_differences() {
        let net = small();
        let x = [1u32, 4, 2, 5, 3, 0, 0];
        let mut grad = vec![0.0; net.n_params()];
        net.accumulate(&x, true, 1.0, None, &mut grad);
        let loss = |n: &Network| bce(n.predict_proba(&x), true);
        let h = 1e-6;
        let mut worst = 0.0f64;
        for k in 0..net.n_params() {
            let mut a = net.clone();
            a.params[k] += h;
            let mut b = net.clone();
            b.params[k] -= h;
            let numeric = (loss(&a) - loss(&b)) / (2.0 * h);
            let err = (numeric - grad[k]).abs() / (1e-6 + numeric.abs() + grad[k].abs());
            worst = worst.max(if (numeric - grad[k]).abs() < 1e-8 { 0.0 } else { err });
        }
        assert!(worst < 1e-4, "worst relative error {worst}");
    }

    #[test]
    fn inference_is_deterministic_and_bounded() {
        let net = small();
        let x = [2u32, 2, 3, 0, 0, 0, 0];
        let p = net.predict_proba(&x);
        assert_eq!(p, net.predict_proba(&x));
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn lstm_forget_bias_starts_at_one() {
        let net = Network::new(
            vec![Layer::Embedding { vocab: 2, dim: 1 }, Layer::BiLstm { input: 1, hidden: 2 }],
            1,
            &mut seed::rng(0),
        );
        let lstm = &net.params[net.offsets[1]..net.offsets[2]];
        let per_dir = 8 + 2 * 8 + 8;
        assert_eq!(&lstm[per_dir - 8..per_dir], &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }
}
