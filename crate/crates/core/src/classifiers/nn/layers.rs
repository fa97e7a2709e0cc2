//! Layer forward and backward passes over `(timesteps, channels)` activations
//! stored row-major in flat buffers.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Layer {
    Embedding { vocab: usize, dim: usize },
    GaussianNoise { std: f64 },
    /// Same-padded, stride 1, fused ReLU.
    Conv1d { kernel: usize, input: usize, filters: usize },
    MaxPool { pool: usize },
    Dropout { rate: f64 },
    /// Both directions return full sequences, concatenated per timestep.
    BiLstm { input: usize, hidden: usize },
    /// Applied independently at every timestep.
    Dense { input: usize, units: usize, relu: bool },
    Flatten,
}

/// Activation shape. `flat` marks a single vector produced by `Flatten`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub steps: usize,
    pub channels: usize,
    pub flat: bool,
}

impl Shape {
    pub fn len(&self) -> usize {
        self.steps * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> Vec<usize> {
        if self.flat {
            vec![self.channels]
        } else {
            vec![self.steps, self.channels]
        }
    }
}

pub(crate) enum Cache {
    None,
    Indices(Vec<u32>),
    /// Layer input and post-activation output.
    InOut(Vec<f64>, Vec<f64>),
    Argmax(Vec<usize>, usize),
    Mask(Vec<f64>),
    Lstm(Vec<f64>, [LstmTrace; 2]),
}

#[derive(Default)]
pub(crate) struct LstmTrace {
    /// Per processing step: activated gates i, f, g, o (4h each).
    gates: Vec<f64>,
    cells: Vec<f64>,
    hidden: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    super::super::ensemble::sigmoid(z)
}

impl Layer {
    pub fn n_params(&self) -> usize {
        match *self {
            Layer::Embedding { vocab, dim } => vocab * dim,
            Layer::Conv1d { kernel, input, filters } => kernel * input * filters + filters,
            Layer::BiLstm { input, hidden } => 2 * (input * 4 * hidden + hidden * 4 * hidden + 4 * hidden),
            Layer::Dense { input, units, .. } => input * units + units,
            _ => 0,
        }
    }

    pub fn output_shape(&self, s: Shape) -> Shape {
        match *self {
            Layer::Embedding { dim, .. } => Shape { steps: s.channels, channels: dim, flat: false },
            Layer::Conv1d { filters, .. } => Shape { channels: filters, ..s },
            Layer::MaxPool { pool } => Shape { steps: s.steps / pool, ..s },
            Layer::BiLstm { hidden, .. } => Shape { channels: 2 * hidden, ..s },
            Layer::Dense { units, .. } => Shape { channels: units, ..s },
            Layer::Flatten => Shape { steps: 1, channels: s.len(), flat: true },
            Layer::GaussianNoise { .. } | Layer::Dropout { .. } => s,
        }
    }

    /// Whether the layer appears in shape traces.
    pub fn is_traced(&self) -> bool {
        !matches!(self, Layer::GaussianNoise { .. } | Layer::Dropout { .. })
    }

    pub(crate) fn init(&self, p: &mut [f64], rng: &mut ChaCha8Rng) {
        match *self {
            Layer::Embedding { .. } => {
                let u = Uniform::new_inclusive(-0.05, 0.05);
                p.iter_mut().for_each(|w| *w = u.sample(rng));
            }
            Layer::Conv1d { kernel, input, filters } => {
                let n = kernel * input * filters;
                glorot(&mut p[..n], kernel * input, kernel * filters, rng);
                p[n..].fill(0.0);
            }
            Layer::Dense { input, units, .. } => {
                let n = input * units;
                glorot(&mut p[..n], input, units, rng);
                p[n..].fill(0.0);
            }
            Layer::BiLstm { input, hidden } => {
                let g = 4 * hidden;
                let per_dir = input * g + hidden * g + g;
                for d in 0..2 {
                    let q = &mut p[d * per_dir..(d + 1) * per_dir];
                    glorot(&mut q[..input * g], input, g, rng);
                    orthogonal_rows(&mut q[input * g..input * g + hidden * g], hidden, g, rng);
                    let b = &mut q[input * g + hidden * g..];
                    b.fill(0.0);
                    b[hidden..2 * hidden].fill(1.0);
                }
            }
            _ => {}
        }
    }

    /// `rng` is `Some` in training mode, enabling noise and dropout.
    pub(crate) fn forward(
        &self,
        p: &[f64],
        x: Vec<f64>,
        s: Shape,
        rng: Option<&mut ChaCha8Rng>,
        keep_cache: bool,
    ) -> (Vec<f64>, Cache) {
        match *self {
            Layer::Embedding { .. } => unreachable!("embedding consumes indices"),
            Layer::GaussianNoise { std } => match rng {
                Some(rng) if std > 0.0 => {
                    let mut y = x;
                    y.iter_mut().for_each(|v| *v += std * rng.sample::<f64, _>(StandardNormal));
                    (y, Cache::None)
                }
                _ => (x, Cache::None),
            },
            Layer::Dropout { rate } => match rng {
                Some(rng) if rate > 0.0 => {
                    let keep = 1.0 / (1.0 - rate);
                    let mask: Vec<f64> =
                        (0..x.len()).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect();
                    let y = x.iter().zip(&mask).map(|(a, m)| a * m).collect();
                    (y, if keep_cache { Cache::Mask(mask) } else { Cache::None })
                }
                _ => (x, Cache::None),
            },
            Layer::Flatten => (x, Cache::None),
            Layer::MaxPool { pool } => {
                let out = self.output_shape(s);
                let c = s.channels;
                let mut y = vec![0.0; out.len()];
                let mut arg = vec![0usize; out.len()];
                for t in 0..out.steps {
                    for ch in 0..c {
                        let mut best = t * pool * c + ch;
                        for k in 1..pool {
                            let j = (t * pool + k) * c + ch;
                            if x[j] > x[best] {
                                best = j;
                            }
                        }
                        y[t * c + ch] = x[best];
                        arg[t * c + ch] = best;
                    }
                }
                (y, if keep_cache { Cache::Argmax(arg, x.len()) } else { Cache::None })
            }
            Layer::Conv1d { kernel, input, filters } => {
                let steps = s.steps;
                let left = (kernel - 1) / 2;
                let bias = &p[kernel * input * filters..];
                let mut y = vec![0.0; steps * filters];
                for t in 0..steps {
                    let yt = &mut y[t * filters..(t + 1) * filters];
                    yt.copy_from_slice(bias);
                    for j in 0..kernel {
                        let Some(src) = (t + j).checked_sub(left).filter(|&u| u < steps) else {
                            continue;
                        };
                        let xs = &x[src * input..(src + 1) * input];
                        let w = &p[j * input * filters..(j + 1) * input * filters];
                        for (i, &xv) in xs.iter().enumerate() {
                            if xv == 0.0 {
                                continue;
                            }
                            let wr = &w[i * filters..(i + 1) * filters];
                            for (o, yo) in yt.iter_mut().enumerate() {
                                *yo += xv * wr[o];
                            }
                        }
                    }
                    yt.iter_mut().for_each(|v| *v = v.max(0.0));
                }
                let cache = if keep_cache { Cache::InOut(x, y.clone()) } else { Cache::None };
                (y, cache)
            }
            Layer::Dense { input, units, relu } => {
                let steps = s.len() / input;
                let bias = &p[input * units..];
                let mut y = vec![0.0; steps * units];
                for t in 0..steps {
                    let yt = &mut y[t * units..(t + 1) * units];
                    yt.copy_from_slice(bias);
                    for (i, &xv) in x[t * input..(t + 1) * input].iter().enumerate() {
                        let wr = &p[i * units..(i + 1) * units];
                        for (o, yo) in yt.iter_mut().enumerate() {
                            *yo += xv * wr[o];
                        }
                    }
                    if relu {
                        yt.iter_mut().for_each(|v| *v = v.max(0.0));
                    }
                }
                let cache = if keep_cache { Cache::InOut(x, y.clone()) } else { Cache::None };
                (y, cache)
            }
            Layer::BiLstm { input, hidden } => {
                let steps = s.steps;
                let per_dir = input * 4 * hidden + hidden * 4 * hidden + 4 * hidden;
                let mut y = vec![0.0; steps * 2 * hidden];
                let mut traces = [LstmTrace::default(), LstmTrace::default()];
                for (d, trace) in traces.iter_mut().enumerate() {
                    *trace = lstm_forward(
                        &p[d * per_dir..(d + 1) * per_dir],
                        &x,
                        steps,
                        input,
                        hidden,
                        d == 1,
                    );
                    for step in 0..steps {
                        let t = if d == 1 { steps - 1 - step } else { step };
                        y[t * 2 * hidden + d * hidden..t * 2 * hidden + (d + 1) * hidden]
                            .copy_from_slice(&trace.hidden[step * hidden..(step + 1) * hidden]);
                    }
                }
                let cache = if keep_cache { Cache::Lstm(x, traces) } else { Cache::None };
                (y, cache)
            }
        }
    }

    /// Accumulates parameter gradients into `g` and returns the input gradient.
    pub(crate) fn backward(
        &self,
        p: &[f64],
        g: &mut [f64],
        cache: Cache,
        dy: Vec<f64>,
        s: Shape,
    ) -> Vec<f64> {
        match (*self, cache) {
            (Layer::GaussianNoise { .. } | Layer::Flatten, _) => dy,
            (Layer::Dropout { .. }, Cache::Mask(mask)) => {
                dy.iter().zip(&mask).map(|(a, m)| a * m).collect()
            }
            (Layer::Dropout { .. }, _) => dy,
            (Layer::MaxPool { .. }, Cache::Argmax(arg, n)) => {
                let mut dx = vec![0.0; n];
                for (k, &j) in arg.iter().enumerate() {
                    dx[j] += dy[k];
                }
                dx
            }
            (Layer::Conv1d { kernel, input, filters }, Cache::InOut(x, y)) => {
                let steps = s.steps;
                let left = (kernel - 1) / 2;
                let nw = kernel * input * filters;
                let mut dz = dy;
                for (d, &out) in dz.iter_mut().zip(&y) {
                    if out <= 0.0 {
                        *d = 0.0;
                    }
                }
                let mut dx = vec![0.0; x.len()];
                for t in 0..steps {
                    let dzt = &dz[t * filters..(t + 1) * filters];
                    if dzt.iter().all(|&v| v == 0.0) {
                        continue;
                    }
                    for (o, &v) in dzt.iter().enumerate() {
                        g[nw + o] += v;
                    }
                    for j in 0..kernel {
                        let Some(src) = (t + j).checked_sub(left).filter(|&u| u < steps) else {
                            continue;
                        };
                        for i in 0..input {
                            let xv = x[src * input + i];
                            let base = (j * input + i) * filters;
                            let mut acc = 0.0;
                            for (o, &v) in dzt.iter().enumerate() {
                                g[base + o] += xv * v;
                                acc += p[base + o] * v;
                            }
                            dx[src * input + i] += acc;
                        }
                    }
                }
                dx
            }
            (Layer::Dense { input, units, relu }, Cache::InOut(x, y)) => {
                let steps = s.len() / input;
                let mut dz = dy;
                if relu {
                    for (d, &out) in dz.iter_mut().zip(&y) {
                        if out <= 0.0 {
                            *d = 0.0;
                        }
                    }
                }
                let mut dx = vec![0.0; x.len()];
                for t in 0..steps {
                    let dzt = &dz[t * units..(t + 1) * units];
                    for (o, &v) in dzt.iter().enumerate() {
                        g[input * units + o] += v;
                    }
                    for i in 0..input {
                        let xv = x[t * input + i];
                        let mut acc = 0.0;
                        for (o, &v) in dzt.iter().enumerate() {
                            g[i * units + o] += xv * v;
                            acc += p[i * units + o] * v;
                        }
                        dx[t * input + i] = acc;
                    }
                }
                dx
            }
            (Layer::BiLstm { input, hidden }, Cache::Lstm(x, traces)) => {
                let steps = s.steps;
                let per_dir = input * 4 * hidden + hidden * 4 * hidden + 4 * hidden;
                let mut dx = vec![0.0; x.len()];
                for (d, trace) in traces.iter().enumerate() {
                    let mut dh_seq = vec![0.0; steps * hidden];
                    for step in 0..steps {
                        let t = if d == 1 { steps - 1 - step } else { step };
                        dh_seq[step * hidden..(step + 1) * hidden].copy_from_slice(
                            &dy[t * 2 * hidden + d * hidden..t * 2 * hidden + (d + 1) * hidden],
                        );
                    }
                    lstm_backward(
                        &p[d * per_dir..(d + 1) * per_dir],
                        &mut g[d * per_dir..(d + 1) * per_dir],
                        &x,
                        trace,
                        &dh_seq,
                        &mut dx,
                        steps,
                        input,
                        hidden,
                        d == 1,
                    );
                }
                dx
            }
            (layer, _) => unreachable!("no cache for {layer:?}"),
        }
    }
}

fn glorot(w: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) {
    let limit = libm::sqrt(6.0 / (fan_in + fan_out) as f64);
    let u = Uniform::new_inclusive(-limit, limit);
    w.iter_mut().for_each(|v| *v = u.sample(rng));
}

/// Fills a `rows x cols` matrix (rows <= cols) with orthonormal rows.
fn orthogonal_rows(w: &mut [f64], rows: usize, cols: usize, rng: &mut ChaCha8Rng) {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    loop {
        w.iter_mut().for_each(|v| *v = normal.sample(rng));
        let mut ok = true;
        for r in 0..rows {
            for q in 0..r {
                let dot: f64 = (0..cols).map(|c| w[r * cols + c] * w[q * cols + c]).sum();
                for c in 0..cols {
                    w[r * cols + c] -= dot * w[q * cols + c];
                }
            }
            let norm = libm::sqrt((0..cols).map(|c| w[r * cols + c] * w[r * cols + c]).sum());
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for c in 0..cols {
                w[r * cols + c] /= norm;
            }
        }
        if ok {
            return;
        }
    }
}

fn lstm_forward(
    p: &[f64],
    x: &[f64],
    steps: usize,
    input: usize,
    hidden: usize,
    reverse: bool,
) -> LstmTrace {
    let g4 = 4 * hidden;
    let (wx, rest) = p.split_at(input * g4);
    let (wh, b) = rest.split_at(hidden * g4);
    let mut trace = LstmTrace {
        gates: vec![0.0; steps * g4],
        cells: vec![0.0; steps * hidden],
        hidden: vec![0.0; steps * hidden],
    };
    let mut z = vec![0.0; g4];
    for step in 0..steps {
        let t = if reverse { steps - 1 - step } else { step };
        z.copy_from_slice(b);
        for (i, &xv) in x[t * input..(t + 1) * input].iter().enumerate() {
            let row = &wx[i * g4..(i + 1) * g4];
            z.iter_mut().zip(row).for_each(|(a, w)| *a += xv * w);
        }
        if step > 0 {
            for k in 0..hidden {
                let hv = trace.hidden[(step - 1) * hidden + k];
                let row = &wh[k * g4..(k + 1) * g4];
                z.iter_mut().zip(row).for_each(|(a, w)| *a += hv * w);
            }
        }
        let gates = &mut trace.gates[step * g4..(step + 1) * g4];
        for k in 0..hidden {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[hidden + k]);
            let gg = libm::tanh(z[2 * hidden + k]);
            let o = sigmoid(z[3 * hidden + k]);
            gates[k] = i;
            gates[hidden + k] = f;
            gates[2 * hidden + k] = gg;
            gates[3 * hidden + k] = o;
            let c_prev = if step > 0 { trace.cells[(step - 1) * hidden + k] } else { 0.0 };
            let c = f * c_prev + i * gg;
            trace.cells[step * hidden + k] = c;
            trace.hidden[step * hidden + k] = o * libm::tanh(c);
        }
    }
    trace
}

#[allow(clippy::too_many_arguments)]
fn lstm_backward(
    p: &[f64],
    g: &mut [f64],
    x: &[f64],
    trace: &LstmTrace,
    dh_seq: &[f64],
    dx: &mut [f64],
    steps: usize,
    input: usize,
    hidden: usize,
    reverse: bool,
) {
    let g4 = 4 * hidden;
    let nwx = input * g4;
    let nwh = hidden * g4;
    let mut dh_next = vec![0.0; hidden];
    let mut dc_next = vec![0.0; hidden];
    let mut dz = vec![0.0; g4];
    for step in (0..steps).rev() {
        let t = if reverse { steps - 1 - step } else { step };
        let gates = &trace.gates[step * g4..(step + 1) * g4];
        for k in 0..hidden {
            let (i, f, gg, o) =
                (gates[k], gates[hidden + k], gates[2 * hidden + k], gates[3 * hidden + k]);
            let c = trace.cells[step * hidden + k];
            let c_prev = if step > 0 { trace.cells[(step - 1) * hidden + k] } else { 0.0 };
            let tc = libm::tanh(c);
            let dh = dh_seq[step * hidden + k] + dh_next[k];
            let dc = dh * o * (1.0 - tc * tc) + dc_next[k];
            dz[k] = dc * gg * i * (1.0 - i);
            dz[hidden + k] = dc * c_prev * f * (1.0 - f);
            dz[2 * hidden + k] = dc * i * (1.0 - gg * gg);
            dz[3 * hidden + k] = dh * tc * o * (1.0 - o);
            dc_next[k] = dc * f;
        }
        for (gb, &v) in g[nwx + nwh..].iter_mut().zip(&dz) {
            *gb += v;
        }
        for i in 0..input {
            let xv = x[t * input + i];
            let row = &p[i * g4..(i + 1) * g4];
            let grow = &mut g[i * g4..(i + 1) * g4];
            let mut acc = 0.0;
            for k in 0..g4 {
                grow[k] += xv * dz[k];
                acc += row[k] * dz[k];
            }
            dx[t * input + i] += acc;
        }
        for k in 0..hidden {
            let h_prev = if step > 0 { trace.hidden[(step - 1) * hidden + k] } else { 0.0 };
            let row = &p[nwx + k * g4..nwx + (k + 1) * g4];
            let grow = &mut g[nwx + k * g4..nwx + (k + 1) * g4];
            let mut acc = 0.0;
            for q in 0..g4 {
                grow[q] += h_prev * dz[q];
                acc += row[q] * dz[q];
            }
            dh_next[k] = acc;
        }
    }
}
