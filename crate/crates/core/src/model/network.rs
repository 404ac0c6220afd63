use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::batch::SequenceBatch;
use super::cell::{sigmoid, step_into, CellParams};
use super::config::{Activation, Head, ModelConfig};
use super::loss::{bce_logit_grad, bce_term};
use super::params::{AffineLayout, DirectionLayout, Layout, ModelParams};
use crate::{Error, Result};

/// Sequences per parallel work item. Fixed so that reductions happen in the
/// same order regardless of the thread count.
const CHUNK: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: ModelParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// `batch x outputs`.
    pub probabilities: Vec<f64>,
    /// `batch x outputs`, pre-sigmoid.
    pub logits: Vec<f64>,
    /// `hidden[b][l]` is layer `l`'s `T_b x width` output for row `b`.
    pub hidden: Vec<Vec<Vec<f64>>>,
}

struct DirTrace {
    gates: Vec<f64>,
    c: Vec<f64>,
    h: Vec<f64>,
}

struct LayerTrace {
    dirs: Vec<DirTrace>,
    out: Vec<f64>,
}

struct SeqTrace {
    len: usize,
    layers: Vec<LayerTrace>,
    /// Inputs to each affine layer, the pooled vector first.
    acts: Vec<Vec<f64>>,
    /// Pre-activation of each hidden dense layer.
    pre: Vec<Vec<f64>>,
    logits: Vec<f64>,
}

fn cell<'a>(values: &'a [f64], d: &DirectionLayout) -> CellParams<'a> {
    let (h, i) = (d.cells, d.inputs);
    CellParams {
        w_input: &values[d.w_input..d.w_input + 4 * h * i],
        w_recurrent: &values[d.w_recurrent..d.w_recurrent + 4 * h * h],
        bias: &values[d.bias..d.bias + 4 * h],
        inputs: i,
        cells: h,
    }
}

fn affine(values: &[f64], a: &AffineLayout, x: &[f64]) -> Vec<f64> {
    let w = &values[a.weight..a.weight + a.units * a.inputs];
    (0..a.units)
        .map(|r| {
            let row = &w[r * a.inputs..(r + 1) * a.inputs];
            row.iter().zip(x).fold(values[a.bias + r], |s, (w, v)| s + w * v)
        })
        .collect()
}

/// Runs one direction over `x` (`len x inputs`), storing states by time index.
fn run_direction(p: &CellParams, x: &[f64], len: usize, reverse: bool) -> DirTrace {
    let n = p.cells;
    let mut tr = DirTrace {
        gates: vec![0.0; len * 4 * n],
        c: vec![0.0; len * n],
        h: vec![0.0; len * n],
    };
    let mut h_prev = vec![0.0; n];
    let mut c_prev = vec![0.0; n];
    for s in 0..len {
        let t = if reverse { len - 1 - s } else { s };
        let xt = &x[t * p.inputs..(t + 1) * p.inputs];
        let (h, c) = (&mut tr.h[t * n..(t + 1) * n], &mut tr.c[t * n..(t + 1) * n]);
        step_into(p, xt, &h_prev, &c_prev, &mut tr.gates[t * 4 * n..(t + 1) * 4 * n], h, c);
        h_prev.copy_from_slice(h);
        c_prev.copy_from_slice(c);
    }
    tr
}

/// Backpropagates `dh` (`len x cells`, by time index) through one direction,
/// accumulating parameter gradients into `g` and input gradients into `dx`.
#[allow(clippy::too_many_arguments)]
fn backprop_direction(
    p: &CellParams,
    d: &DirectionLayout,
    x: &[f64],
    tr: &DirTrace,
    len: usize,
    reverse: bool,
    dh_in: &[f64],
    g: &mut [f64],
    dx: &mut [f64],
) {
    let (n, inp) = (p.cells, p.inputs);
    let mut dh_next = vec![0.0; n];
    let mut dc_next = vec![0.0; n];
    let mut da = vec![0.0; 4 * n];
    let zero = vec![0.0; n];
    for s in (0..len).rev() {
        let t = if reverse { len - 1 - s } else { s };
        let prev = if s == 0 {
            None
        } else if reverse {
            Some(t + 1)
        } else {
            Some(t - 1)
        };
        let (h_prev, c_prev) = match prev {
            Some(q) => (&tr.h[q * n..(q + 1) * n], &tr.c[q * n..(q + 1) * n]),
            None => (&zero[..], &zero[..]),
        };
        let gates = &tr.gates[t * 4 * n..(t + 1) * 4 * n];
        let c = &tr.c[t * n..(t + 1) * n];
        for j in 0..n {
            let (i, f, gg, o) = (gates[j], gates[n + j], gates[2 * n + j], gates[3 * n + j]);
            let dh = dh_in[t * n + j] + dh_next[j];
            let tc = c[j].tanh();
            let d_o = dh * tc;
            let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            da[j] = dc * gg * i * (1.0 - i);
            da[n + j] = dc * c_prev[j] * f * (1.0 - f);
            da[2 * n + j] = dc * i * (1.0 - gg * gg);
            da[3 * n + j] = d_o * o * (1.0 - o);
            dc_next[j] = dc * f;
        }
        let xt = &x[t * inp..(t + 1) * inp];
        let dxt = &mut dx[t * inp..(t + 1) * inp];
        dh_next.fill(0.0);
        for (r, &a) in da.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let wi = &p.w_input[r * inp..(r + 1) * inp];
            let gi = &mut g[d.w_input + r * inp..d.w_input + (r + 1) * inp];
            for k in 0..inp {
                gi[k] += a * xt[k];
                dxt[k] += a * wi[k];
            }
            let wr = &p.w_recurrent[r * n..(r + 1) * n];
            let gr = &mut g[d.w_recurrent + r * n..d.w_recurrent + (r + 1) * n];
            for k in 0..n {
                gr[k] += a * h_prev[k];
                dh_next[k] += a * wr[k];
            }
            g[d.bias + r] += a;
        }
    }
}

impl Model {
    pub fn new(config: ModelConfig, params: ModelParams) -> Result<Self> {
        config.validate()?;
        if params.layout != Layout::new(&config) {
            return Err(Error::Shape("parameter layout does not match the configuration".into()));
        }
        Ok(Model { config, params })
    }

    /// Freshly initialised model, seeded.
    pub fn init(config: ModelConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let params = ModelParams::init(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        Ok(Model { config, params })
    }

    fn check(&self, batch: &SequenceBatch) -> Result<()> {
        if batch.input_dim != self.config.input_dim {
            return Err(Error::Shape(format!(
                "batch input_dim {} but model expects {}",
                batch.input_dim, self.config.input_dim
            )));
        }
        if batch.outputs != self.config.outputs {
            return Err(Error::Shape(format!(
                "batch has {} targets per row but model has {} outputs",
                batch.outputs, self.config.outputs
            )));
        }
        if let Some(b) = batch.lengths.iter().position(|&l| l == 0) {
            return Err(Error::EmptySequence { index: b });
        }
        Ok(())
    }

    /// Runs LSTM layers `from..`; layer `from` reads `input` (`len` steps).
    fn run_layers(&self, input: &[f64], len: usize, from: usize) -> Vec<LayerTrace> {
        let v = &self.params.values;
        let lstm = &self.params.layout.lstm;
        let mut layers: Vec<LayerTrace> = Vec::with_capacity(lstm.len() - from);
        for dirs in &lstm[from..] {
            let input = layers.last().map_or(input, |l| &l.out[..]);
            let traces: Vec<DirTrace> = dirs
                .iter()
                .enumerate()
                .map(|(k, d)| run_direction(&cell(v, d), input, len, k == 1))
                .collect();
            let n = dirs[0].cells;
            let width = n * dirs.len();
            let mut out = vec![0.0; len * width];
            for t in 0..len {
                for (k, tr) in traces.iter().enumerate() {
                    out[t * width + k * n..t * width + (k + 1) * n].copy_from_slice(&tr.h[t * n..(t + 1) * n]);
                }
            }
            layers.push(LayerTrace { dirs: traces, out });
        }
        layers
    }

    /// Pooling, dense stack and output layer: `(acts, pre, logits)`.
    fn head(&self, last: &[f64], len: usize) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>) {
        let v = &self.params.values;
        let layout = &self.params.layout;
        let mut acts = vec![self.pool(last, len)];
        let mut pre = Vec::with_capacity(layout.dense.len());
        for (a, spec) in layout.dense.iter().zip(&self.config.dense) {
            let z = affine(v, a, acts.last().expect("pooled"));
            let act = match spec.activation {
                Activation::Relu => z.iter().map(|&u| u.max(0.0)).collect(),
                Activation::None => z.clone(),
            };
            pre.push(z);
            acts.push(act);
        }
        let logits = affine(v, &layout.output, acts.last().expect("pooled"));
        (acts, pre, logits)
    }

    fn trace(&self, x: &[f64]) -> SeqTrace {
        let len = x.len() / self.config.input_dim;
        let layers = self.run_layers(x, len, 0);
        let (acts, pre, logits) = self.head(&layers.last().expect("nonempty layers").out, len);
        SeqTrace { len, layers, acts, pre, logits }
    }

    /// Loss with LSTM layers below `from` taken from `cache[b]`, plus the
    /// sign pattern of every ReLU pre-activation. Used by finite differences.
    pub(crate) fn loss_from_cache(&self, batch: &SequenceBatch, cache: &[Vec<Vec<f64>>], from: usize) -> (f64, Vec<bool>) {
        let k = self.config.outputs;
        let layers = self.params.layout.lstm.len();
        let mut loss = 0.0;
        let mut signs = Vec::new();
        for b in 0..batch.len() {
            let len = batch.lengths[b];
            let input = if from == 0 { batch.sequence(b) } else { &cache[b][from - 1][..] };
            let (_, pre, logits) = if from < layers {
                let run = self.run_layers(input, len, from);
                self.head(&run.last().expect("nonempty layers").out, len)
            } else {
                self.head(&cache[b][layers - 1], len)
            };
            for (z, spec) in pre.iter().zip(&self.config.dense) {
                if spec.activation == Activation::Relu {
                    signs.extend(z.iter().map(|&u| u > 0.0));
                }
            }
            let y = batch.target(b);
            for j in 0..k {
                loss += bce_term(sigmoid(logits[j]), y[j]);
            }
        }
        (loss / (batch.len() * k) as f64, signs)
    }

    fn pool(&self, out: &[f64], len: usize) -> Vec<f64> {
        let last = self.config.lstm_layers.last().expect("nonempty layers");
        let (n, width) = (last.cells, last.output_width());
        match self.config.head {
            Head::Ga => {
                let mut m = vec![0.0; width];
                for row in out.chunks_exact(width) {
                    for (a, b) in m.iter_mut().zip(row) {
                        *a += b;
                    }
                }
                let inv = len as f64;
                m.iter_mut().for_each(|a| *a /= inv);
                m
            }
            Head::Fs => {
                let mut m = out[(len - 1) * width..(len - 1) * width + n].to_vec();
                if last.bidirectional {
                    m.extend_from_slice(&out[n..2 * n]);
                }
                m
            }
        }
    }

    /// Accumulates gradients of `sum_k w_k * logit_k` into `g`.
    fn backprop(&self, x: &[f64], tr: &SeqTrace, dlogits: &[f64], g: &mut [f64]) {
        let v = &self.params.values;
        let layout = &self.params.layout;

        let mut delta = dlogits.to_vec();
        let affines: Vec<&AffineLayout> = layout.dense.iter().chain(std::iter::once(&layout.output)).collect();
        for li in (0..affines.len()).rev() {
            let a = affines[li];
            let input = &tr.acts[li];
            let mut dinput = vec![0.0; a.inputs];
            for (r, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                g[a.bias + r] += d;
                let w = &v[a.weight + r * a.inputs..a.weight + (r + 1) * a.inputs];
                let gw = &mut g[a.weight + r * a.inputs..a.weight + (r + 1) * a.inputs];
                for k in 0..a.inputs {
                    gw[k] += d * input[k];
                    dinput[k] += d * w[k];
                }
            }
            if li > 0 && self.config.dense[li - 1].activation == Activation::Relu {
                for (d, &z) in dinput.iter_mut().zip(&tr.pre[li - 1]) {
                    if z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = dinput;
        }

        let len = tr.len;
        let last = self.config.lstm_layers.last().expect("nonempty layers");
        let (n, width) = (last.cells, last.output_width());
        let mut dout = vec![0.0; len * width];
        match self.config.head {
            Head::Ga => {
                let inv = 1.0 / len as f64;
                for row in dout.chunks_exact_mut(width) {
                    for (a, d) in row.iter_mut().zip(&delta) {
                        *a = d * inv;
                    }
                }
            }
            Head::Fs => {
                dout[(len - 1) * width..(len - 1) * width + n].copy_from_slice(&delta[..n]);
                if last.bidirectional {
                    dout[n..2 * n].copy_from_slice(&delta[n..2 * n]);
                }
            }
        }

        for l in (0..layout.lstm.len()).rev() {
            let dirs = &layout.lstm[l];
            let input = if l == 0 { x } else { &tr.layers[l - 1].out[..] };
            let inp = dirs[0].inputs;
            let n = dirs[0].cells;
            let width = n * dirs.len();
            let mut dx = vec![0.0; len * inp];
            for (k, d) in dirs.iter().enumerate() {
                let dh: Vec<f64> = (0..len)
                    .flat_map(|t| dout[t * width + k * n..t * width + (k + 1) * n].iter().copied())
                    .collect();
                backprop_direction(&cell(v, d), d, input, &tr.layers[l].dirs[k], len, k == 1, &dh, g, &mut dx);
            }
            dout = dx;
        }
    }

    /// Probabilities, logits and every layer's hidden sequence.
    pub fn forward(&self, batch: &SequenceBatch) -> Result<ForwardOutput> {
        self.check(batch)?;
        let per_row: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..batch.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|b| {
                let tr = self.trace(batch.sequence(b));
                (tr.logits, tr.layers.into_iter().map(|l| l.out).collect())
            })
            .collect();
        let mut logits = Vec::with_capacity(batch.len() * self.config.outputs);
        let mut hidden = Vec::with_capacity(batch.len());
        for (z, h) in per_row {
            logits.extend(z);
            hidden.push(h);
        }
        let probabilities = logits.iter().map(|&z| sigmoid(z)).collect();
        Ok(ForwardOutput { probabilities, logits, hidden })
    }

    /// Pre-sigmoid outputs, `batch x outputs`.
    pub fn logits(&self, batch: &SequenceBatch) -> Result<Vec<f64>> {
        self.check(batch)?;
        let rows: Vec<Vec<f64>> = (0..batch.len())
            .into_par_iter()
            .with_min_len(CHUNK)
            .map(|b| self.trace(batch.sequence(b)).logits)
            .collect();
        Ok(rows.concat())
    }

    pub fn predict(&self, batch: &SequenceBatch) -> Result<Vec<f64>> {
        Ok(self.logits(batch)?.into_iter().map(sigmoid).collect())
    }

    /// Mean binary cross-entropy over the batch and outputs.
    pub fn loss(&self, batch: &SequenceBatch) -> Result<f64> {
        let p = self.predict(batch)?;
        Ok(super::loss::bce_loss(&p, &batch.targets))
    }

    /// Loss and its exact gradient with respect to every parameter.
    pub fn loss_and_grad(&self, batch: &SequenceBatch) -> Result<(f64, Vec<f64>)> {
        self.check(batch)?;
        let k = self.config.outputs;
        let scale = 1.0 / (batch.len() * k) as f64;
        let total = self.params.len();
        let rows: Vec<usize> = (0..batch.len()).collect();
        let parts: Vec<(f64, Vec<f64>)> = rows
            .par_chunks(CHUNK)
            .map(|idx| {
                let mut g = vec![0.0; total];
                let mut loss = 0.0;
                for &b in idx {
                    let x = batch.sequence(b);
                    let tr = self.trace(x);
                    let y = batch.target(b);
                    let mut dz = vec![0.0; k];
                    for j in 0..k {
                        let p = sigmoid(tr.logits[j]);
                        loss += bce_term(p, y[j]);
                        dz[j] = bce_logit_grad(p, y[j]) * scale;
                    }
                    self.backprop(x, &tr, &dz, &mut g);
                }
                (loss, g)
            })
            .collect();
        let mut loss = 0.0;
        let mut grad = vec![0.0; total];
        for (l, g) in parts {
            loss += l;
            for (a, b) in grad.iter_mut().zip(&g) {
                *a += b;
            }
        }
        Ok((loss * scale, grad))
    }

    /// Per-layer hidden sequences for one `T x input_dim` sequence.
    pub fn hidden_sequences(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        self.check_sequence(x)?;
        Ok(self.trace(x).layers.into_iter().map(|l| l.out).collect())
    }

    /// Vector after the head for one sequence (pooled last-layer state).
    pub fn pooled(&self, x: &[f64]) -> Result<Vec<f64>> {
        let h = self.hidden_sequences(x)?;
        let len = x.len() / self.config.input_dim;
        Ok(self.pool(h.last().expect("nonempty layers"), len))
    }

    /// Output-layer affine map applied to `x` (width of the last hidden layer).
    pub fn output_affine(&self, x: &[f64]) -> Vec<f64> {
        affine(&self.params.values, &self.params.layout.output, x)
    }

    /// Every dense layer and the output layer applied to `x` as plain affine
    /// maps, ignoring activations. Equals the head for affine-only configs.
    pub fn affine_head(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.params.values;
        let mut a = x.to_vec();
        for layer in &self.params.layout.dense {
            a = affine(v, layer, &a);
        }
        affine(v, &self.params.layout.output, &a)
    }

    /// Output logits for one `T x input_dim` sequence.
    pub fn sequence_logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_sequence(x)?;
        Ok(self.trace(x).logits)
    }

    fn check_sequence(&self, x: &[f64]) -> Result<()> {
        if x.is_empty() {
            return Err(Error::EmptySequence { index: 0 });
        }
        if x.len() % self.config.input_dim != 0 {
            return Err(Error::Shape(format!("sequence length {} not a multiple of input_dim", x.len())));
        }
        Ok(())
    }
}
