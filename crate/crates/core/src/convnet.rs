//! Stage-two diagnostic classifier: a convolutional sentence model.
//!
//! Tokens are embedded, convolved with filters of several widths (valid
//! convolution over positions), passed through ReLU, max-pooled over time,
//! concatenated, optionally dropped out, and mapped by an affine layer to a
//! two-way softmax over `[diagnostic, other]`. Training minimizes mean
//! cross-entropy with Adam. Everything is `f64` and driven by one seeded
//! generator, so a fixed seed reproduces a model bit for bit.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::modelfile::{Block, ModelFile};
use crate::relevance::{Label, LabeledExample};

pub const MODEL_KIND: &str = "cnn";
pub const PAD: usize = 0;
pub const UNK: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const UNK_TOKEN: &str = "<unk>";

pub const CLASS_DIAGNOSTIC: usize = 0;
pub const CLASS_OTHER: usize = 1;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CnnHyper {
    pub embed_dim: usize,
    pub filter_widths: Vec<usize>,
    pub filters_per_width: usize,
    /// Probability of keeping a pooled feature during training.
    pub dropout_keep: f64,
    pub batch_size: usize,
    pub lr: f64,
    pub epochs: usize,
    /// Padded sequence length; zero derives it from the training data.
    pub max_len: usize,
    /// Share of labeled examples held out for evaluation.
    pub eval_fraction: f64,
    pub seed: u64,
}

impl Default for CnnHyper {
    fn default() -> Self {
        CnnHyper {
            embed_dim: 64,
            filter_widths: vec![3, 4, 5],
            filters_per_width: 64,
            dropout_keep: 0.5,
            batch_size: 32,
            lr: 1e-3,
            epochs: 10,
            max_len: 0,
            eval_fraction: 0.1,
            seed: 0,
        }
    }
}

impl CnnHyper {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHyper(msg));
        if self.embed_dim == 0 || self.filters_per_width == 0 || self.batch_size == 0 {
            return bad("embed_dim, filters_per_width and batch_size must be positive".into());
        }
        if self.filter_widths.is_empty() || self.filter_widths.contains(&0) {
            return bad(format!("filter widths {:?}", self.filter_widths));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return bad(format!("dropout_keep {} not in (0, 1]", self.dropout_keep));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.eval_fraction) {
            return bad(format!("eval_fraction {} not in [0, 1)", self.eval_fraction));
        }
        Ok(())
    }

    pub fn max_width(&self) -> usize {
        self.filter_widths.iter().copied().max().unwrap_or(1)
    }

    pub fn hidden(&self) -> usize {
        self.filter_widths.len() * self.filters_per_width
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub width: usize,
    /// `filters × width × embed_dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// All trainable tensors. Also used for gradients of the same shape.
#[derive(Debug, Clone, PartialEq)]
pub struct CnnParams {
    /// `vocab × embed_dim`
    pub embeddings: Vec<f64>,
    pub conv: Vec<ConvLayer>,
    /// `hidden × 2`
    pub fc_weights: Vec<f64>,
    pub fc_bias: Vec<f64>,
}

impl CnnParams {
    pub fn zeros(vocab: usize, hyper: &CnnHyper) -> Self {
        let (d, f) = (hyper.embed_dim, hyper.filters_per_width);
        CnnParams {
            embeddings: vec![0.0; vocab * d],
            conv: hyper
                .filter_widths
                .iter()
                .map(|&w| ConvLayer {
                    width: w,
                    weights: vec![0.0; f * w * d],
                    bias: vec![0.0; f],
                })
                .collect(),
            fc_weights: vec![0.0; hyper.hidden() * 2],
            fc_bias: vec![0.0; 2],
        }
    }

    /// Embeddings uniform in ±0.25; convolution and output weights
    /// Glorot-uniform; biases zero.
    pub fn init(vocab: usize, hyper: &CnnHyper, rng: &mut ChaCha8Rng) -> Self {
        let mut p = CnnParams::zeros(vocab, hyper);
        for e in &mut p.embeddings {
            *e = rng.random_range(-0.25..0.25);
        }
        let (d, f) = (hyper.embed_dim as f64, hyper.filters_per_width as f64);
        for layer in &mut p.conv {
            let limit = (6.0 / (layer.width as f64 * d + f)).sqrt();
            for w in &mut layer.weights {
                *w = rng.random_range(-limit..limit);
            }
        }
        let limit = (6.0 / (hyper.hidden() as f64 + 2.0)).sqrt();
        for w in &mut p.fc_weights {
            *w = rng.random_range(-limit..limit);
        }
        p
    }

    /// Tensors in a fixed order: embeddings, each conv weight then bias,
    /// output weights, output bias.
    pub fn tensors(&self) -> Vec<&Vec<f64>> {
        let mut out = vec![&self.embeddings];
        for layer in &self.conv {
            out.push(&layer.weights);
            out.push(&layer.bias);
        }
        out.push(&self.fc_weights);
        out.push(&self.fc_bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Vec<f64>> {
        let mut out = vec![&mut self.embeddings];
        for layer in &mut self.conv {
            out.push(&mut layer.weights);
            out.push(&mut layer.bias);
        }
        out.push(&mut self.fc_weights);
        out.push(&mut self.fc_bias);
        out
    }

    fn zeroed_like(&self) -> Self {
        let mut z = self.clone();
        for t in z.tensors_mut() {
            t.iter_mut().for_each(|v| *v = 0.0);
        }
        z
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnosis {
    Diagnostic,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosisPrediction {
    pub label: Diagnosis,
    /// Probability of [`Diagnosis::Diagnostic`].
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    pub params: CnnParams,
    /// `max_len` is always resolved (nonzero) on a built model.
    pub hyper: CnnHyper,
}

/// Intermediate values of one forward pass, kept for backpropagation.
#[derive(Debug, Clone)]
struct Trace {
    ids: Vec<usize>,
    /// Position of the largest pre-activation, per feature.
    argmax: Vec<usize>,
    /// Largest pre-activation per feature (before ReLU).
    peak: Vec<f64>,
    /// Per-feature dropout scale: 0, 1/keep, or 1 when not training.
    mask: Vec<f64>,
    hidden: Vec<f64>,
    probs: [f64; 2],
}

fn class_of(label: Label) -> usize {
    match label {
        Label::Relevant => CLASS_DIAGNOSTIC,
        Label::Unrelated => CLASS_OTHER,
    }
}

fn softmax2(logits: [f64; 2]) -> [f64; 2] {
    let m = logits[0].max(logits[1]);
    let e0 = (logits[0] - m).exp();
    let e1 = (logits[1] - m).exp();
    let s = e0 + e1;
    [e0 / s, e1 / s]
}

fn log_softmax2(logits: [f64; 2], class: usize) -> f64 {
    let m = logits[0].max(logits[1]);
    let lse = m + ((logits[0] - m).exp() + (logits[1] - m).exp()).ln();
    logits[class] - lse
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl CnnModel {
    /// A model with the given vocabulary (reserved tokens are prepended) and
    /// parameters. `hyper.max_len` must already be resolved.
    pub fn from_parts(words: Vec<String>, params: CnnParams, hyper: CnnHyper) -> Result<Self> {
        hyper.validate()?;
        if hyper.max_len < hyper.max_width() {
            return Err(Error::InvalidHyper(format!(
                "max_len {} shorter than widest filter {}",
                hyper.max_len,
                hyper.max_width()
            )));
        }
        let mut vocab = vec![PAD_TOKEN.to_string(), UNK_TOKEN.to_string()];
        vocab.extend(words);
        let expected = CnnParams::zeros(vocab.len(), &hyper);
        let shapes_match = expected
            .tensors()
            .iter()
            .zip(params.tensors())
            .all(|(a, b)| a.len() == b.len())
            && expected.conv.len() == params.conv.len();
        if !shapes_match {
            return Err(Error::InvalidHyper("parameter shapes do not match hyperparameters".into()));
        }
        let index = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Ok(CnnModel {
            vocab,
            index,
            params,
            hyper,
        })
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    /// Token ids padded with PAD or truncated at the tail to `max_len`.
    pub fn encode<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<usize> {
        let mut ids: Vec<usize> = tokens
            .iter()
            .take(self.hyper.max_len)
            .map(|t| self.index.get(t.as_ref()).copied().unwrap_or(UNK))
            .collect();
        ids.resize(self.hyper.max_len, PAD);
        ids
    }

    fn embedding(&self, params: &CnnParams, id: usize) -> std::ops::Range<usize> {
        let _ = params;
        let d = self.hyper.embed_dim;
        id * d..(id + 1) * d
    }

    fn forward_with(&self, params: &CnnParams, ids: &[usize], mask: Option<Vec<f64>>) -> Trace {
        let d = self.hyper.embed_dim;
        let f = self.hyper.filters_per_width;
        let hidden_len = self.hyper.hidden();
        let mut argmax = Vec::with_capacity(hidden_len);
        let mut peak = Vec::with_capacity(hidden_len);
        for layer in &params.conv {
            let w = layer.width;
            let positions = ids.len() + 1 - w;
            for filter in 0..f {
                let kernel = &layer.weights[filter * w * d..(filter + 1) * w * d];
                let mut best = f64::NEG_INFINITY;
                let mut best_t = 0;
                for t in 0..positions {
                    let mut z = layer.bias[filter];
                    for k in 0..w {
                        let e = &params.embeddings[self.embedding(params, ids[t + k])];
                        z += dot(&kernel[k * d..(k + 1) * d], e);
                    }
                    if z > best {
                        best = z;
                        best_t = t;
                    }
                }
                argmax.push(best_t);
                peak.push(best);
            }
        }
        let mask = mask.unwrap_or_else(|| vec![1.0; hidden_len]);
        let hidden: Vec<f64> = peak
            .iter()
            .zip(&mask)
            .map(|(&z, &m)| z.max(0.0) * m)
            .collect();
        let mut logits = [params.fc_bias[0], params.fc_bias[1]];
        for (j, h) in hidden.iter().enumerate() {
            logits[0] += h * params.fc_weights[2 * j];
            logits[1] += h * params.fc_weights[2 * j + 1];
        }
        Trace {
            ids: ids.to_vec(),
            argmax,
            peak,
            mask,
            hidden,
            probs: softmax2(logits),
        }
    }

    fn logits_of(&self, params: &CnnParams, trace: &Trace) -> [f64; 2] {
        let mut logits = [params.fc_bias[0], params.fc_bias[1]];
        for (j, h) in trace.hidden.iter().enumerate() {
            logits[0] += h * params.fc_weights[2 * j];
            logits[1] += h * params.fc_weights[2 * j + 1];
        }
        logits
    }

    /// Adds `scale · ∂(−log p_class)/∂θ` for one traced example into `grads`.
    fn backward(&self, params: &CnnParams, trace: &Trace, class: usize, scale: f64, grads: &mut CnnParams) {
        let d = self.hyper.embed_dim;
        let f = self.hyper.filters_per_width;
        let mut dlogits = [trace.probs[0] * scale, trace.probs[1] * scale];
        dlogits[class] -= scale;
        grads.fc_bias[0] += dlogits[0];
        grads.fc_bias[1] += dlogits[1];

        for (j, &h) in trace.hidden.iter().enumerate() {
            grads.fc_weights[2 * j] += h * dlogits[0];
            grads.fc_weights[2 * j + 1] += h * dlogits[1];
            if trace.peak[j] <= 0.0 || trace.mask[j] == 0.0 {
                continue;
            }
            let dz = (params.fc_weights[2 * j] * dlogits[0]
                + params.fc_weights[2 * j + 1] * dlogits[1])
                * trace.mask[j];
            let (layer_idx, filter) = (j / f, j % f);
            let layer = &params.conv[layer_idx];
            let w = layer.width;
            let t = trace.argmax[j];
            grads.conv[layer_idx].bias[filter] += dz;
            let base = filter * w * d;
            for k in 0..w {
                let row = self.embedding(params, trace.ids[t + k]);
                let kernel = base + k * d..base + (k + 1) * d;
                let gk = &mut grads.conv[layer_idx].weights[kernel.clone()];
                for (g, e) in gk.iter_mut().zip(&params.embeddings[row.clone()]) {
                    *g += dz * e;
                }
                let ge = &mut grads.embeddings[row];
                for (g, wv) in ge.iter_mut().zip(&layer.weights[kernel]) {
                    *g += dz * wv;
                }
            }
        }
    }

    /// Class probabilities `[diagnostic, other]`. In training mode a fresh
    /// inverted-dropout mask is drawn from `rng`; otherwise `rng` is unused.
    pub fn forward<S: AsRef<str>>(&self, tokens: &[S], train_mode: bool, rng: &mut ChaCha8Rng) -> [f64; 2] {
        let ids = self.encode(tokens);
        let mask = train_mode.then(|| self.dropout_mask(rng));
        self.forward_with(&self.params, &ids, mask).probs
    }

    /// Max-pooled ReLU features for a token sequence (no dropout).
    pub fn pooled_features<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<f64> {
        self.forward_with(&self.params, &self.encode(tokens), None).hidden
    }

    fn dropout_mask(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let keep = self.hyper.dropout_keep;
        (0..self.hyper.hidden())
            .map(|_| {
                if keep >= 1.0 || rng.random::<f64>() < keep {
                    1.0 / keep
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Diagnostic only when its probability strictly exceeds the other
    /// class; an exact tie is `Other`.
    pub fn predict(&self, text: &str) -> DiagnosisPrediction {
        self.predict_tokens(&tokenize(text))
    }

    pub fn predict_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> DiagnosisPrediction {
        let probs = self
            .forward_with(&self.params, &self.encode(tokens), None)
            .probs;
        DiagnosisPrediction {
            label: if probs[CLASS_DIAGNOSTIC] > probs[CLASS_OTHER] {
                Diagnosis::Diagnostic
            } else {
                Diagnosis::Other
            },
            probability: probs[CLASS_DIAGNOSTIC],
        }
    }

    /// Mean cross-entropy over `batch` with dropout disabled.
    pub fn loss(&self, params: &CnnParams, batch: &[(Vec<usize>, usize)]) -> f64 {
        let total: f64 = batch
            .iter()
            .map(|(ids, class)| {
                let trace = self.forward_with(params, ids, None);
                -log_softmax2(self.logits_of(params, &trace), *class)
            })
            .sum();
        total / batch.len() as f64
    }

    /// Mean cross-entropy and its gradient with dropout disabled.
    pub fn loss_and_gradient(&self, params: &CnnParams, batch: &[(Vec<usize>, usize)]) -> (f64, CnnParams) {
        let mut grads = params.zeroed_like();
        let scale = 1.0 / batch.len() as f64;
        let mut total = 0.0;
        for (ids, class) in batch {
            let trace = self.forward_with(params, ids, None);
            total -= log_softmax2(self.logits_of(params, &trace), *class);
            self.backward(params, &trace, *class, scale, &mut grads);
        }
        (total * scale, grads)
    }

    /// Encodes labeled examples into `(ids, class)` pairs.
    pub fn encode_batch(&self, examples: &[LabeledExample]) -> Vec<(Vec<usize>, usize)> {
        examples
            .iter()
            .map(|e| (self.encode(&tokenize(&e.text)), class_of(e.label)))
            .collect()
    }

    fn accuracy(&self, batch: &[(Vec<usize>, usize)]) -> Option<f64> {
        if batch.is_empty() {
            return None;
        }
        let correct = batch
            .iter()
            .filter(|(ids, class)| {
                let p = self.forward_with(&self.params, ids, None).probs;
                let predicted = if p[CLASS_DIAGNOSTIC] > p[CLASS_OTHER] {
                    CLASS_DIAGNOSTIC
                } else {
                    CLASS_OTHER
                };
                predicted == *class
            })
            .count();
        Some(correct as f64 / batch.len() as f64)
    }

    pub fn to_model_file(&self) -> ModelFile {
        let h = &self.hyper;
        let mut m = ModelFile::new(MODEL_KIND);
        m.push_meta("embed_dim", h.embed_dim);
        let widths: Vec<String> = h.filter_widths.iter().map(|w| w.to_string()).collect();
        m.push_meta("filter_widths", widths.join(","));
        m.push_meta("filters_per_width", h.filters_per_width);
        m.push_meta("dropout_keep", h.dropout_keep);
        m.push_meta("batch_size", h.batch_size);
        m.push_meta("lr", h.lr);
        m.push_meta("epochs", h.epochs);
        m.push_meta("max_len", h.max_len);
        m.push_meta("eval_fraction", h.eval_fraction);
        m.push_meta("seed", h.seed);
        m.push_meta("optimizer", format!("adam({ADAM_BETA1},{ADAM_BETA2},{ADAM_EPS})"));
        m.vocab = self.vocab.clone();
        let (v, d, f) = (self.vocab.len(), h.embed_dim, h.filters_per_width);
        m.blocks.push(Block::new("embeddings", vec![v, d], self.params.embeddings.clone()));
        for layer in &self.params.conv {
            let w = layer.width;
            m.blocks.push(Block::new(&format!("conv{w}_weights"), vec![f, w, d], layer.weights.clone()));
            m.blocks.push(Block::new(&format!("conv{w}_bias"), vec![f], layer.bias.clone()));
        }
        m.blocks.push(Block::new("fc_weights", vec![h.hidden(), 2], self.params.fc_weights.clone()));
        m.blocks.push(Block::new("fc_bias", vec![2], self.params.fc_bias.clone()));
        m
    }

    pub fn from_model_file(m: &ModelFile) -> Result<Self> {
        if m.kind != MODEL_KIND {
            return Err(Error::ModelFormat(format!(
                "expected a {MODEL_KIND} model, found {:?}",
                m.kind
            )));
        }
        let filter_widths = m
            .meta("filter_widths")?
            .split(',')
            .map(|w| w.parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::ModelFormat(format!("filter_widths: {e}")))?;
        let hyper = CnnHyper {
            embed_dim: m.meta_parse("embed_dim")?,
            filter_widths,
            filters_per_width: m.meta_parse("filters_per_width")?,
            dropout_keep: m.meta_parse("dropout_keep")?,
            batch_size: m.meta_parse("batch_size")?,
            lr: m.meta_parse("lr")?,
            epochs: m.meta_parse("epochs")?,
            max_len: m.meta_parse("max_len")?,
            eval_fraction: m.meta_parse("eval_fraction")?,
            seed: m.meta_parse("seed")?,
        };
        if m.vocab.len() < 2 || m.vocab[PAD] != PAD_TOKEN || m.vocab[UNK] != UNK_TOKEN {
            return Err(Error::ModelFormat("vocabulary lacks reserved tokens".into()));
        }
        let (v, d, f) = (m.vocab.len(), hyper.embed_dim, hyper.filters_per_width);
        let conv = hyper
            .filter_widths
            .iter()
            .map(|&w| {
                Ok(ConvLayer {
                    width: w,
                    weights: m.block_data(&format!("conv{w}_weights"), &[f, w, d])?,
                    bias: m.block_data(&format!("conv{w}_bias"), &[f])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let params = CnnParams {
            embeddings: m.block_data("embeddings", &[v, d])?,
            conv,
            fc_weights: m.block_data("fc_weights", &[hyper.hidden(), 2])?,
            fc_bias: m.block_data("fc_bias", &[2])?,
        };
        CnnModel::from_parts(m.vocab[2..].to_vec(), params, hyper)
            .map_err(|e| Error::ModelFormat(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_model_file().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_model_file(&ModelFile::load(path)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochReport {
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
    pub eval_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnnReport {
    pub train_examples: usize,
    pub eval_examples: usize,
    /// Training loss of every minibatch, in order.
    pub batch_losses: Vec<f64>,
    pub epochs: Vec<EpochReport>,
}

struct Adam {
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    step: i32,
}

impl Adam {
    fn new(params: &CnnParams) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Adam {
            m: zeros.clone(),
            v: zeros,
            step: 0,
        }
    }

    fn update(&mut self, params: &mut CnnParams, grads: &CnnParams, lr: f64) {
        self.step += 1;
        let lr_t = lr * (1.0 - ADAM_BETA2.powi(self.step)).sqrt() / (1.0 - ADAM_BETA1.powi(self.step));
        for (((p, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grads.tensors())
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for i in 0..p.len() {
                m[i] = ADAM_BETA1 * m[i] + (1.0 - ADAM_BETA1) * g[i];
                v[i] = ADAM_BETA2 * v[i] + (1.0 - ADAM_BETA2) * g[i] * g[i];
                p[i] -= lr_t * m[i] / (v[i].sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Seeded train/eval split: shuffled indices, the first `eval_fraction` of
/// them held out.
fn split_indices(n: usize, eval_fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let n_eval = ((n as f64 * eval_fraction).round() as usize).min(n.saturating_sub(1));
    let eval = idx[..n_eval].to_vec();
    let train = idx[n_eval..].to_vec();
    (train, eval)
}

pub fn train_cnn(examples: &[LabeledExample], hyper: &CnnHyper) -> Result<(CnnModel, CnnReport)> {
    hyper.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let has = |l: Label| examples.iter().any(|e| e.label == l);
    if !has(Label::Relevant) || !has(Label::Unrelated) {
        return Err(Error::SingleClass);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let (train_idx, eval_idx) = split_indices(examples.len(), hyper.eval_fraction, &mut rng);
    let train_tokens: Vec<Vec<String>> = train_idx.iter().map(|&i| tokenize(&examples[i].text)).collect();

    let words: BTreeSet<&str> = train_tokens.iter().flatten().map(String::as_str).collect();
    let words: Vec<String> = words.into_iter().map(str::to_string).collect();
    let mut hyper = hyper.clone();
    if hyper.max_len == 0 {
        hyper.max_len = train_tokens
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .max(hyper.max_width());
    }
    let params = CnnParams::init(words.len() + 2, &hyper, &mut rng);
    let mut model = CnnModel::from_parts(words, params, hyper.clone())?;

    let train: Vec<(Vec<usize>, usize)> = train_idx
        .iter()
        .zip(&train_tokens)
        .map(|(&i, toks)| (model.encode(toks), class_of(examples[i].label)))
        .collect();
    let eval: Vec<(Vec<usize>, usize)> = eval_idx
        .iter()
        .map(|&i| (model.encode(&tokenize(&examples[i].text)), class_of(examples[i].label)))
        .collect();

    let mut adam = Adam::new(&model.params);
    let mut report = CnnReport {
        train_examples: train.len(),
        eval_examples: eval.len(),
        batch_losses: Vec::new(),
        epochs: Vec::new(),
    };
    let mut order: Vec<usize> = (0..train.len()).collect();
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(hyper.batch_size) {
            let mut grads = model.params.zeroed_like();
            let scale = 1.0 / chunk.len() as f64;
            let mut batch_loss = 0.0;
            for &i in chunk {
                let (ids, class) = &train[i];
                let mask = model.dropout_mask(&mut rng);
                let trace = model.forward_with(&model.params, ids, Some(mask));
                batch_loss -= log_softmax2(model.logits_of(&model.params, &trace), *class);
                model.backward(&model.params, &trace, *class, scale, &mut grads);
            }
            batch_loss *= scale;
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            report.batch_losses.push(batch_loss);
            epoch_loss += batch_loss * chunk.len() as f64;
            adam.update(&mut model.params, &grads, hyper.lr);
        }
        if !model.params.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        let epoch_report = EpochReport {
            epoch: epoch + 1,
            mean_loss: epoch_loss / train.len() as f64,
            train_accuracy: model.accuracy(&train).unwrap_or(0.0),
            eval_accuracy: model.accuracy(&eval),
        };
        log::info!(
            "epoch {}: loss {:.5} train acc {:.4} eval acc {:?}",
            epoch_report.epoch,
            epoch_report.mean_loss,
            epoch_report.train_accuracy,
            epoch_report.eval_accuracy
        );
        report.epochs.push(epoch_report);
    }
    Ok((model, report))
}

/// Outcome of a finite-difference gradient comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheck {
    pub max_relative_error: f64,
    pub checked: usize,
}

/// Denominator floor for the relative error, so parameters whose true
/// gradient is (near) zero are judged on absolute error instead.
pub const GRAD_CHECK_FLOOR: f64 = 1e-6;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRAD_CHECK_FLOOR)
}

/// Compares backpropagated gradients with central finite differences on at
/// least `samples` parameters, drawn evenly across tensors. Embedding rows
/// are sampled only for tokens that occur in `batch`.
pub fn grad_check(model: &CnnModel, batch: &[LabeledExample], epsilon: f64, samples: usize, seed: u64) -> GradCheck {
    grad_check_with(model, batch, epsilon, samples, seed, |m, p, b| m.loss_and_gradient(p, b).1)
}

/// As [`grad_check`], with the analytic gradient supplied by the caller.
pub fn grad_check_with<F>(
    model: &CnnModel,
    batch: &[LabeledExample],
    epsilon: f64,
    samples: usize,
    seed: u64,
    analytic: F,
) -> GradCheck
where
    F: Fn(&CnnModel, &CnnParams, &[(Vec<usize>, usize)]) -> CnnParams,
{
    assert!(epsilon > 0.0, "epsilon must be positive");
    let encoded = model.encode_batch(batch);
    let grads = analytic(model, &model.params, &encoded);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let d = model.hyper.embed_dim;
    let rows: BTreeSet<usize> = encoded.iter().flat_map(|(ids, _)| ids.iter().copied()).collect();
    let pools: Vec<Vec<usize>> = model
        .params
        .tensors()
        .iter()
        .enumerate()
        .map(|(t, tensor)| {
            if t == 0 {
                rows.iter().flat_map(|&r| r * d..(r + 1) * d).collect()
            } else {
                (0..tensor.len()).collect()
            }
        })
        .collect();
    // round-robin quota so small tensors are exhausted and the rest refill
    let mut quota = vec![0usize; pools.len()];
    let capacity: usize = pools.iter().map(Vec::len).sum();
    let mut remaining = samples.max(1).min(capacity);
    while remaining > 0 {
        for (q, pool) in quota.iter_mut().zip(&pools) {
            if remaining > 0 && *q < pool.len() {
                *q += 1;
                remaining -= 1;
            }
        }
    }
    let candidates: Vec<(usize, Vec<usize>)> = pools
        .into_iter()
        .zip(quota)
        .enumerate()
        .map(|(t, (pool, q))| {
            let picked = rand::seq::index::sample(&mut rng, pool.len(), q)
                .into_iter()
                .map(|j| pool[j])
                .collect();
            (t, picked)
        })
        .collect();

    let mut params = model.params.clone();
    let mut max_err: f64 = 0.0;
    let mut checked = 0;
    for (t, indices) in candidates {
        for i in indices {
            let original = params.tensors()[t][i];
            params.tensors_mut()[t][i] = original + epsilon;
            let plus = model.loss(&params, &encoded);
            params.tensors_mut()[t][i] = original - epsilon;
            let minus = model.loss(&params, &encoded);
            params.tensors_mut()[t][i] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            max_err = max_err.max(relative_error(grads.tensors()[t][i], numeric));
            checked += 1;
        }
    }
    GradCheck {
        max_relative_error: max_err,
        checked,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_hyper() -> CnnHyper {
        CnnHyper {
            embed_dim: 2,
            filter_widths: vec![2],
            filters_per_width: 1,
            dropout_keep: 1.0,
            batch_size: 2,
            lr: 0.01,
            epochs: 1,
            max_len: 3,
            eval_fraction: 0.0,
            seed: 1,
        }
    }

    /// Vocabulary {<pad>, <unk>, a}: V = 3.
    fn tiny_model() -> CnnModel {
        let hyper = tiny_hyper();
        let params = CnnParams {
            embeddings: vec![0.0, 0.0, 0.5, -0.5, 1.0, 2.0],
            conv: vec![ConvLayer {
                width: 2,
                weights: vec![1.0, 0.5, -1.0, 2.0],
                bias: vec![0.1],
            }],
            fc_weights: vec![1.5, -0.5],
            fc_bias: vec![0.2, 0.0],
        };
        CnnModel::from_parts(vec!["a".into()], params, hyper).unwrap()
    }

    #[test]
    fn tiny_forward_matches_hand_arithmetic() {
        let m = tiny_model();
        // "a zzz" → ids [2, 1, 0]
        assert_eq!(m.encode(&["a", "zzz"]), [2, 1, 0]);
        // window 0: E[2]=(1,2), E[1]=(0.5,-0.5)
        //   0.1 + (1·1 + 0.5·2) + (−1·0.5 + 2·−0.5) = 0.1 + 2 − 1.5 = 0.6
        // window 1: E[1]=(0.5,−0.5), E[0]=(0,0)
        //   0.1 + (0.5 − 0.25) + 0 = 0.35
        // pooled relu(0.6) = 0.6
        // logits: 0.2 + 0.6·1.5 = 1.1 ; 0 + 0.6·(−0.5) = −0.3
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = m.forward(&["a", "zzz"], false, &mut rng);
        let e = (1.1f64 - (-0.3)).exp();
        let expected = e / (1.0 + e);
        assert!((p[0] - expected).abs() < 1e-15, "{p:?} vs {expected}");
        assert!((m.pooled_features(&["a", "zzz"])[0] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn zero_parameters_give_even_odds() {
        let hyper = tiny_hyper();
        let m = CnnModel::from_parts(vec!["a".into()], CnnParams::zeros(3, &hyper), hyper).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(m.forward(&["a", "b", "c", "d"], false, &mut rng), [0.5, 0.5]);
        assert_eq!(m.forward::<&str>(&[], true, &mut rng), [0.5, 0.5]);
        let pred = m.predict("a");
        assert_eq!(pred.label, Diagnosis::Other);
        assert_eq!(pred.probability, 0.5);
    }

    #[test]
    fn zero_parameter_gradients_agree() {
        let hyper = tiny_hyper();
        let m = CnnModel::from_parts(vec!["a".into()], CnnParams::zeros(3, &hyper), hyper).unwrap();
        let batch = [
            LabeledExample::new("a a", Label::Relevant),
            LabeledExample::new("b", Label::Unrelated),
        ];
        let check = grad_check(&m, &batch, 1e-5, 20, 0);
        assert!(check.max_relative_error <= 1e-6, "{check:?}");
    }

    #[test]
    fn tiny_gradients_match_finite_differences() {
        let m = tiny_model();
        let batch = [
            LabeledExample::new("a zzz", Label::Relevant),
            LabeledExample::new("zzz a a", Label::Unrelated),
        ];
        let check = grad_check(&m, &batch, 1e-6, 100, 4);
        assert!(check.max_relative_error < 1e-6, "{check:?}");
    }

    #[test]
    fn truncates_at_tail() {
        let m = tiny_model();
        assert_eq!(m.encode(&["a", "a", "a", "zzz", "a"]), [2, 2, 2]);
        assert_eq!(m.encode::<&str>(&[]), [PAD, PAD, PAD]);
    }

    #[test]
    fn rejects_bad_shapes() {
        let hyper = tiny_hyper();
        assert!(CnnModel::from_parts(vec![], CnnParams::zeros(3, &hyper), hyper.clone()).is_err());
        let short = CnnHyper {
            max_len: 1,
            ..hyper.clone()
        };
        assert!(CnnModel::from_parts(vec!["a".into()], CnnParams::zeros(3, &short), short).is_err());
    }

    #[test]
    fn single_class_rejected() {
        let ex = vec![LabeledExample::new("x y z", Label::Relevant); 4];
        assert!(matches!(train_cnn(&ex, &CnnHyper::default()), Err(Error::SingleClass)));
    }

    #[test]
    fn model_file_round_trip() {
        let m = tiny_model();
        let back = CnnModel::from_model_file(&ModelFile::parse(&m.to_model_file().render()).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
