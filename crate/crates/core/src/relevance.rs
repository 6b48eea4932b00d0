//! Stage-one relevance sifter: tf-idf features and an L2-regularized binary
//! logistic regression trained by full-batch gradient descent.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;
use crate::error::{Error, Result};
use crate::modelfile::{Block, ModelFile};

pub const MODEL_KIND: &str = "logistic";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Relevant,
    Unrelated,
}

impl Label {
    pub fn target(self) -> f64 {
        match self {
            Label::Relevant => 1.0,
            Label::Unrelated => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledExample {
    pub text: String,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(text: impl Into<String>, label: Label) -> Self {
        LabeledExample {
            text: text.into(),
            label,
        }
    }
}

impl FromStr for Label {
    type Err = String;

    /// Accepts `relevant`/`unrelated`, the stage-two names
    /// `diagnostic`/`other`, and `1`/`0`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "relevant" | "diagnostic" | "1" => Ok(Label::Relevant),
            "unrelated" | "other" | "0" => Ok(Label::Unrelated),
            other => Err(format!("unknown label {other:?}")),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Relevant => "relevant",
            Label::Unrelated => "unrelated",
        })
    }
}

#[derive(Serialize, Deserialize)]
struct LabeledRecord {
    text: String,
    label: String,
}

/// Reads `{"text": ..., "label": ...}` lines; blank lines are skipped.
pub fn read_labeled<R: BufRead>(reader: R) -> Result<Vec<LabeledExample>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |reason: String| Error::MalformedRecord { line: i + 1, reason };
        let rec: LabeledRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if rec.text.is_empty() {
            return Err(malformed("text is empty".into()));
        }
        let label = rec.label.parse().map_err(malformed)?;
        out.push(LabeledExample::new(rec.text, label));
    }
    Ok(out)
}

pub fn write_labeled<W: Write>(mut writer: W, examples: &[LabeledExample]) -> Result<()> {
    for e in examples {
        let rec = LabeledRecord {
            text: e.text.clone(),
            label: e.label.to_string(),
        };
        let line = serde_json::to_string(&rec).expect("plain strings serialize");
        writeln!(writer, "{line}")?;
    }
    Ok(())
}

/// `related:unrelated` proportion of the training corpus, e.g. `1:10`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub related: u32,
    pub unrelated: u32,
}

impl FromStr for Ratio {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("ratio {s:?} must look like 1:10"))?;
        let parse = |x: &str| {
            x.trim()
                .parse::<u32>()
                .ok()
                .filter(|&v| v > 0)
                .ok_or_else(|| format!("ratio {s:?} needs positive integers"))
        };
        Ok(Ratio {
            related: parse(a)?,
            unrelated: parse(b)?,
        })
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.related, self.unrelated)
    }
}

/// Sparse vector as `(index, value)` pairs in ascending index order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec(pub Vec<(usize, f64)>);

impl SparseVec {
    pub fn dot(&self, dense: &[f64]) -> f64 {
        self.0.iter().map(|&(i, v)| v * dense[i]).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfVectorizer {
    terms: Vec<String>,
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    doc_count: usize,
}

impl TfIdfVectorizer {
    fn from_parts(terms: Vec<String>, idf: Vec<f64>, doc_count: usize) -> Self {
        let index = terms
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        TfIdfVectorizer {
            terms,
            index,
            idf,
            doc_count,
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index_of(&self, term: &str) -> Option<usize> {
        self.index.get(term).copied()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn idf(&self) -> &[f64] {
        &self.idf
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    /// Raw counts times idf, L2-normalized. Out-of-vocabulary tokens are
    /// dropped.
    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> SparseVec {
        let mut counts: HashMap<usize, u32> = HashMap::new();
        for t in doc {
            if let Some(i) = self.index_of(t.as_ref()) {
                *counts.entry(i).or_default() += 1;
            }
        }
        let mut entries: Vec<(usize, f64)> = counts
            .into_iter()
            .map(|(i, c)| (i, c as f64 * self.idf[i]))
            .collect();
        entries.sort_unstable_by_key(|&(i, _)| i);
        let norm = entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, v) in &mut entries {
                *v /= norm;
            }
        }
        SparseVec(entries)
    }
}

/// Builds the vocabulary (sorted, dense indices) and smoothed idf
/// `ln((1 + N) / (1 + df)) + 1`, with document frequency counted by presence.
pub fn fit_vectorizer<S: AsRef<str>>(docs: &[Vec<S>]) -> Result<TfIdfVectorizer> {
    if docs.iter().all(|d| d.is_empty()) {
        return Err(Error::EmptyCorpus);
    }
    let mut df: HashMap<&str, usize> = HashMap::new();
    for doc in docs {
        let unique: BTreeSet<&str> = doc.iter().map(|t| t.as_ref()).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let mut terms: Vec<String> = df.keys().map(|t| t.to_string()).collect();
    terms.sort_unstable();
    let n = docs.len() as f64;
    let idf = terms
        .iter()
        .map(|t| ((1.0 + n) / (1.0 + df[t.as_str()] as f64)).ln() + 1.0)
        .collect();
    Ok(TfIdfVectorizer::from_parts(terms, idf, docs.len()))
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean cross-entropy plus `(λ/2)·‖w‖²` over a fixed design matrix. The bias
/// is not regularized.
#[derive(Debug, Clone)]
pub struct LogisticObjective {
    pub features: Vec<SparseVec>,
    pub targets: Vec<f64>,
    pub l2_lambda: f64,
    pub dim: usize,
}

impl LogisticObjective {
    pub fn loss(&self, weights: &[f64], bias: f64) -> f64 {
        let n = self.features.len() as f64;
        let data: f64 = self
            .features
            .iter()
            .zip(&self.targets)
            .map(|(x, &y)| {
                let z = x.dot(weights) + bias;
                softplus(z) - y * z
            })
            .sum();
        data / n + 0.5 * self.l2_lambda * weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Loss with its gradient in the weights and in the bias.
    pub fn loss_and_gradient(&self, weights: &[f64], bias: f64) -> (f64, Vec<f64>, f64) {
        let n = self.features.len() as f64;
        let mut grad: Vec<f64> = weights.iter().map(|w| self.l2_lambda * w).collect();
        let mut grad_bias = 0.0;
        let mut data_loss = 0.0;
        for (x, &y) in self.features.iter().zip(&self.targets) {
            let z = x.dot(weights) + bias;
            data_loss += softplus(z) - y * z;
            let r = (sigmoid(z) - y) / n;
            for &(i, v) in &x.0 {
                grad[i] += r * v;
            }
            grad_bias += r;
        }
        let loss =
            data_loss / n + 0.5 * self.l2_lambda * weights.iter().map(|w| w * w).sum::<f64>();
        (loss, grad, grad_bias)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticHyper {
    pub lr: f64,
    pub epochs: usize,
    pub l2_lambda: f64,
    /// Stop once the loss changes by less than this between epochs.
    pub tolerance: f64,
    /// Subsample the over-represented class to this `related:unrelated`
    /// proportion before fitting; `None` keeps every example.
    pub alpha: Option<Ratio>,
    pub seed: u64,
}

impl Default for LogisticHyper {
    fn default() -> Self {
        LogisticHyper {
            lr: 0.1,
            epochs: 500,
            l2_lambda: 1e-3,
            tolerance: 1e-9,
            alpha: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticReport {
    /// Loss before each update, one per epoch run.
    pub losses: Vec<f64>,
    pub train_examples: usize,
    pub train_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevancePrediction {
    pub label: Label,
    /// Probability of [`Label::Relevant`].
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfLogisticModel {
    pub vectorizer: TfIdfVectorizer,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub hyper: LogisticHyper,
}

/// Keeps examples so that `related:unrelated` matches `ratio` as closely as
/// integer counts allow, dropping from whichever class is in excess. Order of
/// the survivors is preserved.
pub fn subsample_to_ratio(
    examples: &[LabeledExample],
    ratio: Ratio,
    rng: &mut ChaCha8Rng,
) -> Vec<LabeledExample> {
    let related: Vec<usize> = (0..examples.len())
        .filter(|&i| examples[i].label == Label::Relevant)
        .collect();
    let unrelated: Vec<usize> = (0..examples.len())
        .filter(|&i| examples[i].label == Label::Unrelated)
        .collect();
    let (nr, nu) = (related.len() as u64, unrelated.len() as u64);
    let (a, b) = (ratio.related as u64, ratio.unrelated as u64);

    let (keep_r, keep_u) = if nu * a > nr * b {
        (nr, (nr * b / a).max(1))
    } else {
        ((nu * a / b).max(1), nu)
    };
    let mut pick = |pool: &[usize], k: u64| -> Vec<usize> {
        if k as usize >= pool.len() {
            return pool.to_vec();
        }
        rand::seq::index::sample(rng, pool.len(), k as usize)
            .into_iter()
            .map(|j| pool[j])
            .collect()
    };
    let mut kept = pick(&related, keep_r);
    kept.extend(pick(&unrelated, keep_u));
    kept.sort_unstable();
    kept.into_iter().map(|i| examples[i].clone()).collect()
}

fn check_both_classes<'a>(labels: impl IntoIterator<Item = &'a Label>) -> Result<()> {
    let (mut pos, mut neg) = (false, false);
    for l in labels {
        match l {
            Label::Relevant => pos = true,
            Label::Unrelated => neg = true,
        }
    }
    if pos && neg {
        Ok(())
    } else {
        Err(Error::SingleClass)
    }
}

pub fn train_logistic(
    examples: &[LabeledExample],
    hyper: &LogisticHyper,
) -> Result<(TfIdfLogisticModel, LogisticReport)> {
    if examples.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    check_both_classes(examples.iter().map(|e| &e.label))?;
    if !(hyper.lr > 0.0 && hyper.lr.is_finite()) || hyper.l2_lambda < 0.0 {
        return Err(Error::InvalidHyper(format!(
            "lr {} / l2_lambda {}",
            hyper.lr, hyper.l2_lambda
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let train: Vec<LabeledExample> = match hyper.alpha {
        Some(ratio) => subsample_to_ratio(examples, ratio, &mut rng),
        None => examples.to_vec(),
    };

    let docs: Vec<Vec<String>> = train.iter().map(|e| tokenize(&e.text)).collect();
    let vectorizer = fit_vectorizer(&docs)?;
    let objective = LogisticObjective {
        features: docs.iter().map(|d| vectorizer.transform(d)).collect(),
        targets: train.iter().map(|e| e.label.target()).collect(),
        l2_lambda: hyper.l2_lambda,
        dim: vectorizer.len(),
    };

    let mut weights = vec![0.0; vectorizer.len()];
    let mut bias = 0.0;
    let mut losses = Vec::new();
    for epoch in 0..hyper.epochs {
        let (loss, grad, grad_bias) = objective.loss_and_gradient(&weights, bias);
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss { epoch });
        }
        let converged = losses
            .last()
            .is_some_and(|&prev: &f64| (prev - loss).abs() < hyper.tolerance);
        losses.push(loss);
        if converged {
            break;
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= hyper.lr * g;
        }
        bias -= hyper.lr * grad_bias;
    }
    if !bias.is_finite() || weights.iter().any(|w| !w.is_finite()) {
        return Err(Error::NonFiniteLoss {
            epoch: losses.len(),
        });
    }

    let model = TfIdfLogisticModel {
        vectorizer,
        weights,
        bias,
        hyper: hyper.clone(),
    };
    let correct = objective
        .features
        .iter()
        .zip(&train)
        .filter(|(x, e)| model.classify(model.probability_of(x)) == e.label)
        .count();
    let report = LogisticReport {
        losses,
        train_examples: train.len(),
        train_accuracy: correct as f64 / train.len() as f64,
    };
    Ok((model, report))
}

impl TfIdfLogisticModel {
    /// An untrained model with all-zero parameters over `vectorizer`.
    pub fn zeroed(vectorizer: TfIdfVectorizer, hyper: LogisticHyper) -> Self {
        TfIdfLogisticModel {
            weights: vec![0.0; vectorizer.len()],
            vectorizer,
            bias: 0.0,
            hyper,
        }
    }

    fn probability_of(&self, x: &SparseVec) -> f64 {
        sigmoid(x.dot(&self.weights) + self.bias)
    }

    fn classify(&self, p: f64) -> Label {
        if p >= 0.5 {
            Label::Relevant
        } else {
            Label::Unrelated
        }
    }

    pub fn predict_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> RelevancePrediction {
        let p = self.probability_of(&self.vectorizer.transform(tokens));
        RelevancePrediction {
            label: self.classify(p),
            probability: p,
        }
    }

    /// Relevant iff the probability is at least one half.
    pub fn predict(&self, text: &str) -> RelevancePrediction {
        self.predict_tokens(&tokenize(text))
    }

    pub fn to_model_file(&self) -> ModelFile {
        let mut m = ModelFile::new(MODEL_KIND);
        let h = &self.hyper;
        m.push_meta("lr", h.lr);
        m.push_meta("epochs", h.epochs);
        m.push_meta("l2_lambda", h.l2_lambda);
        m.push_meta("tolerance", h.tolerance);
        m.push_meta(
            "alpha",
            h.alpha.map_or_else(|| "none".to_string(), |r| r.to_string()),
        );
        m.push_meta("seed", h.seed);
        m.push_meta("doc_count", self.vectorizer.doc_count);
        m.push_meta("tf", "raw-count");
        m.push_meta("idf", "ln((1+N)/(1+df))+1");
        m.push_meta("norm", "l2");
        m.push_meta("optimizer", "full-batch-gradient-descent");
        m.vocab = self.vectorizer.terms.clone();
        let v = self.vectorizer.len();
        m.blocks.push(Block::new("idf", vec![v], self.vectorizer.idf.clone()));
        m.blocks.push(Block::new("weights", vec![v], self.weights.clone()));
        m.blocks.push(Block::new("bias", vec![1], vec![self.bias]));
        m
    }

    pub fn from_model_file(m: &ModelFile) -> Result<Self> {
        if m.kind != MODEL_KIND {
            return Err(Error::ModelFormat(format!(
                "expected a {MODEL_KIND} model, found {:?}",
                m.kind
            )));
        }
        let alpha = match m.meta("alpha")? {
            "none" => None,
            s => Some(s.parse().map_err(Error::ModelFormat)?),
        };
        let hyper = LogisticHyper {
            lr: m.meta_parse("lr")?,
            epochs: m.meta_parse("epochs")?,
            l2_lambda: m.meta_parse("l2_lambda")?,
            tolerance: m.meta_parse("tolerance")?,
            alpha,
            seed: m.meta_parse("seed")?,
        };
        let v = m.vocab.len();
        let vectorizer = TfIdfVectorizer::from_parts(
            m.vocab.clone(),
            m.block_data("idf", &[v])?,
            m.meta_parse("doc_count")?,
        );
        Ok(TfIdfLogisticModel {
            vectorizer,
            weights: m.block_data("weights", &[v])?,
            bias: m.block_data("bias", &[1])?[0],
            hyper,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.to_model_file().save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_model_file(&ModelFile::load(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter()
            .map(|d| d.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    #[test]
    fn idf_presence_counts() {
        let v = fit_vectorizer(&docs(&[&["cancer", "cancer"], &["survivor"]])).unwrap();
        let expected = (3.0f64 / 2.0).ln() + 1.0;
        assert_eq!(v.idf()[v.index_of("cancer").unwrap()], expected);
        assert_eq!(v.idf()[v.index_of("survivor").unwrap()], expected);
        assert_eq!(v.doc_count(), 2);
    }

    #[test]
    fn single_doc_idf_is_one() {
        let v = fit_vectorizer(&docs(&[&["a", "b", "a"]])).unwrap();
        assert!(v.idf().iter().all(|&x| x == 1.0));
    }

    #[test]
    fn empty_corpus() {
        assert!(matches!(
            fit_vectorizer::<String>(&[]),
            Err(Error::EmptyCorpus)
        ));
        assert!(matches!(
            fit_vectorizer::<String>(&[vec![]]),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn transform_cases() {
        let v = fit_vectorizer(&docs(&[&["cancer", "cancer"], &["survivor"]])).unwrap();
        assert!(v.transform(&["unknown"]).is_zero());
        let x = v.transform(&["cancer"]);
        assert_eq!(x.0, vec![(v.index_of("cancer").unwrap(), 1.0)]);
        let once = v.transform(&["cancer", "survivor", "survivor"]);
        let twice = v.transform(&["cancer", "cancer", "survivor", "survivor", "survivor", "survivor"]);
        for (a, b) in once.0.iter().zip(&twice.0) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-15);
        }
        assert!((once.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_model_predicts_half() {
        let v = fit_vectorizer(&docs(&[&["a"], &["b"]])).unwrap();
        let m = TfIdfLogisticModel::zeroed(v, LogisticHyper::default());
        let p = m.predict("a b");
        assert_eq!(p.probability, 0.5);
        assert_eq!(p.label, Label::Relevant);
    }

    #[test]
    fn oov_text_gives_sigmoid_bias() {
        let v = fit_vectorizer(&docs(&[&["a"], &["b"]])).unwrap();
        let mut m = TfIdfLogisticModel::zeroed(v, LogisticHyper::default());
        m.bias = -0.7;
        m.weights = vec![3.0, -2.0];
        assert_eq!(m.predict("zzz yyy").probability, sigmoid(-0.7));
    }

    #[test]
    fn ratio_parsing() {
        assert_eq!(
            "1:10".parse::<Ratio>().unwrap(),
            Ratio {
                related: 1,
                unrelated: 10
            }
        );
        assert!("1/10".parse::<Ratio>().is_err());
        assert!("0:3".parse::<Ratio>().is_err());
        assert_eq!("1:10".parse::<Ratio>().unwrap().to_string(), "1:10");
    }

    fn labeled(n_pos: usize, n_neg: usize) -> Vec<LabeledExample> {
        let mut out = Vec::new();
        for i in 0..n_pos {
            out.push(LabeledExample::new(format!("diagnosed today w{i}"), Label::Relevant));
        }
        for i in 0..n_neg {
            out.push(LabeledExample::new(format!("fundraiser walk w{i}"), Label::Unrelated));
        }
        out
    }

    #[test]
    fn subsampling_hits_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ratio = Ratio {
            related: 1,
            unrelated: 10,
        };
        let kept = subsample_to_ratio(&labeled(20, 500), ratio, &mut rng);
        let pos = kept.iter().filter(|e| e.label == Label::Relevant).count();
        assert_eq!((pos, kept.len() - pos), (20, 200));
        let kept = subsample_to_ratio(&labeled(50, 100), ratio, &mut rng);
        let pos = kept.iter().filter(|e| e.label == Label::Relevant).count();
        assert_eq!((pos, kept.len() - pos), (10, 100));
    }

    #[test]
    fn single_class_rejected() {
        assert!(matches!(
            train_logistic(&labeled(5, 0), &LogisticHyper::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn divergent_lr_reports_non_finite() {
        let hyper = LogisticHyper {
            lr: 1e308,
            epochs: 50,
            ..LogisticHyper::default()
        };
        assert!(matches!(
            train_logistic(&labeled(5, 5), &hyper),
            Err(Error::NonFiniteLoss { .. })
        ));
    }

    #[test]
    fn heavy_regularization_shrinks_to_base_rate() {
        let hyper = LogisticHyper {
            l2_lambda: 1e6,
            lr: 1e-7,
            epochs: 2000,
            ..LogisticHyper::default()
        };
        let (m, _) = train_logistic(&labeled(10, 30), &hyper).unwrap();
        assert!(m.weights.iter().all(|w| w.abs() < 1e-6));
    }

    #[test]
    fn model_file_round_trip() {
        let hyper = LogisticHyper {
            alpha: Some("1:2".parse().unwrap()),
            seed: 9,
            ..LogisticHyper::default()
        };
        let (m, _) = train_logistic(&labeled(10, 30), &hyper).unwrap();
        let back = TfIdfLogisticModel::from_model_file(
            &ModelFile::parse(&m.to_model_file().render()).unwrap(),
        )
        .unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn labeled_lines_round_trip() {
        let ex = vec![
            LabeledExample::new("i was diagnosed", Label::Relevant),
            LabeledExample::new("pizza \"night\"", Label::Unrelated),
        ];
        let mut buf = Vec::new();
        write_labeled(&mut buf, &ex).unwrap();
        assert_eq!(read_labeled(buf.as_slice()).unwrap(), ex);
        let aliases = "{\"text\":\"a\",\"label\":\"diagnostic\"}\n\n{\"text\":\"b\",\"label\":\"0\"}\n";
        let got = read_labeled(aliases.as_bytes()).unwrap();
        assert_eq!(got[0].label, Label::Relevant);
        assert_eq!(got[1].label, Label::Unrelated);
        assert!(matches!(
            read_labeled("{\"text\":\"a\",\"label\":\"maybe\"}".as_bytes()),
            Err(Error::MalformedRecord { line: 1, .. })
        ));
    }
}
