//! Fear classification: labeled sentences, seeded splits and class
//! balancing, mean-embedding features, and L1/L2-regularized logistic
//! regression trained by full-batch gradient descent.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{clean_text, StopwordSet, Story};
use crate::embed::EmbeddingTable;
use crate::error::{Error, Result};
use crate::metrics::{evaluate_scores, roc_auc, EvalReport};

pub const LAMBDA_GRID: [f64; 5] = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledSentence {
    pub text: String,
    pub label: bool,
    pub source: String,
}

/// Which emotion names count as fear, globally and per source dataset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAliases {
    pub default: HashSet<String>,
    pub per_source: HashMap<String, HashSet<String>>,
}

impl Default for LabelAliases {
    fn default() -> Self {
        LabelAliases {
            default: ["fear".to_string()].into_iter().collect(),
            per_source: HashMap::new(),
        }
    }
}

impl LabelAliases {
    pub fn is_fear(&self, source: &str, label: &str) -> bool {
        let label = label.trim().to_lowercase();
        match label.as_str() {
            "1" => return true,
            "0" => return false,
            _ => {}
        }
        self.per_source
            .get(source)
            .unwrap_or(&self.default)
            .contains(&label)
    }
}

pub fn load_labeled(path: impl AsRef<Path>, aliases: &LabelAliases) -> Result<Vec<LabeledSentence>> {
    let path = path.as_ref();
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Error::io(path, e))?;
    parse_labeled(text.as_bytes(), aliases, &path.display().to_string())
}

/// Reads a `text,label,source` CSV (columns located by header name).
/// Rows with empty text are dropped.
pub fn parse_labeled<R: Read>(reader: R, aliases: &LabelAliases, source_name: &str) -> Result<Vec<LabeledSentence>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::format(source_name, 1, format!("missing column `{name}`")))
    };
    let (ti, li, si) = (column("text")?, column("label")?, column("source")?);
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| {
            rec.get(k)
                .ok_or_else(|| Error::format(source_name, i + 2, "row is missing fields"))
        };
        let text = field(ti)?.trim();
        if text.is_empty() {
            continue;
        }
        let source = field(si)?.trim().to_string();
        out.push(LabeledSentence {
            text: text.to_string(),
            label: aliases.is_fear(&source, field(li)?),
            source,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<LabeledSentence>,
    pub validation: Vec<LabeledSentence>,
    pub test: Vec<LabeledSentence>,
    pub seed: u64,
}

/// Relative weights of the train / validation / test parts (75:10:10).
pub const SPLIT_WEIGHTS: [f64; 3] = [0.75, 0.10, 0.10];

/// Probability of each part once the weights are normalized to sum to one.
pub fn split_probabilities() -> [f64; 3] {
    let total: f64 = SPLIT_WEIGHTS.iter().sum();
    SPLIT_WEIGHTS.map(|w| w / total)
}

/// Assigns every item independently at random to train, validation or test.
pub fn split_dataset(data: &[LabeledSentence], seed: u64) -> Result<DatasetSplit> {
    if data.is_empty() {
        return Err(Error::invalid("cannot split an empty dataset"));
    }
    let [p_train, p_val, _] = split_probabilities();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = DatasetSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
        seed,
    };
    for item in data {
        let u: f64 = rng.gen();
        let part = if u < p_train {
            &mut split.train
        } else if u < p_train + p_val {
            &mut split.validation
        } else {
            &mut split.test
        };
        part.push(item.clone());
    }
    Ok(split)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BalanceMode {
    Downsample,
    Upsample,
}

impl FromStr for BalanceMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "down" | "downsample" => Ok(BalanceMode::Downsample),
            "up" | "upsample" => Ok(BalanceMode::Upsample),
            other => Err(Error::invalid(format!("unknown balance mode `{other}`"))),
        }
    }
}

/// Equalizes class sizes. Downsampling draws the majority class without
/// replacement; upsampling draws the minority class with replacement. The
/// output lists the majority part first.
pub fn balance(data: &[LabeledSentence], mode: BalanceMode, seed: u64) -> Result<Vec<LabeledSentence>> {
    let (pos, neg): (Vec<&LabeledSentence>, Vec<&LabeledSentence>) = data.iter().partition(|s| s.label);
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::invalid("balancing needs both classes"));
    }
    let (majority, minority) = if pos.len() >= neg.len() { (pos, neg) } else { (neg, pos) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out: Vec<LabeledSentence> = match mode {
        BalanceMode::Downsample => {
            let mut keep = index::sample(&mut rng, majority.len(), minority.len()).into_vec();
            keep.sort_unstable();
            keep.iter()
                .map(|&i| majority[i])
                .chain(minority.iter().copied())
                .cloned()
                .collect()
        }
        BalanceMode::Upsample => {
            let drawn: Vec<&LabeledSentence> = (0..majority.len())
                .map(|_| *minority.choose(&mut rng).expect("minority is nonempty"))
                .collect();
            majority.iter().chain(drawn.iter()).map(|s| (*s).clone()).collect()
        }
    };
    Ok(out)
}

/// Mean embedding of a sentence and how many of its tokens were found.
#[derive(Debug, Clone, PartialEq)]
pub struct Features {
    pub vector: Vec<f64>,
    pub found: usize,
    pub tokens: usize,
}

impl Features {
    pub fn covered(&self) -> bool {
        self.found > 0
    }
}

/// Mean vector of the in-vocabulary tokens; zero vector if none is found.
pub fn featurize_tokens<S: AsRef<str>>(tokens: &[S], table: &EmbeddingTable) -> Features {
    let mut vector = vec![0.0; table.dim()];
    let mut found = 0;
    for t in tokens {
        if let Some(v) = table.get(t.as_ref()) {
            vector.iter_mut().zip(v).for_each(|(a, x)| *a += x);
            found += 1;
        }
    }
    if found > 0 {
        vector.iter_mut().for_each(|a| *a /= found as f64);
    }
    Features {
        vector,
        found,
        tokens: tokens.len(),
    }
}

/// Cleans `sentence` and averages the embeddings of its tokens.
pub fn featurize(sentence: &str, table: &EmbeddingTable, stopwords: &StopwordSet) -> Features {
    featurize_tokens(&clean_text(sentence, stopwords).tokens, table)
}

/// Featurizes a labeled set in parallel. Returns the examples and the
/// fraction of sentences with at least one known token.
pub fn featurize_all(
    data: &[LabeledSentence],
    table: &EmbeddingTable,
    stopwords: &StopwordSet,
) -> (Vec<(Vec<f64>, bool)>, f64) {
    let feats: Vec<(Features, bool)> = data
        .par_iter()
        .map(|s| (featurize(&s.text, table, stopwords), s.label))
        .collect();
    let covered = feats.iter().filter(|(f, _)| f.covered()).count();
    let coverage = if feats.is_empty() { 0.0 } else { covered as f64 / feats.len() as f64 };
    (feats.into_iter().map(|(f, y)| (f.vector, y)).collect(), coverage)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regularization {
    L1,
    L2,
}

impl FromStr for Regularization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(Regularization::L1),
            "l2" => Ok(Regularization::L2),
            other => Err(Error::invalid(format!("unknown regularization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FearModel {
    pub dim: usize,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub reg: Regularization,
    pub lambda: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl FearModel {
    pub fn predict_proba(&self, features: &[f64]) -> Result<f64> {
        if features.len() != self.dim {
            return Err(Error::invalid(format!(
                "feature length {} does not match model dimension {}",
                features.len(),
                self.dim
            )));
        }
        Ok(sigmoid(dot(&self.weights, features) + self.bias))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: FearModel = serde_json::from_str(text)?;
        if model.weights.len() != model.dim {
            return Err(Error::invalid("model weights do not match its dimension"));
        }
        Ok(model)
    }
}

/// Mean logistic loss plus `lambda * ||w||^2` (L2) or `lambda * ||w||_1` (L1).
/// The bias is not penalized.
pub fn objective(weights: &[f64], bias: f64, data: &[(Vec<f64>, bool)], reg: Regularization, lambda: f64) -> f64 {
    let n = data.len() as f64;
    let data_loss: f64 = data
        .iter()
        .map(|(x, y)| {
            let z = dot(weights, x) + bias;
            softplus(z) - if *y { z } else { 0.0 }
        })
        .sum::<f64>()
        / n;
    data_loss + lambda * penalty(weights, reg)
}

fn penalty(weights: &[f64], reg: Regularization) -> f64 {
    match reg {
        Regularization::L2 => weights.iter().map(|w| w * w).sum(),
        Regularization::L1 => weights.iter().map(|w| w.abs()).sum(),
    }
}

/// Gradient of the mean logistic loss alone, `(d/dw, d/db)`.
fn data_gradient(weights: &[f64], bias: f64, data: &[(Vec<f64>, bool)]) -> (Vec<f64>, f64) {
    let n = data.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (x, y) in data {
        let r = sigmoid(dot(weights, x) + bias) - if *y { 1.0 } else { 0.0 };
        gw.iter_mut().zip(x).for_each(|(g, xi)| *g += r * xi);
        gb += r;
    }
    gw.iter_mut().for_each(|g| *g /= n);
    (gw, gb / n)
}

/// Gradient of [`objective`]; for L1 this is the subgradient `lambda * sign(w)`,
/// exact wherever no weight is zero.
pub fn objective_gradient(
    weights: &[f64],
    bias: f64,
    data: &[(Vec<f64>, bool)],
    reg: Regularization,
    lambda: f64,
) -> (Vec<f64>, f64) {
    let (mut gw, gb) = data_gradient(weights, bias, data);
    for (g, w) in gw.iter_mut().zip(weights) {
        *g += match reg {
            Regularization::L2 => 2.0 * lambda * w,
            Regularization::L1 if *w == 0.0 => 0.0,
            Regularization::L1 => lambda * w.signum(),
        };
    }
    (gw, gb)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub reg: Regularization,
    pub lambda: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Stop once the objective changes by less than this between epochs.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            reg: Regularization::L2,
            lambda: 1e-4,
            epochs: 500,
            learning_rate: 0.1,
            tolerance: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub model: FearModel,
    /// Objective after each completed epoch.
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent from zero weights. L1 uses a proximal
/// soft-thresholding step after each gradient step.
pub fn train_logistic(train: &[(Vec<f64>, bool)], cfg: &TrainConfig) -> Result<TrainedModel> {
    let Some((first, _)) = train.first() else {
        return Err(Error::invalid("empty training set"));
    };
    if !(cfg.lambda >= 0.0) {
        return Err(Error::invalid("lambda must be nonnegative"));
    }
    let dim = first.len();
    if train.iter().any(|(x, _)| x.len() != dim) {
        return Err(Error::invalid("training vectors differ in length"));
    }
    let mut w = vec![0.0; dim];
    let mut b = 0.0;
    let mut losses = Vec::new();
    let mut prev = objective(&w, b, train, cfg.reg, cfg.lambda);
    for epoch in 1..=cfg.epochs {
        let (gw, gb) = match cfg.reg {
            Regularization::L2 => objective_gradient(&w, b, train, cfg.reg, cfg.lambda),
            Regularization::L1 => data_gradient(&w, b, train),
        };
        w.iter_mut().zip(&gw).for_each(|(wi, g)| *wi -= cfg.learning_rate * g);
        b -= cfg.learning_rate * gb;
        if cfg.reg == Regularization::L1 {
            let t = cfg.learning_rate * cfg.lambda;
            w.iter_mut().for_each(|wi| *wi = wi.signum() * (wi.abs() - t).max(0.0));
        }
        let loss = objective(&w, b, train, cfg.reg, cfg.lambda);
        if !loss.is_finite() || w.iter().any(|x| !x.is_finite()) {
            return Err(Error::Training { epoch, loss });
        }
        losses.push(loss);
        if (prev - loss).abs() < cfg.tolerance {
            break;
        }
        prev = loss;
    }
    Ok(TrainedModel {
        model: FearModel {
            dim,
            weights: w,
            bias: b,
            reg: cfg.reg,
            lambda: cfg.lambda,
        },
        losses,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSelection {
    pub model: TrainedModel,
    /// `(lambda, validation ROC-AUC)` for every grid point.
    pub scores: Vec<(f64, f64)>,
}

/// Trains one model per grid value and keeps the one with the highest
/// validation ROC-AUC (earliest grid value on ties).
pub fn select_lambda(
    train: &[(Vec<f64>, bool)],
    validation: &[(Vec<f64>, bool)],
    grid: &[f64],
    cfg: &TrainConfig,
) -> Result<LambdaSelection> {
    let labels: Vec<bool> = validation.iter().map(|(_, y)| *y).collect();
    let mut best: Option<(f64, TrainedModel)> = None;
    let mut scores = Vec::new();
    for &lambda in grid {
        let trained = train_logistic(train, &TrainConfig { lambda, ..*cfg })?;
        let probs = validation
            .iter()
            .map(|(x, _)| trained.model.predict_proba(x))
            .collect::<Result<Vec<_>>>()?;
        let auc = roc_auc(&probs, &labels)?;
        scores.push((lambda, auc));
        if best.as_ref().map_or(true, |(a, _)| auc > *a) {
            best = Some((auc, trained));
        }
    }
    let (_, model) = best.ok_or_else(|| Error::invalid("empty lambda grid"))?;
    Ok(LambdaSelection { model, scores })
}

/// Scores the test sentences with `model` and reports accuracy, macro F1
/// and ROC-AUC on their natural class distribution.
pub fn evaluate(
    model: &FearModel,
    test: &[LabeledSentence],
    table: &EmbeddingTable,
    stopwords: &StopwordSet,
) -> Result<EvalReport> {
    let (examples, _) = featurize_all(test, table, stopwords);
    let probs = examples
        .iter()
        .map(|(x, _)| model.predict_proba(x))
        .collect::<Result<Vec<_>>>()?;
    let labels: Vec<bool> = examples.iter().map(|(_, y)| *y).collect();
    evaluate_scores(&probs, &labels)
}

/// Probability that a sentence of a story expresses fear.
pub trait FearScorer: Sync {
    fn score(&self, story: &Story, sentence: usize) -> Result<f64>;
}

/// Logistic model over the mean embedding of the sentence's tokens.
pub struct EmbeddingScorer<'a> {
    pub model: &'a FearModel,
    pub table: &'a EmbeddingTable,
}

impl FearScorer for EmbeddingScorer<'_> {
    fn score(&self, story: &Story, sentence: usize) -> Result<f64> {
        let tokens = story.sentence_tokens(sentence).ok_or_else(|| {
            Error::invalid(format!("story {} has no sentence {sentence}", story.id))
        })?;
        self.model.predict_proba(&featurize_tokens(tokens, self.table).vector)
    }
}

/// Precomputed probabilities from an external model, keyed by story id and
/// sentence index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExternalScores(HashMap<(String, usize), f64>);

impl ExternalScores {
    pub fn insert(&mut self, story_id: &str, sentence: usize, probability: f64) {
        self.0.insert((story_id.to_string(), sentence), probability);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(file, &path.display().to_string())
    }

    /// Reads `story_id,sentence_index,probability` rows.
    pub fn parse<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            story_id: String,
            sentence_index: usize,
            probability: f64,
        }
        let mut out = ExternalScores::default();
        for (i, row) in csv::Reader::from_reader(reader).deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::format(source_name, i + 2, e.to_string()))?;
            if !(0.0..=1.0).contains(&row.probability) {
                return Err(Error::format(source_name, i + 2, "probability outside [0, 1]"));
            }
            out.insert(&row.story_id, row.sentence_index, row.probability);
        }
        Ok(out)
    }
}

impl FearScorer for ExternalScores {
    fn score(&self, story: &Story, sentence: usize) -> Result<f64> {
        self.0
            .get(&(story.id.clone(), sentence))
            .copied()
            .ok_or_else(|| Error::Coverage(format!("no external score for story {} sentence {sentence}", story.id)))
    }
}
