//! Latent Dirichlet allocation by collapsed Gibbs sampling.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
}

impl Default for LdaParams {
    fn default() -> Self {
        let k = 10;
        LdaParams {
            k,
            alpha: 5.0 / k as f64,
            beta: 0.01,
            iterations: 1000,
        }
    }
}

impl LdaParams {
    fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("topic count must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }
}

/// A fitted topic model: the final Gibbs state and its count tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub params: LdaParams,
    /// Word types in first-occurrence order.
    pub vocabulary: Vec<String>,
    /// K rows of V counts.
    pub topic_word_counts: Vec<Vec<u64>>,
    pub topic_totals: Vec<u64>,
    /// N rows of K counts.
    pub doc_topic_counts: Vec<Vec<u64>>,
    /// Topic of every token, per document.
    pub assignments: Vec<Vec<usize>>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.params.k
    }

    pub fn n_docs(&self) -> usize {
        self.doc_topic_counts.len()
    }

    pub fn doc_len(&self, doc: usize) -> usize {
        self.assignments[doc].len()
    }

    /// Smoothed topic-word probability (n_kw + beta) / (n_k + V beta).
    pub fn phi(&self, topic: usize, word: usize) -> f64 {
        let v = self.vocabulary.len() as f64;
        (self.topic_word_counts[topic][word] as f64 + self.params.beta)
            / (self.topic_totals[topic] as f64 + v * self.params.beta)
    }

    /// The `m` most probable words of a topic, ties broken alphabetically.
    pub fn top_words(&self, topic: usize, m: usize) -> Vec<(String, f64)> {
        let mut words: Vec<usize> = (0..self.vocabulary.len()).collect();
        let counts = &self.topic_word_counts[topic];
        words.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then_with(|| self.vocabulary[a].cmp(&self.vocabulary[b])));
        words
            .into_iter()
            .take(m)
            .map(|w| (self.vocabulary[w].clone(), self.phi(topic, w)))
            .collect()
    }
}

/// Posterior-mean topic proportions (n_dk + alpha) / (len + K alpha).
///
/// Panics if `doc` is out of range.
pub fn topic_proportions(model: &TopicModel, doc: usize) -> Vec<f64> {
    let k = model.k() as f64;
    let denom = model.doc_len(doc) as f64 + k * model.params.alpha;
    model.doc_topic_counts[doc]
        .iter()
        .map(|&n| (n as f64 + model.params.alpha) / denom)
        .collect()
}

/// Gibbs sampler state. Exposed so callers can inspect the counts between sweeps.
pub struct LdaSampler {
    params: LdaParams,
    vocabulary: Vec<String>,
    docs: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u64>>,
    topic_word: Vec<Vec<u64>>,
    topic_totals: Vec<u64>,
    rng: ChaCha8Rng,
    weights: Vec<f64>,
}

impl LdaSampler {
    /// Indexes the vocabulary and draws uniform initial assignments.
    pub fn new<S: AsRef<str>>(docs: &[Vec<S>], params: LdaParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut vocabulary = Vec::new();
        let docs: Vec<Vec<usize>> = docs
            .iter()
            .map(|doc| {
                doc.iter()
                    .map(|w| {
                        let w = w.as_ref();
                        *index.entry(w).or_insert_with(|| {
                            vocabulary.push(w.to_string());
                            vocabulary.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        if vocabulary.is_empty() {
            return Err(Error::invalid("LDA needs at least one token"));
        }

        let k = params.k;
        let v = vocabulary.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut doc_topic = vec![vec![0u64; k]; docs.len()];
        let mut topic_word = vec![vec![0u64; v]; k];
        let mut topic_totals = vec![0u64; k];
        let mut assignments = Vec::with_capacity(docs.len());
        for (d, doc) in docs.iter().enumerate() {
            let z: Vec<usize> = doc.iter().map(|_| rng.gen_range(0..k)).collect();
            for (&w, &t) in doc.iter().zip(&z) {
                doc_topic[d][t] += 1;
                topic_word[t][w] += 1;
                topic_totals[t] += 1;
            }
            assignments.push(z);
        }
        Ok(LdaSampler {
            params,
            vocabulary,
            docs,
            assignments,
            doc_topic,
            topic_word,
            topic_totals,
            rng,
            weights: vec![0.0; k],
        })
    }

    /// Resamples every token once, in document order.
    pub fn sweep(&mut self) {
        let LdaParams { k, alpha, beta, .. } = self.params;
        let v_beta = self.vocabulary.len() as f64 * beta;
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (self.doc_topic[d][t] as f64 + alpha) * (self.topic_word[t][w] as f64 + beta)
                        / (self.topic_totals[t] as f64 + v_beta);
                    self.weights[t] = total;
                }
                let u = self.rng.gen::<f64>() * total;
                let new = self.weights.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.assignments
    }

    pub fn doc_topic_counts(&self) -> &[Vec<u64>] {
        &self.doc_topic
    }

    pub fn topic_word_counts(&self) -> &[Vec<u64>] {
        &self.topic_word
    }

    pub fn token_count(&self) -> usize {
        self.docs.iter().map(Vec::len).sum()
    }

    pub fn into_model(self) -> TopicModel {
        TopicModel {
            params: self.params,
            vocabulary: self.vocabulary,
            topic_word_counts: self.topic_word,
            topic_totals: self.topic_totals,
            doc_topic_counts: self.doc_topic,
            assignments: self.assignments,
        }
    }
}

/// Runs `params.iterations` Gibbs sweeps from a seeded random start.
pub fn lda_fit<S: AsRef<str>>(docs: &[Vec<S>], params: LdaParams, seed: u64) -> Result<TopicModel> {
    let mut sampler = LdaSampler::new(docs, params, seed)?;
    for it in 0..params.iterations {
        sampler.sweep();
        if (it + 1) % 100 == 0 {
            log::debug!("LDA sweep {}/{}", it + 1, params.iterations);
        }
    }
    Ok(sampler.into_model())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(k: usize, iterations: usize) -> LdaParams {
        LdaParams {
            k,
            alpha: 0.1,
            beta: 0.01,
            iterations,
        }
    }

    fn check_counts(s: &LdaSampler) {
        let n = s.token_count() as u64;
        let dt: u64 = s.doc_topic_counts().iter().flatten().sum();
        let tw: u64 = s.topic_word_counts().iter().flatten().sum();
        assert_eq!((dt, tw), (n, n));
        assert!(s.assignments().iter().flatten().all(|&z| z < s.params.k));
    }

    #[test]
    fn planted_two_topics() {
        let a: Vec<&str> = ["apple", "pear", "plum", "fig"].iter().cycle().take(60).copied().collect();
        let b: Vec<&str> = ["bolt", "nut", "screw", "gear"].iter().cycle().take(60).copied().collect();
        let model = lda_fit(&[a, b], params(2, 200), 7).unwrap();
        let p0 = topic_proportions(&model, 0);
        let p1 = topic_proportions(&model, 1);
        let dom = |p: &[f64]| if p[0] > p[1] { 0 } else { 1 };
        assert!(p0[dom(&p0)] >= 0.9 && p1[dom(&p1)] >= 0.9, "{p0:?} {p1:?}");
        assert_ne!(dom(&p0), dom(&p1));
    }

    #[test]
    fn single_topic_is_forced() {
        let docs = vec![vec!["a", "b", "c"], vec!["c", "d"]];
        let model = lda_fit(&docs, params(1, 5), 1).unwrap();
        assert!(model.assignments.iter().flatten().all(|&z| z == 0));
        for d in 0..2 {
            assert_eq!(topic_proportions(&model, d), vec![1.0]);
        }
    }

    #[test]
    fn conservation_every_sweep() {
        let docs: Vec<Vec<String>> = (0..20)
            .map(|d| (0..15).map(|i| format!("w{}", (d * 7 + i * 3) % 23)).collect())
            .collect();
        let mut s = LdaSampler::new(&docs, params(4, 0), 3).unwrap();
        check_counts(&s);
        for _ in 0..25 {
            s.sweep();
            check_counts(&s);
        }
    }

    #[test]
    fn proportions_examples() {
        let model = TopicModel {
            params: LdaParams {
                k: 2,
                alpha: 1.0,
                beta: 0.01,
                iterations: 0,
            },
            vocabulary: vec!["x".into()],
            topic_word_counts: vec![vec![2], vec![2]],
            topic_totals: vec![2, 2],
            doc_topic_counts: vec![vec![2, 2]],
            assignments: vec![vec![0, 0, 1, 1]],
        };
        assert_eq!(topic_proportions(&model, 0), vec![0.5, 0.5]);

        let empty = TopicModel {
            params: LdaParams {
                k: 10,
                alpha: 0.1,
                beta: 0.01,
                iterations: 0,
            },
            vocabulary: vec!["x".into()],
            topic_word_counts: vec![vec![0]; 10],
            topic_totals: vec![0; 10],
            doc_topic_counts: vec![vec![0; 10]],
            assignments: vec![vec![]],
        };
        for p in topic_proportions(&empty, 0) {
            assert!((p - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let docs: Vec<Vec<String>> = (0..10)
            .map(|d| (0..30).map(|i| format!("t{}", (d * 5 + i) % 17)).collect())
            .collect();
        let a = lda_fit(&docs, params(3, 30), 42).unwrap();
        let b = lda_fit(&docs, params(3, 30), 42).unwrap();
        assert_eq!(a, b);
        let c = lda_fit(&docs, params(3, 30), 43).unwrap();
        assert_ne!(a.assignments, c.assignments);
    }

    #[test]
    fn rejects_empty_vocabulary() {
        let docs: Vec<Vec<&str>> = vec![vec![], vec![]];
        assert!(matches!(lda_fit(&docs, params(2, 1), 0), Err(Error::InvalidArgument(_))));
        assert!(lda_fit(&[vec!["a"]], params(0, 1), 0).is_err());
    }
}
