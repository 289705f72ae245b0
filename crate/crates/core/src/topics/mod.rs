//! Porter stemming, LDA topic trends, and the disease-story trend.

mod lda;
mod porter;

use std::collections::BTreeMap;
use std::io::Write;

use chrono::Datelike;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Story;
use crate::error::{Error, Result};
use crate::format::sig17;

pub use lda::{lda_fit, topic_proportions, LdaParams, LdaSampler, TopicModel};
pub use porter::porter_stem;

pub const DISEASE_STEMS: [&str; 4] = ["lockdown", "infect", "viru", "diseas"];
pub const DEFAULT_TOP_WORDS: usize = 10;

/// Stems every story's tokens, in parallel.
pub fn stem_stories(stories: &[Story]) -> Vec<Vec<String>> {
    stories
        .par_iter()
        .map(|s| s.tokens.iter().map(|t| porter_stem(t)).collect())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicTrend {
    /// Mean topic proportions per posting year.
    pub yearly: BTreeMap<i32, Vec<f64>>,
    /// Per topic, the most probable words with their probabilities.
    pub top_words: Vec<Vec<(String, f64)>>,
}

/// Averages document topic proportions by year. `stories[d]` must be the
/// story behind document `d` of the model.
pub fn topic_trend(model: &TopicModel, stories: &[Story], top_m: usize) -> Result<TopicTrend> {
    if stories.len() != model.n_docs() {
        return Err(Error::invalid(format!(
            "model has {} documents but {} stories were given",
            model.n_docs(),
            stories.len()
        )));
    }
    let mut sums: BTreeMap<i32, (Vec<f64>, usize)> = BTreeMap::new();
    for (d, story) in stories.iter().enumerate() {
        let Some(at) = story.posted_at() else {
            continue;
        };
        let entry = sums.entry(at.year()).or_insert_with(|| (vec![0.0; model.k()], 0));
        for (acc, p) in entry.0.iter_mut().zip(topic_proportions(model, d)) {
            *acc += p;
        }
        entry.1 += 1;
    }
    let yearly = sums
        .into_iter()
        .map(|(year, (sum, n))| (year, sum.into_iter().map(|s| s / n as f64).collect()))
        .collect();
    let top_words = (0..model.k()).map(|t| model.top_words(t, top_m)).collect();
    Ok(TopicTrend { yearly, top_words })
}

/// CSV `topic,rank,word,phi`, ranks starting at 1.
pub fn write_topics<W: Write>(out: W, trend: &TopicTrend) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["topic", "rank", "word", "phi"])?;
    for (topic, words) in trend.top_words.iter().enumerate() {
        for (rank, (word, phi)) in words.iter().enumerate() {
            w.write_record([topic.to_string(), (rank + 1).to_string(), word.clone(), sig17(*phi)])?;
        }
    }
    w.flush().map_err(|e| Error::io("<topics>", e))?;
    Ok(())
}

/// CSV `year,topic,mean_proportion`.
pub fn write_trend<W: Write>(out: W, trend: &TopicTrend) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["year", "topic", "mean_proportion"])?;
    for (year, means) in &trend.yearly {
        for (topic, m) in means.iter().enumerate() {
            w.write_record([year.to_string(), topic.to_string(), sig17(*m)])?;
        }
    }
    w.flush().map_err(|e| Error::io("<trend>", e))?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiseaseMonth {
    pub year: i32,
    pub month: u32,
    pub n_disease: usize,
    pub n_total: usize,
}

impl DiseaseMonth {
    pub fn proportion(&self) -> f64 {
        self.n_disease as f64 / self.n_total as f64
    }
}

/// True iff some stemmed token starts with one of `stems`.
pub fn is_disease_story(tokens: &[String], stems: &[&str]) -> bool {
    tokens.iter().any(|t| {
        let s = porter_stem(t);
        stems.iter().any(|p| s.starts_with(p))
    })
}

/// Monthly share of disease-related stories, months in calendar order.
pub fn disease_trend(stories: &[Story], stems: &[&str]) -> Vec<DiseaseMonth> {
    let flags: Vec<Option<(i32, u32, bool)>> = stories
        .par_iter()
        .map(|s| {
            let at = s.posted_at()?;
            Some((at.year(), at.month(), is_disease_story(&s.tokens, stems)))
        })
        .collect();
    let mut months: BTreeMap<(i32, u32), (usize, usize)> = BTreeMap::new();
    for (year, month, hit) in flags.into_iter().flatten() {
        let e = months.entry((year, month)).or_default();
        e.0 += hit as usize;
        e.1 += 1;
    }
    months
        .into_iter()
        .map(|((year, month), (n_disease, n_total))| DiseaseMonth {
            year,
            month,
            n_disease,
            n_total,
        })
        .collect()
}

/// CSV `year,month,n_disease,n_total,proportion`.
pub fn write_disease<W: Write>(out: W, months: &[DiseaseMonth]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["year", "month", "n_disease", "n_total", "proportion"])?;
    for m in months {
        w.write_record([
            m.year.to_string(),
            m.month.to_string(),
            m.n_disease.to_string(),
            m.n_total.to_string(),
            sig17(m.proportion()),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<disease>", e))?;
    Ok(())
}
