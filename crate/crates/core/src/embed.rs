//! Word embeddings in the textual word-vector format, the averaged "human"
//! reference vector, and the SSToP-vs-distance profile over nouns.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::SstopLexicon;

/// Gender-neutral synonyms of "human"; multi-word entries are averaged per word first.
pub const HUMAN_SYNONYMS: [&str; 8] = [
    "human",
    "mortal",
    "person",
    "soul",
    "homo sapien",
    "earthling",
    "higher animal",
    "living person",
];

pub const DEFAULT_BINS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        EmbeddingTable {
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        }
    }

    /// Inserts a vector; returns false (and keeps the old vector) if the
    /// word is already present.
    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::invalid(format!(
                "vector length {} does not match dimension {}",
                vector.len(),
                self.dim
            )));
        }
        let word = word.into();
        if self.index.contains_key(&word) {
            return Ok(false);
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.words
            .iter()
            .zip(self.data.chunks_exact(self.dim.max(1)))
            .map(|(w, v)| (w.as_str(), v))
    }

    /// Writes `<count> <dim>` followed by one `word v1 .. vd` line per word.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<embeddings>", e);
        writeln!(out, "{} {}", self.len(), self.dim).map_err(io)?;
        for (word, v) in self.iter() {
            write!(out, "{word}").map_err(io)?;
            for x in v {
                write!(out, " {x}").map_err(io)?;
            }
            writeln!(out).map_err(io)?;
        }
        Ok(())
    }
}

pub fn load_embeddings(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(BufReader::new(file), &path.display().to_string())
}

/// Parses the textual word-vector format. A first line made of exactly two
/// integers is a `<count> <dim>` header; otherwise the dimension is taken
/// from the first vector line. Duplicate words keep their first vector.
pub fn parse_embeddings<R: BufRead>(reader: R, source_name: &str) -> Result<EmbeddingTable> {
    let mut table: Option<EmbeddingTable> = None;
    let mut buf = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();

        if i == 0 && rest.len() == 1 {
            if let (Ok(_count), Ok(dim)) = (word.parse::<usize>(), rest[0].parse::<usize>()) {
                if dim == 0 {
                    return Err(Error::format(source_name, lineno, "header declares dimension 0"));
                }
                table = Some(EmbeddingTable::new(dim));
                continue;
            }
        }

        buf.clear();
        for field in &rest {
            let x: f64 = field
                .parse()
                .map_err(|_| Error::format(source_name, lineno, format!("bad number `{field}`")))?;
            buf.push(x);
        }
        if buf.is_empty() {
            return Err(Error::format(source_name, lineno, format!("word `{word}` has no vector")));
        }
        let table = table.get_or_insert_with(|| EmbeddingTable::new(buf.len()));
        if buf.len() != table.dim {
            return Err(Error::format(
                source_name,
                lineno,
                format!("expected {} components, found {}", table.dim, buf.len()),
            ));
        }
        table.insert(word, &buf)?;
    }
    table.ok_or_else(|| Error::format(source_name, 0, "no vectors found"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HumanVector {
    pub vector: Vec<f64>,
    pub contributing_synonyms: Vec<String>,
    pub skipped_synonyms: Vec<String>,
}

fn mean_of<'a>(vectors: impl IntoIterator<Item = &'a [f64]>, dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    let mut n = 0usize;
    for v in vectors {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
        n += 1;
    }
    if n > 0 {
        acc.iter_mut().for_each(|a| *a /= n as f64);
    }
    acc
}

/// Averages [`HUMAN_SYNONYMS`] found in the table.
pub fn human_vector(table: &EmbeddingTable) -> Result<HumanVector> {
    human_vector_from(table, &HUMAN_SYNONYMS)
}

/// Mean over the resolvable `synonyms`. A multi-word synonym resolves to the
/// mean of its lowercased words and is skipped if any word is missing.
pub fn human_vector_from(table: &EmbeddingTable, synonyms: &[&str]) -> Result<HumanVector> {
    let mut contributing = Vec::new();
    let mut skipped = Vec::new();
    let mut resolved = Vec::new();
    for &syn in synonyms {
        let parts: Option<Vec<&[f64]>> = syn
            .split_whitespace()
            .map(|w| table.get(&w.to_lowercase()))
            .collect();
        match parts {
            Some(parts) if !parts.is_empty() => {
                resolved.push(mean_of(parts, table.dim()));
                contributing.push(syn.to_string());
            }
            _ => skipped.push(syn.to_string()),
        }
    }
    if resolved.is_empty() {
        return Err(Error::Coverage("none of the human synonyms is in the embedding table".into()));
    }
    Ok(HumanVector {
        vector: mean_of(resolved.iter().map(Vec::as_slice), table.dim()),
        contributing_synonyms: contributing,
        skipped_synonyms: skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Distance {
    #[default]
    Euclidean,
    Manhattan,
}

impl std::str::FromStr for Distance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Distance::Euclidean),
            "manhattan" => Ok(Distance::Manhattan),
            other => Err(Error::invalid(format!("unknown distance `{other}`"))),
        }
    }
}

impl Distance {
    pub fn between(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Distance::Euclidean => euclidean(a, b),
            Distance::Manhattan => manhattan(a, b),
        }
    }
}

fn check_lengths(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("vector lengths differ: {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

pub fn manhattan(a: &[f64], b: &[f64]) -> Result<f64> {
    check_lengths(a, b)?;
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum())
}

/// Part-of-speech tags per word, read from `word<TAB>TAG[,TAG...]` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PosLexicon(HashMap<String, HashSet<String>>);

impl PosLexicon {
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut map: HashMap<String, HashSet<String>> = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tags) = line
                .split_once('\t')
                .ok_or_else(|| Error::format(source_name, i + 1, "expected `word<TAB>tags`"))?;
            map.entry(word.trim().to_lowercase()).or_default().extend(
                tags.split(',')
                    .map(|t| t.trim().to_uppercase())
                    .filter(|t| !t.is_empty()),
            );
        }
        Ok(PosLexicon(map))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn tags(&self, word: &str) -> Option<&HashSet<String>> {
        self.0.get(word)
    }

    pub fn insert(&mut self, word: &str, tags: &[&str]) {
        self.0
            .entry(word.to_string())
            .or_default()
            .extend(tags.iter().map(|t| t.to_string()));
    }
}

/// True if any tag starts with NN, PN or NP. Unknown words are not nouns.
pub fn is_noun(word: &str, pos: &PosLexicon) -> bool {
    pos.tags(word).is_some_and(|tags| {
        tags.iter()
            .any(|t| t.starts_with("NN") || t.starts_with("PN") || t.starts_with("NP"))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileBin {
    pub distance_lo: f64,
    pub distance_hi: f64,
    pub mean_sstop: f64,
    pub stderr: f64,
    pub n_words: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityProfile {
    pub bins: Vec<ProfileBin>,
    pub human: HumanVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    pub n_bins: usize,
    pub distance: Distance,
    /// Average `ln(score)` instead of raw scores.
    pub log_domain: bool,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            n_bins: DEFAULT_BINS,
            distance: Distance::Euclidean,
            log_domain: false,
        }
    }
}

/// (distance to the human vector, score) for every lexicon noun with a vector.
pub fn noun_distances(
    lexicon: &SstopLexicon,
    table: &EmbeddingTable,
    pos: &PosLexicon,
    human: &HumanVector,
    distance: Distance,
) -> Result<Vec<(String, f64, f64)>> {
    let entries: Vec<_> = lexicon.entries.values().collect();
    entries
        .par_iter()
        .filter(|e| is_noun(&e.word, pos))
        .filter_map(|e| table.get(&e.word).map(|v| (e, v)))
        .map(|(e, v)| Ok((e.word.clone(), distance.between(v, &human.vector)?, e.score)))
        .collect()
}

/// Bins lexicon nouns by distance to the human vector into `n_bins`
/// equal-width bins over the observed range and reports the mean score per
/// non-empty bin with its standard error.
pub fn similarity_profile(
    lexicon: &SstopLexicon,
    table: &EmbeddingTable,
    pos: &PosLexicon,
    opts: ProfileOptions,
) -> Result<SimilarityProfile> {
    if opts.n_bins < 2 {
        return Err(Error::invalid("at least two bins are required"));
    }
    let human = human_vector(table)?;
    let points = noun_distances(lexicon, table, pos, &human, opts.distance)?;
    if points.is_empty() {
        return Err(Error::Coverage("no lexicon noun has an embedding".into()));
    }
    let values: Vec<(f64, f64)> = points
        .iter()
        .map(|(_, d, s)| (*d, if opts.log_domain { s.ln() } else { *s }))
        .collect();
    Ok(SimilarityProfile {
        bins: bin_profile(&values, opts.n_bins),
        human,
    })
}

/// Equal-width binning of `(distance, value)` pairs; empty bins are omitted.
pub fn bin_profile(points: &[(f64, f64)], n_bins: usize) -> Vec<ProfileBin> {
    let lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let width = (hi - lo) / n_bins as f64;
    let mut groups: Vec<Vec<f64>> = vec![Vec::new(); n_bins];
    for &(d, v) in points {
        let idx = if width > 0.0 {
            (((d - lo) / width).floor() as usize).min(n_bins - 1)
        } else {
            0
        };
        groups[idx].push(v);
    }
    groups
        .iter()
        .enumerate()
        .filter(|(_, g)| !g.is_empty())
        .map(|(i, g)| {
            let n = g.len();
            let mean = g.iter().sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            let (distance_lo, distance_hi) = if width > 0.0 {
                (lo + i as f64 * width, if i + 1 == n_bins { hi } else { lo + (i + 1) as f64 * width })
            } else {
                (lo, hi)
            };
            ProfileBin {
                distance_lo,
                distance_hi,
                mean_sstop: mean,
                stderr,
                n_words: n,
            }
        })
        .collect()
}

impl SimilarityProfile {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_lo", "bin_hi", "mean_sstop", "stderr", "n_words"])?;
        for b in &self.bins {
            w.write_record([
                b.distance_lo.to_string(),
                b.distance_hi.to_string(),
                b.mean_sstop.to_string(),
                b.stderr.to_string(),
                b.n_words.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<profile>", e))?;
        Ok(())
    }
}
