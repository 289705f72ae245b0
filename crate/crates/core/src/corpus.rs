//! Story ingestion, text cleaning and posting-time statistics.
//!
//! Corpora are JSON Lines dumps of subreddit submissions. Each story is
//! cleaned with a fixed pipeline: sentence boundaries are recorded first,
//! then everything outside `[A-Za-z ]` is replaced by a space, words are
//! split on camelCase boundaries, lowercased, and stopwords are dropped.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, Datelike, Timelike, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Default minimum story length, in cleaned tokens.
pub const DEFAULT_MIN_TOKENS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Genre {
    Scary,
    Baseline,
}

impl Genre {
    pub fn as_str(self) -> &'static str {
        match self {
            Genre::Scary => "scary",
            Genre::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Genre {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Genre {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "scary" => Ok(Genre::Scary),
            "baseline" | "normal" => Ok(Genre::Baseline),
            other => Err(Error::invalid(format!("unknown genre `{other}`"))),
        }
    }
}

/// A submission as read from disk, before any cleaning.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawStory {
    pub id: String,
    pub created_utc: i64,
    pub subreddit: String,
    pub genre: Genre,
    pub title: String,
    pub body: String,
}

/// A cleaned story. `sentences` are half-open ranges into `tokens`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Story {
    pub id: String,
    pub created_utc: i64,
    pub subreddit: String,
    pub genre: Genre,
    pub tokens: Vec<String>,
    pub sentences: Vec<Range<usize>>,
}

impl Story {
    /// Cleans `title + " " + body` of a raw story.
    pub fn from_raw(raw: &RawStory, stopwords: &StopwordSet) -> Story {
        let text = format!("{} {}", raw.title, raw.body);
        let CleanedText { tokens, sentences } = clean_text(&text, stopwords);
        Story {
            id: raw.id.clone(),
            created_utc: raw.created_utc,
            subreddit: raw.subreddit.clone(),
            genre: raw.genre,
            tokens,
            sentences,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn sentence_tokens(&self, index: usize) -> Option<&[String]> {
        self.sentences.get(index).map(|r| &self.tokens[r.clone()])
    }

    pub fn posted_at(&self) -> Option<DateTime<Utc>> {
        DateTime::from_timestamp(self.created_utc, 0)
    }
}

/// Result of reading one corpus file.
#[derive(Debug, Clone, Default)]
pub struct LoadedCorpus {
    pub stories: Vec<RawStory>,
    /// Non-blank lines that could not be parsed into a story.
    pub skipped: usize,
}

#[derive(Deserialize)]
struct SubmissionLine {
    id: String,
    created_utc: i64,
    subreddit: String,
    title: String,
    selftext: String,
}

/// Reads a JSON Lines submission dump. Malformed lines are skipped and counted;
/// if more than half of the non-blank lines are malformed the file is rejected.
pub fn load_corpus(path: impl AsRef<Path>, genre: Genre) -> Result<LoadedCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let loaded = parse_corpus(BufReader::new(file), genre).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })?;
    let lines = loaded.stories.len() + loaded.skipped;
    if loaded.skipped * 2 > lines {
        return Err(Error::CorpusFormat {
            path: path.to_path_buf(),
            malformed: loaded.skipped,
            lines,
        });
    }
    if loaded.skipped > 0 {
        log::warn!("{}: skipped {} malformed lines", path.display(), loaded.skipped);
    }
    Ok(loaded)
}

/// Line parser behind [`load_corpus`]; does not apply the malformed-ratio check.
pub fn parse_corpus<R: BufRead>(reader: R, genre: Genre) -> Result<LoadedCorpus> {
    let mut out = LoadedCorpus::default();
    for line in reader.lines() {
        let line = line.map_err(|e| Error::io("<corpus>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SubmissionLine>(&line) {
            Ok(s) if !s.id.is_empty() && s.created_utc >= 0 => out.stories.push(RawStory {
                id: s.id,
                created_utc: s.created_utc,
                subreddit: s.subreddit,
                genre,
                title: s.title,
                body: s.selftext,
            }),
            _ => out.skipped += 1,
        }
    }
    Ok(out)
}

/// A set of lowercase words removed during cleaning.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordSet(HashSet<String>);

impl StopwordSet {
    /// The bundled 179-word English list.
    pub fn english() -> Self {
        Self::parse(BUNDLED_STOPWORDS)
    }

    pub fn empty() -> Self {
        StopwordSet(HashSet::new())
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        StopwordSet(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_lowercase)
                .collect(),
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut text = String::new();
        File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(word)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopwordSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopwordSet(iter.into_iter().map(Into::into).collect())
    }
}

/// Splits a word before every uppercase letter that follows a lowercase
/// letter or is itself followed by a lowercase letter. Casing is preserved
/// and the pieces concatenate back to the input.
pub fn split_camel_case(token: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = token.char_indices().collect();
    let mut pieces = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        let (offset, c) = chars[i];
        if !c.is_uppercase() {
            continue;
        }
        let after_lower = chars[i - 1].1.is_lowercase();
        let before_lower = chars.get(i + 1).is_some_and(|&(_, n)| n.is_lowercase());
        if after_lower || before_lower {
            pieces.push(&token[start..offset]);
            start = offset;
        }
    }
    if start < token.len() {
        pieces.push(&token[start..]);
    }
    pieces
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CleanedText {
    pub tokens: Vec<String>,
    pub sentences: Vec<Range<usize>>,
}

fn is_sentence_boundary(c: char) -> bool {
    matches!(c, '.' | '!' | '?' | '\n')
}

/// Runs the cleaning pipeline over one piece of text.
///
/// Sentences are delimited by `.`, `!`, `?` and newline before any
/// characters are stripped; sentences left without tokens are dropped.
pub fn clean_text(raw: &str, stopwords: &StopwordSet) -> CleanedText {
    let mut out = CleanedText::default();
    for segment in raw.split(is_sentence_boundary) {
        let start = out.tokens.len();
        let stripped: String = segment
            .chars()
            .map(|c| if c.is_ascii_alphabetic() { c } else { ' ' })
            .collect();
        for word in stripped.split_whitespace() {
            for piece in split_camel_case(word) {
                let lower = piece.to_ascii_lowercase();
                if !stopwords.contains(&lower) {
                    out.tokens.push(lower);
                }
            }
        }
        if out.tokens.len() > start {
            out.sentences.push(start..out.tokens.len());
        }
    }
    out
}

fn is_removed_body(body: &str) -> bool {
    matches!(body.trim(), "" | "[removed]" | "[deleted]")
}

/// Cleans raw stories in parallel, preserving input order. Stories whose
/// body is empty (or a removal placeholder) are dropped.
pub fn clean_corpus(raws: &[RawStory], stopwords: &StopwordSet) -> Vec<Story> {
    raws.par_iter()
        .filter(|r| !is_removed_body(&r.body))
        .map(|r| Story::from_raw(r, stopwords))
        .collect()
}

pub fn filter_min_length(stories: Vec<Story>, min_tokens: usize) -> Vec<Story> {
    stories.into_iter().filter(|s| s.len() >= min_tokens).collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub stories_per_year: BTreeMap<i32, usize>,
    /// Always holds all 24 hours, zero-filled.
    pub stories_per_hour_gmt: BTreeMap<u32, usize>,
    pub total_stories: usize,
    pub total_tokens: usize,
}

pub fn compute_stats(stories: &[Story]) -> CorpusStats {
    let mut stats = CorpusStats {
        stories_per_hour_gmt: (0..24).map(|h| (h, 0)).collect(),
        ..Default::default()
    };
    for story in stories {
        // created_utc >= 0 holds for every loaded story, so this cannot fail
        // short of the year 262143.
        let Some(at) = story.posted_at() else {
            log::warn!("story {} has an unrepresentable timestamp", story.id);
            continue;
        };
        *stats.stories_per_year.entry(at.year()).or_default() += 1;
        *stats.stories_per_hour_gmt.entry(at.hour()).or_default() += 1;
        stats.total_stories += 1;
        stats.total_tokens += story.len();
    }
    stats
}

/// Writes a `key,count` histogram.
pub fn write_histogram<W: Write, K: fmt::Display>(
    out: W,
    histogram: impl IntoIterator<Item = (K, usize)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "count"])?;
    for (k, n) in histogram {
        w.write_record([k.to_string(), n.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<histogram>", e))?;
    Ok(())
}
