//! Scary Story Token Prevalence (SSToP): the ratio of a word's relative
//! frequency in scary stories to its relative frequency in baseline stories.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::{Genre, Story};
use crate::error::{Error, Result};
use crate::format::sig17;

pub const DEFAULT_MIN_OCCURRENCE: u64 = 100;

/// Token multiset for one genre.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenreCounts {
    pub genre: Genre,
    pub word_counts: HashMap<String, u64>,
    pub total_tokens: u64,
}

impl GenreCounts {
    pub fn new(genre: Genre) -> Self {
        GenreCounts {
            genre,
            word_counts: HashMap::new(),
            total_tokens: 0,
        }
    }

    pub fn add_tokens<'a>(&mut self, tokens: impl IntoIterator<Item = &'a String>) {
        for t in tokens {
            *self.word_counts.entry(t.clone()).or_default() += 1;
            self.total_tokens += 1;
        }
    }

    /// Key-wise addition of two partial counts of the same genre.
    pub fn merge(mut self, other: GenreCounts) -> Result<GenreCounts> {
        if self.genre != other.genre {
            return Err(Error::invalid("cannot merge counts of different genres"));
        }
        for (w, n) in other.word_counts {
            *self.word_counts.entry(w).or_default() += n;
        }
        self.total_tokens += other.total_tokens;
        Ok(self)
    }

    pub fn count(&self, word: &str) -> u64 {
        self.word_counts.get(word).copied().unwrap_or(0)
    }
}

/// Counts every token of `stories`, all of which must belong to `genre`.
pub fn count_tokens(genre: Genre, stories: &[Story]) -> Result<GenreCounts> {
    let mut counts = GenreCounts::new(genre);
    for story in stories {
        if story.genre != genre {
            return Err(Error::invalid(format!(
                "story {} is {}, expected {}",
                story.id, story.genre, genre
            )));
        }
        counts.add_tokens(&story.tokens);
    }
    Ok(counts)
}

/// Like [`count_tokens`] but keeps one count per subreddit (case-insensitive).
pub fn count_tokens_by_subreddit(genre: Genre, stories: &[Story]) -> Result<BTreeMap<String, GenreCounts>> {
    let mut groups: BTreeMap<String, Vec<Story>> = BTreeMap::new();
    for story in stories {
        groups
            .entry(story.subreddit.to_lowercase())
            .or_default()
            .push(story.clone());
    }
    groups
        .into_iter()
        .map(|(sub, group)| Ok((sub, count_tokens(genre, &group)?)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SstopEntry {
    pub word: String,
    pub count_scary: u64,
    pub count_baseline: u64,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SstopLexicon {
    pub entries: BTreeMap<String, SstopEntry>,
    pub min_occurrence: u64,
    pub total_scary: u64,
    pub total_baseline: u64,
}

/// `(count_scary / total_scary) / (count_baseline / total_baseline)`,
/// evaluated as the ratio of the exact integer cross products.
///
/// A ratio below one is stored as the reciprocal of the swapped ratio, so
/// exchanging the genres turns every score into its exact `f64` reciprocal.
pub fn odds_ratio(count_scary: u64, total_scary: u64, count_baseline: u64, total_baseline: u64) -> f64 {
    let num = count_scary as u128 * total_baseline as u128;
    let den = count_baseline as u128 * total_scary as u128;
    if num >= den {
        num as f64 / den as f64
    } else {
        1.0 / (den as f64 / num as f64)
    }
}

/// Builds the lexicon from the two genre counts. A word is kept when its
/// combined count reaches `min_occurrence` and it occurs in both genres.
pub fn compute_sstop(scary: &GenreCounts, baseline: &GenreCounts, min_occurrence: u64) -> Result<SstopLexicon> {
    if scary.total_tokens == 0 || baseline.total_tokens == 0 {
        return Err(Error::invalid("both corpora must contain tokens"));
    }
    let mut entries = BTreeMap::new();
    for (word, &count_scary) in &scary.word_counts {
        let count_baseline = baseline.count(word);
        if count_scary == 0 || count_baseline == 0 || count_scary + count_baseline < min_occurrence {
            continue;
        }
        let score = odds_ratio(count_scary, scary.total_tokens, count_baseline, baseline.total_tokens);
        entries.insert(
            word.clone(),
            SstopEntry {
                word: word.clone(),
                count_scary,
                count_baseline,
                score,
            },
        );
    }
    Ok(SstopLexicon {
        entries,
        min_occurrence,
        total_scary: scary.total_tokens,
        total_baseline: baseline.total_tokens,
    })
}

impl SstopLexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn score(&self, word: &str) -> Option<f64> {
        self.entries.get(word).map(|e| e.score)
    }

    /// Entries by descending score, ties by word.
    pub fn ranked(&self) -> Vec<&SstopEntry> {
        let mut v: Vec<&SstopEntry> = self.entries.values().collect();
        v.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.word.cmp(&b.word)));
        v
    }

    /// `word,count_scary,count_baseline,score`, highest score first.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e| Error::io("<lexicon>", e);
        writeln!(out, "word,count_scary,count_baseline,score").map_err(io)?;
        for e in self.ranked() {
            writeln!(out, "{},{},{},{}", e.word, e.count_scary, e.count_baseline, sig17(e.score)).map_err(io)?;
        }
        Ok(())
    }
}

/// Mean score of the lexicon words in `tokens[start..start + width]`
/// (clipped at the end). Returns 1.0 when none of them is in the lexicon.
pub fn score_window(tokens: &[String], start: usize, width: usize, lexicon: &SstopLexicon) -> Result<f64> {
    if start >= tokens.len() {
        return Err(Error::invalid(format!("window start {start} past {} tokens", tokens.len())));
    }
    if width == 0 {
        return Err(Error::invalid("window width must be positive"));
    }
    let end = (start + width).min(tokens.len());
    let (sum, n) = tokens[start..end]
        .iter()
        .filter_map(|t| lexicon.score(t))
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    Ok(if n == 0 { 1.0 } else { sum / n as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn story(genre: Genre, words: &[&str]) -> Story {
        Story {
            id: "s".into(),
            created_utc: 0,
            subreddit: "r".into(),
            genre,
            tokens: words.iter().map(|w| w.to_string()).collect(),
            sentences: vec![0..words.len()],
        }
    }

    fn counts(genre: Genre, pairs: &[(&str, u64)], total: u64) -> GenreCounts {
        GenreCounts {
            genre,
            word_counts: pairs.iter().map(|&(w, n)| (w.to_string(), n)).collect(),
            total_tokens: total,
        }
    }

    fn lexicon(scores: &[(&str, f64)]) -> SstopLexicon {
        SstopLexicon {
            entries: scores
                .iter()
                .map(|&(w, s)| {
                    (
                        w.to_string(),
                        SstopEntry { word: w.into(), count_scary: 1, count_baseline: 1, score: s },
                    )
                })
                .collect(),
            min_occurrence: 0,
            total_scary: 1,
            total_baseline: 1,
        }
    }

    #[test]
    fn counting() {
        let c = count_tokens(Genre::Scary, &[story(Genre::Scary, &["ghost", "ghost", "door"])]).unwrap();
        assert_eq!((c.count("ghost"), c.count("door"), c.total_tokens), (2, 1, 3));

        let c = count_tokens(Genre::Scary, &[]).unwrap();
        assert!(c.word_counts.is_empty() && c.total_tokens == 0);

        let c = count_tokens(
            Genre::Baseline,
            &[story(Genre::Baseline, &["a", "b"]), story(Genre::Baseline, &["b", "c"])],
        )
        .unwrap();
        assert_eq!((c.count("a"), c.count("b"), c.count("c"), c.total_tokens), (1, 2, 1, 4));

        assert!(count_tokens(Genre::Scary, &[story(Genre::Baseline, &["a"])]).is_err());
    }

    #[test]
    fn hand_evaluated_score() {
        let scary = counts(Genre::Scary, &[("ghost", 20)], 1000);
        let base = counts(Genre::Baseline, &[("ghost", 2)], 2000);
        let lex = compute_sstop(&scary, &base, 22).unwrap();
        assert_eq!(lex.score("ghost"), Some(20.0));
        assert!(compute_sstop(&scary, &base, 23).unwrap().is_empty());
    }

    #[test]
    fn equal_frequency_is_one() {
        let scary = counts(Genre::Scary, &[("door", 5)], 50);
        let base = counts(Genre::Baseline, &[("door", 10)], 100);
        assert_eq!(compute_sstop(&scary, &base, 1).unwrap().score("door"), Some(1.0));
    }

    #[test]
    fn words_missing_from_a_genre_excluded() {
        let scary = counts(Genre::Scary, &[("eyeless", 500), ("the", 10)], 1000);
        let base = counts(Genre::Baseline, &[("the", 10), ("tldr", 300)], 1000);
        let lex = compute_sstop(&scary, &base, 1).unwrap();
        assert_eq!(lex.entries.keys().collect::<Vec<_>>(), ["the"]);
    }

    #[test]
    fn empty_corpus_rejected() {
        let empty = GenreCounts::new(Genre::Baseline);
        assert!(compute_sstop(&counts(Genre::Scary, &[("a", 1)], 1), &empty, 1).is_err());
    }

    #[test]
    fn window_examples() {
        let lex = lexicon(&[("w1", 2.0), ("w3", 4.0), ("x", 20.0)]);
        let toks = |ws: &[&str]| ws.iter().map(|w| w.to_string()).collect::<Vec<_>>();
        assert_eq!(score_window(&toks(&["x"]), 0, 1, &lex).unwrap(), 20.0);
        assert_eq!(score_window(&toks(&["q", "r"]), 0, 2, &lex).unwrap(), 1.0);
        assert_eq!(score_window(&toks(&["w1", "w2", "w3"]), 0, 3, &lex).unwrap(), 3.0);
        assert_eq!(score_window(&toks(&["q", "w3"]), 1, 50, &lex).unwrap(), 4.0);
        assert!(score_window(&toks(&["q"]), 1, 1, &lex).is_err());
    }

    #[test]
    fn csv_is_sorted_descending() {
        let mut buf = Vec::new();
        lexicon(&[("a", 0.5), ("b", 3.0), ("c", 3.0)]).write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "word,count_scary,count_baseline,score\nb,1,1,3\nc,1,1,3\na,1,1,0.5\n"
        );
    }

    proptest! {
        #[test]
        fn scores_finite_positive(cs in 1u64..10_000, ts_extra in 0u64..1_000_000, cb in 1u64..10_000, tb_extra in 0u64..1_000_000) {
            let s = odds_ratio(cs, cs + ts_extra, cb, cb + tb_extra);
            prop_assert!(s.is_finite() && s > 0.0);
        }

        #[test]
        fn swap_gives_reciprocal(cs in 1u64..10_000, ts_extra in 0u64..1_000_000, cb in 1u64..10_000, tb_extra in 0u64..1_000_000) {
            let (ts, tb) = (cs + ts_extra, cb + tb_extra);
            let s = odds_ratio(cs, ts, cb, tb);
            let swapped = odds_ratio(cb, tb, cs, ts);
            let (hi, lo) = if s >= 1.0 { (s, swapped) } else { (swapped, s) };
            prop_assert!(hi >= 1.0);
            prop_assert_eq!(lo, 1.0 / hi);
        }

        #[test]
        fn min_occurrence_monotone(words in prop::collection::vec((1u64..50, 1u64..50), 1..20), lo in 0u64..60, step in 0u64..40) {
            let scary = GenreCounts {
                genre: Genre::Scary,
                word_counts: words.iter().enumerate().map(|(i, &(a, _))| (format!("w{i}"), a)).collect(),
                total_tokens: words.iter().map(|w| w.0).sum(),
            };
            let base = GenreCounts {
                genre: Genre::Baseline,
                word_counts: words.iter().enumerate().map(|(i, &(_, b))| (format!("w{i}"), b)).collect(),
                total_tokens: words.iter().map(|w| w.1).sum(),
            };
            let a = compute_sstop(&scary, &base, lo).unwrap();
            let b = compute_sstop(&scary, &base, lo + step).unwrap();
            prop_assert!(b.entries.keys().all(|k| a.entries.contains_key(k)));
        }
    }
}
