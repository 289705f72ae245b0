//! Story modes: decile profiles of fear and SSToP, stacked into an N x 10
//! matrix `M` and decomposed as `M = W U`, where the rows of `U` are the
//! modes (right singular vectors) and `W = V Sigma` holds each story's
//! coefficients.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::Story;
use crate::error::{Error, Result};
use crate::fear::FearScorer;
use crate::lexicon::{score_window, SstopLexicon};
use crate::metrics::average_ranks;

/// Sample points per story: 0%, 10%, ..., 90%.
pub const DECILES: usize = 10;
/// Tokens averaged after each SSToP sample point.
pub const SSTOP_WINDOW: usize = 50;
pub const MIN_PROFILE_TOKENS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Fear,
    Sstop,
}

impl ProfileKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileKind::Fear => "fear",
            ProfileKind::Sstop => "sstop",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoryProfile {
    pub story_id: String,
    pub kind: ProfileKind,
    pub values: [f64; DECILES],
}

/// Token index of decile `d` in a story of `n_tokens` tokens: `floor(d/10 * n)`.
pub fn decile_token(d: usize, n_tokens: usize) -> usize {
    d * n_tokens / DECILES
}

/// Sentence containing token `t`, else the first sentence starting after
/// it, else the last sentence.
fn sentence_at(story: &Story, t: usize) -> usize {
    story
        .sentences
        .iter()
        .position(|r| r.contains(&t) || r.start > t)
        .unwrap_or(story.sentences.len() - 1)
}

pub fn sample_fear_profile(story: &Story, scorer: &dyn FearScorer) -> Result<StoryProfile> {
    if story.sentences.is_empty() || story.tokens.is_empty() {
        return Err(Error::invalid(format!("story {} has no sentences", story.id)));
    }
    let mut values = [0.0; DECILES];
    for (d, v) in values.iter_mut().enumerate() {
        let p = scorer.score(story, sentence_at(story, decile_token(d, story.len())))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("fear score {p} outside [0, 1]")));
        }
        *v = p;
    }
    Ok(StoryProfile {
        story_id: story.id.clone(),
        kind: ProfileKind::Fear,
        values,
    })
}

pub fn sample_sstop_profile(story: &Story, lexicon: &SstopLexicon) -> Result<StoryProfile> {
    if story.len() < MIN_PROFILE_TOKENS {
        return Err(Error::invalid(format!(
            "story {} has {} tokens, need {MIN_PROFILE_TOKENS}",
            story.id,
            story.len()
        )));
    }
    let mut values = [0.0; DECILES];
    for (d, v) in values.iter_mut().enumerate() {
        *v = score_window(&story.tokens, decile_token(d, story.len()), SSTOP_WINDOW, lexicon)?;
    }
    Ok(StoryProfile {
        story_id: story.id.clone(),
        kind: ProfileKind::Sstop,
        values,
    })
}

pub fn sample_profiles(
    stories: &[Story],
    kind: ProfileKind,
    scorer: Option<&dyn FearScorer>,
    lexicon: Option<&SstopLexicon>,
) -> Result<Vec<StoryProfile>> {
    stories
        .par_iter()
        .map(|s| match kind {
            ProfileKind::Fear => {
                sample_fear_profile(s, scorer.ok_or_else(|| Error::invalid("fear profiles need a scorer"))?)
            }
            ProfileKind::Sstop => {
                sample_sstop_profile(s, lexicon.ok_or_else(|| Error::invalid("SSToP profiles need a lexicon"))?)
            }
        })
        .collect()
}

pub fn write_profiles<W: Write>(out: W, profiles: &[StoryProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["story_id".to_string(), "kind".to_string()];
    header.extend((0..DECILES).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for p in profiles {
        let mut rec = vec![p.story_id.clone(), p.kind.as_str().to_string()];
        rec.extend(p.values.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<profiles>", e))?;
    Ok(())
}

type Row = [f64; DECILES];

/// Thin SVD of an N x 10 profile matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeDecomposition {
    /// Row k is mode k; rows are orthonormal.
    pub modes: Vec<Row>,
    /// N x 10 coefficients, one row per story.
    pub coefficients: Vec<Row>,
    /// Non-increasing.
    pub singular_values: Row,
    pub story_ids: Vec<String>,
}

impl ModeDecomposition {
    /// `W U`, row by row.
    pub fn reconstruct(&self) -> Vec<Row> {
        self.coefficients
            .iter()
            .map(|w| {
                let mut r = [0.0; DECILES];
                for (k, mode) in self.modes.iter().enumerate() {
                    for j in 0..DECILES {
                        r[j] += w[k] * mode[j];
                    }
                }
                r
            })
            .collect()
    }
}

const MAX_SWEEPS: usize = 100;

/// One-sided Jacobi SVD. Columns of a working copy of `M` are rotated
/// pairwise until mutually orthogonal; the accumulated rotation gives the
/// modes and the rotated columns give `W`. No mean-centering is applied.
/// Each mode is sign-fixed so its largest-magnitude entry is positive.
pub fn svd_decompose(story_ids: Vec<String>, matrix: &[Row]) -> Result<ModeDecomposition> {
    let n = matrix.len();
    if n < DECILES {
        return Err(Error::invalid(format!("need at least {DECILES} stories, got {n}")));
    }
    if story_ids.len() != n {
        return Err(Error::invalid("story id count does not match matrix rows"));
    }
    if matrix.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }

    // column-major working copy
    let mut cols: Vec<Vec<f64>> = (0..DECILES).map(|j| matrix.iter().map(|r| r[j]).collect()).collect();
    let mut v = [[0.0; DECILES]; DECILES];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..DECILES - 1 {
            for q in p + 1..DECILES {
                let (alpha, beta, gamma) = cols[p].iter().zip(&cols[q]).fold((0.0, 0.0, 0.0), |(a, b, g), (x, y)| {
                    (a + x * x, b + y * y, g + x * y)
                });
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                for (x, y) in left[p].iter_mut().zip(right[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
                for row in v.iter_mut() {
                    let (xp, yq) = (row[p], row[q]);
                    row[p] = c * xp - s * yq;
                    row[q] = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    let mut order: Vec<usize> = (0..DECILES).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut modes = vec![[0.0; DECILES]; DECILES];
    let mut coefficients = vec![[0.0; DECILES]; n];
    let mut singular_values = [0.0; DECILES];
    for (k, &src) in order.iter().enumerate() {
        let mut mode: Row = std::array::from_fn(|i| v[i][src]);
        let pivot = mode
            .iter()
            .copied()
            .reduce(|a, b| if b.abs() > a.abs() { b } else { a })
            .unwrap_or(0.0);
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        mode.iter_mut().for_each(|x| *x *= sign);
        modes[k] = mode;
        for (row, x) in coefficients.iter_mut().zip(&cols[src]) {
            row[k] = sign * x;
        }
        singular_values[k] = norms[src];
    }
    Ok(ModeDecomposition {
        modes,
        coefficients,
        singular_values,
        story_ids,
    })
}

/// Index of the largest-magnitude coefficient (lowest index on ties), and
/// whether the row was all zero (then mode 0 is returned).
pub fn dominant_mode(row: &[f64]) -> (usize, bool) {
    let mut best = 0;
    for (i, x) in row.iter().enumerate() {
        if x.abs() > row[best].abs() {
            best = i;
        }
    }
    let degenerate = row.iter().all(|&x| x == 0.0);
    (best, degenerate)
}

/// Divides each row by the magnitude of its largest-magnitude entry; zero
/// rows are left as they are.
pub fn normalize_rows(rows: &[Row]) -> Vec<Row> {
    rows.iter()
        .map(|r| {
            let m = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if m == 0.0 {
                *r
            } else {
                r.map(|x| x / m)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAssignment {
    pub story_id: String,
    pub dominant_mode: usize,
    pub normalized_coeffs: Row,
    pub degenerate: bool,
}

pub fn assign_modes(decomp: &ModeDecomposition) -> Vec<ModeAssignment> {
    normalize_rows(&decomp.coefficients)
        .into_iter()
        .zip(&decomp.story_ids)
        .map(|(normalized_coeffs, id)| {
            let (dominant_mode, degenerate) = dominant_mode(&normalized_coeffs);
            ModeAssignment {
                story_id: id.clone(),
                dominant_mode,
                normalized_coeffs,
                degenerate,
            }
        })
        .collect()
}

pub fn mode_histogram(assignments: &[ModeAssignment]) -> [usize; DECILES] {
    let mut h = [0; DECILES];
    for a in assignments {
        h[a.dominant_mode] += 1;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spearman {
    pub rho: f64,
    /// Two-sided, from the t approximation with n - 2 degrees of freedom.
    pub p_value: f64,
    pub n: usize,
}

/// Spearman's rho as the Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() {
        return Err(Error::invalid("spearman inputs differ in length"));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::invalid("spearman needs at least two points"));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::invalid("NaN in spearman input"));
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        let (da, db) = (a - mean, b - mean);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input has no rank variance".into()));
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Spearman {
        rho,
        p_value: t_test_p_value(rho, n),
        n,
    })
}

fn t_test_p_value(rho: f64, n: usize) -> f64 {
    if rho.abs() >= 1.0 {
        return 0.0;
    }
    if n <= 2 {
        return 1.0;
    }
    let df = (n - 2) as f64;
    let t = rho * (df / (1.0 - rho * rho)).sqrt();
    match StudentsT::new(0.0, 1.0, df) {
        Ok(dist) => (2.0 * dist.sf(t.abs())).min(1.0),
        Err(_) => f64::NAN,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub n: usize,
    /// Correlation of the two dominant-mode indices per story.
    pub dominant: Option<Spearman>,
    /// Per mode k, correlation of the normalized k-th coefficients; `None`
    /// where either side is constant.
    pub coefficients: Vec<Option<Spearman>>,
}

/// Correlates fear and SSToP mode assignments over the stories present in both.
pub fn compare_assignments(fear: &[ModeAssignment], sstop: &[ModeAssignment]) -> ModeComparison {
    let by_id: HashMap<&str, &ModeAssignment> = sstop.iter().map(|a| (a.story_id.as_str(), a)).collect();
    let pairs: Vec<(&ModeAssignment, &ModeAssignment)> = fear
        .iter()
        .filter_map(|f| by_id.get(f.story_id.as_str()).map(|s| (f, *s)))
        .collect();
    let fx: Vec<f64> = pairs.iter().map(|(f, _)| f.dominant_mode as f64).collect();
    let sx: Vec<f64> = pairs.iter().map(|(_, s)| s.dominant_mode as f64).collect();
    let coefficients = (0..DECILES)
        .map(|k| {
            let a: Vec<f64> = pairs.iter().map(|(f, _)| f.normalized_coeffs[k]).collect();
            let b: Vec<f64> = pairs.iter().map(|(_, s)| s.normalized_coeffs[k]).collect();
            spearman(&a, &b).ok()
        })
        .collect();
    ModeComparison {
        n: pairs.len(),
        dominant: spearman(&fx, &sx).ok(),
        coefficients,
    }
}

/// `mode,singular_value,u0..u9`, one row per mode.
pub fn write_modes<W: Write>(out: W, decomp: &ModeDecomposition) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["mode".to_string(), "singular_value".to_string()];
    header.extend((0..DECILES).map(|i| format!("u{i}")));
    w.write_record(&header)?;
    for (k, mode) in decomp.modes.iter().enumerate() {
        let mut rec = vec![k.to_string(), decomp.singular_values[k].to_string()];
        rec.extend(mode.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<modes>", e))?;
    Ok(())
}

/// `story_id,dominant_mode,c0..c9` with normalized coefficients.
pub fn write_assignments<W: Write>(out: W, assignments: &[ModeAssignment]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["story_id".to_string(), "dominant_mode".to_string()];
    header.extend((0..DECILES).map(|i| format!("c{i}")));
    w.write_record(&header)?;
    for a in assignments {
        let mut rec = vec![a.story_id.clone(), a.dominant_mode.to_string()];
        rec.extend(a.normalized_coeffs.iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<assignments>", e))?;
    Ok(())
}
