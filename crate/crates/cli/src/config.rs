//! Run configuration: a `key = value` file with dotted keys, overridden by
//! command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

/// Every recognized key with its default, if any.
const KEYS: &[(&str, Option<&str>)] = &[
    ("corpus.scary", None),
    ("corpus.baseline", None),
    ("corpus.stopwords", None),
    ("corpus.min_tokens", Some("500")),
    ("embed.path", None),
    ("embed.pos_lexicon", None),
    ("embed.bins", Some("20")),
    ("embed.distance", Some("euclidean")),
    ("embed.log_domain", Some("false")),
    ("lexicon.min_occurrence", Some("100")),
    ("lexicon.per_subreddit", Some("false")),
    ("fear.labeled", None),
    ("fear.aliases", None),
    ("fear.reg", Some("l2")),
    ("fear.lambda", None),
    ("fear.epochs", Some("500")),
    ("fear.lr", Some("0.1")),
    ("fear.tolerance", Some("1e-9")),
    ("fear.balance", Some("down")),
    ("fear.external_scores", None),
    ("modes.subreddit", None),
    ("topics.k", Some("10")),
    ("topics.alpha", None),
    ("topics.beta", Some("0.01")),
    ("topics.iterations", Some("1000")),
    ("topics.top_words", Some("10")),
    ("disease.stems", Some("lockdown,infect,viru,diseas")),
    ("stats.genre", Some("scary")),
    ("run.seed", Some("0")),
    ("run.out_dir", Some("out")),
    ("run.threads", None),
];

/// Keys whose values are file paths (comma-separated lists allowed).
const PATH_KEYS: &[&str] = &[
    "corpus.scary",
    "corpus.baseline",
    "corpus.stopwords",
    "embed.path",
    "embed.pos_lexicon",
    "fear.labeled",
    "fear.external_scores",
    "run.out_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> Result<(), CliError> {
    if KEYS.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown config key `{key}`")))
    }
}

fn split_assignment(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

impl RunConfig {
    pub fn defaults() -> Self {
        let values = KEYS
            .iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v.to_string())))
            .collect();
        RunConfig { values }
    }

    /// Parses a config file. Relative paths are resolved against the file's
    /// directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut cfg = RunConfig::defaults();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = split_assignment(line).ok_or_else(|| {
                CliError::Config(format!("{}:{}: expected `key = value`", path.display(), i + 1))
            })?;
            known(key).map_err(|e| CliError::Config(format!("{}:{}: {e}", path.display(), i + 1)))?;
            let value = if PATH_KEYS.contains(&key) {
                resolve_paths(base, value)
            } else {
                value.to_string()
            };
            cfg.values.insert(key.to_string(), value);
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        known(key)?;
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn apply(&mut self, assignment: &str) -> Result<(), CliError> {
        let (k, v) = split_assignment(assignment)
            .ok_or_else(|| CliError::Config(format!("expected key=value, got `{assignment}`")))?;
        self.set(k, v)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(known(key).is_ok(), "{key}");
        self.values.get(key).map(String::as_str).filter(|v| !v.is_empty())
    }

    pub fn require(&self, key: &str) -> Result<&str, CliError> {
        self.get(key)
            .ok_or_else(|| CliError::Config(format!("`{key}` is not set")))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|e| CliError::Config(format!("`{key}` = `{v}`: {e}")))
            })
            .transpose()
    }

    pub fn parse_required<T: FromStr>(&self, key: &str) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        self.parse(key)?
            .ok_or_else(|| CliError::Config(format!("`{key}` is not set")))
    }

    /// Comma-separated list, empty items dropped.
    pub fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            })
            .unwrap_or_default()
    }

    /// An input file that must exist.
    pub fn existing_path(&self, key: &str) -> Result<PathBuf, CliError> {
        let path = PathBuf::from(self.require(key)?);
        check_exists(key, &path)?;
        Ok(path)
    }

    /// A list of input files that must all exist.
    pub fn existing_paths(&self, key: &str) -> Result<Vec<PathBuf>, CliError> {
        let paths: Vec<PathBuf> = self.list(key).into_iter().map(PathBuf::from).collect();
        for p in &paths {
            check_exists(key, p)?;
        }
        Ok(paths)
    }

    pub fn out_dir(&self) -> PathBuf {
        PathBuf::from(self.get("run.out_dir").unwrap_or("out"))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.parse_required("run.seed")
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }
}

fn check_exists(key: &str, path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("`{key}`: {} does not exist", path.display())))
    }
}

fn resolve_paths(base: &Path, value: &str) -> String {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|p| {
            let p = Path::new(p);
            if p.is_absolute() {
                p.display().to_string()
            } else {
                base.join(p).display().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}
