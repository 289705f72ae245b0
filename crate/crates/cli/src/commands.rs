use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use scarystats::corpus::{self, Genre, StopwordSet, Story};
use scarystats::embed::{self, Distance, EmbeddingTable, PosLexicon, ProfileOptions};
use scarystats::fear::{self, BalanceMode, DatasetSplit, FearModel, FearScorer, LabelAliases, Regularization, TrainConfig};
use scarystats::lexicon::{self, SstopLexicon};
use scarystats::metrics::{self, EvalReport};
use scarystats::modes::{self, ModeComparison, ProfileKind, StoryProfile, DECILES, MIN_PROFILE_TOKENS};
use scarystats::topics::{self, LdaParams};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::workspace::{prerequisite, Run};

const STORIES_FILE: &str = "cache/stories.jsonl";
const LEXICON_FILE: &str = "sstop/lexicon.json";
const MODEL_FILE: &str = "fear/model.json";
const SPLIT_FILE: &str = "fear/split.json";

fn stopwords(cfg: &RunConfig, run: &mut Run) -> Result<StopwordSet, CliError> {
    match cfg.get("corpus.stopwords") {
        Some(_) => {
            let path = cfg.existing_path("corpus.stopwords")?;
            run.input(&path);
            Ok(StopwordSet::load(&path)?)
        }
        None => Ok(StopwordSet::english()),
    }
}

fn load_stories(cfg: &RunConfig, run: &mut Run) -> Result<Vec<Story>, CliError> {
    let path = prerequisite(cfg.out_dir().join(STORIES_FILE), "story cache", "ingest")?;
    run.input(&path);
    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
    let mut stories = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| CliError::io(&path, e))?;
        if !line.is_empty() {
            stories.push(serde_json::from_str(&line)?);
        }
    }
    Ok(stories)
}

fn scary_only(stories: Vec<Story>) -> Vec<Story> {
    stories.into_iter().filter(|s| s.genre == Genre::Scary).collect()
}

fn load_lexicon(cfg: &RunConfig, run: &mut Run) -> Result<SstopLexicon, CliError> {
    let path = prerequisite(cfg.out_dir().join(LEXICON_FILE), "SSToP lexicon", "sstop")?;
    run.input(&path);
    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(serde_json::from_reader(BufReader::new(file))?)
}

fn load_table(cfg: &RunConfig, run: &mut Run) -> Result<EmbeddingTable, CliError> {
    let path = cfg.existing_path("embed.path")?;
    run.input(&path);
    log::info!("loading embeddings from {}", path.display());
    Ok(embed::load_embeddings(&path)?)
}

#[derive(Serialize)]
struct Manifest {
    n_stories: usize,
    n_scary: usize,
    n_baseline: usize,
    n_raw: usize,
    n_removed: usize,
    n_short: usize,
    n_malformed_lines: usize,
    min_tokens: usize,
    sha256: String,
}

pub fn ingest(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("ingest", "cache", cfg)?;
    let scary = cfg.existing_paths("corpus.scary")?;
    if scary.is_empty() {
        return Err(CliError::Config("`corpus.scary` is not set".into()));
    }
    let baseline = cfg.existing_paths("corpus.baseline")?;
    let min_tokens: usize = cfg.parse_required("corpus.min_tokens")?;
    let stop = stopwords(cfg, &mut run)?;

    let mut raws = Vec::new();
    let mut malformed = 0;
    for (paths, genre) in [(&scary, Genre::Scary), (&baseline, Genre::Baseline)] {
        for path in paths {
            run.input(path);
            let loaded = corpus::load_corpus(path, genre)?;
            if loaded.skipped > 0 {
                log::warn!("{}: skipped {} malformed lines", path.display(), loaded.skipped);
            }
            malformed += loaded.skipped;
            raws.extend(loaded.stories);
        }
    }
    let cleaned = corpus::clean_corpus(&raws, &stop);
    let n_cleaned = cleaned.len();
    let stories = corpus::filter_min_length(cleaned, min_tokens);

    let mut body = Vec::new();
    for s in &stories {
        serde_json::to_writer(&mut body, s)?;
        body.push(b'\n');
    }
    let manifest = Manifest {
        n_stories: stories.len(),
        n_scary: stories.iter().filter(|s| s.genre == Genre::Scary).count(),
        n_baseline: stories.iter().filter(|s| s.genre == Genre::Baseline).count(),
        n_raw: raws.len(),
        n_removed: raws.len() - n_cleaned,
        n_short: n_cleaned - stories.len(),
        n_malformed_lines: malformed,
        min_tokens,
        sha256: hex::encode(Sha256::digest(&body)),
    };
    log::info!(
        "kept {} of {} stories ({} removed, {} shorter than {min_tokens} tokens)",
        manifest.n_stories,
        manifest.n_raw,
        manifest.n_removed,
        manifest.n_short
    );
    run.write("stories.jsonl", |w| w.write_all(&body).map_err(|e| CliError::io(STORIES_FILE, e)))?;
    run.write_json("manifest.json", &manifest)?;
    run.finish()
}

pub fn stats(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("stats", "stats", cfg)?;
    let stories = load_stories(cfg, &mut run)?;
    let stories: Vec<Story> = match cfg.require("stats.genre")? {
        "all" => stories,
        g => {
            let genre: Genre = g.parse().map_err(|_| CliError::Config(format!("`stats.genre` = `{g}`")))?;
            stories.into_iter().filter(|s| s.genre == genre).collect()
        }
    };
    let stats = corpus::compute_stats(&stories);
    run.write("stories_per_year.csv", |w| Ok(corpus::write_histogram(w, stats.stories_per_year.clone())?))?;
    run.write("stories_per_hour.csv", |w| Ok(corpus::write_histogram(w, stats.stories_per_hour_gmt.clone())?))?;
    run.write_json("stats.json", &stats)?;
    run.finish()
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

pub fn sstop(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("sstop", "sstop", cfg)?;
    let stories = load_stories(cfg, &mut run)?;
    let min_occurrence: u64 = cfg.parse_required("lexicon.min_occurrence")?;
    let (scary, baseline): (Vec<Story>, Vec<Story>) = stories.into_iter().partition(|s| s.genre == Genre::Scary);
    let scary_counts = lexicon::count_tokens(Genre::Scary, &scary)?;
    let baseline_counts = lexicon::count_tokens(Genre::Baseline, &baseline)?;
    let lex = lexicon::compute_sstop(&scary_counts, &baseline_counts, min_occurrence)?;
    log::info!("lexicon has {} words", lex.len());
    run.write("lexicon.csv", |w| Ok(lex.write_csv(w)?))?;
    run.write_json("lexicon.json", &lex)?;

    if cfg.parse_required::<bool>("lexicon.per_subreddit")? {
        for (sub, counts) in lexicon::count_tokens_by_subreddit(Genre::Baseline, &baseline)? {
            let lex = lexicon::compute_sstop(&scary_counts, &counts, min_occurrence)?;
            run.write(&format!("lexicon_vs_{}.csv", file_safe(&sub)), |w| Ok(lex.write_csv(w)?))?;
        }
    }
    run.finish()
}

pub fn similarity(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("similarity", "similarity", cfg)?;
    let lex = load_lexicon(cfg, &mut run)?;
    let pos_path = cfg.existing_path("embed.pos_lexicon")?;
    run.input(&pos_path);
    let pos = PosLexicon::load(&pos_path)?;
    let table = load_table(cfg, &mut run)?;
    let opts = ProfileOptions {
        n_bins: cfg.parse_required("embed.bins")?,
        distance: cfg.parse_required::<Distance>("embed.distance")?,
        log_domain: cfg.parse_required("embed.log_domain")?,
    };
    let profile = embed::similarity_profile(&lex, &table, &pos, opts)?;
    if !profile.human.skipped_synonyms.is_empty() {
        log::warn!("human synonyms without vectors: {:?}", profile.human.skipped_synonyms);
    }
    run.write("profile.csv", |w| Ok(profile.write_csv(w)?))?;
    run.write_json("human_vector.json", &profile.human)?;
    run.finish()
}

/// `fear,isear:fear,isear:terror`: plain labels count as fear for every
/// source, `source:label` entries only for that source.
fn label_aliases(cfg: &RunConfig) -> LabelAliases {
    let mut aliases = LabelAliases::default();
    let items = cfg.list("fear.aliases");
    if items.is_empty() {
        return aliases;
    }
    let mut global = HashSet::new();
    let mut per_source: HashMap<String, HashSet<String>> = HashMap::new();
    for item in items {
        match item.split_once(':') {
            Some((src, label)) => {
                per_source.entry(src.to_string()).or_default().insert(label.to_lowercase());
            }
            None => {
                global.insert(item.to_lowercase());
            }
        }
    }
    if !global.is_empty() {
        aliases.default = global;
    }
    aliases.per_source = per_source;
    aliases
}

fn train_config(cfg: &RunConfig) -> Result<TrainConfig, CliError> {
    Ok(TrainConfig {
        reg: cfg.parse_required::<Regularization>("fear.reg")?,
        lambda: cfg.parse("fear.lambda")?.unwrap_or(0.0),
        epochs: cfg.parse_required("fear.epochs")?,
        learning_rate: cfg.parse_required("fear.lr")?,
        tolerance: cfg.parse_required("fear.tolerance")?,
    })
}

#[derive(Serialize)]
struct TrainingReport {
    n_labeled: usize,
    n_train: usize,
    n_train_balanced: usize,
    n_validation: usize,
    n_test: usize,
    train_coverage: f64,
    lambda: f64,
    /// `(lambda, validation ROC-AUC)`; empty when lambda was fixed.
    lambda_scores: Vec<(f64, f64)>,
    epochs_run: usize,
    final_loss: Option<f64>,
}

pub fn fear_train(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("fear-train", "fear", cfg)?;
    let labeled_path = cfg.existing_path("fear.labeled")?;
    run.input(&labeled_path);
    let data = fear::load_labeled(&labeled_path, &label_aliases(cfg))?;
    let stop = stopwords(cfg, &mut run)?;
    let table = load_table(cfg, &mut run)?;
    let seed = cfg.seed()?;
    let mode: BalanceMode = cfg.parse_required("fear.balance")?;
    let train_cfg = train_config(cfg)?;

    let split = fear::split_dataset(&data, seed)?;
    let balanced = fear::balance(&split.train, mode, seed)?;
    let (train, train_coverage) = fear::featurize_all(&balanced, &table, &stop);
    if train_coverage < 0.5 {
        log::warn!("only {:.1}% of training sentences have a known token", 100.0 * train_coverage);
    }
    let (validation, _) = fear::featurize_all(&split.validation, &table, &stop);

    let (trained, lambda_scores) = if cfg.get("fear.lambda").is_some() {
        (fear::train_logistic(&train, &train_cfg)?, Vec::new())
    } else {
        let sel = fear::select_lambda(&train, &validation, &fear::LAMBDA_GRID, &train_cfg)?;
        (sel.model, sel.scores)
    };
    log::info!("trained with lambda = {}", trained.model.lambda);

    let report = TrainingReport {
        n_labeled: data.len(),
        n_train: split.train.len(),
        n_train_balanced: balanced.len(),
        n_validation: split.validation.len(),
        n_test: split.test.len(),
        train_coverage,
        lambda: trained.model.lambda,
        lambda_scores,
        epochs_run: trained.losses.len(),
        final_loss: trained.losses.last().copied(),
    };
    let json = trained.model.to_json()?;
    run.write("model.json", |w| w.write_all(json.as_bytes()).map_err(|e| CliError::io(MODEL_FILE, e)))?;
    run.write_json("split.json", &split)?;
    run.write_json("training.json", &report)?;
    run.finish()
}

#[derive(Serialize)]
struct EvalOutput {
    n_test: usize,
    n_test_fear: usize,
    logistic: EvalReport,
    majority: EvalReport,
}

pub fn fear_eval(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("fear-eval", "fear", cfg)?;
    let model_path = prerequisite(cfg.out_dir().join(MODEL_FILE), "fear model", "fear-train")?;
    let split_path = prerequisite(cfg.out_dir().join(SPLIT_FILE), "dataset split", "fear-train")?;
    run.input(&model_path);
    run.input(&split_path);
    let model = read_model(&model_path)?;
    let split: DatasetSplit = serde_json::from_reader(BufReader::new(
        File::open(&split_path).map_err(|e| CliError::io(&split_path, e))?,
    ))?;
    let stop = stopwords(cfg, &mut run)?;
    let table = load_table(cfg, &mut run)?;

    let logistic = fear::evaluate(&model, &split.test, &table, &stop)?;
    let train_fear = split.train.iter().filter(|s| s.label).count();
    let majority_is_fear = 2 * train_fear > split.train.len();
    let labels: Vec<bool> = split.test.iter().map(|s| s.label).collect();
    let constant = vec![if majority_is_fear { 1.0 } else { 0.0 }; labels.len()];
    let majority = metrics::evaluate_scores(&constant, &labels)?;

    let out = EvalOutput {
        n_test: labels.len(),
        n_test_fear: labels.iter().filter(|&&l| l).count(),
        logistic,
        majority,
    };
    run.write_json("eval.json", &out)?;
    run.write("eval.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        let io = |e: csv::Error| CliError::Core(e.into());
        csv.write_record(["model", "accuracy", "f1_macro", "roc_auc"]).map_err(io)?;
        for (name, r) in [("logistic", &out.logistic), ("majority", &out.majority)] {
            csv.write_record([
                name.to_string(),
                r.accuracy.to_string(),
                r.f1_macro.to_string(),
                r.roc_auc.to_string(),
            ])
            .map_err(io)?;
        }
        csv.flush().map_err(|e| CliError::io("eval.csv", e))
    })?;
    run.finish()
}

fn read_model(path: &PathBuf) -> Result<FearModel, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(FearModel::from_json(&text)?)
}

#[derive(Serialize, Deserialize)]
struct ModesSummary {
    n: usize,
    n_skipped_short: usize,
    histograms: HashMap<String, [usize; DECILES]>,
    degenerate: HashMap<String, usize>,
    singular_values: HashMap<String, [f64; DECILES]>,
    comparison: ModeComparison,
}

pub fn modes(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("modes", "modes", cfg)?;
    let model_path = cfg.out_dir().join(MODEL_FILE);
    let external;
    let model;
    let table;
    let embedding_scorer;
    let scorer: &dyn FearScorer = if cfg.get("fear.external_scores").is_some() {
        let path = cfg.existing_path("fear.external_scores")?;
        run.input(&path);
        external = fear::ExternalScores::load(&path)?;
        &external
    } else if model_path.is_file() {
        run.input(&model_path);
        model = read_model(&model_path)?;
        table = load_table(cfg, &mut run)?;
        embedding_scorer = fear::EmbeddingScorer {
            model: &model,
            table: &table,
        };
        &embedding_scorer
    } else {
        return Err(CliError::MissingPrerequisite {
            what: "fear model (or a `fear.external_scores` file)".into(),
            path: model_path,
            command: "fear-train",
        });
    };
    let lex = load_lexicon(cfg, &mut run)?;

    let mut stories = scary_only(load_stories(cfg, &mut run)?);
    if let Some(sub) = cfg.get("modes.subreddit") {
        stories.retain(|s| s.subreddit.eq_ignore_ascii_case(sub));
    }
    let before = stories.len();
    stories.retain(|s| s.len() >= MIN_PROFILE_TOKENS);
    let n_skipped_short = before - stories.len();
    if n_skipped_short > 0 {
        log::warn!("skipped {n_skipped_short} stories shorter than {MIN_PROFILE_TOKENS} tokens");
    }

    let fear_profiles = modes::sample_profiles(&stories, ProfileKind::Fear, Some(scorer), None)?;
    let sstop_profiles = modes::sample_profiles(&stories, ProfileKind::Sstop, None, Some(&lex))?;
    let all: Vec<StoryProfile> = fear_profiles.iter().chain(&sstop_profiles).cloned().collect();
    run.write("profiles.csv", |w| Ok(modes::write_profiles(w, &all)?))?;

    let mut histograms = HashMap::new();
    let mut degenerate = HashMap::new();
    let mut singular_values = HashMap::new();
    let mut assignments = Vec::new();
    for (kind, profiles) in [(ProfileKind::Fear, &fear_profiles), (ProfileKind::Sstop, &sstop_profiles)] {
        let ids = profiles.iter().map(|p| p.story_id.clone()).collect();
        let rows: Vec<[f64; DECILES]> = profiles.iter().map(|p| p.values).collect();
        let decomp = modes::svd_decompose(ids, &rows)?;
        let assigned = modes::assign_modes(&decomp);
        let name = kind.as_str();
        run.write(&format!("modes_{name}.csv"), |w| Ok(modes::write_modes(w, &decomp)?))?;
        run.write(&format!("assignments_{name}.csv"), |w| Ok(modes::write_assignments(w, &assigned)?))?;
        histograms.insert(name.to_string(), modes::mode_histogram(&assigned));
        degenerate.insert(name.to_string(), assigned.iter().filter(|a| a.degenerate).count());
        singular_values.insert(name.to_string(), decomp.singular_values);
        assignments.push(assigned);
    }
    let comparison = modes::compare_assignments(&assignments[0], &assignments[1]);
    match &comparison.dominant {
        Some(s) => log::info!("dominant-mode spearman rho = {:.4} (p = {:.3e}, n = {})", s.rho, s.p_value, s.n),
        None => log::warn!("dominant-mode spearman undefined (constant assignments)"),
    }
    let summary = ModesSummary {
        n: stories.len(),
        n_skipped_short,
        histograms,
        degenerate,
        singular_values,
        comparison,
    };
    run.write_json("summary.json", &summary)?;
    run.finish()
}

pub fn topics(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("topics", "topics", cfg)?;
    let stories = scary_only(load_stories(cfg, &mut run)?);
    let k: usize = cfg.parse_required("topics.k")?;
    let params = LdaParams {
        k,
        alpha: cfg.parse("topics.alpha")?.unwrap_or(5.0 / k.max(1) as f64),
        beta: cfg.parse_required("topics.beta")?,
        iterations: cfg.parse_required("topics.iterations")?,
    };
    let top_m: usize = cfg.parse_required("topics.top_words")?;
    let docs = topics::stem_stories(&stories);
    log::info!("fitting LDA on {} stories ({} sweeps)", docs.len(), params.iterations);
    let model = topics::lda_fit(&docs, params, cfg.seed()?)?;
    let trend = topics::topic_trend(&model, &stories, top_m)?;
    run.write("topics.csv", |w| Ok(topics::write_topics(w, &trend)?))?;
    run.write("trend.csv", |w| Ok(topics::write_trend(w, &trend)?))?;
    run.finish()
}

pub fn disease(cfg: &RunConfig) -> Result<(), CliError> {
    let mut run = Run::start("disease", "disease", cfg)?;
    let stories = scary_only(load_stories(cfg, &mut run)?);
    let stems = cfg.list("disease.stems");
    if stems.is_empty() {
        return Err(CliError::Config("`disease.stems` is empty".into()));
    }
    let stems: Vec<&str> = stems.iter().map(String::as_str).collect();
    let months = topics::disease_trend(&stories, &stems);
    run.write("disease.csv", |w| Ok(topics::write_disease(w, &months)?))?;
    run.finish()
}
