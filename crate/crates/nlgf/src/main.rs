//! nlgf: stage-oriented CLI for the geo-focus pipeline.
//!
//! Each subcommand reads and writes stage files (JSONL/CSV) so expensive
//! backend calls are checkpointed and corpus runs are restartable.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use nlgf::classifier::{self, Hyperparams, LevelModel};
use nlgf::config::{BackendKind, Config};
use nlgf::corpus::{
    cohens_kappa, krippendorff_alpha, load_corpus, AlphaDistance, AnnotationSet, AnnotationValue,
    Article, GeoFocusLevel,
};
use nlgf::disambiguation::{
    batch_disambiguate, DisambiguatedToponym, DisambiguationCache, DisambiguationRequest,
    RetryPolicy,
};
use nlgf::evaluation::{
    disambiguation_benchmark, foci_report, level_report, ClassMetrics, GoldToponym,
};
use nlgf::features::{
    extract_features, feature_correlation_check, group_toponyms, FeatureVector, ResolvedMention,
    CORRELATION_THRESHOLD, FEATURE_NAMES,
};
use nlgf::gazetteer::GeoPoint;
use nlgf::geofoci::{focus_scores, tune_alpha, Pipeline, ScoredArticle};
use nlgf::igl::{assign_igl, Igl};
use nlgf::recognition::{
    recognize, DictionaryRecognizer, EntityClass, SplitConfig, ToponymMention,
};
use nlgf::us_states::state_display_name;

#[derive(Parser)]
#[command(name = "nlgf", version, about = "Geo-focus levels and geo-foci for news articles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BackendFlag {
    Stub,
    Http,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum IrrTask {
    Level,
    Foci,
}

#[derive(Subcommand)]
enum Command {
    /// Extract toponym mentions per article to JSONL
    Recognize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Disambiguate recognized mentions and assign IGLs
    Disambiguate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        backend: Option<BackendFlag>,
        #[arg(long)]
        max_in_flight: Option<usize>,
    },
    /// Emit the 15-column feature CSV from disambiguated toponyms
    Featurize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the level classifier from a feature CSV
    Train {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out-model")]
        out_model: PathBuf,
        /// Run the full hyperparameter grid search (5-fold CV)
        #[arg(long)]
        grid: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full pipeline: corpus in, GeoFocusResult JSONL out
    Analyze {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        backend: Option<BackendFlag>,
        #[arg(long)]
        max_in_flight: Option<usize>,
    },
    /// Score analyze results against gold labels
    Evaluate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// Write the 5x5 confusion matrix as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Coordinate-threshold disambiguation benchmark
    Benchmark {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        threshold_km: Option<f64>,
    },
    /// Sweep the focus-score threshold on a labeled dev corpus
    TuneAlpha {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Labeled dev corpus (runs the pipeline; requires --config)
        #[arg(long = "in")]
        input: Option<PathBuf>,
        /// Precomputed candidate scores + gold foci JSONL
        #[arg(long)]
        scored: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Inter-rater reliability: Cohen's kappa and Krippendorff's alpha
    Irr {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        task: IrrTask,
    },
}

/// Stage record after recognition. Gold labels ride along so later stages
/// lose nothing.
#[derive(Debug, Serialize, Deserialize)]
struct MentionRecord {
    article_id: String,
    publisher_city: String,
    publisher_state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold_level: Option<GeoFocusLevel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold_foci: Option<BTreeSet<String>>,
    mentions: Vec<ToponymMention>,
    warnings: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResolvedToponymRecord {
    #[serde(flatten)]
    toponym: DisambiguatedToponym,
    igl: Igl,
}

/// Stage record after disambiguation + IGL assignment.
#[derive(Debug, Serialize, Deserialize)]
struct ResolvedRecord {
    article_id: String,
    publisher_city: String,
    publisher_state: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold_level: Option<GeoFocusLevel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gold_foci: Option<BTreeSet<String>>,
    toponyms: Vec<ResolvedToponymRecord>,
    warnings: Vec<String>,
}

/// Input line for `tune-alpha --scored`.
#[derive(Debug, Serialize, Deserialize)]
struct ScoredRecord {
    article_id: String,
    candidates: Vec<nlgf::geofoci::FocusScore>,
    gold_foci: BTreeSet<String>,
}

/// Input line for `benchmark`.
#[derive(Debug, Deserialize)]
struct BenchmarkGoldRecord {
    name: String,
    class: String,
    lat: f64,
    lon: f64,
}

#[derive(Debug, Deserialize)]
struct BenchmarkPredRecord {
    lat: Option<f64>,
    lon: Option<f64>,
}

/// Error classification for exit codes: 1 usage, 2 data, 3 backend.
#[derive(Debug)]
enum Fatal {
    Usage(String),
    Data(String),
    Backend(String),
}

impl std::fmt::Display for Fatal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Fatal::Usage(m) | Fatal::Data(m) | Fatal::Backend(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for Fatal {}

fn usage<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow::Error::new(Fatal::Usage(e.to_string()))
}

fn data_err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow::Error::new(Fatal::Data(e.to_string()))
}

fn backend_err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow::Error::new(Fatal::Backend(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are successful outcomes; everything else is a
            // usage error.
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Fatal>() {
                Some(Fatal::Usage(_)) => 1,
                Some(Fatal::Backend(_)) => 3,
                Some(Fatal::Data(_)) | None => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Recognize { config, input, out } => cmd_recognize(&config, &input, &out),
        Command::Disambiguate {
            config,
            input,
            out,
            backend,
            max_in_flight,
        } => cmd_disambiguate(&config, &input, &out, backend, max_in_flight),
        Command::Featurize { input, out } => cmd_featurize(&input, &out),
        Command::Train {
            input,
            out_model,
            grid,
            seed,
        } => cmd_train(&input, &out_model, grid, seed),
        Command::Analyze {
            config,
            input,
            out,
            model,
            alpha,
            backend,
            max_in_flight,
        } => cmd_analyze(&config, &input, &out, model, alpha, backend, max_in_flight),
        Command::Evaluate { input, gold, out } => cmd_evaluate(&input, &gold, out.as_deref()),
        Command::Benchmark {
            gold,
            input,
            threshold_km,
        } => cmd_benchmark(&gold, &input, threshold_km),
        Command::TuneAlpha {
            config,
            input,
            scored,
            model,
        } => cmd_tune_alpha(config.as_deref(), input.as_deref(), scored.as_deref(), model),
        Command::Irr { input, task } => cmd_irr(&input, task),
    }
}

fn load_config(path: &Path) -> Result<Config> {
    Config::load(path).map_err(usage)
}

fn apply_backend_flag(config: &mut Config, flag: Option<BackendFlag>) {
    if let Some(flag) = flag {
        config.backend = match flag {
            BackendFlag::Stub => BackendKind::Stub,
            BackendFlag::Http => BackendKind::Http,
        };
    }
}

fn read_corpus(path: &Path) -> Result<Vec<Article>> {
    let (articles, line_errors) = load_corpus(path).map_err(data_err)?;
    for e in &line_errors {
        eprintln!("warning: {}:{}: {}", path.display(), e.line, e.message);
    }
    if articles.is_empty() {
        return Err(data_err(format!("{}: no valid articles", path.display())));
    }
    Ok(articles)
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = std::fs::File::open(path)
        .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(data_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let value: T = serde_json::from_str(&line)
            .map_err(|e| data_err(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        out.push(value);
    }
    if out.is_empty() {
        return Err(data_err(format!("{}: empty input", path.display())));
    }
    Ok(out)
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    for r in records {
        serde_json::to_writer(&mut file, r)?;
        writeln!(file)?;
    }
    Ok(())
}

fn build_recognizer(config: &Config) -> Result<DictionaryRecognizer> {
    let content = std::fs::read_to_string(&config.aliases)
        .map_err(|e| usage(format!("cannot read {}: {e}", config.aliases.display())))?;
    let entries = DictionaryRecognizer::parse_alias_table(&content).map_err(data_err)?;
    Ok(DictionaryRecognizer::new(&entries))
}

fn open_cache(config: &Config) -> Result<DisambiguationCache> {
    match &config.cache {
        Some(path) => DisambiguationCache::open(path).map_err(data_err),
        None => Ok(DisambiguationCache::in_memory()),
    }
}

fn cmd_recognize(config_path: &Path, input: &Path, out: &Path) -> Result<()> {
    let config = load_config(config_path)?;
    let recognizer = build_recognizer(&config)?;
    let split = SplitConfig::default();
    let articles = read_corpus(input)?;
    let records: Vec<MentionRecord> = articles
        .iter()
        .map(|article| {
            let (mentions, warnings) = recognize(article, &recognizer, &split);
            MentionRecord {
                article_id: article.id.clone(),
                publisher_city: article.publisher_city.clone(),
                publisher_state: article.publisher_state.clone(),
                gold_level: article.gold_level,
                gold_foci: article.gold_foci.clone(),
                mentions,
                warnings,
            }
        })
        .collect();
    write_jsonl(out, &records)?;
    let total: usize = records.iter().map(|r| r.mentions.len()).sum();
    println!("recognized {total} mentions across {} articles -> {}", records.len(), out.display());
    Ok(())
}

fn cmd_disambiguate(
    config_path: &Path,
    input: &Path,
    out: &Path,
    backend_flag: Option<BackendFlag>,
    max_in_flight: Option<usize>,
) -> Result<()> {
    let mut config = load_config(config_path)?;
    apply_backend_flag(&mut config, backend_flag);
    config.validate().map_err(usage)?;
    let gazetteer = config.load_gazetteer().map_err(data_err)?;
    for w in &gazetteer.warnings {
        eprintln!("warning: {w}");
    }
    let backend = config.build_backend().map_err(backend_err)?;
    let cache = open_cache(&config)?;
    let policy = RetryPolicy::default();
    let in_flight = max_in_flight.unwrap_or(config.max_in_flight);
    let records: Vec<MentionRecord> = read_jsonl(input)?;
    let mut out_records = Vec::with_capacity(records.len());
    for rec in records {
        let display_state = state_display_name(&rec.publisher_state)
            .map(str::to_string)
            .unwrap_or_else(|| rec.publisher_state.clone());
        let requests: Vec<DisambiguationRequest> = rec
            .mentions
            .iter()
            .map(|m| DisambiguationRequest {
                mention: m.clone(),
                publisher_city: rec.publisher_city.clone(),
                publisher_state: display_state.clone(),
            })
            .collect();
        let outcomes =
            batch_disambiguate(&requests, backend.as_ref(), &gazetteer, &cache, in_flight, &policy);
        let mut warnings = rec.warnings;
        let mut toponyms = Vec::new();
        for (mention, outcome) in rec.mentions.iter().zip(outcomes) {
            match outcome {
                Ok(t) if t.verified => match assign_igl(&t, &rec.publisher_state) {
                    Ok(igl) => toponyms.push(ResolvedToponymRecord { toponym: t, igl }),
                    Err(e) => warnings.push(format!("'{}': {e}", mention.surface)),
                },
                Ok(_) => warnings.push(format!(
                    "'{}': coordinate failed polygon verification",
                    mention.surface
                )),
                Err(e) => warnings.push(format!("'{}': {e}", mention.surface)),
            }
        }
        out_records.push(ResolvedRecord {
            article_id: rec.article_id,
            publisher_city: rec.publisher_city,
            publisher_state: rec.publisher_state,
            gold_level: rec.gold_level,
            gold_foci: rec.gold_foci,
            toponyms,
            warnings,
        });
    }
    write_jsonl(out, &out_records)?;
    let total: usize = out_records.iter().map(|r| r.toponyms.len()).sum();
    println!(
        "disambiguated {total} verified toponyms across {} articles -> {}",
        out_records.len(),
        out.display()
    );
    Ok(())
}

fn resolved_record_features(rec: &ResolvedRecord) -> FeatureVector {
    let resolved: Vec<ResolvedMention> = rec
        .toponyms
        .iter()
        .map(|t| ResolvedMention {
            mention: t.toponym.mention.clone(),
            toponym: t.toponym.clone(),
            igl: t.igl,
        })
        .collect();
    extract_features(&group_toponyms(resolved))
}

fn cmd_featurize(input: &Path, out: &Path) -> Result<()> {
    let records: Vec<ResolvedRecord> = read_jsonl(input)?;
    let mut writer = csv::Writer::from_path(out)
        .with_context(|| format!("cannot create {}", out.display()))?;
    let mut header = vec!["article_id"];
    header.extend(FEATURE_NAMES);
    header.push("gold_level");
    writer.write_record(&header)?;
    for rec in &records {
        let vector = resolved_record_features(rec);
        let mut row = vec![rec.article_id.clone()];
        row.extend(vector.as_array().iter().map(|v| v.to_string()));
        row.push(rec.gold_level.map(|l| l.as_str().to_string()).unwrap_or_default());
        writer.write_record(&row)?;
    }
    writer.flush()?;
    println!("featurized {} articles -> {}", records.len(), out.display());
    Ok(())
}

fn read_feature_csv(path: &Path) -> Result<Vec<(FeatureVector, GeoFocusLevel)>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| usage(format!("cannot open {}: {e}", path.display())))?;
    let headers = reader.headers().map_err(data_err)?.clone();
    let expected: Vec<&str> = std::iter::once("article_id")
        .chain(FEATURE_NAMES)
        .chain(std::iter::once("gold_level"))
        .collect();
    let actual: Vec<&str> = headers.iter().collect();
    if actual != expected {
        return Err(data_err(format!(
            "{}: unexpected header {actual:?}",
            path.display()
        )));
    }
    let mut data = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(data_err)?;
        let mut values = [0u32; 15];
        for (j, v) in values.iter_mut().enumerate() {
            *v = row[j + 1]
                .parse()
                .map_err(|e| data_err(format!("{}: row {}: {e}", path.display(), i + 2)))?;
        }
        let level = GeoFocusLevel::parse(&row[16]).ok_or_else(|| {
            data_err(format!(
                "{}: row {}: bad gold_level {:?}",
                path.display(),
                i + 2,
                &row[16]
            ))
        })?;
        data.push((FeatureVector::from_array(values), level));
    }
    if data.is_empty() {
        return Err(data_err(format!("{}: no rows", path.display())));
    }
    Ok(data)
}

fn print_metrics_table(per_class: &std::collections::BTreeMap<String, ClassMetrics>) {
    println!("{:<14} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
    for (name, m) in per_class {
        let flag = if m.undefined { " *" } else { "" };
        println!(
            "{:<14} {:>9.4} {:>9.4} {:>9.4} {:>8}{flag}",
            name, m.precision, m.recall, m.f1, m.support
        );
    }
}

fn cmd_train(input: &Path, out_model: &Path, grid: bool, seed: Option<u64>) -> Result<()> {
    let data = read_feature_csv(input)?;
    let seed = seed.unwrap_or(17);
    let vectors: Vec<FeatureVector> = data.iter().map(|(v, _)| *v).collect();
    match feature_correlation_check(&vectors, CORRELATION_THRESHOLD) {
        Ok(report) => {
            println!(
                "feature correlation: max |r| = {:.4} (threshold {})",
                report.max_off_diagonal, report.threshold
            );
            for &(i, j, r) in &report.over_threshold {
                println!("  over threshold: {} ~ {} (r = {r:.4})", FEATURE_NAMES[i], FEATURE_NAMES[j]);
            }
            for &i in &report.constant_features {
                println!("  constant column: {}", FEATURE_NAMES[i]);
            }
        }
        Err(e) => println!("feature correlation: skipped ({e})"),
    }
    let candidates = if grid {
        classifier::default_grid()
    } else {
        vec![Hyperparams::default()]
    };
    let (best, results) = classifier::grid_search_cv(&data, &candidates, 5, seed).map_err(data_err)?;
    println!("{:>6} {:>6} {:>6} {:>10} {:>10}", "lr", "depth", "trees", "subsample", "cv_f1");
    for r in &results {
        println!(
            "{:>6} {:>6} {:>6} {:>10} {:>10.4}",
            r.hyperparams.learning_rate,
            r.hyperparams.max_depth,
            r.hyperparams.n_estimators,
            r.hyperparams.subsample,
            r.mean_macro_f1
        );
    }
    println!(
        "selected: lr={} depth={} trees={} subsample={}",
        best.learning_rate, best.max_depth, best.n_estimators, best.subsample
    );
    let model = classifier::train(&data, &best, seed).map_err(data_err)?;
    model.save(out_model).map_err(data_err)?;
    println!("model -> {}", out_model.display());
    Ok(())
}

fn load_model(config: &Config, flag: Option<PathBuf>) -> Result<LevelModel> {
    let path = flag
        .or_else(|| config.model.clone())
        .ok_or_else(|| usage("no model: pass --model or set model in the config"))?;
    LevelModel::load(&path).map_err(data_err)
}

fn cmd_analyze(
    config_path: &Path,
    input: &Path,
    out: &Path,
    model_flag: Option<PathBuf>,
    alpha: Option<f64>,
    backend_flag: Option<BackendFlag>,
    max_in_flight: Option<usize>,
) -> Result<()> {
    let mut config = load_config(config_path)?;
    apply_backend_flag(&mut config, backend_flag);
    config.validate().map_err(usage)?;
    let gazetteer = config.load_gazetteer().map_err(data_err)?;
    for w in &gazetteer.warnings {
        eprintln!("warning: {w}");
    }
    let recognizer = build_recognizer(&config)?;
    let backend = config.build_backend().map_err(backend_err)?;
    let cache = open_cache(&config)?;
    let model = load_model(&config, model_flag)?;
    let pipeline = Pipeline {
        gazetteer: &gazetteer,
        recognizer: &recognizer,
        backend: backend.as_ref(),
        cache: &cache,
        model: &model,
        split_config: SplitConfig::default(),
        retry_policy: RetryPolicy::default(),
        alpha: alpha.unwrap_or(config.alpha),
        max_in_flight: max_in_flight.unwrap_or(config.max_in_flight),
    };
    let articles = read_corpus(input)?;
    let results: Vec<_> = articles.iter().map(|a| pipeline.analyze_article(a)).collect();
    for r in &results {
        for w in &r.warnings {
            eprintln!("warning: {w}");
        }
    }
    write_jsonl(out, &results)?;
    println!("analyzed {} articles -> {}", results.len(), out.display());
    Ok(())
}

fn cmd_evaluate(input: &Path, gold_path: &Path, out: Option<&Path>) -> Result<()> {
    let results: Vec<nlgf::GeoFocusResult> = read_jsonl(input)?;
    let articles = read_corpus(gold_path)?;
    let by_id: std::collections::HashMap<&str, &Article> =
        articles.iter().map(|a| (a.id.as_str(), a)).collect();
    let mut gold_levels = Vec::new();
    let mut pred_levels = Vec::new();
    let mut gold_foci = Vec::new();
    let mut pred_foci = Vec::new();
    for r in &results {
        let article = by_id
            .get(r.article_id.as_str())
            .ok_or_else(|| data_err(format!("result {} not in gold corpus", r.article_id)))?;
        let level = article
            .gold_level
            .ok_or_else(|| data_err(format!("article {} has no gold_level", article.id)))?;
        gold_levels.push(level);
        pred_levels.push(r.level);
        gold_foci.push(article.gold_foci.clone().unwrap_or_default());
        pred_foci.push(r.focus_names());
    }
    let level = level_report(&gold_levels, &pred_levels).map_err(data_err)?;
    println!("level classification ({} articles):", level.total);
    let per_class: std::collections::BTreeMap<String, ClassMetrics> = level
        .per_class
        .iter()
        .map(|(k, v)| (k.as_str().to_string(), v.clone()))
        .collect();
    print_metrics_table(&per_class);
    println!(
        "macro: precision {:.4}  recall {:.4}  f1 {:.4}",
        level.macro_precision, level.macro_recall, level.macro_f1
    );
    let foci = foci_report(&gold_foci, &pred_foci).map_err(data_err)?;
    println!(
        "geo-foci (sample-averaged): precision {:.4}  recall {:.4}  f1 {:.4}",
        foci.precision, foci.recall, foci.f1
    );
    if let Some(out) = out {
        let mut writer = csv::Writer::from_path(out)
            .with_context(|| format!("cannot create {}", out.display()))?;
        let mut header = vec!["gold\\pred".to_string()];
        header.extend(GeoFocusLevel::ALL.iter().map(|l| l.as_str().to_string()));
        writer.write_record(&header)?;
        for (i, row) in level.confusion.iter().enumerate() {
            let mut record = vec![GeoFocusLevel::ALL[i].as_str().to_string()];
            record.extend(row.iter().map(|c| c.to_string()));
            writer.write_record(&record)?;
        }
        writer.flush()?;
        println!("confusion matrix -> {}", out.display());
    }
    Ok(())
}

fn cmd_benchmark(gold_path: &Path, input: &Path, threshold_km: Option<f64>) -> Result<()> {
    let gold_records: Vec<BenchmarkGoldRecord> = read_jsonl(gold_path)?;
    let pred_records: Vec<BenchmarkPredRecord> = read_jsonl(input)?;
    if gold_records.len() != pred_records.len() {
        return Err(data_err(format!(
            "gold has {} records, predictions {}",
            gold_records.len(),
            pred_records.len()
        )));
    }
    let gold: Vec<GoldToponym> = gold_records
        .iter()
        .map(|r| {
            Ok(GoldToponym {
                name: r.name.clone(),
                class: EntityClass::parse(&r.class)
                    .ok_or_else(|| data_err(format!("bad entity class {:?}", r.class)))?,
                point: GeoPoint::new(r.lat, r.lon).map_err(data_err)?,
            })
        })
        .collect::<Result<_>>()?;
    let pred: Vec<Option<GeoPoint>> = pred_records
        .iter()
        .map(|r| match (r.lat, r.lon) {
            (Some(lat), Some(lon)) => GeoPoint::new(lat, lon).map(Some).map_err(data_err),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    let threshold = threshold_km.unwrap_or(nlgf::evaluation::DEFAULT_THRESHOLD_KM);
    let report = disambiguation_benchmark(&gold, &pred, threshold).map_err(data_err)?;
    println!("disambiguation benchmark (threshold {threshold} km):");
    print_metrics_table(&report.per_class);
    Ok(())
}

fn cmd_tune_alpha(
    config_path: Option<&Path>,
    input: Option<&Path>,
    scored_path: Option<&Path>,
    model_flag: Option<PathBuf>,
) -> Result<()> {
    let scored: Vec<ScoredArticle> = match (scored_path, input) {
        (Some(path), None) => {
            let records: Vec<ScoredRecord> = read_jsonl(path)?;
            records
                .into_iter()
                .map(|r| ScoredArticle {
                    candidates: r.candidates,
                    gold: r.gold_foci,
                })
                .collect()
        }
        (None, Some(input)) => {
            let config_path = config_path
                .ok_or_else(|| usage("tune-alpha with --in requires --config"))?;
            let config = load_config(config_path)?;
            let gazetteer = config.load_gazetteer().map_err(data_err)?;
            let recognizer = build_recognizer(&config)?;
            let backend = config.build_backend().map_err(backend_err)?;
            let cache = open_cache(&config)?;
            let model = load_model(&config, model_flag)?;
            let pipeline = Pipeline {
                gazetteer: &gazetteer,
                recognizer: &recognizer,
                backend: backend.as_ref(),
                cache: &cache,
                model: &model,
                split_config: SplitConfig::default(),
                retry_policy: RetryPolicy::default(),
                alpha: config.alpha,
                max_in_flight: config.max_in_flight,
            };
            let articles = read_corpus(input)?;
            articles
                .iter()
                .map(|article| {
                    let gold = article.gold_foci.clone().ok_or_else(|| {
                        data_err(format!("article {} has no gold_foci", article.id))
                    })?;
                    let (_, groups, warnings) = pipeline.resolve_article(article);
                    for w in &warnings {
                        eprintln!("warning: {w}");
                    }
                    let vector = extract_features(&groups);
                    let (level, _) = model.predict(&vector);
                    Ok(ScoredArticle {
                        candidates: focus_scores(&groups, level, &gazetteer),
                        gold,
                    })
                })
                .collect::<Result<_>>()?
        }
        _ => return Err(usage("tune-alpha needs exactly one of --in or --scored")),
    };
    let sweep = tune_alpha(&scored).ok_or_else(|| data_err("no articles to sweep"))?;
    println!("{:>6} {:>8}", "alpha", "foci_f1");
    for (alpha, f1) in &sweep.points {
        println!("{alpha:>6.2} {f1:>8.4}");
    }
    println!("best alpha: {:.2} (foci F1 {:.4})", sweep.best_alpha, sweep.best_f1);
    Ok(())
}

/// Annotation CSV: header `item_id,ann1,ann2[,...]`; level values are level
/// names, foci values are `;`-separated location names (empty = no foci).
fn cmd_irr(input: &Path, task: IrrTask) -> Result<()> {
    let mut reader = csv::Reader::from_path(input)
        .map_err(|e| usage(format!("cannot open {}: {e}", input.display())))?;
    let n_annotators = reader.headers().map_err(data_err)?.len().saturating_sub(1);
    if n_annotators < 2 {
        return Err(data_err(format!("{}: need at least 2 annotator columns", input.display())));
    }
    let mut item_ids = Vec::new();
    let mut columns: Vec<Vec<String>> = vec![Vec::new(); n_annotators];
    for row in reader.records() {
        let row = row.map_err(data_err)?;
        if row.len() != n_annotators + 1 {
            return Err(data_err(format!("{}: ragged row {:?}", input.display(), row)));
        }
        item_ids.push(row[0].to_string());
        for (a, col) in columns.iter_mut().enumerate() {
            col.push(row[a + 1].to_string());
        }
    }
    match task {
        IrrTask::Level => {
            let levels: Vec<Vec<GeoFocusLevel>> = columns
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|v| {
                            GeoFocusLevel::parse(v)
                                .ok_or_else(|| data_err(format!("bad level {v:?}")))
                        })
                        .collect()
                })
                .collect::<Result<_>>()?;
            let kappa = cohens_kappa(&levels[0], &levels[1]).map_err(data_err)?;
            let flag = if kappa.degenerate { " (degenerate)" } else { "" };
            println!("Cohen's kappa (annotators 1-2): {:.4}{flag}", kappa.value);
            let annotators: Vec<Vec<AnnotationValue>> = columns
                .iter()
                .map(|col| col.iter().map(|v| AnnotationValue::Single(v.clone())).collect())
                .collect();
            let set = AnnotationSet::new(item_ids, annotators).map_err(data_err)?;
            let alpha = krippendorff_alpha(&set, AlphaDistance::Nominal).map_err(data_err)?;
            let flag = if alpha.degenerate { " (degenerate)" } else { "" };
            println!("Krippendorff's alpha (nominal): {:.4}{flag}", alpha.value);
        }
        IrrTask::Foci => {
            let annotators: Vec<Vec<AnnotationValue>> = columns
                .iter()
                .map(|col| {
                    col.iter()
                        .map(|v| {
                            let set: BTreeSet<String> = v
                                .split(';')
                                .map(str::trim)
                                .filter(|s| !s.is_empty())
                                .map(str::to_string)
                                .collect();
                            AnnotationValue::Set(set)
                        })
                        .collect()
                })
                .collect();
            let set = AnnotationSet::new(item_ids, annotators).map_err(data_err)?;
            let alpha = krippendorff_alpha(&set, AlphaDistance::Jaccard).map_err(data_err)?;
            let flag = if alpha.degenerate { " (degenerate)" } else { "" };
            println!("Krippendorff's alpha (Jaccard): {:.4}{flag}", alpha.value);
        }
    }
    Ok(())
}
