use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use airsat_core::cluster::{topics_by_polarity, StcParams};
use airsat_core::eval::{
    self, attribute_for, run_experiment, run_paper_suite, EvalError, ExperimentKind, ExperimentSpec, SuiteOptions,
};
use airsat_core::hoeffding::{self, HoeffdingTree, TreeError, TreeParams};
use airsat_core::review::{self, Category, Dataset, ReviewError, UnknownCategory};
use airsat_core::sentiment::{annotate, Lexicon, RemoteScorer, Scorer, SentimentError, ENDPOINT_ENV};
use airsat_core::stats::{correlation_matrix, CorrelationError};

/// Explain and predict traveler satisfaction from airline review data.
#[derive(Parser, Debug)]
#[command(name = "airsat", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Sentiment lexicon (token<TAB>polarity); the built-in one by default.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// Score sentiment with a remote service instead of the lexicon.
    #[arg(long, global = true, env = ENDPOINT_ENV)]
    sentiment_endpoint: Option<String>,
    /// Recompute sentiment even where a value is already present.
    #[arg(long, global = true)]
    force_sentiment: bool,
    /// Hoeffding bound confidence parameter.
    #[arg(long, global = true, default_value_t = 1e-7)]
    delta: f64,
    /// Tie-breaking threshold.
    #[arg(long, global = true, default_value_t = 0.05)]
    tau: f64,
    /// Records a leaf sees between split checks.
    #[arg(long, global = true, default_value_t = 200)]
    grace: u64,
    /// Fraction of the most recent records held out for testing.
    #[arg(long, global = true, default_value_t = 0.2)]
    test_fraction: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a CSV, print statistics and write the normalized JSONL cache.
    Ingest {
        csv: PathBuf,
        #[arg(long, short)]
        category: Category,
    },
    /// Correlation matrix of ratings, overall and sentiment.
    Analyze(DataArg),
    /// Suffix tree clustering of positive and negative review texts.
    Cluster {
        #[command(flatten)]
        data: DataArg,
        /// Clusters reported per polarity.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Sample document ids per cluster.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 6)]
        max_phrase_len: usize,
        #[arg(long, default_value_t = 500)]
        top_k: usize,
        #[arg(long, default_value_t = 0.5)]
        overlap: f64,
    },
    /// Train a tree on every labeled record and save it.
    Train {
        #[command(flatten)]
        data: DataArg,
        /// Comma-separated features (schema names, `overall`, `sentiment`).
        #[arg(long, value_delimiter = ',', required = true)]
        features: Vec<String>,
        /// Model file; defaults to <out>/<category>.model.json.
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Chronological train/test evaluation of one feature set.
    Evaluate {
        #[command(flatten)]
        data: DataArg,
        #[arg(long, value_delimiter = ',', required = true)]
        features: Vec<String>,
    },
    /// Full results table across categories.
    Report {
        /// Dataset files (CSV or JSONL cache), one per category.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Category of each input, in order; inferred from file names or caches when omitted.
        #[arg(long, value_delimiter = ',')]
        categories: Vec<Category>,
        /// Correlation with overall a feature needs to join the combination.
        #[arg(long, default_value_t = 0.3)]
        threshold: f64,
        /// Select combination features on the full dataset instead of the training split.
        #[arg(long)]
        paper_faithful: bool,
        /// Also write a markdown table.
        #[arg(long)]
        markdown: bool,
    },
}

#[derive(Args, Debug)]
struct DataArg {
    /// A CSV export or a JSONL cache written by `ingest`.
    input: PathBuf,
    /// Required for CSV input unless the file name names the category.
    #[arg(long, short)]
    category: Option<Category>,
}

/// Errors caused by the caller's input rather than by this program.
fn is_bad_input(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.is::<ReviewError>()
            || c.is::<UnknownCategory>()
            || c.is::<CorrelationError>()
            || c.is::<BadInput>()
            || matches!(c.downcast_ref::<SentimentError>(), Some(SentimentError::Lexicon(_)))
            || matches!(
                c.downcast_ref::<TreeError>(),
                Some(
                    TreeError::InvalidParam(_)
                        | TreeError::UnknownAttribute(_)
                        | TreeError::VersionMismatch { .. }
                        | TreeError::Corrupt(_)
                )
            )
            || matches!(
                c.downcast_ref::<EvalError>(),
                Some(
                    EvalError::TooFewRecords(_)
                        | EvalError::BadFraction(_)
                        | EvalError::NoFeatures
                        | EvalError::UnknownFeature { .. }
                        | EvalError::Tree(TreeError::InvalidParam(_))
                )
            )
    })
}

#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_bad_input(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    fs::create_dir_all(&g.out).with_context(|| format!("creating {}", g.out.display()))?;
    match cli.command {
        Command::Ingest { csv, category } => cmd_ingest(&g, &csv, category),
        Command::Analyze(data) => cmd_analyze(&g, &data),
        Command::Cluster {
            data,
            k,
            samples,
            max_phrase_len,
            top_k,
            overlap,
        } => {
            let params = StcParams {
                max_phrase_len,
                top_k,
                overlap_threshold: overlap,
                ..StcParams::default()
            };
            cmd_cluster(&g, &data, k, samples, &params)
        }
        Command::Train { data, features, model } => cmd_train(&g, &data, &features, model),
        Command::Evaluate { data, features } => cmd_evaluate(&g, &data, &features),
        Command::Report {
            inputs,
            categories,
            threshold,
            paper_faithful,
            markdown,
        } => cmd_report(&g, &inputs, &categories, threshold, paper_faithful, markdown),
    }
}

impl Global {
    fn tree_params(&self) -> Result<TreeParams> {
        let p = TreeParams {
            delta: self.delta,
            tau: self.tau,
            grace: self.grace,
            ..TreeParams::default()
        };
        p.validate()?;
        Ok(p)
    }

    fn scorer(&self) -> Result<Box<dyn Scorer>> {
        if let Some(endpoint) = &self.sentiment_endpoint {
            let cache = self.out.join("sentiment_cache.jsonl");
            return Ok(Box::new(RemoteScorer::http(endpoint, &cache)?));
        }
        Ok(Box::new(self.load_lexicon()?))
    }

    fn load_lexicon(&self) -> Result<Lexicon> {
        Ok(match &self.lexicon {
            Some(p) => Lexicon::from_file(p)?,
            None => Lexicon::builtin(),
        })
    }

    fn sentiment_source(&self) -> String {
        match (&self.sentiment_endpoint, &self.lexicon) {
            (Some(e), _) => format!("remote {e}"),
            (None, Some(p)) => format!("lexicon {}", p.display()),
            (None, None) => "builtin lexicon".into(),
        }
    }

    fn preamble(&self) -> Vec<String> {
        vec![
            format!("delta={}", self.delta),
            format!("tau={}", self.tau),
            format!("grace={}", self.grace),
            format!("test_fraction={}", self.test_fraction),
            format!("sentiment={}", self.sentiment_source()),
        ]
    }
}

fn category_from_name(path: &Path) -> Option<Category> {
    let stem = path.file_stem()?.to_str()?.to_ascii_lowercase();
    let stem = stem.trim_end_matches(".csv");
    let mut found = Category::ALL.into_iter().filter(|c| stem.contains(c.as_str()));
    let first = found.next()?;
    found.next().is_none().then_some(first)
}

fn is_jsonl(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "jsonl")
}

/// Loads a CSV or JSONL cache, filling in missing sentiment.
fn load(g: &Global, path: &Path, category: Option<Category>) -> Result<Dataset> {
    let d = if is_jsonl(path) {
        let f = File::open(path).map_err(|source| ReviewError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let d = review::read_jsonl(BufReader::new(f)).with_context(|| format!("reading {}", path.display()))?;
        if let Some(c) = category {
            if c != d.category() {
                return Err(BadInput(format!("{} holds {} reviews, not {c}", path.display(), d.category())).into());
            }
        }
        d
    } else {
        let category = category.or_else(|| category_from_name(path)).ok_or_else(|| {
            BadInput(format!("cannot tell the category of {}; pass --category", path.display()))
        })?;
        let ingested = review::ingest(path, category)?;
        for w in &ingested.report.warnings {
            log::warn!("line {}: {} = {:?}: {}", w.line_no, w.column, w.value, w.reason);
        }
        if !ingested.report.rejections.is_empty() {
            log::warn!("{}: {} rows rejected", path.display(), ingested.report.rejections.len());
        }
        ingested.dataset
    };
    let needs_sentiment = g.force_sentiment || d.records().iter().any(|r| r.sentiment.is_none());
    if needs_sentiment {
        let scorer = g.scorer()?;
        Ok(annotate(&d, scorer.as_ref(), g.force_sentiment)?)
    } else {
        Ok(d)
    }
}

fn load_arg(g: &Global, data: &DataArg) -> Result<Dataset> {
    load(g, &data.input, data.category)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_ingest(g: &Global, csv: &Path, category: Category) -> Result<()> {
    let ingested = review::ingest(csv, category)?;
    let report = &ingested.report;
    for w in &report.warnings {
        log::warn!("line {}: {} = {:?}: {}", w.line_no, w.column, w.value, w.reason);
    }
    let scorer = g.scorer()?;
    let d = annotate(&ingested.dataset, scorer.as_ref(), g.force_sentiment)?;

    let cache = g.out.join(format!("{category}.jsonl"));
    let mut w = create(&cache)?;
    review::write_jsonl(&d, &mut w)?;
    w.flush()?;
    let rejects = g.out.join(format!("{category}.rejections.jsonl"));
    let mut w = create(&rejects)?;
    review::write_rejections(&report.rejections, &mut w)?;
    w.flush()?;

    let s = review::stats(&d);
    println!("category: {category}");
    println!("reviews: {}", s.n_reviews);
    println!("users: {}", s.n_users);
    println!("labeled: {}", s.n_labeled);
    match s.satisfaction_rate {
        Some(r) => println!("satisfaction_rate: {r:.4}"),
        None => println!("satisfaction_rate: NA"),
    }
    println!("duplicate_reviews: {}", s.n_duplicate_reviews);
    println!("rejected_rows: {}", report.rejections.len());
    println!("dropped_values: {}", report.warnings.len());
    if !report.missing_features.is_empty() {
        println!("missing_features: {}", report.missing_features.join(","));
    }
    println!("sentiment: {}", g.sentiment_source());
    println!("cache: {}", cache.display());
    Ok(())
}

fn cmd_analyze(g: &Global, data: &DataArg) -> Result<()> {
    let d = load_arg(g, data)?;
    let category = d.category();
    let rep = correlation_matrix(&d);
    let preamble = vec![
        format!("category={category}"),
        format!("n_reviews={}", d.len()),
        format!("sentiment={}", g.sentiment_source()),
    ];
    let csv = g.out.join(format!("{category}_correlations.csv"));
    let mut w = create(&csv)?;
    rep.write_csv(&mut w, &preamble)?;
    w.flush()?;
    let json = g.out.join(format!("{category}_correlations.json"));
    fs::write(&json, rep.to_json()?).with_context(|| format!("writing {}", json.display()))?;

    println!("category: {category}");
    println!("reviews: {}", d.len());
    println!("strongest correlates of overall:");
    for (name, r) in rep.ranked_against_overall()?.into_iter().take(4) {
        println!("  {name:<24} r = {r:+.4}");
    }
    println!("wrote {} and {}", csv.display(), json.display());
    Ok(())
}

fn cmd_cluster(g: &Global, data: &DataArg, k: usize, samples: usize, params: &StcParams) -> Result<()> {
    if params.max_phrase_len == 0 || !(0.0..=1.0).contains(&params.overlap_threshold) {
        bail!(BadInput("max-phrase-len must be positive and overlap within [0, 1]".into()));
    }
    let d = load_arg(g, data)?;
    let category = d.category();
    let (pos, neg) = topics_by_polarity(&d, k, params);
    let report = serde_json::json!({
        "category": category,
        "params": params,
        "k": k,
        "topics": [pos.to_report_json(samples), neg.to_report_json(samples)],
    });
    let path = g.out.join(format!("{category}_topics.json"));
    fs::write(&path, serde_json::to_string_pretty(&report)?).with_context(|| format!("writing {}", path.display()))?;
    println!(
        "# max_phrase_len={} top_k={} overlap={} k={k}",
        params.max_phrase_len, params.top_k, params.overlap_threshold
    );
    print!("{}", pos.to_table());
    println!();
    print!("{}", neg.to_table());
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_train(g: &Global, data: &DataArg, features: &[String], model: Option<PathBuf>) -> Result<()> {
    let params = g.tree_params()?;
    let d = eval::prepare(&load_arg(g, data)?);
    let category = d.category();
    let attributes = features
        .iter()
        .map(|f| attribute_for(category, f))
        .collect::<Result<Vec<_>, _>>()?;
    let mut tree = HoeffdingTree::new(attributes, params)?;
    for r in d.records() {
        let values: Vec<Option<f64>> = features.iter().map(|f| r.value(f)).collect();
        tree.train_one(&values, r.recommended)?;
    }
    let path = model.unwrap_or_else(|| g.out.join(format!("{category}.model.json")));
    hoeffding::save(&tree, &path)?;
    println!("# delta={} tau={} grace={}", params.delta, params.tau, params.grace);
    println!("trained: {}", tree.n_trained());
    println!("nodes: {}", tree.node_count());
    println!("splits: {}", tree.splits().len());
    if let Some(root) = tree.root_attribute() {
        println!("root: {root}");
    }
    println!("model: {}", path.display());
    Ok(())
}

fn cmd_evaluate(g: &Global, data: &DataArg, features: &[String]) -> Result<()> {
    let d = load_arg(g, data)?;
    let category = d.category();
    let kind = match features {
        [f] if f == "sentiment" => ExperimentKind::Sentiment,
        [_] => ExperimentKind::Single,
        _ => ExperimentKind::Combination,
    };
    let spec = ExperimentSpec::new(category, kind, features.to_vec(), g.test_fraction, g.tree_params()?)?;
    let rep = run_experiment(&spec, &d)?;
    for line in g.preamble() {
        println!("# {line}");
    }
    println!("category: {category}");
    println!("features: {}", features.join(","));
    println!("train/test: {}/{}", rep.n_train, rep.n_test);
    println!("f1: {:.4}", rep.f1);
    match rep.auc {
        Some(a) => println!("auc: {a:.4}"),
        None => println!("auc: NA (single-class test set)"),
    }
    println!("train_seconds: {:.4}", rep.train_seconds);
    let path = g.out.join(format!("{category}_evaluation.json"));
    fs::write(&path, serde_json::to_string_pretty(&rep)?).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_report(
    g: &Global,
    inputs: &[PathBuf],
    categories: &[Category],
    threshold: f64,
    paper_faithful: bool,
    markdown: bool,
) -> Result<()> {
    if !categories.is_empty() && categories.len() != inputs.len() {
        bail!(BadInput(format!(
            "{} inputs but {} categories",
            inputs.len(),
            categories.len()
        )));
    }
    let mut datasets = BTreeMap::new();
    for (i, path) in inputs.iter().enumerate() {
        let d = load(g, path, categories.get(i).copied())?;
        if datasets.insert(d.category(), d).is_some() {
            bail!(BadInput(format!("category of {} given twice", path.display())));
        }
    }
    let opts = SuiteOptions {
        split_fraction: g.test_fraction,
        params: g.tree_params()?,
        threshold,
        paper_faithful,
    };
    let outcome = run_paper_suite(&datasets, &opts);
    let mut preamble = g.preamble();
    preamble.push(format!("threshold={threshold}"));
    preamble.push(format!("paper_faithful={paper_faithful}"));
    preamble.extend(outcome.warnings.iter().map(|w| format!("warning: {w}")));

    let csv = g.out.join("results.csv");
    let mut w = create(&csv)?;
    eval::write_csv(&mut w, &outcome.reports, &preamble)?;
    w.flush()?;
    let json = g.out.join("results.json");
    let doc = serde_json::json!({
        "options": opts,
        "sentiment": g.sentiment_source(),
        "warnings": outcome.warnings,
        "reports": outcome.reports,
    });
    fs::write(&json, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", json.display()))?;
    if markdown {
        let md = g.out.join("results.md");
        let mut w = create(&md)?;
        for line in &preamble {
            writeln!(w, "<!-- {line} -->")?;
        }
        eval::write_markdown(&mut w, &outcome.reports)?;
        w.flush()?;
    }
    let mut stdout = std::io::stdout().lock();
    eval::write_markdown(&mut stdout, &outcome.reports)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    if outcome.reports.is_empty() {
        bail!(BadInput("no experiment could be run".into()));
    }
    Ok(())
}
