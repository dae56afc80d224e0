//! Chronological train/test experiments for the recommendation label.

mod metrics;
mod report;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use metrics::{auc, f1, f1_per_class, Confusion};
pub use report::{pretty_feature, write_csv, write_markdown};

use crate::hoeffding::{AttributeSpec, HoeffdingTree, TreeError, TreeParams};
use crate::review::{sort_chronological, Category, Dataset, Domain};
use crate::stats::{correlation_matrix, select_features};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("need at least 5 labeled records to split, got {0}")]
    TooFewRecords(usize),
    #[error("split fraction must be in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("split leaves no training records ({n} records, {test} for testing)")]
    EmptyTrain { n: usize, test: usize },
    #[error("dataset is not in chronological order at record {0}")]
    NotSorted(usize),
    #[error("AUC undefined for a test set with {n_pos} positive and {n_neg} negative labels")]
    AucUndefined { n_pos: usize, n_neg: usize },
    #[error("NaN score")]
    InvalidScore,
    #[error("experiment needs at least one feature")]
    NoFeatures,
    #[error("unknown feature `{feature}` for {category} reviews")]
    UnknownFeature { category: Category, feature: String },
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// Splits a chronologically sorted dataset; the last ⌈fraction·n⌉ records
/// form the test set.
pub fn split(d: &Dataset, fraction: f64) -> Result<(Dataset, Dataset), EvalError> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(EvalError::BadFraction(fraction));
    }
    let n = d.len();
    if n < 5 {
        return Err(EvalError::TooFewRecords(n));
    }
    let recs = d.records();
    if let Some(i) = (1..n).find(|&i| match (recs[i - 1].timestamp, recs[i].timestamp) {
        (Some(a), Some(b)) => a > b,
        (Some(_), None) => true,
        _ => false,
    }) {
        return Err(EvalError::NotSorted(i));
    }
    let test = test_size(n, fraction);
    if test >= n {
        return Err(EvalError::EmptyTrain { n, test });
    }
    let boundary = n - test;
    Ok((
        d.with_records(recs[..boundary].to_vec()),
        d.with_records(recs[boundary..].to_vec()),
    ))
}

/// ⌈fraction·n⌉, treating products within 1e-9 of an integer as that integer.
fn test_size(n: usize, fraction: f64) -> usize {
    let x = fraction * n as f64;
    let r = x.round();
    let t = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    (t as usize).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Single,
    Combination,
    Sentiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub category: Category,
    pub kind: ExperimentKind,
    pub features: Vec<String>,
    /// Fraction of the most recent records held out for testing.
    pub split_fraction: f64,
    pub params: TreeParams,
}

impl ExperimentSpec {
    pub fn new(
        category: Category,
        kind: ExperimentKind,
        features: Vec<String>,
        split_fraction: f64,
        params: TreeParams,
    ) -> Result<Self, EvalError> {
        if features.is_empty() {
            return Err(EvalError::NoFeatures);
        }
        if !(split_fraction > 0.0 && split_fraction < 1.0) {
            return Err(EvalError::BadFraction(split_fraction));
        }
        params.validate()?;
        for f in &features {
            attribute_for(category, f)?;
        }
        Ok(ExperimentSpec {
            category,
            kind,
            features,
            split_fraction,
            params,
        })
    }

    pub fn single(category: Category, feature: &str) -> Result<Self, EvalError> {
        let kind = if feature == "sentiment" {
            ExperimentKind::Sentiment
        } else {
            ExperimentKind::Single
        };
        Self::new(category, kind, vec![feature.to_string()], 0.2, TreeParams::default())
    }

    /// Row name in the results table.
    pub fn display_name(&self) -> String {
        match self.kind {
            ExperimentKind::Combination => "Combination".into(),
            ExperimentKind::Sentiment => "Sentiment".into(),
            ExperimentKind::Single => self.features.iter().map(|f| pretty_feature(f)).collect::<Vec<_>>().join(" + "),
        }
    }
}

/// Bins used for the continuous sentiment score.
pub const SENTIMENT_BINS: usize = 20;

/// Tree attribute for a named variable of `category`.
pub fn attribute_for(category: Category, feature: &str) -> Result<AttributeSpec, EvalError> {
    match feature {
        "overall" => Ok(AttributeSpec::rating("overall", Domain::OVERALL)),
        "sentiment" => Ok(AttributeSpec::equal_width("sentiment", -1.0, 1.0, SENTIMENT_BINS)?),
        f if category.schema().index_of(f).is_some() => Ok(AttributeSpec::rating(f, Domain::STARS)),
        f => Err(EvalError::UnknownFeature {
            category,
            feature: f.to_string(),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub spec: ExperimentSpec,
    pub confusion: Confusion,
    /// Support-weighted F1 over both classes.
    pub f1: f64,
    /// `[not_recommend, recommend]`
    pub f1_per_class: [f64; 2],
    /// `None` when the test set holds a single class.
    pub auc: Option<f64>,
    pub train_seconds: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub tree_nodes: usize,
    pub tree_splits: usize,
}

impl EvalReport {
    /// Equality ignoring the wall-clock field.
    pub fn same_modulo_timing(&self, other: &EvalReport) -> bool {
        let mut a = self.clone();
        a.train_seconds = other.train_seconds;
        a == *other
    }
}

/// Which labeled, sorted records trained and tested a model (indices into
/// the labeled, chronologically sorted view of the input).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentTrace {
    pub trained: Vec<usize>,
    pub tested: Vec<usize>,
}

/// Labeled records in chronological order: the population every experiment
/// draws from.
pub fn prepare(d: &Dataset) -> Dataset {
    sort_chronological(&d.labeled())
}

pub fn run_experiment(spec: &ExperimentSpec, d: &Dataset) -> Result<EvalReport, EvalError> {
    run_experiment_traced(spec, d).map(|(r, _)| r)
}

pub fn run_experiment_traced(spec: &ExperimentSpec, d: &Dataset) -> Result<(EvalReport, ExperimentTrace), EvalError> {
    let data = prepare(d);
    let (train, test) = split(&data, spec.split_fraction)?;
    let (report, trace) = train_and_score(spec, &train, &test)?;
    Ok((report, trace))
}

fn train_and_score(spec: &ExperimentSpec, train: &Dataset, test: &Dataset) -> Result<(EvalReport, ExperimentTrace), EvalError> {
    let attributes = spec
        .features
        .iter()
        .map(|f| attribute_for(spec.category, f))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = |d: &Dataset| -> Vec<(Vec<Option<f64>>, Option<bool>)> {
        d.records()
            .iter()
            .map(|r| (spec.features.iter().map(|f| r.value(f)).collect(), r.recommended))
            .collect()
    };
    let train_rows = rows(train);
    let test_rows = rows(test);

    let mut tree = HoeffdingTree::new(attributes, spec.params)?;
    let mut trace = ExperimentTrace {
        trained: Vec::with_capacity(train_rows.len()),
        tested: Vec::with_capacity(test_rows.len()),
    };
    let started = Instant::now();
    for (i, (values, label)) in train_rows.iter().enumerate() {
        tree.train_one(values, *label)?;
        trace.trained.push(i);
    }
    let train_seconds = started.elapsed().as_secs_f64();

    let mut confusion = Confusion::default();
    let mut scores = Vec::with_capacity(test_rows.len());
    for (i, (values, label)) in test_rows.iter().enumerate() {
        let actual = label.expect("prepared records are labeled");
        let p = tree.predict(values)?;
        confusion.record(p.class.is_positive(), actual);
        scores.push((p.probability, actual));
        trace.tested.push(train_rows.len() + i);
    }
    let auc = match auc(&scores) {
        Ok(a) => Some(a),
        Err(e) => {
            log::warn!("{} {}: {e}", spec.category, spec.display_name());
            None
        }
    };
    let report = EvalReport {
        spec: spec.clone(),
        f1: f1(&confusion),
        f1_per_class: f1_per_class(&confusion),
        confusion,
        auc,
        train_seconds,
        n_train: train_rows.len(),
        n_test: test_rows.len(),
        tree_nodes: tree.node_count(),
        tree_splits: tree.splits().len(),
    };
    Ok((report, trace))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub split_fraction: f64,
    pub params: TreeParams,
    /// Correlation with `overall` a rating feature needs to join the combination.
    pub threshold: f64,
    /// Select the combination on the whole dataset rather than the training split.
    pub paper_faithful: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            split_fraction: 0.2,
            params: TreeParams::default(),
            threshold: 0.3,
            paper_faithful: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub reports: Vec<EvalReport>,
    pub warnings: Vec<String>,
}

/// Rating features (including `overall`) whose correlation with `overall`
/// exceeds the threshold, computed on `basis`.
pub fn combination_features(basis: &Dataset, threshold: f64) -> Vec<String> {
    let rep = correlation_matrix(basis);
    select_features(&rep, threshold, true)
        .unwrap_or_default()
        .into_iter()
        .filter(|f| f != "sentiment")
        .collect()
}

/// Experiments for one category: every single rating feature plus overall,
/// the correlated-feature combination, and sentiment alone.
pub fn run_category(d: &Dataset, opts: &SuiteOptions) -> SuiteOutcome {
    let category = d.category();
    let mut out = SuiteOutcome::default();
    let data = prepare(d);
    let (train, test) = match split(&data, opts.split_fraction) {
        Ok(parts) => parts,
        Err(e) => {
            out.warnings.push(format!("{category}: skipped: {e}"));
            return out;
        }
    };
    let spec = |kind, features: Vec<String>| ExperimentSpec::new(category, kind, features, opts.split_fraction, opts.params);

    let mut specs = Vec::new();
    let singles = std::iter::once("overall").chain(category.schema().features().iter().copied());
    for f in singles {
        specs.push(spec(ExperimentKind::Single, vec![f.to_string()]));
    }
    let basis = if opts.paper_faithful { &data } else { &train };
    let combo = combination_features(basis, opts.threshold);
    if combo.is_empty() {
        out.warnings.push(format!("{category}: no rating feature correlates above {}; combination skipped", opts.threshold));
    } else {
        specs.push(spec(ExperimentKind::Combination, combo));
    }
    specs.push(spec(ExperimentKind::Sentiment, vec!["sentiment".into()]));

    for s in specs {
        let result = s.and_then(|s| train_and_score(&s, &train, &test));
        match result {
            Ok((r, _)) => out.reports.push(r),
            Err(e) => out.warnings.push(format!("{category}: experiment skipped: {e}")),
        }
    }
    out
}

/// The full results table: [`run_category`] for each of the four categories.
/// A missing category yields a warning.
pub fn run_paper_suite(datasets: &BTreeMap<Category, Dataset>, opts: &SuiteOptions) -> SuiteOutcome {
    let mut out = SuiteOutcome::default();
    for category in Category::ALL {
        match datasets.get(&category) {
            Some(d) => {
                let part = run_category(d, opts);
                out.reports.extend(part.reports);
                out.warnings.extend(part.warnings);
            }
            None => out.warnings.push(format!("{category}: no dataset; category skipped")),
        }
    }
    for w in &out.warnings {
        log::warn!("{w}");
    }
    out
}
