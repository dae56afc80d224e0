//! Review-text sentiment in [-1, +1].

mod lexicon;
mod remote;

pub use lexicon::{score, tokenize, Lexicon, SentimentScore, DEFAULT_LEXICON, DEFAULT_NEGATION_WINDOW};
pub use remote::{
    content_hash, score_remote, HttpTransport, RemoteScorer, ScoreCache, Transport, ENDPOINT_ENV,
};

use crate::review::Dataset;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SentimentError {
    #[error("lexicon: {0}")]
    Lexicon(String),
    #[error("sentiment service unreachable: {0}")]
    Network(String),
    #[error("sentiment service protocol error: {0}")]
    Protocol(String),
    #[error("sentiment cache: {0}")]
    Cache(String),
    #[error("record {index}: {source}")]
    Record {
        index: usize,
        #[source]
        source: Box<SentimentError>,
    },
}

pub trait Scorer {
    fn score(&self, text: &str) -> Result<SentimentScore, SentimentError>;
}

impl Scorer for Lexicon {
    fn score(&self, text: &str) -> Result<SentimentScore, SentimentError> {
        Ok(lexicon::score(text, self))
    }
}

impl<F> Scorer for F
where
    F: Fn(&str) -> Result<SentimentScore, SentimentError>,
{
    fn score(&self, text: &str) -> Result<SentimentScore, SentimentError> {
        self(text)
    }
}

/// Copy of `d` with every record's sentiment filled in. Existing values are
/// kept unless `force`.
pub fn annotate(d: &Dataset, scorer: &dyn Scorer, force: bool) -> Result<Dataset, SentimentError> {
    let mut records = d.records().to_vec();
    for (index, r) in records.iter_mut().enumerate() {
        if r.sentiment.is_some() && !force {
            continue;
        }
        let s = scorer.score(&r.text).map_err(|e| SentimentError::Record {
            index,
            source: Box::new(e),
        })?;
        r.sentiment = Some(s.value.clamp(-1.0, 1.0));
    }
    Ok(d.with_records(records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::review::{Category, ReviewRecord};
    use std::cell::RefCell;

    fn ds(texts: &[(&str, Option<f64>)]) -> Dataset {
        Dataset::new(
            Category::Lounge,
            texts
                .iter()
                .map(|(t, s)| ReviewRecord {
                    text: t.to_string(),
                    sentiment: *s,
                    ..ReviewRecord::blank(Category::Lounge)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn all_present_without_force_is_unchanged() {
        let d = ds(&[("a", Some(0.1)), ("b", Some(-0.3))]);
        let calls = RefCell::new(0);
        let scorer = |_: &str| {
            *calls.borrow_mut() += 1;
            Ok(SentimentScore::NEUTRAL_EMPTY)
        };
        assert_eq!(annotate(&d, &scorer, false).unwrap(), d);
        assert_eq!(*calls.borrow(), 0);
    }

    #[test]
    fn unsanitized_texts_all_scored() {
        let d = ds(&[("<b>great</b>!!", None), ("\u{1F600} rude\tstaff", None), ("", None)]);
        let out = annotate(&d, &Lexicon::builtin(), false).unwrap();
        assert!(out.records().iter().all(|r| r.sentiment.is_some()));
        assert_eq!(out.records()[2].sentiment, Some(0.0));
    }

    #[test]
    fn only_absent_scored_unless_forced() {
        let d = ds(&[("great", Some(0.9)), ("great", None), ("awful", None)]);
        let fixed = |t: &str| {
            Ok(SentimentScore {
                value: if t == "great" { 0.5 } else { -0.5 },
                n_tokens: 1,
                n_hits: 1,
            })
        };
        let out = annotate(&d, &fixed, false).unwrap();
        let got: Vec<_> = out.records().iter().map(|r| r.sentiment).collect();
        assert_eq!(got, vec![Some(0.9), Some(0.5), Some(-0.5)]);
        let forced = annotate(&d, &fixed, true).unwrap();
        assert_eq!(forced.records()[0].sentiment, Some(0.5));
    }

    #[test]
    fn scorer_errors_carry_record_index() {
        let d = ds(&[("ok", None), ("boom", None)]);
        let flaky = |t: &str| {
            if t == "boom" {
                Err(SentimentError::Network("down".into()))
            } else {
                Ok(SentimentScore::NEUTRAL_EMPTY)
            }
        };
        match annotate(&d, &flaky, false) {
            Err(SentimentError::Record { index, .. }) => assert_eq!(index, 1),
            other => panic!("{other:?}"),
        }
    }
}
