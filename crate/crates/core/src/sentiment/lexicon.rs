use std::collections::{HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::SentimentError;

/// The shipped default lexicon (token<TAB>polarity).
pub const DEFAULT_LEXICON: &str = include_str!("../../data/lexicon.tsv");

const DEFAULT_NEGATORS: &[&str] = &[
    "not", "no", "never", "none", "nobody", "nothing", "neither", "nor", "nowhere", "without",
    "cannot", "hardly", "barely", "dont", "don", "didn", "didnt", "doesn", "doesnt", "isn",
    "isnt", "wasn", "wasnt", "aren", "arent", "weren", "werent", "wouldn", "wouldnt", "couldn",
    "couldnt", "shouldn", "shouldnt", "hasn", "hasnt", "haven", "havent", "hadn", "hadnt", "ain",
];

pub const DEFAULT_NEGATION_WINDOW: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SentimentScore {
    pub value: f64,
    pub n_tokens: usize,
    pub n_hits: usize,
}

impl SentimentScore {
    pub const NEUTRAL_EMPTY: SentimentScore = SentimentScore {
        value: 0.0,
        n_tokens: 0,
        n_hits: 0,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lexicon {
    entries: HashMap<String, f64>,
    negators: HashSet<String>,
    negation_window: usize,
}

impl Lexicon {
    pub fn new(
        entries: HashMap<String, f64>,
        negators: HashSet<String>,
        negation_window: usize,
    ) -> Result<Self, SentimentError> {
        for (tok, pol) in &entries {
            if !(-1.0..=1.0).contains(pol) {
                return Err(SentimentError::Lexicon(format!(
                    "polarity of `{tok}` is {pol}, outside [-1, 1]"
                )));
            }
            if negators.contains(tok) {
                return Err(SentimentError::Lexicon(format!(
                    "`{tok}` is both an entry and a negator"
                )));
            }
        }
        Ok(Lexicon {
            entries,
            negators,
            negation_window,
        })
    }

    /// Parses `token<TAB>polarity` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, SentimentError> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |why: &str| SentimentError::Lexicon(format!("line {}: {why}: `{raw}`", i + 1));
            let (tok, pol) = line.split_once('\t').ok_or_else(|| bad("expected token<TAB>polarity"))?;
            let pol: f64 = pol.trim().parse().map_err(|_| bad("polarity is not a number"))?;
            let tok = tok.trim().to_lowercase();
            if tok.is_empty() {
                return Err(bad("empty token"));
            }
            if entries.insert(tok, pol).is_some() {
                return Err(bad("duplicate token"));
            }
        }
        let negators: HashSet<String> = DEFAULT_NEGATORS.iter().map(|s| s.to_string()).collect();
        // the default negators take precedence over a lexicon that scores them
        entries.retain(|t, _| !negators.contains(t));
        Lexicon::new(entries, negators, DEFAULT_NEGATION_WINDOW)
    }

    pub fn from_file(path: &Path) -> Result<Self, SentimentError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            SentimentError::Lexicon(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::parse(&text)
    }

    pub fn builtin() -> Self {
        Self::parse(DEFAULT_LEXICON).expect("shipped lexicon is well-formed")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn polarity(&self, token: &str) -> Option<f64> {
        self.entries.get(token).copied()
    }

    pub fn negation_window(&self) -> usize {
        self.negation_window
    }
}

/// Lowercased alphanumeric runs.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Mean polarity of the lexicon hits in `text`, each hit sign-flipped when a
/// negator appears among the preceding `negation_window` tokens.
pub fn score(text: &str, lex: &Lexicon) -> SentimentScore {
    let tokens = tokenize(text);
    let mut sum = 0.0;
    let mut hits = 0usize;
    for (i, tok) in tokens.iter().enumerate() {
        let Some(pol) = lex.polarity(tok) else {
            continue;
        };
        let start = i.saturating_sub(lex.negation_window);
        let negated = tokens[start..i].iter().any(|t| lex.negators.contains(t));
        sum += if negated { -pol } else { pol };
        hits += 1;
    }
    let value = if hits == 0 {
        0.0
    } else {
        (sum / hits as f64).clamp(-1.0, 1.0)
    };
    SentimentScore {
        value,
        n_tokens: tokens.len(),
        n_hits: hits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lex(entries: &[(&str, f64)], negators: &[&str], window: usize) -> Lexicon {
        Lexicon::new(
            entries.iter().map(|(t, p)| (t.to_string(), *p)).collect(),
            negators.iter().map(|s| s.to_string()).collect(),
            window,
        )
        .unwrap()
    }

    #[test]
    fn empty_text() {
        assert_eq!(score("", &Lexicon::builtin()), SentimentScore::NEUTRAL_EMPTY);
    }

    #[test]
    fn averaging_saturates() {
        let l = lex(&[("great", 1.0)], &[], 3);
        let s = score("great great", &l);
        assert_eq!(s.value, 1.0);
        assert_eq!((s.n_tokens, s.n_hits), (2, 2));
    }

    #[test]
    fn negation_flips() {
        let l = lex(&[("great", 1.0)], &["not"], 3);
        assert_eq!(score("not great", &l).value, -1.0);
        // negator outside the window
        assert_eq!(score("not a b c great", &l).value, 1.0);
        assert_eq!(score("not a b great", &l).value, -1.0);
    }

    #[test]
    fn no_hits_is_zero() {
        let l = lex(&[("great", 1.0)], &["not"], 3);
        let s = score("the plane left on time", &l);
        assert_eq!((s.value, s.n_hits, s.n_tokens), (0.0, 0, 5));
    }

    #[test]
    fn mixed_average() {
        let l = lex(&[("good", 0.5), ("rude", -0.75)], &["never"], 2);
        // good (+0.5), rude (-0.75), never .. rude (+0.75)
        let s = score("Good seats, RUDE crew; never rude at the gate", &l);
        assert!((s.value - (0.5 - 0.75 + 0.75) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn overlap_rejected() {
        let err = Lexicon::new(
            [("not".to_string(), -0.5)].into_iter().collect(),
            ["not".to_string()].into_iter().collect(),
            3,
        );
        assert!(err.is_err());
    }

    #[test]
    fn parse_file_format() {
        let l = Lexicon::parse("# comment\ngood\t0.5\n\nBad\t-0.5 # trailing\nnot\t-0.1\n").unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.polarity("bad"), Some(-0.5));
        assert!(Lexicon::parse("good 0.5").is_err());
        assert!(Lexicon::parse("good\t2.0").is_err());
    }

    #[test]
    fn builtin_lexicon_size_and_sanity() {
        let l = Lexicon::builtin();
        assert!(l.len() >= 2000, "{}", l.len());
        assert!(score("The staff were friendly and helpful", &l).value > 0.0);
        assert!(score("Terrible delays and rude staff", &l).value < 0.0);
        assert!(score("The lounge was not clean", &l).value < 0.0);
    }

    proptest! {
        #[test]
        fn always_in_range(text in "[a-z !.,]{0,200}") {
            let s = score(&text, &Lexicon::builtin());
            prop_assert!((-1.0..=1.0).contains(&s.value));
            if s.n_hits == 0 { prop_assert_eq!(s.value, 0.0); }
        }

        #[test]
        fn entry_order_irrelevant(words in prop::collection::vec("[a-e]{1,2}", 0..30), rot in 0usize..10) {
            let mut items: Vec<(String, f64)> = ["a", "b", "ab", "cd", "e", "ee"].iter().enumerate()
                .map(|(i, t)| (t.to_string(), (i as f64 - 2.5) / 3.0)).collect();
            let text = words.join(" ");
            let a = Lexicon::new(items.iter().cloned().collect(), ["c".to_string()].into_iter().collect(), 2).unwrap();
            let len = items.len();
            items.rotate_left(rot % len);
            items.reverse();
            let b = Lexicon::new(items.into_iter().collect(), ["c".to_string()].into_iter().collect(), 2).unwrap();
            prop_assert_eq!(score(&text, &a), score(&text, &b));
        }

        #[test]
        fn appending_positive_never_decreases(words in prop::collection::vec("[a-z]{1,8}", 0..40)) {
            let l = Lexicon::builtin();
            let text = words.join(" ");
            let base = score(&text, &l);
            // a +1 token with no negator among its 3 predecessors
            let tail: Vec<&str> = words.iter().rev().take(l.negation_window()).map(String::as_str).collect();
            prop_assume!(tail.iter().all(|t| !DEFAULT_NEGATORS.contains(t)));
            let mut l1 = l.clone();
            l1.entries.insert("zzplus".into(), 1.0);
            let before = score(&text, &l1);
            prop_assert_eq!(before, base);
            let after = score(&format!("{text} zzplus"), &l1);
            prop_assert!(after.value >= before.value);
        }
    }
}
