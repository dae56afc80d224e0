use std::collections::HashSet;
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};

pub const STOPWORDS: &str = include_str!("../../data/stopwords.txt");

/// A sentence after preprocessing: lowercase, stopword-free stems.
pub type Sentence = Vec<String>;
/// A document is the list of its sentences.
pub type Document = Vec<Sentence>;

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| {
        STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .collect()
    })
}

pub fn is_stopword(token: &str) -> bool {
    stopwords().contains(token)
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Porter-style stem, iterated to a fixed point so stemming a stem is a no-op.
pub fn stem(token: &str) -> String {
    let mut cur = token.to_string();
    for _ in 0..8 {
        let next = stemmer().stem(&cur).into_owned();
        if next == cur {
            break;
        }
        cur = next;
    }
    cur
}

/// Splits on `.`, `!` and `?`, then tokenizes, drops stopwords and stems.
/// Sentences left empty are dropped.
pub fn preprocess(text: &str) -> Document {
    text.split(['.', '!', '?'])
        .map(|s| {
            s.split(|c: char| !c.is_alphanumeric())
                .filter(|t| !t.is_empty())
                .map(str::to_lowercase)
                .filter(|t| !is_stopword(t))
                .map(|t| stem(&t))
                .filter(|t| !t.is_empty() && !is_stopword(t))
                .collect::<Sentence>()
        })
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty() {
        assert!(preprocess("").is_empty());
        assert!(preprocess("... ?!").is_empty());
    }

    #[test]
    fn two_sentences() {
        let doc = preprocess("The gates were great. Boarding was slow.");
        assert_eq!(doc, vec![vec!["gate", "great"], vec!["board", "slow"]]);
    }

    #[test]
    fn stopword_only_sentence_dropped() {
        let doc = preprocess("It was the. Immigration queues!");
        assert_eq!(doc, vec![vec!["immigr", "queue"]]);
    }

    #[test]
    fn restemming_is_identity() {
        let once = preprocess("Generalizations about boarding times were hopelessly exaggerated. Friendly staff!");
        let joined: Vec<String> = once.iter().map(|s| s.join(" ")).collect();
        let twice = preprocess(&joined.join(". "));
        assert_eq!(once, twice);
    }

    proptest! {
        #[test]
        fn idempotent(text in "[A-Za-z .!?,]{0,300}") {
            let once = preprocess(&text);
            let joined: Vec<String> = once.iter().map(|s| s.join(" ")).collect();
            prop_assert_eq!(preprocess(&joined.join(". ")), once);
        }
    }
}
