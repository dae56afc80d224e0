use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::record::Dataset;
use super::schema::Category;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub category: Category,
    /// Distinct author identifiers; records without an author are not counted.
    pub n_users: usize,
    pub n_reviews: usize,
    pub n_labeled: usize,
    /// Fraction of labeled records recommending; `None` when nothing is labeled.
    pub satisfaction_rate: Option<f64>,
    /// Records repeating an earlier (author, entity) pair.
    pub n_duplicate_reviews: usize,
}

pub fn stats(d: &Dataset) -> DatasetStats {
    let mut authors = HashSet::new();
    let mut pairs = HashSet::new();
    let mut duplicates = 0;
    let mut labeled = 0;
    let mut positive = 0;
    for r in d.records() {
        if let Some(a) = &r.author {
            authors.insert(a.as_str());
            if !pairs.insert((a.as_str(), r.entity.as_str())) {
                duplicates += 1;
            }
        }
        if let Some(rec) = r.recommended {
            labeled += 1;
            if rec {
                positive += 1;
            }
        }
    }
    DatasetStats {
        category: d.category(),
        n_users: authors.len(),
        n_reviews: d.len(),
        n_labeled: labeled,
        satisfaction_rate: (labeled > 0).then(|| positive as f64 / labeled as f64),
        n_duplicate_reviews: duplicates,
    }
}
