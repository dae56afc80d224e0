use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::schema::{Category, RatingSchema};
use super::ReviewError;

/// One scraped review.
///
/// `ratings` is aligned with the category's [`RatingSchema`] feature order;
/// `None` marks a rating the reviewer left blank (never imputed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReviewRecord {
    pub category: Category,
    pub author: Option<String>,
    pub timestamp: Option<NaiveDate>,
    pub entity: String,
    pub ratings: Vec<Option<u8>>,
    pub overall: Option<u8>,
    pub recommended: Option<bool>,
    pub text: String,
    pub sentiment: Option<f64>,
}

impl ReviewRecord {
    /// A record with every rating absent and no label.
    pub fn blank(category: Category) -> Self {
        ReviewRecord {
            category,
            author: None,
            timestamp: None,
            entity: String::new(),
            ratings: vec![None; category.schema().len()],
            overall: None,
            recommended: None,
            text: String::new(),
            sentiment: None,
        }
    }

    pub fn rating(&self, feature: &str) -> Option<u8> {
        let idx = self.category.schema().index_of(feature)?;
        self.ratings.get(idx).copied().flatten()
    }

    /// Numeric value of a named variable: a schema feature, `overall` or `sentiment`.
    pub fn value(&self, variable: &str) -> Option<f64> {
        match variable {
            "overall" => self.overall.map(f64::from),
            "sentiment" => self.sentiment,
            other => self.rating(other).map(f64::from),
        }
    }

    fn check(&self, schema: &RatingSchema) -> Result<(), String> {
        if self.category != schema.category {
            return Err(format!(
                "record category {} does not match dataset category {}",
                self.category, schema.category
            ));
        }
        if self.ratings.len() != schema.len() {
            return Err(format!(
                "expected {} ratings, found {}",
                schema.len(),
                self.ratings.len()
            ));
        }
        for (name, r) in schema.features().iter().zip(&self.ratings) {
            if let Some(v) = r {
                if !schema.feature_domain().contains(*v) {
                    return Err(format!("rating {name}={v} outside 1..5"));
                }
            }
        }
        if let Some(v) = self.overall {
            if !schema.overall_domain().contains(v) {
                return Err(format!("overall={v} outside 1..10"));
            }
        }
        if let Some(s) = self.sentiment {
            if !(-1.0..=1.0).contains(&s) {
                return Err(format!("sentiment {s} outside [-1, 1]"));
            }
        }
        Ok(())
    }
}

/// An immutable, validated collection of reviews from a single category.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    category: Category,
    schema: RatingSchema,
    records: Vec<ReviewRecord>,
}

impl Dataset {
    pub fn new(category: Category, records: Vec<ReviewRecord>) -> Result<Self, ReviewError> {
        let schema = category.schema();
        for (index, r) in records.iter().enumerate() {
            r.check(&schema)
                .map_err(|reason| ReviewError::InvalidRecord { index, reason })?;
        }
        Ok(Dataset {
            category,
            schema,
            records,
        })
    }

    pub fn empty(category: Category) -> Self {
        Dataset {
            category,
            schema: category.schema(),
            records: Vec::new(),
        }
    }

    pub fn category(&self) -> Category {
        self.category
    }

    pub fn schema(&self) -> &RatingSchema {
        &self.schema
    }

    pub fn records(&self) -> &[ReviewRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn into_records(self) -> Vec<ReviewRecord> {
        self.records
    }

    /// Same category, different records. Records are assumed to come from
    /// this dataset (already validated).
    pub(crate) fn with_records(&self, records: Vec<ReviewRecord>) -> Self {
        Dataset {
            category: self.category,
            schema: self.schema.clone(),
            records,
        }
    }

    /// Records carrying a recommendation label, in order.
    pub fn labeled(&self) -> Dataset {
        self.with_records(
            self.records
                .iter()
                .filter(|r| r.recommended.is_some())
                .cloned()
                .collect(),
        )
    }

    /// Column of a named variable across all records.
    pub fn column(&self, variable: &str) -> Vec<Option<f64>> {
        self.records.iter().map(|r| r.value(variable)).collect()
    }
}
