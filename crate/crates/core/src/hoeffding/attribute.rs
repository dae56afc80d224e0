use serde::{Deserialize, Serialize};

use super::TreeError;
use crate::review::Domain;

/// How an attribute's raw value maps onto tree branches. Every attribute has
/// one extra trailing branch for an absent value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributeKind {
    /// Integer levels, one branch each.
    Nominal { levels: Vec<i64> },
    /// Equal or unequal width bins between consecutive edges; values outside
    /// the outer edges fall into the first or last bin.
    Numeric { edges: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
}

impl AttributeSpec {
    pub fn nominal(name: &str, levels: Vec<i64>) -> Result<Self, TreeError> {
        let spec = AttributeSpec {
            name: name.to_string(),
            kind: AttributeKind::Nominal { levels },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn numeric(name: &str, edges: Vec<f64>) -> Result<Self, TreeError> {
        let spec = AttributeSpec {
            name: name.to_string(),
            kind: AttributeKind::Numeric { edges },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Nominal attribute over an integer rating domain.
    pub fn rating(name: &str, domain: Domain) -> Self {
        Self::nominal(name, (i64::from(domain.min)..=i64::from(domain.max)).collect())
            .expect("rating domains are non-empty")
    }

    /// `bins` equal-width bins over [lo, hi].
    pub fn equal_width(name: &str, lo: f64, hi: f64, bins: usize) -> Result<Self, TreeError> {
        if bins == 0 {
            return Err(TreeError::InvalidAttribute(format!("{name}: zero bins")));
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|i| lo + width * i as f64).collect();
        edges.push(hi);
        Self::numeric(name, edges)
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        let bad = |why: &str| Err(TreeError::InvalidAttribute(format!("{}: {why}", self.name)));
        match &self.kind {
            AttributeKind::Nominal { levels } => {
                if levels.is_empty() {
                    return bad("empty level list");
                }
                let mut sorted = levels.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != levels.len() {
                    return bad("duplicate levels");
                }
            }
            AttributeKind::Numeric { edges } => {
                if edges.len() < 2 {
                    return bad("need at least two bin edges");
                }
                if edges.iter().any(|e| !e.is_finite()) {
                    return bad("non-finite bin edge");
                }
                if edges.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("bin edges must be strictly increasing");
                }
            }
        }
        Ok(())
    }

    /// Branch count including the absent branch.
    pub fn n_branches(&self) -> usize {
        match &self.kind {
            AttributeKind::Nominal { levels } => levels.len() + 1,
            AttributeKind::Numeric { edges } => edges.len(),
        }
    }

    pub fn absent_branch(&self) -> usize {
        self.n_branches() - 1
    }

    pub fn branch(&self, value: Option<f64>) -> Result<usize, TreeError> {
        let Some(v) = value else {
            return Ok(self.absent_branch());
        };
        match &self.kind {
            AttributeKind::Nominal { levels } => {
                if v.fract() == 0.0 {
                    if let Some(i) = levels.iter().position(|&l| l as f64 == v) {
                        return Ok(i);
                    }
                }
                Err(TreeError::UnknownValue {
                    attribute: self.name.clone(),
                    value: v,
                })
            }
            AttributeKind::Numeric { edges } => {
                if v.is_nan() {
                    return Err(TreeError::UnknownValue {
                        attribute: self.name.clone(),
                        value: v,
                    });
                }
                let bins = edges.len() - 1;
                // number of interior edges <= v
                let k = edges[1..bins].partition_point(|&e| e <= v);
                Ok(k)
            }
        }
    }

    pub fn branch_label(&self, branch: usize) -> String {
        if branch == self.absent_branch() {
            return "absent".into();
        }
        match &self.kind {
            AttributeKind::Nominal { levels } => levels[branch].to_string(),
            AttributeKind::Numeric { edges } => format!("[{}, {})", edges[branch], edges[branch + 1]),
        }
    }
}
