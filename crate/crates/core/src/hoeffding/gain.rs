use super::tree::LeafStats;
use super::{AttributeSpec, TreeError};

/// ε = sqrt(R² ln(1/δ) / 2n).
pub fn hoeffding_bound(range: f64, delta: f64, n: u64) -> Result<f64, TreeError> {
    if !(range > 0.0 && range.is_finite()) {
        return Err(TreeError::InvalidParam(format!("range R must be > 0, got {range}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TreeError::InvalidParam(format!("delta must be in (0, 1), got {delta}")));
    }
    if n == 0 {
        return Err(TreeError::InvalidParam("n must be >= 1".into()));
    }
    Ok(bound(range, delta, n))
}

pub(crate) fn bound(range: f64, delta: f64, n: u64) -> f64 {
    (range * range * (1.0 / delta).ln() / (2.0 * n as f64)).sqrt()
}

/// Shannon entropy in bits of a class-count vector; 0·log 0 = 0.
pub fn entropy(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

/// Information gain of splitting a leaf on attribute `index`.
pub(crate) fn gain_at(stats: &LeafStats, index: usize) -> f64 {
    let n = stats.n_seen;
    if n == 0 {
        return 0.0;
    }
    let before = entropy(&stats.class_counts);
    let after: f64 = stats.contingency[index]
        .iter()
        .map(|branch| {
            let nv: u64 = branch.iter().sum();
            nv as f64 / n as f64 * entropy(branch)
        })
        .sum();
    // rounding can leave a tiny negative residue for uninformative attributes
    (before - after).max(0.0)
}

/// Information gain of `attr` at a leaf, looked up by name.
pub fn info_gain(stats: &LeafStats, attributes: &[AttributeSpec], attr: &str) -> Result<f64, TreeError> {
    let index = attributes
        .iter()
        .position(|a| a.name == attr)
        .ok_or_else(|| TreeError::UnknownAttribute(attr.to_string()))?;
    if stats.n_seen == 0 {
        return Err(TreeError::InvalidParam("leaf has seen no records".into()));
    }
    Ok(gain_at(stats, index))
}
