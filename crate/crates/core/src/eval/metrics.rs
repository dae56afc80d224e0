use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl Confusion {
    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

fn f1_from(tp: u64, fp: u64, fn_: u64) -> f64 {
    let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// F1 of each class, `[not_recommend, recommend]`.
pub fn f1_per_class(c: &Confusion) -> [f64; 2] {
    [f1_from(c.tn, c.fn_, c.fp), f1_from(c.tp, c.fp, c.fn_)]
}

/// Support-weighted mean of the per-class F1 scores.
pub fn f1(c: &Confusion) -> f64 {
    let n = c.total();
    if n == 0 {
        return 0.0;
    }
    let [neg, pos] = f1_per_class(c);
    let support_pos = (c.tp + c.fn_) as f64;
    let support_neg = (c.tn + c.fp) as f64;
    (neg * support_neg + pos * support_pos) / n as f64
}

/// Rank-sum (Mann-Whitney) ROC AUC with average ranks for ties.
pub fn auc(scores: &[(f64, bool)]) -> Result<f64, EvalError> {
    let n_pos = scores.iter().filter(|s| s.1).count();
    let n_neg = scores.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(EvalError::AucUndefined { n_pos, n_neg });
    }
    if scores.iter().any(|s| s.0.is_nan()) {
        return Err(EvalError::InvalidScore);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].0.total_cmp(&scores[b].0));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]].0 == scores[order[i]].0 {
            j += 1;
        }
        // ranks are 1-based; the tie group i..=j shares the mean rank
        let avg_rank = (i + j) as f64 / 2.0 + 1.0;
        let pos_in_group = order[i..=j].iter().filter(|&&k| scores[k].1).count();
        rank_sum_pos += avg_rank * pos_in_group as f64;
        i = j + 1;
    }
    let np = n_pos as f64;
    let nn = n_neg as f64;
    Ok((rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_pairs(scores: &[(f64, bool)]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for p in scores.iter().filter(|s| s.1) {
            for n in scores.iter().filter(|s| !s.1) {
                den += 1.0;
                if p.0 > n.0 {
                    num += 1.0;
                } else if p.0 == n.0 {
                    num += 0.5;
                }
            }
        }
        num / den
    }

    #[test]
    fn perfect_f1() {
        let c = Confusion { tp: 7, fp: 0, tn: 3, fn_: 0 };
        assert_eq!(f1(&c), 1.0);
    }

    #[test]
    fn all_positive_on_balanced_set() {
        // positive: P = 1/2, R = 1 -> 2/3; negative: 0; weights 5/10 each
        let c = Confusion { tp: 5, fp: 5, tn: 0, fn_: 0 };
        assert!((f1(&c) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_per_class(&c), [0.0, 2.0 / 3.0]);
    }

    #[test]
    fn all_missed() {
        assert_eq!(f1(&Confusion { tp: 0, fp: 0, tn: 0, fn_: 10 }), 0.0);
    }

    #[test]
    fn auc_fixtures() {
        let perfect = [(1.0, true), (0.0, false), (1.0, true), (0.0, false)];
        assert_eq!(auc(&perfect).unwrap(), 1.0);
        let ties = [(0.3, true), (0.3, false), (0.3, false), (0.3, true), (0.3, true)];
        assert_eq!(auc(&ties).unwrap(), 0.5);
        let six = [(0.9, true), (0.8, false), (0.7, true), (0.7, false), (0.3, true), (0.1, false)];
        // 5.5 concordant pairs of 9, counted by hand
        assert!((auc(&six).unwrap() - 5.5 / 9.0).abs() < 1e-15);
        assert!((all_pairs(&six) - 5.5 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn auc_single_class() {
        assert!(matches!(auc(&[(0.2, true), (0.4, true)]), Err(EvalError::AucUndefined { n_pos: 2, n_neg: 0 })));
        assert!(auc(&[]).is_err());
    }

    proptest! {
        #[test]
        fn auc_matches_pair_count(v in prop::collection::vec((0u8..20, any::<bool>()), 2..200)) {
            let scores: Vec<(f64, bool)> = v.iter().map(|&(s, l)| (s as f64 / 20.0, l)).collect();
            if let Ok(a) = auc(&scores) {
                prop_assert!((a - all_pairs(&scores)).abs() < 1e-12);
                let squashed: Vec<(f64, bool)> = scores.iter().map(|&(s, l)| ((3.0 * s).exp() - 7.0, l)).collect();
                prop_assert!((auc(&squashed).unwrap() - a).abs() < 1e-12);
            }
        }

        #[test]
        fn f1_in_unit_interval(tp in 0u64..50, fp in 0u64..50, tn in 0u64..50, fn_ in 0u64..50) {
            let v = f1(&Confusion { tp, fp, tn, fn_ });
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
