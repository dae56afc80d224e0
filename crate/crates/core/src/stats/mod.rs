//! Pearson correlation among rating features, sentiment and the overall rating.

pub mod special;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::review::{Category, Dataset};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CorrelationError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("insufficient pairs: {0} complete pairs, need at least 3")]
    InsufficientPairs(usize),
    #[error("degenerate variable: zero variance over {0} complete pairs")]
    DegenerateVariable(usize),
    #[error("report has no `overall` variable")]
    NoOverall,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pearson {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// p-values below this are reported as exactly zero.
const P_FLOOR: f64 = 1e-300;

/// Pearson's r over the pairwise-complete observations of `x` and `y`, with
/// the two-sided t-test p-value on n - 2 degrees of freedom.
pub fn pearson(x: &[Option<f64>], y: &[Option<f64>]) -> Result<Pearson, CorrelationError> {
    if x.len() != y.len() {
        return Err(CorrelationError::LengthMismatch(x.len(), y.len()));
    }
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter_map(|(a, b)| Some(((*a)?, (*b)?)))
        .collect();
    let n = pairs.len();
    if n < 3 {
        return Err(CorrelationError::InsufficientPairs(n));
    }
    let nf = n as f64;
    let mean_x = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for &(a, b) in &pairs {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CorrelationError::DegenerateVariable(n));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    Ok(Pearson {
        r,
        p: p_value(r, n),
        n,
    })
}

/// Convenience wrapper for fully observed vectors.
pub fn pearson_dense(x: &[f64], y: &[f64]) -> Result<Pearson, CorrelationError> {
    let wrap = |v: &[f64]| v.iter().copied().map(Some).collect::<Vec<_>>();
    pearson(&wrap(x), &wrap(y))
}

/// Two-sided p of r under H0: ρ = 0. With t = r·sqrt(df/(1-r²)) the
/// incomplete-beta argument df/(df+t²) reduces to 1 - r².
pub fn p_value(r: f64, n: usize) -> f64 {
    let df = n as f64 - 2.0;
    let x = 1.0 - r * r;
    if x <= 0.0 {
        return 0.0;
    }
    let p = special::beta_reg(df / 2.0, 0.5, x).clamp(0.0, 1.0);
    if p < P_FLOOR {
        0.0
    } else {
        p
    }
}

/// Pairwise correlation matrix over all schema features, `overall` and `sentiment`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub category: Category,
    pub variables: Vec<String>,
    pub r: Vec<Vec<Option<f64>>>,
    pub p: Vec<Vec<Option<f64>>>,
    pub n: Vec<Vec<usize>>,
}

impl CorrelationReport {
    pub fn index_of(&self, variable: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == variable)
    }

    pub fn r_between(&self, a: &str, b: &str) -> Option<f64> {
        self.r[self.index_of(a)?][self.index_of(b)?]
    }

    /// Variables other than `overall`, ordered by r with `overall`
    /// (descending, ties by name). Absent correlations are left out.
    pub fn ranked_against_overall(&self) -> Result<Vec<(String, f64)>, CorrelationError> {
        let o = self.index_of("overall").ok_or(CorrelationError::NoOverall)?;
        let mut ranked: Vec<(String, f64)> = self
            .variables
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != o)
            .filter_map(|(i, v)| Some((v.clone(), self.r[i][o]?)))
            .collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        Ok(ranked)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    /// r matrix as CSV; absent entries are written as `null`. `preamble`
    /// lines are emitted first as `#` comments.
    pub fn write_csv<W: Write>(&self, mut out: W, preamble: &[String]) -> std::io::Result<()> {
        for line in preamble {
            writeln!(out, "# {line}")?;
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let mut header = vec!["variable".to_string()];
        header.extend(self.variables.iter().cloned());
        w.write_record(&header)?;
        for (name, row) in self.variables.iter().zip(&self.r) {
            let mut rec = vec![name.clone()];
            rec.extend(
                row.iter()
                    .map(|v| v.map_or_else(|| "null".to_string(), |x| x.to_string())),
            );
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// Variables of a category's correlation matrix, in report order.
pub fn report_variables(category: Category) -> Vec<String> {
    let mut vars: Vec<String> = category
        .schema()
        .features()
        .iter()
        .map(|s| s.to_string())
        .collect();
    vars.push("overall".into());
    vars.push("sentiment".into());
    vars
}

pub fn correlation_matrix(d: &Dataset) -> CorrelationReport {
    let variables = report_variables(d.category());
    let columns: Vec<Vec<Option<f64>>> = variables.iter().map(|v| d.column(v)).collect();
    let k = variables.len();
    let mut r = vec![vec![None; k]; k];
    let mut p = vec![vec![None; k]; k];
    let mut n = vec![vec![0usize; k]; k];
    for i in 0..k {
        let present = columns[i].iter().filter(|v| v.is_some()).count();
        n[i][i] = present;
        if present >= 2 {
            r[i][i] = Some(1.0);
            p[i][i] = Some(0.0);
        }
        for j in (i + 1)..k {
            let complete = columns[i]
                .iter()
                .zip(&columns[j])
                .filter(|(a, b)| a.is_some() && b.is_some())
                .count();
            n[i][j] = complete;
            n[j][i] = complete;
            match pearson(&columns[i], &columns[j]) {
                Ok(res) => {
                    r[i][j] = Some(res.r);
                    r[j][i] = Some(res.r);
                    p[i][j] = Some(res.p);
                    p[j][i] = Some(res.p);
                }
                Err(e) => {
                    log::debug!("{} ~ {}: {e}", variables[i], variables[j]);
                }
            }
        }
    }
    CorrelationReport {
        category: d.category(),
        variables,
        r,
        p,
        n,
    }
}

/// Variables whose correlation with `overall` exceeds `threshold`, strongest
/// first (ties by name). `overall` itself is listed only when `include_overall`.
pub fn select_features(
    rep: &CorrelationReport,
    threshold: f64,
    include_overall: bool,
) -> Result<Vec<String>, CorrelationError> {
    let o = rep.index_of("overall").ok_or(CorrelationError::NoOverall)?;
    let mut picked: Vec<(String, f64)> = rep
        .variables
        .iter()
        .enumerate()
        .filter(|&(i, _)| include_overall || i != o)
        .filter_map(|(i, v)| {
            let r = rep.r[i][o]?;
            (r > threshold).then(|| (v.clone(), r))
        })
        .collect();
    picked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(picked.into_iter().map(|(v, _)| v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::review::ReviewRecord;
    use proptest::prelude::*;

    fn dense(v: &[f64]) -> Vec<Option<f64>> {
        v.iter().copied().map(Some).collect()
    }

    #[test]
    fn self_correlation_is_exactly_one() {
        let x = [1.0, 4.0, 2.5, 9.0, -3.0, 0.1];
        assert_eq!(pearson_dense(&x, &x).unwrap().r, 1.0);
    }

    #[test]
    fn perfect_anticorrelation() {
        assert_eq!(pearson_dense(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap().r, -1.0);
    }

    #[test]
    fn five_point_fixture() {
        // 50-digit evaluation of the textbook formula
        let res = pearson_dense(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 6.0]).unwrap();
        assert!((res.r - 0.821_994_936_526_786_4).abs() < 1e-15);
        assert!((res.p - 0.087_706_647_008_065_55).abs() < 1e-12);
        assert_eq!(res.n, 5);
    }

    #[test]
    fn pairwise_complete_deletion() {
        let x = vec![Some(1.0), None, Some(2.0), Some(3.0), Some(9.0)];
        let y = vec![Some(1.0), Some(5.0), Some(2.0), Some(3.0), None];
        let res = pearson(&x, &y).unwrap();
        assert_eq!(res.n, 3);
        assert_eq!(res.r, 1.0);
    }

    #[test]
    fn error_paths() {
        assert_eq!(
            pearson_dense(&[1.0, 2.0], &[1.0, 2.0]),
            Err(CorrelationError::InsufficientPairs(2))
        );
        assert_eq!(
            pearson_dense(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(CorrelationError::DegenerateVariable(3))
        );
        assert!(matches!(
            pearson(&dense(&[1.0]), &dense(&[1.0, 2.0])),
            Err(CorrelationError::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn p_decreases_in_abs_r() {
        let mut last = f64::INFINITY;
        for i in 0..100 {
            let r = i as f64 / 100.0;
            let p = p_value(r, 20);
            assert!(p < last);
            assert_eq!(p, p_value(-r, 20));
            last = p;
        }
        assert_eq!(p_value(1.0, 20), 0.0);
        assert_eq!(p_value(0.0, 20), 1.0);
    }

    fn airport_record(queuing: Option<u8>, overall: Option<u8>) -> ReviewRecord {
        let mut r = ReviewRecord::blank(Category::Airport);
        r.ratings[0] = queuing;
        r.overall = overall;
        r
    }

    #[test]
    fn two_record_matrix_is_all_absent_off_diagonal() {
        let d = Dataset::new(
            Category::Airport,
            vec![airport_record(Some(1), Some(2)), airport_record(Some(5), Some(9))],
        )
        .unwrap();
        let rep = correlation_matrix(&d);
        for i in 0..rep.variables.len() {
            for j in 0..rep.variables.len() {
                if i != j {
                    assert_eq!(rep.r[i][j], None);
                }
            }
        }
        assert_eq!(rep.r_between("queuing", "queuing"), Some(1.0));
    }

    #[test]
    fn feature_equal_to_overall() {
        let d = Dataset::new(
            Category::Airport,
            (1..=5).map(|v| airport_record(Some(v), Some(v))).collect(),
        )
        .unwrap();
        let rep = correlation_matrix(&d);
        assert_eq!(rep.r_between("queuing", "overall"), Some(1.0));
        assert_eq!(rep.r_between("overall", "queuing"), Some(1.0));
        assert_eq!(rep.r_between("queuing", "sentiment"), None);
        let qi = rep.index_of("queuing").unwrap();
        let oi = rep.index_of("overall").unwrap();
        assert_eq!(rep.n[qi][oi], 5);
    }

    fn hand_report() -> CorrelationReport {
        let v = |x: f64| Some(x);
        CorrelationReport {
            category: Category::Seat,
            variables: vec!["a".into(), "b".into(), "overall".into(), "c".into()],
            r: vec![
                vec![v(1.0), v(0.1), v(0.45), v(0.0)],
                vec![v(0.1), v(1.0), v(0.2), v(0.0)],
                vec![v(0.45), v(0.2), v(1.0), v(0.45)],
                vec![v(0.0), v(0.0), v(0.45), v(1.0)],
            ],
            p: vec![vec![v(0.0); 4]; 4],
            n: vec![vec![10; 4]; 4],
        }
    }

    #[test]
    fn select_matches_direct_filter() {
        let rep = hand_report();
        for &threshold in &[-1.0, 0.0, 0.1, 0.2, 0.3, 0.45, 0.5, 1.0] {
            let mut oracle: Vec<(&str, f64)> = Vec::new();
            for (i, name) in rep.variables.iter().enumerate() {
                if name != "overall" && rep.r[i][2].unwrap() > threshold {
                    oracle.push((name, rep.r[i][2].unwrap()));
                }
            }
            oracle.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(b.0)));
            let want: Vec<&str> = oracle.iter().map(|o| o.0).collect();
            assert_eq!(select_features(&rep, threshold, false).unwrap(), want);
        }
        assert_eq!(select_features(&rep, 0.3, true).unwrap(), vec!["overall", "a", "c"]);
    }

    #[test]
    fn select_threshold_one() {
        let rep = hand_report();
        assert!(select_features(&rep, 1.0, true).unwrap().is_empty());
        assert_eq!(select_features(&rep, 0.999, true).unwrap(), vec!["overall"]);
        assert!(select_features(&rep, 0.999, false).unwrap().is_empty());
    }

    #[test]
    fn json_and_csv_export() {
        let mut rep = hand_report();
        rep.r[0][1] = None;
        let back = CorrelationReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
        let mut out = Vec::new();
        rep.write_csv(&mut out, &["threshold=0.3".into()]).unwrap();
        let s = String::from_utf8(out).unwrap();
        assert!(s.starts_with("# threshold=0.3\nvariable,a,b,overall,c\na,1,null,0.45,0\n"));
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(xs in prop::collection::vec(-1e3f64..1e3, 3..60), seed in any::<u64>()) {
            let ys: Vec<f64> = xs.iter().enumerate()
                .map(|(i, x)| (x * 0.3 + ((seed.wrapping_mul(i as u64 + 7) % 1000) as f64)).sin())
                .collect();
            if let (Ok(a), Ok(b)) = (pearson_dense(&xs, &ys), pearson_dense(&ys, &xs)) {
                prop_assert_eq!(a.r, b.r);
                prop_assert!(a.r.abs() <= 1.0);
                prop_assert!((0.0..=1.0).contains(&a.p));
            }
        }

        #[test]
        fn affine_invariance(xs in prop::collection::vec(-100f64..100.0, 3..80),
                             ys in prop::collection::vec(-100f64..100.0, 80),
                             scale in 0.01f64..50.0, shift in -1e3f64..1e3) {
            let ys = &ys[..xs.len()];
            let base = match pearson_dense(&xs, ys) { Ok(b) => b, Err(_) => return Ok(()) };
            let pos: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            let neg: Vec<f64> = xs.iter().map(|x| -scale * x + shift).collect();
            prop_assert!((pearson_dense(&pos, ys).unwrap().r - base.r).abs() < 1e-12);
            prop_assert!((pearson_dense(&neg, ys).unwrap().r + base.r).abs() < 1e-12);
        }
    }
}
