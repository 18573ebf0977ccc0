//! Pearson correlation with a two-tailed Student-t significance test.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use super::special::beta_reg;
use super::{StatsError, STRONG_R};
use crate::lexicon::FeatureVector;
use crate::model::{BigFive, Trait};
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Correlation {
    pub r: f64,
    pub p: f64,
    pub n: usize,
}

/// Sample correlation and its two-tailed p-value under H0: ρ = 0.
///
/// With t = r·√((n−2)/(1−r²)) and ν = n−2, the tail probability is
/// I_{ν/(ν+t²)}(ν/2, ½), and ν/(ν+t²) simplifies to 1 − r².
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Correlation, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew(n));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::Constant);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = nf - 2.0;
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        beta_reg(df / 2.0, 0.5, (1.0 - r) * (1.0 + r))
    };
    Ok(Correlation { r, p, n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub feature_name: String,
    pub trait_: Trait,
    /// `None` when the feature is constant across users.
    pub r: Option<f64>,
    pub p: Option<f64>,
    pub n: usize,
    pub significant: bool,
    pub strong: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub results: Vec<CorrelationResult>,
    pub n: usize,
    /// Feature vectors without a score, or degenerate.
    pub excluded: usize,
    pub alpha: f64,
}

impl CorrelationTable {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["feature", "trait", "r", "p", "n", "significant", "strong"]);
        for r in &self.results {
            t.push(vec![
                r.feature_name.as_str().into(),
                r.trait_.letter().into(),
                r.r.into(),
                r.p.into(),
                r.n.into(),
                r.significant.into(),
                r.strong.into(),
            ]);
        }
        t
    }

    /// Category rows × trait columns of r (Table-4 layout); undefined cells
    /// are empty and non-significant ones carry a trailing `*`.
    pub fn to_wide_table(&self) -> Table {
        let mut t = Table::new(["feature", "O", "C", "E", "A", "N"]);
        for chunk in self.results.chunks(5) {
            let mut row = vec![Cell::from(chunk[0].feature_name.as_str())];
            for r in chunk {
                row.push(match r.r {
                    Some(v) if r.significant => Cell::Str(format!("{v:.3}")),
                    Some(v) => Cell::Str(format!("{v:.3}*")),
                    None => Cell::Empty,
                });
            }
            t.push(row);
        }
        t
    }
}

/// One result per (category, trait), categories in the given order and traits
/// O, C, E, A, N. Users are joined on id; degenerate vectors are left out.
pub fn correlation_matrix(
    category_names: &[String],
    features: &[FeatureVector],
    scores: &[(String, BigFive)],
    alpha: f64,
) -> Result<CorrelationTable, StatsError> {
    let by_id: HashMap<&str, &BigFive> = scores.iter().map(|(id, s)| (id.as_str(), s)).collect();
    let mut rows: Vec<(&FeatureVector, &BigFive)> = features
        .iter()
        .filter(|f| !f.is_degenerate())
        .filter_map(|f| by_id.get(f.user_id.as_str()).map(|s| (f, *s)))
        .collect();
    rows.sort_by(|a, b| a.0.user_id.cmp(&b.0.user_id));
    let n = rows.len();
    if n < 3 {
        return Err(StatsError::TooFew(n));
    }
    let excluded = features.len() - n;
    let trait_cols: Vec<Vec<f64>> = Trait::ALL
        .iter()
        .map(|t| rows.iter().map(|(_, s)| s.get(*t)).collect())
        .collect();

    let pairs: Vec<(usize, Trait)> = (0..category_names.len())
        .flat_map(|c| Trait::ALL.into_iter().map(move |t| (c, t)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(c, t)| {
            let x: Vec<f64> = rows.iter().map(|(f, _)| f.freqs[c]).collect();
            let (r, p) = match pearson(&x, &trait_cols[t.index()]) {
                Ok(corr) => (Some(corr.r), Some(corr.p)),
                Err(_) => (None, None),
            };
            CorrelationResult {
                feature_name: category_names[c].clone(),
                trait_: t,
                r,
                p,
                n,
                significant: p.is_some_and(|p| p < alpha),
                strong: r.is_some_and(|r| r.abs() >= STRONG_R),
            }
        })
        .collect();
    Ok(CorrelationTable {
        results,
        n,
        excluded,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_linearity() {
        let c = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!(c.r, 1.0);
        assert_eq!(c.p, 0.0);
        assert_eq!(c.n, 3);
    }

    #[test]
    fn hand_computed_covariance() {
        // cov sum = 4, Σdx² = Σdy² = 5  →  r = 0.8.
        let c = pearson(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((c.r - 0.8).abs() < 1e-15);
    }

    #[test]
    fn p_value_anchor() {
        // r = 0.195 with n = 102: two-tailed p ≈ 0.04953.
        let n = 102;
        let r: f64 = 0.195;
        let p = beta_reg((n - 2) as f64 / 2.0, 0.5, 1.0 - r * r);
        assert!((p - 0.0496).abs() < 5e-4, "{p}");
        let t = r * ((n - 2) as f64 / (1.0 - r * r)).sqrt();
        let via_t = super::super::special::student_t_two_tailed(t, (n - 2) as f64);
        assert!((p - via_t).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0]),
            Err(StatsError::LengthMismatch(2, 1))
        );
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFew(2))
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::Constant)
        );
    }

    fn fv(id: &str, freqs: Vec<f64>) -> FeatureVector {
        FeatureVector {
            user_id: id.into(),
            freqs,
            token_count: 10,
        }
    }

    #[test]
    fn matrix_layout_and_constant_features() {
        let names = vec!["I".to_string(), "Flat".to_string()];
        let mut features = Vec::new();
        let mut scores = Vec::new();
        for i in 0..6 {
            let v = i as f64;
            features.push(fv(&format!("u{i}"), vec![v, 3.0]));
            scores.push((
                format!("u{i}"),
                BigFive::new(v, -v, v * v, 1.0 + v, 2.0 * v),
            ));
        }
        features.push(fv("orphan", vec![1.0, 1.0]));
        let table = correlation_matrix(&names, &features, &scores, 0.05).unwrap();
        assert_eq!(table.results.len(), 10);
        assert_eq!(table.n, 6);
        assert_eq!(table.excluded, 1);
        let first = &table.results[0];
        assert_eq!((first.feature_name.as_str(), first.trait_), ("I", Trait::O));
        assert!((first.r.unwrap() - 1.0).abs() < 1e-15);
        assert!(first.significant && first.strong);
        assert!((table.results[1].r.unwrap() + 1.0).abs() < 1e-15);
        assert!(table.results[5..]
            .iter()
            .all(|r| r.r.is_none() && !r.significant));
        let wide = table.to_wide_table();
        assert_eq!(wide.len(), 2);
        assert_eq!(wide.rows[1][1], Cell::Empty);
    }

    #[test]
    fn matrix_needs_three_users() {
        let f = vec![fv("a", vec![1.0]), fv("b", vec![2.0])];
        let s = vec![
            ("a".into(), BigFive::default()),
            ("b".into(), BigFive::default()),
        ];
        assert_eq!(
            correlation_matrix(&["x".into()], &f, &s, 0.05).unwrap_err(),
            StatsError::TooFew(2)
        );
    }

    fn vecs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (3usize..40).prop_flat_map(|n| {
            (
                proptest::collection::vec(-100.0f64..100.0, n),
                proptest::collection::vec(-100.0f64..100.0, n),
            )
        })
    }

    proptest! {
        #[test]
        fn symmetric((x, y) in vecs()) {
            let a = pearson(&x, &y).unwrap();
            let b = pearson(&y, &x).unwrap();
            prop_assert_eq!(a.r, b.r);
            prop_assert_eq!(a.p, b.p);
            prop_assert!(a.r.abs() <= 1.0 && (0.0..=1.0).contains(&a.p));
        }

        #[test]
        fn affine_equivariant((x, y) in vecs(), a in prop_oneof![-50.0f64..-0.01, 0.01f64..50.0], c in -1e3f64..1e3) {
            let base = pearson(&x, &y).unwrap();
            let moved: Vec<f64> = x.iter().map(|v| a * v + c).collect();
            let r = pearson(&moved, &y).unwrap().r;
            prop_assert!((r - a.signum() * base.r).abs() < 1e-12, "{} vs {}", r, base.r);
        }

        #[test]
        fn p_decreases_with_abs_r(n in 3usize..600) {
            let df = (n - 2) as f64;
            let mut last = 1.0 + 1e-9;
            for i in 0..=100 {
                let r = i as f64 / 101.0;
                let p = beta_reg(df / 2.0, 0.5, 1.0 - r * r);
                // Deep in the tail p underflows to zero; strictness holds until then.
                if last > 0.0 {
                    prop_assert!(p < last, "n={} r={} p={} last={}", n, r, p, last);
                } else {
                    prop_assert_eq!(p, 0.0);
                }
                last = p;
            }
        }
    }
}
