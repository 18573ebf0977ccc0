//! Linear mapping from category frequencies to Big Five scores.
//!
//! The fit is multi-output ridge regression with an unpenalized intercept:
//! minimize `Σ‖yᵢ − (xᵢᵀW + b)‖² + λ‖W‖²_F`. Centering X and Y removes the
//! intercept, leaving `(XcᵀXc + λI) W = XcᵀYc`, solved by Cholesky
//! factorization of the K×K Gram matrix. Then `b = ȳ − x̄ᵀW`.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};

use nalgebra::{Cholesky, DMatrix, Dyn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lexicon::FeatureVector;

pub const MODEL_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_RIDGE_LAMBDA: f64 = 1.0;
/// Nominal score scale; predictions outside it are flagged, not clamped.
pub const SCORE_RANGE: (f64, f64) = (0.0, 100.0);

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("need at least 2 labeled users, got {0}")]
    TooFewUsers(usize),
    #[error("labeled user {0} has no feature vector")]
    MissingFeatures(String),
    #[error("labeled user {0} has no tokens")]
    DegenerateFeatures(String),
    #[error("user {0} is labeled twice")]
    DuplicateLabel(String),
    #[error("ridge strength must be finite and >= 0, got {0}")]
    BadLambda(f64),
    #[error("centered design is rank deficient (column {column}); use lambda > 0")]
    RankDeficient { column: String },
    #[error("feature vector for {user} has {got} values, expected {expected}")]
    Width {
        user: String,
        got: usize,
        expected: usize,
    },
    #[error("category mismatch: {0}")]
    CategoryMismatch(String),
    #[error("no scores to summarize")]
    Empty,
    #[error("model file: {0}")]
    Format(String),
    #[error("labels file: {0}")]
    Labels(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Trait {
    O,
    C,
    E,
    A,
    N,
}

impl Trait {
    pub const ALL: [Trait; 5] = [Trait::O, Trait::C, Trait::E, Trait::A, Trait::N];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn letter(self) -> &'static str {
        match self {
            Trait::O => "O",
            Trait::C => "C",
            Trait::E => "E",
            Trait::A => "A",
            Trait::N => "N",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Trait::O => "Openness",
            Trait::C => "Conscientiousness",
            Trait::E => "Extraversion",
            Trait::A => "Agreeableness",
            Trait::N => "Neuroticism",
        }
    }

    pub fn from_letter(s: &str) -> Option<Trait> {
        Trait::ALL
            .into_iter()
            .find(|t| t.letter().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Trait {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.letter())
    }
}

/// Scores in O, C, E, A, N order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BigFive(pub [f64; 5]);

impl BigFive {
    pub fn new(o: f64, c: f64, e: f64, a: f64, n: f64) -> Self {
        BigFive([o, c, e, a, n])
    }

    pub fn get(&self, t: Trait) -> f64 {
        self.0[t.index()]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn out_of_range(&self) -> bool {
        self.0
            .iter()
            .any(|&v| v < SCORE_RANGE.0 || v > SCORE_RANGE.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MappingModel {
    pub category_names: Vec<String>,
    /// One row per category, columns O..N.
    pub weights: Vec<[f64; 5]>,
    pub intercept: [f64; 5],
    pub lambda: f64,
    pub n_train: usize,
}

impl MappingModel {
    pub fn predict_one(&self, freqs: &[f64]) -> BigFive {
        let mut y = self.intercept;
        for (x, row) in freqs.iter().zip(&self.weights) {
            for t in 0..5 {
                y[t] += x * row[t];
            }
        }
        BigFive(y)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.weights
            .iter()
            .flat_map(|r| r.iter())
            .map(|w| w * w)
            .sum::<f64>()
            .sqrt()
    }

    /// JSON document with every float written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let num = |v: f64| format!("{v:.16e}");
        let arr = |vals: &[f64]| vals.iter().map(|&v| num(v)).collect::<Vec<_>>().join(", ");
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"format_version\": {MODEL_FORMAT_VERSION},");
        let names = serde_json::to_string(&self.category_names).expect("strings serialize");
        let _ = writeln!(out, "  \"category_names\": {names},");
        out.push_str("  \"W\": [");
        for (i, row) in self.weights.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            let _ = write!(out, "    [{}]", arr(row));
        }
        out.push_str(if self.weights.is_empty() {
            "],\n"
        } else {
            "\n  ],\n"
        });
        let _ = writeln!(out, "  \"b\": [{}],", arr(&self.intercept));
        let _ = writeln!(out, "  \"lambda\": {},", num(self.lambda));
        let _ = writeln!(out, "  \"n_train\": {}", self.n_train);
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Doc {
            format_version: u32,
            category_names: Vec<String>,
            #[serde(rename = "W")]
            w: Vec<[f64; 5]>,
            b: [f64; 5],
            lambda: f64,
            n_train: usize,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(ModelError::Format(format!(
                "unsupported format_version {}",
                doc.format_version
            )));
        }
        if doc.w.len() != doc.category_names.len() {
            return Err(ModelError::Format(format!(
                "W has {} rows for {} categories",
                doc.w.len(),
                doc.category_names.len()
            )));
        }
        Ok(MappingModel {
            category_names: doc.category_names,
            weights: doc.w,
            intercept: doc.b,
            lambda: doc.lambda,
            n_train: doc.n_train,
        })
    }
}

/// Relative size below which a Cholesky pivot counts as zero.
const REL_PIVOT_TOL: f64 = 1e-12;

/// Index of the first column at which `a` stops being positive definite.
fn first_singular_column(a: &DMatrix<f64>) -> usize {
    let k = a.nrows();
    let pd = |m: usize| m == 0 || Cholesky::new(a.view((0, 0), (m, m)).into_owned()).is_some();
    // Leading minors stay positive definite up to some size; find it.
    let (mut lo, mut hi) = (0, k);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if pd(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo.min(k - 1)
}

/// Factors the regularized Gram matrix, reporting the first column whose
/// pivot collapses relative to its diagonal.
fn factor(gram: DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, usize> {
    let diag = gram.diagonal();
    let chol = Cholesky::new(gram.clone()).ok_or_else(|| first_singular_column(&gram))?;
    let l = chol.l_dirty();
    for j in 0..diag.len() {
        // Written so that a NaN pivot also fails.
        let pivot_ok = l[(j, j)].powi(2) > REL_PIVOT_TOL * diag[j].abs();
        if !pivot_ok {
            return Err(j);
        }
    }
    Ok(chol)
}

/// Fits on users present in `labels`, processed in user-id order.
pub fn fit(
    category_names: &[String],
    features: &[FeatureVector],
    labels: &[(String, BigFive)],
    lambda: f64,
) -> Result<MappingModel, ModelError> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(ModelError::BadLambda(lambda));
    }
    let k = category_names.len();
    let by_id: HashMap<&str, &FeatureVector> =
        features.iter().map(|f| (f.user_id.as_str(), f)).collect();

    let mut sorted: Vec<&(String, BigFive)> = labels.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut seen = HashSet::new();
    let mut xs: Vec<&[f64]> = Vec::with_capacity(sorted.len());
    let mut ys: Vec<[f64; 5]> = Vec::with_capacity(sorted.len());
    for (id, score) in sorted {
        if !seen.insert(id.as_str()) {
            return Err(ModelError::DuplicateLabel(id.clone()));
        }
        let fv = by_id
            .get(id.as_str())
            .ok_or_else(|| ModelError::MissingFeatures(id.clone()))?;
        if fv.is_degenerate() {
            return Err(ModelError::DegenerateFeatures(id.clone()));
        }
        if fv.freqs.len() != k {
            return Err(ModelError::Width {
                user: id.clone(),
                got: fv.freqs.len(),
                expected: k,
            });
        }
        xs.push(&fv.freqs);
        ys.push(score.0);
    }
    let n = xs.len();
    if n < 2 {
        return Err(ModelError::TooFewUsers(n));
    }

    let nf = n as f64;
    let mut x_mean = vec![0.0; k];
    for x in &xs {
        for (m, v) in x_mean.iter_mut().zip(x.iter()) {
            *m += v;
        }
    }
    x_mean.iter_mut().for_each(|m| *m /= nf);
    let mut y_mean = [0.0; 5];
    for y in &ys {
        for t in 0..5 {
            y_mean[t] += y[t];
        }
    }
    y_mean.iter_mut().for_each(|m| *m /= nf);

    let mut gram = DMatrix::<f64>::zeros(k, k);
    let mut xty = DMatrix::<f64>::zeros(k, 5);
    let mut xc = vec![0.0; k];
    for (x, y) in xs.iter().zip(&ys) {
        for j in 0..k {
            xc[j] = x[j] - x_mean[j];
        }
        for i in 0..k {
            let xi = xc[i];
            if xi == 0.0 {
                continue;
            }
            for j in 0..=i {
                gram[(i, j)] += xi * xc[j];
            }
            for t in 0..5 {
                xty[(i, t)] += xi * (y[t] - y_mean[t]);
            }
        }
    }
    for i in 0..k {
        gram[(i, i)] += lambda;
        for j in 0..i {
            gram[(j, i)] = gram[(i, j)];
        }
    }
    let chol = factor(gram).map_err(|j| ModelError::RankDeficient {
        column: category_names[j].clone(),
    })?;
    let sol = chol.solve(&xty);
    let w: Vec<[f64; 5]> = (0..k)
        .map(|j| std::array::from_fn(|t| sol[(j, t)]))
        .collect();

    let mut b = y_mean;
    for j in 0..k {
        for t in 0..5 {
            b[t] -= x_mean[j] * w[j][t];
        }
    }
    Ok(MappingModel {
        category_names: category_names.to_vec(),
        weights: w,
        intercept: b,
        lambda,
        n_train: n,
    })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Predictions {
    pub scores: Vec<(String, BigFive)>,
    /// Users with no tokens; not scored.
    pub skipped: Vec<String>,
}

/// Maps each model category to its column in the feature file, by name.
pub fn align_categories(
    model_names: &[String],
    feature_names: &[String],
) -> Result<Vec<usize>, ModelError> {
    let index: HashMap<&str, usize> = feature_names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let model_set: HashSet<&str> = model_names.iter().map(String::as_str).collect();
    for (pos, name) in model_names.iter().enumerate() {
        if !index.contains_key(name.as_str()) {
            return Err(ModelError::CategoryMismatch(format!(
                "model category {name:?} (position {pos}) is missing from features"
            )));
        }
    }
    if let Some(extra) = feature_names
        .iter()
        .find(|n| !model_set.contains(n.as_str()))
    {
        return Err(ModelError::CategoryMismatch(format!(
            "feature category {extra:?} is not in the model"
        )));
    }
    Ok(model_names.iter().map(|n| index[n.as_str()]).collect())
}

pub fn predict(
    model: &MappingModel,
    feature_names: &[String],
    features: &[FeatureVector],
) -> Result<Predictions, ModelError> {
    let columns = align_categories(&model.category_names, feature_names)?;
    let scored: Vec<Option<(String, BigFive)>> = features
        .par_iter()
        .map(|f| {
            if f.is_degenerate() {
                return None;
            }
            let x: Vec<f64> = columns.iter().map(|&c| f.freqs[c]).collect();
            Some((f.user_id.clone(), model.predict_one(&x)))
        })
        .collect();
    let mut out = Predictions::default();
    for (f, s) in features.iter().zip(scored) {
        match s {
            Some(s) => out.scores.push(s),
            None => out.skipped.push(f.user_id.clone()),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraitSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub sd: f64,
}

pub fn summarize_scores(scores: &[BigFive]) -> Result<[TraitSummary; 5], ModelError> {
    if scores.is_empty() {
        return Err(ModelError::Empty);
    }
    let n = scores.len() as f64;
    Ok(std::array::from_fn(|t| {
        let mean = scores.iter().map(|s| s.0[t]).sum::<f64>() / n;
        let var = scores.iter().map(|s| (s.0[t] - mean).powi(2)).sum::<f64>() / n;
        TraitSummary {
            mean,
            sd: var.sqrt(),
        }
    }))
}

/// Deterministic holdout split: ids are sorted, shuffled with `seed`, and the
/// first `round(n * test_fraction)` go to the test side.
pub fn holdout_split(ids: &[String], test_fraction: f64, seed: u64) -> (Vec<String>, Vec<String>) {
    let mut ids = ids.to_vec();
    ids.sort();
    ids.dedup();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_test = ((ids.len() as f64) * test_fraction.clamp(0.0, 1.0)).round() as usize;
    let mut train = ids.split_off(n_test);
    let mut test = ids;
    test.sort();
    train.sort();
    (train, test)
}

fn parse_score_row(
    rec: &csv::StringRecord,
    cols: &[usize; 6],
    row: usize,
) -> Result<(String, BigFive), ModelError> {
    let mut vals = [0.0; 5];
    for t in 0..5 {
        let raw = rec.get(cols[t + 1]).unwrap_or("");
        vals[t] = raw
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| ModelError::Labels(format!("row {row}: bad score {raw:?}")))?;
    }
    Ok((rec[cols[0]].to_string(), BigFive(vals)))
}

/// Reads `user_id,O,C,E,A,N` (extra columns ignored, order by header name).
pub fn scores_from_csv(text: &str) -> Result<Vec<(String, BigFive)>, ModelError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| ModelError::Labels(e.to_string()))?
        .clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| ModelError::Labels(format!("missing column {name}")))
    };
    let cols = [
        find("user_id")?,
        find("O")?,
        find("C")?,
        find("E")?,
        find("A")?,
        find("N")?,
    ];
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| ModelError::Labels(e.to_string()))?;
        out.push(parse_score_row(&rec, &cols, i + 2)?);
    }
    Ok(out)
}

/// `user_id,O,C,E,A,N,out_of_range` with six decimals.
pub fn scores_to_csv(scores: &[(String, BigFive)]) -> String {
    let mut out = String::from("user_id,O,C,E,A,N,out_of_range\n");
    for (id, s) in scores {
        out.push_str(&crate::table::csv_field(id));
        for v in s.0 {
            let _ = write!(out, ",{v:.6}");
        }
        let _ = writeln!(out, ",{}", s.out_of_range());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    fn fv(id: &str, freqs: Vec<f64>) -> FeatureVector {
        FeatureVector {
            user_id: id.into(),
            freqs,
            token_count: 100,
        }
    }

    #[test]
    fn identity_design_recovers_identity() {
        // Rows e_i plus one all-zero row so the centered design has full rank.
        let k = 5;
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..=k {
            let mut x = vec![0.0; k];
            let mut y = [0.0; 5];
            if i < k {
                x[i] = 1.0;
                y[i] = 1.0;
            }
            features.push(fv(&format!("u{i}"), x));
            labels.push((format!("u{i}"), BigFive(y)));
        }
        let m = fit(&names(k), &features, &labels, 0.0).unwrap();
        for i in 0..k {
            for t in 0..5 {
                let expect = if i == t { 1.0 } else { 0.0 };
                assert!((m.weights[i][t] - expect).abs() < 1e-8);
            }
        }
        assert!(m.intercept.iter().all(|b| b.abs() < 1e-8));
    }

    #[test]
    fn fit_errors() {
        let f = vec![fv("a", vec![1.0]), fv("b", vec![2.0])];
        let one = vec![("a".to_string(), BigFive::default())];
        assert!(matches!(
            fit(&names(1), &f, &one, 1.0),
            Err(ModelError::TooFewUsers(1))
        ));
        let missing = vec![
            ("a".to_string(), BigFive::default()),
            ("zz".to_string(), BigFive::default()),
        ];
        match fit(&names(1), &f, &missing, 1.0) {
            Err(ModelError::MissingFeatures(id)) => assert_eq!(id, "zz"),
            other => panic!("{other:?}"),
        }
        // Two users, two categories, no ridge: centered design has rank 1.
        let f2 = vec![fv("a", vec![1.0, 0.0]), fv("b", vec![2.0, 0.0])];
        let both = vec![
            ("a".to_string(), BigFive::default()),
            ("b".to_string(), BigFive::default()),
        ];
        let err = fit(&names(2), &f2, &both, 0.0).unwrap_err();
        assert!(err.to_string().contains("lambda > 0"), "{err}");
        assert!(fit(&names(2), &f2, &both, 0.5).is_ok());
        assert!(matches!(
            fit(&names(2), &f2, &both, -1.0),
            Err(ModelError::BadLambda(_))
        ));
        let mut degenerate = f2.clone();
        degenerate[0].token_count = 0;
        assert!(matches!(
            fit(&names(2), &degenerate, &both, 1.0),
            Err(ModelError::DegenerateFeatures(_))
        ));
    }

    type Planted = (
        Vec<FeatureVector>,
        Vec<(String, BigFive)>,
        Vec<[f64; 5]>,
        [f64; 5],
    );

    fn planted(seed: u64, n: usize, k: usize, noise: f64) -> Planted {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<[f64; 5]> = (0..k)
            .map(|_| std::array::from_fn(|_| rng.random_range(-2.0..2.0)))
            .collect();
        let b: [f64; 5] = std::array::from_fn(|_| rng.random_range(30.0..60.0));
        let normal = Normal::new(0.0, noise.max(1e-300)).unwrap();
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let x: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..10.0)).collect();
            let mut y = b;
            for j in 0..k {
                for t in 0..5 {
                    y[t] += x[j] * w[j][t];
                }
            }
            if noise > 0.0 {
                for v in &mut y {
                    *v += normal.sample(&mut rng);
                }
            }
            let id = format!("u{i:04}");
            features.push(fv(&id, x));
            labels.push((id, BigFive(y)));
        }
        (features, labels, w, b)
    }

    #[test]
    fn zero_vector_predicts_intercept() {
        let m = MappingModel {
            category_names: names(2),
            weights: vec![[1.0; 5], [2.0; 5]],
            intercept: [50.0, 49.0, 48.0, 47.0, 46.0],
            lambda: 1.0,
            n_train: 10,
        };
        assert_eq!(m.predict_one(&[0.0, 0.0]).0, m.intercept);
    }

    #[test]
    fn predict_aligns_by_name_and_skips_degenerate() {
        let m = MappingModel {
            category_names: vec!["a".into(), "b".into()],
            weights: vec![[1.0; 5], [10.0; 5]],
            intercept: [0.0; 5],
            lambda: 0.0,
            n_train: 2,
        };
        let swapped = vec!["b".to_string(), "a".to_string()];
        let mut empty = fv("z", vec![0.0, 0.0]);
        empty.token_count = 0;
        let p = predict(&m, &swapped, &[fv("u", vec![2.0, 3.0]), empty]).unwrap();
        assert_eq!(p.scores[0].1 .0[0], 3.0 + 20.0);
        assert_eq!(p.skipped, vec!["z"]);

        let wrong = vec!["a".to_string(), "c".to_string()];
        let err = predict(&m, &wrong, &[]).unwrap_err();
        assert!(err.to_string().contains("\"b\""), "{err}");
    }

    #[test]
    fn model_json_round_trips_bit_exactly() {
        let (features, labels, _, _) = planted(5, 25, 4, 1.0);
        let m = fit(&names(4), &features, &labels, 0.37).unwrap();
        let text = m.to_json();
        let back = MappingModel::from_json(&text).unwrap();
        assert_eq!(back, m);
        for (a, b) in back
            .weights
            .iter()
            .flatten()
            .zip(m.weights.iter().flatten())
        {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.to_json(), text);
        assert!(MappingModel::from_json(
            &text.replace("\"format_version\": 1", "\"format_version\": 9")
        )
        .is_err());
    }

    #[test]
    fn summary_statistics() {
        let s = summarize_scores(&[
            BigFive::new(40.0, 1.0, 1.0, 1.0, 1.0),
            BigFive::new(60.0, 1.0, 1.0, 1.0, 1.0),
        ])
        .unwrap();
        assert_eq!((s[0].mean, s[0].sd), (50.0, 10.0));
        assert_eq!(s[1].sd, 0.0);
        let single = summarize_scores(&[BigFive::new(1.0, 2.0, 3.0, 4.0, 5.0)]).unwrap();
        assert_eq!(single.map(|t| t.mean), [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(single.iter().all(|t| t.sd == 0.0));
        assert!(matches!(summarize_scores(&[]), Err(ModelError::Empty)));
    }

    #[test]
    fn labels_csv_by_header_name() {
        let text = "user_id,N,A,E,C,O\nu1,5,4,3,2,1\n";
        let labels = scores_from_csv(text).unwrap();
        assert_eq!(labels[0].1 .0, [1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(scores_from_csv("user_id,O\nu,1\n").is_err());
        assert!(scores_from_csv("user_id,O,C,E,A,N\nu,1,2,x,4,5\n").is_err());
        let out = scores_to_csv(&labels);
        assert_eq!(out, "user_id,O,C,E,A,N,out_of_range\nu1,1.000000,2.000000,3.000000,4.000000,5.000000,false\n");
        assert_eq!(scores_from_csv(&out).unwrap(), labels);
    }

    #[test]
    fn holdout_is_deterministic_and_disjoint() {
        let ids: Vec<String> = (0..20).map(|i| format!("u{i}")).collect();
        let (tr, te) = holdout_split(&ids, 0.25, 42);
        assert_eq!((tr.len(), te.len()), (15, 5));
        assert_eq!(holdout_split(&ids, 0.25, 42), (tr.clone(), te.clone()));
        assert!(te.iter().all(|t| !tr.contains(t)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn exact_round_trip_on_noiseless_data(seed in any::<u64>(), k in 1usize..12, extra in 5usize..40) {
            let n = k + extra;
            let (features, labels, w, _) = planted(seed, n, k, 0.0);
            let m = fit(&names(k), &features, &labels, 0.0).unwrap();
            let err: f64 = m
                .weights
                .iter()
                .zip(&w)
                .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)))
                .sum::<f64>()
                .sqrt();
            prop_assert!(err < 1e-6, "{}", err);
            let p = predict(&m, &names(k), &features).unwrap();
            for ((_, got), (_, want)) in p.scores.iter().zip(&labels) {
                for t in 0..5 {
                    prop_assert!((got.0[t] - want.0[t]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn ridge_shrinks_weights_monotonically(
            seed in any::<u64>(),
            k in 1usize..10,
            n in 3usize..40,
            mut lambdas in proptest::collection::vec(0.0f64..1e4, 2..6),
        ) {
            let (features, labels, _, _) = planted(seed, n, k, 1.0);
            lambdas.sort_by(f64::total_cmp);
            // Keep the design well posed at the smallest strength.
            lambdas.iter_mut().for_each(|l| *l += 1e-3);
            let mut last = f64::INFINITY;
            for lambda in lambdas {
                let norm = fit(&names(k), &features, &labels, lambda).unwrap().frobenius_norm();
                prop_assert!(norm <= last * (1.0 + 1e-12), "lambda {}: {} > {}", lambda, norm, last);
                last = norm;
            }
        }

        #[test]
        fn affine_label_equivariance(
            seed in any::<u64>(),
            k in 1usize..8,
            s in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
            shift in -100.0f64..100.0,
            lambda in 0.01f64..10.0,
        ) {
            let (features, labels, _, _) = planted(seed, 30, k, 2.0);
            let transformed: Vec<(String, BigFive)> = labels
                .iter()
                .map(|(id, y)| (id.clone(), BigFive(y.0.map(|v| s * v + shift))))
                .collect();
            let m1 = fit(&names(k), &features, &labels, lambda).unwrap();
            let m2 = fit(&names(k), &features, &transformed, lambda).unwrap();
            for (r1, r2) in m1.weights.iter().zip(&m2.weights) {
                for t in 0..5 {
                    prop_assert!((s * r1[t] - r2[t]).abs() < 1e-8 * (1.0 + r2[t].abs()));
                }
            }
            let x = &features[0].freqs;
            let (y1, y2) = (m1.predict_one(x), m2.predict_one(x));
            for t in 0..5 {
                prop_assert!((s * y1.0[t] + shift - y2.0[t]).abs() < 1e-8 * (1.0 + y2.0[t].abs()));
            }
        }

        #[test]
        fn arbitrary_model_json_round_trips_bit_exactly(
            weights in proptest::collection::vec(proptest::array::uniform5(proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO), 1..6),
            intercept in proptest::array::uniform5(-1e300f64..1e300),
            lambda in 0.0f64..1e6,
        ) {
            let m = MappingModel {
                category_names: names(weights.len()),
                weights,
                intercept,
                lambda,
                n_train: 7,
            };
            let back = MappingModel::from_json(&m.to_json()).unwrap();
            for (a, b) in back.weights.iter().flatten().zip(m.weights.iter().flatten()) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            for (a, b) in back.intercept.iter().zip(&m.intercept) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!(back.lambda.to_bits(), m.lambda.to_bits());
        }
    }
}
