//! Result bundle: runs the whole pipeline over a corpus and writes one CSV
//! per analysis plus a `manifest.json` describing them.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cleaner::{clean_corpus, read_list_file, CleanerConfig};
use crate::config::RunConfig;
use crate::corpus::{load_corpus, validate_users, Corpus, Gender, UserProfile, ValidityReport};
use crate::lexicon::{
    features_from_csv, features_to_csv, featurize, CompiledMatcher, FeatureVector, Lexicon,
};
use crate::model::{predict, summarize_scores, BigFive, MappingModel, Trait};
use crate::segmenter::{segment, WordList};
use crate::stats::{
    binned_trend, correlation_matrix, emoticon_contrast, emoticon_table, group_means,
    group_means_table, join_scores, polarity_split, province_aggregate, province_table,
    tag_contrast, tag_contrast_table, trend_table, Binning, GroupKey,
};
use crate::table::{Cell, Table};

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Artifact names in manifest order; each is written as `<name>.csv`.
pub const ARTIFACT_NAMES: [&str; 10] = [
    "demographics",
    "features",
    "scores",
    "score_summary",
    "correlations",
    "tag_contrast",
    "group_means",
    "trends",
    "provinces",
    "emoticons",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Config,
    Load,
    Validate,
    Clean,
    Segment,
    Featurize,
    Predict,
    Stats,
    Write,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage name");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

/// Whether a failure came from the caller's settings, from unreadable or
/// malformed input, or from the data itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Input,
    Domain,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed: {message}")]
pub struct ReportError {
    pub stage: Stage,
    pub kind: ErrorKind,
    pub message: String,
}

impl ReportError {
    fn new(stage: Stage, kind: ErrorKind, err: impl fmt::Display) -> Self {
        ReportError {
            stage,
            kind,
            message: err.to_string(),
        }
    }
}

fn pct(part: usize, whole: usize) -> Cell {
    if whole == 0 {
        Cell::Empty
    } else {
        Cell::Num(100.0 * part as f64 / whole as f64)
    }
}

fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Some((mean, var.sqrt()))
}

/// Shared/unknown split of one optional attribute; `detail` describes the
/// sharing users.
fn shared_rows(t: &mut Table, item: &str, shared: usize, total: usize, detail: String) {
    t.push(vec![
        item.into(),
        "shared".into(),
        pct(shared, total),
        detail.into(),
    ]);
    t.push(vec![
        item.into(),
        "unknown".into(),
        pct(total - shared, total),
        "".into(),
    ]);
}

/// Profile composition: age, gender, verification, and how many users share
/// tags, location and schools. Percentages sum to 100 within each item.
pub fn demographic_summary(profiles: &[UserProfile]) -> Table {
    let n = profiles.len();
    let mut t = Table::new(["item", "group", "percentage", "detail"]);

    let ages: Vec<u32> = profiles.iter().filter_map(|p| p.age).collect();
    let age_detail = match mean_sd(&ages.iter().map(|&a| a as f64).collect::<Vec<_>>()) {
        Some((mean, sd)) => format!(
            "mean={mean:.6};sd={sd:.6};min={};max={}",
            ages.iter().min().expect("non-empty"),
            ages.iter().max().expect("non-empty")
        ),
        None => String::new(),
    };
    shared_rows(&mut t, "age", ages.len(), n, age_detail);

    let count = |g: Gender| profiles.iter().filter(|p| p.gender == g).count();
    for (label, g) in [
        ("male", Gender::Male),
        ("female", Gender::Female),
        ("unknown", Gender::Unknown),
    ] {
        t.push(vec![
            "gender".into(),
            label.into(),
            pct(count(g), n),
            "".into(),
        ]);
    }

    let verified = profiles.iter().filter(|p| p.verified).count();
    t.push(vec![
        "verified".into(),
        "verified".into(),
        pct(verified, n),
        "".into(),
    ]);
    t.push(vec![
        "verified".into(),
        "unverified".into(),
        pct(n - verified, n),
        "".into(),
    ]);

    let tag_counts: Vec<f64> = profiles
        .iter()
        .filter(|p| !p.tags.is_empty())
        .map(|p| p.tags.len() as f64)
        .collect();
    let tag_detail = mean_sd(&tag_counts)
        .map(|(m, s)| format!("mean_tags={m:.6};sd_tags={s:.6}"))
        .unwrap_or_default();
    shared_rows(&mut t, "tags", tag_counts.len(), n, tag_detail);

    let located = profiles.iter().filter(|p| p.location.is_some()).count();
    shared_rows(&mut t, "location", located, n, String::new());

    let schooled = profiles.iter().filter(|p| !p.schools.is_empty()).count();
    shared_rows(&mut t, "university", schooled, n, String::new());
    t
}

pub fn scores_table(scores: &[(String, BigFive)]) -> Table {
    let mut t = Table::new(["user_id", "O", "C", "E", "A", "N", "out_of_range"]);
    for (id, s) in scores {
        let mut row = vec![Cell::from(id.as_str())];
        row.extend(s.0.iter().map(|&v| Cell::from(v)));
        row.push(s.out_of_range().into());
        t.push(row);
    }
    t
}

pub fn score_summary_table(scores: &[BigFive]) -> Option<Table> {
    let summary = summarize_scores(scores).ok()?;
    let mut t = Table::new(["trait", "mean", "sd", "n", "out_of_range"]);
    for tr in Trait::ALL {
        let s = summary[tr.index()];
        let outside = scores
            .iter()
            .filter(|b| {
                let v = b.get(tr);
                !(crate::model::SCORE_RANGE.0..=crate::model::SCORE_RANGE.1).contains(&v)
            })
            .count();
        t.push(vec![
            tr.letter().into(),
            s.mean.into(),
            s.sd.into(),
            scores.len().into(),
            outside.into(),
        ]);
    }
    Some(t)
}

/// Parsed, ready-to-run inputs of a bundle.
pub struct PipelineInputs {
    pub profiles: Vec<UserProfile>,
    pub posts: Vec<crate::corpus::Post>,
    pub lexicon: Lexicon,
    pub word_list: WordList,
    pub cleaner: CleanerConfig,
    pub model: MappingModel,
}

/// Counts reported alongside a bundle.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub validity: ValidityReport,
    pub posts_kept: usize,
    pub posts_dropped: usize,
    pub users_scored: usize,
    pub users_skipped: usize,
}

/// One rendered output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub rows: usize,
    pub csv: String,
}

impl Artifact {
    fn from_table(name: &'static str, t: &Table) -> Self {
        Artifact {
            name,
            rows: t.len(),
            csv: t.to_csv(),
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }
}

/// Tokens per user (one list per kept post) and emoticon usage per user.
type Prepared = (
    BTreeMap<String, Vec<Vec<String>>>,
    BTreeMap<String, BTreeMap<String, u64>>,
);

fn prepare_text(
    corpus: &Corpus,
    cleaner: &CleanerConfig,
    words: &WordList,
    summary: &mut RunSummary,
) -> Prepared {
    let (cleaned, dropped) = clean_corpus(&corpus.posts, cleaner);
    summary.posts_kept = cleaned.len();
    summary.posts_dropped = dropped;

    let tokens: Vec<Vec<String>> = cleaned
        .par_iter()
        .map(|(_, r)| segment(&r.clean_text, words))
        .collect();

    let mut by_user: BTreeMap<String, Vec<Vec<String>>> = corpus
        .profiles
        .iter()
        .map(|p| (p.user_id.clone(), Vec::new()))
        .collect();
    let mut emoticons: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for ((user, result), toks) in cleaned.into_iter().zip(tokens) {
        if !result.emoticons.is_empty() {
            let counts = emoticons.entry(user.clone()).or_default();
            for e in result.emoticons {
                *counts.entry(e).or_default() += 1;
            }
        }
        by_user.entry(user).or_default().push(toks);
    }
    (by_user, emoticons)
}

/// Runs validation through statistics and renders every artifact, in
/// [`ARTIFACT_NAMES`] order.
pub fn run_pipeline(
    inputs: &PipelineInputs,
    config: &RunConfig,
) -> Result<(Vec<Artifact>, RunSummary), ReportError> {
    let usage = |e: &dyn fmt::Display| ReportError::new(Stage::Config, ErrorKind::Usage, e);
    config.validate().map_err(|e| usage(&e))?;
    let vconf = config.validation_config().map_err(|e| usage(&e))?;

    let (corpus, validity) = validate_users(&inputs.profiles, &inputs.posts, &vconf);
    if corpus.profiles.is_empty() {
        return Err(ReportError::new(
            Stage::Validate,
            ErrorKind::Domain,
            format!(
                "no users left after validation ({} rejected)",
                validity.rejected.len()
            ),
        ));
    }
    let mut summary = RunSummary {
        validity,
        ..Default::default()
    };

    let (tokens, emoticon_usage) =
        prepare_text(&corpus, &inputs.cleaner, &inputs.word_list, &mut summary);

    let matcher = CompiledMatcher::compile(&inputs.lexicon);
    let names = inputs.lexicon.category_names();
    // Downstream stages see the features exactly as written to the bundle.
    let features_csv = features_to_csv(&names, &featurize(&tokens, &matcher));
    let (_, features): (_, Vec<FeatureVector>) = features_from_csv(&features_csv)
        .map_err(|e| ReportError::new(Stage::Featurize, ErrorKind::Domain, e))?;

    let preds = predict(&inputs.model, &names, &features)
        .map_err(|e| ReportError::new(Stage::Predict, ErrorKind::Domain, e))?;
    summary.users_scored = preds.scores.len();
    summary.users_skipped = preds.skipped.len();

    let stats_err = |e: &dyn fmt::Display| ReportError::new(Stage::Stats, ErrorKind::Domain, e);
    let scores = &preds.scores;
    let plain: Vec<BigFive> = scores.iter().map(|(_, s)| *s).collect();
    let summary_table =
        score_summary_table(&plain).ok_or_else(|| stats_err(&"no user could be scored"))?;
    let correlations =
        correlation_matrix(&names, &features, scores, config.alpha).map_err(|e| stats_err(&e))?;

    let mut tags = Vec::new();
    let mut emoticons = Vec::new();
    for tr in Trait::ALL {
        let column: Vec<(String, f64)> = scores
            .iter()
            .map(|(id, s)| (id.clone(), s.get(tr)))
            .collect();
        let split = polarity_split(tr, &column, config.quantile).map_err(|e| stats_err(&e))?;
        tags.push(tag_contrast(&split, &corpus.profiles, config.top_k));
        emoticons.push(emoticon_contrast(
            &split,
            &emoticon_usage,
            config.emoticon_min_count,
            config.alpha,
        ));
    }

    let (scored_users, _) = join_scores(&corpus.profiles, scores);
    let groups: Vec<_> = GroupKey::ALL
        .iter()
        .map(|k| group_means(&scored_users, *k))
        .collect();
    let trends: Vec<_> = [
        Binning::AgeYear,
        Binning::SchoolCount,
        Binning::IntroductionLength(config.introduction_bins()),
    ]
    .iter()
    .map(|b| binned_trend(&scored_users, b))
    .collect();
    let provinces = province_aggregate(&scored_users);

    let artifacts = vec![
        Artifact::from_table("demographics", &demographic_summary(&corpus.profiles)),
        Artifact {
            name: "features",
            rows: features.len(),
            csv: features_csv,
        },
        Artifact::from_table("scores", &scores_table(scores)),
        Artifact::from_table("score_summary", &summary_table),
        Artifact::from_table("correlations", &correlations.to_table()),
        Artifact::from_table("tag_contrast", &tag_contrast_table(&tags)),
        Artifact::from_table("group_means", &group_means_table(&groups)),
        Artifact::from_table("trends", &trend_table(&trends)),
        Artifact::from_table("provinces", &province_table(&provinces)),
        Artifact::from_table("emoticons", &emoticon_table(&emoticons)),
    ];
    debug_assert!(artifacts.iter().map(|a| a.name).eq(ARTIFACT_NAMES));
    Ok((artifacts, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub path: String,
    pub rows: usize,
    pub schema_version: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
    pub config: RunConfig,
    pub input_hashes: BTreeMap<String, String>,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Input files named by the config, keyed by role, in a fixed order.
fn input_files(config: &RunConfig) -> Vec<(&'static str, &PathBuf)> {
    let i = &config.inputs;
    [
        ("profiles", &i.profiles),
        ("posts", &i.posts),
        ("lexicon", &i.lexicon),
        ("word_list", &i.word_list),
        ("model", &i.model),
        ("spam_keywords", &i.spam_keywords),
        ("templates", &i.templates),
    ]
    .into_iter()
    .filter_map(|(k, p)| p.as_ref().map(|p| (k, p)))
    .collect()
}

fn required<'a>(p: &'a Option<PathBuf>, name: &str) -> Result<&'a PathBuf, ReportError> {
    p.as_ref().ok_or_else(|| {
        ReportError::new(
            Stage::Config,
            ErrorKind::Usage,
            format!("missing required input `{name}`"),
        )
    })
}

/// Reads every input named by `config`.
pub fn load_inputs(config: &RunConfig) -> Result<PipelineInputs, ReportError> {
    let input = |e: &dyn fmt::Display| ReportError::new(Stage::Load, ErrorKind::Input, e);
    let i = &config.inputs;
    let profiles_path = required(&i.profiles, "profiles")?;
    let posts_path = required(&i.posts, "posts")?;
    let lexicon_path = required(&i.lexicon, "lexicon")?;
    let model_path = required(&i.model, "model")?;

    let loaded = load_corpus(profiles_path, posts_path).map_err(|e| input(&e))?;
    let lexicon = Lexicon::load(lexicon_path).map_err(|e| input(&e))?;
    let word_list = match &i.word_list {
        Some(p) => WordList::load(p).map_err(|e| input(&e))?,
        None => WordList::default(),
    };
    let model_text = std::fs::read_to_string(model_path)
        .map_err(|e| input(&format!("{}: {e}", model_path.display())))?;
    let model = MappingModel::from_json(&model_text).map_err(|e| input(&e))?;

    let mut cleaner = CleanerConfig::default();
    let read_list =
        |p: &PathBuf| read_list_file(p).map_err(|e| input(&format!("{}: {e}", p.display())));
    if let Some(p) = &i.spam_keywords {
        cleaner.spam_keywords = read_list(p)?;
    }
    if let Some(p) = &i.templates {
        cleaner.system_templates = read_list(p)?;
    }
    Ok(PipelineInputs {
        profiles: loaded.profiles,
        posts: loaded.posts,
        lexicon,
        word_list,
        cleaner,
        model,
    })
}

/// Writes the artifacts and the manifest into `out_dir`.
pub fn write_bundle(
    out_dir: &Path,
    artifacts: &[Artifact],
    config: &RunConfig,
    input_hashes: BTreeMap<String, String>,
) -> Result<Manifest, ReportError> {
    let io = |e: std::io::Error| {
        ReportError::new(
            Stage::Write,
            ErrorKind::Input,
            format!("{}: {e}", out_dir.display()),
        )
    };
    std::fs::create_dir_all(out_dir).map_err(io)?;
    let mut entries = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let file = a.file_name();
        std::fs::write(out_dir.join(&file), &a.csv).map_err(io)?;
        entries.push(ManifestEntry {
            name: a.name.to_string(),
            path: file,
            rows: a.rows,
            schema_version: SCHEMA_VERSION,
        });
    }
    let manifest = Manifest {
        artifacts: entries,
        config: config.clone(),
        input_hashes,
    };
    std::fs::write(out_dir.join(MANIFEST_FILE), manifest.to_json()).map_err(io)?;
    Ok(manifest)
}

/// Loads inputs, runs the pipeline and writes the bundle.
pub fn build_bundle(
    config: &RunConfig,
    out_dir: &Path,
) -> Result<(Manifest, RunSummary), ReportError> {
    let inputs = load_inputs(config)?;
    let mut hashes = BTreeMap::new();
    for (role, path) in input_files(config) {
        let h = sha256_file(path).map_err(|e| {
            ReportError::new(
                Stage::Load,
                ErrorKind::Input,
                format!("{}: {e}", path.display()),
            )
        })?;
        hashes.insert(role.to_string(), h);
    }
    let (artifacts, summary) = run_pipeline(&inputs, config)?;
    let manifest = write_bundle(out_dir, &artifacts, config, hashes)?;
    Ok((manifest, summary))
}
