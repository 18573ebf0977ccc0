//! Run configuration: every tunable of a full pipeline run, read from a JSON
//! file. Relative paths resolve against the directory holding that file.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    default_ad_url_patterns, AdRule, ValidationConfig, DEFAULT_AGE_RANGE, DEFAULT_MIN_FOLLOWERS,
};
use crate::model::DEFAULT_RIDGE_LAMBDA;
use crate::stats::{
    default_introduction_bins, DEFAULT_ALPHA, DEFAULT_EMOTICON_MIN_COUNT, DEFAULT_QUANTILE,
};

pub const DEFAULT_TOP_K: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("missing required setting `{0}`")]
    Missing(&'static str),
}

/// Input files of a run. All optional at parse time so flags can fill gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InputPaths {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posts: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lexicon: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word_list: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spam_keywords: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
}

impl InputPaths {
    fn resolve(&mut self, base: &Path) {
        for p in [
            &mut self.profiles,
            &mut self.posts,
            &mut self.lexicon,
            &mut self.word_list,
            &mut self.model,
            &mut self.spam_keywords,
            &mut self.templates,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub reference_date: Option<NaiveDate>,
    pub min_followers: u64,
    pub age_range: [u32; 2],
    pub ad_url_patterns: Vec<String>,
    pub ad_rule: AdRule,
    pub quantile: f64,
    pub alpha: f64,
    pub emoticon_min_count: u64,
    pub ridge_lambda: f64,
    pub top_k: usize,
    pub introduction_bins: Vec<[u32; 2]>,
    pub inputs: InputPaths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            reference_date: None,
            min_followers: DEFAULT_MIN_FOLLOWERS,
            age_range: [DEFAULT_AGE_RANGE.0, DEFAULT_AGE_RANGE.1],
            ad_url_patterns: default_ad_url_patterns(),
            ad_rule: AdRule::default(),
            quantile: DEFAULT_QUANTILE,
            alpha: DEFAULT_ALPHA,
            emoticon_min_count: DEFAULT_EMOTICON_MIN_COUNT,
            ridge_lambda: DEFAULT_RIDGE_LAMBDA,
            top_k: DEFAULT_TOP_K,
            introduction_bins: default_introduction_bins()
                .into_iter()
                .map(|(a, b)| [a, b])
                .collect(),
            inputs: InputPaths::default(),
        }
    }
}

impl RunConfig {
    /// Parses a config document; relative input paths are kept as written.
    pub fn parse(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::parse(&text).map_err(|message| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.inputs.resolve(base);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.age_range[0] > self.age_range[1] {
            return bad(format!("age_range {:?} is empty", self.age_range));
        }
        if !(self.quantile > 0.0 && self.quantile <= 0.5) {
            return bad(format!(
                "quantile must be in (0, 0.5], got {}",
                self.quantile
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if !(self.ridge_lambda.is_finite() && self.ridge_lambda >= 0.0) {
            return bad(format!(
                "ridge_lambda must be >= 0, got {}",
                self.ridge_lambda
            ));
        }
        let mut prev: Option<u32> = None;
        for [lo, hi] in &self.introduction_bins {
            if lo > hi || prev.is_some_and(|p| *lo <= p) {
                return bad(format!(
                    "introduction_bins must be ascending and disjoint, got {:?}",
                    self.introduction_bins
                ));
            }
            prev = Some(*hi);
        }
        Ok(())
    }

    pub fn validation_config(&self) -> Result<ValidationConfig, ConfigError> {
        let date = self
            .reference_date
            .ok_or(ConfigError::Missing("reference_date"))?;
        let mut v = ValidationConfig::new(date);
        v.min_followers = self.min_followers;
        v.age_range = (self.age_range[0], self.age_range[1]);
        v.ad_url_patterns = self.ad_url_patterns.clone();
        v.ad_rule = self.ad_rule;
        Ok(v)
    }

    pub fn introduction_bins(&self) -> Vec<(u32, u32)> {
        self.introduction_bins
            .iter()
            .map(|[a, b]| (*a, *b))
            .collect()
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = RunConfig::parse("{}").unwrap();
        assert_eq!(c.min_followers, 10);
        assert_eq!(c.age_range, [10, 47]);
        assert_eq!(c.quantile, 0.25);
        assert_eq!(c.alpha, 0.05);
        assert_eq!(c.emoticon_min_count, 500);
        assert_eq!(c.ridge_lambda, 1.0);
        assert_eq!(c.introduction_bins.len(), 7);
        c.validate().unwrap();
        assert!(matches!(
            c.validation_config(),
            Err(ConfigError::Missing("reference_date"))
        ));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(RunConfig::parse(r#"{"qauntile": 0.3}"#).is_err());
        assert!(RunConfig::parse(r#"{"inputs": {"lexicon": "a", "extra": 1}}"#).is_err());
    }

    #[test]
    fn relative_paths_follow_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        std::fs::write(
            &p,
            r#"{"reference_date": "2016-01-01", "inputs": {"lexicon": "lex.dic", "model": "/abs/m.json"}}"#,
        )
        .unwrap();
        let c = RunConfig::load(&p).unwrap();
        assert_eq!(c.inputs.lexicon.unwrap(), dir.path().join("lex.dic"));
        assert_eq!(c.inputs.model.unwrap(), PathBuf::from("/abs/m.json"));
        assert_eq!(c.reference_date, NaiveDate::from_ymd_opt(2016, 1, 1));
    }

    #[test]
    fn round_trip() {
        let c = RunConfig {
            reference_date: NaiveDate::from_ymd_opt(2017, 6, 30),
            inputs: InputPaths {
                posts: Some("posts.jsonl".into()),
                ..Default::default()
            },
            ..Default::default()
        };
        assert_eq!(RunConfig::parse(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn invalid_values() {
        for doc in [
            r#"{"quantile": 0.6}"#,
            r#"{"alpha": 0}"#,
            r#"{"ridge_lambda": -1}"#,
            r#"{"age_range": [47, 10]}"#,
            r#"{"introduction_bins": [[1, 10], [5, 20]]}"#,
        ] {
            assert!(RunConfig::parse(doc).unwrap().validate().is_err(), "{doc}");
        }
    }
}
