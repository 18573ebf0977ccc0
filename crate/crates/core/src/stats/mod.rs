//! Statistical analyses over scored users: correlations with significance,
//! polarity (quantile) contrasts, group means, binned trends and per-province
//! aggregates.
//!
//! Every analysis joins on user id and skips users lacking the attribute it
//! needs; the number skipped is always reported alongside the result.

pub mod contrast;
pub mod correlation;
pub mod groups;
pub mod special;

use std::collections::HashMap;

use crate::corpus::UserProfile;
use crate::model::{BigFive, Trait};

pub use contrast::{
    emoticon_contrast, emoticon_table, polarity_split, tag_contrast, tag_contrast_table,
    two_proportion_p, EmoticonContrast, EmoticonRow, PolaritySplit, TagContrast,
};
pub use correlation::{
    correlation_matrix, pearson, Correlation, CorrelationResult, CorrelationTable,
};
pub use groups::{
    binned_trend, default_introduction_bins, group_means, group_means_table, normalize_province,
    parse_bins, province_aggregate, province_table, trend_table, Binning, GroupKey, GroupMeans,
    GroupRow, ProvinceRow, Trend, TrendRow, PROVINCES, UNKNOWN_PROVINCE,
};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_QUANTILE: f64 = 0.25;
pub const DEFAULT_EMOTICON_MIN_COUNT: u64 = 500;
/// |r| at or above this is flagged as a strong correlation.
pub const STRONG_R: f64 = 0.2;
/// Groups smaller than this are flagged as low support.
pub const MIN_GROUP_SUPPORT: usize = 5;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StatsError {
    #[error("vectors differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least 3 observations, got {0}")]
    TooFew(usize),
    #[error("correlation undefined: constant vector")]
    Constant,
    #[error("quantile must be in (0, 0.5], got {0}")]
    BadQuantile(f64),
    #[error("need at least 4 users for a polarity split, got {0}")]
    TooFewForSplit(usize),
    #[error("{n} users x quantile {quantile} selects nobody")]
    EmptyGroups { n: usize, quantile: f64 },
    #[error("unknown grouping key {0:?}; supported: gender, verified, education_shared, introduction_shared, location_shared")]
    UnknownKey(String),
    #[error("unknown binning {0:?}; supported: age_year, school_count, introduction_length")]
    UnknownBinning(String),
    #[error("bad bin spec {0:?}")]
    BadBins(String),
}

/// A profile joined with its Big Five scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredUser {
    pub profile: UserProfile,
    pub scores: BigFive,
}

/// Joins profiles to scores on user id, in score order. Returns the joined
/// users and the number of scores without a profile.
pub fn join_scores(
    profiles: &[UserProfile],
    scores: &[(String, BigFive)],
) -> (Vec<ScoredUser>, usize) {
    let by_id: HashMap<&str, &UserProfile> =
        profiles.iter().map(|p| (p.user_id.as_str(), p)).collect();
    let mut out = Vec::with_capacity(scores.len());
    let mut missing = 0;
    for (id, s) in scores {
        match by_id.get(id.as_str()) {
            Some(p) => out.push(ScoredUser {
                profile: (*p).clone(),
                scores: *s,
            }),
            None => missing += 1,
        }
    }
    (out, missing)
}

/// Per-trait arithmetic mean.
pub(crate) fn trait_means<'a>(scores: impl IntoIterator<Item = &'a BigFive>) -> ([f64; 5], usize) {
    let mut sum = [0.0; 5];
    let mut n = 0usize;
    for s in scores {
        for t in Trait::ALL {
            sum[t.index()] += s.get(t);
        }
        n += 1;
    }
    if n > 0 {
        sum.iter_mut().for_each(|v| *v /= n as f64);
    }
    (sum, n)
}
