//! Per-group trait means: categorical groupings, binned trends over a numeric
//! profile attribute, and per-province aggregates.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{trait_means, ScoredUser, StatsError, MIN_GROUP_SUPPORT};
use crate::corpus::Gender;
use crate::table::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupKey {
    Gender,
    Verified,
    EducationShared,
    IntroductionShared,
    LocationShared,
}

impl GroupKey {
    pub const ALL: [GroupKey; 5] = [
        GroupKey::Gender,
        GroupKey::Verified,
        GroupKey::EducationShared,
        GroupKey::IntroductionShared,
        GroupKey::LocationShared,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GroupKey::Gender => "gender",
            GroupKey::Verified => "verified",
            GroupKey::EducationShared => "education_shared",
            GroupKey::IntroductionShared => "introduction_shared",
            GroupKey::LocationShared => "location_shared",
        }
    }

    /// Group labels in output order.
    fn labels(self) -> &'static [&'static str] {
        match self {
            GroupKey::Gender => &["male", "female"],
            GroupKey::Verified => &["verified", "unverified"],
            _ => &["shared", "unknown"],
        }
    }

    /// `None` when the user does not carry the attribute.
    fn label_of(self, u: &ScoredUser) -> Option<&'static str> {
        let p = &u.profile;
        let shared = |b: bool| if b { "shared" } else { "unknown" };
        Some(match self {
            GroupKey::Gender => match p.gender {
                Gender::Male => "male",
                Gender::Female => "female",
                Gender::Unknown => return None,
            },
            GroupKey::Verified => {
                if p.verified {
                    "verified"
                } else {
                    "unverified"
                }
            }
            GroupKey::EducationShared => shared(!p.schools.is_empty()),
            GroupKey::IntroductionShared => shared(p.introduction.is_some()),
            GroupKey::LocationShared => shared(p.location.is_some()),
        })
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupKey {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GroupKey::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| StatsError::UnknownKey(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupRow {
    pub label: String,
    pub count: usize,
    /// Per-trait means; `None` for an empty group.
    pub means: Option<[f64; 5]>,
    pub low_support: bool,
}

impl GroupRow {
    fn new(label: impl Into<String>, means: [f64; 5], count: usize) -> Self {
        GroupRow {
            label: label.into(),
            count,
            means: (count > 0).then_some(means),
            low_support: count < MIN_GROUP_SUPPORT,
        }
    }
}

fn push_means(row: &mut Vec<Cell>, means: Option<[f64; 5]>) {
    for t in 0..5 {
        row.push(means.map(|m| m[t]).into());
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupMeans {
    pub grouping_name: String,
    pub rows: Vec<GroupRow>,
    /// Users lacking the grouping attribute.
    pub excluded: usize,
}

/// Means per group; both labels of a key are always emitted.
pub fn group_means(users: &[ScoredUser], key: GroupKey) -> GroupMeans {
    let mut excluded = 0;
    let mut buckets: BTreeMap<&str, Vec<&ScoredUser>> = BTreeMap::new();
    for u in users {
        match key.label_of(u) {
            Some(label) => buckets.entry(label).or_default().push(u),
            None => excluded += 1,
        }
    }
    let rows = key
        .labels()
        .iter()
        .map(|label| {
            let members = buckets.get(label).map(Vec::as_slice).unwrap_or(&[]);
            let (means, n) = trait_means(members.iter().map(|u| &u.scores));
            GroupRow::new(*label, means, n)
        })
        .collect();
    GroupMeans {
        grouping_name: key.name().to_string(),
        rows,
        excluded,
    }
}

pub fn group_means_table(groups: &[GroupMeans]) -> Table {
    let mut t = Table::new([
        "grouping",
        "group",
        "count",
        "O",
        "C",
        "E",
        "A",
        "N",
        "low_support",
    ]);
    for g in groups {
        for r in &g.rows {
            let mut row = vec![
                g.grouping_name.as_str().into(),
                r.label.as_str().into(),
                r.count.into(),
            ];
            push_means(&mut row, r.means);
            row.push(r.low_support.into());
            t.push(row);
        }
    }
    t
}

/// Introduction-length bins used when none are configured: 1–10, …, 61–70.
pub fn default_introduction_bins() -> Vec<(u32, u32)> {
    (0..7).map(|i| (i * 10 + 1, i * 10 + 10)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Binning {
    AgeYear,
    SchoolCount,
    /// Inclusive character-count ranges.
    IntroductionLength(Vec<(u32, u32)>),
}

impl Binning {
    pub fn name(&self) -> &'static str {
        match self {
            Binning::AgeYear => "age_year",
            Binning::SchoolCount => "school_count",
            Binning::IntroductionLength(_) => "introduction_length",
        }
    }

    /// Parses `age_year`, `school_count` or `introduction_length`, the last
    /// optionally followed by `:lo-hi,lo-hi,…`.
    pub fn parse(s: &str) -> Result<Self, StatsError> {
        let (name, spec) = match s.split_once(':') {
            Some((n, spec)) => (n, Some(spec)),
            None => (s, None),
        };
        match (name, spec) {
            ("age_year", None) => Ok(Binning::AgeYear),
            ("school_count", None) => Ok(Binning::SchoolCount),
            ("introduction_length", None) => {
                Ok(Binning::IntroductionLength(default_introduction_bins()))
            }
            ("introduction_length", Some(spec)) => {
                Ok(Binning::IntroductionLength(parse_bins(spec)?))
            }
            _ => Err(StatsError::UnknownBinning(s.to_string())),
        }
    }

    /// Bin index used for ordering, and its label.
    fn bin_of(&self, u: &ScoredUser) -> Option<(u32, String)> {
        let p = &u.profile;
        match self {
            Binning::AgeYear => p.age.map(|a| (a, a.to_string())),
            Binning::SchoolCount => {
                let n = p.schools.len() as u32;
                Some((n, n.to_string()))
            }
            Binning::IntroductionLength(bins) => {
                let len = p.introduction.as_ref()?.chars().count() as u32;
                bins.iter()
                    .find(|(lo, hi)| (*lo..=*hi).contains(&len))
                    .map(|(lo, hi)| (*lo, format!("{lo}-{hi}")))
            }
        }
    }
}

pub fn parse_bins(spec: &str) -> Result<Vec<(u32, u32)>, StatsError> {
    let bad = || StatsError::BadBins(spec.to_string());
    let mut bins: Vec<(u32, u32)> = Vec::new();
    for part in spec.split(',') {
        let (lo, hi) = part.trim().split_once('-').ok_or_else(bad)?;
        let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi || bins.last().is_some_and(|&(_, prev)| lo <= prev) {
            return Err(bad());
        }
        bins.push((lo, hi));
    }
    Ok(bins)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    pub label: String,
    pub count: usize,
    pub means: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trend {
    pub binning: String,
    pub rows: Vec<TrendRow>,
    pub excluded: usize,
}

/// One row per non-empty bin, ascending.
pub fn binned_trend(users: &[ScoredUser], binning: &Binning) -> Trend {
    let mut bins: BTreeMap<u32, (String, Vec<&ScoredUser>)> = BTreeMap::new();
    let mut excluded = 0;
    for u in users {
        match binning.bin_of(u) {
            Some((key, label)) => bins
                .entry(key)
                .or_insert_with(|| (label, Vec::new()))
                .1
                .push(u),
            None => excluded += 1,
        }
    }
    let rows = bins
        .into_values()
        .map(|(label, members)| {
            let (means, count) = trait_means(members.iter().map(|u| &u.scores));
            TrendRow {
                label,
                count,
                means,
            }
        })
        .collect();
    Trend {
        binning: binning.name().to_string(),
        rows,
        excluded,
    }
}

pub fn trend_table(trends: &[Trend]) -> Table {
    let mut t = Table::new(["binning", "bin", "count", "O", "C", "E", "A", "N"]);
    for tr in trends {
        for r in &tr.rows {
            let mut row = vec![
                tr.binning.as_str().into(),
                r.label.as_str().into(),
                r.count.into(),
            ];
            push_means(&mut row, Some(r.means));
            t.push(row);
        }
    }
    t
}

/// Provincial-level divisions, in output order.
pub const PROVINCES: [&str; 34] = [
    "北京",
    "天津",
    "河北",
    "山西",
    "内蒙古",
    "辽宁",
    "吉林",
    "黑龙江",
    "上海",
    "江苏",
    "浙江",
    "安徽",
    "福建",
    "江西",
    "山东",
    "河南",
    "湖北",
    "湖南",
    "广东",
    "广西",
    "海南",
    "重庆",
    "四川",
    "贵州",
    "云南",
    "西藏",
    "陕西",
    "甘肃",
    "青海",
    "宁夏",
    "新疆",
    "台湾",
    "香港",
    "澳门",
];

pub const UNKNOWN_PROVINCE: &str = "unknown";

/// Maps a free-form location ("广东 深圳", "广东省") to its province by
/// prefix.
pub fn normalize_province(location: &str) -> Option<&'static str> {
    let loc = location.trim();
    PROVINCES.iter().copied().find(|p| loc.starts_with(p))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProvinceRow {
    pub province: String,
    pub count: usize,
    pub means: Option<[f64; 5]>,
}

/// Named provinces with at least one user, in [`PROVINCES`] order, then the
/// `unknown` row (always present).
pub fn province_aggregate(users: &[ScoredUser]) -> Vec<ProvinceRow> {
    let mut named: BTreeMap<usize, Vec<&ScoredUser>> = BTreeMap::new();
    let mut unknown = Vec::new();
    for u in users {
        let idx = u
            .profile
            .location
            .as_deref()
            .and_then(normalize_province)
            .and_then(|p| PROVINCES.iter().position(|q| *q == p));
        match idx {
            Some(i) => named.entry(i).or_default().push(u),
            None => unknown.push(u),
        }
    }
    let row = |province: &str, members: &[&ScoredUser]| {
        let (means, count) = trait_means(members.iter().map(|u| &u.scores));
        ProvinceRow {
            province: province.to_string(),
            count,
            means: (count > 0).then_some(means),
        }
    };
    let mut rows: Vec<ProvinceRow> = named
        .iter()
        .map(|(i, members)| row(PROVINCES[*i], members))
        .collect();
    rows.push(row(UNKNOWN_PROVINCE, &unknown));
    rows
}

pub fn province_table(rows: &[ProvinceRow]) -> Table {
    let mut t = Table::new(["province", "count", "O", "C", "E", "A", "N"]);
    for r in rows {
        let mut row = vec![r.province.as_str().into(), r.count.into()];
        push_means(&mut row, r.means);
        t.push(row);
    }
    t
}
