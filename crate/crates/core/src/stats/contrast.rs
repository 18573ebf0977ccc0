//! High/low polarity groups and what separates them: profile tags and
//! emoticon usage.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::Serialize;

use super::special::normal_two_tailed;
use super::StatsError;
use crate::corpus::UserProfile;
use crate::model::Trait;
use crate::table::Table;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolaritySplit {
    pub trait_: Trait,
    /// Highest scorers, best first.
    pub high_ids: Vec<String>,
    /// Lowest scorers, lowest first.
    pub low_ids: Vec<String>,
}

/// Group size for `n` users at `quantile`. The epsilon keeps products such as
/// 100 × 0.29 from flooring one below the exact value.
fn group_size(n: usize, quantile: f64) -> usize {
    (n as f64 * quantile + 1e-9).floor() as usize
}

/// Users are totally ordered by (score, user_id); the low group is the first
/// ⌊n·q⌋ of that order and the high group the last ⌊n·q⌋, so ties at either
/// boundary resolve by ascending id and the groups never overlap.
pub fn polarity_split(
    trait_: Trait,
    scores: &[(String, f64)],
    quantile: f64,
) -> Result<PolaritySplit, StatsError> {
    if !(quantile > 0.0 && quantile <= 0.5) {
        return Err(StatsError::BadQuantile(quantile));
    }
    let n = scores.len();
    if n < 4 {
        return Err(StatsError::TooFewForSplit(n));
    }
    let k = group_size(n, quantile);
    if k < 1 {
        return Err(StatsError::EmptyGroups { n, quantile });
    }
    let mut order: Vec<&(String, f64)> = scores.iter().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let low_ids = order[..k].iter().map(|(id, _)| id.clone()).collect();
    let high_ids = order[n - k..]
        .iter()
        .rev()
        .map(|(id, _)| id.clone())
        .collect();
    Ok(PolaritySplit {
        trait_,
        high_ids,
        low_ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TagContrast {
    pub trait_: Trait,
    pub high: Vec<(String, f64)>,
    pub low: Vec<(String, f64)>,
}

fn tag_weights(
    ids: &[String],
    profiles: &HashMap<&str, &UserProfile>,
    top_k: usize,
) -> Vec<(String, f64)> {
    if ids.is_empty() {
        return Vec::new();
    }
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for id in ids {
        if let Some(p) = profiles.get(id.as_str()) {
            let distinct: BTreeSet<&str> = p.tags.iter().map(String::as_str).collect();
            for tag in distinct {
                *counts.entry(tag).or_default() += 1;
            }
        }
    }
    let size = ids.len() as f64;
    let mut ranked: Vec<(String, f64)> = counts
        .into_iter()
        .map(|(tag, c)| (tag.to_string(), c as f64 / size))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(top_k);
    ranked
}

/// Share of each group carrying each tag, top `top_k` per group.
pub fn tag_contrast(split: &PolaritySplit, profiles: &[UserProfile], top_k: usize) -> TagContrast {
    let by_id: HashMap<&str, &UserProfile> =
        profiles.iter().map(|p| (p.user_id.as_str(), p)).collect();
    TagContrast {
        trait_: split.trait_,
        high: tag_weights(&split.high_ids, &by_id, top_k),
        low: tag_weights(&split.low_ids, &by_id, top_k),
    }
}

pub fn tag_contrast_table(contrasts: &[TagContrast]) -> Table {
    let mut t = Table::new(["trait", "group", "rank", "tag", "weight"]);
    for c in contrasts {
        for (group, rows) in [("high", &c.high), ("low", &c.low)] {
            for (rank, (tag, w)) in rows.iter().enumerate() {
                t.push(vec![
                    c.trait_.letter().into(),
                    group.into(),
                    (rank + 1).into(),
                    tag.as_str().into(),
                    (*w).into(),
                ]);
            }
        }
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmoticonRow {
    pub emoticon: String,
    pub high_count: u64,
    pub low_count: u64,
    pub high_proportion: f64,
    pub low_proportion: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmoticonContrast {
    pub trait_: Trait,
    pub rows: Vec<EmoticonRow>,
    pub warning: Option<String>,
}

/// Two-proportion z-test, two-tailed, pooled variance.
pub fn two_proportion_p(x1: u64, n1: u64, x2: u64, n2: u64) -> f64 {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let p1 = x1 as f64 / n1f;
    let p2 = x2 as f64 / n2f;
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return if p1 == p2 { 1.0 } else { 0.0 };
    }
    normal_two_tailed((p1 - p2) / se)
}

/// Emoticon share within each polarity group. An emoticon qualifies when its
/// count over all users exceeds `min_count`; proportions divide by the
/// group's total emoticon occurrences.
pub fn emoticon_contrast(
    split: &PolaritySplit,
    usage: &BTreeMap<String, BTreeMap<String, u64>>,
    min_count: u64,
    alpha: f64,
) -> EmoticonContrast {
    let mut corpus_totals: BTreeMap<&str, u64> = BTreeMap::new();
    for counts in usage.values() {
        for (e, c) in counts {
            *corpus_totals.entry(e.as_str()).or_default() += c;
        }
    }
    let group = |ids: &[String]| {
        let set: HashSet<&str> = ids.iter().map(String::as_str).collect();
        let mut per: BTreeMap<&str, u64> = BTreeMap::new();
        let mut total = 0u64;
        for (user, counts) in usage {
            if set.contains(user.as_str()) {
                for (e, c) in counts {
                    *per.entry(e.as_str()).or_default() += c;
                    total += c;
                }
            }
        }
        (per, total)
    };
    let (high, high_total) = group(&split.high_ids);
    let (low, low_total) = group(&split.low_ids);
    if high_total == 0 || low_total == 0 {
        let which = if high_total == 0 { "high" } else { "low" };
        return EmoticonContrast {
            trait_: split.trait_,
            rows: Vec::new(),
            warning: Some(format!(
                "{} group for {} has no emoticon usage",
                which,
                split.trait_.letter()
            )),
        };
    }
    let mut rows: Vec<EmoticonRow> = corpus_totals
        .iter()
        .filter(|(_, &total)| total > min_count)
        .map(|(&e, _)| {
            let hc = high.get(e).copied().unwrap_or(0);
            let lc = low.get(e).copied().unwrap_or(0);
            let p = two_proportion_p(hc, high_total, lc, low_total);
            EmoticonRow {
                emoticon: e.to_string(),
                high_count: hc,
                low_count: lc,
                high_proportion: hc as f64 / high_total as f64,
                low_proportion: lc as f64 / low_total as f64,
                p,
                significant: p < alpha,
            }
        })
        .collect();
    rows.sort_by(|a, b| {
        let da = (a.high_proportion - a.low_proportion).abs();
        let db = (b.high_proportion - b.low_proportion).abs();
        db.total_cmp(&da).then_with(|| a.emoticon.cmp(&b.emoticon))
    });
    EmoticonContrast {
        trait_: split.trait_,
        rows,
        warning: None,
    }
}

pub fn emoticon_table(contrasts: &[EmoticonContrast]) -> Table {
    let mut t = Table::new([
        "trait",
        "emoticon",
        "high_count",
        "low_count",
        "high_proportion",
        "low_proportion",
        "p",
        "significant",
    ]);
    for c in contrasts {
        for r in &c.rows {
            t.push(vec![
                c.trait_.letter().into(),
                r.emoticon.as_str().into(),
                r.high_count.into(),
                r.low_count.into(),
                r.high_proportion.into(),
                r.low_proportion.into(),
                r.p.into(),
                r.significant.into(),
            ]);
        }
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(vals: &[f64]) -> Vec<(String, f64)> {
        vals.iter()
            .enumerate()
            .map(|(i, v)| (format!("u{i}"), *v))
            .collect()
    }

    #[test]
    fn quartile_sizes() {
        let s = polarity_split(Trait::O, &scores(&[1., 2., 3., 4., 5., 6., 7., 8.]), 0.25).unwrap();
        assert_eq!(s.high_ids, vec!["u7", "u6"]);
        assert_eq!(s.low_ids, vec!["u0", "u1"]);
        let big: Vec<(String, f64)> = (0..6467)
            .map(|i| (format!("{i:05}"), (i % 97) as f64))
            .collect();
        let s = polarity_split(Trait::N, &big, 0.25).unwrap();
        assert_eq!((s.high_ids.len(), s.low_ids.len()), (1616, 1616));
    }

    #[test]
    fn all_ties_break_by_id() {
        let s = polarity_split(Trait::C, &scores(&[5.0; 8]), 0.25).unwrap();
        assert_eq!(s.low_ids, vec!["u0", "u1"]);
        assert_eq!(s.high_ids, vec!["u7", "u6"]);
    }

    #[test]
    fn split_errors() {
        assert!(matches!(
            polarity_split(Trait::O, &scores(&[1., 2., 3.]), 0.25),
            Err(StatsError::TooFewForSplit(3))
        ));
        assert!(matches!(
            polarity_split(Trait::O, &scores(&[1., 2., 3., 4.]), 0.2),
            Err(StatsError::EmptyGroups { .. })
        ));
        assert!(matches!(
            polarity_split(Trait::O, &scores(&[1., 2., 3., 4.]), 0.6),
            Err(StatsError::BadQuantile(_))
        ));
        assert_eq!(group_size(100, 0.29), 29);
    }

    fn profile(id: &str, tags: &[&str]) -> UserProfile {
        let mut p = UserProfile::new(id);
        p.tags = tags.iter().map(|t| t.to_string()).collect();
        p
    }

    #[test]
    fn tag_weights_rank_descending() {
        let split = PolaritySplit {
            trait_: Trait::E,
            high_ids: vec!["a".into(), "b".into()],
            low_ids: vec!["c".into()],
        };
        let profiles = vec![
            profile("a", &["Music", "Travel", "Music"]),
            profile("b", &["Music"]),
            profile("c", &["Sleep"]),
        ];
        let tc = tag_contrast(&split, &profiles, 10);
        assert_eq!(tc.high, vec![("Music".into(), 1.0), ("Travel".into(), 0.5)]);
        assert_eq!(tc.low, vec![("Sleep".into(), 1.0)]);
        assert!(!tc.low.iter().any(|(t, _)| t == "Music"));
        assert_eq!(tag_contrast(&split, &profiles, 1).high.len(), 1);
    }

    fn usage(rows: &[(&str, &[(&str, u64)])]) -> BTreeMap<String, BTreeMap<String, u64>> {
        rows.iter()
            .map(|(u, c)| {
                (
                    u.to_string(),
                    c.iter().map(|(e, n)| (e.to_string(), *n)).collect(),
                )
            })
            .collect()
    }

    fn split2() -> PolaritySplit {
        PolaritySplit {
            trait_: Trait::O,
            high_ids: vec!["h".into()],
            low_ids: vec!["l".into()],
        }
    }

    #[test]
    fn emoticon_only_in_high_group() {
        let u = usage(&[
            ("h", &[("[月亮]", 10), ("[心]", 10)]),
            ("l", &[("[心]", 20)]),
        ]);
        let c = emoticon_contrast(&split2(), &u, 0, 0.05);
        let moon = c.rows.iter().find(|r| r.emoticon == "[月亮]").unwrap();
        assert_eq!(moon.low_proportion, 0.0);
        assert_eq!(moon.high_proportion, 0.5);
    }

    #[test]
    fn identical_distributions_show_no_difference() {
        let u = usage(&[
            ("h", &[("[a]", 30), ("[b]", 70)]),
            ("l", &[("[a]", 30), ("[b]", 70)]),
        ]);
        let c = emoticon_contrast(&split2(), &u, 0, 0.05);
        assert_eq!(c.rows.len(), 2);
        for r in &c.rows {
            assert_eq!(r.high_proportion, r.low_proportion);
            assert!(!r.significant);
            assert!((r.p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn min_count_filter_is_strict() {
        let u = usage(&[("h", &[("[a]", 250)]), ("l", &[("[a]", 250), ("[b]", 501)])]);
        let c = emoticon_contrast(&split2(), &u, 500, 0.05);
        assert_eq!(
            c.rows
                .iter()
                .map(|r| r.emoticon.as_str())
                .collect::<Vec<_>>(),
            vec!["[b]"]
        );
    }

    #[test]
    fn empty_group_warns() {
        let u = usage(&[("l", &[("[a]", 3)])]);
        let c = emoticon_contrast(&split2(), &u, 0, 0.05);
        assert!(c.rows.is_empty());
        assert!(c.warning.unwrap().contains("high"));
    }

    #[test]
    fn z_test_matches_hand_computation() {
        // p1 = .6, p2 = .4, pooled .5, se = sqrt(.25·(2/100)) = 0.0707107; z = 2.828427
        let p = two_proportion_p(60, 100, 40, 100);
        assert!((p - 0.004_677_734_981_047_177).abs() < 1e-12, "{p}");
    }
}
