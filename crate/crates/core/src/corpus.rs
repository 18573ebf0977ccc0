//! User profiles and posts: line-delimited JSON ingestion and the inclusion
//! filters applied before any analysis.
//!
//! Loading is lenient (malformed lines are skipped and counted) but refuses a
//! file where more than half of the non-blank lines fail to parse, since that
//! almost always means the wrong file was passed.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

/// Platform cap on profile tags.
pub const MAX_TAGS: usize = 10;
/// Platform cap on the self-introduction, in characters.
pub const MAX_INTRODUCTION_CHARS: usize = 70;
/// Inclusive age bounds used to discard fake birthdays.
pub const DEFAULT_AGE_RANGE: (u32, u32) = (10, 47);
pub const DEFAULT_MIN_FOLLOWERS: u64 = 10;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {malformed} of {total} lines are malformed; wrong file?")]
    Format {
        path: PathBuf,
        malformed: usize,
        total: usize,
    },
    #[error("birth date {birth} is after reference date {reference}")]
    BirthAfterReference {
        birth: NaiveDate,
        reference: NaiveDate,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gender {
    Male,
    Female,
    Unknown,
}

impl Gender {
    pub fn as_str(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
            Gender::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserProfile {
    pub user_id: String,
    /// Whole years; `None` when unknown or demoted by validation.
    pub age: Option<u32>,
    pub gender: Gender,
    pub verified: bool,
    pub follower_count: u64,
    pub tags: Vec<String>,
    pub location: Option<String>,
    pub schools: Vec<String>,
    pub introduction: Option<String>,
    pub birth_date: Option<NaiveDate>,
}

impl UserProfile {
    /// A profile with every optional field empty.
    pub fn new(user_id: impl Into<String>) -> Self {
        UserProfile {
            user_id: user_id.into(),
            age: None,
            gender: Gender::Unknown,
            verified: false,
            follower_count: 0,
            tags: Vec::new(),
            location: None,
            schools: Vec::new(),
            introduction: None,
            birth_date: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Post {
    pub user_id: String,
    pub text: String,
    pub is_repost: bool,
    pub created_at: Option<String>,
}

/// Wire form of one `profiles.jsonl` line.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileRecord {
    user_id: String,
    #[serde(default)]
    birth_date: Option<String>,
    #[serde(default)]
    gender: Option<String>,
    verified: bool,
    follower_count: u64,
    tags: Vec<String>,
    #[serde(default)]
    location: Option<String>,
    schools: Vec<String>,
    #[serde(default)]
    introduction: Option<String>,
}

impl ProfileRecord {
    fn into_profile(self) -> Option<UserProfile> {
        if self.user_id.is_empty() || self.tags.len() > MAX_TAGS {
            return None;
        }
        let gender = match self.gender.as_deref() {
            None => Gender::Unknown,
            Some("m") => Gender::Male,
            Some("f") => Gender::Female,
            Some(_) => return None,
        };
        let birth_date = match self.birth_date {
            None => None,
            Some(s) => Some(NaiveDate::parse_from_str(&s, "%Y-%m-%d").ok()?),
        };
        if let Some(intro) = &self.introduction {
            if intro.chars().count() > MAX_INTRODUCTION_CHARS {
                return None;
            }
        }
        Some(UserProfile {
            user_id: self.user_id,
            age: None,
            gender,
            verified: self.verified,
            follower_count: self.follower_count,
            tags: self.tags,
            location: self.location.filter(|l| !l.trim().is_empty()),
            schools: self.schools,
            introduction: self.introduction.filter(|i| !i.is_empty()),
            birth_date,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PostRecord {
    user_id: String,
    text: String,
    is_repost: bool,
    #[serde(default)]
    created_at: Option<String>,
}

impl PostRecord {
    fn into_post(self) -> Option<Post> {
        if self.user_id.is_empty() || self.text.is_empty() {
            return None;
        }
        Some(Post {
            user_id: self.user_id,
            text: self.text,
            is_repost: self.is_repost,
            created_at: self.created_at,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadSummary {
    pub users: usize,
    pub posts: usize,
    pub malformed_lines: usize,
    pub orphan_posts: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedCorpus {
    pub profiles: Vec<UserProfile>,
    pub posts: Vec<Post>,
    pub summary: LoadSummary,
}

fn read_jsonl<R, T>(
    path: &Path,
    convert: impl Fn(R) -> Option<T>,
) -> Result<(Vec<T>, usize), CorpusError>
where
    R: for<'de> Deserialize<'de>,
{
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut records = Vec::new();
    let mut malformed = 0usize;
    let mut total = 0usize;
    for line in reader.lines() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        match serde_json::from_str::<R>(&line).ok().and_then(&convert) {
            Some(record) => records.push(record),
            None => malformed += 1,
        }
    }
    if malformed * 2 > total {
        return Err(CorpusError::Format {
            path: path.to_path_buf(),
            malformed,
            total,
        });
    }
    Ok((records, malformed))
}

pub fn load_profiles(path: &Path) -> Result<(Vec<UserProfile>, usize), CorpusError> {
    read_jsonl(path, ProfileRecord::into_profile)
}

pub fn load_posts(path: &Path) -> Result<(Vec<Post>, usize), CorpusError> {
    read_jsonl(path, PostRecord::into_post)
}

/// Reads both files. Posts whose user is not in the profile file are kept and
/// counted as orphans.
pub fn load_corpus(profile_path: &Path, posts_path: &Path) -> Result<LoadedCorpus, CorpusError> {
    let (profiles, bad_profiles) = load_profiles(profile_path)?;
    let (posts, bad_posts) = load_posts(posts_path)?;
    let known: HashSet<&str> = profiles.iter().map(|p| p.user_id.as_str()).collect();
    let orphan_posts = posts
        .iter()
        .filter(|p| !known.contains(p.user_id.as_str()))
        .count();
    let summary = LoadSummary {
        users: profiles.len(),
        posts: posts.len(),
        malformed_lines: bad_profiles + bad_posts,
        orphan_posts,
    };
    Ok(LoadedCorpus {
        profiles,
        posts,
        summary,
    })
}

/// Whole years from `birth_date` to `reference_date`, rounding down.
pub fn compute_age(birth_date: NaiveDate, reference_date: NaiveDate) -> Result<u32, CorpusError> {
    if birth_date > reference_date {
        return Err(CorpusError::BirthAfterReference {
            birth: birth_date,
            reference: reference_date,
        });
    }
    let mut years = reference_date.year() - birth_date.year();
    if (reference_date.month(), reference_date.day()) < (birth_date.month(), birth_date.day()) {
        years -= 1;
    }
    Ok(years as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    TooFewFollowers,
    AdAccount,
    InvalidAge,
    NoPosts,
}

/// How the follower threshold and the ad-URL test combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdRule {
    /// Excluded only when both hold: few followers and an ad URL.
    #[default]
    Conjunction,
    /// Either condition alone excludes.
    Either,
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub min_followers: u64,
    pub ad_url_patterns: Vec<String>,
    pub reference_date: NaiveDate,
    pub age_range: (u32, u32),
    pub ad_rule: AdRule,
}

impl ValidationConfig {
    pub fn new(reference_date: NaiveDate) -> Self {
        ValidationConfig {
            min_followers: DEFAULT_MIN_FOLLOWERS,
            ad_url_patterns: default_ad_url_patterns(),
            reference_date,
            age_range: DEFAULT_AGE_RANGE,
            ad_rule: AdRule::Conjunction,
        }
    }
}

pub fn default_ad_url_patterns() -> Vec<String> {
    vec!["taobao".to_string(), "tmall".to_string()]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidityReport {
    pub total_users: usize,
    pub accepted: usize,
    pub rejected: Vec<(String, RejectReason)>,
    /// Users kept with their age cleared; not counted as rejections.
    pub age_demoted: Vec<(String, RejectReason)>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub profiles: Vec<UserProfile>,
    pub posts: Vec<Post>,
}

fn is_url_start(lower: &str, at: usize) -> bool {
    lower[at..].starts_with("http://") || lower[at..].starts_with("https://")
}

/// True when any URL in `text` contains one of the (lowercase) patterns.
fn has_ad_url(text: &str, patterns: &[String]) -> bool {
    let lower = text.to_lowercase();
    let mut idx = 0;
    while let Some(off) = lower[idx..].find("http") {
        let start = idx + off;
        if is_url_start(&lower, start) {
            let end = lower[start..]
                .find(char::is_whitespace)
                .map_or(lower.len(), |e| start + e);
            let url = &lower[start..end];
            if patterns.iter().any(|p| url.contains(p.as_str())) {
                return true;
            }
            idx = end;
        } else {
            idx = start + 4;
        }
    }
    false
}

/// Applies the inclusion criteria. Order of the accepted profiles follows the
/// input; posts of rejected or unknown users are dropped.
pub fn validate_users(
    profiles: &[UserProfile],
    posts: &[Post],
    config: &ValidationConfig,
) -> (Corpus, ValidityReport) {
    let patterns: Vec<String> = config
        .ad_url_patterns
        .iter()
        .map(|p| p.to_lowercase())
        .collect();
    let mut by_user: HashMap<&str, Vec<&Post>> = HashMap::new();
    for post in posts {
        by_user.entry(post.user_id.as_str()).or_default().push(post);
    }

    let mut report = ValidityReport {
        total_users: profiles.len(),
        ..Default::default()
    };
    let mut kept = Vec::new();
    let mut kept_ids = HashSet::new();
    let mut seen = HashSet::new();
    for profile in profiles {
        if !seen.insert(profile.user_id.as_str()) {
            // Repeated profile lines for one id: first one wins.
            report.total_users -= 1;
            continue;
        }
        let user_posts = by_user.get(profile.user_id.as_str());
        let Some(user_posts) = user_posts.filter(|p| !p.is_empty()) else {
            report
                .rejected
                .push((profile.user_id.clone(), RejectReason::NoPosts));
            continue;
        };
        let few_followers = profile.follower_count < config.min_followers;
        let ad = user_posts.iter().any(|p| has_ad_url(&p.text, &patterns));
        let reason = match config.ad_rule {
            AdRule::Conjunction if few_followers && ad => Some(RejectReason::AdAccount),
            AdRule::Either if ad => Some(RejectReason::AdAccount),
            AdRule::Either if few_followers => Some(RejectReason::TooFewFollowers),
            _ => None,
        };
        if let Some(reason) = reason {
            report.rejected.push((profile.user_id.clone(), reason));
            continue;
        }

        let mut profile = profile.clone();
        profile.age = None;
        if let Some(birth) = profile.birth_date {
            match compute_age(birth, config.reference_date) {
                Ok(age) if (config.age_range.0..=config.age_range.1).contains(&age) => {
                    profile.age = Some(age)
                }
                _ => report
                    .age_demoted
                    .push((profile.user_id.clone(), RejectReason::InvalidAge)),
            }
        }
        kept_ids.insert(profile.user_id.clone());
        kept.push(profile);
    }
    report.accepted = kept.len();
    let posts = posts
        .iter()
        .filter(|p| kept_ids.contains(&p.user_id))
        .cloned()
        .collect();
    (
        Corpus {
            profiles: kept,
            posts,
        },
        report,
    )
}

/// Posts grouped per user, keyed and iterated in user-id order.
pub fn posts_by_user(posts: &[Post]) -> BTreeMap<&str, Vec<&Post>> {
    let mut map: BTreeMap<&str, Vec<&Post>> = BTreeMap::new();
    for p in posts {
        map.entry(p.user_id.as_str()).or_default().push(p);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn date(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn post(user: &str, text: &str) -> Post {
        Post {
            user_id: user.into(),
            text: text.into(),
            is_repost: false,
            created_at: None,
        }
    }

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for l in lines {
            writeln!(f, "{l}").unwrap();
        }
        f
    }

    const P1: &str = r#"{"user_id":"u1","birth_date":"1990-05-01","gender":"f","verified":true,"follower_count":120,"tags":["Music"],"location":"广东 深圳","schools":["中山大学"],"introduction":"hi"}"#;
    const P2: &str =
        r#"{"user_id":"u2","verified":false,"follower_count":3,"tags":[],"schools":[]}"#;
    const P3: &str = r#"{"user_id":"u3","gender":"m","verified":false,"follower_count":30,"tags":["a","b"],"schools":[]}"#;

    #[test]
    fn compute_age_examples() {
        assert_eq!(
            compute_age(date("1992-06-01"), date("2018-06-01")).unwrap(),
            26
        );
        assert_eq!(
            compute_age(date("1992-06-02"), date("2018-06-01")).unwrap(),
            25
        );
        assert_eq!(
            compute_age(date("1970-01-01"), date("2018-01-01")).unwrap(),
            48
        );
        assert!(compute_age(date("2019-01-01"), date("2018-01-01")).is_err());
    }

    #[test]
    fn loads_all_valid_profiles() {
        let profiles = write_lines(&[P1, P2, P3]);
        let posts = write_lines(&[r#"{"user_id":"u1","text":"x","is_repost":false}"#]);
        let c = load_corpus(profiles.path(), posts.path()).unwrap();
        assert_eq!(c.profiles.len(), 3);
        assert_eq!(c.profiles[0].gender, Gender::Female);
        assert_eq!(c.profiles[0].birth_date, Some(date("1990-05-01")));
        assert_eq!(c.profiles[1].location, None);
        assert_eq!(c.summary.malformed_lines, 0);
    }

    #[test]
    fn malformed_line_is_skipped_and_counted() {
        let mut lines = vec![P1; 9];
        lines.insert(4, "{not json");
        let profiles = write_lines(&lines);
        let (records, bad) = load_profiles(profiles.path()).unwrap();
        assert_eq!(records.len(), 9);
        assert_eq!(bad, 1);
    }

    #[test]
    fn mostly_malformed_file_is_fatal() {
        let profiles = write_lines(&[P1, "nope", "nope", "{}"]);
        assert!(matches!(
            load_profiles(profiles.path()),
            Err(CorpusError::Format {
                malformed: 3,
                total: 4,
                ..
            })
        ));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_posts(Path::new("/nonexistent/posts.jsonl")),
            Err(CorpusError::Io { .. })
        ));
    }

    #[test]
    fn schema_violations_are_malformed() {
        let too_many_tags = r#"{"user_id":"x","verified":false,"follower_count":1,"tags":["1","2","3","4","5","6","7","8","9","10","11"],"schools":[]}"#;
        let negative =
            r#"{"user_id":"x","verified":false,"follower_count":-1,"tags":[],"schools":[]}"#;
        let bad_gender = r#"{"user_id":"x","gender":"q","verified":false,"follower_count":1,"tags":[],"schools":[]}"#;
        let f = write_lines(&[P1, P2, P3, too_many_tags, negative, bad_gender]);
        let (records, bad) = load_profiles(f.path()).unwrap();
        assert_eq!((records.len(), bad), (3, 3));
        let empty_post = write_lines(&[
            r#"{"user_id":"u1","text":"","is_repost":false}"#,
            r#"{"user_id":"u1","text":"ok","is_repost":true,"created_at":"2018-01-01T00:00:00"}"#,
        ]);
        let (posts, bad) = load_posts(empty_post.path()).unwrap();
        assert_eq!((posts.len(), bad), (1, 1));
    }

    #[test]
    fn orphan_posts_are_kept_and_counted() {
        let profiles = write_lines(&[P1]);
        let posts = write_lines(&[
            r#"{"user_id":"u1","text":"a","is_repost":false}"#,
            r#"{"user_id":"ghost","text":"b","is_repost":false}"#,
        ]);
        let c = load_corpus(profiles.path(), posts.path()).unwrap();
        assert_eq!(c.posts.len(), 2);
        assert_eq!(c.summary.orphan_posts, 1);
    }

    fn config() -> ValidationConfig {
        ValidationConfig::new(date("2018-01-01"))
    }

    #[test]
    fn few_followers_with_ad_url_is_excluded() {
        let mut u = UserProfile::new("ad");
        u.follower_count = 5;
        let posts = [post("ad", "好物推荐 http://shop.taobao.com/item 快来")];
        let (corpus, report) = validate_users(&[u], &posts, &config());
        assert!(corpus.profiles.is_empty());
        assert_eq!(
            report.rejected,
            vec![("ad".into(), RejectReason::AdAccount)]
        );
    }

    #[test]
    fn few_followers_without_ad_is_kept() {
        let mut u = UserProfile::new("quiet");
        u.follower_count = 5;
        let (corpus, report) = validate_users(&[u], &[post("quiet", "今天不错")], &config());
        assert_eq!(corpus.profiles.len(), 1);
        assert!(report.rejected.is_empty());
    }

    #[test]
    fn either_rule_rejects_on_followers_alone() {
        let mut u = UserProfile::new("quiet");
        u.follower_count = 5;
        let mut cfg = config();
        cfg.ad_rule = AdRule::Either;
        let (_, report) = validate_users(&[u], &[post("quiet", "今天不错")], &cfg);
        assert_eq!(report.rejected[0].1, RejectReason::TooFewFollowers);
    }

    #[test]
    fn default_birthday_demotes_age_only() {
        let mut u = UserProfile::new("d");
        u.follower_count = 100;
        u.birth_date = Some(date("1970-01-01"));
        let (corpus, report) = validate_users(&[u], &[post("d", "x")], &config());
        assert_eq!(corpus.profiles.len(), 1);
        assert_eq!(corpus.profiles[0].age, None);
        assert_eq!(
            report.age_demoted,
            vec![("d".into(), RejectReason::InvalidAge)]
        );
        assert!(report.rejected.is_empty());
    }

    #[test]
    fn in_range_age_is_computed() {
        let mut u = UserProfile::new("y");
        u.birth_date = Some(date("1992-06-02"));
        let (corpus, _) = validate_users(&[u], &[post("y", "x")], &config());
        assert_eq!(corpus.profiles[0].age, Some(25));
    }

    #[test]
    fn users_without_posts_are_excluded() {
        let (corpus, report) = validate_users(
            &[UserProfile::new("a"), UserProfile::new("b")],
            &[post("a", "x")],
            &config(),
        );
        assert_eq!(corpus.profiles.len(), 1);
        assert_eq!(report.rejected, vec![("b".into(), RejectReason::NoPosts)]);
    }

    #[test]
    fn ad_pattern_must_be_inside_a_url() {
        assert!(has_ad_url("see HTTPS://m.TaoBao.com/x", &["taobao".into()]));
        assert!(!has_ad_url("taobao is a shop", &["taobao".into()]));
        assert!(!has_ad_url("http://t.cn/abc taobao", &["taobao".into()]));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_profile() -> impl Strategy<Value = UserProfile> {
            (
                0u8..12,
                0u64..30,
                proptest::option::of(1960i32..2015),
                any::<bool>(),
            )
                .prop_map(|(id, followers, year, verified)| {
                    let mut p = UserProfile::new(format!("u{id}"));
                    p.follower_count = followers;
                    p.verified = verified;
                    p.birth_date = year.map(|y| NaiveDate::from_ymd_opt(y, 1, 1).unwrap());
                    p
                })
        }

        fn arb_post() -> impl Strategy<Value = Post> {
            (
                0u8..14,
                prop_oneof![Just("今天不错"), Just("买 http://taobao.com/x"), Just("hi")],
            )
                .prop_map(|(id, text)| post(&format!("u{id}"), text))
        }

        proptest! {
            #[test]
            fn accounting_identity_and_idempotence(
                profiles in proptest::collection::vec(arb_profile(), 0..20),
                posts in proptest::collection::vec(arb_post(), 0..40),
            ) {
                let cfg = config();
                let (first, report) = validate_users(&profiles, &posts, &cfg);
                let distinct: HashSet<_> = report.rejected.iter().map(|(id, _)| id).collect();
                prop_assert_eq!(report.accepted + distinct.len(), report.total_users);

                let (second, report2) = validate_users(&first.profiles, &first.posts, &cfg);
                prop_assert!(report2.rejected.is_empty());
                prop_assert_eq!(&second.profiles, &first.profiles);
                prop_assert_eq!(&second.posts, &first.posts);
            }

            #[test]
            fn load_then_validate_is_deterministic(
                profiles in proptest::collection::vec(arb_profile(), 1..20),
                posts in proptest::collection::vec(arb_post(), 0..40),
            ) {
                let profile_lines: Vec<String> = profiles
                    .iter()
                    .map(|p| {
                        let mut v = serde_json::json!({
                            "user_id": p.user_id,
                            "verified": p.verified,
                            "follower_count": p.follower_count,
                            "tags": [],
                            "schools": [],
                        });
                        if let Some(d) = p.birth_date {
                            v["birth_date"] = d.format("%Y-%m-%d").to_string().into();
                        }
                        v.to_string()
                    })
                    .collect();
                let post_lines: Vec<String> = posts
                    .iter()
                    .map(|p| serde_json::json!({"user_id": p.user_id, "text": p.text, "is_repost": p.is_repost}).to_string())
                    .collect();
                let pf = write_lines(&profile_lines.iter().map(String::as_str).collect::<Vec<_>>());
                let qf = write_lines(&post_lines.iter().map(String::as_str).collect::<Vec<_>>());
                let run = || {
                    let loaded = load_corpus(pf.path(), qf.path()).unwrap();
                    let (corpus, report) = validate_users(&loaded.profiles, &loaded.posts, &config());
                    let ids: Vec<String> = corpus.profiles.iter().map(|p| p.user_id.clone()).collect();
                    (ids, report.rejected)
                };
                let first = run();
                prop_assert_eq!(run(), first);
            }
        }
    }
}
