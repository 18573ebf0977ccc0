//! Seeded synthetic data: the bundled fixture (lexicon, word list, corpus,
//! labels, fitted model), planted-effect corpora for checking the analyses,
//! and bulk posts for throughput runs.
//!
//! Everything here is a pure function of its seed.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{Duration, NaiveDate};
use rand::distr::weighted::WeightedIndex;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use crate::cleaner::{clean_corpus, CleanerConfig};
use crate::corpus::{Gender, Post, UserProfile};
use crate::lexicon::{features_to_csv, featurize, Category, CompiledMatcher, Entry, Lexicon};
use crate::model::{fit, scores_to_csv, BigFive, MappingModel, ModelError};
use crate::segmenter::{segment, WordList};
use crate::stats::{ScoredUser, PROVINCES};

/// Category names of the fixture lexicon, in id order (ids start at 1).
pub const FIXTURE_CATEGORIES: [&str; 30] = [
    "I", "We", "They", "Verb", "Quant", "SpecArt", "Social", "Affect", "PosEmo", "NegEmo", "Anx",
    "Ingest", "Achieve", "Love", "Hear", "You", "Negate", "Family", "Friend", "Cogmech", "Insight",
    "Cause", "See", "Feel", "Body", "Health", "Work", "Leisure", "Money", "Death",
];

pub const FIXTURE_SEED: u64 = 20160630;
pub const FIXTURE_USERS: usize = 400;
pub const FIXTURE_LABELED: usize = 120;

pub fn fixture_reference_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2016, 6, 30).expect("valid date")
}

const CHAR_POOL: &str = "天地人和心手口日月山水火木金土风云雨雪花草鸟鱼虫马牛羊猫狗春夏秋冬东西南北上下左右大小多少长短高低快慢新旧好坏美丑明暗冷热甜苦酸辣光影声色梦想歌舞书画茶酒饭菜衣帽车船门窗灯桌椅笑哭爱恨喜怒忧思学问工商医药钱财家国友朋兄弟姐妹父母子女老少生死来去走跑看听说读写吃喝睡醒买卖";

const FILLER_WORDS: usize = 300;
const EXACT_PER_CATEGORY: usize = 15;
const SHARED_ENTRIES: usize = 20;

pub const FIXTURE_EMOTICONS: [&str; 8] = [
    "[哈哈]", "[心]", "[doge]", "[泪]", "[月亮]", "[怒]", "😀", "👍",
];
const FIXTURE_TAGS: [&str; 14] = [
    "旅游", "音乐", "电影", "美食", "睡觉", "摄影", "读书", "运动", "动漫", "游戏", "时尚", "宠物",
    "科技", "学习",
];

/// Vocabulary behind the fixture lexicon: the lexicon itself, the word list
/// used for segmentation, and words by category for text generation.
pub struct Vocabulary {
    pub lexicon: Lexicon,
    pub word_list: WordList,
    /// Surface words that hit each category (wildcard entries contribute
    /// extensions of their prefix).
    pub category_words: Vec<Vec<String>>,
    /// Words in the word list that hit no category.
    pub filler: Vec<String>,
}

fn random_word(rng: &mut ChaCha8Rng, chars: &[char], len: usize) -> String {
    (0..len)
        .map(|_| *chars.choose(rng).expect("pool"))
        .collect()
}

/// A 30-category, ~500-entry lexicon with invented two-character words.
pub fn fixture_vocabulary(seed: u64) -> Vocabulary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chars: Vec<char> = CHAR_POOL.chars().collect();
    let mut used: BTreeSet<String> = BTreeSet::new();
    let fresh = |used: &mut BTreeSet<String>, rng: &mut ChaCha8Rng, len: usize| loop {
        let w = random_word(rng, &chars, len);
        if used.insert(w.clone()) {
            return w;
        }
    };

    let categories: Vec<Category> = FIXTURE_CATEGORIES
        .iter()
        .enumerate()
        .map(|(i, n)| Category {
            id: i as u32 + 1,
            name: n.to_string(),
        })
        .collect();
    let mut entries = Vec::new();
    let mut category_words: Vec<Vec<String>> = vec![Vec::new(); categories.len()];
    let mut words: Vec<String> = Vec::new();

    for (c, cat) in categories.iter().enumerate() {
        for _ in 0..EXACT_PER_CATEGORY {
            let w = fresh(&mut used, &mut rng, 2);
            entries.push(Entry {
                pattern: w.clone(),
                wildcard: false,
                category_ids: vec![cat.id],
            });
            category_words[c].push(w.clone());
            words.push(w);
        }
        // One prefix entry per category, seen in text as three-character words.
        let prefix = fresh(&mut used, &mut rng, 2);
        entries.push(Entry {
            pattern: prefix.clone(),
            wildcard: true,
            category_ids: vec![cat.id],
        });
        for _ in 0..2 {
            let ext = format!("{prefix}{}", chars.choose(&mut rng).expect("pool"));
            if used.insert(ext.clone()) {
                category_words[c].push(ext.clone());
                words.push(ext);
            }
        }
    }
    for _ in 0..SHARED_ENTRIES {
        let w = fresh(&mut used, &mut rng, 2);
        let a = rng.random_range(0..categories.len());
        let b = (a + rng.random_range(1..categories.len())) % categories.len();
        let mut ids = vec![categories[a].id, categories[b].id];
        ids.sort();
        entries.push(Entry {
            pattern: w.clone(),
            wildcard: false,
            category_ids: ids,
        });
        category_words[a].push(w.clone());
        category_words[b].push(w.clone());
        words.push(w);
    }
    let filler: Vec<String> = (0..FILLER_WORDS)
        .map(|i| fresh(&mut used, &mut rng, 2 + i % 2))
        .collect();
    // Filler words must not accidentally extend a wildcard prefix.
    let prefixes: Vec<String> = entries
        .iter()
        .filter(|e| e.wildcard)
        .map(|e| e.pattern.clone())
        .collect();
    let filler: Vec<String> = filler
        .into_iter()
        .filter(|w| !prefixes.iter().any(|p| w.starts_with(p.as_str())))
        .collect();
    words.extend(filler.iter().cloned());

    let lexicon = Lexicon::new(categories, entries).expect("generated lexicon is valid");
    let word_list = WordList::new(words).expect("generated words are short");
    Vocabulary {
        lexicon,
        word_list,
        category_words,
        filler,
    }
}

fn word_list_text(v: &Vocabulary) -> String {
    let mut words: Vec<&String> = v.category_words.iter().flatten().chain(&v.filler).collect();
    words.sort();
    words.dedup();
    let mut out = String::from("# fixture segmentation word list\n");
    for w in words {
        out.push_str(w);
        out.push('\n');
    }
    out
}

fn standard_normal() -> Normal<f64> {
    Normal::new(0.0, 1.0).expect("valid normal")
}

/// Category-usage loadings on the five traits (30 × 5).
fn loadings(rng: &mut ChaCha8Rng, k: usize) -> Vec<[f64; 5]> {
    let z = standard_normal();
    (0..k)
        .map(|_| {
            let mut row = [0.0; 5];
            row.iter_mut().for_each(|v| *v = 0.6 * z.sample(rng));
            row
        })
        .collect()
}

/// Draws an index with probability proportional to `weights`.
fn weighted_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    WeightedIndex::new(weights)
        .expect("positive weights")
        .sample(rng)
}

/// Generates one post body of roughly `target_chars` characters, with words
/// drawn from categories according to `category_weights`.
fn post_text(
    rng: &mut ChaCha8Rng,
    vocab: &Vocabulary,
    category_weights: &[f64],
    target_chars: usize,
) -> String {
    const PUNCT: [&str; 4] = ["，", "。", "！", " "];
    let mut text = String::new();
    let mut chars = 0;
    while chars < target_chars {
        let word = if rng.random_bool(0.45) {
            let c = weighted_index(rng, category_weights);
            vocab.category_words[c].choose(rng).expect("category words")
        } else {
            vocab.filler.choose(rng).expect("filler")
        };
        text.push_str(word);
        chars += word.chars().count();
        if rng.random_bool(0.12) {
            text.push_str(PUNCT.choose(rng).expect("punct"));
            chars += 1;
        }
    }
    text
}

fn decorate(rng: &mut ChaCha8Rng, body: String, emoticon_weights: &[f64]) -> String {
    let mut text = body;
    if rng.random_bool(0.08) {
        text = format!("@用户{} {text}", rng.random_range(100..999));
    }
    if rng.random_bool(0.06) {
        text.push_str(&format!(" #话题{}#", rng.random_range(1..50)));
    }
    if rng.random_bool(0.07) {
        text.push_str(&format!(" http://t.cn/R{:05}", rng.random_range(0..99999)));
    }
    if rng.random_bool(0.05) {
        text = format!("转发微博 {text}");
    }
    let n_emoticons = [0, 1, 1, 1, 2, 2][rng.random_range(0..6)];
    for _ in 0..n_emoticons {
        text.push_str(FIXTURE_EMOTICONS[weighted_index(rng, emoticon_weights)]);
    }
    text
}

/// All files of the bundled fixture, as text.
pub struct Fixture {
    pub lexicon_dic: String,
    pub word_list: String,
    pub profiles_jsonl: String,
    pub posts_jsonl: String,
    pub labels_csv: String,
    pub model_json: String,
    pub spam_keywords: String,
    pub templates: String,
}

struct SynthUser {
    profile: UserProfile,
    traits: BigFive,
    ad_posts: bool,
}

fn fixture_users(rng: &mut ChaCha8Rng, n: usize, labeled: usize) -> Vec<SynthUser> {
    let z = standard_normal();
    let reference = fixture_reference_date();
    let intro_chars: Vec<char> = CHAR_POOL.chars().collect();
    (0..n)
        .map(|i| {
            let id = format!("u{i:04}");
            let mut p = UserProfile::new(&id);
            let verified = rng.random_bool(0.2);
            let schools = [0, 1, 1, 2, 2, 3, 4][rng.random_range(0..7)];
            let mut t = [0.0; 5];
            t.iter_mut().for_each(|v| *v = 50.0 + 10.0 * z.sample(rng));
            t[1] += 3.0 * schools as f64 - 4.0 + if verified { 5.0 } else { 0.0 };

            p.gender = match rng.random_range(0..10) {
                0 => Gender::Unknown,
                1..=4 => Gender::Male,
                _ => Gender::Female,
            };
            p.verified = verified;
            // Labeled users are always valid training material.
            let low_followers = i >= labeled && rng.random_bool(0.04);
            p.follower_count = if low_followers {
                rng.random_range(0..10)
            } else {
                rng.random_range(10..5000)
            };
            p.birth_date = match rng.random_range(0..20) {
                0..=4 => None,
                5 => NaiveDate::from_ymd_opt(1970, 1, 1),
                _ => {
                    let age_days = rng.random_range(7 * 365..56 * 365);
                    Some(reference - Duration::days(age_days))
                }
            };
            let mut tags: BTreeSet<&str> = BTreeSet::new();
            let n_tags = rng.random_range(0..=6);
            for _ in 0..n_tags {
                tags.insert(FIXTURE_TAGS.choose(rng).expect("tags"));
            }
            if t[4] > 58.0 && rng.random_bool(0.6) {
                tags.insert("睡觉");
            }
            p.tags = tags.into_iter().map(String::from).collect();
            p.location = match rng.random_range(0..20) {
                0..=3 => None,
                4 => Some("海外 美国".to_string()),
                _ => Some(format!(
                    "{} 市区",
                    PROVINCES[rng.random_range(0..PROVINCES.len())]
                )),
            };
            p.schools = (0..schools).map(|s| format!("第{}大学", s + 1)).collect();
            if rng.random_bool(0.6) {
                let len = rng.random_range(1..=70);
                p.introduction = Some(
                    (0..len)
                        .map(|_| *intro_chars.choose(rng).expect("pool"))
                        .collect(),
                );
            }
            SynthUser {
                profile: p,
                traits: BigFive(t),
                ad_posts: low_followers && rng.random_bool(0.5),
            }
        })
        .collect()
}

fn profile_json(p: &UserProfile) -> String {
    let mut v = json!({
        "user_id": p.user_id,
        "verified": p.verified,
        "follower_count": p.follower_count,
        "tags": p.tags,
        "schools": p.schools,
    });
    let obj = v.as_object_mut().expect("object");
    if let Some(d) = p.birth_date {
        obj.insert("birth_date".into(), json!(d.format("%Y-%m-%d").to_string()));
    }
    match p.gender {
        Gender::Male => {
            obj.insert("gender".into(), json!("m"));
        }
        Gender::Female => {
            obj.insert("gender".into(), json!("f"));
        }
        Gender::Unknown => {}
    }
    if let Some(l) = &p.location {
        obj.insert("location".into(), json!(l));
    }
    if let Some(i) = &p.introduction {
        obj.insert("introduction".into(), json!(i));
    }
    serde_json::to_string(&v).expect("json")
}

/// Emoticon preferences tied to traits: [哈哈] to E, [泪] to N, [月亮] to O.
fn emoticon_weights(t: &BigFive) -> Vec<f64> {
    let z = |i: usize| (t.0[i] - 50.0) / 10.0;
    let mut w = vec![4.0, 2.0, 1.5, 1.0, 1.0, 0.6, 1.2, 1.0];
    w[0] *= (0.4 * z(2)).exp();
    w[3] *= (0.5 * z(4)).exp();
    w[4] *= (0.5 * z(0)).exp();
    w
}

/// Builds the bundled fixture.
pub fn fixture(seed: u64) -> Result<Fixture, ModelError> {
    let vocab = fixture_vocabulary(seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let load = loadings(&mut rng, FIXTURE_CATEGORIES.len());
    let users = fixture_users(&mut rng, FIXTURE_USERS, FIXTURE_LABELED);

    let mut posts: Vec<Post> = Vec::new();
    let start = NaiveDate::from_ymd_opt(2016, 1, 1).expect("date");
    for u in &users {
        let z: Vec<f64> = u.traits.0.iter().map(|v| (v - 50.0) / 10.0).collect();
        let cat_weights: Vec<f64> = load
            .iter()
            .map(|row| (0.35 * row.iter().zip(&z).map(|(l, z)| l * z).sum::<f64>()).exp())
            .collect();
        let emo = emoticon_weights(&u.traits);
        let n_posts = rng.random_range(12..=24);
        for j in 0..n_posts {
            let roll = rng.random_range(0..100);
            let text = if u.ad_posts && j % 3 == 0 {
                format!(
                    "全场五折 http://shop.taobao.com/item{}",
                    rng.random_range(0..999)
                )
            } else if roll == 0 {
                "抱歉，此微博已被作者删除".to_string()
            } else if roll == 1 {
                format!("淘宝特价{}", post_text(&mut rng, &vocab, &cat_weights, 10))
            } else {
                let len = rng.random_range(20..60);
                let body = post_text(&mut rng, &vocab, &cat_weights, len);
                decorate(&mut rng, body, &emo)
            };
            let day = start + Duration::days(rng.random_range(0..180));
            posts.push(Post {
                user_id: u.profile.user_id.clone(),
                text,
                is_repost: rng.random_bool(0.2),
                created_at: Some(format!(
                    "{}T{:02}:{:02}:00",
                    day,
                    rng.random_range(0..24),
                    rng.random_range(0..60)
                )),
            });
        }
    }

    let noise = Normal::new(0.0, 3.0).expect("normal");
    let labels: Vec<(String, BigFive)> = users[..FIXTURE_LABELED]
        .iter()
        .map(|u| {
            let mut s = u.traits;
            s.0.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
            (u.profile.user_id.clone(), s)
        })
        .collect();
    // Fit on the labels as written, so `fit` on the files reproduces the model.
    let labels_csv = scores_to_csv(&labels);
    let labels = crate::model::scores_from_csv(&labels_csv).expect("own CSV parses");

    let model = fixture_model(&vocab, &posts, &labels)?;

    let mut profiles_jsonl = String::new();
    for u in &users {
        profiles_jsonl.push_str(&profile_json(&u.profile));
        profiles_jsonl.push('\n');
    }
    let mut posts_jsonl = String::new();
    for p in &posts {
        let v = json!({
            "user_id": p.user_id,
            "text": p.text,
            "is_repost": p.is_repost,
            "created_at": p.created_at,
        });
        posts_jsonl.push_str(&serde_json::to_string(&v).expect("json"));
        posts_jsonl.push('\n');
    }
    let cleaner = CleanerConfig::default();
    let list = |title: &str, items: &[String]| {
        let mut s = format!("# {title}\n");
        for i in items {
            s.push_str(i);
            s.push('\n');
        }
        s
    };
    Ok(Fixture {
        lexicon_dic: vocab.lexicon.to_dic(),
        word_list: word_list_text(&vocab),
        profiles_jsonl,
        posts_jsonl,
        labels_csv,
        model_json: model.to_json(),
        spam_keywords: list(
            "spam keywords, matched case-insensitively",
            &cleaner.spam_keywords,
        ),
        templates: list("system notices", &cleaner.system_templates),
    })
}

/// Fits the fixture model on the labeled users' posts, run through the same
/// clean/segment/featurize chain as the pipeline.
fn fixture_model(
    vocab: &Vocabulary,
    posts: &[Post],
    labels: &[(String, BigFive)],
) -> Result<MappingModel, ModelError> {
    let labeled: BTreeSet<&str> = labels.iter().map(|(id, _)| id.as_str()).collect();
    let train_posts: Vec<Post> = posts
        .iter()
        .filter(|p| labeled.contains(p.user_id.as_str()))
        .cloned()
        .collect();
    let (cleaned, _) = clean_corpus(&train_posts, &CleanerConfig::default());
    let mut tokens: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    for (user, r) in cleaned {
        tokens
            .entry(user)
            .or_default()
            .push(segment(&r.clean_text, &vocab.word_list));
    }
    let matcher = CompiledMatcher::compile(&vocab.lexicon);
    let features = featurize(&tokens, &matcher);
    // Round-trip through the CSV form so the model matches what `fit` on the
    // written features file would produce.
    let (names, features) = crate::lexicon::features_from_csv(&features_to_csv(
        &vocab.lexicon.category_names(),
        &features,
    ))
    .expect("own CSV parses");
    fit(
        &names,
        &features,
        labels,
        crate::model::DEFAULT_RIDGE_LAMBDA,
    )
}

/// Planted effects for the analysis checks.
pub const PLANTED_TAG: &str = "Sleep";
pub const PLANTED_EMOTICON: &str = "[月亮]";
pub const PLANTED_VERIFIED_C_OFFSET: f64 = 5.0;
pub const PLANTED_SCHOOL_C_SLOPE: f64 = 3.0;
pub const PLANTED_EMOTICON_RATIO: f64 = 3.0;

const PLANTED_OTHER_TAGS: [&str; 12] = [
    "Music",
    "Travel",
    "Food",
    "Movies",
    "Reading",
    "Sports",
    "Games",
    "Photography",
    "Fashion",
    "Pets",
    "Tech",
    "Study",
];
const PLANTED_OTHER_EMOTICONS: [&str; 7] =
    ["[哈哈]", "[心]", "[doge]", "[泪]", "[怒]", "[赞]", "[思考]"];

pub struct PlantedAnalytics {
    pub users: Vec<ScoredUser>,
    pub emoticon_usage: BTreeMap<String, BTreeMap<String, u64>>,
}

/// Value at the upper quartile of `v` (the ⌈0.75·n⌉-th smallest).
fn upper_quartile(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[(s.len() * 3).div_ceil(4).saturating_sub(1)]
}

/// Users with planted associations:
/// - tag [`PLANTED_TAG`] on 80% of top-quartile-N users and 5% of the rest;
/// - C raised by [`PLANTED_VERIFIED_C_OFFSET`] for verified users;
/// - C rising by [`PLANTED_SCHOOL_C_SLOPE`] per listed school (0–4);
/// - [`PLANTED_EMOTICON`] used [`PLANTED_EMOTICON_RATIO`]× as often by
///   top-quartile-O users.
pub fn planted_analytics(n: usize, seed: u64) -> PlantedAnalytics {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = standard_normal();
    let mut raw: Vec<(bool, usize, [f64; 5])> = (0..n)
        .map(|_| {
            let verified = rng.random_bool(0.3);
            let schools = rng.random_range(0..=4usize);
            let mut t = [0.0; 5];
            t.iter_mut()
                .for_each(|v| *v = 50.0 + 10.0 * z.sample(&mut rng));
            t[1] += PLANTED_VERIFIED_C_OFFSET * f64::from(u8::from(verified))
                + PLANTED_SCHOOL_C_SLOPE * schools as f64;
            (verified, schools, t)
        })
        .collect();
    let n_cut = upper_quartile(&raw.iter().map(|r| r.2[4]).collect::<Vec<_>>());
    let o_cut = upper_quartile(&raw.iter().map(|r| r.2[0]).collect::<Vec<_>>());

    let mut users = Vec::with_capacity(n);
    let mut emoticon_usage = BTreeMap::new();
    for (i, (verified, schools, t)) in raw.drain(..).enumerate() {
        let id = format!("p{i:05}");
        let mut p = UserProfile::new(&id);
        p.verified = verified;
        p.schools = (0..schools).map(|s| format!("school{s}")).collect();
        p.gender = if rng.random_bool(0.5) {
            Gender::Male
        } else {
            Gender::Female
        };
        let mut tags: Vec<String> = PLANTED_OTHER_TAGS
            .iter()
            .filter(|_| rng.random_bool(0.3))
            .map(|t| t.to_string())
            .collect();
        let sleep_p = if t[4] > n_cut { 0.8 } else { 0.05 };
        if rng.random_bool(sleep_p) {
            tags.push(PLANTED_TAG.to_string());
        }
        p.tags = tags;

        let boost = if t[0] > o_cut {
            PLANTED_EMOTICON_RATIO
        } else {
            1.0
        };
        let mut weights = vec![1.0; PLANTED_OTHER_EMOTICONS.len()];
        weights.push(boost);
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for _ in 0..20 {
            let k = weighted_index(&mut rng, &weights);
            let name = PLANTED_OTHER_EMOTICONS
                .get(k)
                .copied()
                .unwrap_or(PLANTED_EMOTICON);
            *counts.entry(name.to_string()).or_default() += 1;
        }
        emoticon_usage.insert(id, counts);
        users.push(ScoredUser {
            profile: p,
            scores: BigFive(t),
        });
    }
    PlantedAnalytics {
        users,
        emoticon_usage,
    }
}

/// `n` posts of about `chars` characters each over the fixture vocabulary,
/// spread across `n / 50` users, with the usual microblog decorations.
pub fn bulk_posts(vocab: &Vocabulary, n: usize, chars: usize, seed: u64) -> Vec<Post> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = vec![1.0; vocab.category_words.len()];
    let emo = vec![1.0; FIXTURE_EMOTICONS.len()];
    let users = (n / 50).max(1);
    (0..n)
        .map(|i| {
            let body = post_text(&mut rng, vocab, &weights, chars.saturating_sub(6));
            Post {
                user_id: format!("b{:05}", i % users),
                text: decorate(&mut rng, body, &emo),
                is_repost: false,
                created_at: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vocabulary_shape() {
        let v = fixture_vocabulary(1);
        assert_eq!(v.lexicon.categories().len(), 30);
        let n = v.lexicon.entries().len();
        assert!((480..=520).contains(&n), "{n}");
        let m = CompiledMatcher::compile(&v.lexicon);
        for (c, words) in v.category_words.iter().enumerate() {
            for w in words {
                assert!(m.lookup(w).contains(c), "{w} misses category {c}");
                assert!(v.word_list.contains(w));
            }
        }
        for w in &v.filler {
            assert!(m.lookup(w).is_empty(), "filler {w} hits a category");
        }
    }

    #[test]
    fn fixture_is_deterministic() {
        let a = fixture(7).unwrap();
        let b = fixture(7).unwrap();
        assert_eq!(a.posts_jsonl, b.posts_jsonl);
        assert_eq!(a.model_json, b.model_json);
        assert_eq!(a.profiles_jsonl.lines().count(), FIXTURE_USERS);
        assert_eq!(a.labels_csv.lines().count(), FIXTURE_LABELED + 1);
    }

    #[test]
    fn planted_shapes() {
        let p = planted_analytics(400, 3);
        assert_eq!(p.users.len(), 400);
        let total: u64 = p.emoticon_usage.values().flat_map(|m| m.values()).sum();
        assert_eq!(total, 400 * 20);
    }

    #[test]
    fn bulk_post_length() {
        let v = fixture_vocabulary(1);
        let posts = bulk_posts(&v, 200, 40, 9);
        let mean = posts.iter().map(|p| p.text.chars().count()).sum::<usize>() as f64 / 200.0;
        assert!((30.0..60.0).contains(&mean), "{mean}");
    }
}
