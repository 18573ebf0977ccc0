//! Microblog text cleaning.
//!
//! Strips URLs, @mentions, paired `#…#` hashtags, reply/repost marker words and
//! check-in (geo) markup, drops system notices and spam, and pulls emoticons
//! (`[name]` brackets and Unicode emoji) out into their own list before they
//! are removed from the text.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Post;

/// Longest bracket emoticon name, in characters.
pub const MAX_EMOTICON_NAME: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleanResult {
    pub clean_text: String,
    pub emoticons: Vec<String>,
    pub dropped: bool,
}

impl CleanResult {
    fn dropped() -> Self {
        CleanResult {
            clean_text: String::new(),
            emoticons: Vec::new(),
            dropped: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CleanerConfig {
    /// Case-insensitive substrings; a hit drops the post.
    pub spam_keywords: Vec<String>,
    /// System-generated notices; a post containing one is dropped.
    pub system_templates: Vec<String>,
    /// Reply/repost marker words removed wherever they occur.
    pub marker_words: Vec<String>,
}

impl Default for CleanerConfig {
    fn default() -> Self {
        CleanerConfig {
            spam_keywords: default_spam_keywords(),
            system_templates: default_system_templates(),
            marker_words: default_marker_words(),
        }
    }
}

impl CleanerConfig {
    pub fn with_spam_keywords(spam_keywords: Vec<String>) -> Self {
        CleanerConfig {
            spam_keywords,
            ..Default::default()
        }
    }
}

pub fn default_spam_keywords() -> Vec<String> {
    vec!["淘宝".into(), "taobao".into()]
}

pub fn default_system_templates() -> Vec<String> {
    vec![
        "抱歉，此微博已被作者删除".into(),
        "此微博已被删除".into(),
        "该微博已被删除".into(),
        "Sorry this microblog had been deleted".into(),
    ]
}

pub fn default_marker_words() -> Vec<String> {
    vec![
        "转发微博".into(),
        "轉發微博".into(),
        "回复".into(),
        "//".into(),
    ]
}

/// Reads a one-entry-per-line list; blank lines and lines starting with `#`
/// are skipped.
pub fn read_list_file(path: &Path) -> std::io::Result<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_list(&text))
}

pub fn parse_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.trim_end_matches('\r'))
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.trim().to_string())
        .collect()
}

fn contains_ci(haystack_lower: &str, needles: &[String]) -> bool {
    needles
        .iter()
        .any(|n| !n.is_empty() && haystack_lower.contains(&n.to_lowercase()))
}

/// Emoji base code points. Variation selectors, skin-tone modifiers and the
/// zero-width joiner are handled separately as attachments.
pub fn is_emoji(c: char) -> bool {
    matches!(c as u32,
        0x1F300..=0x1F3FA
        | 0x1F400..=0x1F64F
        | 0x1F680..=0x1F6FF
        | 0x1F7E0..=0x1F7EB
        | 0x1F90C..=0x1F9FF
        | 0x1FA70..=0x1FAFF
        | 0x2600..=0x27BF
        | 0x2B50 | 0x2B55 | 0x2B1B | 0x2B1C
        | 0x1F1E6..=0x1F1FF)
}

fn is_emoji_attachment(c: char) -> bool {
    matches!(c as u32, 0xFE0F | 0xFE0E | 0x1F3FB..=0x1F3FF)
}

const ZWJ: char = '\u{200D}';

fn is_mention_char(c: char) -> bool {
    c == '-' || c == '_' || !(c.is_whitespace() || crate::segmenter::is_separator(c))
}

fn is_bracket_name_char(c: char) -> bool {
    c != '[' && c != ']' && !c.is_whitespace()
}

/// Removes `http://` / `https://` URLs (any case) up to the next whitespace.
fn strip_urls(text: &str) -> String {
    let lower = text.to_ascii_lowercase();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < text.len() {
        let rest = &lower[i..];
        if rest.starts_with("http://") || rest.starts_with("https://") {
            let end = text[i..]
                .find(char::is_whitespace)
                .map_or(text.len(), |e| i + e);
            out.push(' ');
            i = end;
        } else {
            let c = text[i..].chars().next().unwrap();
            out.push(c);
            i += c.len_utf8();
        }
    }
    out
}

/// Check-in markup: "我在这里:" / "我在:" prefixes that precede a location link.
fn strip_geo(text: &str) -> String {
    let mut out = text.to_string();
    for marker in ["我在这里:", "我在这里：", "我在:", "我在："] {
        let mut search = 0;
        while let Some(off) = out[search..].find(marker) {
            let at = search + off;
            let after = &out[at + marker.len()..];
            let before_link = after.trim_start();
            let lower = before_link
                .get(..8)
                .unwrap_or(before_link)
                .to_ascii_lowercase();
            if marker.starts_with("我在这里")
                || lower.starts_with("http://")
                || lower.starts_with("https://")
            {
                out.replace_range(at..at + marker.len(), " ");
                search = at + 1;
            } else {
                search = at + marker.len();
            }
        }
    }
    out
}

/// Pulls `[name]` emoticons and emoji out of `text`, appending them to
/// `emoticons` in order of appearance.
fn extract_emoticons(text: &str, emoticons: &mut Vec<String>) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::with_capacity(text.len());
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '[' {
            let mut j = i + 1;
            while j < chars.len() && j - i <= MAX_EMOTICON_NAME && is_bracket_name_char(chars[j]) {
                j += 1;
            }
            if j < chars.len() && chars[j] == ']' && j > i + 1 && j - i - 1 <= MAX_EMOTICON_NAME {
                emoticons.push(chars[i..=j].iter().collect());
                out.push(' ');
                i = j + 1;
                continue;
            }
        } else if is_emoji(c) {
            let mut token = String::from(c);
            let mut j = i + 1;
            while j < chars.len() && is_emoji_attachment(chars[j]) {
                token.push(chars[j]);
                j += 1;
            }
            emoticons.push(token);
            out.push(' ');
            i = j;
            continue;
        } else if c == ZWJ || (is_emoji_attachment(c) && c as u32 >= 0x1F3FB) {
            // Stray joiners and modifiers left over from emoji sequences.
            i += 1;
            continue;
        }
        out.push(c);
        i += 1;
    }
    out
}

fn strip_mentions(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '@' && chars.peek().is_some_and(|&n| is_mention_char(n)) {
            while chars.peek().is_some_and(|&n| is_mention_char(n)) {
                chars.next();
            }
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out
}

/// Removes each `#…#` pair with its content; an unpaired `#` stays.
fn strip_hashtags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('#') {
        let after = &rest[open + 1..];
        match after.find('#') {
            Some(close) => {
                out.push_str(&rest[..open]);
                out.push(' ');
                rest = &after[close + 1..];
            }
            None => break,
        }
    }
    out.push_str(rest);
    out
}

fn strip_markers(text: &str, markers: &[String]) -> String {
    let mut out = text.to_string();
    for m in markers.iter().filter(|m| !m.is_empty()) {
        if out.contains(m.as_str()) {
            out = out.replace(m.as_str(), " ");
        }
    }
    out
}

fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn strip_once(text: &str, config: &CleanerConfig, emoticons: &mut Vec<String>) -> String {
    let t = strip_geo(text);
    let t = strip_urls(&t);
    let t = extract_emoticons(&t, emoticons);
    let t = strip_mentions(&t);
    let t = strip_hashtags(&t);
    let t = strip_markers(&t, &config.marker_words);
    collapse_whitespace(&t)
}

/// Cleans one post. Spam and system-template checks run on the raw text before
/// anything is stripped.
pub fn clean(text: &str, config: &CleanerConfig) -> CleanResult {
    let lower = text.to_lowercase();
    if contains_ci(&lower, &config.spam_keywords) || contains_ci(&lower, &config.system_templates) {
        return CleanResult::dropped();
    }
    let mut emoticons = Vec::new();
    let mut current = strip_once(text, config, &mut emoticons);
    // Removing one construct can expose another ("[a[x]]" -> "[a]"); repeat to
    // a fixed point so that cleaning is idempotent.
    for _ in 0..8 {
        let next = strip_once(&current, config, &mut emoticons);
        if next == current {
            break;
        }
        current = next;
    }
    CleanResult {
        clean_text: current,
        emoticons,
        dropped: false,
    }
}

/// Cleans every post, preserving input order. Dropped posts are counted and
/// left out of the result.
pub fn clean_corpus(posts: &[Post], config: &CleanerConfig) -> (Vec<(String, CleanResult)>, usize) {
    let results: Vec<CleanResult> = posts.par_iter().map(|p| clean(&p.text, config)).collect();
    let mut kept = Vec::with_capacity(results.len());
    let mut dropped = 0;
    for (post, result) in posts.iter().zip(results) {
        if result.dropped {
            dropped += 1;
        } else {
            kept.push((post.user_id.clone(), result));
        }
    }
    (kept, dropped)
}
