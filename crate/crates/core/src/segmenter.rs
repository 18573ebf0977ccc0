//! Forward-maximum-matching word segmentation for cleaned Chinese text.
//!
//! Text is split into runs: separators (whitespace, Unicode punctuation and
//! symbols) are dropped, ASCII alphanumeric runs become single tokens, and
//! everything else is segmented greedily against a word list, falling back to
//! one character per token.

use std::collections::HashSet;
use std::path::Path;

use unicode_general_category::{get_general_category, GeneralCategory};

/// Longest accepted word-list entry, in characters.
pub const MAX_WORD_CHARS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum WordListError {
    #[error("cannot read word list {path}: {source}")]
    Io {
        path: std::path::PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("word list line {line}: {word:?} is longer than {MAX_WORD_CHARS} characters")]
    TooLong { line: usize, word: String },
}

/// True for whitespace and for Unicode punctuation (P*) and symbol (S*)
/// characters.
pub fn is_separator(c: char) -> bool {
    if c.is_whitespace() {
        return true;
    }
    if c.is_ascii() {
        return c.is_ascii_punctuation();
    }
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

#[derive(Debug, Clone, Default)]
pub struct WordList {
    words: HashSet<String>,
    max_len: usize,
}

impl WordList {
    pub fn new<I, S>(words: I) -> Result<Self, WordListError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = WordList::default();
        for (i, w) in words.into_iter().enumerate() {
            list.insert(w.into(), i + 1)?;
        }
        Ok(list)
    }

    fn insert(&mut self, word: String, line: usize) -> Result<(), WordListError> {
        let len = word.chars().count();
        if len == 0 {
            return Ok(());
        }
        if len > MAX_WORD_CHARS {
            return Err(WordListError::TooLong { line, word });
        }
        self.max_len = self.max_len.max(len);
        self.words.insert(word);
        Ok(())
    }

    /// One word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self, WordListError> {
        let mut list = WordList::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            list.insert(line.to_string(), i + 1)?;
        }
        Ok(list)
    }

    pub fn load(path: &Path) -> Result<Self, WordListError> {
        let text = std::fs::read_to_string(path).map_err(|source| WordListError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum RunKind {
    Separator,
    Ascii,
    Other,
}

fn kind(c: char) -> RunKind {
    if is_separator(c) {
        RunKind::Separator
    } else if c.is_ascii_alphanumeric() {
        RunKind::Ascii
    } else {
        RunKind::Other
    }
}

/// Greedy longest-match over one run of non-ASCII word characters.
fn segment_run<'a>(run: &'a str, words: &WordList, out: &mut Vec<&'a str>) {
    // Byte offsets of every char boundary in the run, including the end.
    let bounds: Vec<usize> = run
        .char_indices()
        .map(|(i, _)| i)
        .chain(std::iter::once(run.len()))
        .collect();
    let n = bounds.len() - 1;
    let mut pos = 0;
    while pos < n {
        let longest = words.max_len.min(n - pos);
        let mut take = 1;
        for len in (2..=longest).rev() {
            if words.contains(&run[bounds[pos]..bounds[pos + len]]) {
                take = len;
                break;
            }
        }
        out.push(&run[bounds[pos]..bounds[pos + take]]);
        pos += take;
    }
}

/// Token slices borrowed from `text`.
pub fn segment_str<'a>(text: &'a str, words: &WordList) -> Vec<&'a str> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        let k = kind(c);
        let mut end = start;
        while let Some(&(i, c)) = chars.peek() {
            if kind(c) != k {
                break;
            }
            end = i + c.len_utf8();
            chars.next();
        }
        match k {
            RunKind::Separator => {}
            RunKind::Ascii => tokens.push(&text[start..end]),
            RunKind::Other => segment_run(&text[start..end], words, &mut tokens),
        }
    }
    tokens
}

pub fn segment(text: &str, words: &WordList) -> Vec<String> {
    segment_str(text, words)
        .into_iter()
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wl(words: &[&str]) -> WordList {
        WordList::new(words.iter().copied()).unwrap()
    }

    /// Straightforward reference: at each char index try every word from the
    /// longest possible length down, over the whole separator-free string.
    fn reference_fmm(text: &str, words: &[&str]) -> Vec<String> {
        let mut out = Vec::new();
        let mut run: Vec<char> = Vec::new();
        let mut ascii = String::new();
        let flush = |run: &mut Vec<char>, out: &mut Vec<String>| {
            let mut i = 0;
            while i < run.len() {
                let mut best = 1;
                for w in words {
                    let wc: Vec<char> = w.chars().collect();
                    if wc.len() > best && run[i..].starts_with(&wc) {
                        best = wc.len();
                    }
                }
                out.push(run[i..i + best].iter().collect());
                i += best;
            }
            run.clear();
        };
        for c in text.chars() {
            if c.is_ascii_alphanumeric() {
                flush(&mut run, &mut out);
                ascii.push(c);
                continue;
            }
            if !ascii.is_empty() {
                out.push(std::mem::take(&mut ascii));
            }
            if is_separator(c) {
                flush(&mut run, &mut out);
            } else {
                run.push(c);
            }
        }
        flush(&mut run, &mut out);
        if !ascii.is_empty() {
            out.push(ascii);
        }
        out
    }

    #[test]
    fn longest_match_examples() {
        assert_eq!(
            segment("今天不错", &wl(&["今天", "不错"])),
            vec!["今天", "不错"]
        );
        assert_eq!(segment("今天不错", &wl(&[])), vec!["今", "天", "不", "错"]);
        assert_eq!(segment("abc今天", &wl(&["今天"])), vec!["abc", "今天"]);
        assert_eq!(
            reference_fmm("abc今天", &["今天"]),
            vec!["abc".to_string(), "今天".to_string()]
        );
    }

    #[test]
    fn greedy_prefers_longest() {
        let words = wl(&["中国", "中国人", "人民"]);
        assert_eq!(segment("中国人民", &words), vec!["中国人", "民"]);
    }

    #[test]
    fn separators_are_dropped() {
        let words = wl(&["今天"]);
        assert_eq!(
            segment("今天，好！ ok2 ¥5 😀", &words),
            vec!["今天", "好", "ok2", "5"]
        );
    }

    #[test]
    fn word_list_limits() {
        assert!(matches!(
            WordList::parse("# c\n好\n一二三四五六七八九\n"),
            Err(WordListError::TooLong { line: 3, .. })
        ));
        let w = WordList::parse("# c\n好\n\n一二三四五六七八\n").unwrap();
        assert_eq!((w.len(), w.max_len()), (2, 8));
    }

    fn arb_text() -> impl Strategy<Value = String> {
        proptest::collection::vec(
            prop_oneof![
                Just('今'),
                Just('天'),
                Just('不'),
                Just('错'),
                Just('好'),
                Just('a'),
                Just('7'),
                Just(' '),
                Just('，'),
                Just('!'),
                Just('é')
            ],
            0..30,
        )
        .prop_map(|v| v.into_iter().collect())
    }

    fn arb_words() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(
            proptest::collection::vec(
                prop_oneof![
                    Just('今'),
                    Just('天'),
                    Just('不'),
                    Just('错'),
                    Just('好'),
                    Just('é')
                ],
                1..5,
            )
            .prop_map(|v| v.into_iter().collect::<String>()),
            0..8,
        )
    }

    proptest! {
        #[test]
        fn matches_reference(text in arb_text(), words in arb_words()) {
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            prop_assert_eq!(segment(&text, &wl(&refs)), reference_fmm(&text, &refs));
        }

        #[test]
        fn lossless_modulo_separators(text in arb_text(), words in arb_words()) {
            let refs: Vec<&str> = words.iter().map(String::as_str).collect();
            let joined: String = segment(&text, &wl(&refs)).concat();
            let stripped: String = text.chars().filter(|&c| !is_separator(c)).collect();
            prop_assert_eq!(joined, stripped);
        }

        #[test]
        fn adding_a_word_never_shortens_first_token(
            text in arb_text(), words in arb_words(), extra in arb_words()
        ) {
            let base: Vec<&str> = words.iter().map(String::as_str).collect();
            let mut more = base.clone();
            more.extend(extra.iter().map(String::as_str));
            let before = segment(&text, &wl(&base));
            let after = segment(&text, &wl(&more));
            if let (Some(b), Some(a)) = (before.first(), after.first()) {
                prop_assert!(a.chars().count() >= b.chars().count());
            }
        }
    }
}
