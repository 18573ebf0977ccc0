//! LIWC-style category dictionaries.
//!
//! The dictionary file has a header block between two `%` lines declaring
//! `id<TAB>name` categories, followed by `pattern[*]<TAB>id[<TAB>id…]` entries.
//! A trailing `*` makes the entry a prefix wildcard. Any whitespace is
//! accepted as the field separator; `#` starts a comment line.
//!
//! [`CompiledMatcher`] answers "which categories does this token hit" as the
//! union over every entry that fires: exact entries on equality, wildcard
//! entries on prefix. Both kinds live in one character trie so a lookup is a
//! single walk down the token.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

/// Upper bound on declared categories (size of [`CategorySet`]).
pub const MAX_CATEGORIES: usize = 256;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cannot read dictionary {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("feature file: {0}")]
    Features(String),
}

fn parse_err(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Parse {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub id: u32,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub pattern: String,
    pub wildcard: bool,
    /// Declared category ids, in file order.
    pub category_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    categories: Vec<Category>,
    entries: Vec<Entry>,
}

/// Accumulates categories and entries while enforcing the invariants.
#[derive(Default)]
struct Builder {
    categories: Vec<Category>,
    entries: Vec<Entry>,
    seen: HashSet<(String, bool)>,
}

impl Builder {
    fn declare(&mut self, cat: Category, line: usize) -> Result<(), LexiconError> {
        if self.categories.iter().any(|c| c.id == cat.id) {
            return Err(parse_err(line, format!("duplicate category id {}", cat.id)));
        }
        if self.categories.iter().any(|c| c.name == cat.name) {
            return Err(parse_err(
                line,
                format!("duplicate category name {}", cat.name),
            ));
        }
        if self.categories.len() == MAX_CATEGORIES {
            return Err(parse_err(
                line,
                format!("more than {MAX_CATEGORIES} categories"),
            ));
        }
        self.categories.push(cat);
        Ok(())
    }

    fn add_entry(&mut self, entry: Entry, line: usize) -> Result<(), LexiconError> {
        if entry.pattern.is_empty() {
            return Err(parse_err(line, "empty pattern"));
        }
        if entry.category_ids.is_empty() {
            return Err(parse_err(
                line,
                format!("entry {:?} has no categories", entry.pattern),
            ));
        }
        for id in &entry.category_ids {
            if !self.categories.iter().any(|c| c.id == *id) {
                return Err(parse_err(
                    line,
                    format!(
                        "entry {:?} references undeclared category {id}",
                        entry.pattern
                    ),
                ));
            }
        }
        if !self.seen.insert((entry.pattern.clone(), entry.wildcard)) {
            return Err(parse_err(
                line,
                format!("duplicate entry {:?}", entry.pattern),
            ));
        }
        self.entries.push(entry);
        Ok(())
    }

    fn finish(self) -> Lexicon {
        Lexicon {
            categories: self.categories,
            entries: self.entries,
        }
    }
}

impl Lexicon {
    /// Builds a lexicon, checking every invariant the parser checks.
    pub fn new(categories: Vec<Category>, entries: Vec<Entry>) -> Result<Self, LexiconError> {
        let mut b = Builder::default();
        for c in categories {
            b.declare(c, 0)?;
        }
        for e in entries {
            b.add_entry(e, 0)?;
        }
        Ok(b.finish())
    }

    pub fn parse(text: &str) -> Result<Self, LexiconError> {
        #[derive(PartialEq)]
        enum State {
            Start,
            Header,
            Body,
        }
        let mut b = Builder::default();
        let mut state = State::Start;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_start_matches('\u{feff}').trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "%" {
                state = match state {
                    State::Start => State::Header,
                    State::Header => State::Body,
                    State::Body => return Err(parse_err(line_no, "unexpected '%' after header")),
                };
                continue;
            }
            let mut fields = line.split_whitespace();
            let first = fields.next().unwrap();
            match state {
                State::Start => return Err(parse_err(line_no, "expected '%' header start")),
                State::Header => {
                    let id: u32 = first
                        .parse()
                        .map_err(|_| parse_err(line_no, format!("bad category id {first:?}")))?;
                    let name = fields.collect::<Vec<_>>().join(" ");
                    if name.is_empty() {
                        return Err(parse_err(line_no, format!("category {id} has no name")));
                    }
                    b.declare(Category { id, name }, line_no)?;
                }
                State::Body => {
                    let (pattern, wildcard) = match first.strip_suffix('*') {
                        Some(p) => (p.to_string(), true),
                        None => (first.to_string(), false),
                    };
                    let mut category_ids = Vec::new();
                    for f in fields {
                        let id: u32 = f
                            .parse()
                            .map_err(|_| parse_err(line_no, format!("bad category id {f:?}")))?;
                        if !category_ids.contains(&id) {
                            category_ids.push(id);
                        }
                    }
                    b.add_entry(
                        Entry {
                            pattern,
                            wildcard,
                            category_ids,
                        },
                        line_no,
                    )?;
                }
            }
        }
        if state != State::Body {
            return Err(parse_err(
                text.lines().count(),
                "unterminated category header",
            ));
        }
        Ok(b.finish())
    }

    pub fn load(path: &Path) -> Result<Self, LexiconError> {
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Serializes back to the dictionary format.
    pub fn to_dic(&self) -> String {
        let mut out = String::from("%\n");
        for c in &self.categories {
            let _ = writeln!(out, "{}\t{}", c.id, c.name);
        }
        out.push_str("%\n");
        for e in &self.entries {
            out.push_str(&e.pattern);
            if e.wildcard {
                out.push('*');
            }
            for id in &e.category_ids {
                let _ = write!(out, "\t{id}");
            }
            out.push('\n');
        }
        out
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn category_names(&self) -> Vec<String> {
        self.categories.iter().map(|c| c.name.clone()).collect()
    }

    /// Position of a category id in declaration order.
    pub fn index_of(&self, id: u32) -> Option<usize> {
        self.categories.iter().position(|c| c.id == id)
    }
}

/// Set of category indices (declaration order), at most [`MAX_CATEGORIES`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct CategorySet([u64; MAX_CATEGORIES / 64]);

impl CategorySet {
    pub fn insert(&mut self, idx: usize) {
        self.0[idx / 64] |= 1 << (idx % 64);
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0[idx / 64] & (1 << (idx % 64)) != 0
    }

    pub fn union_with(&mut self, other: &CategorySet) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

#[derive(Debug, Default, Clone)]
struct Node {
    /// Categories of an exact entry ending here.
    exact: CategorySet,
    /// Categories of a wildcard entry whose pattern ends here.
    prefix: CategorySet,
}

/// Immutable trie over all entry patterns. Children are kept in one map keyed
/// by (parent, char).
#[derive(Debug, Clone)]
pub struct CompiledMatcher {
    nodes: Vec<Node>,
    edges: HashMap<(u32, char), u32>,
    category_names: Vec<String>,
}

impl CompiledMatcher {
    pub fn compile(lexicon: &Lexicon) -> Self {
        let mut nodes = vec![Node::default()];
        let mut edges: HashMap<(u32, char), u32> = HashMap::new();
        for entry in lexicon.entries() {
            let mut cur = 0u32;
            for c in entry.pattern.chars() {
                let next = nodes.len() as u32;
                cur = *edges.entry((cur, c)).or_insert_with(|| {
                    nodes.push(Node::default());
                    next
                });
            }
            let mut set = CategorySet::default();
            for id in &entry.category_ids {
                set.insert(lexicon.index_of(*id).expect("validated lexicon"));
            }
            let node = &mut nodes[cur as usize];
            if entry.wildcard {
                node.prefix.union_with(&set);
            } else {
                node.exact.union_with(&set);
            }
        }
        CompiledMatcher {
            nodes,
            edges,
            category_names: lexicon.category_names(),
        }
    }

    /// Union of the category sets of every entry that fires on `token`.
    pub fn lookup(&self, token: &str) -> CategorySet {
        let mut hits = self.nodes[0].prefix;
        let mut cur = 0u32;
        for c in token.chars() {
            match self.edges.get(&(cur, c)) {
                Some(&next) => {
                    cur = next;
                    hits.union_with(&self.nodes[cur as usize].prefix);
                }
                None => return hits,
            }
        }
        if !token.is_empty() {
            hits.union_with(&self.nodes[cur as usize].exact);
        }
        hits
    }

    pub fn category_names(&self) -> &[String] {
        &self.category_names
    }

    pub fn num_categories(&self) -> usize {
        self.category_names.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureVector {
    pub user_id: String,
    /// Percent of the user's tokens hitting each category, in category order.
    pub freqs: Vec<f64>,
    pub token_count: u64,
}

impl FeatureVector {
    /// No tokens: every frequency is zero and the vector carries no signal.
    pub fn is_degenerate(&self) -> bool {
        self.token_count == 0
    }
}

/// Category hit counts over a stream of tokens.
pub fn count_tokens<'a, I>(tokens: I, matcher: &CompiledMatcher) -> (Vec<u64>, u64)
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts = vec![0u64; matcher.num_categories()];
    let mut total = 0u64;
    for token in tokens {
        total += 1;
        for idx in matcher.lookup(token).iter() {
            counts[idx] += 1;
        }
    }
    (counts, total)
}

pub fn to_feature_vector(user_id: &str, counts: &[u64], total: u64) -> FeatureVector {
    let freqs = if total == 0 {
        vec![0.0; counts.len()]
    } else {
        counts
            .iter()
            .map(|&c| 100.0 * c as f64 / total as f64)
            .collect()
    };
    FeatureVector {
        user_id: user_id.to_string(),
        freqs,
        token_count: total,
    }
}

/// Pools each user's posts and converts hit counts to percentages. Output is
/// ordered by user id.
pub fn featurize(
    tokens_by_user: &BTreeMap<String, Vec<Vec<String>>>,
    matcher: &CompiledMatcher,
) -> Vec<FeatureVector> {
    tokens_by_user
        .par_iter()
        .map(|(user, posts)| {
            let (counts, total) = count_tokens(
                posts.iter().flat_map(|p| p.iter().map(String::as_str)),
                matcher,
            );
            to_feature_vector(user, &counts, total)
        })
        .collect()
}

/// CSV with header `user_id,token_count,<names…>` and six-decimal frequencies.
pub fn features_to_csv(names: &[String], features: &[FeatureVector]) -> String {
    let mut out = String::from("user_id,token_count");
    for n in names {
        out.push(',');
        out.push_str(&crate::table::csv_field(n));
    }
    out.push('\n');
    for f in features {
        out.push_str(&crate::table::csv_field(&f.user_id));
        let _ = write!(out, ",{}", f.token_count);
        for v in &f.freqs {
            let _ = write!(out, ",{v:.6}");
        }
        out.push('\n');
    }
    out
}

/// Parses a feature CSV, returning category names and vectors.
pub fn features_from_csv(text: &str) -> Result<(Vec<String>, Vec<FeatureVector>), LexiconError> {
    let bad = |m: String| LexiconError::Features(m);
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.len() < 2 || &headers[0] != "user_id" || &headers[1] != "token_count" {
        return Err(bad("header must start with user_id,token_count".into()));
    }
    let names: Vec<String> = headers.iter().skip(2).map(str::to_string).collect();
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let row = i + 2;
        let token_count: u64 = rec[1]
            .parse()
            .map_err(|_| bad(format!("row {row}: bad token_count {:?}", &rec[1])))?;
        let freqs = rec
            .iter()
            .skip(2)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| bad(format!("row {row}: bad frequency {v:?}")))
            })
            .collect::<Result<Vec<f64>, _>>()?;
        out.push(FeatureVector {
            user_id: rec[0].to_string(),
            freqs,
            token_count,
        });
    }
    Ok((names, out))
}
