//! Intermediate file formats and output plumbing.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use portrait_core::lexicon::FeatureVector;
use portrait_core::table::{Cell, Table};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Failure;

/// One line of a `clean` output file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CleanedPost {
    pub user_id: String,
    pub clean_text: String,
    pub emoticons: Vec<String>,
}

/// One line of a `segment` output file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TokenizedPost {
    pub user_id: String,
    pub tokens: Vec<String>,
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

/// Reads a JSONL file strictly: any bad line fails the command.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, Failure> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| Failure::input(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Emoticon counts per user from a cleaned-posts file.
pub fn emoticon_usage(posts: &[CleanedPost]) -> BTreeMap<String, BTreeMap<String, u64>> {
    let mut usage: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for p in posts {
        for e in &p.emoticons {
            *usage
                .entry(p.user_id.clone())
                .or_default()
                .entry(e.clone())
                .or_default() += 1;
        }
    }
    usage
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Output file [default: stdout]
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Table rendering
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

impl Output {
    pub fn table(&self, t: &Table) -> Result<(), Failure> {
        let text = match self.format {
            Format::Csv => t.to_csv(),
            Format::Json => t.to_json(),
        };
        write_out(self.out.as_deref(), &text)
    }
}

pub fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::input(format!("cannot write stdout: {e}")))
        }
    }
}

pub fn features_table(names: &[String], features: &[FeatureVector]) -> Table {
    let mut t = Table::new(
        ["user_id".to_string(), "token_count".to_string()]
            .into_iter()
            .chain(names.iter().cloned()),
    );
    for f in features {
        let mut row = vec![Cell::from(f.user_id.as_str()), Cell::from(f.token_count)];
        row.extend(f.freqs.iter().map(|&v| Cell::from(v)));
        t.push(row);
    }
    t
}

/// Progress line on stderr.
pub fn log(line: impl AsRef<str>) {
    eprintln!("{}", line.as_ref());
}
