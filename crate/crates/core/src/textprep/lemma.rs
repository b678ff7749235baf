use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const DEFAULT_TABLE: &str = include_str!("../../data/lemmas.tsv");

/// Rules never produce a lemma shorter than this; shorter tokens pass through.
const MIN_LEMMA_CHARS: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuffixRule {
    pub pattern: String,
    pub replacement: String,
}

/// Irregular forms plus ordered suffix rewrite rules.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaTable {
    pub exceptions: HashMap<String, String>,
    pub suffix_rules: Vec<SuffixRule>,
}

#[derive(Debug, Error)]
pub enum LemmaTableError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Copy)]
enum Section {
    None,
    Exceptions,
    Rules,
}

impl LemmaTable {
    pub fn parse(text: &str) -> Result<Self, LemmaTableError> {
        let mut exceptions = HashMap::new();
        let mut suffix_rules = Vec::new();
        let mut section = Section::None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            match trimmed {
                "[exceptions]" => section = Section::Exceptions,
                "[suffix_rules]" => section = Section::Rules,
                _ => {
                    let (left, right) = line.split_once('\t').unwrap_or((line, ""));
                    let (left, right) = (left.trim().to_lowercase(), right.trim().to_lowercase());
                    let err = |reason: &str| LemmaTableError::Syntax {
                        line: i + 1,
                        reason: reason.into(),
                    };
                    match section {
                        Section::None => return Err(err("entry before any section header")),
                        Section::Exceptions => {
                            if left.is_empty() || right.is_empty() {
                                return Err(err("exception needs form and lemma"));
                            }
                            exceptions.insert(left, right);
                        }
                        Section::Rules => {
                            if left.is_empty() {
                                return Err(err("empty suffix pattern"));
                            }
                            suffix_rules.push(SuffixRule {
                                pattern: left,
                                replacement: right,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self {
            exceptions,
            suffix_rules,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LemmaTableError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

impl Default for LemmaTable {
    fn default() -> Self {
        Self::parse(DEFAULT_TABLE).expect("bundled lemma table is valid")
    }
}

/// Exceptions first, then the first applicable suffix rule, else the token itself.
pub fn lemmatize(token: &str, table: &LemmaTable) -> String {
    if let Some(lemma) = table.exceptions.get(token) {
        return lemma.clone();
    }
    for rule in &table.suffix_rules {
        if let Some(stem) = token.strip_suffix(rule.pattern.as_str()) {
            if stem.chars().count() + rule.replacement.chars().count() >= MIN_LEMMA_CHARS {
                return format!("{stem}{}", rule.replacement);
            }
        }
    }
    token.to_string()
}
