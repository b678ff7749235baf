use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::textprep::Document;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermScope {
    TitlesOnly,
    Full,
}

impl TermScope {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "titles_only" | "titles" => Some(Self::TitlesOnly),
            "full" => Some(Self::Full),
            _ => None,
        }
    }
}

/// Most frequent lemmas, descending by count, ties broken lexicographically.
pub fn top_terms<'a, I>(docs: I, n: usize, scope: TermScope) -> Vec<(String, u64)>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for d in docs {
        let toks = match scope {
            TermScope::TitlesOnly => d.title_tokens(),
            TermScope::Full => &d.tokens[..],
        };
        for t in toks {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().map(|(t, c)| (t.to_string(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(n);
    ranked
}
