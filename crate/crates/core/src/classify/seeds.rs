use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::labels::{is_sector_label, named_labels, OTHER};
use super::similarity::SeedCentroids;
use super::tfidf::fit_tfidf;
use super::ClassifyError;
use crate::textprep::{build_document_from_text, Document, LemmaTable};

/// Title search phrases per named label, as read from a seeds file:
///
/// ```toml
/// retail = ["order picker", "shop supervisor", "retail assistant", "picker packer"]
/// nurse = ["staff nurse", "registered nurse"]
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SeedPhrases {
    pub phrases: BTreeMap<String, Vec<String>>,
}

impl SeedPhrases {
    pub fn parse(text: &str) -> Result<Self, ClassifyError> {
        let phrases: BTreeMap<String, Vec<String>> =
            toml::from_str(text).map_err(|e| ClassifyError::SeedsFile(e.to_string()))?;
        for label in phrases.keys() {
            if !is_sector_label(label) || label == OTHER {
                return Err(ClassifyError::UnknownLabel(label.clone()));
            }
        }
        Ok(Self { phrases })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, ClassifyError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| ClassifyError::SeedsFile(format!("{}: {e}", path.as_ref().display())))?;
        Self::parse(&text)
    }

    /// Phrases lemmatised exactly as document titles are.
    fn tokenized(&self, table: &LemmaTable) -> Vec<(&str, Vec<Vec<String>>)> {
        self.phrases
            .iter()
            .map(|(label, ps)| {
                let toks = ps
                    .iter()
                    .map(|p| build_document_from_text(0, p, "", table).tokens)
                    .filter(|t| !t.is_empty())
                    .collect();
                (label.as_str(), toks)
            })
            .collect()
    }
}

fn contains_run(haystack: &[String], needle: &[String]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Labelled exemplar documents, one set per label.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SeedCorpus {
    pub sets: BTreeMap<String, Vec<Document>>,
}

impl SeedCorpus {
    /// Rejects labels outside the sector set and empty sets.
    pub fn new(sets: BTreeMap<String, Vec<Document>>) -> Result<Self, ClassifyError> {
        for (label, docs) in &sets {
            if !is_sector_label(label) {
                return Err(ClassifyError::UnknownLabel(label.clone()));
            }
            if docs.is_empty() {
                return Err(ClassifyError::EmptySeedSet);
            }
        }
        Ok(Self { sets })
    }

    pub fn total(&self) -> usize {
        self.sets.values().map(Vec::len).sum()
    }

    /// Named labels with no seed set.
    pub fn missing_labels(&self) -> Vec<&'static str> {
        named_labels().filter(|l| !self.sets.contains_key(*l)).collect()
    }

    pub fn named_sets(&self) -> impl Iterator<Item = (&String, &Vec<Document>)> {
        self.sets.iter().filter(|(l, _)| l.as_str() != OTHER)
    }
}

/// Result of scanning a labelled window for seed documents.
#[derive(Debug, Clone, Default)]
pub struct SeedSelection {
    pub corpus: SeedCorpus,
    /// Titles matching phrases of more than one label; excluded.
    pub ambiguous: usize,
    /// Documents matching no phrase; candidates for `other`.
    pub unmatched: Vec<Document>,
}

/// Assigns each document whose title contains a label's search phrase to
/// that label. Titles matching several labels are dropped.
pub fn select_seeds(docs: &[Document], phrases: &SeedPhrases, table: &LemmaTable) -> SeedSelection {
    let phrase_tokens = phrases.tokenized(table);
    let mut sets: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    let mut ambiguous = 0;
    let mut unmatched = Vec::new();
    for doc in docs {
        let title = doc.title_tokens();
        let hits: Vec<&str> = phrase_tokens
            .iter()
            .filter(|(_, ps)| ps.iter().any(|p| contains_run(title, p)))
            .map(|(l, _)| *l)
            .collect();
        match hits.as_slice() {
            [] => unmatched.push(doc.clone()),
            [label] => sets.entry(label.to_string()).or_default().push(doc.clone()),
            _ => ambiguous += 1,
        }
    }
    SeedSelection {
        corpus: SeedCorpus { sets },
        ambiguous,
        unmatched,
    }
}

/// Picks candidates whose best mean seed similarity is below `threshold` as
/// `other` exemplars, at most `limit` of them in input order.
pub fn mine_other(
    named: &SeedCorpus,
    candidates: &[Document],
    threshold: f64,
    limit: Option<usize>,
) -> Result<Vec<Document>, ClassifyError> {
    let named_docs: Vec<&Document> = named.named_sets().flat_map(|(_, d)| d).collect();
    let model = fit_tfidf(named_docs.iter().copied().chain(candidates))?;
    let seeds: BTreeMap<String, Vec<_>> = named
        .named_sets()
        .map(|(l, docs)| (l.clone(), docs.iter().map(|d| model.vectorize::<f64>(d)).collect()))
        .collect();
    let gate = SeedCentroids::from_seeds(&seeds)?;
    Ok(candidates
        .iter()
        .filter(|d| gate.is_other(&model.vectorize(d), threshold))
        .take(limit.unwrap_or(usize::MAX))
        .cloned()
        .collect())
}
