//! Cleaning, tokenising and lemmatising ad text into documents.

mod clean;
mod lemma;
mod tokenize;

pub use clean::clean_text;
pub use lemma::{lemmatize, LemmaTable, LemmaTableError, SuffixRule};
pub use tokenize::tokenize;

use serde::{Deserialize, Serialize};

use crate::ingest::JobAd;

/// Upper bound on tokens kept per document.
pub const MAX_TOKENS: usize = 10_000;

/// Lemmatised token sequence for one ad: title tokens, then description tokens.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub ad_id: u64,
    pub tokens: Vec<String>,
    /// Number of leading tokens that came from the title.
    pub boundary: usize,
}

impl Document {
    pub fn new(ad_id: u64, tokens: Vec<String>) -> Self {
        let boundary = tokens.len();
        Self { ad_id, tokens, boundary }
    }

    pub fn title_tokens(&self) -> &[String] {
        &self.tokens[..self.boundary.min(self.tokens.len())]
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

fn lemmas(text: &str, table: &LemmaTable) -> Vec<String> {
    tokenize(&clean_text(text)).into_iter().map(|t| lemmatize(&t, table)).collect()
}

/// Builds the document for a title/description pair.
pub fn build_document_from_text(ad_id: u64, title: &str, description: &str, table: &LemmaTable) -> Document {
    let mut tokens = lemmas(title, table);
    tokens.truncate(MAX_TOKENS);
    let boundary = tokens.len();
    if tokens.len() < MAX_TOKENS {
        tokens.extend(lemmas(description, table));
        tokens.truncate(MAX_TOKENS);
    }
    Document { ad_id, tokens, boundary }
}

pub fn build_document(ad: &JobAd, table: &LemmaTable) -> Document {
    build_document_from_text(ad.ad_id, &ad.title, &ad.description, table)
}
