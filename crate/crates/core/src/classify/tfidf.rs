use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::vector::SparseVector;
use super::ClassifyError;
use crate::scalar::Scalar;
use crate::textprep::Document;

/// Fitted vocabulary and document frequencies.
///
/// Weights are raw term count times `ln(n_docs / df)`, L2-normalised. A lemma
/// present in every training document therefore has weight zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfIdfModel {
    pub vocabulary: BTreeMap<String, usize>,
    pub doc_frequency: Vec<u64>,
    pub n_docs: u64,
}

/// Fits vocabulary and document frequencies. Dimensions are assigned in
/// lexicographic lemma order.
pub fn fit_tfidf<'a, I>(corpus: I) -> Result<TfIdfModel, ClassifyError>
where
    I: IntoIterator<Item = &'a Document>,
{
    let mut df: BTreeMap<&str, u64> = BTreeMap::new();
    let mut n_docs = 0u64;
    for doc in corpus {
        n_docs += 1;
        let distinct: HashSet<&str> = doc.tokens.iter().map(String::as_str).collect();
        for t in distinct {
            *df.entry(t).or_default() += 1;
        }
    }
    if df.is_empty() {
        return Err(ClassifyError::EmptyCorpus);
    }
    let mut vocabulary = BTreeMap::new();
    let mut doc_frequency = Vec::with_capacity(df.len());
    for (i, (term, count)) in df.into_iter().enumerate() {
        vocabulary.insert(term.to_string(), i);
        doc_frequency.push(count);
    }
    Ok(TfIdfModel {
        vocabulary,
        doc_frequency,
        n_docs,
    })
}

impl TfIdfModel {
    pub fn dimensions(&self) -> usize {
        self.doc_frequency.len()
    }

    pub fn idf<T: Scalar>(&self, dim: usize) -> T {
        let ratio = self.n_docs as f64 / self.doc_frequency[dim] as f64;
        T::lit(ratio).ln()
    }

    /// Out-of-vocabulary lemmas are ignored; if nothing carries positive
    /// weight the zero vector is returned.
    pub fn vectorize<T: Scalar>(&self, doc: &Document) -> SparseVector<T> {
        let mut tf: HashMap<usize, usize> = HashMap::new();
        for t in &doc.tokens {
            if let Some(&dim) = self.vocabulary.get(t) {
                *tf.entry(dim).or_default() += 1;
            }
        }
        SparseVector::from_pairs(tf.into_iter().map(|(dim, count)| (dim, T::from_count(count) * self.idf::<T>(dim))))
            .normalized()
    }

    /// Inverse mapping from dimension to lemma.
    pub fn terms(&self) -> Vec<&str> {
        let mut out = vec![""; self.dimensions()];
        for (t, &i) in &self.vocabulary {
            out[i] = t;
        }
        out
    }
}

pub fn vectorize<T: Scalar>(model: &TfIdfModel, doc: &Document) -> SparseVector<T> {
    model.vectorize(doc)
}
