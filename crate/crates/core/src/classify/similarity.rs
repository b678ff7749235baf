use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::vector::SparseVector;
use super::ClassifyError;
use crate::scalar::Scalar;

/// Mean-similarity threshold below which a document counts as `other`.
pub const DEFAULT_OTHER_THRESHOLD: f64 = 0.04;

/// Cosine similarity; zero when either side is the zero vector.
pub fn cosine_similarity<T: Scalar>(u: &SparseVector<T>, v: &SparseVector<T>) -> T {
    let (nu, nv) = (u.norm(), v.norm());
    if nu.is_zero() || nv.is_zero() {
        return T::zero();
    }
    u.dot(v) / (nu * nv)
}

/// Arithmetic mean of the cosine similarity against every seed vector.
pub fn mean_seed_similarity<T: Scalar>(vec: &SparseVector<T>, seed_set: &[SparseVector<T>]) -> Result<T, ClassifyError> {
    if seed_set.is_empty() {
        return Err(ClassifyError::EmptySeedSet);
    }
    let total = seed_set.iter().fold(T::zero(), |acc, s| acc + cosine_similarity(vec, s));
    Ok(total / T::from_count(seed_set.len()))
}

/// True iff the best mean similarity over all seed sets is below `threshold`.
pub fn detect_other<T: Scalar>(
    doc_vec: &SparseVector<T>,
    seeds: &BTreeMap<String, Vec<SparseVector<T>>>,
    threshold: T,
) -> Result<bool, ClassifyError> {
    let mut best = T::neg_infinity();
    for set in seeds.values() {
        best = best.max(mean_seed_similarity(doc_vec, set)?);
    }
    Ok(best < threshold)
}

/// Per-label mean of the unit-normalised seed vectors.
///
/// For unit (or zero) vectors cosine similarity is the dot product, so the
/// mean similarity against a seed set equals the dot product of the
/// normalised document with the set's centroid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SeedCentroids<T> {
    pub labels: Vec<String>,
    pub centroids: Vec<SparseVector<T>>,
}

impl<T: Scalar> SeedCentroids<T> {
    pub fn from_seeds(seeds: &BTreeMap<String, Vec<SparseVector<T>>>) -> Result<Self, ClassifyError> {
        let mut labels = Vec::with_capacity(seeds.len());
        let mut centroids = Vec::with_capacity(seeds.len());
        for (label, set) in seeds {
            if set.is_empty() {
                return Err(ClassifyError::EmptySeedSet);
            }
            let scale = T::from_count(set.len()).recip();
            let pairs = set.iter().flat_map(|v| v.normalized().entries().to_vec());
            labels.push(label.clone());
            centroids.push(SparseVector::from_pairs(pairs).scaled(scale));
        }
        Ok(Self { labels, centroids })
    }

    /// Mean seed similarity for each label, in label order.
    pub fn similarities(&self, doc_vec: &SparseVector<T>) -> Vec<T> {
        let unit = doc_vec.normalized();
        self.centroids.iter().map(|c| unit.dot(c)).collect()
    }

    pub fn max_similarity(&self, doc_vec: &SparseVector<T>) -> T {
        self.similarities(doc_vec).into_iter().fold(T::neg_infinity(), T::max)
    }

    pub fn is_other(&self, doc_vec: &SparseVector<T>, threshold: T) -> bool {
        self.max_similarity(doc_vec) < threshold
    }
}
