use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Sparse vector stored as `(dimension, weight)` pairs sorted by dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SparseVector<T> {
    entries: Vec<(usize, T)>,
}

impl<T> Default for SparseVector<T> {
    fn default() -> Self {
        Self { entries: Vec::new() }
    }
}

impl<T: Scalar> SparseVector<T> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Builds from arbitrary pairs: duplicates are summed and zeros dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, T)>) -> Self {
        let mut entries: Vec<(usize, T)> = pairs.into_iter().collect();
        entries.sort_by_key(|(d, _)| *d);
        let mut merged: Vec<(usize, T)> = Vec::with_capacity(entries.len());
        for (d, w) in entries {
            match merged.last_mut() {
                Some((ld, lw)) if *ld == d => *lw = *lw + w,
                _ => merged.push((d, w)),
            }
        }
        merged.retain(|(_, w)| !w.is_zero());
        Self { entries: merged }
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, dim: usize) -> T {
        self.entries
            .binary_search_by_key(&dim, |(d, _)| *d)
            .map(|i| self.entries[i].1)
            .unwrap_or_else(|_| T::zero())
    }

    pub fn dot(&self, other: &Self) -> T {
        let (mut i, mut j) = (0, 0);
        let mut acc = T::zero();
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc = acc + a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn norm(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, (_, w)| acc + *w * *w).sqrt()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self::from_pairs(self.entries.iter().map(|&(d, w)| (d, w * factor)))
    }

    /// Unit vector in the same direction; the zero vector stays zero.
    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n.is_zero() {
            Self::zero()
        } else {
            self.scaled(n.recip())
        }
    }
}
