//! CART classification tree over sparse feature vectors.
//!
//! Splits minimise weighted Gini impurity. Candidate thresholds are midpoints
//! between consecutive distinct feature values within a node, with implicit
//! zeros for absent entries. Among equally good splits the lowest dimension,
//! then the lowest threshold, wins; leaf ties go to the lexicographically
//! smallest label.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::vector::SparseVector;
use super::ClassifyError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Impurity {
    Gini,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    /// `None` grows until leaves are pure or unsplittable.
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    pub criterion: Impurity,
}

impl Default for TreeParams {
    fn default() -> Self {
        Self {
            max_depth: None,
            min_samples_leaf: 1,
            criterion: Impurity::Gini,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub enum Node<T> {
    Split {
        dim: usize,
        threshold: T,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Index into [`DecisionTree::classes`].
        label: usize,
        class_counts: Vec<u64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct DecisionTree<T> {
    /// Sorted class names; leaves refer to them by index.
    pub classes: Vec<String>,
    pub nodes: Vec<Node<T>>,
    pub params: TreeParams,
}

struct Split<T> {
    dim: usize,
    threshold: T,
    score: f64,
}

/// Running class histogram with its sum of squared counts.
#[derive(Clone)]
struct Histogram {
    counts: Vec<u64>,
    total: u64,
    sum_sq: f64,
}

impl Histogram {
    fn empty(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            total: 0,
            sum_sq: 0.0,
        }
    }

    fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        let sum_sq = counts.iter().map(|&c| (c * c) as f64).sum();
        Self { counts, total, sum_sq }
    }

    fn add(&mut self, class: usize, n: u64) {
        let c = self.counts[class];
        self.sum_sq += ((c + n) * (c + n) - c * c) as f64;
        self.counts[class] += n;
        self.total += n;
    }

    fn remove(&mut self, class: usize, n: u64) {
        let c = self.counts[class];
        self.sum_sq -= (c * c - (c - n) * (c - n)) as f64;
        self.counts[class] -= n;
        self.total -= n;
    }

    /// `sum_sq / total`; maximising the sum of this over both children
    /// minimises the weighted Gini impurity.
    fn purity(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.sum_sq / self.total as f64
        }
    }
}

fn argmax_label(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

fn midpoint<T: Scalar>(a: T, b: T) -> T {
    let m = a + (b - a) / T::lit(2.0);
    if m < b {
        m
    } else {
        a
    }
}

struct Builder<'a, T> {
    xs: Vec<&'a SparseVector<T>>,
    ys: Vec<usize>,
    k: usize,
    params: TreeParams,
    nodes: Vec<Node<T>>,
}

impl<'a, T: Scalar> Builder<'a, T> {
    fn counts(&self, idx: &[usize]) -> Vec<u64> {
        let mut c = vec![0u64; self.k];
        for &i in idx {
            c[self.ys[i]] += 1;
        }
        c
    }

    fn best_split(&self, idx: &[usize], parent: &Histogram) -> Option<Split<T>> {
        let min_leaf = self.params.min_samples_leaf.max(1) as u64;
        let n = idx.len() as u64;
        if n < 2 * min_leaf {
            return None;
        }
        let mut by_dim: BTreeMap<usize, Vec<(T, usize)>> = BTreeMap::new();
        for &i in idx {
            for &(d, w) in self.xs[i].entries() {
                by_dim.entry(d).or_default().push((w, self.ys[i]));
            }
        }
        let parent_score = parent.purity();
        let mut best: Option<Split<T>> = None;
        for (dim, mut values) in by_dim {
            values.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN feature value"));
            let mut zero_counts = parent.counts.clone();
            for &(_, c) in &values {
                zero_counts[c] -= 1;
            }
            let n_zero = n - values.len() as u64;
            // Sorted sequence: negatives, the implicit zero block, positives.
            let split_at = values.partition_point(|(w, _)| *w < T::zero());
            let mut groups: Vec<(T, Vec<usize>)> = Vec::new();
            let push = |groups: &mut Vec<(T, Vec<usize>)>, w: T, c: usize| match groups.last_mut() {
                Some((gw, cs)) if *gw == w => cs.push(c),
                _ => groups.push((w, vec![c])),
            };
            for &(w, c) in &values[..split_at] {
                push(&mut groups, w, c);
            }
            let zero_group = groups.len();
            if n_zero > 0 {
                groups.push((T::zero(), Vec::new()));
            }
            for &(w, c) in &values[split_at..] {
                push(&mut groups, w, c);
            }
            if groups.len() < 2 {
                continue;
            }
            let mut left = Histogram::empty(self.k);
            let mut right = parent.clone();
            for g in 0..groups.len() - 1 {
                if n_zero > 0 && g == zero_group {
                    for (c, &z) in zero_counts.iter().enumerate() {
                        if z > 0 {
                            left.add(c, z);
                            right.remove(c, z);
                        }
                    }
                } else {
                    for &c in &groups[g].1 {
                        left.add(c, 1);
                        right.remove(c, 1);
                    }
                }
                if left.total < min_leaf || right.total < min_leaf {
                    continue;
                }
                let score = left.purity() + right.purity();
                let better = match &best {
                    None => score >= parent_score - 1e-12 * parent_score.abs().max(1.0),
                    Some(b) => score > b.score + 1e-12 * b.score.abs().max(1.0),
                };
                if better {
                    best = Some(Split {
                        dim,
                        threshold: midpoint(groups[g].0, groups[g + 1].0),
                        score,
                    });
                }
            }
        }
        best
    }

    fn build(mut self, all: Vec<usize>) -> Vec<Node<T>> {
        // (node slot, samples, depth)
        let mut stack = vec![(0usize, all, 0usize)];
        self.nodes.push(Node::Leaf {
            label: 0,
            class_counts: Vec::new(),
        });
        while let Some((slot, idx, depth)) = stack.pop() {
            let counts = self.counts(&idx);
            let hist = Histogram::from_counts(counts.clone());
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            let depth_ok = self.params.max_depth.is_none_or(|m| depth < m);
            let split = if !pure && depth_ok {
                self.best_split(&idx, &hist)
            } else {
                None
            };
            match split {
                None => {
                    self.nodes[slot] = Node::Leaf {
                        label: argmax_label(&counts),
                        class_counts: counts,
                    };
                }
                Some(s) => {
                    let (l, r): (Vec<usize>, Vec<usize>) =
                        idx.into_iter().partition(|&i| self.xs[i].get(s.dim) <= s.threshold);
                    let left = self.nodes.len();
                    let right = left + 1;
                    let placeholder = || Node::Leaf {
                        label: 0,
                        class_counts: Vec::new(),
                    };
                    self.nodes.push(placeholder());
                    self.nodes.push(placeholder());
                    self.nodes[slot] = Node::Split {
                        dim: s.dim,
                        threshold: s.threshold,
                        left,
                        right,
                    };
                    stack.push((right, r, depth + 1));
                    stack.push((left, l, depth + 1));
                }
            }
        }
        self.nodes
    }
}

/// Grows a tree on labelled sparse vectors.
pub fn train_tree<T: Scalar>(
    samples: &[(SparseVector<T>, String)],
    params: TreeParams,
) -> Result<DecisionTree<T>, ClassifyError> {
    let classes: Vec<String> = samples
        .iter()
        .map(|(_, l)| l.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if samples.len() < 2 || classes.len() < 2 {
        return Err(ClassifyError::DegenerateTraining {
            samples: samples.len(),
            classes: classes.len(),
        });
    }
    let index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let builder = Builder {
        xs: samples.iter().map(|(x, _)| x).collect(),
        ys: samples.iter().map(|(_, l)| index[l.as_str()]).collect(),
        k: classes.len(),
        params,
        nodes: Vec::new(),
    };
    let nodes = builder.build((0..samples.len()).collect());
    Ok(DecisionTree { classes, nodes, params })
}

impl<T: Scalar> DecisionTree<T> {
    fn leaf_for(&self, x: &SparseVector<T>) -> &Node<T> {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Split {
                    dim,
                    threshold,
                    left,
                    right,
                } => at = if x.get(*dim) <= *threshold { *left } else { *right },
                leaf => return leaf,
            }
        }
    }

    pub fn predict(&self, x: &SparseVector<T>) -> &str {
        match self.leaf_for(x) {
            Node::Leaf { label, .. } => &self.classes[*label],
            Node::Split { .. } => unreachable!(),
        }
    }

    /// Longest root-to-leaf path, in edges.
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 0usize)];
        while let Some((at, d)) = stack.pop() {
            match &self.nodes[at] {
                Node::Split { left, right, .. } => {
                    stack.push((*left, d + 1));
                    stack.push((*right, d + 1));
                }
                Node::Leaf { .. } => best = best.max(d),
            }
        }
        best
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }
}
