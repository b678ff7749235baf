use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfusionEntry {
    pub truth: String,
    pub predicted: String,
    pub count: u64,
}

/// Agreement metrics between true and predicted labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub n: u64,
    pub subset_accuracy: f64,
    pub balanced_accuracy: f64,
    pub cohens_kappa: f64,
    /// Sorted by (truth, predicted).
    pub confusion: Vec<ConfusionEntry>,
}

impl EvalMetrics {
    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut table: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (t, p) in pairs {
            *table.entry((t.to_string(), p.to_string())).or_default() += 1;
        }
        let n: u64 = table.values().sum();
        if n == 0 {
            return Self {
                n: 0,
                subset_accuracy: 0.0,
                balanced_accuracy: 0.0,
                cohens_kappa: 0.0,
                confusion: Vec::new(),
            };
        }
        let mut truth_totals: BTreeMap<&str, u64> = BTreeMap::new();
        let mut pred_totals: BTreeMap<&str, u64> = BTreeMap::new();
        let mut correct: BTreeMap<&str, u64> = BTreeMap::new();
        for ((t, p), &c) in &table {
            *truth_totals.entry(t).or_default() += c;
            *pred_totals.entry(p).or_default() += c;
            if t == p {
                *correct.entry(t).or_default() += c;
            }
        }
        let agree: u64 = correct.values().sum();
        let nf = n as f64;
        let p_o = agree as f64 / nf;
        let recalls: Vec<f64> = truth_totals
            .iter()
            .map(|(t, &tot)| correct.get(t).copied().unwrap_or(0) as f64 / tot as f64)
            .collect();
        let balanced = recalls.iter().sum::<f64>() / recalls.len() as f64;
        let labels: BTreeSet<&str> = truth_totals.keys().chain(pred_totals.keys()).copied().collect();
        let p_e: f64 = labels
            .iter()
            .map(|l| {
                let a = truth_totals.get(l).copied().unwrap_or(0) as f64 / nf;
                let b = pred_totals.get(l).copied().unwrap_or(0) as f64 / nf;
                a * b
            })
            .sum();
        let kappa = if (1.0 - p_e).abs() < 1e-15 {
            0.0
        } else {
            (p_o - p_e) / (1.0 - p_e)
        };
        let confusion = table
            .into_iter()
            .map(|((truth, predicted), count)| ConfusionEntry {
                truth,
                predicted,
                count,
            })
            .collect();
        Self {
            n,
            subset_accuracy: p_o,
            balanced_accuracy: balanced,
            cohens_kappa: kappa,
            confusion,
        }
    }

    pub fn misclassified(&self) -> u64 {
        self.confusion.iter().filter(|e| e.truth != e.predicted).map(|e| e.count).sum()
    }

    /// Off-diagonal cells by descending count, ties in (truth, predicted) order.
    pub fn top_confusions(&self, n: usize) -> Vec<&ConfusionEntry> {
        let mut off: Vec<&ConfusionEntry> = self.confusion.iter().filter(|e| e.truth != e.predicted).collect();
        off.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.cmp(b)));
        off.truncate(n);
        off
    }
}
