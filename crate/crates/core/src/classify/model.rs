use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::labels::OTHER;
use super::metrics::EvalMetrics;
use super::seeds::SeedCorpus;
use super::similarity::{SeedCentroids, DEFAULT_OTHER_THRESHOLD};
use super::split::stratified_split;
use super::tfidf::{fit_tfidf, TfIdfModel};
use super::tree::{train_tree, DecisionTree, TreeParams};
use super::vector::SparseVector;
use super::ClassifyError;
use crate::scalar::Scalar;
use crate::textprep::Document;

pub const MODEL_FORMAT: &str = "vacobs-sector-model";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub tree: TreeParams,
    pub test_fraction: f64,
    pub rng_seed: u64,
    pub other_threshold: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            tree: TreeParams::default(),
            test_fraction: 0.2,
            rng_seed: 20190111,
            other_threshold: DEFAULT_OTHER_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub format: String,
    pub version: u32,
    pub config: TrainConfig,
    pub train_size: usize,
    pub test_size: usize,
}

/// Everything needed to classify a document without retraining.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SectorModel<T> {
    pub header: ModelHeader,
    pub tfidf: TfIdfModel,
    pub tree: DecisionTree<T>,
    pub gate: SeedCentroids<T>,
}

/// A freshly trained model with its held-out evaluation.
#[derive(Debug, Clone)]
pub struct TrainedModel<T> {
    pub model: SectorModel<T>,
    pub test_set: Vec<(Document, String)>,
    pub metrics: EvalMetrics,
}

/// The `other` gate runs before the tree: documents with too little
/// similarity to every named seed set never reach it.
pub fn classify<'a, T: Scalar>(
    tree: &'a DecisionTree<T>,
    model: &TfIdfModel,
    gate: &SeedCentroids<T>,
    doc: &Document,
    threshold: T,
) -> &'a str {
    let v: SparseVector<T> = model.vectorize(doc);
    if gate.is_other(&v, threshold) {
        return tree.classes.iter().find(|c| c.as_str() == OTHER).map_or(OTHER, String::as_str);
    }
    tree.predict(&v)
}

impl<T: Scalar> SectorModel<T> {
    /// Stratified split, TF-IDF fit and tree growth on the training side,
    /// then evaluation on the held-out side.
    pub fn train(corpus: &SeedCorpus, config: TrainConfig) -> Result<TrainedModel<T>, ClassifyError> {
        let (train, test) = stratified_split(&corpus.sets, config.test_fraction, config.rng_seed);
        let tfidf = fit_tfidf(train.iter().map(|(d, _)| d))?;
        let samples: Vec<(SparseVector<T>, String)> =
            train.iter().map(|(d, l)| (tfidf.vectorize(d), l.clone())).collect();
        let mut seeds: BTreeMap<String, Vec<SparseVector<T>>> = BTreeMap::new();
        for (v, l) in &samples {
            if l != OTHER {
                seeds.entry(l.clone()).or_default().push(v.clone());
            }
        }
        if seeds.is_empty() {
            return Err(ClassifyError::EmptySeedSet);
        }
        let gate = SeedCentroids::from_seeds(&seeds)?;
        let tree = train_tree(&samples, config.tree)?;
        let model = SectorModel {
            header: ModelHeader {
                format: MODEL_FORMAT.into(),
                version: MODEL_VERSION,
                config,
                train_size: train.len(),
                test_size: test.len(),
            },
            tfidf,
            tree,
            gate,
        };
        let metrics = model.evaluate(&test);
        Ok(TrainedModel {
            model,
            test_set: test,
            metrics,
        })
    }

    pub fn threshold(&self) -> T {
        T::lit(self.header.config.other_threshold)
    }

    pub fn classify(&self, doc: &Document) -> &str {
        classify(&self.tree, &self.tfidf, &self.gate, doc, self.threshold())
    }

    pub fn evaluate(&self, test: &[(Document, String)]) -> EvalMetrics {
        EvalMetrics::from_pairs(test.iter().map(|(d, l)| (l.as_str(), self.classify(d))))
    }

    pub fn to_json(&self) -> Result<String, ClassifyError> {
        serde_json::to_string(self).map_err(|e| ClassifyError::ModelFile(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self, ClassifyError> {
        let probe: serde_json::Value =
            serde_json::from_str(text).map_err(|e| ClassifyError::ModelFile(e.to_string()))?;
        let header = &probe["header"];
        if header["format"] != MODEL_FORMAT {
            return Err(ClassifyError::ModelFile("not a sector model file".into()));
        }
        if header["version"] != MODEL_VERSION {
            return Err(ClassifyError::ModelFile(format!(
                "unsupported model version {}",
                header["version"]
            )));
        }
        serde_json::from_value(probe).map_err(|e| ClassifyError::ModelFile(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ClassifyError> {
        std::fs::write(path, self.to_json()?).map_err(|e| ClassifyError::ModelFile(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ClassifyError> {
        let text = std::fs::read_to_string(path).map_err(|e| ClassifyError::ModelFile(e.to_string()))?;
        Self::from_json(&text)
    }
}

/// Held-out evaluation with explicit components.
pub fn evaluate<T: Scalar>(
    tree: &DecisionTree<T>,
    model: &TfIdfModel,
    gate: &SeedCentroids<T>,
    threshold: T,
    test: &[(Document, String)],
) -> EvalMetrics {
    EvalMetrics::from_pairs(test.iter().map(|(d, l)| (l.as_str(), classify(tree, model, gate, d, threshold))))
}
