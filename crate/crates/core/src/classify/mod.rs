//! Seed-guided sector classification.
//!
//! Documents are embedded with TF-IDF. A document whose mean cosine
//! similarity to every named seed set falls below a threshold is labelled
//! `other`; everything else goes through a CART decision tree trained on the
//! seed documents (including mined `other` exemplars).

mod labels;
mod metrics;
mod model;
mod seeds;
mod similarity;
mod split;
mod terms;
mod tfidf;
mod tree;
mod vector;

pub use labels::{is_sector_label, named_labels, OTHER, SECTOR_LABELS};
pub use metrics::{ConfusionEntry, EvalMetrics};
pub use model::{classify, evaluate, ModelHeader, SectorModel, TrainConfig, TrainedModel, MODEL_FORMAT, MODEL_VERSION};
pub use seeds::{mine_other, select_seeds, SeedCorpus, SeedPhrases, SeedSelection};
pub use similarity::{cosine_similarity, detect_other, mean_seed_similarity, SeedCentroids, DEFAULT_OTHER_THRESHOLD};
pub use split::stratified_split;
pub use terms::{top_terms, TermScope};
pub use tfidf::{fit_tfidf, vectorize, TfIdfModel};
pub use tree::{train_tree, DecisionTree, Impurity, Node, TreeParams};
pub use vector::SparseVector;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("seed set is empty")]
    EmptySeedSet,
    #[error("cannot train on {samples} samples across {classes} classes")]
    DegenerateTraining { samples: usize, classes: usize },
    #[error("label {0:?} is not in the sector label set")]
    UnknownLabel(String),
    #[error("seeds file: {0}")]
    SeedsFile(String),
    #[error("model file: {0}")]
    ModelFile(String),
}
