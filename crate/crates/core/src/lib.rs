//! Vacancy observatory core: ingestion of job ads, text preparation, sector
//! classification, location resolution, storage and analytics.
//!
//! Numeric code is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix it to `f64`, which is what the service uses.

pub mod analytics;
pub mod classify;
pub mod geoloc;
pub mod ingest;
pub mod ratelimit;
pub mod scalar;
pub mod store;
pub mod textprep;

pub type Real = f64;
pub type DocVector = classify::SparseVector<Real>;
pub type SectorTree = classify::DecisionTree<Real>;
pub type Model = classify::SectorModel<Real>;
pub type Trained = classify::TrainedModel<Real>;
pub type Centroids = classify::SeedCentroids<Real>;
pub type Regions = geoloc::RegionSet<Real>;
pub type RegionBoundary = geoloc::Polygon<Real>;
pub type TestResult = analytics::StatTestResult<Real>;
