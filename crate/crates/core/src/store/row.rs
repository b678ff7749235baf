use serde::{Deserialize, Serialize};

use crate::geoloc::GeoKind;
use crate::ingest::JobAd;

/// One stored ad with everything the pipeline derived from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdRecordRow {
    #[serde(flatten)]
    pub ad: JobAd,
    pub label: String,
    pub region_code: Option<String>,
    pub resolution_kind: GeoKind,
    /// The location stage failed transiently; a later run may retry it.
    #[serde(default)]
    pub geo_transient: bool,
    pub ingest_run_id: i64,
}

impl AdRecordRow {
    pub fn ad_id(&self) -> u64 {
        self.ad.ad_id
    }
}
