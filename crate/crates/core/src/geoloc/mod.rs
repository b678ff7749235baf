//! Location resolution and region assignment.
//!
//! A free-text location goes through a county list, a local gazetteer and
//! then a remote geocoder, stopping at the first hit. Remote answers are
//! cached by normalized string. Resolved places are mapped onto regions,
//! with all London codes folded into a single region.

mod cache;
mod cascade;
mod gazetteer;
mod geocoder;
mod normalize;
mod polygon;
mod region;
mod resolution;

pub use cache::{GeoCache, MemoryGeoCache};
pub use cascade::{assign_region, coverage, coverage_from_counts, resolve, GeoResolver};
pub use gazetteer::{County, CountyList, Gazetteer};
pub use geocoder::{parse_search_body, HttpGeocoder, NoGeocoder, RemoteGeocoder, DEFAULT_GEOCODER_RATE};
pub use normalize::normalize_location;
pub use polygon::{Coord, Polygon, Ring};
pub use region::{canonical_region_code, is_london_code, Region, RegionSet, LONDON_CODE, LONDON_NAME};
pub use resolution::{BoundingBox, GeoKind, GeoResolution, GeoSource, Located};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeoError {
    #[error("location is empty after normalization")]
    EmptyLocation,
    #[error("remote geocoder unavailable: {0}")]
    GeocoderUnavailable(String),
    #[error("no resolutions to compute coverage over")]
    EmptyStore,
    #[error("bounding box corners out of order")]
    BadBoundingBox,
    #[error("transient failures are never cached")]
    TransientNotCacheable,
    #[error("bad gazetteer or county list: {0}")]
    BadGazetteer(String),
    #[error("bad region file: {0}")]
    BadRegionFile(String),
    #[error("geo cache error: {0}")]
    Cache(String),
}
