use std::collections::HashMap;

use super::gazetteer::{CountyList, Gazetteer};
use super::normalize::normalize_location;
use super::polygon::Coord;
use super::region::{canonical_region_code, Region, RegionSet};
use super::{GeoCache, GeoError, GeoResolution, GeoSource, Located, RemoteGeocoder};
use crate::scalar::Scalar;

/// Runs the cascade: county list, gazetteer, cache, remote geocoder.
///
/// Remote answers, including definitive misses, are written to the cache.
/// A transient remote failure is returned as `GeocoderUnavailable` and leaves
/// the cache untouched.
pub fn resolve(
    location_name: &str,
    counties: &CountyList,
    gazetteer: &Gazetteer,
    geocoder: &dyn RemoteGeocoder,
    cache: &dyn GeoCache,
) -> Result<GeoResolution, GeoError> {
    let key = normalize_location(location_name);
    if key.is_empty() {
        return Err(GeoError::EmptyLocation);
    }
    if let Some(county) = counties.lookup(&key) {
        return Ok(GeoResolution {
            location: Located::County {
                county_name: county.name.clone(),
            },
            source: GeoSource::CountyList,
        });
    }
    if let Some((lat, lon)) = gazetteer.lookup(&key) {
        return Ok(GeoResolution {
            location: Located::Point { lat, lon },
            source: GeoSource::Gazetteer,
        });
    }
    if let Some(hit) = cache.get(&key)? {
        return Ok(GeoResolution {
            location: hit,
            source: GeoSource::Cache,
        });
    }
    let location = geocoder
        .search(&key)?
        .unwrap_or(Located::Unresolved { transient: false });
    cache.put(&key, &location)?;
    Ok(GeoResolution {
        location,
        source: GeoSource::RemoteGeocoder,
    })
}

/// The cascade's fixed inputs bundled together.
pub struct GeoResolver<G, C> {
    pub counties: CountyList,
    pub gazetteer: Gazetteer,
    pub geocoder: G,
    pub cache: C,
}

impl<G: RemoteGeocoder, C: GeoCache> GeoResolver<G, C> {
    pub fn new(counties: CountyList, gazetteer: Gazetteer, geocoder: G, cache: C) -> Self {
        Self {
            counties,
            gazetteer,
            geocoder,
            cache,
        }
    }

    pub fn resolve(&self, location_name: &str) -> Result<GeoResolution, GeoError> {
        resolve(location_name, &self.counties, &self.gazetteer, &self.geocoder, &self.cache)
    }

    /// Like [`resolve`](Self::resolve) but degrades transient remote failures
    /// to an uncached transient `Unresolved`. Empty names are `None`.
    pub fn resolve_lenient(&self, location_name: &str) -> Result<Option<GeoResolution>, GeoError> {
        match self.resolve(location_name) {
            Ok(r) => Ok(Some(r)),
            Err(GeoError::EmptyLocation) => Ok(None),
            Err(GeoError::GeocoderUnavailable(reason)) => {
                tracing::warn!(location = location_name, %reason, "geocoder unavailable");
                Ok(Some(GeoResolution::transient_failure()))
            }
            Err(e) => Err(e),
        }
    }
}

/// Places a resolution in a region. Points use point-in-polygon, boxes use
/// their centroid, counties go through `county_map` (keys compared after
/// normalization). A mapped code missing from the set falls back to the
/// longest region code that prefixes it, so a NUTS2 code can land in a
/// NUTS1-level fixture.
pub fn assign_region<'r, T: Scalar>(
    res: &GeoResolution,
    regions: &'r RegionSet<T>,
    county_map: &HashMap<String, String>,
) -> Option<&'r Region<T>> {
    let at = |lat: f64, lon: f64| regions.locate(Coord::new(T::lit(lat), T::lit(lon)));
    match &res.location {
        Located::Point { lat, lon } => at(*lat, *lon),
        Located::BoundingBox { bbox } => {
            let (lat, lon) = bbox.centroid();
            at(lat, lon)
        }
        Located::County { county_name } => {
            let wanted = normalize_location(county_name);
            let code = county_map
                .iter()
                .find(|(k, _)| normalize_location(k) == wanted)
                .map(|(_, v)| canonical_region_code(v.trim()))?;
            regions.by_code(code).or_else(|| {
                regions
                    .regions()
                    .iter()
                    .filter(|r| code.starts_with(&r.code))
                    .max_by_key(|r| r.code.len())
            })
        }
        Located::Unresolved { .. } => None,
    }
}

/// Share of resolutions that are not `Unresolved`. Errors on an empty input
/// rather than reporting zero.
pub fn coverage<'a>(resolutions: impl IntoIterator<Item = &'a GeoResolution>) -> Result<f64, GeoError> {
    let (mut total, mut resolved) = (0usize, 0usize);
    for r in resolutions {
        total += 1;
        resolved += usize::from(r.is_resolved());
    }
    if total == 0 {
        return Err(GeoError::EmptyStore);
    }
    Ok(resolved as f64 / total as f64)
}

/// Same as [`coverage`] from counts already tallied elsewhere.
pub fn coverage_from_counts(resolved: u64, non_null: u64) -> Result<f64, GeoError> {
    if non_null == 0 {
        return Err(GeoError::EmptyStore);
    }
    Ok(resolved as f64 / non_null as f64)
}
