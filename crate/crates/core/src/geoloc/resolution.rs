use serde::{Deserialize, Serialize};

use super::GeoError;

/// `(min_lat, min_lon, max_lat, max_lon)` in WGS84 degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BoundingBox {
    /// Rejects boxes whose corners are out of order or non-finite.
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self, GeoError> {
        let all_finite = [min_lat, min_lon, max_lat, max_lon].iter().all(|v| v.is_finite());
        if !all_finite || min_lat > max_lat || min_lon > max_lon {
            return Err(GeoError::BadBoundingBox);
        }
        Ok(Self {
            min_lat,
            min_lon,
            max_lat,
            max_lon,
        })
    }

    pub fn centroid(&self) -> (f64, f64) {
        ((self.min_lat + self.max_lat) / 2.0, (self.min_lon + self.max_lon) / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeoKind {
    County,
    Point,
    BoundingBox,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeoSource {
    CountyList,
    Gazetteer,
    RemoteGeocoder,
    Cache,
}

/// What a location string resolved to. Carrying the payload inside the
/// variant keeps the fields consistent with the kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Located {
    County { county_name: String },
    Point { lat: f64, lon: f64 },
    BoundingBox { bbox: BoundingBox },
    /// `transient` marks a remote failure that may succeed on retry; such
    /// results are never cached.
    Unresolved { transient: bool },
}

impl Located {
    pub fn kind(&self) -> GeoKind {
        match self {
            Located::County { .. } => GeoKind::County,
            Located::Point { .. } => GeoKind::Point,
            Located::BoundingBox { .. } => GeoKind::BoundingBox,
            Located::Unresolved { .. } => GeoKind::Unresolved,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoResolution {
    pub location: Located,
    pub source: GeoSource,
}

impl GeoResolution {
    pub fn kind(&self) -> GeoKind {
        self.location.kind()
    }

    pub fn is_resolved(&self) -> bool {
        self.kind() != GeoKind::Unresolved
    }

    pub fn is_transient(&self) -> bool {
        matches!(self.location, Located::Unresolved { transient: true })
    }

    /// Placeholder stored when the remote geocoder was down.
    pub fn transient_failure() -> Self {
        Self {
            location: Located::Unresolved { transient: true },
            source: GeoSource::RemoteGeocoder,
        }
    }

    pub fn county_name(&self) -> Option<&str> {
        match &self.location {
            Located::County { county_name } => Some(county_name),
            _ => None,
        }
    }

    pub fn point(&self) -> Option<(f64, f64)> {
        match self.location {
            Located::Point { lat, lon } => Some((lat, lon)),
            _ => None,
        }
    }

    pub fn bbox(&self) -> Option<BoundingBox> {
        match self.location {
            Located::BoundingBox { bbox } => Some(bbox),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_ordering() {
        assert!(BoundingBox::new(50.0, -3.0, 51.0, -2.0).is_ok());
        assert!(BoundingBox::new(51.0, -3.0, 50.0, -2.0).is_err());
        assert!(BoundingBox::new(50.0, -2.0, 51.0, -3.0).is_err());
        assert!(BoundingBox::new(f64::NAN, -2.0, 51.0, -3.0).is_err());
        assert_eq!(BoundingBox::new(50.0, -4.0, 52.0, -2.0).unwrap().centroid(), (51.0, -3.0));
    }

    #[test]
    fn fields_follow_kind() {
        let r = GeoResolution {
            location: Located::County {
                county_name: "Devon".into(),
            },
            source: GeoSource::CountyList,
        };
        assert_eq!(r.kind(), GeoKind::County);
        assert_eq!(r.county_name(), Some("Devon"));
        assert!(r.point().is_none() && r.bbox().is_none());
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<GeoResolution>(&json).unwrap(), r);
        assert!(GeoResolution::transient_failure().is_transient());
    }
}
