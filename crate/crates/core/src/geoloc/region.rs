use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::polygon::{Coord, Polygon, Ring};
use super::GeoError;
use crate::scalar::Scalar;

/// Code and name of the merged London region.
pub const LONDON_CODE: &str = "UKI";
pub const LONDON_NAME: &str = "Greater London";

/// True for any London NUTS code (`UKI`, `UKI3`, `UKI31`, ...).
pub fn is_london_code(code: &str) -> bool {
    code.starts_with(LONDON_CODE)
}

/// Maps London sub-region codes onto the merged code.
pub fn canonical_region_code(code: &str) -> &str {
    if is_london_code(code) {
        LONDON_CODE
    } else {
        code
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Region<T> {
    pub code: String,
    pub name: String,
    pub boundary: Vec<Polygon<T>>,
    pub population: u64,
}

impl<T: Scalar> Region<T> {
    pub fn contains(&self, p: Coord<T>) -> bool {
        self.boundary.iter().any(|poly| poly.contains(p))
    }
}

/// Regions in a fixed order; lookups return the first match.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RegionSet<T> {
    regions: Vec<Region<T>>,
}

impl<T: Scalar> RegionSet<T> {
    /// Merges every London region into one `Greater London` region placed
    /// where the first London region appeared.
    pub fn new(regions: Vec<Region<T>>) -> Self {
        let mut out: Vec<Region<T>> = Vec::with_capacity(regions.len());
        let mut london: Option<usize> = None;
        for r in regions {
            if !is_london_code(&r.code) {
                out.push(r);
                continue;
            }
            match london {
                Some(i) => {
                    out[i].boundary.extend(r.boundary);
                    out[i].population += r.population;
                }
                None => {
                    london = Some(out.len());
                    out.push(Region {
                        code: LONDON_CODE.into(),
                        name: LONDON_NAME.into(),
                        boundary: r.boundary,
                        population: r.population,
                    });
                }
            }
        }
        Self { regions: out }
    }

    pub fn regions(&self) -> &[Region<T>] {
        &self.regions
    }

    pub fn by_code(&self, code: &str) -> Option<&Region<T>> {
        let code = canonical_region_code(code);
        self.regions.iter().find(|r| r.code == code)
    }

    pub fn locate(&self, p: Coord<T>) -> Option<&Region<T>> {
        self.regions.iter().find(|r| r.contains(p))
    }

    /// Reads a GeoJSON `FeatureCollection` of `Polygon`/`MultiPolygon`
    /// features carrying `code`, `name` and `population` properties.
    pub fn from_geojson(text: &str) -> Result<Self, GeoError> {
        let bad = |m: String| GeoError::BadRegionFile(m);
        let root: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
        let features = root["features"].as_array().ok_or_else(|| bad("missing features array".into()))?;
        let mut regions = Vec::with_capacity(features.len());
        for (i, f) in features.iter().enumerate() {
            let props = &f["properties"];
            let code = props["code"].as_str().ok_or_else(|| bad(format!("feature {i}: missing code")))?;
            let name = props["name"].as_str().unwrap_or(code);
            let population = match &props["population"] {
                Value::Number(n) => n.as_u64().or_else(|| n.as_f64().map(|x| x as u64)),
                Value::String(s) => s.parse().ok(),
                _ => None,
            }
            .ok_or_else(|| bad(format!("feature {i}: missing population")))?;
            let geom = &f["geometry"];
            let polys = match geom["type"].as_str() {
                Some("Polygon") => vec![polygon_from(&geom["coordinates"]).map_err(|m| bad(format!("feature {i}: {m}")))?],
                Some("MultiPolygon") => geom["coordinates"]
                    .as_array()
                    .ok_or_else(|| bad(format!("feature {i}: bad coordinates")))?
                    .iter()
                    .map(polygon_from)
                    .collect::<Result<_, _>>()
                    .map_err(|m| bad(format!("feature {i}: {m}")))?,
                other => return Err(bad(format!("feature {i}: unsupported geometry {other:?}"))),
            };
            regions.push(Region {
                code: code.to_string(),
                name: name.to_string(),
                boundary: polys,
                population,
            });
        }
        Ok(Self::new(regions))
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, GeoError> {
        let text = std::fs::read_to_string(path.as_ref())
            .map_err(|e| GeoError::BadRegionFile(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_geojson(&text)
    }
}

fn ring_from<T: Scalar>(v: &Value) -> Result<Ring<T>, String> {
    let pts = v
        .as_array()
        .ok_or("ring is not an array")?
        .iter()
        .map(|p| {
            let lon = p[0].as_f64().ok_or("bad longitude")?;
            let lat = p[1].as_f64().ok_or("bad latitude")?;
            Ok(Coord::new(T::lit(lat), T::lit(lon)))
        })
        .collect::<Result<Vec<_>, &str>>()?;
    Ring::new(pts).ok_or_else(|| "ring has fewer than three vertices".to_string())
}

fn polygon_from<T: Scalar>(v: &Value) -> Result<Polygon<T>, String> {
    let rings = v.as_array().ok_or("polygon is not an array")?;
    let (ext, holes) = rings.split_first().ok_or("polygon has no rings")?;
    Ok(Polygon::new(ring_from(ext)?, holes.iter().map(ring_from).collect::<Result<_, _>>()?))
}
