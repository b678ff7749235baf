use std::collections::HashMap;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use super::normalize::normalize_location;
use super::GeoError;

/// Countries kept when loading a gazetteer.
const UK_COUNTRY_CODES: [&str; 3] = ["GB", "UK", "United Kingdom"];

/// Local place-name lookup, `name<TAB>lat<TAB>lon<TAB>country` per line.
/// The first entry for a name wins.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gazetteer {
    places: HashMap<String, (f64, f64)>,
}

impl Gazetteer {
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, GeoError> {
        let mut places = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| GeoError::BadGazetteer(format!("line {}: {e}", i + 1)))?;
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [name, lat, lon, country, ..] = cols[..] else {
                return Err(GeoError::BadGazetteer(format!("line {}: expected 4 columns", i + 1)));
            };
            if !UK_COUNTRY_CODES.iter().any(|c| c.eq_ignore_ascii_case(country.trim())) {
                continue;
            }
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| GeoError::BadGazetteer(format!("line {}: bad coordinate {s:?}", i + 1)))
            };
            let (lat, lon) = (parse(lat)?, parse(lon)?);
            places.entry(normalize_location(name)).or_insert((lat, lon));
        }
        Ok(Self { places })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, GeoError> {
        let f = std::fs::File::open(path.as_ref())
            .map_err(|e| GeoError::BadGazetteer(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_reader(std::io::BufReader::new(f))
    }

    pub fn insert(&mut self, name: &str, lat: f64, lon: f64) {
        self.places.entry(normalize_location(name)).or_insert((lat, lon));
    }

    pub fn lookup(&self, normalized: &str) -> Option<(f64, f64)> {
        self.places.get(normalized).copied()
    }

    pub fn len(&self) -> usize {
        self.places.len()
    }

    pub fn is_empty(&self) -> bool {
        self.places.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct County {
    pub name: String,
    pub region_code: Option<String>,
}

/// Administrative counties, one per line, optionally `name<TAB>region code`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountyList {
    counties: HashMap<String, County>,
}

impl CountyList {
    pub fn parse(text: &str) -> Self {
        let mut counties = HashMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, code) = match line.split_once('\t') {
                Some((n, c)) if !c.trim().is_empty() => (n.trim(), Some(c.trim().to_string())),
                Some((n, _)) => (n.trim(), None),
                None => (line, None),
            };
            counties.entry(normalize_location(name)).or_insert(County {
                name: name.to_string(),
                region_code: code,
            });
        }
        Self { counties }
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self, GeoError> {
        std::fs::read_to_string(path.as_ref())
            .map(|t| Self::parse(&t))
            .map_err(|e| GeoError::BadGazetteer(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn insert(&mut self, name: &str, region_code: Option<&str>) {
        self.counties.insert(
            normalize_location(name),
            County {
                name: name.to_string(),
                region_code: region_code.map(str::to_string),
            },
        );
    }

    pub fn lookup(&self, normalized: &str) -> Option<&County> {
        self.counties.get(normalized)
    }

    /// County display name to region code, for counties that carry one.
    pub fn region_map(&self) -> HashMap<String, String> {
        self.counties
            .values()
            .filter_map(|c| c.region_code.clone().map(|code| (c.name.clone(), code)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.counties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counties.is_empty()
    }
}
