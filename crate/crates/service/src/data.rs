//! Bundled sample assets and loaders that fall back to them.

use std::collections::HashMap;
use std::path::Path;

use vacobs_core::classify::SeedPhrases;
use vacobs_core::geoloc::{CountyList, Gazetteer, GeoError, RegionSet};
use vacobs_core::textprep::LemmaTable;
use vacobs_core::Regions;

pub const SEEDS_TOML: &str = include_str!("../data/seeds.toml");
pub const COUNTIES_TXT: &str = include_str!("../data/counties.txt");
pub const GAZETTEER_TSV: &str = include_str!("../data/gazetteer.tsv");
/// Coarse region outlines for demos and tests; not survey-grade boundaries.
pub const REGIONS_GEOJSON: &str = include_str!("../data/regions.geojson");
pub const EVENTS_JSON: &str = include_str!("../data/events.json");

pub fn seeds(path: Option<&Path>) -> anyhow::Result<SeedPhrases> {
    Ok(match path {
        Some(p) => SeedPhrases::load(p)?,
        None => SeedPhrases::parse(SEEDS_TOML)?,
    })
}

pub fn lemmas(path: Option<&Path>) -> anyhow::Result<LemmaTable> {
    Ok(match path {
        Some(p) => LemmaTable::load(p)?,
        None => LemmaTable::default(),
    })
}

/// Static inputs of location resolution and region assignment.
#[derive(Debug, Clone)]
pub struct GeoData {
    pub counties: CountyList,
    pub gazetteer: Gazetteer,
    pub regions: Regions,
    /// County display name to region code.
    pub county_map: HashMap<String, String>,
}

impl GeoData {
    pub fn load(counties: Option<&Path>, gazetteer: Option<&Path>, regions: Option<&Path>) -> Result<Self, GeoError> {
        let counties = match counties {
            Some(p) => CountyList::load(p)?,
            None => CountyList::parse(COUNTIES_TXT),
        };
        let gazetteer = match gazetteer {
            Some(p) => Gazetteer::load(p)?,
            None => Gazetteer::from_reader(GAZETTEER_TSV.as_bytes())?,
        };
        let regions = match regions {
            Some(p) => RegionSet::load(p)?,
            None => RegionSet::from_geojson(REGIONS_GEOJSON)?,
        };
        let county_map = counties.region_map();
        Ok(Self {
            counties,
            gazetteer,
            regions,
            county_map,
        })
    }

    pub fn bundled() -> Self {
        Self::load(None, None, None).expect("bundled geo data is valid")
    }

    /// Region code for a code or a case-insensitive region name.
    pub fn region_code(&self, code_or_name: &str) -> String {
        let wanted = code_or_name.trim();
        self.regions
            .regions()
            .iter()
            .find(|r| r.name.eq_ignore_ascii_case(wanted))
            .map(|r| r.code.clone())
            .unwrap_or_else(|| vacobs_core::geoloc::canonical_region_code(wanted).to_string())
    }
}
