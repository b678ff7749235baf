//! Runtime configuration: defaults, then a TOML file, then command-line flags.

use std::path::{Path, PathBuf};
use std::time::Duration;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use vacobs_core::classify::{TrainConfig, TreeParams, DEFAULT_OTHER_THRESHOLD};
use vacobs_core::ingest::{Blocklist, CollectionWindow, RetryPolicy, DEFAULT_BLOCKLIST};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("bad config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    #[default]
    Fixture,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKind,
    pub fixture: Option<PathBuf>,
    pub base_url: String,
    /// First id fetched; defaults to the fixture's lowest id.
    pub start_id: Option<u64>,
    /// One past the last id fetched; defaults to the fixture's highest id + 1.
    pub end_id: Option<u64>,
    pub rate: f64,
    pub window: usize,
    pub max_attempts: u32,
    pub initial_backoff_ms: u64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self {
            kind: SourceKind::Fixture,
            fixture: None,
            base_url: "https://www.reed.co.uk/api/1.0".into(),
            start_id: None,
            end_id: None,
            rate: 5.0,
            window: 8,
            max_attempts: 3,
            initial_backoff_ms: 1000,
        }
    }
}

impl SourceConfig {
    pub fn retry(&self) -> RetryPolicy {
        RetryPolicy {
            max_attempts: self.max_attempts.max(1),
            initial_backoff: Duration::from_millis(self.initial_backoff_ms),
            multiplier: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CollectionConfig {
    pub start: Option<NaiveDate>,
    pub end: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct BlocklistConfig {
    /// Employers removed in addition to the default cross-posters.
    pub extra: Vec<String>,
    /// Drop the default list and use only `extra`.
    pub replace_default: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeoConfig {
    pub counties: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub geocoder_url: Option<String>,
    pub geocoder_rate: f64,
}

impl Default for GeoConfig {
    fn default() -> Self {
        Self {
            counties: None,
            gazetteer: None,
            regions: None,
            geocoder_url: None,
            geocoder_rate: vacobs_core::geoloc::DEFAULT_GEOCODER_RATE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    pub other_threshold: f64,
    pub rng_seed: u64,
    pub test_fraction: f64,
    pub max_depth: Option<usize>,
    pub min_samples_leaf: usize,
    /// Cap on mined `other` exemplars; defaults to the largest named seed set.
    pub other_limit: Option<usize>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            other_threshold: DEFAULT_OTHER_THRESHOLD,
            rng_seed: t.rng_seed,
            test_fraction: t.test_fraction,
            max_depth: t.tree.max_depth,
            min_samples_leaf: t.tree.min_samples_leaf,
            other_limit: None,
        }
    }
}

impl ClassifyConfig {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            tree: TreeParams {
                max_depth: self.max_depth,
                min_samples_leaf: self.min_samples_leaf.max(1),
                ..TreeParams::default()
            },
            test_fraction: self.test_fraction,
            rng_seed: self.rng_seed,
            other_threshold: self.other_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub store: PathBuf,
    pub model: PathBuf,
    pub seeds: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub bind: String,
    pub cors_origins: Vec<String>,
    pub source: SourceConfig,
    pub collection: CollectionConfig,
    pub blocklist: BlocklistConfig,
    pub geo: GeoConfig,
    pub classify: ClassifyConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            store: "vacobs.db".into(),
            model: "model.json".into(),
            seeds: None,
            lemmas: None,
            bind: "127.0.0.1:8080".into(),
            cors_origins: vec!["http://localhost:5173".into()],
            source: SourceConfig::default(),
            collection: CollectionConfig::default(),
            blocklist: BlocklistConfig::default(),
            geo: GeoConfig::default(),
            classify: ClassifyConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub store: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub seeds: Option<PathBuf>,
    pub lemmas: Option<PathBuf>,
    pub bind: Option<String>,
    pub fixture: Option<PathBuf>,
    pub live: bool,
    pub base_url: Option<String>,
    pub start_id: Option<u64>,
    pub end_id: Option<u64>,
    pub rate: Option<f64>,
    pub window: Option<usize>,
    pub collection_start: Option<NaiveDate>,
    pub collection_end: Option<NaiveDate>,
    pub block: Vec<String>,
    pub counties: Option<PathBuf>,
    pub gazetteer: Option<PathBuf>,
    pub regions: Option<PathBuf>,
    pub geocoder_url: Option<String>,
    pub geocoder_rate: Option<f64>,
    pub other_threshold: Option<f64>,
    pub rng_seed: Option<u64>,
}

fn rebase(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

fn rebase_opt(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(p) = p {
        rebase(base, p);
    }
}

impl Config {
    /// Parses TOML text; relative paths are taken relative to `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path, origin: &Path) -> Result<Self, ConfigError> {
        let mut cfg: Config = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        rebase(base_dir, &mut cfg.store);
        rebase(base_dir, &mut cfg.model);
        rebase_opt(base_dir, &mut cfg.seeds);
        rebase_opt(base_dir, &mut cfg.lemmas);
        rebase_opt(base_dir, &mut cfg.source.fixture);
        rebase_opt(base_dir, &mut cfg.geo.counties);
        rebase_opt(base_dir, &mut cfg.geo.gazetteer);
        rebase_opt(base_dir, &mut cfg.geo.regions);
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base, path)
    }

    /// Defaults, then the file if given, then `overrides`; validated.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($src:expr => $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = v;
                }
            };
            ($src:expr => opt $dst:expr) => {
                if let Some(v) = $src.clone() {
                    $dst = Some(v);
                }
            };
        }
        set!(o.store => self.store);
        set!(o.model => self.model);
        set!(o.seeds => opt self.seeds);
        set!(o.lemmas => opt self.lemmas);
        set!(o.bind => self.bind);
        if o.fixture.is_some() {
            self.source.kind = SourceKind::Fixture;
        }
        set!(o.fixture => opt self.source.fixture);
        if o.live {
            self.source.kind = SourceKind::Live;
        }
        set!(o.base_url => self.source.base_url);
        set!(o.start_id => opt self.source.start_id);
        set!(o.end_id => opt self.source.end_id);
        set!(o.rate => self.source.rate);
        set!(o.window => self.source.window);
        set!(o.collection_start => opt self.collection.start);
        set!(o.collection_end => opt self.collection.end);
        self.blocklist.extra.extend(o.block.iter().cloned());
        set!(o.counties => opt self.geo.counties);
        set!(o.gazetteer => opt self.geo.gazetteer);
        set!(o.regions => opt self.geo.regions);
        set!(o.geocoder_url => opt self.geo.geocoder_url);
        set!(o.geocoder_rate => self.geo.geocoder_rate);
        set!(o.other_threshold => self.classify.other_threshold);
        set!(o.rng_seed => self.classify.rng_seed);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.source.rate > 0.0) || !(self.geo.geocoder_rate > 0.0) {
            return bad("rates must be positive");
        }
        if self.source.window == 0 {
            return bad("source.window must be at least 1");
        }
        if !(0.0..1.0).contains(&self.classify.test_fraction) {
            return bad("classify.test_fraction must be in [0, 1)");
        }
        if !(self.classify.other_threshold >= 0.0) {
            return bad("classify.other_threshold must be non-negative");
        }
        if let (Some(s), Some(e)) = (self.source.start_id, self.source.end_id) {
            if s > e {
                return bad("source.start_id is after source.end_id");
            }
        }
        if let (Some(s), Some(e)) = (self.collection.start, self.collection.end) {
            if s >= e {
                return bad("collection.start must precede collection.end");
            }
        }
        Ok(())
    }

    pub fn blocklist(&self) -> Blocklist {
        let extra = Blocklist::new(self.blocklist.extra.iter());
        if self.blocklist.replace_default {
            extra
        } else {
            Blocklist::new(DEFAULT_BLOCKLIST).union(&extra)
        }
    }

    /// Half-open posting-date window, open ends filled with extreme dates.
    pub fn collection_window(&self) -> Option<CollectionWindow> {
        match (self.collection.start, self.collection.end) {
            (None, None) => None,
            (s, e) => Some(CollectionWindow::new(
                s.unwrap_or(NaiveDate::MIN),
                e.unwrap_or(NaiveDate::MAX),
            )),
        }
    }
}
