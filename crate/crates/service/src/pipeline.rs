//! Ingest → textprep → classify → geoloc → store, run as one exclusive job.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use vacobs_core::classify::{mine_other, select_seeds, SectorModel, SeedCorpus, SeedPhrases, OTHER};
use vacobs_core::geoloc::{
    assign_region, coverage_from_counts, resolve, GeoCache, GeoError, GeoKind, GeoResolution, HttpGeocoder,
    MemoryGeoCache, NoGeocoder, RemoteGeocoder,
};
use vacobs_core::ingest::{fetch_range, ingest_records, AdSource, FixtureSource, HttpAdSource, IngestReport};
use vacobs_core::store::{AdRecordRow, QueryFilter, Store};
use vacobs_core::textprep::{build_document, Document, LemmaTable};
use vacobs_core::{Model, Trained};

use crate::config::{Config, SourceKind};
use crate::data::{self, GeoData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Lock,
    Config,
    Ingest,
    Textprep,
    Classify,
    Geoloc,
    Store,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().unwrap_or("?"))
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed")]
pub struct PipelineError {
    pub stage: Stage,
    #[source]
    pub source: anyhow::Error,
}

trait StageExt<T> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<anyhow::Error>> StageExt<T> for Result<T, E> {
    fn stage(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError {
            stage,
            source: e.into(),
        })
    }
}

/// Exclusive marker file next to the store; removed on drop.
#[derive(Debug)]
pub struct RunLock {
    path: PathBuf,
    _file: File,
}

impl RunLock {
    pub fn acquire(store: &Path) -> anyhow::Result<Self> {
        let mut path = store.as_os_str().to_owned();
        path.push(".lock");
        let path = PathBuf::from(path);
        let file = OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            anyhow::anyhow!("cannot take run lock {}: {e} (another run in progress, or a stale lock)", path.display())
        })?;
        Ok(Self { path, _file: file })
    }
}

impl Drop for RunLock {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GeoSummary {
    /// Rows with a non-empty location.
    pub attempted: u64,
    pub resolved: u64,
    pub transient: u64,
    pub assigned_region: u64,
    pub remote_calls: u64,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineSummary {
    pub run_id: i64,
    pub ingest: IngestReport,
    /// Retained ads already settled in the store by an earlier run.
    pub skipped_existing: u64,
    pub stored: u64,
    pub model_trained: bool,
    pub labels: BTreeMap<String, u64>,
    pub geo: GeoSummary,
}

/// Seed corpus mined from labelled titles plus dissimilar `other` exemplars.
#[derive(Debug, Clone)]
pub struct SeedBuild {
    pub corpus: SeedCorpus,
    pub ambiguous: usize,
    pub unmatched: usize,
}

pub fn build_seeds(
    docs: &[Document],
    phrases: &SeedPhrases,
    table: &LemmaTable,
    threshold: f64,
    other_limit: Option<usize>,
) -> anyhow::Result<SeedBuild> {
    let sel = select_seeds(docs, phrases, table);
    if sel.corpus.sets.is_empty() {
        anyhow::bail!("no document title matched any seed phrase");
    }
    let limit = other_limit.or_else(|| sel.corpus.sets.values().map(Vec::len).max());
    let other = mine_other(&sel.corpus, &sel.unmatched, threshold, limit)?;
    let mut sets = sel.corpus.sets;
    if !other.is_empty() {
        sets.insert(OTHER.to_string(), other);
    }
    Ok(SeedBuild {
        corpus: SeedCorpus::new(sets)?,
        ambiguous: sel.ambiguous,
        unmatched: sel.unmatched.len(),
    })
}

pub fn train(corpus: &SeedCorpus, cfg: &Config) -> anyhow::Result<Trained> {
    Ok(SectorModel::train(corpus, cfg.classify.train_config())?)
}

/// Loads the configured model, or trains one from `docs` and saves it.
pub fn load_or_train(cfg: &Config, docs: &[Document], table: &LemmaTable) -> anyhow::Result<(Model, bool)> {
    if cfg.model.exists() {
        return Ok((Model::load(&cfg.model)?, false));
    }
    let phrases = data::seeds(cfg.seeds.as_deref())?;
    let seeds = build_seeds(docs, &phrases, table, cfg.classify.other_threshold, cfg.classify.other_limit)?;
    let trained = train(&seeds.corpus, cfg)?;
    tracing::info!(
        seeds = seeds.corpus.total(),
        labels = seeds.corpus.sets.len(),
        subset_accuracy = trained.metrics.subset_accuracy,
        "trained sector model"
    );
    trained.model.save(&cfg.model)?;
    Ok((trained.model, true))
}

fn open_source(cfg: &Config) -> anyhow::Result<(Box<dyn AdSource>, u64, u64, String)> {
    let src = &cfg.source;
    match src.kind {
        SourceKind::Fixture => {
            let path = src
                .fixture
                .as_ref()
                .ok_or_else(|| anyhow::anyhow!("fixture source needs source.fixture"))?;
            let fixture = FixtureSource::open(path)?;
            let (lo, hi) = fixture.id_span().unwrap_or((0, 0));
            let label = format!("fixture:{}", path.display());
            Ok((Box::new(fixture), src.start_id.unwrap_or(lo), src.end_id.unwrap_or(hi), label))
        }
        SourceKind::Live => {
            let (Some(start), Some(end)) = (src.start_id, src.end_id) else {
                anyhow::bail!("live source needs source.start_id and source.end_id");
            };
            let http = HttpAdSource::from_env(&src.base_url, src.rate, src.retry())?;
            Ok((Box::new(http), start, end, format!("live:{}", src.base_url)))
        }
    }
}

/// Remote geocoder and the cache its answers go to. Without a configured
/// geocoder misses stay in memory so they never shadow a later real lookup.
pub fn geocoder_for<'s>(cfg: &Config, store: &'s Store) -> Result<(Arc<dyn RemoteGeocoder>, Box<dyn GeoCache + 's>), GeoError> {
    Ok(match &cfg.geo.geocoder_url {
        Some(url) => (Arc::new(HttpGeocoder::connect(url, cfg.geo.geocoder_rate)?), Box::new(store)),
        None => (Arc::new(NoGeocoder), Box::new(MemoryGeoCache::new())),
    })
}

/// Counts remote lookups passing through.
struct Counting<G> {
    inner: G,
    calls: std::sync::atomic::AtomicU64,
}

impl<G: RemoteGeocoder> RemoteGeocoder for Counting<G> {
    fn search(&self, query: &str) -> Result<Option<vacobs_core::geoloc::Located>, GeoError> {
        self.calls.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
        self.inner.search(query)
    }
}

/// Runs every stage for the configured source and writes results to the store.
pub fn run_pipeline(cfg: &Config) -> Result<PipelineSummary, PipelineError> {
    cfg.validate().stage(Stage::Config)?;
    let _lock = RunLock::acquire(&cfg.store).stage(Stage::Lock)?;
    let store = Store::open(&cfg.store).stage(Stage::Store)?;
    let table = data::lemmas(cfg.lemmas.as_deref()).stage(Stage::Config)?;
    let geo = GeoData::load(cfg.geo.counties.as_deref(), cfg.geo.gazetteer.as_deref(), cfg.geo.regions.as_deref())
        .stage(Stage::Config)?;

    let t = Instant::now();
    let (source, start, end, source_label) = open_source(cfg).stage(Stage::Ingest)?;
    let run_id = store.begin_run(&source_label).stage(Stage::Store)?;
    let records = fetch_range(source.as_ref(), start, end, cfg.source.window).stage(Stage::Ingest)?;
    let outcome = ingest_records(records, &cfg.blocklist(), cfg.collection_window().as_ref()).stage(Stage::Ingest)?;
    let report = outcome.report;
    let settled = store.settled_ids().stage(Stage::Store)?;
    let retained = outcome.ads.len() as u64;
    let ads: Vec<_> = outcome.ads.into_iter().filter(|a| !settled.contains(&a.ad_id)).collect();
    let skipped_existing = retained - ads.len() as u64;
    tracing::info!(?report, skipped_existing, elapsed_ms = t.elapsed().as_millis() as u64, "ingest");

    let t = Instant::now();
    let docs: Vec<Document> = ads.iter().map(|a| build_document(a, &table)).collect();
    store.upsert_documents(&docs).stage(Stage::Store)?;
    tracing::info!(documents = docs.len(), elapsed_ms = t.elapsed().as_millis() as u64, "textprep");

    let t = Instant::now();
    let (model, model_trained) = if docs.is_empty() {
        (None, false)
    } else if cfg.model.exists() {
        (Some(Model::load(&cfg.model).stage(Stage::Classify)?), false)
    } else {
        let mut corpus = store.documents(&QueryFilter::all()).stage(Stage::Store)?;
        let fresh: std::collections::HashSet<u64> = docs.iter().map(|d| d.ad_id).collect();
        corpus.retain(|d| !fresh.contains(&d.ad_id));
        corpus.extend(docs.iter().cloned());
        let (m, trained) = load_or_train(cfg, &corpus, &table).stage(Stage::Classify)?;
        (Some(m), trained)
    };
    let labels: Vec<String> = match &model {
        Some(m) => docs.iter().map(|d| m.classify(d).to_string()).collect(),
        None => Vec::new(),
    };
    let mut label_counts = BTreeMap::new();
    for l in &labels {
        *label_counts.entry(l.clone()).or_insert(0) += 1;
    }
    tracing::info!(labelled = labels.len(), elapsed_ms = t.elapsed().as_millis() as u64, "classify");

    let t = Instant::now();
    let (remote, cache) = geocoder_for(cfg, &store).stage(Stage::Geoloc)?;
    let remote = Counting {
        inner: remote,
        calls: Default::default(),
    };
    let mut geo_summary = GeoSummary::default();
    let mut rows = Vec::with_capacity(ads.len());
    for (ad, label) in ads.into_iter().zip(labels) {
        let res = match resolve(&ad.location_name, &geo.counties, &geo.gazetteer, &remote, cache.as_ref()) {
            Ok(r) => Some(r),
            Err(GeoError::EmptyLocation) => None,
            Err(GeoError::GeocoderUnavailable(reason)) => {
                tracing::warn!(location = %ad.location_name, %reason, "geocoder unavailable");
                Some(GeoResolution::transient_failure())
            }
            Err(e) => return Err(e).stage(Stage::Geoloc),
        };
        let region = res.as_ref().and_then(|r| assign_region(r, &geo.regions, &geo.county_map));
        if let Some(r) = &res {
            geo_summary.attempted += 1;
            geo_summary.resolved += r.is_resolved() as u64;
            geo_summary.transient += r.is_transient() as u64;
        }
        geo_summary.assigned_region += region.is_some() as u64;
        rows.push(AdRecordRow {
            label,
            region_code: region.map(|r| r.code.clone()),
            resolution_kind: res.as_ref().map_or(GeoKind::Unresolved, |r| r.kind()),
            geo_transient: res.as_ref().is_some_and(|r| r.is_transient()),
            ingest_run_id: run_id,
            ad,
        });
    }
    geo_summary.remote_calls = remote.calls.load(std::sync::atomic::Ordering::Relaxed);
    geo_summary.coverage = coverage_from_counts(geo_summary.resolved, geo_summary.attempted).ok();
    tracing::info!(?geo_summary, elapsed_ms = t.elapsed().as_millis() as u64, "geoloc");

    let stored = store.upsert_ads(&rows).stage(Stage::Store)? as u64;
    store.finish_run(run_id, &report).stage(Stage::Store)?;
    Ok(PipelineSummary {
        run_id,
        ingest: report,
        skipped_existing,
        stored,
        model_trained,
        labels: label_counts,
        geo: geo_summary,
    })
}
