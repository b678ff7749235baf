use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::Context;
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use vacobs_core::analytics::CategoryAxis;
use vacobs_core::classify::{SeedCorpus, TermScope};
use vacobs_core::geoloc::{assign_region, resolve};
use vacobs_core::ingest::{fetch_range, ingest_records, FixtureSource, HttpAdSource, JobAd};
use vacobs_core::store::{QueryFilter, Store};
use vacobs_core::textprep::{build_document, build_document_from_text, Document};
use vacobs_core::Model;
use vacobs_service::api::{self, AppState};
use vacobs_service::config::{Config, Overrides, SourceKind};
use vacobs_service::data::{self, GeoData};
use vacobs_service::mock_geocoder::{self, MockState};
use vacobs_service::pipeline::{self, run_pipeline};
use vacobs_service::query::{self, Params, DEFAULT_BIN_WIDTH, DEFAULT_LIMIT, DEFAULT_TOP_TERMS};
use vacobs_service::synth::{self, SynthSpec};

#[derive(Parser)]
#[command(name = "vacobs", version, about = "Job-ad sector classification, geolocation and analytics")]
struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: OverrideArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct OverrideArgs {
    #[arg(long, global = true)]
    store: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Seed phrase file (TOML, label = [phrases]).
    #[arg(long, global = true)]
    seeds: Option<PathBuf>,
    #[arg(long, global = true)]
    lemmas: Option<PathBuf>,
    /// Replay ads from an NDJSON fixture.
    #[arg(long, global = true)]
    fixture: Option<PathBuf>,
    /// Fetch from the live job board.
    #[arg(long, global = true)]
    live: bool,
    #[arg(long, global = true)]
    base_url: Option<String>,
    #[arg(long, global = true)]
    start_id: Option<u64>,
    #[arg(long, global = true)]
    end_id: Option<u64>,
    /// Source requests per second.
    #[arg(long, global = true)]
    rate: Option<f64>,
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    collection_start: Option<NaiveDate>,
    #[arg(long, global = true)]
    collection_end: Option<NaiveDate>,
    /// Extra employer to treat as a cross-poster (repeatable).
    #[arg(long, global = true)]
    block: Vec<String>,
    #[arg(long, global = true)]
    counties: Option<PathBuf>,
    #[arg(long, global = true)]
    gazetteer: Option<PathBuf>,
    #[arg(long, global = true)]
    regions: Option<PathBuf>,
    #[arg(long, global = true)]
    geocoder_url: Option<String>,
    #[arg(long, global = true)]
    geocoder_rate: Option<f64>,
    #[arg(long, global = true)]
    other_threshold: Option<f64>,
    #[arg(long, global = true)]
    rng_seed: Option<u64>,
}

impl OverrideArgs {
    fn to_overrides(&self, bind: Option<String>) -> Overrides {
        Overrides {
            store: self.store.clone(),
            model: self.model.clone(),
            seeds: self.seeds.clone(),
            lemmas: self.lemmas.clone(),
            bind,
            fixture: self.fixture.clone(),
            live: self.live,
            base_url: self.base_url.clone(),
            start_id: self.start_id,
            end_id: self.end_id,
            rate: self.rate,
            window: self.window,
            collection_start: self.collection_start,
            collection_end: self.collection_end,
            block: self.block.clone(),
            counties: self.counties.clone(),
            gazetteer: self.gazetteer.clone(),
            regions: self.regions.clone(),
            geocoder_url: self.geocoder_url.clone(),
            geocoder_rate: self.geocoder_rate,
            other_threshold: self.other_threshold,
            rng_seed: self.rng_seed,
        }
    }
}

/// Query filter flags; each list flag is repeatable and accepts commas.
#[derive(Args, Default)]
struct FilterArgs {
    #[arg(long)]
    label: Vec<String>,
    /// Region code or name.
    #[arg(long)]
    region: Vec<String>,
    /// First day, inclusive.
    #[arg(long)]
    from: Option<String>,
    /// Last day, exclusive.
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    contract: Vec<String>,
    #[arg(long)]
    mode: Vec<String>,
    #[arg(long)]
    exclude_employer: Vec<String>,
}

impl FilterArgs {
    fn params(&self) -> anyhow::Result<Params> {
        let mut pairs = Vec::new();
        let mut push = |k: &str, vs: &[String]| pairs.extend(vs.iter().map(|v| (k.to_string(), v.clone())));
        push("label", &self.label);
        push("region", &self.region);
        push("from", self.from.as_slice());
        push("to", self.to.as_slice());
        push("contract", &self.contract);
        push("mode", &self.mode);
        push("exclude_employer", &self.exclude_employer);
        Ok(Params::parse(&pairs, &[])?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Fetch, parse and filter ads; writes retained ads as NDJSON.
    Ingest {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Select seed documents by title phrase and mine `other` exemplars.
    BuildSeeds {
        /// Ads NDJSON written by `ingest`; defaults to the store's documents.
        #[arg(long)]
        ads: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the sector model from a seed corpus and report held-out metrics.
    Train {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Label one title/description, or every ad in an NDJSON file.
    Classify {
        #[arg(long, conflicts_with = "ads")]
        title: Option<String>,
        #[arg(long, default_value = "", requires = "title")]
        description: String,
        #[arg(long)]
        ads: Option<PathBuf>,
    },
    /// Resolve location names through the cascade and assign regions.
    Geocode { names: Vec<String> },
    /// Daily ad counts as CSV.
    Series {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deficit and salary/contract/mode tests between two periods.
    Compare {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        a_from: NaiveDate,
        #[arg(long)]
        a_to: NaiveDate,
        #[arg(long)]
        b_from: NaiveDate,
        #[arg(long)]
        b_to: NaiveDate,
    },
    SalaryStats {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = DEFAULT_BIN_WIDTH)]
        bin_width: f64,
    },
    Proportions {
        #[command(flatten)]
        filter: FilterArgs,
        /// `contract` or `mode`.
        #[arg(long, default_value = "contract")]
        axis: String,
    },
    TopTerms {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = DEFAULT_TOP_TERMS)]
        n: usize,
        /// `full` or `titles`.
        #[arg(long, default_value = "full")]
        scope: String,
    },
    /// Matching stored ads as JSON, paged.
    Ads {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        #[arg(long, default_value_t = DEFAULT_LIMIT)]
        limit: usize,
    },
    /// Serve the read-only /v1 API.
    Serve {
        #[arg(long)]
        bind: Option<String>,
        #[arg(long, default_value_t = 4)]
        handles: usize,
    },
    /// Run every stage and store the results.
    Pipeline,
    /// Write stored rows as NDJSON.
    Export {
        #[command(flatten)]
        filter: FilterArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Load rows from NDJSON written by `export`.
    Import {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Write a synthetic NDJSON fixture and print its composition.
    SynthFixture {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1000)]
        ads: usize,
        #[arg(long, default_value_t = 20190111)]
        seed: u64,
        #[arg(long, default_value_t = 28)]
        days: u32,
    },
    /// Serve a local geocoder answering from a name/lat/lon TSV.
    MockGeocoder {
        #[arg(long, default_value = "127.0.0.1:8090")]
        bind: String,
        /// Defaults to the bundled gazetteer.
        #[arg(long)]
        entries: Option<PathBuf>,
    },
}

fn print_json<T: Serialize>(v: &T) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

fn read_ads(path: &Path) -> anyhow::Result<Vec<JobAd>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    BufReader::new(f)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

fn geo(cfg: &Config) -> anyhow::Result<GeoData> {
    Ok(GeoData::load(cfg.geo.counties.as_deref(), cfg.geo.gazetteer.as_deref(), cfg.geo.regions.as_deref())?)
}

fn read_store(cfg: &Config) -> anyhow::Result<Store> {
    Store::open_read_only(&cfg.store).with_context(|| format!("opening store {}", cfg.store.display()))
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let bind = match &cli.command {
        Command::Serve { bind, .. } => bind.clone(),
        _ => None,
    };
    let cfg = Config::resolve(cli.config.as_deref(), &cli.overrides.to_overrides(bind))?;

    match cli.command {
        Command::Ingest { out } => {
            let (lo, hi, report, ads) = match cfg.source.kind {
                SourceKind::Fixture => {
                    let path = cfg.source.fixture.as_ref().context("no fixture configured")?;
                    let src = FixtureSource::open(path)?;
                    let (lo, hi) = src.id_span().unwrap_or((0, 0));
                    let (lo, hi) = (cfg.source.start_id.unwrap_or(lo), cfg.source.end_id.unwrap_or(hi));
                    let o = ingest_records(fetch_range(&src, lo, hi, cfg.source.window)?, &cfg.blocklist(), cfg.collection_window().as_ref())?;
                    (lo, hi, o.report, o.ads)
                }
                SourceKind::Live => {
                    let (lo, hi) = cfg.source.start_id.zip(cfg.source.end_id).context("live ingest needs --start-id and --end-id")?;
                    let src = HttpAdSource::from_env(&cfg.source.base_url, cfg.source.rate, cfg.source.retry())?;
                    let o = ingest_records(fetch_range(&src, lo, hi, cfg.source.window)?, &cfg.blocklist(), cfg.collection_window().as_ref())?;
                    (lo, hi, o.report, o.ads)
                }
            };
            let mut w = output(out.as_deref())?;
            for ad in &ads {
                serde_json::to_writer(&mut w, ad)?;
                writeln!(w)?;
            }
            w.flush()?;
            tracing::info!(start_id = lo, end_id = hi, ?report, "ingest finished");
            eprintln!("{}", serde_json::to_string(&report)?);
        }
        Command::BuildSeeds { ads, out } => {
            let table = data::lemmas(cfg.lemmas.as_deref())?;
            let docs: Vec<Document> = match ads {
                Some(p) => read_ads(&p)?.iter().map(|a| build_document(a, &table)).collect(),
                None => read_store(&cfg)?.documents(&QueryFilter::all())?,
            };
            let phrases = data::seeds(cfg.seeds.as_deref())?;
            let built = pipeline::build_seeds(&docs, &phrases, &table, cfg.classify.other_threshold, cfg.classify.other_limit)?;
            std::fs::write(&out, serde_json::to_string(&built.corpus)?)?;
            let sizes: std::collections::BTreeMap<&String, usize> = built.corpus.sets.iter().map(|(l, d)| (l, d.len())).collect();
            print_json(&serde_json::json!({
                "sets": sizes,
                "missing_labels": built.corpus.missing_labels(),
                "ambiguous": built.ambiguous,
                "unmatched": built.unmatched,
            }))?;
        }
        Command::Train { corpus } => {
            let text = std::fs::read_to_string(&corpus).with_context(|| format!("reading {}", corpus.display()))?;
            let corpus: SeedCorpus = SeedCorpus::new(serde_json::from_str::<SeedCorpus>(&text)?.sets)?;
            let trained = pipeline::train(&corpus, &cfg)?;
            trained.model.save(&cfg.model)?;
            print_json(&serde_json::json!({
                "model": cfg.model,
                "train_size": trained.model.header.train_size,
                "test_size": trained.model.header.test_size,
                "metrics": trained.metrics,
            }))?;
        }
        Command::Classify { title, description, ads } => {
            let model = Model::load(&cfg.model)?;
            let table = data::lemmas(cfg.lemmas.as_deref())?;
            match (title, ads) {
                (Some(t), _) => println!("{}", model.classify(&build_document_from_text(0, &t, &description, &table))),
                (None, Some(p)) => {
                    let mut w = output(None)?;
                    for ad in read_ads(&p)? {
                        writeln!(w, "{}\t{}", ad.ad_id, model.classify(&build_document(&ad, &table)))?;
                    }
                    w.flush()?;
                }
                (None, None) => anyhow::bail!("give --title or --ads"),
            }
        }
        Command::Geocode { names } => {
            let geo = geo(&cfg)?;
            let store = Store::open(&cfg.store)?;
            let (remote, cache) = pipeline::geocoder_for(&cfg, &store)?;
            for name in names {
                let res = resolve(&name, &geo.counties, &geo.gazetteer, remote.as_ref(), cache.as_ref())?;
                let region = assign_region(&res, &geo.regions, &geo.county_map).map(|r| r.code.clone());
                print_json(&serde_json::json!({ "name": name, "resolution": res, "region": region }))?;
            }
        }
        Command::Series { filter, format, out } => {
            let body = query::series(&read_store(&cfg)?, &geo(&cfg)?, &filter.params()?.filter)?;
            let mut w = output(out.as_deref())?;
            match format.as_str() {
                "csv" => w.write_all(body.to_csv().as_bytes())?,
                "json" => {
                    serde_json::to_writer(&mut w, &body)?;
                    writeln!(w)?;
                }
                other => anyhow::bail!("unknown format {other:?}"),
            }
            w.flush()?;
        }
        Command::Compare { filter, a_from, a_to, b_from, b_to } => {
            let body = query::compare(&read_store(&cfg)?, &geo(&cfg)?, &filter.params()?.filter, (a_from, a_to), (b_from, b_to))?;
            print_json(&body)?;
        }
        Command::SalaryStats { filter, bin_width } => {
            print_json(&query::salary(&read_store(&cfg)?, &geo(&cfg)?, &filter.params()?.filter, bin_width)?)?;
        }
        Command::Proportions { filter, axis } => {
            let axis = CategoryAxis::parse(&axis).with_context(|| format!("unknown axis {axis:?}"))?;
            print_json(&query::proportions(&read_store(&cfg)?, &geo(&cfg)?, &filter.params()?.filter, axis)?)?;
        }
        Command::TopTerms { filter, n, scope } => {
            let scope = TermScope::parse(&scope).with_context(|| format!("unknown scope {scope:?}"))?;
            print_json(&query::top_terms_body(&read_store(&cfg)?, &geo(&cfg)?, &filter.params()?.filter, n, scope)?)?;
        }
        Command::Ads { filter, offset, limit } => {
            print_json(&query::ads(&read_store(&cfg)?, &geo(&cfg)?, &filter.params()?.filter, offset, limit)?)?;
        }
        Command::Serve { handles, .. } => {
            let state = Arc::new(AppState::open(&cfg.store, handles, geo(&cfg)?)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(api::serve(state, &cfg.bind, &cfg.cors_origins))?;
        }
        Command::Pipeline => print_json(&run_pipeline(&cfg)?)?,
        Command::Export { filter, out } => {
            let geo = geo(&cfg)?;
            let mut w = output(out.as_deref())?;
            let n = read_store(&cfg)?.export_ndjson(&filter.params()?.filter.query_filter(&geo), &mut w)?;
            w.flush()?;
            eprintln!("exported {n} rows");
        }
        Command::Import { input } => {
            let f = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
            let n = Store::open(&cfg.store)?.import_ndjson(BufReader::new(f))?;
            eprintln!("imported {n} rows");
        }
        Command::SynthFixture { out, ads, seed, days } => {
            let spec = SynthSpec { ads, seed, days, ..Default::default() };
            let (records, comp) = synth::generate(&spec);
            synth::write_ndjson(&records, BufWriter::new(File::create(&out)?))?;
            print_json(&comp)?;
        }
        Command::MockGeocoder { bind, entries } => {
            let text = match entries {
                Some(p) => std::fs::read_to_string(&p)?,
                None => data::GAZETTEER_TSV.to_string(),
            };
            let state = Arc::new(MockState::from_tsv(&text)?);
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind).await?;
                tracing::info!(addr = %listener.local_addr()?, "mock geocoder listening");
                axum::serve(listener, mock_geocoder::router(state)).await?;
                anyhow::Ok(())
            })?;
        }
    }
    Ok(())
}
