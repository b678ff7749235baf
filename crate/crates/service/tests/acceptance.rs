//! Acceptance criteria 1-9. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use axum::body::{to_bytes, Body};
use axum::http::{Request, StatusCode};
use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use tower::ServiceExt;
use vacobs_core::analytics::special::{chi2_cdf, kolmogorov_cdf, student_t_cdf};
use vacobs_core::analytics::{
    chi_square_test, compare_counts, daily_counts, ks_statistic, ks_two_sample, period_deficit, welch_t_test,
    CategoryAxis,
};
use vacobs_core::classify::{
    cosine_similarity, detect_other, fit_tfidf, is_sector_label, stratified_split, train_tree, SectorModel,
    SeedCentroids, SeedCorpus, SparseVector, TrainConfig, TreeParams, OTHER, SECTOR_LABELS,
};
use vacobs_core::geoloc::{
    assign_region, coverage, is_london_code, normalize_location, resolve, GeoCache, GeoError, GeoResolution,
    Located, RemoteGeocoder, LONDON_CODE,
};
use vacobs_core::ingest::{ContractType, EmploymentMode, JobAd};
use vacobs_core::store::{AdRecordRow, QueryFilter, Store};
use vacobs_core::textprep::Document;
use vacobs_service::api::{router, AppState};
use vacobs_service::data::{GeoData, GAZETTEER_TSV};
use vacobs_service::query::{self, FilterParams};
use vacobs_service::synth::SynthSpec;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let e = start.elapsed();
    ensure(e < limit, || format!("took {e:?}, limit {limit:?}"))?;
    Ok(e)
}

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

fn c1_deficit() -> Check {
    let t = Instant::now();
    let a = (d(2019, 3, 16), d(2020, 1, 10));
    let b = (d(2020, 3, 16), d(2021, 1, 10));
    let first = compare_counts(a, 2166551, b, 1245180).map_err(|e| e.to_string())?;
    let second = compare_counts(a, 2691648, b, 1700687).map_err(|e| e.to_string())?;
    ensure((first.deficit_fraction - 0.425).abs() <= 0.001, || format!("first {}", first.deficit_fraction))?;
    ensure((second.deficit_fraction - 0.368).abs() <= 0.001, || format!("second {}", second.deficit_fraction))?;

    // The store path counts rows and then applies the same arithmetic.
    let store = Store::in_memory().map_err(|e| e.to_string())?;
    let rows: Vec<AdRecordRow> = (0..300u64)
        .map(|i| row(i, if i < 173 { d(2019, 6, 1) } else { d(2020, 6, 1) }, ContractType::Permanent, EmploymentMode::FullTime))
        .collect();
    store.upsert_ads(&rows).map_err(|e| e.to_string())?;
    let via_store = period_deficit(&store, &QueryFilter::all(), a, b).map_err(|e| e.to_string())?;
    let direct = compare_counts(a, 173, b, 127).map_err(|e| e.to_string())?;
    ensure(via_store == direct, || format!("{via_store:?} vs {direct:?}"))?;
    let e = within(t, Duration::from_secs(1))?;
    Ok(format!(
        "deficits {:.4} and {:.4} in {e:?}",
        first.deficit_fraction, second.deficit_fraction
    ))
}

/// Per-class vocabularies: private words plus a few drawn from a shared pool.
struct SynthVocab {
    own: BTreeMap<String, Vec<String>>,
    shared: BTreeMap<String, Vec<String>>,
}

impl SynthVocab {
    fn new(labels: &[&str], own: usize, shared: usize, rng: &mut ChaCha8Rng) -> Self {
        let pool: Vec<String> = (0..30).map(|i| format!("common{i}")).collect();
        let mut v = SynthVocab {
            own: BTreeMap::new(),
            shared: BTreeMap::new(),
        };
        for l in labels {
            v.own.insert(l.to_string(), (0..own).map(|j| format!("{l}x{j}")).collect());
            v.shared.insert(l.to_string(), pool.choose_multiple(rng, shared).cloned().collect());
        }
        v
    }

    fn max_overlap(&self) -> f64 {
        let sets: Vec<HashSet<&String>> =
            self.own.keys().map(|l| self.own[l].iter().chain(&self.shared[l]).collect()).collect();
        let mut worst: f64 = 0.0;
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let inter = sets[i].intersection(&sets[j]).count() as f64;
                worst = worst.max(inter / sets[i].len().min(sets[j].len()) as f64);
            }
        }
        worst
    }

    fn doc(&self, id: u64, label: &str, rng: &mut ChaCha8Rng) -> Document {
        let n = rng.gen_range(10..20);
        let toks = (0..n)
            .map(|_| {
                let from = if rng.gen_bool(0.7) { &self.own[label] } else { &self.shared[label] };
                from.choose(rng).unwrap().clone()
            })
            .collect();
        Document::new(id, toks)
    }
}

fn c2_classifier() -> Check {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20190111);
    let vocab = SynthVocab::new(&SECTOR_LABELS, 14, 6, &mut rng);
    let overlap = vocab.max_overlap();
    ensure(overlap <= 0.30, || format!("vocabulary overlap {overlap}"))?;
    let mut sets = BTreeMap::new();
    let mut id = 0;
    for l in SECTOR_LABELS {
        let docs: Vec<Document> = (0..60)
            .map(|_| {
                id += 1;
                vocab.doc(id, l, &mut rng)
            })
            .collect();
        sets.insert(l.to_string(), docs);
    }
    ensure(sets.len() == 49 && sets.values().all(|s| s.len() >= 50), || "corpus shape".into())?;
    let corpus = SeedCorpus::new(sets.clone()).map_err(|e| e.to_string())?;
    let trained = SectorModel::<f64>::train(&corpus, TrainConfig::default()).map_err(|e| e.to_string())?;
    let m = &trained.metrics;
    ensure(m.subset_accuracy >= 0.90, || format!("subset accuracy {}", m.subset_accuracy))?;
    ensure(m.balanced_accuracy >= 0.85, || format!("balanced accuracy {}", m.balanced_accuracy))?;
    ensure(m.cohens_kappa >= 0.89, || format!("kappa {}", m.cohens_kappa))?;
    ensure(m.n as usize == 49 * 12, || format!("test size {}", m.n))?;

    let (train, _) = stratified_split(&sets, 0.2, 20190111);
    let tfidf = &trained.model.tfidf;
    let samples: Vec<(SparseVector<f64>, String)> = train.iter().map(|(d, l)| (tfidf.vectorize(d), l.clone())).collect();
    let mut by_vec: BTreeMap<String, &str> = BTreeMap::new();
    for (v, l) in &samples {
        let key = format!("{:?}", v.entries());
        ensure(*by_vec.entry(key).or_insert(l) == l.as_str(), || "training data has conflicts".into())?;
    }
    let tree = train_tree(&samples, TreeParams::default()).map_err(|e| e.to_string())?;
    let errors = samples.iter().filter(|(v, l)| tree.predict(v) != l).count();
    ensure(errors == 0, || format!("{errors} training errors"))?;
    let e = within(t, Duration::from_secs(60))?;
    Ok(format!(
        "subset {:.3}, balanced {:.3}, kappa {:.3}, overlap {:.2}, training errors 0, {e:?}",
        m.subset_accuracy, m.balanced_accuracy, m.cohens_kappa, overlap
    ))
}

fn c3_other_gate() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let named: Vec<&str> = SECTOR_LABELS.iter().copied().filter(|l| *l != OTHER).collect();
    let vocab = SynthVocab::new(&named, 14, 6, &mut rng);
    let mut id = 0u64;
    let mut next = || {
        id += 1;
        id
    };
    let seed_docs: BTreeMap<String, Vec<Document>> = named
        .iter()
        .map(|l| (l.to_string(), (0..20).map(|_| vocab.doc(next(), l, &mut rng)).collect()))
        .collect();
    let alien: Vec<String> = (0..200).map(|i| format!("alien{i}")).collect();
    let mut corpus = Vec::new();
    let mut disjoint = BTreeSet::new();
    for i in 0..2000 {
        let doc_id = next();
        if i % 20 == 7 {
            disjoint.insert(doc_id);
            let n = rng.gen_range(10..20);
            corpus.push(Document::new(doc_id, (0..n).map(|_| alien.choose(&mut rng).unwrap().clone()).collect()));
        } else {
            let l = named.choose(&mut rng).unwrap();
            corpus.push(vocab.doc(doc_id, l, &mut rng));
        }
    }
    ensure(disjoint.len() * 20 == corpus.len(), || "fixture is not 5% disjoint".into())?;
    let model = fit_tfidf(seed_docs.values().flatten().chain(&corpus)).map_err(|e| e.to_string())?;
    let seeds: BTreeMap<String, Vec<SparseVector<f64>>> = seed_docs
        .iter()
        .map(|(l, ds)| (l.clone(), ds.iter().map(|d| model.vectorize(d)).collect()))
        .collect();
    let vectors: Vec<(u64, SparseVector<f64>)> = corpus.iter().map(|d| (d.ad_id, model.vectorize(d))).collect();
    let gate = SeedCentroids::from_seeds(&seeds).map_err(|e| e.to_string())?;

    let flagged_at = |th: f64| -> Result<BTreeSet<u64>, String> {
        let mut out = BTreeSet::new();
        for (id, v) in &vectors {
            let literal = detect_other(v, &seeds, th).map_err(|e| e.to_string())?;
            ensure(literal == gate.is_other(v, th), || format!("gate routes disagree for {id} at {th}"))?;
            if literal {
                out.insert(*id);
            }
        }
        Ok(out)
    };
    let base = flagged_at(0.04)?;
    ensure(base == disjoint, || format!("flagged {} vs {} disjoint", base.len(), disjoint.len()))?;
    let mut worst = 0usize;
    for k in 0..=20 {
        let th = 0.03 + 0.001 * k as f64;
        let f = flagged_at(th)?;
        worst = worst.max(f.symmetric_difference(&base).count());
    }
    let frac = worst as f64 / corpus.len() as f64;
    ensure(frac < 0.02, || format!("flagged set moved by {frac}"))?;
    Ok(format!("{} of {} flagged at 0.04, max change over [0.03, 0.05] {:.4}", base.len(), corpus.len(), frac))
}

fn c4_tfidf_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let docs: Vec<Document> = (0..10_000u64)
        .map(|i| {
            let n = rng.gen_range(0..40);
            Document::new(i, (0..n).map(|_| format!("w{}", rng.gen_range(0..3000))).collect())
        })
        .collect();
    let model = fit_tfidf(&docs).map_err(|e| e.to_string())?;
    let vs: Vec<SparseVector<f64>> = docs.iter().map(|d| model.vectorize(d)).collect();
    let mut non_degenerate = 0;
    for v in &vs {
        if v.is_zero() {
            continue;
        }
        non_degenerate += 1;
        let n = v.norm();
        ensure((n - 1.0).abs() <= 1e-9, || format!("norm {n}"))?;
        let s = cosine_similarity(v, v);
        ensure((s - 1.0).abs() <= 1e-12, || format!("self similarity {s}"))?;
    }
    for _ in 0..20_000 {
        let (a, b) = (&vs[rng.gen_range(0..vs.len())], &vs[rng.gen_range(0..vs.len())]);
        let (x, y) = (cosine_similarity(a, b), cosine_similarity(b, a));
        ensure(x == y, || format!("asymmetric {x} {y}"))?;
    }
    Ok(format!("{non_degenerate} non-degenerate of 10000 vectors; 20000 pairs symmetric"))
}

type Log = Arc<Mutex<Vec<(&'static str, String)>>>;

struct TracedRemote {
    known: BTreeMap<String, (f64, f64)>,
    log: Log,
}

impl RemoteGeocoder for TracedRemote {
    fn search(&self, q: &str) -> Result<Option<Located>, GeoError> {
        self.log.lock().unwrap().push(("remote", q.to_string()));
        Ok(self.known.get(q).map(|&(lat, lon)| Located::Point { lat, lon }))
    }
}

struct TracedCache {
    inner: Store,
    log: Log,
}

impl GeoCache for TracedCache {
    fn get(&self, key: &str) -> Result<Option<Located>, GeoError> {
        self.log.lock().unwrap().push(("cache_get", key.to_string()));
        self.inner.get(key)
    }
    fn put(&self, key: &str, value: &Located) -> Result<(), GeoError> {
        self.log.lock().unwrap().push(("cache_put", key.to_string()));
        self.inner.put(key, value)
    }
}

fn c5_geo_cascade() -> Check {
    let geo = GeoData::bundled();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let counties: Vec<String> = geo.county_map.keys().cloned().collect::<BTreeSet<_>>().into_iter().take(40).collect();
    let towns: Vec<String> = GAZETTEER_TSV
        .lines()
        .filter(|l| !l.starts_with('#') && l.ends_with("GB"))
        .map(|l| l.split('\t').next().unwrap().to_string())
        .take(60)
        .collect();
    let mut known = BTreeMap::new();
    let mut remote_names = Vec::new();
    for i in 0..94 {
        let name = format!("Hamlet {i}");
        let (lat, lon) = if i % 10 == 0 {
            (rng.gen_range(51.46..51.55), rng.gen_range(-0.24..0.04))
        } else {
            (rng.gen_range(50.8..53.5), rng.gen_range(-2.8..0.2))
        };
        known.insert(normalize_location(&name), (lat, lon));
        remote_names.push(name);
    }
    // Names also known remotely must still stop at the earlier stages.
    known.insert(normalize_location(&counties[0]), (0.0, 0.0));
    known.insert(normalize_location(&towns[0]), (0.0, 0.0));
    let unresolvable: Vec<String> = (0..6).map(|i| format!("Atlantis {i}")).collect();
    let mut names: Vec<String> = counties.iter().chain(&towns).chain(&remote_names).chain(&unresolvable).cloned().collect();
    ensure(names.len() == 200, || format!("{} names", names.len()))?;
    names.shuffle(&mut rng);

    let log: Log = Default::default();
    let remote = TracedRemote { known, log: log.clone() };
    let cache = TracedCache {
        inner: Store::in_memory().map_err(|e| e.to_string())?,
        log: log.clone(),
    };
    let mut resolutions: Vec<GeoResolution> = Vec::new();
    for pass in 0..3 {
        for name in &names {
            log.lock().unwrap().clear();
            let res = resolve(name, &geo.counties, &geo.gazetteer, &remote, &cache).map_err(|e| e.to_string())?;
            let key = normalize_location(name);
            let trace: Vec<&str> = log.lock().unwrap().iter().map(|(s, _)| *s).collect();
            let staged_early = counties.contains(name) || towns.contains(name);
            let expected: &[&str] = match (staged_early, pass) {
                (true, _) => &[],
                (false, 0) => &["cache_get", "remote", "cache_put"],
                (false, _) => &["cache_get"],
            };
            ensure(trace == expected, || format!("{name} pass {pass}: {trace:?}"))?;
            ensure(log.lock().unwrap().iter().all(|(_, k)| *k == key), || "unnormalized key".into())?;
            if pass == 0 {
                resolutions.push(res);
            }
        }
    }
    let cov = coverage(&resolutions).map_err(|e| e.to_string())?;
    ensure(cov >= 0.97, || format!("coverage {cov}"))?;

    let codes: Vec<&str> = geo.regions.regions().iter().map(|r| r.code.as_str()).collect();
    ensure(codes.iter().filter(|c| is_london_code(c)).count() == 1 && codes.contains(&LONDON_CODE), || format!("{codes:?}"))?;
    let mut london = 0;
    for (name, res) in names.iter().zip(&resolutions) {
        let region = assign_region(res, &geo.regions, &geo.county_map);
        if let Some(r) = region {
            ensure(!is_london_code(&r.code) || r.code == LONDON_CODE, || format!("{name} -> {}", r.code))?;
            london += (r.code == LONDON_CODE) as usize;
        }
        if let Some((lat, lon)) = res.point() {
            let in_box = (51.46..51.55).contains(&lat) && (-0.24..0.04).contains(&lon);
            ensure(!in_box || region.map(|r| r.code.as_str()) == Some(LONDON_CODE), || format!("{name} not London"))?;
        }
    }
    ensure(london >= 10, || format!("only {london} London assignments"))?;
    Ok(format!("stage order traced over 3 passes, coverage {cov:.3}, {london} in {LONDON_CODE}, remote called once per name"))
}

const T_CDF: [(f64, f64, f64); 4] = [
    (-2.0, 3.0, 0.069662984279421588),
    (2.0, 5.0, 0.94903026058507082),
    (2.228, 10.0, 0.97499411409144432),
    (-4.0, 2.5, 0.019506487920659123),
];
const CHI2_CDF: [(f64, f64, f64); 3] = [
    (3.841, 1.0, 0.9499863162360433),
    (10.0, 5.0, 0.92476475385348782),
    (30.0, 25.5, 0.75449136751357743),
];
const KOLMOGOROV_CDF: [(f64, f64); 3] = [(0.5, 0.036054756335124906), (1.0, 0.73000032832264548), (1.358, 0.94997320266555301)];

fn c6_stats() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let xs: Vec<f64> = (0..200).map(|_| normal.sample(&mut rng)).collect();
    let w = welch_t_test(&xs, &xs).map_err(|e| e.to_string())?;
    let k = ks_two_sample(&xs, &xs).map_err(|e| e.to_string())?;
    let c = chi_square_test::<f64>(&[vec![12.0, 30.0, 8.0], vec![12.0, 30.0, 8.0]]).map_err(|e| e.to_string())?;
    for (name, p) in [("welch", w.p_value), ("ks", k.p_value), ("chi2", c.p_value)] {
        ensure(p == 1.0, || format!("{name} identical-sample p {p}"))?;
    }
    let chi = chi_square_test::<f64>(&[vec![10.0, 20.0], vec![20.0, 10.0]]).map_err(|e| e.to_string())?;
    ensure((chi.statistic - 6.67).abs() <= 0.01, || format!("chi2 {}", chi.statistic))?;

    let ys: Vec<f64> = (0..150).map(|_| normal.sample(&mut rng) * 1.3 + 0.2).collect();
    let base = ks_statistic(&xs, &ys);
    for _ in 0..100 {
        let (a, b, c) = (rng.gen_range(0.1..3.0), rng.gen_range(-5.0..5.0), rng.gen_range(0.05..0.8));
        let kind = rng.gen_range(0..4);
        let f = move |x: f64| match kind {
            0 => a * x + b,
            1 => (c * x).exp(),
            2 => x * x * x + a * x,
            _ => (c * x).atan() + b,
        };
        let tx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
        let ty: Vec<f64> = ys.iter().map(|&x| f(x)).collect();
        let dt = ks_statistic(&tx, &ty);
        ensure(dt == base, || format!("KS D moved from {base} to {dt} under transform {kind}"))?;
    }

    let shifted = Normal::new(0.5, 1.0).unwrap();
    let a: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
    let b: Vec<f64> = (0..10_000).map(|_| shifted.sample(&mut rng)).collect();
    let welch = welch_t_test(&a, &b).map_err(|e| e.to_string())?;
    ensure(welch.p_value < 1e-6, || format!("welch p {}", welch.p_value))?;

    let mut points = 0;
    for (t, df, want) in T_CDF {
        let got = student_t_cdf(t, df);
        ensure((got - want).abs() < 1e-8, || format!("t cdf({t}, {df}) = {got}"))?;
        points += 1;
    }
    for (x, kdf, want) in CHI2_CDF {
        let got = chi2_cdf(x, kdf);
        ensure((got - want).abs() < 1e-8, || format!("chi2 cdf({x}, {kdf}) = {got}"))?;
        points += 1;
    }
    for (l, want) in KOLMOGOROV_CDF {
        let got = kolmogorov_cdf(l);
        ensure((got - want).abs() < 1e-8, || format!("kolmogorov cdf({l}) = {got}"))?;
        points += 1;
    }
    Ok(format!(
        "identical p = 1, chi2 {:.4}, KS stable under 100 transforms, Welch p {:.2e}, {points} CDF points",
        chi.statistic, welch.p_value
    ))
}

fn row(id: u64, date: NaiveDate, contract: ContractType, mode: EmploymentMode) -> AdRecordRow {
    AdRecordRow {
        ad: JobAd {
            ad_id: id,
            title: "Retail assistant".into(),
            description: String::new(),
            employer: "Acme".into(),
            location_name: "Exeter".into(),
            posted_date: date,
            yearly_min_salary: None,
            yearly_max_salary: None,
            contract_type: contract,
            employment_mode: mode,
        },
        label: "retail".into(),
        region_code: Some("UKK".into()),
        resolution_kind: vacobs_core::geoloc::GeoKind::Point,
        geo_transient: false,
        ingest_run_id: 1,
    }
}

fn c7_proportions() -> Check {
    let store = Store::in_memory().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut contracts: Vec<ContractType> = [(ContractType::Temporary, 30), (ContractType::Permanent, 150), (ContractType::Contract, 20)]
        .iter()
        .flat_map(|&(c, n)| std::iter::repeat(c).take(n))
        .collect();
    let mut modes: Vec<EmploymentMode> = [(EmploymentMode::FullTime, 180), (EmploymentMode::PartTime, 10), (EmploymentMode::Both, 10)]
        .iter()
        .flat_map(|&(m, n)| std::iter::repeat(m).take(n))
        .collect();
    contracts.shuffle(&mut rng);
    modes.shuffle(&mut rng);
    let rows: Vec<AdRecordRow> = (0..200)
        .map(|i| row(i as u64, d(2020, 2, 1 + (i % 28) as u32), contracts[i], modes[i]))
        .collect();
    store.upsert_ads(&rows).map_err(|e| e.to_string())?;
    let geo = GeoData::bundled();
    let f = FilterParams::default();
    let c = query::proportions(&store, &geo, &f, CategoryAxis::Contract).map_err(|e| e.to_string())?;
    let m = query::proportions(&store, &geo, &f, CategoryAxis::Mode).map_err(|e| e.to_string())?;
    let cp = &c.distribution.proportions;
    let mp = &m.distribution.proportions;
    let want = [
        (cp["Temporary"], 0.15),
        (cp["Permanent"], 0.75),
        (cp["Contract"], 0.10),
        (mp["FullTime"], 0.90),
        (mp["PartTime"], 0.05),
        (mp["Both"], 0.05),
    ];
    for (got, w) in want {
        ensure(got == w, || format!("{got} != {w}"))?;
    }
    Ok("Temporary 0.15 / Permanent 0.75 / Contract 0.10; FullTime 0.90 / PartTime 0.05 / Both 0.05".into())
}

fn c8_end_to_end(dir: &std::path::Path) -> Result<(String, vacobs_service::config::Config), String> {
    let t = Instant::now();
    let (cfg, s, comp) = common::populated(dir, &SynthSpec::default());
    ensure(s.ingest.is_conserved(), || format!("{:?}", s.ingest))?;
    ensure(s.ingest.total_fetched == 1000, || "fetched count".into())?;
    ensure(comp.nulls > 0 && comp.blocked > 0 && comp.unresolvable > 0, || format!("{comp:?}"))?;
    ensure(s.ingest.null_records == comp.nulls && s.ingest.cross_posts_removed == comp.blocked, || format!("{:?}", s.ingest))?;
    let store = Store::open_read_only(&cfg.store).map_err(|e| e.to_string())?;
    let rows = store.query(&QueryFilter::all()).map_err(|e| e.to_string())?;
    ensure(rows.len() as u64 == s.ingest.retained, || "row count".into())?;
    ensure(rows.iter().all(|r| is_sector_label(&r.label)), || "label outside the sector set".into())?;

    let (lo, hi) = store.date_bounds(&QueryFilter::all()).map_err(|e| e.to_string())?.ok_or("empty store")?;
    let to = hi.succ_opt().unwrap();
    let total = daily_counts(&store, &QueryFilter::all(), lo, to).map_err(|e| e.to_string())?;
    let labels: BTreeSet<&str> = rows.iter().map(|r| r.label.as_str()).collect();
    let mut summed = vec![0u64; total.points.len()];
    for l in &labels {
        let s = daily_counts(&store, &QueryFilter::all().with_labels([*l]), lo, to).map_err(|e| e.to_string())?;
        for (acc, (_, c)) in summed.iter_mut().zip(&s.points) {
            *acc += c;
        }
    }
    let direct: Vec<u64> = total.points.iter().map(|p| p.1).collect();
    ensure(summed == direct, || "sector series do not sum to the total".into())?;
    let e = within(t, Duration::from_secs(120))?;
    Ok((
        format!(
            "{} fetched, {} nulls, {} blocked, {} stored over {} labels, partition exact over {} days, {e:?}",
            s.ingest.total_fetched,
            s.ingest.null_records,
            s.ingest.cross_posts_removed,
            rows.len(),
            labels.len(),
            direct.len()
        ),
        cfg,
    ))
}

fn c9_parity(cfg: &vacobs_service::config::Config) -> Check {
    let state = Arc::new(AppState::open(&cfg.store, 2, GeoData::bundled()).map_err(|e| e.to_string())?);
    let app = router(state, &[]);
    let rt = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let label_pool = ["nurse", "teacher", "software", "data", "retail", "care", "hgv", "other", "astronaut"];
    let region_pool = ["South West", "UKK", "UKI", "Greater London", "UKD", "Scotland", "UKL"];
    let dir = cfg.store.parent().unwrap();
    let mut non_empty = 0;
    for i in 0..20 {
        let mut args: Vec<(String, String)> = Vec::new();
        for _ in 0..rng.gen_range(0..3) {
            args.push(("label".into(), label_pool.choose(&mut rng).unwrap().to_string()));
        }
        for _ in 0..rng.gen_range(0..2) {
            args.push(("region".into(), region_pool.choose(&mut rng).unwrap().to_string()));
        }
        let start = d(2020, 1, 6) + chrono::Duration::days(rng.gen_range(-3..20));
        if rng.gen_bool(0.7) {
            args.push(("from".into(), start.to_string()));
        }
        if rng.gen_bool(0.7) {
            args.push(("to".into(), (start + chrono::Duration::days(rng.gen_range(0..15))).to_string()));
        }
        if rng.gen_bool(0.3) {
            args.push(("contract".into(), ["temporary", "permanent", "contract"].choose(&mut rng).unwrap().to_string()));
        }
        if rng.gen_bool(0.3) {
            args.push(("mode".into(), ["full-time", "part-time", "both"].choose(&mut rng).unwrap().to_string()));
        }
        let qs: Vec<String> = args.iter().map(|(k, v)| format!("{k}={}", v.replace(' ', "%20"))).collect();
        let uri = format!("/v1/series?{}", qs.join("&"));
        let (status, body) = rt.block_on(async {
            let resp = app.clone().oneshot(Request::get(&uri).body(Body::empty()).unwrap()).await.unwrap();
            let status = resp.status();
            (status, to_bytes(resp.into_body(), usize::MAX).await.unwrap())
        });
        ensure(status == StatusCode::OK, || format!("{uri}: {status}"))?;
        let json: serde_json::Value = serde_json::from_slice(&body).map_err(|e| e.to_string())?;
        let mut api_csv = String::from("date,count\n");
        for p in json["points"].as_array().ok_or("no points")? {
            api_csv.push_str(&format!("{},{}\n", p["date"].as_str().unwrap(), p["count"]));
        }
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_vacobs"));
        cmd.current_dir(dir).env("RUST_LOG", "warn").arg("--store").arg(&cfg.store).arg("series");
        for (k, v) in &args {
            cmd.arg(format!("--{k}")).arg(v);
        }
        let out = cmd.output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
        let cli_csv = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
        ensure(cli_csv == api_csv, || format!("filter {i} {uri}: CLI and API differ"))?;
        non_empty += (json["total"].as_u64().unwrap_or(0) > 0) as usize;
    }
    ensure(non_empty >= 5, || format!("only {non_empty} filters matched any ads"))?;
    Ok(format!("20 randomized filters ({non_empty} non-empty): API series bodies equal CLI CSV"))
}

fn run(id: u8, name: &str, f: impl FnOnce() -> Check) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    match &outcome {
        Ok(detail) => println!("PASS criterion {id} ({name}): {detail}"),
        Err(why) => println!("FAIL criterion {id} ({name}): {why}"),
    }
    outcome.is_ok()
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    ok &= run(1, "deficit arithmetic", c1_deficit);
    ok &= run(2, "classifier suite", c2_classifier);
    ok &= run(3, "other gate", c3_other_gate);
    ok &= run(4, "tf-idf and cosine invariants", c4_tfidf_invariants);
    ok &= run(5, "geo cascade", c5_geo_cascade);
    ok &= run(6, "statistics oracles", c6_stats);
    ok &= run(7, "proportions fixture", c7_proportions);
    let mut pipeline_cfg = None;
    ok &= run(8, "end-to-end pipeline", || {
        let (detail, cfg) = c8_end_to_end(dir.path())?;
        pipeline_cfg = Some(cfg);
        Ok(detail)
    });
    ok &= run(9, "API/CLI parity", || match &pipeline_cfg {
        Some(cfg) => c9_parity(cfg),
        None => Err("needs the criterion 8 store".into()),
    });
    if !ok {
        std::process::exit(1);
    }
}
