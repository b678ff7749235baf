use std::collections::BTreeMap;

use chrono::NaiveDate;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vacobs_core::analytics::special::{chi2_cdf, kolmogorov_cdf, kolmogorov_sf, student_t_cdf};
use vacobs_core::analytics::*;
use vacobs_core::geoloc::{GeoKind, RegionSet};
use vacobs_core::ingest::{ContractType, EmploymentMode, JobAd};
use vacobs_core::store::{AdRecordRow, QueryFilter, Store};

// Reference values computed with mpmath at 30 significant digits.
const T_CDF: [(f64, f64, f64); 10] = [
    (0.0, 1.0, 0.5),
    (1.0, 1.0, 0.75),
    (-2.0, 3.0, 0.069662984279421588),
    (2.0, 5.0, 0.94903026058507082),
    (0.5, 10.0, 0.68605319712851353),
    (-1.5, 7.5, 0.087240285293232117),
    (2.228, 10.0, 0.97499411409144432),
    (3.0, 30.0, 0.99730501796717403),
    (1.96, 1000.0, 0.97486340752212564),
    (-4.0, 2.5, 0.019506487920659123),
];

const CHI2_CDF: [(f64, f64, f64); 10] = [
    (0.5, 1.0, 0.52049987781304654),
    (1.0, 1.0, 0.6826894921370859),
    (3.841, 1.0, 0.9499863162360433),
    (2.0, 2.0, 0.63212055882855768),
    (5.991, 2.0, 0.94998838497342091),
    (4.0, 3.0, 0.73853587005088938),
    (10.0, 5.0, 0.92476475385348782),
    (0.1, 4.0, 0.0012091042742502906),
    (20.0, 10.0, 0.97074731192303893),
    (30.0, 25.5, 0.75449136751357743),
];

const KOLMOGOROV_CDF: [(f64, f64); 10] = [
    (0.3, 9.3058013345666228e-6),
    (0.4, 0.0028076732227017354),
    (0.5, 0.036054756335124906),
    (0.6, 0.13571722094939567),
    (0.8, 0.45585758842580192),
    (1.0, 0.73000032832264548),
    (1.2, 0.88775033332927502),
    (1.358, 0.94997320266555301),
    (1.628, 0.99002447756881894),
    (2.0, 0.9993290747442203),
];

#[test]
fn cdfs_match_reference_tables() {
    for (t, df, want) in T_CDF {
        let got = student_t_cdf(t, df);
        assert!((got - want).abs() < 1e-8, "t={t} df={df}: {got} vs {want}");
    }
    for (x, k, want) in CHI2_CDF {
        let got = chi2_cdf(x, k);
        assert!((got - want).abs() < 1e-8, "x={x} k={k}: {got} vs {want}");
    }
    for (l, want) in KOLMOGOROV_CDF {
        let got = kolmogorov_cdf(l);
        assert!((got - want).abs() < 1e-8, "lambda={l}: {got} vs {want}");
        assert!((kolmogorov_sf(l) - (1.0 - want)).abs() < 1e-8);
    }
}

// Expected values below were produced with scipy.stats.
#[test]
fn chi_square_reference_tables() {
    let r = chi_square_test::<f64>(&[vec![10.0, 20.0], vec![20.0, 10.0]]).unwrap();
    assert!((r.statistic - 6.666666666666667).abs() < 1e-9);
    assert!((r.p_value - 0.009823274507519235).abs() < 1e-9);
    assert_eq!(r.df, Some(1.0));
    let r = chi_square_test::<f64>(&[vec![12.0, 5.0, 9.0], vec![7.0, 14.0, 3.0]]).unwrap();
    assert!((r.statistic - 8.512567476383268).abs() < 1e-9);
    assert!((r.p_value - 0.014174882222918836).abs() < 1e-9);
    assert_eq!(r.df, Some(2.0));
}

#[test]
fn chi_square_by_hand() {
    // Row and column sums are all 30, so every expected count is 15.
    let hand: f64 = [10.0f64, 20.0, 20.0, 10.0].iter().map(|o| (o - 15.0).powi(2) / 15.0).sum();
    let r = chi_square_test::<f64>(&[vec![10.0, 20.0], vec![20.0, 10.0]]).unwrap();
    assert!((r.statistic - hand).abs() < 1e-12);
    assert!((r.statistic - 6.67).abs() < 0.01);
}

#[test]
fn welch_reference_samples() {
    let r = welch_t_test::<f64>(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 4.0, 6.0, 8.0, 10.0, 12.0]).unwrap();
    assert!((r.statistic - -2.3763541031440183).abs() < 1e-9);
    assert!((r.p_value - 0.04928433820673049).abs() < 1e-9);
    assert!((r.df.unwrap() - 6.972255729794934).abs() < 1e-9);
    let r = welch_t_test::<f64>(&[20.1, 22.3, 19.8, 25.0], &[18.0, 17.5, 21.0, 16.2, 19.9]).unwrap();
    assert!((r.statistic - 2.2185808294322333).abs() < 1e-9);
    assert!((r.p_value - 0.07050793854603077).abs() < 1e-9);
    assert!((r.df.unwrap() - 5.720357738902392).abs() < 1e-9);
}

#[test]
fn ks_reference_sample() {
    let a: [f64; 5] = [0.1, 0.4, 0.7, 1.5, 2.0];
    let b = [0.3, 0.9, 1.1, 1.8, 2.5, 3.0, 3.3];
    let r = ks_two_sample(&a, &b).unwrap();
    assert!((r.statistic - 0.45714285714285713).abs() < 1e-12);
    assert!((r.p_value - 0.57580528921741007).abs() < 1e-8);
    assert_eq!(ks_statistic::<f64>(&[0.1, 0.5, 0.9], &[10.0, 10.5]), 1.0);
}

#[test]
fn welch_detects_shift_in_large_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let a: Vec<f64> = Normal::new(0.0, 1.0).unwrap().sample_iter(&mut rng).take(10_000).collect();
    let b: Vec<f64> = Normal::new(0.5, 1.0).unwrap().sample_iter(&mut rng).take(10_000).collect();
    let r = welch_t_test(&a, &b).unwrap();
    assert!(r.p_value < 1e-6);
    let same = welch_t_test(&a, &a).unwrap();
    assert_eq!((same.statistic, same.p_value), (0.0, 1.0));
}

#[test]
fn paper_deficits() {
    let d = deficit(2_166_551, 1_245_180).unwrap();
    assert!((d - 0.425).abs() < 0.001);
    let d = deficit(2_691_648, 1_700_687).unwrap();
    assert!((d - 0.368).abs() < 0.001);
    assert_eq!(deficit(10, 10).unwrap(), 0.0);
    assert!(matches!(deficit(0, 5), Err(AnalyticsError::ZeroBaseline)));
}

const REGIONS: &str = r#"{"type": "FeatureCollection", "features": [
  {"type": "Feature", "properties": {"code": "UKA", "name": "Big", "population": 1000000},
   "geometry": {"type": "Polygon", "coordinates": [[[0, 0], [1, 0], [1, 1], [0, 1]]]}},
  {"type": "Feature", "properties": {"code": "UKB", "name": "Small", "population": 500000},
   "geometry": {"type": "Polygon", "coordinates": [[[2, 0], [3, 0], [3, 1], [2, 1]]]}},
  {"type": "Feature", "properties": {"code": "UKZ", "name": "Empty", "population": 10},
   "geometry": {"type": "Polygon", "coordinates": [[[4, 0], [5, 0], [5, 1], [4, 1]]]}}
]}"#;

#[test]
fn per_capita_reorders_by_population() {
    let regions = RegionSet::<f64>::from_geojson(REGIONS).unwrap();
    let counts: BTreeMap<String, u64> = [("UKA".to_string(), 1500), ("UKB".to_string(), 1000)].into();
    let pc = per_capita(&counts, &regions).unwrap();
    assert_eq!(pc["UKA"], 0.0015);
    assert_eq!(pc["UKB"], 0.002);
    assert_eq!(pc["UKZ"], 0.0);
    assert!(counts["UKA"] > counts["UKB"] && pc["UKA"] < pc["UKB"]);
    let unknown: BTreeMap<String, u64> = [("UKQ".to_string(), 1)].into();
    assert!(matches!(per_capita(&unknown, &regions), Err(AnalyticsError::MissingPopulation(_))));
    let one: BTreeMap<String, u64> = [("UKB".to_string(), 1000)].into();
    assert_eq!(per_capita(&one, &regions).unwrap()["UKB"], 0.002);
}

fn day(n: i64) -> NaiveDate {
    NaiveDate::from_ymd_opt(2019, 3, 1).unwrap() + chrono::Duration::days(n)
}

fn row(id: u64, date: NaiveDate, label: &str, contract: ContractType, mode: EmploymentMode, salary: Option<f64>) -> AdRecordRow {
    AdRecordRow {
        ad: JobAd {
            ad_id: id,
            title: "t".into(),
            description: String::new(),
            employer: "e".into(),
            location_name: "l".into(),
            posted_date: date,
            yearly_min_salary: salary,
            yearly_max_salary: salary,
            contract_type: contract,
            employment_mode: mode,
        },
        label: label.into(),
        region_code: None,
        resolution_kind: GeoKind::Unresolved,
        geo_transient: false,
        ingest_run_id: 1,
    }
}

#[test]
fn daily_counts_hand_tally_and_zero_fill() {
    let store = Store::in_memory().unwrap();
    let days = [0, 0, 1, 3, 3];
    let rows: Vec<_> = days
        .iter()
        .enumerate()
        .map(|(i, d)| row(i as u64, day(*d), "nurse", ContractType::Permanent, EmploymentMode::FullTime, None))
        .collect();
    store.upsert_ads(&rows).unwrap();
    let s = daily_counts(&store, &QueryFilter::all(), day(0), day(5)).unwrap();
    assert_eq!(s.points.iter().map(|p| p.1).collect::<Vec<_>>(), vec![2, 1, 0, 2, 0]);
    assert_eq!(s.to_csv(), format!("date,count\n{},2\n{},1\n{},0\n{},2\n{},0\n", day(0), day(1), day(2), day(3), day(4)));
    let empty = daily_counts(&store, &QueryFilter::all(), day(10), day(17)).unwrap();
    assert_eq!(empty.points.len(), 7);
    assert_eq!(empty.total(), 0);
    let clipped = daily_counts(&store, &QueryFilter::all().with_dates(day(1), day(3)), day(0), day(5)).unwrap();
    assert_eq!(clipped.points.iter().map(|p| p.1).collect::<Vec<_>>(), vec![0, 1, 0, 0, 0]);
    assert!(matches!(daily_counts(&store, &QueryFilter::all(), day(5), day(0)), Err(AnalyticsError::InvalidRange { .. })));
    let cmp = period_deficit(&store, &QueryFilter::all(), (day(0), day(2)), (day(2), day(4))).unwrap();
    assert_eq!((cmp.count_a, cmp.count_b), (3, 2));
    assert!((cmp.deficit_fraction - 1.0 / 3.0).abs() < 1e-15);
    let same = period_deficit(&store, &QueryFilter::all(), (day(0), day(4)), (day(0), day(4))).unwrap();
    assert_eq!(same.deficit_fraction, 0.0);
}

#[test]
fn proportions_exclude_unknown() {
    let rows = vec![
        row(1, day(0), "x", ContractType::Permanent, EmploymentMode::FullTime, Some(20_000.0)),
        row(2, day(0), "x", ContractType::Unknown, EmploymentMode::Unknown, None),
        row(3, day(0), "x", ContractType::Permanent, EmploymentMode::PartTime, Some(30_000.0)),
    ];
    let c = category_proportions_of(&rows, CategoryAxis::Contract);
    assert_eq!(c.proportions.get("Permanent"), Some(&1.0));
    assert_eq!((c.unknown, c.total), (1, 3));
    let m = category_proportions_of(&rows, CategoryAxis::Mode);
    assert_eq!(m.proportions["FullTime"], 0.5);
    let s = salary_distribution_of(&rows);
    assert_eq!((s.n, s.excluded, s.mean, s.median), (2, 1, Some(25_000.0), Some(25_000.0)));
}

#[test]
fn day_partition_over_labels() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let labels = ["nurse", "teacher", "software", "other"];
    let rows: Vec<_> = (0..400)
        .map(|i| {
            let label = labels[rng.gen_range(0..labels.len())];
            row(i, day(rng.gen_range(0..30)), label, ContractType::Permanent, EmploymentMode::FullTime, None)
        })
        .collect();
    let store = Store::in_memory().unwrap();
    store.upsert_ads(&rows).unwrap();
    let total = daily_counts(&store, &QueryFilter::all(), day(-2), day(32)).unwrap();
    let mut sum = vec![0u64; total.points.len()];
    for l in labels {
        let s = daily_counts(&store, &QueryFilter::all().with_labels([l]), day(-2), day(32)).unwrap();
        for (acc, p) in sum.iter_mut().zip(&s.points) {
            *acc += p.1;
        }
    }
    assert_eq!(sum, total.points.iter().map(|p| p.1).collect::<Vec<_>>());
}

fn sample() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-100.0f64..100.0, 2..60)
}

proptest! {
    #[test]
    fn p_values_in_unit_interval(a in sample(), b in sample()) {
        if let Ok(r) = welch_t_test(&a, &b) {
            prop_assert!((0.0..=1.0).contains(&r.p_value));
            let swapped = welch_t_test(&b, &a).unwrap();
            prop_assert!((r.statistic + swapped.statistic).abs() < 1e-9);
        }
        let k = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&k.statistic));
        prop_assert!((0.0..=1.0).contains(&k.p_value));
        prop_assert_eq!(ks_two_sample(&a, &a).unwrap().p_value, 1.0);
    }

    #[test]
    fn ks_invariant_under_monotone_maps(a in sample(), b in sample(), scale in 0.01f64..10.0, shift in -50.0f64..50.0, pick in 0usize..4) {
        let f = |x: f64| match pick {
            0 => scale * x + shift,
            1 => (x / 50.0).exp(),
            2 => x.powi(3) + shift,
            _ => (x / 200.0).atan() * scale,
        };
        let d = ks_statistic(&a, &b);
        let fa: Vec<f64> = a.iter().map(|&x| f(x)).collect();
        let fb: Vec<f64> = b.iter().map(|&x| f(x)).collect();
        prop_assert_eq!(ks_statistic(&fa, &fb), d);
    }

    #[test]
    fn chi_square_scales_linearly(cells in prop::collection::vec(1u32..50, 6), k in 2u32..20) {
        let table: Vec<Vec<f64>> = cells.chunks(3).map(|r| r.iter().map(|&x| x as f64).collect()).collect();
        let scaled: Vec<Vec<f64>> = table.iter().map(|r| r.iter().map(|x| x * k as f64).collect()).collect();
        let a = chi_square_test(&table).unwrap();
        let b = chi_square_test(&scaled).unwrap();
        prop_assert!((b.statistic - a.statistic * k as f64).abs() <= 1e-9 * b.statistic.max(1.0));
        prop_assert!((0.0..=1.0).contains(&a.p_value));
        let same_rows = vec![table[0].clone(), table[0].iter().map(|x| x * 3.0).collect()];
        let r = chi_square_test(&same_rows).unwrap();
        prop_assert!(r.statistic.abs() < 1e-9 && (r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn proportions_sum_to_one(picks in prop::collection::vec((0usize..4, 0usize..4), 1..200)) {
        let rows: Vec<_> = picks
            .iter()
            .enumerate()
            .map(|(i, (c, m))| row(i as u64, day(0), "x", ContractType::ALL[*c], EmploymentMode::ALL[*m], None))
            .collect();
        for axis in [CategoryAxis::Contract, CategoryAxis::Mode] {
            let d = category_proportions_of(&rows, axis);
            prop_assert_eq!(d.counts.values().sum::<u64>() + d.unknown, rows.len() as u64);
            if d.unknown < rows.len() as u64 {
                prop_assert!((d.proportions.values().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn deficit_of_equal_periods_is_zero(n in 1u64..10_000_000) {
        prop_assert_eq!(deficit(n, n).unwrap(), 0.0);
    }
}
