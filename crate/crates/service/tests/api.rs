mod common;

use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{header, Method, Request, StatusCode};
use axum::Router;
use chrono::NaiveDate;
use serde_json::Value;
use tower::ServiceExt;
use vacobs_core::analytics::period_deficit;
use vacobs_core::store::{QueryFilter, Store};
use vacobs_service::api::{router, AppState};
use vacobs_service::data::GeoData;
use vacobs_service::synth::SynthSpec;

struct Fixture {
    _dir: tempfile::TempDir,
    store: std::path::PathBuf,
    app: Router,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, _, _) = common::populated(
        dir.path(),
        &SynthSpec {
            ads: 400,
            days: 10,
            ..Default::default()
        },
    );
    let state = Arc::new(AppState::open(&cfg.store, 2, GeoData::bundled()).unwrap());
    let app = router(state, &["http://dash.example".to_string()]);
    Fixture {
        _dir: dir,
        store: cfg.store,
        app,
    }
}

async fn call(app: &Router, req: Request<Body>) -> (StatusCode, axum::http::HeaderMap, String) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    (status, headers, String::from_utf8(body.to_vec()).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, Value) {
    let (s, _, b) = call(app, Request::get(uri).body(Body::empty()).unwrap()).await;
    (s, serde_json::from_str(&b).unwrap_or(Value::String(b)))
}

#[tokio::test]
async fn series_json_and_csv_agree() {
    let f = fixture();
    let (s, body) = get(&f.app, "/v1/series?label=nurse,teacher&from=2020-01-06&to=2020-01-09").await;
    assert_eq!(s, StatusCode::OK);
    let points = body["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);
    assert_eq!(body["filter"]["labels"], serde_json::json!(["nurse", "teacher"]));
    let (s, headers, csv) = call(
        &f.app,
        Request::get("/v1/series?label=nurse&label=teacher&from=2020-01-06&to=2020-01-09&format=csv")
            .body(Body::empty())
            .unwrap(),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert!(headers[header::CONTENT_TYPE].to_str().unwrap().starts_with("text/csv"));
    let mut expected = String::from("date,count\n");
    for p in points {
        expected.push_str(&format!("{},{}\n", p["date"].as_str().unwrap(), p["count"]));
    }
    assert_eq!(csv, expected);
}

#[tokio::test]
async fn bad_requests_are_400() {
    let f = fixture();
    for uri in [
        "/v1/series?from=2020-02-01&to=2020-01-01",
        "/v1/series?colour=red",
        "/v1/series?from=yesterday",
        "/v1/series?format=xml",
        "/v1/ads?limit=0",
        "/v1/ads?limit=10001",
        "/v1/proportions?axis=colour",
        "/v1/top-terms?n=many",
        "/v1/compare?a_from=2020-01-01",
        "/v1/compare?a_from=2020-01-09&a_to=2020-01-06&b_from=2020-01-06&b_to=2020-01-09",
        "/v1/salary?bin_width=0",
        "/v1/series?contract=gig",
    ] {
        let (s, body) = get(&f.app, uri).await;
        assert_eq!(s, StatusCode::BAD_REQUEST, "{uri}: {body}");
        assert!(body["error"].is_string(), "{uri}");
    }
    let (s, _) = get(&f.app, "/v2/series").await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn unknown_label_gives_zero_series() {
    let f = fixture();
    let (s, body) = get(&f.app, "/v1/series?label=astronaut&from=2020-01-06&to=2020-01-08").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["total"], 0);
    assert_eq!(body["points"].as_array().unwrap().len(), 2);
}

#[tokio::test]
async fn compare_passes_analytics_through() {
    let f = fixture();
    let (s, body) =
        get(&f.app, "/v1/compare?a_from=2020-01-06&a_to=2020-01-11&b_from=2020-01-11&b_to=2020-01-16").await;
    assert_eq!(s, StatusCode::OK, "{body}");
    let store = Store::open_read_only(&f.store).unwrap();
    let d = |day| NaiveDate::from_ymd_opt(2020, 1, day).unwrap();
    let direct = period_deficit(&store, &QueryFilter::all(), (d(6), d(11)), (d(11), d(16))).unwrap();
    assert_eq!(body["comparison"]["deficit_fraction"].as_f64().unwrap(), direct.deficit_fraction);
    assert_eq!(body["comparison"]["count_a"], direct.count_a);
    assert!(body["salary_welch"]["p_value"].is_number());
    assert!(body["contract_chi_square"]["statistic"].is_number());
}

#[tokio::test]
async fn salary_and_proportions_and_terms() {
    let f = fixture();
    let (s, body) = get(&f.app, "/v1/salary?label=astronaut").await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["n"], 0);
    assert_eq!(body["histogram"], serde_json::json!([]));
    let (_, body) = get(&f.app, "/v1/salary?bin_width=10000").await;
    let hist_total: u64 = body["histogram"].as_array().unwrap().iter().map(|b| b["count"].as_u64().unwrap()).sum();
    assert_eq!(hist_total, body["n"].as_u64().unwrap());

    let (_, body) = get(&f.app, "/v1/proportions?axis=mode").await;
    let sum: f64 = body["proportions"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((sum - 1.0).abs() < 1e-12);

    let (_, body) = get(&f.app, "/v1/top-terms?n=20").await;
    let terms = body["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 20);
    assert!(terms.windows(2).all(|w| w[0]["count"].as_u64() >= w[1]["count"].as_u64()));
}

#[tokio::test]
async fn pages_concatenate_to_full_result() {
    let f = fixture();
    let (_, full) = get(&f.app, "/v1/ads?limit=10000&mode=full-time").await;
    let total = full["total"].as_u64().unwrap() as usize;
    let all = full["ads"].as_array().unwrap().clone();
    assert_eq!(all.len(), total);
    let mut paged = Vec::new();
    let mut offset = 0;
    loop {
        let (_, page) = get(&f.app, &format!("/v1/ads?limit=7&offset={offset}&mode=full-time")).await;
        let items = page["ads"].as_array().unwrap();
        if items.is_empty() {
            break;
        }
        paged.extend(items.iter().cloned());
        offset += 7;
    }
    assert_eq!(paged, all);
}

#[tokio::test]
async fn regions_labels_events_health() {
    let f = fixture();
    let (_, regions) = get(&f.app, "/v1/regions").await;
    let rs = regions["regions"].as_array().unwrap();
    assert_eq!(rs.len(), 12);
    assert!(rs.iter().any(|r| r["code"] == "UKI" && r["name"] == "Greater London"));
    let (_, health) = get(&f.app, "/v1/health").await;
    let assigned: u64 = rs.iter().map(|r| r["count"].as_u64().unwrap()).sum();
    assert_eq!(assigned + regions["unassigned"].as_u64().unwrap(), health["rows"].as_u64().unwrap());
    let (_, labels) = get(&f.app, "/v1/labels").await;
    assert_eq!(labels["labels"].as_array().unwrap().len(), 49);
    let (s, events) = get(&f.app, "/v1/events").await;
    assert_eq!(s, StatusCode::OK);
    assert!(events.as_array().unwrap().len() >= 2);
    let (_, south_west) = get(&f.app, "/v1/series?region=South%20West&region=UKK").await;
    assert_eq!(south_west["filter"]["region_codes"], serde_json::json!(["UKK"]));
}

#[tokio::test]
async fn headers_cors_and_read_only() {
    let f = fixture();
    let (_, headers, _) = call(
        &f.app,
        Request::get("/v1/series").header(header::ORIGIN, "http://dash.example").body(Body::empty()).unwrap(),
    )
    .await;
    assert_eq!(headers[header::ACCESS_CONTROL_ALLOW_ORIGIN], "http://dash.example");
    assert!(headers["server-timing"].to_str().unwrap().starts_with("app;dur="));
    let (_, headers, _) = call(
        &f.app,
        Request::get("/v1/series").header(header::ORIGIN, "http://evil.example").body(Body::empty()).unwrap(),
    )
    .await;
    assert!(headers.get(header::ACCESS_CONTROL_ALLOW_ORIGIN).is_none());
    let before = Store::open_read_only(&f.store).unwrap().count(&QueryFilter::all()).unwrap();
    for m in [Method::POST, Method::PUT, Method::DELETE] {
        let (s, _, _) = call(&f.app, Request::builder().method(m).uri("/v1/ads").body(Body::empty()).unwrap()).await;
        assert_eq!(s, StatusCode::METHOD_NOT_ALLOWED);
    }
    assert_eq!(Store::open_read_only(&f.store).unwrap().count(&QueryFilter::all()).unwrap(), before);
}
