//! Read-only `/v1` HTTP API over a store.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use axum::extract::{Query, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;
use vacobs_core::analytics::{AnalyticsError, CategoryAxis};
use vacobs_core::classify::{TermScope, SECTOR_LABELS};
use vacobs_core::store::{DistinctColumn, QueryFilter, Store};
use tower_http::cors::{AllowOrigin, CorsLayer};

use crate::data::{GeoData, EVENTS_JSON};
use crate::query::{self, ParamError, Params, DEFAULT_BIN_WIDTH, DEFAULT_LIMIT, DEFAULT_TOP_TERMS};

/// Read-only store handles shared round-robin between requests.
pub struct AppState {
    stores: Vec<Store>,
    next: AtomicUsize,
    pub geo: GeoData,
}

impl AppState {
    pub fn new(stores: Vec<Store>, geo: GeoData) -> Self {
        assert!(!stores.is_empty(), "at least one store handle");
        Self {
            stores,
            next: AtomicUsize::new(0),
            geo,
        }
    }

    /// `handles` read-only connections to the store file.
    pub fn open(path: &Path, handles: usize, geo: GeoData) -> anyhow::Result<Self> {
        let stores = (0..handles.max(1)).map(|_| Store::open_read_only(path)).collect::<Result<_, _>>()?;
        Ok(Self::new(stores, geo))
    }

    pub fn store(&self) -> &Store {
        &self.stores[self.next.fetch_add(1, Ordering::Relaxed) % self.stores.len()]
    }
}

pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        Self {
            status: StatusCode::BAD_REQUEST,
            message: message.into(),
        }
    }
}

impl From<ParamError> for ApiError {
    fn from(e: ParamError) -> Self {
        Self::bad_request(e.to_string())
    }
}

impl From<anyhow::Error> for ApiError {
    fn from(e: anyhow::Error) -> Self {
        let client_fault = e.downcast_ref::<ParamError>().is_some()
            || matches!(e.downcast_ref::<AnalyticsError>(), Some(AnalyticsError::InvalidRange { .. }));
        if client_fault {
            return Self::bad_request(format!("{e:#}"));
        }
        tracing::error!(error = %format!("{e:#}"), "request failed");
        Self {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            message: format!("{e:#}"),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type Pairs = Query<Vec<(String, String)>>;

fn timed(start: Instant, mut resp: Response) -> Response {
    let dur = format!("app;dur={:.3}", start.elapsed().as_secs_f64() * 1000.0);
    if let Ok(v) = HeaderValue::from_str(&dur) {
        resp.headers_mut().insert("server-timing", v);
    }
    resp
}

/// Parses parameters, then runs `f` on a blocking thread.
async fn run<T, F>(state: Arc<AppState>, pairs: Vec<(String, String)>, extra: &'static [&'static str], f: F) -> Response
where
    T: IntoResponse,
    F: FnOnce(&AppState, Params) -> Result<T, ApiError> + Send + 'static,
    T: Send + 'static,
{
    let start = Instant::now();
    let resp = match Params::parse(&pairs, extra) {
        Err(e) => ApiError::from(e).into_response(),
        Ok(params) => match tokio::task::spawn_blocking(move || f(&state, params)).await {
            Ok(Ok(body)) => body.into_response(),
            Ok(Err(e)) => e.into_response(),
            Err(e) => ApiError::from(anyhow::anyhow!("worker failed: {e}")).into_response(),
        },
    };
    timed(start, resp)
}

fn json_ok<T: Serialize>(body: T) -> Result<Response, ApiError> {
    Ok(Json(body).into_response())
}

async fn series(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &["format"], |s, p| {
        let body = query::series(s.store(), &s.geo, &p.filter)?;
        match p.get("format").unwrap_or("json") {
            "json" => json_ok(body),
            "csv" => Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body.to_csv()).into_response()),
            other => Err(ApiError::bad_request(format!("unknown format {other:?}"))),
        }
    })
    .await
}

async fn compare(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &["a_from", "a_to", "b_from", "b_to"], |s, p| {
        let a = (p.date("a_from")?, p.date("a_to")?);
        let b = (p.date("b_from")?, p.date("b_to")?);
        json_ok(query::compare(s.store(), &s.geo, &p.filter, a, b)?)
    })
    .await
}

async fn salary(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &["bin_width"], |s, p| {
        let width = p.f64_or("bin_width", DEFAULT_BIN_WIDTH)?;
        json_ok(query::salary(s.store(), &s.geo, &p.filter, width)?)
    })
    .await
}

async fn proportions(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &["axis"], |s, p| {
        let raw = p.get("axis").unwrap_or("contract");
        let axis = CategoryAxis::parse(raw).ok_or_else(|| ParamError::BadValue {
            name: "axis".into(),
            value: raw.into(),
        })?;
        json_ok(query::proportions(s.store(), &s.geo, &p.filter, axis)?)
    })
    .await
}

async fn top_terms(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &["n", "scope"], |s, p| {
        let n = p.usize_or("n", DEFAULT_TOP_TERMS)?;
        let raw = p.get("scope").unwrap_or("full");
        let scope = TermScope::parse(raw).ok_or_else(|| ParamError::BadValue {
            name: "scope".into(),
            value: raw.into(),
        })?;
        json_ok(query::top_terms_body(s.store(), &s.geo, &p.filter, n, scope)?)
    })
    .await
}

async fn ads(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &["offset", "limit"], |s, p| {
        let offset = p.usize_or("offset", 0)?;
        let limit = p.usize_or("limit", DEFAULT_LIMIT)?;
        json_ok(query::ads(s.store(), &s.geo, &p.filter, offset, limit)?)
    })
    .await
}

async fn regions(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &[], |s, p| json_ok(query::regions(s.store(), &s.geo, &p.filter)?)).await
}

async fn labels(State(s): State<Arc<AppState>>, Query(q): Pairs) -> Response {
    run(s, q, &[], |s, p| {
        let filter = p.filter.query_filter(&s.geo);
        let present = s.store().distinct(DistinctColumn::Label).map_err(anyhow::Error::from)?;
        json_ok(json!({ "filter": filter, "labels": SECTOR_LABELS.as_slice(), "present": present }))
    })
    .await
}

async fn events() -> Response {
    ([(header::CONTENT_TYPE, "application/json")], EVENTS_JSON).into_response()
}

async fn health(State(s): State<Arc<AppState>>) -> Response {
    let start = Instant::now();
    let resp = match tokio::task::spawn_blocking(move || s.store().count(&QueryFilter::all())).await {
        Ok(Ok(rows)) => Json(json!({ "status": "ok", "rows": rows })).into_response(),
        Ok(Err(e)) => ApiError::from(anyhow::Error::from(e)).into_response(),
        Err(e) => ApiError::from(anyhow::anyhow!("worker failed: {e}")).into_response(),
    };
    timed(start, resp)
}

fn cors(origins: &[String]) -> CorsLayer {
    let allowed: Vec<HeaderValue> = origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()).collect();
    CorsLayer::new()
        .allow_methods([Method::GET])
        .allow_origin(AllowOrigin::list(allowed))
        .expose_headers([header::HeaderName::from_static("server-timing")])
}

pub fn router(state: Arc<AppState>, cors_origins: &[String]) -> Router {
    Router::new()
        .route("/v1/series", get(series))
        .route("/v1/compare", get(compare))
        .route("/v1/salary", get(salary))
        .route("/v1/proportions", get(proportions))
        .route("/v1/top-terms", get(top_terms))
        .route("/v1/ads", get(ads))
        .route("/v1/regions", get(regions))
        .route("/v1/labels", get(labels))
        .route("/v1/events", get(events))
        .route("/v1/health", get(health))
        .fallback(|| async { ApiError { status: StatusCode::NOT_FOUND, message: "no such endpoint".into() } })
        .layer(cors(cors_origins))
        .with_state(state)
}

/// Binds and serves until interrupted.
pub async fn serve(state: Arc<AppState>, bind: &str, cors_origins: &[String]) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "serving /v1 API");
    axum::serve(listener, router(state, cors_origins))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
