//! Local stand-in for a Nominatim-style `/search` endpoint.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde_json::{json, Value};
use vacobs_core::geoloc::{normalize_location, BoundingBox};

/// What the mock answers for one query.
#[derive(Debug, Clone, PartialEq)]
pub enum MockAnswer {
    Point { lat: f64, lon: f64 },
    Box(BoundingBox),
}

#[derive(Debug, Default)]
pub struct MockState {
    entries: HashMap<String, MockAnswer>,
    down: AtomicBool,
    hits: AtomicU64,
    queries: Mutex<Vec<String>>,
}

impl MockState {
    pub fn new(entries: impl IntoIterator<Item = (String, MockAnswer)>) -> Self {
        Self {
            entries: entries.into_iter().map(|(k, v)| (normalize_location(&k), v)).collect(),
            ..Default::default()
        }
    }

    /// Name, lat, lon per tab-separated line; `#` lines ignored.
    pub fn from_tsv(text: &str) -> anyhow::Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || anyhow::anyhow!("line {}: expected name<TAB>lat<TAB>lon", i + 1);
            if f.len() < 3 {
                return Err(bad());
            }
            let lat = f[1].trim().parse().map_err(|_| bad())?;
            let lon = f[2].trim().parse().map_err(|_| bad())?;
            entries.push((f[0].to_string(), MockAnswer::Point { lat, lon }));
        }
        Ok(Self::new(entries))
    }

    pub fn set_down(&self, down: bool) {
        self.down.store(down, Ordering::SeqCst);
    }

    pub fn hits(&self) -> u64 {
        self.hits.load(Ordering::SeqCst)
    }

    pub fn queries(&self) -> Vec<String> {
        self.queries.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

async fn search(State(s): State<Arc<MockState>>, Query(q): Query<HashMap<String, String>>) -> Response {
    s.hits.fetch_add(1, Ordering::SeqCst);
    let query = q.get("q").cloned().unwrap_or_default();
    s.queries.lock().unwrap_or_else(|e| e.into_inner()).push(query.clone());
    if s.down.load(Ordering::SeqCst) {
        return (StatusCode::SERVICE_UNAVAILABLE, "down").into_response();
    }
    let body: Value = match s.entries.get(&normalize_location(&query)) {
        None => json!([]),
        Some(MockAnswer::Point { lat, lon }) => json!([{ "lat": lat.to_string(), "lon": lon.to_string() }]),
        Some(MockAnswer::Box(b)) => json!([{
            "boundingbox": [b.min_lat.to_string(), b.max_lat.to_string(), b.min_lon.to_string(), b.max_lon.to_string()]
        }]),
    };
    Json(body).into_response()
}

pub fn router(state: Arc<MockState>) -> Router {
    Router::new().route("/search", get(search)).with_state(state)
}

/// A mock running on its own runtime thread, for callers that are not async.
pub struct MockServer {
    pub addr: SocketAddr,
    pub state: Arc<MockState>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl MockServer {
    pub fn start(state: MockState) -> anyhow::Result<Self> {
        let state = Arc::new(state);
        let std_listener = std::net::TcpListener::bind("127.0.0.1:0")?;
        std_listener.set_nonblocking(true)?;
        let addr = std_listener.local_addr()?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let app = router(state.clone());
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().expect("runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(std_listener).expect("listener");
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(Self {
            addr,
            state,
            shutdown: Some(tx),
            thread: Some(thread),
        })
    }

    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
