use std::sync::Arc;
use std::time::Duration;

use serde_json::Value;

use super::{BoundingBox, GeoError, Located};
use crate::ingest::{HttpTransport, ReqwestTransport};
use crate::ratelimit::RateLimiter;

/// Remote place-name search. `Ok(None)` is a definitive miss; `Err` is a
/// transient failure.
pub trait RemoteGeocoder: Send + Sync {
    fn search(&self, query: &str) -> Result<Option<Located>, GeoError>;
}

impl<G: RemoteGeocoder + ?Sized> RemoteGeocoder for Arc<G> {
    fn search(&self, query: &str) -> Result<Option<Located>, GeoError> {
        (**self).search(query)
    }
}

/// Geocoder that knows nothing; every query is a definitive miss.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoGeocoder;

impl RemoteGeocoder for NoGeocoder {
    fn search(&self, _query: &str) -> Result<Option<Located>, GeoError> {
        Ok(None)
    }
}

/// Nominatim-style client: `GET {base}/search?q=..&format=json&limit=1`,
/// reading the first result's `lat`/`lon` and `boundingbox` `[s, n, w, e]`.
/// A point is preferred; the box is used only when the point is missing.
pub struct HttpGeocoder {
    base_url: String,
    transport: Box<dyn HttpTransport>,
    limiter: Arc<RateLimiter>,
}

pub const DEFAULT_GEOCODER_RATE: f64 = 1.0;

impl HttpGeocoder {
    pub fn new(base_url: impl Into<String>, transport: Box<dyn HttpTransport>, limiter: Arc<RateLimiter>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            transport,
            limiter,
        }
    }

    /// Reqwest-backed client at `requests_per_second`.
    pub fn connect(base_url: &str, requests_per_second: f64) -> Result<Self, GeoError> {
        let transport =
            ReqwestTransport::new(Duration::from_secs(20)).map_err(|e| GeoError::GeocoderUnavailable(e.0))?;
        Ok(Self::new(
            base_url,
            Box::new(transport),
            Arc::new(RateLimiter::per_second(requests_per_second)),
        ))
    }

    fn url(&self, query: &str) -> Result<String, GeoError> {
        reqwest::Url::parse_with_params(
            &format!("{}/search", self.base_url),
            &[("q", query), ("format", "json"), ("limit", "1")],
        )
        .map(String::from)
        .map_err(|e| GeoError::GeocoderUnavailable(format!("bad geocoder url: {e}")))
    }
}

impl RemoteGeocoder for HttpGeocoder {
    fn search(&self, query: &str) -> Result<Option<Located>, GeoError> {
        let url = self.url(query)?;
        self.limiter.acquire();
        let reply = self
            .transport
            .get(&url, None)
            .map_err(|e| GeoError::GeocoderUnavailable(e.0))?;
        match reply.status {
            200 => parse_search_body(&reply.body),
            404 => Ok(None),
            s => Err(GeoError::GeocoderUnavailable(format!("HTTP {s}"))),
        }
    }
}

fn number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Reads the first candidate of a search response.
pub fn parse_search_body(body: &str) -> Result<Option<Located>, GeoError> {
    let root: Value =
        serde_json::from_str(body).map_err(|e| GeoError::GeocoderUnavailable(format!("malformed response: {e}")))?;
    let Some(first) = root.as_array().and_then(|a| a.first()) else {
        return Ok(None);
    };
    if let (Some(lat), Some(lon)) = (number(&first["lat"]), number(&first["lon"])) {
        if lat.is_finite() && lon.is_finite() {
            return Ok(Some(Located::Point { lat, lon }));
        }
    }
    let corners: Option<Vec<f64>> = first["boundingbox"]
        .as_array()
        .filter(|a| a.len() == 4)
        .map(|a| a.iter().filter_map(number).collect());
    match corners.as_deref() {
        Some(&[s, n, w, e]) => Ok(BoundingBox::new(s, w, n, e)
            .ok()
            .map(|bbox| Located::BoundingBox { bbox })),
        _ => Ok(None),
    }
}
