use std::collections::{BTreeMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use serde_json::Value;
use thiserror::Error;

use super::record::RawAdRecord;
use super::IngestError;
use crate::ratelimit::RateLimiter;

/// Environment variable holding the live job board API key.
pub const API_KEY_ENV: &str = "VACOBS_API_KEY";

/// Anything that can return the record for one sequential id.
pub trait AdSource: Send + Sync {
    fn fetch(&self, ad_id: u64) -> Result<RawAdRecord, IngestError>;
}

impl<S: AdSource + ?Sized> AdSource for Arc<S> {
    fn fetch(&self, ad_id: u64) -> Result<RawAdRecord, IngestError> {
        (**self).fetch(ad_id)
    }
}

impl<S: AdSource + ?Sized> AdSource for Box<S> {
    fn fetch(&self, ad_id: u64) -> Result<RawAdRecord, IngestError> {
        (**self).fetch(ad_id)
    }
}

/// Replay source backed by a newline-delimited JSON file keyed by `jobId`.
///
/// Ids missing from the file replay as empty (null) records.
#[derive(Debug, Clone, Default)]
pub struct FixtureSource {
    records: BTreeMap<u64, BTreeMap<String, Value>>,
}

impl FixtureSource {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let file = File::open(path.as_ref()).map_err(|e| IngestError::FixtureCorrupt {
            line: 0,
            reason: format!("{}: {e}", path.as_ref().display()),
        })?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, IngestError> {
        let mut records = BTreeMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| IngestError::FixtureCorrupt {
                line: i + 1,
                reason: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |reason: String| IngestError::FixtureCorrupt { line: i + 1, reason };
            let v: Value = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            let Value::Object(map) = v else {
                return Err(corrupt("record is not a JSON object".into()));
            };
            let id = map
                .get("jobId")
                .and_then(Value::as_u64)
                .ok_or_else(|| corrupt("missing integer jobId".into()))?;
            let mut payload: BTreeMap<String, Value> = map.into_iter().collect();
            payload.remove("jobId");
            records.insert(id, payload);
        }
        Ok(Self { records })
    }

    pub fn from_records(records: impl IntoIterator<Item = RawAdRecord>) -> Self {
        Self {
            records: records.into_iter().map(|r| (r.ad_id, r.payload)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Smallest and one-past-largest id present.
    pub fn id_span(&self) -> Option<(u64, u64)> {
        let lo = *self.records.keys().next()?;
        let hi = *self.records.keys().next_back()?;
        Some((lo, hi + 1))
    }
}

impl AdSource for FixtureSource {
    fn fetch(&self, ad_id: u64) -> Result<RawAdRecord, IngestError> {
        let payload = self.records.get(&ad_id).cloned().unwrap_or_default();
        Ok(RawAdRecord::new(ad_id, payload))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Clone, Error)]
#[error("transport error: {0}")]
pub struct TransportError(pub String);

/// Minimal blocking GET abstraction so the retry logic can be driven by scripted mocks.
pub trait HttpTransport: Send + Sync {
    fn get(&self, url: &str, basic_user: Option<&str>) -> Result<HttpReply, TransportError>;
}

#[derive(Debug, Clone)]
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("vacobs/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(Self { client })
    }
}

impl HttpTransport for ReqwestTransport {
    fn get(&self, url: &str, basic_user: Option<&str>) -> Result<HttpReply, TransportError> {
        let mut req = self.client.get(url);
        if let Some(user) = basic_user {
            req = req.basic_auth(user, Some(""));
        }
        let resp = req.send().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpReply { status, body })
    }
}

/// Attempts per id and exponential backoff between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub initial_backoff: Duration,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            initial_backoff: Duration::from_secs(1),
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    pub fn backoff(&self, failed_attempts: u32) -> Duration {
        let factor = self.multiplier.powi(failed_attempts.saturating_sub(1) as i32);
        self.initial_backoff.mul_f64(factor)
    }
}

/// Live job board client: `GET {base_url}/jobs/{id}` with the API key as basic-auth user.
pub struct HttpAdSource {
    base_url: String,
    api_key: Option<String>,
    transport: Box<dyn HttpTransport>,
    limiter: Arc<RateLimiter>,
    retry: RetryPolicy,
}

impl HttpAdSource {
    pub fn new(
        base_url: impl Into<String>,
        api_key: Option<String>,
        transport: Box<dyn HttpTransport>,
        limiter: Arc<RateLimiter>,
        retry: RetryPolicy,
    ) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            api_key,
            transport,
            limiter,
            retry,
        }
    }

    /// Reqwest-backed client reading the key from [`API_KEY_ENV`].
    pub fn from_env(base_url: &str, requests_per_second: f64, retry: RetryPolicy) -> Result<Self, IngestError> {
        let transport = ReqwestTransport::new(Duration::from_secs(30)).map_err(|e| IngestError::SourceUnavailable {
            ad_id: 0,
            attempts: 0,
            reason: e.0,
        })?;
        Ok(Self::new(
            base_url,
            std::env::var(API_KEY_ENV).ok(),
            Box::new(transport),
            Arc::new(RateLimiter::per_second(requests_per_second)),
            retry,
        ))
    }
}

impl AdSource for HttpAdSource {
    fn fetch(&self, ad_id: u64) -> Result<RawAdRecord, IngestError> {
        let url = format!("{}/jobs/{ad_id}", self.base_url);
        let mut last_reason = String::new();
        for attempt in 1..=self.retry.max_attempts.max(1) {
            self.limiter.acquire();
            match self.transport.get(&url, self.api_key.as_deref()) {
                Ok(reply) if reply.status == 200 => {
                    return Ok(match serde_json::from_str::<Value>(&reply.body) {
                        Ok(v) => RawAdRecord::from_json(ad_id, v),
                        Err(e) => {
                            tracing::warn!(ad_id, error = %e, "malformed body");
                            RawAdRecord::fetch_failed(ad_id)
                        }
                    });
                }
                Ok(reply) if reply.status == 429 || reply.status >= 500 => {
                    last_reason = format!("HTTP {}", reply.status);
                }
                Ok(reply) => {
                    tracing::debug!(ad_id, status = reply.status, "permanent fetch failure");
                    return Ok(RawAdRecord::fetch_failed(ad_id));
                }
                Err(e) => last_reason = e.0,
            }
            if attempt < self.retry.max_attempts {
                std::thread::sleep(self.retry.backoff(attempt));
            }
        }
        Err(IngestError::SourceUnavailable {
            ad_id,
            attempts: self.retry.max_attempts.max(1),
            reason: last_reason,
        })
    }
}

/// Iterator over `[start, end)` fetching up to `window` ids concurrently,
/// yielding strictly in id order. Stops after the first error.
pub struct RangeFetch<'a, S: AdSource + ?Sized> {
    source: &'a S,
    next_id: u64,
    end: u64,
    window: usize,
    buffer: VecDeque<Result<RawAdRecord, IngestError>>,
    failed: bool,
}

impl<S: AdSource + ?Sized> RangeFetch<'_, S> {
    fn refill(&mut self) {
        let n = (self.end - self.next_id).min(self.window as u64);
        let ids: Vec<u64> = (self.next_id..self.next_id + n).collect();
        self.next_id += n;
        if ids.len() <= 1 {
            self.buffer.extend(ids.into_iter().map(|id| self.source.fetch(id)));
            return;
        }
        let source = self.source;
        let results: Vec<_> = std::thread::scope(|scope| {
            let handles: Vec<_> = ids.iter().map(|&id| scope.spawn(move || source.fetch(id))).collect();
            handles.into_iter().map(|h| h.join().expect("fetch worker panicked")).collect()
        });
        self.buffer.extend(results);
    }
}

impl<S: AdSource + ?Sized> Iterator for RangeFetch<'_, S> {
    type Item = Result<RawAdRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if self.buffer.is_empty() && self.next_id < self.end {
            self.refill();
        }
        let item = self.buffer.pop_front()?;
        if item.is_err() {
            self.failed = true;
            self.buffer.clear();
        }
        Some(item)
    }
}

/// Walks ids `[start_id, end_id)` in ascending order.
pub fn fetch_range<S: AdSource + ?Sized>(
    source: &S,
    start_id: u64,
    end_id: u64,
    window: usize,
) -> Result<RangeFetch<'_, S>, IngestError> {
    if start_id > end_id {
        return Err(IngestError::InvalidRange {
            start: start_id,
            end: end_id,
        });
    }
    Ok(RangeFetch {
        source,
        next_id: start_id,
        end: end_id,
        window: window.max(1),
        buffer: VecDeque::new(),
        failed: false,
    })
}
