//! Ingestion of raw job-ad records from a sequential-id source.
//!
//! A source is walked id by id. Deleted ads come back with every field null;
//! they are counted but never parsed. Parsed ads from known cross-posting
//! employers are removed before anything downstream sees them.

mod filter;
mod parse;
mod record;
mod source;

pub use filter::{filter_cross_posts, normalize_employer, Blocklist, DEFAULT_BLOCKLIST};
pub use parse::{parse_ad, parse_date, CollectionWindow, ContractType, EmploymentMode, JobAd, ParseError};
pub use record::{is_null_record, RawAdRecord};
pub use source::{
    fetch_range, AdSource, FixtureSource, HttpAdSource, HttpReply, HttpTransport, RangeFetch,
    ReqwestTransport, RetryPolicy, TransportError, API_KEY_ENV,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("source unavailable for ad {ad_id} after {attempts} attempts: {reason}")]
    SourceUnavailable {
        ad_id: u64,
        attempts: u32,
        reason: String,
    },
    #[error("fixture corrupt at line {line}: {reason}")]
    FixtureCorrupt { line: usize, reason: String },
    #[error("invalid id range: start {start} > end {end}")]
    InvalidRange { start: u64, end: u64 },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Bookkeeping for one ingestion run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub total_fetched: u64,
    pub null_records: u64,
    /// Includes records whose fetch failed permanently; see `fetch_failures`.
    pub parse_failures: u64,
    pub cross_posts_removed: u64,
    pub retained: u64,
    /// Subset of `parse_failures` caused by permanent fetch failures.
    pub fetch_failures: u64,
}

impl IngestReport {
    pub fn is_conserved(&self) -> bool {
        self.total_fetched
            == self.null_records + self.parse_failures + self.cross_posts_removed + self.retained
            && self.fetch_failures <= self.parse_failures
    }
}

/// Retained ads together with the report that accounts for every fetched record.
#[derive(Debug, Clone, Default)]
pub struct IngestOutcome {
    pub ads: Vec<JobAd>,
    pub report: IngestReport,
}

/// Classifies a stream of fetched records: null, unparseable, cross-posted or retained.
pub fn ingest_records<I>(
    records: I,
    blocklist: &Blocklist,
    window: Option<&CollectionWindow>,
) -> Result<IngestOutcome, IngestError>
where
    I: IntoIterator<Item = Result<RawAdRecord, IngestError>>,
{
    let mut report = IngestReport::default();
    let mut parsed = Vec::new();
    for rec in records {
        let rec = rec?;
        report.total_fetched += 1;
        if rec.fetch_failed {
            report.parse_failures += 1;
            report.fetch_failures += 1;
            continue;
        }
        if is_null_record(&rec) {
            report.null_records += 1;
            continue;
        }
        let ad = parse_ad(&rec).and_then(|ad| match window {
            Some(w) if !w.contains(ad.posted_date) => Err(ParseError::OutOfWindow(ad.posted_date)),
            _ => Ok(ad),
        });
        match ad {
            Ok(ad) => parsed.push(ad),
            Err(e) => {
                tracing::debug!(ad_id = rec.ad_id, error = %e, "parse failure");
                report.parse_failures += 1;
            }
        }
    }
    let (ads, removed) = filter_cross_posts(parsed, blocklist);
    report.cross_posts_removed = removed as u64;
    report.retained = ads.len() as u64;
    debug_assert!(report.is_conserved());
    Ok(IngestOutcome { ads, report })
}
