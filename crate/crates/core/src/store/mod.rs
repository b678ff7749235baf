//! Single-file relational store for ads, documents, geo cache, model
//! metadata and ingest runs. Dates are ISO text; one writer handle per file,
//! any number of read-only handles.

mod filter;
mod row;

pub use filter::QueryFilter;
pub use row::AdRecordRow;

use std::collections::{BTreeMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::{Mutex, MutexGuard};

use chrono::{NaiveDate, Utc};
use rusqlite::types::Value as SqlValue;
use rusqlite::{params, params_from_iter, Connection, OpenFlags, OptionalExtension};
use thiserror::Error;

use crate::geoloc::{GeoCache, GeoError, GeoKind, Located};
use crate::ingest::{normalize_employer, ContractType, EmploymentMode, IngestReport, JobAd};
use crate::textprep::Document;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("storage failure: {0}")]
    StorageFailure(#[from] rusqlite::Error),
    #[error("corrupt row for ad {ad_id}: {reason}")]
    CorruptRow { ad_id: i64, reason: String },
    #[error("bad import line {line}: {reason}")]
    BadImport { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("store opened read-only")]
    ReadOnly,
}

const SCHEMA: &str = "
CREATE TABLE IF NOT EXISTS ads (
    ad_id INTEGER PRIMARY KEY,
    title TEXT NOT NULL,
    description TEXT NOT NULL,
    employer TEXT NOT NULL,
    employer_norm TEXT NOT NULL,
    location_name TEXT NOT NULL,
    posted_date TEXT NOT NULL,
    min_salary REAL,
    max_salary REAL,
    contract_type TEXT NOT NULL,
    employment_mode TEXT NOT NULL,
    label TEXT NOT NULL,
    region_code TEXT,
    resolution_kind TEXT NOT NULL,
    geo_transient INTEGER NOT NULL DEFAULT 0,
    ingest_run_id INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS ads_date ON ads(posted_date);
CREATE INDEX IF NOT EXISTS ads_label ON ads(label);
CREATE INDEX IF NOT EXISTS ads_region ON ads(region_code);
CREATE TABLE IF NOT EXISTS documents (
    ad_id INTEGER PRIMARY KEY,
    tokens TEXT NOT NULL,
    boundary INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS geo_cache (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS model_meta (
    key TEXT PRIMARY KEY,
    value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS ingest_runs (
    run_id INTEGER PRIMARY KEY AUTOINCREMENT,
    started_at TEXT NOT NULL,
    finished_at TEXT,
    source TEXT NOT NULL,
    report TEXT
);
";

const AD_COLUMNS: &str = "ad_id, title, description, employer, location_name, posted_date, min_salary, max_salary, \
     contract_type, employment_mode, label, region_code, resolution_kind, geo_transient, ingest_run_id";

pub struct Store {
    conn: Mutex<Connection>,
    read_only: bool,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("read_only", &self.read_only).finish()
    }
}

fn kind_str(k: GeoKind) -> &'static str {
    match k {
        GeoKind::County => "County",
        GeoKind::Point => "Point",
        GeoKind::BoundingBox => "BoundingBox",
        GeoKind::Unresolved => "Unresolved",
    }
}

fn parse_kind(s: &str) -> Option<GeoKind> {
    [GeoKind::County, GeoKind::Point, GeoKind::BoundingBox, GeoKind::Unresolved]
        .into_iter()
        .find(|k| kind_str(*k) == s)
}

/// Appends `col IN (?, ...)` or a never-true clause for an empty set.
fn push_in(clauses: &mut Vec<String>, args: &mut Vec<SqlValue>, col: &str, values: Vec<String>) {
    if values.is_empty() {
        clauses.push("0".into());
        return;
    }
    clauses.push(format!("{col} IN ({})", vec!["?"; values.len()].join(", ")));
    args.extend(values.into_iter().map(SqlValue::Text));
}

/// ISO text for a range bound. Dates are stored as `YYYY-MM-DD` and compared
/// as text, so bounds outside four-digit years are clamped.
fn sql_date(d: NaiveDate) -> String {
    let lo = NaiveDate::from_ymd_opt(1, 1, 1).expect("valid date");
    let hi = NaiveDate::from_ymd_opt(9999, 12, 31).expect("valid date");
    if d > hi {
        "9999-12-32".into()
    } else {
        d.max(lo).format("%Y-%m-%d").to_string()
    }
}

fn where_clause(f: &QueryFilter) -> (String, Vec<SqlValue>) {
    let mut clauses = Vec::new();
    let mut args = Vec::new();
    if let Some(l) = &f.labels {
        push_in(&mut clauses, &mut args, "label", l.iter().cloned().collect());
    }
    if let Some(r) = f.canonical_regions() {
        push_in(&mut clauses, &mut args, "region_code", r.into_iter().collect());
    }
    if let Some((start, end)) = f.date_range {
        clauses.push("posted_date >= ? AND posted_date < ?".into());
        args.push(SqlValue::Text(sql_date(start)));
        args.push(SqlValue::Text(sql_date(end)));
    }
    if let Some(c) = &f.contract_types {
        push_in(&mut clauses, &mut args, "contract_type", c.iter().map(|c| c.as_str().to_string()).collect());
    }
    if let Some(m) = &f.modes {
        push_in(&mut clauses, &mut args, "employment_mode", m.iter().map(|m| m.as_str().to_string()).collect());
    }
    if let Some(e) = f.normalized_excludes() {
        if !e.is_empty() {
            clauses.push(format!("employer_norm NOT IN ({})", vec!["?"; e.len()].join(", ")));
            args.extend(e.into_iter().map(SqlValue::Text));
        }
    }
    if clauses.is_empty() {
        (String::new(), args)
    } else {
        (format!(" WHERE {}", clauses.join(" AND ")), args)
    }
}

fn row_from_sql(r: &rusqlite::Row<'_>) -> rusqlite::Result<Result<AdRecordRow, StoreError>> {
    let ad_id: i64 = r.get(0)?;
    let date: String = r.get(5)?;
    let contract: String = r.get(8)?;
    let mode: String = r.get(9)?;
    let kind: String = r.get(12)?;
    let corrupt = |reason: String| StoreError::CorruptRow { ad_id, reason };
    let Ok(posted_date) = date.parse::<NaiveDate>() else {
        return Ok(Err(corrupt(format!("bad date {date:?}"))));
    };
    let (Some(contract_type), Some(employment_mode), Some(resolution_kind)) =
        (ContractType::parse(&contract), EmploymentMode::parse(&mode), parse_kind(&kind))
    else {
        return Ok(Err(corrupt(format!("bad enum value in {contract:?}/{mode:?}/{kind:?}"))));
    };
    Ok(Ok(AdRecordRow {
        ad: JobAd {
            ad_id: ad_id as u64,
            title: r.get(1)?,
            description: r.get(2)?,
            employer: r.get(3)?,
            location_name: r.get(4)?,
            posted_date,
            yearly_min_salary: r.get(6)?,
            yearly_max_salary: r.get(7)?,
            contract_type,
            employment_mode,
        },
        label: r.get(10)?,
        region_code: r.get(11)?,
        resolution_kind,
        geo_transient: r.get::<_, i64>(13)? != 0,
        ingest_run_id: r.get(14)?,
    }))
}

impl Store {
    /// Opens or creates a writable store file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let conn = Connection::open(path)?;
        conn.pragma_update(None, "journal_mode", "WAL")?;
        conn.pragma_update(None, "synchronous", "NORMAL")?;
        conn.busy_timeout(std::time::Duration::from_secs(10))?;
        conn.execute_batch(SCHEMA)?;
        Ok(Self {
            conn: Mutex::new(conn),
            read_only: false,
        })
    }

    /// Read handle for query services. The file must already exist.
    pub fn open_read_only(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let conn = Connection::open_with_flags(path, OpenFlags::SQLITE_OPEN_READ_ONLY | OpenFlags::SQLITE_OPEN_NO_MUTEX)?;
        conn.busy_timeout(std::time::Duration::from_secs(10))?;
        Ok(Self {
            conn: Mutex::new(conn),
            read_only: true,
        })
    }

    pub fn in_memory() -> Result<Self, StoreError> {
        let conn = Connection::open_in_memory()?;
        conn.execute_batch(SCHEMA)?;
        Ok(Self {
            conn: Mutex::new(conn),
            read_only: false,
        })
    }

    fn conn(&self) -> MutexGuard<'_, Connection> {
        self.conn.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn writable(&self) -> Result<MutexGuard<'_, Connection>, StoreError> {
        if self.read_only {
            return Err(StoreError::ReadOnly);
        }
        Ok(self.conn())
    }

    /// Inserts or replaces rows by `ad_id` in one transaction.
    pub fn upsert_ads<'a, I>(&self, rows: I) -> Result<usize, StoreError>
    where
        I: IntoIterator<Item = &'a AdRecordRow>,
    {
        let mut conn = self.writable()?;
        let tx = conn.transaction()?;
        let mut n = 0;
        {
            let mut stmt = tx.prepare_cached(
                "INSERT INTO ads (ad_id, title, description, employer, employer_norm, location_name, posted_date, \
                 min_salary, max_salary, contract_type, employment_mode, label, region_code, resolution_kind, \
                 geo_transient, ingest_run_id) VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9, ?10, ?11, ?12, ?13, ?14, ?15, ?16) \
                 ON CONFLICT(ad_id) DO UPDATE SET title = excluded.title, description = excluded.description, \
                 employer = excluded.employer, employer_norm = excluded.employer_norm, location_name = excluded.location_name, \
                 posted_date = excluded.posted_date, min_salary = excluded.min_salary, max_salary = excluded.max_salary, \
                 contract_type = excluded.contract_type, employment_mode = excluded.employment_mode, label = excluded.label, \
                 region_code = excluded.region_code, resolution_kind = excluded.resolution_kind, \
                 geo_transient = excluded.geo_transient, ingest_run_id = excluded.ingest_run_id",
            )?;
            for row in rows {
                let ad = &row.ad;
                stmt.execute(params![
                    ad.ad_id as i64,
                    ad.title,
                    ad.description,
                    ad.employer,
                    normalize_employer(&ad.employer),
                    ad.location_name,
                    ad.posted_date.to_string(),
                    ad.yearly_min_salary,
                    ad.yearly_max_salary,
                    ad.contract_type.as_str(),
                    ad.employment_mode.as_str(),
                    row.label,
                    row.region_code,
                    kind_str(row.resolution_kind),
                    row.geo_transient as i64,
                    row.ingest_run_id,
                ])?;
                n += 1;
            }
        }
        tx.commit()?;
        Ok(n)
    }

    pub fn upsert_documents<'a, I>(&self, docs: I) -> Result<usize, StoreError>
    where
        I: IntoIterator<Item = &'a Document>,
    {
        let mut conn = self.writable()?;
        let tx = conn.transaction()?;
        let mut n = 0;
        {
            let mut stmt = tx.prepare_cached(
                "INSERT INTO documents (ad_id, tokens, boundary) VALUES (?1, ?2, ?3) \
                 ON CONFLICT(ad_id) DO UPDATE SET tokens = excluded.tokens, boundary = excluded.boundary",
            )?;
            for d in docs {
                stmt.execute(params![d.ad_id as i64, d.tokens.join(" "), d.boundary as i64])?;
                n += 1;
            }
        }
        tx.commit()?;
        Ok(n)
    }

    /// Rows satisfying `filter` in `ad_id` order, optionally paged.
    pub fn query_page(
        &self,
        filter: &QueryFilter,
        offset: usize,
        limit: Option<usize>,
    ) -> Result<Vec<AdRecordRow>, StoreError> {
        let (clause, mut args) = where_clause(filter);
        let mut sql = format!("SELECT {AD_COLUMNS} FROM ads{clause} ORDER BY ad_id");
        if limit.is_some() || offset > 0 {
            sql.push_str(" LIMIT ? OFFSET ?");
            args.push(SqlValue::Integer(limit.map_or(-1, |l| l as i64)));
            args.push(SqlValue::Integer(offset as i64));
        }
        let conn = self.conn();
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map(params_from_iter(args), row_from_sql)?;
        let mut out = Vec::new();
        for r in rows {
            out.push(r??);
        }
        Ok(out)
    }

    pub fn query(&self, filter: &QueryFilter) -> Result<Vec<AdRecordRow>, StoreError> {
        self.query_page(filter, 0, None)
    }

    pub fn count(&self, filter: &QueryFilter) -> Result<u64, StoreError> {
        let (clause, args) = where_clause(filter);
        let conn = self.conn();
        let n: i64 = conn.query_row(&format!("SELECT COUNT(*) FROM ads{clause}"), params_from_iter(args), |r| r.get(0))?;
        Ok(n as u64)
    }

    /// Per-day counts of matching rows (days without ads are absent).
    pub fn count_by_day(&self, filter: &QueryFilter) -> Result<BTreeMap<NaiveDate, u64>, StoreError> {
        let (clause, args) = where_clause(filter);
        let conn = self.conn();
        let mut stmt = conn.prepare(&format!(
            "SELECT posted_date, COUNT(*) FROM ads{clause} GROUP BY posted_date ORDER BY posted_date"
        ))?;
        let mut out = BTreeMap::new();
        let rows = stmt.query_map(params_from_iter(args), |r| Ok((r.get::<_, String>(0)?, r.get::<_, i64>(1)?)))?;
        for r in rows {
            let (d, n) = r?;
            let date = d.parse().map_err(|_| StoreError::CorruptRow {
                ad_id: -1,
                reason: format!("bad date {d:?}"),
            })?;
            out.insert(date, n as u64);
        }
        Ok(out)
    }

    /// Earliest and latest posting date among matching rows.
    pub fn date_bounds(&self, filter: &QueryFilter) -> Result<Option<(NaiveDate, NaiveDate)>, StoreError> {
        let (clause, args) = where_clause(filter);
        let conn = self.conn();
        let (lo, hi): (Option<String>, Option<String>) = conn.query_row(
            &format!("SELECT MIN(posted_date), MAX(posted_date) FROM ads{clause}"),
            params_from_iter(args),
            |r| Ok((r.get(0)?, r.get(1)?)),
        )?;
        let parse = |d: String| {
            d.parse::<NaiveDate>().map_err(|_| StoreError::CorruptRow {
                ad_id: -1,
                reason: format!("bad date {d:?}"),
            })
        };
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok(Some((parse(lo)?, parse(hi)?))),
            _ => Ok(None),
        }
    }

    /// Documents of the rows matching `filter`, in `ad_id` order.
    pub fn documents(&self, filter: &QueryFilter) -> Result<Vec<Document>, StoreError> {
        let (clause, args) = where_clause(filter);
        let sql = format!(
            "SELECT d.ad_id, d.tokens, d.boundary FROM documents d JOIN ads ON ads.ad_id = d.ad_id{clause} ORDER BY d.ad_id"
        );
        let conn = self.conn();
        let mut stmt = conn.prepare(&sql)?;
        let rows = stmt.query_map(params_from_iter(args), |r| {
            let tokens: String = r.get(1)?;
            Ok(Document {
                ad_id: r.get::<_, i64>(0)? as u64,
                tokens: tokens.split(' ').filter(|t| !t.is_empty()).map(str::to_string).collect(),
                boundary: r.get::<_, i64>(2)? as usize,
            })
        })?;
        Ok(rows.collect::<Result<_, _>>()?)
    }

    /// Ids already stored, excluding rows whose geolocation failed transiently.
    pub fn settled_ids(&self) -> Result<HashSet<u64>, StoreError> {
        let conn = self.conn();
        let mut stmt = conn.prepare("SELECT ad_id FROM ads WHERE geo_transient = 0")?;
        let ids = stmt.query_map([], |r| r.get::<_, i64>(0))?;
        ids.map(|r| r.map(|v| v as u64).map_err(StoreError::from)).collect()
    }

    /// Distinct labels and region codes present, for listing endpoints.
    pub fn distinct(&self, column: DistinctColumn) -> Result<Vec<String>, StoreError> {
        let col = match column {
            DistinctColumn::Label => "label",
            DistinctColumn::RegionCode => "region_code",
        };
        let conn = self.conn();
        let mut stmt = conn.prepare(&format!("SELECT DISTINCT {col} FROM ads WHERE {col} IS NOT NULL ORDER BY {col}"))?;
        let v = stmt.query_map([], |r| r.get::<_, String>(0))?;
        Ok(v.collect::<Result<_, _>>()?)
    }

    pub fn begin_run(&self, source: &str) -> Result<i64, StoreError> {
        let conn = self.writable()?;
        conn.execute(
            "INSERT INTO ingest_runs (started_at, source) VALUES (?1, ?2)",
            params![Utc::now().to_rfc3339(), source],
        )?;
        Ok(conn.last_insert_rowid())
    }

    pub fn finish_run(&self, run_id: i64, report: &IngestReport) -> Result<(), StoreError> {
        let conn = self.writable()?;
        let json = serde_json::to_string(report).expect("report serializes");
        conn.execute(
            "UPDATE ingest_runs SET finished_at = ?1, report = ?2 WHERE run_id = ?3",
            params![Utc::now().to_rfc3339(), json, run_id],
        )?;
        Ok(())
    }

    /// Reports of finished runs, oldest first.
    pub fn run_reports(&self) -> Result<Vec<(i64, IngestReport)>, StoreError> {
        let conn = self.conn();
        let mut stmt = conn.prepare("SELECT run_id, report FROM ingest_runs WHERE report IS NOT NULL ORDER BY run_id")?;
        let rows = stmt.query_map([], |r| Ok((r.get::<_, i64>(0)?, r.get::<_, String>(1)?)))?;
        let mut out = Vec::new();
        for r in rows {
            let (id, json) = r?;
            let report = serde_json::from_str(&json).map_err(|e| StoreError::CorruptRow {
                ad_id: -1,
                reason: format!("run {id}: {e}"),
            })?;
            out.push((id, report));
        }
        Ok(out)
    }

    pub fn set_meta(&self, key: &str, value: &str) -> Result<(), StoreError> {
        self.writable()?.execute(
            "INSERT INTO model_meta (key, value) VALUES (?1, ?2) ON CONFLICT(key) DO UPDATE SET value = excluded.value",
            params![key, value],
        )?;
        Ok(())
    }

    pub fn meta(&self, key: &str) -> Result<Option<String>, StoreError> {
        Ok(self
            .conn()
            .query_row("SELECT value FROM model_meta WHERE key = ?1", [key], |r| r.get(0))
            .optional()?)
    }

    pub fn geo_cache_len(&self) -> Result<u64, StoreError> {
        let n: i64 = self.conn().query_row("SELECT COUNT(*) FROM geo_cache", [], |r| r.get(0))?;
        Ok(n as u64)
    }

    /// Writes matching rows as newline-delimited JSON.
    pub fn export_ndjson<W: Write>(&self, filter: &QueryFilter, mut out: W) -> Result<usize, StoreError> {
        let rows = self.query(filter)?;
        for r in &rows {
            serde_json::to_writer(&mut out, r).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(rows.len())
    }

    /// Reads newline-delimited rows and upserts them.
    pub fn import_ndjson<R: BufRead>(&self, input: R) -> Result<usize, StoreError> {
        let mut rows = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: AdRecordRow = serde_json::from_str(&line).map_err(|e| StoreError::BadImport {
                line: i + 1,
                reason: e.to_string(),
            })?;
            rows.push(row);
        }
        self.upsert_ads(&rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistinctColumn {
    Label,
    RegionCode,
}

impl GeoCache for Store {
    fn get(&self, key: &str) -> Result<Option<Located>, GeoError> {
        let json: Option<String> = self
            .conn()
            .query_row("SELECT value FROM geo_cache WHERE key = ?1", [key], |r| r.get(0))
            .optional()
            .map_err(|e| GeoError::Cache(e.to_string()))?;
        json.map(|j| serde_json::from_str(&j).map_err(|e| GeoError::Cache(e.to_string())))
            .transpose()
    }

    fn put(&self, key: &str, value: &Located) -> Result<(), GeoError> {
        if matches!(value, Located::Unresolved { transient: true }) {
            return Err(GeoError::TransientNotCacheable);
        }
        let json = serde_json::to_string(value).map_err(|e| GeoError::Cache(e.to_string()))?;
        let conn = self.writable().map_err(|e| GeoError::Cache(e.to_string()))?;
        conn.execute(
            "INSERT INTO geo_cache (key, value) VALUES (?1, ?2) ON CONFLICT(key) DO UPDATE SET value = excluded.value",
            params![key, json],
        )
        .map_err(|e| GeoError::Cache(e.to_string()))?;
        Ok(())
    }
}
