use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::AdRecordRow;
use crate::geoloc::canonical_region_code;
use crate::ingest::{normalize_employer, ContractType, EmploymentMode};

/// Conjunction of optional clauses. `None` leaves a clause open; an empty set
/// matches nothing. Dates are half-open `[start, end)`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryFilter {
    pub labels: Option<BTreeSet<String>>,
    pub region_codes: Option<BTreeSet<String>>,
    pub date_range: Option<(NaiveDate, NaiveDate)>,
    pub contract_types: Option<BTreeSet<ContractType>>,
    pub modes: Option<BTreeSet<EmploymentMode>>,
    pub employer_excludes: Option<BTreeSet<String>>,
}

impl QueryFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn is_match_all(&self) -> bool {
        *self == Self::default()
    }

    pub fn with_labels<I: IntoIterator<Item = S>, S: Into<String>>(mut self, labels: I) -> Self {
        self.labels = Some(labels.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_regions<I: IntoIterator<Item = S>, S: Into<String>>(mut self, codes: I) -> Self {
        self.region_codes = Some(codes.into_iter().map(Into::into).collect());
        self
    }

    pub fn with_dates(mut self, start: NaiveDate, end: NaiveDate) -> Self {
        self.date_range = Some((start, end));
        self
    }

    pub fn with_contracts<I: IntoIterator<Item = ContractType>>(mut self, c: I) -> Self {
        self.contract_types = Some(c.into_iter().collect());
        self
    }

    pub fn with_modes<I: IntoIterator<Item = EmploymentMode>>(mut self, m: I) -> Self {
        self.modes = Some(m.into_iter().collect());
        self
    }

    pub fn excluding_employers<I: IntoIterator<Item = S>, S: Into<String>>(mut self, e: I) -> Self {
        self.employer_excludes = Some(e.into_iter().map(Into::into).collect());
        self
    }

    /// Region codes with London sub-codes folded onto the merged code.
    pub fn canonical_regions(&self) -> Option<BTreeSet<String>> {
        self.region_codes
            .as_ref()
            .map(|s| s.iter().map(|c| canonical_region_code(c.trim()).to_string()).collect())
    }

    pub fn normalized_excludes(&self) -> Option<BTreeSet<String>> {
        self.employer_excludes
            .as_ref()
            .map(|s| s.iter().map(|e| normalize_employer(e)).collect())
    }

    /// In-memory evaluation of the same predicate the store runs in SQL.
    pub fn matches(&self, row: &AdRecordRow) -> bool {
        if let Some(l) = &self.labels {
            if !l.contains(&row.label) {
                return false;
            }
        }
        if let Some(r) = self.canonical_regions() {
            match &row.region_code {
                Some(code) if r.contains(canonical_region_code(code)) => {}
                _ => return false,
            }
        }
        if let Some((start, end)) = self.date_range {
            if row.ad.posted_date < start || row.ad.posted_date >= end {
                return false;
            }
        }
        if let Some(c) = &self.contract_types {
            if !c.contains(&row.ad.contract_type) {
                return false;
            }
        }
        if let Some(m) = &self.modes {
            if !m.contains(&row.ad.employment_mode) {
                return false;
            }
        }
        if let Some(e) = self.normalized_excludes() {
            if e.contains(&normalize_employer(&row.ad.employer)) {
                return false;
            }
        }
        true
    }
}
