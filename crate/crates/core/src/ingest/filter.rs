use std::collections::HashSet;

use super::parse::JobAd;

/// Employers whose ads are mirrored from other government job boards.
pub const DEFAULT_BLOCKLIST: [&str; 3] = [
    "DWP Teaching",
    "Department of Work & Pensions",
    "NHS Business Services Authority",
];

/// Case-folds and collapses internal whitespace.
pub fn normalize_employer(name: &str) -> String {
    name.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// A set of normalized employer names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocklist(HashSet<String>);

impl Blocklist {
    pub fn empty() -> Self {
        Self(HashSet::new())
    }

    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self(
            names
                .into_iter()
                .map(|s| normalize_employer(s.as_ref()))
                .filter(|s| !s.is_empty())
                .collect(),
        )
    }

    pub fn contains(&self, employer: &str) -> bool {
        self.0.contains(&normalize_employer(employer))
    }

    pub fn union(&self, other: &Blocklist) -> Blocklist {
        Blocklist(self.0.union(&other.0).cloned().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for Blocklist {
    fn default() -> Self {
        Self::new(DEFAULT_BLOCKLIST)
    }
}

/// Drops ads from blocked employers, preserving input order.
pub fn filter_cross_posts(ads: Vec<JobAd>, blocklist: &Blocklist) -> (Vec<JobAd>, usize) {
    let before = ads.len();
    let retained: Vec<JobAd> = ads.into_iter().filter(|ad| !blocklist.contains(&ad.employer)).collect();
    let removed = before - retained.len();
    (retained, removed)
}
