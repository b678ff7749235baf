//! Synthetic job-board fixtures with a known composition.

use std::io::Write;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use vacobs_core::ingest::DEFAULT_BLOCKLIST;

use crate::data::{self, COUNTIES_TXT, GAZETTEER_TSV};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub ads: usize,
    pub first_id: u64,
    pub start: NaiveDate,
    pub days: u32,
    pub null_fraction: f64,
    pub blocked_fraction: f64,
    pub unresolvable_fraction: f64,
    /// Ads with no seed phrase in the title.
    pub unseeded_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            ads: 1000,
            first_id: 1_000_000,
            start: NaiveDate::from_ymd_opt(2020, 1, 6).expect("valid date"),
            days: 28,
            null_fraction: 0.05,
            blocked_fraction: 0.04,
            unresolvable_fraction: 0.03,
            unseeded_fraction: 0.05,
            seed: 20190111,
        }
    }
}

/// How many records of each kind were written.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthComposition {
    pub total: u64,
    pub nulls: u64,
    pub blocked: u64,
    pub unresolvable: u64,
    pub retained: u64,
}

const EMPLOYERS: [&str; 8] = [
    "Acme Recruitment",
    "Harbour Staffing",
    "Northgate Care",
    "Pennine Logistics",
    "Severn Schools Trust",
    "Cobalt Digital",
    "Marlow Hotels",
    "Fenland Foods",
];

const FILLER: [&str; 10] = ["team", "role", "experience", "apply", "opportunity", "skills", "support", "days", "company", "training"];

const UNSEEDED_TITLES: [&str; 6] = [
    "Zookeeper",
    "Lighthouse keeper",
    "Puppeteer",
    "Falconer",
    "Glassblower",
    "Beekeeper",
];

const UNSEEDED_WORDS: [&str; 8] = ["feather", "kiln", "marionette", "enclosure", "lantern", "hive", "talon", "molten"];

fn names(tsv: &str) -> Vec<String> {
    tsv.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter(|l| l.split('\t').nth(3).map_or(true, |c| matches!(c.trim(), "GB" | "UK")))
        .filter_map(|l| l.split('\t').next())
        .map(str::to_string)
        .collect()
}

fn date_str(d: NaiveDate) -> String {
    d.format("%d/%m/%Y").to_string()
}

/// Records in id order, `jobId` included, plus their composition.
pub fn generate(spec: &SynthSpec) -> (Vec<Value>, SynthComposition) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let phrases: Vec<(String, Vec<String>)> = data::seeds(None)
        .expect("bundled seeds parse")
        .phrases
        .into_iter()
        .collect();
    let mut places = names(GAZETTEER_TSV);
    places.extend(names(COUNTIES_TXT));
    let mut comp = SynthComposition::default();
    let mut out = Vec::with_capacity(spec.ads);
    for i in 0..spec.ads {
        let id = spec.first_id + i as u64;
        comp.total += 1;
        if rng.gen_bool(spec.null_fraction) {
            comp.nulls += 1;
            out.push(json!({
                "jobId": id, "jobTitle": null, "jobDescription": null, "employerName": null,
                "locationName": null, "date": null, "minimumSalary": null, "maximumSalary": null
            }));
            continue;
        }
        let (label, ps) = phrases.choose(&mut rng).expect("seeds are non-empty");
        let phrase = ps.choose(&mut rng).expect("labels have phrases");
        let unseeded = rng.gen_bool(spec.unseeded_fraction);
        let title = if unseeded {
            UNSEEDED_TITLES.choose(&mut rng).expect("non-empty").to_string()
        } else if rng.gen_bool(0.3) {
            format!("Senior {phrase}")
        } else {
            phrase.clone()
        };
        let vocab: &[&str] = if unseeded { &UNSEEDED_WORDS } else { &FILLER };
        let mut words: Vec<String> = (0..12).map(|_| vocab.choose(&mut rng).expect("non-empty").to_string()).collect();
        if !unseeded {
            words.extend(phrase.split_whitespace().map(str::to_string));
            words.push(format!("{label}work"));
        }
        words.shuffle(&mut rng);
        let blocked = rng.gen_bool(spec.blocked_fraction);
        let employer = if blocked {
            comp.blocked += 1;
            DEFAULT_BLOCKLIST.choose(&mut rng).expect("non-empty").to_string()
        } else {
            EMPLOYERS.choose(&mut rng).expect("non-empty").to_string()
        };
        let location = if rng.gen_bool(spec.unresolvable_fraction) {
            if !blocked {
                comp.unresolvable += 1;
            }
            format!("Nowhere Upon Marsh {id}")
        } else {
            places.choose(&mut rng).expect("non-empty").clone()
        };
        let date = spec.start + Duration::days(rng.gen_range(0..spec.days.max(1)) as i64);
        let salary = rng.gen_bool(0.7).then(|| (rng.gen_range(16..60) * 1000) as f64);
        let contract = ["temporary", "permanent", "contract"][rng.gen_range(0..3)];
        let (full, part) = [(true, false), (false, true), (true, true)][rng.gen_range(0..3)];
        let mut rec = json!({
            "jobId": id,
            "jobTitle": title,
            "jobDescription": words.join(" "),
            "employerName": employer,
            "locationName": location,
            "date": date_str(date),
            "minimumSalary": salary,
            "maximumSalary": salary.map(|s| s + 5000.0),
            "currency": "GBP",
            "fullTime": full,
            "partTime": part,
        });
        rec[contract] = Value::Bool(true);
        if !blocked {
            comp.retained += 1;
        }
        out.push(rec);
    }
    (out, comp)
}

pub fn write_ndjson<W: Write>(records: &[Value], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
