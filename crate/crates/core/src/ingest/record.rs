use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One record as returned by the source for a single sequential id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAdRecord {
    pub ad_id: u64,
    /// Field name to scalar value; `Value::Null` marks an absent field.
    pub payload: BTreeMap<String, Value>,
    /// Set when the source answered with a permanent failure for this id.
    #[serde(default)]
    pub fetch_failed: bool,
}

impl RawAdRecord {
    pub fn new(ad_id: u64, payload: BTreeMap<String, Value>) -> Self {
        Self {
            ad_id,
            payload,
            fetch_failed: false,
        }
    }

    /// Builds a record from a JSON body. Anything other than an object
    /// (including a bare `null`) becomes an empty payload.
    pub fn from_json(ad_id: u64, body: Value) -> Self {
        let payload = match body {
            Value::Object(map) => map.into_iter().collect(),
            _ => BTreeMap::new(),
        };
        Self::new(ad_id, payload)
    }

    pub fn fetch_failed(ad_id: u64) -> Self {
        Self {
            ad_id,
            payload: BTreeMap::new(),
            fetch_failed: true,
        }
    }

    pub fn field(&self, name: &str) -> Option<&Value> {
        self.payload.get(name).filter(|v| !v.is_null())
    }
}

/// True iff every payload value is absent. An empty payload is null.
pub fn is_null_record(record: &RawAdRecord) -> bool {
    record.payload.values().all(Value::is_null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn all_null_payload_is_null() {
        let r = RawAdRecord::from_json(1, json!({"title": null, "description": null, "employer": null}));
        assert!(is_null_record(&r));
    }

    #[test]
    fn one_present_field_is_not_null() {
        let r = RawAdRecord::from_json(1, json!({"title": "Nurse", "description": null}));
        assert!(!is_null_record(&r));
    }

    #[test]
    fn empty_payload_is_null() {
        assert!(is_null_record(&RawAdRecord::new(1, BTreeMap::new())));
        assert!(is_null_record(&RawAdRecord::from_json(1, Value::Null)));
    }
}
