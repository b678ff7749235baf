use std::collections::HashMap;
use std::sync::RwLock;

use super::{GeoError, Located};

/// Remote-geocoder answers keyed by normalized location string. Definitive
/// misses are stored as non-transient `Unresolved`.
pub trait GeoCache: Send + Sync {
    fn get(&self, key: &str) -> Result<Option<Located>, GeoError>;
    fn put(&self, key: &str, value: &Located) -> Result<(), GeoError>;
}

impl<C: GeoCache + ?Sized> GeoCache for std::sync::Arc<C> {
    fn get(&self, key: &str) -> Result<Option<Located>, GeoError> {
        (**self).get(key)
    }
    fn put(&self, key: &str, value: &Located) -> Result<(), GeoError> {
        (**self).put(key, value)
    }
}

impl<C: GeoCache + ?Sized> GeoCache for &C {
    fn get(&self, key: &str) -> Result<Option<Located>, GeoError> {
        (**self).get(key)
    }
    fn put(&self, key: &str, value: &Located) -> Result<(), GeoError> {
        (**self).put(key, value)
    }
}

/// In-process cache; concurrent reads, serialized writes.
#[derive(Debug, Default)]
pub struct MemoryGeoCache {
    entries: RwLock<HashMap<String, Located>>,
}

impl MemoryGeoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl GeoCache for MemoryGeoCache {
    fn get(&self, key: &str) -> Result<Option<Located>, GeoError> {
        Ok(self.entries.read().unwrap_or_else(|e| e.into_inner()).get(key).cloned())
    }

    fn put(&self, key: &str, value: &Located) -> Result<(), GeoError> {
        if matches!(value, Located::Unresolved { transient: true }) {
            return Err(GeoError::TransientNotCacheable);
        }
        self.entries
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key.to_string(), value.clone());
        Ok(())
    }
}
