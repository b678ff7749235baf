/// The sector label set: 48 named categories plus [`OTHER`].
pub const SECTOR_LABELS: [&str; 49] = [
    "account", "accountant", "administrator", "assistant",
    "business", "buyer", "care", "charity",
    "cleaner", "construction", "customer", "data",
    "delivery", "electrician", "finance", "garage",
    "graduate", "hgv", "hotel", "hr",
    "itsupportengineer", "kitchen", "machine", "marketing",
    "nurse", "nursery", "physio", "plumber",
    "prison", "production", "productionmanager", "project",
    "property", "receptionist", "recruitment", "retail",
    "sale", "security", "server", "software",
    "solicitor", "storemanager", "support", "surveyor",
    "teacher", "vehicle", "warehouse", "welsh",
    "other",
];

/// Label for documents that resemble no named sector.
pub const OTHER: &str = "other";

pub fn is_sector_label(label: &str) -> bool {
    SECTOR_LABELS.contains(&label)
}

/// The 48 labels other than [`OTHER`].
pub fn named_labels() -> impl Iterator<Item = &'static str> {
    SECTOR_LABELS.iter().copied().filter(|l| *l != OTHER)
}
