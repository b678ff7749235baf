/// Trims, collapses internal whitespace and case-folds a location string.
pub fn normalize_location(raw: &str) -> String {
    raw.split_whitespace().map(str::to_lowercase).collect::<Vec<_>>().join(" ")
}
