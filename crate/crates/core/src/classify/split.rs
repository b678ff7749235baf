use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Splits items into train/test per label, shuffling each label's items with
/// a seeded generator. Each label contributes `round(len * test_fraction)`
/// items to the test side, always leaving at least one for training.
pub fn stratified_split<T: Clone>(
    by_label: &BTreeMap<String, Vec<T>>,
    test_fraction: f64,
    seed: u64,
) -> (Vec<(T, String)>, Vec<(T, String)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (label, items) in by_label {
        let mut order: Vec<usize> = (0..items.len()).collect();
        order.shuffle(&mut rng);
        let n_test = ((items.len() as f64 * test_fraction).round() as usize).min(items.len().saturating_sub(1));
        for (k, &i) in order.iter().enumerate() {
            let pair = (items[i].clone(), label.clone());
            if k < n_test {
                test.push(pair);
            } else {
                train.push(pair);
            }
        }
    }
    (train, test)
}
