use silentprobe::flow::{generate_synthetic, standardize, FlowDataset, SyntheticTrafficConfig};
use silentprobe::ids::{train_random_forest, ForestModel, ForestParams};

/// A small synthetic dataset of `n` flows per class.
pub fn small_dataset(n: usize, seed: u64) -> FlowDataset {
    let config = SyntheticTrafficConfig {
        n_benign: n,
        n_malicious: n,
        seed,
        ..SyntheticTrafficConfig::default()
    };
    generate_synthetic(&config).unwrap()
}

pub fn small_forest(train: &FlowDataset, seed: u64) -> ForestModel {
    let params = ForestParams {
        n_estimators: 10,
        max_depth: 6,
        ..ForestParams::default()
    };
    train_random_forest(&standardize(train).unwrap(), &params, seed).unwrap()
}
