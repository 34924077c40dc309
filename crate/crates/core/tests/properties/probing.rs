use proptest::prelude::*;
use silentprobe::flow::NormStats;
use silentprobe::probing::{random_walk_perturb, silent_probe, ProbeConfig};
use silentprobe::sidechannel::{TelemetryModel, TelemetryModelConfig};

use super::support::{small_dataset, small_forest};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn probes_satisfy_record_invariants(seed in any::<u64>(), eps in prop::sample::select(vec![0.0, 0.01, 1.0, 25.0])) {
        let ds = small_dataset(25, seed);
        let config = ProbeConfig { base_epsilon: eps, seed, ..ProbeConfig::default() };
        for r in &random_walk_perturb(&ds, &config).unwrap().records {
            prop_assert!(r.validate().is_ok(), "{:?}", r);
        }
    }

    #[test]
    fn fixed_seed_replays_exactly(seed in any::<u64>()) {
        let ds = small_dataset(20, 1);
        let ids = small_forest(&ds, 2);
        let telemetry = TelemetryModel::new(TelemetryModelConfig { seed, ..Default::default() }, NormStats::fit(&ds).unwrap()).unwrap();
        let config = ProbeConfig { seed, ..ProbeConfig::default() };
        let a = silent_probe(&ids, &telemetry, &ds, &config).unwrap();
        let b = silent_probe(&ids, &telemetry, &ds, &config).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn outputs_see_the_ids_only_through_telemetry() {
    let ds = small_dataset(30, 9);
    let (ids_a, ids_b) = (small_forest(&ds, 1), small_forest(&ds, 2));
    assert_ne!(ids_a, ids_b);
    let telemetry = TelemetryModel::new(
        TelemetryModelConfig::default(),
        NormStats::fit(&ds).unwrap(),
    )
    .unwrap();
    let config = ProbeConfig {
        seed: 5,
        ..ProbeConfig::default()
    };
    let a = silent_probe(&ids_a, &telemetry, &ds, &config).unwrap();
    let b = silent_probe(&ids_b, &telemetry, &ds, &config).unwrap();
    // The perturbed flows do not depend on the IDS at all.
    assert_eq!(a.probes, b.probes);
    // The trace carries indicator and flow-feature columns only.
    let mut csv = Vec::new();
    a.trace.write_csv_to(&mut csv).unwrap();
    let header = String::from_utf8(csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_lowercase();
    for forbidden in ["label", "predict", "score", "vote", "node"] {
        assert!(!header.contains(forbidden), "{header}");
    }
}
