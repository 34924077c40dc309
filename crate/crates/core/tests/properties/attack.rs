use proptest::prelude::*;
use silentprobe::attack::{craft_adversarial, evaluate_attack, AttackConfig};
use silentprobe::flow::Feature;

use super::support::{small_dataset, small_forest};

fn config(seed: u64, epsilon: f64, k: f64) -> AttackConfig {
    AttackConfig {
        epsilon,
        bound_multiplier: k,
        seed,
        ..AttackConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn crafted_flows_respect_every_contract(
        seed in any::<u64>(),
        eps in prop::sample::select(vec![0.0, 0.15, 1.0, 10.0]),
        k in prop::sample::select(vec![0.05, 0.3, 2.0]),
    ) {
        let clean = small_dataset(30, seed);
        let crafted = craft_adversarial(&clean, &config(seed, eps, k)).unwrap();
        let adv = &crafted.flows;
        for (c, a) in clean.records.iter().zip(&adv.records) {
            prop_assert!(a.validate().is_ok(), "{:?}", a);
            if !c.label.is_malicious() {
                prop_assert_eq!(c, a);
                continue;
            }
            for f in Feature::ALL {
                let bound = k * clean.feature_std(f) + 1e-9;
                prop_assert!((a.get(f) - c.get(f)).abs() <= bound, "{f}: {} -> {}", c.get(f), a.get(f));
            }
        }
        let again = craft_adversarial(&clean, &config(seed, eps, k)).unwrap();
        prop_assert_eq!(&again.flows, adv);
    }
}

#[test]
fn zero_budget_leaves_metrics_unchanged() {
    let clean = small_dataset(40, 3);
    let model = small_forest(&clean, 3);
    let crafted = craft_adversarial(&clean, &config(1, 0.0, 0.3)).unwrap();
    let report = evaluate_attack(&model, &clean, &crafted.flows).unwrap();
    assert_eq!(report.pre, report.post);
    assert_eq!(report.change_pp.accuracy, 0.0);
}
