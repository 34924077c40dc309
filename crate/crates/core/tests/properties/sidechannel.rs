use std::collections::BTreeMap;

use proptest::prelude::*;
use silentprobe::causality::{identify_sensitive, CausalityParams};
use silentprobe::changepoint::{binseg, CostModel};
use silentprobe::flow::{Feature, NormStats};
use silentprobe::sidechannel::{Indicator, PerIndicator, TelemetryModel, TelemetryModelConfig};

use super::support::{small_dataset, small_forest};

fn zero_noise() -> TelemetryModelConfig {
    TelemetryModelConfig {
        noise_std: PerIndicator::from_fn(|_| 0.0),
        ..TelemetryModelConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn noiseless_telemetry_is_affine(seed in any::<u64>()) {
        let ds = small_dataset(40, seed);
        let ids = small_forest(&ds, seed);
        let reference = NormStats::fit(&ds).unwrap();
        let config = zero_noise();
        let model = TelemetryModel::new(config.clone(), reference.clone()).unwrap();
        let trace = model.trace(&ids, &ds);
        for (r, s) in ds.records.iter().zip(&trace.samples) {
            let work = ids.classify(&ids.inputs(r)).1 as f64 / ids.n_estimators() as f64;
            for i in Indicator::ALL {
                let signal: f64 = config.weights.get(i).iter().map(|(&f, &w)| w * reference.transform(f, r.get(f))).sum();
                let expected = config.baseline.get(i) + signal + config.work_gain.get(i) * work;
                let (lo, hi) = i.range();
                prop_assert!((s.get(i) - expected.clamp(lo, hi)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn clamping_keeps_values_physical(seed in any::<u64>(), scale in prop::sample::select(vec![1e-3, 1.0, 1e3, 1e12])) {
        let ds = small_dataset(20, seed);
        let ids = small_forest(&ds, seed);
        let mut config = TelemetryModelConfig::default();
        for i in Indicator::ALL {
            for w in config.weights.get_mut(i).values_mut() {
                *w *= scale;
            }
        }
        let model = TelemetryModel::new(config, NormStats::fit(&ds).unwrap()).unwrap();
        for s in model.trace(&ids, &ds).samples {
            for i in Indicator::ALL {
                let (lo, hi) = i.range();
                let v = s.get(i);
                prop_assert!(v.is_finite() && v >= lo && v <= hi);
            }
        }
    }
}

#[test]
fn analysis_never_reads_ground_truth() {
    let ds = small_dataset(60, 4);
    let ids = small_forest(&ds, 4);
    let model = TelemetryModel::new(
        TelemetryModelConfig::default(),
        NormStats::fit(&ds).unwrap(),
    )
    .unwrap();
    let honest = model.trace(&ids, &ds);
    let mut lying = honest.clone();
    lying.ground_truth_sensitive = [Feature::SrcPort, Feature::Timestamp].into_iter().collect();

    let analyse = |trace: &silentprobe::sidechannel::TelemetryTrace| {
        let obs = trace.observations();
        let breakpoints: BTreeMap<Indicator, Vec<usize>> = Indicator::ALL
            .into_iter()
            .map(|i| {
                (
                    i,
                    binseg(&obs.series(i), 2, CostModel::L2, 2)
                        .unwrap()
                        .breakpoints,
                )
            })
            .collect();
        let report = identify_sensitive(obs, &breakpoints, &CausalityParams::default()).unwrap();
        (breakpoints, serde_json::to_string(&report).unwrap())
    };
    assert_eq!(analyse(&honest), analyse(&lying));
}
