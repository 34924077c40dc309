use std::collections::BTreeMap;

use proptest::prelude::*;
use silentprobe::causality::{identify_sensitive, vif, CausalityParams};
use silentprobe::changepoint::{binseg, CostModel};
use silentprobe::flow::NormStats;
use silentprobe::sidechannel::{Indicator, TelemetryModel, TelemetryModelConfig};
use silentprobe::stats::{f_cdf, ols_fit_columns, student_t_cdf};

use super::common::tables::{F_TABLE, STUDENT_T_TABLE};
use super::support::{small_dataset, small_forest};

#[test]
fn cdfs_match_reference_tables() {
    for &(df, x, p) in &STUDENT_T_TABLE {
        assert!((student_t_cdf(x, df) - p).abs() <= 1e-9, "t({df}) at {x}");
    }
    for &(d1, d2, x, p) in &F_TABLE {
        assert!((f_cdf(x, d1, d2) - p).abs() <= 1e-9, "F({d1}, {d2}) at {x}");
    }
}

fn design() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>)> {
    (10usize..40, 1usize..5).prop_flat_map(|(n, k)| {
        (
            prop::collection::vec(prop::collection::vec(-50.0f64..50.0, n), k),
            prop::collection::vec(-50.0f64..50.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residuals_are_orthogonal_to_the_design((cols, y) in design()) {
        let mut design = vec![vec![1.0; y.len()]];
        design.extend(cols);
        if let Ok(fit) = ols_fit_columns(&design, &y) {
            let scale = y.iter().map(|v| v * v).sum::<f64>().sqrt()
                * design.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(1.0, f64::max);
            for c in &design {
                let dot: f64 = c.iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn vif_is_scale_invariant((cols, _) in design(), scales in prop::collection::vec(prop_oneof![1e-3f64..1e3, -1e3f64..-1e-3], 5)) {
        let before = vif(&cols).unwrap();
        let scaled: Vec<Vec<f64>> = cols.iter().zip(&scales).map(|(c, s)| c.iter().map(|v| v * s).collect()).collect();
        let after = vif(&scaled).unwrap();
        for (a, b) in before.iter().zip(&after) {
            if a.is_finite() && *a < 1e4 {
                prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0), "{a} vs {b}");
            }
        }
    }
}

#[test]
fn identification_is_deterministic() {
    let ds = small_dataset(80, 21);
    let ids = small_forest(&ds, 21);
    let model = TelemetryModel::new(
        TelemetryModelConfig::default(),
        NormStats::fit(&ds).unwrap(),
    )
    .unwrap();
    let trace = model.trace(&ids, &ds);
    let obs = trace.observations();
    let breakpoints: BTreeMap<Indicator, Vec<usize>> = Indicator::ALL
        .into_iter()
        .map(|i| {
            (
                i,
                binseg(&obs.series(i), 3, CostModel::L2, 2)
                    .unwrap()
                    .breakpoints,
            )
        })
        .collect();
    let a = identify_sensitive(
        trace.observations(),
        &breakpoints,
        &CausalityParams::default(),
    )
    .unwrap();
    let b = identify_sensitive(
        trace.observations(),
        &breakpoints,
        &CausalityParams::default(),
    )
    .unwrap();
    assert_eq!(a, b);
}
