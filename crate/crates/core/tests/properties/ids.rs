use proptest::prelude::*;
use silentprobe::flow::{Feature, FlowDataset, FlowRecord, Label};
use silentprobe::ids::{evaluate, predict, train_random_forest, FeatureStrategy, ForestParams};

/// Reference CART: every midpoint of every feature, Gini impurity, earliest strict improvement.
enum Oracle {
    Leaf(Label),
    Split(usize, f64, Box<Oracle>, Box<Oracle>),
}

fn gini_mass(b: usize, m: usize) -> f64 {
    let n = b + m;
    if n == 0 {
        0.0
    } else {
        n as f64 - ((b * b + m * m) as f64) / n as f64
    }
}

fn oracle_tree(rows: &[(Vec<f64>, Label)], depth: usize, max_depth: usize) -> Oracle {
    let m = rows.iter().filter(|r| r.1.is_malicious()).count();
    let b = rows.len() - m;
    let majority = if m >= b {
        Label::Malicious
    } else {
        Label::Benign
    };
    if depth >= max_depth || rows.len() < 2 || m == 0 || b == 0 {
        return Oracle::Leaf(majority);
    }
    let parent = gini_mass(b, m);
    let mut best: Option<(f64, usize, f64)> = None;
    for f in 0..rows[0].0.len() {
        let mut values: Vec<f64> = rows.iter().map(|r| r.0[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let t = w[0] + (w[1] - w[0]) * 0.5;
            let (mut lb, mut lm) = (0, 0);
            for r in rows.iter().filter(|r| r.0[f] <= t) {
                if r.1.is_malicious() {
                    lm += 1
                } else {
                    lb += 1
                }
            }
            let imp = gini_mass(lb, lm) + gini_mass(b - lb, m - lm);
            if best.is_none_or(|(bi, _, _)| imp < bi) {
                best = Some((imp, f, t));
            }
        }
    }
    match best {
        Some((imp, f, t)) if parent - imp > 1e-12 => {
            let (l, r): (Vec<_>, Vec<_>) = rows.iter().cloned().partition(|r| r.0[f] <= t);
            Oracle::Split(
                f,
                t,
                Box::new(oracle_tree(&l, depth + 1, max_depth)),
                Box::new(oracle_tree(&r, depth + 1, max_depth)),
            )
        }
        _ => Oracle::Leaf(majority),
    }
}

fn oracle_predict(t: &Oracle, x: &[f64]) -> Label {
    match t {
        Oracle::Leaf(l) => *l,
        Oracle::Split(f, th, l, r) => oracle_predict(if x[*f] <= *th { l } else { r }, x),
    }
}

fn record(d: f64, p: f64, malicious: bool) -> FlowRecord {
    let label = if malicious {
        Label::Malicious
    } else {
        Label::Benign
    };
    FlowRecord::new(d, p, p * 100.0, label)
}

fn points() -> impl Strategy<Value = Vec<(f64, f64, bool)>> {
    prop::collection::vec((0.1f64..10.0, 1u32..30, any::<bool>()), 4..50)
        .prop_map(|v| v.into_iter().map(|(d, p, m)| (d, p as f64, m)).collect())
        .prop_filter("both classes", |v: &Vec<(f64, f64, bool)>| {
            v.iter().any(|r| r.2) && v.iter().any(|r| !r.2)
        })
}

const FEATURES: [Feature; 2] = [Feature::Duration, Feature::TotPkts];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn single_full_tree_matches_exhaustive_cart(pts in points(), queries in prop::collection::vec((0.0f64..11.0, 0u32..32), 20)) {
        let ds = FlowDataset::new(pts.iter().map(|&(d, p, m)| record(d, p, m)).collect(), FEATURES.to_vec());
        let params = ForestParams { n_estimators: 1, max_depth: 10, features_per_split: FeatureStrategy::All, bootstrap: false };
        let model = train_random_forest(&ds, &params, 3).unwrap();
        let rows: Vec<(Vec<f64>, Label)> = pts.iter().map(|&(d, p, m)| (vec![d, p], record(d, p, m).label)).collect();
        let oracle = oracle_tree(&rows, 0, 10);
        for (d, p) in queries.iter().map(|&(d, p)| (d, p as f64)).chain(pts.iter().map(|&(d, p, _)| (d, p))) {
            prop_assert_eq!(model.predict_record(&record(d, p, false)), oracle_predict(&oracle, &[d, p]));
        }
    }

    #[test]
    fn f1_is_harmonic_mean(pts in points(), seed in any::<u64>()) {
        let ds = FlowDataset::new(pts.iter().map(|&(d, p, m)| record(d, p, m)).collect(), FEATURES.to_vec());
        let params = ForestParams { n_estimators: 5, max_depth: 3, ..ForestParams::default() };
        let model = train_random_forest(&ds, &params, seed).unwrap();
        let m = evaluate(&model, &ds).unwrap();
        if m.precision + m.recall > 0.0 {
            let f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
            prop_assert!((m.f1 - f1).abs() <= 1e-12);
        }
    }

    #[test]
    fn prediction_ignores_test_order(pts in points(), seed in any::<u64>(), rot in 0usize..50) {
        let ds = FlowDataset::new(pts.iter().map(|&(d, p, m)| record(d, p, m)).collect(), FEATURES.to_vec());
        let params = ForestParams { n_estimators: 7, max_depth: 4, ..ForestParams::default() };
        let model = train_random_forest(&ds, &params, seed).unwrap();
        let before = predict(&model, &ds).unwrap();
        let k = rot % ds.len();
        let mut records = ds.records.clone();
        records.rotate_left(k);
        let after = predict(&model, &ds.with_records(records)).unwrap();
        let mut expected = before.clone();
        expected.rotate_left(k);
        prop_assert_eq!(after, expected);
    }
}
