use proptest::prelude::*;
use silentprobe::defense::{c_factor, fit_iforest, roc_auc};

fn rows() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2usize..4)
        .prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), 3..80))
}

/// Pairwise count of positives scored above negatives, ties counting half.
fn mann_whitney(scores: &[f64], positive: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for (i, &p) in positive.iter().enumerate() {
        for (j, &q) in positive.iter().enumerate() {
            if p && !q {
                pairs += 1.0;
                if scores[i] > scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scores_lie_in_unit_interval_and_fall_with_depth(data in rows(), seed in any::<u64>(), probe in prop::collection::vec(-20.0f64..20.0, 4)) {
        let model = fit_iforest(&data, 20, 32, seed).unwrap();
        let psi = c_factor(model.subsample_size);
        let mut pts: Vec<Vec<f64>> = data.clone();
        pts.push(probe[..model.n_features].to_vec());
        let mut by_depth: Vec<(f64, f64)> = pts
            .iter()
            .map(|x| {
                let mean = model.trees.iter().map(|t| t.path_length(x)).sum::<f64>() / model.trees.len() as f64;
                (mean, model.anomaly_score(x))
            })
            .collect();
        for &(_, s) in &by_depth {
            prop_assert!(s > 0.0 && s <= 1.0);
        }
        by_depth.sort_by(|a, b| a.0.total_cmp(&b.0));
        prop_assert!(by_depth.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-15));
        prop_assert!(psi > 0.0);
    }

    #[test]
    fn auc_equals_normalized_mann_whitney(scores in prop::collection::vec(prop_oneof![0.0f64..1.0, Just(0.5)], 2..60), flags in prop::collection::vec(any::<bool>(), 60)) {
        let positive: Vec<bool> = flags[..scores.len()].to_vec();
        prop_assume!(positive.iter().any(|&p| p) && positive.iter().any(|&p| !p));
        let auc = roc_auc(&scores, &positive).unwrap();
        prop_assert!((auc - mann_whitney(&scores, &positive)).abs() <= 1e-12);
    }

    #[test]
    fn fit_and_score_replay_per_seed(data in rows(), seed in any::<u64>()) {
        let a = fit_iforest(&data, 10, 16, seed).unwrap();
        let b = fit_iforest(&data, 10, 16, seed).unwrap();
        prop_assert_eq!(a.scores(&data), b.scores(&data));
        prop_assert_eq!(a, b);
    }
}

#[test]
fn average_path_normalizer_known_values() {
    assert_eq!(c_factor(2), 1.0);
    assert!((c_factor(256) - 10.244).abs() <= 1e-3);
}
