use proptest::prelude::*;
use silentprobe::changepoint::{binseg, segment_cost, CostModel};

/// Optimal cost of splitting `x` into `k + 1` segments of at least `min_len` points.
fn optimal_cost(x: &[f64], k: usize, min_len: usize, model: CostModel) -> f64 {
    let n = x.len();
    let cost = |a: usize, b: usize| segment_cost(x, a, b, model).unwrap();
    // best[j][e]: cheapest split of x[..e] into j + 1 segments.
    let mut best = vec![vec![f64::INFINITY; n + 1]; k + 1];
    for e in min_len..=n {
        best[0][e] = cost(0, e);
    }
    for j in 1..=k {
        for e in (j + 1) * min_len..=n {
            for s in j * min_len..=e - min_len {
                let c = best[j - 1][s] + cost(s, e);
                if c < best[j][e] {
                    best[j][e] = c;
                }
            }
        }
    }
    best[k][n]
}

fn series() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 12..60)
}

fn model() -> impl Strategy<Value = CostModel> {
    prop_oneof![
        Just(CostModel::L2),
        Just(CostModel::Rbf {
            bandwidth: Some(2.0)
        })
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_cost_bounds_the_optimum(x in series(), k in 1usize..4, m in model()) {
        let r = binseg(&x, k, m, 2).unwrap();
        let opt = optimal_cost(&x, r.interior().len(), 2, m);
        let tol = 1e-9 * opt.abs().max(1.0);
        prop_assert!(r.total_cost >= opt - tol);
        if k == 1 {
            prop_assert!((r.total_cost - opt).abs() <= tol);
        }
    }

    #[test]
    fn breakpoints_are_sorted_unique_and_terminated(x in prop::collection::vec(-10.0f64..10.0, 16..60), k in 1usize..8, m in model()) {
        let r = binseg(&x, k, m, 2).unwrap();
        prop_assert_eq!(*r.breakpoints.last().unwrap(), x.len());
        prop_assert!(r.breakpoints.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(r.segments().iter().all(|(a, b)| b - a >= 2));
    }

    #[test]
    fn l2_ignores_affine_maps(x in series(), k in 1usize..4, a in prop::sample::select(vec![-4.0, 0.5, 2.0, 8.0]), b in -100.0f64..100.0) {
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let rx = binseg(&x, k, CostModel::L2, 2).unwrap();
        let ry = binseg(&y, k, CostModel::L2, 2).unwrap();
        prop_assert_eq!(rx.breakpoints, ry.breakpoints);
    }
}
