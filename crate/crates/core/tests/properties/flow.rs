use std::io::Cursor;
use std::path::Path;

use proptest::prelude::*;
use silentprobe::flow::{
    generate_synthetic, load_csv, read_csv, standardize, stratified_split, write_csv_to, Feature,
    FlowDataset, SyntheticTrafficConfig,
};
use silentprobe::ids::{evaluate, train_random_forest, FeatureStrategy, ForestParams};
use silentprobe::Error;

fn fixture(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

/// Counts fixture rows whose Duration, TotPkts, TotBytes and Label cells are all usable.
fn hand_parsed_rows(text: &str) -> usize {
    text.lines()
        .skip(1)
        .filter(|line| {
            let cells: Vec<&str> = line.split(',').collect();
            cells.len() == 4
                && cells[..3].iter().all(|c| c.trim().parse::<f64>().is_ok())
                && !cells[3].trim().is_empty()
        })
        .count()
}

#[test]
fn fixture_rows_match_hand_parser() {
    let path = fixture("mixed.csv");
    let text = std::fs::read_to_string(&path).unwrap();
    let ds = load_csv(
        &path,
        &[Feature::Duration, Feature::TotPkts, Feature::TotBytes],
    )
    .unwrap();
    assert_eq!(ds.len(), hand_parsed_rows(&text));
    assert_eq!(ds.len(), 3);
    assert!(ds.records.iter().all(|r| r.validate().is_ok()));
}

#[test]
fn missing_label_column_names_it() {
    let text = "Duration,TotPkts,TotBytes\n1,2,3\n";
    match read_csv(Cursor::new(text), &[Feature::Duration]) {
        Err(Error::MissingColumn(c)) => assert_eq!(c, "Label"),
        other => panic!("expected a schema error, got {other:?}"),
    }
}

#[test]
fn four_scale_shift_is_separable_by_a_shallow_tree() {
    let config = SyntheticTrafficConfig {
        n_benign: 400,
        n_malicious: 400,
        seed: 11,
        ..SyntheticTrafficConfig::with_class_shift(4.0)
    };
    let ds = generate_synthetic(&config).unwrap();
    let ds = FlowDataset::new(ds.records, Feature::VOLUME.to_vec());
    let (train, test) = stratified_split(&ds, 0.3, 5).unwrap();
    let params = ForestParams {
        n_estimators: 1,
        max_depth: 3,
        features_per_split: FeatureStrategy::All,
        bootstrap: false,
    };
    let model = train_random_forest(&train, &params, 1).unwrap();
    assert!(evaluate(&model, &test).unwrap().accuracy >= 0.95);
}

fn cell() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        Just("abc".to_string()),
        Just("-1".to_string()),
        Just("NaN".to_string()),
        Just("inf".to_string()),
        (0.0f64..1e6).prop_map(|v| v.to_string()),
        (0u32..100_000).prop_map(|v| v.to_string()),
    ]
}

fn label() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(String::new()),
        Just("Benign".to_string()),
        Just("Malicious".to_string()),
        Just("DDoS".to_string()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parsing_is_total(rows in prop::collection::vec((cell(), cell(), cell(), cell(), label()), 0..20)) {
        let mut text = String::from("Duration,TotPkts,TotBytes,DstPort,Label\n");
        for (a, b, c, d, l) in &rows {
            text.push_str(&format!("{a},{b},{c},{d},{l}\n"));
        }
        let features = [Feature::Duration, Feature::TotPkts, Feature::TotBytes, Feature::DstPort];
        match read_csv(Cursor::new(text), &features) {
            Ok((ds, summary)) => {
                prop_assert!(!ds.is_empty());
                prop_assert_eq!(summary.rows_kept, ds.len());
                for r in &ds.records {
                    prop_assert!(r.validate().is_ok(), "{:?}", r);
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::EmptyDataset), "undeclared error {e:?}"),
        }
    }

    #[test]
    fn standardize_then_invert_is_identity(seed in any::<u64>()) {
        let ds = super::support::small_dataset(30, seed);
        let z = standardize(&ds).unwrap();
        let stats = z.norm_stats.as_ref().unwrap();
        for r in &ds.records {
            for &f in &ds.feature_names {
                let s = stats.get(f).unwrap();
                if !s.degenerate {
                    let x = r.get(f);
                    prop_assert!((s.invert(s.apply(x)) - x).abs() <= 1e-9 * x.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn generation_is_a_pure_function_of_config(seed in any::<u64>(), n in 1usize..40, m in 1usize..40) {
        let config = SyntheticTrafficConfig { n_benign: n, n_malicious: m, seed, ..SyntheticTrafficConfig::default() };
        let (a, b) = (generate_synthetic(&config).unwrap(), generate_synthetic(&config).unwrap());
        let (mut ta, mut tb) = (Vec::new(), Vec::new());
        write_csv_to(&a, &mut ta).unwrap();
        write_csv_to(&b, &mut tb).unwrap();
        prop_assert_eq!(ta, tb);
        prop_assert_eq!(a.class_counts(), [n, m]);
    }
}
