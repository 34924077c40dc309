use std::collections::BTreeMap;
use std::fs::File;

use serde::{Deserialize, Serialize};

use super::artifacts::*;
use super::config::{DataSource, ExperimentConfig};
use super::report::*;
use crate::attack::{craft_adversarial, evaluate_attack, naive_attack, AttackConfig};
use crate::causality::{identify_sensitive, SensitivityReport};
use crate::changepoint::binseg;
use crate::defense::{detector_samples, evaluate_defense, fit_iforest, DefenseReport};
use crate::error::{Error, Result};
use crate::flow::{
    generate_synthetic, read_csv, select_features, standardize, stratified_split, write_csv,
    Feature, FlowDataset, NormStats, SelectionPolicy,
};
use crate::ids::{
    evaluate, grid_search, predict, train_random_forest, ClassifierMetrics, ForestModel,
    GridSearchResult,
};
use crate::probing::silent_probe;
use crate::seed::{item_seed, stage_seed};
use crate::sidechannel::{Indicator, TelemetryModel, TelemetryTrace};

/// Subcommands in pipeline order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Generate,
    Train,
    Probe,
    DetectCp,
    Analyze,
    Attack,
    Defend,
    Report,
}

impl Stage {
    pub const ALL: [Stage; 8] = [
        Stage::Generate,
        Stage::Train,
        Stage::Probe,
        Stage::DetectCp,
        Stage::Analyze,
        Stage::Attack,
        Stage::Defend,
        Stage::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Train => "train",
            Stage::Probe => "probe",
            Stage::DetectCp => "detect-cp",
            Stage::Analyze => "analyze",
            Stage::Attack => "attack",
            Stage::Defend => "defend",
            Stage::Report => "report",
        }
    }
}

/// A configured experiment writing into one artifact directory.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub master_seed: u64,
    pub dir: ArtifactDir,
}

/// `(flow index, adversarial, anomaly score)`.
type Scored = (usize, bool, f64);

#[derive(Serialize, Deserialize)]
struct DatasetFile {
    summary: DatasetSummary,
}

#[derive(Serialize, Deserialize)]
struct IdsMetricsFile {
    features: Vec<Feature>,
    n_train: usize,
    n_test: usize,
    metrics: ClassifierMetrics,
}

#[derive(Serialize, Deserialize)]
struct DefenseFile {
    defense: DefenseSummary,
}

impl Experiment {
    pub fn new(config: ExperimentConfig, master_seed: u64, dir: ArtifactDir) -> Experiment {
        Experiment {
            config,
            master_seed,
            dir,
        }
    }

    fn seed(&self, stage: &str) -> u64 {
        stage_seed(self.master_seed, stage)
    }

    pub fn run(&self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Generate => self.generate(),
            Stage::Train => self.train(),
            Stage::Probe => self.probe(),
            Stage::DetectCp => self.detect_cp(),
            Stage::Analyze => self.analyze(),
            Stage::Attack => self.attack(),
            Stage::Defend => self.defend(),
            Stage::Report => self.report().map(|_| ()),
        }
    }

    fn required_columns(&self) -> Vec<Feature> {
        match &self.config.data.selection {
            SelectionPolicy::Whitelist { features } => features.clone(),
            SelectionPolicy::VarianceTopK { .. } => Feature::VOLUME.to_vec(),
        }
    }

    pub fn generate(&self) -> Result<()> {
        let (flows, source, dropped) = match &self.config.data.source {
            DataSource::Synthetic(cfg) => {
                let mut cfg = cfg.clone();
                cfg.seed = self.seed("generate");
                (generate_synthetic(&cfg)?, "synthetic".to_string(), None)
            }
            DataSource::Csv { path } => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                let (mut ds, summary) = read_csv(file, &self.required_columns())?;
                ds.feature_names = Feature::ALL.to_vec();
                let dropped = summary.dropped_invalid + summary.dropped_unlabeled;
                (ds, path.display().to_string(), Some(dropped))
            }
        };
        let [benign, malicious] = flows.class_counts();
        write_csv(&flows, self.dir.path(FLOWS))?;
        self.dir.write_json(
            DATASET,
            &DatasetFile {
                summary: DatasetSummary {
                    source,
                    n_records: flows.len(),
                    benign,
                    malicious,
                    rows_dropped: dropped,
                },
            },
        )
    }

    pub fn train(&self) -> Result<()> {
        let flows = self.dir.read_flows(FLOWS, &Feature::ALL)?;
        let selected = select_features(&flows, &self.config.data.selection)?;
        let (train, test) = stratified_split(
            &selected,
            self.config.data.test_fraction,
            self.seed("split"),
        )?;
        let train = standardize(&train)?;

        let grid: Option<GridSearchResult> = match &self.config.ids.grid {
            Some(spec) => Some(grid_search(&train, spec, self.seed("grid"))?),
            None => None,
        };
        let params = grid.as_ref().map_or(self.config.ids.forest, |g| g.best);
        let model = train_random_forest(&train, &params, self.seed("train"))?;
        let metrics = evaluate(&model, &test)?;

        write_csv(&train, self.dir.path(TRAIN))?;
        write_csv(&test, self.dir.path(TEST))?;
        model.save(self.dir.path(MODEL))?;
        self.dir.write_json(GRID, &grid)?;
        self.dir.write_json(
            IDS_METRICS,
            &IdsMetricsFile {
                features: model.feature_names.clone(),
                n_train: train.len(),
                n_test: test.len(),
                metrics,
            },
        )
    }

    fn telemetry_model(&self, stage: &str) -> Result<TelemetryModel> {
        let mut config = self.config.telemetry.clone();
        config.seed = self.seed(stage);
        let train = self.dir.read_flows(TRAIN, &[])?;
        let reference = NormStats::fit(&FlowDataset::new(train.records, config.features.clone()))?;
        TelemetryModel::new(config, reference)
    }

    fn model_and_test(&self) -> Result<(ForestModel, FlowDataset)> {
        let model = self.dir.read_model()?;
        let test = self.dir.read_flows(TEST, &model.feature_names)?;
        Ok((model, test))
    }

    pub fn probe(&self) -> Result<()> {
        let (model, test) = self.model_and_test()?;
        let telemetry = self.telemetry_model("telemetry")?;
        let mut config = self.config.probe.clone();
        config.seed = self.seed("probe");
        let outcome = silent_probe(&model, &telemetry, &test, &config)?;
        write_csv(&outcome.probes, self.dir.path(PROBE_FLOWS))?;
        outcome.trace.write_csv(self.dir.path(TELEMETRY))
    }

    pub fn detect_cp(&self) -> Result<()> {
        let trace = self.dir.read_trace()?;
        let cp = &self.config.changepoint;
        let base = self.seed("changepoint");
        let mut results = BTreeMap::new();
        let mut failures = BTreeMap::new();
        for i in Indicator::ALL {
            let series = trace.series(i);
            let outcome = cp
                .models
                .get(i)
                .resolve(&series, item_seed(base, i.index() as u64))
                .and_then(|m| binseg(&series, cp.n_bkps, m, cp.min_segment_length));
            match outcome {
                Ok(r) => {
                    results.insert(i, r);
                }
                Err(e) => {
                    failures.insert(i, e.to_string());
                }
            }
        }
        if results.is_empty() {
            return Err(Error::NoAnalyzableSegments(format!(
                "no indicator could be segmented: {failures:?}"
            )));
        }
        let breakpoints: BTreeMap<Indicator, Vec<usize>> = results
            .iter()
            .map(|(i, r)| (*i, r.breakpoints.clone()))
            .collect();
        self.dir.write_json(BREAKPOINTS, &breakpoints)?;
        self.dir
            .write_json(CHANGEPOINTS, &ChangePointSummary { results, failures })
    }

    pub fn analyze(&self) -> Result<()> {
        let trace = self.dir.read_trace()?;
        let breakpoints: BTreeMap<Indicator, Vec<usize>> = self.dir.read_json(BREAKPOINTS)?;
        let report =
            identify_sensitive(trace.observations(), &breakpoints, &self.config.causality)?;
        self.dir.write_json(SENSITIVITY, &report)
    }

    fn attack_config(&self) -> Result<AttackConfig> {
        let mut config = self.config.attack.clone();
        config.seed = self.seed("attack");
        if self.config.attack_detected_features {
            let sensitivity: SensitivityReport = self.dir.read_json(SENSITIVITY)?;
            if !sensitivity.sensitive_features.is_empty() {
                config.sensitive_features = sensitivity.sensitive_features;
            }
        }
        Ok(config)
    }

    pub fn attack(&self) -> Result<()> {
        let (model, test) = self.model_and_test()?;
        let config = self.attack_config()?;
        let crafted = craft_adversarial(&test, &config)?;
        let evaluation = evaluate_attack(&model, &test, &crafted.flows)?;
        write_csv(&crafted.flows, self.dir.path(ADVERSARIAL))?;
        self.dir.write_json(
            ATTACK_REPORT,
            &AttackSummary {
                features: config.sensitive_features.clone(),
                skipped_features: crafted.skipped_features,
                epsilon: config.epsilon,
                num_steps: config.num_steps,
                bound_multiplier: config.bound_multiplier,
                accepted_steps: crafted.accepted_steps,
                rejected_steps: crafted.rejected_steps,
                evaluation,
            },
        )
    }

    /// Fits the detector on telemetry from `flows`; returns scores as
    /// `(flow index, adversarial, score)` rows.
    fn detect(
        &self,
        model: &ForestModel,
        flows: &FlowDataset,
        features: &[Feature],
        telemetry_stage: &str,
        defense_stage: &str,
    ) -> Result<(DefenseReport, Vec<Scored>)> {
        let telemetry = self.telemetry_model(telemetry_stage)?;
        let trace: TelemetryTrace = telemetry.trace(model, flows);
        let params = &self.config.defense;
        let rows = detector_samples(&trace, flows, features, params.log_flow_features)?;
        let (adv_idx, benign_idx): (Vec<usize>, Vec<usize>) =
            (0..flows.len()).partition(|&i| flows.records[i].label.is_malicious());
        let pick = |idx: &[usize]| idx.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>();
        let forest = fit_iforest(
            &rows,
            params.n_trees,
            params.subsample_size,
            self.seed(defense_stage),
        )?;
        let (report, scores) = evaluate_defense(
            &forest,
            &pick(&benign_idx),
            &pick(&adv_idx),
            params.contamination,
        )?;
        let order = benign_idx
            .iter()
            .map(|&i| (i, false))
            .chain(adv_idx.iter().map(|&i| (i, true)));
        let scored = order.zip(scores).map(|((i, a), s)| (i, a, s)).collect();
        Ok((report, scored))
    }

    pub fn defend(&self) -> Result<()> {
        let attack: AttackSummary = self.dir.read_json(ATTACK_REPORT)?;
        let model = self.dir.read_model()?;
        let adversarial = self.dir.read_flows(ADVERSARIAL, &model.feature_names)?;
        let features = attack.features.clone();
        let (stealth, stealth_scores) = self.detect(
            &model,
            &adversarial,
            &features,
            "defense-telemetry",
            "defense",
        )?;

        let mut text = String::from("index,set,score,adversarial\n");
        let mut push_scores = |set: &str, scored: &[Scored]| {
            for &(i, a, s) in scored {
                text.push_str(&format!("{i},{set},{s},{}\n", u8::from(a)));
            }
        };
        push_scores("stealth", &stealth_scores);

        let naive = if self.config.naive_attack.enabled {
            let test = self.dir.read_flows(TEST, &model.feature_names)?;
            let cfg = &self.config.naive_attack;
            let flows = naive_attack(
                &test,
                &features,
                cfg.epsilon,
                cfg.num_steps,
                self.seed("naive-attack"),
            )?;
            let predicted = predict(&model, &flows)?;
            let ids_accuracy =
                ClassifierMetrics::from_labels(&flows.labels(), &predicted)?.accuracy;
            let (detection, scores) = self.detect(
                &model,
                &flows,
                &features,
                "naive-telemetry",
                "naive-defense",
            )?;
            push_scores("naive", &scores);
            Some(NaiveDefense {
                epsilon: cfg.epsilon,
                num_steps: cfg.num_steps,
                ids_accuracy,
                detection,
            })
        } else {
            None
        };

        let path = self.dir.path(SCORES);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.dir.write_json(
            DEFENSE_REPORT,
            &DefenseFile {
                defense: DefenseSummary {
                    features,
                    stealth,
                    naive,
                },
            },
        )
    }

    /// Assembles `report.json` from the other stages' artifacts.
    pub fn report(&self) -> Result<ExperimentReport> {
        let dataset: DatasetFile = self.dir.read_json(DATASET)?;
        let grid: Option<GridSearchResult> = self.dir.read_json(GRID)?;
        let ids: IdsMetricsFile = self.dir.read_json(IDS_METRICS)?;
        let model = self.dir.read_model()?;
        let trace = self.dir.read_trace()?;
        let breakpoints: BTreeMap<Indicator, Vec<usize>> = self.dir.read_json(BREAKPOINTS)?;
        let sensitivity: SensitivityReport = self.dir.read_json(SENSITIVITY)?;
        let attack: AttackSummary = self.dir.read_json(ATTACK_REPORT)?;
        let defense: DefenseFile = self.dir.read_json(DEFENSE_REPORT)?;

        let truth: Vec<Feature> = self
            .config
            .telemetry
            .ground_truth_sensitive()
            .into_iter()
            .collect();
        let found = &sensitivity.sensitive_features;
        let hits = found.iter().filter(|f| truth.contains(f)).count();
        let mut config = self.config.clone();
        config.seed = Some(self.master_seed);
        let mut artifacts: Vec<String> = ALL_ARTIFACTS
            .iter()
            .filter(|name| self.dir.path(name).is_file())
            .map(|name| name.to_string())
            .collect();
        artifacts.push(REPORT.to_string());
        artifacts.sort();
        artifacts.dedup();
        let report = ExperimentReport {
            schema_version: REPORT_SCHEMA_VERSION,
            master_seed: self.master_seed,
            config,
            artifacts,
            dataset: dataset.summary,
            ids: IdsSummary {
                features: ids.features,
                params: model.params,
                grid_best_mean_f1: grid.map(|g| g.best_mean_f1),
                n_train: ids.n_train,
                n_test: ids.n_test,
                test_metrics: ids.metrics,
            },
            probes: trace.len(),
            breakpoints,
            sensitivity: SensitivitySummary {
                ranking: sensitivity.ranking.clone(),
                sensitive_features: found.clone(),
                recall: if truth.is_empty() {
                    0.0
                } else {
                    hits as f64 / truth.len() as f64
                },
                precision: if found.is_empty() {
                    0.0
                } else {
                    hits as f64 / found.len() as f64
                },
                ground_truth: truth,
            },
            attack,
            defense: defense.defense,
        };
        self.dir.write_json(REPORT, &report)?;
        Ok(report)
    }
}
