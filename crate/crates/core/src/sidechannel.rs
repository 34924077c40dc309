//! Simulated host telemetry observed while the IDS classifies a flow.
//!
//! Each indicator is a baseline plus a weighted sum of standardized flow
//! features, a term proportional to the classification work, and Gaussian
//! noise. The weights are the hidden ground truth an analyst tries to recover.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{Feature, FlowDataset, FlowRecord, NormStats};
use crate::ids::ForestModel;
use crate::seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    ResponseTime,
    CpuUsage,
    MemoryUsage,
    PacketDrop,
    ProcessingDelay,
}

impl Indicator {
    pub const ALL: [Indicator; 5] = [
        Indicator::ResponseTime,
        Indicator::CpuUsage,
        Indicator::MemoryUsage,
        Indicator::PacketDrop,
        Indicator::ProcessingDelay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::ResponseTime => "response_time",
            Indicator::CpuUsage => "cpu_usage",
            Indicator::MemoryUsage => "memory_usage",
            Indicator::PacketDrop => "packet_drop",
            Indicator::ProcessingDelay => "processing_delay",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn parse(s: &str) -> Option<Indicator> {
        Indicator::ALL.into_iter().find(|i| i.name() == s)
    }

    /// Physical range the value is clamped into.
    pub fn range(self) -> (f64, f64) {
        match self {
            Indicator::CpuUsage | Indicator::PacketDrop => (0.0, 1.0),
            _ => (0.0, f64::MAX),
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One value per indicator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerIndicator<T> {
    pub response_time: T,
    pub cpu_usage: T,
    pub memory_usage: T,
    pub packet_drop: T,
    pub processing_delay: T,
}

impl<T> PerIndicator<T> {
    pub fn get(&self, i: Indicator) -> &T {
        match i {
            Indicator::ResponseTime => &self.response_time,
            Indicator::CpuUsage => &self.cpu_usage,
            Indicator::MemoryUsage => &self.memory_usage,
            Indicator::PacketDrop => &self.packet_drop,
            Indicator::ProcessingDelay => &self.processing_delay,
        }
    }

    pub fn get_mut(&mut self, i: Indicator) -> &mut T {
        match i {
            Indicator::ResponseTime => &mut self.response_time,
            Indicator::CpuUsage => &mut self.cpu_usage,
            Indicator::MemoryUsage => &mut self.memory_usage,
            Indicator::PacketDrop => &mut self.packet_drop,
            Indicator::ProcessingDelay => &mut self.processing_delay,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Indicator) -> T) -> Self {
        PerIndicator {
            response_time: f(Indicator::ResponseTime),
            cpu_usage: f(Indicator::CpuUsage),
            memory_usage: f(Indicator::MemoryUsage),
            packet_drop: f(Indicator::PacketDrop),
            processing_delay: f(Indicator::ProcessingDelay),
        }
    }
}

impl PerIndicator<f64> {
    pub fn to_array(&self) -> [f64; 5] {
        Indicator::ALL.map(|i| *self.get(i))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TelemetryModelConfig {
    /// Features recorded alongside each sample, in column order.
    pub features: Vec<Feature>,
    /// Resting value: ms, fraction, MB, fraction, ms.
    pub baseline: PerIndicator<f64>,
    /// Influence per standardized unit of each feature.
    pub weights: PerIndicator<BTreeMap<Feature, f64>>,
    /// Increment per forest node visited, averaged over trees.
    pub work_gain: PerIndicator<f64>,
    pub noise_std: PerIndicator<f64>,
    pub seed: u64,
}

impl Default for TelemetryModelConfig {
    fn default() -> Self {
        use Feature::*;
        let w = |pairs: &[(Feature, f64)]| pairs.iter().copied().collect::<BTreeMap<_, _>>();
        TelemetryModelConfig {
            features: Feature::ALL.to_vec(),
            baseline: PerIndicator {
                response_time: 5.0,
                cpu_usage: 0.30,
                memory_usage: 200.0,
                packet_drop: 0.01,
                processing_delay: 2.0,
            },
            weights: PerIndicator {
                response_time: w(&[(BytesPerSec, 0.8), (PktsPerSec, 0.6)]),
                cpu_usage: w(&[
                    (Duration, 0.01),
                    (TotPkts, 0.01),
                    (BytesPerSec, 0.01),
                    (PktsPerSec, 0.01),
                ]),
                memory_usage: w(&[(Duration, 4.0), (TotPkts, 3.0)]),
                packet_drop: w(&[(TotPkts, 0.004), (PktsPerSec, 0.004)]),
                processing_delay: w(&[
                    (Duration, 0.2),
                    (TotPkts, 0.2),
                    (BytesPerSec, 0.2),
                    (PktsPerSec, 0.2),
                ]),
            },
            work_gain: PerIndicator {
                response_time: 0.2,
                cpu_usage: 0.005,
                memory_usage: 1.0,
                packet_drop: 0.0005,
                processing_delay: 0.05,
            },
            noise_std: PerIndicator {
                response_time: 0.5,
                cpu_usage: 0.01,
                memory_usage: 2.0,
                packet_drop: 0.002,
                processing_delay: 0.1,
            },
            seed: 0,
        }
    }
}

impl TelemetryModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::config(
                "telemetry needs at least one recorded feature",
            ));
        }
        let mut any_weight = false;
        for i in Indicator::ALL {
            let noise = *self.noise_std.get(i);
            if !(noise >= 0.0 && noise.is_finite()) {
                return Err(Error::config(format!(
                    "{i}: noise_std must be non-negative"
                )));
            }
            if !self.baseline.get(i).is_finite() || !self.work_gain.get(i).is_finite() {
                return Err(Error::config(format!(
                    "{i}: baseline and work_gain must be finite"
                )));
            }
            for (f, w) in self.weights.get(i) {
                if !w.is_finite() {
                    return Err(Error::config(format!("{i}: weight for {f} is not finite")));
                }
                if !self.features.contains(f) {
                    return Err(Error::config(format!(
                        "{i}: weighted feature {f} is not recorded"
                    )));
                }
                any_weight |= *w != 0.0;
            }
        }
        if !any_weight {
            return Err(Error::config("telemetry has no nonzero feature weight"));
        }
        Ok(())
    }

    /// Features with a nonzero weight on any indicator.
    pub fn ground_truth_sensitive(&self) -> BTreeSet<Feature> {
        Indicator::ALL
            .iter()
            .flat_map(|&i| self.weights.get(i).iter())
            .filter(|(_, w)| **w != 0.0)
            .map(|(f, _)| *f)
            .collect()
    }
}

/// Telemetry model bound to the statistics that standardize its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct TelemetryModel {
    pub config: TelemetryModelConfig,
    pub reference: NormStats,
}

impl TelemetryModel {
    /// `reference` must cover every weighted feature (usually IDS training statistics).
    pub fn new(config: TelemetryModelConfig, reference: NormStats) -> Result<TelemetryModel> {
        config.validate()?;
        for f in config.ground_truth_sensitive() {
            if reference.get(f).is_none() {
                return Err(Error::config(format!(
                    "no standardization statistics for weighted feature {f}"
                )));
            }
        }
        Ok(TelemetryModel { config, reference })
    }

    /// Telemetry for one classification of `flow`; `sample_index` keys the noise.
    pub fn respond(
        &self,
        ids: &ForestModel,
        flow: &FlowRecord,
        sample_index: u64,
    ) -> SideChannelSample {
        let (_, nodes) = ids.classify(&ids.inputs(flow));
        let work = nodes as f64 / ids.n_estimators().max(1) as f64;
        let mut rng = seed::item_rng(self.config.seed, sample_index);
        let values = Indicator::ALL.map(|i| {
            let signal: f64 = self
                .config
                .weights
                .get(i)
                .iter()
                .map(|(&f, &w)| w * self.reference.transform(f, flow.get(f)))
                .sum();
            let z: f64 = StandardNormal.sample(&mut rng);
            let raw = self.config.baseline.get(i)
                + signal
                + self.config.work_gain.get(i) * work
                + self.config.noise_std.get(i) * z;
            clamp_indicator(i, raw)
        });
        SideChannelSample::from_array(values)
    }

    /// Observes every flow in order.
    pub fn trace(&self, ids: &ForestModel, flows: &FlowDataset) -> TelemetryTrace {
        let samples: Vec<SideChannelSample> = flows
            .records
            .par_iter()
            .enumerate()
            .map(|(i, r)| self.respond(ids, r, i as u64))
            .collect();
        let aligned = flows
            .records
            .iter()
            .map(|r| self.config.features.iter().map(|&f| r.get(f)).collect())
            .collect();
        TelemetryTrace {
            samples,
            feature_names: self.config.features.clone(),
            aligned_features: aligned,
            ground_truth_sensitive: self.config.ground_truth_sensitive(),
        }
    }
}

fn clamp_indicator(i: Indicator, v: f64) -> f64 {
    let (lo, hi) = i.range();
    if v.is_nan() {
        lo
    } else {
        v.clamp(lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideChannelSample {
    /// Milliseconds.
    pub response_time: f64,
    pub cpu_usage: f64,
    /// Megabytes.
    pub memory_usage: f64,
    pub packet_drop: f64,
    /// Milliseconds.
    pub processing_delay: f64,
}

impl SideChannelSample {
    pub fn from_array(v: [f64; 5]) -> Self {
        SideChannelSample {
            response_time: v[0],
            cpu_usage: v[1],
            memory_usage: v[2],
            packet_drop: v[3],
            processing_delay: v[4],
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [
            self.response_time,
            self.cpu_usage,
            self.memory_usage,
            self.packet_drop,
            self.processing_delay,
        ]
    }

    pub fn get(&self, i: Indicator) -> f64 {
        self.to_array()[i.index()]
    }
}

/// Samples in probe order with the features of the flow that produced each one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TelemetryTrace {
    pub samples: Vec<SideChannelSample>,
    pub feature_names: Vec<Feature>,
    /// Row `t` holds `feature_names` values of the flow behind sample `t`.
    pub aligned_features: Vec<Vec<f64>>,
    /// Simulation ground truth; never visible through [`TraceObservations`].
    pub ground_truth_sensitive: BTreeSet<Feature>,
}

/// What an external observer of the IDS host can see.
#[derive(Clone, Copy, Debug)]
pub struct TraceObservations<'a> {
    pub samples: &'a [SideChannelSample],
    pub feature_names: &'a [Feature],
    pub aligned_features: &'a [Vec<f64>],
}

impl<'a> TraceObservations<'a> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn series(&self, i: Indicator) -> Vec<f64> {
        self.samples.iter().map(|s| s.get(i)).collect()
    }

    pub fn feature_column(&self, j: usize) -> Vec<f64> {
        self.aligned_features.iter().map(|r| r[j]).collect()
    }
}

impl TelemetryTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn observations(&self) -> TraceObservations<'_> {
        TraceObservations {
            samples: &self.samples,
            feature_names: &self.feature_names,
            aligned_features: &self.aligned_features,
        }
    }

    pub fn series(&self, i: Indicator) -> Vec<f64> {
        self.observations().series(i)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(file)
    }

    /// Columns: index, the five indicators, then the aligned features. Ground truth is not written.
    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["index".to_string()];
        header.extend(Indicator::ALL.iter().map(|i| i.name().to_string()));
        header.extend(self.feature_names.iter().map(|f| f.name().to_string()));
        w.write_record(&header)?;
        for (t, (s, feats)) in self.samples.iter().zip(&self.aligned_features).enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(s.to_array().iter().map(f64::to_string));
            row.extend(feats.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<TelemetryTrace> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv_from(file)
    }

    pub fn read_csv_from<R: Read>(reader: R) -> Result<TelemetryTrace> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        let mut ind_cols = [0usize; 5];
        for i in Indicator::ALL {
            ind_cols[i.index()] = headers
                .iter()
                .position(|h| h == i.name())
                .ok_or_else(|| Error::MissingColumn(i.name().to_string()))?;
        }
        let mut feature_names = Vec::new();
        let mut feature_cols = Vec::new();
        for (c, h) in headers.iter().enumerate() {
            if let Ok(f) = h.parse::<Feature>() {
                feature_names.push(f);
                feature_cols.push(c);
            }
        }
        let parse = |row: &csv::StringRecord, c: usize| -> Result<f64> {
            row.get(c)
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| Error::Format(format!("unparseable value in telemetry column {c}")))
        };
        let mut samples = Vec::new();
        let mut aligned = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let mut v = [0.0; 5];
            for (k, &c) in ind_cols.iter().enumerate() {
                v[k] = parse(&row, c)?;
            }
            samples.push(SideChannelSample::from_array(v));
            aligned.push(
                feature_cols
                    .iter()
                    .map(|&c| parse(&row, c))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(TelemetryTrace {
            samples,
            feature_names,
            aligned_features: aligned,
            ground_truth_sensitive: BTreeSet::new(),
        })
    }
}
