//! Flow records, datasets and their preprocessing.

mod csv_io;
mod preprocess;
mod synthetic;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use csv_io::{load_csv, read_csv, write_csv, write_csv_to, LoadSummary};
pub use preprocess::{
    select_features, standardize, stratified_split, FeatureStats, NormStats, SelectionPolicy,
};
pub use synthetic::{generate_synthetic, ClassProfile, Spread, SyntheticTrafficConfig};

/// Durations at or below this are treated as instantaneous; rates are then 0.
pub const MIN_DURATION: f64 = 1e-9;

/// Numeric flow fields addressable as features.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Feature {
    Duration,
    TotPkts,
    TotBytes,
    BytesPerSec,
    PktsPerSec,
    SrcPort,
    DstPort,
    Timestamp,
}

impl Feature {
    pub const ALL: [Feature; 8] = [
        Feature::Duration,
        Feature::TotPkts,
        Feature::TotBytes,
        Feature::BytesPerSec,
        Feature::PktsPerSec,
        Feature::SrcPort,
        Feature::DstPort,
        Feature::Timestamp,
    ];

    /// Volume and timing features the default experiment selects.
    pub const VOLUME: [Feature; 5] = [
        Feature::Duration,
        Feature::TotPkts,
        Feature::TotBytes,
        Feature::BytesPerSec,
        Feature::PktsPerSec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Duration => "Duration",
            Feature::TotPkts => "TotPkts",
            Feature::TotBytes => "TotBytes",
            Feature::BytesPerSec => "BytesPerSec",
            Feature::PktsPerSec => "PktsPerSec",
            Feature::SrcPort => "SrcPort",
            Feature::DstPort => "DstPort",
            Feature::Timestamp => "Timestamp",
        }
    }

    /// For a derived rate, the count it divides by duration.
    pub fn rate_numerator(self) -> Option<Feature> {
        match self {
            Feature::BytesPerSec => Some(Feature::TotBytes),
            Feature::PktsPerSec => Some(Feature::TotPkts),
            _ => None,
        }
    }

    pub fn is_rate(self) -> bool {
        self.rate_numerator().is_some()
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownFeature(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Protocol {
    Tcp,
    Udp,
    Other,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Tcp => "TCP",
            Protocol::Udp => "UDP",
            Protocol::Other => "OTHER",
        }
    }

    /// Accepts names and IANA protocol numbers.
    pub fn parse(s: &str) -> Protocol {
        match s.trim().to_ascii_uppercase().as_str() {
            "TCP" | "6" => Protocol::Tcp,
            "UDP" | "17" => Protocol::Udp,
            _ => Protocol::Other,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Label {
    Benign,
    Malicious,
}

impl Label {
    pub fn name(self) -> &'static str {
        match self {
            Label::Benign => "Benign",
            Label::Malicious => "Malicious",
        }
    }

    pub fn index(self) -> usize {
        match self {
            Label::Benign => 0,
            Label::Malicious => 1,
        }
    }

    pub fn is_malicious(self) -> bool {
        self == Label::Malicious
    }
}

/// One network flow: volume/timing features, endpoints and ground-truth label.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub duration: f64,
    pub tot_pkts: f64,
    pub tot_bytes: f64,
    pub bytes_per_sec: f64,
    pub pkts_per_sec: f64,
    pub src_port: u16,
    pub dst_port: u16,
    pub protocol: Protocol,
    pub timestamp: f64,
    pub label: Label,
    pub attack_category: Option<String>,
}

impl FlowRecord {
    /// Builds a record from primaries, deriving both rates.
    pub fn new(duration: f64, tot_pkts: f64, tot_bytes: f64, label: Label) -> Self {
        let mut rec = FlowRecord {
            duration,
            tot_pkts,
            tot_bytes,
            bytes_per_sec: 0.0,
            pkts_per_sec: 0.0,
            src_port: 0,
            dst_port: 0,
            protocol: Protocol::Tcp,
            timestamp: 0.0,
            label,
            attack_category: None,
        };
        rec.derive_rates();
        rec
    }

    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Duration => self.duration,
            Feature::TotPkts => self.tot_pkts,
            Feature::TotBytes => self.tot_bytes,
            Feature::BytesPerSec => self.bytes_per_sec,
            Feature::PktsPerSec => self.pkts_per_sec,
            Feature::SrcPort => f64::from(self.src_port),
            Feature::DstPort => f64::from(self.dst_port),
            Feature::Timestamp => self.timestamp,
        }
    }

    /// Sets a feature value. Ports are rounded and clamped to their range.
    pub fn set(&mut self, feature: Feature, value: f64) {
        match feature {
            Feature::Duration => self.duration = value,
            Feature::TotPkts => self.tot_pkts = value,
            Feature::TotBytes => self.tot_bytes = value,
            Feature::BytesPerSec => self.bytes_per_sec = value,
            Feature::PktsPerSec => self.pkts_per_sec = value,
            Feature::SrcPort => self.src_port = port_from_f64(value),
            Feature::DstPort => self.dst_port = port_from_f64(value),
            Feature::Timestamp => self.timestamp = value,
        }
    }

    /// True when the duration is too short for rates to be meaningful.
    pub fn has_degenerate_rates(&self) -> bool {
        self.duration <= MIN_DURATION
    }

    /// Recomputes both rates from counts and duration.
    pub fn derive_rates(&mut self) {
        if self.has_degenerate_rates() {
            self.bytes_per_sec = 0.0;
            self.pkts_per_sec = 0.0;
        } else {
            self.bytes_per_sec = self.tot_bytes / self.duration;
            self.pkts_per_sec = self.tot_pkts / self.duration;
        }
    }

    /// Restores every record invariant after `perturbed` features were edited.
    ///
    /// Non-negative fields are clamped (packet count at 1). A perturbed rate
    /// whose count was left alone is realized by rescaling that count; in all
    /// other cases the rate is re-derived from its count, so perturbed counts
    /// take precedence over perturbed rates.
    pub fn reconcile(&mut self, perturbed: &[Feature]) {
        self.duration = clamp_non_negative(self.duration, 0.0);
        self.tot_pkts = clamp_non_negative(self.tot_pkts, 1.0);
        self.tot_bytes = clamp_non_negative(self.tot_bytes, 0.0);
        self.bytes_per_sec = clamp_non_negative(self.bytes_per_sec, 0.0);
        self.pkts_per_sec = clamp_non_negative(self.pkts_per_sec, 0.0);
        self.timestamp = clamp_non_negative(self.timestamp, 0.0);

        if !self.has_degenerate_rates() {
            for rate in [Feature::BytesPerSec, Feature::PktsPerSec] {
                let count = rate.rate_numerator().expect("rate feature");
                if perturbed.contains(&rate) && !perturbed.contains(&count) {
                    let floor = if count == Feature::TotPkts { 1.0 } else { 0.0 };
                    let realized = (self.get(rate) * self.duration).max(floor);
                    self.set(count, realized);
                }
            }
        }
        self.derive_rates();
    }

    /// Checks the record invariants, returning a description of the first violation.
    pub fn validate(&self) -> std::result::Result<(), String> {
        for f in Feature::ALL {
            if !self.get(f).is_finite() {
                return Err(format!("{f} is not finite"));
            }
        }
        if self.duration < 0.0 {
            return Err("negative duration".into());
        }
        if self.tot_pkts < 1.0 {
            return Err("packet count below 1".into());
        }
        if self.tot_bytes < 0.0 {
            return Err("negative byte count".into());
        }
        if self.bytes_per_sec < 0.0 || self.pkts_per_sec < 0.0 {
            return Err("negative rate".into());
        }
        if self.duration > MIN_DURATION {
            let pps = self.tot_pkts / self.duration;
            let bps = self.tot_bytes / self.duration;
            if (self.pkts_per_sec - pps).abs() > 1e-9 * pps.abs() {
                return Err("PktsPerSec inconsistent with TotPkts/Duration".into());
            }
            if (self.bytes_per_sec - bps).abs() > 1e-9 * bps.abs() {
                return Err("BytesPerSec inconsistent with TotBytes/Duration".into());
            }
        }
        Ok(())
    }
}

fn clamp_non_negative(x: f64, floor: f64) -> f64 {
    if x.is_nan() || x < floor {
        floor
    } else {
        x
    }
}

fn port_from_f64(value: f64) -> u16 {
    if value.is_nan() {
        0
    } else {
        value.round().clamp(0.0, 65535.0) as u16
    }
}

/// An ordered collection of flows with the feature view used by models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowDataset {
    pub records: Vec<FlowRecord>,
    pub feature_names: Vec<Feature>,
    /// Standardization statistics covering exactly `feature_names`, once fitted.
    pub norm_stats: Option<NormStats>,
}

impl FlowDataset {
    pub fn new(records: Vec<FlowRecord>, feature_names: Vec<Feature>) -> Self {
        FlowDataset {
            records,
            feature_names,
            norm_stats: None,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.records.iter().map(|r| r.label).collect()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let mut counts = [0; 2];
        for r in &self.records {
            counts[r.label.index()] += 1;
        }
        counts
    }

    pub fn column(&self, feature: Feature) -> Vec<f64> {
        self.records.iter().map(|r| r.get(feature)).collect()
    }

    /// Population (1/N) standard deviation of a raw feature column.
    pub fn feature_std(&self, feature: Feature) -> f64 {
        crate::stats::mean_std(&self.column(feature)).1
    }

    /// Row-major model inputs over `feature_names`, standardized when stats are fitted.
    pub fn feature_matrix(&self) -> Vec<Vec<f64>> {
        self.records
            .iter()
            .map(|r| match &self.norm_stats {
                Some(stats) => stats.transform_record(r),
                None => self.feature_names.iter().map(|&f| r.get(f)).collect(),
            })
            .collect()
    }

    /// Same records and stats, new order/subset.
    pub fn subset(&self, indices: &[usize]) -> FlowDataset {
        FlowDataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
            norm_stats: self.norm_stats.clone(),
        }
    }

    pub fn with_records(&self, records: Vec<FlowRecord>) -> FlowDataset {
        FlowDataset {
            records,
            feature_names: self.feature_names.clone(),
            norm_stats: self.norm_stats.clone(),
        }
    }

    pub fn require_features(&self, features: &[Feature]) -> Result<()> {
        match features.iter().find(|f| !self.feature_names.contains(f)) {
            Some(f) => Err(Error::UnknownFeature(f.name().to_string())),
            None => Ok(()),
        }
    }
}
