use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Feature, FlowDataset, FlowRecord, Label, Protocol};
use crate::error::{Error, Result};
use crate::seed;

/// Location and scale of a feature's natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spread {
    pub location: f64,
    pub scale: f64,
}

impl Spread {
    pub const fn new(location: f64, scale: f64) -> Self {
        Spread { location, scale }
    }
}

/// Per-class generative parameters. Sizes are log-normal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    /// Flow duration in seconds.
    pub duration: Spread,
    pub tot_pkts: Spread,
    /// Mean bytes per packet; total bytes is packets times this.
    pub bytes_per_pkt: Spread,
    /// Destination ports drawn uniformly from this list.
    pub dst_ports: Vec<u16>,
    pub tcp_fraction: f64,
    pub udp_fraction: f64,
    pub attack_category: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticTrafficConfig {
    pub n_benign: usize,
    pub n_malicious: usize,
    pub benign: ClassProfile,
    pub malicious: ClassProfile,
    /// Mean gap between consecutive flow start times, in seconds.
    pub mean_interarrival: f64,
    /// Round packet and byte counts to whole numbers.
    pub integer_counts: bool,
    pub seed: u64,
}

const SERVICE_PORTS: [u16; 5] = [22, 53, 80, 443, 8080];

impl Default for SyntheticTrafficConfig {
    fn default() -> Self {
        Self::with_class_shift(3.0)
    }
}

impl SyntheticTrafficConfig {
    /// Default traffic where malicious flows carry `shift` benign scales fewer
    /// packets (in log space) and vary ten times less than benign flows.
    pub fn with_class_shift(shift: f64) -> Self {
        let benign = ClassProfile {
            duration: Spread::new(1.0, 1.0),
            tot_pkts: Spread::new(4.0, 1.0),
            bytes_per_pkt: Spread::new(6.0, 0.5),
            dst_ports: SERVICE_PORTS.to_vec(),
            tcp_fraction: 0.85,
            udp_fraction: 0.12,
            attack_category: None,
        };
        let malicious = ClassProfile {
            duration: Spread::new(1.0, 0.1),
            tot_pkts: Spread::new(4.0 - shift * 1.0, 0.1),
            bytes_per_pkt: Spread::new(6.0, 0.05),
            attack_category: Some("synthetic".into()),
            ..benign.clone()
        };
        SyntheticTrafficConfig {
            n_benign: 5000,
            n_malicious: 5000,
            benign,
            malicious,
            mean_interarrival: 0.01,
            integer_counts: true,
            seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_benign + self.n_malicious < 2 {
            return Err(Error::config("synthetic traffic needs at least 2 records"));
        }
        if !(self.mean_interarrival > 0.0 && self.mean_interarrival.is_finite()) {
            return Err(Error::config("mean_interarrival must be positive"));
        }
        for (name, p) in [("benign", &self.benign), ("malicious", &self.malicious)] {
            for (field, s) in [
                ("duration", p.duration),
                ("tot_pkts", p.tot_pkts),
                ("bytes_per_pkt", p.bytes_per_pkt),
            ] {
                if !(s.scale > 0.0 && s.scale.is_finite() && s.location.is_finite()) {
                    return Err(Error::config(format!(
                        "{name}.{field}: scale must be positive and finite"
                    )));
                }
            }
            if p.dst_ports.is_empty() {
                return Err(Error::config(format!("{name}.dst_ports is empty")));
            }
            let other = 1.0 - p.tcp_fraction - p.udp_fraction;
            if p.tcp_fraction < 0.0 || p.udp_fraction < 0.0 || other < -1e-12 {
                return Err(Error::config(format!(
                    "{name}: protocol fractions must be non-negative and sum to at most 1"
                )));
            }
        }
        Ok(())
    }
}

/// Generates a labeled dataset. Identical configs give identical output.
pub fn generate_synthetic(config: &SyntheticTrafficConfig) -> Result<FlowDataset> {
    config.validate()?;
    let n = config.n_benign + config.n_malicious;
    let mut labels: Vec<Label> = std::iter::repeat_n(Label::Benign, config.n_benign)
        .chain(std::iter::repeat_n(Label::Malicious, config.n_malicious))
        .collect();
    labels.shuffle(&mut seed::rng(seed::item_seed(config.seed, u64::MAX)));

    let gap = Exp::new(1.0 / config.mean_interarrival).map_err(|e| Error::config(e.to_string()))?;
    let mut records: Vec<(FlowRecord, f64)> = labels
        .par_iter()
        .enumerate()
        .map(|(i, &label)| {
            let profile = match label {
                Label::Benign => &config.benign,
                Label::Malicious => &config.malicious,
            };
            let mut rng = seed::item_rng(config.seed, i as u64);
            (
                draw_record(profile, label, config.integer_counts, &mut rng),
                gap.sample(&mut rng),
            )
        })
        .collect();

    let mut clock = 0.0;
    for (rec, dt) in &mut records {
        clock += *dt;
        rec.timestamp = clock;
    }
    debug_assert_eq!(records.len(), n);
    Ok(FlowDataset::new(
        records.into_iter().map(|(r, _)| r).collect(),
        Feature::ALL.to_vec(),
    ))
}

fn log_normal<R: Rng>(s: Spread, rng: &mut R) -> f64 {
    let z: f64 = Normal::new(s.location, s.scale)
        .expect("validated spread")
        .sample(rng);
    z.exp()
}

fn draw_record<R: Rng>(p: &ClassProfile, label: Label, integer: bool, rng: &mut R) -> FlowRecord {
    let duration = log_normal(p.duration, rng);
    let mut pkts = log_normal(p.tot_pkts, rng).max(1.0);
    let mut bytes = pkts * log_normal(p.bytes_per_pkt, rng);
    if integer {
        pkts = pkts.round().max(1.0);
        bytes = bytes.round();
    }
    let mut rec = FlowRecord::new(duration, pkts, bytes, label);
    rec.src_port = rng.random_range(1024..=65535);
    rec.dst_port = p.dst_ports[rng.random_range(0..p.dst_ports.len())];
    let u: f64 = rng.random();
    rec.protocol = if u < p.tcp_fraction {
        Protocol::Tcp
    } else if u < p.tcp_fraction + p.udp_fraction {
        Protocol::Udp
    } else {
        Protocol::Other
    };
    rec.attack_category = match label {
        Label::Malicious => p.attack_category.clone(),
        Label::Benign => None,
    };
    rec
}
