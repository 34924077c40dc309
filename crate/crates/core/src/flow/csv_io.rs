use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{Feature, FlowDataset, FlowRecord, Label, Protocol};
use crate::error::{Error, Result};

const HEADER: [&str; 11] = [
    "Duration",
    "TotPkts",
    "TotBytes",
    "BytesPerSec",
    "PktsPerSec",
    "SrcPort",
    "DstPort",
    "Protocol",
    "Timestamp",
    "Label",
    "AttackCategory",
];

/// What happened to the rows of a loaded file.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadSummary {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub dropped_unlabeled: usize,
    pub dropped_invalid: usize,
}

/// Loads flows from a CSV file, keeping `features` as the model view.
pub fn load_csv(path: impl AsRef<Path>, features: &[Feature]) -> Result<FlowDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, features).map(|(ds, _)| ds)
}

/// Parses flows from CSV.
///
/// Rows with an empty label or an unusable required field are dropped; rates
/// are always re-derived from counts and duration.
pub fn read_csv<R: Read>(reader: R, features: &[Feature]) -> Result<(FlowDataset, LoadSummary)> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));

    let label_col = col("Label").ok_or_else(|| Error::MissingColumn("Label".into()))?;
    // Rates are never read; a selected rate needs its count and the duration.
    let mut required: Vec<Feature> = Vec::new();
    for &f in features {
        match f.rate_numerator() {
            Some(count) => required.extend([count, Feature::Duration]),
            None => required.push(f),
        }
    }
    required.sort();
    required.dedup();
    if let Some(f) = required.iter().find(|f| col(f.name()).is_none()) {
        return Err(Error::MissingColumn(f.name().to_string()));
    }
    let numeric_cols: Vec<(Feature, Option<usize>)> =
        Feature::ALL.iter().map(|&f| (f, col(f.name()))).collect();
    let protocol_col = col("Protocol");
    let category_col = col("AttackCategory");

    let mut summary = LoadSummary::default();
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row?;
        summary.rows_read += 1;
        let label_text = row.get(label_col).unwrap_or("").trim();
        if label_text.is_empty() {
            summary.dropped_unlabeled += 1;
            continue;
        }
        let (label, mut category) = if label_text.eq_ignore_ascii_case("benign") {
            (Label::Benign, None)
        } else if label_text.eq_ignore_ascii_case("malicious") {
            (Label::Malicious, None)
        } else {
            (Label::Malicious, Some(label_text.to_string()))
        };
        if let Some(text) = category_col.and_then(|c| row.get(c)).map(str::trim) {
            if !text.is_empty() {
                category = Some(text.to_string());
            }
        }

        let mut rec = FlowRecord::new(0.0, 1.0, 0.0, label);
        rec.attack_category = category;
        let mut ok = true;
        for &(f, c) in &numeric_cols {
            if f.is_rate() {
                continue;
            }
            let parsed = c
                .and_then(|c| row.get(c))
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite());
            match parsed {
                Some(v) => {
                    if matches!(f, Feature::SrcPort | Feature::DstPort)
                        && !(0.0..=65535.0).contains(&v)
                    {
                        if required.contains(&f) {
                            ok = false;
                        }
                    } else {
                        rec.set(f, v);
                    }
                }
                None if required.contains(&f) => ok = false,
                None => {}
            }
        }
        if let Some(p) = protocol_col.and_then(|c| row.get(c)) {
            rec.protocol = Protocol::parse(p);
        }
        rec.derive_rates();
        if !ok || rec.validate().is_err() {
            summary.dropped_invalid += 1;
            continue;
        }
        records.push(rec);
    }
    summary.rows_kept = records.len();
    if records.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok((FlowDataset::new(records, features.to_vec()), summary))
}

pub fn write_csv(dataset: &FlowDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(dataset, file)
}

/// Writes every record field; floats use shortest round-trip formatting.
pub fn write_csv_to<W: Write>(dataset: &FlowDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in &dataset.records {
        w.write_record([
            r.duration.to_string(),
            r.tot_pkts.to_string(),
            r.tot_bytes.to_string(),
            r.bytes_per_sec.to_string(),
            r.pkts_per_sec.to_string(),
            r.src_port.to_string(),
            r.dst_port.to_string(),
            r.protocol.name().to_string(),
            r.timestamp.to_string(),
            r.label.name().to_string(),
            r.attack_category.clone().unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
