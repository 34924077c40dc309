//! Stage orchestration over an artifact directory.
//!
//! Each stage reads its inputs from the directory and writes its outputs back,
//! so stages can run one at a time or all at once with identical results.
//! Wall-clock timings go to `timings.json` and never into the report.

mod artifacts;
mod config;
mod report;
mod stages;

use std::collections::BTreeMap;
use std::time::Instant;

pub use artifacts::*;
pub use config::{
    ChangePointConfig, DataConfig, DataSource, ExperimentConfig, IdsConfig, NaiveAttackConfig,
};
pub use report::*;
pub use stages::{Experiment, Stage};

use crate::error::{Error, Result};

/// Runs one stage and merges its elapsed seconds into `timings.json`.
pub fn run_stage(exp: &Experiment, stage: Stage) -> Result<f64> {
    let start = Instant::now();
    exp.run(stage).map_err(|e| Error::Stage {
        stage: stage.name().to_string(),
        source: Box::new(e),
    })?;
    let secs = start.elapsed().as_secs_f64();
    let mut timings: BTreeMap<String, f64> = if exp.dir.path(TIMINGS).is_file() {
        exp.dir.read_json(TIMINGS).unwrap_or_default()
    } else {
        BTreeMap::new()
    };
    timings.insert(stage.name().to_string(), secs);
    exp.dir.write_json(TIMINGS, &timings)?;
    Ok(secs)
}

/// Runs every stage in order and returns the final report.
pub fn run_pipeline(exp: &Experiment) -> Result<ExperimentReport> {
    for stage in Stage::ALL {
        run_stage(exp, stage)?;
    }
    exp.dir.read_json(REPORT)
}
