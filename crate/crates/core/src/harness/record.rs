use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::plan::Mode;
use super::stats::{mean, sample_sd};
use crate::bai::Procedure;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridParam {
    Delta,
    Budget,
}

/// One CSV row per trial. Fields that do not apply to the mode are empty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub mode: Mode,
    pub procedure: Option<Procedure>,
    pub grid_param_name: GridParam,
    pub grid_param_value: f64,
    pub trial: u64,
    pub seed: u64,
    /// 1-based arm label as numbered in the instance file.
    pub chosen_arm: Option<usize>,
    pub success: Option<bool>,
    pub total_cost: f64,
    /// LUCB rounds, or elimination phases in regret mode.
    pub rounds: u64,
    pub pseudo_regret: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// Aggregate over the trials of one (procedure, grid point) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub mode: Mode,
    pub procedure: Option<Procedure>,
    pub grid_param_name: GridParam,
    pub grid_param_value: f64,
    pub trials: u64,
    pub mean_cost: f64,
    pub sd_cost: f64,
    pub success_rate: Option<f64>,
    pub mean_rounds: f64,
    pub mean_pseudo_regret: Option<f64>,
    pub sd_pseudo_regret: Option<f64>,
}

impl SummaryRecord {
    /// Summarizes `records`, which must all share one cell.
    pub fn from_trials(records: &[TrialRecord]) -> Option<Self> {
        let first = records.first()?;
        let costs: Vec<f64> = records.iter().map(|r| r.total_cost).collect();
        let rounds: Vec<f64> = records.iter().map(|r| r.rounds as f64).collect();
        let successes: Vec<bool> = records.iter().filter_map(|r| r.success).collect();
        let regrets: Vec<f64> = records.iter().filter_map(|r| r.pseudo_regret).collect();
        let success_rate = (!successes.is_empty())
            .then(|| successes.iter().filter(|s| **s).count() as f64 / successes.len() as f64);
        Some(Self {
            mode: first.mode,
            procedure: first.procedure,
            grid_param_name: first.grid_param_name,
            grid_param_value: first.grid_param_value,
            trials: records.len() as u64,
            mean_cost: mean(&costs),
            sd_cost: sample_sd(&costs),
            success_rate,
            mean_rounds: mean(&rounds),
            mean_pseudo_regret: (!regrets.is_empty()).then(|| mean(&regrets)),
            sd_pseudo_regret: (!regrets.is_empty()).then(|| sample_sd(&regrets)),
        })
    }
}

/// Writes rows with a header line.
pub fn write_csv<T: Serialize, W: io::Write>(writer: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>, R: io::Read>(reader: R) -> Result<Vec<T>> {
    csv::Reader::from_reader(reader)
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn write_csv_file<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(io::BufWriter::new(file), rows)
}

pub fn read_csv_file<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(io::BufReader::new(file))
}
