use std::time::Instant;

use rayon::prelude::*;
use tracing::{info, warn};

use super::plan::{ExperimentPlan, Mode};
use super::record::{GridParam, SummaryRecord, TrialRecord};
use super::stats::{fit_scaling_slope, ScalingFit};
use crate::bai::{run_bai, BaiConfig, Procedure, TerminatedBy};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::regret::{run_regret, RegretConfig};
use crate::rng::derive_seed;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SweepOptions {
    /// Worker threads; `0` uses rayon's default.
    pub workers: usize,
    /// Fill `wall_ms`. Off by default so output is reproducible byte for byte.
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<SummaryRecord>,
}

struct Cell {
    procedure: Option<Procedure>,
    grid_index: u64,
    value: f64,
}

/// Loads the plan's instance and runs every trial.
pub fn run_sweep(plan: &ExperimentPlan, opts: SweepOptions) -> Result<SweepOutput> {
    plan.validate()?;
    let inst = plan.load_instance()?;
    for w in inst.warnings() {
        warn!("{w}");
    }
    run_sweep_on(plan, &inst, opts)
}

/// Runs every trial of `plan` on an already validated instance.
///
/// Trial `i` at grid point `g` uses seed `derive_seed(master_seed, g, i)`.
/// Procedures share seeds, so they are compared on common random numbers.
/// Records come out ordered by procedure, then grid point, then trial, no
/// matter how many workers ran them.
pub fn run_sweep_on(
    plan: &ExperimentPlan,
    inst: &Instance,
    opts: SweepOptions,
) -> Result<SweepOutput> {
    let cells: Vec<Cell> = match plan.mode {
        Mode::Bai => plan
            .procedures()
            .into_iter()
            .flat_map(|p| {
                plan.deltas.iter().enumerate().map(move |(g, &d)| Cell {
                    procedure: Some(p),
                    grid_index: g as u64,
                    value: d,
                })
            })
            .collect(),
        Mode::Regret => plan
            .budgets
            .iter()
            .enumerate()
            .map(|(g, &b)| Cell {
                procedure: None,
                grid_index: g as u64,
                value: b,
            })
            .collect(),
        Mode::Bounds | Mode::Validate => {
            return Err(Error::Parameter(
                "only bai and regret plans run trials".into(),
            ));
        }
    };
    let prior = plan.prior()?;
    let items: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..plan.trials).map(move |t| (c, t)))
        .collect();

    let run_one = |&(c, trial): &(usize, u64)| -> Result<TrialRecord> {
        let cell = &cells[c];
        let seed = derive_seed(plan.master_seed, cell.grid_index, trial);
        let start = opts.timing.then(Instant::now);
        let mut rec = match plan.mode {
            Mode::Bai => {
                let procedure = cell.procedure.expect("bai cells carry a procedure");
                let mut cfg = BaiConfig::new(inst, procedure, cell.value, Some(prior));
                if let Some(l) = plan.confidence_factor {
                    cfg.confidence_factor = l;
                }
                cfg.max_pulls = plan.max_pulls;
                let r = run_bai(inst, &cfg, seed)?;
                if r.terminated_by == TerminatedBy::Cap {
                    warn!(%procedure, delta = cell.value, trial, "run hit the pull cap");
                }
                TrialRecord {
                    mode: Mode::Bai,
                    procedure: Some(procedure),
                    grid_param_name: GridParam::Delta,
                    grid_param_value: cell.value,
                    trial,
                    seed,
                    chosen_arm: Some(inst.original_index(r.chosen_arm) + 1),
                    success: Some(r.success()),
                    total_cost: r.total_cost,
                    rounds: r.rounds,
                    pseudo_regret: None,
                    wall_ms: None,
                }
            }
            _ => {
                let mut cfg = RegretConfig::new(cell.value);
                if let Some(e) = plan.epsilon {
                    cfg = cfg.with_epsilon(e);
                }
                let r = run_regret(inst, &cfg, seed)?;
                TrialRecord {
                    mode: Mode::Regret,
                    procedure: None,
                    grid_param_name: GridParam::Budget,
                    grid_param_value: cell.value,
                    trial,
                    seed,
                    chosen_arm: None,
                    success: None,
                    total_cost: r.total_cost,
                    rounds: r.phases.len() as u64,
                    pseudo_regret: Some(r.pseudo_regret),
                    wall_ms: None,
                }
            }
        };
        rec.wall_ms = start.map(|s| s.elapsed().as_secs_f64() * 1e3);
        Ok(rec)
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| Error::Parameter(format!("cannot start worker pool: {e}")))?;
    info!(
        trials = items.len(),
        workers = pool.current_num_threads(),
        "running sweep"
    );
    let records: Vec<TrialRecord> =
        pool.install(|| items.par_iter().map(run_one).collect::<Result<_>>())?;

    let per_cell = plan.trials as usize;
    let summaries = records
        .chunks(per_cell)
        .filter_map(SummaryRecord::from_trials)
        .collect();
    Ok(SweepOutput { records, summaries })
}

/// Log-log fit of mean pseudo-regret against budget over regret summaries.
pub fn scaling_fit(summaries: &[SummaryRecord]) -> Result<ScalingFit> {
    let points: Vec<(f64, f64)> = summaries
        .iter()
        .filter(|s| s.grid_param_name == GridParam::Budget)
        .filter_map(|s| s.mean_pseudo_regret.map(|r| (s.grid_param_value, r)))
        .collect();
    fit_scaling_slope(&points)
}
