//! Monte-Carlo experiment orchestration and result persistence.

mod plan;
mod record;
mod stats;
mod sweep;

pub use plan::{ExperimentPlan, Mode};
pub use record::{
    read_csv, read_csv_file, write_csv, write_csv_file, GridParam, SummaryRecord, TrialRecord,
};
pub use stats::{fit_scaling_slope, mean, sample_sd, ScalingFit};
pub use sweep::{run_sweep, run_sweep_on, scaling_fit, SweepOptions, SweepOutput};
