//! Replica-averaged experiments built on the exact engines.
//!
//! Every experiment draws replica `r` from the `(seed, r)` disorder sub-stream,
//! runs replicas in parallel and reduces them in replica order, so results do
//! not depend on the thread count.

mod concentration;
mod critical;
mod free_energy;
mod interpolation;
mod meander;
pub mod stats;
mod stretch;
mod tails;

use rayon::prelude::*;

use crate::error::Result;

pub use concentration::{concentration_experiment, ConcentrationConfig, ConcentrationReport};
pub use critical::{
    critical_point_estimate, slope_at_origin, CriticalConfig, CriticalEstimate, Evaluation, Phase,
    SlopePoint, SlopeReport,
};
pub use free_energy::{free_energy_estimate, FreeEnergyConfig, FreeEnergyEstimate, FreeEnergyPoint};
pub use interpolation::{interpolation_experiment, InterpolationConfig, InterpolationPoint, InterpolationReport};
pub use meander::{meander_endpoint_check, MeanderReport};
pub use stretch::{stretch_growth_experiment, StretchConfig, StretchGrowthReport, StretchPoint};
pub use tails::{
    deloc_tail_experiment, deloc_tail_interior, last_exit_experiment, InteriorTailReport,
    LastExitReport, TailCurve,
};

/// Runs `f` on replicas `0..n` in parallel; output is in replica order.
pub(crate) fn par_replicas<T: Send>(n: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n as u64).into_par_iter().map(f).collect()
}

pub(crate) fn check_replicas(n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(crate::Error::invalid(
            "replicas",
            format!("need at least {min} replicas, got {n}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_grid(name: &'static str, grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(crate::Error::invalid(name, "empty grid"));
    }
    if grid.iter().any(|&n| n == 0 || n % 2 != 0) {
        return Err(crate::Error::invalid(name, "entries must be positive even integers"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(crate::Error::invalid(name, "must be strictly increasing"));
    }
    Ok(())
}
