//! Parallel cell classification on the rayon pool.

use rayon::prelude::*;

use pidspace_core::boundary::{GainPlane, WeightSpec};
use pidspace_core::region::{ConstraintSet, GridSpec, MapSettings, RegionJob, RegionMap};

use crate::error::{AppError, AppResult};

pub const THREADS_ENV: &str = "PIDSPACE_THREADS";

/// Sizes the global pool from `PIDSPACE_THREADS` (unset or 0: one thread
/// per core). Later calls are no-ops.
pub fn init_threads() -> AppResult<()> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| AppError::Config(format!("{THREADS_ENV} must be a thread count, got {v:?}")))?,
        Err(_) => 0,
    };
    // Fails only when the pool already exists.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Same result as the sequential builder, independent of thread count.
pub fn build(
    constraints: &ConstraintSet,
    plane: &GainPlane,
    grid: GridSpec,
    settings: &MapSettings,
    weight_specs: Option<(WeightSpec, WeightSpec)>,
) -> pidspace_core::Result<RegionMap> {
    let job = RegionJob::new(constraints, plane, grid, settings)?.with_weight_specs(weight_specs);
    let (cells, boundaries) = rayon::join(
        || (0..job.cell_count()).into_par_iter().map(|i| job.classify_cell(i)).collect(),
        || job.boundaries(),
    );
    Ok(job.finish(cells, boundaries))
}

pub fn region_map(
    constraints: &ConstraintSet,
    plane: &GainPlane,
    grid: GridSpec,
    settings: &MapSettings,
    weight_specs: Option<(WeightSpec, WeightSpec)>,
) -> AppResult<RegionMap> {
    Ok(build(constraints, plane, grid, settings, weight_specs)?)
}
