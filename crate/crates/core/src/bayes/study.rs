use std::path::PathBuf;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::stats;

use super::{kde, load_pima, marginal_posterior_density, rw_metropolis, MarginalPoint};

/// Settings for the Pima marginal-posterior study.
#[derive(Debug, Clone, PartialEq)]
pub struct PimaStudyConfig {
    pub data: PathBuf,
    /// Coefficient column name; `bmi` by default.
    pub coefficient: String,
    pub step_var: f64,
    pub burn_in: usize,
    pub keep: usize,
    /// Steps of the long benchmark chain before thinning.
    pub bench_steps: usize,
    pub bench_burn_in: usize,
    pub thin: usize,
    pub grid_points: usize,
    pub pilot_frac: f64,
    pub seed: u64,
}

impl PimaStudyConfig {
    pub const DESK_BENCH_STEPS: usize = 500_000;
    pub const FULL_BENCH_STEPS: usize = 5_000_000;

    pub fn new(data: impl Into<PathBuf>) -> Self {
        Self {
            data: data.into(),
            coefficient: "bmi".into(),
            step_var: 7.5e-3,
            burn_in: 1_000,
            keep: 25_000,
            bench_steps: Self::DESK_BENCH_STEPS,
            bench_burn_in: 10_000,
            thin: 50,
            grid_points: 50,
            pilot_frac: 0.05,
            seed: 0,
        }
    }
}

/// Estimates along the grid from the short chain, with the thinned long-chain
/// kernel estimate as reference.
#[derive(Debug, Clone)]
pub struct PimaStudy {
    pub coefficient: String,
    pub coefficient_index: usize,
    pub grid: Vec<f64>,
    pub sensitivity: Vec<MarginalPoint>,
    pub kde: Vec<f64>,
    pub benchmark: Vec<f64>,
    /// Grid index where the benchmark density peaks.
    pub mode_index: usize,
    pub acceptance_rate: f64,
    pub bench_acceptance_rate: f64,
    pub sensitivity_seconds: f64,
    pub kde_seconds: f64,
    pub chain_seconds: f64,
}

impl PimaStudy {
    pub fn mode(&self) -> f64 {
        self.grid[self.mode_index]
    }
}

pub fn run_pima_study(cfg: &PimaStudyConfig) -> Result<PimaStudy> {
    if cfg.grid_points < 2 {
        return Err(Error::Config(
            "at least two grid points are required".into(),
        ));
    }
    let model = load_pima(&cfg.data)?;
    let index = model
        .column_index(&cfg.coefficient)
        .ok_or_else(|| Error::Config(format!("unknown coefficient {:?}", cfg.coefficient)))?;
    let init = vec![0.0; model.dim()];

    let t = Instant::now();
    let chain = rw_metropolis(&model, &init, cfg.step_var, cfg.burn_in, cfg.keep, cfg.seed)?;
    let chain_seconds = t.elapsed().as_secs_f64();
    let bench_seed = cfg.seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let bench = rw_metropolis(
        &model,
        &init,
        cfg.step_var,
        cfg.bench_burn_in,
        cfg.bench_steps,
        bench_seed,
    )?;
    let bench_samples = bench.thinned_coordinate(index, cfg.thin);

    let mut sorted = bench_samples.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = stats::quantile_sorted(&sorted, 0.001);
    let hi = stats::quantile_sorted(&sorted, 0.999);
    let step = (hi - lo) / (cfg.grid_points - 1) as f64;
    let grid: Vec<f64> = (0..cfg.grid_points).map(|j| lo + step * j as f64).collect();

    let t = Instant::now();
    let sensitivity = marginal_posterior_density(&chain, index, &grid, None, cfg.pilot_frac)?;
    let sensitivity_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let kde_short = kde(&chain.coordinate(index), &grid)?;
    let kde_seconds = t.elapsed().as_secs_f64();
    let benchmark = kde(&bench_samples, &grid)?;
    let mode_index = benchmark
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);

    Ok(PimaStudy {
        coefficient: cfg.coefficient.clone(),
        coefficient_index: index,
        grid,
        sensitivity,
        kde: kde_short,
        benchmark,
        mode_index,
        acceptance_rate: chain.acceptance_rate,
        bench_acceptance_rate: bench.acceptance_rate,
        sensitivity_seconds,
        kde_seconds,
        chain_seconds,
    })
}
