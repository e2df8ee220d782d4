use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{run_pima_study, PimaStudy, PimaStudyConfig};
use crate::error::{Error, Result};
use crate::estimators::{conditional_curve, sensitivity_curve, ConditionalKind, EstimatorOutput};
use crate::gauss_seq::{density_curve, UCoupling};
use crate::joint::JointModel;
use crate::replicates::Replicates;
use crate::rng::{substream, Purpose};
use crate::stats;

use super::config::{linspace, ExperimentConfig, ExperimentName, GridSpec, Method};

/// Default location of the Pima data relative to the working directory.
pub const DEFAULT_PIMA_PATH: &str = "data/pima.csv";

/// Square root of the work-normalized relative variance,
/// √(cpu·variance / (r·estimate²)). NaN when the estimate is zero.
pub fn wnrv(cpu_seconds: f64, variance: f64, r: usize, estimate: f64) -> f64 {
    assert!(r > 0, "wnrv needs r > 0");
    if estimate == 0.0 {
        return f64::NAN;
    }
    (cpu_seconds * variance / (r as f64 * estimate * estimate)).sqrt()
}

/// One (grid point, method) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    #[serde(with = "nan_as_null")]
    pub s: f64,
    pub method: String,
    #[serde(with = "nan_as_null")]
    pub estimate: f64,
    #[serde(with = "nan_as_null")]
    pub std_error: f64,
    #[serde(with = "nan_as_null")]
    pub sqrt_wnrv: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodTiming {
    pub method: String,
    /// Wall time of the whole-grid estimation pass.
    pub cpu_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub experiment: String,
    pub version: String,
    pub seed: u64,
    pub n: usize,
    pub r: usize,
    pub pilot_frac: f64,
    pub grid_points: usize,
    pub methods: Vec<String>,
    /// Hash of the shared replicate set; every method consumed this set.
    pub replicate_fingerprint: Option<String>,
    /// Sequential draws redrawn after hitting a numerical boundary.
    pub rejected_draws: usize,
    pub workers: Option<usize>,
    pub simulation_seconds: Option<f64>,
    pub wall_seconds: Option<f64>,
    pub timings: Vec<MethodTiming>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub metadata: RunMetadata,
    pub rows: Vec<EstimateRow>,
}

impl ExperimentResult {
    pub fn grid(&self) -> Vec<f64> {
        let mut grid: Vec<f64> = Vec::new();
        for row in &self.rows {
            if grid.last() != Some(&row.s) {
                grid.push(row.s);
            }
        }
        grid
    }

    /// Rows of one method in grid order.
    pub fn method_rows<'a>(
        &'a self,
        method: &'a str,
    ) -> impl Iterator<Item = &'a EstimateRow> + 'a {
        self.rows.iter().filter(move |r| r.method == method)
    }
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

pub fn version_string() -> String {
    match option_env!("SUMDENS_GIT_DESCRIBE") {
        Some(describe) => describe.to_string(),
        None => format!("v{}", env!("CARGO_PKG_VERSION")),
    }
}

/// Quantiles of S from `draws` simulated sums bounding the central `mass`.
pub fn coverage_range(jm: &JointModel, draws: usize, seed: u64, mass: f64) -> Result<(f64, f64)> {
    if draws < 2 {
        return Err(Error::Config(
            "grid pre-pass needs at least two draws".into(),
        ));
    }
    let mut sums: Vec<f64> = (0..draws)
        .into_par_iter()
        .map(|i| {
            let (x, _) = jm.sample(&mut substream(seed, Purpose::GridPrepass, i as u64));
            x.iter().sum()
        })
        .collect();
    sums.sort_by(f64::total_cmp);
    let tail = 0.5 * (1.0 - mass);
    Ok((
        stats::quantile_sorted(&sums, tail),
        stats::quantile_sorted(&sums, 1.0 - tail),
    ))
}

/// Resolves the grid, running the pre-pass only for missing endpoints.
pub fn resolve_grid(jm: &JointModel, spec: &GridSpec, draws: usize, seed: u64) -> Result<Vec<f64>> {
    let (min, max) = match (spec.min, spec.max) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            let (lo, hi) = coverage_range(jm, draws, seed, 0.99)?;
            (spec.min.unwrap_or(lo), spec.max.unwrap_or(hi))
        }
    };
    if !(min < max) {
        return Err(Error::Config(format!("empty grid [{min}, {max}]")));
    }
    Ok(linspace(min, max, spec.points))
}

fn method_outputs(
    method: Method,
    jm: &JointModel,
    reps: &Replicates,
    grid: &[f64],
    cfg: &ExperimentConfig,
    rejected: &mut usize,
) -> Result<(Vec<EstimatorOutput>, f64)> {
    let start = Instant::now();
    let outputs = match method {
        Method::Sensitivity => sensitivity_curve(reps, jm, grid, cfg.pilot_frac)?
            .into_iter()
            .map(|e| e.output)
            .collect(),
        Method::Cond => conditional_curve(reps, jm, grid, ConditionalKind::Cond)?,
        Method::ExtCond => conditional_curve(reps, jm, grid, ConditionalKind::ExtCond)?,
        Method::Ak => conditional_curve(reps, jm, grid, ConditionalKind::Ak)?,
        Method::AkExt => conditional_curve(reps, jm, grid, ConditionalKind::AkExt)?,
        Method::GaussSeq => {
            let curve = density_curve(jm, grid, cfg.r, cfg.seed, UCoupling::Common)?;
            *rejected += curve.rejected;
            curve.points.into_iter().map(|p| p.pdf).collect()
        }
    };
    Ok((outputs, start.elapsed().as_secs_f64()))
}

fn run_simulation(cfg: &ExperimentConfig, grid: Option<&[f64]>) -> Result<ExperimentResult> {
    let wall = Instant::now();
    let jm = cfg.joint_model()?;
    let methods = cfg.resolved_methods(&jm)?;
    let grid = match grid {
        Some(g) => g.to_vec(),
        None => resolve_grid(&jm, &cfg.grid, cfg.prepass_draws, cfg.seed)?,
    };
    let needs_replicates = methods.iter().any(|&m| m != Method::GaussSeq);

    let start = Instant::now();
    let reps = if needs_replicates {
        Replicates::simulate(&jm, cfg.r, cfg.seed)
    } else {
        Replicates::from_rows(vec![vec![0.0; jm.dim()]], None)?
    };
    let simulation_seconds = start.elapsed().as_secs_f64();

    let timed = |v: f64| if cfg.timing { Some(v) } else { None };
    let mut rejected = 0;
    let mut per_method = Vec::with_capacity(methods.len());
    let mut timings = Vec::with_capacity(methods.len());
    for &method in &methods {
        let (outputs, cpu) = method_outputs(method, &jm, &reps, &grid, cfg, &mut rejected)?;
        timings.push(MethodTiming {
            method: method.to_string(),
            cpu_seconds: timed(cpu),
        });
        per_method.push((method, outputs, cpu));
    }

    let mut rows = Vec::with_capacity(grid.len() * methods.len());
    for (g, &s) in grid.iter().enumerate() {
        for (method, outputs, cpu) in &per_method {
            let o = outputs[g];
            let sqrt_wnrv = if cfg.timing {
                wnrv(*cpu, o.variance(), o.r_used, o.estimate)
            } else {
                f64::NAN
            };
            rows.push(EstimateRow {
                s,
                method: method.to_string(),
                estimate: o.estimate,
                std_error: o.std_error,
                sqrt_wnrv,
            });
        }
    }

    Ok(ExperimentResult {
        metadata: RunMetadata {
            experiment: cfg.name.to_string(),
            version: version_string(),
            seed: cfg.seed,
            n: jm.dim(),
            r: cfg.r,
            pilot_frac: cfg.pilot_frac,
            grid_points: grid.len(),
            methods: methods.iter().map(ToString::to_string).collect(),
            replicate_fingerprint: needs_replicates.then(|| format!("{:016x}", reps.fingerprint())),
            rejected_draws: rejected,
            workers: cfg.workers,
            simulation_seconds: timed(simulation_seconds),
            wall_seconds: timed(wall.elapsed().as_secs_f64()),
            timings,
        },
        rows,
    })
}

/// Converts a Pima study into table form: the score-based estimator, the
/// kernel estimate on the same chain, and the long-chain benchmark.
pub fn pima_result(study: &PimaStudy, cfg: &PimaStudyConfig, timing: bool) -> ExperimentResult {
    let timed = |v: f64| if timing { Some(v) } else { None };
    let mut rows = Vec::with_capacity(3 * study.grid.len());
    for (g, &s) in study.grid.iter().enumerate() {
        let p = study.sensitivity[g];
        let sqrt_wnrv = if timing {
            wnrv(
                study.sensitivity_seconds,
                p.std_error * p.std_error,
                1,
                p.estimate,
            )
        } else {
            f64::NAN
        };
        rows.push(EstimateRow {
            s,
            method: "sensitivity".into(),
            estimate: p.estimate,
            std_error: p.std_error,
            sqrt_wnrv,
        });
        rows.push(EstimateRow {
            s,
            method: "kde".into(),
            estimate: study.kde[g],
            std_error: f64::NAN,
            sqrt_wnrv: f64::NAN,
        });
        rows.push(EstimateRow {
            s,
            method: "kde_benchmark".into(),
            estimate: study.benchmark[g],
            std_error: f64::NAN,
            sqrt_wnrv: f64::NAN,
        });
    }
    ExperimentResult {
        metadata: RunMetadata {
            experiment: ExperimentName::BayesPima.to_string(),
            version: version_string(),
            seed: cfg.seed,
            n: 1,
            r: cfg.keep,
            pilot_frac: cfg.pilot_frac,
            grid_points: study.grid.len(),
            methods: vec!["sensitivity".into(), "kde".into(), "kde_benchmark".into()],
            replicate_fingerprint: None,
            rejected_draws: 0,
            workers: None,
            simulation_seconds: timed(study.chain_seconds),
            wall_seconds: None,
            timings: vec![
                MethodTiming {
                    method: "sensitivity".into(),
                    cpu_seconds: timed(study.sensitivity_seconds),
                },
                MethodTiming {
                    method: "kde".into(),
                    cpu_seconds: timed(study.kde_seconds),
                },
            ],
        },
        rows,
    }
}

fn run_inner(cfg: &ExperimentConfig, grid: Option<&[f64]>) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.name == ExperimentName::BayesPima {
        let mut study_cfg = PimaStudyConfig::new(
            cfg.data
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_PIMA_PATH)),
        );
        study_cfg.seed = cfg.seed;
        study_cfg.grid_points = cfg.grid.points;
        study_cfg.pilot_frac = cfg.pilot_frac;
        let study = run_pima_study(&study_cfg)?;
        let mut result = pima_result(&study, &study_cfg, cfg.timing);
        result.metadata.workers = cfg.workers;
        return Ok(result);
    }
    run_simulation(cfg, grid)
}

/// Runs an experiment on one shared replicate set, timing each method's
/// grid pass separately. Output is identical for any worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    in_pool(cfg.workers, || run_inner(cfg, None))
}

/// Like [`run_experiment`] but on the given evaluation points instead of
/// the configured grid. Not available for `bayes_pima`.
pub fn run_experiment_on_grid(cfg: &ExperimentConfig, grid: &[f64]) -> Result<ExperimentResult> {
    if cfg.name == ExperimentName::BayesPima {
        return Err(Error::Config("bayes_pima chooses its own grid".into()));
    }
    if grid.is_empty() {
        return Err(Error::Config("empty evaluation grid".into()));
    }
    in_pool(cfg.workers, || run_inner(cfg, Some(grid)))
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(f),
        None => f(),
    }
}
