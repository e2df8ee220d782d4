use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sumdens::bayes::{run_pima_study, PimaStudyConfig};
use sumdens::harness::{
    emit, parse_methods, pima_result, run_experiment, to_json_string, write_csv, ExperimentConfig,
    ExperimentName, ExperimentResult, GridSpec, OutputFormat, DEFAULT_PIMA_PATH, SEED_ENV,
};
use sumdens::Result;

#[derive(Parser)]
#[command(
    name = "sumdens",
    version,
    about = "Monte Carlo density estimation for sums of dependent variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named simulation experiment.
    Run(RunArgs),
    /// Marginal posterior of a logistic regression coefficient on the Pima data.
    Bayes(BayesArgs),
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Write timings and √WNRV as NaN so output depends on the seed only.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct RunArgs {
    /// clayton_weibull, gumbel_exponential, frank_lognormal, gauss_lognormal, bayes_pima or custom.
    name: String,
    #[arg(long)]
    n: Option<usize>,
    /// Replicates.
    #[arg(long = "R", short = 'R', default_value_t = ExperimentConfig::DEFAULT_R)]
    r: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    grid_min: Option<f64>,
    #[arg(long)]
    grid_max: Option<f64>,
    #[arg(long, default_value_t = 50)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.05)]
    pilot_frac: f64,
    /// Equicorrelation for gauss_lognormal.
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Comma-separated subset of sensitivity, cond, ext_cond, ak, ak_ext, gauss_seq.
    #[arg(long)]
    methods: Option<String>,
    /// Copula for custom runs, e.g. clayton:0.2, gumbel:5, frank:0.001, gaussian:0.5, independence.
    #[arg(long)]
    copula: Option<String>,
    /// Marginal for custom runs, e.g. weibull:0.3,1, exponential:1, lognormal:0,1.
    #[arg(long)]
    marginal: Option<String>,
    /// Draws used to place the grid when an endpoint is missing.
    #[arg(long, default_value_t = ExperimentConfig::DEFAULT_PREPASS)]
    prepass: usize,
    #[arg(long)]
    workers: Option<usize>,
    /// Data file for bayes_pima.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct BayesArgs {
    #[arg(long, default_value = DEFAULT_PIMA_PATH)]
    data: PathBuf,
    /// Kept steps of the estimation chain.
    #[arg(long, default_value_t = 25_000)]
    steps: usize,
    #[arg(long, default_value_t = 1_000)]
    burn_in: usize,
    #[arg(long, default_value_t = 7.5e-3)]
    step_var: f64,
    /// Coefficient column.
    #[arg(long, default_value = "bmi")]
    coef: String,
    /// Benchmark chain of 5·10⁶ steps instead of 5·10⁵.
    #[arg(long)]
    full: bool,
    /// Benchmark chain length, overriding --full.
    #[arg(long)]
    bench_steps: Option<usize>,
    #[arg(long, default_value_t = 50)]
    grid_points: usize,
    #[arg(long, default_value_t = 0.05)]
    pilot_frac: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

fn write_result(result: &ExperimentResult, output: &OutputArgs) -> Result<()> {
    let format: OutputFormat = output.format.parse()?;
    match &output.out {
        Some(path) => emit(result, path, format),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            match format {
                OutputFormat::Csv => write_csv(&result.rows, &mut lock),
                OutputFormat::Json => {
                    let json = to_json_string(result)?;
                    writeln!(lock, "{json}")
                        .map_err(|e| sumdens::Error::Serialization(e.to_string()))
                }
            }
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::new(args.name.parse::<ExperimentName>()?);
    cfg.n = args.n;
    cfg.r = args.r;
    cfg.seed = args.seed;
    cfg.grid = GridSpec {
        min: args.grid_min,
        max: args.grid_max,
        points: args.grid_points,
    };
    cfg.pilot_frac = args.pilot_frac;
    cfg.rho = args.rho;
    cfg.methods = args.methods.as_deref().map(parse_methods).transpose()?;
    cfg.copula = args.copula;
    cfg.marginal = args.marginal;
    cfg.prepass_draws = args.prepass;
    cfg.workers = args.workers;
    cfg.timing = !args.output.no_timing;
    cfg.data = args.data;
    cfg.output = args.output.out.clone();
    cfg.format = args.output.format.parse()?;
    let result = run_experiment(&cfg)?;
    write_result(&result, &args.output)?;
    let m = &result.metadata;
    eprintln!(
        "{}: n={} R={} seed={} methods={} replicates={}",
        m.experiment,
        m.n,
        m.r,
        m.seed,
        m.methods.join(","),
        m.replicate_fingerprint.as_deref().unwrap_or("-")
    );
    Ok(())
}

fn bayes(args: BayesArgs) -> Result<()> {
    let mut cfg = PimaStudyConfig::new(args.data);
    cfg.keep = args.steps;
    cfg.burn_in = args.burn_in;
    cfg.step_var = args.step_var;
    cfg.coefficient = args.coef;
    cfg.bench_steps = args.bench_steps.unwrap_or(if args.full {
        PimaStudyConfig::FULL_BENCH_STEPS
    } else {
        PimaStudyConfig::DESK_BENCH_STEPS
    });
    cfg.grid_points = args.grid_points;
    cfg.pilot_frac = args.pilot_frac;
    cfg.seed = args.seed;
    let study = run_pima_study(&cfg)?;
    let result = pima_result(&study, &cfg, !args.output.no_timing);
    write_result(&result, &args.output)?;
    let p = study.sensitivity[study.mode_index];
    eprintln!(
        "{} mode ≈ {:.4}: sensitivity {:.5} ± {:.5}, benchmark kde {:.5}; acceptance {:.3}",
        study.coefficient,
        study.mode(),
        p.estimate,
        p.std_error,
        study.benchmark[study.mode_index],
        study.acceptance_rate
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::Bayes(args) => bayes(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sumdens: {e}");
            ExitCode::FAILURE
        }
    }
}
