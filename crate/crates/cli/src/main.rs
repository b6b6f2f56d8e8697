use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use freqbias_cli::error::exit;
use freqbias_cli::pipeline::{run_stage, Stage};
use freqbias_cli::telemetry::{read_truth_csv, write_dataset_csv, write_truth_csv};
use freqbias_cli::{ingest_csv, BetaUnit, CliError, GapPolicy, Overrides, RunConfig};
use freqbias_core::{
    simulate_ba, uniform_interchange, AreaDroop, BiasSchedule, BiasValue, DisturbanceSpec, InterchangeModel,
    LoadModel,
};

#[derive(Parser)]
#[command(name = "freqbias", version, about = "Time-varying frequency bias estimation from minute telemetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic telemetry day and its truth sidecar.
    Simulate(SimulateArgs),
    /// Rolling droop estimates.
    Estimate(StageArgs),
    /// ACE decomposition, load deviations and hourly IEE.
    Decompose(StageArgs),
    /// Regulation reserve envelopes, tightening and savings.
    Reserves(StageArgs),
    /// Every stage plus plot data.
    Report(StageArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    #[value(name = "mw_per_hz")]
    MwPerHz,
    #[value(name = "mw_per_0p1hz")]
    MwPer0p1hz,
}

#[derive(Clone, Copy, ValueEnum)]
enum GapArg {
    Reject,
    #[value(name = "drop_hour")]
    DropHour,
}

#[derive(Args)]
struct StageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    window_minutes: Option<usize>,
    #[arg(long)]
    fixed_beta: Option<f64>,
    #[arg(long, value_enum)]
    beta_unit: Option<UnitArg>,
    #[arg(long)]
    quantile: Option<f64>,
    #[arg(long, value_enum)]
    gap_policy: Option<GapArg>,
    /// Negate the interchange part of ACE.
    #[arg(long)]
    flip_interchange_sign: bool,
    /// Truth sidecar from `simulate`, for error reporting.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1440)]
    minutes: usize,
    /// Area bias, MW/Hz.
    #[arg(long, default_value_t = 4090.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.98)]
    alpha: f64,
    /// Random-walk load step, MW per minute.
    #[arg(long, default_value_t = 50.0)]
    load_step_mw: f64,
    /// Minute at which the bias steps to `--step-beta`.
    #[arg(long, requires = "step_beta")]
    step_minute: Option<usize>,
    #[arg(long, requires = "step_minute")]
    step_beta: Option<f64>,
    /// Bias used by the simulated operator's ACE, MW/Hz. Defaults to truth.
    #[arg(long)]
    operator_beta: Option<f64>,
    /// Half width of uniform unscheduled interchange, MW.
    #[arg(long, default_value_t = 0.0)]
    interchange_noise_mw: f64,
    #[arg(long)]
    no_agc: bool,
    #[arg(long, default_value = "sim")]
    out: PathBuf,
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let area = AreaDroop::from_bias(args.beta, args.alpha).map_err(CliError::from)?;
    let bias_schedule = match (args.step_minute, args.step_beta) {
        (Some(m), Some(b)) => BiasSchedule::Piecewise(vec![(0, args.beta), (m, b)]),
        _ => BiasSchedule::Constant,
    };
    let spec = DisturbanceSpec {
        seed: args.seed,
        load_model: LoadModel::RandomWalk {
            step_mw: args.load_step_mw,
        },
        interchange_model: InterchangeModel::Exogenous(
            uniform_interchange(args.seed.wrapping_add(1), args.minutes, args.interchange_noise_mw)
                .map_err(CliError::from)?,
        ),
        bias_schedule,
        operator_bias: args.operator_beta.map(BiasValue::mw_per_hz),
        ..DisturbanceSpec::default()
    };
    let ds = simulate_ba(&area, &spec, args.minutes, !args.no_agc).map_err(CliError::from)?;
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::io(&args.out, e))?;
    let telemetry = args.out.join("telemetry.csv");
    let truth = args.out.join("truth.csv");
    write_dataset_csv(&ds, &telemetry)?;
    write_truth_csv(&ds.truth, &truth)?;
    println!("{}", telemetry.display());
    println!("{}", truth.display());
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn stage(stage: Stage, args: &StageArgs) -> anyhow::Result<()> {
    let overrides = Overrides {
        window_minutes: args.window_minutes,
        fixed_beta: args.fixed_beta,
        beta_unit: args.beta_unit.map(|u| match u {
            UnitArg::MwPerHz => BetaUnit::MwPerHz,
            UnitArg::MwPer0p1hz => BetaUnit::MwPer0p1Hz,
        }),
        quantile: args.quantile,
        gap_policy: args.gap_policy.map(|g| match g {
            GapArg::Reject => GapPolicy::Reject,
            GapArg::DropHour => GapPolicy::DropHour,
        }),
        flip_interchange_sign: args.flip_interchange_sign,
    };
    let cfg = load_config(args.config.as_deref())?.apply(&overrides)?;
    let tel = ingest_csv(&args.input, cfg.gap_policy)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let truth = args.truth.as_deref().map(read_truth_csv).transpose()?;
    let (_, written) = run_stage(stage, &tel, &cfg, truth.as_deref(), &args.out)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let code = err
        .chain()
        .find_map(|e| e.downcast_ref::<CliError>())
        .map(CliError::exit_code)
        .unwrap_or(exit::INTERNAL);
    code as u8
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => stage(Stage::Estimate, a),
        Command::Decompose(a) => stage(Stage::Decompose, a),
        Command::Reserves(a) => stage(Stage::Reserves, a),
        Command::Report(a) => stage(Stage::Report, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
