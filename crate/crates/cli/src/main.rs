mod analyze;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use priceflux_core::synth::{GeneratorSpec, ProcessKind, Sinusoid};
use priceflux_core::{CoreError, GapPolicy};

use config::AnalysisConfig;

/// Price time-series predictability analyzer.
#[derive(Parser)]
#[command(name = "priceflux", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis pipeline and write report.json plus CSV artifacts.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic price series as CSV.
    Synth(SynthArgs),
    /// Compare one or more report.json files side by side.
    Report(ReportArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// TOML config file; omitted fields take documented defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input CSV; overrides the config file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory; overrides the config file.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Gap policy: linear-interpolate, carry-forward, or fail.
    #[arg(long)]
    gap_policy: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    /// Process kind: white-noise, random-walk, fbm, ou, mrjd, spike-train,
    /// sinusoid-mix.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8760)]
    length: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.5)]
    hurst: f64,
    #[arg(long, default_value_t = 50.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.1)]
    theta: f64,
    #[arg(long, default_value_t = 0.02)]
    jump_rate: f64,
    #[arg(long, default_value_t = 40.0)]
    jump_scale: f64,
    #[arg(long, default_value_t = 20.0)]
    baseline: f64,
    #[arg(long, default_value_t = 100.0)]
    height: f64,
    #[arg(long, default_value_t = 0.02)]
    rate: f64,
    /// Sinusoid periods in hours, comma separated.
    #[arg(long, default_value = "24")]
    periods: String,
    /// Sinusoid amplitudes, comma separated, one per period.
    #[arg(long, default_value = "3")]
    amplitudes: String,
}

#[derive(Args)]
struct ReportArgs {
    /// report.json paths to compare.
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Directory for comparison.csv and comparison.txt.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap renders help/version through the error path with exit 0
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = match cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Synth(args) => run_synth(args),
        Command::Report(args) => run_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(classify_error(&e))
        }
    }
}

/// 1 usage, 2 data, 3 numerical.
fn classify_error(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::Io { .. }
                | CoreError::UnparsableRow { .. }
                | CoreError::DuplicateTimestamp { .. }
                | CoreError::NonHourlyCadence { .. }
                | CoreError::BoundaryGap
                | CoreError::GapsPresent { .. }
                | CoreError::GapTooLong { .. }
                | CoreError::SeriesTooShort { .. }
                | CoreError::EmptyPriceRange { .. } => 2,
                CoreError::InvalidCalendar(_)
                | CoreError::InvalidSpec(_)
                | CoreError::InvalidParameter(_)
                | CoreError::ScaleOutOfRange { .. }
                | CoreError::PeriodOutOfRange { .. } => 1,
                CoreError::InsufficientBoxes { .. }
                | CoreError::DegenerateFit(_)
                | CoreError::EmptyFitRange
                | CoreError::InsufficientBins { .. }
                | CoreError::TooFewPairs { .. } => 3,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 2;
        }
    }
    1
}

fn run_analyze(args: AnalyzeArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => AnalysisConfig::load(path)?,
        None => AnalysisConfig::default(),
    };
    if let Some(input) = args.input {
        cfg.input = input;
    }
    if let Some(dir) = args.output_dir {
        cfg.output_dir = dir;
    }
    if let Some(policy) = &args.gap_policy {
        cfg.gap_policy = match policy.as_str() {
            "linear-interpolate" => GapPolicy::LinearInterpolate,
            "carry-forward" => GapPolicy::CarryForward,
            "fail" => GapPolicy::Fail,
            other => bail!("unknown gap policy `{other}`"),
        };
    }
    let report = analyze::cmd_analyze(&cfg)?;
    println!(
        "wrote {} ({} series block{})",
        cfg.output_dir.join("report.json").display(),
        report.series.len(),
        if report.series.len() == 1 { "" } else { "s" }
    );
    Ok(())
}

fn parse_f64_list(text: &str, what: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .with_context(|| format!("invalid {what} `{t}`"))
        })
        .collect()
}

fn run_synth(args: SynthArgs) -> Result<()> {
    let kind = match args.kind.as_str() {
        "white-noise" => ProcessKind::WhiteNoise { sigma: args.sigma },
        "random-walk" => ProcessKind::RandomWalk { sigma: args.sigma },
        "fbm" => ProcessKind::Fbm {
            hurst: args.hurst,
            sigma: args.sigma,
        },
        "ou" => ProcessKind::Ou {
            mu: args.mu,
            theta: args.theta,
            sigma: args.sigma,
        },
        "mrjd" => ProcessKind::Mrjd {
            mu: args.mu,
            theta: args.theta,
            sigma: args.sigma,
            jump_rate: args.jump_rate,
            jump_scale: args.jump_scale,
        },
        "spike-train" => ProcessKind::SpikeTrain {
            baseline: args.baseline,
            height: args.height,
            rate: args.rate,
        },
        "sinusoid-mix" => {
            let periods = parse_f64_list(&args.periods, "period")?;
            let amplitudes = parse_f64_list(&args.amplitudes, "amplitude")?;
            if periods.len() != amplitudes.len() {
                bail!("--periods and --amplitudes must have the same length");
            }
            ProcessKind::SinusoidMix {
                components: periods
                    .into_iter()
                    .zip(amplitudes)
                    .map(|(period_hours, amplitude)| Sinusoid {
                        period_hours,
                        amplitude,
                    })
                    .collect(),
                noise_sigma: args.sigma,
            }
        }
        other => bail!("unknown process kind `{other}`"),
    };
    let spec = GeneratorSpec {
        kind,
        seed: args.seed,
        length: args.length,
    };
    let series = priceflux_core::synth::gen(&spec)?;
    series.write_csv(&args.out)?;
    println!("wrote {} ({} samples)", args.out.display(), series.len());
    Ok(())
}

fn run_report(args: ReportArgs) -> Result<()> {
    let reports: Vec<report::Report> = args
        .reports
        .iter()
        .map(|p| report::Report::load(p))
        .collect::<Result<_>>()?;
    let table = report::compare(&reports)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("cannot create {}", args.out.display()))?;
    let text = table.to_aligned_text();
    std::fs::write(args.out.join("comparison.csv"), table.to_csv())?;
    std::fs::write(args.out.join("comparison.txt"), &text)?;
    print!("{text}");
    Ok(())
}
