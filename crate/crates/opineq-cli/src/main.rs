use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opineq::gen::MapStyle;

use opineq_cli::campaign::{
    compute_constants, replay_failures, run_campaign, run_equality_cases, run_tightness,
};
use opineq_cli::config::{BracketMode, CampaignConfig, DimRange, Overrides, Selector, Theorem};
use opineq_cli::report::{
    render_constants, render_equality_cases, render_summary, tightness_csv, Report,
};
use opineq_cli::{CliError, Result};

#[derive(Parser)]
#[command(
    name = "opineq",
    version,
    about = "Seeded verification campaigns for operator inequality chains"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification campaign and summarize per-link spectral gaps
    Verify(VerifyArgs),
    /// Evaluate the sharp constants for a spectrum bracket
    Constants(ConstantsArgs),
    /// Re-run the fixed equality witnesses and confirm all gaps vanish
    EqualityCases(EqualityArgs),
    /// Emit per-instance columns comparing the refined chain to the classical bound
    Tightness(TightnessArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON config file; explicit flags override its fields
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Chain to verify (e.g. refined, power, chord-sum) or `all`
    #[arg(long)]
    theorem: Option<Selector>,
    /// Instances per selected chain
    #[arg(long)]
    trials: Option<usize>,
    /// Inclusive dimension range, e.g. 2..8 or a single number
    #[arg(long = "dim", alias = "dims", value_name = "LO..HI")]
    dims: Option<DimRange>,
    /// Lower edge of a fixed generation band (requires --M)
    #[arg(long)]
    m: Option<f64>,
    /// Upper edge of a fixed generation band (requires --m)
    #[arg(long = "M")]
    upper: Option<f64>,
    /// tight: bracket at the assigned spectral extremes (default); band: at the generation band
    #[arg(long)]
    bracket: Option<BracketMode>,
    /// Exponents for power/squared (r values when running ando alone)
    #[arg(long = "p", value_delimiter = ',', allow_hyphen_values = true)]
    p_values: Vec<f64>,
    /// Scalar functions, e.g. inv, pow(-2), exp-neg, affine(0.5,1)
    #[arg(long = "f")]
    functions: Vec<String>,
    /// Map families to rotate through, e.g. trace, kraus(3), unitary_mixture(4)
    #[arg(long = "map-style")]
    map_styles: Vec<MapStyle>,
    /// Campaign seed; all instance seeds derive from it
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// Write the full JSON report here
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Re-run the failing cases recorded in a previous report
    #[arg(
        long,
        value_name = "FILE",
        conflicts_with_all = [
            "config", "theorem", "trials", "dims", "m", "upper", "bracket",
            "p_values", "functions", "map_styles", "seed", "rtol", "atol", "out",
        ]
    )]
    replay: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Lower edge of the bracket
    #[arg(long)]
    m: f64,
    /// Upper edge of the bracket
    #[arg(long = "M")]
    upper: f64,
    /// Exponents p (excluding 0 and 1) for the power constant
    #[arg(long = "p", value_delimiter = ',', allow_hyphen_values = true)]
    ps: Vec<f64>,
    /// Function ids for the chord-ratio constant mu
    #[arg(long = "f")]
    fs: Vec<String>,
    /// Print JSON instead of the table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct EqualityArgs {
    /// Print JSON instead of the table
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TightnessArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Inclusive dimension range, e.g. 2..8
    #[arg(long = "dim", alias = "dims", value_name = "LO..HI")]
    dims: Option<DimRange>,
    /// Lower edge of a fixed generation band (requires --M)
    #[arg(long)]
    m: Option<f64>,
    /// Upper edge of a fixed generation band (requires --m)
    #[arg(long = "M")]
    upper: Option<f64>,
    /// tight (default) or band
    #[arg(long)]
    bracket: Option<BracketMode>,
    #[arg(long, value_enum, default_value_t = OutFormat::Csv)]
    format: OutFormat,
    /// Write here instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Constants(args) => cmd_constants(args),
        Cmd::EqualityCases(args) => cmd_equality_cases(args),
        Cmd::Tightness(args) => cmd_tightness(args),
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    if let Some(path) = &args.replay {
        return cmd_replay(path);
    }
    let overrides = Overrides {
        theorem: args.theorem,
        trials: args.trials,
        dims: args.dims,
        lower: args.m,
        upper: args.upper,
        bracket: args.bracket,
        p_values: non_empty(args.p_values),
        functions: non_empty(args.functions),
        map_styles: non_empty(args.map_styles),
        seed: args.seed,
        rtol: args.rtol,
        atol: args.atol,
    };
    let cfg = CampaignConfig::resolve(args.config.as_deref(), overrides)?;
    let report = run_campaign(&cfg)?;
    print!("{}", render_summary(&report));
    if let Some(out) = &args.out {
        std::fs::write(out, report.to_json()?)?;
    }
    Ok(exit_for_failures(report.summary.total_failures()))
}

fn cmd_replay(path: &std::path::Path) -> Result<ExitCode> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let report: Report = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("bad report {}: {e}", path.display())))?;
    let reruns = replay_failures(&report)?;
    if reruns.is_empty() {
        println!("no failing cases recorded; nothing to replay");
        return Ok(ExitCode::SUCCESS);
    }
    let mut reproduced = 0usize;
    for (case, rerun) in &reruns {
        let status = if rerun.all_hold {
            "now holds"
        } else {
            reproduced += 1;
            "FAILS (reproduced)"
        };
        println!(
            "replay {} seed={} dim={} min_gap={:.4e}: {status}",
            case.theorem,
            case.instance.seed,
            case.instance.dim,
            rerun.min_gap()
        );
    }
    println!("reproduced {reproduced} of {} failing cases", reruns.len());
    Ok(exit_for_failures(reproduced))
}

fn cmd_constants(args: ConstantsArgs) -> Result<ExitCode> {
    let report = compute_constants(args.m, args.upper, &args.ps, &args.fs)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", render_constants(&report));
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_equality_cases(args: EqualityArgs) -> Result<ExitCode> {
    let cases = run_equality_cases()?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&cases)?);
    } else {
        print!("{}", render_equality_cases(&cases));
    }
    let regressions = cases.iter().filter(|c| !c.ok).count();
    Ok(exit_for_failures(regressions))
}

fn cmd_tightness(args: TightnessArgs) -> Result<ExitCode> {
    let overrides = Overrides {
        theorem: Some(Selector::One(Theorem::Refined)),
        trials: Some(args.trials.unwrap_or(200)),
        dims: args.dims,
        lower: args.m,
        upper: args.upper,
        bracket: args.bracket,
        seed: args.seed,
        ..Overrides::default()
    };
    let cfg = CampaignConfig::resolve(None, overrides)?;
    let rows = run_tightness(&cfg)?;
    let text = match args.format {
        OutFormat::Csv => tightness_csv(&rows),
        OutFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows)?;
            s.push('\n');
            s
        }
    };
    match &args.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn non_empty<T>(v: Vec<T>) -> Option<Vec<T>> {
    if v.is_empty() {
        None
    } else {
        Some(v)
    }
}

fn exit_for_failures(failures: usize) -> ExitCode {
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
