use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use combidyn::commands::{Points, Settings};
use combidyn::format::parse_bits;
use combidyn::{scenario, CliError, Command, Family, Format, RunConfig};
use combidyn_core::refrigeration::{DerivativeChoice, LinearizationPolicy, SolverChoice};
use combidyn_core::Scheme;

#[derive(Parser)]
#[command(name = "combidyn", version, about = "Approximate scheduling of binary-switched fleets with certified bounds")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Receding-horizon schedule, one CSV row per step and unit.
    Optimize(Common),
    /// Receding-horizon schedule with the certificate of every step.
    Certify(Common),
    /// First-step payoff across linearization points.
    SweepLinearization {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: PointArgs,
        /// Also compute the exhaustive optimum and report ratios.
        #[arg(long)]
        oracle: bool,
    },
    /// First-step decisions with the standard and the nonstandard derivative.
    CompareDerivatives {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        points: PointArgs,
    },
    /// Checks the concavity inequality of the first step at one point.
    CheckConcavity {
        #[command(flatten)]
        common: Common,
        /// Linearization point as a 0/1 string (all-zeros by default).
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Checks submodularity and monotonicity of the first-step payoff.
    CheckSubmodular(Common),
    /// Receding-horizon run against the per-step exhaustive optimum.
    Oracle(Common),
    /// Writes a shipped scenario.
    Generate {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 20)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value = "standard")]
    derivative: DerivativeChoice,
    /// Defaults to l0, knapsack or tu depending on the scenario.
    #[arg(long)]
    solver: Option<SolverChoice>,
    /// Time points per control step.
    #[arg(long, default_value_t = 31)]
    grid: usize,
    #[arg(long, default_value = "euler")]
    scheme: Scheme,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = PolicyArg::Zeros)]
    policy: PolicyArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Args)]
struct PointArgs {
    /// Number of sampled linearization points.
    #[arg(long, default_value_t = 100, conflicts_with_all = ["all", "points"])]
    samples: usize,
    /// Enumerate every linearization point.
    #[arg(long)]
    all: bool,
    /// Comma-separated 0/1 strings.
    #[arg(long, value_delimiter = ',')]
    points: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PolicyArg {
    Zeros,
    Warm,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Case1,
    Case2,
    Transient,
    Minimal,
}

fn bit_string(s: &str) -> Result<combidyn_core::BinaryVector, CliError> {
    parse_bits(s).ok_or_else(|| CliError::Usage(format!("`{s}` is not a 0/1 string")))
}

impl PointArgs {
    fn points(&self) -> Result<Points, CliError> {
        if self.all {
            Ok(Points::All)
        } else if !self.points.is_empty() {
            Ok(Points::List(self.points.iter().map(|s| bit_string(s)).collect::<Result<_, _>>()?))
        } else {
            Ok(Points::Sample(self.samples))
        }
    }
}

fn config(common: Common, command: Command) -> RunConfig {
    let policy = match common.policy {
        PolicyArg::Zeros => LinearizationPolicy::AllZeros,
        PolicyArg::Warm => LinearizationPolicy::WarmStart,
        PolicyArg::Random => LinearizationPolicy::Random(common.seed),
    };
    RunConfig {
        command,
        scenario_path: common.scenario,
        settings: Settings {
            derivative: common.derivative,
            solver: common.solver,
            grid: common.grid,
            scheme: common.scheme,
            seed: common.seed,
            policy,
        },
        output_path: common.out,
        format: match common.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Report => Format::Report,
        },
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = match cli.command {
        Sub::Optimize(c) => config(c, Command::Optimize),
        Sub::Certify(c) => config(c, Command::Certify),
        Sub::SweepLinearization { common, points, oracle } => {
            let points = points.points()?;
            config(common, Command::SweepLinearization { points, oracle })
        }
        Sub::CompareDerivatives { common, points } => {
            let points = points.points()?;
            config(common, Command::CompareDerivatives { points })
        }
        Sub::CheckConcavity { common, alpha } => {
            let alpha_bar = alpha.as_deref().map(bit_string).transpose()?;
            config(common, Command::CheckConcavity { alpha_bar })
        }
        Sub::CheckSubmodular(c) => config(c, Command::CheckSubmodular),
        Sub::Oracle(c) => config(c, Command::Oracle),
        Sub::Generate { family, m, seed, out } => {
            let family = match family {
                FamilyArg::Case1 => Family::Case1,
                FamilyArg::Case2 => Family::Case2,
                FamilyArg::Transient => Family::Transient,
                FamilyArg::Minimal => Family::Minimal,
            };
            let text = scenario::write_scenario(&combidyn::generate(family, m, seed)?);
            return combidyn::write_output(out.as_ref(), &text);
        }
    };
    combidyn::run(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.error_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
