//! Batch front end for `combidyn-core`: scenario files, receding-horizon
//! runs, exhaustive oracles and structural checks, written as CSV or as a
//! plain text report.

pub mod commands;
pub mod error;
pub mod format;
pub mod parallel;
pub mod scenario;

use std::io::Write;
use std::path::PathBuf;

use combidyn_core::matrix::DenseMatrix;
use combidyn_core::refrigeration::{
    default_case1, default_case2, default_transient, Case, EtpParams, Scenario, AMBIENT, BAND, POWER_KW,
    STEP_MINUTES,
};
use combidyn_core::BinaryVector;

use crate::commands::{Output, Points, Settings};
pub use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Optimize,
    Certify,
    SweepLinearization { points: Points, oracle: bool },
    CompareDerivatives { points: Points },
    /// All-zeros when no point is given.
    CheckConcavity { alpha_bar: Option<BinaryVector> },
    CheckSubmodular,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Report,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub scenario_path: PathBuf,
    pub settings: Settings,
    /// Standard output when absent.
    pub output_path: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scenario_path.as_os_str().is_empty() {
            return Err(CliError::Usage("scenario path is empty".into()));
        }
        if self.output_path.as_ref().is_some_and(|p| p.as_os_str().is_empty()) {
            return Err(CliError::Usage("output path is empty".into()));
        }
        if self.settings.grid < 2 {
            return Err(CliError::Usage(format!("grid needs at least 2 points, got {}", self.settings.grid)));
        }
        Ok(())
    }
}

/// Runs the command and returns what it would write.
pub fn render(config: &RunConfig) -> Result<String> {
    config.validate()?;
    let scenario = scenario::read_scenario(&config.scenario_path)?;
    let s = &config.settings;
    let output: Output = match &config.command {
        Command::Optimize => commands::optimize_output(&scenario, &commands::optimize(&scenario, s)?),
        Command::Certify => commands::certify_output(&commands::optimize(&scenario, s)?),
        Command::SweepLinearization { points, oracle } => {
            commands::sweep_output(&commands::sweep_linearization(&scenario, s, points, *oracle)?)
        }
        Command::CompareDerivatives { points } => {
            commands::comparison_output(&commands::compare_derivatives(&scenario, s, points)?)
        }
        Command::CheckConcavity { alpha_bar } => {
            let a = alpha_bar.clone().unwrap_or_else(|| BinaryVector::zeros(scenario.params.m));
            commands::concavity_output(&commands::check_concavity(&scenario, s, &a)?)
        }
        Command::CheckSubmodular => commands::submodular_output(&commands::check_submodular(&scenario, s)?),
        Command::Oracle => commands::oracle_output(&commands::oracle(&scenario, s)?),
    };
    Ok(match config.format {
        Format::Csv => output.table.to_csv(),
        Format::Report => output.report,
    })
}

pub fn run(config: &RunConfig) -> Result<()> {
    let text = render(config)?;
    write_output(config.output_path.as_ref(), &text)
}

pub fn write_output(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

/// Shipped scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Power target band.
    Case1,
    /// Customer rows plus a budget.
    Case2,
    /// Case 1 with gradual shutdown on part of the fleet.
    Transient,
    /// One unit, one step.
    Minimal,
}

impl std::str::FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "case1" => Ok(Family::Case1),
            "case2" => Ok(Family::Case2),
            "transient" => Ok(Family::Transient),
            "minimal" => Ok(Family::Minimal),
            other => Err(CliError::Usage(format!(
                "unknown family `{other}`, expected case1, case2, transient or minimal"
            ))),
        }
    }
}

pub fn generate(family: Family, m: usize, seed: u64) -> Result<Scenario> {
    Ok(match family {
        Family::Case1 => default_case1(m, seed)?,
        Family::Case2 => default_case2(m, seed)?,
        Family::Transient => default_transient(m, seed)?,
        Family::Minimal => minimal_scenario(),
    })
}

pub fn minimal_scenario() -> Scenario {
    Scenario {
        params: EtpParams {
            m: 1,
            a: DenseMatrix::from_row_major(1, 1, vec![1.0]).expect("1x1"),
            b: vec![33.5],
            theta_ambient: vec![AMBIENT],
            theta_lo: vec![BAND.0],
            theta_hi: vec![BAND.1],
            delta: vec![1.0],
            c: vec![POWER_KW],
            x0: vec![2.0],
        },
        step_minutes: STEP_MINUTES,
        num_steps: 1,
        case: Case::TargetBand {
            y_lo: vec![0.0],
            y_hi: vec![POWER_KW],
        },
        transient: None,
    }
}
