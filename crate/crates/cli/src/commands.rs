//! The batch commands. Each returns a [`Table`] for CSV output and a plain
//! text report.

use std::fmt::Write as _;

use combidyn_core::bounds::{
    concavity_from_table, monotone_from_table, submodular_from_table, Rho, CONCAVITY_LIMIT, SUBMODULAR_LIMIT,
};
use combidyn_core::combisolve::{solve_greedy, MAX_ENUMERATION};
use combidyn_core::derivative::{DerivativeKind, Linearization};
use combidyn_core::refrigeration::{
    run_receding_horizon, run_receding_horizon_observed, Case, DerivativeChoice, LinearizationPolicy,
    RecedingHorizonOptions, Scenario, SolverChoice, StepContext, StepObserver, StepResult,
};
use combidyn_core::sysmodel::payoff_binary;
use combidyn_core::{BinaryVector, Error, Scheme, System, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CliError, Result};
use crate::format::{bits, fmt_g, Table};
use crate::parallel;

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub derivative: DerivativeChoice,
    /// `None` picks [`default_solver`].
    pub solver: Option<SolverChoice>,
    /// Time points per control step.
    pub grid: usize,
    pub scheme: Scheme,
    pub seed: u64,
    pub policy: LinearizationPolicy,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            derivative: DerivativeChoice::Standard,
            solver: None,
            grid: 31,
            scheme: Scheme::Euler,
            seed: 0,
            policy: LinearizationPolicy::AllZeros,
        }
    }
}

impl Settings {
    pub fn options(&self, scenario: &Scenario) -> RecedingHorizonOptions {
        RecedingHorizonOptions {
            derivative: self.derivative,
            policy: self.policy.clone(),
            solver: self.solver.unwrap_or_else(|| default_solver(scenario)),
            grid_per_step: self.grid,
            scheme: self.scheme,
        }
    }

    fn kinds(&self) -> Vec<DerivativeKind> {
        match self.derivative {
            DerivativeChoice::Standard => vec![DerivativeKind::Standard],
            DerivativeChoice::Nonstandard => vec![DerivativeKind::Nonstandard],
            DerivativeChoice::Both => vec![DerivativeKind::Standard, DerivativeKind::Nonstandard],
        }
    }
}

/// l0 for target bands with equal draws, knapsack for unequal draws, tu for
/// explicit rows.
pub fn default_solver(scenario: &Scenario) -> SolverChoice {
    match scenario.case {
        Case::TargetBand { .. } if scenario.params.uniform_power().is_some() => SolverChoice::L0,
        Case::TargetBand { .. } => SolverChoice::Knapsack,
        Case::Tu { .. } => SolverChoice::Tu,
    }
}

/// Linearization points for the sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Points {
    /// Every binary vector, `m ≤ 24`.
    All,
    /// Uniform samples from the seeded stream.
    Sample(usize),
    List(Vec<BinaryVector>),
}

impl Points {
    pub fn resolve(&self, m: usize, seed: u64) -> Result<Vec<BinaryVector>> {
        match self {
            Points::All => {
                if m > MAX_ENUMERATION {
                    return Err(Error::EnumerationRefused { m, limit: MAX_ENUMERATION }.into());
                }
                Ok((0..1u64 << m).map(|mask| BinaryVector::from_mask(mask, m)).collect())
            }
            Points::Sample(n) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..*n)
                    .map(|_| BinaryVector::from_bools((0..m).map(|_| rng.random_bool(0.5)).collect()))
                    .collect())
            }
            Points::List(list) => {
                if let Some(a) = list.iter().find(|a| a.len() != m) {
                    return Err(CliError::Usage(format!(
                        "linearization point {} has {} entries, fleet has {m}",
                        bits(a),
                        a.len()
                    )));
                }
                Ok(list.clone())
            }
        }
    }
}

pub struct Output {
    pub table: Table,
    pub report: String,
}

fn rho_cell(rho: Rho) -> String {
    rho.value().map(fmt_g).unwrap_or_default()
}

fn step_grid(scenario: &Scenario, settings: &Settings) -> Result<TimeGrid> {
    Ok(TimeGrid::new(scenario.horizon(), settings.grid)?)
}

// optimize / certify

pub fn optimize(scenario: &Scenario, settings: &Settings) -> Result<Vec<StepResult>> {
    let options = settings.options(scenario);
    let results = parallel::install(|| {
        run_receding_horizon_observed(scenario, &options, &mut parallel::ParallelOracle)
    })?;
    Ok(results)
}

/// One row per step and unit.
pub fn optimize_output(scenario: &Scenario, results: &[StepResult]) -> Output {
    let mut table = Table::new(vec!["step", "unit", "alpha", "temperature_end", "power_kw", "payoff", "rho_post"]);
    let mut report = String::new();
    let _ = writeln!(report, "{} units, {} steps", scenario.params.m, results.len());
    let _ = writeln!(report, "{:>4}  {:>12}  {:>10}  {:>8}  {:<11}  on", "step", "payoff", "power_kw", "rho_post", "derivative");
    for r in results {
        for (i, &t) in r.temperatures_end.iter().enumerate() {
            table.push(vec![
                r.step.to_string(),
                (i + 1).to_string(),
                u8::from(r.alpha.get(i)).to_string(),
                fmt_g(t),
                fmt_g(r.power_kw),
                fmt_g(r.payoff),
                fmt_g(r.rho_post),
            ]);
        }
        let on: Vec<String> = r.alpha.ones_indices().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(
            report,
            "{:>4}  {:>12}  {:>10}  {:>8}  {:<11}  {}",
            r.step,
            fmt_g(r.payoff),
            fmt_g(r.power_kw),
            fmt_g(r.rho_post),
            r.kind.to_string(),
            on.join(",")
        );
    }
    let total: f64 = results.iter().map(|r| r.payoff).sum();
    let worst = results.iter().map(|r| r.rho_post).fold(f64::INFINITY, f64::min);
    let _ = writeln!(report, "total payoff {}, smallest rho_post {}", fmt_g(total), fmt_g(worst));
    Output { table, report }
}

/// One row per step with the full certificate.
pub fn certify_output(results: &[StepResult]) -> Output {
    let mut table = Table::new(vec![
        "step",
        "derivative",
        "alpha_bar",
        "alpha_star",
        "alpha_post",
        "base_payoff",
        "payoff",
        "payoff_post",
        "rho",
        "rho_post",
        "optimal",
    ]);
    let mut report = String::new();
    for r in results {
        let c = &r.certificate;
        table.push(vec![
            r.step.to_string(),
            c.kind.to_string(),
            bits(&c.alpha_bar),
            bits(&c.alpha_star),
            bits(&c.alpha_post),
            fmt_g(c.base_payoff),
            fmt_g(c.payoff),
            fmt_g(c.payoff_post),
            rho_cell(c.rho),
            fmt_g(c.rho_post),
            u8::from(c.rho == Rho::Optimal).to_string(),
        ]);
        let verdict = match c.rho {
            Rho::Optimal => "no feasible ascent direction: optimal for the linearized problem".to_string(),
            Rho::Value(v) => format!("rho = {}, certified {}-optimal", fmt_g(v), fmt_g(c.rho_post)),
        };
        let _ = writeln!(
            report,
            "step {:>3} [{}]: J(base) = {}, J(solution) = {}, kept {}; {verdict}",
            r.step,
            c.kind,
            fmt_g(c.base_payoff),
            fmt_g(c.payoff),
            fmt_g(c.payoff_post),
        );
    }
    Output { table, report }
}

// oracle

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub step: usize,
    pub alpha: BinaryVector,
    pub alpha_opt: BinaryVector,
    /// `J(ᾱ)`
    pub base_payoff: f64,
    /// `J(α_*)`
    pub payoff: f64,
    /// `J(0)`
    pub zero_payoff: f64,
    /// `J(α^OPT)`
    pub optimum: f64,
    pub greedy_payoff: f64,
    pub rho_post: f64,
    /// Every row of the step's constraint holds at `α_*`.
    pub feasible: bool,
}

impl OracleStep {
    fn normalized(&self, value: f64) -> f64 {
        let den = self.optimum - self.zero_payoff;
        if den.abs() <= 1e-12 * (1.0 + self.optimum.abs()) {
            1.0
        } else {
            (value - self.zero_payoff) / den
        }
    }

    /// `(J(α_*) − J(0)) / (J(α^OPT) − J(0))`
    pub fn ratio(&self) -> f64 {
        self.normalized(self.payoff)
    }

    pub fn greedy_ratio(&self) -> f64 {
        self.normalized(self.greedy_payoff)
    }

    /// `ρ_*·(J(α^OPT) − J(ᾱ)) − (J(α_*) − J(ᾱ))`; the certificate holds when
    /// this is not positive.
    pub fn bound_excess(&self) -> f64 {
        self.rho_post * (self.optimum - self.base_payoff) - (self.payoff - self.base_payoff)
    }

    pub fn bound_holds(&self) -> bool {
        self.bound_excess() <= 1e-9 * (1.0 + self.optimum.abs())
    }
}

struct OracleObserver {
    steps: Vec<OracleStep>,
}

impl StepObserver for OracleObserver {
    fn exhaustive(&mut self, ctx: &StepContext<'_>) -> combidyn_core::Result<(BinaryVector, f64)> {
        parallel::ParallelOracle.exhaustive(ctx)
    }

    fn observe(&mut self, ctx: &StepContext<'_>, result: &StepResult) -> combidyn_core::Result<()> {
        let m = ctx.system.decision_dim();
        let objective = |a: &BinaryVector| ctx.payoff(a);
        let (alpha_opt, optimum) = parallel::bruteforce(&objective, ctx.constraints, m)?;
        let mut sequential = |a: &BinaryVector| ctx.payoff(a);
        let greedy = solve_greedy(&mut sequential, ctx.constraints, m)?;
        let greedy_payoff = ctx.payoff(&greedy)?;
        self.steps.push(OracleStep {
            step: result.step,
            alpha: result.alpha.clone(),
            alpha_opt,
            base_payoff: result.certificate.base_payoff,
            payoff: result.payoff,
            zero_payoff: ctx.payoff(&BinaryVector::zeros(m))?,
            optimum,
            greedy_payoff,
            rho_post: result.rho_post,
            feasible: ctx.constraints.is_feasible(&result.alpha),
        });
        Ok(())
    }
}

/// Receding-horizon run with the per-step exhaustive optimum and a greedy
/// baseline evaluated from the same state.
pub fn oracle(scenario: &Scenario, settings: &Settings) -> Result<Vec<OracleStep>> {
    let m = scenario.params.m;
    if m > MAX_ENUMERATION {
        return Err(Error::EnumerationRefused { m, limit: MAX_ENUMERATION }.into());
    }
    let options = settings.options(scenario);
    let mut observer = OracleObserver { steps: Vec::new() };
    run_receding_horizon_observed(scenario, &options, &mut observer)?;
    Ok(observer.steps)
}

pub fn oracle_output(steps: &[OracleStep]) -> Output {
    let mut table = Table::new(vec![
        "step",
        "payoff",
        "zero_payoff",
        "oracle_payoff",
        "greedy_payoff",
        "ratio",
        "greedy_ratio",
        "rho_post",
        "bound_holds",
    ]);
    for s in steps {
        table.push(vec![
            s.step.to_string(),
            fmt_g(s.payoff),
            fmt_g(s.zero_payoff),
            fmt_g(s.optimum),
            fmt_g(s.greedy_payoff),
            fmt_g(s.ratio()),
            fmt_g(s.greedy_ratio()),
            fmt_g(s.rho_post),
            u8::from(s.bound_holds()).to_string(),
        ]);
    }
    let summary = OracleSummary::new(steps);
    let mut report = String::new();
    let _ = writeln!(report, "steps: {}", steps.len());
    let _ = writeln!(report, "smallest ratio: {}", fmt_g(summary.min_ratio));
    let _ = writeln!(report, "smallest rho_post: {}", fmt_g(summary.min_rho));
    let _ = writeln!(report, "steps with ratio >= 0.95: {}", summary.above_95);
    let _ = writeln!(report, "steps at least as good as greedy: {}", summary.beats_greedy);
    let _ = writeln!(report, "steps where greedy reaches only 70-85% of the optimum: {}", summary.greedy_70_85);
    let _ = writeln!(report, "certified bound holds on {} of {} steps", summary.bound_holds, steps.len());
    Output { table, report }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSummary {
    pub min_ratio: f64,
    pub min_rho: f64,
    pub above_95: usize,
    pub beats_greedy: usize,
    pub greedy_70_85: usize,
    pub bound_holds: usize,
}

impl OracleSummary {
    pub fn new(steps: &[OracleStep]) -> Self {
        Self {
            min_ratio: steps.iter().map(OracleStep::ratio).fold(f64::INFINITY, f64::min),
            min_rho: steps.iter().map(|s| s.rho_post).fold(f64::INFINITY, f64::min),
            above_95: steps.iter().filter(|s| s.ratio() >= 0.95).count(),
            beats_greedy: steps.iter().filter(|s| s.payoff >= s.greedy_payoff).count(),
            greedy_70_85: steps
                .iter()
                .filter(|s| (0.70..=0.85).contains(&s.greedy_ratio()))
                .count(),
            bound_holds: steps.iter().filter(|s| s.bound_holds()).count(),
        }
    }
}

// sweeps over linearization points

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha_bar: BinaryVector,
    pub payoff: f64,
    /// `J(α_*) − J(0)`
    pub gain: f64,
    /// `gain / (J(α^OPT) − J(0))` when the optimum is known.
    pub ratio: Option<f64>,
    pub rho_post: f64,
}

/// First-step decision for each linearization point.
pub fn sweep_linearization(
    scenario: &Scenario,
    settings: &Settings,
    points: &Points,
    with_oracle: bool,
) -> Result<Vec<SweepPoint>> {
    let first = scenario.clone().truncated(1);
    let m = first.params.m;
    let alphas = points.resolve(m, settings.seed)?;
    let options = settings.options(&first);
    let grid = step_grid(&first, settings)?;
    let system = first.step_system(&first.params.x0)?;
    let zero = payoff_binary(&system, &BinaryVector::zeros(m), &grid, settings.scheme)?;
    let optimum = if with_oracle {
        let constraints = first.step_constraints(1, options.solver)?;
        let objective = |a: &BinaryVector| payoff_binary(&system, a, &grid, settings.scheme);
        Some(parallel::bruteforce(&objective, &constraints, m)?.1)
    } else {
        None
    };
    let run = |alpha_bar: &BinaryVector| -> Result<SweepPoint> {
        let mut opts = options.clone();
        opts.policy = LinearizationPolicy::Initial(alpha_bar.clone());
        let r = run_receding_horizon(&first, &opts)?.remove(0);
        let gain = r.payoff - zero;
        Ok(SweepPoint {
            alpha_bar: alpha_bar.clone(),
            payoff: r.payoff,
            gain,
            ratio: optimum.map(|o| if (o - zero).abs() > 1e-12 { gain / (o - zero) } else { 1.0 }),
            rho_post: r.rho_post,
        })
    };
    parallel::install(|| alphas.par_iter().map(run).collect())
}

pub fn sweep_output(points: &[SweepPoint]) -> Output {
    let mut table = Table::new(vec!["index", "alpha_bar", "payoff", "gain", "ratio", "rho_post"]);
    for (i, p) in points.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            bits(&p.alpha_bar),
            fmt_g(p.payoff),
            fmt_g(p.gain),
            p.ratio.map(fmt_g).unwrap_or_default(),
            fmt_g(p.rho_post),
        ]);
    }
    let mut report = String::new();
    if !points.is_empty() {
        let n = points.len() as f64;
        let mean = points.iter().map(|p| p.gain).sum::<f64>() / n;
        let spread = points.iter().map(|p| (p.gain - mean).abs()).fold(0.0, f64::max);
        let _ = writeln!(report, "linearization points: {}", points.len());
        let _ = writeln!(report, "mean gain over all-off: {}", fmt_g(mean));
        if mean != 0.0 {
            let _ = writeln!(report, "largest deviation from the mean: {}%", fmt_g(100.0 * spread / mean.abs()));
        }
        let ratios: Vec<f64> = points.iter().filter_map(|p| p.ratio).collect();
        if !ratios.is_empty() {
            let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
            let _ = writeln!(report, "smallest optimality ratio: {}", fmt_g(lo));
        }
    }
    Output { table, report }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonPoint {
    pub alpha_bar: BinaryVector,
    /// `‖D^S J − D^NS J‖∞`
    pub max_difference: f64,
    /// `J(α_*) − J(0)` with the standard derivative.
    pub gain_standard: f64,
    /// `J(α̂_*) − J(0)` with the nonstandard derivative.
    pub gain_nonstandard: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonSummary {
    pub mean_standard: f64,
    pub mean_nonstandard: f64,
    pub max_difference: f64,
}

impl ComparisonSummary {
    pub fn new(points: &[ComparisonPoint]) -> Self {
        let n = points.len().max(1) as f64;
        Self {
            mean_standard: points.iter().map(|p| p.gain_standard).sum::<f64>() / n,
            mean_nonstandard: points.iter().map(|p| p.gain_nonstandard).sum::<f64>() / n,
            max_difference: points.iter().map(|p| p.max_difference).fold(0.0, f64::max),
        }
    }
}

/// First-step decisions with both derivatives at each linearization point.
pub fn compare_derivatives(scenario: &Scenario, settings: &Settings, points: &Points) -> Result<Vec<ComparisonPoint>> {
    let first = scenario.clone().truncated(1);
    let m = first.params.m;
    let alphas = points.resolve(m, settings.seed)?;
    let options = settings.options(&first);
    let grid = step_grid(&first, settings)?;
    let system = first.step_system(&first.params.x0)?;
    let zero = payoff_binary(&system, &BinaryVector::zeros(m), &grid, settings.scheme)?;
    let run = |alpha_bar: &BinaryVector| -> Result<ComparisonPoint> {
        let lin = Linearization::new(&system, alpha_bar, &grid, settings.scheme)?;
        let s = lin.standard(&system)?;
        let ns = lin.nonstandard(&system)?;
        let max_difference = s
            .entries
            .iter()
            .zip(&ns.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let gain = |kind: DerivativeChoice| -> Result<f64> {
            let mut opts = options.clone();
            opts.derivative = kind;
            opts.policy = LinearizationPolicy::Initial(alpha_bar.clone());
            Ok(run_receding_horizon(&first, &opts)?[0].payoff - zero)
        };
        Ok(ComparisonPoint {
            alpha_bar: alpha_bar.clone(),
            max_difference,
            gain_standard: gain(DerivativeChoice::Standard)?,
            gain_nonstandard: gain(DerivativeChoice::Nonstandard)?,
        })
    };
    parallel::install(|| alphas.par_iter().map(run).collect())
}

pub fn comparison_output(points: &[ComparisonPoint]) -> Output {
    let mut table = Table::new(vec![
        "index",
        "alpha_bar",
        "max_gradient_difference",
        "gain_standard",
        "gain_nonstandard",
    ]);
    for (i, p) in points.iter().enumerate() {
        table.push(vec![
            i.to_string(),
            bits(&p.alpha_bar),
            fmt_g(p.max_difference),
            fmt_g(p.gain_standard),
            fmt_g(p.gain_nonstandard),
        ]);
    }
    let s = ComparisonSummary::new(points);
    let mut report = String::new();
    let _ = writeln!(report, "linearization points: {}", points.len());
    let _ = writeln!(report, "mean gain over all-off, standard: {}", fmt_g(s.mean_standard));
    let _ = writeln!(report, "mean gain over all-off, nonstandard: {}", fmt_g(s.mean_nonstandard));
    let _ = writeln!(report, "largest gradient difference: {}", fmt_g(s.max_difference));
    Output { table, report }
}

// exhaustive checks on the first step

fn first_step_table(scenario: &Scenario, settings: &Settings, limit: usize) -> Result<Vec<f64>> {
    let grid = step_grid(scenario, settings)?;
    let system = scenario.step_system(&scenario.params.x0)?;
    let objective = |a: &BinaryVector| payoff_binary(&system, a, &grid, settings.scheme);
    Ok(parallel::table(&objective, scenario.params.m, limit)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityCheck {
    pub kind: DerivativeKind,
    pub holds: bool,
    pub worst: Option<(BinaryVector, f64)>,
}

/// `DJ(ᾱ)ᵀ(α − ᾱ) ≥ J(α) − J(ᾱ)` at every binary `α` of the first step.
pub fn check_concavity(scenario: &Scenario, settings: &Settings, alpha_bar: &BinaryVector) -> Result<Vec<ConcavityCheck>> {
    let m = scenario.params.m;
    if alpha_bar.len() != m {
        return Err(CliError::Usage(format!("linearization point has {} entries, fleet has {m}", alpha_bar.len())));
    }
    let table = first_step_table(scenario, settings, CONCAVITY_LIMIT)?;
    let grid = step_grid(scenario, settings)?;
    let system = scenario.step_system(&scenario.params.x0)?;
    let lin = Linearization::new(&system, alpha_bar, &grid, settings.scheme)?;
    settings
        .kinds()
        .into_iter()
        .map(|kind| {
            let grad = lin.derivative(&system, kind)?;
            let report = concavity_from_table(&grad, &table)?;
            Ok(ConcavityCheck {
                kind,
                holds: report.holds,
                worst: report.worst,
            })
        })
        .collect()
}

pub fn concavity_output(checks: &[ConcavityCheck]) -> Output {
    let mut table = Table::new(vec!["derivative", "holds", "worst_alpha", "worst_excess"]);
    let mut report = String::new();
    for c in checks {
        let (alpha, excess) = match &c.worst {
            Some((a, e)) => (bits(a), fmt_g(*e)),
            None => (String::new(), String::new()),
        };
        let verdict = if c.holds { "PASS" } else { "FAIL" };
        let _ = writeln!(report, "{verdict} concavity inequality [{}]: worst at {alpha} by {excess}", c.kind);
        table.push(vec![c.kind.to_string(), u8::from(c.holds).to_string(), alpha, excess]);
    }
    Output { table, report }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularCheck {
    pub submodular: bool,
    /// `(X, i, j, J(X+i+j) − J(X+i) − J(X+j) + J(X))`, `i, j` 0-based.
    pub worst: Option<(BinaryVector, usize, usize, f64)>,
    pub monotone: bool,
}

pub fn check_submodular(scenario: &Scenario, settings: &Settings) -> Result<SubmodularCheck> {
    let m = scenario.params.m;
    let table = first_step_table(scenario, settings, SUBMODULAR_LIMIT)?;
    let report = submodular_from_table(&table, m)?;
    Ok(SubmodularCheck {
        submodular: report.holds,
        worst: report.worst,
        monotone: monotone_from_table(&table, m)?,
    })
}

pub fn submodular_output(c: &SubmodularCheck) -> Output {
    let mut table = Table::new(vec!["property", "holds", "worst_set", "worst_i", "worst_j", "worst_value"]);
    let worst = match &c.worst {
        Some((x, i, j, d)) => vec![bits(x), (i + 1).to_string(), (j + 1).to_string(), fmt_g(*d)],
        None => vec![String::new(); 4],
    };
    let mut row = vec!["submodular".to_string(), u8::from(c.submodular).to_string()];
    row.extend(worst.iter().cloned());
    table.push(row);
    table.push(vec![
        "monotone".to_string(),
        u8::from(c.monotone).to_string(),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    let verdict = |b: bool| if b { "PASS" } else { "FAIL" };
    let mut report = format!("{} submodular", verdict(c.submodular));
    if let Some((x, i, j, d)) = &c.worst {
        let _ = write!(report, ": largest second difference {} at set {} with units {} and {}", fmt_g(*d), bits(x), i + 1, j + 1);
    }
    let _ = writeln!(report);
    let _ = writeln!(report, "{} monotone", verdict(c.monotone));
    Output { table, report }
}
