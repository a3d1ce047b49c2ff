//! Coupled supermarket refrigeration benchmark.
//!
//! Room temperatures follow the equivalent thermal parameter (ETP) model
//!
//! ```text
//! ẋᵢ = −aᵢᵢ(xᵢ − θᵢ) − Σⱼ aᵢⱼ(xᵢ − xⱼ) − bᵢαᵢ
//! ```
//!
//! with an optional transient variant where an OFF unit keeps cooling with
//! `bᵢe^{−ξᵢ(1−αᵢ)t}`. Time is in hours and `t` is local to the control
//! step. An aggregator picks ON/OFF decisions every step to keep rooms near the
//! middle of their comfort band while meeting power or customer constraints.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::binary::BinaryVector;
use crate::bounds::{certify_with_payoff, CertifiedSolution, Rho};
use crate::combisolve::{solve_bruteforce, solve_linear, ConstraintSet};
use crate::derivative::{DerivativeKind, Gradient, Linearization};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::sysmodel::{evaluate_payoff, integrate, payoff_binary, AlphaJacobians, Scheme, System, TimeGrid};

pub const BLOCK: usize = 10;
pub const AMBIENT: f64 = 19.5;
pub const BAND: (f64, f64) = (0.0, 4.0);
pub const POWER_KW: f64 = 10.0;
pub const STEP_MINUTES: f64 = 15.0;
pub const NUM_STEPS: usize = 32;
pub const MIN_STEP_MINUTES: f64 = 10.0;
pub const TRANSIENT_XI: f64 = 100.0;

/// Nominal block: ring conductance, chord conductance (unit i to i+5),
/// self conductance to ambient and cooling rate, all per hour.
const RING: f64 = 0.3;
const CHORD: f64 = 0.15;
const SELF: f64 = 1.0;
const COOLING: f64 = 33.5;

/// 1-based positions within a block that keep the plain model in the
/// transient variant.
const STEADY_POSITIONS: [usize; 4] = [2, 4, 6, 8];

/// 1-based steps with the relaxed (peak) power budget.
pub const PEAK_STEPS: core::ops::RangeInclusive<usize> = 9..=16;

#[derive(Debug, Clone, PartialEq)]
pub struct EtpParams {
    pub m: usize,
    /// `aᵢⱼ ≥ 0`; the diagonal couples unit `i` to its ambient temperature.
    pub a: DenseMatrix<f64>,
    pub b: Vec<f64>,
    pub theta_ambient: Vec<f64>,
    pub theta_lo: Vec<f64>,
    pub theta_hi: Vec<f64>,
    pub delta: Vec<f64>,
    pub c: Vec<f64>,
    pub x0: Vec<f64>,
}

impl EtpParams {
    pub fn validate(&self) -> Result<()> {
        let m = self.m;
        if m == 0 {
            return Err(Error::InvalidParams("fleet needs at least one unit".into()));
        }
        if self.a.rows() != m || self.a.cols() != m {
            return Err(Error::Dimension {
                what: "heat transfer matrix",
                expected: m * m,
                found: self.a.rows() * self.a.cols(),
            });
        }
        for (what, v) in [
            ("cooling rates", &self.b),
            ("ambient temperatures", &self.theta_ambient),
            ("band lower ends", &self.theta_lo),
            ("band upper ends", &self.theta_hi),
            ("penalty weights", &self.delta),
            ("power draws", &self.c),
            ("initial temperatures", &self.x0),
        ] {
            if v.len() != m {
                return Err(Error::Dimension {
                    what,
                    expected: m,
                    found: v.len(),
                });
            }
            if !v.iter().all(|x| x.is_finite()) {
                return Err(Error::InvalidParams(format!("{what} must be finite")));
            }
        }
        if let Some(v) = self.a.as_slice().iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParams(format!("heat transfer coefficients must be >= 0, got {v}")));
        }
        if let Some(v) = self.b.iter().find(|v| **v <= 0.0) {
            return Err(Error::InvalidParams(format!("cooling rates must be > 0, got {v}")));
        }
        if let Some(i) = (0..m).find(|&i| self.theta_lo[i] >= self.theta_hi[i]) {
            return Err(Error::InvalidParams(format!(
                "unit {i}: theta_lo {} must be below theta_hi {}",
                self.theta_lo[i], self.theta_hi[i]
            )));
        }
        if let Some(v) = self.delta.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidParams(format!("penalty weights must be >= 0, got {v}")));
        }
        if let Some(v) = self.c.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidParams(format!("power draws must be >= 0, got {v}")));
        }
        Ok(())
    }

    /// `Σ cᵢαᵢ` in kW.
    pub fn power(&self, alpha: &BinaryVector) -> f64 {
        alpha.dot(&self.c)
    }

    /// The common power draw, if every unit draws the same.
    pub fn uniform_power(&self) -> Option<f64> {
        let c0 = self.c[0];
        (c0 > 0.0 && self.c.iter().all(|&c| c == c0)).then_some(c0)
    }

    /// Dense `A`: diagonal `−Σₖ aᵢₖ`, off-diagonal `aᵢⱼ`.
    pub fn a_matrix(&self) -> DenseMatrix<f64> {
        let m = self.m;
        let mut out = DenseMatrix::zeros(m, m);
        for i in 0..m {
            let row = self.a.row(i);
            out.set(i, i, -row.iter().sum::<f64>());
            for (j, &v) in row.iter().enumerate() {
                if j != i {
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

/// `δ[(θ̲ − x)² + (x − θ̄)² − (θ̲ + θ̄)²/2]`, zero at the band midpoint.
pub fn penalty(x: f64, theta_lo: f64, theta_hi: f64, delta: f64) -> f64 {
    let mid = theta_lo + theta_hi;
    delta * ((theta_lo - x) * (theta_lo - x) + (x - theta_hi) * (x - theta_hi) - mid * mid / 2.0)
}

/// ETP fleet over one control step, as a [`System`].
///
/// Running payoff is `−Σ Pᵢ(xᵢ)`, terminal payoff is zero.
#[derive(Debug, Clone)]
pub struct FleetSystem {
    m: usize,
    horizon: f64,
    x0: Vec<f64>,
    diag: Vec<f64>,
    /// Off-diagonal nonzeros of `A` per row.
    neighbors: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
    forcing: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    delta: Vec<f64>,
    /// `ξᵢ` for units with transient shutdown.
    xi: Vec<Option<f64>>,
}

/// Plain ETP system over `[0, horizon]` hours.
pub fn build_etp_system(params: &EtpParams, horizon: f64) -> Result<FleetSystem> {
    params.validate()?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParams(format!("horizon must be positive, got {horizon}")));
    }
    let m = params.m;
    let mut neighbors = vec![Vec::new(); m];
    let mut diag = vec![0.0; m];
    for i in 0..m {
        let row = params.a.row(i);
        diag[i] = -row.iter().sum::<f64>();
        for (j, &v) in row.iter().enumerate() {
            if j != i && v != 0.0 {
                neighbors[i].push((j, v));
            }
        }
    }
    Ok(FleetSystem {
        m,
        horizon,
        x0: params.x0.clone(),
        diag,
        neighbors,
        b: params.b.clone(),
        forcing: (0..m).map(|i| params.a.get(i, i) * params.theta_ambient[i]).collect(),
        lo: params.theta_lo.clone(),
        hi: params.theta_hi.clone(),
        delta: params.delta.clone(),
        xi: vec![None; m],
    })
}

/// ETP system whose `members` (0-based) shut down gradually when OFF.
pub fn build_transient_system(
    params: &EtpParams,
    xi: &[f64],
    members: &[usize],
    horizon: f64,
) -> Result<FleetSystem> {
    let mut sys = build_etp_system(params, horizon)?;
    if xi.len() != members.len() {
        return Err(Error::Dimension {
            what: "transient rates",
            expected: members.len(),
            found: xi.len(),
        });
    }
    for (&i, &rate) in members.iter().zip(xi) {
        if i >= params.m {
            return Err(Error::InvalidParams(format!(
                "transient member {i} out of range for {} units",
                params.m
            )));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(Error::InvalidParams(format!("transient rate must be > 0, got {rate}")));
        }
        sys.xi[i] = Some(rate);
    }
    Ok(sys)
}

impl FleetSystem {
    pub fn with_initial_state(mut self, x0: &[f64]) -> Result<Self> {
        if x0.len() != self.m {
            return Err(Error::Dimension {
                what: "initial temperatures",
                expected: self.m,
                found: x0.len(),
            });
        }
        self.x0.copy_from_slice(x0);
        Ok(self)
    }

    pub fn is_transient(&self, i: usize) -> bool {
        self.xi[i].is_some()
    }

    /// Cooling delivered by unit `i` at local time `t`.
    fn cooling(&self, i: usize, alpha: f64, t: f64) -> f64 {
        match self.xi[i] {
            None => self.b[i] * alpha,
            Some(xi) => self.b[i] * libm::exp(-xi * (1.0 - alpha) * t),
        }
    }
}

impl System for FleetSystem {
    fn state_dim(&self) -> usize {
        self.m
    }

    fn decision_dim(&self) -> usize {
        self.m
    }

    fn initial_state(&self) -> &[f64] {
        &self.x0
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }

    fn relaxable(&self) -> bool {
        true
    }

    fn vector_field(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        for i in 0..self.m {
            let coupling: f64 = self.neighbors[i].iter().map(|&(j, a)| a * x[j]).sum();
            out[i] = self.diag[i] * x[i] + coupling + self.forcing[i] - self.cooling(i, alpha[i], t);
        }
    }

    fn running_payoff(&self, x: &[f64], _alpha: &[f64], _t: f64) -> f64 {
        -(0..self.m)
            .map(|i| penalty(x[i], self.lo[i], self.hi[i], self.delta[i]))
            .sum::<f64>()
    }

    fn terminal_payoff(&self, _x: &[f64]) -> f64 {
        0.0
    }

    fn jac_f_x(&self, _x: &[f64], _alpha: &[f64], _t: f64, out: &mut [f64]) {
        let m = self.m;
        out.fill(0.0);
        for i in 0..m {
            out[i * m + i] = self.diag[i];
            for &(j, a) in &self.neighbors[i] {
                out[i * m + j] = a;
            }
        }
    }

    fn jac_r_x(&self, x: &[f64], _alpha: &[f64], _t: f64, out: &mut [f64]) {
        for i in 0..self.m {
            out[i] = -self.delta[i] * (4.0 * x[i] - 2.0 * (self.lo[i] + self.hi[i]));
        }
    }

    fn jac_q_x(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }

    fn alpha_jacobians(&self) -> Option<&dyn AlphaJacobians> {
        Some(self)
    }
}

impl AlphaJacobians for FleetSystem {
    fn jac_f_alpha(&self, _x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let m = self.m;
        out.fill(0.0);
        for i in 0..m {
            out[i * m + i] = match self.xi[i] {
                None => -self.b[i],
                Some(xi) => -self.b[i] * xi * t * libm::exp(-xi * (1.0 - alpha[i]) * t),
            };
        }
    }

    fn jac_r_alpha(&self, _x: &[f64], _alpha: &[f64], _t: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// Per-step constraint of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Case {
    /// `y_lo[k] ≤ Σ cᵢαᵢ ≤ y_hi[k]` (kW).
    TargetBand { y_lo: Vec<f64>, y_hi: Vec<f64> },
    /// `Qα ≤ r`; when `z_bar` is present its step entry replaces the last
    /// entry of `r`.
    Tu {
        q: DenseMatrix<i64>,
        r: Vec<i64>,
        z_bar: Option<Vec<i64>>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transient {
    /// One rate per member.
    pub xi: Vec<f64>,
    /// 0-based unit indices.
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub params: EtpParams,
    pub step_minutes: f64,
    pub num_steps: usize,
    pub case: Case,
    pub transient: Option<Transient>,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.step_minutes >= MIN_STEP_MINUTES) {
            return Err(Error::InvalidParams(format!(
                "step_minutes must be at least {MIN_STEP_MINUTES}, got {}",
                self.step_minutes
            )));
        }
        if self.num_steps == 0 {
            return Err(Error::InvalidParams("num_steps must be positive".into()));
        }
        let k = self.num_steps;
        let m = self.params.m;
        match &self.case {
            Case::TargetBand { y_lo, y_hi } => {
                for (what, v) in [("y_lo", y_lo), ("y_hi", y_hi)] {
                    if v.len() != k {
                        return Err(Error::Dimension {
                            what,
                            expected: k,
                            found: v.len(),
                        });
                    }
                    if let Some(x) = v.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                        return Err(Error::InvalidParams(format!("{what} entries must be >= 0, got {x}")));
                    }
                }
                if let Some(s) = (0..k).find(|&s| y_lo[s] > y_hi[s]) {
                    return Err(Error::InvalidParams(format!(
                        "step {}: y_lo {} exceeds y_hi {}",
                        s + 1,
                        y_lo[s],
                        y_hi[s]
                    )));
                }
            }
            Case::Tu { q, r, z_bar } => {
                if q.cols() != m {
                    return Err(Error::Dimension {
                        what: "TU matrix columns",
                        expected: m,
                        found: q.cols(),
                    });
                }
                if r.len() != q.rows() {
                    return Err(Error::Dimension {
                        what: "TU right-hand side",
                        expected: q.rows(),
                        found: r.len(),
                    });
                }
                if let Some(z) = z_bar {
                    if z.len() != k {
                        return Err(Error::Dimension {
                            what: "z_bar",
                            expected: k,
                            found: z.len(),
                        });
                    }
                    if q.rows() == 0 {
                        return Err(Error::InvalidParams("z_bar needs at least one TU row".into()));
                    }
                }
                ConstraintSet::Tu {
                    q: q.clone(),
                    r: r.clone(),
                }
                .validate(m)?;
            }
        }
        if let Some(tr) = &self.transient {
            build_transient_system(&self.params, &tr.xi, &tr.members, self.horizon())?;
        }
        Ok(())
    }

    /// The first `num_steps` steps of this scenario.
    pub fn truncated(mut self, num_steps: usize) -> Self {
        let k = num_steps.min(self.num_steps);
        self.num_steps = k;
        match &mut self.case {
            Case::TargetBand { y_lo, y_hi } => {
                y_lo.truncate(k);
                y_hi.truncate(k);
            }
            Case::Tu { z_bar, .. } => {
                if let Some(z) = z_bar {
                    z.truncate(k);
                }
            }
        }
        self
    }

    /// Length of one control step in hours.
    pub fn horizon(&self) -> f64 {
        self.step_minutes / 60.0
    }

    /// System for one step starting from `x0`.
    pub fn step_system(&self, x0: &[f64]) -> Result<FleetSystem> {
        let sys = match &self.transient {
            None => build_etp_system(&self.params, self.horizon())?,
            Some(tr) => build_transient_system(&self.params, &tr.xi, &tr.members, self.horizon())?,
        };
        sys.with_initial_state(x0)
    }

    /// Constraint for 1-based `step` in the representation `solver` needs.
    pub fn step_constraints(&self, step: usize, solver: SolverChoice) -> Result<ConstraintSet> {
        let s = step - 1;
        let m = self.params.m;
        match &self.case {
            Case::TargetBand { y_lo, y_hi } => {
                let (lo, hi) = (y_lo[s], y_hi[s]);
                if solver == SolverChoice::Knapsack {
                    if lo > 0.0 {
                        return Err(Error::Constraint(
                            "knapsack solver needs a zero lower power target".into(),
                        ));
                    }
                    return Ok(ConstraintSet::Knapsack {
                        weights: self.params.c.clone(),
                        capacity: hi,
                    });
                }
                let Some(c) = self.params.uniform_power() else {
                    if solver == SolverChoice::Oracle && lo <= 0.0 {
                        return Ok(ConstraintSet::Knapsack {
                            weights: self.params.c.clone(),
                            capacity: hi,
                        });
                    }
                    return Err(Error::Constraint(
                        "target band with unequal power draws needs the knapsack solver".into(),
                    ));
                };
                let k_min = libm::ceil(lo / c - 1e-9).max(0.0) as usize;
                let k_max = (libm::floor(hi / c + 1e-9) as usize).min(m);
                if k_min > k_max {
                    return Err(Error::Infeasible);
                }
                Ok(match solver {
                    SolverChoice::Tu => {
                        let q = DenseMatrix::from_rows(&[vec![1; m], vec![-1; m]])?;
                        ConstraintSet::Tu {
                            q,
                            r: vec![k_max as i64, -(k_min as i64)],
                        }
                    }
                    _ => ConstraintSet::L0Band { k_min, k_max },
                })
            }
            Case::Tu { q, r, z_bar } => {
                if !matches!(solver, SolverChoice::Tu | SolverChoice::Oracle) {
                    return Err(Error::Constraint(format!(
                        "TU scenarios need the tu or oracle solver, got {solver}"
                    )));
                }
                let mut r = r.clone();
                if let Some(z) = z_bar {
                    *r.last_mut().expect("validated non-empty") = z[s];
                }
                Ok(ConstraintSet::Tu { q: q.clone(), r })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeChoice {
    #[default]
    Standard,
    Nonstandard,
    /// Solve with both and keep whichever post-processed payoff is larger.
    Both,
}

impl fmt::Display for DerivativeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivativeChoice::Standard => "standard",
            DerivativeChoice::Nonstandard => "nonstandard",
            DerivativeChoice::Both => "both",
        })
    }
}

impl FromStr for DerivativeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(DerivativeChoice::Standard),
            "nonstandard" => Ok(DerivativeChoice::Nonstandard),
            "both" => Ok(DerivativeChoice::Both),
            other => Err(Error::InvalidParams(format!("unknown derivative `{other}`"))),
        }
    }
}

impl From<DerivativeKind> for DerivativeChoice {
    fn from(kind: DerivativeKind) -> Self {
        match kind {
            DerivativeKind::Standard => DerivativeChoice::Standard,
            DerivativeKind::Nonstandard => DerivativeChoice::Nonstandard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    L0,
    Tu,
    Knapsack,
    /// Exhaustive search on the true payoff.
    Oracle,
}

impl fmt::Display for SolverChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverChoice::L0 => "l0",
            SolverChoice::Tu => "tu",
            SolverChoice::Knapsack => "knapsack",
            SolverChoice::Oracle => "oracle",
        })
    }
}

impl FromStr for SolverChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l0" => Ok(SolverChoice::L0),
            "tu" => Ok(SolverChoice::Tu),
            "knapsack" => Ok(SolverChoice::Knapsack),
            "oracle" => Ok(SolverChoice::Oracle),
            other => Err(Error::InvalidParams(format!("unknown solver `{other}`"))),
        }
    }
}

/// Where each step is linearized.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum LinearizationPolicy {
    #[default]
    AllZeros,
    /// The decision applied in the previous step (all-zeros at step 1).
    WarmStart,
    /// Uniformly random points from a seeded stream.
    Random(u64),
    /// The given point at step 1, all-zeros afterwards.
    Initial(BinaryVector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecedingHorizonOptions {
    pub derivative: DerivativeChoice,
    pub policy: LinearizationPolicy,
    pub solver: SolverChoice,
    /// Time points per control step, at least 2.
    pub grid_per_step: usize,
    pub scheme: Scheme,
}

impl Default for RecedingHorizonOptions {
    fn default() -> Self {
        Self {
            derivative: DerivativeChoice::Standard,
            policy: LinearizationPolicy::AllZeros,
            solver: SolverChoice::L0,
            grid_per_step: 31,
            scheme: Scheme::Euler,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    /// 1-based.
    pub step: usize,
    /// Applied decision `α_*`.
    pub alpha: BinaryVector,
    /// `J_k(α_*)`
    pub payoff: f64,
    pub rho: Rho,
    pub rho_post: f64,
    pub kind: DerivativeKind,
    pub certificate: CertifiedSolution,
    pub temperatures_start: Vec<f64>,
    pub temperatures_end: Vec<f64>,
    /// `Σ cᵢαᵢ`
    pub power_kw: f64,
}

/// Everything needed to evaluate one step's true problem.
pub struct StepContext<'a> {
    pub step: usize,
    pub system: &'a FleetSystem,
    pub constraints: &'a ConstraintSet,
    pub grid: TimeGrid,
    pub scheme: Scheme,
}

impl StepContext<'_> {
    pub fn payoff(&self, alpha: &BinaryVector) -> Result<f64> {
        payoff_binary(self.system, alpha, &self.grid, self.scheme)
    }

    /// Sequential exhaustive search.
    pub fn bruteforce(&self) -> Result<(BinaryVector, f64)> {
        let mut objective = |a: &BinaryVector| self.payoff(a);
        solve_bruteforce(&mut objective, self.constraints, self.system.decision_dim())
    }
}

/// Hooks into [`run_receding_horizon_observed`].
pub trait StepObserver {
    /// Exact step optimum for [`SolverChoice::Oracle`].
    fn exhaustive(&mut self, ctx: &StepContext<'_>) -> Result<(BinaryVector, f64)> {
        ctx.bruteforce()
    }

    /// Called after each step is decided, before the state is advanced.
    fn observe(&mut self, _ctx: &StepContext<'_>, _result: &StepResult) -> Result<()> {
        Ok(())
    }
}

struct NoObserver;

impl StepObserver for NoObserver {}

pub fn run_receding_horizon(scenario: &Scenario, options: &RecedingHorizonOptions) -> Result<Vec<StepResult>> {
    run_receding_horizon_observed(scenario, options, &mut NoObserver)
}

/// Runs `scenario.num_steps` control steps; errors carry the 1-based step.
pub fn run_receding_horizon_observed(
    scenario: &Scenario,
    options: &RecedingHorizonOptions,
    observer: &mut dyn StepObserver,
) -> Result<Vec<StepResult>> {
    scenario.validate()?;
    let grid = TimeGrid::new(scenario.horizon(), options.grid_per_step)?;
    let m = scenario.params.m;
    let mut rng = match options.policy {
        LinearizationPolicy::Random(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
        _ => None,
    };
    let mut state = scenario.params.x0.clone();
    let mut previous: Option<BinaryVector> = None;
    let mut results = Vec::with_capacity(scenario.num_steps);
    for step in 1..=scenario.num_steps {
        let alpha_bar = match &options.policy {
            LinearizationPolicy::AllZeros => BinaryVector::zeros(m),
            LinearizationPolicy::WarmStart => previous.clone().unwrap_or_else(|| BinaryVector::zeros(m)),
            LinearizationPolicy::Random(_) => {
                let rng = rng.as_mut().expect("seeded above");
                BinaryVector::from_bools((0..m).map(|_| rng.random_bool(0.5)).collect())
            }
            LinearizationPolicy::Initial(a) if step == 1 => {
                if a.len() != m {
                    return Err(Error::Dimension {
                        what: "initial linearization point",
                        expected: m,
                        found: a.len(),
                    }
                    .at_step(step));
                }
                a.clone()
            }
            LinearizationPolicy::Initial(_) => BinaryVector::zeros(m),
        };
        let result = run_step(scenario, options, observer, step, &state, &grid, &alpha_bar)
            .map_err(|e| e.at_step(step))?;
        state.clone_from(&result.temperatures_end);
        previous = Some(result.alpha.clone());
        results.push(result);
    }
    Ok(results)
}

fn run_step(
    scenario: &Scenario,
    options: &RecedingHorizonOptions,
    observer: &mut dyn StepObserver,
    step: usize,
    state: &[f64],
    grid: &TimeGrid,
    alpha_bar: &BinaryVector,
) -> Result<StepResult> {
    let system = scenario.step_system(state)?;
    let constraints = scenario.step_constraints(step, options.solver)?;
    let ctx = StepContext {
        step,
        system: &system,
        constraints: &constraints,
        grid: *grid,
        scheme: options.scheme,
    };
    let lin = Linearization::new(&system, alpha_bar, grid, options.scheme)?;
    let base_feasible = constraints.is_feasible(alpha_bar);
    let kinds: &[DerivativeKind] = match options.derivative {
        DerivativeChoice::Standard => &[DerivativeKind::Standard],
        DerivativeChoice::Nonstandard => &[DerivativeKind::Nonstandard],
        DerivativeChoice::Both => &[DerivativeKind::Standard, DerivativeKind::Nonstandard],
    };
    let oracle = if options.solver == SolverChoice::Oracle {
        Some(observer.exhaustive(&ctx)?)
    } else {
        None
    };
    let mut chosen: Option<CertifiedSolution> = None;
    for &kind in kinds {
        let grad: Gradient = lin.derivative(&system, kind)?;
        let (alpha_star, payoff) = match &oracle {
            Some((a, v)) => (a.clone(), *v),
            None => {
                let a = solve_linear(&grad, &constraints)?;
                let v = payoff_binary(&system, &a, grid, options.scheme)?;
                (a, v)
            }
        };
        let mut cert = certify_with_payoff(alpha_bar, &grad, &alpha_star, payoff)?;
        if !base_feasible {
            cert = cert.without_base_candidate();
        }
        chosen = match chosen {
            Some(prev) if prev.payoff_post >= cert.payoff_post => Some(prev),
            _ => Some(cert),
        };
    }
    let cert = chosen.expect("at least one derivative kind");
    let alpha = cert.alpha_post.clone();
    let reals = alpha.to_reals();
    let traj = integrate(&system, &reals, grid, options.scheme)?;
    let payoff = evaluate_payoff(&system, &traj, &reals)?;
    let result = StepResult {
        step,
        power_kw: scenario.params.power(&alpha),
        alpha,
        payoff,
        rho: cert.rho,
        rho_post: cert.rho_post,
        kind: cert.kind,
        temperatures_start: state.to_vec(),
        temperatures_end: traj.final_state().to_vec(),
        certificate: cert,
    };
    observer.observe(&ctx, &result)?;
    Ok(result)
}

/// Symmetric edges of the nominal block as `(i, j, conductance)`.
fn block_edges() -> Vec<(usize, usize, f64)> {
    let mut edges: Vec<(usize, usize, f64)> = (0..BLOCK).map(|i| (i, (i + 1) % BLOCK, RING)).collect();
    edges.extend((0..BLOCK / 2).map(|i| (i, i + BLOCK / 2, CHORD)));
    edges
}

/// Synthetic fleet of `m` units in blocks of ten. The first block uses the
/// nominal ring-with-chords parameters; later blocks perturb every
/// conductance and cooling rate by a uniform factor in `[0.9, 1.1]`.
pub fn default_fleet(m: usize, seed: u64) -> Result<EtpParams> {
    if m == 0 || m % BLOCK != 0 {
        return Err(Error::InvalidParams(format!(
            "fleet size must be a positive multiple of {BLOCK}, got {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DenseMatrix::zeros(m, m);
    let mut b = vec![0.0; m];
    for block in 0..m / BLOCK {
        let base = block * BLOCK;
        let mut factor = || {
            if block == 0 {
                1.0
            } else {
                rng.random_range(0.9..=1.1)
            }
        };
        for i in base..base + BLOCK {
            a.set(i, i, SELF * factor());
            b[i] = COOLING * factor();
        }
        for (i, j, g) in block_edges() {
            let v = g * factor();
            a.set(base + i, base + j, v);
            a.set(base + j, base + i, v);
        }
    }
    Ok(EtpParams {
        m,
        a,
        b,
        theta_ambient: vec![AMBIENT; m],
        theta_lo: vec![BAND.0; m],
        theta_hi: vec![BAND.1; m],
        delta: vec![1.0; m],
        c: vec![POWER_KW; m],
        x0: default_initial_temperatures(m),
    })
}

/// Deterministic spread of starting temperatures in `[2, 3.8]`.
pub fn default_initial_temperatures(m: usize) -> Vec<f64> {
    (0..m).map(|i| 2.0 + 0.2 * ((7 * i) % 10) as f64).collect()
}

fn is_peak(step: usize) -> bool {
    PEAK_STEPS.contains(&step)
}

/// Target band with no lower limit and an upper limit of 55% (peak steps)
/// or 50% of the fleet's total draw.
pub fn default_case1(m: usize, seed: u64) -> Result<Scenario> {
    let params = default_fleet(m, seed)?;
    let total = params.c.iter().sum::<f64>();
    let y_hi = (1..=NUM_STEPS)
        .map(|k| if is_peak(k) { 0.55 * total } else { 0.50 * total })
        .collect();
    Ok(Scenario {
        params,
        step_minutes: STEP_MINUTES,
        num_steps: NUM_STEPS,
        case: Case::TargetBand {
            y_lo: vec![0.0; NUM_STEPS],
            y_hi,
        },
        transient: None,
    })
}

/// Customer rows per block (units 1–2, 1–3, 10–9, 10–8 may not run
/// together) plus a shared budget on units 4–7 of every block. The budget is
/// a quarter of the fleet size at peak steps and a fifth otherwise.
pub fn customer_constraints(m: usize) -> Result<(DenseMatrix<i64>, Vec<i64>, Vec<i64>)> {
    if m == 0 || m % BLOCK != 0 {
        return Err(Error::InvalidParams(format!(
            "fleet size must be a positive multiple of {BLOCK}, got {m}"
        )));
    }
    let mut rows = Vec::new();
    for block in 0..m / BLOCK {
        let base = block * BLOCK;
        for (p, q) in [(1, 2), (1, 3), (10, 9), (10, 8)] {
            let mut row = vec![0i64; m];
            row[base + p - 1] = 1;
            row[base + q - 1] = 1;
            rows.push(row);
        }
    }
    let mut budget = vec![0i64; m];
    for block in 0..m / BLOCK {
        for j in 4..=7 {
            budget[block * BLOCK + j - 1] = 1;
        }
    }
    rows.push(budget);
    let mut r = vec![1i64; rows.len()];
    let z_bar: Vec<i64> = (1..=NUM_STEPS)
        .map(|k| if is_peak(k) { (m / 4) as i64 } else { (m / 5) as i64 })
        .collect();
    *r.last_mut().expect("budget row") = z_bar[0];
    Ok((DenseMatrix::from_rows(&rows)?, r, z_bar))
}

pub fn default_case2(m: usize, seed: u64) -> Result<Scenario> {
    let params = default_fleet(m, seed)?;
    let (q, r, z_bar) = customer_constraints(m)?;
    Ok(Scenario {
        params,
        step_minutes: STEP_MINUTES,
        num_steps: NUM_STEPS,
        case: Case::Tu {
            q,
            r,
            z_bar: Some(z_bar),
        },
        transient: None,
    })
}

/// Units outside positions 2, 4, 6, 8 of each block (0-based indices).
pub fn default_transient_members(m: usize) -> Vec<usize> {
    (0..m)
        .filter(|i| !STEADY_POSITIONS.contains(&(i % BLOCK + 1)))
        .collect()
}

/// Case I with transient shutdown on [`default_transient_members`].
pub fn default_transient(m: usize, seed: u64) -> Result<Scenario> {
    let mut scenario = default_case1(m, seed)?;
    let members = default_transient_members(m);
    scenario.transient = Some(Transient {
        xi: vec![TRANSIENT_XI; members.len()],
        members,
    });
    Ok(scenario)
}

/// Human-readable name of a unit, 1-based.
pub fn unit_label(i: usize) -> String {
    format!("unit{}", i + 1)
}
