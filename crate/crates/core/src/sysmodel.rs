//! Combinatorial dynamical systems and their fixed-step integration.
//!
//! A [`System`] bundles the vector field `f(x, α, t)`, the running payoff
//! `r(x, α, t)`, the terminal payoff `q(x)` and their state Jacobians. The
//! decision `α` is held constant over the horizon. Payoffs are integrated with
//! the trapezoid rule on the same uniform grid the state is stored on, which is
//! the discrete functional every derivative in this crate differentiates.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::binary::BinaryVector;
use crate::error::{Error, Result};
use crate::linalg::all_finite;

/// A dynamical system `ẋ = f(x, α, t)` with payoff `∫ r dt + q(x(T))`.
///
/// Matrices are row-major: `jac_f_x` writes `∂fᵢ/∂xⱼ` at `i * n + j`.
/// Implementations must be pure.
pub trait System {
    fn state_dim(&self) -> usize;
    fn decision_dim(&self) -> usize;
    fn initial_state(&self) -> &[f64];
    fn horizon(&self) -> f64;

    /// `true` iff `f` and `r` accept fractional decisions in `[0, 1]^m`.
    fn relaxable(&self) -> bool;

    fn vector_field(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]);
    fn running_payoff(&self, x: &[f64], alpha: &[f64], t: f64) -> f64;
    fn terminal_payoff(&self, x: &[f64]) -> f64;

    fn jac_f_x(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]);
    fn jac_r_x(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]);
    fn jac_q_x(&self, x: &[f64], out: &mut [f64]);

    /// Analytic decision Jacobians, if the system provides them.
    fn alpha_jacobians(&self) -> Option<&dyn AlphaJacobians> {
        None
    }
}

/// Optional `∂f/∂α` (n × m, row-major) and `∂r/∂α` (length m).
pub trait AlphaJacobians {
    fn jac_f_alpha(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]);
    fn jac_r_alpha(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Euler,
    Rk4,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Euler => "euler",
            Scheme::Rk4 => "rk4",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler" => Ok(Scheme::Euler),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(Error::InvalidParams(alloc::format!("unknown scheme `{other}`"))),
        }
    }
}

/// Uniform knots `t_k = k·h` on `[0, T]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    num_points: usize,
    horizon: f64,
}

impl TimeGrid {
    pub fn new(horizon: f64, num_points: usize) -> Result<Self> {
        if num_points < 2 {
            return Err(Error::InvalidParams(alloc::format!(
                "time grid needs at least 2 points, got {num_points}"
            )));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidParams(alloc::format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        Ok(Self {
            num_points,
            horizon,
        })
    }

    /// Grid spanning a system's horizon.
    pub fn for_system<S: System + ?Sized>(spec: &S, num_points: usize) -> Result<Self> {
        Self::new(spec.horizon(), num_points)
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn step(&self) -> f64 {
        self.horizon / (self.num_points - 1) as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.num_points {
            self.horizon
        } else {
            k as f64 * self.step()
        }
    }

    /// Trapezoid weight of knot `k` (in units of the step).
    pub fn trapezoid_weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.num_points {
            0.5
        } else {
            1.0
        }
    }

    fn matches(&self, horizon: f64) -> bool {
        (self.horizon - horizon).abs() <= 1e-12 * horizon.abs().max(1.0)
    }
}

/// A path sampled on a [`TimeGrid`]; row `k` is the state at `t_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    grid: TimeGrid,
    dim: usize,
    scheme: Scheme,
    values: Vec<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Scheme that produced the path; the adjoint pass mirrors it.
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn final_state(&self) -> &[f64] {
        self.row(self.grid.num_points - 1)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Scratch buffers for one explicit step.
pub(crate) struct StepWork {
    pub(crate) stage_points: [Vec<f64>; 4],
    pub(crate) slopes: [Vec<f64>; 4],
}

impl StepWork {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            stage_points: core::array::from_fn(|_| vec![0.0; n]),
            slopes: core::array::from_fn(|_| vec![0.0; n]),
        }
    }
}

pub(crate) const RK4_NODES: [f64; 4] = [0.0, 0.5, 0.5, 1.0];

/// One explicit step from `x` at time `t`. Stage points and slopes are left in
/// `work` so the adjoint pass can reuse them.
pub(crate) fn explicit_step<F>(
    scheme: Scheme,
    field: &mut F,
    x: &[f64],
    t: f64,
    h: f64,
    work: &mut StepWork,
    out: &mut [f64],
) where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    let n = x.len();
    match scheme {
        Scheme::Euler => {
            work.stage_points[0].copy_from_slice(x);
            field(x, t, &mut work.slopes[0]);
            for i in 0..n {
                out[i] = x[i] + h * work.slopes[0][i];
            }
        }
        Scheme::Rk4 => {
            let StepWork {
                stage_points,
                slopes,
            } = work;
            stage_points[0].copy_from_slice(x);
            field(&stage_points[0], t, &mut slopes[0]);
            for s in 1..4 {
                let scale = RK4_NODES[s] * h;
                let (done, rest) = slopes.split_at_mut(s);
                let prev = &done[s - 1];
                for i in 0..n {
                    stage_points[s][i] = x[i] + scale * prev[i];
                }
                field(&stage_points[s], t + scale, &mut rest[0]);
            }
            for i in 0..n {
                out[i] = x[i]
                    + h / 6.0 * (slopes[0][i] + 2.0 * slopes[1][i] + 2.0 * slopes[2][i] + slopes[3][i]);
            }
        }
    }
}

pub(crate) fn stage_count(scheme: Scheme) -> usize {
    match scheme {
        Scheme::Euler => 1,
        Scheme::Rk4 => 4,
    }
}

fn march<F>(x0: &[f64], grid: &TimeGrid, scheme: Scheme, mut field: F) -> Result<Trajectory>
where
    F: FnMut(&[f64], f64, &mut [f64]),
{
    let n = x0.len();
    let steps = grid.num_points() - 1;
    let h = grid.step();
    let mut values = vec![0.0; grid.num_points() * n];
    values[..n].copy_from_slice(x0);
    if !all_finite(x0) {
        return Err(Error::IntegrationDiverged { knot: 0 });
    }
    let mut work = StepWork::new(n);
    for k in 0..steps {
        let (head, tail) = values.split_at_mut((k + 1) * n);
        let x = &head[k * n..];
        let next = &mut tail[..n];
        explicit_step(scheme, &mut field, x, grid.time(k), h, &mut work, next);
        if !all_finite(next) {
            return Err(Error::IntegrationDiverged { knot: k + 1 });
        }
    }
    Ok(Trajectory {
        grid: *grid,
        dim: n,
        scheme,
        values,
    })
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            found,
        })
    }
}

/// Checks `alpha` against the system's decision domain: binary entries for
/// non-relaxable systems, `[0, 1]` otherwise.
pub fn check_decision<S: System + ?Sized>(spec: &S, alpha: &[f64]) -> Result<()> {
    check_len("decision", spec.decision_dim(), alpha.len())?;
    for (index, &value) in alpha.iter().enumerate() {
        let ok = if spec.relaxable() {
            (0.0..=1.0).contains(&value)
        } else {
            value == 0.0 || value == 1.0
        };
        if !ok {
            return Err(Error::Decision { index, value });
        }
    }
    Ok(())
}

fn check_grid<S: System + ?Sized>(spec: &S, grid: &TimeGrid) -> Result<()> {
    if grid.matches(spec.horizon()) {
        Ok(())
    } else {
        Err(Error::GridMismatch {
            grid_horizon: grid.horizon(),
            system_horizon: spec.horizon(),
        })
    }
}

/// Integrates `ẋ = f(x, α, t)` from the system's initial state.
pub fn integrate<S: System + ?Sized>(
    spec: &S,
    alpha: &[f64],
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<Trajectory> {
    check_decision(spec, alpha)?;
    integrate_unchecked(spec, alpha, grid, scheme)
}

/// Like [`integrate`] but accepts any finite decision, for finite-difference
/// probes just outside `[0, 1]^m`.
pub(crate) fn integrate_unchecked<S: System + ?Sized>(
    spec: &S,
    alpha: &[f64],
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<Trajectory> {
    check_len("decision", spec.decision_dim(), alpha.len())?;
    check_len("initial state", spec.state_dim(), spec.initial_state().len())?;
    check_grid(spec, grid)?;
    march(spec.initial_state(), grid, scheme, |x, t, out| {
        spec.vector_field(x, alpha, t, out)
    })
}

/// Trapezoid quadrature of `r` along `traj` plus `q` at the final knot.
pub fn evaluate_payoff<S: System + ?Sized>(
    spec: &S,
    traj: &Trajectory,
    alpha: &[f64],
) -> Result<f64> {
    check_len("decision", spec.decision_dim(), alpha.len())?;
    check_len("trajectory state", spec.state_dim(), traj.dim())?;
    check_grid(spec, traj.grid())?;
    Ok(payoff_along(spec, traj, alpha))
}

fn payoff_along<S: System + ?Sized>(spec: &S, traj: &Trajectory, alpha: &[f64]) -> f64 {
    let grid = traj.grid();
    let running: f64 = traj
        .rows()
        .enumerate()
        .map(|(k, x)| grid.trapezoid_weight(k) * spec.running_payoff(x, alpha, grid.time(k)))
        .sum();
    grid.step() * running + spec.terminal_payoff(traj.final_state())
}

/// `J(α)`: one integration followed by [`evaluate_payoff`].
pub fn payoff<S: System + ?Sized>(
    spec: &S,
    alpha: &[f64],
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<f64> {
    let traj = integrate(spec, alpha, grid, scheme)?;
    Ok(payoff_along(spec, &traj, alpha))
}

/// `J(α)` for a binary decision.
pub fn payoff_binary<S: System + ?Sized>(
    spec: &S,
    alpha: &BinaryVector,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<f64> {
    payoff(spec, &alpha.to_reals(), grid, scheme)
}

pub(crate) fn payoff_unchecked<S: System + ?Sized>(
    spec: &S,
    alpha: &[f64],
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<f64> {
    let traj = integrate_unchecked(spec, alpha, grid, scheme)?;
    Ok(payoff_along(spec, &traj, alpha))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidParams(alloc::format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )))
    }
}

/// Integrates the ε-variational system whose field is
/// `(1 − ε) f(·, ᾱ) + ε f(·, α)`.
pub fn integrate_variational<S: System + ?Sized>(
    spec: &S,
    alpha_base: &BinaryVector,
    alpha_dir: &BinaryVector,
    epsilon: f64,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<Trajectory> {
    check_epsilon(epsilon)?;
    let base = alpha_base.to_reals();
    let dir = alpha_dir.to_reals();
    check_len("direction", base.len(), dir.len())?;
    if epsilon == 0.0 {
        return integrate(spec, &base, grid, scheme);
    }
    if epsilon == 1.0 {
        return integrate(spec, &dir, grid, scheme);
    }
    check_decision(spec, &base)?;
    check_decision(spec, &dir)?;
    check_grid(spec, grid)?;
    let mut other = vec![0.0; spec.state_dim()];
    march(spec.initial_state(), grid, scheme, |x, t, out| {
        spec.vector_field(x, &base, t, out);
        spec.vector_field(x, &dir, t, &mut other);
        for (o, w) in out.iter_mut().zip(&other) {
            *o = (1.0 - epsilon) * *o + epsilon * w;
        }
    })
}

/// `(1 − ε)·𝒥(traj, ᾱ) + ε·𝒥(traj, α)` with the trapezoid quadrature of
/// [`evaluate_payoff`].
pub fn evaluate_variational_payoff<S: System + ?Sized>(
    spec: &S,
    traj: &Trajectory,
    alpha_base: &BinaryVector,
    alpha_dir: &BinaryVector,
    epsilon: f64,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    let at_base = evaluate_payoff(spec, traj, &alpha_base.to_reals())?;
    if epsilon == 0.0 {
        return Ok(at_base);
    }
    let at_dir = evaluate_payoff(spec, traj, &alpha_dir.to_reals())?;
    if epsilon == 1.0 {
        return Ok(at_dir);
    }
    Ok((1.0 - epsilon) * at_base + epsilon * at_dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::tests_support::Scalar;

    fn e() -> f64 {
        core::f64::consts::E
    }

    #[test]
    fn zero_field_is_constant() {
        struct Still;
        impl System for Still {
            fn state_dim(&self) -> usize {
                2
            }
            fn decision_dim(&self) -> usize {
                1
            }
            fn initial_state(&self) -> &[f64] {
                &[1.0, 2.0]
            }
            fn horizon(&self) -> f64 {
                1.0
            }
            fn relaxable(&self) -> bool {
                true
            }
            fn vector_field(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
                out.fill(0.0)
            }
            fn running_payoff(&self, _: &[f64], _: &[f64], _: f64) -> f64 {
                0.0
            }
            fn terminal_payoff(&self, x: &[f64]) -> f64 {
                x[0]
            }
            fn jac_f_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
                out.fill(0.0)
            }
            fn jac_r_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
                out.fill(0.0)
            }
            fn jac_q_x(&self, _: &[f64], out: &mut [f64]) {
                out.copy_from_slice(&[1.0, 0.0])
            }
        }
        let grid = TimeGrid::new(1.0, 7).unwrap();
        for scheme in [Scheme::Euler, Scheme::Rk4] {
            let traj = integrate(&Still, &[1.0], &grid, scheme).unwrap();
            assert!(traj.rows().all(|r| r == [1.0, 2.0]));
            assert_eq!(evaluate_payoff(&Still, &traj, &[1.0]).unwrap(), 1.0);
        }
    }

    #[test]
    fn exponential_growth_rk4() {
        let sys = Scalar::exp_growth();
        let grid = TimeGrid::new(1.0, 10001).unwrap();
        let traj = integrate(&sys, &[0.0], &grid, Scheme::Rk4).unwrap();
        assert!((traj.final_state()[0] - e()).abs() < 1e-6);
        let j = evaluate_payoff(&sys, &traj, &[0.0]).unwrap();
        assert!((j - (e() - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn forced_growth_rk4() {
        let sys = Scalar::forced();
        let grid = TimeGrid::new(1.0, 10001).unwrap();
        let traj = integrate(&sys, &[1.0], &grid, Scheme::Rk4).unwrap();
        assert!((traj.final_state()[0] - (e() - 1.0)).abs() < 1e-6);
        let j = evaluate_payoff(&sys, &traj, &[1.0]).unwrap();
        assert!((j - (e() - 2.0)).abs() < 1e-5);
    }

    #[test]
    fn terminal_only_payoff() {
        // ẋ = 5, x(0) = 0 over unit time, q(x) = x
        let mut sys = Scalar::forced();
        sys.lin = 0.0;
        sys.gain = 5.0;
        sys.run_x = 0.0;
        sys.term = 1.0;
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let traj = integrate(&sys, &[1.0], &grid, Scheme::Euler).unwrap();
        assert!((evaluate_payoff(&sys, &traj, &[1.0]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_reports_knot() {
        let mut sys = Scalar::exp_growth();
        sys.lin = 1e200;
        let grid = TimeGrid::new(1.0, 11).unwrap();
        match integrate(&sys, &[0.0], &grid, Scheme::Euler) {
            Err(Error::IntegrationDiverged { knot }) => assert!(knot >= 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = Scalar::forced();
        let grid = TimeGrid::new(1.0, 11).unwrap();
        assert!(matches!(
            integrate(&sys, &[1.5], &grid, Scheme::Euler),
            Err(Error::Decision { .. })
        ));
        assert!(matches!(
            integrate(&sys, &[1.0, 0.0], &grid, Scheme::Euler),
            Err(Error::Dimension { .. })
        ));
        let other = TimeGrid::new(2.0, 11).unwrap();
        let traj = integrate(&sys, &[1.0], &grid, Scheme::Euler).unwrap();
        assert!(integrate(&sys, &[1.0], &other, Scheme::Euler).is_err());
        let mut longer = sys.clone();
        longer.horizon = 2.0;
        assert!(matches!(
            evaluate_payoff(&longer, &traj, &[1.0]),
            Err(Error::GridMismatch { .. })
        ));
        assert!(TimeGrid::new(1.0, 1).is_err());
    }

    #[test]
    fn variational_endpoints_are_exact() {
        let sys = Scalar::forced();
        let grid = TimeGrid::new(1.0, 101).unwrap();
        let base = BinaryVector::zeros(1);
        let dir = BinaryVector::ones(1);
        for scheme in [Scheme::Euler, Scheme::Rk4] {
            let at0 = integrate_variational(&sys, &base, &dir, 0.0, &grid, scheme).unwrap();
            assert_eq!(at0, integrate(&sys, &[0.0], &grid, scheme).unwrap());
            let at1 = integrate_variational(&sys, &base, &dir, 1.0, &grid, scheme).unwrap();
            assert_eq!(at1, integrate(&sys, &[1.0], &grid, scheme).unwrap());
            let j0 = evaluate_variational_payoff(&sys, &at1, &base, &dir, 0.0).unwrap();
            assert_eq!(j0, evaluate_payoff(&sys, &at1, &[0.0]).unwrap());
            let j1 = evaluate_variational_payoff(&sys, &at1, &base, &dir, 1.0).unwrap();
            assert_eq!(j1, evaluate_payoff(&sys, &at1, &[1.0]).unwrap());
        }
    }

    #[test]
    fn variational_midpoint_matches_half_forcing() {
        let sys = Scalar::forced();
        let grid = TimeGrid::new(1.0, 2001).unwrap();
        let traj = integrate_variational(
            &sys,
            &BinaryVector::zeros(1),
            &BinaryVector::ones(1),
            0.5,
            &grid,
            Scheme::Rk4,
        )
        .unwrap();
        assert!((traj.final_state()[0] - 0.5 * (e() - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn variational_payoff_mixes_running_terms() {
        // r(x, α) = α₁ on the unit horizon
        let mut sys = Scalar::forced();
        sys.run_x = 0.0;
        sys.run_alpha = 1.0;
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let traj = integrate(&sys, &[0.0], &grid, Scheme::Euler).unwrap();
        let j = evaluate_variational_payoff(
            &sys,
            &traj,
            &BinaryVector::zeros(1),
            &BinaryVector::ones(1),
            0.25,
        )
        .unwrap();
        assert!((j - 0.25).abs() < 1e-12);
        assert!(evaluate_variational_payoff(
            &sys,
            &traj,
            &BinaryVector::zeros(1),
            &BinaryVector::ones(1),
            1.5
        )
        .is_err());
    }

    #[test]
    fn grid_refinement_orders() {
        // Euler payoff error is first order. With trapezoid quadrature the rk4
        // payoff is second order (the quadrature dominates the integrator).
        let sys = Scalar::exp_growth();
        let exact = e() - 1.0;
        let err = |n: usize, scheme| {
            let grid = TimeGrid::new(1.0, n).unwrap();
            (payoff(&sys, &[0.0], &grid, scheme).unwrap() - exact).abs()
        };
        let (e1, e2) = (err(101, Scheme::Euler), err(201, Scheme::Euler));
        assert!(e2 < 0.55 * e1 && e2 > 0.45 * e1, "{e1} {e2}");
        let (r1, r2) = (err(101, Scheme::Rk4), err(201, Scheme::Rk4));
        assert!(r2 < 0.26 * r1, "{r1} {r2}");
    }
}
