//! Costates of the discrete payoff and the Hamiltonian.
//!
//! The backward pass differentiates the exact arithmetic of the forward
//! scheme and of the trapezoid payoff, so `λ(t_k)` is the sensitivity of the
//! computed payoff to the stored state `x_k` (counting the running payoff from
//! `t_k` on). In particular `λ(T) = ∂q/∂x(x_N)` and `λ(0) = ∂J/∂x(0)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::binary::BinaryVector;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, mat_t_vec};
use crate::sysmodel::{explicit_step, stage_count, Scheme, StepWork, System, TimeGrid, Trajectory, RK4_NODES};

/// `H(x, λ, α, t) = λᵀ f(x, α, t) + r(x, α, t)`.
pub fn hamiltonian<S: System + ?Sized>(
    spec: &S,
    state: &[f64],
    costate: &[f64],
    alpha: &[f64],
    t: f64,
) -> Result<f64> {
    let n = spec.state_dim();
    for (what, found) in [("state", state.len()), ("costate", costate.len())] {
        if found != n {
            return Err(Error::Dimension {
                what,
                expected: n,
                found,
            });
        }
    }
    if alpha.len() != spec.decision_dim() {
        return Err(Error::Dimension {
            what: "decision",
            expected: spec.decision_dim(),
            found: alpha.len(),
        });
    }
    let mut f = vec![0.0; n];
    spec.vector_field(state, alpha, t, &mut f);
    Ok(dot(costate, &f) + spec.running_payoff(state, alpha, t))
}

/// Costates on the forward grid plus the per-stage data the derivative
/// quadratures need.
///
/// For step `k` and stage `s` the record holds the point `Y` at which the
/// vector field was evaluated, its time, and the cotangent `ḡ` of that
/// evaluation, i.e. `∂J/∂f(Y)`.
#[derive(Debug, Clone)]
pub struct AdjointTrajectory {
    grid: TimeGrid,
    dim: usize,
    scheme: Scheme,
    values: Vec<f64>,
    stage_points: Vec<f64>,
    stage_cotangents: Vec<f64>,
}

impl AdjointTrajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// `λ(t_k)`.
    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.dim)
    }

    pub fn stages_per_step(&self) -> usize {
        stage_count(self.scheme)
    }

    /// Iterates `(Y, t, ḡ)` over every field evaluation of the forward pass.
    pub fn stages(&self) -> impl Iterator<Item = (&[f64], f64, &[f64])> + '_ {
        let per = self.stages_per_step();
        let h = self.grid.step();
        self.stage_points
            .chunks_exact(self.dim)
            .zip(self.stage_cotangents.chunks_exact(self.dim))
            .enumerate()
            .map(move |(j, (y, g))| {
                let (k, s) = (j / per, j % per);
                let t = self.grid.time(k) + node(self.scheme, s) * h;
                (y, t, g)
            })
    }
}

fn node(scheme: Scheme, s: usize) -> f64 {
    match scheme {
        Scheme::Euler => 0.0,
        Scheme::Rk4 => RK4_NODES[s],
    }
}

/// Backward costate pass along `forward`, which must come from
/// [`crate::sysmodel::integrate`] for the same system and decision.
pub fn solve_adjoint<S: System + ?Sized>(
    spec: &S,
    alpha: &BinaryVector,
    forward: &Trajectory,
) -> Result<AdjointTrajectory> {
    solve_adjoint_reals(spec, &alpha.to_reals(), forward)
}

pub(crate) fn solve_adjoint_reals<S: System + ?Sized>(
    spec: &S,
    alpha: &[f64],
    forward: &Trajectory,
) -> Result<AdjointTrajectory> {
    let n = spec.state_dim();
    if alpha.len() != spec.decision_dim() {
        return Err(Error::Dimension {
            what: "decision",
            expected: spec.decision_dim(),
            found: alpha.len(),
        });
    }
    if forward.dim() != n {
        return Err(Error::Dimension {
            what: "trajectory state",
            expected: n,
            found: forward.dim(),
        });
    }
    let grid = *forward.grid();
    if (grid.horizon() - spec.horizon()).abs() > 1e-12 * spec.horizon().abs().max(1.0) {
        return Err(Error::GridMismatch {
            grid_horizon: grid.horizon(),
            system_horizon: spec.horizon(),
        });
    }
    let scheme = forward.scheme();
    let steps = grid.num_points() - 1;
    let per = stage_count(scheme);
    let h = grid.step();

    let mut values = vec![0.0; grid.num_points() * n];
    let mut stage_points = vec![0.0; steps * per * n];
    let mut stage_cotangents = vec![0.0; steps * per * n];

    let last = steps;
    spec.jac_q_x(forward.row(last), &mut values[last * n..]);
    if !all_finite(&values[last * n..]) {
        return Err(Error::AdjointDiverged { knot: last });
    }

    let mut work = StepWork::new(n);
    let mut jac = vec![0.0; n * n];
    let mut rx = vec![0.0; n];
    let mut mu = vec![0.0; n];
    let mut gy = vec![0.0; n];
    let mut gy_next = vec![0.0; n];
    let mut scratch = vec![0.0; n];

    for k in (0..steps).rev() {
        // μ = ∂J/∂x_{k+1} including the right trapezoid half-weight
        spec.jac_r_x(forward.row(k + 1), alpha, grid.time(k + 1), &mut rx);
        for i in 0..n {
            mu[i] = values[(k + 1) * n + i] + 0.5 * h * rx[i];
        }

        let x = forward.row(k);
        let t = grid.time(k);
        explicit_step(
            scheme,
            &mut |y: &[f64], s: f64, out: &mut [f64]| spec.vector_field(y, alpha, s, out),
            x,
            t,
            h,
            &mut work,
            &mut scratch,
        );

        let base = k * per * n;
        let nu = &mut values[k * n..(k + 1) * n];
        nu.copy_from_slice(&mu);
        match scheme {
            Scheme::Euler => {
                let g = &mut stage_cotangents[base..base + n];
                for i in 0..n {
                    g[i] = h * mu[i];
                }
                stage_points[base..base + n].copy_from_slice(&work.stage_points[0]);
                spec.jac_f_x(&work.stage_points[0], alpha, t, &mut jac);
                mat_t_vec(&jac, n, n, g, &mut gy);
                for i in 0..n {
                    nu[i] += gy[i];
                }
            }
            Scheme::Rk4 => {
                const WEIGHTS: [f64; 4] = [1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0];
                // Cotangent of Y_{s+1} flows into K_s through Y_{s+1} = x + c·h·K_s.
                gy_next.fill(0.0);
                for s in (0..4).rev() {
                    let feed = if s == 3 { 0.0 } else { RK4_NODES[s + 1] * h };
                    let off = base + s * n;
                    let g = &mut stage_cotangents[off..off + n];
                    for i in 0..n {
                        g[i] = WEIGHTS[s] * h * mu[i] + feed * gy_next[i];
                    }
                    let y = &work.stage_points[s];
                    stage_points[off..off + n].copy_from_slice(y);
                    spec.jac_f_x(y, alpha, t + RK4_NODES[s] * h, &mut jac);
                    mat_t_vec(&jac, n, n, g, &mut gy);
                    for i in 0..n {
                        nu[i] += gy[i];
                    }
                    core::mem::swap(&mut gy, &mut gy_next);
                }
            }
        }
        spec.jac_r_x(x, alpha, t, &mut rx);
        for i in 0..n {
            nu[i] += 0.5 * h * rx[i];
        }
        if !all_finite(nu) {
            return Err(Error::AdjointDiverged { knot: k });
        }
    }

    Ok(AdjointTrajectory {
        grid,
        dim: n,
        scheme,
        values,
        stage_points,
        stage_cotangents,
    })
}
