//! Standard and nonstandard derivatives of the payoff at a binary point.
//!
//! Both are computed from one forward and one adjoint pass and are exact
//! gradients of the discrete payoff, so they agree with finite differences up
//! to round-off and truncation of the difference quotient.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::adjoint::{solve_adjoint_reals, AdjointTrajectory};
use crate::binary::BinaryVector;
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot, mat_t_vec};
use crate::sysmodel::{
    check_decision, evaluate_payoff, evaluate_variational_payoff, integrate, integrate_variational,
    payoff_unchecked, AlphaJacobians, Scheme, System, TimeGrid, Trajectory,
};

/// Step of the central differences used when a system has no analytic
/// decision Jacobians.
pub const FALLBACK_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DerivativeKind {
    Standard,
    Nonstandard,
}

impl fmt::Display for DerivativeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DerivativeKind::Standard => "standard",
            DerivativeKind::Nonstandard => "nonstandard",
        })
    }
}

impl FromStr for DerivativeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(DerivativeKind::Standard),
            "nonstandard" => Ok(DerivativeKind::Nonstandard),
            other => Err(Error::InvalidParams(alloc::format!(
                "unknown derivative kind `{other}`"
            ))),
        }
    }
}

/// `DJ(ᾱ)` together with the point and payoff it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub kind: DerivativeKind,
    pub base_point: BinaryVector,
    pub entries: Vec<f64>,
    /// `J(ᾱ)`
    pub base_payoff: f64,
}

impl Gradient {
    /// A gradient not tied to a dynamical system, e.g. for solver tests.
    pub fn from_entries(kind: DerivativeKind, entries: Vec<f64>) -> Self {
        Self {
            kind,
            base_point: BinaryVector::zeros(entries.len()),
            entries,
            base_payoff: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `DJ(ᾱ)ᵀ(α − ᾱ)`
    pub fn predicted_change(&self, alpha: &BinaryVector) -> f64 {
        self.entries
            .iter()
            .zip(alpha.iter().zip(self.base_point.iter()))
            .map(|(g, (a, b))| match (a, b) {
                (true, false) => *g,
                (false, true) => -*g,
                _ => 0.0,
            })
            .sum()
    }
}

/// Forward trajectory, costates and base payoff at a binary point; both
/// derivative kinds are quadratures over this data.
#[derive(Debug, Clone)]
pub struct Linearization {
    base_point: BinaryVector,
    alpha: Vec<f64>,
    forward: Trajectory,
    adjoint: AdjointTrajectory,
    base_payoff: f64,
}

impl Linearization {
    pub fn new<S: System + ?Sized>(
        spec: &S,
        alpha_bar: &BinaryVector,
        grid: &TimeGrid,
        scheme: Scheme,
    ) -> Result<Self> {
        let alpha = alpha_bar.to_reals();
        let forward = integrate(spec, &alpha, grid, scheme)?;
        let base_payoff = evaluate_payoff(spec, &forward, &alpha)?;
        let adjoint = solve_adjoint_reals(spec, &alpha, &forward)?;
        Ok(Self {
            base_point: alpha_bar.clone(),
            alpha,
            forward,
            adjoint,
            base_payoff,
        })
    }

    pub fn base_point(&self) -> &BinaryVector {
        &self.base_point
    }

    pub fn base_payoff(&self) -> f64 {
        self.base_payoff
    }

    pub fn forward(&self) -> &Trajectory {
        &self.forward
    }

    pub fn adjoint(&self) -> &AdjointTrajectory {
        &self.adjoint
    }

    pub fn derivative<S: System + ?Sized>(&self, spec: &S, kind: DerivativeKind) -> Result<Gradient> {
        match kind {
            DerivativeKind::Standard => self.standard(spec),
            DerivativeKind::Nonstandard => self.nonstandard(spec),
        }
    }

    /// `Σ_stages (∂f/∂α)ᵀḡ + h Σ_k w_k (∂r/∂α)ᵀ`
    pub fn standard<S: System + ?Sized>(&self, spec: &S) -> Result<Gradient> {
        if !spec.relaxable() {
            return Err(Error::NotRelaxable);
        }
        let n = spec.state_dim();
        let m = spec.decision_dim();
        let fallback = FiniteDifferenceJacobians { spec };
        let jac: &dyn AlphaJacobians = match spec.alpha_jacobians() {
            Some(j) => j,
            None => &fallback,
        };
        let mut entries = vec![0.0; m];
        let mut fa = vec![0.0; n * m];
        let mut col = vec![0.0; m];
        for (y, t, g) in self.adjoint.stages() {
            jac.jac_f_alpha(y, &self.alpha, t, &mut fa);
            mat_t_vec(&fa, n, m, g, &mut col);
            for (e, c) in entries.iter_mut().zip(&col) {
                *e += c;
            }
        }
        let grid = self.forward.grid();
        let h = grid.step();
        for (k, x) in self.forward.rows().enumerate() {
            jac.jac_r_alpha(x, &self.alpha, grid.time(k), &mut col);
            let w = h * grid.trapezoid_weight(k);
            for (e, c) in entries.iter_mut().zip(&col) {
                *e += w * c;
            }
        }
        self.finish(DerivativeKind::Standard, entries)
    }

    /// Entry `i` is `sᵢ[Σ_stages (f(Y, ᾱ ⊕ 1ᵢ) − f(Y, ᾱ))ᵀḡ + h Σ_k w_k (r(x_k, ᾱ ⊕ 1ᵢ) − r(x_k, ᾱ))]`
    /// with `sᵢ = +1` when `ᾱᵢ = 0` and `−1` when `ᾱᵢ = 1`.
    pub fn nonstandard<S: System + ?Sized>(&self, spec: &S) -> Result<Gradient> {
        let n = spec.state_dim();
        let m = spec.decision_dim();
        let grid = self.forward.grid();
        let h = grid.step();

        // Base field value and cotangent product per stage.
        let mut base_terms = Vec::with_capacity(self.adjoint.stages().size_hint().0);
        let mut f = vec![0.0; n];
        for (y, t, g) in self.adjoint.stages() {
            spec.vector_field(y, &self.alpha, t, &mut f);
            base_terms.push(dot(&f, g));
        }
        let base_running: Vec<f64> = self
            .forward
            .rows()
            .enumerate()
            .map(|(k, x)| spec.running_payoff(x, &self.alpha, grid.time(k)))
            .collect();

        let mut entries = vec![0.0; m];
        let mut flipped = self.alpha.clone();
        for i in 0..m {
            let sign = if self.base_point.get(i) { -1.0 } else { 1.0 };
            flipped[i] = 1.0 - self.alpha[i];
            let mut acc = 0.0;
            for ((y, t, g), base) in self.adjoint.stages().zip(&base_terms) {
                spec.vector_field(y, &flipped, t, &mut f);
                acc += dot(&f, g) - base;
            }
            let mut running = 0.0;
            for (k, x) in self.forward.rows().enumerate() {
                let diff = spec.running_payoff(x, &flipped, grid.time(k)) - base_running[k];
                running += grid.trapezoid_weight(k) * diff;
            }
            entries[i] = sign * (acc + h * running);
            flipped[i] = self.alpha[i];
        }
        self.finish(DerivativeKind::Nonstandard, entries)
    }

    fn finish(&self, kind: DerivativeKind, entries: Vec<f64>) -> Result<Gradient> {
        if !all_finite(&entries) {
            return Err(Error::AdjointDiverged { knot: 0 });
        }
        Ok(Gradient {
            kind,
            base_point: self.base_point.clone(),
            entries,
            base_payoff: self.base_payoff,
        })
    }
}

struct FiniteDifferenceJacobians<'a, S: ?Sized> {
    spec: &'a S,
}

impl<S: System + ?Sized> AlphaJacobians for FiniteDifferenceJacobians<'_, S> {
    fn jac_f_alpha(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let n = self.spec.state_dim();
        let m = alpha.len();
        let mut probe = alpha.to_vec();
        let mut plus = vec![0.0; n];
        let mut minus = vec![0.0; n];
        for j in 0..m {
            probe[j] = alpha[j] + FALLBACK_STEP;
            self.spec.vector_field(x, &probe, t, &mut plus);
            probe[j] = alpha[j] - FALLBACK_STEP;
            self.spec.vector_field(x, &probe, t, &mut minus);
            probe[j] = alpha[j];
            for i in 0..n {
                out[i * m + j] = (plus[i] - minus[i]) / (2.0 * FALLBACK_STEP);
            }
        }
    }

    fn jac_r_alpha(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let mut probe = alpha.to_vec();
        for j in 0..alpha.len() {
            probe[j] = alpha[j] + FALLBACK_STEP;
            let plus = self.spec.running_payoff(x, &probe, t);
            probe[j] = alpha[j] - FALLBACK_STEP;
            let minus = self.spec.running_payoff(x, &probe, t);
            probe[j] = alpha[j];
            out[j] = (plus - minus) / (2.0 * FALLBACK_STEP);
        }
    }
}

/// Standard derivative `D^S J(ᾱ)`. Requires a relaxable system.
pub fn standard_derivative<S: System + ?Sized>(
    spec: &S,
    alpha_bar: &BinaryVector,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<Gradient> {
    if !spec.relaxable() {
        return Err(Error::NotRelaxable);
    }
    Linearization::new(spec, alpha_bar, grid, scheme)?.standard(spec)
}

/// Nonstandard derivative `D^NS J(ᾱ)`.
pub fn nonstandard_derivative<S: System + ?Sized>(
    spec: &S,
    alpha_bar: &BinaryVector,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<Gradient> {
    Linearization::new(spec, alpha_bar, grid, scheme)?.nonstandard(spec)
}

pub fn derivative<S: System + ?Sized>(
    spec: &S,
    kind: DerivativeKind,
    alpha_bar: &BinaryVector,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<Gradient> {
    match kind {
        DerivativeKind::Standard => standard_derivative(spec, alpha_bar, grid, scheme),
        DerivativeKind::Nonstandard => nonstandard_derivative(spec, alpha_bar, grid, scheme),
    }
}

/// The affine-in-α surrogate `f̂(x, α) = f(x, 0) + Σ αᵢ (f(x, 1ᵢ) − f(x, 0))`,
/// with `r̂` built the same way. It only evaluates the wrapped system at the
/// `m + 1` binary points `0, 1₁, …, 1ₘ`.
#[derive(Debug, Clone, Copy)]
pub struct Reformulated<'a, S: ?Sized> {
    inner: &'a S,
}

pub fn reformulate<S: System + ?Sized>(spec: &S) -> Reformulated<'_, S> {
    Reformulated { inner: spec }
}

impl<S: System + ?Sized> Reformulated<'_, S> {
    fn basis(&self) -> (Vec<f64>, usize) {
        let m = self.inner.decision_dim();
        (vec![0.0; m], m)
    }
}

impl<S: System + ?Sized> System for Reformulated<'_, S> {
    fn state_dim(&self) -> usize {
        self.inner.state_dim()
    }

    fn decision_dim(&self) -> usize {
        self.inner.decision_dim()
    }

    fn initial_state(&self) -> &[f64] {
        self.inner.initial_state()
    }

    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    fn relaxable(&self) -> bool {
        true
    }

    fn vector_field(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let (mut e, m) = self.basis();
        self.inner.vector_field(x, &e, t, out);
        let zero = out.to_vec();
        let mut fi = vec![0.0; out.len()];
        for i in 0..m {
            if alpha[i] == 0.0 {
                continue;
            }
            e[i] = 1.0;
            self.inner.vector_field(x, &e, t, &mut fi);
            e[i] = 0.0;
            for j in 0..out.len() {
                out[j] += alpha[i] * (fi[j] - zero[j]);
            }
        }
    }

    fn running_payoff(&self, x: &[f64], alpha: &[f64], t: f64) -> f64 {
        let (mut e, m) = self.basis();
        let zero = self.inner.running_payoff(x, &e, t);
        let mut acc = zero;
        for i in 0..m {
            if alpha[i] == 0.0 {
                continue;
            }
            e[i] = 1.0;
            acc += alpha[i] * (self.inner.running_payoff(x, &e, t) - zero);
            e[i] = 0.0;
        }
        acc
    }

    fn terminal_payoff(&self, x: &[f64]) -> f64 {
        self.inner.terminal_payoff(x)
    }

    fn jac_f_x(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let (mut e, m) = self.basis();
        self.inner.jac_f_x(x, &e, t, out);
        let zero = out.to_vec();
        let mut ji = vec![0.0; out.len()];
        for i in 0..m {
            if alpha[i] == 0.0 {
                continue;
            }
            e[i] = 1.0;
            self.inner.jac_f_x(x, &e, t, &mut ji);
            e[i] = 0.0;
            for j in 0..out.len() {
                out[j] += alpha[i] * (ji[j] - zero[j]);
            }
        }
    }

    fn jac_r_x(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let (mut e, m) = self.basis();
        self.inner.jac_r_x(x, &e, t, out);
        let zero = out.to_vec();
        let mut ji = vec![0.0; out.len()];
        for i in 0..m {
            if alpha[i] == 0.0 {
                continue;
            }
            e[i] = 1.0;
            self.inner.jac_r_x(x, &e, t, &mut ji);
            e[i] = 0.0;
            for j in 0..out.len() {
                out[j] += alpha[i] * (ji[j] - zero[j]);
            }
        }
    }

    fn jac_q_x(&self, x: &[f64], out: &mut [f64]) {
        self.inner.jac_q_x(x, out)
    }

    fn alpha_jacobians(&self) -> Option<&dyn AlphaJacobians> {
        Some(self)
    }
}

impl<S: System + ?Sized> AlphaJacobians for Reformulated<'_, S> {
    fn jac_f_alpha(&self, x: &[f64], _alpha: &[f64], t: f64, out: &mut [f64]) {
        let (mut e, m) = self.basis();
        let n = self.inner.state_dim();
        let mut zero = vec![0.0; n];
        let mut fi = vec![0.0; n];
        self.inner.vector_field(x, &e, t, &mut zero);
        for i in 0..m {
            e[i] = 1.0;
            self.inner.vector_field(x, &e, t, &mut fi);
            e[i] = 0.0;
            for j in 0..n {
                out[j * m + i] = fi[j] - zero[j];
            }
        }
    }

    fn jac_r_alpha(&self, x: &[f64], _alpha: &[f64], t: f64, out: &mut [f64]) {
        let (mut e, m) = self.basis();
        let zero = self.inner.running_payoff(x, &e, t);
        for i in 0..m {
            e[i] = 1.0;
            out[i] = self.inner.running_payoff(x, &e, t) - zero;
            e[i] = 0.0;
        }
    }
}

/// Central difference `[J(ᾱ + h·1ᵢ) − J(ᾱ − h·1ᵢ)] / 2h` on the relaxed system.
pub fn finite_difference_standard<S: System + ?Sized>(
    spec: &S,
    alpha_bar: &BinaryVector,
    i: usize,
    h_fd: f64,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<f64> {
    if !spec.relaxable() {
        return Err(Error::NotRelaxable);
    }
    check_entry(alpha_bar, i)?;
    if !(h_fd.is_finite() && h_fd > 0.0) {
        return Err(Error::InvalidParams(alloc::format!(
            "finite-difference step must be positive, got {h_fd}"
        )));
    }
    let mut probe = alpha_bar.to_reals();
    check_decision(spec, &probe)?;
    probe[i] += h_fd;
    let plus = payoff_unchecked(spec, &probe, grid, scheme)?;
    probe[i] -= 2.0 * h_fd;
    let minus = payoff_unchecked(spec, &probe, grid, scheme)?;
    Ok((plus - minus) / (2.0 * h_fd))
}

/// One-sided quotient of the ε-variational payoff toward `ᾱ ⊕ 1ᵢ`, negated
/// when `ᾱᵢ = 1`.
pub fn finite_difference_nonstandard<S: System + ?Sized>(
    spec: &S,
    alpha_bar: &BinaryVector,
    i: usize,
    eps: f64,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<f64> {
    check_entry(alpha_bar, i)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParams(alloc::format!(
            "epsilon must lie in (0, 1], got {eps}"
        )));
    }
    let dir = alpha_bar.flipped(i);
    let base_traj = integrate(spec, &alpha_bar.to_reals(), grid, scheme)?;
    let base = evaluate_payoff(spec, &base_traj, &alpha_bar.to_reals())?;
    let traj = integrate_variational(spec, alpha_bar, &dir, eps, grid, scheme)?;
    let varied = evaluate_variational_payoff(spec, &traj, alpha_bar, &dir, eps)?;
    let sign = if alpha_bar.get(i) { -1.0 } else { 1.0 };
    Ok(sign * (varied - base) / eps)
}

fn check_entry(alpha_bar: &BinaryVector, i: usize) -> Result<()> {
    if i < alpha_bar.len() {
        Ok(())
    } else {
        Err(Error::InvalidParams(alloc::format!(
            "entry {i} out of range for decision of length {}",
            alpha_bar.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::tests_support::Scalar;

    /// `ẋ = x + α₁³ + 2α₂`, `r = x²`, `x(0) = 1`.
    pub(crate) struct Bias;

    impl System for Bias {
        fn state_dim(&self) -> usize {
            1
        }
        fn decision_dim(&self) -> usize {
            2
        }
        fn initial_state(&self) -> &[f64] {
            &[1.0]
        }
        fn horizon(&self) -> f64 {
            1.0
        }
        fn relaxable(&self) -> bool {
            true
        }
        fn vector_field(&self, x: &[f64], a: &[f64], _: f64, out: &mut [f64]) {
            out[0] = x[0] + a[0] * a[0] * a[0] + 2.0 * a[1];
        }
        fn running_payoff(&self, x: &[f64], _: &[f64], _: f64) -> f64 {
            x[0] * x[0]
        }
        fn terminal_payoff(&self, _: &[f64]) -> f64 {
            0.0
        }
        fn jac_f_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
            out[0] = 1.0;
        }
        fn jac_r_x(&self, x: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
            out[0] = 2.0 * x[0];
        }
        fn jac_q_x(&self, _: &[f64], out: &mut [f64]) {
            out[0] = 0.0;
        }
    }

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 1001).unwrap()
    }

    #[test]
    fn forced_scalar_standard_entry() {
        let sys = Scalar::forced();
        let g = standard_derivative(&sys, &BinaryVector::zeros(1), &grid(), Scheme::Rk4).unwrap();
        assert!((g.entries[0] - (core::f64::consts::E - 2.0)).abs() < 1e-4);
        assert_eq!(g.kind, DerivativeKind::Standard);
    }

    #[test]
    fn decision_free_systems_have_zero_gradient() {
        let sys = Scalar::exp_growth();
        for a in [BinaryVector::zeros(1), BinaryVector::ones(1)] {
            let s = standard_derivative(&sys, &a, &grid(), Scheme::Euler).unwrap();
            let ns = nonstandard_derivative(&sys, &a, &grid(), Scheme::Euler).unwrap();
            assert_eq!(s.entries, vec![0.0]);
            assert_eq!(ns.entries, vec![0.0]);
            for eps in [1.0, 0.1, 0.01] {
                let q = finite_difference_nonstandard(&sys, &a, 0, eps, &grid(), Scheme::Euler)
                    .unwrap();
                assert_eq!(q, 0.0);
            }
            let fd = finite_difference_standard(&sys, &a, 0, 1e-4, &grid(), Scheme::Euler).unwrap();
            assert_eq!(fd, 0.0);
        }
    }

    #[test]
    fn bias_ratios() {
        let a = BinaryVector::ones(2);
        let s = standard_derivative(&Bias, &a, &grid(), Scheme::Rk4).unwrap();
        assert!((s.entries[0] / s.entries[1] - 1.5).abs() < 1e-3);
        let ns = nonstandard_derivative(&Bias, &a, &grid(), Scheme::Rk4).unwrap();
        assert!((ns.entries[0] / ns.entries[1] - 0.5).abs() < 1e-3);
        // fallback Jacobians agree with the analytic ratio as well
        let fd = finite_difference_standard(&Bias, &a, 1, 1e-4, &grid(), Scheme::Rk4).unwrap();
        assert!((fd - s.entries[1]).abs() < 1e-3);
    }

    #[test]
    fn nonstandard_quotient_converges() {
        let a = BinaryVector::ones(2);
        let ns = nonstandard_derivative(&Bias, &a, &grid(), Scheme::Rk4).unwrap();
        let mut last = f64::INFINITY;
        for eps in [0.1, 0.05, 0.025] {
            let q = finite_difference_nonstandard(&Bias, &a, 0, eps, &grid(), Scheme::Rk4).unwrap();
            let err = (q - ns.entries[0]).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-2 * ns.entries[0].abs().max(1.0));
    }

    #[test]
    fn reformulated_bias_is_linear() {
        let hat = reformulate(&Bias);
        let mut out = [0.0];
        hat.vector_field(&[0.5], &[0.3, 0.7], 0.0, &mut out);
        assert!((out[0] - (0.5 + 0.3 + 1.4)).abs() < 1e-15);
        let mut ja = [0.0; 2];
        hat.jac_f_alpha(&[0.5], &[0.0, 0.0], 0.0, &mut ja);
        assert_eq!(ja, [1.0, 2.0]);
    }

    #[test]
    fn non_relaxable_rejects_standard() {
        struct Binary;
        impl System for Binary {
            fn state_dim(&self) -> usize {
                1
            }
            fn decision_dim(&self) -> usize {
                1
            }
            fn initial_state(&self) -> &[f64] {
                &[0.0]
            }
            fn horizon(&self) -> f64 {
                1.0
            }
            fn relaxable(&self) -> bool {
                false
            }
            fn vector_field(&self, _: &[f64], a: &[f64], _: f64, out: &mut [f64]) {
                out[0] = if a[0] == 1.0 { 1.0 } else { -1.0 };
            }
            fn running_payoff(&self, x: &[f64], _: &[f64], _: f64) -> f64 {
                x[0]
            }
            fn terminal_payoff(&self, _: &[f64]) -> f64 {
                0.0
            }
            fn jac_f_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
                out[0] = 0.0;
            }
            fn jac_r_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
                out[0] = 1.0;
            }
            fn jac_q_x(&self, _: &[f64], out: &mut [f64]) {
                out[0] = 0.0;
            }
        }
        let a = BinaryVector::zeros(1);
        assert_eq!(
            standard_derivative(&Binary, &a, &grid(), Scheme::Euler),
            Err(Error::NotRelaxable)
        );
        assert!(finite_difference_standard(&Binary, &a, 0, 1e-3, &grid(), Scheme::Euler).is_err());
        // switching the field from −1 to +1 adds 2t to x, so dJ = ∫ 2t dt = 1
        let ns = nonstandard_derivative(&Binary, &a, &grid(), Scheme::Euler).unwrap();
        assert!((ns.entries[0] - 1.0).abs() < 1e-2);
        let g = reformulate(&Binary);
        let s = standard_derivative(&g, &a, &grid(), Scheme::Euler).unwrap();
        assert!((s.entries[0] - ns.entries[0]).abs() < 1e-12);
    }

    #[test]
    fn predicted_change_uses_displacement() {
        let mut g = Gradient::from_entries(DerivativeKind::Standard, vec![1.0, 2.0, 4.0]);
        g.base_point = BinaryVector::from_bits(&[1, 0, 0]).unwrap();
        let a = BinaryVector::from_bits(&[0, 1, 0]).unwrap();
        assert_eq!(g.predicted_change(&a), 1.0);
    }
}
