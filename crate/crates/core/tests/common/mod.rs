//! Random test systems with hand-coded derivatives.
#![allow(dead_code)]

use combidyn_core::{AlphaJacobians, System};
use rand::Rng;

/// ```text
/// fᵢ = Σⱼ Aᵢⱼxⱼ + Fᵢ sin xᵢ + τᵢt
///      + Σₖ (Bᵢₖαₖ + Cᵢₖαₖ² + Dᵢₖαₖxᵢ + Eᵢₖe^{−αₖ}) + Gᵢ α₀α₁
/// r  = Σᵢ (wᵢxᵢ + vᵢxᵢ²) + Σₖ (eₖαₖ + gₖαₖx₀ + hₖαₖ²)
/// q  = Σᵢ (sᵢxᵢ + uᵢxᵢ²)
/// ```
#[derive(Debug, Clone)]
pub struct Poly {
    pub n: usize,
    pub m: usize,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub a: Vec<f64>,
    pub f_sin: Vec<f64>,
    pub tau: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    pub e_exp: Vec<f64>,
    pub g_cross: Vec<f64>,
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub e: Vec<f64>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    pub s: Vec<f64>,
    pub u: Vec<f64>,
    pub relaxable: bool,
    pub analytic_alpha: bool,
}

#[derive(Debug, Clone, Copy)]
pub enum Shape {
    /// Every term may be present.
    General,
    /// `f` and `r` affine in `α`.
    Affine,
    /// Each term depends on a single entry of `α`, not necessarily affinely.
    Additive,
    /// Linear field, concave separable running and terminal payoffs.
    Concave,
}

fn fill<R: Rng>(rng: &mut R, len: usize, scale: f64) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-scale..=scale)).collect()
}

impl Poly {
    pub fn random<R: Rng>(rng: &mut R, n: usize, m: usize, shape: Shape) -> Self {
        let mut p = Poly {
            n,
            m,
            x0: fill(rng, n, 0.5),
            horizon: 1.0,
            a: fill(rng, n * n, 0.6),
            f_sin: fill(rng, n, 0.4),
            tau: fill(rng, n, 0.5),
            b: fill(rng, n * m, 1.0),
            c: fill(rng, n * m, 0.5),
            d: fill(rng, n * m, 0.3),
            e_exp: fill(rng, n * m, 0.5),
            g_cross: fill(rng, n, 0.5),
            w: fill(rng, n, 1.0),
            v: fill(rng, n, 0.5),
            e: fill(rng, m, 0.5),
            g: fill(rng, m, 0.5),
            h: fill(rng, m, 0.3),
            s: fill(rng, n, 1.0),
            u: fill(rng, n, 0.3),
            relaxable: true,
            analytic_alpha: true,
        };
        match shape {
            Shape::General => {}
            Shape::Affine => {
                p.c.fill(0.0);
                p.e_exp.fill(0.0);
                p.g_cross.fill(0.0);
                p.h.fill(0.0);
            }
            Shape::Additive => {
                p.g_cross.fill(0.0);
            }
            Shape::Concave => {
                p.f_sin.fill(0.0);
                p.c.fill(0.0);
                p.d.fill(0.0);
                p.e_exp.fill(0.0);
                p.g_cross.fill(0.0);
                p.g.fill(0.0);
                for v in p.v.iter_mut().chain(&mut p.u).chain(&mut p.h) {
                    *v = -v.abs();
                }
            }
        }
        if m < 2 {
            p.g_cross.fill(0.0);
        }
        p
    }

    pub fn binary_only(mut self) -> Self {
        self.relaxable = false;
        self
    }

    pub fn without_alpha_jacobians(mut self) -> Self {
        self.analytic_alpha = false;
        self
    }

    fn cross(&self, alpha: &[f64]) -> f64 {
        if self.m >= 2 {
            alpha[0] * alpha[1]
        } else {
            0.0
        }
    }
}

impl System for Poly {
    fn state_dim(&self) -> usize {
        self.n
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
        self.relaxable
    }

    fn vector_field(&self, x: &[f64], alpha: &[f64], t: f64, out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        for i in 0..n {
            let mut v = self.f_sin[i] * x[i].sin() + self.tau[i] * t + self.g_cross[i] * self.cross(alpha);
            for j in 0..n {
                v += self.a[i * n + j] * x[j];
            }
            for k in 0..m {
                let ak = alpha[k];
                v += self.b[i * m + k] * ak
                    + self.c[i * m + k] * ak * ak
                    + self.d[i * m + k] * ak * x[i]
                    + self.e_exp[i * m + k] * (-ak).exp();
            }
            out[i] = v;
        }
    }

    fn running_payoff(&self, x: &[f64], alpha: &[f64], _t: f64) -> f64 {
        let mut r = 0.0;
        for i in 0..self.n {
            r += self.w[i] * x[i] + self.v[i] * x[i] * x[i];
        }
        for k in 0..self.m {
            let ak = alpha[k];
            r += self.e[k] * ak + self.g[k] * ak * x[0] + self.h[k] * ak * ak;
        }
        r
    }

    fn terminal_payoff(&self, x: &[f64]) -> f64 {
        (0..self.n).map(|i| self.s[i] * x[i] + self.u[i] * x[i] * x[i]).sum()
    }

    fn jac_f_x(&self, x: &[f64], alpha: &[f64], _t: f64, out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        out.copy_from_slice(&self.a);
        for i in 0..n {
            let mut diag = self.f_sin[i] * x[i].cos();
            for k in 0..m {
                diag += self.d[i * m + k] * alpha[k];
            }
            out[i * n + i] += diag;
        }
    }

    fn jac_r_x(&self, x: &[f64], alpha: &[f64], _t: f64, out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = self.w[i] + 2.0 * self.v[i] * x[i];
        }
        out[0] += (0..self.m).map(|k| self.g[k] * alpha[k]).sum::<f64>();
    }

    fn jac_q_x(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = self.s[i] + 2.0 * self.u[i] * x[i];
        }
    }

    fn alpha_jacobians(&self) -> Option<&dyn AlphaJacobians> {
        self.analytic_alpha.then_some(self as &dyn AlphaJacobians)
    }
}

impl AlphaJacobians for Poly {
    fn jac_f_alpha(&self, x: &[f64], alpha: &[f64], _t: f64, out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        for i in 0..n {
            for k in 0..m {
                let ak = alpha[k];
                out[i * m + k] = self.b[i * m + k] + 2.0 * self.c[i * m + k] * ak + self.d[i * m + k] * x[i]
                    - self.e_exp[i * m + k] * (-ak).exp();
            }
            if m >= 2 {
                out[i * m] += self.g_cross[i] * alpha[1];
                out[i * m + 1] += self.g_cross[i] * alpha[0];
            }
        }
    }

    fn jac_r_alpha(&self, x: &[f64], alpha: &[f64], _t: f64, out: &mut [f64]) {
        for k in 0..self.m {
            out[k] = self.e[k] + self.g[k] * x[0] + 2.0 * self.h[k] * alpha[k];
        }
    }
}

/// `ẋ = x + α₁³ + 2α₂`, `r = x²`, `q = 0`, `x(0) = 1`, `T = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Bias;

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
        out[0] = x[0] + a[0].powi(3) + 2.0 * a[1];
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
    fn alpha_jacobians(&self) -> Option<&dyn AlphaJacobians> {
        Some(self)
    }
}

impl AlphaJacobians for Bias {
    fn jac_f_alpha(&self, _: &[f64], a: &[f64], _: f64, out: &mut [f64]) {
        out[0] = 3.0 * a[0] * a[0];
        out[1] = 2.0;
    }
    fn jac_r_alpha(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// `ẋ₁ = x₁ + α₁ + 2`, `ẋ₂ = x₂ + α₂`, `r = sign·(x₁ − x₂)²`, `x(0) = 0`, `T = 1`.
#[derive(Debug, Clone, Copy)]
pub struct Spread {
    pub sign: f64,
}

impl System for Spread {
    fn state_dim(&self) -> usize {
        2
    }
    fn decision_dim(&self) -> usize {
        2
    }
    fn initial_state(&self) -> &[f64] {
        &[0.0, 0.0]
    }
    fn horizon(&self) -> f64 {
        1.0
    }
    fn relaxable(&self) -> bool {
        true
    }
    fn vector_field(&self, x: &[f64], a: &[f64], _: f64, out: &mut [f64]) {
        out[0] = x[0] + a[0] + 2.0;
        out[1] = x[1] + a[1];
    }
    fn running_payoff(&self, x: &[f64], _: &[f64], _: f64) -> f64 {
        self.sign * (x[0] - x[1]).powi(2)
    }
    fn terminal_payoff(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn jac_f_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out.copy_from_slice(&[1.0, 0.0, 0.0, 1.0]);
    }
    fn jac_r_x(&self, x: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        let d = 2.0 * self.sign * (x[0] - x[1]);
        out[0] = d;
        out[1] = -d;
    }
    fn jac_q_x(&self, _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// `ẋ = x + Σ e^{−αᵢ}`, `r = x`, `q = 0`, `x(0) = x0`, `T = 1`.
#[derive(Debug, Clone)]
pub struct ExpSum {
    pub m: usize,
    pub x0: [f64; 1],
}

impl System for ExpSum {
    fn state_dim(&self) -> usize {
        1
    }
    fn decision_dim(&self) -> usize {
        self.m
    }
    fn initial_state(&self) -> &[f64] {
        &self.x0
    }
    fn horizon(&self) -> f64 {
        1.0
    }
    fn relaxable(&self) -> bool {
        true
    }
    fn vector_field(&self, x: &[f64], a: &[f64], _: f64, out: &mut [f64]) {
        out[0] = x[0] + a.iter().map(|v| (-v).exp()).sum::<f64>();
    }
    fn running_payoff(&self, x: &[f64], _: &[f64], _: f64) -> f64 {
        x[0]
    }
    fn terminal_payoff(&self, _: &[f64]) -> f64 {
        0.0
    }
    fn jac_f_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = 1.0;
    }
    fn jac_r_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = 1.0;
    }
    fn jac_q_x(&self, _: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values[1..n - 1].iter().sum();
    h * (inner + 0.5 * (values[0] + values[n - 1]))
}

/// Every binary vector of length `m`, in lexicographic order.
pub fn all_binary(m: usize) -> Vec<combidyn_core::BinaryVector> {
    (0..1u64 << m).map(|mask| combidyn_core::BinaryVector::from_mask(mask, m)).collect()
}

/// `ẋ = Ax + Bα`, `r = wᵀx + eᵀα`, `q = sᵀx`.
#[derive(Debug, Clone)]
pub struct Affine {
    pub n: usize,
    pub m: usize,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    pub e: Vec<f64>,
    pub s: Vec<f64>,
    pub x0: Vec<f64>,
    pub horizon: f64,
}

impl Affine {
    pub fn zero(n: usize, m: usize) -> Self {
        Affine {
            n,
            m,
            a: vec![0.0; n * n],
            b: vec![0.0; n * m],
            w: vec![0.0; n],
            e: vec![0.0; m],
            s: vec![0.0; n],
            x0: vec![0.0; n],
            horizon: 1.0,
        }
    }

    /// Scalar `ẋ = a·x + b·α₁`, `r = w·x + e·α₁`, `q = s·x`.
    pub fn scalar(a: f64, b: f64, w: f64, e: f64, s: f64, x0: f64) -> Self {
        Affine {
            a: vec![a],
            b: vec![b],
            w: vec![w],
            e: vec![e],
            s: vec![s],
            x0: vec![x0],
            ..Affine::zero(1, 1)
        }
    }
}

impl System for Affine {
    fn state_dim(&self) -> usize {
        self.n
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
    fn vector_field(&self, x: &[f64], alpha: &[f64], _: f64, out: &mut [f64]) {
        for i in 0..self.n {
            out[i] = (0..self.n).map(|j| self.a[i * self.n + j] * x[j]).sum::<f64>()
                + (0..self.m).map(|k| self.b[i * self.m + k] * alpha[k]).sum::<f64>();
        }
    }
    fn running_payoff(&self, x: &[f64], alpha: &[f64], _: f64) -> f64 {
        x.iter().zip(&self.w).map(|(a, b)| a * b).sum::<f64>()
            + alpha.iter().zip(&self.e).map(|(a, b)| a * b).sum::<f64>()
    }
    fn terminal_payoff(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.s).map(|(a, b)| a * b).sum()
    }
    fn jac_f_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.a);
    }
    fn jac_r_x(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.w);
    }
    fn jac_q_x(&self, _: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.s);
    }
    fn alpha_jacobians(&self) -> Option<&dyn AlphaJacobians> {
        Some(self)
    }
}

impl AlphaJacobians for Affine {
    fn jac_f_alpha(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.b);
    }
    fn jac_r_alpha(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out.copy_from_slice(&self.e);
    }
}

/// One random concave certification trial.
#[derive(Debug, Clone)]
pub struct CertificateTrial {
    pub constraint: &'static str,
    pub m: usize,
    pub certificate: combidyn_core::bounds::CertifiedSolution,
    /// `J(α^OPT)` over the same feasible set.
    pub optimum: f64,
    pub concavity_holds: bool,
}

impl CertificateTrial {
    /// `J_norm(α_*) − ρ_*·J_norm(α^OPT)`; the certificate is sound when this is ≥ 0.
    pub fn slack(&self) -> f64 {
        let c = &self.certificate;
        (c.payoff_post - c.base_payoff) - c.rho_post * (self.optimum - c.base_payoff)
    }
}

/// Random constraint of the given family that `alpha_bar` satisfies.
pub fn feasible_constraint<R: Rng>(
    rng: &mut R,
    alpha_bar: &combidyn_core::BinaryVector,
    family: usize,
) -> (&'static str, combidyn_core::combisolve::ConstraintSet) {
    use combidyn_core::combisolve::ConstraintSet;
    let m = alpha_bar.len();
    let ones = alpha_bar.count_ones();
    match family % 3 {
        0 => {
            let k_min = rng.random_range(0..=ones);
            let k_max = rng.random_range(ones..=m);
            ("l0", ConstraintSet::L0Band { k_min, k_max })
        }
        1 => {
            let rows = rng.random_range(1..=4);
            let mut q = Vec::new();
            let mut r = Vec::new();
            for _ in 0..rows {
                let a = rng.random_range(0..m);
                let b = rng.random_range(a..m);
                let mut row = vec![0i64; m];
                row[a..=b].fill(1);
                let used = (a..=b).filter(|&i| alpha_bar.get(i)).count() as i64;
                q.push(row);
                r.push(used + rng.random_range(0..=1));
            }
            let q = combidyn_core::matrix::DenseMatrix::from_rows(&q).expect("rectangular rows");
            ("tu", ConstraintSet::Tu { q, r })
        }
        _ => {
            let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
            let used: f64 = alpha_bar.ones_indices().map(|i| weights[i]).sum();
            let capacity = used + rng.random_range(0.0..1.0);
            ("knapsack", ConstraintSet::Knapsack { weights, capacity })
        }
    }
}

/// Linear field, separable concave payoffs, random feasible constraint. The
/// linearized problem is solved exactly (knapsack instances by enumeration).
pub fn concave_trial(seed: u64, family: usize) -> combidyn_core::Result<CertificateTrial> {
    use combidyn_core::bounds::{certify_with_payoff, concavity_from_table, payoff_table, CONCAVITY_LIMIT};
    use combidyn_core::combisolve::{solve_bruteforce, solve_l0, solve_tu, ConstraintSet};
    use combidyn_core::derivative::standard_derivative;
    use combidyn_core::sysmodel::payoff_binary;
    use combidyn_core::{BinaryVector, Scheme, TimeGrid};
    use rand::SeedableRng;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=12);
    let p = Poly::random(&mut rng, n, m, Shape::Concave);
    let alpha_bar = BinaryVector::from_bools((0..m).map(|_| rng.random_bool(0.5)).collect());
    let (name, set) = feasible_constraint(&mut rng, &alpha_bar, family);
    let grid = TimeGrid::for_system(&p, 31)?;
    let scheme = Scheme::Euler;
    let grad = standard_derivative(&p, &alpha_bar, &grid, scheme)?;
    let alpha_star = match &set {
        ConstraintSet::L0Band { k_min, k_max } => solve_l0(&grad, *k_min, *k_max)?,
        ConstraintSet::Tu { q, r } => solve_tu(&grad, q, r)?,
        _ => {
            let mut linear = |a: &BinaryVector| Ok(a.dot(&grad.entries));
            solve_bruteforce(&mut linear, &set, m)?.0
        }
    };
    let mut objective = |a: &BinaryVector| payoff_binary(&p, a, &grid, scheme);
    let table = payoff_table(&mut objective, m, CONCAVITY_LIMIT)?;
    let concavity_holds = concavity_from_table(&grad, &table)?.holds;
    let payoff = table[alpha_star.to_mask() as usize];
    let certificate = certify_with_payoff(&alpha_bar, &grad, &alpha_star, payoff)?;
    let mut lookup = |a: &BinaryVector| Ok(table[a.to_mask() as usize]);
    let (_, optimum) = solve_bruteforce(&mut lookup, &set, m)?;
    Ok(CertificateTrial {
        constraint: name,
        m,
        certificate,
        optimum,
        concavity_holds,
    })
}
