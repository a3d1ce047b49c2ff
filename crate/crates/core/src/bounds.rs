//! A posteriori suboptimality certificates and exhaustive structure checks.
//!
//! Payoffs are normalized by subtracting `J(ᾱ)`, so a certificate `ρ` states
//! `ρ·(J(α^OPT) − J(ᾱ)) ≤ J(α*) − J(ᾱ)` whenever the linearization over-estimates
//! the payoff everywhere.
//!
//! The exhaustive checks work on a payoff table indexed by mask (entry 0 in the
//! most significant bit, see [`BinaryVector::from_mask`]); the `*_from_table`
//! variants let callers fill the table in parallel.

use alloc::vec::Vec;

use crate::binary::BinaryVector;
use crate::derivative::{DerivativeKind, Gradient};
use crate::error::{Error, Result};
use crate::sysmodel::{payoff_binary, Scheme, System, TimeGrid};

/// Denominators below this magnitude certify `ᾱ` as optimal.
pub const DENOMINATOR_TOLERANCE: f64 = 1e-12;
pub const CONCAVITY_LIMIT: usize = 20;
pub const SUBMODULAR_LIMIT: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rho {
    Value(f64),
    /// The linearization predicts no change: no feasible ascent direction.
    Optimal,
}

impl Rho {
    pub fn value(self) -> Option<f64> {
        match self {
            Rho::Value(v) => Some(v),
            Rho::Optimal => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedSolution {
    pub alpha_bar: BinaryVector,
    pub alpha_star: BinaryVector,
    pub kind: DerivativeKind,
    /// `J(α*)`
    pub payoff: f64,
    /// `J(ᾱ)`
    pub base_payoff: f64,
    pub rho: Rho,
    /// `max(ρ, 0)`, or 1 under the optimal flag.
    pub rho_post: f64,
    pub alpha_post: BinaryVector,
    /// `J(alpha_post) = max(J(α*), J(ᾱ))`
    pub payoff_post: f64,
}

impl CertifiedSolution {
    /// Drops `ᾱ` as a post-processing candidate, for when it violates the
    /// constraints of the problem being solved.
    pub fn without_base_candidate(mut self) -> Self {
        self.alpha_post = self.alpha_star.clone();
        self.payoff_post = self.payoff;
        self
    }
}

/// Certifies `alpha_star`, the solution of the problem linearized by `grad`.
pub fn certify<S: System + ?Sized>(
    spec: &S,
    alpha_bar: &BinaryVector,
    grad: &Gradient,
    alpha_star: &BinaryVector,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<CertifiedSolution> {
    let payoff = payoff_binary(spec, alpha_star, grid, scheme)?;
    certify_with_payoff(alpha_bar, grad, alpha_star, payoff)
}

/// [`certify`] with `J(α*)` already known.
pub fn certify_with_payoff(
    alpha_bar: &BinaryVector,
    grad: &Gradient,
    alpha_star: &BinaryVector,
    payoff: f64,
) -> Result<CertifiedSolution> {
    let m = grad.len();
    for (what, found) in [("linearization point", alpha_bar.len()), ("solution", alpha_star.len())] {
        if found != m {
            return Err(Error::Dimension {
                what,
                expected: m,
                found,
            });
        }
    }
    if *alpha_bar != grad.base_point {
        return Err(Error::InvalidParams(
            "gradient was taken at a different linearization point".into(),
        ));
    }
    let base_payoff = grad.base_payoff;
    let denominator = grad.predicted_change(alpha_star);
    let (rho, rho_post) = if denominator.abs() < DENOMINATOR_TOLERANCE {
        (Rho::Optimal, 1.0)
    } else {
        let r = (payoff - base_payoff) / denominator;
        (Rho::Value(r), r.max(0.0))
    };
    let (alpha_post, payoff_post) = if payoff >= base_payoff {
        (alpha_star.clone(), payoff)
    } else {
        (alpha_bar.clone(), base_payoff)
    };
    Ok(CertifiedSolution {
        alpha_bar: alpha_bar.clone(),
        alpha_star: alpha_star.clone(),
        kind: grad.kind,
        payoff,
        base_payoff,
        rho,
        rho_post,
        alpha_post,
        payoff_post,
    })
}

fn guard(m: usize, limit: usize) -> Result<()> {
    if m > limit {
        Err(Error::EnumerationRefused { m, limit })
    } else {
        Ok(())
    }
}

/// `table[mask] = objective(from_mask(mask, m))` for every mask.
pub fn payoff_table<F>(objective: &mut F, m: usize, limit: usize) -> Result<Vec<f64>>
where
    F: FnMut(&BinaryVector) -> Result<f64>,
{
    guard(m, limit)?;
    (0..1u64 << m)
        .map(|mask| objective(&BinaryVector::from_mask(mask, m)))
        .collect()
}

fn check_table(table: &[f64], m: usize) -> Result<()> {
    if table.len() as u64 != 1u64 << m {
        return Err(Error::Dimension {
            what: "payoff table",
            expected: 1 << m,
            found: table.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcavityReport {
    pub holds: bool,
    /// Point with the largest `J(α) − J(ᾱ) − DJᵀ(α − ᾱ)` and that excess.
    pub worst: Option<(BinaryVector, f64)>,
}

/// Tests `DJ(ᾱ)ᵀ(α − ᾱ) ≥ J(α) − J(ᾱ)` at every binary `α`, within
/// `1e−7·(1 + |J(α)|)`.
pub fn check_concavity_inequality<S: System + ?Sized>(
    spec: &S,
    alpha_bar: &BinaryVector,
    grad: &Gradient,
    grid: &TimeGrid,
    scheme: Scheme,
) -> Result<ConcavityReport> {
    let m = grad.len();
    guard(m, CONCAVITY_LIMIT)?;
    if *alpha_bar != grad.base_point {
        return Err(Error::InvalidParams(
            "gradient was taken at a different linearization point".into(),
        ));
    }
    let mut objective = |a: &BinaryVector| payoff_binary(spec, a, grid, scheme);
    let table = payoff_table(&mut objective, m, CONCAVITY_LIMIT)?;
    concavity_from_table(grad, &table)
}

pub fn concavity_from_table(grad: &Gradient, table: &[f64]) -> Result<ConcavityReport> {
    let m = grad.len();
    guard(m, CONCAVITY_LIMIT)?;
    check_table(table, m)?;
    let base = grad.base_payoff;
    let mut holds = true;
    let mut worst: Option<(BinaryVector, f64)> = None;
    for (mask, &j) in table.iter().enumerate() {
        let alpha = BinaryVector::from_mask(mask as u64, m);
        let excess = (j - base) - grad.predicted_change(&alpha);
        if excess > 1e-7 * (1.0 + j.abs()) {
            holds = false;
        }
        if worst.as_ref().is_none_or(|(_, w)| excess > *w) {
            worst = Some((alpha, excess));
        }
    }
    Ok(ConcavityReport { holds, worst })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmodularReport {
    pub holds: bool,
    /// Largest second difference `J(X+i+j) − J(X+i) − J(X+j) + J(X)` as
    /// `(X, i, j, value)`.
    pub worst: Option<(BinaryVector, usize, usize, f64)>,
}

/// Diminishing returns: `J(X ∪ {s}) − J(X) ≥ J(Y ∪ {s}) − J(Y)` for `X ⊂ Y`,
/// `s ∉ Y`, checked through all pairwise second differences.
pub fn check_submodular<F>(payoff: &mut F, m: usize) -> Result<bool>
where
    F: FnMut(&BinaryVector) -> Result<f64>,
{
    let table = payoff_table(payoff, m, SUBMODULAR_LIMIT)?;
    Ok(submodular_from_table(&table, m)?.holds)
}

pub fn submodular_from_table(table: &[f64], m: usize) -> Result<SubmodularReport> {
    guard(m, SUBMODULAR_LIMIT)?;
    check_table(table, m)?;
    let tol = 1e-9 * (1.0 + table.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    let bit = |i: usize| 1usize << (m - 1 - i);
    let mut holds = true;
    let mut worst: Option<(BinaryVector, usize, usize, f64)> = None;
    for x in 0..table.len() {
        for i in 0..m {
            if x & bit(i) != 0 {
                continue;
            }
            for j in i + 1..m {
                if x & bit(j) != 0 {
                    continue;
                }
                let d = table[x | bit(i) | bit(j)] - table[x | bit(i)] - table[x | bit(j)] + table[x];
                if d > tol {
                    holds = false;
                }
                if worst.as_ref().is_none_or(|w| d > w.3) {
                    worst = Some((BinaryVector::from_mask(x as u64, m), i, j, d));
                }
            }
        }
    }
    Ok(SubmodularReport { holds, worst })
}

/// `J(X) ≤ J(Y)` whenever `X ⊂ Y`, via single-element increments.
pub fn check_monotone<F>(payoff: &mut F, m: usize) -> Result<bool>
where
    F: FnMut(&BinaryVector) -> Result<f64>,
{
    let table = payoff_table(payoff, m, SUBMODULAR_LIMIT)?;
    monotone_from_table(&table, m)
}

pub fn monotone_from_table(table: &[f64], m: usize) -> Result<bool> {
    guard(m, SUBMODULAR_LIMIT)?;
    check_table(table, m)?;
    let tol = 1e-9 * (1.0 + table.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    Ok((0..table.len()).all(|x| {
        (0..m)
            .map(|i| 1usize << i)
            .filter(|b| x & b == 0)
            .all(|b| table[x | b] >= table[x] - tol)
    }))
}
