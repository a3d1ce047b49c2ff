//! Solvers for the linearized 0–1 program `max DJ(ᾱ)ᵀα` under constraints,
//! plus exhaustive and greedy baselines on arbitrary objectives.
//!
//! Nothing here integrates a dynamical system; objectives for the baselines
//! are passed in as closures.

use alloc::format;
use alloc::vec::Vec;
use core::ops::Range;

use crate::binary::BinaryVector;
use crate::derivative::Gradient;
use crate::error::{Error, Result};
use crate::lp::LpProblem;
use crate::matrix::DenseMatrix;

/// Largest decision dimension the exhaustive solver will enumerate.
pub const MAX_ENUMERATION: usize = 24;

/// Largest row or column count for which total unimodularity is verified.
pub const TU_CHECK_LIMIT: usize = 8;

const SNAP_TOLERANCE: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    /// `k_min ≤ ‖α‖₀ ≤ k_max`
    L0Band { k_min: usize, k_max: usize },
    /// `Qα ≤ r` with `Q` totally unimodular.
    Tu { q: DenseMatrix<i64>, r: Vec<i64> },
    /// `wᵀα ≤ capacity`
    Knapsack { weights: Vec<f64>, capacity: f64 },
    /// `α` must be one of the listed vectors.
    Explicit(Vec<BinaryVector>),
}

impl ConstraintSet {
    /// No constraint beyond `α ∈ {0,1}^m`.
    pub fn unconstrained(m: usize) -> Self {
        ConstraintSet::L0Band { k_min: 0, k_max: m }
    }

    /// Checks invariants against decision dimension `m`, including an
    /// exhaustive TU test for small matrices.
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            ConstraintSet::L0Band { k_min, k_max } => {
                if k_min > k_max || *k_max > m {
                    return Err(Error::Constraint(format!(
                        "l0 band needs 0 <= k_min <= k_max <= m, got k_min={k_min}, k_max={k_max}, m={m}"
                    )));
                }
            }
            ConstraintSet::Tu { q, r } => {
                if q.rows() != r.len() {
                    return Err(Error::Dimension {
                        what: "TU right-hand side",
                        expected: q.rows(),
                        found: r.len(),
                    });
                }
                if q.rows() > 0 && q.cols() != m {
                    return Err(Error::Dimension {
                        what: "TU matrix columns",
                        expected: m,
                        found: q.cols(),
                    });
                }
                if q.rows() <= TU_CHECK_LIMIT && q.cols() <= TU_CHECK_LIMIT && !is_totally_unimodular(q) {
                    return Err(Error::Constraint("matrix is not totally unimodular".into()));
                }
            }
            ConstraintSet::Knapsack { weights, capacity } => {
                if weights.len() != m {
                    return Err(Error::Dimension {
                        what: "knapsack weights",
                        expected: m,
                        found: weights.len(),
                    });
                }
                check_knapsack(weights, *capacity)?;
            }
            ConstraintSet::Explicit(list) => {
                if let Some(bad) = list.iter().find(|a| a.len() != m) {
                    return Err(Error::Dimension {
                        what: "admissible vector",
                        expected: m,
                        found: bad.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, alpha: &BinaryVector) -> bool {
        match self {
            ConstraintSet::L0Band { k_min, k_max } => {
                let k = alpha.count_ones();
                *k_min <= k && k <= *k_max
            }
            ConstraintSet::Tu { q, r } => (0..q.rows()).all(|i| row_dot(q.row(i), alpha) <= r[i]),
            ConstraintSet::Knapsack { weights, capacity } => alpha.dot(weights) <= *capacity,
            ConstraintSet::Explicit(list) => list.contains(alpha),
        }
    }

    /// Whether `alpha` may still be extended by switching entries on. Rows of
    /// a TU system with a negative entry are not checked, nor is the lower end
    /// of an l0 band.
    fn extendable(&self, alpha: &BinaryVector) -> bool {
        match self {
            ConstraintSet::L0Band { k_max, .. } => alpha.count_ones() <= *k_max,
            ConstraintSet::Tu { q, r } => (0..q.rows())
                .filter(|&i| q.row(i).iter().all(|&v| v >= 0))
                .all(|i| row_dot(q.row(i), alpha) <= r[i]),
            ConstraintSet::Knapsack { .. } => self.is_feasible(alpha),
            ConstraintSet::Explicit(list) => list.iter().any(|a| alpha.is_subset_of(a)),
        }
    }
}

fn row_dot(row: &[i64], alpha: &BinaryVector) -> i64 {
    row.iter().zip(alpha.iter()).filter(|(_, b)| *b).map(|(v, _)| v).sum()
}

fn check_knapsack(weights: &[f64], capacity: f64) -> Result<()> {
    if !(capacity >= 0.0) {
        return Err(Error::Constraint(format!("knapsack capacity must be >= 0, got {capacity}")));
    }
    if let Some(w) = weights.iter().find(|w| !(**w >= 0.0)) {
        return Err(Error::Constraint(format!("knapsack weights must be >= 0, got {w}")));
    }
    Ok(())
}

/// Exhaustive determinant test over all square submatrices. Entries outside
/// `{−1, 0, 1}` fail immediately.
pub fn is_totally_unimodular(q: &DenseMatrix<i64>) -> bool {
    if q.as_slice().iter().any(|v| v.abs() > 1) {
        return false;
    }
    let (l, m) = (q.rows(), q.cols());
    let row_sets: Vec<Vec<usize>> = subsets(l);
    let col_sets: Vec<Vec<usize>> = subsets(m);
    let mut buf = Vec::new();
    for rows in &row_sets {
        for cols in col_sets.iter().filter(|c| c.len() == rows.len()) {
            buf.clear();
            for &i in rows {
                for &j in cols {
                    buf.push(i128::from(q.get(i, j)));
                }
            }
            if bareiss_det(&mut buf, rows.len()).abs() > 1 {
                return false;
            }
        }
    }
    true
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|mask| (0..n).filter(|i| mask >> i & 1 == 1).collect())
        .collect()
}

/// Fraction-free Gaussian elimination; exact for integer matrices.
fn bareiss_det(a: &mut [i128], k: usize) -> i128 {
    let mut sign = 1;
    let mut prev = 1i128;
    for p in 0..k {
        if a[p * k + p] == 0 {
            let Some(swap) = (p + 1..k).find(|&r| a[r * k + p] != 0) else {
                return 0;
            };
            for c in 0..k {
                a.swap(p * k + c, swap * k + c);
            }
            sign = -sign;
        }
        for i in p + 1..k {
            for j in p + 1..k {
                a[i * k + j] = (a[i * k + j] * a[p * k + p] - a[i * k + p] * a[p * k + j]) / prev;
            }
        }
        prev = a[p * k + p];
    }
    sign * a[k * k - 1]
}

/// Indices sorted by descending entry; ties keep the lower index first.
fn descending_order(entries: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..entries.len()).collect();
    order.sort_by(|&a, &b| entries[b].total_cmp(&entries[a]));
    order
}

/// Sorting solution of the l0-band problem: the `k_min` largest entries are
/// switched on, then further entries up to rank `k_max` while strictly
/// positive.
pub fn solve_l0(grad: &Gradient, k_min: usize, k_max: usize) -> Result<BinaryVector> {
    let m = grad.len();
    ConstraintSet::L0Band { k_min, k_max }.validate(m)?;
    let mut alpha = BinaryVector::zeros(m);
    for (rank, &i) in descending_order(&grad.entries).iter().enumerate().take(k_max) {
        if rank >= k_min && grad.entries[i] <= 0.0 {
            break;
        }
        alpha.set(i, true);
    }
    Ok(alpha)
}

/// Solves the LP relaxation over `Qα ≤ r, α ∈ [0,1]^m` and snaps the optimal
/// vertex, which is integral when `Q` is totally unimodular.
pub fn solve_tu(grad: &Gradient, q: &DenseMatrix<i64>, r: &[i64]) -> Result<BinaryVector> {
    let m = grad.len();
    if q.rows() != r.len() {
        return Err(Error::Dimension {
            what: "TU right-hand side",
            expected: q.rows(),
            found: r.len(),
        });
    }
    if q.rows() > 0 && q.cols() != m {
        return Err(Error::Dimension {
            what: "TU matrix columns",
            expected: m,
            found: q.cols(),
        });
    }
    let rows = DenseMatrix::from_row_major(
        q.rows(),
        if q.rows() > 0 { q.cols() } else { m },
        q.as_slice().iter().map(|&v| v as f64).collect(),
    )?;
    let rhs = r.iter().map(|&v| v as f64).collect();
    let solution = LpProblem::new(grad.entries.clone(), rows, rhs)?.solve()?;
    let mut alpha = BinaryVector::zeros(m);
    for (index, &value) in solution.x.iter().enumerate() {
        if (value - 1.0).abs() <= SNAP_TOLERANCE {
            alpha.set(index, true);
        } else if value.abs() > SNAP_TOLERANCE {
            return Err(Error::TuViolation { index, value });
        }
    }
    Ok(alpha)
}

/// Ratio greedy for `max DJᵀα s.t. wᵀα ≤ capacity`, compared against the best
/// single item; at least half the knapsack optimum. Entries with a
/// non-positive derivative stay off.
pub fn solve_knapsack(grad: &Gradient, weights: &[f64], capacity: f64) -> Result<BinaryVector> {
    let m = grad.len();
    if weights.len() != m {
        return Err(Error::Dimension {
            what: "knapsack weights",
            expected: m,
            found: weights.len(),
        });
    }
    check_knapsack(weights, capacity)?;
    let values = &grad.entries;
    let mut items: Vec<usize> = (0..m).filter(|&i| values[i] > 0.0).collect();
    let ratio = |i: usize| {
        if weights[i] == 0.0 {
            f64::INFINITY
        } else {
            values[i] / weights[i]
        }
    };
    items.sort_by(|&a, &b| ratio(b).total_cmp(&ratio(a)));

    let mut packed = BinaryVector::zeros(m);
    let mut load = 0.0;
    let mut packed_value = 0.0;
    for &i in &items {
        if load + weights[i] <= capacity {
            load += weights[i];
            packed_value += values[i];
            packed.set(i, true);
        }
    }
    let single = items
        .iter()
        .copied()
        .filter(|&i| weights[i] <= capacity)
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if values[b] >= values[i] => Some(b),
            _ => Some(i),
        });
    match single {
        Some(i) if values[i] > packed_value => Ok(BinaryVector::indicator(m, [i])),
        _ => Ok(packed),
    }
}

/// Dispatches the linearized problem to the solver matching the constraint
/// type. Explicit lists are searched exhaustively.
pub fn solve_linear(grad: &Gradient, constraints: &ConstraintSet) -> Result<BinaryVector> {
    constraints.validate(grad.len())?;
    match constraints {
        ConstraintSet::L0Band { k_min, k_max } => solve_l0(grad, *k_min, *k_max),
        ConstraintSet::Tu { q, r } => solve_tu(grad, q, r),
        ConstraintSet::Knapsack { weights, capacity } => solve_knapsack(grad, weights, *capacity),
        ConstraintSet::Explicit(_) => {
            let mut linear = |a: &BinaryVector| Ok(a.dot(&grad.entries));
            solve_bruteforce(&mut linear, constraints, grad.len()).map(|(a, _)| a)
        }
    }
}

/// Best of two candidates: higher value, then lexicographically smaller.
pub fn better(
    a: Option<(BinaryVector, f64)>,
    b: Option<(BinaryVector, f64)>,
) -> Option<(BinaryVector, f64)> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
                Some(b)
            } else {
                Some(a)
            }
        }
    }
}

fn check_enumerable(m: usize) -> Result<()> {
    if m > MAX_ENUMERATION {
        Err(Error::EnumerationRefused {
            m,
            limit: MAX_ENUMERATION,
        })
    } else {
        Ok(())
    }
}

/// Exhaustive search over the masks in `masks` (entry 0 is the most
/// significant bit), returning the best feasible point, if any. Ties go to the
/// lexicographically smallest vector. Disjoint ranges can be searched in
/// parallel and merged with [`better`].
pub fn bruteforce_range<F>(
    objective: &mut F,
    constraints: &ConstraintSet,
    m: usize,
    masks: Range<u64>,
) -> Result<Option<(BinaryVector, f64)>>
where
    F: FnMut(&BinaryVector) -> Result<f64>,
{
    check_enumerable(m)?;
    let mut best: Option<(BinaryVector, f64)> = None;
    for mask in masks {
        let alpha = BinaryVector::from_mask(mask, m);
        if !constraints.is_feasible(&alpha) {
            continue;
        }
        let value = objective(&alpha)?;
        if best.as_ref().is_none_or(|(_, v)| value > *v) {
            best = Some((alpha, value));
        }
    }
    Ok(best)
}

/// Exact maximizer of `objective` over the feasible binary vectors.
pub fn solve_bruteforce<F>(
    objective: &mut F,
    constraints: &ConstraintSet,
    m: usize,
) -> Result<(BinaryVector, f64)>
where
    F: FnMut(&BinaryVector) -> Result<f64>,
{
    constraints.validate(m)?;
    let best = if let ConstraintSet::Explicit(list) = constraints {
        let mut sorted = list.clone();
        sorted.sort();
        sorted.dedup();
        let mut best = None;
        for alpha in sorted {
            let value = objective(&alpha)?;
            best = better(best, Some((alpha, value)));
        }
        best
    } else {
        check_enumerable(m)?;
        bruteforce_range(objective, constraints, m, 0..1u64 << m)?
    };
    best.ok_or(Error::Infeasible)
}

/// Greedy ascent from all-zeros: repeatedly switches on the entry with the
/// largest payoff increment among those that keep the point extendable, until
/// no increment is positive. An l0 band forces additions up to `k_min` and
/// stops at `k_max`.
pub fn solve_greedy<F>(objective: &mut F, constraints: &ConstraintSet, m: usize) -> Result<BinaryVector>
where
    F: FnMut(&BinaryVector) -> Result<f64>,
{
    constraints.validate(m)?;
    let (k_min, k_max) = match constraints {
        ConstraintSet::L0Band { k_min, k_max } => (*k_min, *k_max),
        _ => (0, m),
    };
    let mut alpha = BinaryVector::zeros(m);
    let mut current = objective(&alpha)?;
    for count in 0..k_max {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..m {
            if alpha.get(i) {
                continue;
            }
            let candidate = alpha.flipped(i);
            if !constraints.extendable(&candidate) {
                continue;
            }
            let value = objective(&candidate)?;
            if best.is_none_or(|(_, v)| value > v) {
                best = Some((i, value));
            }
        }
        match best {
            Some((i, value)) if value > current || count < k_min => {
                alpha.set(i, true);
                current = value;
            }
            _ => break,
        }
    }
    Ok(alpha)
}
