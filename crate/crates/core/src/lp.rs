//! Dense bounded-variable primal simplex for `max cᵀx s.t. Ax ≤ b, 0 ≤ x ≤ 1`.
//!
//! Bland's rule is used for both the entering and the leaving choice, so the
//! method terminates on degenerate problems. Rows with a negative right-hand
//! side get an artificial variable and a phase-1 objective.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

const TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100_000;

/// `max objectiveᵀx` subject to `rows · x ≤ rhs` and `x ∈ [0, 1]^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    pub rows: DenseMatrix<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>, rows: DenseMatrix<f64>, rhs: Vec<f64>) -> Result<Self> {
        if rows.rows() > 0 && rows.cols() != objective.len() {
            return Err(Error::Dimension {
                what: "LP row width",
                expected: objective.len(),
                found: rows.cols(),
            });
        }
        if rows.rows() != rhs.len() {
            return Err(Error::Dimension {
                what: "LP right-hand side",
                expected: rows.rows(),
                found: rhs.len(),
            });
        }
        Ok(Self {
            objective,
            rows,
            rhs,
        })
    }

    /// Returns an optimal vertex.
    pub fn solve(&self) -> Result<LpSolution> {
        let mut t = Tableau::build(self);
        if t.has_artificials() {
            let phase1: Vec<f64> = (0..t.cols).map(|j| if t.is_artificial(j) { -1.0 } else { 0.0 }).collect();
            t.optimize(&phase1)?;
            let infeasibility: f64 = (0..t.rows)
                .filter(|&r| t.is_artificial(t.basis[r]))
                .map(|r| t.values[r])
                .sum();
            if infeasibility > 1e-7 {
                return Err(Error::Infeasible);
            }
            for j in 0..t.cols {
                if t.is_artificial(j) {
                    t.upper[j] = 0.0;
                }
            }
        }
        let m = self.objective.len();
        let mut phase2 = vec![0.0; t.cols];
        phase2[..m].copy_from_slice(&self.objective);
        t.optimize(&phase2)?;
        let x = t.primal(m);
        let value = x.iter().zip(&self.objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, value })
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

struct Tableau {
    rows: usize,
    cols: usize,
    first_artificial: usize,
    /// `B⁻¹A`, row-major.
    a: Vec<f64>,
    /// Current values of the basic variables.
    values: Vec<f64>,
    basis: Vec<usize>,
    status: Vec<Status>,
    upper: Vec<f64>,
}

impl Tableau {
    fn build(p: &LpProblem) -> Self {
        let m = p.objective.len();
        let l = p.rhs.len();
        let negatives: Vec<usize> = (0..l).filter(|&i| p.rhs[i] < 0.0).collect();
        let cols = m + l + negatives.len();
        let mut a = vec![0.0; l * cols];
        let mut basis = vec![0; l];
        let mut values = vec![0.0; l];
        let mut status = vec![Status::Lower; cols];
        let mut upper = vec![f64::INFINITY; cols];
        upper[..m].fill(1.0);
        let mut next_art = m + l;
        for i in 0..l {
            let flip = if p.rhs[i] < 0.0 { -1.0 } else { 1.0 };
            let row = &mut a[i * cols..(i + 1) * cols];
            for j in 0..m {
                row[j] = flip * p.rows.get(i, j);
            }
            row[m + i] = flip;
            values[i] = flip * p.rhs[i];
            if flip < 0.0 {
                row[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            } else {
                basis[i] = m + i;
            }
            status[basis[i]] = Status::Basic;
        }
        Self {
            rows: l,
            cols,
            first_artificial: m + l,
            a,
            values,
            basis,
            status,
            upper,
        }
    }

    fn has_artificials(&self) -> bool {
        self.cols > self.first_artificial
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    fn at(&self, r: usize, j: usize) -> f64 {
        self.a[r * self.cols + j]
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            Status::Upper => self.upper[j],
            _ => 0.0,
        }
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        for _ in 0..MAX_ITERATIONS {
            let Some((j, dir)) = self.entering(cost) else {
                return Ok(());
            };
            self.step(j, dir)?;
        }
        Err(Error::InvalidParams("simplex iteration limit reached".into()))
    }

    /// Smallest-index nonbasic column with an improving reduced cost, and the
    /// direction (+1 increase, −1 decrease) it moves in.
    fn entering(&self, cost: &[f64]) -> Option<(usize, f64)> {
        for j in 0..self.cols {
            let st = self.status[j];
            if st == Status::Basic || self.upper[j] == 0.0 {
                continue;
            }
            let d = cost[j] - (0..self.rows).map(|r| cost[self.basis[r]] * self.at(r, j)).sum::<f64>();
            match st {
                Status::Lower if d > TOL => return Some((j, 1.0)),
                Status::Upper if d < -TOL => return Some((j, -1.0)),
                _ => {}
            }
        }
        None
    }

    fn step(&mut self, j: usize, dir: f64) -> Result<()> {
        let mut theta = self.upper[j];
        let mut leave: Option<(usize, Status)> = None;
        for r in 0..self.rows {
            let coef = dir * self.at(r, j);
            let b = self.basis[r];
            let (limit, to) = if coef > TOL {
                (self.values[r].max(0.0) / coef, Status::Lower)
            } else if coef < -TOL && self.upper[b].is_finite() {
                ((self.upper[b] - self.values[r]).max(0.0) / -coef, Status::Upper)
            } else {
                continue;
            };
            if limit < theta - TOL {
                theta = limit;
                leave = Some((r, to));
            } else if limit <= theta + TOL {
                if let Some((lr, _)) = leave {
                    if b < self.basis[lr] {
                        theta = theta.min(limit);
                        leave = Some((r, to));
                    }
                }
            }
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParams("unbounded LP".into()));
        }
        for r in 0..self.rows {
            let coef = self.at(r, j);
            self.values[r] -= dir * theta * coef;
        }
        let entering_value = self.nonbasic_value(j) + dir * theta;
        match leave {
            None => {
                self.status[j] = if dir > 0.0 { Status::Upper } else { Status::Lower };
            }
            Some((r, to)) => {
                let old = self.basis[r];
                self.status[old] = to;
                self.status[j] = Status::Basic;
                self.basis[r] = j;
                self.values[r] = entering_value;
                self.pivot(r, j);
            }
        }
        Ok(())
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let p = self.at(r, j);
        for c in 0..cols {
            self.a[r * cols + c] /= p;
        }
        let pivot_row: Vec<f64> = self.a[r * cols..(r + 1) * cols].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.at(i, j);
            if f == 0.0 {
                continue;
            }
            let row = &mut self.a[i * cols..(i + 1) * cols];
            for c in 0..cols {
                row[c] -= f * pivot_row[c];
            }
            row[j] = 0.0;
        }
    }

    fn primal(&self, m: usize) -> Vec<f64> {
        let mut x: Vec<f64> = (0..m).map(|j| self.nonbasic_value(j)).collect();
        for r in 0..self.rows {
            if self.basis[r] < m {
                x[self.basis[r]] = self.values[r];
            }
        }
        x
    }
}
