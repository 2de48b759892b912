//! Dense dual simplex for `min c'x  s.t.  A x <= b, x >= 0` with `c >= 0`.
//!
//! With non-negative costs the all-slack basis is dual feasible for every
//! right-hand side, so no phase one is needed: the dual simplex starts from
//! the slack basis and restores primal feasibility. Because only `b` enters
//! the primal values, a solved instance can be re-solved for a new `b` from
//! its current basis, which is how the Dantzig estimator walks a decreasing
//! `lambda` path cheaply.
//!
//! Pivoting is deterministic: most-infeasible leaving row, minimum-ratio
//! entering column with ties to the larger pivot and then the lower index,
//! switching to Bland's rule if the iteration count suggests cycling. Every
//! returned vertex is re-solved from the original columns by LU, and the
//! tableau is refactored when that exposes accumulated drift.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Outcome of one solve.
#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        pivots: usize,
    },
    /// No `x >= 0` satisfies `A x <= b`.
    Infeasible {
        pivots: usize,
    },
}

#[derive(Debug, Clone)]
pub struct DualSimplex {
    m: usize,
    n: usize,
    a: DenseMatrix,
    cost: Vec<f64>,
    /// `B^-1 [A | I]`, row-major `m x (n + m)`.
    tableau: Vec<f64>,
    /// Values of the basic variables.
    rhs: Vec<f64>,
    /// Reduced costs of all `n + m` variables.
    reduced: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    b: Vec<f64>,
}

const PIVOT_TOL: f64 = 1e-11;
const MAX_REFACTOR: usize = 5;

impl DualSimplex {
    pub fn new(a: DenseMatrix, cost: Vec<f64>) -> Result<Self> {
        let (m, n) = (a.rows(), a.cols());
        if cost.len() != n {
            return Err(Error::Shape(format!("cost has {} entries for {n} columns", cost.len())));
        }
        if cost.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidInput("dual simplex needs finite costs >= 0".into()));
        }
        let width = n + m;
        let mut tableau = vec![0.0; m * width];
        for i in 0..m {
            tableau[i * width..i * width + n].copy_from_slice(a.row(i));
            tableau[i * width + n + i] = 1.0;
        }
        let mut reduced = cost.clone();
        reduced.extend(std::iter::repeat_n(0.0, m));
        let mut is_basic = vec![false; width];
        is_basic[n..].iter_mut().for_each(|b| *b = true);
        Ok(Self {
            m,
            n,
            a,
            cost,
            tableau,
            rhs: vec![0.0; m],
            reduced,
            basis: (n..n + m).collect(),
            is_basic,
            b: vec![0.0; m],
        })
    }

    pub fn num_constraints(&self) -> usize {
        self.m
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    #[inline]
    fn width(&self) -> usize {
        self.n + self.m
    }

    /// Solves for right-hand side `b`, starting from the current basis.
    pub fn solve(&mut self, b: &[f64]) -> Result<LpOutcome> {
        if b.len() != self.m {
            return Err(Error::Shape(format!("rhs has {} entries for {} rows", b.len(), self.m)));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite rhs".into()));
        }
        self.b = b.to_vec();
        self.recompute_rhs();
        let scale = 1.0 + b.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let feas_tol = 1e-11 * scale;
        let mut pivots = 0;
        let bland_after = 50 * self.width();
        let cap = 500 * self.width();
        let mut refactors = 0;
        loop {
            let row = if pivots < bland_after {
                self.most_infeasible_row(feas_tol)
            } else {
                self.bland_row(feas_tol)
            };
            let Some(r) = row else {
                match self.polish()? {
                    true => {
                        let x = self.primal();
                        let objective = x.iter().zip(&self.cost).map(|(a, c)| a * c).sum();
                        return Ok(LpOutcome::Optimal { x, objective, pivots });
                    }
                    false => {
                        refactors += 1;
                        if refactors > MAX_REFACTOR {
                            return Err(Error::Solver("vertex drifted after repeated refactoring".into()));
                        }
                        continue;
                    }
                }
            };
            let Some(q) = self.entering(r, pivots >= bland_after) else {
                // Before declaring infeasibility, make sure the row is not an
                // artifact of drift.
                if refactors < MAX_REFACTOR {
                    refactors += 1;
                    self.refactor()?;
                    if self.rhs[r] < -feas_tol && self.entering(r, true).is_none() {
                        return Ok(LpOutcome::Infeasible { pivots });
                    }
                    continue;
                }
                return Ok(LpOutcome::Infeasible { pivots });
            };
            self.pivot(r, q);
            pivots += 1;
            if pivots > cap {
                return Err(Error::Solver(format!("no convergence after {pivots} pivots")));
            }
        }
    }

    fn recompute_rhs(&mut self) {
        let (n, w) = (self.n, self.width());
        for i in 0..self.m {
            let binv = &self.tableau[i * w + n..(i + 1) * w];
            self.rhs[i] = binv.iter().zip(&self.b).map(|(x, y)| x * y).sum();
        }
    }

    fn most_infeasible_row(&self, tol: f64) -> Option<usize> {
        let mut best = None;
        let mut worst = -tol;
        for (i, &v) in self.rhs.iter().enumerate() {
            if v < worst {
                worst = v;
                best = Some(i);
            }
        }
        best
    }

    fn bland_row(&self, tol: f64) -> Option<usize> {
        (0..self.m)
            .filter(|&i| self.rhs[i] < -tol)
            .min_by_key(|&i| self.basis[i])
    }

    fn entering(&self, r: usize, bland: bool) -> Option<usize> {
        let w = self.width();
        let row = &self.tableau[r * w..(r + 1) * w];
        let row_scale = row.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let tol = PIVOT_TOL * row_scale.max(1.0);
        let mut best: Option<(usize, f64, f64)> = None;
        for (j, &t) in row.iter().enumerate() {
            if self.is_basic[j] || t >= -tol {
                continue;
            }
            let ratio = self.reduced[j].max(0.0) / -t;
            let take = match best {
                None => true,
                Some((_, br, bt)) => {
                    if bland {
                        ratio < br
                    } else {
                        ratio < br || (ratio == br && -t > bt)
                    }
                }
            };
            if take {
                best = Some((j, ratio, -t));
            }
        }
        best.map(|(j, _, _)| j)
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width();
        let piv = self.tableau[r * w + q];
        {
            let row = &mut self.tableau[r * w..(r + 1) * w];
            row.iter_mut().for_each(|v| *v /= piv);
            row[q] = 1.0;
        }
        self.rhs[r] /= piv;
        let pivot_row: Vec<f64> = self.tableau[r * w..(r + 1) * w].to_vec();
        let pivot_rhs = self.rhs[r];
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.tableau[i * w + q];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.tableau[i * w..(i + 1) * w];
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= f * p;
            }
            row[q] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
        }
        let dq = self.reduced[q];
        if dq != 0.0 {
            for (d, p) in self.reduced.iter_mut().zip(&pivot_row) {
                *d -= dq * p;
            }
        }
        self.reduced[q] = 0.0;
        let leaving = self.basis[r];
        self.is_basic[leaving] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    fn basis_matrix(&self) -> DMatrix<f64> {
        let mut bm = DMatrix::zeros(self.m, self.m);
        for (k, &var) in self.basis.iter().enumerate() {
            if var < self.n {
                for i in 0..self.m {
                    bm[(i, k)] = self.a.get(i, var);
                }
            } else {
                bm[(var - self.n, k)] = 1.0;
            }
        }
        bm
    }

    /// Re-solves the basic values from the original columns. Returns false
    /// (after refactoring) if they turn out materially infeasible.
    fn polish(&mut self) -> Result<bool> {
        let bm = self.basis_matrix();
        let lu = bm.lu();
        let xb = lu
            .solve(&DVector::from_column_slice(&self.b))
            .ok_or_else(|| Error::Solver("singular basis".into()))?;
        let scale = 1.0 + self.b.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let ok = xb.iter().all(|&v| v >= -1e-9 * scale);
        if ok {
            self.rhs.copy_from_slice(xb.as_slice());
        } else {
            self.refactor()?;
        }
        Ok(ok)
    }

    /// Rebuilds tableau, basic values and reduced costs from the basis.
    fn refactor(&mut self) -> Result<()> {
        let (m, n, w) = (self.m, self.n, self.width());
        let lu = self.basis_matrix().lu();
        let binv = lu.try_inverse().ok_or_else(|| Error::Solver("singular basis".into()))?;
        for i in 0..m {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..m {
                    s += binv[(i, k)] * self.a.get(k, j);
                }
                self.tableau[i * w + j] = s;
            }
            for k in 0..m {
                self.tableau[i * w + n + k] = binv[(i, k)];
            }
        }
        for (k, &var) in self.basis.iter().enumerate() {
            for i in 0..m {
                self.tableau[i * w + var] = if i == k { 1.0 } else { 0.0 };
            }
        }
        self.recompute_rhs();
        let cb: Vec<f64> = self
            .basis
            .iter()
            .map(|&v| if v < n { self.cost[v] } else { 0.0 })
            .collect();
        for j in 0..w {
            let cj = if j < n { self.cost[j] } else { 0.0 };
            let z: f64 = (0..m).map(|i| cb[i] * self.tableau[i * w + j]).sum();
            self.reduced[j] = if self.is_basic[j] { 0.0 } else { cj - z };
        }
        Ok(())
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (i, &var) in self.basis.iter().enumerate() {
            if var < self.n {
                x[var] = self.rhs[i].max(0.0);
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min x + y  s.t.  x + y >= 1, x <= 0.7  ->  -x - y <= -1
        let a = DenseMatrix::from_rows(&[vec![-1.0, -1.0], vec![1.0, 0.0]]).unwrap();
        let mut lp = DualSimplex::new(a, vec![1.0, 2.0]).unwrap();
        match lp.solve(&[-1.0, 0.7]).unwrap() {
            LpOutcome::Optimal { x, objective, .. } => {
                assert!((x[0] - 0.7).abs() < 1e-12);
                assert!((x[1] - 0.3).abs() < 1e-12);
                assert!((objective - 1.3).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        // warm re-solve with a new rhs
        match lp.solve(&[-0.5, 0.7]).unwrap() {
            LpOutcome::Optimal { x, .. } => {
                assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasibility() {
        // x <= -1 with x >= 0
        let a = DenseMatrix::from_rows(&[vec![1.0]]).unwrap();
        let mut lp = DualSimplex::new(a, vec![1.0]).unwrap();
        assert!(matches!(lp.solve(&[-1.0]).unwrap(), LpOutcome::Infeasible { .. }));
    }

    #[test]
    fn rejects_negative_cost() {
        let a = DenseMatrix::identity(1);
        assert!(DualSimplex::new(a, vec![-1.0]).is_err());
    }
}
