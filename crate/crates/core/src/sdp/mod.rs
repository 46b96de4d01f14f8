//! A small dense semidefinite solver.
//!
//! Problems are stated over real variables `x`, which may be grouped into
//! symmetric matrix variables. Internally every problem has the form
//!
//! ```text
//! minimize cᵀx  subject to  Σ x_i F_i − F_0 ⪰ 0   (dense blocks)
//!                           a_kᵀx ≥ b_k            (linear rows)
//!                           E x = e
//! ```
//!
//! and is solved by a primal-dual interior-point method with HKM search
//! directions and Mehrotra's predictor-corrector.

mod solver;

use nalgebra::DMatrix;
use serde::Serialize;

pub use solver::{solve, SolveStatus, SolverOptions};

use crate::error::{Error, Result};

/// A linear expression `Σ c_i x_i + constant`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct LinExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn var(i: usize) -> Self {
        LinExpr { terms: vec![(i, 1.0)], constant: 0.0 }
    }

    pub fn constant(c: f64) -> Self {
        LinExpr { terms: Vec::new(), constant: c }
    }

    pub fn add_term(&mut self, i: usize, c: f64) -> &mut Self {
        if c != 0.0 {
            self.terms.push((i, c));
        }
        self
    }

    pub fn plus(mut self, other: &LinExpr) -> Self {
        self.terms.extend_from_slice(&other.terms);
        self.constant += other.constant;
        self
    }

    pub fn scaled(mut self, k: f64) -> Self {
        for t in &mut self.terms {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }

    /// Value at `x`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }

    /// Merged terms, sorted by variable, without zeros.
    fn compact(&self) -> Vec<(usize, f64)> {
        let mut t = self.terms.clone();
        t.sort_by_key(|p| p.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(t.len());
        for (i, c) in t {
            match out.last_mut() {
                Some(last) if last.0 == i => last.1 += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|p| p.1 != 0.0);
        out
    }
}

/// Handle to a symmetric matrix variable constrained to be PSD.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MatrixVar {
    pub dim: usize,
    pub offset: usize,
    pub block: usize,
}

impl MatrixVar {
    /// Index of the scalar holding entry `(i, j)`.
    pub fn entry(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.offset + i * self.dim - i * (i + 1) / 2 + j
    }

    pub fn len(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.dim == 0
    }

    /// `⟨Y, A⟩` for a symmetric `A` given by its row-major upper triangle.
    pub fn inner_tri(&self, tri: &[f64]) -> LinExpr {
        let mut e = LinExpr::new();
        let mut k = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { 1.0 } else { 2.0 };
                e.add_term(self.entry(i, j), w * tri[k]);
                k += 1;
            }
        }
        e
    }

    /// The matrix value at `x`.
    pub fn value(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |i, j| x[self.entry(i, j)])
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseBlock {
    pub dim: usize,
    pub f0: DMatrix<f64>,
    pub terms: Vec<(usize, DMatrix<f64>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearRow {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

/// A row handle returned by the constraint builders.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowId {
    Ineq(usize),
    Eq(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub n: usize,
    pub names: Vec<String>,
    pub matrix_vars: Vec<MatrixVar>,
    pub blocks: Vec<DenseBlock>,
    pub ineqs: Vec<LinearRow>,
    pub eqs: Vec<LinearRow>,
    pub sense: Sense,
    pub objective: LinExpr,
}

impl Default for SdpProblem {
    fn default() -> Self {
        Self::new()
    }
}

impl SdpProblem {
    pub fn new() -> Self {
        SdpProblem {
            n: 0,
            names: Vec::new(),
            matrix_vars: Vec::new(),
            blocks: Vec::new(),
            ineqs: Vec::new(),
            eqs: Vec::new(),
            sense: Sense::Minimize,
            objective: LinExpr::new(),
        }
    }

    pub fn scalar(&mut self, name: &str) -> usize {
        self.names.push(name.to_string());
        self.n += 1;
        self.n - 1
    }

    /// A symmetric `dim × dim` matrix variable with `Y ⪰ 0`.
    pub fn psd_matrix(&mut self, name: &str, dim: usize) -> MatrixVar {
        assert!(dim >= 1, "matrix variable of dimension 0");
        let v = MatrixVar { dim, offset: self.n, block: self.blocks.len() };
        for i in 0..dim {
            for j in i..dim {
                self.names.push(format!("{name}[{i},{j}]"));
            }
        }
        self.n += v.len();
        let mut terms = Vec::with_capacity(v.len());
        for i in 0..dim {
            for j in i..dim {
                let mut f = DMatrix::zeros(dim, dim);
                f[(i, j)] = 1.0;
                f[(j, i)] = 1.0;
                terms.push((v.entry(i, j), f));
            }
        }
        self.blocks.push(DenseBlock { dim, f0: DMatrix::zeros(dim, dim), terms });
        self.matrix_vars.push(v);
        v
    }

    /// `constant + Σ x_i F_i ⪰ 0`. Returns the block index.
    pub fn add_lmi(&mut self, constant: DMatrix<f64>, terms: Vec<(usize, DMatrix<f64>)>) -> Result<usize> {
        let dim = constant.nrows();
        if dim == 0 || constant.ncols() != dim {
            return Err(Error::arg("LMI constant must be a nonempty square matrix"));
        }
        for (i, f) in &terms {
            if *i >= self.n {
                return Err(Error::arg(format!("LMI references unknown variable {i}")));
            }
            if f.shape() != (dim, dim) || f != &f.transpose() {
                return Err(Error::arg("LMI coefficient must be symmetric of the block size"));
            }
        }
        if constant != constant.transpose() {
            return Err(Error::arg("LMI constant must be symmetric"));
        }
        self.blocks.push(DenseBlock { dim, f0: -constant, terms });
        Ok(self.blocks.len() - 1)
    }

    fn check_expr(&self, e: &LinExpr) -> Result<()> {
        match e.terms.iter().find(|t| t.0 >= self.n) {
            Some(t) => Err(Error::arg(format!("expression references unknown variable {}", t.0))),
            None if e.terms.iter().any(|t| !t.1.is_finite()) || !e.constant.is_finite() => {
                Err(Error::arg("non-finite coefficient"))
            }
            None => Ok(()),
        }
    }

    /// `e ≤ rhs`.
    pub fn add_le(&mut self, e: &LinExpr, rhs: f64) -> Result<RowId> {
        self.check_expr(e)?;
        let terms = e.compact().into_iter().map(|(i, c)| (i, -c)).collect();
        self.ineqs.push(LinearRow { terms, rhs: e.constant - rhs });
        Ok(RowId::Ineq(self.ineqs.len() - 1))
    }

    /// `e ≥ rhs`.
    pub fn add_ge(&mut self, e: &LinExpr, rhs: f64) -> Result<RowId> {
        self.check_expr(e)?;
        self.ineqs.push(LinearRow { terms: e.compact(), rhs: rhs - e.constant });
        Ok(RowId::Ineq(self.ineqs.len() - 1))
    }

    /// `e = rhs`.
    pub fn add_eq(&mut self, e: &LinExpr, rhs: f64) -> Result<RowId> {
        self.check_expr(e)?;
        self.eqs.push(LinearRow { terms: e.compact(), rhs: rhs - e.constant });
        Ok(RowId::Eq(self.eqs.len() - 1))
    }

    pub fn maximize(&mut self, e: LinExpr) -> Result<()> {
        self.check_expr(&e)?;
        self.sense = Sense::Maximize;
        self.objective = e;
        Ok(())
    }

    pub fn minimize(&mut self, e: LinExpr) -> Result<()> {
        self.check_expr(&e)?;
        self.sense = Sense::Minimize;
        self.objective = e;
        Ok(())
    }

    /// Debug dump: blocks and rows in triplet form.
    pub fn to_json(&self) -> serde_json::Value {
        let mut triplets = Vec::new();
        for (b, blk) in self.blocks.iter().enumerate() {
            let mut push = |var: Option<usize>, m: &DMatrix<f64>| {
                for i in 0..blk.dim {
                    for j in i..blk.dim {
                        if m[(i, j)] != 0.0 {
                            triplets.push(serde_json::json!([b, var, i, j, m[(i, j)]]));
                        }
                    }
                }
            };
            push(None, &blk.f0);
            for (v, f) in &blk.terms {
                push(Some(*v), f);
            }
        }
        serde_json::json!({
            "variables": self.names,
            "sense": self.sense,
            "objective": self.objective,
            "blocks": self.blocks.iter().map(|b| b.dim).collect::<Vec<_>>(),
            "block_entries": triplets,
            "block_entries_format": ["block", "variable (null = −F0)", "i", "j", "value"],
            "inequalities_ge": self.ineqs,
            "equalities": self.eqs,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Objective in the problem's own sense.
    pub objective: f64,
    pub dual_objective: f64,
    pub relative_gap: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    /// Multipliers of the inequality rows, in the problem's row order.
    pub ineq_duals: Vec<f64>,
    pub eq_duals: Vec<f64>,
    /// Dual matrices of the dense blocks, row-major.
    pub block_duals: Vec<Vec<f64>>,
    /// Slack matrices `Σ x_i F_i − F_0` of the dense blocks, row-major.
    pub block_slacks: Vec<Vec<f64>>,
}

impl SdpSolution {
    pub fn value(&self, e: &LinExpr) -> f64 {
        e.eval(&self.x)
    }

    pub fn matrix(&self, v: &MatrixVar) -> DMatrix<f64> {
        v.value(&self.x)
    }

    /// Multiplier of a row returned by a builder.
    pub fn dual_of(&self, row: RowId) -> f64 {
        match row {
            RowId::Ineq(k) => self.ineq_duals[k],
            RowId::Eq(k) => self.eq_duals[k],
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("solution serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_scalar_problem() {
        // max t  s.t.  Y ⪰ 0 (1×1), Y + t ≤ 1, −Y ≤ 0
        let mut p = SdpProblem::new();
        let y = p.psd_matrix("Y", 1);
        let t = p.scalar("t");
        let mut e = LinExpr::var(y.entry(0, 0));
        e.add_term(t, 1.0);
        p.add_le(&e, 1.0).unwrap();
        p.add_le(&LinExpr::var(y.entry(0, 0)).scaled(-1.0), 0.0).unwrap();
        p.maximize(LinExpr::var(t)).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-8, "{}", s.objective);
        assert!(s.x[y.entry(0, 0)].abs() < 1e-8);
        assert!(s.relative_gap < 1e-8);
    }

    #[test]
    fn max_eigenvalue_by_lmi() {
        // λ_max(A) = min t  s.t.  tI − A ⪰ 0
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let mut p = SdpProblem::new();
        let t = p.scalar("t");
        p.add_lmi(-a, vec![(t, DMatrix::identity(3, 3))]).unwrap();
        p.minimize(LinExpr::var(t)).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!((s.objective - (2.0 + 2f64.sqrt())).abs() < 1e-8);
    }

    #[test]
    fn equality_and_matrix_variable() {
        // min ⟨C, Y⟩ s.t. tr Y = 1, Y ⪰ 0 gives λ_min(C)
        let mut p = SdpProblem::new();
        let y = p.psd_matrix("Y", 2);
        p.add_eq(&y.inner_tri(&[1.0, 0.0, 1.0]), 1.0).unwrap();
        p.minimize(y.inner_tri(&[3.0, 1.0, 1.0])).unwrap();
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!((s.objective - (2.0 - 2f64.sqrt())).abs() < 1e-8, "{}", s.objective);
        assert!(s.dual_objective.is_finite());
    }

    #[test]
    fn infeasible_problem_is_reported() {
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        p.add_ge(&LinExpr::var(x), 1.0).unwrap();
        p.add_le(&LinExpr::var(x), 0.0).unwrap();
        p.minimize(LinExpr::var(x)).unwrap();
        assert!(matches!(solve(&p, &SolverOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn unbounded_problem_is_reported() {
        let mut p = SdpProblem::new();
        let x = p.scalar("x");
        p.add_le(&LinExpr::var(x), 0.0).unwrap();
        p.minimize(LinExpr::var(x)).unwrap();
        assert!(matches!(solve(&p, &SolverOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn json_dump_has_triplets() {
        let mut p = SdpProblem::new();
        let y = p.psd_matrix("Y", 2);
        p.add_le(&y.inner_tri(&[1.0, 0.0, 1.0]), 1.0).unwrap();
        p.maximize(LinExpr::var(y.entry(0, 1))).unwrap();
        let j = p.to_json();
        assert_eq!(j["blocks"], serde_json::json!([2]));
        assert_eq!(j["block_entries"].as_array().unwrap().len(), 3);
        let s = solve(&p, &SolverOptions::default()).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-8);
        assert!(s.to_json()["x"].is_array());
    }
}
