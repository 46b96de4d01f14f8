//! HKM primal-dual interior-point iteration.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{SdpProblem, SdpSolution, Sense};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    /// Stalled before reaching the requested tolerances but within
    /// `near_tol` of them.
    NearOptimal,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub tol_gap: f64,
    pub tol_feas: f64,
    /// Accepted as [`SolveStatus::NearOptimal`] when the iteration stalls.
    pub near_tol: f64,
    pub max_iter: usize,
    pub step_fraction: f64,
    /// Iterative refinement passes on each Schur solve.
    pub refine: usize,
    /// Norm beyond which the iterate is treated as a certificate of
    /// infeasibility.
    pub divergence: f64,
    /// Per-iteration trace on stderr.
    pub verbose: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_gap: 1e-10,
            tol_feas: 1e-10,
            near_tol: 1e-7,
            max_iter: 200,
            step_fraction: 0.98,
            refine: 1,
            divergence: 1e12,
            verbose: false,
        }
    }
}

struct Row {
    terms: Vec<(usize, f64)>,
    rhs: f64,
    scale: f64,
}

fn scaled_rows(rows: &[super::LinearRow]) -> Vec<Row> {
    rows.iter()
        .map(|r| {
            let s = r.terms.iter().fold(0.0f64, |a, t| a.max(t.1.abs()));
            let s = if s > 0.0 { s } else { 1.0 };
            Row { terms: r.terms.iter().map(|&(i, c)| (i, c / s)).collect(), rhs: r.rhs / s, scale: s }
        })
        .collect()
}

fn row_dot(r: &Row, x: &[f64]) -> f64 {
    r.terms.iter().map(|&(i, c)| c * x[i]).sum()
}

#[derive(Clone)]
struct Iterate {
    x: Vec<f64>,
    s: Vec<DMatrix<f64>>,
    z: Vec<DMatrix<f64>>,
    sl: Vec<f64>,
    zl: Vec<f64>,
    lam: Vec<f64>,
}

struct Direction {
    dx: Vec<f64>,
    ds: Vec<DMatrix<f64>>,
    dz: Vec<DMatrix<f64>>,
    dsl: Vec<f64>,
    dzl: Vec<f64>,
    dlam: Vec<f64>,
}

struct Residuals {
    rp: Vec<DMatrix<f64>>,
    rpl: Vec<f64>,
    re: Vec<f64>,
    rd: Vec<f64>,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    gap: f64,
}

struct Solver<'a> {
    p: &'a SdpProblem,
    c: Vec<f64>,
    ineq: Vec<Row>,
    eq: Vec<Row>,
    opts: &'a SolverOptions,
    f0_norm: f64,
    c_norm: f64,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α` with `S + α ΔS ⪰ 0`, given the Cholesky factor of `S`.
fn max_step_dense(chol: &Cholesky<f64, Dyn>, ds: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let a = l.solve_lower_triangular(ds).expect("nonsingular factor");
    let w = l.solve_lower_triangular(&a.transpose()).expect("nonsingular factor");
    let w = sym(w);
    let lmin = SymmetricEigen::new(w).eigenvalues.min();
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

fn max_step_lp(s: &[f64], ds: &[f64]) -> f64 {
    s.iter()
        .zip(ds)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

impl<'a> Solver<'a> {
    fn new(p: &'a SdpProblem, opts: &'a SolverOptions) -> Self {
        let mut c = vec![0.0; p.n];
        let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
        for &(i, v) in &p.objective.terms {
            c[i] += sign * v;
        }
        let ineq = scaled_rows(&p.ineqs);
        let eq = scaled_rows(&p.eqs);
        let f0_norm = p
            .blocks
            .iter()
            .map(|b| max_abs(&b.f0))
            .chain(ineq.iter().map(|r| r.rhs.abs()))
            .chain(eq.iter().map(|r| r.rhs.abs()))
            .fold(0.0, f64::max);
        let c_norm = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        Solver { p, c, ineq, eq, opts, f0_norm, c_norm }
    }

    fn start(&self) -> Iterate {
        let xi_p = 10.0 * self.f0_norm.max(1.0);
        let xi_d = 10.0 * self.c_norm.max(1.0);
        Iterate {
            x: vec![0.0; self.p.n],
            s: self.p.blocks.iter().map(|b| DMatrix::identity(b.dim, b.dim) * xi_p).collect(),
            z: self.p.blocks.iter().map(|b| DMatrix::identity(b.dim, b.dim) * xi_d).collect(),
            sl: vec![xi_p; self.ineq.len()],
            zl: vec![xi_d; self.ineq.len()],
            lam: vec![0.0; self.eq.len()],
        }
    }

    fn degree(&self) -> f64 {
        (self.p.blocks.iter().map(|b| b.dim).sum::<usize>() + self.ineq.len()) as f64
    }

    fn mu(&self, it: &Iterate) -> f64 {
        let dense: f64 = it.s.iter().zip(&it.z).map(|(s, z)| s.dot(z)).sum();
        let lp: f64 = it.sl.iter().zip(&it.zl).map(|(a, b)| a * b).sum();
        (dense + lp) / self.degree().max(1.0)
    }

    fn residuals(&self, it: &Iterate) -> Residuals {
        let mut rp = Vec::with_capacity(self.p.blocks.len());
        let mut rd = self.c.clone();
        let mut dobj = 0.0;
        for (b, blk) in self.p.blocks.iter().enumerate() {
            let mut r = -&blk.f0 - &it.s[b];
            for (i, f) in &blk.terms {
                r += f * it.x[*i];
                rd[*i] -= f.dot(&it.z[b]);
            }
            dobj += blk.f0.dot(&it.z[b]);
            rp.push(r);
        }
        let mut rpl = Vec::with_capacity(self.ineq.len());
        for (k, row) in self.ineq.iter().enumerate() {
            rpl.push(row_dot(row, &it.x) - row.rhs - it.sl[k]);
            for &(i, c) in &row.terms {
                rd[i] -= c * it.zl[k];
            }
            dobj += row.rhs * it.zl[k];
        }
        let mut re = Vec::with_capacity(self.eq.len());
        for (k, row) in self.eq.iter().enumerate() {
            re.push(row.rhs - row_dot(row, &it.x));
            for &(i, c) in &row.terms {
                rd[i] -= c * it.lam[k];
            }
            dobj += row.rhs * it.lam[k];
        }
        let pobj: f64 = self.c.iter().zip(&it.x).map(|(a, b)| a * b).sum();
        let pinf = rp
            .iter()
            .map(max_abs)
            .chain(rpl.iter().map(|v| v.abs()))
            .chain(re.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
            / (1.0 + self.f0_norm);
        let dinf = rd.iter().fold(0.0f64, |a, v| a.max(v.abs())) / (1.0 + self.c_norm);
        let gap = (pobj - dobj).abs() / (1.0f64).max((pobj.abs() + dobj.abs()) / 2.0);
        Residuals { rp, rpl, re, rd, pobj, dobj, pinf, dinf, gap }
    }

    fn solve_spd(&self, chol: &Cholesky<f64, Dyn>, m: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
        let mut x = chol.solve(b);
        for _ in 0..self.opts.refine {
            let r = b - m * &x;
            x += chol.solve(&r);
        }
        x
    }

    /// Schur matrix `M_ij = Σ_B tr(F_i S⁻¹ F_j Z) + Σ_k a_ki a_kj z_k / s_k`.
    fn schur(&self, it: &Iterate, sinv: &[DMatrix<f64>]) -> DMatrix<f64> {
        let n = self.p.n;
        let mut m = DMatrix::zeros(n, n);
        for (b, blk) in self.p.blocks.iter().enumerate() {
            let g: Vec<DMatrix<f64>> = blk.terms.iter().map(|(_, f)| &sinv[b] * f * &it.z[b]).collect();
            for (a, (i, fi)) in blk.terms.iter().enumerate() {
                for (gj, (j, _)) in g.iter().zip(&blk.terms).skip(a) {
                    let v = fi.dot(gj);
                    m[(*i, *j)] += v;
                    if i != j {
                        m[(*j, *i)] += v;
                    }
                }
            }
        }
        for (k, row) in self.ineq.iter().enumerate() {
            let w = it.zl[k] / it.sl[k];
            for &(i, ci) in &row.terms {
                for &(j, cj) in &row.terms {
                    m[(i, j)] += w * ci * cj;
                }
            }
        }
        m
    }

    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        it: &Iterate,
        res: &Residuals,
        sinv: &[DMatrix<f64>],
        mchol: &Cholesky<f64, Dyn>,
        m: &DMatrix<f64>,
        schur_eq: Option<&(DMatrix<f64>, Cholesky<f64, Dyn>, DMatrix<f64>)>,
        target: f64,
        corr: Option<&Direction>,
    ) -> Direction {
        let n = self.p.n;
        let mut g = vec![0.0; n];
        let mut rhs_blocks = Vec::with_capacity(self.p.blocks.len());
        for (b, blk) in self.p.blocks.iter().enumerate() {
            let dim = blk.dim;
            let mut inner = DMatrix::identity(dim, dim) * target;
            if let Some(c) = corr {
                inner -= &c.ds[b] * &c.dz[b];
            }
            let w = &sinv[b] * inner;
            let wr = &w - &sinv[b] * &res.rp[b] * &it.z[b];
            for (i, f) in &blk.terms {
                g[*i] += f.dot(&wr) - f.dot(&it.z[b]);
            }
            rhs_blocks.push(w);
        }
        let mut lp_w = Vec::with_capacity(self.ineq.len());
        for (k, row) in self.ineq.iter().enumerate() {
            let mut num = target;
            if let Some(c) = corr {
                num -= c.dsl[k] * c.dzl[k];
            }
            let w = num / it.sl[k];
            let wr = w - res.rpl[k] * it.zl[k] / it.sl[k];
            for &(i, ci) in &row.terms {
                g[i] += ci * (wr - it.zl[k]);
            }
            lp_w.push(w);
        }
        let rhs = DVector::from_iterator(n, g.iter().zip(&res.rd).map(|(a, b)| a - b));
        let (dx, dlam) = match schur_eq {
            None => (self.solve_spd(mchol, m, &rhs), DVector::zeros(0)),
            Some((minv_et, echol, emet)) => {
                let y = self.solve_spd(mchol, m, &rhs);
                let ey = DVector::from_iterator(self.eq.len(), self.eq.iter().map(|r| row_dot(r, y.as_slice())));
                let r = DVector::from_iterator(self.eq.len(), res.re.iter().zip(ey.iter()).map(|(a, b)| a - b));
                let mut dl = echol.solve(&r);
                for _ in 0..self.opts.refine {
                    let rr = &r - emet * &dl;
                    dl += echol.solve(&rr);
                }
                (y + minv_et * &dl, dl)
            }
        };
        let dx: Vec<f64> = dx.iter().copied().collect();
        let mut ds = Vec::with_capacity(self.p.blocks.len());
        let mut dz = Vec::with_capacity(self.p.blocks.len());
        for (b, blk) in self.p.blocks.iter().enumerate() {
            let mut d = res.rp[b].clone();
            for (i, f) in &blk.terms {
                d += f * dx[*i];
            }
            let z = sym(&rhs_blocks[b] - &sinv[b] * &d * &it.z[b]) - &it.z[b];
            ds.push(d);
            dz.push(z);
        }
        let mut dsl = Vec::with_capacity(self.ineq.len());
        let mut dzl = Vec::with_capacity(self.ineq.len());
        for (k, row) in self.ineq.iter().enumerate() {
            let d = row_dot(row, &dx) + res.rpl[k];
            dzl.push(lp_w[k] - d * it.zl[k] / it.sl[k] - it.zl[k]);
            dsl.push(d);
        }
        Direction { dx, ds, dz, dsl, dzl, dlam: dlam.iter().copied().collect() }
    }

    fn steps(&self, schol: &[Cholesky<f64, Dyn>], zchol: &[Cholesky<f64, Dyn>], it: &Iterate, d: &Direction) -> (f64, f64) {
        let mut ap = max_step_lp(&it.sl, &d.dsl);
        let mut ad = max_step_lp(&it.zl, &d.dzl);
        for b in 0..self.p.blocks.len() {
            ap = ap.min(max_step_dense(&schol[b], &d.ds[b]));
            ad = ad.min(max_step_dense(&zchol[b], &d.dz[b]));
        }
        (ap, ad)
    }

    fn solution(&self, it: &Iterate, res: &Residuals, iterations: usize, status: SolveStatus) -> SdpSolution {
        let (sign, k) = (if self.p.sense == Sense::Maximize { -1.0 } else { 1.0 }, self.p.objective.constant);
        SdpSolution {
            status,
            x: it.x.clone(),
            objective: sign * res.pobj + k,
            dual_objective: sign * res.dobj + k,
            relative_gap: res.gap,
            primal_infeasibility: res.pinf,
            dual_infeasibility: res.dinf,
            iterations,
            ineq_duals: it.zl.iter().zip(&self.ineq).map(|(z, r)| z / r.scale).collect(),
            eq_duals: it.lam.iter().zip(&self.eq).map(|(l, r)| -sign * l / r.scale).collect(),
            block_duals: it.z.iter().map(|z| z.transpose().iter().copied().collect()).collect(),
            block_slacks: it.s.iter().map(|s| s.transpose().iter().copied().collect()).collect(),
        }
    }

    fn fail(&self, msg: String, it: &Iterate, res: &Residuals, iter: usize) -> Error {
        Error::Solver {
            message: msg,
            last_iterate: Some(Box::new(self.solution(it, res, iter, SolveStatus::NearOptimal))),
        }
    }

    fn run(&self) -> Result<SdpSolution> {
        let opts = self.opts;
        let mut it = self.start();
        let mut stalled = 0;
        let mut best: Option<(f64, Iterate, usize)> = None;
        let mut worse = 0;
        // Ends the run from the best iterate seen, if it is close enough.
        let finish = |best: Option<(f64, Iterate, usize)>, msg: &str, it: &Iterate, iter: usize| -> Result<SdpSolution> {
            if let Some((merit, b, k)) = best {
                if merit <= opts.near_tol {
                    let r = self.residuals(&b);
                    return Ok(self.solution(&b, &r, k, SolveStatus::NearOptimal));
                }
            }
            let r = self.residuals(it);
            Err(self.fail(msg.to_string(), it, &r, iter))
        };
        for iter in 0..=opts.max_iter {
            let res = self.residuals(&it);
            let converged = res.gap <= opts.tol_gap && res.pinf <= opts.tol_feas && res.dinf <= opts.tol_feas;
            if converged {
                return Ok(self.solution(&it, &res, iter, SolveStatus::Optimal));
            }
            let merit = res.gap.max(res.pinf).max(res.dinf);
            match &best {
                Some((b, _, _)) if merit >= *b => {
                    worse += 1;
                    if worse >= 5 && *b <= opts.near_tol {
                        return finish(best, "merit stopped descending", &it, iter);
                    }
                }
                _ => {
                    best = Some((merit, it.clone(), iter));
                    worse = 0;
                }
            }
            let xnorm = it.x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let znorm = it
                .z
                .iter()
                .map(max_abs)
                .chain(it.zl.iter().map(|v| v.abs()))
                .chain(it.lam.iter().map(|v| v.abs()))
                .fold(0.0, f64::max);
            if xnorm > opts.divergence && res.pinf <= opts.near_tol {
                return Err(Error::Infeasible("objective is unbounded (dual infeasible)".into()));
            }
            if znorm > opts.divergence && res.dinf <= opts.near_tol {
                return Err(Error::Infeasible("constraints are primal infeasible".into()));
            }
            if xnorm > opts.divergence || znorm > opts.divergence {
                return Err(Error::Infeasible("iterates diverge".into()));
            }
            if iter == opts.max_iter {
                break;
            }
            let (schol, zchol) = match (factors(&it.s), factors(&it.z)) {
                (Some(a), Some(b)) => (a, b),
                _ => return finish(best, "iterate lost definiteness", &it, iter),
            };
            let sinv: Vec<DMatrix<f64>> = schol.iter().map(|c| c.inverse()).collect();
            let mut m = self.schur(&it, &sinv);
            let mchol = match Cholesky::new(m.clone()) {
                Some(c) => c,
                None => {
                    let d = m.diagonal().max().max(1.0) * 1e-13;
                    for i in 0..m.nrows() {
                        m[(i, i)] += d;
                    }
                    match Cholesky::new(m.clone()) {
                        Some(c) => c,
                        None => return finish(best, "Schur complement is not positive definite", &it, iter),
                    }
                }
            };
            let schur_eq = if self.eq.is_empty() {
                None
            } else {
                let n = self.p.n;
                let et = DMatrix::from_fn(n, self.eq.len(), |i, k| {
                    self.eq[k].terms.iter().filter(|t| t.0 == i).map(|t| t.1).sum()
                });
                let minv_et = mchol.solve(&et);
                let emet = et.transpose() * &minv_et;
                match Cholesky::new(emet.clone()) {
                    Some(c) => Some((minv_et, c, emet)),
                    None => return finish(best, "equality constraints are dependent", &it, iter),
                }
            };
            let mu = self.mu(&it);
            let pred = self.direction(&it, &res, &sinv, &mchol, &m, schur_eq.as_ref(), 0.0, None);
            let (ap, ad) = self.steps(&schol, &zchol, &it, &pred);
            let (ap, ad) = (ap.min(1.0), ad.min(1.0));
            let mut mu_aff = 0.0;
            for b in 0..self.p.blocks.len() {
                mu_aff += (&it.s[b] + &pred.ds[b] * ap).dot(&(&it.z[b] + &pred.dz[b] * ad));
            }
            for k in 0..self.ineq.len() {
                mu_aff += (it.sl[k] + ap * pred.dsl[k]) * (it.zl[k] + ad * pred.dzl[k]);
            }
            mu_aff /= self.degree().max(1.0);
            let sigma = if mu > 0.0 { (mu_aff / mu).clamp(0.0, 1.0).powi(3) } else { 0.0 };
            let dir = self.direction(&it, &res, &sinv, &mchol, &m, schur_eq.as_ref(), sigma * mu, Some(&pred));
            let (ap, ad) = self.steps(&schol, &zchol, &it, &dir);
            let mut ap = (opts.step_fraction * ap).min(1.0);
            let mut ad = (opts.step_fraction * ad).min(1.0);
            if opts.verbose {
                eprintln!(
                    "{iter:4} pobj {:+.12e} dobj {:+.12e} gap {:.2e} pinf {:.2e} dinf {:.2e} mu {:.2e} sigma {:.2e} ap {:.3} ad {:.3}",
                    res.pobj, res.dobj, res.gap, res.pinf, res.dinf, mu, sigma, ap, ad
                );
            }
            if ap < 1e-10 && ad < 1e-10 {
                stalled += 1;
                if stalled >= 3 {
                    return finish(best, "step length collapsed", &it, iter);
                }
            } else {
                stalled = 0;
            }
            // Back off while rounding makes the new point lose definiteness.
            let mut next = self.advance(&it, &dir, ap, ad);
            let mut tries = 0;
            while (factors(&next.s).is_none() || factors(&next.z).is_none()) && tries < 8 {
                ap *= 0.5;
                ad *= 0.5;
                next = self.advance(&it, &dir, ap, ad);
                tries += 1;
            }
            it = next;
        }
        finish(best, "iteration limit reached", &it, opts.max_iter)
    }

    fn advance(&self, it: &Iterate, dir: &Direction, ap: f64, ad: f64) -> Iterate {
        let mut next = it.clone();
        for (x, d) in next.x.iter_mut().zip(&dir.dx) {
            *x += ap * d;
        }
        for b in 0..self.p.blocks.len() {
            next.s[b] += &dir.ds[b] * ap;
            next.z[b] += &dir.dz[b] * ad;
        }
        for k in 0..self.ineq.len() {
            next.sl[k] += ap * dir.dsl[k];
            next.zl[k] += ad * dir.dzl[k];
        }
        for (l, d) in next.lam.iter_mut().zip(&dir.dlam) {
            *l += ad * d;
        }
        next
    }
}

fn factors(ms: &[DMatrix<f64>]) -> Option<Vec<Cholesky<f64, Dyn>>> {
    ms.iter().map(|s| Cholesky::new(s.clone())).collect()
}

/// Solves `p` to the tolerances in `opts`.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    if p.n == 0 {
        return Err(Error::arg("problem has no variables"));
    }
    Solver::new(p, opts).run()
}
