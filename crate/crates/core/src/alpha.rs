//! The full symmetry-reduced relaxation `α_m`.
//!
//! With `y_ω = |ω| x_ω` the primal reads
//!
//! ```text
//! α_m = min Σ q_ω y_ω  s.t.  y ≥ 0,  Σ y_ω = 1,  Σ_ω (y_ω/|ω|) A^B_ω ⪰ 0  for every block B,
//! ```
//!
//! where `A^B_ω = U_Bᵀ K_ω U_B` over the representative set.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::coeffs::{tri_index, tri_len};
use crate::cycle::{all_cycles, Cycle};
use crate::error::{Error, Result};
use crate::orbits::OrbitTable;
use crate::repsets::{representative_set_alpha, BlockSign, RepresentativeBlock};
use crate::sdp::{solve, LinExpr, SdpProblem, SdpSolution, SolverOptions};
use crate::tableau::Partition;

/// Largest `m` for which block coefficients are materialized by default.
pub const ALPHA_DEFAULT_MAX_M: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaBlockCoeffs {
    pub lam: Partition,
    pub sign: BlockSign,
    pub dim: usize,
    /// Per orbit id, the upper triangle of `A^B_ω`.
    pub entries: Vec<Vec<i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaCoeffs {
    pub m: usize,
    pub sizes: Vec<u64>,
    pub q: Vec<u16>,
    pub blocks: Vec<AlphaBlockCoeffs>,
}

/// `A^B_ω` for every block and orbit, by summing `u_a(σ) u_b(τ)` over all
/// pairs of cycles.
pub fn alpha_coeffs(table: &OrbitTable, blocks: &[RepresentativeBlock]) -> Result<AlphaCoeffs> {
    let m = table.m();
    if blocks.iter().any(|b| b.lam.m() != m) {
        return Err(Error::arg("representative set does not match the orbit table"));
    }
    let cycles: Vec<Cycle> = all_cycles(m).collect();
    let n = cycles.len();
    let w = table.len();
    let cols: Vec<Vec<Vec<i64>>> = blocks
        .iter()
        .map(|b| (0..b.dim()).map(|k| b.dense_column(k)).collect())
        .collect();
    let zero: Vec<Vec<i64>> = blocks.iter().map(|b| vec![0; w * tri_len(b.dim())]).collect();
    let acc = cycles
        .par_iter()
        .enumerate()
        .try_fold(
            || (zero.clone(), vec![0u32; n], Vec::new()),
            |(mut acc, mut ids, mut sums), (si, s)| -> Result<_> {
                for (ti, t) in cycles.iter().enumerate() {
                    ids[ti] = table.orbit_of_pair(s, t)?;
                }
                for (b, blk) in blocks.iter().enumerate() {
                    let d = blk.dim();
                    let active: Vec<usize> = (0..d).filter(|&a| cols[b][a][si] != 0).collect();
                    if active.is_empty() {
                        continue;
                    }
                    sums.clear();
                    sums.resize(w * d, 0i64);
                    for (bc, col) in cols[b].iter().enumerate() {
                        for (ti, &v) in col.iter().enumerate() {
                            if v != 0 {
                                sums[ids[ti] as usize * d + bc] += v;
                            }
                        }
                    }
                    let tl = tri_len(d);
                    for om in 0..w {
                        let row = &sums[om * d..(om + 1) * d];
                        if row.iter().all(|&x| x == 0) {
                            continue;
                        }
                        let out = &mut acc[b][om * tl..(om + 1) * tl];
                        for &a in &active {
                            let ua = cols[b][a][si];
                            for (bc, &sv) in row.iter().enumerate().skip(a) {
                                out[tri_index(d, a, bc)] += ua * sv;
                            }
                        }
                    }
                }
                Ok((acc, ids, sums))
            },
        )
        .map(|r| r.map(|(acc, _, _)| acc))
        .try_reduce(
            || zero.clone(),
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for (p, q) in x.iter_mut().zip(y) {
                        *p += q;
                    }
                }
                Ok(a)
            },
        )?;
    let blocks = blocks
        .iter()
        .zip(acc)
        .map(|(blk, flat)| {
            let tl = tri_len(blk.dim());
            AlphaBlockCoeffs {
                lam: blk.lam.clone(),
                sign: blk.sign,
                dim: blk.dim(),
                entries: flat.chunks(tl).map(|c| c.to_vec()).collect(),
            }
        })
        .collect();
    Ok(AlphaCoeffs {
        m,
        sizes: table.records().iter().map(|r| r.size).collect(),
        q: table.records().iter().map(|r| r.q).collect(),
        blocks,
    })
}

/// Representative set and coefficients for `m`, refusing sizes above
/// `max_m`.
pub fn build_alpha_coeffs(table: &OrbitTable, max_m: usize) -> Result<AlphaCoeffs> {
    if table.m() > max_m {
        return Err(Error::Resource(format!(
            "alpha coefficients for m = {} exceed the limit m <= {max_m}",
            table.m()
        )));
    }
    let blocks = representative_set_alpha(table.m())?;
    alpha_coeffs(table, &blocks)
}

fn sym_from_tri(d: usize, tri: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        tri[tri_index(d, i, j)]
    })
}

/// The primal program; variable `k` is `y_ω` for orbit id `k`.
pub fn assemble_alpha(c: &AlphaCoeffs) -> Result<SdpProblem> {
    if c.blocks.is_empty() {
        return Err(Error::Dependency("no block coefficients".into()));
    }
    let mut p = SdpProblem::new();
    let w = c.sizes.len();
    for k in 0..w {
        p.scalar(&format!("y{k}"));
    }
    for k in 0..w {
        p.add_ge(&LinExpr::var(k), 0.0)?;
    }
    let mut sum = LinExpr::new();
    for k in 0..w {
        sum.add_term(k, 1.0);
    }
    p.add_eq(&sum, 1.0)?;
    for blk in &c.blocks {
        let d = blk.dim;
        let mut terms = Vec::new();
        let mut scale = 0.0f64;
        for (k, e) in blk.entries.iter().enumerate() {
            for &v in e {
                scale = scale.max((v as f64 / c.sizes[k] as f64).abs());
            }
        }
        if scale == 0.0 {
            return Err(Error::internal("block with identically zero coefficients"));
        }
        for (k, e) in blk.entries.iter().enumerate() {
            if e.iter().all(|&v| v == 0) {
                continue;
            }
            let tri: Vec<f64> = e.iter().map(|&v| v as f64 / (c.sizes[k] as f64 * scale)).collect();
            terms.push((k, sym_from_tri(d, &tri)));
        }
        p.add_lmi(DMatrix::zeros(d, d), terms)?;
    }
    let mut obj = LinExpr::new();
    for (k, &q) in c.q.iter().enumerate() {
        obj.add_term(k, q as f64);
    }
    p.minimize(obj)?;
    Ok(p)
}

#[derive(Clone, Debug)]
pub struct AlphaResult {
    pub m: usize,
    pub alpha: f64,
    /// `x_ω = y_ω/|ω|` per orbit id.
    pub x: Vec<f64>,
    pub solution: SdpSolution,
}

pub fn solve_alpha(c: &AlphaCoeffs, opts: &SolverOptions) -> Result<AlphaResult> {
    let p = assemble_alpha(c)?;
    let solution = solve(&p, opts)?;
    let x = solution.x.iter().zip(&c.sizes).map(|(y, &s)| y / s as f64).collect();
    Ok(AlphaResult { m: c.m, alpha: solution.objective, x, solution })
}

/// Smallest eigenvalue over all blocks of `Σ x_ω A^B_ω` for
/// `X = aJ + bI`, `a = 1/(2((m−1)!)²)`, `b = 1/(2(m−1)!)`.
pub fn witness_min_eigenvalue(c: &AlphaCoeffs, diagonal_id: u32) -> f64 {
    let f: f64 = (1..c.m).map(|k| k as f64).product();
    let (a, b) = (1.0 / (2.0 * f * f), 1.0 / (2.0 * f));
    let mut lmin = f64::INFINITY;
    for blk in &c.blocks {
        let mut tri = vec![0.0; tri_len(blk.dim)];
        for (k, e) in blk.entries.iter().enumerate() {
            let x = a + if k as u32 == diagonal_id { b } else { 0.0 };
            for (t, &v) in tri.iter_mut().zip(e) {
                *t += x * v as f64;
            }
        }
        let ev = SymmetricEigen::new(sym_from_tri(blk.dim, &tri)).eigenvalues;
        lmin = lmin.min(ev.min());
    }
    lmin
}
