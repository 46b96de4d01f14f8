//! The single-block relaxation `β_m` and its certified lower bound.
//!
//! The dual program is
//!
//! ```text
//! β_m = max t  s.t.  Y ⪰ 0 (d × d),  ⟨Y, A_ω⟩ + |ω| t ≤ |ω| q_ω  for all ω.
//! ```
//!
//! It is solved by constraint generation. The solver works with
//! `Ŷ = (m−1)!·Y`, so an optimal rank-one solution reads `Ŷ = v vᵀ`.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{tri_index, BetaCoeffs, BetaRecord};
use crate::error::{Error, Result};
use crate::exact::{dyadic_numerator, is_positive_semidefinite, principal_minors_nonnegative, rational_to_f64_down};
use crate::sdp::{solve, LinExpr, RowId, SdpProblem, SdpSolution, SolverOptions};

#[derive(Clone, Debug)]
pub struct CutConfig {
    /// Cuts added per round.
    pub batch: usize,
    /// Stop once every normalized violation `v_ω/|ω|` is at most this.
    pub tol_cut: f64,
    pub max_rounds: usize,
    /// Rounds a cut may stay slack with a negligible multiplier before it
    /// is dropped.
    pub drop_after: usize,
    pub drop_dual: f64,
    /// Bound on `tr Ŷ` used until enough cuts are active.
    pub trace_bound: f64,
    pub solver: SolverOptions,
}

impl CutConfig {
    pub fn for_m(m: usize) -> Self {
        let fact: f64 = (1..m).map(|k| k as f64).product();
        CutConfig {
            batch: 50,
            tol_cut: 1e-8,
            max_rounds: 500,
            drop_after: 5,
            drop_dual: 1e-12,
            trace_bound: 10.0 * fact,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RoundLog {
    pub round: usize,
    pub active: usize,
    pub objective: f64,
    pub max_violation: f64,
    pub violating_id: Option<u32>,
    pub wall_time_ms: u128,
}

/// Progress of the outer loop; serializable for resumption.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CutState {
    pub m: usize,
    pub active: Vec<u32>,
    /// `Ŷ = (m−1)!·Y`, row-major.
    pub y_hat: Vec<f64>,
    pub t: f64,
    pub log: Vec<RoundLog>,
    #[serde(default)]
    slack_rounds: BTreeMap<u32, usize>,
}

/// Result of a full pass over the orbit records.
#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    /// Largest `v_ω/|ω|`.
    pub max_violation: f64,
    pub argmax: u32,
    /// Violated orbits, most violated first, ties by smaller id.
    pub top: Vec<(u32, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub m: usize,
    pub d: usize,
    /// `Ŷ_cert = N / 2^bits`, so `Y_cert = N / (2^bits (m−1)!)`.
    pub bits: u32,
    #[serde(serialize_with = "ser_big_matrix", deserialize_with = "de_big_matrix")]
    pub numerators: Vec<Vec<BigInt>>,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub t_cert: BigRational,
    pub t_raw: f64,
    /// Largest violation `v_ω/|ω|` at the uncertified point.
    pub delta_max: f64,
    /// Diagonal shift applied before rounding.
    pub shift: f64,
    /// `t_cert` rounded down to a float.
    pub certified_bound: f64,
}

fn ser_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn ser_big_matrix<S: serde::Serializer>(m: &[Vec<BigInt>], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.len()))?;
    for row in m {
        let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        seq.serialize_element(&r)?;
    }
    seq.end()
}

fn de_rational<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
    use serde::de::Error as _;
    let s = String::deserialize(d)?;
    let (p, q) = s.split_once('/').unwrap_or((&s, "1"));
    match (p.parse::<BigInt>(), q.parse::<BigInt>()) {
        (Ok(p), Ok(q)) if !q.is_zero() => Ok(BigRational::new(p, q)),
        _ => Err(D::Error::custom(format!("bad rational {s:?}"))),
    }
}

fn de_big_matrix<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<BigInt>>, D::Error> {
    use serde::de::Error as _;
    let rows = Vec::<Vec<String>>::deserialize(d)?;
    rows.into_iter()
        .map(|r| r.into_iter().map(|x| x.parse::<BigInt>().map_err(D::Error::custom)).collect())
        .collect()
}

impl Certificate {
    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub rank: usize,
    /// Eigenvalues of `Ŷ`, descending.
    pub eigenvalues: Vec<f64>,
    /// For rank one, `v` with `Ŷ = v vᵀ` and a positive first nonzero
    /// entry.
    pub eigenvector: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaResult {
    pub m: usize,
    pub beta: f64,
    /// Dual objective of the last solve, an upper estimate; the exact
    /// optimum lies between `certified_bound` and this value.
    pub beta_upper: f64,
    pub certified_bound: f64,
    pub rank: usize,
    pub eigenvector: Option<Vec<f64>>,
    /// `w = v/√(2(m−1)!)`, so that `Y = 2 w wᵀ`.
    pub scaled_eigenvector: Option<Vec<f64>>,
    pub rounds: usize,
    pub total_time: f64,
    #[serde(skip)]
    pub solution: SdpSolution,
    #[serde(skip)]
    pub certificate: Certificate,
    #[serde(skip)]
    pub state: CutState,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn big_factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// `⟨Ŷ, A⟩` with compensated summation; `y` row-major `d × d`.
fn inner(d: usize, y: &[f64], a: &[i64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for i in 0..d {
        for j in i..d {
            let w = if i == j { 1.0 } else { 2.0 };
            let term = w * y[i * d + j] * a[tri_index(d, i, j)] as f64;
            let s = sum + term;
            comp += if sum.abs() >= term.abs() { (sum - s) + term } else { (term - s) + sum };
            sum = s;
        }
    }
    sum + comp
}

/// `v_ω/|ω| = ⟨Y, A_ω⟩/|ω| + t − q_ω`.
pub fn violation(c: &BetaCoeffs, r: &BetaRecord, y_hat: &[f64], t: f64) -> f64 {
    inner(c.d, y_hat, &r.a) / (factorial(c.m - 1) * r.size as f64) + t - r.q as f64
}

/// Streams all orbits and ranks the violated ones.
pub fn scan_violations(c: &BetaCoeffs, y_hat: &[f64], t: f64, k: usize) -> Scan {
    let better = |a: &(u32, f64), b: &(u32, f64)| a.1 > b.1 || (a.1 == b.1 && a.0 < b.0);
    let (argmax, max_violation) = c
        .records
        .par_iter()
        .map(|r| (r.id, violation(c, r, y_hat, t)))
        .reduce(|| (u32::MAX, f64::NEG_INFINITY), |a, b| if better(&a, &b) { a } else { b });
    let mut top: Vec<(u32, f64)> = c
        .records
        .par_iter()
        .filter_map(|r| {
            let v = violation(c, r, y_hat, t);
            (v > 0.0).then_some((r.id, v))
        })
        .collect();
    top.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    top.truncate(k);
    Scan { max_violation, argmax, top }
}

struct Program {
    problem: SdpProblem,
    y: crate::sdp::MatrixVar,
    t: usize,
    rows: Vec<(u32, RowId)>,
}

fn build_program(c: &BetaCoeffs, active: &[u32], trace_bound: Option<f64>) -> Result<Program> {
    let mut p = SdpProblem::new();
    let y = p.psd_matrix("Y", c.d);
    let t = p.scalar("t");
    let scale = factorial(c.m - 1);
    let mut rows = Vec::with_capacity(active.len());
    for &id in active {
        let r = &c.records[id as usize];
        let tri: Vec<f64> = r.a.iter().map(|&v| v as f64 / (scale * r.size as f64)).collect();
        let mut e = y.inner_tri(&tri);
        e.add_term(t, 1.0);
        rows.push((id, p.add_le(&e, r.q as f64)?));
    }
    if let Some(b) = trace_bound {
        let mut e = LinExpr::new();
        for i in 0..c.d {
            e.add_term(y.entry(i, i), 1.0);
        }
        p.add_le(&e, b)?;
    }
    p.maximize(LinExpr::var(t))?;
    Ok(Program { problem: p, y, t, rows })
}

/// Solves the program with exactly the constraints in `active`.
pub fn solve_with(c: &BetaCoeffs, active: &[u32], trace_bound: Option<f64>, opts: &SolverOptions) -> Result<(SdpSolution, Vec<f64>, f64, Vec<f64>)> {
    let prog = build_program(c, active, trace_bound)?;
    let sol = solve(&prog.problem, opts)?;
    let y = prog.y.value(&sol.x);
    let y_hat: Vec<f64> = y.transpose().iter().copied().collect();
    let duals = prog.rows.iter().map(|(_, r)| sol.dual_of(*r)).collect();
    let t = sol.x[prog.t];
    Ok((sol, y_hat, t, duals))
}

/// The constraint-generation loop.
pub fn run_beta(
    c: &BetaCoeffs,
    cfg: &CutConfig,
    resume: Option<CutState>,
    mut progress: impl FnMut(&RoundLog, &CutState),
) -> Result<BetaResult> {
    let start = Instant::now();
    let d = c.d;
    let diag = c.diagonal_id()?;
    let mut state = match resume {
        Some(s) if s.m == c.m && !s.active.is_empty() => s,
        _ => CutState { m: c.m, active: vec![diag], ..Default::default() },
    };
    let unbounded_below = d * (d + 1) / 2 + 1;
    let mut last_obj = f64::INFINITY;
    loop {
        let round = state.log.len();
        if round >= cfg.max_rounds {
            return Err(Error::Resource(format!("no convergence within {} rounds", cfg.max_rounds)));
        }
        let use_trace = state.active.len() < unbounded_below;
        let attempt = solve_with(c, &state.active, use_trace.then_some(cfg.trace_bound), &cfg.solver);
        let (sol, y_hat, t, duals) = match attempt {
            Err(Error::Infeasible(_)) if !use_trace => solve_with(c, &state.active, Some(cfg.trace_bound), &cfg.solver)?,
            other => other?,
        };
        if sol.objective > last_obj + 1e-7 * last_obj.abs().max(1.0) {
            return Err(Error::internal(format!(
                "objective increased from {last_obj} to {} after adding cuts",
                sol.objective
            )));
        }
        last_obj = sol.objective;
        let scan = scan_violations(c, &y_hat, t, cfg.batch);
        state.y_hat = y_hat;
        state.t = t;
        let log = RoundLog {
            round,
            active: state.active.len(),
            objective: sol.objective,
            max_violation: scan.max_violation,
            violating_id: (scan.max_violation > cfg.tol_cut).then_some(scan.argmax),
            wall_time_ms: start.elapsed().as_millis(),
        };
        state.log.push(log.clone());
        progress(&log, &state);
        if scan.max_violation <= cfg.tol_cut {
            let certificate = certify(c, &state.y_hat, t);
            let rank = check_rank_structure(&state.y_hat, d, 1e-5);
            return Ok(BetaResult {
                m: c.m,
                beta: sol.objective,
                beta_upper: sol.dual_objective.max(sol.objective),
                certified_bound: certificate.certified_bound,
                rank: rank.rank,
                scaled_eigenvector: rank.eigenvector.as_ref().map(|v| scale_eigenvector(c.m, v)),
                eigenvector: rank.eigenvector,
                rounds: state.log.len(),
                total_time: start.elapsed().as_secs_f64(),
                solution: sol,
                certificate,
                state,
            });
        }
        // Drop long-slack cuts, never the diagonal one.
        let mut keep = Vec::with_capacity(state.active.len());
        for (&id, &z) in state.active.iter().zip(&duals) {
            let r = &c.records[id as usize];
            let slack = -violation(c, r, &state.y_hat, t);
            let counter = state.slack_rounds.entry(id).or_insert(0);
            if slack > cfg.tol_cut && z < cfg.drop_dual {
                *counter += 1;
            } else {
                *counter = 0;
            }
            if id == diag || *counter < cfg.drop_after {
                keep.push(id);
            } else {
                state.slack_rounds.remove(&id);
            }
        }
        state.active = keep;
        for (id, _) in scan.top {
            if !state.active.contains(&id) {
                state.active.push(id);
            }
        }
    }
}

/// Certified lower bound from an approximate dual point.
pub fn certify(c: &BetaCoeffs, y_hat: &[f64], t: f64) -> Certificate {
    let d = c.d;
    let delta_max = c.records.iter().map(|r| violation(c, r, y_hat, t)).fold(f64::NEG_INFINITY, f64::max);
    let y = DMatrix::from_row_slice(d, d, y_hat);
    let y = (&y + y.transpose()) * 0.5;
    let eig = SymmetricEigen::new(y.clone()).eigenvalues;
    let (lmin, lmax) = (eig.min(), eig.max().max(0.0));
    let bits = 48u32;
    let mut margin = (1e-12 * lmax.max(1.0)).max(4.0 * d as f64 * (-(bits as f64)).exp2());
    let mut shift = 0.0;
    loop {
        let numerators: Vec<Vec<BigInt>> = (0..d)
            .map(|i| (0..d).map(|j| dyadic_numerator(y[(i, j)] + if i == j { shift } else { 0.0 }, bits)).collect())
            .collect();
        let q: Vec<Vec<BigRational>> = numerators
            .iter()
            .map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect())
            .collect();
        if is_positive_semidefinite(&q) {
            let t_cert = exact_t(c, &numerators, bits);
            return Certificate {
                m: c.m,
                d,
                bits,
                certified_bound: rational_to_f64_down(&t_cert),
                numerators,
                t_cert,
                t_raw: t,
                delta_max,
                shift,
            };
        }
        shift = (-lmin).max(0.0) + margin;
        margin *= 16.0;
    }
}

/// `min_ω (|ω| q_ω − ⟨Y, A_ω⟩)/|ω|` for `Ŷ = N/2^bits`.
fn exact_t(c: &BetaCoeffs, n: &[Vec<BigInt>], bits: u32) -> BigRational {
    let d = c.d;
    let denom = big_factorial(c.m - 1) << bits;
    let tri: Vec<BigInt> = (0..d)
        .flat_map(|i| (i..d).map(move |j| (i, j)))
        .map(|(i, j)| if i == j { n[i][j].clone() } else { &n[i][j] * 2 })
        .collect();
    c.records
        .par_iter()
        .map(|r| {
            let ip: BigInt = r.a.iter().zip(&tri).map(|(&a, y)| y * a).sum();
            let size = BigInt::from(r.size);
            let num = &size * r.q * &denom - ip;
            BigRational::new(num, size * &denom)
        })
        .reduce_with(|a, b| if a <= b { a } else { b })
        .expect("at least one orbit")
}

/// Independent exact re-check: `Ŷ_cert ⪰ 0` by principal minors and every
/// constraint `⟨Y, A_ω⟩ + |ω| t ≤ |ω| q_ω` cross-multiplied in integers.
pub fn verify_certificate(c: &BetaCoeffs, cert: &Certificate) -> bool {
    if cert.m != c.m || cert.d != c.d || cert.numerators.len() != c.d {
        return false;
    }
    if !principal_minors_nonnegative(&cert.numerators) {
        return false;
    }
    let d = c.d;
    let scale = big_factorial(c.m - 1) << cert.bits;
    let (p, q) = (cert.t_cert.numer().clone(), cert.t_cert.denom().clone());
    if !q.is_positive() {
        return false;
    }
    c.records.par_iter().all(|r| {
        let mut ip = BigInt::zero();
        for i in 0..d {
            for j in 0..d {
                ip += &cert.numerators[i][j] * r.entry(d, i, j);
            }
        }
        // ip/scale + |ω| p/q ≤ |ω| q_ω  ⇔  ip·q + |ω| p·scale ≤ |ω| q_ω q·scale
        let size = BigInt::from(r.size);
        &ip * &q + &size * &p * &scale <= &size * r.q * &q * &scale
    })
}

/// Numerical rank of `Ŷ` and, for rank one, its generating vector.
pub fn check_rank_structure(y_hat: &[f64], d: usize, eps: f64) -> RankReport {
    let y = DMatrix::from_row_slice(d, d, y_hat);
    let eig = SymmetricEigen::new((&y + y.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let lmax = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let rank = eigenvalues.iter().filter(|&&l| l > eps * lmax).count();
    let eigenvector = (rank == 1).then(|| {
        let col = eig.eigenvectors.column(order[0]);
        let sign = col.iter().find(|x| x.abs() > 1e-12).map_or(1.0, |x| x.signum());
        col.iter().map(|x| sign * lmax.sqrt() * x).collect()
    });
    RankReport { rank, eigenvalues, eigenvector }
}

/// `v/√(2(m−1)!)`.
pub fn scale_eigenvector(m: usize, v: &[f64]) -> Vec<f64> {
    let s = (2.0 * factorial(m - 1)).sqrt();
    v.iter().map(|x| x / s).collect()
}

/// Floating value of a certificate's `Ŷ`.
pub fn certificate_matrix(cert: &Certificate) -> Vec<f64> {
    let s = (-(cert.bits as f64)).exp2();
    cert.numerators.iter().flatten().map(|x| x.to_f64().unwrap_or(f64::NAN) * s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{beta_coeffs, BetaRoute};
    use crate::orbits::enumerate_orbits;
    use crate::qmatrix::bfs_from_base;

    fn coeffs(m: usize) -> BetaCoeffs {
        let t = enumerate_orbits(&bfs_from_base(m).unwrap()).unwrap();
        beta_coeffs(&t, BetaRoute::OrbitSum).unwrap()
    }

    #[test]
    fn zero_point_has_no_violation() {
        let c = coeffs(6);
        let y = vec![0.0; c.d * c.d];
        let s = scan_violations(&c, &y, 0.0, 50);
        assert!(s.max_violation <= 0.0);
        assert!(s.top.is_empty());
    }

    #[test]
    fn min_q_orbit_is_most_violated() {
        let c = coeffs(6);
        let qmin = c.records.iter().map(|r| r.q).min().unwrap();
        let y = vec![0.0; c.d * c.d];
        let s = scan_violations(&c, &y, qmin as f64 + 1.0, 50);
        assert_eq!(c.records[s.argmax as usize].q, qmin);
        assert_eq!(s.top[0].0, s.argmax);
    }

    #[test]
    fn zero_matrix_certifies_min_q() {
        let c = coeffs(6);
        let qmin = c.records.iter().map(|r| r.q).min().unwrap();
        let cert = certify(&c, &vec![0.0; c.d * c.d], qmin as f64);
        assert!(verify_certificate(&c, &cert));
        assert!(cert.certified_bound <= qmin as f64);
        assert!(cert.certified_bound > qmin as f64 - 1e-9);
    }

    #[test]
    fn certificate_json_roundtrip() {
        let c = coeffs(6);
        let res = run_beta(&c, &CutConfig::for_m(6), None, |_, _| {}).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cert.json");
        res.certificate.write_json(&path).unwrap();
        let back = Certificate::read_json(&path).unwrap();
        assert_eq!(back, res.certificate);
        assert!(verify_certificate(&c, &back));
        let mut bad = back.clone();
        bad.t_cert += BigRational::new(1.into(), 1000.into());
        assert!(!verify_certificate(&c, &bad));
    }

    #[test]
    fn m5_full_and_cut_agree() {
        let c = coeffs(5);
        let all: Vec<u32> = c.records.iter().map(|r| r.id).collect();
        let (full, _, _, _) = solve_with(&c, &all, None, &SolverOptions::default()).unwrap();
        let res = run_beta(&c, &CutConfig::for_m(5), None, |_, _| {}).unwrap();
        assert!((full.objective - res.beta).abs() < 1e-8);
    }

    #[test]
    fn rank_one_vectors() {
        let cases: [(usize, &[f64]); 2] = [(5, &[0.5477, 0.3385]), (7, &[0.9241589976, 0.7763005370, 0.4669300267])];
        for (m, want) in cases {
            let res = run_beta(&coeffs(m), &CutConfig::for_m(m), None, |_, _| {}).unwrap();
            assert_eq!(res.rank, 1, "m={m}");
            let w = res.scaled_eigenvector.unwrap();
            for (a, b) in w.iter().zip(want) {
                assert!((a - b).abs() < 1e-3, "m={m}: {w:?}");
            }
        }
    }
}
