//! Block-diagonalization coefficients.
//!
//! For columns `u_a, u_b` of a representative block and an invariant
//! `X = Σ_ω x_ω K_ω`, the entry `u_aᵀ X u_b` is a linear form in the `x_ω`.
//! Its coefficient of `x_ω` is `Σ_{(σ,τ) ∈ ω} u_a(σ) u_b(τ)`.
//!
//! Three routes compute these forms:
//!
//! * direct expansion over the index set of the tableau sums (an oracle for
//!   small `m`);
//! * the polynomial method, which expands `p_{T1,T2}` and reads each
//!   permutation-pattern monomial as a pair of cycles;
//! * for the hook block, an orbit-sum over concrete cycles. The columns
//!   `u_i` only see the positions of `1, m−1, m`, so they are invariant
//!   under permutations of the values `2..=m−2`; summing over one cycle per
//!   position pattern of `m−1, m`, weighted by `(m−3)!`, covers every first
//!   coordinate.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cache::{self, Reader};
use crate::cycle::{all_cycles, canonical_under_hm, cycles_in_range, Cycle, GroupElement, Perm, MAX_M};
use crate::error::{Error, Result};
use crate::orbits::OrbitTable;
use crate::poly::{pair_polynomial, Monomial};
use crate::repsets::BetaEvaluator;
use crate::tableau::{tableau_vector, theta_terms, GenTableau, Tabloid};

const MAGIC: &[u8; 4] = b"COEF";
const VERSION: u8 = 1;

/// Largest `m` accepted by [`direct_expansion`].
pub const DIRECT_MAX_M: usize = 7;

/// `Σ_ω c_ω x_ω`, keyed by symmetric orbit id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearForm {
    pub coeffs: BTreeMap<u32, i64>,
}

impl LinearForm {
    pub fn add(&mut self, id: u32, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(id).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&id);
        }
    }

    pub fn get(&self, id: u32) -> i64 {
        self.coeffs.get(&id).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Sum of all coefficients.
    pub fn total(&self) -> i64 {
        self.coeffs.values().sum()
    }
}

/// Orbit of the pair read off a permutation-pattern monomial: first cycle
/// `σ₀`, second cycle with `π⁻¹(b)` at position `b`. With `eta`, the first
/// cycle is inverted, which is the same orbit as `(σ₀, τ⁻¹)`.
pub fn monomial_to_orbit(pi: &[u8], table: &OrbitTable, eta: bool) -> Result<u32> {
    let m = table.m();
    let perm = Perm::from_images(pi)
        .map_err(|_| Error::arg("monomial is not a permutation pattern"))?;
    if perm.m() != m {
        return Err(Error::arg("monomial size does not match the orbit table"));
    }
    let inv = perm.inverse();
    let seq: Vec<u8> = (1..=m as u8).map(|b| inv.apply(b)).collect();
    let tau = Cycle::normalized(&seq);
    let tau = if eta { tau.inverse() } else { tau };
    table.orbit_of_pair(&Cycle::base(m), &tau)
}

/// The signed list `(f(t[cT′]), sgn c)` over all `T′ ∼ T`, `c ∈ C_t`.
fn expansion_terms(big_t: &GenTableau) -> Result<Vec<(Cycle, i64)>> {
    let t = GenTableau::row_reading(big_t.shape());
    let base = Tabloid::of_tableau(&t)?;
    let mut out = Vec::new();
    for (c, sign) in t.column_group() {
        theta_terms(big_t, &base.permuted(&c), |s| {
            out.push((Cycle::normalized(&s.reading()), sign));
        });
    }
    Ok(out)
}

fn check_pair(t1: &GenTableau, t2: &GenTableau, table: &OrbitTable) -> Result<()> {
    if t1.shape() != t2.shape() {
        return Err(Error::arg("tableaux of different shapes"));
    }
    if !t1.has_unit_content() || !t2.has_unit_content() {
        return Err(Error::arg("tableaux must have content (1^m)"));
    }
    if t1.m() != table.m() {
        return Err(Error::arg("tableau size does not match the orbit table"));
    }
    Ok(())
}

/// `u_{T1}ᵀ X u_{T2}` (or `(η u_{T1})ᵀ X u_{T2}` with `eta`) by summing over
/// every quadruple `(T1′, T2′, c, c′)`.
pub fn direct_expansion(
    t1: &GenTableau,
    t2: &GenTableau,
    table: &OrbitTable,
    eta: bool,
) -> Result<LinearForm> {
    check_pair(t1, t2, table)?;
    if table.m() > DIRECT_MAX_M {
        return Err(Error::Resource(format!(
            "direct expansion is limited to m <= {DIRECT_MAX_M}"
        )));
    }
    let l1 = expansion_terms(t1)?;
    let l2 = expansion_terms(t2)?;
    let mut form = LinearForm::default();
    for (s, a) in &l1 {
        let s = if eta { s.inverse() } else { *s };
        for (t, b) in &l2 {
            form.add(table.orbit_of_pair(&s, t)?, a * b);
        }
    }
    Ok(form)
}

/// The same form from the collapsed vectors `f(ϑ_T(e_t))`.
pub fn direct_expansion_collapsed(
    t1: &GenTableau,
    t2: &GenTableau,
    table: &OrbitTable,
    eta: bool,
) -> Result<LinearForm> {
    check_pair(t1, t2, table)?;
    let m = table.m();
    let t = GenTableau::row_reading(t1.shape());
    let u1 = tableau_vector(t1, &t)?;
    let u2 = tableau_vector(t2, &t)?;
    let cycles: Vec<Cycle> = all_cycles(m).collect();
    let mut form = LinearForm::default();
    for (s, &a) in cycles.iter().zip(&u1) {
        if a == 0 {
            continue;
        }
        let s = if eta { s.inverse() } else { *s };
        for (t, &b) in cycles.iter().zip(&u2) {
            if b != 0 {
                form.add(table.orbit_of_pair(&s, t)?, a * b);
            }
        }
    }
    Ok(form)
}

/// The same form by the polynomial method.
pub fn poly_method(
    t1: &GenTableau,
    t2: &GenTableau,
    table: &OrbitTable,
    eta: bool,
) -> Result<LinearForm> {
    check_pair(t1, t2, table)?;
    let p = pair_polynomial(t1, t2)?;
    let mut form = LinearForm::default();
    for (mono, c) in p.terms() {
        let pi = mono.as_permutation().ok_or_else(|| {
            Error::internal(format!("non-permutation monomial {:?}", mono.factors()))
        })?;
        form.add(monomial_to_orbit(&pi, table, eta)?, c);
    }
    Ok(form)
}

/// Number of distinct monomials in `p_{T1,T2}`.
pub fn monomial_count(t1: &GenTableau, t2: &GenTableau) -> Result<usize> {
    Ok(pair_polynomial(t1, t2)?.len())
}

/// Reads a monomial as a permutation pattern, for callers holding raw
/// factors.
pub fn pattern_of(mono: &Monomial) -> Option<Vec<u8>> {
    mono.as_permutation()
}

/// Index of `(i, j)`, `i ≤ j`, in the row-major upper triangle of a `d × d`
/// matrix.
#[inline]
pub fn tri_index(d: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < d);
    i * d - i * (i + 1) / 2 + j
}

pub fn tri_len(d: usize) -> usize {
    d * (d + 1) / 2
}

/// One constraint row of the hook-block program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaRecord {
    pub id: u32,
    pub size: u64,
    pub q: u16,
    /// Upper triangle of `A_ω`, row-major.
    pub a: Vec<i64>,
}

impl BetaRecord {
    pub fn entry(&self, d: usize, i: usize, j: usize) -> i64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.a[tri_index(d, i, j)]
    }
}

/// How to compute hook-block coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BetaRoute {
    Direct,
    Poly,
    OrbitSum,
}

impl std::str::FromStr for BetaRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(BetaRoute::Direct),
            "poly" => Ok(BetaRoute::Poly),
            "orbit-sum" => Ok(BetaRoute::OrbitSum),
            _ => Err(Error::arg(format!("unknown coefficient route {s:?}"))),
        }
    }
}

/// `A_ω` for every orbit, for the hook block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaCoeffs {
    pub m: usize,
    pub d: usize,
    pub records: Vec<BetaRecord>,
}

impl BetaCoeffs {
    /// Id of the orbit of `(σ₀, σ₀)`: the only orbit of size `(m−1)!` whose
    /// `q` is the diagonal value `⌊(m−1)²/4⌋`.
    pub fn diagonal_id(&self) -> Result<u32> {
        let size: u64 = (1..self.m as u64).product();
        let q = ((self.m - 1) * (self.m - 1) / 4) as u16;
        let mut hits = self.records.iter().filter(|r| r.size == size && r.q == q);
        match (hits.next(), hits.next()) {
            (Some(r), None) => Ok(r.id),
            _ => Err(Error::data("cannot identify the diagonal orbit")),
        }
    }

    fn from_forms(table: &OrbitTable, d: usize, forms: &[LinearForm]) -> Self {
        let records = table
            .records()
            .iter()
            .map(|r| BetaRecord {
                id: r.symmetric_id,
                size: r.size,
                q: r.q,
                a: forms.iter().map(|f| f.get(r.symmetric_id)).collect(),
            })
            .collect();
        BetaCoeffs { m: table.m(), d, records }
    }

    fn from_dense(table: &OrbitTable, d: usize, dense: &[i64]) -> Self {
        let t = tri_len(d);
        let records = table
            .records()
            .iter()
            .map(|r| {
                let k = r.symmetric_id as usize;
                BetaRecord { id: r.symmetric_id, size: r.size, q: r.q, a: dense[k * t..(k + 1) * t].to_vec() }
            })
            .collect();
        BetaCoeffs { m: table.m(), d, records }
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let t = tri_len(self.d);
        let mut out = Vec::with_capacity(15 + self.records.len() * (18 + 8 * t));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.m as u8);
        out.push(self.d as u8);
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(&(r.id as u64).to_le_bytes());
            out.extend_from_slice(&r.size.to_le_bytes());
            out.extend_from_slice(&r.q.to_le_bytes());
            for v in &r.a {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        cache::write_with_checksum(path, &out)
    }

    pub fn read_cache(path: &Path, m: usize) -> Result<Self> {
        let bytes = cache::read_verified(path)?;
        let mut r = Reader::new(&bytes);
        r.header(MAGIC, VERSION, m)?;
        let d = r.u8()? as usize;
        if d != (m - 1) / 2 {
            return Err(Error::data(format!("coefficient cache has d = {d}")));
        }
        let count = r.u64()? as usize;
        let t = tri_len(d);
        let mut records = Vec::with_capacity(count);
        for k in 0..count {
            let id = r.u64()?;
            if id != k as u64 {
                return Err(Error::data("coefficient cache ids are not consecutive"));
            }
            let size = r.u64()?;
            let q = r.u16()?;
            let a = (0..t).map(|_| r.i64()).collect::<Result<Vec<_>>>()?;
            records.push(BetaRecord { id: id as u32, size, q, a });
        }
        if !r.is_done() {
            return Err(Error::data("trailing bytes in coefficient cache"));
        }
        Ok(BetaCoeffs { m, d, records })
    }
}

/// Hook-block coefficients by the chosen route.
pub fn beta_coeffs(table: &OrbitTable, route: BetaRoute) -> Result<BetaCoeffs> {
    let m = table.m();
    let eval = BetaEvaluator::new(m)?;
    let d = eval.dim();
    match route {
        BetaRoute::OrbitSum => beta_coeffs_orbit_sum(table),
        BetaRoute::Direct | BetaRoute::Poly => {
            let tabs: Vec<GenTableau> =
                eval.indices().map(|i| GenTableau::beta_column(m, i)).collect::<Result<_>>()?;
            let pairs: Vec<(usize, usize)> =
                (0..d).flat_map(|i| (i..d).map(move |j| (i, j))).collect();
            let forms: Vec<Result<LinearForm>> = pairs
                .par_iter()
                .map(|&(i, j)| match route {
                    BetaRoute::Direct => direct_expansion(&tabs[i], &tabs[j], table, false),
                    _ => poly_method(&tabs[i], &tabs[j], table, false),
                })
                .collect();
            let forms = forms.into_iter().collect::<Result<Vec<_>>>()?;
            Ok(BetaCoeffs::from_forms(table, d, &forms))
        }
    }
}

/// One first coordinate per position pattern of `m−1` and `m`, with its
/// nonzero column values.
fn hook_representatives(eval: &BetaEvaluator) -> Vec<(Perm, Vec<i64>)> {
    let m = eval.m();
    let mut reps = Vec::new();
    for p in 1..m {
        for q in 1..m {
            if p == q {
                continue;
            }
            let mut seq = [0u8; MAX_M];
            seq[0] = 1;
            seq[p] = m as u8 - 1;
            seq[q] = m as u8;
            let mut next = 2u8;
            for slot in seq[1..m].iter_mut() {
                if *slot == 0 {
                    *slot = next;
                    next += 1;
                }
            }
            let c = Cycle::new(&seq[..m]).expect("valid representative");
            let u = eval.evaluate_vec(&c);
            if u.iter().any(|&x| x != 0) {
                reps.push((Perm::normalizing(&c), u));
            }
        }
    }
    reps
}

/// Hook-block coefficients by the orbit-sum route.
pub fn beta_coeffs_orbit_sum(table: &OrbitTable) -> Result<BetaCoeffs> {
    let m = table.m();
    let eval = BetaEvaluator::new(m)?;
    let d = eval.dim();
    let t = tri_len(d);
    let reps = hook_representatives(&eval);
    let n: u64 = (1..m as u64).product();
    let weight: i64 = (1..=(m as i64 - 3)).product();
    let chunks = rayon::current_num_threads().max(1) as u64 * 4;
    let step = n.div_ceil(chunks);
    let len = table.len() * t;
    let partials: Vec<Result<Vec<i64>>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut acc = vec![0i64; len];
            let mut ut = vec![0i64; d];
            for tau in cycles_in_range(m, k * step, (k + 1) * step) {
                eval.evaluate(&tau, &mut ut);
                if ut.iter().all(|&x| x == 0) {
                    continue;
                }
                for (pi, us) in &reps {
                    let g = GroupElement::new(*pi, false);
                    let key = canonical_under_hm(&g.act_unchecked(&tau));
                    let base = table.id_of_canonical(&key)? as usize * t;
                    for i in 0..d {
                        if us[i] == 0 {
                            continue;
                        }
                        for j in i..d {
                            acc[base + tri_index(d, i, j)] += us[i] * ut[j];
                        }
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![0i64; len];
    for p in partials {
        for (a, b) in total.iter_mut().zip(p?) {
            *a += b;
        }
    }
    for a in total.iter_mut() {
        *a = a.checked_mul(weight).ok_or_else(|| Error::internal("coefficient overflow"))?;
    }
    Ok(BetaCoeffs::from_dense(table, d, &total))
}

/// Loads `coeffs_<m>_beta.bin` from `dir` or computes and stores it.
pub fn load_or_build_beta(dir: &Path, table: &OrbitTable, route: BetaRoute) -> Result<BetaCoeffs> {
    let path = cache::coeffs_beta_path(dir, table.m());
    if path.exists() {
        let c = BetaCoeffs::read_cache(&path, table.m())?;
        if c.records.len() != table.len() {
            return Err(Error::data("coefficient cache does not match the orbit table"));
        }
        return Ok(c);
    }
    let c = beta_coeffs(table, route)?;
    c.write_cache(&path)?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::enumerate_orbits;
    use crate::qmatrix::bfs_from_base;

    fn table(m: usize) -> OrbitTable {
        enumerate_orbits(&bfs_from_base(m).unwrap()).unwrap()
    }

    #[test]
    fn monomial_identity_is_diagonal() {
        for m in 4..=7 {
            let t = table(m);
            let id: Vec<u8> = (1..=m as u8).collect();
            assert_eq!(monomial_to_orbit(&id, &t, false).unwrap(), t.diagonal_id());
        }
    }

    #[test]
    fn monomial_reversal_is_inverse_pair() {
        let t = table(5);
        // π fixes 1 and reverses 2..5: π = [1,5,4,3,2]; τ reads π⁻¹(b) = (1 5 4 3 2)
        let pi = [1u8, 5, 4, 3, 2];
        let want = t.orbit_of_pair(&Cycle::base(5), &Cycle::base(5).inverse()).unwrap();
        assert_eq!(monomial_to_orbit(&pi, &t, false).unwrap(), want);
        assert!(monomial_to_orbit(&[1, 1, 2, 3, 4], &t, false).is_err());
    }

    #[test]
    fn direct_expansion_orders_agree() {
        for m in 4..=6 {
            let t = table(m);
            for i in 3..=(m + 1) / 2 + 1 {
                for j in 3..=(m + 1) / 2 + 1 {
                    let a = GenTableau::beta_column(m, i).unwrap();
                    let b = GenTableau::beta_column(m, j).unwrap();
                    for eta in [false, true] {
                        assert_eq!(
                            direct_expansion(&a, &b, &t, eta).unwrap(),
                            direct_expansion_collapsed(&a, &b, &t, eta).unwrap()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn direct_m4_has_three_orbits_at_most() {
        let t = table(4);
        let a = GenTableau::beta_column(4, 3).unwrap();
        let f = direct_expansion(&a, &a, &t, false).unwrap();
        assert!(f.len() <= 3);
        assert!(!f.is_empty());
    }

    #[test]
    fn routes_agree_small() {
        for m in 4..=7 {
            let t = table(m);
            let direct = beta_coeffs(&t, BetaRoute::Direct).unwrap();
            let poly = beta_coeffs(&t, BetaRoute::Poly).unwrap();
            let sum = beta_coeffs(&t, BetaRoute::OrbitSum).unwrap();
            assert_eq!(direct, poly, "m={m}");
            assert_eq!(direct, sum, "m={m}");
        }
    }

    #[test]
    fn hook_eta_form_is_negated() {
        let t = table(6);
        let a = GenTableau::beta_column(6, 3).unwrap();
        let b = GenTableau::beta_column(6, 4).unwrap();
        let plain = poly_method(&a, &b, &t, false).unwrap();
        let eta = poly_method(&a, &b, &t, true).unwrap();
        for (id, c) in &plain.coeffs {
            assert_eq!(eta.get(*id), -c);
        }
    }

    #[test]
    fn diagonal_is_identified() {
        for m in 4..=8 {
            let t = table(m);
            let c = beta_coeffs(&t, BetaRoute::OrbitSum).unwrap();
            assert_eq!(c.diagonal_id().unwrap(), t.diagonal_id());
        }
    }

    #[test]
    fn pair_forms_are_symmetric() {
        for m in 4..=6 {
            let t = table(m);
            let hi = (m + 1) / 2 + 1;
            for i in 3..=hi {
                for j in i..=hi {
                    let a = GenTableau::beta_column(m, i).unwrap();
                    let b = GenTableau::beta_column(m, j).unwrap();
                    assert_eq!(
                        poly_method(&a, &b, &t, false).unwrap(),
                        poly_method(&b, &a, &t, false).unwrap(),
                        "m={m} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn expansion_term_count_m5() {
        let a = GenTableau::beta_column(5, 3).unwrap();
        let terms = expansion_terms(&a).unwrap();
        assert_eq!(terms.len(), 6 * 6);
        let b = GenTableau::beta_column(5, 4).unwrap();
        let n = expansion_terms(&a).unwrap().len() * expansion_terms(&b).unwrap().len();
        assert_eq!(n, (6 * 6) * (6 * 6));
    }

    /// `S_m`-class of the pair `(σ₀, τ)` read off a monomial: the least
    /// conjugate of `τ` under the rotations fixing `σ₀`.
    fn sm_class(pi: &[u8]) -> u64 {
        let m = pi.len();
        let inv = Perm::from_images(pi).unwrap().inverse();
        let seq: Vec<u8> = (1..=m as u8).map(|b| inv.apply(b)).collect();
        let tau = Cycle::normalized(&seq);
        let mut rot = Perm::identity(m);
        let step = Perm::from_images(&(1..=m as u8).map(|v| v % m as u8 + 1).collect::<Vec<_>>())
            .unwrap();
        let mut best = u64::MAX;
        for _ in 0..m {
            let c = crate::cycle::act(&crate::cycle::GroupElement::new(rot.clone(), false), &tau)
                .unwrap();
            best = best.min(c.pack());
            rot = rot.compose(&step);
        }
        best
    }

    #[test]
    fn monomial_classes_bounded_by_orbits() {
        for m in 4..=7 {
            let hi = (m + 1) / 2 + 1;
            let mut seen = std::collections::BTreeSet::new();
            for i in 3..=hi {
                for j in 3..=hi {
                    let a = GenTableau::beta_column(m, i).unwrap();
                    let b = GenTableau::beta_column(m, j).unwrap();
                    for (mono, _) in pair_polynomial(&a, &b).unwrap().terms() {
                        seen.insert(sm_class(&mono.as_permutation().unwrap()));
                    }
                }
            }
            let orbits = crate::orbits::count_sm_orbits(m).unwrap() as usize;
            assert!(seen.len() <= orbits, "m={m}: {} > {orbits}", seen.len());
        }
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let t = table(7);
        let c = beta_coeffs(&t, BetaRoute::OrbitSum).unwrap();
        let path = cache::coeffs_beta_path(dir.path(), 7);
        c.write_cache(&path).unwrap();
        assert_eq!(BetaCoeffs::read_cache(&path, 7).unwrap(), c);
    }
}
