//! Representative sets: the vectors whose Gram-type products `Uᵀ X U`
//! block-diagonalize `G_m`-invariant matrices.
//!
//! For `λ = (m−2, 1, 1)` the block is given in closed form. Column `i` of
//! `U_λ` is `u_i = f(ϑ_{M_i}(e_t))`, and its value on a cycle `σ` is a signed
//! count of six ordered pairs of values taken from `{1, m−1, m}`: the pair
//! `(x, y)` contributes when `y` sits `i − 2` places after `x` in `σ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::cycle::{all_cycles, Cycle, MAX_M};
use crate::error::{Error, Result};
use crate::exact::IndependentSet;
use crate::tableau::{multiplicity_a_lambda, partitions, tableau_vector, GenTableau, Partition};

/// Which eigenspace of the inversion `η` a block lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockSign {
    Plus,
    Minus,
    Unsplit,
}

#[derive(Clone, Debug)]
pub enum Column {
    /// Dense vector indexed by cycle rank.
    Explicit(Vec<i64>),
    /// Column `u_i` of the hook block, evaluated on demand.
    BetaTableau(usize),
}

#[derive(Clone, Debug)]
pub struct RepresentativeBlock {
    pub lam: Partition,
    pub sign: BlockSign,
    pub columns: Vec<Column>,
    /// Tableaux giving rise to the columns, in column order.
    pub tableaux: Vec<GenTableau>,
}

impl RepresentativeBlock {
    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    /// Column `k` as a dense vector.
    pub fn dense_column(&self, k: usize) -> Vec<i64> {
        match &self.columns[k] {
            Column::Explicit(v) => v.clone(),
            Column::BetaTableau(i) => {
                let m = self.lam.m();
                let eval = BetaEvaluator::new(m).expect("valid hook block");
                all_cycles(m).map(|c| eval.column(&c, *i)).collect()
            }
        }
    }
}

/// Signed value pairs of the hook vector, as `(x, y, sign)`.
fn beta_patterns(m: u8) -> [(u8, u8, i64); 6] {
    [
        (m - 1, m, 1),
        (m, m - 1, -1),
        (1, m, -1),
        (m, 1, 1),
        (m - 1, 1, -1),
        (1, m - 1, 1),
    ]
}

/// O(m) evaluator for the columns of the hook block.
#[derive(Clone, Copy, Debug)]
pub struct BetaEvaluator {
    m: usize,
    d: usize,
}

impl BetaEvaluator {
    pub fn new(m: usize) -> Result<Self> {
        if !(4..=MAX_M).contains(&m) {
            return Err(Error::arg(format!("hook block needs 4 <= m <= {MAX_M}, got {m}")));
        }
        Ok(BetaEvaluator { m, d: (m - 1) / 2 })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of columns, `⌊(m−1)/2⌋`.
    pub fn dim(&self) -> usize {
        self.d
    }

    /// The tableau indices `i = 3, …, ⌊(m+1)/2⌋ + 1`.
    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        3..=(self.m + 1) / 2 + 1
    }

    /// `u_i(σ)`.
    pub fn column(&self, c: &Cycle, i: usize) -> i64 {
        let pos = c.positions();
        self.column_at(&pos, i)
    }

    fn column_at(&self, pos: &[u8; MAX_M + 1], i: usize) -> i64 {
        let m = self.m;
        let shift = (i - 2) % m;
        beta_patterns(m as u8)
            .iter()
            .filter(|(x, y, _)| (pos[*y as usize] as usize + m - pos[*x as usize] as usize) % m == shift)
            .map(|(_, _, s)| s)
            .sum()
    }

    /// All columns at `c`, written to `out[..d]`.
    pub fn evaluate(&self, c: &Cycle, out: &mut [i64]) {
        let pos = c.positions();
        for (k, i) in self.indices().enumerate() {
            out[k] = self.column_at(&pos, i);
        }
    }

    pub fn evaluate_vec(&self, c: &Cycle) -> Vec<i64> {
        let mut out = vec![0; self.d];
        self.evaluate(c, &mut out);
        out
    }
}

/// The hook block `U_{(m−2,1,1)}`, in the `η = −1` eigenspace.
pub fn beta_block(m: usize) -> Result<RepresentativeBlock> {
    let eval = BetaEvaluator::new(m)?;
    let lam = Partition::beta_shape(m)?;
    let tableaux = eval
        .indices()
        .map(|i| GenTableau::beta_column(m, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(RepresentativeBlock {
        lam,
        sign: BlockSign::Minus,
        columns: eval.indices().map(Column::BetaTableau).collect(),
        tableaux,
    })
}

/// `η·v`, i.e. `v(σ⁻¹)`, for a dense vector indexed by cycle rank.
pub fn eta_apply(m: usize, v: &[i64]) -> Vec<i64> {
    let mut out = vec![0; v.len()];
    for c in all_cycles(m) {
        out[c.rank() as usize] = v[c.inverse().rank() as usize];
    }
    out
}

/// Upper limit on `m` for materialized representative sets.
pub const ALPHA_MAX_M: usize = 10;

/// For a shape, the survivors of the greedy minimal-spanning-set selection
/// among `f(ϑ_T(e_t))` over standard `T`, and their vectors.
pub fn spanning_set(lam: &Partition) -> Result<(Vec<GenTableau>, Vec<Vec<i64>>)> {
    let m = lam.m();
    let target = multiplicity_a_lambda(lam, m)?;
    let t = GenTableau::row_reading(lam);
    let mut set = IndependentSet::new();
    let mut survivors = Vec::new();
    if target == 0 {
        return Ok((survivors, Vec::new()));
    }
    for big in lam.standard_tableaux() {
        let v = tableau_vector(&big, &t)?;
        if set.try_add(v) {
            survivors.push(big);
            if set.len() == target {
                break;
            }
        }
    }
    if set.len() != target {
        return Err(Error::internal(format!(
            "found {} independent vectors for {:?}, expected {target}",
            set.len(),
            lam.parts()
        )));
    }
    Ok((survivors, set.into_vectors()))
}

/// The representative set for `S_m × {±1}` acting on `C^{Z_m}`: for every
/// shape, the blocks `U_λ^+` and `U_λ^−` obtained from `u ± η u`. Empty
/// blocks are omitted.
pub fn representative_set_alpha(m: usize) -> Result<Vec<RepresentativeBlock>> {
    if !(3..=ALPHA_MAX_M).contains(&m) {
        return Err(Error::Resource(format!(
            "materialized representative sets are limited to m <= {ALPHA_MAX_M}"
        )));
    }
    let shapes = partitions(m);
    let per_shape: Vec<Result<Vec<RepresentativeBlock>>> = shapes
        .par_iter()
        .map(|lam| {
            let (tabs, vecs) = spanning_set(lam)?;
            let mut blocks = Vec::new();
            for (sign, s) in [(BlockSign::Plus, 1i64), (BlockSign::Minus, -1i64)] {
                let mut set = IndependentSet::new();
                let mut kept = Vec::new();
                for (tab, v) in tabs.iter().zip(&vecs) {
                    let eta = eta_apply(m, v);
                    let w: Vec<i64> = v.iter().zip(&eta).map(|(a, b)| a + s * b).collect();
                    if set.try_add(w) {
                        kept.push(tab.clone());
                    }
                }
                if !set.is_empty() {
                    blocks.push(RepresentativeBlock {
                        lam: lam.clone(),
                        sign,
                        columns: set.into_vectors().into_iter().map(Column::Explicit).collect(),
                        tableaux: kept,
                    });
                }
            }
            Ok(blocks)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_shape {
        out.extend(r?);
    }
    Ok(out)
}

/// Block dimensions in `(size, multiplicity)` form, largest first.
pub fn block_multiset(blocks: &[RepresentativeBlock]) -> Vec<(usize, usize)> {
    let mut dims: Vec<usize> = blocks.iter().map(RepresentativeBlock::dim).collect();
    dims.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: Vec<(usize, usize)> = Vec::new();
    for d in dims {
        match out.last_mut() {
            Some((s, k)) if *s == d => *k += 1,
            _ => out.push((d, 1)),
        }
    }
    out
}

/// Formats a block multiset like `3^6 2^4 1^8`.
pub fn format_multiset(ms: &[(usize, usize)]) -> String {
    ms.iter().map(|(s, k)| format!("{s}^{k}")).collect::<Vec<_>>().join(" ")
}

/// Published block multisets of the full representative set.
pub const REFERENCE_MULTISETS: [(usize, &str); 7] = [
    (4, "1^3"),
    (5, "2^1 1^4"),
    (6, "2^3 1^8"),
    (7, "3^6 2^4 1^8"),
    (8, "7^2 5^2 4^9 3^7 2^4 1^9"),
    (9, "12^8 11^2 9^6 7^3 6^5 5^2 4^2 3^16 1^5"),
    (10, "38^2 34^1 31^1 29^1 28^1 26^3 24^2 22^4 20^5 18^3 16^4 14^6 13^1 12^2 10^4 9^1 8^7 6^8 4^7 3^1 2^7 1^3"),
];

pub fn reference_multiset(m: usize) -> Option<&'static str> {
    REFERENCE_MULTISETS.iter().find(|r| r.0 == m).map(|r| r.1)
}

/// Inverse of [`format_multiset`].
pub fn parse_multiset(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split_whitespace()
        .map(|tok| {
            let (a, b) = tok.split_once('^').unwrap_or((tok, "1"));
            match (a.parse(), b.parse()) {
                (Ok(a), Ok(b)) => Ok((a, b)),
                _ => Err(Error::arg(format!("bad multiset entry {tok:?}"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rank_of;
    use crate::tableau::{polytabloid, project_f, theta_apply};

    #[test]
    fn beta_dims() {
        assert_eq!(beta_block(13).unwrap().dim(), 6);
        assert_eq!(beta_block(5).unwrap().dim(), 2);
        assert!(beta_block(3).is_err());
    }

    #[test]
    fn beta_eta_antisymmetry() {
        for m in 4..=8 {
            let e = BetaEvaluator::new(m).unwrap();
            for c in all_cycles(m) {
                let a = e.evaluate_vec(&c);
                let b = e.evaluate_vec(&c.inverse());
                assert!(a.iter().zip(&b).all(|(x, y)| *x == -*y));
            }
        }
    }

    #[test]
    fn beta_evaluator_matches_tableaux() {
        for m in 5..=7 {
            let e = BetaEvaluator::new(m).unwrap();
            let shape = Partition::beta_shape(m).unwrap();
            let et = polytabloid(&GenTableau::row_reading(&shape)).unwrap();
            for i in 3..=m {
                let big = GenTableau::beta_column(m, i).unwrap();
                let f = project_f(&theta_apply(&big, &et).unwrap()).unwrap();
                for c in all_cycles(m) {
                    assert_eq!(e.column(&c, i), f.get(&c).copied().unwrap_or(0), "m={m} i={i}");
                }
            }
        }
    }

    #[test]
    fn hook_columns_depend_on_gap_only() {
        for m in 5..=7 {
            let shape = Partition::beta_shape(m).unwrap();
            let t = GenTableau::row_reading(&shape);
            let e = BetaEvaluator::new(m).unwrap();
            for big in shape.standard_tableaux() {
                let a = big.rows()[1][0] as usize;
                let b = big.rows()[2][0] as usize;
                let v = tableau_vector(&big, &t).unwrap();
                let i = (b - a) % m + 2;
                for c in all_cycles(m) {
                    assert_eq!(v[c.rank() as usize], e.column(&c, i));
                }
            }
        }
    }

    #[test]
    fn reference_multisets_are_consistent() {
        for &(m, text) in &REFERENCE_MULTISETS {
            let ms = parse_multiset(text).unwrap();
            assert_eq!(format_multiset(&ms), text);
            let (_, omega, omega_p) = crate::orbits::reference_counts(m).unwrap();
            assert_eq!(ms.iter().map(|&(s, k)| (s * s * k) as u64).sum::<u64>(), omega, "m={m}");
            assert_eq!(ms.iter().map(|&(s, k)| (s * (s + 1) / 2 * k) as u64).sum::<u64>(), omega_p, "m={m}");
        }
    }

    #[test]
    fn small_block_multisets() {
        let b5 = representative_set_alpha(5).unwrap();
        assert_eq!(block_multiset(&b5), vec![(2, 1), (1, 4)]);
        let b6 = representative_set_alpha(6).unwrap();
        assert_eq!(block_multiset(&b6), vec![(2, 3), (1, 8)]);
    }

    #[test]
    fn hook_block_is_minus_block() {
        for m in 5..=7 {
            let blocks = representative_set_alpha(m).unwrap();
            let hook = Partition::beta_shape(m).unwrap();
            assert!(!blocks.iter().any(|b| b.lam == hook && b.sign == BlockSign::Plus));
            let minus = blocks.iter().find(|b| b.lam == hook && b.sign == BlockSign::Minus).unwrap();
            let beta = beta_block(m).unwrap();
            assert_eq!(minus.dim(), beta.dim());
            let mut all: Vec<Vec<i64>> = (0..minus.dim()).map(|k| minus.dense_column(k)).collect();
            all.extend((0..beta.dim()).map(|k| beta.dense_column(k)));
            assert_eq!(rank_of(&all), beta.dim());
        }
    }

    #[test]
    fn selection_size_independent_of_order() {
        let lam = Partition::new(vec![3, 2, 1]).unwrap();
        let t = GenTableau::row_reading(&lam);
        let vecs: Vec<Vec<i64>> =
            lam.standard_tableaux().iter().map(|b| tableau_vector(b, &t).unwrap()).collect();
        let mut fwd = IndependentSet::new();
        let mut rev = IndependentSet::new();
        for v in &vecs {
            fwd.try_add(v.clone());
        }
        for v in vecs.iter().rev() {
            rev.try_add(v.clone());
        }
        assert_eq!(fwd.len(), rev.len());
        assert_eq!(fwd.len(), multiplicity_a_lambda(&lam, 6).unwrap());
    }
}
