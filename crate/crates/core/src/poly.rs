//! Sparse polynomials in the variables `z_{a,b}`, `a, b ∈ [m]`, and the
//! operator formula that expands the tableau pair polynomial `p_{T1,T2}`.
//!
//! `p_{T1,T2}` is obtained from
//! `P_λ = Π_k (k!·det(z_{i,j})_{i,j≤k})^{λ_k − λ_{k+1}}` by applying
//! `Π_{j<s} (r!u!)⁻¹ d_{s→j}^r (d*_{j→s})^u` with `r = r(s,j)` the number
//! of entries `s` in row `j` of `T1` and `u = u(s,j)` the same count for
//! `T2`. `d_{s→j}` renames one row index `j` to `s`; `d*_{j→s}` renames one
//! column index `j` to `s`. Factors act right to left.
//!
//! A monomial of degree `m ≤ 16` is a sorted multiset of bytes
//! `(a−1) << 4 | (b−1)`, packed into a `u128`.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};
use crate::tableau::{permutations_with_sign, GenTableau, Partition};

/// A monomial: up to 16 factors `z_{a,b}` in sorted byte order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Monomial {
    deg: u8,
    bytes: [u8; 16],
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { deg: 0, bytes: [0xFF; 16] }
    }

    pub fn from_factors(factors: &[(u8, u8)]) -> Result<Self> {
        if factors.len() > 16 {
            return Err(Error::arg("monomial degree above 16"));
        }
        let mut m = Monomial::one();
        for (k, &(a, b)) in factors.iter().enumerate() {
            if !(1..=16).contains(&a) || !(1..=16).contains(&b) {
                return Err(Error::arg("variable index outside 1..=16"));
            }
            m.bytes[k] = ((a - 1) << 4) | (b - 1);
        }
        m.deg = factors.len() as u8;
        m.bytes[..m.deg as usize].sort_unstable();
        Ok(m)
    }

    pub fn degree(&self) -> usize {
        self.deg as usize
    }

    /// Factors `(a, b)` in sorted order, with repetition.
    pub fn factors(&self) -> Vec<(u8, u8)> {
        self.bytes[..self.degree()].iter().map(|&x| ((x >> 4) + 1, (x & 0xF) + 1)).collect()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let deg = self.deg + other.deg;
        assert!(deg <= 16, "monomial degree above 16");
        let mut out = Monomial { deg, bytes: [0xFF; 16] };
        out.bytes[..self.degree()].copy_from_slice(&self.bytes[..self.degree()]);
        out.bytes[self.degree()..deg as usize].copy_from_slice(&other.bytes[..other.degree()]);
        out.bytes[..deg as usize].sort_unstable();
        out
    }

    fn replace(&self, k: usize, byte: u8) -> Monomial {
        let mut out = *self;
        out.bytes[k] = byte;
        out.bytes[..self.degree()].sort_unstable();
        out
    }

    /// For a permutation pattern (one factor in every row and every column,
    /// rows `1..=deg`), the images `π(a)` with `π[a − 1] = b`.
    pub fn as_permutation(&self) -> Option<Vec<u8>> {
        let n = self.degree();
        let mut seen_col = [false; 16];
        let mut pi = Vec::with_capacity(n);
        for (k, &x) in self.bytes[..n].iter().enumerate() {
            let (a, b) = ((x >> 4) as usize, (x & 0xF) as usize);
            if a != k || b >= n || seen_col[b] {
                return None;
            }
            seen_col[b] = true;
            pi.push(b as u8 + 1);
        }
        Some(pi)
    }
}

/// A polynomial with integer coefficients and no stored zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparsePoly {
    terms: FxHashMap<Monomial, i64>,
}

impl SparsePoly {
    pub fn zero() -> Self {
        SparsePoly::default()
    }

    pub fn one() -> Self {
        let mut p = SparsePoly::zero();
        p.add(Monomial::one(), 1);
        p
    }

    pub fn add(&mut self, mono: Monomial, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.terms.entry(mono).or_insert(0);
        *e = e.checked_add(coeff).expect("polynomial coefficient overflow");
        if *e == 0 {
            self.terms.remove(&mono);
        }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: &Monomial) -> i64 {
        self.terms.get(mono).copied().unwrap_or(0)
    }

    /// Terms in sorted monomial order.
    pub fn terms(&self) -> Vec<(Monomial, i64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort();
        v
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        let mut out = SparsePoly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add(a.mul(b), ca.checked_mul(*cb).expect("coefficient overflow"));
            }
        }
        out
    }

    pub fn scale(&mut self, k: i64) {
        for c in self.terms.values_mut() {
            *c = c.checked_mul(k).expect("coefficient overflow");
        }
        self.terms.retain(|_, c| *c != 0);
    }

    /// Exact division of every coefficient.
    pub fn divide_exact(&mut self, k: i64) -> Result<()> {
        for c in self.terms.values_mut() {
            if *c % k != 0 {
                return Err(Error::internal(format!("coefficient {c} not divisible by {k}")));
            }
            *c /= k;
        }
        Ok(())
    }

    /// `d_{s→j} = Σ_i z_{s,i} ∂/∂z_{j,i}`.
    pub fn row_op(&self, s: u8, j: u8) -> SparsePoly {
        self.rename(|x| (x >> 4) == j - 1, |x| ((s - 1) << 4) | (x & 0xF))
    }

    /// `d*_{j→s} = Σ_i z_{i,s} ∂/∂z_{i,j}`.
    pub fn col_op(&self, j: u8, s: u8) -> SparsePoly {
        self.rename(|x| (x & 0xF) == j - 1, |x| (x & 0xF0) | (s - 1))
    }

    fn rename(&self, hit: impl Fn(u8) -> bool, to: impl Fn(u8) -> u8) -> SparsePoly {
        let mut out = SparsePoly::zero();
        out.terms.reserve(self.terms.len());
        for (mono, c) in &self.terms {
            for k in 0..mono.degree() {
                let x = mono.bytes[k];
                if hit(x) {
                    out.add(mono.replace(k, to(x)), *c);
                }
            }
        }
        out
    }
}

/// `det (z_{i,j})_{i,j ≤ k}`.
pub fn determinant_poly(k: usize) -> SparsePoly {
    let mut out = SparsePoly::zero();
    for (p, sign) in permutations_with_sign(k) {
        let factors: Vec<(u8, u8)> = (0..k).map(|i| (i as u8 + 1, p[i] as u8 + 1)).collect();
        out.add(Monomial::from_factors(&factors).expect("small determinant"), sign);
    }
    out
}

/// `P_λ = Π_k (k!·det Z_k)^{λ_k − λ_{k+1}}`.
pub fn p_lambda(lam: &Partition) -> Result<SparsePoly> {
    if lam.m() > 16 {
        return Err(Error::arg("P_lambda supports degree up to 16"));
    }
    let parts = lam.parts();
    let mut out = SparsePoly::one();
    for k in 1..=parts.len() {
        let next = parts.get(k).copied().unwrap_or(0);
        let e = parts[k - 1] - next;
        if e == 0 {
            continue;
        }
        let mut det = determinant_poly(k);
        det.scale((1..=k as i64).product());
        for _ in 0..e {
            out = out.mul(&det);
        }
    }
    Ok(out)
}

/// Number of entries equal to `s` in row `j` (1-based) of `t`.
fn count_in_row(t: &GenTableau, s: u8, j: usize) -> usize {
    t.rows().get(j - 1).map_or(0, |r| r.iter().filter(|&&v| v == s).count())
}

/// `p_{T1,T2}` by the operator formula.
pub fn pair_polynomial(t1: &GenTableau, t2: &GenTableau) -> Result<SparsePoly> {
    if t1.shape() != t2.shape() {
        return Err(Error::arg("tableaux of different shapes"));
    }
    let m = t1.m();
    let mut p = p_lambda(t1.shape())?;
    for j in (1..m).rev() {
        for s in (j + 1..=m).rev() {
            let u = count_in_row(t2, s as u8, j);
            for _ in 0..u {
                p = p.col_op(j as u8, s as u8);
            }
            p.divide_exact((1..=u as i64).product())?;
            let r = count_in_row(t1, s as u8, j);
            for _ in 0..r {
                p = p.row_op(s as u8, j as u8);
            }
            p.divide_exact((1..=r as i64).product())?;
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_shape_is_one_monomial() {
        let p = p_lambda(&Partition::new(vec![5]).unwrap()).unwrap();
        assert_eq!(p.terms(), vec![(Monomial::from_factors(&[(1, 1); 5]).unwrap(), 1)]);
    }

    #[test]
    fn determinant_terms() {
        let d = determinant_poly(3);
        assert_eq!(d.len(), 6);
        assert_eq!(d.coeff(&Monomial::from_factors(&[(1, 1), (2, 2), (3, 3)]).unwrap()), 1);
        assert_eq!(d.coeff(&Monomial::from_factors(&[(1, 2), (2, 1), (3, 3)]).unwrap()), -1);
    }

    #[test]
    fn operators_rename_one_index() {
        let mut p = SparsePoly::zero();
        p.add(Monomial::from_factors(&[(1, 1), (1, 2)]).unwrap(), 1);
        let q = p.row_op(3, 1);
        assert_eq!(q.len(), 2);
        assert_eq!(q.coeff(&Monomial::from_factors(&[(3, 1), (1, 2)]).unwrap()), 1);
        let mut sq = SparsePoly::zero();
        sq.add(Monomial::from_factors(&[(1, 1), (1, 1)]).unwrap(), 1);
        assert_eq!(sq.col_op(1, 2).coeff(&Monomial::from_factors(&[(1, 1), (1, 2)]).unwrap()), 2);
    }

    #[test]
    fn unit_content_expansion_is_permutation_patterns() {
        for m in 4..=7 {
            let a = GenTableau::beta_column(m, 3).unwrap();
            let b = GenTableau::beta_column(m, m).unwrap();
            let p = pair_polynomial(&a, &b).unwrap();
            assert!(!p.is_empty());
            assert!(p.terms().iter().all(|(mono, _)| mono.as_permutation().is_some()));
        }
    }

    #[test]
    fn as_permutation_reads_columns() {
        let mono = Monomial::from_factors(&[(1, 2), (2, 3), (3, 1)]).unwrap();
        assert_eq!(mono.as_permutation(), Some(vec![2, 3, 1]));
        let bad = Monomial::from_factors(&[(1, 2), (2, 2), (3, 1)]).unwrap();
        assert_eq!(bad.as_permutation(), None);
    }
}
