//! Exact integer linear algebra.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Determinant of an integer matrix by fraction-free (Bareiss) elimination.
pub fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut sign = 1;
    let mut prev = BigInt::from(1);
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    if sign < 0 {
        -prev
    } else {
        prev
    }
}

/// Rank of an integer matrix by fraction-free elimination.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let v = (&a[i][j] * &a[rank][c] - &a[i][c] * &a[rank][j]) / &prev;
                a[i][j] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[rank][c].clone();
        rank += 1;
    }
    rank
}

pub fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Greedy selection of linearly independent integer vectors.
///
/// A candidate is accepted when the Gram matrix of the selected set plus the
/// candidate has nonzero determinant; Gram matrices of real vectors are
/// positive semidefinite, so this is exactly linear independence.
#[derive(Default)]
pub struct IndependentSet {
    vectors: Vec<Vec<i64>>,
    gram: Vec<Vec<BigInt>>,
}

impl IndependentSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Adds `v` if it is independent of the current set; reports whether it
    /// was added.
    pub fn try_add(&mut self, v: Vec<i64>) -> bool {
        if v.iter().all(|&x| x == 0) {
            return false;
        }
        let row: Vec<BigInt> = self.vectors.iter().map(|u| BigInt::from(dot(u, &v))).collect();
        let self_dot = BigInt::from(dot(&v, &v));
        let mut g = self.gram.clone();
        for (r, x) in g.iter_mut().zip(&row) {
            r.push(x.clone());
        }
        let mut last = row.clone();
        last.push(self_dot);
        g.push(last);
        let det = bareiss_determinant(g.clone());
        if det.is_zero() {
            return false;
        }
        debug_assert!(det.is_positive());
        self.gram = g;
        self.vectors.push(v);
        true
    }

    pub fn into_vectors(self) -> Vec<Vec<i64>> {
        self.vectors
    }

    pub fn vectors(&self) -> &[Vec<i64>] {
        &self.vectors
    }
}

/// Rank of a family of integer vectors, via the Gram matrix.
pub fn rank_of(vectors: &[Vec<i64>]) -> usize {
    let gram: Vec<Vec<BigInt>> = vectors
        .iter()
        .map(|u| vectors.iter().map(|v| BigInt::from(dot(u, v))).collect())
        .collect();
    bareiss_rank(gram)
}

/// Positive semidefiniteness of a symmetric rational matrix by exact
/// `LDLᵀ`; a zero pivot must have a zero column below it.
pub fn is_positive_semidefinite(a: &[Vec<BigRational>]) -> bool {
    let n = a.len();
    let mut w: Vec<Vec<BigRational>> = a.to_vec();
    for k in 0..n {
        if w[k][k].is_negative() {
            return false;
        }
        if w[k][k].is_zero() {
            if (k + 1..n).any(|i| !w[i][k].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            let f = &w[i][k] / &w[k][k];
            for j in k + 1..=i {
                let v = &w[i][j] - &f * &w[j][k];
                w[i][j] = v;
            }
        }
    }
    true
}

/// Positive semidefiniteness of a small symmetric integer matrix: every
/// principal minor is nonnegative.
pub fn principal_minors_nonnegative(a: &[Vec<BigInt>]) -> bool {
    let n = a.len();
    assert!(n <= 20, "principal minor test is exponential in the size");
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let minor: Vec<Vec<BigInt>> = idx.iter().map(|&i| idx.iter().map(|&j| a[i][j].clone()).collect()).collect();
        !bareiss_determinant(minor).is_negative()
    })
}

/// The largest `f64` not above `r`.
pub fn rational_to_f64_down(r: &BigRational) -> f64 {
    let mut f = r.to_f64().unwrap_or(f64::NEG_INFINITY);
    while f.is_finite() && BigRational::from_f64(f).is_some_and(|x| &x > r) {
        f = f.next_down();
    }
    f
}

/// `x` rounded to the nearest multiple of `2^-bits`, as a numerator.
pub fn dyadic_numerator(x: f64, bits: u32) -> BigInt {
    let scaled = BigRational::from_f64(x).expect("finite value") * BigRational::from_integer(BigInt::one() << bits);
    scaled.round().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(bareiss_determinant(big(&[&[2, 1], &[1, 3]])), BigInt::from(5));
        assert_eq!(bareiss_determinant(big(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(
            bareiss_determinant(big(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])),
            BigInt::from(-3)
        );
        assert_eq!(bareiss_determinant(big(&[&[1, 2], &[2, 4]])), BigInt::zero());
    }

    #[test]
    fn definiteness_checks_agree() {
        let pd = big(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
        let psd = big(&[&[1, 1], &[1, 1]]);
        let q = |m: &Vec<Vec<BigInt>>| -> Vec<Vec<BigRational>> {
            m.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
        };
        let indef = big(&[&[1, 2], &[2, 1]]);
        let hidden = big(&[&[0, 0, 0], &[0, 0, 1], &[0, 1, 0]]);
        for (m, want) in [(&pd, true), (&psd, true), (&indef, false), (&hidden, false)] {
            assert_eq!(principal_minors_nonnegative(m), want);
            assert_eq!(is_positive_semidefinite(&q(m)), want);
        }
    }

    #[test]
    fn downward_conversion() {
        let third = BigRational::new(BigInt::from(1), BigInt::from(3));
        let f = rational_to_f64_down(&third);
        assert!(BigRational::from_f64(f).unwrap() <= third);
        assert!(BigRational::from_f64(f.next_up()).unwrap() > third);
        assert_eq!(dyadic_numerator(0.75, 4), BigInt::from(12));
    }

    #[test]
    fn rank_examples() {
        assert_eq!(bareiss_rank(big(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]])), 2);
        assert_eq!(bareiss_rank(big(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(bareiss_rank(big(&[&[0, 1, 0], &[0, 0, 1]])), 2);
    }

    #[test]
    fn independent_set_rejects_combinations() {
        let mut s = IndependentSet::new();
        assert!(s.try_add(vec![1, 0, 1, 0]));
        assert!(s.try_add(vec![0, 1, 0, 1]));
        assert!(!s.try_add(vec![2, -3, 2, -3]));
        assert!(!s.try_add(vec![0, 0, 0, 0]));
        assert!(s.try_add(vec![0, 0, 1, 0]));
        assert_eq!(s.len(), 3);
        assert_eq!(rank_of(s.vectors()), 3);
    }
}
