//! Partitions, Young tableaux, tabloids and polytabloids.
//!
//! Only content `(1^m)` is needed downstream: the homomorphisms `ϑ_T` map
//! `M^λ` into `M^{(1^m)}`, whose tabloids are orderings of `1..=m`, and the
//! projection `f` reads such an ordering as an m-cycle.

use rustc_hash::FxHashMap;

use crate::cycle::{Cycle, Perm, MAX_M};
use crate::error::{Error, Result};

/// An integer partition `λ₁ ≥ … ≥ λ_h > 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Partition {
    parts: Vec<usize>,
}

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|&p| p == 0) {
            return Err(Error::arg("partition parts must be positive"));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::arg("partition parts must be weakly decreasing"));
        }
        Ok(Partition { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    pub fn m(&self) -> usize {
        self.parts.iter().sum()
    }

    pub fn height(&self) -> usize {
        self.parts.len()
    }

    /// `λ'_c`, the length of column `c`.
    pub fn column_len(&self, c: usize) -> usize {
        self.parts.iter().take_while(|&&p| p > c).count()
    }

    /// The hook `(m−2, 1, 1)`.
    pub fn beta_shape(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::arg(format!("shape (m-2,1,1) needs m >= 4, got {m}")));
        }
        Partition::new(vec![m - 2, 1, 1])
    }

    /// `dim S^λ` by the hook-length formula.
    pub fn dimension(&self) -> u128 {
        let m = self.m();
        let mut hooks = 1u128;
        for (r, &len) in self.parts.iter().enumerate() {
            for c in 0..len {
                let arm = len - c - 1;
                let leg = self.column_len(c) - r - 1;
                hooks *= (arm + leg + 1) as u128;
            }
        }
        (1..=m as u128).product::<u128>() / hooks
    }

    /// All standard tableaux, generated by placing `1, 2, …, m` in turn,
    /// trying rows from top to bottom.
    pub fn standard_tableaux(&self) -> Vec<GenTableau> {
        let mut out = Vec::new();
        let mut rows: Vec<Vec<u8>> = vec![Vec::new(); self.height()];
        fill_standard(self, &mut rows, 1, &mut out);
        out
    }
}

fn fill_standard(shape: &Partition, rows: &mut Vec<Vec<u8>>, next: usize, out: &mut Vec<GenTableau>) {
    if next > shape.m() {
        out.push(GenTableau { shape: shape.clone(), rows: rows.clone() });
        return;
    }
    for r in 0..shape.height() {
        let len = rows[r].len();
        if len < shape.parts[r] && (r == 0 || rows[r - 1].len() > len) {
            rows[r].push(next as u8);
            fill_standard(shape, rows, next + 1, out);
            rows[r].pop();
        }
    }
}

/// All partitions of `m`, in decreasing lexicographic order.
pub fn partitions(m: usize) -> Vec<Partition> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if rest == 0 {
            out.push(Partition { parts: cur.clone() });
            return;
        }
        for p in (1..=rest.min(max)).rev() {
            cur.push(p);
            rec(rest - p, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, m, &mut Vec::new(), &mut out);
    out
}

/// A filling of a Young shape; entries may repeat.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GenTableau {
    shape: Partition,
    rows: Vec<Vec<u8>>,
}

impl GenTableau {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let shape = Partition::new(rows.iter().map(Vec::len).collect())?;
        if rows.iter().flatten().any(|&v| v == 0) {
            return Err(Error::arg("tableau entries must be positive"));
        }
        Ok(GenTableau { shape, rows })
    }

    /// `M_i`: shape `(m−2,1,1)` with 2 in the second row and `i` in the third.
    pub fn beta_column(m: usize, i: usize) -> Result<Self> {
        if m < 4 || !(3..=m).contains(&i) || m > MAX_M {
            return Err(Error::arg(format!("no tableau M_{i} for m = {m}")));
        }
        let first: Vec<u8> = (1..=m as u8).filter(|&v| v != 2 && v as usize != i).collect();
        GenTableau::new(vec![first, vec![2], vec![i as u8]])
    }

    /// The row-reading tableau `t_λ` with `1, …, m` filled row by row.
    pub fn row_reading(shape: &Partition) -> Self {
        let mut next = 0u8;
        let rows = shape
            .parts
            .iter()
            .map(|&len| {
                (0..len)
                    .map(|_| {
                        next += 1;
                        next
                    })
                    .collect()
            })
            .collect();
        GenTableau { shape: shape.clone(), rows }
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn m(&self) -> usize {
        self.shape.m()
    }

    pub fn column(&self, c: usize) -> Vec<u8> {
        self.rows.iter().take_while(|r| r.len() > c).map(|r| r[c]).collect()
    }

    /// Entry multiplicities, `content[v − 1]`.
    pub fn content(&self) -> Vec<usize> {
        let max = self.rows.iter().flatten().copied().max().unwrap_or(0) as usize;
        let mut c = vec![0; max];
        for &v in self.rows.iter().flatten() {
            c[v as usize - 1] += 1;
        }
        c
    }

    /// Whether the entries are exactly `1..=m`, each once.
    pub fn has_unit_content(&self) -> bool {
        let c = self.content();
        c.len() == self.m() && c.iter().all(|&k| k == 1)
    }

    pub fn is_semistandard(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
        let cols_ok = (0..self.shape.parts[0])
            .all(|c| self.column(c).windows(2).all(|w| w[0] < w[1]));
        rows_ok && cols_ok
    }

    pub fn is_standard(&self) -> bool {
        self.has_unit_content()
            && self.is_semistandard()
            && self.rows.iter().all(|r| r.windows(2).all(|w| w[0] < w[1]))
    }

    /// `c(T)`: the sum of all `a` such that `a + 1` lies strictly below `a`.
    pub fn descent_sum(&self) -> usize {
        let mut row_of = [0usize; MAX_M + 2];
        for (r, row) in self.rows.iter().enumerate() {
            for &v in row {
                row_of[v as usize] = r;
            }
        }
        (1..self.m()).filter(|&a| row_of[a + 1] > row_of[a]).sum()
    }

    /// Elements of the column stabilizer `C_t` as permutations of values,
    /// with their signs.
    pub fn column_group(&self) -> Vec<(Perm, i64)> {
        let m = self.m();
        let mut group = vec![(Perm::identity(m), 1i64)];
        for c in 0..self.shape.parts[0] {
            let col = self.column(c);
            if col.len() < 2 {
                continue;
            }
            let perms = permutations_with_sign(col.len());
            let mut next = Vec::with_capacity(group.len() * perms.len());
            for (g, sg) in &group {
                for (p, sp) in &perms {
                    let mut images: Vec<u8> = (1..=m as u8).collect();
                    for (k, &v) in col.iter().enumerate() {
                        images[v as usize - 1] = col[p[k]];
                    }
                    let h = Perm::from_images(&images).expect("column permutation");
                    next.push((h.compose(g), sg * sp));
                }
            }
            group = next;
        }
        group
    }
}

/// All permutations of `0..n` in one-line form with their signs, in
/// lexicographic order.
pub fn permutations_with_sign(n: usize) -> Vec<(Vec<usize>, i64)> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..n).collect();
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| cur[i] > cur[j])
            .count();
        out.push((cur.clone(), if inversions % 2 == 0 { 1 } else { -1 }));
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            return out;
        };
        let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
}

/// `a_λ`, the multiplicity of `S^λ` in `C^{Z_m}`: the number of standard
/// tableaux of shape λ whose descent sum is divisible by `m`.
pub fn multiplicity_a_lambda(lam: &Partition, m: usize) -> Result<usize> {
    if lam.m() != m {
        return Err(Error::arg(format!("partition of {} used with m = {m}", lam.m())));
    }
    Ok(lam.standard_tableaux().iter().filter(|t| t.descent_sum() % m == 0).count())
}

/// A tabloid, stored as the row index of every value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Tabloid {
    m: u8,
    row_of: [u8; MAX_M],
}

impl Tabloid {
    /// From row contents; rows must partition `1..=m`.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let m: usize = rows.iter().map(Vec::len).sum();
        if m > MAX_M {
            return Err(Error::arg("tabloid too large"));
        }
        let mut row_of = [0u8; MAX_M];
        let mut seen = [false; MAX_M];
        for (r, row) in rows.iter().enumerate() {
            for &v in row {
                if v == 0 || v as usize > m || seen[v as usize - 1] {
                    return Err(Error::arg("tabloid rows must partition 1..=m"));
                }
                seen[v as usize - 1] = true;
                row_of[v as usize - 1] = r as u8;
            }
        }
        Ok(Tabloid { m: m as u8, row_of })
    }

    pub fn of_tableau(t: &GenTableau) -> Result<Self> {
        Tabloid::from_rows(t.rows())
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    pub fn row_of(&self, v: u8) -> usize {
        self.row_of[v as usize - 1] as usize
    }

    /// Row contents in increasing order.
    pub fn rows(&self) -> Vec<Vec<u8>> {
        let h = self.row_of[..self.m()].iter().map(|&r| r as usize + 1).max().unwrap_or(0);
        let mut rows = vec![Vec::new(); h];
        for v in 1..=self.m as u8 {
            rows[self.row_of(v)].push(v);
        }
        rows
    }

    /// `π·{t}`: every value `v` moves to where `π(v)` is read.
    pub fn permuted(&self, pi: &Perm) -> Tabloid {
        let mut row_of = [0u8; MAX_M];
        for v in 1..=self.m as u8 {
            row_of[pi.apply(v) as usize - 1] = self.row_of[v as usize - 1];
        }
        Tabloid { m: self.m, row_of }
    }

    /// For a tabloid with singleton rows, the values read from the top row
    /// down.
    pub fn reading(&self) -> Vec<u8> {
        let mut seq = vec![0u8; self.m()];
        for v in 1..=self.m as u8 {
            seq[self.row_of(v)] = v;
        }
        seq
    }
}

/// A formal integer combination of tabloids of one shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignedTabloidSum {
    shape: Partition,
    terms: FxHashMap<Tabloid, i64>,
}

impl SignedTabloidSum {
    pub fn zero(shape: Partition) -> Self {
        SignedTabloidSum { shape, terms: FxHashMap::default() }
    }

    pub fn shape(&self) -> &Partition {
        &self.shape
    }

    pub fn add(&mut self, t: Tabloid, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let e = self.terms.entry(t).or_insert(0);
        *e = e.checked_add(coeff).expect("tabloid coefficient overflow");
        if *e == 0 {
            self.terms.remove(&t);
        }
    }

    pub fn coeff(&self, t: &Tabloid) -> i64 {
        self.terms.get(t).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms sorted by tabloid.
    pub fn terms(&self) -> Vec<(Tabloid, i64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(t, c)| (*t, *c)).collect();
        v.sort();
        v
    }

    pub fn permuted(&self, pi: &Perm) -> Self {
        let mut out = SignedTabloidSum::zero(self.shape.clone());
        for (t, c) in &self.terms {
            out.add(t.permuted(pi), *c);
        }
        out
    }
}

/// `e_t = Σ_{c ∈ C_t} sgn(c) c{t}`.
pub fn polytabloid(t: &GenTableau) -> Result<SignedTabloidSum> {
    if !t.has_unit_content() {
        return Err(Error::arg("polytabloid needs each of 1..=m exactly once"));
    }
    let base = Tabloid::of_tableau(t)?;
    let mut out = SignedTabloidSum::zero(t.shape().clone());
    for (c, sign) in t.column_group() {
        out.add(base.permuted(&c), sign);
    }
    Ok(out)
}

/// Visits `s[T′]` for every `T′` row-equivalent to `T`. Row `r` of `T′` is a
/// permutation of row `r` of `T`; the value of `{s}` sitting in box `(r, k)`
/// goes to row `T′(r, k)` of the output.
pub fn theta_terms(big_t: &GenTableau, s: &Tabloid, mut visit: impl FnMut(&Tabloid)) {
    let m = s.m();
    let s_rows = s.rows();
    let t_rows = big_t.rows();
    let perms: Vec<Vec<(Vec<usize>, i64)>> =
        t_rows.iter().map(|r| permutations_with_sign(r.len())).collect();
    let mut choice = vec![0usize; t_rows.len()];
    let mut out = Tabloid { m: m as u8, row_of: [0u8; MAX_M] };
    loop {
        for (r, row) in s_rows.iter().enumerate() {
            let p = &perms[r][choice[r]].0;
            for (k, &v) in row.iter().enumerate() {
                out.row_of[v as usize - 1] = t_rows[r][p[k]] - 1;
            }
        }
        visit(&out);
        let mut r = 0;
        loop {
            if r == choice.len() {
                return;
            }
            choice[r] += 1;
            if choice[r] < perms[r].len() {
                break;
            }
            choice[r] = 0;
            r += 1;
        }
    }
}

/// `ϑ_T(v)` for `T` of content `(1^m)`; the result lives on shape `(1^m)`.
pub fn theta_apply(big_t: &GenTableau, v: &SignedTabloidSum) -> Result<SignedTabloidSum> {
    if big_t.shape() != v.shape() {
        return Err(Error::arg("tableau and tabloid sum have different shapes"));
    }
    if !big_t.has_unit_content() {
        return Err(Error::arg("only content (1^m) is supported"));
    }
    let m = big_t.m();
    let mut out = SignedTabloidSum::zero(Partition::new(vec![1; m])?);
    for (s, c) in &v.terms {
        theta_terms(big_t, s, |t| out.add(*t, *c));
    }
    Ok(out)
}

/// The projection `f` from `M^{(1^m)}` to functions on `Z_m`.
pub fn project_f(s: &SignedTabloidSum) -> Result<FxHashMap<Cycle, i64>> {
    if s.shape().parts().iter().any(|&p| p != 1) {
        return Err(Error::arg("project_f needs shape (1^m)"));
    }
    let mut out: FxHashMap<Cycle, i64> = FxHashMap::default();
    for (t, c) in &s.terms {
        let cyc = Cycle::normalized(&t.reading());
        *out.entry(cyc).or_insert(0) += c;
    }
    out.retain(|_, v| *v != 0);
    Ok(out)
}

/// `f(ϑ_T(e_t))` as a dense vector indexed by cycle rank.
///
/// Uses `ϑ_T(c{t}) = c·ϑ_T({t})`: the row-equivalence sum is expanded once
/// and then conjugated by every element of the column group.
pub fn tableau_vector(big_t: &GenTableau, t: &GenTableau) -> Result<Vec<i64>> {
    if big_t.shape() != t.shape() || !big_t.has_unit_content() || !t.has_unit_content() {
        return Err(Error::arg("tableau_vector needs two (1^m) tableaux of one shape"));
    }
    let m = t.m();
    let mut w: FxHashMap<Cycle, i64> = FxHashMap::default();
    theta_terms(big_t, &Tabloid::of_tableau(t)?, |s| {
        *w.entry(Cycle::normalized(&s.reading())).or_insert(0) += 1;
    });
    let n: usize = (1..m).product();
    let mut out = vec![0i64; n];
    let mut buf = [0u8; MAX_M];
    for (c, sign) in t.column_group() {
        for (cyc, coeff) in &w {
            for (k, &v) in cyc.seq().iter().enumerate() {
                buf[k] = c.apply(v);
            }
            out[Cycle::normalized(&buf[..m]).rank() as usize] += sign * coeff;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(rows: Vec<Vec<u8>>) -> Tabloid {
        Tabloid::from_rows(&rows).unwrap()
    }

    #[test]
    fn polytabloid_trivial_shapes() {
        let t = GenTableau::new(vec![vec![1, 2, 3, 4]]).unwrap();
        let e = polytabloid(&t).unwrap();
        assert_eq!(e.terms(), vec![(Tabloid::of_tableau(&t).unwrap(), 1)]);

        let t = GenTableau::new(vec![vec![1], vec![2]]).unwrap();
        let e = polytabloid(&t).unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!(e.coeff(&single(vec![vec![1], vec![2]])), 1);
        assert_eq!(e.coeff(&single(vec![vec![2], vec![1]])), -1);
    }

    #[test]
    fn polytabloid_hook_has_six_terms() {
        for m in 4..=8 {
            let t = GenTableau::row_reading(&Partition::beta_shape(m).unwrap());
            assert_eq!(t.column(0), vec![1, m as u8 - 1, m as u8]);
            assert_eq!(polytabloid(&t).unwrap().len(), 6);
        }
    }

    #[test]
    fn polytabloid_rejects_repeats() {
        let t = GenTableau::new(vec![vec![1, 1], vec![2]]).unwrap();
        assert!(polytabloid(&t).is_err());
    }

    #[test]
    fn theta_single_row_counts() {
        let t = GenTableau::new(vec![vec![1, 2, 3, 4]]).unwrap();
        let v = polytabloid(&t).unwrap();
        let out = theta_apply(&t, &v).unwrap();
        assert_eq!(out.len(), 24);
    }

    #[test]
    fn theta_column_shape_is_identity() {
        let rows: Vec<Vec<u8>> = (1..=5).map(|v| vec![v]).collect();
        let t = GenTableau::new(rows).unwrap();
        let e = polytabloid(&t).unwrap();
        assert_eq!(theta_apply(&t, &e).unwrap().terms(), e.terms());
    }

    #[test]
    fn theta_hook_has_6_factorial_terms() {
        for m in 5..=7 {
            let shape = Partition::beta_shape(m).unwrap();
            let e = polytabloid(&GenTableau::row_reading(&shape)).unwrap();
            let big = GenTableau::beta_column(m, 3).unwrap();
            let mut count = 0;
            for (s, _) in e.terms() {
                theta_terms(&big, &s, |_| count += 1);
            }
            assert_eq!(count, 6 * (1..=m - 2).product::<usize>());
        }
    }

    #[test]
    fn project_f_reads_rotations() {
        let mut s = SignedTabloidSum::zero(Partition::new(vec![1, 1, 1]).unwrap());
        s.add(single(vec![vec![2], vec![3], vec![1]]), 1);
        let f = project_f(&s).unwrap();
        assert_eq!(f[&Cycle::base(3)], 1);
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn tableau_vector_matches_module_route() {
        for lam in partitions(6) {
            let t = GenTableau::row_reading(&lam);
            let e = polytabloid(&t).unwrap();
            for big in lam.standard_tableaux().iter().take(4) {
                let f = project_f(&theta_apply(big, &e).unwrap()).unwrap();
                let dense = tableau_vector(big, &t).unwrap();
                for c in crate::cycle::all_cycles(6) {
                    assert_eq!(dense[c.rank() as usize], f.get(&c).copied().unwrap_or(0));
                }
            }
        }
    }

    #[test]
    fn a_lambda_examples() {
        for m in 4..=9 {
            assert_eq!(multiplicity_a_lambda(&Partition::new(vec![m]).unwrap(), m).unwrap(), 1);
            let hook = Partition::beta_shape(m).unwrap();
            assert_eq!(multiplicity_a_lambda(&hook, m).unwrap(), (m - 1) / 2);
        }
    }

    #[test]
    fn a_lambda_dimension_identity() {
        for m in 3..=9 {
            let total: u128 = partitions(m)
                .iter()
                .map(|l| multiplicity_a_lambda(l, m).unwrap() as u128 * l.dimension())
                .sum();
            assert_eq!(total, (1..m as u128).product::<u128>());
        }
    }

    #[test]
    fn standard_tableaux_count_is_dimension() {
        for m in 1..=8 {
            for l in partitions(m) {
                let ts = l.standard_tableaux();
                assert_eq!(ts.len() as u128, l.dimension());
                assert!(ts.iter().all(GenTableau::is_standard));
            }
        }
    }

    #[test]
    fn permutation_signs() {
        let p = permutations_with_sign(3);
        assert_eq!(p.len(), 6);
        let odd: Vec<_> = p.iter().filter(|(_, s)| *s < 0).map(|(v, _)| v.clone()).collect();
        assert_eq!(odd, vec![vec![0, 2, 1], vec![1, 0, 2], vec![2, 1, 0]]);
        assert_eq!(permutations_with_sign(5).iter().map(|(_, s)| s).sum::<i64>(), 0);
    }

    #[test]
    fn column_group_order_and_signs() {
        let t = GenTableau::row_reading(&Partition::new(vec![3, 2, 1]).unwrap());
        let g = t.column_group();
        assert_eq!(g.len(), 12);
        assert_eq!(g.iter().map(|(_, s)| s).sum::<i64>(), 0);
    }
}
