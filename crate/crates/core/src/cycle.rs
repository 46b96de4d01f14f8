//! m-cycles on `[m]` and the action of `S_m × {±1}` on them.
//!
//! A cycle is stored in sequence form anchored at 1: the cycle
//! `(1 a_2 … a_m)` is the array `[1, a_2, …, a_m]`. The group element
//! `(π, ε)` acts by `σ ↦ π σ^ε π⁻¹`, which in sequence form relabels every
//! entry through `π` and reverses the reading direction when `ε = −1`.
//!
//! The stabilizer `H_m` of the base cycle `σ₀ = (1 2 … m)` has order `2m`. On
//! values it consists of the translations `v ↦ v + k` (with `ε = +1`) and
//! the reflections `v ↦ c − v` (with `ε = −1`), all taken modulo `m` on the
//! residues `1..=m`. Canonical forms under `H_m` are the lexicographically
//! smallest sequences in an orbit.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported cycle length.
pub const MAX_M: usize = 16;

/// An m-cycle in sequence form starting at 1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cycle {
    m: u8,
    seq: [u8; MAX_M],
}

impl Cycle {
    /// Builds a cycle from a sequence that must start at 1 and be a
    /// permutation of `1..=m`.
    pub fn new(seq: &[u8]) -> Result<Self> {
        let m = seq.len();
        if !(3..=MAX_M).contains(&m) {
            return Err(Error::arg(format!("cycle length {m} outside 3..={MAX_M}")));
        }
        if seq[0] != 1 {
            return Err(Error::arg("cycle sequence must start at 1"));
        }
        check_permutation(seq)?;
        let mut out = [0u8; MAX_M];
        out[..m].copy_from_slice(seq);
        Ok(Cycle { m: m as u8, seq: out })
    }

    /// Builds the cycle `(s_0 s_1 … s_{m−1})` from any rotation.
    pub fn from_rotation(seq: &[u8]) -> Result<Self> {
        let m = seq.len();
        if !(3..=MAX_M).contains(&m) {
            return Err(Error::arg(format!("cycle length {m} outside 3..={MAX_M}")));
        }
        check_permutation(seq)?;
        Ok(Self::normalized(seq))
    }

    /// Rotates a valid permutation sequence so that it starts at 1.
    pub(crate) fn normalized(seq: &[u8]) -> Self {
        let m = seq.len();
        let start = seq.iter().position(|&v| v == 1).expect("sequence contains 1");
        let mut out = [0u8; MAX_M];
        for (k, slot) in out[..m].iter_mut().enumerate() {
            *slot = seq[(start + k) % m];
        }
        Cycle { m: m as u8, seq: out }
    }

    /// The base cycle `σ₀ = (1 2 … m)`.
    pub fn base(m: usize) -> Self {
        assert!((3..=MAX_M).contains(&m), "cycle length {m} outside 3..={MAX_M}");
        let mut seq = [0u8; MAX_M];
        for (k, slot) in seq[..m].iter_mut().enumerate() {
            *slot = k as u8 + 1;
        }
        Cycle { m: m as u8, seq }
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m as usize
    }

    #[inline]
    pub fn seq(&self) -> &[u8] {
        &self.seq[..self.m as usize]
    }

    /// `c⁻¹`, i.e. the sequence read backwards from 1.
    pub fn inverse(&self) -> Self {
        let m = self.m();
        let mut out = [0u8; MAX_M];
        out[0] = 1;
        for k in 1..m {
            out[k] = self.seq[m - k];
        }
        Cycle { m: self.m, seq: out }
    }

    /// `pos[v]` is the index of value `v` in the sequence (index 0 unused).
    pub fn positions(&self) -> [u8; MAX_M + 1] {
        let mut pos = [0u8; MAX_M + 1];
        for (k, &v) in self.seq().iter().enumerate() {
            pos[v as usize] = k as u8;
        }
        pos
    }

    /// Image of `v` under the permutation this cycle denotes.
    pub fn apply(&self, v: u8) -> u8 {
        let m = self.m();
        let k = self.seq().iter().position(|&x| x == v).expect("value in range");
        self.seq[(k + 1) % m]
    }

    /// Packs the sequence into 4-bit nibbles, first entry most significant,
    /// so that integer order equals lexicographic order for a fixed `m`.
    #[inline]
    pub fn pack(&self) -> u64 {
        let mut key = 0u64;
        for k in 0..MAX_M {
            let v = if k < self.m() { self.seq[k].saturating_sub(1) } else { 0 };
            key = (key << 4) | v as u64;
        }
        key
    }

    pub fn unpack(m: usize, key: u64) -> Self {
        let mut seq = [0u8; MAX_M];
        for (k, slot) in seq[..m].iter_mut().enumerate() {
            *slot = ((key >> (4 * (MAX_M - 1 - k))) & 0xF) as u8 + 1;
        }
        Cycle { m: m as u8, seq }
    }

    /// Rank in `0..(m−1)!` of the tail `seq[1..]` in lexicographic order.
    pub fn rank(&self) -> u64 {
        let tail = &self.seq()[1..];
        let n = tail.len();
        let mut rank = 0u64;
        for i in 0..n {
            let smaller = tail[i + 1..].iter().filter(|&&x| x < tail[i]).count() as u64;
            rank = rank * (n - i) as u64 + smaller;
        }
        rank
    }

    pub fn unrank(m: usize, mut rank: u64) -> Self {
        let n = m - 1;
        let mut digits = vec![0u64; n];
        for i in (0..n).rev() {
            let base = (n - i) as u64;
            digits[i] = rank % base;
            rank /= base;
        }
        let mut pool: Vec<u8> = (2..=m as u8).collect();
        let mut seq = [0u8; MAX_M];
        seq[0] = 1;
        for i in 0..n {
            seq[i + 1] = pool.remove(digits[i] as usize);
        }
        Cycle { m: m as u8, seq }
    }

    /// Serialization used by the binary cache formats: `m` bytes.
    pub fn to_bytes(&self) -> &[u8] {
        self.seq()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Cycle::new(bytes)
    }
}

impl fmt::Debug for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, v) in self.seq().iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

fn check_permutation(seq: &[u8]) -> Result<()> {
    let m = seq.len();
    let mut seen = [false; MAX_M + 1];
    for &v in seq {
        if v == 0 || v as usize > m || seen[v as usize] {
            return Err(Error::arg(format!("{seq:?} is not a permutation of 1..={m}")));
        }
        seen[v as usize] = true;
    }
    Ok(())
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Iterates over all `(m−1)!` cycles in increasing lexicographic order.
pub fn all_cycles(m: usize) -> impl Iterator<Item = Cycle> {
    let total = factorial(m - 1);
    let mut current = Some(Cycle::base(m));
    let mut produced = 0u64;
    std::iter::from_fn(move || {
        if produced == total {
            return None;
        }
        let c = current?;
        produced += 1;
        current = next_cycle(&c);
        Some(c)
    })
}

/// Iterates over the cycles with ranks in `start..end`, in order.
pub fn cycles_in_range(m: usize, start: u64, end: u64) -> impl Iterator<Item = Cycle> {
    let end = end.min(factorial(m - 1));
    let mut current = if start < end { Some(Cycle::unrank(m, start)) } else { None };
    let mut rank = start;
    std::iter::from_fn(move || {
        if rank >= end {
            return None;
        }
        let c = current?;
        rank += 1;
        current = next_cycle(&c);
        Some(c)
    })
}

/// Next cycle in lexicographic order of the tail, or `None` at the end.
fn next_cycle(c: &Cycle) -> Option<Cycle> {
    let mut next = *c;
    let m = c.m();
    let tail = &mut next.seq[1..m];
    let n = tail.len();
    let i = (0..n.saturating_sub(1)).rev().find(|&i| tail[i] < tail[i + 1])?;
    let j = (i + 1..n).rev().find(|&j| tail[j] > tail[i])?;
    tail.swap(i, j);
    tail[i + 1..].reverse();
    Some(next)
}

/// A permutation of `[m]` in one-line notation, `map[v − 1] = π(v)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Perm {
    m: u8,
    map: [u8; MAX_M],
}

impl Perm {
    pub fn identity(m: usize) -> Self {
        let mut map = [0u8; MAX_M];
        for (k, slot) in map[..m].iter_mut().enumerate() {
            *slot = k as u8 + 1;
        }
        Perm { m: m as u8, map }
    }

    pub fn from_images(images: &[u8]) -> Result<Self> {
        let m = images.len();
        if m == 0 || m > MAX_M {
            return Err(Error::arg(format!("permutation length {m} outside 1..={MAX_M}")));
        }
        check_permutation(images)?;
        let mut map = [0u8; MAX_M];
        map[..m].copy_from_slice(images);
        Ok(Perm { m: m as u8, map })
    }

    /// The transposition swapping `a` and `b`.
    pub fn transposition(m: usize, a: u8, b: u8) -> Self {
        let mut p = Perm::identity(m);
        p.map.swap(a as usize - 1, b as usize - 1);
        p
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m as usize
    }

    #[inline]
    pub fn apply(&self, v: u8) -> u8 {
        self.map[v as usize - 1]
    }

    pub fn images(&self) -> &[u8] {
        &self.map[..self.m()]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        let mut map = [0u8; MAX_M];
        for v in 1..=self.m() {
            map[v - 1] = self.apply(other.apply(v as u8));
        }
        Perm { m: self.m, map }
    }

    pub fn inverse(&self) -> Perm {
        let mut map = [0u8; MAX_M];
        for v in 1..=self.m() {
            map[self.apply(v as u8) as usize - 1] = v as u8;
        }
        Perm { m: self.m, map }
    }

    /// The relabeling that sends the sequence of `c` to `1, 2, …, m`, so
    /// that conjugating `c` by it yields `σ₀`.
    pub fn normalizing(c: &Cycle) -> Perm {
        let mut map = [0u8; MAX_M];
        for (k, &v) in c.seq().iter().enumerate() {
            map[v as usize - 1] = k as u8 + 1;
        }
        Perm { m: c.m, map }
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.images())
    }
}

/// An element `(π, ε)` of `G_m = S_m × {±1}`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct GroupElement {
    pub pi: Perm,
    /// `true` for `ε = −1`.
    pub invert: bool,
}

impl GroupElement {
    pub fn new(pi: Perm, invert: bool) -> Self {
        GroupElement { pi, invert }
    }

    pub fn identity(m: usize) -> Self {
        GroupElement { pi: Perm::identity(m), invert: false }
    }

    pub fn m(&self) -> usize {
        self.pi.m()
    }

    /// Group product; `act(g·h, c) = act(g, act(h, c))`.
    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { pi: self.pi.compose(&other.pi), invert: self.invert ^ other.invert }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement { pi: self.pi.inverse(), invert: self.invert }
    }

    /// `(π, ε)·c = π c^ε π⁻¹`, normalized to start at 1.
    pub fn act(&self, c: &Cycle) -> Result<Cycle> {
        if self.m() != c.m() {
            return Err(Error::arg(format!(
                "group element on {} points applied to a {}-cycle",
                self.m(),
                c.m()
            )));
        }
        Ok(self.act_unchecked(c))
    }

    #[inline]
    pub(crate) fn act_unchecked(&self, c: &Cycle) -> Cycle {
        let m = c.m();
        let mut buf = [0u8; MAX_M];
        for k in 0..m {
            let src = if self.invert { (m - k) % m } else { k };
            buf[k] = self.pi.apply(c.seq[src]);
        }
        Cycle::normalized(&buf[..m])
    }
}

/// `(π, ε)·c`; see [`GroupElement::act`].
pub fn act(g: &GroupElement, c: &Cycle) -> Result<Cycle> {
    g.act(c)
}

/// `c⁻¹`.
pub fn invert(c: &Cycle) -> Cycle {
    c.inverse()
}

/// The two generators `(σ₀, +1)` and `(ρ, −1)` of the stabilizer `H_m` of
/// `σ₀`. Here `ρ` is the reversal about 1, `v ↦ 2 − v (mod m)`, which
/// satisfies `ρ σ₀⁻¹ ρ⁻¹ = σ₀`.
#[derive(Clone, Copy, Debug)]
pub struct StabilizerGen {
    pub generators: [GroupElement; 2],
}

impl StabilizerGen {
    pub fn new(m: usize) -> Self {
        let rot: Vec<u8> = (1..=m as u8).map(|v| v % m as u8 + 1).collect();
        let refl: Vec<u8> = (1..=m).map(|v| ((2 * m + 2 - v - 1) % m) as u8 + 1).collect();
        let rot = Perm::from_images(&rot).expect("rotation is a permutation");
        let refl = Perm::from_images(&refl).expect("reflection is a permutation");
        StabilizerGen {
            generators: [GroupElement::new(rot, false), GroupElement::new(refl, true)],
        }
    }

    /// All `2m` elements of `H_m`, translations first.
    pub fn elements(&self) -> Vec<GroupElement> {
        let m = self.generators[0].m();
        let mut out = Vec::with_capacity(2 * m);
        let mut g = GroupElement::identity(m);
        for _ in 0..m {
            out.push(g);
            g = self.generators[0].compose(&g);
        }
        let translations = out.clone();
        for t in &translations {
            out.push(self.generators[1].compose(t));
        }
        out
    }
}

/// Writes the image of `c` under the `H_m` element indexed by `(shift,
/// reflect)` into `out`: values go through `v ↦ v + shift` or
/// `v ↦ shift − v` (mod m), and reflections also reverse the reading order.
#[inline]
fn hm_image(c: &Cycle, pos: &[u8; MAX_M + 1], shift: usize, reflect: bool, out: &mut [u8; MAX_M]) {
    let m = c.m();
    // the value mapped to 1: v + shift ≡ 1, or shift − v ≡ 1 (residues 1..=m)
    let pre = if reflect { (shift + 2 * m - 1) % m } else { (1 + (m - shift % m)) % m };
    let pre = if pre == 0 { m } else { pre };
    let start = pos[pre] as usize;
    for k in 0..m {
        let idx = if reflect { (start + m - k) % m } else { (start + k) % m };
        let v = c.seq[idx] as usize;
        let w = if reflect { (shift + 2 * m - v) % m } else { (v + shift) % m };
        out[k] = if w == 0 { m as u8 } else { w as u8 };
    }
}

/// Lexicographically smallest member of the `H_m`-orbit of `c`.
pub fn canonical_under_hm(c: &Cycle) -> Cycle {
    let m = c.m();
    let pos = c.positions();
    let mut best = *c;
    let mut buf = [0u8; MAX_M];
    for reflect in [false, true] {
        for shift in 0..m {
            hm_image(c, &pos, shift, reflect, &mut buf);
            if buf[..m] < best.seq[..m] {
                best.seq[..m].copy_from_slice(&buf[..m]);
            }
        }
    }
    best
}

/// Sizes of the orbits of `c` under `H_m` and under its rotation subgroup
/// `⟨(σ₀, +1)⟩`.
pub fn hm_orbit_sizes(c: &Cycle) -> (usize, usize) {
    let m = c.m();
    let pos = c.positions();
    let mut buf = [0u8; MAX_M];
    let mut images: Vec<u64> = Vec::with_capacity(2 * m);
    for reflect in [false, true] {
        for shift in 0..m {
            hm_image(c, &pos, shift, reflect, &mut buf);
            images.push(Cycle { m: c.m, seq: buf }.pack());
        }
    }
    let mut rot = images[..m].to_vec();
    rot.sort_unstable();
    rot.dedup();
    images.sort_unstable();
    images.dedup();
    (images.len(), rot.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyc(s: &[u8]) -> Cycle {
        Cycle::new(s).unwrap()
    }

    #[test]
    fn act_examples() {
        let c = cyc(&[1, 2, 3, 4]);
        assert_eq!(act(&GroupElement::identity(4), &c).unwrap(), c);
        let inv = GroupElement::new(Perm::identity(4), true);
        assert_eq!(act(&inv, &c).unwrap(), cyc(&[1, 4, 3, 2]));
        let swap = GroupElement::new(Perm::transposition(4, 2, 3), false);
        assert_eq!(act(&swap, &c).unwrap(), cyc(&[1, 3, 2, 4]));
    }

    #[test]
    fn act_rejects_mismatched_m() {
        let g = GroupElement::identity(5);
        assert!(matches!(act(&g, &Cycle::base(4)), Err(Error::Argument(_))));
    }

    #[test]
    fn invert_examples() {
        assert_eq!(invert(&cyc(&[1, 2, 3])), cyc(&[1, 3, 2]));
        assert_eq!(invert(&cyc(&[1, 2, 3, 4, 5])), cyc(&[1, 5, 4, 3, 2]));
        assert_eq!(invert(&cyc(&[1, 3, 2, 4])), cyc(&[1, 4, 2, 3]));
    }

    #[test]
    fn rejects_bad_sequences() {
        assert!(Cycle::new(&[2, 1, 3]).is_err());
        assert!(Cycle::new(&[1, 2, 2]).is_err());
        assert!(Cycle::new(&[1, 2]).is_err());
        assert_eq!(Cycle::from_rotation(&[2, 3, 1]).unwrap(), cyc(&[1, 2, 3]));
    }

    #[test]
    fn stabilizer_fixes_base_and_has_order_2m() {
        for m in 3..=9 {
            let h = StabilizerGen::new(m);
            let base = Cycle::base(m);
            for g in h.generators {
                assert_eq!(g.act(&base).unwrap(), base);
            }
            let elems = h.elements();
            let distinct: std::collections::HashSet<_> = elems.iter().collect();
            assert_eq!(distinct.len(), 2 * m);
            for g in &elems {
                assert_eq!(g.act(&base).unwrap(), base);
            }
        }
    }

    #[test]
    fn fast_canonical_matches_explicit_group() {
        for m in 3..=7 {
            let elems = StabilizerGen::new(m).elements();
            for c in all_cycles(m) {
                let orbit: Vec<Cycle> = elems.iter().map(|g| g.act(&c).unwrap()).collect();
                let min = *orbit.iter().min().unwrap();
                assert_eq!(canonical_under_hm(&c), min, "m={m} c={c}");
                let mut o = orbit.clone();
                o.sort();
                o.dedup();
                let mut r: Vec<Cycle> = orbit[..m].to_vec();
                r.sort();
                r.dedup();
                assert_eq!(hm_orbit_sizes(&c), (o.len(), r.len()));
            }
        }
    }

    #[test]
    fn canonical_h4_orbit_of_inverse_base() {
        let c = cyc(&[1, 4, 3, 2]);
        let elems = StabilizerGen::new(4).elements();
        let orbit: Vec<Cycle> = elems.iter().map(|g| g.act(&c).unwrap()).collect();
        // σ₀⁻¹ is fixed by all of H_4
        assert!(orbit.iter().all(|o| *o == c));
        assert_eq!(canonical_under_hm(&c), c);
        assert_eq!(canonical_under_hm(&Cycle::base(4)), Cycle::base(4));
    }

    #[test]
    fn h5_orbits_partition_z5() {
        let mut reps = std::collections::BTreeMap::new();
        for c in all_cycles(5) {
            *reps.entry(canonical_under_hm(&c)).or_insert(0usize) += 1;
        }
        assert_eq!(reps.values().sum::<usize>(), 24);
        for (rep, size) in &reps {
            assert_eq!(hm_orbit_sizes(rep).0, *size);
            assert_eq!(10 % size, 0);
        }
    }

    #[test]
    fn cycle_counts_and_ranks() {
        for m in 3..=9 {
            let mut count = 0u64;
            for (k, c) in all_cycles(m).enumerate() {
                assert_eq!(c.rank(), k as u64);
                if k % 97 == 0 {
                    assert_eq!(Cycle::unrank(m, k as u64), c);
                    assert_eq!(Cycle::unpack(m, c.pack()), c);
                }
                count += 1;
            }
            assert_eq!(count, factorial(m - 1));
        }
    }

    #[test]
    fn ranged_iteration() {
        let all: Vec<Cycle> = all_cycles(7).collect();
        let part: Vec<Cycle> = cycles_in_range(7, 100, 250).collect();
        assert_eq!(part, all[100..250].to_vec());
        assert_eq!(cycles_in_range(7, 700, 10_000).count(), 20);
    }

    #[test]
    fn pack_order_is_lexicographic() {
        let cycles: Vec<Cycle> = all_cycles(6).collect();
        for w in cycles.windows(2) {
            assert!(w[0] < w[1]);
            assert!(w[0].pack() < w[1].pack());
        }
    }

    #[test]
    fn normalizing_perm_maps_cycle_to_base() {
        for c in all_cycles(6) {
            let g = GroupElement::new(Perm::normalizing(&c), false);
            assert_eq!(g.act(&c).unwrap(), Cycle::base(6));
        }
    }
}
