//! Orbits of cycle pairs under `G_m`, and the symmetrized set `Ω′_m`.
//!
//! `G_m` acts transitively on `Z_m`, so every pair orbit contains a pair
//! `(σ₀, τ)`, and two such pairs are in the same orbit exactly when their
//! second coordinates lie in the same `H_m`-orbit. An element of `Ω_m` is
//! therefore named by the `H_m`-canonical form of `τ`.
//!
//! The swap `(σ₀, τ) ↦ (τ, σ₀)` is brought back to first coordinate `σ₀` by
//! the relabeling `π` that sends the sequence of `τ` to `1, …, m`; the
//! partner is `π σ₀ π⁻¹ = (π(1) π(2) … π(m))`. An element of `Ω′_m` is keyed
//! by the smaller of the two canonical forms, and its size counts the union
//! of both pair orbits once.

use std::path::Path;

use rustc_hash::FxHashMap;

use crate::cache::{self, Reader};
use crate::cycle::{
    all_cycles, canonical_under_hm, hm_orbit_sizes, Cycle, GroupElement, Perm, MAX_M,
};
use crate::error::{Error, Result};
use crate::qmatrix::QTable;

const MAGIC: &[u8; 4] = b"ORBT";
const VERSION: u8 = 1;

/// One element of `Ω′_m`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitRecord {
    /// Second coordinate of the representative pair `(σ₀, rep_tau)`: the
    /// smaller of the two canonical forms identified by the swap.
    pub rep_tau: Cycle,
    /// Number of ordered pairs in the orbit.
    pub size: u64,
    pub q: u16,
    pub symmetric_id: u32,
}

/// The finished orbit index: records of `Ω′_m` plus a lookup from every
/// `H_m`-canonical cycle to its record.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    m: usize,
    records: Vec<OrbitRecord>,
    lookup: FxHashMap<u64, u32>,
    omega_count: usize,
}

/// The swap partner of the pair `(σ₀, τ)`, as a second coordinate.
pub fn swap_partner(tau: &Cycle) -> Cycle {
    let pi = Perm::normalizing(tau);
    let m = tau.m();
    let mut seq = [0u8; MAX_M];
    for (k, slot) in seq[..m].iter_mut().enumerate() {
        *slot = pi.apply(k as u8 + 1);
    }
    Cycle::normalized(&seq[..m])
}

/// `H_m`-canonical second coordinate of the pair `(s, t)` after moving `s`
/// to `σ₀`.
pub fn pair_key(s: &Cycle, t: &Cycle) -> Cycle {
    let g = GroupElement::new(Perm::normalizing(s), false);
    canonical_under_hm(&g.act_unchecked(t))
}

impl OrbitTable {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn records(&self) -> &[OrbitRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `|Ω_m|`, before the swap identification.
    pub fn omega_count(&self) -> usize {
        self.omega_count
    }

    /// `|Ω′_m|`.
    pub fn omega_prime_count(&self) -> usize {
        self.records.len()
    }

    pub fn record(&self, id: u32) -> &OrbitRecord {
        &self.records[id as usize]
    }

    /// Id of the orbit containing `(σ₀, τ)` for an `H_m`-canonical `τ`.
    #[inline]
    pub fn id_of_canonical(&self, tau: &Cycle) -> Result<u32> {
        self.lookup
            .get(&tau.pack())
            .copied()
            .ok_or_else(|| Error::internal(format!("no orbit for canonical cycle {tau}")))
    }

    /// Id of the `Ω′_m` element containing `(s, t)`.
    pub fn orbit_of_pair(&self, s: &Cycle, t: &Cycle) -> Result<u32> {
        if s.m() != self.m || t.m() != self.m {
            return Err(Error::arg("cycle length does not match the orbit table"));
        }
        self.id_of_canonical(&pair_key(s, t))
    }

    /// Id of the orbit of `(σ₀, σ₀)`; its pairs are exactly the diagonal.
    pub fn diagonal_id(&self) -> u32 {
        self.id_of_canonical(&Cycle::base(self.m)).expect("diagonal orbit present")
    }

    /// `Σ |ω|`, which must equal `((m−1)!)²`.
    pub fn total_size(&self) -> u128 {
        self.records.iter().map(|r| r.size as u128).sum()
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let mut out = Vec::with_capacity(14 + self.records.len() * (self.m + 10));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.m as u8);
        out.extend_from_slice(&(self.records.len() as u64).to_le_bytes());
        for r in &self.records {
            out.extend_from_slice(r.rep_tau.to_bytes());
            out.extend_from_slice(&r.size.to_le_bytes());
            out.extend_from_slice(&r.q.to_le_bytes());
        }
        cache::write_with_checksum(path, &out)
    }

    /// Reads `orbits_<m>.bin`. The lookup is rebuilt from the stored
    /// representatives and their swap partners.
    pub fn read_cache(path: &Path, m: usize) -> Result<Self> {
        let bytes = cache::read_verified(path)?;
        let mut r = Reader::new(&bytes);
        r.header(MAGIC, VERSION, m)?;
        let count = r.u64()? as usize;
        let mut records = Vec::with_capacity(count);
        let mut lookup = FxHashMap::default();
        let mut omega_count = 0;
        for id in 0..count {
            let rep = Cycle::from_bytes(r.take(m)?)?;
            let size = r.u64()?;
            let q = r.u16()?;
            let partner = canonical_under_hm(&swap_partner(&rep));
            if canonical_under_hm(&rep) != rep || partner < rep {
                return Err(Error::data("orbit cache holds a non-canonical representative"));
            }
            lookup.insert(rep.pack(), id as u32);
            omega_count += 1;
            if partner != rep {
                lookup.insert(partner.pack(), id as u32);
                omega_count += 1;
            }
            records.push(OrbitRecord { rep_tau: rep, size, q, symmetric_id: id as u32 });
        }
        if !r.is_done() {
            return Err(Error::data("trailing bytes in orbit cache"));
        }
        if records.windows(2).any(|w| w[0].rep_tau >= w[1].rep_tau) {
            return Err(Error::data("orbit cache records are not sorted"));
        }
        Ok(OrbitTable { m, records, lookup, omega_count })
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Builds `Ω′_m` from the canonical forms stored in the Q table.
pub fn enumerate_orbits(q: &QTable) -> Result<OrbitTable> {
    let m = q.m();
    let fact = factorial(m - 1);
    let reps = q.representatives();
    let omega_count = reps.len();
    // key -> (pair-orbit sizes, q)
    let mut groups: FxHashMap<u64, (u64, u16)> = FxHashMap::default();
    for tau in &reps {
        let partner = canonical_under_hm(&swap_partner(tau));
        let key = (*tau).min(partner);
        let (h, _) = hm_orbit_sizes(tau);
        let size = fact
            .checked_mul(h as u64)
            .ok_or_else(|| Error::Resource("orbit size overflows 64 bits".into()))?;
        let qv = q.q_base(tau);
        let entry = groups.entry(key.pack()).or_insert((0, qv));
        if entry.1 != qv {
            return Err(Error::internal(format!("Q differs across the swap of {tau}")));
        }
        entry.0 += size;
    }
    let mut keys: Vec<u64> = groups.keys().copied().collect();
    keys.sort_unstable();
    let mut records = Vec::with_capacity(keys.len());
    let mut key_id = FxHashMap::default();
    for (id, k) in keys.iter().enumerate() {
        let (size, qv) = groups[k];
        key_id.insert(*k, id as u32);
        records.push(OrbitRecord {
            rep_tau: Cycle::unpack(m, *k),
            size,
            q: qv,
            symmetric_id: id as u32,
        });
    }
    let mut lookup = FxHashMap::default();
    lookup.reserve(reps.len());
    for tau in &reps {
        let partner = canonical_under_hm(&swap_partner(tau));
        let key = (*tau).min(partner);
        lookup.insert(tau.pack(), key_id[&key.pack()]);
    }
    let table = OrbitTable { m, records, lookup, omega_count };
    let expected = (fact as u128) * (fact as u128);
    if table.total_size() != expected {
        return Err(Error::internal("orbit sizes do not sum to ((m-1)!)^2"));
    }
    Ok(table)
}

/// Number of orbits of `Z_m × Z_m` under `S_m` alone.
///
/// With first coordinate fixed to `σ₀`, these are the orbits of the second
/// coordinate under the rotation subgroup of `H_m`; each `H_m`-orbit is one
/// or two of them.
pub fn count_sm_orbits(m: usize) -> Result<u64> {
    if !(3..=MAX_M).contains(&m) {
        return Err(Error::arg(format!("m = {m} outside 3..={MAX_M}")));
    }
    if m > 12 {
        return Err(Error::Resource(format!("enumerating Z_{m} is too large")));
    }
    let mut count = 0u64;
    for c in all_cycles(m) {
        if canonical_under_hm(&c) == c {
            count += sm_orbits_in(&c);
        }
    }
    Ok(count)
}

/// Same count, from the representatives already held by a Q table.
pub fn count_sm_orbits_from(q: &QTable) -> u64 {
    q.representatives().iter().map(sm_orbits_in).sum()
}

fn sm_orbits_in(c: &Cycle) -> u64 {
    let (h, r) = hm_orbit_sizes(c);
    if h == r {
        1
    } else {
        2
    }
}

/// Published `(m, S_m-orbits, |Ω_m|, |Ω_m′|)`.
pub const REFERENCE_COUNTS: [(usize, u64, u64, u64); 10] = [
    (4, 3, 3, 3),
    (5, 8, 8, 7),
    (6, 24, 20, 17),
    (7, 108, 78, 56),
    (8, 640, 380, 239),
    (9, 4492, 2438, 1366),
    (10, 36336, 18744, 9848),
    (11, 329900, 166870, 85058),
    (12, 3326788, 1670114, 840906),
    (13, 36846288, 18446184, 9244958),
];

pub fn reference_counts(m: usize) -> Option<(u64, u64, u64)> {
    REFERENCE_COUNTS.iter().find(|r| r.0 == m).map(|&(_, a, b, c)| (a, b, c))
}

/// Loads `orbits_<m>.bin` from `dir` or computes and stores it.
pub fn load_or_build(dir: &Path, q: &QTable) -> Result<OrbitTable> {
    let path = cache::orbits_path(dir, q.m());
    if path.exists() {
        return OrbitTable::read_cache(&path, q.m());
    }
    let table = enumerate_orbits(q)?;
    table.write_cache(&path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmatrix::bfs_from_base;

    fn table(m: usize) -> OrbitTable {
        enumerate_orbits(&bfs_from_base(m).unwrap()).unwrap()
    }

    #[test]
    fn small_counts() {
        let t4 = table(4);
        assert_eq!((t4.omega_count(), t4.omega_prime_count()), (3, 3));
        let t5 = table(5);
        assert_eq!((t5.omega_count(), t5.omega_prime_count()), (8, 7));
        assert_eq!(count_sm_orbits(4).unwrap(), 3);
        assert_eq!(count_sm_orbits(6).unwrap(), 24);
    }

    #[test]
    fn swap_partner_is_involutive_on_orbits() {
        for m in 4..=8 {
            for c in all_cycles(m) {
                let p = swap_partner(&c);
                assert_eq!(canonical_under_hm(&swap_partner(&p)), canonical_under_hm(&c));
            }
        }
    }

    #[test]
    fn diagonal_orbit() {
        for m in 4..=8 {
            let t = table(m);
            let r = t.record(t.diagonal_id());
            assert_eq!(r.size, factorial(m - 1));
            assert_eq!(r.q as usize, (m - 1) * (m - 1) / 4);
        }
    }

    #[test]
    fn orbit_sizes_divide_group_order() {
        for m in 4..=8 {
            let order = 4 * factorial(m);
            for r in table(m).records() {
                assert!(r.size > 0 && order % r.size == 0, "m={m} size={}", r.size);
            }
        }
    }

    #[test]
    fn lookup_rejects_wrong_m() {
        let t = table(5);
        assert!(t.orbit_of_pair(&Cycle::base(4), &Cycle::base(4)).is_err());
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let t = table(7);
        let path = cache::orbits_path(dir.path(), 7);
        t.write_cache(&path).unwrap();
        let back = OrbitTable::read_cache(&path, 7).unwrap();
        assert_eq!(back.records(), t.records());
        assert_eq!(back.omega_count(), t.omega_count());
        for s in all_cycles(7).step_by(37) {
            for u in all_cycles(7).step_by(11) {
                assert_eq!(back.orbit_of_pair(&s, &u).unwrap(), t.orbit_of_pair(&s, &u).unwrap());
            }
        }
    }
}
