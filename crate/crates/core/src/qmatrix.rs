//! The cost matrix `Q` via shortest paths in `Γ_m`.
//!
//! `Γ_m` joins two m-cycles when one arises from the other by swapping two
//! cyclically adjacent entries of its sequence. `Q_{σ,τ}` is the distance
//! from `σ` to `τ⁻¹`. Since `H_m` fixes `σ₀` and acts on `Γ_m` by
//! automorphisms, the distance from `σ₀` is constant on `H_m`-orbits, so the
//! search runs over canonical forms only.

use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::cache::{self, Reader};
use crate::cycle::{all_cycles, canonical_under_hm, Cycle, GroupElement, Perm, MAX_M};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"QTBL";
const VERSION: u8 = 1;

/// The m cycles adjacent to `c` in `Γ_m`.
pub fn neighbors(c: &Cycle) -> Vec<Cycle> {
    let m = c.m();
    let seq = c.seq();
    let mut buf = [0u8; MAX_M];
    (0..m)
        .map(|k| {
            buf[..m].copy_from_slice(seq);
            buf.swap(k, (k + 1) % m);
            Cycle::normalized(&buf[..m])
        })
        .collect()
}

/// Distances from `σ₀` to every `H_m`-canonical cycle.
#[derive(Clone, Debug)]
pub struct QTable {
    m: usize,
    dist: FxHashMap<u64, u16>,
}

impl QTable {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of `H_m`-orbits on `Z_m`.
    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    /// Distance from `σ₀` to `c` (any member of its `H_m`-orbit).
    pub fn dist(&self, c: &Cycle) -> u16 {
        self.dist[&canonical_under_hm(c).pack()]
    }

    /// `Q_{σ₀,τ} = dist(σ₀, τ⁻¹)`.
    pub fn q_base(&self, tau: &Cycle) -> u16 {
        self.dist(&tau.inverse())
    }

    /// `Q_{σ,τ}` for an arbitrary pair, by relabeling `σ` to `σ₀`.
    pub fn q(&self, sigma: &Cycle, tau: &Cycle) -> u16 {
        let g = GroupElement::new(Perm::normalizing(sigma), false);
        self.q_base(&g.act_unchecked(tau))
    }

    /// `Q_{σ,σ}`, which equals `⌊(m−1)²/4⌋`.
    pub fn diagonal(&self) -> u16 {
        self.q_base(&Cycle::base(self.m))
    }

    /// Canonical representatives in increasing order.
    pub fn representatives(&self) -> Vec<Cycle> {
        let mut keys: Vec<u64> = self.dist.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter().map(|k| Cycle::unpack(self.m, k)).collect()
    }

    pub fn write_cache(&self, path: &Path) -> Result<()> {
        let reps = self.representatives();
        let mut out = Vec::with_capacity(10 + reps.len() * (self.m + 2));
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        out.push(self.m as u8);
        out.extend_from_slice(&(reps.len() as u32).to_le_bytes());
        for c in &reps {
            out.extend_from_slice(c.to_bytes());
            out.extend_from_slice(&self.dist[&c.pack()].to_le_bytes());
        }
        cache::write_with_checksum(path, &out)
    }

    pub fn read_cache(path: &Path, m: usize) -> Result<Self> {
        let bytes = cache::read_verified(path)?;
        let mut r = Reader::new(&bytes);
        r.header(MAGIC, VERSION, m)?;
        let count = r.u32()? as usize;
        let mut dist = FxHashMap::default();
        dist.reserve(count);
        for _ in 0..count {
            let c = Cycle::from_bytes(r.take(m)?)?;
            if canonical_under_hm(&c) != c {
                return Err(Error::data("non-canonical cycle in Q cache"));
            }
            dist.insert(c.pack(), r.u16()?);
        }
        if !r.is_done() {
            return Err(Error::data("trailing bytes in Q cache"));
        }
        Ok(QTable { m, dist })
    }
}

fn check_m(m: usize) -> Result<()> {
    if (3..=MAX_M).contains(&m) {
        Ok(())
    } else {
        Err(Error::arg(format!("m = {m} outside 3..={MAX_M}")))
    }
}

/// Layered breadth-first search from `σ₀` over `H_m`-canonical forms.
///
/// Each layer is expanded in parallel; the next frontier is sorted before
/// insertion, so the result does not depend on the thread count.
pub fn bfs_from_base(m: usize) -> Result<QTable> {
    check_m(m)?;
    let base = Cycle::base(m);
    let mut dist = FxHashMap::default();
    dist.insert(base.pack(), 0u16);
    let mut frontier = vec![base];
    let mut layer = 0u16;
    while !frontier.is_empty() {
        layer += 1;
        let mut next: Vec<u64> = frontier
            .par_iter()
            .flat_map_iter(|c| {
                neighbors(c).into_iter().map(|n| canonical_under_hm(&n).pack())
            })
            .filter(|k| !dist.contains_key(k))
            .collect();
        next.par_sort_unstable();
        next.dedup();
        for &k in &next {
            dist.insert(k, layer);
        }
        frontier = next.into_iter().map(|k| Cycle::unpack(m, k)).collect();
    }
    Ok(QTable { m, dist })
}

/// Plain BFS over all `(m−1)!` cycles, without symmetry pruning.
pub fn bfs_unpruned(m: usize) -> Result<HashMap<Cycle, u16>> {
    check_m(m)?;
    if m > 9 {
        return Err(Error::Resource(format!("unpruned search at m = {m} is too large")));
    }
    let mut dist = HashMap::new();
    let base = Cycle::base(m);
    dist.insert(base, 0u16);
    let mut queue = std::collections::VecDeque::from([base]);
    while let Some(c) = queue.pop_front() {
        let d = dist[&c];
        for n in neighbors(&c) {
            dist.entry(n).or_insert_with(|| {
                queue.push_back(n);
                d + 1
            });
        }
    }
    debug_assert_eq!(dist.len(), all_cycles(m).count());
    Ok(dist)
}

/// Loads `q_<m>.bin` from `dir` or computes and stores it.
pub fn load_or_build(dir: &Path, m: usize) -> Result<QTable> {
    let path = cache::q_path(dir, m);
    if path.exists() {
        return QTable::read_cache(&path, m);
    }
    let table = bfs_from_base(m)?;
    table.write_cache(&path)?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn neighbors_m3() {
        let n: HashSet<Cycle> = neighbors(&Cycle::base(3)).into_iter().collect();
        assert_eq!(n, HashSet::from([Cycle::new(&[1, 3, 2]).unwrap()]));
    }

    #[test]
    fn neighbors_m4_base() {
        let n = neighbors(&Cycle::base(4));
        assert_eq!(n.len(), 4);
        let full = bfs_unpruned(4).unwrap();
        assert!(n.iter().all(|c| full[c] == 1));
    }

    #[test]
    fn neighbors_symmetric_and_irreflexive() {
        for m in 3..=6 {
            for c in all_cycles(m) {
                let n = neighbors(&c);
                assert!(!n.contains(&c));
                for x in &n {
                    assert!(neighbors(x).contains(&c));
                }
            }
        }
    }

    #[test]
    fn diagonal_small() {
        assert_eq!(bfs_from_base(3).unwrap().diagonal(), 1);
        assert_eq!(bfs_from_base(7).unwrap().diagonal(), 9);
    }

    #[test]
    fn pruned_matches_unpruned() {
        for m in 3..=7 {
            let pruned = bfs_from_base(m).unwrap();
            let full = bfs_unpruned(m).unwrap();
            for (c, d) in &full {
                assert_eq!(pruned.dist(c), *d, "m={m} c={c}");
            }
        }
    }

    #[test]
    fn q_symmetric_on_pairs() {
        for m in 4..=6 {
            let t = bfs_from_base(m).unwrap();
            let cycles: Vec<Cycle> = all_cycles(m).collect();
            for s in &cycles {
                for u in &cycles {
                    assert_eq!(t.q(s, u), t.q(u, s));
                }
            }
        }
    }

    #[test]
    fn cache_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let t = bfs_from_base(6).unwrap();
        let path = cache::q_path(dir.path(), 6);
        t.write_cache(&path).unwrap();
        let back = QTable::read_cache(&path, 6).unwrap();
        assert_eq!(back.representatives(), t.representatives());
        for c in all_cycles(6) {
            assert_eq!(back.dist(&c), t.dist(&c));
        }
        assert!(QTable::read_cache(&path, 7).is_err());
        let mut bytes = std::fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(QTable::read_cache(&path, 6), Err(Error::Data(_))));
    }
}
