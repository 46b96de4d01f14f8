use std::collections::HashMap;

use zarank::cycle::{all_cycles, Cycle, GroupElement, Perm};
use zarank::orbits::OrbitTable;

fn find(p: &mut [usize], mut x: usize) -> usize {
    while p[x] != x {
        p[x] = p[p[x]];
        x = p[x];
    }
    x
}

/// Compares the orbit table with the orbits of pairs under the generators
/// of `G_m` and the coordinate swap, found by union-find over all pairs.
pub fn brute_force_orbits_agree(table: &OrbitTable) -> Result<(), String> {
    let m = table.m();
    let cycles: Vec<Cycle> = all_cycles(m).collect();
    let index: HashMap<Cycle, usize> = cycles.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let n = cycles.len();
    let mut gens: Vec<GroupElement> =
        (1..m as u8).map(|a| GroupElement::new(Perm::transposition(m, a, a + 1), false)).collect();
    gens.push(GroupElement::new(Perm::identity(m), true));
    let mut parent: Vec<usize> = (0..n * n).collect();
    for (i, s) in cycles.iter().enumerate() {
        for (j, t) in cycles.iter().enumerate() {
            let here = i * n + j;
            let mut images: Vec<usize> =
                gens.iter().map(|g| index[&g.act(s).unwrap()] * n + index[&g.act(t).unwrap()]).collect();
            images.push(j * n + i);
            for im in images {
                let (a, b) = (find(&mut parent, here), find(&mut parent, im));
                parent[a] = b;
            }
        }
    }
    let mut root_to_id: HashMap<usize, u32> = HashMap::new();
    let mut id_to_root: HashMap<u32, usize> = HashMap::new();
    for (i, s) in cycles.iter().enumerate() {
        for (j, t) in cycles.iter().enumerate() {
            let root = find(&mut parent, i * n + j);
            let id = table.orbit_of_pair(s, t).map_err(|e| e.to_string())?;
            if *root_to_id.entry(root).or_insert(id) != id || *id_to_root.entry(id).or_insert(root) != root {
                return Err(format!("pair ({s:?}, {t:?}) is classified differently"));
            }
        }
    }
    if root_to_id.len() != table.len() {
        return Err(format!("{} brute-force orbits, {} in the table", root_to_id.len(), table.len()));
    }
    let mut sizes: HashMap<u32, u64> = HashMap::new();
    for i in 0..n * n {
        let r = find(&mut parent, i);
        *sizes.entry(root_to_id[&r]).or_default() += 1;
    }
    for r in table.records() {
        if sizes[&r.symmetric_id] != r.size {
            return Err(format!("orbit {} has {} pairs, table says {}", r.symmetric_id, sizes[&r.symmetric_id], r.size));
        }
    }
    Ok(())
}
