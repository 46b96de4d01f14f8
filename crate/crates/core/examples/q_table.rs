//! Costs `Q_{σ0,τ}` from one symmetry-pruned breadth-first search.
//!
//! `cargo run --release --example q_table -- 8`

use std::collections::BTreeMap;

use zarank::qmatrix::bfs_from_base;

fn main() -> zarank::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let q = bfs_from_base(m)?;
    let reps = q.representatives();
    let mut hist: BTreeMap<u16, usize> = BTreeMap::new();
    for c in &reps {
        *hist.entry(q.dist(c)).or_default() += 1;
    }
    println!("m = {m}: {} H_m-orbit representatives", reps.len());
    println!("Q(s0, s0) = dist(s0, s0^-1) = {} (expected {})", q.diagonal(), (m - 1) * (m - 1) / 4);
    for (d, n) in hist {
        println!("  distance {d:>3}: {n} representatives");
    }
    Ok(())
}
