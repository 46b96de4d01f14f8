//! The full block-diagonalized relaxation `α_m` for small m.

use std::time::Instant;

use zarank::alpha::{build_alpha_coeffs, solve_alpha, ALPHA_DEFAULT_MAX_M};
use zarank::orbits::enumerate_orbits;
use zarank::qmatrix::bfs_from_base;
use zarank::sdp::SolverOptions;

fn main() -> zarank::Result<()> {
    let top: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    for m in 4..=top {
        let start = Instant::now();
        let table = enumerate_orbits(&bfs_from_base(m)?)?;
        let c = build_alpha_coeffs(&table, ALPHA_DEFAULT_MAX_M)?;
        let r = solve_alpha(&c, &SolverOptions::default())?;
        println!(
            "alpha_{m} = {:.10}  ({} blocks, {} variables, {:.2}s)",
            r.alpha,
            c.blocks.len(),
            r.x.len(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
