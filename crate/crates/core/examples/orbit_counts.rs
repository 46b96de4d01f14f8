//! Orbit counts of pairs of m-cycles next to the published table.

use zarank::orbits::{count_sm_orbits_from, enumerate_orbits, reference_counts};
use zarank::qmatrix::bfs_from_base;

fn main() -> zarank::Result<()> {
    let top: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(9);
    println!("{:>3} {:>10} {:>10} {:>10}  published", "m", "S_m", "|Omega|", "|Omega'|");
    for m in 4..=top {
        let q = bfs_from_base(m)?;
        let t = enumerate_orbits(&q)?;
        let got = (count_sm_orbits_from(&q), t.omega_count() as u64, t.omega_prime_count() as u64);
        let mark = match reference_counts(m) {
            Some(r) if r == got => "ok",
            Some(_) => "MISMATCH",
            None => "-",
        };
        println!("{m:>3} {:>10} {:>10} {:>10}  {mark}", got.0, got.1, got.2);
    }
    Ok(())
}
