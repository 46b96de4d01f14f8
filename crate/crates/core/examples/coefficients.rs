//! The hook-block coefficients `A_ω` by the three independent routes.

use zarank::coeffs::{beta_coeffs, BetaRoute};
use zarank::orbits::enumerate_orbits;
use zarank::qmatrix::bfs_from_base;

fn main() -> zarank::Result<()> {
    let m = 6;
    let table = enumerate_orbits(&bfs_from_base(m)?)?;
    let direct = beta_coeffs(&table, BetaRoute::Direct)?;
    let poly = beta_coeffs(&table, BetaRoute::Poly)?;
    let sum = beta_coeffs(&table, BetaRoute::OrbitSum)?;
    println!("m = {m}: direct == poly: {}, direct == orbit-sum: {}", direct == poly, direct == sum);
    println!("{:>3} {:>6} {:>3}  upper triangle of A", "id", "|w|", "q");
    for r in &sum.records {
        println!("{:>3} {:>6} {:>3}  {:?}", r.id, r.size, r.q, r.a);
    }
    Ok(())
}
