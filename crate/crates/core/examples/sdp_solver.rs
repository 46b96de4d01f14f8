//! The interior-point solver on a small stand-alone problem: the Lovász
//! theta number of the 5-cycle, which equals √5.

use zarank::sdp::{solve, LinExpr, SdpProblem, SolverOptions};

fn main() -> zarank::Result<()> {
    let n = 5;
    let mut p = SdpProblem::new();
    let x = p.psd_matrix("X", n);
    let mut trace = LinExpr::new();
    for i in 0..n {
        trace.add_term(x.entry(i, i), 1.0);
    }
    p.add_eq(&trace, 1.0)?;
    for i in 0..n {
        p.add_eq(&LinExpr::var(x.entry(i, (i + 1) % n)), 0.0)?;
    }
    let mut total = LinExpr::new();
    for i in 0..n {
        for j in i..n {
            total.add_term(x.entry(i, j), if i == j { 1.0 } else { 2.0 });
        }
    }
    p.maximize(total)?;
    let sol = solve(&p, &SolverOptions::default())?;
    println!("theta(C5) = {:.12}  (sqrt 5 = {:.12})", sol.objective, 5f64.sqrt());
    println!("status {:?}, {} iterations, gap {:.1e}", sol.status, sol.iterations, sol.relative_gap);
    Ok(())
}
