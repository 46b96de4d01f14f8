//! Cutting-plane solve of `β_m`, exact certification and the rank of the
//! optimal block, through the on-disk cache.
//!
//! `cargo run --release --example beta_relaxation -- 9`

use zarank::beta::CutConfig;
use zarank::coeffs::BetaRoute;
use zarank::pipeline::Pipeline;

fn main() -> zarank::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let dir = tempfile_dir();
    let pipe = Pipeline::new(&dir)?;
    let res = pipe.beta(m, BetaRoute::OrbitSum, &CutConfig::for_m(m), false, |log| {
        println!(
            "round {:>2}: {:>4} cuts, objective {:.10}, max violation {:.2e}",
            log.round, log.active, log.objective, log.max_violation
        );
    })?;
    let (_, valid) = pipe.verify_certificate_file(m, BetaRoute::OrbitSum, None)?;
    println!("beta_{m} = {:.10}", res.beta);
    println!("certified bound {:.10} (exact re-check: {valid})", res.certified_bound);
    println!("rank of the optimal block: {}", res.rank);
    if let Some(v) = &res.scaled_eigenvector {
        println!("generating vector {v:.10?}");
    }
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}

fn tempfile_dir() -> std::path::PathBuf {
    std::env::temp_dir().join(format!("zarank-beta-example-{}", std::process::id()))
}
