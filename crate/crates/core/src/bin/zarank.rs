use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use zarank::beta::CutConfig;
use zarank::bounds::{self, Gamma, Levels, Source};
use zarank::cache;
use zarank::coeffs::BetaRoute;
use zarank::pipeline::{check_counts, Pipeline, Precision};
use zarank::repsets::{block_multiset, format_multiset, reference_multiset, representative_set_alpha};
use zarank::sdp::SolverOptions;
use zarank::{Error, Result};

/// Certified SDP lower bounds on crossing numbers of K_{m,n}.
#[derive(Parser)]
#[command(name = "zarank", version)]
struct Cli {
    /// Cache directory [default: $CROSSING_CACHE_DIR or ./.crossing-cache]
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads [default: all cores]
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write the result as JSON to this path
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct SolveArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol_gap: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_feas: f64,
    /// double | extended
    #[arg(long, default_value = "double")]
    precision: Precision,
}

impl SolveArgs {
    fn options(&self) -> SolverOptions {
        let mut o = SolverOptions { tol_gap: self.tol_gap, tol_feas: self.tol_feas, ..Default::default() };
        self.precision.apply(&mut o);
        o
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Distances from the base cycle on H_m-orbit representatives
    Q {
        #[arg(long)]
        m: usize,
    },
    /// Orbit table of pairs of cycles
    Orbits {
        #[arg(long)]
        m: usize,
        /// Check cache checksums and the published counts
        #[arg(long)]
        verify: bool,
    },
    /// Coefficient cache for the single-block relaxation
    Coeffs {
        #[arg(long)]
        m: usize,
        /// direct | poly | orbit-sum
        #[arg(long, default_value = "orbit-sum")]
        route: BetaRoute,
        /// Also print the block sizes of the full representative set
        #[arg(long)]
        blocks: bool,
        /// Check the block sizes against the published ones
        #[arg(long)]
        verify: bool,
    },
    /// The full relaxation alpha_m
    Alpha {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        solve: SolveArgs,
        /// Allow m above the default size limit
        #[arg(long)]
        allow_large: bool,
    },
    /// The single-block relaxation beta_m with a certified bound
    Beta {
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        solve: SolveArgs,
        /// Stop once every normalized violation is at most this
        #[arg(long, default_value_t = 1e-8)]
        tol_cut: f64,
        /// Cuts added per round
        #[arg(long, default_value_t = 50)]
        batch: usize,
        #[arg(long, default_value = "orbit-sum")]
        route: BetaRoute,
        /// Continue from the saved state in the cache directory
        #[arg(long)]
        resume: bool,
        /// Re-check the certificate in exact arithmetic
        #[arg(long)]
        verify: bool,
    },
    /// Crossing-number bounds from gamma values
    Bounds {
        /// JSON list of {m, alpha, beta} entries
        #[arg(long, conflicts_with = "from_cache")]
        from_table: Option<PathBuf>,
        /// Use certified beta results stored in the cache directory
        #[arg(long)]
        from_cache: bool,
        /// n values, e.g. 10..13
        #[arg(long, default_value = "10..13")]
        n: String,
        /// m values; defaults to m = n
        #[arg(long)]
        m: Option<String>,
        /// CSV instead of a table
        #[arg(long)]
        csv: bool,
    },
    /// Re-certify the saved beta dual point
    Certify {
        #[arg(long)]
        m: usize,
        #[arg(long, default_value = "orbit-sum")]
        route: BetaRoute,
    },
    /// Exact re-check of a certificate and the cache checksums
    Verify {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value = "orbit-sum")]
        route: BetaRoute,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(path: Option<&Path>, value: &serde_json::Value) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, serde_json::to_string_pretty(value)?)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Argument(e.to_string()))?;
    }
    let pipe = Pipeline::new(cli.cache_dir.clone().unwrap_or_else(cache::default_cache_dir))?;
    let json_out = cli.json.as_deref();
    match cli.cmd {
        Cmd::Q { m } => {
            let q = pipe.q(m)?;
            let reps = q.representatives();
            let max = reps.iter().map(|c| q.dist(c)).max().unwrap_or(0);
            println!("m = {m}: {} representatives, Q(s0,s0) = {}, max distance {max}", reps.len(), q.diagonal());
            emit(json_out, &json!({"m": m, "representatives": reps.len(), "diagonal": q.diagonal(), "max_distance": max}))?;
        }
        Cmd::Orbits { m, verify } => {
            let q = pipe.q(m)?;
            let table = pipe.orbits(m)?;
            let check = check_counts(&q, &table);
            println!("m = {m}: S_m-orbits {}, |Omega| {}, |Omega'| {}", check.sm_orbits, check.omega, check.omega_prime);
            println!("{} / {}", check.omega, check.omega_prime);
            emit(json_out, &serde_json::to_value(&check)?)?;
            if verify {
                verify_caches(&pipe, m)?;
                match check.matches() {
                    Some(true) => println!("counts match the published values"),
                    Some(false) => {
                        let e = check.expected.unwrap();
                        return Err(Error::Data(format!("counts differ from the published {} / {} / {}", e.0, e.1, e.2)));
                    }
                    None => println!("no published counts for m = {m}"),
                }
            }
        }
        Cmd::Coeffs { m, route, blocks, verify } => {
            let c = pipe.beta_coeffs(m, route)?;
            println!("m = {m}: {} orbit records, block dimension {}", c.records.len(), c.d);
            let mut value = json!({"m": m, "records": c.records.len(), "d": c.d});
            if blocks || verify {
                let ms = format_multiset(&block_multiset(&representative_set_alpha(m)?));
                println!("blocks: {ms}");
                value["blocks"] = json!(ms);
                if verify {
                    match reference_multiset(m) {
                        Some(r) if r == ms => println!("block sizes match the published values"),
                        Some(r) => return Err(Error::Data(format!("block sizes differ from the published {r}"))),
                        None => println!("no published block sizes for m = {m}"),
                    }
                }
            }
            emit(json_out, &value)?;
        }
        Cmd::Alpha { m, solve, allow_large } => {
            let r = pipe.alpha(m, &solve.options(), allow_large.then_some(usize::MAX))?;
            println!("alpha_{m} = {:.10}", r.alpha);
            println!(
                "gap {:.2e}, primal infeasibility {:.2e}, {} iterations",
                r.solution.relative_gap, r.solution.primal_infeasibility, r.solution.iterations
            );
            emit(json_out, &json!({"m": m, "alpha": r.alpha, "status": format!("{:?}", r.solution.status), "relative_gap": r.solution.relative_gap, "iterations": r.solution.iterations}))?;
        }
        Cmd::Beta { m, solve, tol_cut, batch, route, resume, verify } => {
            let mut cfg = CutConfig::for_m(m);
            cfg.solver = solve.options();
            cfg.tol_cut = tol_cut;
            cfg.batch = batch;
            let res = pipe.beta(m, route, &cfg, resume, |log| {
                let line = json!({
                    "round": log.round,
                    "active": log.active,
                    "objective": log.objective,
                    "max_violation": log.max_violation,
                    "wall_time_ms": log.wall_time_ms as u64,
                });
                eprintln!("{line}");
            })?;
            let summary = serde_json::to_value(&res)?;
            println!("{}", serde_json::to_string_pretty(&summary)?);
            emit(json_out, &summary)?;
            if verify {
                let (_, ok) = pipe.verify_certificate_file(m, route, None)?;
                if !ok {
                    return Err(Error::Internal("certificate failed the exact re-check".into()));
                }
                eprintln!("certificate verified");
            }
        }
        Cmd::Bounds { from_table, from_cache, n, m, csv } => {
            let levels = if let Some(p) = from_table {
                bounds::levels_from_table(&bounds::read_table(&p)?)?
            } else if from_cache {
                cached_levels(pipe.dir())?
            } else {
                bounds::reference_levels()
            };
            let ns = bounds::parse_range(&n)?;
            let rows = match m {
                None => bounds::knn_table(&levels, &ns),
                Some(ms) => {
                    let ms = bounds::parse_range(&ms)?;
                    let levels = &levels;
                    ms.iter().flat_map(|&m| ns.iter().filter_map(move |&n| levels.bound(m, n))).collect()
                }
            };
            if rows.is_empty() {
                return Err(Error::Dependency("no gamma value at or below the requested m".into()));
            }
            let mut out = std::io::stdout().lock();
            if csv {
                bounds::write_csv(&rows, &mut out)?;
            } else {
                for g in levels.best.values() {
                    let q = bounds::quadratic_bound(g.m, &g.value);
                    let l = bounds::lift_bound(&q);
                    let ratio = bounds::asymptotic_ratio(g.m, &g.value);
                    writeln!(out, "{q}   [{}]", g.source)?;
                    writeln!(out, "    {l}")?;
                    writeln!(
                        out,
                        "    lim cr(K_{{m,n}})/Z(m,n) >= {} m/(m-1)",
                        bounds::truncate_decimal(&ratio, 4)
                    )?;
                }
                writeln!(out)?;
                bounds::write_table(&rows, &mut out)?;
            }
            emit(json_out, &serde_json::to_value(&rows)?)?;
        }
        Cmd::Certify { m, route } => {
            let cert = pipe.certify_saved(m, route)?;
            println!("m = {m}: certified bound {:.10} (t = {}/{})", cert.certified_bound, cert.t_cert.numer(), cert.t_cert.denom());
            emit(json_out, &serde_json::to_value(&cert)?)?;
        }
        Cmd::Verify { m, certificate, route } => {
            verify_caches(&pipe, m)?;
            let (cert, ok) = pipe.verify_certificate_file(m, route, certificate.as_deref())?;
            emit(json_out, &json!({"m": m, "certified_bound": cert.certified_bound, "valid": ok}))?;
            if !ok {
                return Err(Error::Data("certificate does not satisfy every constraint".into()));
            }
            println!("m = {m}: certificate valid, bound {:.10}", cert.certified_bound);
        }
    }
    Ok(())
}

fn verify_caches(pipe: &Pipeline, m: usize) -> Result<()> {
    for c in pipe.verify_caches(m)? {
        if c.present && !c.checksum_ok {
            return Err(Error::Data(format!("checksum mismatch for {}", c.path.display())));
        }
        if c.present {
            println!("checksum ok: {}", c.path.display());
        }
    }
    Ok(())
}

/// Certified bounds from the `beta_<m>.json` results in the cache.
fn cached_levels(dir: &Path) -> Result<Levels> {
    let mut levels = Levels::default();
    for m in 3..=16 {
        let path = cache::beta_result_path(dir, m);
        if !path.exists() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        let bound = v["certified_bound"]
            .as_f64()
            .ok_or_else(|| Error::Data(format!("{}: no certified_bound", path.display())))?;
        let value = num_rational::BigRational::from_float(bound)
            .ok_or_else(|| Error::Data(format!("{}: bound is not finite", path.display())))?;
        levels.insert(Gamma::new(m, value, Source::Beta, true));
    }
    if levels.best.is_empty() {
        return Err(Error::Dependency(format!("no beta results in {}", dir.display())));
    }
    Ok(levels)
}
