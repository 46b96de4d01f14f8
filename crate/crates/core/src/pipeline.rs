//! Cached stages `q → orbits → coeffs → {alpha, beta} → bounds`, shared by
//! the command-line tool and the examples.
//!
//! Every artifact lives under one cache directory and is rebuilt only when
//! missing, so repeating a stage with a warm cache does no work.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::alpha::{build_alpha_coeffs, solve_alpha, AlphaResult, ALPHA_DEFAULT_MAX_M};
use crate::beta::{certify, run_beta, verify_certificate, Certificate, CutConfig, CutState, RoundLog, BetaResult};
use crate::cache;
use crate::coeffs::{load_or_build_beta, BetaCoeffs, BetaRoute};
use crate::error::{Error, Result};
use crate::orbits::{self, count_sm_orbits_from, reference_counts, OrbitTable};
use crate::qmatrix::{self, QTable};
use crate::sdp::SolverOptions;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Precision {
    #[default]
    Double,
    /// Tighter stopping tolerances and extra refinement of every Schur
    /// solve; arithmetic stays in double.
    Extended,
}

impl FromStr for Precision {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "double" => Ok(Precision::Double),
            "extended" => Ok(Precision::Extended),
            _ => Err(Error::arg(format!("unknown precision {s:?} (double, extended)"))),
        }
    }
}

impl Precision {
    pub fn apply(self, opts: &mut SolverOptions) {
        if self == Precision::Extended {
            opts.tol_gap = opts.tol_gap.min(1e-12);
            opts.tol_feas = opts.tol_feas.min(1e-12);
            opts.near_tol = opts.near_tol.min(1e-9);
            opts.refine = opts.refine.max(3);
            opts.max_iter = opts.max_iter.max(300);
        }
    }
}

/// Computed orbit counts next to the published ones.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountCheck {
    pub m: usize,
    pub sm_orbits: u64,
    pub omega: u64,
    pub omega_prime: u64,
    pub expected: Option<(u64, u64, u64)>,
}

impl CountCheck {
    pub fn matches(&self) -> Option<bool> {
        self.expected.map(|e| e == (self.sm_orbits, self.omega, self.omega_prime))
    }
}

pub fn check_counts(q: &QTable, table: &OrbitTable) -> CountCheck {
    CountCheck {
        m: table.m(),
        sm_orbits: count_sm_orbits_from(q),
        omega: table.omega_count() as u64,
        omega_prime: table.omega_prime_count() as u64,
        expected: reference_counts(table.m()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheCheck {
    pub path: PathBuf,
    pub present: bool,
    pub checksum_ok: bool,
}

pub struct Pipeline {
    dir: PathBuf,
}

impl Pipeline {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Pipeline { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn q(&self, m: usize) -> Result<QTable> {
        qmatrix::load_or_build(&self.dir, m)
    }

    pub fn orbits(&self, m: usize) -> Result<OrbitTable> {
        let q = self.q(m)?;
        orbits::load_or_build(&self.dir, &q)
    }

    pub fn beta_coeffs(&self, m: usize, route: BetaRoute) -> Result<BetaCoeffs> {
        let table = self.orbits(m)?;
        load_or_build_beta(&self.dir, &table, route)
    }

    /// Runs the cutting-plane loop, saving the state after every round and
    /// the certificate and result at the end. With `resume`, a saved state
    /// is picked up where it stopped.
    pub fn beta(
        &self,
        m: usize,
        route: BetaRoute,
        cfg: &CutConfig,
        resume: bool,
        mut progress: impl FnMut(&RoundLog),
    ) -> Result<BetaResult> {
        let c = self.beta_coeffs(m, route)?;
        let state_path = cache::beta_state_path(&self.dir, m);
        let start = if resume && state_path.exists() { Some(read_state(&state_path)?) } else { None };
        let mut save_err = None;
        let res = run_beta(&c, cfg, start, |log, state| {
            if let Err(e) = write_state(&state_path, state) {
                save_err.get_or_insert(e);
            }
            progress(log);
        })?;
        if let Some(e) = save_err {
            return Err(e);
        }
        res.certificate.write_json(&cache::certificate_path(&self.dir, m))?;
        fs::write(cache::beta_result_path(&self.dir, m), serde_json::to_string_pretty(&res)?)?;
        Ok(res)
    }

    /// Re-certifies the last saved dual point.
    pub fn certify_saved(&self, m: usize, route: BetaRoute) -> Result<Certificate> {
        let state_path = cache::beta_state_path(&self.dir, m);
        if !state_path.exists() {
            return Err(Error::Dependency(format!("no saved beta state for m = {m}; run `beta` first")));
        }
        let state = read_state(&state_path)?;
        let c = self.beta_coeffs(m, route)?;
        if state.y_hat.len() != c.d * c.d {
            return Err(Error::data("saved beta state has the wrong block size"));
        }
        let cert = certify(&c, &state.y_hat, state.t);
        cert.write_json(&cache::certificate_path(&self.dir, m))?;
        Ok(cert)
    }

    /// Exact re-check of a certificate file, by default the saved one.
    pub fn verify_certificate_file(&self, m: usize, route: BetaRoute, path: Option<&Path>) -> Result<(Certificate, bool)> {
        let default = cache::certificate_path(&self.dir, m);
        let path = path.unwrap_or(&default);
        if !path.exists() {
            return Err(Error::Dependency(format!("certificate {} not found", path.display())));
        }
        let cert = Certificate::read_json(path)?;
        if cert.m != m {
            return Err(Error::arg(format!("certificate is for m = {}, not {m}", cert.m)));
        }
        let c = self.beta_coeffs(m, route)?;
        let ok = verify_certificate(&c, &cert);
        Ok((cert, ok))
    }

    pub fn alpha(&self, m: usize, opts: &SolverOptions, max_m: Option<usize>) -> Result<AlphaResult> {
        let table = self.orbits(m)?;
        let c = build_alpha_coeffs(&table, max_m.unwrap_or(ALPHA_DEFAULT_MAX_M))?;
        solve_alpha(&c, opts)
    }

    /// Checksums of the binary caches present for `m`.
    pub fn verify_caches(&self, m: usize) -> Result<Vec<CacheCheck>> {
        [cache::q_path(&self.dir, m), cache::orbits_path(&self.dir, m), cache::coeffs_beta_path(&self.dir, m)]
            .into_iter()
            .map(|path| {
                let present = path.exists();
                let checksum_ok = present && cache::verify_checksum(&path)?;
                Ok(CacheCheck { path, present, checksum_ok })
            })
            .collect()
    }
}

fn read_state(path: &Path) -> Result<CutState> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

fn write_state(path: &Path, state: &CutState) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, serde_json::to_string(state)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warm_cache_is_reused() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(dir.path()).unwrap();
        let a = p.beta_coeffs(6, BetaRoute::OrbitSum).unwrap();
        let stamp = fs::metadata(cache::coeffs_beta_path(dir.path(), 6)).unwrap().modified().unwrap();
        let b = p.beta_coeffs(6, BetaRoute::OrbitSum).unwrap();
        assert_eq!(a, b);
        assert_eq!(fs::metadata(cache::coeffs_beta_path(dir.path(), 6)).unwrap().modified().unwrap(), stamp);
        assert!(p.verify_caches(6).unwrap().iter().all(|c| c.present && c.checksum_ok));
    }

    #[test]
    fn beta_resume_and_certify() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(dir.path()).unwrap();
        let cfg = CutConfig::for_m(7);
        let first = p.beta(7, BetaRoute::OrbitSum, &cfg, false, |_| {}).unwrap();
        let again = p.beta(7, BetaRoute::OrbitSum, &cfg, true, |_| {}).unwrap();
        assert!((first.beta - again.beta).abs() < 1e-9);
        let (cert, ok) = p.verify_certificate_file(7, BetaRoute::OrbitSum, None).unwrap();
        assert!(ok);
        assert_eq!(cert.certified_bound, again.certified_bound);
        let recert = p.certify_saved(7, BetaRoute::OrbitSum).unwrap();
        assert!(verify_certificate(&p.beta_coeffs(7, BetaRoute::OrbitSum).unwrap(), &recert));
    }

    #[test]
    fn counts_match_reference() {
        let dir = tempfile::tempdir().unwrap();
        let p = Pipeline::new(dir.path()).unwrap();
        for m in 4..=7 {
            let check = check_counts(&p.q(m).unwrap(), &p.orbits(m).unwrap());
            assert_eq!(check.matches(), Some(true), "{check:?}");
        }
    }

    #[test]
    fn precision_parses() {
        assert_eq!("extended".parse::<Precision>().unwrap(), Precision::Extended);
        assert!("quad".parse::<Precision>().is_err());
        let mut o = SolverOptions::default();
        Precision::Extended.apply(&mut o);
        assert_eq!(o.refine, 3);
    }
}
