//! Binary cache files.
//!
//! Every cache file starts with a 4-byte magic, a format version byte and the
//! cycle length `m`; the remaining header fields and the record layout are
//! defined by the owning module. All integers are little-endian. A sidecar
//! file `<name>.sum` holds a 64-bit FNV-1a checksum of the full file so that
//! the record formats themselves stay fixed.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Environment variable overriding the default cache directory.
pub const CACHE_ENV: &str = "CROSSING_CACHE_DIR";

/// Cache directory: `$CROSSING_CACHE_DIR` if set, else `./.crossing-cache`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".crossing-cache"))
}

pub fn q_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("q_{m}.bin"))
}

pub fn orbits_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("orbits_{m}.bin"))
}

pub fn coeffs_beta_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("coeffs_{m}_beta.bin"))
}

/// Resumable outer-loop state of the β driver.
pub fn beta_state_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("beta_state_{m}.json"))
}

pub fn certificate_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("certificate_{m}.json"))
}

pub fn beta_result_path(dir: &Path, m: usize) -> PathBuf {
    dir.join(format!("beta_{m}.json"))
}

fn sum_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".sum");
    PathBuf::from(name)
}

/// 64-bit FNV-1a.
#[derive(Clone, Copy)]
pub struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a {
    pub fn update(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// Writes `bytes` atomically (temp file + rename) together with its checksum.
pub fn write_with_checksum(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(bytes)?;
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    let mut h = Fnv1a::default();
    h.update(bytes);
    fs::write(sum_path(path), format!("{:016x}\n", h.finish()))?;
    Ok(())
}

/// Reads a cache file and checks it against its sidecar checksum when the
/// sidecar exists.
pub fn read_verified(path: &Path) -> Result<Vec<u8>> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    let sum = sum_path(path);
    if sum.exists() {
        let expected = fs::read_to_string(&sum)?;
        let expected = u64::from_str_radix(expected.trim(), 16)
            .map_err(|_| Error::data(format!("unreadable checksum file {}", sum.display())))?;
        let mut h = Fnv1a::default();
        h.update(&bytes);
        if h.finish() != expected {
            return Err(Error::data(format!("checksum mismatch for {}", path.display())));
        }
    }
    Ok(bytes)
}

/// Whether `path` exists and matches its checksum.
pub fn verify_checksum(path: &Path) -> Result<bool> {
    if !sum_path(path).exists() {
        return Ok(false);
    }
    match read_verified(path) {
        Ok(_) => Ok(true),
        Err(Error::Data(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Little-endian cursor over a byte slice with range-checked reads.
pub struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Reader { bytes, pos: 0 }
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::data("unexpected end of cache file"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.bytes.len()
    }

    /// Checks magic, version and `m`.
    pub fn header(&mut self, magic: &[u8; 4], version: u8, m: usize) -> Result<()> {
        if self.take(4)? != magic {
            return Err(Error::data(format!(
                "bad magic, expected {:?}",
                String::from_utf8_lossy(magic)
            )));
        }
        let v = self.u8()?;
        if v != version {
            return Err(Error::data(format!("unsupported cache version {v}, expected {version}")));
        }
        let mm = self.u8()? as usize;
        if mm != m {
            return Err(Error::data(format!("cache is for m = {mm}, expected {m}")));
        }
        Ok(())
    }
}
