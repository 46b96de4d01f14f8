//! Crossing-number bounds from a lower bound `γ ≤ q_k`.
//!
//! Everything is exact rational arithmetic; floats and truncated decimals
//! appear only in the display helpers.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Alpha,
    Beta,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Alpha => "alpha",
            Source::Beta => "beta",
        })
    }
}

/// A lower bound on `q_m` with its origin.
#[derive(Clone, Debug, PartialEq)]
pub struct Gamma {
    pub m: usize,
    pub value: BigRational,
    pub source: Source,
    /// Backed by an exact certificate rather than a reported decimal.
    pub certified: bool,
}

impl Gamma {
    pub fn new(m: usize, value: BigRational, source: Source, certified: bool) -> Self {
        Gamma { m, value, source, certified }
    }

    pub fn from_decimal(m: usize, s: &str, source: Source, certified: bool) -> Result<Self> {
        Ok(Gamma::new(m, parse_decimal(s)?, source, certified))
    }
}

/// Exact value of a decimal literal such as `9.7411403685` or `-1.5e-3`.
pub fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::arg(format!("not a decimal number: {s:?}"));
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -r } else { r })
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow10(places: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), places as usize)
}

fn fixed(n: &BigInt, places: u32) -> String {
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let p = places as usize;
    let digits = if digits.len() <= p { format!("{}{digits}", "0".repeat(p + 1 - digits.len())) } else { digits };
    let (i, f) = digits.split_at(digits.len() - p);
    let sign = if neg { "-" } else { "" };
    if p == 0 {
        format!("{sign}{i}")
    } else {
        format!("{sign}{i}.{f}")
    }
}

/// `x` truncated toward −∞ to `places` decimals.
pub fn truncate_decimal(x: &BigRational, places: u32) -> String {
    fixed(&(x * BigRational::from_integer(pow10(places))).floor().to_integer(), places)
}

/// `x` rounded up to `places` decimals.
pub fn round_up_decimal(x: &BigRational, places: u32) -> String {
    fixed(&(x * BigRational::from_integer(pow10(places))).ceil().to_integer(), places)
}

/// `x` rounded to the nearest `places`-decimal value, ties away from zero.
pub fn round_decimal(x: &BigRational, places: u32) -> String {
    fixed(&(x * BigRational::from_integer(pow10(places))).round().to_integer(), places)
}

/// `p/q`, or `p` when the denominator is one.
pub fn format_fraction(x: &BigRational) -> String {
    if x.denom() == &BigInt::from(1) {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// `⌊¼(m−1)²⌋`, the diagonal cost `q_{σ,σ}`.
pub fn diagonal_cost(m: usize) -> u64 {
    let k = (m as u64).saturating_sub(1);
    k * k / 4
}

/// Zarankiewicz number `⌊(m−1)/2⌋⌊m/2⌋⌊(n−1)/2⌋⌊n/2⌋`.
pub fn zarankiewicz(m: usize, n: usize) -> u64 {
    diagonal_cost(m) * diagonal_cost(n)
}

/// `cr(K_{m,n}) ≥ A n² − B n` with `A = γ/2`, `B = ½⌊¼(m−1)²⌋`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBound {
    pub m: usize,
    pub a: BigRational,
    pub b: BigRational,
}

impl QuadraticBound {
    /// `A` as displayed: five decimals, truncated.
    pub fn a_display(&self) -> String {
        truncate_decimal(&self.a, 5)
    }

    /// `B` as displayed; always a multiple of ½, so exact.
    pub fn b_display(&self) -> String {
        let twice: BigInt = (&self.b * rat(2, 1)).to_integer();
        let half: BigInt = &twice / BigInt::from(2);
        if (&twice % BigInt::from(2)).is_zero() {
            half.to_string()
        } else {
            format!("{half}.5")
        }
    }

    /// `⌈A n² − B n⌉`, clamped at zero.
    pub fn at(&self, n: usize) -> BigInt {
        let n = BigRational::from_integer(n.into());
        let v = &self.a * &n * &n - &self.b * &n;
        v.ceil().to_integer().max(BigInt::zero())
    }
}

impl fmt::Display for QuadraticBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cr(K_{{{},n}}) >= {} n^2 - {} n", self.m, self.a_display(), self.b_display())
    }
}

pub fn quadratic_bound(m: usize, gamma: &BigRational) -> QuadraticBound {
    QuadraticBound {
        m,
        a: gamma / rat(2, 1),
        b: rat(diagonal_cost(m) as i64, 2),
    }
}

/// `cr(K_{m,n}) ≥ c·m(m−1)n² − e·m(m−1)n` for every `m ≥ k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedBound {
    pub k: usize,
    pub c: BigRational,
    pub e: BigRational,
}

impl LiftedBound {
    /// `c` as displayed: four decimals, truncated.
    pub fn c_display(&self) -> String {
        truncate_decimal(&self.c, 4)
    }

    pub fn e_display(&self) -> String {
        format_fraction(&self.e)
    }

    /// `⌈c·m(m−1)n² − e·m(m−1)n⌉`, clamped at zero.
    pub fn at(&self, m: usize, n: usize) -> Result<BigInt> {
        if m < self.k {
            return Err(Error::arg(format!("lifted bound from k = {} needs m >= k, got {m}", self.k)));
        }
        let mm = BigRational::from_integer((m * (m - 1)).into());
        let n = BigRational::from_integer(n.into());
        let v = &mm * (&self.c * &n * &n - &self.e * &n);
        Ok(v.ceil().to_integer().max(BigInt::zero()))
    }
}

impl fmt::Display for LiftedBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "cr(K_{{m,n}}) >= {} m(m-1)n^2 - ({}) m(m-1)n  (m >= {})", self.c_display(), self.e_display(), self.k)
    }
}

/// Divides a level-`k` bound by `k(k−1)`: each crossing of `K_{m,n}` lies
/// in `C(m−2, k−2)` copies of `K_{k,n}`.
pub fn lift_bound(q: &QuadraticBound) -> LiftedBound {
    let kk = rat((q.m * (q.m - 1)) as i64, 1);
    LiftedBound { k: q.m, c: &q.a / &kk, e: &q.b / &kk }
}

/// `8γ/(k(k−1))`, the asymptotic fraction of `Z(m,n)` guaranteed up to the
/// factor `m/(m−1)`.
pub fn asymptotic_ratio(k: usize, gamma: &BigRational) -> BigRational {
    gamma * rat(8, (k * (k - 1)) as i64)
}

/// Best bound on `cr(K_{m,n})` from the available levels `k ≤ m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub m: usize,
    pub n: usize,
    pub bound: u64,
    pub level: usize,
    pub source: Source,
    pub certified: bool,
}

/// Levels keyed by `k`, keeping the larger `γ` when both sources exist.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Levels {
    pub best: BTreeMap<usize, Gamma>,
}

impl Levels {
    pub fn insert(&mut self, g: Gamma) {
        match self.best.get(&g.m) {
            Some(old) if old.value > g.value || (old.value == g.value && old.certified) => {}
            _ => {
                self.best.insert(g.m, g);
            }
        }
    }

    pub fn get(&self, k: usize) -> Option<&Gamma> {
        self.best.get(&k)
    }

    /// Bound on `cr(K_{m,n})`: the level-`k` integer bound
    /// `N = ⌈(γ/2)n² − Bn⌉`, scaled by `m(m−1)/(k(k−1))`, maximized over
    /// `k ≤ m`.
    pub fn bound(&self, m: usize, n: usize) -> Option<BoundRow> {
        let mut best: Option<(BigInt, &Gamma)> = None;
        for (&k, g) in self.best.range(..=m) {
            let base = quadratic_bound(k, &g.value).at(n);
            let v = (BigRational::from_integer(base * BigInt::from(m * (m - 1)))
                / rat((k * (k - 1)) as i64, 1))
            .ceil()
            .to_integer();
            if best.as_ref().is_none_or(|(b, _)| v > *b) {
                best = Some((v, g));
            }
        }
        best.map(|(v, g)| BoundRow {
            m,
            n,
            bound: v.to_u64().unwrap_or(u64::MAX),
            level: g.m,
            source: g.source,
            certified: g.certified,
        })
    }
}

/// The published `α_k`, `β_k` (ten decimals). `α` is reported for
/// `k ≤ 10` only.
pub const REFERENCE_GAMMAS: [(usize, Option<&str>, &str); 10] = [
    (4, Some("1.0000000000"), "1.0000000000"),
    (5, Some("1.9472135954"), "1.9270509831"),
    (6, Some("2.9519183588"), "2.9519183588"),
    (7, Some("4.3593154948"), "4.3107391257"),
    (8, Some("5.8599856417"), "5.8284271247"),
    (9, Some("7.7352125975"), "7.6527560430"),
    (10, Some("9.7411403685"), "9.6866252078"),
    (11, None, "11.9987919703"),
    (12, None, "14.5115811776"),
    (13, None, "17.3135089904"),
];

/// One row of a γ table file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<DecimalValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<DecimalValue>,
    #[serde(default)]
    pub certified: bool,
}

/// A decimal kept as written: strings are taken verbatim, JSON numbers
/// through their shortest representation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecimalValue {
    Text(String),
    Number(f64),
}

impl DecimalValue {
    pub fn exact(&self) -> Result<BigRational> {
        match self {
            DecimalValue::Text(s) => parse_decimal(s),
            DecimalValue::Number(x) => parse_decimal(&format!("{x:e}")),
        }
    }
}

pub fn reference_table() -> Vec<TableEntry> {
    REFERENCE_GAMMAS
        .iter()
        .map(|&(m, a, b)| TableEntry {
            m,
            alpha: a.map(|s| DecimalValue::Text(s.into())),
            beta: Some(DecimalValue::Text(b.into())),
            certified: false,
        })
        .collect()
}

pub fn levels_from_table(entries: &[TableEntry]) -> Result<Levels> {
    let mut out = Levels::default();
    for e in entries {
        if e.m < 2 {
            return Err(Error::arg(format!("level m = {} is too small", e.m)));
        }
        if let Some(a) = &e.alpha {
            out.insert(Gamma::new(e.m, a.exact()?, Source::Alpha, e.certified));
        }
        if let Some(b) = &e.beta {
            out.insert(Gamma::new(e.m, b.exact()?, Source::Beta, e.certified));
        }
    }
    Ok(out)
}

pub fn read_table(path: &Path) -> Result<Vec<TableEntry>> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn reference_levels() -> Levels {
    levels_from_table(&reference_table()).expect("built-in table parses")
}

/// `K_{n,n}` bounds for each `n`.
pub fn knn_table(levels: &Levels, ns: &[usize]) -> Vec<BoundRow> {
    ns.iter().filter_map(|&n| levels.bound(n, n)).collect()
}

pub fn write_csv(rows: &[BoundRow], out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "m,n,bound,source,certified")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.m, r.n, r.bound, r.source, r.certified)?;
    }
    Ok(())
}

pub fn write_table(rows: &[BoundRow], out: &mut impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "{:>4} {:>4} {:>10} {:>10} {:>6}  source", "m", "n", "bound", "Z(m,n)", "level")?;
    for r in rows {
        let cert = if r.certified { ", certified" } else { "" };
        writeln!(
            out,
            "{:>4} {:>4} {:>10} {:>10} {:>6}  {}{cert}",
            r.m,
            r.n,
            r.bound,
            zarankiewicz(r.m, r.n),
            r.level,
            r.source
        )?;
    }
    Ok(())
}

/// Parses `a..b` (inclusive) or a single integer.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::arg(format!("not a range: {s:?}"));
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![usize::from_str(s.trim()).map_err(|_| bad())?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(s: &str) -> BigRational {
        parse_decimal(s).unwrap()
    }

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(g("9.7411403685"), BigRational::new(97411403685i64.into(), 10_000_000_000i64.into()));
        assert_eq!(g("1"), rat(1, 1));
        assert_eq!(g("-0.5"), rat(-1, 2));
        assert_eq!(g("2.5e-1"), rat(1, 4));
        assert_eq!(g(".5"), rat(1, 2));
        assert!(parse_decimal("1.2.3").is_err());
        assert!(parse_decimal("").is_err());
    }

    #[test]
    fn display_rounding() {
        assert_eq!(truncate_decimal(&rat(2, 3), 4), "0.6666");
        assert_eq!(round_decimal(&rat(2, 3), 4), "0.6667");
        assert_eq!(round_up_decimal(&rat(2, 3), 4), "0.6667");
        assert_eq!(truncate_decimal(&rat(1, 50), 4), "0.0200");
        assert_eq!(truncate_decimal(&rat(-1, 3), 2), "-0.34");
        assert_eq!(format_fraction(&rat(10, 90)), "1/9");
    }

    #[test]
    fn quadratic_coefficients() {
        let cases = [
            (10, "9.7411403685", "4.87057", "10"),
            (11, "11.9987919703", "5.99939", "12.5"),
            (12, "14.5115811776", "7.25579", "15"),
            (13, "17.3135089904", "8.65675", "18"),
        ];
        for (m, gamma, a, b) in cases {
            let q = quadratic_bound(m, &g(gamma));
            assert_eq!(q.a_display(), a);
            assert_eq!(q.b_display(), b);
        }
    }

    #[test]
    fn lifted_coefficients() {
        let cases = [
            (10, "9.7411403685", "0.0541", "1/9"),
            (11, "11.9987919703", "0.0545", "5/44"),
            (12, "14.5115811776", "0.0549", "5/44"),
            (13, "17.3135089904", "0.0554", "3/26"),
        ];
        for (k, gamma, c, e) in cases {
            let l = lift_bound(&quadratic_bound(k, &g(gamma)));
            assert_eq!(l.c_display(), c);
            assert_eq!(l.e_display(), e);
        }
    }

    #[test]
    fn lift_at_level_matches_quadratic() {
        let q = quadratic_bound(10, &g("9.7411403685"));
        let l = lift_bound(&q);
        for n in [5, 10, 37] {
            assert_eq!(l.at(10, n).unwrap(), q.at(n));
        }
        assert!(l.at(9, 10).is_err());
    }

    #[test]
    fn ratio_values() {
        assert_eq!(truncate_decimal(&asymptotic_ratio(13, &g("17.3135089904")), 4), "0.8878");
        assert_eq!(round_decimal(&asymptotic_ratio(9, &g("7.7352125975")), 4), "0.8595");
        assert_eq!(round_decimal(&asymptotic_ratio(4, &g("1.0")), 4), "0.6667");
    }

    #[test]
    fn knn_reference_rows() {
        let rows = knn_table(&reference_levels(), &[10, 11, 12, 13]);
        let got: Vec<u64> = rows.iter().map(|r| r.bound).collect();
        assert_eq!(got, vec![388, 589, 865, 1229]);
        assert_eq!(rows[0].source, Source::Alpha);
        assert!(rows[1..].iter().all(|r| r.source == Source::Beta));
    }

    #[test]
    fn bounds_stay_below_zarankiewicz() {
        let levels = reference_levels();
        for m in 4..=20 {
            for n in 1..=40 {
                let r = levels.bound(m, n).unwrap();
                assert!(r.bound <= zarankiewicz(m, n), "m={m} n={n}: {}", r.bound);
            }
        }
    }

    #[test]
    fn zarankiewicz_small() {
        assert_eq!(zarankiewicz(5, 5), 16);
        assert_eq!(zarankiewicz(10, 10), 400);
        assert_eq!(zarankiewicz(13, 13), 1296);
        assert_eq!(diagonal_cost(10), 20);
    }

    #[test]
    fn table_json_roundtrip() {
        let t = reference_table();
        let text = serde_json::to_string(&t).unwrap();
        let back: Vec<TableEntry> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, t);
        let numeric: Vec<TableEntry> = serde_json::from_str(r#"[{"m": 10, "beta": 9.6866252078}]"#).unwrap();
        let l = levels_from_table(&numeric).unwrap();
        assert_eq!(l.get(10).unwrap().value, g("9.6866252078"));
    }

    #[test]
    fn levels_keep_larger_gamma() {
        let l = reference_levels();
        assert_eq!(l.get(7).unwrap().source, Source::Alpha);
        assert_eq!(l.get(6).unwrap().value, g("2.9519183588"));
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("10..13").unwrap(), vec![10, 11, 12, 13]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("5..3").is_err());
    }
}
