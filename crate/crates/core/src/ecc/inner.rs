//! Seeded random binary linear inner codes with exhaustively verified
//! minimum distance, and their on-disk cache.

use std::fs;
use std::path::{Path, PathBuf};

use num_integer::Integer;
use num_rational::Rational64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::symbol::BitString;

pub const MAX_INNER_DIM: usize = 20;
pub const DEFAULT_ATTEMPTS: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InnerCode {
    pub m_in: usize,
    pub n_in: usize,
    pub delta_in: Rational64,
    pub seed: u64,
    /// Row `i` is the image of the message bit of weight `2^(m_in - 1 - i)`.
    pub generator: Vec<BitString>,
    pub verified_distance: usize,
}

impl InnerCode {
    /// Encodes the low `m_in` bits of `msg`, most significant bit first.
    pub fn encode_into(&self, msg: u32, out: &mut BitString) {
        let words = self.n_in.div_ceil(64);
        let mut acc = [0u64; 4];
        for (i, row) in self.generator.iter().enumerate() {
            if msg >> (self.m_in - 1 - i) & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(row.words()) {
                    *a ^= w;
                }
            }
        }
        let mut left = self.n_in;
        for &w in &acc[..words] {
            let take = left.min(64);
            out.push_uint(w >> (64 - take), take);
            left -= take;
        }
    }

    pub fn encode(&self, msg: u32) -> BitString {
        let mut out = BitString::with_capacity(self.n_in);
        self.encode_into(msg, &mut out);
        out
    }
}

/// Smallest integer `>= delta * n`.
pub fn required_distance(delta: Rational64, n: usize) -> usize {
    let v = delta * Rational64::from_integer(n as i64);
    v.numer().div_ceil(v.denom()).max(0) as usize
}

/// Exhaustive minimum weight over all non-zero codewords (Gray-code walk).
///
/// Stops early and returns the first weight below `stop_below` if any.
pub fn min_weight(rows: &[BitString], stop_below: usize) -> usize {
    let words = rows.first().map_or(0, |r| r.words().len());
    let mut cw = vec![0u64; words];
    let mut best = usize::MAX;
    for g in 1u64..(1u64 << rows.len()) {
        let flip = g.trailing_zeros() as usize;
        // Gray code flips message bit `flip`, which belongs to the last rows first.
        let row = &rows[rows.len() - 1 - flip];
        for (c, w) in cw.iter_mut().zip(row.words()) {
            *c ^= w;
        }
        let wt: usize = cw.iter().map(|w| w.count_ones() as usize).sum();
        if wt < best {
            best = wt;
            if best < stop_below {
                return best;
            }
        }
    }
    best
}

/// `1 - H_2(delta)`, for the error message when the search fails.
fn gv_rate(delta: f64) -> f64 {
    if delta <= 0.0 || delta >= 1.0 {
        return if delta <= 0.0 { 1.0 } else { 0.0 };
    }
    1.0 + delta * delta.log2() + (1.0 - delta) * (1.0 - delta).log2()
}

pub fn find_inner_code(
    m_in: usize,
    n_in: usize,
    delta_in: Rational64,
    seed: u64,
    max_attempts: u64,
) -> Result<InnerCode> {
    if m_in == 0 || m_in > MAX_INNER_DIM {
        return Err(Error::invalid(format!(
            "inner dimension {m_in} outside 1..={MAX_INNER_DIM}"
        )));
    }
    if n_in < m_in || n_in > 256 {
        return Err(Error::invalid(format!(
            "inner length {n_in} must lie in {m_in}..=256"
        )));
    }
    if delta_in < Rational64::from_integer(0) || delta_in > Rational64::from_integer(1) {
        return Err(Error::invalid(format!("delta_in = {delta_in} outside [0, 1]")));
    }
    let need = required_distance(delta_in, n_in).max(1);
    if need > n_in - m_in + 1 {
        return Err(Error::infeasible(format!(
            "distance {need} exceeds the Singleton bound n - k + 1 = {} for a [{n_in}, {m_in}] code",
            n_in - m_in + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words = n_in.div_ceil(64);
    for _ in 0..max_attempts {
        let rows: Vec<BitString> = (0..m_in)
            .map(|_| {
                let mut row = BitString::with_capacity(n_in);
                let mut left = n_in;
                for _ in 0..words {
                    let take = left.min(64);
                    row.push_uint(rng.next_u64() >> (64 - take), take);
                    left -= take;
                }
                row
            })
            .collect();
        let d = min_weight(&rows, need);
        if d >= need {
            return Ok(InnerCode {
                m_in,
                n_in,
                delta_in,
                seed,
                generator: rows,
                verified_distance: d,
            });
        }
    }
    let d = *delta_in.numer() as f64 / *delta_in.denom() as f64;
    Err(Error::infeasible(format!(
        "no [{n_in}, {m_in}] generator with distance >= {need} in {max_attempts} attempts; \
         rate {:.4} vs Gilbert-Varshamov bound 1 - H2({d}) = {:.4}",
        m_in as f64 / n_in as f64,
        gv_rate(d)
    )))
}

/// Formats a rational as a terminating decimal when possible, else `p/q`.
pub fn format_ratio(r: Rational64) -> String {
    let (mut twos, mut fives) = (0u32, 0u32);
    let mut d = *r.denom();
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    let scale = 10i64.pow(digits);
    let v = r.numer() * (scale / r.denom());
    if digits == 0 {
        return v.to_string();
    }
    let sign = if v < 0 { "-" } else { "" };
    let v = v.abs();
    format!(
        "{sign}{}.{:0width$}",
        v / scale,
        v % scale,
        width = digits as usize
    )
}

/// Parses `p/q`, a decimal such as `0.25`, or an integer.
pub fn parse_ratio(s: &str) -> Result<Rational64> {
    let s = s.trim();
    let bad = || Error::invalid(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 15 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = int.starts_with('-');
        let int_v: i64 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let frac_v: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let mag = int_v.abs() * scale + frac_v;
        return Ok(Rational64::new(if neg { -mag } else { mag }, scale));
    }
    Ok(Rational64::from_integer(s.parse().map_err(|_| bad())?))
}

/// Directory of cached inner codes, one file per parameter tuple.
#[derive(Clone, Debug)]
pub struct InnerCodeCache {
    dir: PathBuf,
}

impl InnerCodeCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        InnerCodeCache { dir: dir.into() }
    }

    fn path(&self, m_in: usize, n_in: usize, delta_in: Rational64, seed: u64) -> PathBuf {
        self.dir.join(format!(
            "inner_{m_in}_{n_in}_{}-{}_{seed}.txt",
            delta_in.numer(),
            delta_in.denom()
        ))
    }

    /// Loads a cached code, re-verifying its distance, or searches and stores one.
    pub fn get_or_find(
        &self,
        m_in: usize,
        n_in: usize,
        delta_in: Rational64,
        seed: u64,
    ) -> Result<InnerCode> {
        let path = self.path(m_in, n_in, delta_in, seed);
        if path.exists() {
            let code = load_inner_code(&path)?;
            if (code.m_in, code.n_in, code.delta_in, code.seed) != (m_in, n_in, delta_in, seed) {
                return Err(Error::Cache(format!(
                    "{} holds parameters for a different code",
                    path.display()
                )));
            }
            return Ok(code);
        }
        let code = find_inner_code(m_in, n_in, delta_in, seed, DEFAULT_ATTEMPTS)?;
        fs::create_dir_all(&self.dir)?;
        save_inner_code(&code, &path)?;
        Ok(code)
    }
}

pub fn serialize_inner_code(code: &InnerCode) -> String {
    let mut out = format!(
        "{} {} {} {} {}\n",
        code.m_in,
        code.n_in,
        format_ratio(code.delta_in),
        code.seed,
        code.verified_distance
    );
    for row in &code.generator {
        out.push_str(&row.to_hex());
        out.push('\n');
    }
    out
}

/// Parses a cache file and re-verifies the stored distance exhaustively.
pub fn deserialize_inner_code(text: &str) -> Result<InnerCode> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Cache("empty file".into()))?
        .split_whitespace()
        .collect();
    if header.len() != 5 {
        return Err(Error::Cache(format!("bad header {header:?}")));
    }
    let num = |s: &str| -> Result<u64> {
        s.parse()
            .map_err(|_| Error::Cache(format!("bad number {s:?}")))
    };
    let m_in = num(header[0])? as usize;
    let n_in = num(header[1])? as usize;
    let delta_in = parse_ratio(header[2]).map_err(|e| Error::Cache(e.to_string()))?;
    let seed = num(header[3])?;
    let stored = num(header[4])? as usize;
    if m_in == 0 || m_in > MAX_INNER_DIM {
        return Err(Error::Cache(format!("dimension {m_in} out of range")));
    }
    let generator = lines
        .by_ref()
        .take(m_in)
        .map(|l| BitString::from_hex(l, n_in).map_err(|e| Error::Cache(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    if generator.len() != m_in {
        return Err(Error::Cache(format!(
            "expected {m_in} generator rows, found {}",
            generator.len()
        )));
    }
    let actual = min_weight(&generator, 0);
    if actual != stored {
        return Err(Error::Cache(format!(
            "stored distance {stored} but exhaustive check gives {actual}"
        )));
    }
    if actual < required_distance(delta_in, n_in) {
        return Err(Error::Cache(format!(
            "distance {actual} is below delta_in * n_in"
        )));
    }
    Ok(InnerCode {
        m_in,
        n_in,
        delta_in,
        seed,
        generator,
        verified_distance: actual,
    })
}

pub fn save_inner_code(code: &InnerCode, path: &Path) -> Result<()> {
    fs::write(path, serialize_inner_code(code))?;
    Ok(())
}

pub fn load_inner_code(path: &Path) -> Result<InnerCode> {
    deserialize_inner_code(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(p: i64, q: i64) -> Rational64 {
        Rational64::new(p, q)
    }

    #[test]
    fn repetition_like() {
        let c = find_inner_code(1, 3, r(1, 1), 0, DEFAULT_ATTEMPTS).unwrap();
        assert_eq!(c.verified_distance, 3);
        assert_eq!(c.generator[0].to_string(), "111");
    }

    #[test]
    fn singleton_violation_is_rejected() {
        let e = find_inner_code(2, 2, r(9, 10), 0, DEFAULT_ATTEMPTS).unwrap_err();
        assert!(e.to_string().contains("Singleton"));
    }

    #[test]
    fn gv_error_is_named() {
        let e = find_inner_code(10, 20, r(2, 5), 0, 20).unwrap_err();
        assert!(e.to_string().contains("Gilbert-Varshamov"), "{e}");
    }

    #[test]
    fn eight_by_sixty_four() {
        let c = find_inner_code(8, 64, r(3, 10), 0, DEFAULT_ATTEMPTS).unwrap();
        assert!(c.verified_distance >= 20);
        // Brute-force weight oracle over all 255 non-zero messages.
        let min = (1u32..256).map(|u| c.encode(u).count_ones()).min().unwrap();
        assert_eq!(min, c.verified_distance);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = find_inner_code(6, 48, r(3, 10), 5, DEFAULT_ATTEMPTS).unwrap();
        let b = find_inner_code(6, 48, r(3, 10), 5, DEFAULT_ATTEMPTS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cache_roundtrip_and_tamper() {
        let dir = tempfile::tempdir().unwrap();
        let cache = InnerCodeCache::new(dir.path());
        let a = cache.get_or_find(7, 56, r(3, 10), 1).unwrap();
        let b = cache.get_or_find(7, 56, r(3, 10), 1).unwrap();
        assert_eq!(a, b);
        let text = serialize_inner_code(&a);
        assert!(text.starts_with(&format!("7 56 0.3 1 {}\n", a.verified_distance)));
        let tampered = text.replacen(
            &format!(" {}\n", a.verified_distance),
            &format!(" {}\n", a.verified_distance + 1),
            1,
        );
        assert!(deserialize_inner_code(&tampered).is_err());
    }

    #[test]
    fn ratio_formatting() {
        assert_eq!(format_ratio(r(3, 10)), "0.3");
        assert_eq!(format_ratio(r(1, 4)), "0.25");
        assert_eq!(format_ratio(r(1, 3)), "1/3");
        assert_eq!(format_ratio(r(2, 1)), "2");
        assert_eq!(parse_ratio("0.3").unwrap(), r(3, 10));
        assert_eq!(parse_ratio("1/16").unwrap(), r(1, 16));
        assert_eq!(parse_ratio("1").unwrap(), r(1, 1));
        assert!(parse_ratio("x").is_err());
    }
}
