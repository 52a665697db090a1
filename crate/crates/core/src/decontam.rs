//! Word n-gram Bloom filter for removing training documents that share long
//! verbatim spans with evaluation sets.

use std::io::{Read, Write};
use std::path::Path;

use unicode_general_category::{get_general_category, GeneralCategory};
use xxhash_rust::xxh3::xxh3_64_with_seed;

use crate::error::{Error, Result};

pub const DEFAULT_WIDTH: usize = 13;
pub const DEFAULT_TARGET_FP: f64 = 1e-6;
pub const DEFAULT_SEEDS: (u64, u64) = (0x5EED_0000_0000_0001, 0x5EED_0000_0000_0002);

const MAGIC: &[u8; 8] = b"TFNGBLM\0";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 4 + 4 + 8 + 8 + 8;

/// Characters mapped to spaces before tokenization: every Unicode punctuation
/// (P*) and symbol (S*) category.
pub fn is_separator_class(c: char) -> bool {
    use GeneralCategory::*;
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

/// Lowercase, punctuation and symbols to spaces, split on whitespace.
pub fn normalize_tokens(text: &str) -> Vec<String> {
    let mapped: String = text
        .chars()
        .map(|c| if is_separator_class(c) { ' ' } else { c })
        .collect::<String>()
        .to_lowercase();
    mapped.split_whitespace().map(str::to_owned).collect()
}

/// Bloom filter over normalized word n-grams, using double hashing
/// `h1 + i·h2 mod m` with two seeded xxh3 digests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramBloom {
    bits: Vec<u64>,
    m: u64,
    k: u32,
    width: u32,
    seeds: (u64, u64),
    count: u64,
}

/// Bit count and hash count for `n` items at false-positive rate `fp`.
pub fn optimal_params(n: u64, fp: f64) -> (u64, u32) {
    let ln2 = std::f64::consts::LN_2;
    let m = (-(n as f64) * fp.ln() / (ln2 * ln2)).ceil().max(1.0) as u64;
    let k = ((m as f64 / n as f64) * ln2).round().max(1.0) as u32;
    (m, k)
}

fn check_fp(fp: f64) -> Result<()> {
    if fp > 0.0 && fp < 1.0 {
        Ok(())
    } else {
        Err(Error::Param(format!("target false-positive rate must be in (0,1), got {fp}")))
    }
}

impl NGramBloom {
    /// Empty filter with explicit geometry.
    pub fn with_params(m: u64, k: u32, width: usize, seeds: (u64, u64)) -> Result<Self> {
        if m == 0 || k == 0 || width == 0 {
            return Err(Error::Param("bloom m, k and width must be positive".into()));
        }
        Ok(Self {
            bits: vec![0; m.div_ceil(64) as usize],
            m,
            k,
            width: width as u32,
            seeds,
            count: 0,
        })
    }

    /// Empty filter sized for `expected` insertions at `target_fp`.
    pub fn sized_for(expected: u64, target_fp: f64, width: usize) -> Result<Self> {
        check_fp(target_fp)?;
        let (m, k) = optimal_params(expected.max(1), target_fp);
        Self::with_params(m, k, width, DEFAULT_SEEDS)
    }

    pub fn bits(&self) -> u64 {
        self.m
    }

    pub fn hashes(&self) -> u32 {
        self.k
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn seeds(&self) -> (u64, u64) {
        self.seeds
    }

    /// Number of insert calls (distinct n-grams when built by [`build_filter`]).
    pub fn count(&self) -> u64 {
        self.count
    }

    fn digests(&self, gram: &[u8]) -> (u64, u64) {
        (xxh3_64_with_seed(gram, self.seeds.0), xxh3_64_with_seed(gram, self.seeds.1) | 1)
    }

    fn positions(&self, (h1, h2): (u64, u64)) -> impl Iterator<Item = u64> + '_ {
        (0..u64::from(self.k)).map(move |i| h1.wrapping_add(i.wrapping_mul(h2)) % self.m)
    }

    fn insert_digests(&mut self, d: (u64, u64)) {
        let positions: Vec<u64> = self.positions(d).collect();
        for p in positions {
            self.bits[(p / 64) as usize] |= 1 << (p % 64);
        }
        self.count += 1;
    }

    fn contains_digests(&self, d: (u64, u64)) -> bool {
        self.positions(d).all(|p| self.bits[(p / 64) as usize] & (1 << (p % 64)) != 0)
    }

    /// Inserts one n-gram given as already-normalized tokens.
    pub fn insert_tokens(&mut self, gram: &[impl AsRef<str>]) {
        let d = self.digests(join(gram).as_bytes());
        self.insert_digests(d);
    }

    pub fn contains_tokens(&self, gram: &[impl AsRef<str>]) -> bool {
        self.contains_digests(self.digests(join(gram).as_bytes()))
    }

    /// Inserts every sliding n-gram of a text. Returns the number inserted.
    pub fn insert_text(&mut self, text: &str) -> u64 {
        let tokens = normalize_tokens(text);
        let w = self.width();
        if tokens.len() < w {
            return 0;
        }
        for gram in tokens.windows(w) {
            self.insert_tokens(gram);
        }
        (tokens.len() - w + 1) as u64
    }

    /// Number of the text's n-gram windows present in the filter.
    pub fn hits(&self, text: &str) -> u64 {
        let tokens = normalize_tokens(text);
        if tokens.len() < self.width() {
            return 0;
        }
        tokens
            .windows(self.width())
            .filter(|gram| self.contains_tokens(gram))
            .count() as u64
    }

    /// Bitwise OR of a shard built with identical geometry.
    pub fn merge(&mut self, other: &NGramBloom) -> Result<()> {
        if (self.m, self.k, self.width, self.seeds) != (other.m, other.k, other.width, other.seeds) {
            return Err(Error::Param("cannot merge bloom filters with different geometry".into()));
        }
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
        self.count += other.count;
        Ok(())
    }

    /// Fraction of set bits.
    pub fn fill_ratio(&self) -> f64 {
        let ones: u64 = self.bits.iter().map(|w| u64::from(w.count_ones())).sum();
        ones as f64 / self.m as f64
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&self.m.to_le_bytes())?;
        w.write_all(&self.k.to_le_bytes())?;
        w.write_all(&self.width.to_le_bytes())?;
        w.write_all(&self.seeds.0.to_le_bytes())?;
        w.write_all(&self.seeds.1.to_le_bytes())?;
        w.write_all(&self.count.to_le_bytes())?;
        for word in &self.bits {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.bits.len());
        self.write_to(&mut out).expect("writing to a Vec");
        out
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)
            .map_err(|_| Error::BloomFormat("truncated header".into()))?;
        if &header[..8] != MAGIC {
            return Err(Error::BloomFormat("bad magic".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        let u64_at = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(Error::BloomFormat(format!("unsupported version {version}")));
        }
        let (m, k, width) = (u64_at(12), u32_at(20), u32_at(24));
        let seeds = (u64_at(28), u64_at(36));
        let count = u64_at(44);
        let mut bloom = Self::with_params(m, k, width as usize, seeds)
            .map_err(|e| Error::BloomFormat(e.to_string()))?;
        let mut buf = vec![0u8; bloom.bits.len() * 8];
        r.read_exact(&mut buf)
            .map_err(|_| Error::BloomFormat("truncated bit array".into()))?;
        for (word, bytes) in bloom.bits.iter_mut().zip(buf.chunks_exact(8)) {
            *word = u64::from_le_bytes(bytes.try_into().unwrap());
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::BloomFormat("trailing bytes".into()));
        }
        bloom.count = count;
        Ok(bloom)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_from(bytes)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn join(gram: &[impl AsRef<str>]) -> String {
    let mut s = String::new();
    for (i, t) in gram.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(t.as_ref());
    }
    s
}

/// Inserts every sliding `width`-gram of every evaluation document, sizing
/// the filter for the number of distinct n-grams observed.
pub fn build_filter<I, S>(eval_docs: I, width: usize, target_fp: f64) -> Result<NGramBloom>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    check_fp(target_fp)?;
    if width == 0 {
        return Err(Error::Param("n-gram width must be positive".into()));
    }
    let probe = NGramBloom::with_params(1, 1, width, DEFAULT_SEEDS)?;
    let mut digests: Vec<(u64, u64)> = Vec::new();
    for doc in eval_docs {
        let tokens = normalize_tokens(doc.as_ref());
        if tokens.len() >= width {
            digests.extend(tokens.windows(width).map(|g| probe.digests(join(g).as_bytes())));
        }
    }
    digests.sort_unstable();
    digests.dedup();
    if digests.is_empty() {
        return Err(Error::Empty("no evaluation document has enough tokens for one n-gram"));
    }
    let (m, k) = optimal_params(digests.len() as u64, target_fp);
    let mut bloom = NGramBloom::with_params(m, k, width, DEFAULT_SEEDS)?;
    for d in digests {
        bloom.insert_digests(d);
    }
    Ok(bloom)
}

/// Contaminated iff at least `hit_threshold` (minimum 1) windows hit.
pub fn is_contaminated(doc: &str, filter: &NGramBloom, hit_threshold: u64) -> (bool, u64) {
    let hits = filter.hits(doc);
    (hits >= hit_threshold.max(1), hits)
}
