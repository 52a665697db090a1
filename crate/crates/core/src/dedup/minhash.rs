//! MinHash signatures over lowercased whitespace-word shingles.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use xxhash_rust::xxh3::xxh3_64;

use crate::error::{Error, Result};

/// 2^61 - 1; permutations are affine maps modulo this prime.
const MERSENNE_61: u64 = (1 << 61) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinHashParams {
    pub num_perms: usize,
    pub bands: usize,
    pub rows: usize,
    pub shingle_width: usize,
    pub seed: u64,
}

impl Default for MinHashParams {
    /// 14 bands of 9 rows, tuned for a Jaccard threshold near 0.7.
    fn default() -> Self {
        Self {
            num_perms: 126,
            bands: 14,
            rows: 9,
            shingle_width: 5,
            seed: 0,
        }
    }
}

impl MinHashParams {
    pub fn new(bands: usize, rows: usize, shingle_width: usize, seed: u64) -> Result<Self> {
        let params = Self {
            num_perms: bands * rows,
            bands,
            rows,
            shingle_width,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bands == 0 || self.rows == 0 {
            return Err(Error::Param("bands and rows must be positive".into()));
        }
        if self.bands * self.rows != self.num_perms {
            return Err(Error::Param(format!(
                "bands × rows = {} but num_perms = {}",
                self.bands * self.rows,
                self.num_perms
            )));
        }
        if self.bands > usize::from(u16::MAX) {
            return Err(Error::Param("too many bands".into()));
        }
        if self.shingle_width == 0 {
            return Err(Error::Param("shingle width must be at least 1".into()));
        }
        Ok(())
    }

    /// Probability that a pair with Jaccard similarity `s` shares a band.
    pub fn candidate_probability(&self, s: f64) -> f64 {
        1.0 - (1.0 - s.powi(self.rows as i32)).powi(self.bands as i32)
    }
}

/// Lowercased whitespace tokens joined into `width`-word shingles. Texts with
/// fewer than `width` tokens form a single shingle.
pub fn shingles(text: &str, width: usize) -> Vec<String> {
    let lower = text.to_lowercase();
    let tokens: Vec<&str> = lower.split_whitespace().collect();
    if tokens.is_empty() {
        return Vec::new();
    }
    if tokens.len() < width {
        return vec![tokens.join(" ")];
    }
    tokens.windows(width).map(|w| w.join(" ")).collect()
}

/// Exact shingle-set Jaccard similarity; 1 when both sets are empty.
pub fn jaccard(a: &str, b: &str, shingle_width: usize) -> f64 {
    let a: HashSet<String> = shingles(a, shingle_width).into_iter().collect();
    let b: HashSet<String> = shingles(b, shingle_width).into_iter().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MinHashSignature(Vec<u64>);

impl MinHashSignature {
    /// Signature of a text with no tokens.
    pub fn empty(num_perms: usize) -> Self {
        MinHashSignature(vec![u64::MAX; num_perms])
    }

    pub fn is_empty_sentinel(&self) -> bool {
        self.0.iter().all(|v| *v == u64::MAX)
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Fraction of positions that agree; estimates shingle Jaccard.
    pub fn similarity(&self, other: &MinHashSignature) -> f64 {
        let same = self.0.iter().zip(&other.0).filter(|(a, b)| a == b).count();
        same as f64 / self.0.len().max(1) as f64
    }
}

/// Holds the per-permutation coefficients derived from the seed.
#[derive(Debug, Clone)]
pub struct MinHasher {
    params: MinHashParams,
    coeffs: Vec<(u64, u64)>,
}

impl MinHasher {
    pub fn new(params: MinHashParams) -> Result<Self> {
        params.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let coeffs = (0..params.num_perms)
            .map(|_| (rng.gen_range(1..MERSENNE_61), rng.gen_range(0..MERSENNE_61)))
            .collect();
        Ok(Self { params, coeffs })
    }

    pub fn params(&self) -> &MinHashParams {
        &self.params
    }

    pub fn signature(&self, text: &str) -> MinHashSignature {
        let lower = text.to_lowercase();
        let tokens: Vec<&str> = lower.split_whitespace().collect();
        if tokens.is_empty() {
            return MinHashSignature::empty(self.params.num_perms);
        }
        let width = self.params.shingle_width.min(tokens.len());
        let mut mins = vec![u64::MAX; self.params.num_perms];
        let mut buf = String::new();
        for window in tokens.windows(width) {
            buf.clear();
            for (i, t) in window.iter().enumerate() {
                if i > 0 {
                    buf.push(' ');
                }
                buf.push_str(t);
            }
            let x = xxh3_64(buf.as_bytes()) % MERSENNE_61;
            for (min, &(a, b)) in mins.iter_mut().zip(&self.coeffs) {
                let h = mod_mersenne(u128::from(a) * u128::from(x) + u128::from(b));
                if h < *min {
                    *min = h;
                }
            }
        }
        MinHashSignature(mins)
    }
}

/// `v mod (2^61 - 1)` for `v < 2^122`.
fn mod_mersenne(v: u128) -> u64 {
    let folded = (v as u64 & MERSENNE_61) + (v >> 61) as u64;
    let r = (folded & MERSENNE_61) + (folded >> 61);
    if r >= MERSENNE_61 {
        r - MERSENNE_61
    } else {
        r
    }
}

pub fn minhash_signature(text: &str, params: &MinHashParams) -> Result<MinHashSignature> {
    Ok(MinHasher::new(*params)?.signature(text))
}
