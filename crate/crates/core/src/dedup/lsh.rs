//! Banded LSH over MinHash signatures and union-find clustering of
//! candidate pairs.

use std::collections::HashMap;

use xxhash_rust::xxh3::xxh3_64;

use super::minhash::{MinHashParams, MinHashSignature};
use super::union_find::DisjointSet;

/// Band key `b` hashes the band index, the group key and rows
/// `b*rows .. (b+1)*rows`. Documents in different groups never share keys.
pub fn band_keys_in_group(sig: &MinHashSignature, params: &MinHashParams, group: u64) -> Vec<u64> {
    let mut buf = Vec::with_capacity(12 + 8 * params.rows);
    sig.values()
        .chunks(params.rows)
        .take(params.bands)
        .enumerate()
        .map(|(b, rows)| {
            buf.clear();
            buf.extend_from_slice(&(b as u32).to_le_bytes());
            buf.extend_from_slice(&group.to_le_bytes());
            for v in rows {
                buf.extend_from_slice(&v.to_le_bytes());
            }
            xxh3_64(&buf)
        })
        .collect()
}

pub fn lsh_band_keys(sig: &MinHashSignature, params: &MinHashParams) -> Vec<u64> {
    band_keys_in_group(sig, params, 0)
}

/// Intermediate (band, key, doc id) triple for an external shuffle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BandKeyRecord {
    pub band: u16,
    pub key: u64,
    pub doc_id: u64,
}

impl BandKeyRecord {
    pub const ENCODED_LEN: usize = 18;

    /// Big-endian composite; byte order equals the derived `Ord`.
    pub fn to_bytes(&self) -> [u8; Self::ENCODED_LEN] {
        let mut out = [0u8; Self::ENCODED_LEN];
        out[..2].copy_from_slice(&self.band.to_be_bytes());
        out[2..10].copy_from_slice(&self.key.to_be_bytes());
        out[10..].copy_from_slice(&self.doc_id.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8; Self::ENCODED_LEN]) -> Self {
        let u64_at = |i: usize| u64::from_be_bytes(bytes[i..i + 8].try_into().unwrap());
        Self {
            band: u16::from_be_bytes([bytes[0], bytes[1]]),
            key: u64_at(2),
            doc_id: u64_at(10),
        }
    }
}

pub fn band_records(doc_id: u64, keys: &[u64]) -> impl Iterator<Item = BandKeyRecord> + '_ {
    keys.iter().enumerate().map(move |(b, &key)| BandKeyRecord {
        band: b as u16,
        key,
        doc_id,
    })
}

/// Union-find over document ids fed by runs of colliding band keys.
#[derive(Debug, Default)]
pub struct Clusters {
    index: HashMap<u64, usize>,
    ids: Vec<u64>,
    sets: DisjointSet,
    candidate_pairs: u64,
    merged_pairs: u64,
}

impl Clusters {
    pub fn new() -> Self {
        Self::default()
    }

    fn node(&mut self, id: u64) -> usize {
        if let Some(&n) = self.index.get(&id) {
            return n;
        }
        let n = self.sets.push();
        self.ids.push(id);
        self.index.insert(id, n);
        n
    }

    /// Registers a document that may have no collisions.
    pub fn insert(&mut self, id: u64) {
        self.node(id);
    }

    /// Consumes records sorted (or at least grouped) by `(band, key)`. Each
    /// run of equal keys is a candidate group; `verify` may veto a pair.
    pub fn absorb<I, V>(&mut self, records: I, mut verify: V)
    where
        I: IntoIterator<Item = BandKeyRecord>,
        V: FnMut(u64, u64) -> bool,
    {
        let mut run: Vec<u64> = Vec::new();
        let mut current: Option<(u16, u64)> = None;
        for rec in records {
            if current != Some((rec.band, rec.key)) {
                self.merge_run(&mut run, &mut verify);
                current = Some((rec.band, rec.key));
            }
            run.push(rec.doc_id);
        }
        self.merge_run(&mut run, &mut verify);
    }

    fn merge_run<V: FnMut(u64, u64) -> bool>(&mut self, run: &mut Vec<u64>, verify: &mut V) {
        run.sort_unstable();
        run.dedup();
        let nodes: Vec<usize> = run.iter().map(|&id| self.node(id)).collect();
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if self.sets.same(nodes[i], nodes[j]) {
                    continue;
                }
                self.candidate_pairs += 1;
                if verify(run[i], run[j]) {
                    self.sets.union(nodes[i], nodes[j]);
                    self.merged_pairs += 1;
                }
            }
        }
        run.clear();
    }

    /// Smallest id in each cluster.
    pub fn representatives(&mut self) -> std::collections::HashSet<u64> {
        let mut best: HashMap<usize, u64> = HashMap::new();
        for n in 0..self.ids.len() {
            let root = self.sets.find(n);
            let id = self.ids[n];
            best.entry(root).and_modify(|b| *b = (*b).min(id)).or_insert(id);
        }
        best.into_values().collect()
    }

    pub fn cluster_count(&mut self) -> usize {
        (0..self.ids.len())
            .filter(|&n| self.sets.find(n) == n)
            .count()
    }

    pub fn candidate_pairs(&self) -> u64 {
        self.candidate_pairs
    }

    pub fn merged_pairs(&self) -> u64 {
        self.merged_pairs
    }
}
