//! Exact id deduplication and MinHash-LSH near-duplicate removal.

pub mod external;
pub mod lsh;
pub mod minhash;
pub mod union_find;

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use xxhash_rust::xxh3::xxh3_64;

use crate::error::Result;
use crate::record::DocumentRecord;

pub use external::{ExternalSorter, StreamingClusterer};
pub use lsh::{band_keys_in_group, band_records, lsh_band_keys, BandKeyRecord, Clusters};
pub use minhash::{jaccard, minhash_signature, shingles, MinHashParams, MinHashSignature, MinHasher};
pub use union_find::DisjointSet;

/// Streaming exact deduplication on document ids.
#[derive(Debug, Default)]
pub struct ExactDedup {
    seen: HashSet<u64>,
    dropped: u64,
}

impl ExactDedup {
    pub fn new() -> Self {
        Self::default()
    }

    /// True the first time an id is offered.
    pub fn admit(&mut self, id: u64) -> bool {
        let fresh = self.seen.insert(id);
        if !fresh {
            self.dropped += 1;
        }
        fresh
    }

    pub fn dropped(&self) -> u64 {
        self.dropped
    }
}

/// Keeps the first occurrence of each id. Returns survivors and drop count.
pub fn exact_dedup(records: Vec<DocumentRecord>) -> (Vec<DocumentRecord>, u64) {
    let mut dedup = ExactDedup::new();
    let kept = records.into_iter().filter(|r| dedup.admit(r.id)).collect();
    (kept, dedup.dropped())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ClusterOptions {
    /// Confirm candidates with exact shingle Jaccard at this threshold.
    pub verify_threshold: Option<f64>,
    /// Dotted path to a record field (e.g. `metadata.snapshot`); documents
    /// with different values are never clustered together.
    pub group_field: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClusterStats {
    pub input: u64,
    pub output: u64,
    pub candidate_pairs: u64,
    pub merged_pairs: u64,
    pub clusters: u64,
}

/// Group key of a record: hash of the value at `path`, or of "" if absent.
pub fn group_key(record: &DocumentRecord, path: Option<&str>) -> u64 {
    let Some(path) = path else { return 0 };
    let mut parts = path.split('.');
    let first = parts.next().unwrap_or_default();
    let mut value = record.extra.get(first);
    for p in parts {
        value = value.and_then(|v| v.get(p));
    }
    let text = match value {
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => String::new(),
    };
    xxh3_64(text.as_bytes())
}

/// Clusters near-duplicates and keeps, per cluster, the record with the
/// smallest id (its first occurrence). Survivors keep input order.
pub fn cluster_and_select(
    records: Vec<DocumentRecord>,
    params: &MinHashParams,
    opts: &ClusterOptions,
) -> Result<(Vec<DocumentRecord>, ClusterStats)> {
    let hasher = MinHasher::new(*params)?;
    let keyed: Vec<(u64, Vec<u64>)> = records
        .par_iter()
        .map(|r| {
            let sig = hasher.signature(&r.text);
            let group = group_key(r, opts.group_field.as_deref());
            (r.id, band_keys_in_group(&sig, params, group))
        })
        .collect();

    let mut band_recs: Vec<BandKeyRecord> = keyed
        .iter()
        .flat_map(|(id, keys)| band_records(*id, keys))
        .collect();
    band_recs.par_sort_unstable();

    let mut clusters = Clusters::new();
    for r in &records {
        clusters.insert(r.id);
    }
    match opts.verify_threshold {
        None => clusters.absorb(band_recs, |_, _| true),
        Some(threshold) => {
            let texts: HashMap<u64, &str> = records.iter().map(|r| (r.id, r.text.as_str())).collect();
            clusters.absorb(band_recs, |a, b| {
                jaccard(texts[&a], texts[&b], params.shingle_width) >= threshold
            });
        }
    }

    let reps = clusters.representatives();
    let mut emitted = HashSet::new();
    let input = records.len() as u64;
    let kept: Vec<DocumentRecord> = records
        .into_iter()
        .filter(|r| reps.contains(&r.id) && emitted.insert(r.id))
        .collect();
    let stats = ClusterStats {
        input,
        output: kept.len() as u64,
        candidate_pairs: clusters.candidate_pairs(),
        merged_pairs: clusters.merged_pairs(),
        clusters: clusters.cluster_count() as u64,
    };
    Ok((kept, stats))
}
