//! Disk-backed sort of band-key records for corpora whose band keys do not
//! fit in memory. Records are buffered, spilled as sorted runs of fixed-width
//! big-endian entries, then k-way merged.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::lsh::{band_keys_in_group, band_records, BandKeyRecord, Clusters};
use super::minhash::{jaccard, MinHashParams, MinHasher};
use super::{group_key, ClusterOptions, ClusterStats};
use crate::error::Result;
use crate::record::DocumentRecord;

const DEFAULT_RUN_RECORDS: usize = 1 << 22;

pub struct ExternalSorter {
    dir: PathBuf,
    buffer: Vec<BandKeyRecord>,
    run_records: usize,
    runs: Vec<PathBuf>,
}

impl ExternalSorter {
    /// Spill files go to `dir`, which must exist.
    pub fn new(dir: &Path) -> Self {
        Self::with_run_size(dir, DEFAULT_RUN_RECORDS)
    }

    pub fn with_run_size(dir: &Path, run_records: usize) -> Self {
        Self {
            dir: dir.to_path_buf(),
            buffer: Vec::new(),
            run_records: run_records.max(1),
            runs: Vec::new(),
        }
    }

    pub fn push(&mut self, rec: BandKeyRecord) -> Result<()> {
        self.buffer.push(rec);
        if self.buffer.len() >= self.run_records {
            self.spill()?;
        }
        Ok(())
    }

    pub fn runs(&self) -> usize {
        self.runs.len()
    }

    fn spill(&mut self) -> Result<()> {
        if self.buffer.is_empty() {
            return Ok(());
        }
        self.buffer.par_sort_unstable();
        let path = self.dir.join(format!("lsh-run-{:05}.bin", self.runs.len()));
        let mut w = BufWriter::new(File::create(&path)?);
        for rec in self.buffer.drain(..) {
            w.write_all(&rec.to_bytes())?;
        }
        w.flush()?;
        self.runs.push(path);
        Ok(())
    }

    /// Globally sorted stream over everything pushed. Spill files are deleted
    /// when the iterator is dropped.
    pub fn finish(mut self) -> Result<SortedRecords> {
        if self.runs.is_empty() {
            self.buffer.par_sort_unstable();
            return Ok(SortedRecords::Memory(std::mem::take(&mut self.buffer).into_iter()));
        }
        self.spill()?;
        let mut readers = Vec::with_capacity(self.runs.len());
        let mut heap = BinaryHeap::new();
        for (i, path) in self.runs.iter().enumerate() {
            let mut r = BufReader::new(File::open(path)?);
            if let Some(rec) = read_record(&mut r)? {
                heap.push(Reverse((rec, i)));
            }
            readers.push(r);
        }
        Ok(SortedRecords::Merge {
            readers,
            heap,
            paths: std::mem::take(&mut self.runs),
            error: None,
        })
    }
}

fn read_record<R: Read>(r: &mut R) -> Result<Option<BandKeyRecord>> {
    let mut buf = [0u8; BandKeyRecord::ENCODED_LEN];
    match r.read_exact(&mut buf) {
        Ok(()) => Ok(Some(BandKeyRecord::from_bytes(&buf))),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub enum SortedRecords {
    Memory(std::vec::IntoIter<BandKeyRecord>),
    Merge {
        readers: Vec<BufReader<File>>,
        heap: BinaryHeap<Reverse<(BandKeyRecord, usize)>>,
        paths: Vec<PathBuf>,
        error: Option<std::io::Error>,
    },
}

impl SortedRecords {
    /// First I/O error hit while merging, if any.
    pub fn take_error(&mut self) -> Option<std::io::Error> {
        match self {
            SortedRecords::Merge { error, .. } => error.take(),
            SortedRecords::Memory(_) => None,
        }
    }
}

impl Iterator for SortedRecords {
    type Item = BandKeyRecord;

    fn next(&mut self) -> Option<BandKeyRecord> {
        match self {
            SortedRecords::Memory(it) => it.next(),
            SortedRecords::Merge {
                readers, heap, error, ..
            } => {
                let Reverse((rec, i)) = heap.pop()?;
                match read_record(&mut readers[i]) {
                    Ok(Some(next)) => heap.push(Reverse((next, i))),
                    Ok(None) => {}
                    Err(crate::Error::Io(e)) => {
                        error.get_or_insert(e);
                        heap.clear();
                    }
                    Err(_) => unreachable!("read_record only fails with I/O errors"),
                }
                Some(rec)
            }
        }
    }
}

impl Drop for SortedRecords {
    fn drop(&mut self) {
        if let SortedRecords::Merge { paths, .. } = self {
            for p in paths.iter() {
                let _ = std::fs::remove_file(p);
            }
        }
    }
}

/// Streaming near-duplicate clustering. Batches of records are signed in
/// parallel and their band keys spilled to `shuffle_dir`; the result is the
/// set of ids to keep (one per cluster). With verification enabled the
/// texts are retained in memory for the exact Jaccard check.
pub struct StreamingClusterer {
    hasher: MinHasher,
    params: MinHashParams,
    opts: ClusterOptions,
    sorter: ExternalSorter,
    ids: Vec<u64>,
    texts: HashMap<u64, String>,
}

impl StreamingClusterer {
    pub fn new(params: MinHashParams, opts: ClusterOptions, shuffle_dir: &Path) -> Result<Self> {
        Self::with_run_size(params, opts, shuffle_dir, DEFAULT_RUN_RECORDS)
    }

    pub fn with_run_size(
        params: MinHashParams,
        opts: ClusterOptions,
        shuffle_dir: &Path,
        run_records: usize,
    ) -> Result<Self> {
        Ok(Self {
            hasher: MinHasher::new(params)?,
            params,
            opts,
            sorter: ExternalSorter::with_run_size(shuffle_dir, run_records),
            ids: Vec::new(),
            texts: HashMap::new(),
        })
    }

    pub fn add_batch(&mut self, batch: &[DocumentRecord]) -> Result<()> {
        let keys: Vec<Vec<u64>> = batch
            .par_iter()
            .map(|r| {
                let sig = self.hasher.signature(&r.text);
                band_keys_in_group(&sig, &self.params, group_key(r, self.opts.group_field.as_deref()))
            })
            .collect();
        for (r, keys) in batch.iter().zip(&keys) {
            self.ids.push(r.id);
            if self.opts.verify_threshold.is_some() {
                self.texts.entry(r.id).or_insert_with(|| r.text.clone());
            }
            for rec in band_records(r.id, keys) {
                self.sorter.push(rec)?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<(HashSet<u64>, ClusterStats)> {
        let mut clusters = Clusters::new();
        let mut distinct = HashSet::new();
        for &id in &self.ids {
            if distinct.insert(id) {
                clusters.insert(id);
            }
        }
        let mut sorted = self.sorter.finish()?;
        match self.opts.verify_threshold {
            None => clusters.absorb(&mut sorted, |_, _| true),
            Some(t) => {
                let texts = &self.texts;
                let width = self.params.shingle_width;
                clusters.absorb(&mut sorted, |a, b| jaccard(&texts[&a], &texts[&b], width) >= t);
            }
        }
        if let Some(e) = sorted.take_error() {
            return Err(e.into());
        }
        let reps = clusters.representatives();
        let stats = ClusterStats {
            input: self.ids.len() as u64,
            output: reps.len() as u64,
            candidate_pairs: clusters.candidate_pairs(),
            merged_pairs: clusters.merged_pairs(),
            clusters: clusters.cluster_count() as u64,
        };
        Ok((reps, stats))
    }
}
