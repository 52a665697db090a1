//! Stage composition over record batches with a fixed-size worker pool.
//! Every stage preserves input order, so output is independent of the
//! number of workers.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use xxhash_rust::xxh3::xxh3_64;

use crate::chunk::chunk_text;
use crate::decontam::{is_contaminated, NGramBloom};
use crate::dedup::{cluster_and_select, ClusterOptions, ExactDedup, MinHashParams};
use crate::error::{Error, Result};
use crate::filter::FilterExpr;
use crate::quality::{apply_rules_with, compute_signals_with, Lexicon, QualitySignals, RulePolicy, RuleTable, SignalOptions};
use crate::record::DocumentRecord;

#[derive(Debug, Clone)]
pub enum Stage {
    ExactDedup,
    NearDedup {
        params: MinHashParams,
        options: ClusterOptions,
    },
    /// Computes quality signals into `quality_signals`; removes nothing.
    Signals {
        lexicon: Arc<Lexicon>,
        options: SignalOptions,
    },
    /// Keep/reject rules over previously computed signals.
    Quality {
        table: RuleTable,
        policy: RulePolicy,
    },
    Filter {
        expr: FilterExpr,
    },
    Decontam {
        bloom: Arc<NGramBloom>,
        hit_threshold: u64,
    },
    Chunk {
        max_chars: usize,
    },
}

impl Stage {
    pub fn name(&self) -> &'static str {
        match self {
            Stage::ExactDedup => "exact-dedup",
            Stage::NearDedup { .. } => "near-dedup",
            Stage::Signals { .. } => "signals",
            Stage::Quality { .. } => "quality",
            Stage::Filter { .. } => "filter",
            Stage::Decontam { .. } => "decontam",
            Stage::Chunk { .. } => "chunk",
        }
    }

    /// Needs the whole corpus before emitting anything.
    pub fn is_global(&self) -> bool {
        matches!(self, Stage::NearDedup { .. })
    }
}

/// One stage's counts, with removal relative to the stage input and to the
/// first stage's input.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageSummary {
    pub stage: String,
    #[serde(rename = "in")]
    pub input: u64,
    #[serde(rename = "out")]
    pub output: u64,
    pub removed: u64,
    pub removed_pct: f64,
    pub cumulative_removed_pct: f64,
}

fn pct(part: u64, whole: u64) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Builds summaries from `(stage, in, out)` triples in pipeline order.
pub fn summarize(counts: &[(String, u64, u64)]) -> Vec<StageSummary> {
    let initial = counts.first().map_or(0, |c| c.1);
    counts
        .iter()
        .map(|(stage, input, output)| {
            let removed = input.saturating_sub(*output);
            StageSummary {
                stage: stage.clone(),
                input: *input,
                output: *output,
                removed,
                removed_pct: pct(removed, *input),
                cumulative_removed_pct: pct(initial.saturating_sub(*output), initial),
            }
        })
        .collect()
}

/// Worker pool with an explicit thread count.
pub struct Executor {
    pool: rayon::ThreadPool,
}

impl Executor {
    pub fn new(jobs: usize) -> Result<Self> {
        if jobs == 0 {
            return Err(Error::Param("jobs must be at least 1".into()));
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Param(format!("cannot start worker pool: {e}")))?;
        Ok(Self { pool })
    }

    pub fn jobs(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn install<R: Send>(&self, f: impl FnOnce() -> R + Send) -> R {
        self.pool.install(f)
    }
}

/// Chunking RNG seed for one document: depends only on the run seed and the
/// document id.
pub fn chunk_seed(seed: u64, id: u64) -> u64 {
    let mut buf = [0u8; 16];
    buf[..8].copy_from_slice(&seed.to_le_bytes());
    buf[8..].copy_from_slice(&id.to_le_bytes());
    xxh3_64(&buf)
}

/// Streaming state for a record-local stage.
pub struct StageRunner {
    stage: Stage,
    seed: u64,
    exact: ExactDedup,
    input: u64,
    output: u64,
}

impl StageRunner {
    pub fn new(stage: Stage, seed: u64) -> Result<Self> {
        if stage.is_global() {
            return Err(Error::Param(format!("{} cannot run batch by batch", stage.name())));
        }
        Ok(Self {
            stage,
            seed,
            exact: ExactDedup::new(),
            input: 0,
            output: 0,
        })
    }

    pub fn stage(&self) -> &Stage {
        &self.stage
    }

    pub fn counts(&self) -> (u64, u64) {
        (self.input, self.output)
    }

    /// Applies the stage to the next batch, in order, using the current
    /// rayon pool.
    pub fn process(&mut self, batch: Vec<DocumentRecord>) -> Result<Vec<DocumentRecord>> {
        self.input += batch.len() as u64;
        let seed = self.seed;
        let out: Vec<DocumentRecord> = match &self.stage {
            Stage::ExactDedup => batch.into_iter().filter(|r| self.exact.admit(r.id)).collect(),
            Stage::NearDedup { .. } => unreachable!("rejected in StageRunner::new"),
            Stage::Signals { lexicon, options } => batch
                .into_par_iter()
                .map(|mut r| {
                    compute_signals_with(&r.text, lexicon, *options).write_to(&mut r);
                    r
                })
                .collect(),
            Stage::Quality { table, policy } => {
                let keep: Vec<bool> = batch
                    .par_iter()
                    .map(|r| {
                        let map = r.quality_signals.clone().unwrap_or_default();
                        let signals = QualitySignals::from_map(&map)
                            .map_err(|e| Error::Param(format!("document {}: {e}; run the signals stage first", r.id)))?;
                        Ok(apply_rules_with(&signals, table, *policy).is_keep())
                    })
                    .collect::<Result<_>>()?;
                batch.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect()
            }
            Stage::Filter { expr } => {
                let keep: Vec<bool> = batch.par_iter().map(|r| expr.eval(r)).collect();
                batch.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect()
            }
            Stage::Decontam { bloom, hit_threshold } => {
                let keep: Vec<bool> = batch
                    .par_iter()
                    .map(|r| !is_contaminated(&r.text, bloom, *hit_threshold).0)
                    .collect();
                batch.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect()
            }
            Stage::Chunk { max_chars } => batch
                .into_par_iter()
                .map(|mut r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(chunk_seed(seed, r.id));
                    r.text = chunk_text(&r.text, *max_chars, &mut rng)?;
                    Ok(r)
                })
                .collect::<Result<_>>()?,
        };
        self.output += out.len() as u64;
        Ok(out)
    }
}

/// Runs all stages over an in-memory corpus.
pub fn run_pipeline(
    records: Vec<DocumentRecord>,
    stages: &[Stage],
    seed: u64,
    jobs: usize,
) -> Result<(Vec<DocumentRecord>, Vec<StageSummary>)> {
    let executor = Executor::new(jobs)?;
    executor.install(|| {
        let mut records = records;
        let mut counts = Vec::with_capacity(stages.len());
        for stage in stages {
            let input = records.len() as u64;
            records = match stage {
                Stage::NearDedup { params, options } => cluster_and_select(records, params, options)?.0,
                _ => StageRunner::new(stage.clone(), seed)?.process(records)?,
            };
            counts.push((stage.name().to_owned(), input, records.len() as u64));
        }
        Ok((records, summarize(&counts)))
    })
}
