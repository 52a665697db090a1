//! Streams records through a stage list in bounded batches. Near-duplicate
//! clustering needs the whole input, so each near-dedup stage starts a new
//! segment: its input is read once to cluster (band keys spill to the
//! shuffle directory) and again to emit the survivors. Segment boundaries
//! spool intermediate records to the shuffle directory.

use std::collections::{BTreeMap, HashSet};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde_json::{json, Value};
use taxonomy_forge::dedup::{ClusterOptions, MinHashParams, StreamingClusterer};
use taxonomy_forge::filter::{run_filter, FilterExpr, FilterStats};
use taxonomy_forge::pipeline::{Executor, Stage, StageRunner};
use taxonomy_forge::quality::{apply_rules_with, QualitySignals, RulePolicy, RuleTable};
use taxonomy_forge::record::DocumentRecord;
use tempfile::NamedTempFile;

use crate::error::{config, data, CliResult};
use crate::io::{Sink, Source};

pub struct Engine {
    pub stages: Vec<Stage>,
    pub seed: u64,
    pub executor: Executor,
    pub batch_size: usize,
    pub shuffle_dir: PathBuf,
}

/// Counts for one stage plus stage-specific detail for the report.
#[derive(Debug, Clone)]
pub struct StageCount {
    pub stage: String,
    pub input: u64,
    pub output: u64,
    pub detail: Option<Value>,
}

enum Local {
    Runner(StageRunner),
    Filter { expr: FilterExpr, stats: FilterStats },
    Quality { table: RuleTable, policy: RulePolicy, outcomes: BTreeMap<String, u64> },
}

impl Local {
    fn new(stage: &Stage, seed: u64) -> CliResult<Self> {
        Ok(match stage {
            Stage::Filter { expr } => Local::Filter {
                expr: expr.clone(),
                stats: FilterStats::default(),
            },
            Stage::Quality { table, policy } => Local::Quality {
                table: table.clone(),
                policy: *policy,
                outcomes: BTreeMap::new(),
            },
            other => Local::Runner(StageRunner::new(other.clone(), seed).map_err(config)?),
        })
    }

    fn process(&mut self, batch: Vec<DocumentRecord>, exec: &Executor) -> CliResult<Vec<DocumentRecord>> {
        match self {
            Local::Runner(r) => exec.install(|| r.process(batch)).map_err(data),
            Local::Filter { expr, stats } => {
                let (kept, s) = exec.install(|| run_filter(batch, expr));
                stats.merge(&s);
                Ok(kept)
            }
            Local::Quality { table, policy, outcomes } => {
                let decisions: Vec<(bool, String)> = exec.install(|| {
                    batch
                        .par_iter()
                        .map(|r| {
                            let map = r.quality_signals.clone().unwrap_or_default();
                            let signals = QualitySignals::from_map(&map).map_err(|e| {
                                data(format!("document {}: {e}; run the signals stage first", r.id))
                            })?;
                            let d = apply_rules_with(&signals, table, *policy);
                            Ok((d.is_keep(), d.label()))
                        })
                        .collect::<CliResult<_>>()
                })?;
                let mut kept = Vec::with_capacity(batch.len());
                for (r, (keep, label)) in batch.into_iter().zip(decisions) {
                    *outcomes.entry(label).or_default() += 1;
                    if keep {
                        kept.push(r);
                    }
                }
                Ok(kept)
            }
        }
    }

    fn detail(&self) -> Option<Value> {
        match self {
            Local::Runner(_) => None,
            Local::Filter { stats, .. } => Some(json!({ "rejected_by": stats.rejected_by })),
            Local::Quality { outcomes, .. } => Some(json!({ "outcomes": outcomes })),
        }
    }
}

struct Segment<'a> {
    near: Option<(MinHashParams, &'a ClusterOptions)>,
    locals: Vec<&'a Stage>,
}

impl Engine {
    fn segments(&self) -> Vec<Segment<'_>> {
        let mut out = vec![Segment {
            near: None,
            locals: Vec::new(),
        }];
        for stage in &self.stages {
            match stage {
                Stage::NearDedup { params, options } => out.push(Segment {
                    near: Some((*params, options)),
                    locals: Vec::new(),
                }),
                other => out.last_mut().unwrap().locals.push(other),
            }
        }
        if out.len() > 1 && out[0].locals.is_empty() {
            out.remove(0);
        }
        out
    }

    pub fn run(&self, source: Source, sink: &mut Sink) -> CliResult<Vec<StageCount>> {
        let segments = self.segments();
        let mut counts = Vec::new();
        let mut current = source;
        let mut spools: Vec<NamedTempFile> = Vec::new();
        for (i, seg) in segments.iter().enumerate() {
            if seg.near.is_some() {
                let (src, spool) = current.rereadable(&self.shuffle_dir)?;
                current = src;
                spools.extend(spool);
            }
            if i + 1 == segments.len() {
                self.run_segment(&current, seg, &mut |batch| sink.write_records(batch), &mut counts)?;
            } else {
                let spool = NamedTempFile::new_in(&self.shuffle_dir)
                    .map_err(|e| config(format!("shuffle directory {}: {e}", self.shuffle_dir.display())))?;
                {
                    let mut w = BufWriter::new(spool.as_file());
                    self.run_segment(
                        &current,
                        seg,
                        &mut |batch| {
                            for r in batch {
                                w.write_all(r.to_json_line().as_bytes())?;
                                w.write_all(b"\n")?;
                            }
                            Ok(())
                        },
                        &mut counts,
                    )?;
                    w.flush()?;
                }
                current = Source::File(spool.path().to_path_buf());
                spools.push(spool);
            }
        }
        Ok(counts)
    }

    fn run_segment(
        &self,
        source: &Source,
        seg: &Segment<'_>,
        emit: &mut dyn FnMut(&[DocumentRecord]) -> CliResult<()>,
        counts: &mut Vec<StageCount>,
    ) -> CliResult<()> {
        let exec = &self.executor;
        let mut near = None;
        if let Some((params, options)) = seg.near {
            let mut clusterer = StreamingClusterer::new(params, options.clone(), &self.shuffle_dir).map_err(config)?;
            let mut reader = source.open()?;
            loop {
                let batch = reader.next_batch(self.batch_size, exec)?;
                if batch.is_empty() {
                    break;
                }
                exec.install(|| clusterer.add_batch(&batch))?;
            }
            let (reps, stats) = exec.install(|| clusterer.finish())?;
            near = Some((reps, HashSet::new(), stats, 0u64, 0u64));
        }

        let mut locals: Vec<Local> = seg.locals.iter().map(|s| Local::new(s, self.seed)).collect::<CliResult<_>>()?;
        let mut io_counts = vec![(0u64, 0u64); locals.len()];
        let mut reader = source.open()?;
        loop {
            let mut batch = reader.next_batch(self.batch_size, exec)?;
            if batch.is_empty() {
                break;
            }
            if let Some((reps, emitted, _, input, output)) = near.as_mut() {
                *input += batch.len() as u64;
                batch.retain(|r| reps.contains(&r.id) && emitted.insert(r.id));
                *output += batch.len() as u64;
            }
            for (local, c) in locals.iter_mut().zip(io_counts.iter_mut()) {
                c.0 += batch.len() as u64;
                batch = local.process(batch, exec)?;
                c.1 += batch.len() as u64;
            }
            emit(&batch)?;
        }

        if let Some((_, _, stats, input, output)) = near {
            counts.push(StageCount {
                stage: "near-dedup".into(),
                input,
                output,
                detail: Some(json!({
                    "clusters": stats.clusters,
                    "candidate_pairs": stats.candidate_pairs,
                    "merged_pairs": stats.merged_pairs,
                })),
            });
        }
        for ((stage, local), (input, output)) in seg.locals.iter().zip(&locals).zip(io_counts) {
            counts.push(StageCount {
                stage: stage.name().into(),
                input,
                output,
                detail: local.detail(),
            });
        }
        Ok(())
    }
}
