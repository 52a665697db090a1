//! TOML run configuration. Every key is optional; command-line flags
//! override the file. Relative paths are resolved against the working
//! directory.
//!
//! ```toml
//! input = "corpus.jsonl"
//! output = "curated.jsonl"
//! report = "report.json"
//! seed = 42
//! jobs = 8
//! batch_size = 1024
//! shuffle_dir = "/scratch/lsh"
//! stages = ["exact-dedup", "near-dedup", "signals", "quality", "filter", "decontam", "chunk"]
//!
//! [dedup]
//! bands = 14
//! rows = 9
//! shingle_width = 5
//! verify_threshold = 0.8
//! group_field = "metadata.snapshot"
//!
//! [signals]
//! lexicon = "ldnoobw.txt"
//! case_fold = false
//!
//! [quality]
//! missing_english_rejects = true
//!
//! [filter]
//! preset = "top-math"          # or: expr = 'fdc.primary prefix_in {"51"}'
//!
//! [decontam]
//! bloom = "eval.bloom"
//! width = 13
//! target_fp = 1e-6
//! hit_threshold = 1
//!
//! [chunk]
//! max_chars = 30000
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{config, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StageName {
    ExactDedup,
    NearDedup,
    Signals,
    Quality,
    Filter,
    Decontam,
    Chunk,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub batch_size: Option<usize>,
    pub shuffle_dir: Option<PathBuf>,
    pub stages: Option<Vec<StageName>>,
    pub dedup: DedupConfig,
    pub signals: SignalsConfig,
    pub quality: QualityConfig,
    pub filter: FilterConfig,
    pub decontam: DecontamConfig,
    pub chunk: ChunkConfig,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupConfig {
    pub bands: Option<usize>,
    pub rows: Option<usize>,
    pub shingle_width: Option<usize>,
    pub verify_threshold: Option<f64>,
    pub group_field: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalsConfig {
    pub lexicon: Option<PathBuf>,
    pub case_fold: Option<bool>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QualityConfig {
    pub missing_english_rejects: Option<bool>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterConfig {
    pub preset: Option<String>,
    pub expr: Option<String>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecontamConfig {
    pub bloom: Option<PathBuf>,
    pub width: Option<usize>,
    pub target_fp: Option<f64>,
    pub hit_threshold: Option<u64>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkConfig {
    pub max_chars: Option<usize>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> CliResult<Self> {
        let Some(path) = path else { return Ok(Self::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| config(format!("config {}: {e}", path.display())))
    }
}

/// Sets `slot` when the flag was given.
pub fn overlay<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}
