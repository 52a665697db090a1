//! Corpus curation and taxonomy evaluation.
//!
//! The pipeline side covers exact and MinHash-LSH deduplication, statistical
//! quality signals with keep/reject rules, a filter-expression language with
//! the preset dataset filters, n-gram Bloom decontamination and long-document
//! chunking. The metric side covers overlap-agreement κ with a closed-form
//! chance term, normalized mutual information between categories, and
//! domain recall against vetted URL lists.

pub mod agreement;
pub mod chunk;
pub mod decontam;
pub mod dedup;
pub mod error;
pub mod filter;
pub mod pipeline;
pub mod quality;
pub mod recall;
pub mod record;
pub mod redundancy;
pub mod taxonomy;

pub use agreement::{
    annotator_kappa, expected_agreement, kappa, observed_agreement, AgreementReport, AnnotatorModel,
};
pub use chunk::chunk_text;
pub use decontam::{build_filter, is_contaminated, normalize_tokens, NGramBloom};
pub use dedup::{cluster_and_select, minhash_signature, ClusterOptions, MinHashParams, MinHashSignature};
pub use error::{Error, Result};
pub use filter::{parse_filter, preset, prefix_match, run_filter, FilterExpr, FilterStats};
pub use pipeline::{run_pipeline, Stage, StageSummary};
pub use quality::{apply_rules, compute_signals, FilterDecision, QualitySignals};
pub use recall::{recall_and_kept, GoldUrlSet};
pub use record::{doc_id, parse_record, DocumentRecord};
pub use redundancy::{nmi, ContingencyTable};
pub use taxonomy::{Category, CategoryAnnotation, LabelSet, TaxonomyField};
