use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde_json::{json, Value};
use taxonomy_forge::agreement::{annotation_table, annotator_kappa, EmptyHandling, FitOptions, LabelPooling};
use taxonomy_forge::chunk::DEFAULT_MAX_CHARS;
use taxonomy_forge::decontam::{build_filter, DEFAULT_TARGET_FP, DEFAULT_WIDTH};
use taxonomy_forge::dedup::{ClusterOptions, MinHashParams};
use taxonomy_forge::filter::{parse_filter, preset, FilterExpr};
use taxonomy_forge::pipeline::{summarize, Executor, Stage};
use taxonomy_forge::quality::{Lexicon, RulePolicy, RuleTable, SignalOptions};
use taxonomy_forge::recall::{match_gold, GoldUrlSet, RecallCounts};
use taxonomy_forge::record::DocumentRecord;
use taxonomy_forge::redundancy::{default_exclusions, nmi, nmi_matrix, ContingencyTable};
use taxonomy_forge::{Category, Error, NGramBloom};

use crate::cli::{
    ChunkArgs, Command, Common, DecontamArgs, DedupArgs, DedupMode, FilterArgs, KappaArgs, MetricsMode, NmiArgs,
    RecallArgs, RunArgs, Selection, SignalsArgs,
};
use crate::config::{overlay, Config, StageName};
use crate::engine::{Engine, StageCount};
use crate::error::{config, data, CliResult};
use crate::io::{read_to_string, require_file, write_atomic, Sink, Source};

const DEFAULT_BATCH_SIZE: usize = 1024;

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Dedup(a) => dedup(a),
        Command::Signals(a) => signals(a),
        Command::Filter(a) => filter(a),
        Command::Decontam(a) => decontam(a),
        Command::Chunk(a) => chunk(a),
        Command::Run(a) => run(a),
        Command::Metrics(m) => match m.mode {
            MetricsMode::Kappa(a) => kappa(a),
            MetricsMode::Nmi(a) => nmi_cmd(a),
            MetricsMode::Recall(a) => recall(a),
        },
    }
}

/// Config file with the shared flags laid over it.
fn load(common: &Common) -> CliResult<Config> {
    let mut cfg = Config::load(common.config.as_deref())?;
    overlay(&mut cfg.input, common.input.clone());
    overlay(&mut cfg.output, common.output.clone());
    overlay(&mut cfg.report, common.report.clone());
    overlay(&mut cfg.seed, common.seed);
    overlay(&mut cfg.jobs, common.jobs);
    overlay(&mut cfg.batch_size, common.batch_size);
    Ok(cfg)
}

fn executor(cfg: &Config) -> CliResult<Executor> {
    let jobs = cfg
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    Executor::new(jobs).map_err(config)
}

fn batch_size(cfg: &Config) -> CliResult<usize> {
    match cfg.batch_size.unwrap_or(DEFAULT_BATCH_SIZE) {
        0 => Err(config("batch size must be at least 1")),
        n => Ok(n),
    }
}

fn near_dedup_stage(cfg: &Config) -> CliResult<Stage> {
    let d = &cfg.dedup;
    let params = MinHashParams::new(
        d.bands.unwrap_or(14),
        d.rows.unwrap_or(9),
        d.shingle_width.unwrap_or(5),
        cfg.seed.unwrap_or(0),
    )
    .map_err(config)?;
    if let Some(t) = d.verify_threshold {
        if !(t > 0.0 && t <= 1.0) {
            return Err(config(format!("verify threshold must be in (0, 1], got {t}")));
        }
    }
    Ok(Stage::NearDedup {
        params,
        options: ClusterOptions {
            verify_threshold: d.verify_threshold,
            group_field: d.group_field.clone(),
        },
    })
}

fn signals_stage(cfg: &Config) -> CliResult<Stage> {
    let lexicon = match &cfg.signals.lexicon {
        Some(p) => {
            require_file(p, "lexicon")?;
            Lexicon::parse(&read_to_string(p, "lexicon")?)
        }
        None => Lexicon::default(),
    };
    Ok(Stage::Signals {
        lexicon: Arc::new(lexicon),
        options: SignalOptions {
            case_fold: cfg.signals.case_fold.unwrap_or(false),
        },
    })
}

fn quality_stage(cfg: &Config) -> Stage {
    Stage::Quality {
        table: RuleTable::default(),
        policy: RulePolicy {
            missing_english_rejects: cfg.quality.missing_english_rejects.unwrap_or(true),
        },
    }
}

fn filter_expr(preset_name: Option<&str>, expr: Option<&str>) -> CliResult<FilterExpr> {
    match (preset_name, expr) {
        (Some(name), None) => preset(name.trim_start_matches('@')).map_err(config),
        (None, Some(text)) => parse_filter(text).map_err(config),
        (None, None) => Err(config("a preset or filter expression is required")),
        (Some(_), Some(_)) => Err(config("give either a preset or a filter expression, not both")),
    }
}

fn filter_stage(cfg: &Config) -> CliResult<Stage> {
    Ok(Stage::Filter {
        expr: filter_expr(cfg.filter.preset.as_deref(), cfg.filter.expr.as_deref())?,
    })
}

fn decontam_stage(cfg: &Config) -> CliResult<Stage> {
    let path = cfg
        .decontam
        .bloom
        .as_deref()
        .ok_or_else(|| config("decontamination needs a bloom filter path"))?;
    require_file(path, "bloom filter")?;
    let bloom = NGramBloom::load(path).map_err(|e| config(format!("bloom filter {}: {e}", path.display())))?;
    Ok(Stage::Decontam {
        bloom: Arc::new(bloom),
        hit_threshold: cfg.decontam.hit_threshold.unwrap_or(1),
    })
}

fn chunk_stage(cfg: &Config) -> CliResult<Stage> {
    let max_chars = cfg.chunk.max_chars.unwrap_or(DEFAULT_MAX_CHARS);
    if max_chars < 9 {
        return Err(config(format!("max chars must be at least 9, got {max_chars}")));
    }
    Ok(Stage::Chunk { max_chars })
}

fn stage(name: StageName, cfg: &Config) -> CliResult<Stage> {
    match name {
        StageName::ExactDedup => Ok(Stage::ExactDedup),
        StageName::NearDedup => near_dedup_stage(cfg),
        StageName::Signals => signals_stage(cfg),
        StageName::Quality => Ok(quality_stage(cfg)),
        StageName::Filter => filter_stage(cfg),
        StageName::Decontam => decontam_stage(cfg),
        StageName::Chunk => chunk_stage(cfg),
    }
}

/// Streams the input through `stages`, printing one summary line per stage
/// to standard error and writing the report when requested.
fn run_stages(command: &str, cfg: &Config, stages: Vec<Stage>) -> CliResult<()> {
    let source = Source::new(cfg.input.as_deref())?;
    let shuffle_dir = cfg.shuffle_dir.clone().unwrap_or_else(std::env::temp_dir);
    if stages.iter().any(Stage::is_global) && !shuffle_dir.is_dir() {
        return Err(config(format!("shuffle directory {} does not exist", shuffle_dir.display())));
    }
    let engine = Engine {
        stages,
        seed: cfg.seed.unwrap_or(0),
        executor: executor(cfg)?,
        batch_size: batch_size(cfg)?,
        shuffle_dir,
    };
    let mut sink = Sink::new(cfg.output.as_deref())?;
    let counts = engine.run(source, &mut sink)?;
    sink.commit()?;

    let triples: Vec<(String, u64, u64)> = counts.iter().map(|c| (c.stage.clone(), c.input, c.output)).collect();
    let summaries = summarize(&triples);
    for s in &summaries {
        eprintln!("{}", serde_json::to_string(s).expect("summary serializes"));
    }
    let details: BTreeMap<&str, &Value> = counts
        .iter()
        .filter_map(|StageCount { stage, detail, .. }| detail.as_ref().map(|d| (stage.as_str(), d)))
        .collect();
    write_report(
        cfg.report.as_deref(),
        &json!({ "command": command, "stages": summaries, "details": details }),
    )
}

fn write_report(path: Option<&Path>, report: &Value) -> CliResult<()> {
    match path {
        Some(p) => {
            let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
            bytes.push(b'\n');
            write_atomic(p, &bytes)
        }
        None => Ok(()),
    }
}

fn dedup(a: DedupArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay(&mut cfg.dedup.bands, a.bands);
    overlay(&mut cfg.dedup.rows, a.rows);
    overlay(&mut cfg.dedup.shingle_width, a.shingle_width);
    overlay(&mut cfg.dedup.verify_threshold, a.verify);
    overlay(&mut cfg.dedup.group_field, a.group_field);
    overlay(&mut cfg.shuffle_dir, a.shuffle_dir);
    let mut stages = Vec::new();
    if a.mode != DedupMode::Near {
        stages.push(Stage::ExactDedup);
    }
    if a.mode != DedupMode::Exact {
        stages.push(near_dedup_stage(&cfg)?);
    }
    run_stages("dedup", &cfg, stages)
}

fn signals(a: SignalsArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay(&mut cfg.signals.lexicon, a.lexicon);
    if a.case_fold {
        cfg.signals.case_fold = Some(true);
    }
    if a.keep_missing_english {
        cfg.quality.missing_english_rejects = Some(false);
    }
    let mut stages = vec![signals_stage(&cfg)?];
    if a.apply_rules {
        stages.push(quality_stage(&cfg));
    }
    run_stages("signals", &cfg, stages)
}

fn overlay_selection(cfg: &mut Config, sel: Selection) {
    if sel.preset.is_some() || sel.filter_expr.is_some() {
        cfg.filter.preset = sel.preset;
        cfg.filter.expr = sel.filter_expr;
    }
}

fn filter(a: FilterArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay_selection(&mut cfg, a.selection);
    let stages = vec![filter_stage(&cfg)?];
    run_stages("filter", &cfg, stages)
}

fn decontam(a: DecontamArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay(&mut cfg.decontam.bloom, a.bloom);
    overlay(&mut cfg.decontam.width, a.width);
    overlay(&mut cfg.decontam.target_fp, a.target_fp);
    overlay(&mut cfg.decontam.hit_threshold, a.hit_threshold);
    if a.build {
        return build_bloom(&cfg);
    }
    let stages = vec![decontam_stage(&cfg)?];
    run_stages("decontam", &cfg, stages)
}

/// Builds the evaluation-set filter from the input records' texts.
fn build_bloom(cfg: &Config) -> CliResult<()> {
    let path = cfg
        .decontam
        .bloom
        .as_deref()
        .ok_or_else(|| config("--build needs --bloom for the output path"))?;
    let width = cfg.decontam.width.unwrap_or(DEFAULT_WIDTH);
    let target_fp = cfg.decontam.target_fp.unwrap_or(DEFAULT_TARGET_FP);
    if width == 0 || !(target_fp > 0.0 && target_fp < 1.0) {
        return Err(config(format!("invalid n-gram width {width} or target false-positive rate {target_fp}")));
    }
    let exec = executor(cfg)?;
    let records = Source::new(cfg.input.as_deref())?.open()?.read_all(&exec)?;
    let bloom = build_filter(records.iter().map(|r| r.text.as_str()), width, target_fp)?;
    write_atomic(path, &bloom.to_bytes())?;
    let summary = json!({
        "command": "decontam-build",
        "documents": records.len(),
        "width": bloom.width(),
        "bits": bloom.bits(),
        "hashes": bloom.hashes(),
        "ngrams": bloom.count(),
        "fill_ratio": bloom.fill_ratio(),
    });
    eprintln!("{summary}");
    write_report(cfg.report.as_deref(), &summary)
}

fn chunk(a: ChunkArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay(&mut cfg.chunk.max_chars, a.max_chars);
    let stages = vec![chunk_stage(&cfg)?];
    run_stages("chunk", &cfg, stages)
}

fn run(a: RunArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay(&mut cfg.stages, a.stages);
    overlay(&mut cfg.shuffle_dir, a.shuffle_dir);
    let names = cfg.stages.clone().unwrap_or_default();
    if names.is_empty() {
        return Err(config("no stages configured; set `stages` in the config or pass --stages"));
    }
    let stages = names.iter().map(|&n| stage(n, &cfg)).collect::<CliResult<Vec<_>>>()?;
    run_stages("run", &cfg, stages)
}

fn read_records(path: Option<&Path>, exec: &Executor) -> CliResult<Vec<DocumentRecord>> {
    Source::new(path)?.open()?.read_all(exec)
}

fn categories(names: Option<&[String]>) -> CliResult<Vec<Category>> {
    match names {
        None => Ok(Category::ALL.to_vec()),
        Some(names) => names
            .iter()
            .filter(|n| !n.trim().is_empty())
            .map(|n| n.trim().parse().map_err(config))
            .collect(),
    }
}

/// Writes metric records as JSON lines to the output.
fn emit_lines(cfg: &Config, lines: &[Value]) -> CliResult<()> {
    let mut sink = Sink::new(cfg.output.as_deref())?;
    for line in lines {
        let w = sink.writer();
        serde_json::to_writer(&mut *w, line).map_err(data)?;
        w.write_all(b"\n")?;
    }
    sink.commit()
}

fn kappa(a: KappaArgs) -> CliResult<()> {
    let cfg = load(&a.common)?;
    if a.gold.len() != 2 {
        return Err(config(format!("kappa needs exactly two --gold files, got {}", a.gold.len())));
    }
    for g in &a.gold {
        require_file(g, "gold annotation")?;
    }
    let cats = categories(a.categories.as_deref())?;
    let opts = FitOptions {
        empty: if a.drop_empty { EmptyHandling::Drop } else { EmptyHandling::Keep },
        pooling: if a.primary_only { LabelPooling::PrimaryOnly } else { LabelPooling::Pooled },
    };
    let exec = executor(&cfg)?;
    let candidate = read_records(cfg.input.as_deref(), &exec)?;
    let gold1 = read_records(Some(&a.gold[0]), &exec)?;
    let gold2 = read_records(Some(&a.gold[1]), &exec)?;

    let mut lines = Vec::new();
    let mut errors = 0usize;
    for &cat in &cats {
        let tables = [&candidate, &gold1, &gold2].map(|recs| annotation_table(recs, &[cat]));
        for weighted in [false, true] {
            match annotator_kappa(&tables[0], &tables[1], &tables[2], weighted, opts) {
                Ok(per_cat) => {
                    let k = &per_cat[&cat];
                    for (pairing, r) in [("gold1", &k.vs_gold1), ("gold2", &k.vs_gold2)] {
                        lines.push(json!({
                            "category": cat, "pairing": pairing, "weighted": weighted,
                            "p_o": r.p_o, "p_e": r.p_e, "kappa": r.kappa, "n": r.n_pairs,
                        }));
                    }
                    lines.push(json!({
                        "category": cat, "pairing": "mean", "weighted": weighted,
                        "kappa": k.mean_kappa, "n": k.vs_gold1.n_pairs,
                    }));
                }
                Err(e @ (Error::IdMismatch { .. } | Error::Record { .. } | Error::Io(_))) => return Err(data(e)),
                Err(e) => {
                    errors += 1;
                    lines.push(json!({
                        "category": cat, "pairing": "mean", "weighted": weighted, "error": e.to_string(),
                    }));
                }
            }
        }
    }
    emit_lines(&cfg, &lines)?;
    let summary = json!({
        "command": "metrics kappa",
        "documents": candidate.len(),
        "categories": cats.len(),
        "errors": errors,
    });
    eprintln!("{summary}");
    write_report(cfg.report.as_deref(), &json!({ "summary": summary, "records": lines }))
}

fn nmi_cmd(a: NmiArgs) -> CliResult<()> {
    let cfg = load(&a.common)?;
    let report = match &a.table {
        Some(path) => {
            require_file(path, "table")?;
            let counts: Vec<Vec<u64>> = serde_json::from_str(&read_to_string(path, "table")?)
                .map_err(|e| data(format!("table {}: {e}", path.display())))?;
            let table = ContingencyTable::from_counts(counts)?;
            let r = nmi(&table);
            json!({ "nmi": r.value, "degenerate": r.degenerate, "documents": table.total() })
        }
        None => {
            let cats = categories(a.categories.as_deref())?;
            let exclusions = match &a.exclude {
                None => default_exclusions(),
                Some(names) => categories(Some(names))?.into_iter().collect(),
            };
            let exec = executor(&cfg)?;
            let records = read_records(cfg.input.as_deref(), &exec)?;
            serde_json::to_value(nmi_matrix(&records, &cats, &exclusions)).map_err(data)?
        }
    };
    emit_lines(&cfg, std::slice::from_ref(&report))?;
    eprintln!("{}", json!({ "command": "metrics nmi", "mean": report.get("mean").or(report.get("nmi")) }));
    write_report(cfg.report.as_deref(), &report)
}

fn gold_set(spec: &str) -> CliResult<GoldUrlSet> {
    match spec {
        "@math" => Ok(GoldUrlSet::math()),
        "@web-code" => Ok(GoldUrlSet::web_code()),
        s if s.starts_with('@') => Err(config(format!("unknown gold list {s}; bundled lists are @math and @web-code"))),
        path => {
            let path = PathBuf::from(path);
            require_file(&path, "gold URL")?;
            GoldUrlSet::parse(
                path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
                &read_to_string(&path, "gold URL list")?,
            )
            .map_err(config)
        }
    }
}

fn recall(a: RecallArgs) -> CliResult<()> {
    let mut cfg = load(&a.common)?;
    overlay_selection(&mut cfg, a.selection);
    let expr = filter_expr(cfg.filter.preset.as_deref(), cfg.filter.expr.as_deref())?;
    let gold = gold_set(&a.gold)?;
    let exec = executor(&cfg)?;
    let size = batch_size(&cfg)?;
    let mut reader = Source::new(cfg.input.as_deref())?.open()?;
    let mut counts = RecallCounts::default();
    loop {
        let batch = reader.next_batch(size, &exec)?;
        if batch.is_empty() {
            break;
        }
        let flags: Vec<(bool, bool)> = exec.install(|| {
            batch
                .par_iter()
                .map(|r| (r.url.as_deref().is_some_and(|u| match_gold(u, &gold)), expr.eval(r)))
                .collect()
        });
        for (positive, kept) in flags {
            counts.add(positive, kept);
        }
    }
    let r = counts.report()?;
    let report = json!({
        "gold": gold.name,
        "filter": expr.to_string(),
        "recall": r.recall,
        "kept": r.kept,
        "counts": r.counts,
    });
    emit_lines(&cfg, std::slice::from_ref(&report))?;
    eprintln!("{}", json!({ "command": "metrics recall", "recall": r.recall, "kept": r.kept }));
    write_report(cfg.report.as_deref(), &report)
}
