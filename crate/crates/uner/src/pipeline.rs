//! The pipeline stages. Each stage reads its inputs from disk or from the
//! previous stage, writes its outputs atomically under the output directory
//! and records counters in a [`StageRecord`].
//!
//! Work is fanned out to a pool sized by the configured concurrency and
//! always collected back in input order, so outputs do not depend on it.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use uner_core::annotate::{annotate_document, AnnotatedCorpus, AnnotatedDocument, ProjectionCounts};
use uner_core::catalog::ClassCatalog;
use uner_core::enrich::{
    run_experiment, Dictionary, ExperimentError, ExperimentResources, KgInputs, Provenance, SurfaceLabelCounts,
};
use uner_core::eval::{per_tag_metrics, EvalReport};
use uner_core::links::{Document, RawDocument};
use uner_core::mapping::{Mapper, MappingCounters};
use uner_core::stats::{CorpusStats, StatsAccumulator};
use uner_core::label::UnerLabel;
use uner_core::text::token_texts;

use crate::config::RunConfig;
use crate::conll::{self, align_files, read_conll, write_document};
use crate::dump::parse_dump_stream;
use crate::error::{Error, Result};
use crate::fsutil::{write_atomic, write_string};
use crate::manifest::StageRecord;
use crate::report;
use crate::sparql::{resolve_all, HttpTransport, Linker, Resolution, SystemClock};
use crate::tables;

pub const DOCUMENTS_FILE: &str = "documents.jsonl";
pub const TARGETS_FILE: &str = "targets.txt";
pub const CLASSES_FILE: &str = "classes.tsv";
pub const UNRESOLVED_FILE: &str = "unresolved.txt";
pub const CORPUS_FILE: &str = "corpus.conll";
pub const STATS_TEXT_FILE: &str = "stats.txt";
pub const STATS_JSON_FILE: &str = "stats.json";
pub const ENTITIES_FILE: &str = "entities.tsv";

pub const SHIPPED_EQUIVALENCES: &str = include_str!("../data/equivalences.tsv");
pub const SHIPPED_PRIORITIES: &str = include_str!("../data/priorities.tsv");

pub fn experiment_file(id: u32) -> String {
    format!("corpus.exp{id}.conll")
}

pub fn dictionary_file(p: Provenance) -> String {
    format!("dictionary.{}.tsv", p.name())
}

pub fn thread_pool(concurrency: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))
}

/// The configured mapping tables, or the shipped ones.
pub fn load_mapper(cfg: &RunConfig) -> Result<Mapper> {
    let eq = match &cfg.equivalences {
        Some(p) => tables::load_equivalence_map(p)?,
        None => tables::parse_equivalence_map(Path::new("<shipped equivalences>"), SHIPPED_EQUIVALENCES)?,
    };
    let pr = match &cfg.priorities {
        Some(p) => tables::load_priority_map(p)?,
        None => tables::parse_priority_map(Path::new("<shipped priorities>"), SHIPPED_PRIORITIES)?,
    };
    Mapper::new(eq, pr).map_err(|e| Error::Invalid(format!("mapping tables disagree: {e}")))
}

/// Runs `body` inside an atomic write; a stage error raised inside the
/// body aborts the write and is returned as is.
fn write_with<F>(path: &Path, body: F) -> Result<u64>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut failure = None;
    let r = write_atomic(path, |w| {
        body(w).map_err(|e| {
            failure = Some(e);
            io::Error::other("stage aborted")
        })
    });
    match (r, failure) {
        (_, Some(e)) => Err(e),
        (r, None) => r,
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

// ---------------------------------------------------------------- extract

#[derive(Debug, Clone, Default)]
pub struct Extracted {
    pub documents: usize,
    pub targets: Vec<String>,
}

fn extract_chunk(pool: &rayon::ThreadPool, chunk: Vec<RawDocument>) -> Vec<(Document, usize, usize)> {
    pool.install(|| {
        chunk
            .into_par_iter()
            .map(|raw| {
                let (doc, ex) = Document::from_raw(&raw);
                (doc, ex.malformed, ex.fragments_stripped)
            })
            .collect()
    })
}

/// Dump files → `documents.jsonl` and the sorted unique target list.
pub fn extract(cfg: &RunConfig, pool: &rayon::ThreadPool, stage: &mut StageRecord) -> Result<Extracted> {
    if cfg.input.is_empty() {
        return Err(Error::Usage("extract needs at least one --input dump file".into()));
    }
    let docs_path = cfg.out.join(DOCUMENTS_FILE);
    let mut targets = BTreeSet::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let (mut documents, mut links, mut malformed_lines, mut malformed_markup, mut fragments, mut duplicates) =
        (0usize, 0usize, 0usize, 0usize, 0usize, 0usize);
    let mut invalid = 0usize;

    write_with(&docs_path, |w| {
        for input in &cfg.input {
            let file = File::open(input).map_err(io_err(input))?;
            let mut reader = parse_dump_stream(BufReader::new(file), cfg.format);
            loop {
                let mut chunk = Vec::with_capacity(cfg.chunk_size);
                for raw in reader.by_ref().take(cfg.chunk_size) {
                    let raw = raw.map_err(|e| Error::data(input, e.line, e.source.to_string()))?;
                    if seen_ids.insert(raw.doc_id.clone()) {
                        chunk.push(raw);
                    } else {
                        duplicates += 1;
                    }
                }
                if chunk.is_empty() {
                    break;
                }
                for (doc, bad, frags) in extract_chunk(pool, chunk) {
                    malformed_markup += bad;
                    fragments += frags;
                    if doc.validate().is_err() {
                        invalid += 1;
                        continue;
                    }
                    documents += 1;
                    links += doc.links.len();
                    targets.extend(doc.links.iter().map(|l| l.target.clone()));
                    serde_json::to_writer(&mut *w, &doc).map_err(|e| Error::Invalid(e.to_string()))?;
                    w.write_all(b"\n").map_err(io_err(&docs_path))?;
                }
            }
            for m in reader.malformed() {
                eprintln!("warning: {}:{}: skipped: {}", input.display(), m.line, m.reason);
            }
            malformed_lines += reader.malformed().len();
        }
        Ok(())
    })?;
    let targets: Vec<String> = targets.into_iter().collect();
    let targets_path = cfg.out.join(TARGETS_FILE);
    tables::write_lines(&targets_path, targets.iter().map(String::as_str))?;

    stage.count("documents", documents);
    stage.count("links", links);
    stage.count("unique_targets", targets.len());
    stage.count("malformed_lines", malformed_lines + duplicates);
    stage.count("malformed_markup", malformed_markup);
    stage.count("fragments_stripped", fragments);
    stage.count("invalid_documents", invalid);
    stage.output(&docs_path);
    stage.output(&targets_path);
    Ok(Extracted { documents, targets })
}

pub fn read_documents(path: &Path) -> Result<impl Iterator<Item = Result<Document>>> {
    let file = File::open(path).map_err(io_err(path))?;
    let path = path.to_path_buf();
    Ok(BufReader::new(file).lines().enumerate().filter_map(move |(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::io(&path, e))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(serde_json::from_str::<Document>(&line).map_err(|e| Error::data(&path, i + 1, e.to_string())))
    }))
}

// ------------------------------------------------------------------- link

/// Targets → class catalog, from the cache and (unless offline) the endpoint.
pub fn link(cfg: &RunConfig, targets: &[String], stage: &mut StageRecord) -> Result<Resolution> {
    let cache_path = cfg.cache_path();
    let cache = tables::load_cache(&cache_path)?;
    let linker = cfg.live_endpoint().map(|endpoint| {
        let transport = Arc::new(HttpTransport::new(endpoint, Duration::from_secs_f64(cfg.timeout_secs)));
        Linker::new(transport, Arc::new(SystemClock::default()), cfg.linker_config())
    });
    let res = resolve_all(targets, &cache, linker.as_ref());
    record_resolution(cfg, &res, &cache_path, cache.len(), stage)?;
    if res.network_exhausted {
        return Err(Error::Network(format!(
            "all {} requests to {} failed",
            res.requests,
            cfg.live_endpoint().unwrap_or_default()
        )));
    }
    Ok(res)
}

/// Writes the cache, class and unresolved files for a resolution.
pub fn record_resolution(
    cfg: &RunConfig,
    res: &Resolution,
    cache_path: &Path,
    cache_before: usize,
    stage: &mut StageRecord,
) -> Result<()> {
    if res.cache.len() != cache_before || !cache_path.exists() {
        tables::save_cache(cache_path, &res.cache)?;
    }
    let classes_path = cfg.out.join(CLASSES_FILE);
    write_string(&classes_path, &tables::format_cache(&res.catalog))?;
    let unresolved_path = cfg.out.join(UNRESOLVED_FILE);
    tables::write_lines(&unresolved_path, res.unresolved.iter().map(String::as_str))?;
    for e in &res.errors {
        eprintln!("warning: unresolved {e}");
    }
    stage.count("targets", res.targets);
    stage.count("cache_hits", res.cache_hits);
    stage.count("queried", res.queried);
    stage.count("requests", res.requests);
    stage.count("resolved", res.catalog.len());
    stage.count("unresolved", res.unresolved.len());
    stage.count("offline", cfg.live_endpoint().is_none());
    stage.output(cache_path);
    stage.output(&classes_path);
    stage.output(&unresolved_path);
    Ok(())
}

// --------------------------------------------------------------- annotate

#[derive(Debug, Clone, Default)]
pub struct Annotated {
    pub corpus: AnnotatedCorpus,
    pub projection: ProjectionCounts,
    pub mapping: MappingCounters,
}

fn annotate_chunk(
    pool: &rayon::ThreadPool,
    chunk: &[Document],
    labels: &BTreeMap<String, UnerLabel>,
) -> Vec<(AnnotatedDocument, ProjectionCounts)> {
    pool.install(|| chunk.par_iter().map(|d| annotate_document(d, labels)).collect())
}

/// Documents + catalog → IOB corpus in `corpus.conll`. Documents without a
/// single entity-bearing sentence are left out.
pub fn annotate(
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
    documents: &Path,
    catalog: &ClassCatalog,
    mapper: &Mapper,
    stage: &mut StageRecord,
) -> Result<Annotated> {
    let mut mapping = MappingCounters::default();
    let labels = mapper.label_catalog(catalog, &mut mapping);
    let mut out = Annotated {
        mapping,
        ..Annotated::default()
    };
    let corpus_path = cfg.out.join(CORPUS_FILE);
    let mut docs_in = 0usize;
    let mut violations = 0usize;
    let bytes = write_with(&corpus_path, |w| {
        let mut docs = read_documents(documents)?;
        loop {
            let chunk: Vec<Document> = docs.by_ref().take(cfg.chunk_size).collect::<Result<_>>()?;
            if chunk.is_empty() {
                break;
            }
            docs_in += chunk.len();
            for (doc, counts) in annotate_chunk(pool, &chunk, &labels) {
                out.projection.merge(&counts);
                violations += doc.sentences.iter().filter(|s| s.validate(true).is_err()).count();
                if doc.sentences.is_empty() {
                    continue;
                }
                write_document(w, &doc).map_err(io_err(&corpus_path))?;
                out.corpus.documents.push(doc);
            }
        }
        Ok(())
    })?;
    if violations > 0 {
        return Err(Error::Invalid(format!("{violations} sentences violate the IOB scheme")));
    }
    let p = &out.projection;
    stage.count("documents", docs_in);
    stage.count("documents_with_entities", out.corpus.documents.len());
    stage.count("labelled_targets", labels.len());
    stage.count("sentences_total", p.sentences_kept + p.sentences_dropped);
    stage.count("sentences_kept", p.sentences_kept);
    stage.count("sentences_dropped", p.sentences_dropped);
    stage.count("spans_projected", p.spans_projected);
    stage.count("spans_unlabelled", p.spans_unlabelled);
    stage.count("spans_truncated", p.spans_truncated);
    stage.count("spans_conflicting", p.spans_conflicting);
    stage.count("classes_skipped", out.mapping.skipped_classes);
    stage.count("classes_unknown", out.mapping.unknown_classes);
    stage.count("targets_null_mapped", out.mapping.null_mapped);
    stage.count("targets_without_class", out.mapping.no_class);
    stage.count("bytes", bytes);
    stage.output(&corpus_path);
    Ok(out)
}

// ------------------------------------------------------------------ stats

pub fn corpus_stats(pool: &rayon::ThreadPool, corpus: &AnnotatedCorpus) -> (CorpusStats, Vec<(String, UnerLabel)>) {
    pool.install(|| {
        corpus
            .documents
            .par_iter()
            .fold(StatsAccumulator::default, |mut acc, d| {
                for s in &d.sentences {
                    acc.add_sentence(s);
                }
                acc
            })
            .reduce(StatsAccumulator::default, |mut a, b| {
                a.merge(b);
                a
            })
            .finish()
    })
}

/// Writes `stats.txt`, `stats.json` and `entities.tsv`.
pub fn stats(
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
    corpus: &AnnotatedCorpus,
    stage: &mut StageRecord,
) -> Result<CorpusStats> {
    let (stats, entities) = corpus_stats(pool, corpus);
    let text_path = cfg.out.join(STATS_TEXT_FILE);
    let json_path = cfg.out.join(STATS_JSON_FILE);
    let entities_path = cfg.out.join(ENTITIES_FILE);
    write_string(&text_path, &report::stats_text(&stats))?;
    let mut json = serde_json::to_string_pretty(&report::stats_json(&stats)).expect("serializable");
    json.push('\n');
    write_string(&json_path, &json)?;
    tables::write_entities(&entities_path, &entities)?;
    stage.count("total_tokens", stats.total_tokens);
    stage.count("entity_tokens", stats.entity_tokens);
    stage.count("entity_count", stats.entity_count);
    stage.count("distinct_entity_count", stats.distinct_entity_count);
    stage.output(&text_path);
    stage.output(&json_path);
    stage.output(&entities_path);
    Ok(stats)
}

// ----------------------------------------------------------------- enrich

/// Entity surface (as token texts joined by spaces) → the link target it
/// most often points to; ties go to the smaller target.
pub fn surface_targets(documents: &Path) -> Result<BTreeMap<String, String>> {
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for doc in read_documents(documents)? {
        for link in doc?.links {
            let surface = token_texts(&link.surface).join(" ");
            *counts.entry(surface).or_default().entry(link.target).or_default() += 1;
        }
    }
    Ok(counts
        .into_iter()
        .filter_map(|(surface, targets)| {
            let mut best: Option<(String, usize)> = None;
            for (t, n) in targets {
                if best.as_ref().is_none_or(|(_, bn)| n > *bn) {
                    best = Some((t, n));
                }
            }
            best.map(|(t, _)| (surface, t))
        })
        .collect())
}

pub fn global_dictionary(pool: &rayon::ThreadPool, corpus: &AnnotatedCorpus) -> Dictionary {
    pool.install(|| {
        corpus
            .documents
            .par_iter()
            .fold(SurfaceLabelCounts::default, |mut acc, d| {
                for s in &d.sentences {
                    acc.add_sentence(s);
                }
                acc
            })
            .reduce(SurfaceLabelCounts::default, |mut a, b| {
                a.merge(b);
                a
            })
            .into_dictionary(false)
    })
}

/// Builds the dictionaries, runs the selected experiments and writes one
/// corpus per experiment.
pub fn enrich(
    cfg: &RunConfig,
    pool: &rayon::ThreadPool,
    corpus: &AnnotatedCorpus,
    mapper: &Mapper,
    documents: Option<&Path>,
    stage: &mut StageRecord,
) -> Result<BTreeMap<u32, AnnotatedCorpus>> {
    let mut experiments = cfg.experiments.clone();
    experiments.sort_unstable();
    experiments.dedup();
    let needs_kg = experiments.iter().any(|e| (4..=7).contains(e));
    let kg = match (&cfg.kg_map, needs_kg) {
        (Some(p), true) => Some(tables::load_kg_map(p)?),
        _ => None,
    };
    let targets = match (documents, &kg) {
        (Some(p), Some(_)) if p.is_file() => Some(surface_targets(p)?),
        _ => None,
    };
    let global = global_dictionary(pool, corpus);
    let resources = ExperimentResources::prepare(
        global,
        kg.as_ref().map(|kg| KgInputs {
            kg,
            equivalences: &mapper.equivalences,
            surface_targets: targets.as_ref(),
        }),
    );
    for p in [Provenance::Global, Provenance::GlobalMulti, Provenance::KgFiltered, Provenance::KgFilteredMulti] {
        if let Some(d) = resources.dictionary(p) {
            let path = cfg.out.join(dictionary_file(p));
            tables::write_dictionary(&path, d)?;
            stage.count(&format!("dictionary_{}", p.name()), d.len());
            stage.output(&path);
        }
    }
    let results: Vec<(u32, std::result::Result<AnnotatedCorpus, ExperimentError>)> = pool.install(|| {
        experiments
            .par_iter()
            .map(|&id| (id, run_experiment(id, corpus, &resources)))
            .collect()
    });
    let mut out = BTreeMap::new();
    let before = corpus.entity_count();
    for (id, r) in results {
        let enriched = r.map_err(|e| match e {
            ExperimentError::MissingResource { .. } => {
                Error::Usage(format!("{e}; set kg_map in the configuration"))
            }
            ExperimentError::Unknown(_) => Error::Usage(e.to_string()),
        })?;
        let path = cfg.out.join(experiment_file(id));
        write_with(&path, |w| conll::emit_conll(&enriched, w).map(|_| ()).map_err(io_err(&path)))?;
        stage.count(&format!("exp{id}_entities_added"), enriched.entity_count() - before);
        stage.output(&path);
        out.insert(id, enriched);
    }
    stage.count("entities_before", before);
    Ok(out)
}

// ------------------------------------------------------------------- eval

pub fn eval_suffix(collapse_depth: Option<usize>) -> String {
    match collapse_depth {
        Some(d) => format!(".d{d}"),
        None => String::new(),
    }
}

/// Scores `system` against `golden` and writes `eval[.dN].txt/json`.
pub fn eval(
    cfg: &RunConfig,
    golden: &Path,
    system: &Path,
    stage: &mut StageRecord,
) -> Result<EvalReport> {
    let pairs = align_files(golden, system)?;
    let report = per_tag_metrics(&pairs, cfg.collapse_depth)
        .map_err(|e| Error::Invalid(format!("{}: {e}", golden.display())))?;
    let suffix = eval_suffix(cfg.collapse_depth);
    let text_path = cfg.out.join(format!("eval{suffix}.txt"));
    let json_path = cfg.out.join(format!("eval{suffix}.json"));
    write_string(&text_path, &report::eval_text(&report, true))?;
    let mut json = serde_json::to_string_pretty(&report::eval_json(&report, true)).expect("serializable");
    json.push('\n');
    write_string(&json_path, &json)?;
    stage.count("tokens", report.token_count);
    stage.count("tags", report.per_tag.len());
    stage.count("counted_tags", report.counted_tags.len());
    stage.count("macro_f1", report::round1(report.macro_avg.f1));
    stage.output(&text_path);
    stage.output(&json_path);
    Ok(report)
}

pub fn load_corpus(path: &Path) -> Result<AnnotatedCorpus> {
    Ok(read_conll(path)?.0)
}

pub fn default_path(cfg: &RunConfig, name: &str) -> PathBuf {
    cfg.out.join(name)
}
