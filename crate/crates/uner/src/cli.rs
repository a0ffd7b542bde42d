//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use std::collections::BTreeMap;

use clap::{Args, Parser, Subcommand};
use uner_core::annotate::AnnotatedCorpus;
use uner_core::enrich::Experiment;
use uner_core::eval::EvalReport;
use uner_core::stats::CorpusStats;

use crate::config::RunConfig;
use crate::dump::DumpFormat;
use crate::error::{Error, Exit, Result};
use crate::manifest::{RunManifest, StageRecord};
use crate::pipeline::{self, Annotated, Extracted, CLASSES_FILE, CORPUS_FILE, DOCUMENTS_FILE, TARGETS_FILE};
use crate::sparql::Resolution;
use crate::report;
use crate::tables;

#[derive(Debug, Parser)]
#[command(name = "uner", version, about = "Build UNER-annotated NER corpora from hyperlinked encyclopedia dumps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Extract plain text, link spans and the unique target list from dumps.
    Extract,
    /// Resolve link targets to knowledge-base classes.
    Link,
    /// Map classes to UNER labels and write the IOB corpus.
    Annotate,
    /// Corpus statistics and the entity list.
    Stats,
    /// Run dictionary enrichment experiments.
    Enrich,
    /// Score a system corpus against a golden corpus.
    Eval,
    /// extract, link, annotate, stats and (when configured) enrich and eval.
    Pipeline,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Extract => "extract",
            Command::Link => "link",
            Command::Annotate => "annotate",
            Command::Stats => "stats",
            Command::Enrich => "enrich",
            Command::Eval => "eval",
            Command::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Input file(s); what they hold depends on the command.
    #[arg(long, global = true)]
    pub input: Vec<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// SPARQL endpoint URL.
    #[arg(long, global = true)]
    pub endpoint: Option<String>,
    /// Never contact the endpoint; cache misses stay unresolved.
    #[arg(long, global = true)]
    pub offline: bool,
    /// Experiment ids, e.g. 1,4,6.
    #[arg(long, global = true, value_delimiter = ',')]
    pub experiments: Vec<u32>,
    /// Collapse labels to this many segments before scoring.
    #[arg(long, global = true)]
    pub collapse_depth: Option<usize>,
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    /// Dump layout: json_lines or plain_anchored.
    #[arg(long, global = true)]
    pub format: Option<DumpFormat>,
    /// Class cache TSV.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    /// Knowledge-graph class map TSV for experiments 4-7.
    #[arg(long, global = true)]
    pub kg_map: Option<PathBuf>,
    /// Golden corpus for eval.
    #[arg(long, global = true)]
    pub golden: Option<PathBuf>,
    /// System corpus for eval.
    #[arg(long, global = true)]
    pub system: Option<PathBuf>,
}

impl Flags {
    /// File, then environment, then flags.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        cfg.apply_env();
        if !self.input.is_empty() {
            cfg.input = self.input.clone();
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(e) = &self.endpoint {
            cfg.endpoint = Some(e.clone());
        }
        cfg.offline |= self.offline;
        if !self.experiments.is_empty() {
            cfg.experiments = self.experiments.clone();
        }
        if self.collapse_depth.is_some() {
            cfg.collapse_depth = self.collapse_depth;
        }
        if let Some(c) = self.concurrency {
            cfg.concurrency = c;
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        for (flag, slot) in [
            (&self.cache, &mut cfg.cache),
            (&self.kg_map, &mut cfg.kg_map),
            (&self.golden, &mut cfg.golden),
            (&self.system, &mut cfg.system),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        Ok(cfg)
    }
}

fn first_input_or(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.input.first().cloned().unwrap_or_else(|| cfg.out.join(default))
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::Usage(format!("{what} not found: {}", path.display())))
    }
}

/// Experiments to run: as configured, else 1-3 plus 4-7 when a graph map is set.
fn selected_experiments(cfg: &RunConfig) -> Vec<u32> {
    if !cfg.experiments.is_empty() {
        return cfg.experiments.clone();
    }
    Experiment::ALL
        .iter()
        .map(|e| e.id())
        .filter(|id| *id <= 3 || cfg.kg_map.is_some())
        .collect()
}

fn stage<T>(manifest: &mut RunManifest, name: &str, f: impl FnOnce(&mut StageRecord) -> Result<T>) -> Result<T> {
    let mut record = StageRecord::start(name);
    let r = f(&mut record);
    manifest.push(record);
    r
}

pub fn cmd_extract(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<Extracted> {
    let pool = pipeline::thread_pool(cfg.concurrency)?;
    stage(manifest, "extract", |s| pipeline::extract(cfg, &pool, s))
}

/// Resolves the target list named by `--input` (default: the extract output).
pub fn cmd_link(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<Resolution> {
    let targets_path = first_input_or(cfg, TARGETS_FILE);
    require_file(&targets_path, "target list")?;
    stage(manifest, "link", |s| {
        let targets = tables::load_targets(&targets_path)?;
        pipeline::link(cfg, &targets, s)
    })
}

pub fn cmd_annotate(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<Annotated> {
    let docs = first_input_or(cfg, DOCUMENTS_FILE);
    require_file(&docs, "documents file")?;
    let mapper = pipeline::load_mapper(cfg)?;
    let classes = cfg.out.join(CLASSES_FILE);
    let catalog = if classes.is_file() {
        tables::load_cache(&classes)?
    } else {
        tables::load_cache(&cfg.cache_path())?
    };
    let pool = pipeline::thread_pool(cfg.concurrency)?;
    stage(manifest, "annotate", |s| pipeline::annotate(cfg, &pool, &docs, &catalog, &mapper, s))
}

pub fn cmd_stats(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<CorpusStats> {
    let corpus_path = first_input_or(cfg, CORPUS_FILE);
    require_file(&corpus_path, "corpus")?;
    let pool = pipeline::thread_pool(cfg.concurrency)?;
    stage(manifest, "stats", |s| {
        let corpus = pipeline::load_corpus(&corpus_path)?;
        pipeline::stats(cfg, &pool, &corpus, s)
    })
}

/// Runs `experiments` (all applicable ones when empty) over the corpus.
pub fn cmd_enrich(
    cfg: &RunConfig,
    experiments: &[u32],
    manifest: &mut RunManifest,
) -> Result<BTreeMap<u32, AnnotatedCorpus>> {
    let corpus_path = first_input_or(cfg, CORPUS_FILE);
    require_file(&corpus_path, "corpus")?;
    let mapper = pipeline::load_mapper(cfg)?;
    let mut cfg = cfg.clone();
    cfg.experiments = experiments.to_vec();
    cfg.experiments = selected_experiments(&cfg);
    let docs = cfg.out.join(DOCUMENTS_FILE);
    let pool = pipeline::thread_pool(cfg.concurrency)?;
    stage(manifest, "enrich", |s| {
        let corpus = pipeline::load_corpus(&corpus_path)?;
        pipeline::enrich(&cfg, &pool, &corpus, &mapper, Some(&docs), s)
    })
}

pub fn cmd_eval(cfg: &RunConfig, golden: &Path, system: &Path, manifest: &mut RunManifest) -> Result<EvalReport> {
    require_file(golden, "golden corpus")?;
    require_file(system, "system corpus")?;
    stage(manifest, "eval", |s| pipeline::eval(cfg, golden, system, s))
}

/// extract, link, annotate and stats; then enrich when experiments are
/// configured and eval when a golden corpus is.
pub fn cmd_pipeline(cfg: &RunConfig, manifest: &mut RunManifest) -> Result<AnnotatedCorpus> {
    if cfg.input.is_empty() {
        return Err(Error::Usage("pipeline needs at least one --input dump file".into()));
    }
    let mapper = pipeline::load_mapper(cfg)?;
    let pool = pipeline::thread_pool(cfg.concurrency)?;
    let extracted = stage(manifest, "extract", |s| pipeline::extract(cfg, &pool, s))?;
    let resolution = stage(manifest, "link", |s| pipeline::link(cfg, &extracted.targets, s))?;
    let docs = cfg.out.join(DOCUMENTS_FILE);
    let annotated = stage(manifest, "annotate", |s| {
        pipeline::annotate(cfg, &pool, &docs, &resolution.catalog, &mapper, s)
    })?;
    let corpus = annotated.corpus;
    stage(manifest, "stats", |s| pipeline::stats(cfg, &pool, &corpus, s))?;
    if !cfg.experiments.is_empty() {
        stage(manifest, "enrich", |s| pipeline::enrich(cfg, &pool, &corpus, &mapper, Some(&docs), s))?;
    }
    if let Some(golden) = &cfg.golden {
        let system = cfg.system.clone().unwrap_or_else(|| cfg.out.join(CORPUS_FILE));
        stage(manifest, "eval", |s| pipeline::eval(cfg, golden, &system, s))?;
    }
    Ok(corpus)
}

/// Runs one command, printing a short summary.
pub fn execute(command: Command, cfg: &RunConfig, manifest: &mut RunManifest) -> Result<()> {
    match command {
        Command::Extract => {
            let x = cmd_extract(cfg, manifest)?;
            println!("extracted {} documents, {} unique targets", x.documents, x.targets.len());
        }
        Command::Link => {
            let r = cmd_link(cfg, manifest)?;
            println!(
                "resolved {} of {} targets ({} unresolved)",
                r.catalog.len(),
                r.targets,
                r.unresolved.len()
            );
        }
        Command::Annotate => {
            let a = cmd_annotate(cfg, manifest)?;
            println!(
                "kept {} sentences, dropped {}",
                a.projection.sentences_kept, a.projection.sentences_dropped
            );
        }
        Command::Stats => print!("{}", report::stats_text(&cmd_stats(cfg, manifest)?)),
        Command::Enrich => {
            for (id, c) in cmd_enrich(cfg, &cfg.experiments, manifest)? {
                println!("experiment {id}: {} entities", c.entity_count());
            }
        }
        Command::Eval => {
            let golden = cfg
                .golden
                .clone()
                .ok_or_else(|| Error::Usage("eval needs --golden".into()))?;
            let system = cfg.system.clone().unwrap_or_else(|| first_input_or(cfg, CORPUS_FILE));
            print!("{}", report::eval_text(&cmd_eval(cfg, &golden, &system, manifest)?, true));
        }
        Command::Pipeline => {
            cmd_pipeline(cfg, manifest)?;
            println!("pipeline finished; outputs in {}", cfg.out.display());
        }
    }
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Exit::Usage as u8 } else { Exit::Success as u8 };
        }
    };
    let cfg = match cli.flags.resolve().and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit() as u8;
        }
    };
    if let Err(e) = std::fs::create_dir_all(&cfg.out) {
        eprintln!("error: cannot create {}: {e}", cfg.out.display());
        return Exit::Usage as u8;
    }
    let mut manifest = RunManifest::new(cli.command.name(), &cfg);
    let result = execute(cli.command, &cfg, &mut manifest);
    let code = match &result {
        Ok(()) => {
            manifest.status = "ok";
            Exit::Success
        }
        Err(e) => {
            eprintln!("error: {e}");
            manifest.status = "failed";
            manifest.error = Some(e.to_string());
            e.exit()
        }
    };
    manifest.exit_code = code as u8;
    if let Err(e) = manifest.write(&cfg.out) {
        eprintln!("error: cannot write manifest: {e}");
        if code == Exit::Success {
            return Exit::Data as u8;
        }
    }
    code as u8
}
