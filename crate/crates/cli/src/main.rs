use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use secmsg_core::pipeline::{self, parse_cutoff, BackendKind, PipelineConfig, Stage, StageOutcome};
use secmsg_core::Execution;
use tracing_subscriber::EnvFilter;

/// Mine security patch commit messages and measure how informative they are.
#[derive(Parser, Debug)]
#[command(name = "secmsg", version, about)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalOpts {
    /// TOML run manifest; relative paths in it resolve against its directory.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for stage artifacts and reports.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads; 1 runs everything sequentially.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u16).range(1..))]
    jobs: Option<u16>,

    /// Bot author list, one name per line.
    #[arg(long, global = true, value_name = "PATH")]
    bot_list: Option<PathBuf>,

    /// Bot message templates, one regex per line.
    #[arg(long, global = true, value_name = "PATH")]
    template_list: Option<PathBuf>,

    /// Non-English verdicts below this confidence are kept.
    #[arg(long, global = true, value_name = "X", value_parser = parse_threshold)]
    lang_threshold: Option<f64>,

    /// Entity dictionary (CATEGORY<TAB>phrase or /regex/ lines).
    #[arg(long, global = true, value_name = "PATH")]
    dictionary: Option<PathBuf>,

    /// Commit URL patterns (name<TAB>regex lines).
    #[arg(long, global = true, value_name = "PATH")]
    patterns: Option<PathBuf>,

    /// Conventional Commits types, comma-separated.
    #[arg(long, global = true, value_name = "LIST")]
    ccs_types: Option<String>,

    /// Time-window cutoffs (YYYY-MM-DD), comma-separated, increasing.
    #[arg(long, global = true, value_name = "LIST")]
    cutoffs: Option<String>,

    /// Smallest ecosystem group kept in the ecosystem comparison.
    #[arg(long, global = true, value_name = "N")]
    min_group_size: Option<usize>,

    /// Published distributions used as comparison baselines.
    #[arg(long, global = true, value_name = "PATH")]
    baseline: Option<PathBuf>,

    /// Log more (repeatable); RUST_LOG overrides.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Args, Debug, Default)]
struct IngestOpts {
    /// OSV dump: directory, .zip, or single JSON file.
    #[arg(long, value_name = "PATH")]
    osv: Option<PathBuf>,
    /// NVD dump: directory or JSON feed file.
    #[arg(long, value_name = "PATH")]
    nvd: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ResolveOpts {
    /// Local revision store: JSONL file or directory of git repositories.
    #[arg(long, value_name = "PATH", conflicts_with = "archive")]
    store: Option<PathBuf>,
    /// Resolve against the software archive API instead of a local store.
    #[arg(long)]
    archive: bool,
    /// Archive API base URL (token comes from SECMSG_ARCHIVE_TOKEN).
    #[arg(long, value_name = "URL", requires = "archive")]
    archive_url: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse OSV and NVD dumps and merge them into records.jsonl.
    Ingest(IngestOpts),
    /// Pull patch commit references out of record URLs.
    Extract,
    /// Resolve commit hashes to messages.
    Resolve(ResolveOpts),
    /// Drop duplicate, bot and non-English messages.
    Clean,
    /// Extract entities and assign informativeness levels.
    Classify,
    /// Write the comparison reports.
    Analyze,
    /// Run every stage in order.
    RunAll {
        #[command(flatten)]
        ingest: IngestOpts,
        #[command(flatten)]
        resolve: ResolveOpts,
    },
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err("must be in (0, 1]".into())
    }
}

fn build_config(g: &GlobalOpts, ingest: Option<&IngestOpts>, resolve: Option<&ResolveOpts>) -> Result<PipelineConfig> {
    let mut cfg = match &g.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let set = |slot: &mut Option<PathBuf>, v: &Option<PathBuf>| {
        if v.is_some() {
            slot.clone_from(v);
        }
    };
    set(&mut cfg.bot_list, &g.bot_list);
    set(&mut cfg.template_list, &g.template_list);
    set(&mut cfg.dictionary, &g.dictionary);
    set(&mut cfg.patterns, &g.patterns);
    set(&mut cfg.baseline, &g.baseline);
    if let Some(out) = &g.out {
        cfg.out.clone_from(out);
    }
    if let Some(t) = g.lang_threshold {
        cfg.lang_threshold = t;
    }
    if let Some(types) = &g.ccs_types {
        cfg.ccs_types = Some(types.clone());
    }
    if let Some(list) = &g.cutoffs {
        cfg.cutoffs = list.split(',').map(parse_cutoff).collect::<Result<_, _>>()?;
    }
    if let Some(n) = g.min_group_size {
        cfg.min_group_size = n;
    }
    if let Some(i) = ingest {
        set(&mut cfg.osv_dump, &i.osv);
        set(&mut cfg.nvd_dump, &i.nvd);
    }
    if let Some(r) = resolve {
        if r.store.is_some() {
            cfg.backend = BackendKind::Local;
            set(&mut cfg.local_store, &r.store);
        }
        if r.archive {
            cfg.backend = BackendKind::Archive;
        }
        if r.archive_url.is_some() {
            cfg.archive_url.clone_from(&r.archive_url);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(outcome: &StageOutcome) {
    println!("{}: {}", outcome.stage, outcome.summary);
    for f in &outcome.files {
        println!("  wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let exec = match g.jobs {
        Some(1) => Execution::Sequential,
        Some(n) => {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n.into())
                .build_global()
                .context("configuring worker threads")?;
            Execution::Parallel
        }
        None => Execution::Parallel,
    };
    let stage = |s: Stage, cfg: &PipelineConfig| -> Result<()> {
        let outcome = pipeline::run_stage(s, cfg, exec).with_context(|| format!("stage {s} failed"))?;
        report(&outcome);
        Ok(())
    };
    match &cli.command {
        Command::Ingest(opts) => stage(Stage::Ingest, &build_config(g, Some(opts), None)?),
        Command::Extract => stage(Stage::Extract, &build_config(g, None, None)?),
        Command::Resolve(opts) => stage(Stage::Resolve, &build_config(g, None, Some(opts))?),
        Command::Clean => stage(Stage::Clean, &build_config(g, None, None)?),
        Command::Classify => stage(Stage::Classify, &build_config(g, None, None)?),
        Command::Analyze => stage(Stage::Analyze, &build_config(g, None, None)?),
        Command::RunAll { ingest, resolve } => {
            let cfg = build_config(g, Some(ingest), Some(resolve))?;
            for outcome in pipeline::run_all(&cfg, exec).context("run-all failed")? {
                report(&outcome);
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let default_level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default_level)))
        .with_writer(std::io::stderr)
        .init();
    tracing::debug!(?cli, "parsed arguments");
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
