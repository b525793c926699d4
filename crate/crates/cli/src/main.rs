use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abspec::config::TrainConfig;
use abspec_cli::{
    cmd_build_kb, cmd_eval, cmd_extract, cmd_query, cmd_train, render_alerts, require, CliError,
    CliResult, EvalOptions, EvalTask, PipelineConfig, Task,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "abspec", version, about = "Mine antibody specificity statements into an RRID knowledge base")]
struct Cli {
    /// Pipeline config (TOML); flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads; 0 uses one per core.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct TrainOverrides {
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    epochs: Option<usize>,

    /// Any training setting as KEY=VALUE, e.g. `head_variant="AOA"` or `l2_weight=0.01`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Extract specificity snippets and RRID mentions as JSON lines.
    Extract {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a specificity (1) or RRID-linking (2) model.
    Train {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
        #[command(flatten)]
        train: TrainOverrides,
    },
    /// Cross-validate (or score trained models) on a labeled dataset.
    Eval {
        #[arg(long, value_enum)]
        task: EvalTask,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        stratified: bool,
        #[arg(long)]
        spec_model: Option<PathBuf>,
        #[arg(long)]
        link_model: Option<PathBuf>,
        #[arg(long)]
        dictionary: Option<PathBuf>,
        /// Also write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        train: TrainOverrides,
    },
    /// Run the full workflow over a corpus into a knowledge base.
    BuildKb {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        spec_model: Option<PathBuf>,
        #[arg(long)]
        link_model: Option<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        /// Write the whole store as JSON lines.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Print stored statements about an RRID.
    Query {
        #[arg(long)]
        kb: Option<PathBuf>,
        /// `AB_<digits>` or `RRID:AB_<digits>`.
        rrid: String,
    },
}

fn apply(mut cfg: TrainConfig, o: &TrainOverrides) -> CliResult<TrainConfig> {
    if !o.set.is_empty() {
        let mut table: toml::Table = toml::from_str(&cfg.to_toml()).expect("config round-trips");
        for kv in &o.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
            let value = format!("v = {v}")
                .parse::<toml::Table>()
                .ok()
                .and_then(|mut t| t.remove("v"))
                .unwrap_or_else(|| toml::Value::String(v.to_string()));
            table.insert(k.trim().to_string(), value);
        }
        cfg = TrainConfig::from_toml(&table.to_string())?;
    }
    if let Some(s) = o.seed {
        cfg.seed = s;
    }
    if let Some(e) = o.epochs {
        cfg.epochs = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let pc = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    let workers = cli.workers.unwrap_or(pc.workers);
    if workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| CliError::usage(format!("worker pool: {e}")))?;
    }
    match cli.command {
        Command::Extract { corpus, out } => {
            let corpus = require(corpus, &pc.corpus_dir, "--corpus")?;
            let s = cmd_extract(&corpus, &out)?;
            log::info!(
                "{} articles: {} specificity snippets, {} RRID mentions",
                s.articles,
                s.specificity_snippets,
                s.rrid_mentions
            );
        }
        Command::Train { task, data, out, dictionary, train } => {
            let (data_cfg, out_cfg) = match task {
                Task::Specificity => (&pc.spec_data, &pc.spec_model),
                Task::Linking => (&pc.link_data, &pc.link_model),
            };
            let data = require(data, data_cfg, "--data")?;
            let out = require(out, out_cfg, "--out")?;
            let cfg = apply(pc.train.clone(), &train)?;
            let dictionary = dictionary.or(pc.dictionary.clone());
            let outcome = cmd_train(task, &data, &cfg, dictionary.as_deref(), &out)?;
            if let Some(r) = outcome.report {
                log::info!(
                    "{} examples, best epoch {} ({:?} loss {:.4})",
                    outcome.examples,
                    r.best_epoch,
                    r.monitor,
                    r.monitor_loss[r.best_epoch - 1]
                );
            }
        }
        Command::Eval { task, data, k, stratified, spec_model, link_model, dictionary, out, train } => {
            let configured = match task {
                EvalTask::Specificity => &pc.spec_data,
                _ => &pc.link_data,
            };
            let data = require(data, configured, "--data")?;
            let opts = EvalOptions {
                config: apply(pc.train.clone(), &train)?,
                k: k.or(pc.k).unwrap_or(5),
                stratified: stratified || pc.stratified,
                spec_model,
                link_model,
                dictionary: dictionary.or(pc.dictionary.clone()),
            };
            let report = cmd_eval(task, &data, &opts)?;
            if let Some(path) = out {
                write(&path, &report.to_json())?;
            }
            print!("{}", report.render_table());
        }
        Command::BuildKb { corpus, spec_model, link_model, kb, export } => {
            let corpus = require(corpus, &pc.corpus_dir, "--corpus")?;
            let spec = require(spec_model, &pc.spec_model, "--spec-model")?;
            let link = require(link_model, &pc.link_model, "--link-model")?;
            let kb = require(kb, &pc.kb, "--kb")?;
            let s = cmd_build_kb(&corpus, &spec, &link, &kb, export.as_deref())?;
            log::info!("{} articles, {} entries, {} new", s.articles, s.entries.len(), s.inserted);
        }
        Command::Query { kb, rrid } => {
            let kb = require(kb, &pc.kb, "--kb")?;
            let entries = cmd_query(&kb, &rrid)?;
            print!("{}", render_alerts(&rrid, &entries));
        }
    }
    Ok(())
}

fn write(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "info",
        1 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
