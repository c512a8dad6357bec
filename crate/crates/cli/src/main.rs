//! `modcon`: reduce, check and search constraint artifacts.
//!
//! Exit codes: 0 success, 1 violation or exhausted search, 2 usage or parse
//! error, 3 search cap exceeded.

mod commands;
mod input;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use modcon::oracle::{Pruning, SearchOptions};
use modcon::reductions::Stage;
use serde::Deserialize;
use thiserror::Error;

use commands::{CheckKind, Out, SearchArgs, Status, Structure};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Cap(_) => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Parser, Debug)]
#[command(name = "modcon", version, about = "Reductions between group, lattice, ring, relation and database constraints")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// TOML file with defaults for the flags below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for searches.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed, logged with every run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Search caps, e.g. `nodes=1000000,size=5000`.
    #[arg(long, global = true)]
    caps: Option<String>,
    /// Output file instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply one pipeline edge to an artifact.
    Reduce {
        #[arg(long)]
        from: Stage,
        #[arg(long)]
        to: Stage,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        /// Also require the unit relation to be ∇ (lattice→relalg).
        #[arg(long)]
        nabla: bool,
    },
    /// Evaluate a witness or structure against an artifact.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
    },
    /// Search for a nontrivial model of an artifact.
    Search {
        #[arg(long, value_enum)]
        structure: Structure,
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(long)]
        p: Option<u32>,
        /// Dimension of the vector space (lattice and database searches).
        #[arg(long)]
        n: Option<usize>,
        /// Matrix size (ring searches).
        #[arg(long)]
        d: Option<usize>,
        /// Largest symmetric group degree (group searches).
        #[arg(long = "n-max")]
        n_max: Option<usize>,
        /// Variables of which at least one must be nonzero.
        #[arg(long, value_delimiter = ',')]
        watch: Vec<String>,
    },
    /// Replay the provenance chain of a list of artifacts.
    Verify {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
    },
    /// Canned end-to-end runs.
    Demo {
        #[command(subcommand)]
        which: DemoCommand,
    },
}

#[derive(Subcommand, Debug)]
enum CheckCommand {
    /// Frame axioms on the canonical frame, or on a frame read from JSON.
    Frame {
        #[arg(short = 'i', long = "input")]
        input: Option<PathBuf>,
        #[arg(long)]
        p: Option<u32>,
        #[arg(long)]
        d: Option<usize>,
    },
    /// A witness against an artifact of any stage.
    Assignment(WitnessArgs),
    /// Only the type-1 conjuncts of a relation-algebra artifact.
    Type1(WitnessArgs),
    /// Admissible evaluation of a lattice or Grassmann-Cayley artifact.
    Admissible(WitnessArgs),
    /// A database against a dependency artifact.
    Deps {
        #[arg(short = 'i', long = "input")]
        input: PathBuf,
        #[arg(long)]
        db: PathBuf,
    },
}

#[derive(clap::Args, Debug)]
struct WitnessArgs {
    #[arg(short = 'i', long = "input")]
    input: PathBuf,
    /// Assignment JSON, or a search result carrying one.
    #[arg(short = 'w', long)]
    witness: PathBuf,
    /// Stage of a bare text input (guessed from its first keyword otherwise).
    #[arg(long)]
    from: Option<Stage>,
    /// With --d, fill missing frame variables from the canonical frame.
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    d: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum DemoCommand {
    /// x³ = e through every stage, and the refutation of x = x².
    #[command(name = "z3-pipeline")]
    Z3Pipeline {
        /// Directory for the stage artifacts and witnesses.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
}

/// Values read from `--config`; flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    format: Option<Format>,
    threads: Option<usize>,
    seed: Option<u64>,
    node_cap: Option<u64>,
    size_cap: Option<u128>,
    pruning: Option<Pruning>,
    p: Option<u32>,
    n: Option<usize>,
    d: Option<usize>,
    n_max: Option<usize>,
}

pub struct Settings {
    pub format: Format,
    pub threads: usize,
    pub seed: u64,
    pub node_cap: u64,
    pub size_cap: u128,
    pub pruning: Pruning,
    p: Option<u32>,
    n: Option<usize>,
    d: Option<usize>,
    n_max: Option<usize>,
}

impl Settings {
    pub fn search_options(&self) -> SearchOptions {
        SearchOptions { threads: self.threads, node_cap: self.node_cap, size_cap: self.size_cap, pruning: self.pruning }
    }
}

fn parse_caps(spec: &str, node_cap: &mut u64, size_cap: &mut u128) -> Result<(), CliError> {
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| CliError::Usage(format!("cap `{part}` is not key=value")))?;
        let bad = |_| CliError::Usage(format!("cap `{part}` is not a number"));
        match k.trim() {
            "nodes" | "node_cap" => *node_cap = v.trim().parse().map_err(bad)?,
            "size" | "size_cap" => *size_cap = v.trim().parse().map_err(bad)?,
            other => return Err(CliError::Usage(format!("unknown cap `{other}` (use nodes, size)"))),
        }
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<Config, CliError> {
    let text = input::read_text(path)?;
    toml::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => Config::default(),
    };
    let defaults = SearchOptions::default();
    let mut node_cap = cfg.node_cap.unwrap_or(defaults.node_cap);
    let mut size_cap = cfg.size_cap.unwrap_or(defaults.size_cap);
    if let Some(spec) = &cli.caps {
        parse_caps(spec, &mut node_cap, &mut size_cap)?;
    }
    Ok(Settings {
        format: cli.format.or(cfg.format).unwrap_or_default(),
        threads: cli.threads.or(cfg.threads).unwrap_or(defaults.threads).max(1),
        seed: cli.seed.or(cfg.seed).unwrap_or(0),
        node_cap,
        size_cap,
        pruning: cfg.pruning.unwrap_or(defaults.pruning),
        p: cfg.p,
        n: cfg.n,
        d: cfg.d,
        n_max: cfg.n_max,
    })
}

fn run(cli: Cli) -> Result<Status, CliError> {
    let s = settings(&cli)?;
    info!("seed={} threads={} node_cap={} size_cap={}", s.seed, s.threads, s.node_cap, s.size_cap);
    let out = Out { format: s.format, path: cli.output.clone() };
    let pd = |p: Option<u32>, d: Option<usize>| match (p.or(s.p), d.or(s.d)) {
        (Some(p), Some(d)) => Some((p, d)),
        _ => None,
    };
    match cli.command {
        Command::Reduce { from, to, input, nabla } => commands::reduce(&input, from, to, nabla, &out),
        Command::Check { what } => match what {
            CheckCommand::Frame { input, p, d } => {
                commands::check_frame_cmd(input.as_deref(), p.or(s.p).unwrap_or(2), d.or(s.d).unwrap_or(1), &out)
            }
            CheckCommand::Assignment(w) => {
                commands::check_witness(&w.input, &w.witness, CheckKind::Assignment, w.from, pd(w.p, w.d), &out)
            }
            CheckCommand::Type1(w) => commands::check_witness(&w.input, &w.witness, CheckKind::Type1, w.from, pd(w.p, w.d), &out),
            CheckCommand::Admissible(w) => {
                commands::check_witness(&w.input, &w.witness, CheckKind::Admissible, w.from, pd(w.p, w.d), &out)
            }
            CheckCommand::Deps { input, db } => commands::check_deps(&input, &db, &out),
        },
        Command::Search { structure, input, p, n, d, n_max, watch } => {
            let args = SearchArgs {
                structure,
                input: &input,
                p: p.or(s.p).unwrap_or(2),
                n: n.or(s.n).unwrap_or(4),
                d: d.or(s.d).unwrap_or(2),
                n_max: n_max.or(s.n_max).unwrap_or(4),
                watch,
            };
            commands::search(args, &s.search_options(), &out)
        }
        Command::Verify { input } => commands::verify(&input, &out),
        Command::Demo { which: DemoCommand::Z3Pipeline { dump } } => commands::demo(&s, dump.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
