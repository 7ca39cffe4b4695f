use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use softrule_kge::config::RunConfig;
use softrule_kge::eval::TieMode;
use softrule_kge::pipeline;
use softrule_kge::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Knowledge-graph embeddings guided by soft rules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propositionalize rules and write groundings + unlabeled triples.
    Ground {
        #[command(flatten)]
        common: Common,
        /// Output directory (defaults to the checkpoint directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train and persist the best checkpoint.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Filtered link-prediction metrics on the test split.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Per-triple rank dump (TSV).
        #[arg(long)]
        rank_dump: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Dump (triple, truth, soft label) for every unlabeled triple.
    Predict {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Kv,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    Mid,
    Optimistic,
    Pessimistic,
}

impl From<TieArg> for TieMode {
    fn from(t: TieArg) -> Self {
        match t {
            TieArg::Mid => TieMode::Mid,
            TieArg::Optimistic => TieMode::Optimistic,
            TieArg::Pessimistic => TieMode::Pessimistic,
        }
    }
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long)]
    valid: Option<PathBuf>,
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    neg_ratio: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    slack_c: Option<f64>,
    #[arg(long)]
    inner_epochs: Option<usize>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long)]
    max_epochs: Option<usize>,
    #[arg(long)]
    min_confidence: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    tie_mode: Option<TieArg>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v.into();
                }
            };
        }
        set!(self.train, c.paths.train);
        set!(self.valid, c.paths.valid);
        set!(self.test, c.paths.test);
        set!(self.rules, c.paths.rules);
        set!(self.checkpoint_dir, c.paths.checkpoint_dir);
        set!(self.dim, c.train.dim);
        set!(self.neg_ratio, c.train.negatives);
        set!(self.lr, c.train.learning_rate);
        set!(self.l2, c.train.l2);
        set!(self.slack_c, c.train.slack_c);
        set!(self.inner_epochs, c.train.inner_epochs);
        set!(self.batches, c.train.batches);
        set!(self.max_epochs, c.train.max_epochs);
        set!(self.min_confidence, c.rules.min_confidence);
        set!(self.seed, c.train.seed);
        set!(self.threads, c.threads);
        if let Some(t) = self.tie_mode {
            c.train.tie_mode = t.into();
            c.eval.tie_mode = t.into();
        }
        if self.min_confidence.is_some() && c.paths.rules.is_none() {
            return Err(Error::Config("--min-confidence given without a rule file".into()));
        }
        c.validate()?;
        Ok(c)
    }
}

fn checkpoint_path(explicit: Option<PathBuf>, config: &RunConfig) -> Result<PathBuf> {
    match explicit {
        Some(p) => Ok(p),
        None => Ok(config.require_checkpoint_dir()?.join(pipeline::CHECKPOINT_FILE)),
    }
}

fn init_threads(config: &RunConfig) {
    if config.threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build_global();
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ground { common, out } => {
            let config = common.resolve()?;
            init_threads(&config);
            let out = match out {
                Some(o) => o,
                None => config.require_checkpoint_dir()?.to_owned(),
            };
            let stats = pipeline::cmd_ground(&config, &out)?;
            println!("{stats}");
        }
        Command::Train { common } => {
            let config = common.resolve()?;
            init_threads(&config);
            let summary = pipeline::cmd_train(&config)?;
            println!("{}", summary.stats);
            for e in &summary.log.epochs {
                println!("{e}");
            }
            println!("checkpoint={}", summary.checkpoint.display());
        }
        Command::Eval {
            common,
            checkpoint,
            rank_dump,
            format,
        } => {
            let mut config = common.resolve()?;
            init_threads(&config);
            if rank_dump.is_some() {
                config.eval.rank_dump = rank_dump;
            }
            let ck = checkpoint_path(checkpoint, &config)?;
            let report = pipeline::cmd_eval(&config, &ck)?;
            match format {
                Format::Table => print!("{}", report.to_table()),
                Format::Kv => print!("{}", report.to_key_values()),
            }
        }
        Command::Predict {
            common,
            checkpoint,
            output,
        } => {
            let config = common.resolve()?;
            init_threads(&config);
            let ck = checkpoint_path(checkpoint, &config)?;
            match output {
                Some(path) => {
                    let file = File::create(&path).map_err(|e| Error::Io { path: path.clone(), source: e })?;
                    pipeline::cmd_predict(&config, &ck, &mut BufWriter::new(file))?;
                }
                None => {
                    pipeline::cmd_predict(&config, &ck, &mut io::stdout().lock())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
