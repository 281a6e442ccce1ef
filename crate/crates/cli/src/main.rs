use std::path::PathBuf;
use std::process::ExitCode;

use acesum::commands::{cmd_ablate, cmd_build, cmd_eval, cmd_label, cmd_summarize, cmd_train};
use acesum::config::AppConfig;
use acesum::service::serve;
use acesum::AppError;
use acesum_core::mil::Pooling;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acesum", version, about = "Aspect-controllable opinion summarization")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, env = "ACESUM_CONFIG")]
    config: Option<PathBuf>,
    #[command(flatten)]
    paths: PathArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PathArgs {
    /// Review corpus, JSON lines.
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    /// Aspect seed words, JSON lines.
    #[arg(long, global = true)]
    aspects: Option<PathBuf>,
    /// Word vectors, one `token v1 .. vd` per line.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Controller model file.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Synthetic dataset output.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Evaluation set with reference summaries.
    #[arg(long, global = true)]
    eval_set: Option<PathBuf>,
    /// Silver label output.
    #[arg(long, global = true)]
    labels: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write seed-word silver labels and print positive rates.
    Label,
    /// Train the controller induction model.
    Train {
        /// Optimizer steps.
        #[arg(long)]
        steps: Option<usize>,
        /// Peak learning rate.
        #[arg(long)]
        learning_rate: Option<f64>,
        /// Linear warm-up steps.
        #[arg(long)]
        warmup_steps: Option<usize>,
        /// Attention heads per pooling level.
        #[arg(long)]
        heads: Option<usize>,
        /// mip, max, mean or attention.
        #[arg(long)]
        pooling: Option<Pooling>,
        /// Initialization and sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Build the synthetic controller dataset.
    Build {
        /// Keywords per controller set.
        #[arg(long)]
        keyword_count: Option<usize>,
        /// Token budget of controller sentences.
        #[arg(long)]
        token_budget: Option<usize>,
        /// Cap on examples per entity.
        #[arg(long)]
        max_examples_per_entity: Option<usize>,
        /// Pseudo-summary sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print one summary as JSON.
    Summarize {
        /// Entity id.
        #[arg(long)]
        entity: String,
        /// Aspect name; repeat for several. None gives a general summary.
        #[arg(long = "aspect", id = "aspect")]
        aspects: Vec<String>,
    },
    /// ROUGE of every system on the evaluation set.
    Eval {
        /// Print JSON records instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Pooling ablation on planted corpora.
    Ablate {
        /// Number of seeds, each with its own corpus.
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Entities per corpus.
        #[arg(long, default_value_t = 20)]
        entities: usize,
        /// Reviews per entity.
        #[arg(long, default_value_t = 10)]
        reviews: usize,
    },
    /// Serve summaries over HTTP.
    Serve {
        /// Bind address.
        #[arg(long)]
        host: Option<String>,
        /// Bind port.
        #[arg(long)]
        port: Option<u16>,
    },
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn build_config(cli: &Cli) -> Result<AppConfig, AppError> {
    let mut config = match &cli.config {
        Some(path) => AppConfig::load(path)?,
        None => AppConfig::default(),
    };
    config.apply_env();
    let p = &cli.paths;
    let paths = &mut config.paths;
    for (slot, flag) in [
        (&mut paths.corpus, &p.corpus),
        (&mut paths.aspects, &p.aspects),
        (&mut paths.embeddings, &p.embeddings),
        (&mut paths.model, &p.model),
        (&mut paths.dataset, &p.dataset),
        (&mut paths.eval_set, &p.eval_set),
        (&mut paths.labels, &p.labels),
    ] {
        if flag.is_some() {
            *slot = flag.clone();
        }
    }
    match &cli.command {
        Command::Train { steps, learning_rate, warmup_steps, heads, pooling, seed } => {
            let t = &mut config.train;
            set(&mut t.steps, *steps);
            set(&mut t.learning_rate, *learning_rate);
            set(&mut t.warmup_steps, *warmup_steps);
            set(&mut t.heads, *heads);
            set(&mut t.pooling, *pooling);
            set(&mut t.seed, *seed);
        }
        Command::Build { keyword_count, token_budget, max_examples_per_entity, seed } => {
            let s = &mut config.synthesis;
            set(&mut s.keyword_count, *keyword_count);
            set(&mut s.token_budget, *token_budget);
            set(&mut s.max_examples_per_entity, *max_examples_per_entity);
            set(&mut s.seed, *seed);
        }
        Command::Serve { host, port } => {
            set(&mut config.service.host, host.clone());
            set(&mut config.service.port, *port);
        }
        _ => {}
    }
    config.validate()?;
    Ok(config)
}

fn run(cli: Cli) -> Result<(), AppError> {
    let config = build_config(&cli)?;
    match cli.command {
        Command::Label => println!("{}", cmd_label(&config)?),
        Command::Train { .. } => {
            let out = cmd_train(&config)?;
            println!("wrote {} after {} steps (version {})", out.model.display(), out.steps, out.model_version);
        }
        Command::Build { .. } => {
            let stats = cmd_build(&config)?;
            println!("{} examples from {} entities", stats.total, stats.per_entity.len());
        }
        Command::Summarize { entity, aspects } => println!("{}", cmd_summarize(&config, &entity, &aspects)?),
        Command::Eval { json } => {
            let report = cmd_eval(&config)?;
            if json {
                print!("{}", report.to_records());
            } else {
                print!("{report}");
            }
        }
        Command::Ablate { seeds, entities, reviews } => {
            for (seed, report) in cmd_ablate(seeds, entities, reviews)?.iter().enumerate() {
                println!("seed {seed}\n{report}");
            }
        }
        Command::Serve { .. } => {
            let runtime = tokio::runtime::Runtime::new().map_err(|e| AppError::Io("tokio runtime".into(), e))?;
            runtime.block_on(serve(&config))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
