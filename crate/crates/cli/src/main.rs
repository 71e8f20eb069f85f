use std::io::Write;
use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand};
use stepscript_cli::{
    cmd_align, cmd_localize, cmd_oracle_check, cmd_stats, cmd_supervised, cmd_synth, CliError, Method, RunConfig,
};

#[derive(Parser)]
#[command(name = "stepscript", version, about = "Discover and localize the main steps of narrated items")]
struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Seed for the alignment restarts and generated corpora
    #[arg(long)]
    seed: Option<u64>,
    /// Task name written to the results table
    #[arg(long)]
    task: Option<String>,
}

#[derive(Args)]
struct Inputs {
    /// Narration token file (JSON)
    #[arg(long)]
    tokens: Option<PathBuf>,
    /// Directory of per-item feature files (.saln or .csv)
    #[arg(long)]
    features: Option<PathBuf>,
    /// Ground-truth annotation file (JSON)
    #[arg(long)]
    annotation: Option<PathBuf>,
    /// Step counts; repeat or comma-separate.
    #[arg(short, long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Fixed ridge regularization.
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Align the narration and extract the main steps.
    Align {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// External token cost CSV.
        #[arg(long)]
        cost: Option<PathBuf>,
        /// Ground-truth script (JSON list of labels) to score against.
        #[arg(long)]
        script: Option<PathBuf>,
    },
    /// Localize the steps in the feature streams.
    Localize {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Precomputed step file.
        #[arg(long)]
        steps: Option<PathBuf>,
        /// Methods to run; repeat or comma-separate.
        #[arg(short, long, value_enum, value_delimiter = ',')]
        method: Vec<Method>,
        /// Seconds added before each caption.
        #[arg(long)]
        before: Option<f64>,
        /// Seconds added after each caption.
        #[arg(long)]
        after: Option<f64>,
    },
    /// Cross-validated supervised localization.
    Supervised {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Outer cross-validation folds
        #[arg(long)]
        folds: Option<usize>,
        /// Candidate lambdas for the inner cross-validation.
        #[arg(long, value_delimiter = ',')]
        lambda_grid: Vec<f64>,
    },
    /// Statistics of an annotated corpus, as JSON.
    Stats {
        annotation: PathBuf,
        /// Write to this file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Number of items to generate
        #[arg(long)]
        items: Option<usize>,
        /// Write features as CSV instead of binary.
        #[arg(long)]
        csv: bool,
    },
    /// Compare solver output with exhaustive enumeration.
    OracleCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        inputs: Inputs,
        /// Random instances per problem when no input is given.
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
}

fn configure(common: &Common, inputs: Option<&Inputs>) -> Result<RunConfig, CliError> {
    let mut config = RunConfig::load(common.config.as_deref())?;
    if let Some(o) = &common.output {
        config.output = o.clone();
    }
    if let Some(s) = common.seed {
        config.seed = s;
    }
    if let Some(t) = &common.task {
        config.task = t.clone();
    }
    if let Some(i) = inputs {
        for (slot, flag) in [
            (&mut config.tokens, &i.tokens),
            (&mut config.features, &i.features),
            (&mut config.annotation, &i.annotation),
        ] {
            if flag.is_some() {
                slot.clone_from(flag);
            }
        }
        if !i.k.is_empty() {
            config.k = i.k.clone();
        }
        if i.lambda.is_some() {
            config.lambda = i.lambda;
        }
    }
    Ok(config)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Align {
            common,
            inputs,
            cost,
            script,
        } => {
            let mut config = configure(&common, Some(&inputs))?;
            config.cost = cost.or(config.cost);
            config.script = script.or(config.script);
            let out = cmd_align(&config)?;
            for (k, steps) in config.k.iter().zip(&out.steps) {
                let labels: Vec<String> = steps.labels.iter().map(ToString::to_string).collect();
                println!("K={k}: {}", labels.join(" | "));
            }
        }
        Command::Localize {
            common,
            inputs,
            steps,
            method,
            before,
            after,
        } => {
            let mut config = configure(&common, Some(&inputs))?;
            config.steps = steps.or(config.steps);
            if !method.is_empty() {
                config.methods = method;
            }
            config.before_s = before.unwrap_or(config.before_s);
            config.after_s = after.unwrap_or(config.after_s);
            for r in cmd_localize(&config)? {
                println!("{} K={} F1={:.4} [{:.4}, {:.4}]", r.method, r.k, r.f1, r.f1_min, r.f1_max);
            }
        }
        Command::Supervised {
            common,
            inputs,
            folds,
            lambda_grid,
        } => {
            let mut config = configure(&common, Some(&inputs))?;
            if let Some(f) = folds {
                config.supervised.folds = f;
            }
            if !lambda_grid.is_empty() {
                config.supervised.lambda_grid = lambda_grid;
            }
            let (report, _) = cmd_supervised(&config)?;
            println!(
                "supervised F1={:.4} [{:.4}, {:.4}]",
                report.mean_f1, report.min_f1, report.max_f1
            );
        }
        Command::Stats { annotation, output } => {
            let stats = cmd_stats(&annotation)?;
            match output {
                Some(path) => stepscript_cli::commands::write_json(&path, &stats)?,
                None => {
                    let text = serde_json::to_string_pretty(&stats).map_err(|e| CliError::Usage(e.to_string()))?;
                    // A closed pipe downstream is not an error.
                    let _ = writeln!(std::io::stdout(), "{text}");
                }
            }
        }
        Command::Synth { common, items, csv } => {
            let mut config = configure(&common, None)?;
            if let Some(n) = items {
                config.synth.num_items = n;
            }
            let files = cmd_synth(&config, csv)?;
            println!("wrote {}", files.tokens.parent().unwrap_or(&files.tokens).display());
        }
        Command::OracleCheck {
            common,
            inputs,
            trials,
        } => {
            let config = configure(&common, Some(&inputs))?;
            for r in cmd_oracle_check(&config, trials)? {
                println!("{}: {}/{} optimal", r.problem, r.optimal, r.trials);
            }
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        process::exit(e.exit_code() as i32);
    }
}
