use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mpp_thinning::cli::{self, ValueMode};
use mpp_thinning::config::RunConfig;
use mpp_thinning::policy::PolicySpec;
use mpp_thinning::Result;

/// Thinning policies, values and bounds for marked point processes with
/// birth-death-growth dynamics.
#[derive(Parser)]
#[command(name = "thinning", version)]
struct Cli {
    /// Run configuration (`key = value` lines).
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,

    /// Override the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory; defaults to $THINNING_OUT_DIR, then the config's `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override a config key, e.g. `--set beta=0`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal French-thinning threshold and the finite-horizon thresholds.
    Dstar,
    /// Closed-form optimal value for the Poisson model.
    Value(ValueArgs),
    /// Lower and upper bound curves for the hard-core model.
    Bounds {
        /// Initial pattern (x,y,mark); empty when omitted.
        pattern: Option<PathBuf>,
        #[arg(long, default_value_t = 50)]
        n_max: u32,
    },
    /// Monte Carlo value of a policy.
    Simulate {
        pattern: Option<PathBuf>,
        /// french:<d>, french:dstar, french:horizon, german:<d>:<f>, tilde:<n>, keepall, removeall
        #[arg(long)]
        policy: String,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        replications: Option<u32>,
    },
    /// Initial patterns and bound curves for the sparse and dense regimes.
    Figure1,
}

#[derive(Args)]
struct ValueArgs {
    pattern: Option<PathBuf>,
    /// Infinite-horizon value.
    #[arg(long, conflicts_with = "horizon", required_unless_present = "horizon")]
    star: bool,
    /// Finite-horizon value with n decision epochs.
    #[arg(long)]
    horizon: Option<u32>,
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    for o in &cli.overrides {
        cfg.set(o)?;
    }
    if let Some(seed) = cli.seed {
        cfg = cfg.with_seed(seed);
    }
    Ok(cfg)
}

fn emit(text: &str, out_dir: Option<&Path>, file: &str) -> Result<()> {
    print!("{text}");
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(file), text)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    let out = cli::resolve_out_dir(cli.out.as_deref(), &cfg);
    match cli.command {
        Command::Dstar => emit(&cli::cmd_dstar(&cfg)?, out.as_deref(), "dstar.csv"),
        Command::Value(args) => {
            let x = cli::load_pattern(args.pattern.as_deref())?;
            let mode = match args.horizon {
                Some(n) => ValueMode::Horizon(n),
                None => ValueMode::Star,
            };
            emit(&cli::cmd_value(&cfg, &x, mode)?, out.as_deref(), "value.csv")
        }
        Command::Bounds { pattern, n_max } => {
            let x = cli::load_pattern(pattern.as_deref())?;
            emit(&cli::cmd_bounds(&cfg, &x, n_max)?, out.as_deref(), "bounds.csv")
        }
        Command::Simulate {
            pattern,
            policy,
            horizon,
            replications,
        } => {
            let spec: PolicySpec = policy.parse()?;
            if horizon.is_some() {
                cfg.horizon = horizon;
            }
            if let Some(r) = replications {
                cfg.replications = r;
            }
            let x = cli::load_pattern(pattern.as_deref())?;
            emit(&cli::cmd_simulate(&cfg, &x, &spec)?, out.as_deref(), "simulate.csv")
        }
        Command::Figure1 => {
            let dir = out.unwrap_or_else(|| PathBuf::from("figure1"));
            let result = cli::cmd_figure1(&cfg, &dir)?;
            print!("{}", result.summary);
            for f in &result.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
