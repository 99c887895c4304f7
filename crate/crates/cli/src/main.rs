use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context as _, Result};
use clap::{Parser, Subcommand};

use hjbmarch::marchers::TruthCache;
use hjbmarch::problem::ProblemParams;
use hjbmarch_cli::config::{parse_config, DEFAULT_REPEATS, DEFAULT_TRUTH_RESOLUTION};
use hjbmarch_cli::reproduce::{cmd_reproduce, Limits, FIGURES};
use hjbmarch_cli::sweep::{cmd_run, summary_table, Context};
use hjbmarch_cli::{cmd_selftest, cmd_truth, default_cache_dir};

/// Time marching for isotropic Hamilton-Jacobi-Bellman equations.
///
/// The ground-truth cache lives in $HJBMARCH_CACHE when set.
#[derive(Debug, Parser)]
#[command(name = "hjbmarch", version)]
struct Cli {
    /// INI run configuration with `[problem]`, `[run]` and `[output]` sections.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Sweep cells to run at once.
    #[arg(long, global = true, value_name = "N", default_value_t = 1)]
    jobs: usize,
    /// Output directory; overrides [output] dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for the randomized checks; overrides [run] seed.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the sweep described by --config.
    Run,
    /// Recreate one of the accuracy/cost figures as CSV plus a gnuplot script.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        figure: String,
        /// Skip resolutions above N (the ground truth shrinks to at most 4N).
        #[arg(long, value_name = "N")]
        max_resolution: Option<usize>,
        /// Timed runs per cell; the median is reported.
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
    },
    /// Compute the ground truth for a problem without a closed form and cache it.
    Truth {
        /// Problem name; ignored when --config is given.
        #[arg(long, default_value = "experiment4")]
        problem: String,
        /// Cells per axis; defaults to [run] truth_resolution or 512.
        #[arg(long)]
        resolution: Option<usize>,
        /// Recompute even if a valid cached copy exists.
        #[arg(long)]
        force: bool,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn run(cli: Cli) -> Result<bool> {
    let ctx = Context {
        cache: TruthCache::new(default_cache_dir()),
        jobs: cli.jobs,
    };
    if ctx.jobs == 0 {
        bail!("--jobs must be at least 1");
    }
    let spec = cli.config.as_deref().map(parse_config).transpose()?;
    match cli.command {
        Command::Run => {
            let mut spec = spec.context("`run` needs --config")?;
            if let Some(out) = cli.out {
                spec.out_dir = out;
            }
            if let Some(seed) = cli.seed {
                spec.seed = seed;
            }
            let results = cmd_run(&spec, &ctx)?;
            print!("{}", summary_table(&results));
            println!("wrote {}", spec.out_dir.join("sweep.csv").display());
        }
        Command::Reproduce {
            figure,
            max_resolution,
            repeats,
        } => {
            if repeats == 0 {
                bail!("--repeats must be at least 1");
            }
            let out = cli.out.unwrap_or_else(|| PathBuf::from(&figure));
            let limits = Limits {
                max_resolution,
                repeats,
                seed: cli.seed.unwrap_or(0),
            };
            for p in cmd_reproduce(&figure, &out, &limits, &ctx)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Truth {
            problem,
            resolution,
            force,
        } => {
            let (name, params, res) = match &spec {
                Some(s) => (
                    s.problem.clone(),
                    s.params.clone(),
                    resolution.unwrap_or(s.truth_resolution),
                ),
                None => (
                    problem,
                    ProblemParams::new(),
                    resolution.unwrap_or(DEFAULT_TRUTH_RESOLUTION),
                ),
            };
            let path = cmd_truth(&name, &params, res, force, &ctx.cache)?;
            println!("{}", path.display());
        }
        Command::Selftest => {
            let seed = cli.seed.or(spec.map(|s| s.seed)).unwrap_or(0);
            let (ok, _) = cmd_selftest(seed, std::io::stdout().lock())?;
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
