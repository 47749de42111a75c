use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chain_bayes::experiment::{
    check_identifiability, run_consistency_experiment, run_ergodicity_diagnostic, run_lln_experiment, run_martingale,
    write_consistency_csv, write_ergodicity_csv, write_identifiability_csv, write_lln_csv, write_martingale_csv,
    ExperimentConfig, RunOptions, ThetaMode,
};
use chain_bayes::stationary::{invariant_measure, Dist};
use chain_bayes::{Error, Result};
use clap::{Args, Parser, Subcommand};

/// Markov-chain parameter estimation experiments.
#[derive(Parser)]
#[command(name = "chain-bayes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check that distinct prior grid points give distinct chains.
    Identify(Common),
    /// Posterior-mean error over the n schedule.
    Consistency {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
    },
    /// Sup distance between empirical and invariant pair d.f. over the n schedule.
    Lln {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        timing: Timing,
    },
    /// Total-variation distance to the invariant law over time.
    Ergodicity {
        #[command(flatten)]
        common: Common,
        /// Last time step.
        #[arg(long, default_value_t = 50)]
        t_max: usize,
        /// Start from a point mass at this state index (default 0).
        #[arg(long, conflicts_with = "stationary_start")]
        initial_state: Option<usize>,
        /// Start from the invariant law.
        #[arg(long)]
        stationary_start: bool,
    },
    /// Mean and standard error of the posterior-mean increment between n1 and n2.
    Martingale(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output CSV; defaults to the config's `output`, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Timing {
    /// Record per-row wall time instead of 0.
    #[arg(long)]
    wall_time: bool,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::from_path(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        Ok(cfg)
    }

    fn sink(&self, cfg: &ExperimentConfig) -> Result<Box<dyn Write>> {
        match self.out.as_deref().or(cfg.output.as_deref()) {
            Some(path) => Ok(Box::new(BufWriter::new(create(path)?))),
            None => Ok(Box::new(io::stdout().lock())),
        }
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Identify(common) => {
            let cfg = common.load()?;
            let family = cfg.build_family()?;
            let prior =
                cfg.build_prior(&family)?.ok_or_else(|| Error::Config("identify needs a `prior` section".into()))?;
            let report = check_identifiability(&family, prior.grid())?;
            for v in &report.violations {
                eprintln!(
                    "violation: {:?} vs {:?} (matrix gap {:e}, d.f. gap {:e})",
                    prior.grid()[v.first].coords(),
                    prior.grid()[v.second].coords(),
                    v.matrix_gap,
                    v.df_gap
                );
            }
            for &i in &report.non_ergodic {
                eprintln!("non-ergodic grid point {:?} excluded", prior.grid()[i].coords());
            }
            write_identifiability_csv(&report, common.sink(&cfg)?)
        }
        Command::Consistency { common, timing } => {
            let cfg = common.load()?;
            let rows = run_consistency_experiment(&cfg, RunOptions { record_wall_time: timing.wall_time })?;
            let degenerate = rows.iter().filter(|r| r.degenerate).count();
            if degenerate > 0 {
                eprintln!("{degenerate} rows have a degenerate posterior");
            }
            write_consistency_csv(&rows, common.sink(&cfg)?)
        }
        Command::Lln { common, timing } => {
            let cfg = common.load()?;
            let rows = run_lln_experiment(&cfg, RunOptions { record_wall_time: timing.wall_time })?;
            write_lln_csv(&rows, common.sink(&cfg)?)
        }
        Command::Ergodicity { common, t_max, initial_state, stationary_start } => {
            let cfg = common.load()?;
            let ThetaMode::Fixed(list) = &cfg.theta_mode else {
                return Err(Error::Config("ergodicity uses the first theta of theta_mode.fixed".into()));
            };
            let family = cfg.build_family()?;
            let theta = &list[0];
            let size = family.state_space().size();
            let mu0 = if stationary_start {
                invariant_measure(&family.transition_matrix(theta)?)?
            } else {
                Dist::delta(size, initial_state.unwrap_or(0))
                    .map_err(|_| Error::Config(format!("initial state must be below {size}")))?
            };
            let series = run_ergodicity_diagnostic(&family, theta, &mu0, t_max)?;
            write_ergodicity_csv(&series, common.sink(&cfg)?)
        }
        Command::Martingale(common) => {
            let cfg = common.load()?;
            let stat = run_martingale(&cfg)?;
            write_martingale_csv(&stat, common.sink(&cfg)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else if e.is_degenerate_model() {
                ExitCode::from(3)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
