mod commands;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use horograph::solver::SolverConfig;

use problem::ProblemArgs;

/// Horizontal minimal graphs in H^2 x R: solve, continue, verify.
#[derive(Debug, Parser)]
#[command(name = "horograph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    /// Seed for randomized sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Max-norm residual tolerance of each Newton solve.
    #[arg(long, default_value_t = SolverConfig::default().newton_tol)]
    pub newton_tol: f64,
    /// Newton iteration cap per solve.
    #[arg(long, default_value_t = SolverConfig::default().max_newton_iters)]
    pub max_newton_iters: usize,
}

impl SolverArgs {
    pub fn config(&self) -> Result<SolverConfig, commands::CliError> {
        let cfg = SolverConfig {
            newton_tol: self.newton_tol,
            max_newton_iters: self.max_newton_iters,
            ..SolverConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Newton solve at fixed eps and s = 1 from the blend of the boundary data.
    Solve {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Regularization parameter of the solve.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Homotopy in s at eps = 1, then eps descent to the target.
    Continuation {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 0.0)]
        eps_target: f64,
        #[arg(long, default_value_t = 11)]
        s_steps: usize,
    },
    /// Checks the a priori estimates on a field CSV.
    Verify {
        /// Field CSV with header x,t,g.
        #[arg(long)]
        field: PathBuf,
        /// Problem document whose domain the field lives on; by default the
        /// rectangle spanned by the CSV coordinates.
        #[arg(long)]
        config: Option<PathBuf>,
        /// The parameter eps the field solves for.
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Tolerance of the modulus-of-continuity check.
        #[arg(long, default_value_t = 0.5)]
        eps_target: f64,
    },
    /// Samples a closed-form surface and classifies it.
    Oracle {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        /// Random points used for the classification.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Geometric quantities, existence hypotheses and global gradient bounds.
    Bounds {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Boundary gradient values c3 for the bound table.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,5")]
        c3: Vec<f64>,
    },
    /// Grid-doubling study against an exact solution.
    Convergence {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Grid nodes per axis of each run.
        #[arg(long, value_delimiter = ',', default_value = "33,65,129")]
        grids: Vec<usize>,
    },
}

fn configure_threads() -> Result<(), commands::CliError> {
    if let Ok(v) = std::env::var("HOROGRAPH_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| commands::CliError::Config(format!("HOROGRAPH_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| commands::CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| {
        std::fs::create_dir_all(&cli.common.out)
            .map_err(|e| commands::CliError::Config(format!("cannot create {}: {e}", cli.common.out.display())))?;
        let c = &cli.common;
        match &cli.command {
            Command::Solve { problem, solver, eps } => commands::solve(c, problem, &solver.config()?, *eps),
            Command::Continuation {
                problem,
                solver,
                eps_target,
                s_steps,
            } => commands::continuation(c, problem, &solver.config()?, *eps_target, *s_steps),
            Command::Verify {
                field,
                config,
                eps,
                eps_target,
            } => commands::verify(c, field, config.as_deref(), *eps, *eps_target),
            Command::Oracle { problem, eps, samples } => commands::oracle(c, problem, *eps, *samples),
            Command::Bounds { problem, c3 } => commands::bounds(c, problem, c3),
            Command::Convergence { problem, solver, grids } => {
                commands::convergence(c, problem, &solver.config()?, grids)
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("horograph: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
