#![allow(clippy::needless_range_loop)]

mod commands;
mod config;
mod presets;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "micromorph", version, about = "Relaxed micromorphic and dislocation-gauge finite elements and analytics")]
struct Cli {
    /// INI run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; 1 gives bitwise-reproducible output.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the material parameters of the configured model.
    Validate,
    /// Assemble and solve the configured problem.
    Solve {
        /// Also write the stiffness matrix in Matrix Market format.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Estimate discrete coercivity constants on refined meshes.
    Constants {
        /// Inequality name or `all`.
        spec: String,
        /// Refinement levels, `1..3` or `1,2,3`; level ℓ has 2^ℓ cells per side.
        #[arg(long, default_value = "1..3")]
        levels: String,
        /// Use the unconstrained distortion space.
        #[arg(long)]
        unconstrained: bool,
    },
    /// Closed-form Green-tensor analytics.
    Green {
        #[command(subcommand)]
        action: GreenCommand,
    },
    /// Round-trip a dislocation density through the Nye tensor.
    Nye {
        /// Nine comma-separated entries in row-major order.
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
    /// Verify the symmetry of the moment balance for the special curvature families.
    EinsteinCheck {
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

#[derive(Debug, Subcommand)]
enum GreenCommand {
    /// Characteristic lengths of the configured and special parameter sets.
    Lengths,
    /// Green tensor sampled along a segment.
    Ray {
        /// `x0,y0,z0,dx,dy,dz,n`.
        #[arg(long, allow_hyphen_values = true)]
        ray: String,
        /// Use the completed fundamental solution.
        #[arg(long)]
        completed: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(commands::AppError::Config("--threads must be positive".into())),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| commands::run(&cli)),
            Err(e) => Err(commands::AppError::Config(e.to_string())),
        },
        None => commands::run(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
