use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use boxfem_cli::{run, Command, RunConfig};

/// Structured-grid finite element demos: convergence tables on stdout (CSV),
/// optional VTK snapshots on disk.
#[derive(Parser)]
#[command(name = "app", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Midpoint vs. Gauss quadrature convergence for exp(|x|) on the unit cube
    Integrate(CommonArgs),
    /// Element-wise divergence of f(x) = x via boundary-flux quadrature
    Divergence(CommonArgs),
    /// Poisson solve with manufactured solution; error and iteration table
    Poisson(CommonArgs),
    /// Estimator-driven adaptive refinement loop with solution transfer
    Adapt(CommonArgs),
    /// Area convergence on a quarter-annulus-wrapped unit square
    Movingmesh(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Grid dimension (default: 2; integrate/divergence accept 1..=3)
    #[arg(long)]
    dim: Option<usize>,
    /// Macro cells per axis (default: 4; movingmesh: 2)
    #[arg(long)]
    cells: Option<usize>,
    /// Uniform refinement levels, or adaptation cycles for `adapt`
    /// (default: 4; adapt: 8; divergence: 0)
    #[arg(long)]
    refine: Option<usize>,
    /// INI parameter file merged over the built-in defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Parameter-tree section with the solver settings
    /// (default: section named after the command)
    #[arg(long)]
    solver: Option<String>,
    /// Directory for VTK snapshots (written only when given)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn to_config(command: Command, a: CommonArgs) -> RunConfig {
    RunConfig {
        command,
        dim: a.dim,
        cells: a.cells,
        refine: a.refine,
        solver: a.solver,
        config_path: a.config,
        config_text: None,
        out_dir: a.out,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print on stdout and succeed; genuine usage
            // errors are configuration errors (exit code 3).
            let is_error = e.use_stderr();
            let _ = e.print();
            std::process::exit(if is_error { 3 } else { 0 });
        }
    };
    let cfg = match cli.command {
        Cmd::Integrate(a) => to_config(Command::Integrate, a),
        Cmd::Divergence(a) => to_config(Command::Divergence, a),
        Cmd::Poisson(a) => to_config(Command::Poisson, a),
        Cmd::Adapt(a) => to_config(Command::Adapt, a),
        Cmd::Movingmesh(a) => to_config(Command::MovingMesh, a),
    };
    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    match run(&cfg, &mut out) {
        Ok(()) => {
            out.flush().expect("flush stdout");
        }
        Err(err) => {
            let _ = out.flush();
            eprintln!("error: {err}");
            std::process::exit(err.exit_code());
        }
    }
}
