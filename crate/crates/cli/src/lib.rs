//! Command-line demo suite on top of the `boxfem` infrastructure:
//!
//! - `integrate`: midpoint vs. Gauss integration convergence table,
//! - `divergence`: element-wise divergence of `f(x) = x` via facet quadrature,
//! - `poisson`: Poisson solve with a manufactured solution and error table,
//! - `adapt`: estimator-driven adaptive refinement loop with data transfer,
//! - `movingmesh`: area convergence on a coordinate-wrapped grid.
//!
//! Every command writes a deterministic CSV table (comma separated, header
//! row, `.` decimal separator, no timing columns) to the supplied writer and
//! optionally VTK snapshots into an output directory. Tunables live in an
//! INI-style parameter tree: built-in defaults (see [`DEFAULT_CONFIG`]) are
//! merged with an optional user file.

use std::fmt;
use std::path::PathBuf;

use boxfem::solvers::{ConfigError, ParameterTree, SolverResult};

pub mod adapt;
pub mod assemble;
pub mod divergence;
pub mod estimate;
pub mod integrate;
pub mod movingmesh;
pub mod poisson;

/// Built-in parameter defaults; a user file given with `--config` is merged
/// on top, so it only needs to list the keys it wants to change.
pub const DEFAULT_CONFIG: &str = "\
[poisson]
order = 1
type = cg
precond = ssor
reduction = 1e-10
maxit = 5000
verbose = 0
threads = 1

[adapt]
maxtol = 1e-4
type = cg
precond = ssor
reduction = 1e-10
maxit = 5000
verbose = 0
threads = 1

[divergence]
adapt = false

[movingmesh]
wrap = annulus
";

/// The demo selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Integrate,
    Divergence,
    Poisson,
    Adapt,
    MovingMesh,
}

impl Command {
    /// Parameter-tree section a command reads its settings from by default.
    pub fn section(&self) -> &'static str {
        match self {
            Command::Integrate => "integrate",
            Command::Divergence => "divergence",
            Command::Poisson => "poisson",
            Command::Adapt => "adapt",
            Command::MovingMesh => "movingmesh",
        }
    }
}

/// A fully described run: command plus all knobs from the command line.
///
/// Unset options fall back to per-command defaults (documented in `--help`):
/// dimension 2; 4 cells per axis (2 for `movingmesh`); 4 refinement levels
/// (8 adaptation cycles for `adapt`, 0 for `divergence`); solver section
/// named like the command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub dim: Option<usize>,
    pub cells: Option<usize>,
    pub refine: Option<usize>,
    pub solver: Option<String>,
    pub config_path: Option<PathBuf>,
    /// Extra INI text merged over file and defaults; used by embedders/tests.
    pub config_text: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            dim: None,
            cells: None,
            refine: None,
            solver: None,
            config_path: None,
            config_text: None,
            out_dir: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim.unwrap_or(2)
    }

    pub fn cells(&self) -> usize {
        self.cells.unwrap_or(match self.command {
            Command::MovingMesh => 2,
            _ => 4,
        })
    }

    pub fn refine(&self) -> usize {
        self.refine.unwrap_or(match self.command {
            Command::Adapt => 8,
            Command::Divergence => 0,
            _ => 4,
        })
    }

    /// Section of the parameter tree that configures the linear solver.
    pub fn solver_section(&self) -> &str {
        self.solver.as_deref().unwrap_or(self.command.section())
    }

    /// Validates ranges before any work happens.
    pub fn validate(&self) -> Result<(), AppError> {
        let d = self.dim();
        let max_d = match self.command {
            Command::Integrate | Command::Divergence => 3,
            Command::Poisson | Command::Adapt | Command::MovingMesh => 2,
        };
        let min_d = match self.command {
            Command::Poisson | Command::Adapt | Command::MovingMesh => 2,
            _ => 1,
        };
        if d < min_d || d > max_d {
            return Err(AppError::Config(format!(
                "--dim {d} out of range for this command (expected {min_d}..={max_d})"
            )));
        }
        if self.cells() == 0 {
            return Err(AppError::Config("--cells must be at least 1".into()));
        }
        Ok(())
    }

    /// Loads the parameter tree: built-in defaults, then the `--config`
    /// file, then any embedded override text, later sources winning.
    pub fn load_tree(&self) -> Result<ParameterTree, AppError> {
        let mut tree =
            ParameterTree::parse_ini(DEFAULT_CONFIG).expect("built-in defaults must parse");
        if let Some(path) = &self.config_path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                AppError::Config(format!("cannot read config file {}: {e}", path.display()))
            })?;
            tree.merge_from(&ParameterTree::parse_ini(&text)?);
        }
        if let Some(text) = &self.config_text {
            tree.merge_from(&ParameterTree::parse_ini(text)?);
        }
        Ok(tree)
    }
}

/// Application-level failure with a defined process exit code: configuration
/// problems exit with 3, runtime failures (non-converged solves, estimator
/// breakdown, I/O) with 2.
#[derive(Debug)]
pub enum AppError {
    /// Bad command line, unreadable or invalid configuration. Exit code 3.
    Config(String),
    /// The linear solver did not reach its reduction target. Exit code 2.
    Solver { context: String, result: SolverResult },
    /// The error estimator produced a non-finite value. Exit code 2.
    EstimatorNan { element: String },
    /// Output files could not be written. Exit code 2.
    Io(std::io::Error),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(msg) => write!(f, "configuration error: {msg}"),
            AppError::Solver { context, result } => write!(
                f,
                "solver '{context}' failed to converge: {result:?}"
            ),
            AppError::EstimatorNan { element } => {
                write!(f, "error estimator produced NaN for element {element}")
            }
            AppError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<ConfigError> for AppError {
    fn from(e: ConfigError) -> Self {
        AppError::Config(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

impl From<boxfem::basis::BasisError> for AppError {
    fn from(e: boxfem::basis::BasisError) -> Self {
        AppError::Config(e.to_string())
    }
}

/// Runs the configured command, writing its CSV table to `out`.
pub fn run(cfg: &RunConfig, out: &mut dyn std::io::Write) -> Result<(), AppError> {
    cfg.validate()?;
    let tree = cfg.load_tree()?;
    match cfg.command {
        Command::Integrate => integrate::run(cfg, out),
        Command::Divergence => divergence::run(cfg, &tree, out),
        Command::Poisson => poisson::run(cfg, &tree, out),
        Command::Adapt => adapt::run(cfg, &tree, out).map(|_| ()),
        Command::MovingMesh => movingmesh::run(cfg, &tree, out),
    }
}
