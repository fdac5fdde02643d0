use crate::dense::Field;
use crate::linalg::{BlockVector, LinearOperator};

use super::krylov::{solve_bicgstab, solve_cg, solve_gmres, solve_gradient, solve_loop};
use super::paramtree::{ConfigError, ParameterTree};
use super::{IterControl, Preconditioner, SolverResult};

/// The iterative methods the runtime factory can configure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Loop,
    Gradient,
    Cg,
    BiCgStab,
    Gmres,
}

impl SolverKind {
    /// The name used in configuration files.
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Loop => "loop",
            SolverKind::Gradient => "gradient",
            SolverKind::Cg => "cg",
            SolverKind::BiCgStab => "bicgstab",
            SolverKind::Gmres => "gmres",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "loop" => SolverKind::Loop,
            "gradient" => SolverKind::Gradient,
            "cg" => SolverKind::Cg,
            "bicgstab" => SolverKind::BiCgStab,
            "gmres" => SolverKind::Gmres,
            _ => return None,
        })
    }
}

const VALID_SOLVER_NAMES: &str = "loop, gradient, cg, bicgstab, gmres";

/// A solver assembled from a [`ParameterTree`] section: method choice plus
/// all iteration parameters, bound to an operator and preconditioner.
pub struct ConfiguredSolver<'a, S: Field> {
    kind: SolverKind,
    op: &'a dyn LinearOperator<S>,
    pre: &'a dyn Preconditioner<S>,
    ctl: IterControl,
    restart: usize,
}

impl<'a, S: Field> ConfiguredSolver<'a, S> {
    pub fn kind(&self) -> SolverKind {
        self.kind
    }

    pub fn control(&self) -> &IterControl {
        &self.ctl
    }

    /// Restart length (only meaningful for [`SolverKind::Gmres`]).
    pub fn restart(&self) -> usize {
        self.restart
    }

    pub fn solve(&self, b: &BlockVector<S>, x: &mut BlockVector<S>) -> SolverResult {
        match self.kind {
            SolverKind::Loop => solve_loop(self.op, self.pre, b, x, &self.ctl),
            SolverKind::Gradient => solve_gradient(self.op, self.pre, b, x, &self.ctl),
            SolverKind::Cg => solve_cg(self.op, self.pre, b, x, &self.ctl),
            SolverKind::BiCgStab => solve_bicgstab(self.op, self.pre, b, x, &self.ctl),
            SolverKind::Gmres => solve_gmres(self.op, self.pre, b, x, self.restart, &self.ctl),
        }
    }
}

/// Builds a solver from the configuration section `section` of `tree`.
///
/// Recognized keys (all except `type` optional):
///
/// | key         | meaning                             | default |
/// |-------------|-------------------------------------|---------|
/// | `type`      | one of `loop`, `gradient`, `cg`, `bicgstab`, `gmres` | — |
/// | `reduction` | relative defect reduction target    | `1e-8`  |
/// | `maxit`     | maximum number of iterations        | `1000`  |
/// | `restart`   | restart length (gmres only)         | `30`    |
/// | `verbose`   | 0 silent, 1 per-iteration, 2 summary too | `0` |
pub fn solver_from_tree<'a, S: Field>(
    op: &'a dyn LinearOperator<S>,
    pre: &'a dyn Preconditioner<S>,
    tree: &ParameterTree,
    section: &str,
) -> Result<ConfiguredSolver<'a, S>, ConfigError> {
    let key = |name: &str| {
        if section.is_empty() {
            name.to_string()
        } else {
            format!("{section}.{name}")
        }
    };
    let type_key = key("type");
    let type_name = tree
        .get_raw(&type_key)
        .ok_or_else(|| ConfigError::MissingKey(type_key.clone()))?;
    let kind = SolverKind::from_name(type_name).ok_or_else(|| ConfigError::UnknownSolverType {
        got: type_name.to_string(),
        valid: VALID_SOLVER_NAMES,
    })?;

    let reduction: f64 = tree.get_or(&key("reduction"), 1e-8)?;
    if !(reduction > 0.0 && reduction < 1.0) {
        return Err(ConfigError::BadValue {
            key: key("reduction"),
            value: format!("{reduction}"),
        });
    }
    let maxit: usize = tree.get_or(&key("maxit"), 1000)?;
    if maxit == 0 {
        return Err(ConfigError::BadValue { key: key("maxit"), value: "0".into() });
    }
    let restart: usize = tree.get_or(&key("restart"), 30)?;
    if restart == 0 {
        return Err(ConfigError::BadValue { key: key("restart"), value: "0".into() });
    }
    let verbose: u32 = tree.get_or(&key("verbose"), 0)?;

    Ok(ConfiguredSolver {
        kind,
        op,
        pre,
        ctl: IterControl { reduction, maxit, verbose },
        restart,
    })
}
