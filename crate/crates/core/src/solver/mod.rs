//! Finite-difference solvers for `u_xx + K(x) u_yy = 0` on rectangles.
//!
//! - [`solve_elliptic`]: Dirichlet problem where `K >= 0`, by line over-relaxation.
//! - [`solve_cauchy_hyperbolic`]: explicit marching in decreasing `x` where `K <= 0`.
//! - [`solve_mixed`]: type-switched line relaxation across the sonic line.
//! - [`convergence_study`]: manufactured-solution refinement studies.
//!
//! Iterative solves measure convergence with the *scaled* residual: the
//! discrete operator at each interior node divided by its diagonal coefficient,
//! in max norm. It has the units of `u`, so the stopping rule
//! `residual <= tol * (1 + max|bc|)` means the same thing on every grid.

mod cauchy;
mod convergence;
mod relax;
pub mod tridiag;

pub use cauchy::{cauchy_residual, solve_cauchy_hyperbolic};
pub use convergence::{convergence_study, solve_with_oracle, ConvergenceStudy, LevelResult, Mode};
pub use relax::{mixed_residual, solve_elliptic, solve_mixed};

use serde::{Deserialize, Serialize};

use crate::equation::{EquationSpec, Form};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

/// Corner mismatch tolerated between adjacent boundary traces.
pub const CORNER_TOL: f64 = 1e-12;

/// Dirichlet traces on the sides of a rectangle. `left`/`right` run over `y`
/// (length `ny`), `bottom`/`top` over `x` (length `nx`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DirichletData {
    pub left: Option<Vec<f64>>,
    pub right: Option<Vec<f64>>,
    pub bottom: Option<Vec<f64>>,
    pub top: Option<Vec<f64>>,
}

/// Which sides to fill in [`DirichletData::sample`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sides {
    pub left: bool,
    pub right: bool,
    pub bottom: bool,
    pub top: bool,
}

impl Sides {
    pub const ALL: Sides = Sides { left: true, right: true, bottom: true, top: true };
    /// Everything except the outflow side `x = x_min`.
    pub const MIXED: Sides = Sides { left: false, right: true, bottom: true, top: true };
}

impl DirichletData {
    pub fn sample(grid: &Grid2D, sides: Sides, mut f: impl FnMut(f64, f64) -> Result<f64>) -> Result<Self> {
        let mut col = |x: f64| grid.ys().into_iter().map(|y| f(x, y)).collect::<Result<Vec<_>>>();
        let left = if sides.left { Some(col(grid.x_min)?) } else { None };
        let right = if sides.right { Some(col(grid.x_max)?) } else { None };
        let mut row = |y: f64| grid.xs().into_iter().map(|x| f(x, y)).collect::<Result<Vec<_>>>();
        let bottom = if sides.bottom { Some(row(grid.y_min)?) } else { None };
        let top = if sides.top { Some(row(grid.y_max)?) } else { None };
        Ok(Self { left, right, bottom, top })
    }

    /// Checks lengths, finiteness and corner consistency.
    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        let check = |name: &str, v: &Option<Vec<f64>>, n: usize| -> Result<()> {
            if let Some(v) = v {
                if v.len() != n {
                    return Err(Error::InvalidBoundary(format!("{name} trace has {} values, expected {n}", v.len())));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::InvalidBoundary(format!("{name} trace has non-finite values")));
                }
            }
            Ok(())
        };
        check("left", &self.left, grid.ny)?;
        check("right", &self.right, grid.ny)?;
        check("bottom", &self.bottom, grid.nx)?;
        check("top", &self.top, grid.nx)?;
        let (nx, ny) = (grid.nx, grid.ny);
        let corners = [
            ("left/bottom", &self.left, 0, &self.bottom, 0),
            ("left/top", &self.left, ny - 1, &self.top, 0),
            ("right/bottom", &self.right, 0, &self.bottom, nx - 1),
            ("right/top", &self.right, ny - 1, &self.top, nx - 1),
        ];
        for (name, a, ia, b, ib) in corners {
            if let (Some(a), Some(b)) = (a, b) {
                corner_check(name, a[ia], b[ib])?;
            }
        }
        Ok(())
    }

    fn require(&self, sides: Sides) -> Result<()> {
        let missing = [
            (sides.left && self.left.is_none(), "left (x = x_min)"),
            (sides.right && self.right.is_none(), "right (x = x_max)"),
            (sides.bottom && self.bottom.is_none(), "bottom (y = y_min)"),
            (sides.top && self.top.is_none(), "top (y = y_max)"),
        ];
        match missing.iter().find(|(m, _)| *m) {
            Some((_, name)) => Err(Error::InvalidBoundary(format!("missing Dirichlet data on the {name} side"))),
            None => Ok(()),
        }
    }

    /// Largest absolute boundary value over the given traces.
    pub fn max_abs(&self) -> f64 {
        [&self.left, &self.right, &self.bottom, &self.top]
            .into_iter()
            .flatten()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Smallest and largest boundary value.
    pub fn min_max(&self) -> (f64, f64) {
        [&self.left, &self.right, &self.bottom, &self.top]
            .into_iter()
            .flatten()
            .flat_map(|v| v.iter())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

fn corner_check(name: &str, a: f64, b: f64) -> Result<()> {
    if (a - b).abs() > CORNER_TOL {
        return Err(Error::InvalidBoundary(format!("{name} corner values disagree: {a} vs {b}")));
    }
    Ok(())
}

/// Cauchy data on the line `x = x_max` plus Dirichlet traces on `y = y_min, y_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyData {
    /// `u(x_max, y_j)`, length `ny`.
    pub u: Vec<f64>,
    /// `u_x(x_max, y_j)`, length `ny`.
    pub u_x: Vec<f64>,
    /// `u(x_i, y_min)`, length `nx`.
    pub bottom: Vec<f64>,
    /// `u(x_i, y_max)`, length `nx`.
    pub top: Vec<f64>,
}

impl CauchyData {
    pub fn sample(
        grid: &Grid2D,
        mut u: impl FnMut(f64, f64) -> Result<f64>,
        mut u_x: impl FnMut(f64, f64) -> Result<f64>,
    ) -> Result<Self> {
        let x0 = grid.x_max;
        Ok(Self {
            u: grid.ys().into_iter().map(|y| u(x0, y)).collect::<Result<_>>()?,
            u_x: grid.ys().into_iter().map(|y| u_x(x0, y)).collect::<Result<_>>()?,
            bottom: grid.xs().into_iter().map(|x| u(x, grid.y_min)).collect::<Result<_>>()?,
            top: grid.xs().into_iter().map(|x| u(x, grid.y_max)).collect::<Result<_>>()?,
        })
    }

    pub fn validate(&self, grid: &Grid2D) -> Result<()> {
        let lens = [
            ("u", self.u.len(), grid.ny),
            ("u_x", self.u_x.len(), grid.ny),
            ("bottom", self.bottom.len(), grid.nx),
            ("top", self.top.len(), grid.nx),
        ];
        for (name, got, want) in lens {
            if got != want {
                return Err(Error::InvalidBoundary(format!("{name} trace has {got} values, expected {want}")));
            }
        }
        let all = self.u.iter().chain(&self.u_x).chain(&self.bottom).chain(&self.top);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBoundary("non-finite Cauchy data".into()));
        }
        corner_check("Cauchy/bottom", self.u[0], self.bottom[grid.nx - 1])?;
        corner_check("Cauchy/top", self.u[grid.ny - 1], self.top[grid.nx - 1])
    }
}

/// Order of line updates within one relaxation sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Schedule {
    /// Lines from `x_max` toward `x_min`, one at a time. Bit-deterministic.
    Sequential,
    /// All even-offset lines, then all odd-offset lines, each color solved
    /// with up to `threads` workers. Results do not depend on `threads`.
    RedBlack { threads: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Over-relaxation factor for elliptic and degenerate lines.
    pub omega: f64,
    pub schedule: Schedule,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 200_000, omega: 1.5, schedule: Schedule::Sequential }
    }
}

impl RelaxOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.omega > 0.0 && self.omega < 2.0) {
            return Err(Error::InvalidArgument(format!("omega must lie in (0, 2), got {}", self.omega)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        if let Schedule::RedBlack { threads: 0 } = self.schedule {
            return Err(Error::InvalidArgument("threads must be positive".into()));
        }
        Ok(())
    }
}

/// Observed order of accuracy, or a marker that errors sit at rounding level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderEstimate {
    Observed(f64),
    NotApplicable(NotApplicable),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NotApplicable {
    NotApplicable,
}

impl OrderEstimate {
    pub fn value(self) -> Option<f64> {
        match self {
            OrderEstimate::Observed(p) => Some(p),
            OrderEstimate::NotApplicable(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: String,
    pub iterations: usize,
    pub final_residual: f64,
    pub residual_history: Vec<f64>,
    pub error_max: Option<f64>,
    pub error_l2: Option<f64>,
    pub order_estimate: Option<OrderEstimate>,
    pub cfl_margin: Option<f64>,
}

impl SolveReport {
    fn new(mode: &str) -> Self {
        Self {
            mode: mode.to_string(),
            iterations: 0,
            final_residual: 0.0,
            residual_history: Vec::new(),
            error_max: None,
            error_l2: None,
            order_estimate: None,
            cfl_margin: None,
        }
    }

    /// Fills in interior max and RMS errors against an exact solution.
    pub fn attach_error(&mut self, field: &Field, exact: impl Fn(f64, f64) -> f64) {
        let (max, l2) = field.interior_error(exact);
        self.error_max = Some(max);
        self.error_l2 = Some(l2);
    }
}

fn require_tricomi_form(spec: &EquationSpec) -> Result<()> {
    match spec.form {
        Form::Tricomi => Ok(()),
        Form::Keldysh => Err(Error::InvalidArgument(
            "the finite-difference solvers handle the Tricomi form u_xx + K u_yy = 0".into(),
        )),
    }
}

fn column_k(spec: &EquationSpec, grid: &Grid2D) -> Result<Vec<f64>> {
    grid.xs().into_iter().map(|x| spec.eval_k(x)).collect()
}
