//! Manufactured-solution refinement studies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    solve_cauchy_hyperbolic, solve_elliptic, solve_mixed, CauchyData, DirichletData, NotApplicable, OrderEstimate,
    RelaxOptions, Sides, SolveReport,
};
use crate::error::{Error, Result};
use crate::exact::{lookup, ExactSolution};
use crate::grid::{Field, Grid2D};

/// Errors below this (relative to the solution size) count as exact.
const ROUNDING_LEVEL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Elliptic,
    Cauchy,
    Mixed,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Elliptic => "elliptic",
            Mode::Cauchy => "cauchy",
            Mode::Mixed => "mixed",
        }
    }

    /// Reference rectangle used by studies and the CLI defaults.
    pub fn default_domain(self) -> ((f64, f64), (f64, f64)) {
        match self {
            Mode::Elliptic => ((0.0, 1.0), (-1.0, 1.0)),
            Mode::Cauchy => ((-1.0, 0.0), (-2.0, 2.0)),
            Mode::Mixed => ((-0.5, 1.0), (-1.0, 1.0)),
        }
    }

    /// Grid with `n` points in `x`; Cauchy grids get `hy = hx` on the default domain.
    pub fn level_grid(self, n: usize) -> Result<Grid2D> {
        let (x, y) = self.default_domain();
        let ny = match self {
            Mode::Cauchy => 4 * (n - 1) + 1,
            _ => n,
        };
        Grid2D::new(n, ny, x, y)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "elliptic" => Ok(Mode::Elliptic),
            "cauchy" => Ok(Mode::Cauchy),
            "mixed" => Ok(Mode::Mixed),
            _ => Err(Error::InvalidArgument(format!("unknown mode '{s}' (elliptic, cauchy, mixed)"))),
        }
    }
}

/// Solves `mode` on `grid` with data sampled from `sol` and attaches the error.
pub fn solve_with_oracle(
    mode: Mode,
    sol: &ExactSolution,
    grid: Grid2D,
    opts: &RelaxOptions,
) -> Result<(Field, SolveReport)> {
    let u = |x, y| sol.eval(x, y);
    let (field, mut report) = match mode {
        Mode::Elliptic => solve_elliptic(&sol.spec, grid, &DirichletData::sample(&grid, Sides::ALL, u)?, opts)?,
        Mode::Mixed => solve_mixed(&sol.spec, grid, &DirichletData::sample(&grid, Sides::MIXED, u)?, opts)?,
        Mode::Cauchy => {
            let data = CauchyData::sample(&grid, u, |x, y| sol.eval_dx(x, y))?;
            solve_cauchy_hyperbolic(&sol.spec, grid, &data)?
        }
    };
    report.attach_error(&field, |x, y| sol.eval(x, y).unwrap_or(f64::NAN));
    Ok((field, report))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub nx: usize,
    pub ny: usize,
    pub iterations: usize,
    pub final_residual: f64,
    pub error_max: f64,
    pub error_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub oracle: String,
    pub levels: Vec<LevelResult>,
    /// Report of the finest level, with the observed order filled in.
    pub report: SolveReport,
}

impl ConvergenceStudy {
    /// Observed orders `log2(e_h / e_{h/2})` between consecutive levels.
    pub fn orders(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| (w[0].error_max / w[1].error_max).log2()).collect()
    }

    pub fn errors_decrease(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].error_max < w[0].error_max)
    }
}

/// Runs `mode` on nested grids `n0, 2 n0 - 1, 4 n0 - 3, ...` against oracle `id`.
pub fn convergence_study(mode: Mode, id: &str, n0: usize, levels: usize, opts: &RelaxOptions) -> Result<ConvergenceStudy> {
    if levels < 2 {
        return Err(Error::InvalidArgument("a convergence study needs at least 2 levels".into()));
    }
    let sol = lookup(id)?;
    let mut out = Vec::with_capacity(levels);
    let mut report = None;
    let mut n = n0;
    let mut u_max = 0.0f64;
    for _ in 0..levels {
        let grid = mode.level_grid(n)?;
        let (field, rep) = solve_with_oracle(mode, &sol, grid, opts)?;
        u_max = u_max.max(field.max_abs());
        out.push(LevelResult {
            nx: grid.nx,
            ny: grid.ny,
            iterations: rep.iterations,
            final_residual: rep.final_residual,
            error_max: rep.error_max.unwrap_or(f64::NAN),
            error_l2: rep.error_l2.unwrap_or(f64::NAN),
        });
        report = Some(rep);
        n = 2 * n - 1;
    }
    let mut report = report.expect("at least two levels");
    let (coarse, fine) = (&out[levels - 2], &out[levels - 1]);
    report.order_estimate = Some(if coarse.error_max <= ROUNDING_LEVEL * (1.0 + u_max) {
        OrderEstimate::NotApplicable(NotApplicable::NotApplicable)
    } else {
        OrderEstimate::Observed((coarse.error_max / fine.error_max).log2())
    });
    Ok(ConvergenceStudy { oracle: id.to_string(), levels: out, report })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elliptic_quartic_is_second_order() {
        let s = convergence_study(Mode::Elliptic, "quartic", 33, 3, &RelaxOptions::with_tol(1e-12)).unwrap();
        let p = s.report.order_estimate.unwrap().value().unwrap();
        assert!((1.9..=2.1).contains(&p), "{:?}", s.levels);
        assert!(s.orders().iter().all(|&p| p >= 1.9));
    }

    #[test]
    fn cauchy_quartic_is_second_order() {
        let s = convergence_study(Mode::Cauchy, "quartic", 33, 3, &RelaxOptions::default()).unwrap();
        let p = s.report.order_estimate.unwrap().value().unwrap();
        assert!((1.9..=2.1).contains(&p), "{:?}", s.levels);
    }

    #[test]
    fn bilinear_order_not_applicable() {
        let s = convergence_study(Mode::Elliptic, "bilin", 17, 2, &RelaxOptions::with_tol(1e-13)).unwrap();
        assert!(matches!(s.report.order_estimate, Some(OrderEstimate::NotApplicable(_))));
        let json = serde_json::to_string(&s.report).unwrap();
        assert!(json.contains("\"order_estimate\":\"not_applicable\""));
    }

    #[test]
    fn mixed_quartic_error_decreases() {
        let s = convergence_study(Mode::Mixed, "quartic", 33, 3, &RelaxOptions::with_tol(1e-11)).unwrap();
        assert!(s.errors_decrease(), "{:?}", s.levels);
        assert!(s.levels[1].error_max <= 5e-2);
        assert!(s.report.final_residual <= 1e-10);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("cauchy".parse::<Mode>().unwrap(), Mode::Cauchy);
        assert!("wave".parse::<Mode>().is_err());
    }
}
