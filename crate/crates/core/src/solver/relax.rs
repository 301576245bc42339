//! Line relaxation for the elliptic and mixed problems.
//!
//! Every unknown column `x = x_i` is solved as a tridiagonal system in `y`.
//! Elliptic and degenerate columns (`K >= 0`) use the centered 5-point
//! scheme; hyperbolic columns (`K < 0`) replace `u_xx` by the one-sided
//! difference `(u_i - 2u_{i+1} + u_{i+2}) / hx^2`, which looks toward the
//! sonic line. Hyperbolic lines take plain Gauss-Seidel updates: they are a
//! march in `-x` once their right-hand neighbours settle, and over-relaxing
//! them only adds overshoot.
//!
//! The last hyperbolic column and its right neighbour are solved together.
//! Subtracting their two equations leaves `K_h D_yy v = K_e D_yy w` with
//! `|K_h|, |K_e| <= hx`, a coupling of size `hx^3` that single-line sweeps
//! resolve only after `O(hx^-3)` iterations. The pair is a fixed
//! `2 (ny - 2)` system, factored once and re-solved each sweep.

use std::thread;

use nalgebra::{DMatrix, DVector, LU};

use super::{
    column_k, require_tricomi_form, tridiag, DirichletData, RelaxOptions, Schedule, Sides, SolveReport,
};
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Line {
    Centered,
    Upwind,
}

struct Problem {
    grid: Grid2D,
    k: Vec<f64>,
    /// Line type for each column; `None` for Dirichlet columns.
    lines: Vec<Option<Line>>,
    omega: f64,
    sonic: Option<SonicPair>,
}

/// Columns `i` (hyperbolic) and `i + 1` solved as one system, unknowns
/// interleaved as `v_1, w_1, v_2, w_2, ...`.
struct SonicPair {
    i: usize,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl Problem {
    fn new(spec: &EquationSpec, grid: Grid2D, free_left: bool, omega: f64) -> Result<Self> {
        require_tricomi_form(spec)?;
        let k = column_k(spec, &grid)?;
        let nx = grid.nx;
        let mut lines = vec![None; nx];
        for i in 1..nx - 1 {
            lines[i] = Some(if k[i] < 0.0 { Line::Upwind } else { Line::Centered });
        }
        if free_left {
            if k[0] >= 0.0 {
                return Err(Error::InvalidBoundary(format!(
                    "x = x_min = {} is not hyperbolic (K = {}); Dirichlet data is required there",
                    grid.x_min, k[0]
                )));
            }
            lines[0] = Some(Line::Upwind);
        }
        if let Some(i) = (0..nx).find(|&i| lines[i] == Some(Line::Upwind) && i + 2 > nx - 1) {
            return Err(Error::InvalidGrid(format!(
                "hyperbolic column x = {} has no two columns toward x_max",
                grid.x(i)
            )));
        }
        let mut problem = Self { grid, k, lines, omega, sonic: None };
        let pair = (0..nx - 1).rev().find(|&i| {
            problem.lines[i] == Some(Line::Upwind) && problem.lines[i + 1] == Some(Line::Centered)
        });
        if let Some(i) = pair {
            problem.sonic = Some(problem.factor_pair(i));
        }
        Ok(problem)
    }

    fn factor_pair(&self, i: usize) -> SonicPair {
        let n = self.grid.ny - 2;
        let (a, bv) = self.coeffs(i);
        let (_, bw) = self.coeffs(i + 1);
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        for r in 0..n {
            let (v, w) = (2 * r, 2 * r + 1);
            // a (v - 2w + z) + bv D v = 0
            m[(v, v)] = a - 2.0 * bv;
            m[(v, w)] = -2.0 * a;
            // a (z - 2w + v) + bw D w = 0
            m[(w, v)] = a;
            m[(w, w)] = -2.0 * a - 2.0 * bw;
            if r > 0 {
                m[(v, v - 2)] = bv;
                m[(w, w - 2)] = bw;
            }
            if r + 1 < n {
                m[(v, v + 2)] = bv;
                m[(w, w + 2)] = bw;
            }
        }
        SonicPair { i, lu: m.lu() }
    }

    fn solve_pair(&self, u: &mut [f64], pair: &SonicPair) {
        let ny = self.grid.ny;
        let n = ny - 2;
        let i = pair.i;
        let (a, bv) = self.coeffs(i);
        let (_, bw) = self.coeffs(i + 1);
        let at = |i: usize, j: usize| u[i * ny + j];
        let mut rhs = DVector::zeros(2 * n);
        for r in 0..n {
            let z = at(i + 2, r + 1);
            rhs[2 * r] = -a * z;
            rhs[2 * r + 1] = -a * z;
        }
        rhs[0] -= bv * at(i, 0);
        rhs[1] -= bw * at(i + 1, 0);
        rhs[2 * n - 2] -= bv * at(i, ny - 1);
        rhs[2 * n - 1] -= bw * at(i + 1, ny - 1);
        let sol = pair.lu.solve(&rhs).expect("sonic pair system is nonsingular");
        for r in 0..n {
            u[i * ny + r + 1] = sol[2 * r];
            u[(i + 1) * ny + r + 1] = sol[2 * r + 1];
        }
    }

    fn coeffs(&self, i: usize) -> (f64, f64) {
        let hx = self.grid.hx();
        let hy = self.grid.hy();
        (1.0 / (hx * hx), self.k[i] / (hy * hy))
    }

    /// Discrete operator at node (i, j) divided by its diagonal coefficient.
    fn residual_at(&self, u: &[f64], line: Line, i: usize, j: usize) -> f64 {
        let ny = self.grid.ny;
        let at = |i: usize, j: usize| u[i * ny + j];
        let (a, b) = self.coeffs(i);
        let c = at(i, j);
        let uyy = at(i, j + 1) - 2.0 * c + at(i, j - 1);
        match line {
            Line::Centered => (a * (at(i + 1, j) - 2.0 * c + at(i - 1, j)) + b * uyy) / (2.0 * a + 2.0 * b),
            Line::Upwind => (a * (c - 2.0 * at(i + 1, j) + at(i + 2, j)) + b * uyy) / (a - 2.0 * b),
        }
    }

    fn residual(&self, u: &[f64]) -> f64 {
        let mut r = 0.0f64;
        for (i, line) in self.lines.iter().enumerate() {
            if let Some(line) = *line {
                for j in 1..self.grid.ny - 1 {
                    r = r.max(self.residual_at(u, line, i, j).abs());
                }
            }
        }
        r
    }

    /// Relaxed new values for the interior of column `i`, reading `u`.
    fn solve_line(&self, u: &[f64], i: usize, out: &mut Vec<f64>, work: &mut LineWork) {
        let ny = self.grid.ny;
        let n = ny - 2;
        let line = self.lines[i].expect("unknown column");
        let at = |i: usize, j: usize| u[i * ny + j];
        let (a, b) = self.coeffs(i);
        work.reset(n);
        let (diag, omega) = match line {
            Line::Centered => (-2.0 * a - 2.0 * b, self.omega),
            Line::Upwind => (a - 2.0 * b, 1.0),
        };
        for r in 0..n {
            let j = r + 1;
            work.lower[r] = b;
            work.upper[r] = b;
            work.diag[r] = diag;
            out[r] = match line {
                Line::Centered => -a * (at(i + 1, j) + at(i - 1, j)),
                Line::Upwind => a * (2.0 * at(i + 1, j) - at(i + 2, j)),
            };
        }
        out[0] -= b * at(i, 0);
        out[n - 1] -= b * at(i, ny - 1);
        tridiag::solve_in_place(&work.lower, &work.diag, &work.upper, &mut out[..n], &mut work.scratch);
        for r in 0..n {
            let old = at(i, r + 1);
            out[r] = old + omega * (out[r] - old);
        }
    }

    fn sweep(&self, u: &mut [f64], schedule: Schedule, work: &mut LineWork, buf: &mut Vec<f64>) {
        let ny = self.grid.ny;
        let paired = |i: usize| self.sonic.as_ref().is_some_and(|p| i == p.i || i == p.i + 1);
        match schedule {
            Schedule::Sequential => {
                buf.resize(ny, 0.0);
                for i in (0..self.grid.nx).rev() {
                    match &self.sonic {
                        Some(p) if i == p.i + 1 => self.solve_pair(u, p),
                        _ if paired(i) || self.lines[i].is_none() => {}
                        _ => {
                            self.solve_line(u, i, buf, work);
                            u[i * ny + 1..i * ny + ny - 1].copy_from_slice(&buf[..ny - 2]);
                        }
                    }
                }
            }
            Schedule::RedBlack { threads } => {
                let last = self.grid.nx - 1;
                let cols: Vec<usize> =
                    (0..self.grid.nx).rev().filter(|&i| self.lines[i].is_some() && !paired(i)).collect();
                for color in 0..2 {
                    let group: Vec<usize> = cols.iter().copied().filter(|&i| (last - i) % 2 == color).collect();
                    let new = self.solve_group(u, &group, threads.max(1));
                    for (&i, vals) in group.iter().zip(new) {
                        u[i * ny + 1..i * ny + ny - 1].copy_from_slice(&vals[..ny - 2]);
                    }
                }
                if let Some(p) = &self.sonic {
                    self.solve_pair(u, p);
                }
            }
        }
    }

    // Solves the given lines against a frozen `u`; any split over threads
    // yields the same values since no line reads another line of the group.
    fn solve_group(&self, u: &[f64], group: &[usize], threads: usize) -> Vec<Vec<f64>> {
        let ny = self.grid.ny;
        let one = |i: usize, work: &mut LineWork| {
            let mut out = vec![0.0; ny];
            self.solve_line(u, i, &mut out, work);
            out
        };
        if threads == 1 || group.len() < 2 {
            let mut work = LineWork::default();
            return group.iter().map(|&i| one(i, &mut work)).collect();
        }
        let chunk = group.len().div_ceil(threads);
        thread::scope(|s| {
            let handles: Vec<_> = group
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        let mut work = LineWork::default();
                        part.iter().map(|&i| one(i, &mut work)).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("line worker panicked")).collect()
        })
    }
}

#[derive(Default)]
struct LineWork {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper: Vec<f64>,
    scratch: Vec<f64>,
}

impl LineWork {
    fn reset(&mut self, n: usize) {
        self.lower.resize(n, 0.0);
        self.diag.resize(n, 0.0);
        self.upper.resize(n, 0.0);
    }
}

fn initial_field(grid: Grid2D, bc: &DirichletData) -> Field {
    let mut f = Field::zeros(grid);
    let (nx, ny) = (grid.nx, grid.ny);
    if let Some(v) = &bc.left {
        (0..ny).for_each(|j| f.set(0, j, v[j]));
    }
    if let Some(v) = &bc.right {
        (0..ny).for_each(|j| f.set(nx - 1, j, v[j]));
    }
    if let Some(v) = &bc.bottom {
        (0..nx).for_each(|i| f.set(i, 0, v[i]));
    }
    if let Some(v) = &bc.top {
        (0..nx).for_each(|i| f.set(i, ny - 1, v[i]));
    }
    f
}

fn relax(problem: &Problem, mut field: Field, bc: &DirichletData, opts: &RelaxOptions, mode: &str) -> Result<(Field, SolveReport)> {
    let target = opts.tol * (1.0 + bc.max_abs());
    let mut report = SolveReport::new(mode);
    let mut work = LineWork::default();
    let mut buf = Vec::new();
    let mut minimum = f64::INFINITY;
    for it in 1..=opts.max_iter {
        problem.sweep(&mut field.values, opts.schedule, &mut work, &mut buf);
        let r = problem.residual(&field.values);
        report.iterations = it;
        report.final_residual = r;
        report.residual_history.push(r);
        if !r.is_finite() || r > 100.0 * minimum {
            return Err(Error::DivergedResidual { residual: r, minimum });
        }
        minimum = minimum.min(r);
        if r <= target {
            return Ok((field, report));
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: report.final_residual })
}

/// Dirichlet problem on a grid where `K >= 0` everywhere.
pub fn solve_elliptic(
    spec: &EquationSpec,
    grid: Grid2D,
    bc: &DirichletData,
    opts: &RelaxOptions,
) -> Result<(Field, SolveReport)> {
    opts.validate()?;
    bc.validate(&grid)?;
    bc.require(Sides::ALL)?;
    for x in grid.xs() {
        let k = spec.eval_k(x)?;
        if k < 0.0 {
            return Err(Error::WrongRegion { x, k });
        }
    }
    let problem = Problem::new(spec, grid, false, opts.omega)?;
    relax(&problem, initial_field(grid, bc), bc, opts, "elliptic")
}

/// Type-switched problem with data on `x = x_max`, `y = y_min` and
/// `y = y_max`. Data on `x = x_min` is optional when that column is
/// hyperbolic and required otherwise.
pub fn solve_mixed(
    spec: &EquationSpec,
    grid: Grid2D,
    bc: &DirichletData,
    opts: &RelaxOptions,
) -> Result<(Field, SolveReport)> {
    opts.validate()?;
    bc.validate(&grid)?;
    bc.require(Sides::MIXED)?;
    let problem = Problem::new(spec, grid, bc.left.is_none(), opts.omega)?;
    relax(&problem, initial_field(grid, bc), bc, opts, "mixed")
}

/// Re-evaluates the scaled discrete residual of the elliptic or mixed
/// operator on `field`. `free_left` marks `x = x_min` as an unknown column.
pub fn mixed_residual(spec: &EquationSpec, field: &Field, free_left: bool) -> Result<f64> {
    let problem = Problem::new(spec, field.grid, free_left, 1.0)?;
    Ok(problem.residual(&field.values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::lookup;

    fn tricomi() -> EquationSpec {
        EquationSpec::tricomi()
    }

    fn bc_from(id: &str, grid: &Grid2D, sides: Sides) -> DirichletData {
        let sol = lookup(id).unwrap();
        DirichletData::sample(grid, sides, |x, y| sol.eval(x, y)).unwrap()
    }

    #[test]
    fn bilinear_is_reproduced() {
        let g = Grid2D::new(33, 33, (0.0, 1.0), (0.0, 1.0)).unwrap();
        let bc = bc_from("bilin", &g, Sides::ALL);
        // the scaled residual understates the error by about diag * |A^-1| ~ 300 here
        let (f, rep) = solve_elliptic(&tricomi(), g, &bc, &RelaxOptions::with_tol(1e-13)).unwrap();
        let (err, _) = f.interior_error(|x, y| x * y);
        assert!(err <= 1e-10, "{err} after {} iterations", rep.iterations);
    }

    #[test]
    fn zero_data_gives_zero_field() {
        let g = Grid2D::new(17, 17, (0.0, 1.0), (-1.0, 1.0)).unwrap();
        let bc = DirichletData::sample(&g, Sides::ALL, |_, _| Ok(0.0)).unwrap();
        let (f, rep) = solve_elliptic(&tricomi(), g, &bc, &RelaxOptions::default()).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn elliptic_rejects_hyperbolic_points() {
        let g = Grid2D::new(9, 9, (-0.5, 1.0), (-1.0, 1.0)).unwrap();
        let bc = DirichletData::sample(&g, Sides::ALL, |_, _| Ok(0.0)).unwrap();
        assert!(matches!(
            solve_elliptic(&tricomi(), g, &bc, &RelaxOptions::default()),
            Err(Error::WrongRegion { .. })
        ));
    }

    #[test]
    fn missing_and_inconsistent_data_rejected() {
        let g = Grid2D::new(9, 9, (0.0, 1.0), (-1.0, 1.0)).unwrap();
        let mut bc = bc_from("bilin", &g, Sides::ALL);
        bc.top.as_mut().unwrap()[0] += 1e-9;
        assert!(matches!(bc.validate(&g), Err(Error::InvalidBoundary(_))));
        let bc = bc_from("bilin", &g, Sides::MIXED);
        assert!(matches!(
            solve_elliptic(&tricomi(), g, &bc, &RelaxOptions::default()),
            Err(Error::InvalidBoundary(_))
        ));
        // x_min = 0 is degenerate, so the mixed solver needs data there too
        assert!(matches!(
            solve_mixed(&tricomi(), g, &bc, &RelaxOptions::default()),
            Err(Error::InvalidBoundary(_))
        ));
    }

    #[test]
    fn not_converged_is_reported() {
        let g = Grid2D::new(33, 33, (0.0, 1.0), (-1.0, 1.0)).unwrap();
        let bc = bc_from("quartic", &g, Sides::ALL);
        let opts = RelaxOptions { max_iter: 3, ..RelaxOptions::default() };
        assert!(matches!(solve_elliptic(&tricomi(), g, &bc, &opts), Err(Error::NotConverged { iterations: 3, .. })));
    }

    #[test]
    fn mixed_reproduces_linear_and_bilinear() {
        let g = Grid2D::new(33, 33, (-0.5, 1.0), (-1.0, 1.0)).unwrap();
        for (id, f) in [("bilin", (|x: f64, y: f64| x * y) as fn(f64, f64) -> f64), ("lin", |x, y| 1.0 + 2.0 * x - y / 2.0)] {
            let bc = bc_from(id, &g, Sides::MIXED);
            let (u, rep) = solve_mixed(&tricomi(), g, &bc, &RelaxOptions::with_tol(1e-12)).unwrap();
            // interior plus the free column x = x_min
            let mut err = u.interior_error(f).0;
            for j in 0..g.ny {
                err = err.max((u.at(0, j) - f(g.x_min, g.y(j))).abs());
            }
            assert!(err < 1e-9, "{id}: {err} after {}", rep.iterations);
        }
    }

    #[test]
    fn mixed_matches_elliptic_on_the_elliptic_side() {
        let g = Grid2D::new(33, 33, (0.0, 1.0), (-1.0, 1.0)).unwrap();
        let bc = bc_from("quartic", &g, Sides::ALL);
        let opts = RelaxOptions::with_tol(1e-12);
        let (a, _) = solve_elliptic(&tricomi(), g, &bc, &opts).unwrap();
        let (b, _) = solve_mixed(&tricomi(), g, &bc, &opts).unwrap();
        let diff = a.values.iter().zip(&b.values).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
        assert!(diff <= 1e-9);
    }

    #[test]
    fn residual_certificate_and_red_black_independence() {
        let g = Grid2D::new(33, 33, (-0.5, 1.0), (-1.0, 1.0)).unwrap();
        let bc = bc_from("quartic", &g, Sides::MIXED);
        let mut runs = Vec::new();
        for threads in [1, 3] {
            let opts = RelaxOptions { schedule: Schedule::RedBlack { threads }, ..RelaxOptions::with_tol(1e-11) };
            let (f, rep) = solve_mixed(&tricomi(), g, &bc, &opts).unwrap();
            let r = mixed_residual(&tricomi(), &f, true).unwrap();
            assert!(r <= 2.0 * rep.final_residual);
            runs.push((f, rep));
        }
        assert_eq!(runs[0], runs[1]);
    }
}
