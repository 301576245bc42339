//! Explicit marching for the hyperbolic Cauchy problem.
//!
//! With `K <= 0` the equation reads `u_xx = -K u_yy`, a wave equation in
//! which `-x` plays the role of time. Starting from `u` and `u_x` on
//! `x = x_max`, the leapfrog update
//!
//! ```text
//! u[i-1][j] = 2 u[i][j] - u[i+1][j] + hx^2 (-K_i) (u[i][j+1] - 2 u[i][j] + u[i][j-1]) / hy^2
//! ```
//!
//! advances one column at a time. The first step uses the Taylor start
//! `u - hx u_x + (hx^2 / 2) (-K u_yy)`. Stability needs
//! `sqrt(max|K|) hx <= hy`, which is checked before any work is done.

use super::{column_k, require_tricomi_form, CauchyData, SolveReport};
use crate::equation::EquationSpec;
use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

/// Growth of `max|u|` over the data that is treated as blow-up.
pub const GROWTH_LIMIT: f64 = 1e6;

pub fn solve_cauchy_hyperbolic(spec: &EquationSpec, grid: Grid2D, data: &CauchyData) -> Result<(Field, SolveReport)> {
    require_tricomi_form(spec)?;
    data.validate(&grid)?;
    let k = column_k(spec, &grid)?;
    if let Some((i, &kk)) = k.iter().enumerate().find(|(_, &kk)| kk > 0.0) {
        return Err(Error::WrongRegion { x: grid.x(i), k: kk });
    }
    let (hx, hy) = (grid.hx(), grid.hy());
    let k_max = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lhs = k_max.sqrt() * hx;
    if lhs > hy {
        return Err(Error::CflViolation { lhs, hx, hy, k_max });
    }
    let (nx, ny) = (grid.nx, grid.ny);
    let mut f = Field::zeros(grid);
    for i in 0..nx {
        f.set(i, 0, data.bottom[i]);
        f.set(i, ny - 1, data.top[i]);
    }
    for j in 0..ny {
        f.set(nx - 1, j, data.u[j]);
    }
    let scale = data.u.iter().chain(&data.u_x).chain(&data.bottom).chain(&data.top).fold(0.0f64, |m, v| m.max(v.abs()));
    let r = hx * hx / (hy * hy);
    let last = nx - 1;
    for j in 1..ny - 1 {
        let uyy = f.at(last, j + 1) - 2.0 * f.at(last, j) + f.at(last, j - 1);
        let v = f.at(last, j) - hx * data.u_x[j] + 0.5 * r * (-k[last]) * uyy;
        f.set(last - 1, j, v);
    }
    let mut peak = 0.0f64;
    for i in (1..last).rev() {
        for j in 1..ny - 1 {
            let uyy = f.at(i, j + 1) - 2.0 * f.at(i, j) + f.at(i, j - 1);
            let v = 2.0 * f.at(i, j) - f.at(i + 1, j) + r * (-k[i]) * uyy;
            peak = peak.max(v.abs());
            f.set(i - 1, j, v);
        }
        let growth = peak / scale.max(f64::MIN_POSITIVE);
        if !peak.is_finite() || growth > GROWTH_LIMIT {
            return Err(Error::Unstable { x: grid.x(i - 1), growth });
        }
    }
    let mut report = SolveReport::new("cauchy");
    report.iterations = nx - 1;
    report.final_residual = cauchy_residual(spec, &f)?;
    report.cfl_margin = Some(lhs / hy);
    Ok((f, report))
}

/// Scaled residual of the leapfrog equations on columns `1..nx-1`, i.e. the
/// update error divided by the coefficient of `u[i-1]`, in max norm.
pub fn cauchy_residual(spec: &EquationSpec, field: &Field) -> Result<f64> {
    let g = &field.grid;
    let k = column_k(spec, g)?;
    let r = g.hx() * g.hx() / (g.hy() * g.hy());
    let mut worst = 0.0f64;
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let uyy = field.at(i, j + 1) - 2.0 * field.at(i, j) + field.at(i, j - 1);
            let e = field.at(i - 1, j) - (2.0 * field.at(i, j) - field.at(i + 1, j) + r * (-k[i]) * uyy);
            worst = worst.max(e.abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::lookup;

    fn quartic_data(g: &Grid2D) -> CauchyData {
        let sol = lookup("quartic").unwrap();
        CauchyData::sample(g, |x, y| sol.eval(x, y), |x, y| sol.eval_dx(x, y)).unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid2D::new(17, 33, (-1.0, 0.0), (-1.0, 1.0)).unwrap();
        let z = vec![0.0; 33];
        let data = CauchyData { u: z.clone(), u_x: z, bottom: vec![0.0; 17], top: vec![0.0; 17] };
        let (f, rep) = solve_cauchy_hyperbolic(&EquationSpec::tricomi(), g, &data).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
        assert_eq!(rep.cfl_margin, Some(1.0 / 16.0 / (1.0 / 16.0)));
    }

    #[test]
    fn quartic_converges_second_order() {
        let mut errs = Vec::new();
        for n in [33, 65, 129] {
            let g = Grid2D::new(n, 4 * (n - 1) + 1, (-1.0, 0.0), (-2.0, 2.0)).unwrap();
            let (f, rep) = solve_cauchy_hyperbolic(&EquationSpec::tricomi(), g, &quartic_data(&g)).unwrap();
            assert_eq!(rep.cfl_margin, Some(1.0));
            errs.push(f.interior_error(|x, y| 3.0 * x * y * y - x.powi(4) / 2.0).0);
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    #[test]
    fn cfl_is_sharp() {
        let sol = lookup("quartic").unwrap();
        // max|K| = 1 on [-1, 0], so the margin is hx / hy
        for (ratio, ok) in [(1.05, false), (0.95, true)] {
            let half = 2.0 / ratio;
            let g = Grid2D::new(33, 129, (-1.0, 0.0), (-half, half)).unwrap();
            let res = solve_cauchy_hyperbolic(&EquationSpec::tricomi(), g, &quartic_data(&g));
            if ok {
                let (f, rep) = res.unwrap();
                assert!((rep.cfl_margin.unwrap() - ratio).abs() < 1e-12);
                let oracle = Field::try_from_fn(g, |x, y| sol.eval(x, y)).unwrap();
                assert!(f.max_abs() <= 10.0 * oracle.max_abs());
            } else {
                assert!(matches!(res, Err(Error::CflViolation { .. })), "{res:?}");
            }
        }
    }

    #[test]
    fn refuses_elliptic_points() {
        let g = Grid2D::new(9, 9, (-1.0, 0.5), (-1.0, 1.0)).unwrap();
        let data = quartic_data(&g);
        assert!(matches!(
            solve_cauchy_hyperbolic(&EquationSpec::tricomi(), g, &data),
            Err(Error::WrongRegion { .. })
        ));
    }
}
