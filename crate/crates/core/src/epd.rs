//! Reduction to Euler-Poisson-Darboux form.
//!
//! On either side of the sonic line the power map `tau = c |x|^q` turns a
//! power-law equation into
//!
//! ```text
//! u_tt ± u_yy~ + (beta / tau) u_t = 0,      y~ = y / y_scale
//! ```
//!
//! with `+` on the elliptic side and `-` on the hyperbolic side. Applying the
//! chain rule to `u(tau(x), y)` gives, for both forms, `beta = 1 - 1/q` and
//! `y_scale = 1 / (c q)`:
//!
//! - Tricomi form, `K = sign(x)|x|^m`: `q = (m+2)/2`, `c = 2/(m+2)`, so
//!   `beta = m/(m+2)` (1/3 for the Tricomi equation) and `y_scale = 1`.
//! - Keldysh form: `q = (2-m)/2`, `beta = -m/(2-m)`. For `m = 1` the map
//!   `tau = (1/2)|x|^(1/2)` is used as stated for the Keldysh equation,
//!   which needs `y_scale = 4` and gives `beta = -1`. The commonly quoted
//!   index `-1/4` is kept alongside as [`EpdReduction::quoted_beta`];
//!   [`fit_beta`] on a Keldysh solution measures `-1`.
//!
//! `beta` is invariant under `c -> k c` since `y_scale` absorbs the factor.

use serde::{Deserialize, Serialize};

use crate::equation::{EquationSpec, Form};
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::grid::{Field, Grid2D};

/// Default width of the band around the sonic line excluded from resampling.
pub const DEFAULT_X_CUT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Elliptic,
    Hyperbolic,
}

impl Side {
    /// Sign of the `u_yy` term in the reduced equation.
    pub fn sign(self) -> f64 {
        match self {
            Side::Elliptic => 1.0,
            Side::Hyperbolic => -1.0,
        }
    }

    fn accepts(self, x: f64) -> bool {
        match self {
            Side::Elliptic => x >= 0.0,
            Side::Hyperbolic => x <= 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpdReduction {
    pub spec: EquationSpec,
    pub side: Side,
    pub tau_coeff: f64,
    pub tau_exp: f64,
    pub beta: f64,
    pub y_scale: f64,
    /// Index quoted for this equation in the literature, when it differs in
    /// provenance from the chain-rule value (Keldysh equation: -1/4).
    pub quoted_beta: Option<f64>,
}

/// Chain-rule reduction of a power-law equation.
pub fn reduce(spec: &EquationSpec, side: Side) -> Result<EpdReduction> {
    let m = spec.coeff.exponent().ok_or(Error::NotPowerLaw)?;
    let (c, q, quoted) = match spec.form {
        Form::Tricomi => (2.0 / (m + 2.0), (m + 2.0) / 2.0, None),
        Form::Keldysh => {
            if m >= 2.0 {
                return Err(Error::UnsupportedExponent { m, form: "keldysh" });
            }
            if m == 1.0 {
                (0.5, 0.5, Some(-0.25))
            } else {
                (2.0 / (2.0 - m), (2.0 - m) / 2.0, None)
            }
        }
    };
    let beta = match spec.form {
        Form::Tricomi => m / (m + 2.0),
        Form::Keldysh => -m / (2.0 - m),
    };
    Ok(EpdReduction {
        spec: spec.clone(),
        side,
        tau_coeff: c,
        tau_exp: q,
        beta,
        y_scale: 1.0 / (c * q),
        quoted_beta: quoted,
    })
}

impl EpdReduction {
    /// Same reduction with `tau` rescaled by `k` (and `y_scale` to match).
    pub fn rescaled(&self, k: f64) -> Self {
        let c = self.tau_coeff * k;
        Self { tau_coeff: c, y_scale: 1.0 / (c * self.tau_exp), ..self.clone() }
    }

    pub fn tau_of_x(&self, x: f64) -> Result<f64> {
        if !self.side.accepts(x) {
            return Err(Error::WrongSide { x });
        }
        Ok(self.tau_coeff * x.abs().powf(self.tau_exp))
    }

    pub fn x_of_tau(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("tau must be non-negative, got {tau}")));
        }
        let a = (tau / self.tau_coeff).powf(1.0 / self.tau_exp);
        Ok(match self.side {
            Side::Elliptic => a,
            Side::Hyperbolic => -a,
        })
    }

    /// Human-readable form of the map, e.g. `tau = 0.6667 * (x)^1.5`.
    pub fn describe_map(&self) -> String {
        let arg = match self.side {
            Side::Elliptic => "x",
            Side::Hyperbolic => "-x",
        };
        format!("tau = {} * ({arg})^{}", self.tau_coeff, self.tau_exp)
    }
}

/// A field resampled onto a uniform `(tau, y / y_scale)` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TauField {
    /// `grid.x_*` hold tau, `grid.y_*` hold the scaled `y`.
    pub field: Field,
    pub provenance: String,
}

impl TauField {
    pub fn grid(&self) -> &Grid2D {
        &self.field.grid
    }
}

// 4-point Lagrange interpolation on a uniform axis, in Newton forward-difference
// form so constants and low-degree data are reproduced without weight rounding.
// `t` is the fractional index.
fn lagrange4(values: impl Fn(usize) -> f64, n: usize, t: f64) -> f64 {
    let i0 = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = t - i0 as f64;
    let (v0, v1, v2, v3) = (values(i0), values(i0 + 1), values(i0 + 2), values(i0 + 3));
    let d1 = v1 - v0;
    let d2 = v2 - 2.0 * v1 + v0;
    let d3 = v3 - 3.0 * v2 + 3.0 * v1 - v0;
    v0 + s * (d1 + (s - 1.0) / 2.0 * (d2 + (s - 2.0) / 3.0 * d3))
}

/// Resample `field` onto the reduction's `(tau, y~)` grid with cubic
/// interpolation along `x`, excluding `|x| < x_cut`. Grid sizes are kept.
pub fn transform_field(
    field: &Field,
    red: &EpdReduction,
    x_cut: f64,
    provenance: &str,
) -> Result<TauField> {
    let g = &field.grid;
    if g.x_min <= 0.0 && g.x_max >= 0.0 {
        return Err(Error::CrossesSonicLine { x_min: g.x_min, x_max: g.x_max });
    }
    if !red.side.accepts(g.x_min) {
        return Err(Error::WrongSide { x: g.x_min });
    }
    if g.nx < 4 {
        return Err(Error::GridTooSmall { nx: g.nx, ny: g.ny, need: 4 });
    }
    let (near, far) = match red.side {
        Side::Elliptic => (g.x_min, g.x_max),
        Side::Hyperbolic => (g.x_max, g.x_min),
    };
    let near = if near.abs() < x_cut { near.signum() * x_cut } else { near };
    if far.abs() <= near.abs() {
        return Err(Error::InvalidGrid(format!(
            "x-range lies inside the excluded band |x| < {x_cut}"
        )));
    }
    let t0 = red.tau_of_x(near)?;
    let t1 = red.tau_of_x(far)?;
    let tg = Grid2D::new(g.nx, g.ny, (t0, t1), (g.y_min / red.y_scale, g.y_max / red.y_scale))?;
    let hx = g.hx();
    let mut values = Vec::with_capacity(tg.len());
    for k in 0..tg.nx {
        // endpoints map back exactly
        let x = match k {
            0 => near,
            _ if k == tg.nx - 1 => far,
            _ => red.x_of_tau(tg.x(k))?,
        };
        let t = ((x - g.x_min) / hx).clamp(0.0, (g.nx - 1) as f64);
        for j in 0..g.ny {
            values.push(lagrange4(|i| field.at(i, j), g.nx, t));
        }
    }
    Ok(TauField { field: Field::new(tg, values)?, provenance: provenance.to_string() })
}

/// Resample a tau field back onto an `(x, y)` grid on the same side, using
/// cubic interpolation along `tau`. `grid.ny` must match.
pub fn inverse_transform(tf: &TauField, red: &EpdReduction, grid: Grid2D) -> Result<Field> {
    let tg = tf.grid();
    if grid.ny != tg.ny {
        return Err(Error::InvalidGrid(format!("ny {} does not match tau grid ny {}", grid.ny, tg.ny)));
    }
    let ht = tg.hx();
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.nx {
        let tau = red.tau_of_x(grid.x(i))?;
        let t = (tau - tg.x_min) / ht;
        if t < -1e-9 || t > (tg.nx - 1) as f64 + 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "x = {} maps outside the tau grid",
                grid.x(i)
            )));
        }
        let t = t.clamp(0.0, (tg.nx - 1) as f64);
        for j in 0..grid.ny {
            values.push(lagrange4(|k| tf.field.at(k, j), tg.nx, t));
        }
    }
    Field::new(grid, values)
}

// Interior second differences: (u_tt + sign u_yy, u_t / tau) at (i, j).
fn stencil_parts(tf: &TauField, sign: f64, i: usize, j: usize) -> (f64, f64) {
    let f = &tf.field;
    let g = &f.grid;
    let (ht, hy) = (g.hx(), g.hy());
    let u = f.at(i, j);
    let u_tt = (f.at(i + 1, j) - 2.0 * u + f.at(i - 1, j)) / (ht * ht);
    let u_yy = (f.at(i, j + 1) - 2.0 * u + f.at(i, j - 1)) / (hy * hy);
    let u_t = (f.at(i + 1, j) - f.at(i - 1, j)) / (2.0 * ht);
    (u_tt + sign * u_yy, u_t / g.x(i))
}

fn check_tau_field(tf: &TauField) -> Result<()> {
    let g = tf.grid();
    if g.nx < 3 || g.ny < 3 {
        return Err(Error::GridTooSmall { nx: g.nx, ny: g.ny, need: 3 });
    }
    if g.x_min <= 0.0 {
        return Err(Error::InvalidGrid(format!("tau must be positive, grid starts at {}", g.x_min)));
    }
    Ok(())
}

/// Pointwise `u_tt ± u_yy + (beta/tau) u_t` at interior nodes; zero on the boundary.
pub fn epd_residual(tf: &TauField, beta: f64, sign: f64) -> Result<Field> {
    check_tau_field(tf)?;
    let g = *tf.grid();
    let mut out = Field::zeros(g);
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let (a, b) = stencil_parts(tf, sign, i, j);
            out.set(i, j, a + beta * b);
        }
    }
    Ok(out)
}

/// Least-squares index: the residual is affine in beta, so the minimiser of
/// its L2 norm is `-<A, B> / <B, B>` with `A = u_tt ± u_yy`, `B = u_t / tau`.
pub fn fit_beta(tf: &TauField, sign: f64) -> Result<f64> {
    check_tau_field(tf)?;
    let g = tf.grid();
    let (mut ab, mut bb) = (0.0, 0.0);
    let mut n = 0usize;
    for i in 1..g.nx - 1 {
        for j in 1..g.ny - 1 {
            let (a, b) = stencil_parts(tf, sign, i, j);
            ab += a * b;
            bb += b * b;
            n += 1;
        }
    }
    let norm = (bb / n as f64).sqrt();
    if norm < 1e-14 {
        return Err(Error::DegenerateFit { norm });
    }
    Ok(-ab / bb)
}

/// Sample `sol` on an `n x n` grid over `x_range x y_range`, transform, and fit beta.
pub fn fit_beta_on(
    red: &EpdReduction,
    sol: &ExactSolution,
    x_range: (f64, f64),
    y_range: (f64, f64),
    n: usize,
) -> Result<f64> {
    let g = Grid2D::new(n, n, x_range, y_range)?;
    let field = Field::try_from_fn(g, |x, y| sol.eval(x, y))?;
    let tf = transform_field(&field, red, DEFAULT_X_CUT, &sol.id)?;
    fit_beta(&tf, red.side.sign())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::lookup;
    use proptest::prelude::*;

    fn tricomi_m(m: f64) -> EquationSpec {
        EquationSpec::power_law(Form::Tricomi, m).unwrap()
    }

    #[test]
    fn tricomi_reduction() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        assert!((r.tau_coeff - 2.0 / 3.0).abs() < 1e-16);
        assert_eq!(r.tau_exp, 1.5);
        assert!((r.beta - 1.0 / 3.0).abs() < 1e-16);
        assert!((r.y_scale - 1.0).abs() < 1e-15);
        assert!(r.quoted_beta.is_none());
    }

    #[test]
    fn beta_vanishes_as_m_goes_to_zero() {
        let mut prev = f64::INFINITY;
        for m in [1e-1, 1e-3, 1e-6, 1e-9] {
            let b = reduce(&tricomi_m(m), Side::Elliptic).unwrap().beta;
            assert!(b < prev && b <= m);
            prev = b;
        }
        assert!(prev < 1e-9);
    }

    #[test]
    fn tricomi_m2_beta() {
        // tau = (1/2) x^2: tau' = x, tau'' = 1, tau'^2 = x^2 = K; u_tau coefficient
        // tau''/tau'^2 = 1/x^2 = 1/(2 tau), so beta = 1/2
        let r = reduce(&tricomi_m(2.0), Side::Elliptic).unwrap();
        assert_eq!(r.beta, 0.5);
        assert_eq!(r.tau_coeff, 0.5);
        assert_eq!(r.tau_exp, 2.0);
    }

    #[test]
    fn keldysh_reduction() {
        let r = reduce(&EquationSpec::keldysh(), Side::Elliptic).unwrap();
        assert_eq!((r.tau_coeff, r.tau_exp), (0.5, 0.5));
        assert_eq!(r.beta, -1.0);
        assert_eq!(r.y_scale, 4.0);
        assert_eq!(r.quoted_beta, Some(-0.25));
        let k = EquationSpec::power_law(Form::Keldysh, 2.0).unwrap();
        assert!(matches!(reduce(&k, Side::Elliptic), Err(Error::UnsupportedExponent { .. })));
        let k = EquationSpec::power_law(Form::Keldysh, 0.5).unwrap();
        let r = reduce(&k, Side::Elliptic).unwrap();
        assert!((r.tau_coeff - 4.0 / 3.0).abs() < 1e-15);
        assert!((r.y_scale - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tau_map_examples() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        assert!((r.tau_of_x(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-16);
        assert_eq!(r.tau_of_x(0.0).unwrap(), 0.0);
        assert!((r.tau_of_x(4.0).unwrap() - 16.0 / 3.0).abs() < 1e-14);
        assert!((r.x_of_tau(16.0 / 3.0).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(r.tau_of_x(-1.0), Err(Error::WrongSide { .. })));
        let h = reduce(&EquationSpec::tricomi(), Side::Hyperbolic).unwrap();
        assert!((h.tau_of_x(-1.0).unwrap() - 2.0 / 3.0).abs() < 1e-16);
        assert!(matches!(h.tau_of_x(1.0), Err(Error::WrongSide { .. })));
    }

    proptest! {
        #[test]
        fn tau_round_trip(e in -8.0f64..3.0, m in 0.2f64..3.5, hyper in any::<bool>()) {
            let side = if hyper { Side::Hyperbolic } else { Side::Elliptic };
            let x = if hyper { -(10f64.powf(e)) } else { 10f64.powf(e) };
            for form in [Form::Tricomi, Form::Keldysh] {
                let Ok(r) = reduce(&EquationSpec::power_law(form, m).unwrap(), side) else { continue };
                let back = r.x_of_tau(r.tau_of_x(x).unwrap()).unwrap();
                prop_assert!(((back - x) / x).abs() <= 1e-12, "{} -> {}", x, back);
            }
        }

        #[test]
        fn tau_monotone(a in 0.0f64..100.0, b in 0.0f64..100.0) {
            let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
            prop_assume!(a < b);
            prop_assert!(r.tau_of_x(a).unwrap() < r.tau_of_x(b).unwrap());
        }
    }

    fn grid(x: (f64, f64), n: usize) -> Grid2D {
        Grid2D::new(n, n, x, (-1.0, 1.0)).unwrap()
    }

    #[test]
    fn constant_field_stays_constant() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let f = Field::constant(grid((0.5, 2.0), 17), 1.0);
        let tf = transform_field(&f, &r, DEFAULT_X_CUT, "one").unwrap();
        assert!(tf.field.values.iter().all(|&v| v == 1.0));
        let res = epd_residual(&tf, r.beta, 1.0).unwrap();
        assert!(res.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn linear_x_maps_to_power_of_tau() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let f = Field::from_fn(grid((1.0, 2.0), 65), |x, _| x);
        let tf = transform_field(&f, &r, DEFAULT_X_CUT, "x").unwrap();
        let g = tf.grid();
        let mut worst = 0.0f64;
        for i in 0..g.nx {
            let want = (1.5 * g.x(i)).powf(2.0 / 3.0);
            worst = worst.max((tf.field.at(i, 3) - want).abs());
        }
        // u = x is reproduced exactly by cubic interpolation, only the map rounds
        assert!(worst < 1e-14, "{worst}");
    }

    #[test]
    fn linear_y_has_zero_residual_and_degenerate_fit() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let f = Field::from_fn(grid((0.5, 2.0), 33), |_, y| y);
        let tf = transform_field(&f, &r, DEFAULT_X_CUT, "y").unwrap();
        let res = epd_residual(&tf, 0.3, 1.0).unwrap();
        assert!(res.max_abs() < 1e-10, "{}", res.max_abs());
        assert!(matches!(fit_beta(&tf, 1.0), Err(Error::DegenerateFit { .. })));
    }

    #[test]
    fn rejects_sonic_crossing_and_small_grids() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let f = Field::constant(grid((-0.5, 1.0), 9), 1.0);
        assert!(matches!(transform_field(&f, &r, DEFAULT_X_CUT, ""), Err(Error::CrossesSonicLine { .. })));
        let f = Field::constant(grid((-2.0, -1.0), 9), 1.0);
        assert!(matches!(transform_field(&f, &r, DEFAULT_X_CUT, ""), Err(Error::WrongSide { .. })));
        let g = Grid2D::new(3, 3, (1.0, 2.0), (0.0, 1.0)).unwrap();
        let tf = TauField { field: Field::zeros(g), provenance: String::new() };
        assert!(epd_residual(&tf, 0.0, 1.0).is_ok());
        let g = Grid2D::new(3, 3, (0.0, 2.0), (0.0, 1.0)).unwrap();
        let tf = TauField { field: Field::zeros(g), provenance: String::new() };
        assert!(epd_residual(&tf, 0.0, 1.0).is_err());
    }

    #[test]
    fn residual_is_affine_in_beta() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let sol = lookup("airy_1").unwrap();
        let f = Field::try_from_fn(grid((0.5, 2.5), 33), |x, y| sol.eval(x, y)).unwrap();
        let tf = transform_field(&f, &r, DEFAULT_X_CUT, "airy_1").unwrap();
        let (b1, b2) = (0.9, -0.4);
        let r1 = epd_residual(&tf, b1, 1.0).unwrap();
        let r2 = epd_residual(&tf, b2, 1.0).unwrap();
        let g = tf.grid();
        for i in 1..g.nx - 1 {
            for j in 1..g.ny - 1 {
                let (_, b) = stencil_parts(&tf, 1.0, i, j);
                let d = r1.at(i, j) - r2.at(i, j);
                assert!((d - (b1 - b2) * b).abs() <= 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn residual_converges_second_order() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let sol = lookup("airy_1").unwrap();
        let mut errs = Vec::new();
        for n in [33, 65, 129] {
            let f = Field::try_from_fn(grid((1.0, 2.0), n), |x, y| sol.eval(x, y)).unwrap();
            let tf = transform_field(&f, &r, DEFAULT_X_CUT, "airy_1").unwrap();
            errs.push(epd_residual(&tf, r.beta, 1.0).unwrap().max_abs());
        }
        assert!(errs[0] / errs[1] >= 3.5 && errs[1] / errs[2] >= 3.5, "{errs:?}");
    }

    #[test]
    fn inverse_resampling_round_trip() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let sol = lookup("airy_1").unwrap();
        let g = grid((0.5, 2.5), 65);
        let f = Field::try_from_fn(g, |x, y| sol.eval(x, y)).unwrap();
        let tf = transform_field(&f, &r, DEFAULT_X_CUT, "airy_1").unwrap();
        let back = inverse_transform(&tf, &r, g).unwrap();
        let err = back
            .values
            .iter()
            .zip(&f.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        // cubic Lagrange error is at most h^4 M4 / 24 per pass, with M4 the
        // largest fourth derivative along the interpolation axis, estimated by
        // fourth differences of the exact solution
        let d4 = |f: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            let d = 1e-2;
            (0..=200)
                .map(|k| a + (b - a) * k as f64 / 200.0)
                .map(|t| {
                    (f(t - 2.0 * d) - 4.0 * f(t - d) + 6.0 * f(t) - 4.0 * f(t + d) + f(t + 2.0 * d))
                        .abs()
                        / d.powi(4)
                })
                .fold(0.0f64, f64::max)
        };
        let ai = |x: f64| sol.eval(x, 0.0).unwrap();
        let ai_tau = |t: f64| sol.eval(r.x_of_tau(t).unwrap(), 0.0).unwrap();
        let tg = tf.grid();
        let m4x = d4(&ai, 0.5, 2.5);
        let m4t = d4(&ai_tau, tg.x_min + 0.02, tg.x_max - 0.02);
        let bound = g.hx().powi(4) * m4x / 24.0 + tg.hx().powi(4) * m4t / 24.0;
        assert!(err <= 10.0 * bound, "{err} vs {bound}");
    }

    #[test]
    fn fit_recovers_tricomi_index() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let b = fit_beta_on(&r, &lookup("airy_1").unwrap(), (0.5, 2.5), (-1.0, 1.0), 257).unwrap();
        assert!((b - 1.0 / 3.0).abs() <= 0.01, "{b}");
    }

    #[test]
    fn fit_recovers_index_formula() {
        for (id, m) in [("power_m1", 1.0), ("power_m2", 2.0), ("power_m3", 3.0)] {
            let sol = lookup(id).unwrap();
            for (side, xr) in [(Side::Elliptic, (0.5, 1.5)), (Side::Hyperbolic, (-1.5, -0.5))] {
                let r = reduce(&tricomi_m(m), side).unwrap();
                let b = fit_beta_on(&r, &sol, xr, (-1.0, 1.0), 257).unwrap();
                assert!((b - m / (m + 2.0)).abs() <= 0.02, "{id} {side:?}: {b}");
            }
        }
    }

    #[test]
    fn keldysh_fit_matches_chain_rule() {
        let r = reduce(&EquationSpec::keldysh(), Side::Elliptic).unwrap();
        for id in ["keldysh_poly", "keldysh_poly5"] {
            let b = fit_beta_on(&r, &lookup(id).unwrap(), (0.5, 1.5), (-1.0, 1.0), 129).unwrap();
            // chain rule: u = x^2 - x y^2 is 16 t^4 - 64 t^2 y~^2, whose residual
            // 192 t^2 - 128 y~^2 - 128 t^2 + beta (64 t^2 - 128 y~^2) vanishes at beta = -1
            assert!((b + 1.0).abs() <= 0.02, "{id}: {b}");
            assert!((b - r.quoted_beta.unwrap()).abs() > 0.5);
        }
    }

    #[test]
    fn fit_is_scale_invariant() {
        let r = reduce(&EquationSpec::tricomi(), Side::Elliptic).unwrap();
        let sol = lookup("airy_1").unwrap();
        let b1 = fit_beta_on(&r, &sol, (0.5, 2.5), (-1.0, 1.0), 65).unwrap();
        let b4 = fit_beta_on(&r.rescaled(4.0), &sol, (0.5, 2.5), (-1.0, 1.0), 65).unwrap();
        assert!((b1 - b4).abs() < 1e-6);
    }
}
