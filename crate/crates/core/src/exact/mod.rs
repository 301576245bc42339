//! Exact solutions of the canonical equations, used as oracles.
//!
//! | id              | equation         | u(x, y)                                   |
//! |-----------------|------------------|-------------------------------------------|
//! | `lin`           | Tricomi          | `1 + 2x - y/2`                            |
//! | `bilin`         | Tricomi          | `xy`                                      |
//! | `quartic`       | Tricomi          | `3xy^2 - x^4/2`                           |
//! | `airy_1`        | Tricomi          | `Ai(x) cos(y)`                            |
//! | `airy_2`        | Tricomi          | `Ai(2^(2/3) x) cos(2y)`                   |
//! | `power_m{1,2,3}`| Tricomi form, m  | `x + xy + y^2 - 2 sign(x)|x|^(m+2)/((m+1)(m+2))` |
//! | `keldysh_poly`  | Keldysh          | `x^2 - xy^2`                              |
//! | `keldysh_poly5` | Keldysh          | `x^3 - 3x^2y^2 + xy^4/2`                  |
//!
//! The Keldysh polynomials come from an undetermined-coefficients search
//! over monomials of degree at most five; the search lives in the test
//! suite (`tests/keldysh_search.rs`).

pub mod airy;

use std::fmt;
use std::sync::Arc;

use crate::equation::{signed_power, EquationSpec, Form};
use crate::error::{Error, Result};

pub use airy::{airy_ai, airy_ai_prime, airy_pair};

type Eval = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Where an exact solution may be evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Validity {
    WholePlane,
    /// `x >= x0` when `right`, else `x <= x0`.
    HalfPlane { x0: f64, right: bool },
    Rectangle { x_min: f64, x_max: f64, y_min: f64, y_max: f64 },
}

impl Validity {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Validity::WholePlane => x.is_finite() && y.is_finite(),
            Validity::HalfPlane { x0, right } => y.is_finite() && if right { x >= x0 } else { x <= x0 },
            Validity::Rectangle { x_min, x_max, y_min, y_max } => {
                (x_min..=x_max).contains(&x) && (y_min..=y_max).contains(&y)
            }
        }
    }

    /// Whether the square of half-width `margin` around the point is inside.
    pub fn contains_with_margin(&self, x: f64, y: f64, margin: f64) -> bool {
        [(-margin, -margin), (-margin, margin), (margin, -margin), (margin, margin)]
            .iter()
            .all(|&(dx, dy)| self.contains(x + dx, y + dy))
    }
}

#[derive(Clone)]
pub struct ExactSolution {
    pub id: String,
    pub spec: EquationSpec,
    pub validity: Validity,
    /// Bound used by the registry check for `pde_residual` at `h = 1e-3`
    /// over `sample_box`.
    pub residual_tol: f64,
    /// Region sampled by the registry check.
    pub sample_box: [f64; 4],
    pub formula: &'static str,
    u: Eval,
    u_x: Eval,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution")
            .field("id", &self.id)
            .field("spec", &self.spec)
            .field("validity", &self.validity)
            .field("formula", &self.formula)
            .finish()
    }
}

impl ExactSolution {
    fn check(&self, x: f64, y: f64) -> Result<()> {
        if self.validity.contains(x, y) {
            Ok(())
        } else {
            Err(Error::OutsideValidity { id: self.id.clone(), x, y })
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x, y)?;
        Ok((self.u)(x, y))
    }

    /// `u_x`, for Cauchy data.
    pub fn eval_dx(&self, x: f64, y: f64) -> Result<f64> {
        self.check(x, y)?;
        Ok((self.u_x)(x, y))
    }
}

fn entry(
    id: &str,
    spec: EquationSpec,
    validity: Validity,
    residual_tol: f64,
    sample_box: [f64; 4],
    formula: &'static str,
    u: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    u_x: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
) -> ExactSolution {
    ExactSolution {
        id: id.to_string(),
        spec,
        validity,
        residual_tol,
        sample_box,
        formula,
        u: Arc::new(u),
        u_x: Arc::new(u_x),
    }
}

fn airy_entry(k: f64, id: &str, formula: &'static str) -> ExactSolution {
    let scale = k.powf(2.0 / 3.0);
    let reach = airy::DOMAIN / scale;
    // Ai(scale * x) cos(k y); Ai'' = z Ai gives u_xx = k^2 x u = -x u_yy
    entry(
        id,
        EquationSpec::tricomi(),
        Validity::Rectangle { x_min: -reach, x_max: reach, y_min: f64::MIN, y_max: f64::MAX },
        1e-6,
        [-5.0, 5.0, -2.0, 2.0],
        formula,
        move |x, y| airy_ai(scale * x).unwrap_or(f64::NAN) * (k * y).cos(),
        move |x, y| scale * airy_ai_prime(scale * x).unwrap_or(f64::NAN) * (k * y).cos(),
    )
}

fn power_entry(m: f64, id: &str, formula: &'static str) -> ExactSolution {
    let c = 2.0 / ((m + 1.0) * (m + 2.0));
    entry(
        id,
        EquationSpec::power_law(Form::Tricomi, m).expect("positive exponent"),
        Validity::WholePlane,
        1e-7,
        [-2.0, 2.0, -2.0, 2.0],
        formula,
        move |x, y| x + x * y + y * y - c * signed_power(x, m + 2.0),
        move |x, y| 1.0 + y - 2.0 / (m + 1.0) * x.abs().powf(m + 1.0),
    )
}

/// All registered exact solutions.
pub fn registry() -> Vec<ExactSolution> {
    let box2 = [-2.0, 2.0, -2.0, 2.0];
    vec![
        entry(
            "lin",
            EquationSpec::tricomi(),
            Validity::WholePlane,
            1e-7,
            box2,
            "1 + 2x - y/2",
            |x, y| 1.0 + 2.0 * x - 0.5 * y,
            |_, _| 2.0,
        ),
        entry(
            "bilin",
            EquationSpec::tricomi(),
            Validity::WholePlane,
            1e-7,
            box2,
            "xy",
            |x, y| x * y,
            |_, y| y,
        ),
        entry(
            "quartic",
            EquationSpec::tricomi(),
            Validity::WholePlane,
            1e-7,
            box2,
            "3xy^2 - x^4/2",
            |x, y| 3.0 * x * y * y - 0.5 * x * x * x * x,
            |x, y| 3.0 * y * y - 2.0 * x * x * x,
        ),
        airy_entry(1.0, "airy_1", "Ai(x) cos(y)"),
        airy_entry(2.0, "airy_2", "Ai(2^(2/3) x) cos(2y)"),
        power_entry(1.0, "power_m1", "x + xy + y^2 - x^3/3"),
        power_entry(2.0, "power_m2", "x + xy + y^2 - sign(x) x^4/6"),
        power_entry(3.0, "power_m3", "x + xy + y^2 - x^5/10"),
        entry(
            "keldysh_poly",
            EquationSpec::keldysh(),
            Validity::WholePlane,
            1e-7,
            box2,
            "x^2 - xy^2",
            |x, y| x * x - x * y * y,
            |x, y| 2.0 * x - y * y,
        ),
        entry(
            "keldysh_poly5",
            EquationSpec::keldysh(),
            Validity::WholePlane,
            1e-7,
            box2,
            "x^3 - 3x^2y^2 + xy^4/2",
            |x, y| x * x * x - 3.0 * x * x * y * y + 0.5 * x * y * y * y * y,
            |x, y| 3.0 * x * x - 6.0 * x * y * y + 0.5 * y * y * y * y,
        ),
    ]
}

pub fn lookup(id: &str) -> Result<ExactSolution> {
    registry()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownOracle(id.to_string()))
}

/// Fourth-order centered second derivative.
fn d2_4th<F: Fn(f64) -> f64>(f: F, t: f64, h: f64) -> f64 {
    (-f(t + 2.0 * h) + 16.0 * f(t + h) - 30.0 * f(t) + 16.0 * f(t - h) - f(t - 2.0 * h)) / (12.0 * h * h)
}

/// Max absolute residual of the governing equation at `points`, with
/// fourth-order centered differences of spacing `h`.
pub fn pde_residual(sol: &ExactSolution, points: &[(f64, f64)], h: f64) -> Result<f64> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::InvalidArgument(format!("spacing must be positive, got {h}")));
    }
    let mut worst = 0.0f64;
    for &(x, y) in points {
        if !sol.validity.contains_with_margin(x, y, 2.0 * h) {
            return Err(Error::OutsideValidity { id: sol.id.clone(), x, y });
        }
        let u_xx = d2_4th(|t| (sol.u)(t, y), x, h);
        let u_yy = d2_4th(|t| (sol.u)(x, t), y, h);
        let k = sol.spec.eval_k(x)?;
        let r = match sol.spec.form {
            Form::Tricomi => u_xx + k * u_yy,
            Form::Keldysh => k * u_xx + u_yy,
        };
        worst = worst.max(r.abs());
    }
    Ok(worst)
}

/// Additive recurrence (Kronecker) sequence in a box; deterministic.
pub fn quasi_random_points(n: usize, bbox: [f64; 4]) -> Vec<(f64, f64)> {
    // plastic-number based R2 sequence
    let g = 1.324_717_957_244_746_f64;
    let a1 = 1.0 / g;
    let a2 = 1.0 / (g * g);
    (0..n)
        .map(|i| {
            let u = (0.5 + a1 * i as f64).fract();
            let v = (0.5 + a2 * i as f64).fract();
            (bbox[0] + (bbox[1] - bbox[0]) * u, bbox[2] + (bbox[3] - bbox[2]) * v)
        })
        .collect()
}

/// Registry check: `pde_residual` at `n` quasi-random points of the
/// entry's sample box, shrunk by the stencil margin.
pub fn registry_residual(sol: &ExactSolution, n: usize, h: f64) -> Result<f64> {
    let m = 2.0 * h;
    let b = sol.sample_box;
    let pts = quasi_random_points(n, [b[0] + m, b[1] - m, b[2] + m, b[3] - m]);
    pde_residual(sol, &pts, h)
}
