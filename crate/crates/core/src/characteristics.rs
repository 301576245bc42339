//! Characteristic curves in the hyperbolic half plane.
//!
//! For the Tricomi form `dy/dx = ±sqrt(-K)`, for the Keldysh form
//! `dy/dx = ±(-K)^(-1/2)`. Real characteristics exist only where `K < 0`.
//!
//! The tracer integrates these with a fixed 4-stage scheme. Near the sonic
//! line it changes independent variable so that the right-hand side stays
//! bounded: `s = sqrt(-x)` for the Tricomi form (cusp), and `y` itself for
//! the Keldysh form once the slope exceeds [`KELDYSH_SWITCH_SLOPE`]
//! (tangential contact).

use serde::{Deserialize, Serialize};

use crate::equation::{EquationSpec, Form};
use crate::error::{Error, Result};

/// Below this distance to the sonic line the Tricomi-form tracer integrates in `s = sqrt(-x)`.
pub const ROOT_SWITCH: f64 = 1e-4;
/// Above this slope magnitude the Keldysh-form tracer integrates `dx/dy`.
pub const KELDYSH_SWITCH_SLOPE: f64 = 10.0;
/// Local error limit per unit of the independent variable.
pub const LOCAL_ERROR_LIMIT: f64 = 1e-6;
/// Endpoints closer than this to x = 0 count as reaching the sonic line.
pub const SONIC_TOL: f64 = 1e-12;

// x-steps never exceed this fraction of |x|, so chords resolve the slope
// variation near the sonic line.
const GRADING: f64 = 0.05;
const MIN_X_STEP: f64 = 1e-10;
const MAX_ROOT_STEP: f64 = 5e-4;
const MAX_Y_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilySign {
    Plus,
    Minus,
}

impl FamilySign {
    pub fn sign(self) -> f64 {
        match self {
            FamilySign::Plus => 1.0,
            FamilySign::Minus => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FamilySign::Plus => "plus",
            FamilySign::Minus => "minus",
        }
    }
}

/// Independent variable used to integrate one segment of a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Abscissa {
    X,
    /// `s = sqrt(-x)`
    Root,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCurve {
    pub family: FamilySign,
    /// Closed-form constant at the seed, for canonical equations.
    pub constant_c: Option<f64>,
    /// `(x, y)` samples with strictly monotone `x`.
    pub samples: Vec<(f64, f64)>,
    /// Integration variable of each segment; one shorter than `samples`.
    pub segments: Vec<Abscissa>,
    pub reached_sonic: bool,
    pub spec: EquationSpec,
}

impl CharacteristicCurve {
    pub fn start(&self) -> (f64, f64) {
        self.samples[0]
    }

    pub fn end(&self) -> (f64, f64) {
        self.samples[self.samples.len() - 1]
    }

    /// Largest `|Δy/Δx - slope(mid)| / (1 + |slope(mid)|)` over all segments.
    ///
    /// The midpoint is taken in the segment's own integration variable.
    pub fn max_ode_residual(&self) -> Result<f64> {
        let sigma = self.family.sign();
        let mut worst = 0.0f64;
        for (w, var) in self.samples.windows(2).zip(&self.segments) {
            let (x0, y0) = w[0];
            let (x1, y1) = w[1];
            let x_mid = match var {
                Abscissa::X => 0.5 * (x0 + x1),
                Abscissa::Root => {
                    let s = 0.5 * ((-x0).sqrt() + (-x1).sqrt());
                    -s * s
                }
                Abscissa::Y => {
                    let g = |r: f64| -> Result<f64> { dr_dy(&self.spec, sigma, r) };
                    let r = rk4_autonomous(&g, (-x0).sqrt(), 0.5 * (y1 - y0))?;
                    -r * r
                }
            };
            let slope = slope_at(&self.spec, self.family, x_mid)?;
            let chord = (y1 - y0) / (x1 - x0);
            worst = worst.max((chord - slope).abs() / (1.0 + slope.abs()));
        }
        Ok(worst)
    }
}

fn hyperbolic_k(spec: &EquationSpec, x: f64) -> Result<f64> {
    let k = spec.eval_k(x)?;
    if x < 0.0 && k < 0.0 {
        Ok(k)
    } else {
        Err(Error::NotHyperbolic { x, k })
    }
}

/// Closed-form characteristic constant `C` for the canonical equations.
///
/// Tricomi: `y ± (2/3)(-x)^(3/2) = C`. Keldysh: `y ± (1/2)(-x)^(1/2) = C`,
/// returned as stated even though it does not match the slope field; see
/// [`keldysh_ode_constant`].
pub fn characteristic_constant(spec: &EquationSpec, family: FamilySign, x: f64, y: f64) -> Result<f64> {
    if !spec.is_canonical() {
        return Err(Error::NoClosedForm(spec.to_string()));
    }
    if x > 0.0 {
        return Err(Error::NotHyperbolic { x, k: spec.eval_k(x)? });
    }
    let sigma = family.sign();
    let r = (-x).sqrt();
    Ok(match spec.form {
        Form::Tricomi => y + sigma * (2.0 / 3.0) * r * r * r,
        Form::Keldysh => y + sigma * 0.5 * r,
    })
}

/// The invariant of the canonical Keldysh slope field: `y ± 2(-x)^(1/2)`.
///
/// Integrating `dy/dx = ±(-x)^(-1/2)` gives coefficient 2 rather than 1/2;
/// this is what traced Keldysh curves conserve.
pub fn keldysh_ode_constant(family: FamilySign, x: f64, y: f64) -> f64 {
    y + family.sign() * 2.0 * (-x).sqrt()
}

/// Characteristic slope `dy/dx` at a hyperbolic point; `Plus` is the positive branch.
pub fn slope_at(spec: &EquationSpec, family: FamilySign, x: f64) -> Result<f64> {
    let k = hyperbolic_k(spec, x)?;
    let mag = match spec.form {
        Form::Tricomi => (-k).sqrt(),
        Form::Keldysh => 1.0 / (-k).sqrt(),
    };
    Ok(family.sign() * mag)
}

// dr/dy along a Keldysh-form characteristic, r = sqrt(-x). Since
// dx/dy = ±sqrt(-K), dr/dy = ∓sqrt(-K(-r^2)) / (2r), bounded when K ~ x.
fn dr_dy(spec: &EquationSpec, sigma: f64, r: f64) -> Result<f64> {
    if r <= 0.0 {
        let k_slope = spec.eval_k(-1e-300).map(|k| (-k / 1e-300).max(0.0).sqrt())?;
        return Ok(-0.5 * sigma * k_slope);
    }
    let k = spec.eval_k(-r * r)?;
    Ok(-0.5 * sigma * (-k).max(0.0).sqrt() / r)
}

// dy/ds along a Tricomi-form characteristic with x = -s^2.
fn dy_ds(spec: &EquationSpec, sigma: f64, s: f64) -> Result<f64> {
    let k = spec.eval_k(-s * s)?;
    Ok(-2.0 * s * sigma * (-k).max(0.0).sqrt())
}

// One 4-stage step of z' = f(t) (right-hand side independent of z).
fn quadrature_step<F>(f: &F, t: f64, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    Ok(h / 6.0 * (f(t)? + 4.0 * f(t + 0.5 * h)? + f(t + h)?))
}

// One classical 4-stage step of z' = g(z); returns z(t + h).
fn rk4_autonomous<G>(g: &G, z: f64, h: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let k1 = g(z)?;
    let k2 = g(z + 0.5 * h * k1)?;
    let k3 = g(z + 0.5 * h * k2)?;
    let k4 = g(z + h * k3)?;
    Ok(z + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

fn check_local_error(full: f64, halves: f64, h: f64) -> Result<()> {
    let estimate = (full - halves).abs() / 15.0 / h.abs();
    if estimate > LOCAL_ERROR_LIMIT {
        return Err(Error::StepTooLarge { estimate, limit: LOCAL_ERROR_LIMIT });
    }
    Ok(())
}

/// Trace one characteristic from `seed` to `x = x_end` with nominal step `step`.
pub fn trace(
    spec: &EquationSpec,
    family: FamilySign,
    seed: (f64, f64),
    x_end: f64,
    step: f64,
) -> Result<CharacteristicCurve> {
    let (x0, y0) = seed;
    hyperbolic_k(spec, x0)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidTrace(format!("step must be positive, got {step}")));
    }
    if !(x_end.is_finite() && x_end <= 0.0) {
        return Err(Error::InvalidTrace(format!("x_end must lie in x <= 0, got {x_end}")));
    }
    if !y0.is_finite() {
        return Err(Error::InvalidTrace("seed y is not finite".into()));
    }
    let (lo, _) = spec.coeff.domain();
    if x_end < lo {
        return Err(Error::OutOfRange { x: x_end, lo, hi: spec.coeff.domain().1 });
    }

    let sigma = family.sign();
    let constant_c = characteristic_constant(spec, family, x0, y0).ok();
    let mut samples = vec![(x0, y0)];
    let mut segments = Vec::new();
    let dir = if x_end > x0 { 1.0 } else { -1.0 };
    let (mut x, mut y) = (x0, y0);

    while x != x_end {
        let near_cusp = if dir > 0.0 { -x <= ROOT_SWITCH } else { -x < ROOT_SWITCH };
        if spec.form == Form::Tricomi && near_cusp {
            // s = sqrt(-x); toward the sonic line s decreases
            let (s_end, x_stop) = if dir > 0.0 || -x_end < ROOT_SWITCH {
                ((-x_end).sqrt(), x_end)
            } else {
                (ROOT_SWITCH.sqrt(), -ROOT_SWITCH)
            };
            let f = |s: f64| dy_ds(spec, sigma, s);
            let mut s = (-x).sqrt();
            while s != s_end {
                let h = (s_end - s).signum() * MAX_ROOT_STEP.min(step).min((s_end - s).abs());
                let full = quadrature_step(&f, s, h)?;
                let halves = quadrature_step(&f, s, 0.5 * h)? + quadrature_step(&f, s + 0.5 * h, 0.5 * h)?;
                check_local_error(full, halves, h)?;
                s = if (s_end - (s + h)).abs() <= 4.0 * f64::EPSILON * s_end.abs() { s_end } else { s + h };
                y += halves;
                x = if s == s_end { x_stop } else { -s * s };
                push_sample(spec, &mut samples, &mut segments, (x, y), Abscissa::Root)?;
            }
            x = x_stop;
            continue;
        }

        if spec.form == Form::Keldysh && slope_at(spec, family, x)?.abs() > KELDYSH_SWITCH_SLOPE {
            // y as independent variable, r = sqrt(-x) as dependent; dy has the
            // sign that moves x toward x_end
            let g = |r: f64| dr_dy(spec, sigma, r);
            let r_end = (-x_end).sqrt();
            let r = (-x).sqrt();
            let h = dir * sigma * MAX_Y_STEP.min(step);
            let full = rk4_autonomous(&g, r, h)?;
            // toward the sonic line r decreases
            let crossed = |rn: f64| -dir * (rn - r_end) >= 0.0;
            let (r_next, dy) = if crossed(full) {
                // last partial step: bisect on the step length
                let (mut a, mut b) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if crossed(rk4_autonomous(&g, r, mid * h)?) {
                        b = mid;
                    } else {
                        a = mid;
                    }
                    if b - a <= f64::EPSILON {
                        break;
                    }
                }
                (r_end, b * h)
            } else {
                let half = rk4_autonomous(&g, r, 0.5 * h)?;
                let halves = rk4_autonomous(&g, half, 0.5 * h)?;
                check_local_error(full, halves, h)?;
                (halves, h)
            };
            x = if r_next == r_end { x_end } else { -r_next * r_next };
            y += dy;
            push_sample(spec, &mut samples, &mut segments, (x, y), Abscissa::Y)?;
            continue;
        }

        // plain x-stepping
        let mut h = step.min(GRADING * x.abs()).max(MIN_X_STEP.min(step));
        if spec.form == Form::Tricomi && dir > 0.0 && x < -ROOT_SWITCH {
            h = h.min(-ROOT_SWITCH - x);
        }
        h = dir * h.min((x_end - x).abs());
        let f = |t: f64| slope_at(spec, family, t);
        let full = quadrature_step(&f, x, h)?;
        let halves = quadrature_step(&f, x, 0.5 * h)? + quadrature_step(&f, x + 0.5 * h, 0.5 * h)?;
        check_local_error(full, halves, h)?;
        let x_next = if (x_end - (x + h)).abs() <= 4.0 * f64::EPSILON * x.abs() {
            x_end
        } else if spec.form == Form::Tricomi && dir > 0.0 && (x + h + ROOT_SWITCH).abs() <= 4.0 * f64::EPSILON {
            -ROOT_SWITCH
        } else {
            x + h
        };
        x = x_next;
        y += halves;
        push_sample(spec, &mut samples, &mut segments, (x, y), Abscissa::X)?;
    }

    let reached_sonic = x_end.abs() <= SONIC_TOL;
    Ok(CharacteristicCurve {
        family,
        constant_c,
        samples,
        segments,
        reached_sonic,
        spec: spec.clone(),
    })
}

fn push_sample(
    spec: &EquationSpec,
    samples: &mut Vec<(f64, f64)>,
    segments: &mut Vec<Abscissa>,
    p: (f64, f64),
    var: Abscissa,
) -> Result<()> {
    let k = spec.eval_k(p.0)?;
    if k > 0.0 {
        return Err(Error::NotHyperbolic { x: p.0, k });
    }
    if !p.1.is_finite() {
        return Err(Error::InvalidTrace(format!("non-finite y at x = {}", p.0)));
    }
    samples.push(p);
    segments.push(var);
    Ok(())
}

/// Both characteristics through a hyperbolic point, traced to the sonic line.
pub fn both_families_through(
    spec: &EquationSpec,
    point: (f64, f64),
    step: f64,
) -> Result<(CharacteristicCurve, CharacteristicCurve)> {
    Ok((
        trace(spec, FamilySign::Plus, point, 0.0, step)?,
        trace(spec, FamilySign::Minus, point, 0.0, step)?,
    ))
}
