//! Equation model: coefficient functions, the two equation forms and the
//! pointwise type classification.
//!
//! Both forms carry a coefficient `K(x)` that depends on `x` only:
//!
//! ```text
//! Tricomi form:  u_xx + K(x) u_yy = 0
//! Keldysh form:  K(x) u_xx + u_yy = 0
//! ```
//!
//! In either form the type at a point is fixed by the sign of `K`: elliptic
//! for `K > 0`, hyperbolic for `K < 0`, degenerate on the sonic line `K = 0`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::characteristics::{self, FamilySign};
use crate::error::{Error, Result};

/// Piecewise-linear coefficient table with strictly increasing abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTable {
    xs: Vec<f64>,
    ks: Vec<f64>,
}

impl KTable {
    pub fn new(xs: Vec<f64>, ks: Vec<f64>) -> Result<Self> {
        if xs.len() != ks.len() {
            return Err(Error::InvalidCoefficient(format!(
                "{} abscissae but {} values",
                xs.len(),
                ks.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidCoefficient(
                "a table needs at least two samples".into(),
            ));
        }
        if xs.iter().chain(ks.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCoefficient("non-finite sample".into()));
        }
        if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCoefficient(format!(
                "x must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(Self { xs, ks })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ks(&self) -> &[f64] {
        &self.ks
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&x) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        // index of the first abscissa strictly greater than x
        let upper = self.xs.partition_point(|&xi| xi <= x);
        if upper == self.xs.len() {
            return Ok(self.ks[self.ks.len() - 1]);
        }
        let i = upper - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (k0, k1) = (self.ks[i], self.ks[i + 1]);
        if x == x0 {
            return Ok(k0);
        }
        let t = (x - x0) / (x1 - x0);
        Ok(k0 + t * (k1 - k0))
    }
}

/// The coefficient `K(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientK {
    /// `K(x) = sign(x) |x|^m`, with `sign(0) = 0`.
    PowerLaw { m: f64 },
    /// Piecewise-linear interpolation of samples; no extrapolation.
    Tabulated(KTable),
}

impl CoefficientK {
    pub fn power_law(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(Error::InvalidCoefficient(format!(
                "power-law exponent must be positive and finite, got {m}"
            )));
        }
        Ok(CoefficientK::PowerLaw { m })
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            CoefficientK::PowerLaw { m } => Ok(signed_power(x, *m)),
            CoefficientK::Tabulated(t) => t.eval(x),
        }
    }

    /// The exponent, when this is a power law.
    pub fn exponent(&self) -> Option<f64> {
        match self {
            CoefficientK::PowerLaw { m } => Some(*m),
            CoefficientK::Tabulated(_) => None,
        }
    }

    /// Range of x on which `eval` is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            CoefficientK::PowerLaw { .. } => (f64::NEG_INFINITY, f64::INFINITY),
            CoefficientK::Tabulated(t) => t.range(),
        }
    }
}

/// `sign(x) |x|^m` with `sign(0) = 0`; exact for `m = 1` and `m = 2`.
pub(crate) fn signed_power(x: f64, m: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if m == 1.0 {
        return x;
    }
    if m == 2.0 {
        return x * x.abs();
    }
    x.signum() * x.abs().powf(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    /// `u_xx + K(x) u_yy = 0`
    Tricomi,
    /// `K(x) u_xx + u_yy = 0`
    Keldysh,
}

impl Form {
    pub fn name(self) -> &'static str {
        match self {
            Form::Tricomi => "tricomi",
            Form::Keldysh => "keldysh",
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which mixed-type equation, and its coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationSpec {
    pub form: Form,
    pub coeff: CoefficientK,
}

impl EquationSpec {
    pub fn new(form: Form, coeff: CoefficientK) -> Self {
        Self { form, coeff }
    }

    /// `u_xx + x u_yy = 0`
    pub fn tricomi() -> Self {
        Self::new(Form::Tricomi, CoefficientK::PowerLaw { m: 1.0 })
    }

    /// `x u_xx + u_yy = 0`
    pub fn keldysh() -> Self {
        Self::new(Form::Keldysh, CoefficientK::PowerLaw { m: 1.0 })
    }

    pub fn power_law(form: Form, m: f64) -> Result<Self> {
        Ok(Self::new(form, CoefficientK::power_law(m)?))
    }

    pub fn is_canonical(&self) -> bool {
        matches!(self.coeff, CoefficientK::PowerLaw { m } if m == 1.0)
    }

    pub fn eval_k(&self, x: f64) -> Result<f64> {
        self.coeff.eval(x)
    }

    pub fn classify(&self, x: f64) -> Result<PointType> {
        classify_point(self, x)
    }
}

impl fmt::Display for EquationSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.coeff {
            CoefficientK::PowerLaw { m } => write!(f, "{} form, K = sign(x)|x|^{}", self.form, m),
            CoefficientK::Tabulated(t) => {
                let (lo, hi) = t.range();
                write!(f, "{} form, tabulated K on [{lo}, {hi}]", self.form)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointType {
    Elliptic,
    Hyperbolic,
    Degenerate,
}

impl PointType {
    pub fn label(self) -> &'static str {
        match self {
            PointType::Elliptic => "elliptic",
            PointType::Hyperbolic => "hyperbolic",
            PointType::Degenerate => "degenerate",
        }
    }

    /// Flow-regime name under the transonic reading of the equation.
    pub fn transonic_label(self) -> &'static str {
        match self {
            PointType::Elliptic => "subsonic",
            PointType::Hyperbolic => "supersonic",
            PointType::Degenerate => "sonic",
        }
    }

    /// Classify a coefficient value with absolute tolerance `eps_k`.
    pub fn from_k(k: f64, eps_k: f64) -> Self {
        if k > eps_k {
            PointType::Elliptic
        } else if k < -eps_k {
            PointType::Hyperbolic
        } else {
            PointType::Degenerate
        }
    }
}

impl fmt::Display for PointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// `K(x)` for the equation.
pub fn eval_k(spec: &EquationSpec, x: f64) -> Result<f64> {
    spec.coeff.eval(x)
}

/// Type at `x` with the exact sign test.
pub fn classify_point(spec: &EquationSpec, x: f64) -> Result<PointType> {
    classify_point_eps(spec, x, 0.0)
}

pub fn classify_point_eps(spec: &EquationSpec, x: f64, eps_k: f64) -> Result<PointType> {
    Ok(PointType::from_k(spec.coeff.eval(x)?, eps_k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DegeneracyShape {
    /// Characteristics meet the sonic line at right angles (slope -> 0).
    PerpendicularCusp,
    /// Characteristics touch the sonic line tangentially (slope -> infinity).
    TangentialContact,
}

/// Shape of the characteristic approach to the sonic line, with the fitted
/// exponent `p` in `|dy/dx| ~ |x|^p` as `x -> 0-`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyKind {
    pub shape: DegeneracyShape,
    pub exponent: f64,
}

/// Least-squares fit of `log|slope|` against `log|x|` over hyperbolic probes.
pub fn degeneracy_kind(spec: &EquationSpec, probe_xs: &[f64]) -> Result<DegeneracyKind> {
    if probe_xs.len() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 probe points, got {}",
            probe_xs.len()
        )));
    }
    if probe_xs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "probe points must increase strictly toward 0-".into(),
        ));
    }
    let mut pts = Vec::with_capacity(probe_xs.len());
    for &x in probe_xs {
        let k = spec.eval_k(x)?;
        if !(x < 0.0 && k < 0.0) {
            return Err(Error::NotHyperbolic { x, k });
        }
        let s = characteristics::slope_at(spec, FamilySign::Plus, x)?;
        pts.push(((-x).ln(), s.abs().ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let exponent = sxy / sxx;
    let shape = if exponent > 0.0 {
        DegeneracyShape::PerpendicularCusp
    } else if exponent < 0.0 {
        DegeneracyShape::TangentialContact
    } else {
        return Err(Error::InvalidArgument(
            "slope exponent is exactly zero; the approach is neither a cusp nor a contact".into(),
        ));
    };
    Ok(DegeneracyKind { shape, exponent })
}

/// `n` log-spaced probes from `-10^lo_exp` to `-10^hi_exp`, increasing toward 0.
pub fn log_probes(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / (n - 1) as f64;
            -(10f64).powf(lo_exp + t * (hi_exp - lo_exp))
        })
        .collect()
}
