use thiserror::Error;

/// Everything that can go wrong in the library.
///
/// The variants split into two groups: input problems (bad ranges, bad
/// files, wrong region) and numerical failures (non-convergence, CFL,
/// instability). The CLI maps the latter to a distinct exit status.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("x = {x} lies outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },

    #[error("invalid coefficient: {0}")]
    InvalidCoefficient(String),

    #[error("point x = {x} is not hyperbolic (K = {k})")]
    NotHyperbolic { x: f64, k: f64 },

    #[error("no closed-form characteristics for {0}")]
    NoClosedForm(String),

    #[error("local error estimate {estimate:.3e} per unit step exceeds {limit:.1e}; reduce the step")]
    StepTooLarge { estimate: f64, limit: f64 },

    #[error("invalid trace request: {0}")]
    InvalidTrace(String),

    #[error("exponent m = {m} has no power-form reduction for {form}")]
    UnsupportedExponent { m: f64, form: &'static str },

    #[error("reduction requires a power-law coefficient")]
    NotPowerLaw,

    #[error("x = {x} is on the wrong side of the sonic line for this reduction")]
    WrongSide { x: f64 },

    #[error("field x-range [{x_min}, {x_max}] crosses or touches the sonic line")]
    CrossesSonicLine { x_min: f64, x_max: f64 },

    #[error("grid {nx}x{ny} too small: need at least {need} points per direction")]
    GridTooSmall { nx: usize, ny: usize, need: usize },

    #[error("beta is unidentifiable: ||u_tau/tau|| = {norm:.3e}")]
    DegenerateFit { norm: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid boundary data: {0}")]
    InvalidBoundary(String),

    #[error("coefficient K is negative (K = {k}) at x = {x}; elliptic solver needs K >= 0")]
    WrongRegion { x: f64, k: f64 },

    #[error("not converged after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("residual diverged: {residual:.3e} is more than 100x its minimum {minimum:.3e}")]
    DivergedResidual { residual: f64, minimum: f64 },

    #[error("CFL violated: sqrt(max|K|) * hx = {lhs:.6e} > hy = {hy:.6e} (hx = {hx:.6e}, max|K| = {k_max:.6e})")]
    CflViolation { lhs: f64, hx: f64, hy: f64, k_max: f64 },

    #[error("marching became unstable at x = {x}: growth factor {growth:.3e}")]
    Unstable { x: f64, growth: f64 },

    #[error("unknown oracle '{0}'")]
    UnknownOracle(String),

    #[error("point ({x}, {y}) is outside the validity region of '{id}'")]
    OutsideValidity { id: String, x: f64, y: f64 },

    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::DivergedResidual { .. }
                | Error::CflViolation { .. }
                | Error::Unstable { .. }
                | Error::StepTooLarge { .. }
                | Error::DegenerateFit { .. }
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
