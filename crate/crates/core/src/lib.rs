//! Mixed elliptic-hyperbolic equations of Tricomi and Keldysh type.
//!
//! The crate covers the whole chain from the pointwise type of the equation
//! to verified numerical solutions:
//!
//! - [`equation`]: coefficient functions, the two equation forms, type
//!   classification and the shape of the degeneracy at the sonic line;
//! - [`characteristics`]: closed-form and traced characteristic curves;
//! - [`epd`]: reduction to Euler-Poisson-Darboux form and empirical index fits;
//! - [`exact`]: exact solutions used as oracles, including an Airy evaluator;
//! - [`solver`]: elliptic, hyperbolic (Cauchy) and mixed finite-difference solvers;
//! - [`io`]: CSV, JSON and PGM serialization;
//! - [`verify`]: the acceptance checks, runnable from the CLI.

pub mod characteristics;
pub mod epd;
pub mod equation;
pub mod error;
pub mod exact;
pub mod grid;
pub mod io;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
