//! Thomas algorithm for the line solves.

/// Solves `lower[k] x[k-1] + diag[k] x[k] + upper[k] x[k+1] = rhs[k]` in place,
/// leaving the solution in `rhs`. `lower[0]` and `upper[n-1]` are ignored.
///
/// No pivoting: callers guarantee diagonal dominance.
pub fn solve_in_place(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &mut [f64], scratch: &mut Vec<f64>) {
    let n = rhs.len();
    debug_assert!(lower.len() == n && diag.len() == n && upper.len() == n);
    if n == 0 {
        return;
    }
    scratch.clear();
    scratch.resize(n, 0.0);
    let mut beta = diag[0];
    rhs[0] /= beta;
    for k in 1..n {
        scratch[k] = upper[k - 1] / beta;
        beta = diag[k] - lower[k] * scratch[k];
        rhs[k] = (rhs[k] - lower[k] * rhs[k - 1]) / beta;
    }
    for k in (0..n - 1).rev() {
        rhs[k] -= scratch[k + 1] * rhs[k + 1];
    }
}
