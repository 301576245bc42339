//! Undetermined-coefficients search for polynomial solutions of
//! `x u_xx + u_yy = 0` of total degree at most 5.
//!
//! `u = sum c_ab x^a y^b` maps to `sum c_ab (a(a-1) x^(a-1) y^b + b(b-1) x^a y^(b-2))`,
//! a linear map on the coefficients whose null space is every solution.

use mtpde::exact::{lookup, pde_residual, quasi_random_points};
use nalgebra::DMatrix;

const DEGREE: usize = 5;

fn monomials(deg: usize) -> Vec<(usize, usize)> {
    (0..=deg).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect()
}

fn operator() -> (DMatrix<f64>, Vec<(usize, usize)>) {
    let cols = monomials(DEGREE);
    let rows = monomials(DEGREE - 1);
    let row_of = |m: (usize, usize)| rows.iter().position(|&r| r == m).expect("image monomial");
    let mut a = DMatrix::zeros(rows.len(), cols.len());
    for (j, &(p, q)) in cols.iter().enumerate() {
        if p >= 2 {
            a[(row_of((p - 1, q)), j)] += (p * (p - 1)) as f64;
        }
        if q >= 2 {
            a[(row_of((p, q - 2)), j)] += (q * (q - 1)) as f64;
        }
    }
    (a, cols)
}

/// Orthonormal basis of the null space, one column per solution.
fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    // pad to square so the SVD returns a full right basis
    let n = a.ncols();
    let mut sq = DMatrix::zeros(n, n);
    sq.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors");
    let idx: Vec<usize> = (0..n).filter(|&i| svd.singular_values[i] < 1e-10).collect();
    DMatrix::from_fn(n, idx.len(), |r, c| vt[(idx[c], r)])
}

fn eval(coeffs: &[f64], cols: &[(usize, usize)], x: f64, y: f64) -> f64 {
    cols.iter().zip(coeffs).map(|(&(p, q), c)| c * x.powi(p as i32) * y.powi(q as i32)).sum()
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Rank by fraction-free elimination on the integer entries; exact.
fn exact_rank(a: &DMatrix<f64>) -> usize {
    let mut m: Vec<Vec<i128>> = (0..a.nrows()).map(|r| (0..a.ncols()).map(|c| a[(r, c)] as i128).collect()).collect();
    let mut rank = 0;
    for col in 0..a.ncols() {
        let Some(piv) = (rank..m.len()).find(|&r| m[r][col] != 0) else { continue };
        m.swap(rank, piv);
        for r in rank + 1..m.len() {
            let (p, f) = (m[rank][col], m[r][col]);
            for c in 0..a.ncols() {
                m[r][c] = m[r][c] * p - m[rank][c] * f;
            }
            // keep entries small
            let g = m[r].iter().fold(0i128, |g, &v| gcd(g, v.abs()));
            if g > 1 {
                m[r].iter_mut().for_each(|v| *v /= g);
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn null_space_dimension_matches_exact_rank() {
    let (a, _) = operator();
    let basis = null_space(&a);
    assert_eq!(basis.ncols(), a.ncols() - exact_rank(&a));
    // 1, x, y, xy plus nonlinear solutions
    assert!(basis.ncols() > 4);
    assert!((&a * &basis).abs().max() < 1e-10);
}

#[test]
fn registry_polynomials_lie_in_the_null_space() {
    let (a, cols) = operator();
    let basis = null_space(&a);
    let coeff = |terms: &[((usize, usize), f64)]| {
        nalgebra::DVector::from_iterator(
            cols.len(),
            cols.iter().map(|m| terms.iter().find(|(t, _)| t == m).map_or(0.0, |t| t.1)),
        )
    };
    // x^2 - x y^2 and x^3 - 3 x^2 y^2 + x y^4 / 2
    for v in [
        coeff(&[((2, 0), 1.0), ((1, 2), -1.0)]),
        coeff(&[((3, 0), 1.0), ((2, 2), -3.0), ((1, 4), 0.5)]),
    ] {
        assert!((&a * &v).amax() == 0.0);
        let proj = &basis * (basis.transpose() * &v);
        assert!((proj - &v).amax() < 1e-12);
    }
    let pts = quasi_random_points(50, [-1.5, 1.5, -1.5, 1.5]);
    for id in ["keldysh_poly", "keldysh_poly5"] {
        let sol = lookup(id).unwrap();
        assert!(pde_residual(&sol, &pts, 1e-3).unwrap() < 1e-7);
    }
}

#[test]
fn every_basis_element_solves_the_equation() {
    let (a, cols) = operator();
    let basis = null_space(&a);
    let h = 1e-3;
    for c in basis.column_iter() {
        let c: Vec<f64> = c.iter().copied().collect();
        for &(x, y) in &quasi_random_points(20, [-1.0, 1.0, -1.0, 1.0]) {
            let u = |x: f64, y: f64| eval(&c, &cols, x, y);
            let uxx = (u(x + h, y) - 2.0 * u(x, y) + u(x - h, y)) / (h * h);
            let uyy = (u(x, y + h) - 2.0 * u(x, y) + u(x, y - h)) / (h * h);
            // second differences are exact on cubics and O(h^2) beyond
            assert!((x * uxx + uyy).abs() < 1e-4, "({x}, {y})");
        }
    }
    // the null space holds nonlinear members
    let nonlinear = basis.column_iter().any(|c| cols.iter().zip(c.iter()).any(|(&(p, q), v)| p + q >= 2 && v.abs() > 1e-8));
    assert!(nonlinear);
}
