//! Airy function `Ai` and its derivative on `[-20, 20]`.
//!
//! Separable solutions `Ai(k^(2/3) x) cos(k y)` of the Tricomi equation need
//! `Ai` to high relative accuracy, so the evaluator is self-contained:
//!
//! - Maclaurin series on `[-12, 6]`, summed in double-double arithmetic. On
//!   the positive side the two series cancel to `exp(-zeta)` and on the
//!   negative side they grow like `exp(zeta)` before cancelling, so plain
//!   `f64` would lose up to nine digits here.
//! - Asymptotic expansions beyond, truncated at the smallest term:
//!   the exponentially decaying form for `z > 6` and the oscillatory form
//!   for `z < -12`.
//!
//! The seeds `Ai(0) = 3^(-2/3) / Gamma(2/3)` and
//! `Ai'(0) = -3^(-1/3) / Gamma(1/3)` enter as double-double literals
//! (50-digit evaluation, split into leading and trailing `f64`).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `Ai(0)` as a (hi, lo) pair.
pub const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
/// `-Ai'(0)` as a (hi, lo) pair.
pub const NEG_AIP0: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);

pub const DOMAIN: f64 = 20.0;
/// Upper end of the series range.
pub const SERIES_POS: f64 = 6.0;
/// Lower end of the series range.
pub const SERIES_NEG: f64 = -12.0;

const MIN_TERMS: usize = 60;
const MAX_TERMS: usize = 400;

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn new(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    fn from_pair(p: (f64, f64)) -> Self {
        Dd::new(p.0, p.1)
    }

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        let e = (a - (s - bb)) + (b - bb);
        Dd { hi: s, lo: e }
    }

    fn two_prod(a: f64, b: f64) -> Dd {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, o.hi);
        let t = Dd::two_sum(self.lo, o.lo);
        let s = Dd::new(s.hi, s.lo + t.hi);
        Dd::new(s.hi, s.lo + t.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = Dd::two_prod(self.hi, o.hi);
        Dd::new(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }

    fn div_f64(self, d: f64) -> Dd {
        let q1 = self.hi / d;
        let r = self.add(Dd::two_prod(q1, d).neg());
        let q2 = r.hi / d;
        let r = r.add(Dd::two_prod(q2, d).neg());
        let q3 = r.hi / d;
        Dd::new(q1, q2).add(Dd { hi: q3, lo: 0.0 })
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

// Sum terms t_0, t_1, ... with t_k = t_{k-1} * z3 / denom(k).
fn series<F: Fn(usize) -> f64>(first: Dd, z3: Dd, start: usize, denom: F) -> Dd {
    let mut term = first;
    let mut sum = first;
    for k in start.. {
        term = term.mul(z3).div_f64(denom(k));
        sum = sum.add(term);
        let done = term.hi.abs() <= 1e-34 * sum.hi.abs().max(1e-300);
        if (k >= MIN_TERMS && done) || k >= MAX_TERMS || term.hi == 0.0 {
            break;
        }
    }
    sum
}

/// Maclaurin series for `(Ai(z), Ai'(z))`.
pub fn airy_series(z: f64) -> (f64, f64) {
    let zz = Dd::two_prod(z, z);
    let z3 = zz.mul(Dd { hi: z, lo: 0.0 });
    let one = Dd { hi: 1.0, lo: 0.0 };
    let zd = Dd { hi: z, lo: 0.0 };
    let c1 = Dd::from_pair(AI0);
    let c2 = Dd::from_pair(NEG_AIP0);

    // f = sum z^{3k} / [(2)(3)(5)(6)...], g = sum z^{3k+1} / [(3)(4)(6)(7)...]
    let f = series(one, z3, 1, |k| ((3 * k - 1) * (3 * k)) as f64);
    let g = series(zd, z3, 1, |k| ((3 * k) * (3 * k + 1)) as f64);
    // f' starts at z^2/2, g' at 1
    let fp = series(zz.div_f64(2.0), z3, 2, |k| ((3 * k - 1) * (3 * k - 3)) as f64);
    let gp = series(one, z3, 1, |k| ((3 * k) * (3 * k - 2)) as f64);

    let ai = c1.mul(f).add(c2.mul(g).neg());
    let aip = c1.mul(fp).add(c2.mul(gp).neg());
    (ai.to_f64(), aip.to_f64())
}

// u_k and v_k of the asymptotic expansions, up to n terms.
fn asymptotic_coeffs(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    for k in 1..n {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / (216.0 * kf * (2.0 * kf - 1.0));
        u.push(uk);
        v.push(-(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk);
    }
    (u, v)
}

// Sum of (-1)^k c_{2k+offset} / zeta^{2k+offset} truncated at the smallest term,
// or all terms of sum c_k (-1/zeta)^k when step == 1.
fn truncated_sum(c: &[f64], zeta: f64, offset: usize, step: usize) -> f64 {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut k = offset;
    let mut j = 0;
    while k < c.len() {
        let sign = if step == 1 {
            if k % 2 == 0 { 1.0 } else { -1.0 }
        } else if j % 2 == 0 {
            1.0
        } else {
            -1.0
        };
        let term = c[k] / zeta.powi(k as i32);
        if term.abs() > prev {
            break;
        }
        sum += sign * term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        prev = term.abs();
        k += step;
        j += 1;
    }
    sum
}

/// Asymptotic expansions for `(Ai(z), Ai'(z))`, valid for large `|z|`.
pub fn airy_asymptotic(z: f64) -> (f64, f64) {
    let (u, v) = asymptotic_coeffs(80);
    let t = z.abs();
    let zeta = 2.0 / 3.0 * t * t.sqrt();
    let q = t.powf(0.25);
    let sqpi = PI.sqrt();
    if z > 0.0 {
        let e = (-zeta).exp();
        let ai = e / (2.0 * sqpi * q) * truncated_sum(&u, zeta, 0, 1);
        let aip = -q * e / (2.0 * sqpi) * truncated_sum(&v, zeta, 0, 1);
        (ai, aip)
    } else {
        let phase = zeta - PI / 4.0;
        let (s, c) = phase.sin_cos();
        let ue = truncated_sum(&u, zeta, 0, 2);
        let uo = truncated_sum(&u, zeta, 1, 2);
        let ve = truncated_sum(&v, zeta, 0, 2);
        let vo = truncated_sum(&v, zeta, 1, 2);
        let ai = (c * ue + s * uo) / (sqpi * q);
        let aip = q / sqpi * (s * ve - c * vo);
        (ai, aip)
    }
}

/// `(Ai(z), Ai'(z))` for `z` in `[-20, 20]`.
pub fn airy_pair(z: f64) -> Result<(f64, f64)> {
    if !(-DOMAIN..=DOMAIN).contains(&z) {
        return Err(Error::OutOfRange { x: z, lo: -DOMAIN, hi: DOMAIN });
    }
    if (SERIES_NEG..=SERIES_POS).contains(&z) {
        Ok(airy_series(z))
    } else {
        Ok(airy_asymptotic(z))
    }
}

pub fn airy_ai(z: f64) -> Result<f64> {
    airy_pair(z).map(|p| p.0)
}

pub fn airy_ai_prime(z: f64) -> Result<f64> {
    airy_pair(z).map(|p| p.1)
}

/// Largest `|w'' - z w| / (1 + |w|)` over `n` evenly spaced points of
/// `[lo, hi]`, with `w''` from fourth-order centered differences of spacing `h`.
pub fn ode_defect(lo: f64, hi: f64, n: usize, h: f64) -> Result<f64> {
    if n < 2 || !(h > 0.0 && lo < hi) {
        return Err(Error::InvalidArgument(format!("bad ODE check range [{lo}, {hi}], n = {n}, h = {h}")));
    }
    let mut worst = 0.0f64;
    for k in 0..n {
        let z = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        let w = airy_ai(z)?;
        let d2 = (-airy_ai(z + 2.0 * h)? + 16.0 * airy_ai(z + h)? - 30.0 * w + 16.0 * airy_ai(z - h)?
            - airy_ai(z - 2.0 * h)?)
            / (12.0 * h * h);
        worst = worst.max((d2 - z * w).abs() / (1.0 + w.abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from a 50-digit evaluation.
    const REF: &[(f64, f64, f64)] = &[
        (5.0, 0.00010834442813607442, -0.00024741389086846248),
        (4.0, 0.00095156385120480187, -0.0019586409502041789),
        (6.0, 9.9476943602528896e-6, -2.4765200397034955e-5),
        (-6.0, -0.32914517362982311, 0.34593548728134289),
        (-10.0, 0.040241238486443191, 0.99626504413279006),
        (10.0, 1.1047532552898686e-10, -3.5206336767389236e-10),
        (-20.0, -0.17640612707798469, 0.89286285673647124),
        (20.0, 1.6916728686705403e-27, -7.586391625748355e-27),
        (1.0, 0.13529241631288142, -0.15914744129679321),
        (-1.0, 0.53556088329235212, -0.010160567116645209),
        (-3.5, -0.37553382314043191, -0.34344343345404815),
    ];

    #[test]
    fn seeds() {
        let (a, ap) = airy_pair(0.0).unwrap();
        assert!((ap + 0.258819403792807).abs() < 1e-15);
        assert!((a - 0.355028053887817).abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        for &(z, ai, aip) in REF {
            let (a, ap) = airy_pair(z).unwrap();
            let tol = if z.abs() <= 6.0 { 1e-9 } else { 1e-7 };
            // relative to the local envelope on the oscillatory side
            let scale = if z < 0.0 { z.abs().powf(-0.25) / PI.sqrt() } else { ai.abs() };
            let scale_p = if z < 0.0 { z.abs().powf(0.25) / PI.sqrt() } else { aip.abs() };
            assert!((a - ai).abs() <= tol * scale, "Ai({z}) = {a}, want {ai}");
            assert!((ap - aip).abs() <= tol * scale_p, "Ai'({z}) = {ap}, want {aip}");
        }
    }

    #[test]
    fn value_at_five() {
        let a5 = airy_ai(5.0).unwrap();
        assert!(a5 > 1.05e-4 && a5 < 1.10e-4);
        assert!(a5 < airy_ai(4.0).unwrap());
        assert!((a5 - 1.08344e-4).abs() < 1e-9);
    }

    #[test]
    fn crossover_continuity() {
        let (s, sp) = airy_series(6.0);
        let (a, ap) = airy_asymptotic(6.0);
        assert!((s - a).abs() <= 5e-8);
        assert!((sp - ap).abs() <= 5e-8);
        assert!(((s - a) / s).abs() <= 1e-7);
        let (s, _) = airy_series(-12.0);
        let (a, _) = airy_asymptotic(-12.0);
        assert!((s - a).abs() <= 1e-12);
    }

    #[test]
    fn out_of_range() {
        assert!(matches!(airy_ai(20.5), Err(Error::OutOfRange { .. })));
        assert!(airy_ai(-20.0).is_ok());
    }

    #[test]
    fn derivative_consistent_with_values() {
        for z in [-9.3, -4.1, -0.7, 0.3, 2.2, 5.5, 7.5] {
            let h = 1e-4;
            let fd = (airy_ai(z + h).unwrap() - airy_ai(z - h).unwrap()) / (2.0 * h);
            let ap = airy_ai_prime(z).unwrap();
            assert!((fd - ap).abs() <= 1e-7 * (1.0 + ap.abs()), "z={z}: {fd} vs {ap}");
        }
    }

    #[test]
    fn satisfies_the_airy_equation() {
        assert!(ode_defect(-10.0, 10.0, 2001, 1e-2).unwrap() <= 1e-6);
    }
}
