//! Accurate evaluation of `e(t) = exp(2πi t)` at integer multiples of a point.
//!
//! `e(m z)` only depends on `m·x mod 1`. Forming `m·x` directly loses
//! `log2(m)` bits of the phase, so the product is split with an FMA and
//! reduced exactly.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Fractional part of `m·x` in `[0, 1)`, for an integer-valued `m` below 2⁵³.
#[inline]
pub(crate) fn frac_mul(m: f64, x: f64) -> f64 {
    let x0 = x - x.floor();
    let p = m * x0;
    let err = m.mul_add(x0, -p);
    let mut r = (p - p.floor()) + err;
    if r >= 1.0 {
        r -= 1.0;
    } else if r < 0.0 {
        r += 1.0;
    }
    r
}

/// `e(m z)` for an integer-valued `m ≥ 0`.
#[inline]
pub(crate) fn e_mul(m: f64, x: f64, y: f64) -> Complex64 {
    let (s, c) = (TAU * frac_mul(m, x)).sin_cos();
    let r = (-TAU * m * y).exp();
    Complex64::new(r * c, r * s)
}

/// `e(t)` for real `t`.
#[inline]
pub(crate) fn e_real(t: f64) -> Complex64 {
    let (s, c) = (TAU * (t - t.floor())).sin_cos();
    Complex64::new(c, s)
}
