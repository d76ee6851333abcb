//! Theta series, Jacobi's `Δ`, and checks of the modular transformation law.

use crate::error::{HamfError, Result};
use crate::group::{
    half_integer_power, in_gamma1, moebius, CoverPoint, UnimodularInt, UpperHalfPoint,
};
use crate::phase::e_mul;
use crate::symbol::qr_symbol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Truncation target for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTolerance {
    abs_tol: f64,
    max_terms: u64,
}

impl SeriesTolerance {
    pub const DEFAULT_ABS_TOL: f64 = 1e-12;
    pub const DEFAULT_MAX_TERMS: u64 = 10_000_000;

    pub fn new(abs_tol: f64, max_terms: u64) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(HamfError::domain(format!(
                "abs_tol must be positive, got {abs_tol}"
            )));
        }
        if max_terms == 0 {
            return Err(HamfError::domain("max_terms must be at least 1"));
        }
        Ok(SeriesTolerance { abs_tol, max_terms })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn max_terms(&self) -> u64 {
        self.max_terms
    }

    /// Same cap, different target.
    pub fn with_abs_tol(&self, abs_tol: f64) -> Self {
        SeriesTolerance {
            abs_tol,
            max_terms: self.max_terms,
        }
    }

    pub(crate) fn check_cap(&self, what: &'static str, needed: u64) -> Result<()> {
        if needed > self.max_terms {
            Err(HamfError::TermCap {
                what,
                needed,
                cap: self.max_terms,
            })
        } else {
            Ok(())
        }
    }
}

impl Default for SeriesTolerance {
    fn default() -> Self {
        SeriesTolerance {
            abs_tol: Self::DEFAULT_ABS_TOL,
            max_terms: Self::DEFAULT_MAX_TERMS,
        }
    }
}

/// Smallest `n ≥ 1` with `2·e^{−2πn²y}/(1 − e^{−2π(2n+1)y}) < tol`, the bound on
/// `2·Σ_{m≥n} |e(m²z)|`.
fn theta_cutoff(y: f64, tol: &SeriesTolerance) -> Result<u64> {
    let bound = |n: f64| 2.0 * (-TAU * n * n * y).exp() / (-(-TAU * (2.0 * n + 1.0) * y).exp_m1());
    // start from the point where the numerator alone drops below tol
    let guess = ((tol.abs_tol / 2.0).ln() / (-TAU * y))
        .sqrt()
        .floor()
        .max(1.0);
    let mut n = guess as u64;
    while n > 1 && bound((n - 1) as f64) < tol.abs_tol {
        n -= 1;
    }
    loop {
        tol.check_cap("theta series", n)?;
        if bound(n as f64) < tol.abs_tol {
            return Ok(n);
        }
        n += 1;
    }
}

/// `θ(z) = Σ_{n∈ℤ} e(n²z)`.
pub fn theta(z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    let cutoff = theta_cutoff(z.y(), tol)?;
    let mut tail = Complex64::new(0.0, 0.0);
    for n in (1..cutoff).rev() {
        let m = (n * n) as f64;
        tail += e_mul(m, z.x(), z.y());
    }
    Ok(Complex64::new(1.0, 0.0) + 2.0 * tail)
}

/// `θ(kz)`.
pub fn theta_scaled(k: u64, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    if k == 0 {
        return Err(HamfError::domain("theta_scaled needs k >= 1"));
    }
    theta(z.scale(k as f64), tol)
}

/// `Σ_k a_k θ(kz)`; absolute error below `Σ|a_k|·abs_tol`.
pub fn xi_k(coeffs: &[Complex64], z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    if coeffs.is_empty() {
        return Err(HamfError::domain("xi_k needs at least one coefficient"));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, a) in coeffs.iter().enumerate() {
        if *a != Complex64::new(0.0, 0.0) {
            acc += a * theta_scaled(i as u64 + 1, z, tol)?;
        }
    }
    Ok(acc)
}

/// Jacobi's `Δ(z) = e(z)·Π_{n≥1}(1 − e(nz))^{24}`.
pub fn delta_jacobi(z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    let q_abs = (-TAU * z.y()).exp();
    // relative error of dropping factors n > N is about 24·|q|^{N+1}/(1 − |q|)
    let one_minus = -(-TAU * z.y()).exp_m1();
    let needed = ((tol.abs_tol * one_minus / 24.0).ln() / q_abs.ln())
        .ceil()
        .max(1.0);
    let factors = needed as u64;
    tol.check_cap("delta product", factors)?;
    let mut prod = Complex64::new(1.0, 0.0);
    for n in 1..=factors {
        prod *= Complex64::new(1.0, 0.0) - e_mul(n as f64, z.x(), z.y());
    }
    Ok(e_mul(1.0, z.x(), z.y()) * prod.powi(24))
}

/// Weight `κ ∈ ½ℤ`, stored as `2κ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Weight(i32);

impl Weight {
    pub const ZERO: Weight = Weight(0);
    pub const HALF: Weight = Weight(1);

    pub fn from_twice(twice: i32) -> Self {
        Weight(twice)
    }

    pub fn integral(k: i32) -> Self {
        Weight(2 * k)
    }

    pub fn twice(self) -> i32 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub fn is_half_integral(self) -> bool {
        self.0 % 2 != 0
    }
}

/// A holomorphic function on `H` with a declared weight and level.
pub trait ModularForm: Sync {
    fn weight(&self) -> Weight;
    fn level(&self) -> u64;
    fn eval(&self, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64>;
}

/// `θ(kz)`, weight ½ for `Γ₁(4k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Theta {
    pub k: u64,
}

impl Theta {
    pub const BASE: Theta = Theta { k: 1 };
}

impl ModularForm for Theta {
    fn weight(&self) -> Weight {
        Weight::HALF
    }
    fn level(&self) -> u64 {
        4 * self.k
    }
    fn eval(&self, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
        theta_scaled(self.k, z, tol)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `lcm(1, 2, …, k)`.
pub fn lcm_upto(k: u64) -> u64 {
    (1..=k).fold(1, |acc, j| acc / gcd(acc, j) * j)
}

/// `ξ^{(K)}(z) = Σ_{k≤K} a_k θ(kz)`, weight ½ for `Γ₁(4·lcm(2,…,K))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaCombination {
    coeffs: Vec<Complex64>,
}

impl ThetaCombination {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(HamfError::domain("a theta combination needs K >= 1"));
        }
        Ok(ThetaCombination { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

impl ModularForm for ThetaCombination {
    fn weight(&self) -> Weight {
        Weight::HALF
    }
    fn level(&self) -> u64 {
        4 * lcm_upto(self.coeffs.len() as u64)
    }
    fn eval(&self, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
        xi_k(&self.coeffs, z, tol)
    }
}

/// Jacobi's `Δ`, weight 12 for the full modular group.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JacobiDelta;

impl ModularForm for JacobiDelta {
    fn weight(&self) -> Weight {
        Weight::integral(12)
    }
    fn level(&self) -> u64 {
        1
    }
    fn eval(&self, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
        delta_jacobi(z, tol)
    }
}

/// The constant function 1, weight 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstantOne;

impl ModularForm for ConstantOne {
    fn weight(&self) -> Weight {
        Weight::ZERO
    }
    fn level(&self) -> u64 {
        1
    }
    fn eval(&self, _z: UpperHalfPoint, _tol: &SeriesTolerance) -> Result<Complex64> {
        Ok(Complex64::new(1.0, 0.0))
    }
}

/// `(c/d)^{2κ}(cz + d)^κ`.
pub fn automorphy_factor(
    weight: Weight,
    g: &UnimodularInt,
    z: UpperHalfPoint,
) -> Result<Complex64> {
    let power = half_integer_power(g.automorphy(z), weight.twice());
    if weight.is_half_integral() {
        let s = qr_symbol(g.c(), g.d())?;
        // (c/d)^{2κ} = (c/d) for odd 2κ since (c/d) = ±1 on Γ₁(4)
        Ok(power * s.as_f64())
    } else {
        Ok(power)
    }
}

/// `|f(γz) − (c/d)^{2κ}(cz+d)^κ f(z)| / max(1, |f(z)|)`.
pub fn transform_residual(
    f: &dyn ModularForm,
    g: &UnimodularInt,
    z: UpperHalfPoint,
    tol: &SeriesTolerance,
) -> Result<f64> {
    if !in_gamma1(g, f.level()) {
        return Err(HamfError::domain(format!(
            "{g} is not in Γ₁({}), the level of the form",
            f.level()
        )));
    }
    if f.weight().is_half_integral() && !f.level().is_multiple_of(4) {
        return Err(HamfError::domain("half-integral weight needs 4 | level"));
    }
    let fz = f.eval(z, tol)?;
    let lhs = f.eval(moebius(g, z), tol)?;
    let rhs = automorphy_factor(f.weight(), g, z)? * fz;
    Ok((lhs - rhs).norm() / fz.norm().max(1.0))
}

/// `F(z, φ) = y^{κ/2} f(z) e^{−iκφ}`.
pub fn lift(f: &dyn ModularForm, p: CoverPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    let kappa = f.weight().as_f64();
    let fz = f.eval(p.z, tol)?;
    Ok(p.z.y().powf(kappa / 2.0) * fz * Complex64::from_polar(1.0, -kappa * p.phi))
}

/// Outcome of [`check_transform`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformCheck {
    pub max_residual: f64,
    pub trials: usize,
    /// Test points rejected because `Im(γz)` was too small for the term cap.
    pub resampled: usize,
}

const MAX_RESAMPLES: usize = 64;

/// Seeded transformation-law check over random `γ ∈ Γ₁(level)` with entries up to
/// `height`, and `z = x + iy` with `x ∈ [0,1)`, `y ∈ [y_lo, y_hi]`.
///
/// A point whose image would exceed the term cap is redrawn.
pub fn check_transform(
    f: &dyn ModularForm,
    trials: usize,
    seed: u64,
    height: u64,
    y_range: (f64, f64),
    tol: &SeriesTolerance,
) -> Result<TransformCheck> {
    let level = f.level();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_residual = 0.0f64;
    let mut resampled = 0;
    for _ in 0..trials {
        let g = crate::group::random_gamma1_with(&mut rng, level, height.max(level))?;
        let mut attempts = 0;
        loop {
            let z =
                UpperHalfPoint::new(rng.random::<f64>(), rng.random_range(y_range.0..=y_range.1))?;
            match transform_residual(f, &g, z, tol) {
                Ok(r) => {
                    max_residual = max_residual.max(r);
                    break;
                }
                Err(HamfError::TermCap { .. }) if attempts < MAX_RESAMPLES => {
                    attempts += 1;
                    resampled += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(TransformCheck {
        max_residual,
        trials,
        resampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{cover_act, random_gamma1, CoverElement};

    fn pt(x: f64, y: f64) -> UpperHalfPoint {
        UpperHalfPoint::new(x, y).unwrap()
    }

    fn tol() -> SeriesTolerance {
        SeriesTolerance::default()
    }

    #[test]
    fn theta_at_i() {
        // direct summation: 1 + 2(e^{-2π} + e^{-8π} + e^{-18π})
        let pi = std::f64::consts::PI;
        let want = 1.0 + 2.0 * ((-2.0 * pi).exp() + (-8.0 * pi).exp() + (-18.0 * pi).exp());
        let v = theta(pt(0.0, 1.0), &tol()).unwrap();
        assert!((v.re - want).abs() < 1e-14 && v.im.abs() < 1e-15);
        assert!((v.re - 1.003_734_885_5).abs() < 1e-10);
    }

    #[test]
    fn theta_deep_in_cusp() {
        let v = theta(pt(0.1, 50.0), &tol()).unwrap();
        assert!((v - 1.0).norm() < 1e-12);
    }

    #[test]
    fn theta_periodic() {
        let a = theta(pt(0.37, 0.2), &tol()).unwrap();
        let b = theta(pt(1.37, 0.2), &tol()).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn theta_term_cap() {
        let t = SeriesTolerance::new(1e-12, 10).unwrap();
        assert!(matches!(
            theta(pt(0.0, 1e-3), &t),
            Err(HamfError::TermCap { .. })
        ));
    }

    #[test]
    fn theta_scaled_reduces() {
        let z = pt(0.11, 0.6);
        assert_eq!(
            theta_scaled(1, z, &tol()).unwrap(),
            theta(z, &tol()).unwrap()
        );
        let a = theta_scaled(2, pt(0.0, 1.0), &tol()).unwrap();
        let b = theta(pt(0.0, 2.0), &tol()).unwrap();
        assert!((a - b).norm() < 1e-15);
        assert!(theta_scaled(0, z, &tol()).is_err());
    }

    #[test]
    fn truncation_soundness() {
        let z = pt(0.31, 0.05);
        let coarse = SeriesTolerance::new(1e-6, 1_000_000).unwrap();
        let fine = coarse.with_abs_tol(5e-7);
        let a = theta(z, &coarse).unwrap();
        let b = theta(z, &fine).unwrap();
        assert!((a - b).norm() < 1e-6);
    }

    #[test]
    fn xi_k_single_term_is_theta() {
        let z = pt(0.2, 0.3);
        let v = xi_k(&[Complex64::new(1.0, 0.0)], z, &tol()).unwrap();
        assert_eq!(v, theta(z, &tol()).unwrap());
    }

    #[test]
    fn theta_transformation_gamma1_4() {
        let check = check_transform(&Theta::BASE, 40, 3, 50, (0.3, 2.0), &tol()).unwrap();
        assert!(check.max_residual < 1e-9, "{check:?}");
    }

    #[test]
    fn theta_scaled_transformation_gamma1_8() {
        let check = check_transform(&Theta { k: 2 }, 20, 5, 64, (0.3, 2.0), &tol()).unwrap();
        assert!(check.max_residual < 1e-9, "{check:?}");
    }

    #[test]
    fn combination_transformation_level_24() {
        let f = ThetaCombination::new(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-2.0, 0.0),
        ])
        .unwrap();
        assert_eq!(f.level(), 24);
        let check = check_transform(&f, 20, 8, 96, (0.3, 2.0), &tol()).unwrap();
        assert!(check.max_residual < 1e-8, "{check:?}");
    }

    #[test]
    fn residual_identity_is_zero() {
        let r = transform_residual(
            &Theta::BASE,
            &UnimodularInt::IDENTITY,
            pt(0.21, 0.8),
            &tol(),
        )
        .unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn residual_rejects_wrong_level() {
        let g = UnimodularInt::new(5, 1, 4, 1).unwrap();
        assert!(transform_residual(&Theta { k: 2 }, &g, pt(0.1, 1.0), &tol()).is_err());
        assert!(transform_residual(
            &Theta::BASE,
            &UnimodularInt::INVERSION,
            pt(0.1, 1.0),
            &tol()
        )
        .is_err());
    }

    #[test]
    fn scaling_conjugation_stays_in_gamma1_4() {
        for k in 1..=6u64 {
            for seed in 0..30 {
                let g = random_gamma1(4 * k, seed, 40 * k).unwrap();
                let kk = k as i64;
                assert_eq!(g.c() % kk, 0);
                let conj = UnimodularInt::new(g.a(), kk * g.b(), g.c() / kk, g.d()).unwrap();
                assert!(in_gamma1(&conj, 4), "k={k} {g}");
            }
        }
    }

    #[test]
    fn delta_periodic_and_inversion() {
        let a = delta_jacobi(pt(0.3, 0.9), &tol()).unwrap();
        let b = delta_jacobi(pt(1.3, 0.9), &tol()).unwrap();
        assert!((a - b).norm() <= 1e-12 * a.norm());
        let i = pt(0.0, 1.0);
        let lhs = delta_jacobi(moebius(&UnimodularInt::INVERSION, i), &tol()).unwrap();
        let rhs = delta_jacobi(i, &tol()).unwrap();
        assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
        // Δ(i) = Γ(1/4)^{24} / (2^{24} π^{18})
        let gamma_quarter = 3.625_609_908_221_908_f64;
        let want = gamma_quarter.powi(24) / (2f64.powi(24) * std::f64::consts::PI.powi(18));
        assert!((rhs.re - want).abs() < 1e-12 * want);
    }

    #[test]
    fn delta_weight_twelve() {
        let mats = [
            UnimodularInt::INVERSION,
            UnimodularInt::TRANSLATION,
            UnimodularInt::new(1, 0, 1, 1).unwrap(),
            UnimodularInt::new(2, 1, 1, 1).unwrap(),
            UnimodularInt::new(1, -1, 1, 0).unwrap(),
            UnimodularInt::new(2, -1, 3, -1).unwrap(),
        ];
        for g in mats {
            for z in [pt(0.1, 1.1), pt(-0.4, 0.8), pt(0.45, 1.5)] {
                let r = transform_residual(&JacobiDelta, &g, z, &tol()).unwrap();
                assert!(r < 1e-8, "{g} at {z:?}: {r}");
            }
        }
    }

    #[test]
    fn lift_examples() {
        let z = pt(0.2, 0.7);
        let p = CoverPoint { z, phi: 0.0 };
        let v = lift(&Theta::BASE, p, &tol()).unwrap();
        let want = 0.7f64.powf(0.25) * theta(z, &tol()).unwrap();
        assert!((v - want).norm() < 1e-15);
        let one = lift(&ConstantOne, CoverPoint { z, phi: 2.3 }, &tol()).unwrap();
        assert_eq!(one, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn lift_invariant_under_theta_lifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let g = crate::group::random_gamma1_with(&mut rng, 4, 30).unwrap();
            let u = CoverElement::theta_lift(g).unwrap();
            let p = CoverPoint {
                z: pt(rng.random(), rng.random_range(0.5..1.5)),
                phi: rng.random_range(-3.0..3.0),
            };
            let a = lift(&Theta::BASE, p, &tol()).unwrap();
            let b = lift(&Theta::BASE, cover_act(&u, p), &tol()).unwrap();
            assert!((a - b).norm() < 1e-9, "{g}");
        }
    }

    #[test]
    fn lcm_values() {
        assert_eq!(lcm_upto(1), 1);
        assert_eq!(lcm_upto(3), 6);
        assert_eq!(lcm_upto(4), 12);
        assert_eq!(lcm_upto(10), 2520);
    }
}
