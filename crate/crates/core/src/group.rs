//! Upper half plane, `Γ₁(N)`, and the universal cover of `SL(2,ℝ)`.

use crate::error::{HamfError, Result};
use crate::symbol::qr_symbol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

/// A point `x + iy` with `y > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperHalfPoint {
    x: f64,
    y: f64,
}

impl UpperHalfPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(HamfError::domain(format!("non-finite point {x} + {y}i")));
        }
        if y <= 0.0 {
            return Err(HamfError::domain(format!(
                "point must lie in the upper half plane, got Im z = {y}"
            )));
        }
        Ok(UpperHalfPoint { x, y })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    /// `z + t` for real `t`.
    pub fn translate(self, t: f64) -> Self {
        UpperHalfPoint {
            x: self.x + t,
            y: self.y,
        }
    }

    /// `k·z` for `k > 0`.
    pub fn scale(self, k: f64) -> Self {
        debug_assert!(k > 0.0);
        UpperHalfPoint {
            x: self.x * k,
            y: self.y * k,
        }
    }
}

/// Argument in `(−π, π]`; the negative real axis (either zero sign) maps to `π`.
pub fn principal_arg(w: Complex64) -> f64 {
    if w.im == 0.0 && w.re < 0.0 {
        PI
    } else {
        w.im.atan2(w.re)
    }
}

/// Square root with `−π/2 < arg ≤ π/2`.
pub fn principal_sqrt(w: Complex64) -> Complex64 {
    Complex64::from_polar(w.norm().sqrt(), 0.5 * principal_arg(w))
}

/// `w^{m/2} := (w^{1/2})^m` with the principal square root.
pub fn half_integer_power(w: Complex64, twice_exponent: i32) -> Complex64 {
    principal_sqrt(w).powi(twice_exponent)
}

/// Integer matrix `(a b; c d)` with `ad − bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct UnimodularInt {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl UnimodularInt {
    pub const IDENTITY: UnimodularInt = UnimodularInt {
        a: 1,
        b: 0,
        c: 0,
        d: 1,
    };
    /// `(0 −1; 1 0)`, `z ↦ −1/z`.
    pub const INVERSION: UnimodularInt = UnimodularInt {
        a: 0,
        b: -1,
        c: 1,
        d: 0,
    };
    /// `(1 1; 0 1)`, `z ↦ z + 1`.
    pub const TRANSLATION: UnimodularInt = UnimodularInt {
        a: 1,
        b: 1,
        c: 0,
        d: 1,
    };

    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = i128::from(a) * i128::from(d) - i128::from(b) * i128::from(c);
        if det != 1 {
            return Err(HamfError::domain(format!(
                "matrix ({a} {b}; {c} {d}) has determinant {det}, expected 1"
            )));
        }
        Ok(UnimodularInt { a, b, c, d })
    }

    pub fn a(&self) -> i64 {
        self.a
    }
    pub fn b(&self) -> i64 {
        self.b
    }
    pub fn c(&self) -> i64 {
        self.c
    }
    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn entries(&self) -> [i64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn inverse(&self) -> Self {
        UnimodularInt {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    /// Matrix product; fails if an entry leaves the `i64` range.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        let e = |x: i64, y: i64, u: i64, v: i64| -> Result<i64> {
            let r = i128::from(x) * i128::from(y) + i128::from(u) * i128::from(v);
            i64::try_from(r).map_err(|_| HamfError::Numerical("matrix entry overflow".into()))
        };
        Ok(UnimodularInt {
            a: e(self.a, rhs.a, self.b, rhs.c)?,
            b: e(self.a, rhs.b, self.b, rhs.d)?,
            c: e(self.c, rhs.a, self.d, rhs.c)?,
            d: e(self.c, rhs.b, self.d, rhs.d)?,
        })
    }

    /// `cz + d`.
    pub fn automorphy(&self, z: UpperHalfPoint) -> Complex64 {
        Complex64::new(self.c as f64 * z.x + self.d as f64, self.c as f64 * z.y)
    }

    /// Largest absolute entry.
    pub fn height(&self) -> i64 {
        self.entries().iter().map(|e| e.abs()).max().unwrap_or(0)
    }
}

impl std::fmt::Display for UnimodularInt {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// `(az + b)/(cz + d)`.
pub fn moebius(g: &UnimodularInt, z: UpperHalfPoint) -> UpperHalfPoint {
    let (a, b, c, d) = (g.a as f64, g.b as f64, g.c as f64, g.d as f64);
    let (x, y) = (z.x, z.y);
    let den = (c * x + d).powi(2) + (c * y).powi(2);
    let re = ((a * x + b) * (c * x + d) + a * c * y * y) / den;
    UpperHalfPoint { x: re, y: y / den }
}

/// `ε_g(z) = (cz + d)/|cz + d|`.
pub fn epsilon(g: &UnimodularInt, z: UpperHalfPoint) -> Complex64 {
    let w = g.automorphy(z);
    w / w.norm()
}

/// `a ≡ d ≡ 1` and `c ≡ 0` modulo `level`.
pub fn in_gamma1(g: &UnimodularInt, level: u64) -> bool {
    if level == 0 {
        return false;
    }
    let n = level as i128;
    let m = |v: i64| (i128::from(v)).rem_euclid(n);
    m(g.a) == 1 % n && m(g.d) == 1 % n && m(g.c) == 0
}

/// Theta multiplier `j_γ(z) = (c/d)·((cz+d)/|cz+d|)^{1/2}` for `γ ∈ Γ₁(4)`.
pub fn j_factor(g: &UnimodularInt, z: UpperHalfPoint) -> Result<Complex64> {
    if !in_gamma1(g, 4) {
        return Err(HamfError::domain(format!("{g} is not in Γ₁(4)")));
    }
    let s = qr_symbol(g.c, g.d)?;
    Ok(principal_sqrt(epsilon(g, z)) * s.as_f64())
}

/// Element `[g, β_g]` of the universal cover, with
/// `β_g(z) = Arg(cz + d) + 2π·winding`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CoverElement {
    pub g: UnimodularInt,
    pub winding: i64,
}

/// Point `(z, φ)` of `H × ℝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverPoint {
    pub z: UpperHalfPoint,
    pub phi: f64,
}

const WINDING_TOL: f64 = 1e-6;

impl CoverElement {
    pub const IDENTITY: CoverElement = CoverElement {
        g: UnimodularInt::IDENTITY,
        winding: 0,
    };

    pub fn new(g: UnimodularInt, winding: i64) -> Self {
        CoverElement { g, winding }
    }

    /// `β_g(z)`.
    pub fn phase(&self, z: UpperHalfPoint) -> f64 {
        principal_arg(self.g.automorphy(z)) + TAU * self.winding as f64
    }

    /// The lift of `γ ∈ Γ₁(4)` lying in `Δ₁`, i.e. with `exp(iβ_γ(z)/2) = j_γ(z)`.
    ///
    /// `exp(iβ/2) = ε^{1/2}·(−1)^winding`, so the winding parity is fixed by `(c/d)`.
    pub fn theta_lift(g: UnimodularInt) -> Result<Self> {
        if !in_gamma1(&g, 4) {
            return Err(HamfError::domain(format!("{g} is not in Γ₁(4)")));
        }
        let s = qr_symbol(g.c, g.d)?;
        Ok(CoverElement {
            g,
            winding: if s.value() == 1 { 0 } else { 1 },
        })
    }

    /// The element `u⁻¹` with `u·u⁻¹ = [I, 0]`.
    pub fn inverse(&self) -> Result<Self> {
        // β_{g⁻¹}(z) = −β_g(g⁻¹ z)
        let ginv = self.g.inverse();
        let i = UpperHalfPoint { x: 0.0, y: 1.0 };
        let target = -self.phase(moebius(&ginv, i));
        let winding = resolve_winding(target, principal_arg(ginv.automorphy(i)))?;
        Ok(CoverElement { g: ginv, winding })
    }
}

fn resolve_winding(target: f64, principal: f64) -> Result<i64> {
    let turns = (target - principal) / TAU;
    let n = turns.round();
    if (turns - n).abs() * TAU > WINDING_TOL {
        return Err(HamfError::Numerical(format!(
            "phase mismatch {} is not a multiple of 2π",
            target - principal
        )));
    }
    Ok(n as i64)
}

/// `[g, β¹][h, β²] = [gh, β³]` with `β³(z) = β¹(hz) + β²(z)`.
pub fn cover_mul(u: &CoverElement, v: &CoverElement) -> Result<CoverElement> {
    let g = u.g.compose(&v.g)?;
    let i = UpperHalfPoint { x: 0.0, y: 1.0 };
    let target = u.phase(moebius(&v.g, i)) + v.phase(i);
    let winding = resolve_winding(target, principal_arg(g.automorphy(i)))?;
    Ok(CoverElement { g, winding })
}

/// `[g, β](z, φ) = (gz, φ + β(z))`.
pub fn cover_act(u: &CoverElement, p: CoverPoint) -> CoverPoint {
    CoverPoint {
        z: moebius(&u.g, p.z),
        phi: p.phi + u.phase(p.z),
    }
}

fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (i128::from(a), i128::from(b));
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (r0, s0, t0) = (-r0, -s0, -t0);
    }
    (r0 as i64, s0 as i64, t0 as i64)
}

/// Complete a coprime bottom row `(c, d)` to an element of `SL(2,ℤ)` with `|a| ≤ |c|/2`.
///
/// For `c = 0` (so `d = ±1`) the top row is `(d, b_parabolic)`.
pub fn complete_bottom_row(c: i64, d: i64, b_parabolic: i64) -> Result<UnimodularInt> {
    if c == 0 {
        if d.abs() != 1 {
            return Err(HamfError::domain(format!(
                "({c}, {d}) is not a coprime row"
            )));
        }
        return UnimodularInt::new(d, b_parabolic, 0, d);
    }
    let (g, x, _) = ext_gcd(d, c);
    if g != 1 {
        return Err(HamfError::domain(format!(
            "({c}, {d}) is not a coprime row"
        )));
    }
    // x·d + y·c = 1, so (a, b) = (x, −y) gives ad − bc = 1; shift a by multiples of c.
    let m = c.abs();
    let mut a = x.rem_euclid(m);
    if a > m / 2 {
        a -= m;
    }
    let num = i128::from(a) * i128::from(d) - 1;
    let b = i64::try_from(num / i128::from(c))
        .map_err(|_| HamfError::Numerical("matrix entry overflow".into()))?;
    UnimodularInt::new(a, b, c, d)
}

const MAX_REJECTIONS: usize = 10_000;

/// Random element of `Γ₁(level)` with entries bounded by `height`.
///
/// Rejection-samples a coprime bottom row `(c, d)` with `c ≡ 0`, `d ≡ 1`
/// mod `level` in the box and completes it. Not uniform on any natural
/// measure; intended as test data.
pub fn random_gamma1_with<R: Rng + ?Sized>(
    rng: &mut R,
    level: u64,
    height: u64,
) -> Result<UnimodularInt> {
    if level == 0 {
        return Err(HamfError::domain("level must be positive"));
    }
    if height < level {
        return Err(HamfError::domain(format!(
            "height bound {height} is below the level {level}"
        )));
    }
    let (n, h) = (level as i64, height as i64);
    let c_span = h / n;
    // d = 1 + n·t with |d| ≤ h
    let t_lo = (-h - 1).div_euclid(n) + i64::from((-h - 1).rem_euclid(n) != 0);
    let t_hi = (h - 1).div_euclid(n);
    for _ in 0..MAX_REJECTIONS {
        let c = n * rng.random_range(-c_span..=c_span);
        let d = 1 + n * rng.random_range(t_lo..=t_hi);
        let (g, _, _) = ext_gcd(c, d);
        if g != 1 {
            continue;
        }
        let b_par = rng.random_range(-h..=h);
        let m = complete_bottom_row(c, d, b_par)?;
        if m.height() <= h {
            debug_assert!(in_gamma1(&m, level));
            return Ok(m);
        }
    }
    Err(HamfError::Numerical(format!(
        "no element of Γ₁({level}) found in box {height} after {MAX_REJECTIONS} tries"
    )))
}

/// Seeded variant of [`random_gamma1_with`].
pub fn random_gamma1(level: u64, seed: u64, height: u64) -> Result<UnimodularInt> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_gamma1_with(&mut rng, level, height)
}
