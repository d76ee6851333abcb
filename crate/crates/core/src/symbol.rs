//! The generalized quadratic residue symbol `(a/b)` for any integer `a` and
//! odd integer `b`.
//!
//! For `b > 1` this is the Jacobi symbol. Negative `b` picks up the factor
//! `(a/−1) = sgn a`, and `(0/±1) = 1`.

use crate::error::{HamfError, Result};

/// Value of a residue symbol, one of `−1`, `0`, `+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolValue(i8);

impl SymbolValue {
    pub const ZERO: SymbolValue = SymbolValue(0);
    pub const ONE: SymbolValue = SymbolValue(1);
    pub const MINUS_ONE: SymbolValue = SymbolValue(-1);

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    fn negate_if(self, flip: bool) -> Self {
        if flip {
            SymbolValue(-self.0)
        } else {
            self
        }
    }
}

impl From<SymbolValue> for i64 {
    fn from(v: SymbolValue) -> i64 {
        i64::from(v.0)
    }
}

impl std::ops::Mul for SymbolValue {
    type Output = SymbolValue;
    fn mul(self, rhs: SymbolValue) -> SymbolValue {
        SymbolValue(self.0 * rhs.0)
    }
}

impl std::fmt::Display for SymbolValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `(a/b)` for odd nonzero `b`.
pub fn qr_symbol(a: i64, b: i64) -> Result<SymbolValue> {
    if b == 0 {
        return Err(HamfError::domain("residue symbol (a/b) needs b != 0"));
    }
    if b % 2 == 0 {
        return Err(HamfError::domain(format!(
            "residue symbol (a/b) needs odd b, got b = {b}"
        )));
    }
    let positive = jacobi(a, b.unsigned_abs());
    // (a/−b) = (a/−1)(a/b); the a = 0 case only survives when |b| = 1, where (0/−1) = 1.
    Ok(positive.negate_if(b < 0 && a < 0))
}

/// Jacobi symbol `(a/n)` for odd `n ≥ 1`, by binary reduction and reciprocity.
fn jacobi(a: i64, n: u64) -> SymbolValue {
    debug_assert!(n % 2 == 1);
    let mut n = n;
    let mut a = if a >= 0 {
        a.unsigned_abs() % n
    } else {
        let r = a.unsigned_abs() % n;
        if r == 0 {
            0
        } else {
            n - r
        }
    };
    let mut flip = false;
    while a != 0 {
        let twos = a.trailing_zeros();
        a >>= twos;
        // (2/n) = −1 iff n ≡ 3, 5 mod 8
        if twos % 2 == 1 && matches!(n % 8, 3 | 5) {
            flip = !flip;
        }
        if a % 4 == 3 && n % 4 == 3 {
            flip = !flip;
        }
        std::mem::swap(&mut a, &mut n);
        a %= n;
    }
    if n == 1 {
        SymbolValue::ONE.negate_if(flip)
    } else {
        SymbolValue::ZERO
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = u128::from(modulus);
    let mut acc: u128 = 1 % m;
    let mut b = u128::from(base % modulus);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// Legendre symbol by Euler's criterion `a^{(p−1)/2} mod p`.
///
/// Used as an independent check on [`qr_symbol`].
pub fn legendre_oracle(a: i64, p: i64) -> Result<SymbolValue> {
    if p <= 2 || !is_prime(p as u64) {
        return Err(HamfError::domain(format!(
            "legendre oracle needs an odd prime, got {p}"
        )));
    }
    let p = p as u64;
    let r = a.rem_euclid(p as i64) as u64;
    if r == 0 {
        return Ok(SymbolValue::ZERO);
    }
    match pow_mod(r, (p - 1) / 2, p) {
        1 => Ok(SymbolValue::ONE),
        x if x == p - 1 => Ok(SymbolValue::MINUS_ONE),
        x => Err(HamfError::Numerical(format!(
            "Euler criterion gave {x} mod {p}"
        ))),
    }
}
