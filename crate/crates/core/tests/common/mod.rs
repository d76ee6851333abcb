//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;

/// ζ(s) for s > 1 by direct summation to N plus Euler–Maclaurin with six Bernoulli terms.
pub fn zeta(s: f64) -> f64 {
    const N: f64 = 1000.0;
    let mut acc = 0.0;
    for n in (1..1000).rev() {
        acc += (n as f64).powf(-s);
    }
    // Σ_{n≥N} n^{−s} = N^{1−s}/(s−1) + N^{−s}/2 + Σ B_{2j}/(2j)! (s)_{2j−1} N^{−s−2j+1}
    let bern = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let mut tail = N.powf(1.0 - s) / (s - 1.0) + 0.5 * N.powf(-s);
    let mut rising = s;
    let mut fact = 2.0;
    for (j, b) in bern.iter().enumerate() {
        let k = 2 * j + 2;
        tail += b / fact * rising * N.powf(-s - k as f64 + 1.0);
        rising *= (s + k as f64 - 1.0) * (s + k as f64);
        fact *= ((k + 1) * (k + 2)) as f64;
    }
    acc + tail
}

/// A = ζ(5/2) ζ(3)² / ζ(6) for ĥ_k = −1/k.
pub fn variance_constant_log_squares() -> f64 {
    zeta(2.5) * zeta(3.0).powi(2) / zeta(6.0)
}

/// Brute-force `(1/√M) Σ_{m=0}^{M} |ξ̂_m − ξ̂^{(K)}_m|²` by enumerating
/// `(k₁, k₂, n₁, n₂)` with `n₁²k₁ = n₂²k₂ ≤ M`, `k₁, k₂ > K`, plus the constant term.
pub fn approx_error_brute(h: impl Fn(u64) -> Complex64, cutoff: u64, m: u64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for n1 in 1..=m {
        if n1 * n1 > m {
            break;
        }
        for k1 in (cutoff + 1)..=(m / (n1 * n1)) {
            let prod = n1 * n1 * k1;
            for n2 in 1..=m {
                let nn = n2 * n2;
                if nn > prod {
                    break;
                }
                if prod % nn == 0 && prod / nn > cutoff {
                    acc += h(k1) * h(prod / nn).conj();
                }
            }
        }
    }
    let head: Complex64 = (1..=cutoff).map(|k| 0.5 * h(k)).sum();
    (acc.re + head.norm_sqr()) / (m as f64).sqrt()
}

/// Jacobi symbol by prime factorisation of `n` and Euler's criterion per prime.
pub fn jacobi_by_factoring(a: i64, n: u64) -> i64 {
    let mut n = n;
    let mut result = 1;
    let mut p = 3;
    while n > 1 {
        if p * p > n {
            p = n;
        }
        while n.is_multiple_of(p) {
            result *= euler(a, p);
            n /= p;
        }
        p += 2;
    }
    result
}

fn euler(a: i64, p: u64) -> i64 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    let (mut base, mut e, mut r) = (a, (p - 1) / 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            r = r * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if r == 1 {
        1
    } else {
        -1
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
