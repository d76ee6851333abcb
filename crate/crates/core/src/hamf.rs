//! `ξ(z) = Σ_{n≥1} h(n²z)` for `h(z) = Σ_{k≥1} ĥ_k e(kz)` with `|ĥ_k| ≤ C k^{−β}`.
//!
//! The Fourier coefficients of `ξ` are `ξ̂_m = Σ_{n²k = m} ĥ_k`. Truncating the
//! `k`-sum at `K` gives the coefficients of the theta combination
//! `½ Σ_{k≤K} ĥ_k θ(kz)`, a weight-½ modular form of level `4·lcm(2,…,K)`.
//! [`approx_error`] measures the normalized ℓ² distance between the two.

use crate::error::{HamfError, Result};
use crate::group::UpperHalfPoint;
use crate::phase::e_mul;
use crate::theta::{SeriesTolerance, ThetaCombination};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest `k` probed when a rule-based sequence is checked against its certificate.
pub const DECAY_SPOT_CHECK: u64 = 100_000;

type Rule = Arc<dyn Fn(u64) -> Complex64 + Send + Sync>;

#[derive(Clone)]
enum Source {
    Rule(Rule),
    /// `values[k − 1] = ĥ_k`; zero beyond the table.
    Table(Vec<Complex64>),
}

/// Coefficients `(ĥ_k)_{k≥1}` with a decay certificate `|ĥ_k| ≤ C/k^β`, `β > ¼`.
#[derive(Clone)]
pub struct CoeffSequence {
    name: String,
    source: Source,
    decay_c: f64,
    decay_beta: f64,
}

impl fmt::Debug for CoeffSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoeffSequence")
            .field("name", &self.name)
            .field("decay_c", &self.decay_c)
            .field("decay_beta", &self.decay_beta)
            .finish_non_exhaustive()
    }
}

fn check_certificate(decay_c: f64, decay_beta: f64) -> Result<()> {
    if !(decay_c > 0.0 && decay_c.is_finite()) {
        return Err(HamfError::domain(format!(
            "decay constant C must be positive, got {decay_c}"
        )));
    }
    if !(decay_beta > 0.25 && decay_beta.is_finite()) {
        return Err(HamfError::domain(format!(
            "decay exponent beta must exceed 1/4, got {decay_beta}"
        )));
    }
    Ok(())
}

impl CoeffSequence {
    /// Rule-based sequence; the certificate is spot-checked for `k ≤ 10⁵`.
    pub fn from_fn<F>(
        name: impl Into<String>,
        rule: F,
        decay_c: f64,
        decay_beta: f64,
    ) -> Result<Self>
    where
        F: Fn(u64) -> Complex64 + Send + Sync + 'static,
    {
        check_certificate(decay_c, decay_beta)?;
        let seq = CoeffSequence {
            name: name.into(),
            source: Source::Rule(Arc::new(rule)),
            decay_c,
            decay_beta,
        };
        seq.verify_decay(DECAY_SPOT_CHECK)?;
        Ok(seq)
    }

    /// Finitely supported sequence, `values[k − 1] = ĥ_k`.
    pub fn from_table(
        name: impl Into<String>,
        values: Vec<Complex64>,
        decay_c: f64,
        decay_beta: f64,
    ) -> Result<Self> {
        check_certificate(decay_c, decay_beta)?;
        let n = values.len() as u64;
        let seq = CoeffSequence {
            name: name.into(),
            source: Source::Table(values),
            decay_c,
            decay_beta,
        };
        seq.verify_decay(n)?;
        Ok(seq)
    }

    /// Finitely supported sequence with the smallest `C` valid for the given `β`.
    pub fn from_table_fitted(
        name: impl Into<String>,
        values: Vec<Complex64>,
        decay_beta: f64,
    ) -> Result<Self> {
        let c = values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm() * ((i + 1) as f64).powf(decay_beta))
            .fold(0.0f64, f64::max);
        // an all-zero table still needs C > 0
        let c = if c > 0.0 { c * (1.0 + 1e-12) } else { 1.0 };
        Self::from_table(name, values, c, decay_beta)
    }

    /// `ĥ_k = −1/k`, the coefficients of `log(1 − e(z))`; `C = 1`, `β = 1`.
    pub fn log_squares() -> Self {
        CoeffSequence {
            name: "log-squares".into(),
            source: Source::Rule(Arc::new(|k| Complex64::new(-1.0 / k as f64, 0.0))),
            decay_c: 1.0,
            decay_beta: 1.0,
        }
    }

    /// `ĥ_1 = 1` and nothing else, so `ξ = (θ − 1)/2`.
    pub fn theta_only() -> Self {
        CoeffSequence {
            name: "theta-only".into(),
            source: Source::Table(vec![Complex64::new(1.0, 0.0)]),
            decay_c: 1.0,
            decay_beta: 1.0,
        }
    }

    /// The zero sequence.
    pub fn zero() -> Self {
        CoeffSequence {
            name: "zero".into(),
            source: Source::Table(Vec::new()),
            decay_c: 1.0,
            decay_beta: 1.0,
        }
    }

    /// Named preset: `log-squares`, `theta-only` or `zero`.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "log-squares" => Ok(Self::log_squares()),
            "theta-only" => Ok(Self::theta_only()),
            "zero" => Ok(Self::zero()),
            other => Err(HamfError::domain(format!(
                "unknown preset '{other}' (expected log-squares, theta-only or zero)"
            ))),
        }
    }

    /// Read `k, re, im` rows. Missing `k` are zero.
    pub fn from_csv(path: &Path, decay_beta: f64) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut values: Vec<Complex64> = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            if line == 0 && rec.get(0).is_some_and(|f| f.parse::<u64>().is_err()) {
                // header row
                continue;
            }
            if rec.len() < 2 {
                return Err(HamfError::Parse(format!(
                    "row {} needs k, re[, im]",
                    line + 1
                )));
            }
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("0")
                    .parse::<f64>()
                    .map_err(|e| HamfError::Parse(format!("row {}: {e}", line + 1)))
            };
            let k: u64 = rec[0]
                .parse()
                .map_err(|e| HamfError::Parse(format!("row {}: bad index: {e}", line + 1)))?;
            if k == 0 {
                return Err(HamfError::Parse(
                    "coefficient indices start at k = 1".into(),
                ));
            }
            let idx = (k - 1) as usize;
            if values.len() <= idx {
                values.resize(idx + 1, ZERO);
            }
            values[idx] = Complex64::new(field(1)?, field(2)?);
        }
        Self::from_table_fitted(path.display().to_string(), values, decay_beta)
    }

    /// The sequence with `ĥ_k` replaced by 0 for `k > cutoff`.
    pub fn truncated(&self, cutoff: u64) -> Self {
        let values = (1..=cutoff).map(|k| self.coeff(k)).collect();
        CoeffSequence {
            name: format!("{}[k<={cutoff}]", self.name),
            source: Source::Table(values),
            decay_c: self.decay_c,
            decay_beta: self.decay_beta,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn decay_c(&self) -> f64 {
        self.decay_c
    }

    pub fn decay_beta(&self) -> f64 {
        self.decay_beta
    }

    /// `ĥ_k`; zero for `k = 0`.
    pub fn coeff(&self, k: u64) -> Complex64 {
        if k == 0 {
            return ZERO;
        }
        match &self.source {
            Source::Rule(f) => f(k),
            Source::Table(v) => v.get((k - 1) as usize).copied().unwrap_or(ZERO),
        }
    }

    /// Index of the last nonzero coefficient, if the sequence is finitely supported.
    pub fn support_bound(&self) -> Option<u64> {
        match &self.source {
            Source::Rule(_) => None,
            Source::Table(v) => Some(
                v.iter()
                    .rposition(|c| *c != ZERO)
                    .map_or(0, |i| i as u64 + 1),
            ),
        }
    }

    /// `[0, ĥ_1, …, ĥ_kmax]`.
    pub fn table(&self, kmax: u64) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(kmax as usize + 1);
        out.push(ZERO);
        out.extend((1..=kmax).map(|k| self.coeff(k)));
        out
    }

    /// `C·k^{−β}`.
    pub fn bound(&self, k: u64) -> f64 {
        self.decay_c * (k as f64).powf(-self.decay_beta)
    }

    fn verify_decay(&self, kmax: u64) -> Result<()> {
        for k in 1..=kmax {
            let value = self.coeff(k).norm();
            let bound = self.bound(k);
            if value > bound * (1.0 + 1e-12) {
                return Err(HamfError::DecayViolation { k, value, bound });
            }
        }
        Ok(())
    }
}

/// Cutoff `k*` with `C Σ_{k>k*} k^{−β} q^k < tol`, `q = e^{−2πy}`.
///
/// Drops the `k^{−β} ≤ 1` factor: `C q^{k*+1}/(1 − q) < tol`.
fn h_cutoff(h: &CoeffSequence, y: f64, tol: &SeriesTolerance) -> Result<u64> {
    if let Some(s) = h.support_bound() {
        return Ok(s);
    }
    let one_minus_q = -(-TAU * y).exp_m1();
    let k = ((tol.abs_tol() * one_minus_q / h.decay_c).ln() / (-TAU * y))
        .ceil()
        .max(1.0);
    if k >= tol.max_terms() as f64 {
        return Err(HamfError::TermCap {
            what: "h series",
            needed: k.min(u64::MAX as f64) as u64,
            cap: tol.max_terms(),
        });
    }
    Ok(k as u64)
}

/// `h(z) = Σ_{k≥1} ĥ_k e(kz)`.
pub fn h_eval(h: &CoeffSequence, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    let cutoff = h_cutoff(h, z.y(), tol)?;
    let mut acc = ZERO;
    for k in (1..=cutoff).rev() {
        let c = h.coeff(k);
        if c != ZERO {
            acc += c * e_mul(k as f64, z.x(), z.y());
        }
    }
    Ok(acc)
}

/// Smallest `n*` with `C Σ_{n>n*} q_n/(1 − q_n) < target`, `q_n = e^{−2πn²y}`.
fn square_cutoff(
    decay_c: f64,
    y: f64,
    target: f64,
    tol: &SeriesTolerance,
    what: &'static str,
) -> Result<u64> {
    let bound = |n: f64| {
        let m = n + 1.0;
        let first = (-TAU * m * m * y).exp();
        let geometric = -(-TAU * (2.0 * m + 1.0) * y).exp_m1();
        let one_minus_q = -(-TAU * m * m * y).exp_m1();
        decay_c * first / (geometric * one_minus_q)
    };
    let guess = ((target / decay_c).ln() / (-TAU * y)).max(0.0).sqrt();
    let mut n = (guess.floor() as u64).saturating_sub(1);
    while bound(n as f64) >= target {
        n += 1;
        tol.check_cap(what, n)?;
    }
    tol.check_cap(what, n)?;
    Ok(n.max(1))
}

/// `ξ(z) = Σ_{n≥1} h(n²z)`.
pub fn xi_eval(h: &CoeffSequence, z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    let half = tol.abs_tol() / 2.0;
    let n_max = square_cutoff(h.decay_c, z.y(), half, tol, "xi series")?;
    let inner = tol.with_abs_tol(half / n_max as f64);
    let mut acc = ZERO;
    for n in (1..=n_max).rev() {
        acc += h_eval(h, z.scale((n * n) as f64), &inner)?;
    }
    Ok(acc)
}

/// `Σ_{n≥1} Log(1 − e(n²z))` with principal logarithms.
///
/// Each factor has positive real part, so the sum is well defined and matches
/// `ξ` for `ĥ_k = −1/k` term by term.
pub fn xi_log_direct(z: UpperHalfPoint, tol: &SeriesTolerance) -> Result<Complex64> {
    let n_max = square_cutoff(1.0, z.y(), tol.abs_tol(), tol, "log product")?;
    let one = Complex64::new(1.0, 0.0);
    let mut acc = ZERO;
    for n in (1..=n_max).rev() {
        acc += (one - e_mul((n * n) as f64, z.x(), z.y())).ln();
    }
    Ok(acc)
}

/// Dense Fourier coefficients `m ↦ ĉ_m`, `0 ≤ m ≤ m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoeffs {
    values: Vec<Complex64>,
}

impl FourierCoeffs {
    pub fn m_max(&self) -> u64 {
        (self.values.len() - 1) as u64
    }

    pub fn get(&self, m: u64) -> Complex64 {
        self.values[m as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// `Σ_m ĉ_m e(mz)` over the stored range.
    pub fn eval(&self, z: UpperHalfPoint) -> Complex64 {
        let mut acc = ZERO;
        for (m, c) in self.values.iter().enumerate().rev() {
            if *c != ZERO {
                acc += c * e_mul(m as f64, z.x(), z.y());
            }
        }
        acc
    }
}

/// Chunk width for the sieve; fixed so results do not depend on the thread count.
const SIEVE_CHUNK: usize = 1 << 14;

/// Above this `m_max` the sieve is used instead of per-`m` divisor enumeration.
pub const SIEVE_THRESHOLD: u64 = 100_000;

/// `out[i] = Σ_{n ascending, n²k = lo+i, k ∈ [k_lo, k_hi]} table[k]`.
fn sieve_chunk(table: &[Complex64], k_lo: u64, k_hi: u64, lo: u64, out: &mut [Complex64]) {
    let hi = lo + out.len() as u64; // exclusive
    let mut n = 1u64;
    while n * n < hi {
        let n2 = n * n;
        let first = lo.div_ceil(n2).max(k_lo).max(1);
        let last = ((hi - 1) / n2).min(k_hi);
        let mut k = first;
        while k <= last {
            out[(n2 * k - lo) as usize] += table[k as usize];
            k += 1;
        }
        n += 1;
    }
}

fn sieve(table: &[Complex64], k_lo: u64, k_hi: u64, m_max: u64) -> Vec<Complex64> {
    let mut values = vec![ZERO; m_max as usize + 1];
    values
        .par_chunks_mut(SIEVE_CHUNK)
        .enumerate()
        .for_each(|(i, chunk)| sieve_chunk(table, k_lo, k_hi, (i * SIEVE_CHUNK) as u64, chunk));
    values[0] = ZERO;
    values
}

/// Per-`m` enumeration of `n ≤ √m` with `n² | m`.
fn divisor_enumeration(table: &[Complex64], k_lo: u64, k_hi: u64, m_max: u64) -> Vec<Complex64> {
    let mut values = vec![ZERO; m_max as usize + 1];
    for m in 1..=m_max {
        let mut acc = ZERO;
        let mut n = 1u64;
        while n * n <= m {
            if m % (n * n) == 0 {
                let k = m / (n * n);
                if k >= k_lo && k <= k_hi {
                    acc += table[k as usize];
                }
            }
            n += 1;
        }
        values[m as usize] = acc;
    }
    values
}

/// Both strategies add contributions in ascending `n`, so they agree bit for bit.
fn square_divisor_sums(h: &CoeffSequence, k_lo: u64, k_hi: u64, m_max: u64) -> Vec<Complex64> {
    let k_hi = k_hi.min(m_max);
    let table = h.table(k_hi);
    if m_max > SIEVE_THRESHOLD {
        sieve(&table, k_lo, k_hi, m_max)
    } else {
        divisor_enumeration(&table, k_lo, k_hi, m_max)
    }
}

#[doc(hidden)]
pub fn square_divisor_sums_with(
    h: &CoeffSequence,
    k_lo: u64,
    k_hi: u64,
    m_max: u64,
    use_sieve: bool,
) -> Vec<Complex64> {
    let k_hi = k_hi.min(m_max);
    let table = h.table(k_hi);
    if use_sieve {
        sieve(&table, k_lo, k_hi, m_max)
    } else {
        divisor_enumeration(&table, k_lo, k_hi, m_max)
    }
}

/// `ξ̂_m = Σ_{n²|m} ĥ_{m/n²}` for `m ≤ m_max`, with `ξ̂_0 = 0`.
pub fn xi_coeff(h: &CoeffSequence, m_max: u64) -> Result<FourierCoeffs> {
    if m_max == 0 {
        return Err(HamfError::domain("m_max must be at least 1"));
    }
    Ok(FourierCoeffs {
        values: square_divisor_sums(h, 1, u64::MAX, m_max),
    })
}

/// Coefficients of `½ Σ_{k≤K} ĥ_k θ(kz)`.
pub fn xik_coeff(h: &CoeffSequence, cutoff: u64, m_max: u64) -> Result<FourierCoeffs> {
    if cutoff == 0 {
        return Err(HamfError::domain("K must be at least 1"));
    }
    if m_max == 0 {
        return Err(HamfError::domain("m_max must be at least 1"));
    }
    let mut values = square_divisor_sums(h, 1, cutoff, m_max);
    values[0] = constant_term(h, cutoff);
    Ok(FourierCoeffs { values })
}

fn constant_term(h: &CoeffSequence, cutoff: u64) -> Complex64 {
    0.5 * (1..=cutoff).map(|k| h.coeff(k)).sum::<Complex64>()
}

/// The approximant `½ Σ_{k≤K} ĥ_k θ(kz)` as a modular form.
pub fn approximant(h: &CoeffSequence, cutoff: u64) -> Result<ThetaCombination> {
    ThetaCombination::new((1..=cutoff).map(|k| 0.5 * h.coeff(k)).collect())
}

/// `(1/√M) Σ_{m=0}^{M} |ξ̂_m − ξ̂^{(K)}_m|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxReport {
    pub k: u64,
    pub m: u64,
    pub error_sq: f64,
}

pub fn approx_error(h: &CoeffSequence, cutoff: u64, m: u64) -> Result<ApproxReport> {
    if cutoff == 0 || m == 0 {
        return Err(HamfError::domain("approx_error needs K >= 1 and M >= 1"));
    }
    // ξ̂_m − ξ̂^{(K)}_m only involves k > K
    let diff = square_divisor_sums(h, cutoff + 1, u64::MAX, m);
    let head = constant_term(h, cutoff).norm_sqr();
    let body: f64 = diff[1..].iter().map(|c| c.norm_sqr()).sum();
    Ok(ApproxReport {
        k: cutoff,
        m,
        error_sq: (head + body) / (m as f64).sqrt(),
    })
}

/// `Σ_{r>n} r^{−s}` for `s > 1`: explicit terms then Euler–Maclaurin.
pub(crate) fn zeta_tail(s: f64, n: u64) -> f64 {
    const EXPLICIT: u64 = 64;
    let mut acc = 0.0;
    for r in (n + 1..=n + EXPLICIT).rev() {
        acc += (r as f64).powf(-s);
    }
    let m = (n + EXPLICIT) as f64;
    // Σ_{r>m} r^{−s} = m^{1−s}/(s−1) − m^{−s}/2 + s m^{−s−1}/12 − s(s+1)(s+2) m^{−s−3}/720 + …
    let em = m.powf(1.0 - s) / (s - 1.0) - 0.5 * m.powf(-s) + s * m.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * m.powf(-s - 3.0) / 720.0;
    acc + em
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Pair cap for the coprime double sum inside [`tail_bound`].
const TAIL_PAIR_CAP: u64 = 2_000;

/// `C² Σ_{S₂} r^{−(½+2β)} p^{−(1+2β)} q^{−(1+2β)}`,
/// `S₂ = {gcd(p,q) = 1, rp² > K, rq² > K}`.
///
/// The leading coefficient of the `√M` growth of the squared approximation
/// error, so an upper-bound surrogate for `limsup error_sq`.
///
/// For `r > K` the `(p, q)` constraint is vacuous, so the `r`-sum splits into a
/// finite part and a zeta tail. The `(p, q)` sums are enumerated up to a fixed
/// cap plus an integral bound for the rest.
pub fn tail_bound(h: &CoeffSequence, cutoff: u64) -> f64 {
    let a = 0.5 + 2.0 * h.decay_beta;
    let b = 1.0 + 2.0 * h.decay_beta;
    let cap = TAIL_PAIR_CAP;
    // by_min[t] = Σ over coprime (p, q) ≤ cap with min(p, q) = t
    let mut by_min = vec![0.0f64; cap as usize + 2];
    let pw: Vec<f64> = (0..=cap)
        .map(|p| if p == 0 { 0.0 } else { (p as f64).powf(-b) })
        .collect();
    for p in 1..=cap {
        for q in 1..=cap {
            if gcd(p, q) == 1 {
                by_min[p.min(q) as usize] += pw[p as usize] * pw[q as usize];
            }
        }
    }
    // Pairs with p or q above the cap: at most 2·(Σ_{p≥t} p^{−b})·(Σ_{q>cap} q^{−b}).
    let beyond = zeta_tail(b, cap);
    let mut suffix = vec![0.0f64; cap as usize + 2];
    let mut single = vec![0.0f64; cap as usize + 2];
    for t in (1..=cap as usize).rev() {
        suffix[t] = suffix[t + 1] + by_min[t];
        single[t] = single[t + 1] + pw[t];
    }
    let pairs_from = |t: u64| -> f64 {
        if t > cap {
            let s = zeta_tail(b, t - 1);
            s * s
        } else {
            suffix[t as usize] + 2.0 * (single[t as usize] + beyond) * beyond
        }
    };
    let mut total = 0.0;
    for r in (1..=cutoff).rev() {
        // smallest p with r p² > K
        let t = ((cutoff / r) as f64).sqrt().floor() as u64;
        let t = (t.saturating_sub(1)..=t + 2)
            .find(|&p| p > 0 && r * p * p > cutoff)
            .unwrap_or(t + 1);
        total += (r as f64).powf(-a) * pairs_from(t);
    }
    total += zeta_tail(a, cutoff) * pairs_from(1);
    h.decay_c * h.decay_c * total
}

/// Cutoff `M` with `Σ_{m>M} |ξ̂_m| e^{−2πmy} < tol`, from `|ξ̂_m| ≤ C√m`.
pub fn fourier_cutoff(h: &CoeffSequence, y: f64, tol: &SeriesTolerance) -> Result<u64> {
    let q_log = -TAU * y;
    // √m q^m is eventually decreasing with ratio ρ = q·√((M+2)/(M+1)) past M
    let bound = |m: f64| {
        let rho = (q_log + 0.5 * ((m + 2.0) / (m + 1.0)).ln()).exp();
        if rho >= 1.0 {
            f64::INFINITY
        } else {
            h.decay_c * (m + 1.0).sqrt() * (q_log * (m + 1.0)).exp() / (1.0 - rho)
        }
    };
    let mut m = ((tol.abs_tol() / h.decay_c).ln() / q_log).ceil().max(1.0);
    while bound(m) >= tol.abs_tol() {
        m = (m * 1.02).ceil();
        if m > tol.max_terms() as f64 {
            break;
        }
    }
    let m = m as u64;
    tol.check_cap("fourier series", m)?;
    Ok(m)
}

/// `Σ_{m≥1} |ξ̂_m|² e^{−4πmy}`, truncated once the remainder bound
/// `C² Σ_{m>M} m e^{−4πmy}` drops below `10⁻¹²` of the running sum.
pub fn parseval_sum(h: &CoeffSequence, y: f64) -> Result<f64> {
    if !(y > 0.0 && y.is_finite()) {
        return Err(HamfError::domain(format!("y must be positive, got {y}")));
    }
    let q = (-2.0 * TAU * y).exp();
    let one_minus_q = -(-2.0 * TAU * y).exp_m1();
    let remainder = |m: u64| {
        let m = m as f64;
        h.decay_c
            * h.decay_c
            * q.powf(m + 1.0)
            * ((m + 1.0) / one_minus_q + q / (one_minus_q * one_minus_q))
    };
    if h.support_bound() == Some(0) {
        return Ok(0.0);
    }
    let mut m_max = ((40.0 / (2.0 * TAU * y)).ceil() as u64).max(16);
    loop {
        let coeffs = xi_coeff(h, m_max)?;
        let terms: Vec<f64> = coeffs
            .values()
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, c)| c.norm_sqr() * (-2.0 * TAU * y * m as f64).exp())
            .collect();
        let total = crate::stats::pairwise_sum(&terms);
        if remainder(m_max) <= 1e-12 * total {
            return Ok(total);
        }
        if m_max > SeriesTolerance::DEFAULT_MAX_TERMS {
            return Err(HamfError::TermCap {
                what: "parseval sum",
                needed: m_max * 2,
                cap: SeriesTolerance::DEFAULT_MAX_TERMS,
            });
        }
        m_max *= 2;
    }
}

/// Composite midpoint rule for `∫₀¹ |ξ(x + iy)|² dx` with `nodes` points, `ξ` by [`xi_eval`].
pub fn horocycle_l2(h: &CoeffSequence, y: f64, nodes: usize, tol: &SeriesTolerance) -> Result<f64> {
    if nodes == 0 {
        return Err(HamfError::domain("quadrature needs at least one node"));
    }
    let values: Vec<f64> = (0..nodes)
        .into_par_iter()
        .map(|j| {
            let z = UpperHalfPoint::new((j as f64 + 0.5) / nodes as f64, y)?;
            Ok(xi_eval(h, z, tol)?.norm_sqr())
        })
        .collect::<Result<_>>()?;
    Ok(crate::stats::pairwise_sum(&values) / nodes as f64)
}
