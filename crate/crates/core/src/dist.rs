//! Sampling `w = y^{1/4} ξ(x + iy)` along a horocycle, rotation statistics of
//! the sample cloud, the variance constant `A`, and the error term
//! `R(x, M) = M^{−1/2} Σ_{n≤M} ψ(n²x)`.

use crate::error::{HamfError, Result};
use crate::hamf::{fourier_cutoff, parseval_sum, xi_coeff, CoeffSequence};
use crate::phase::{e_real, frac_mul};
use crate::stats::{complex_mean, ks_one_sample, pairwise_sum, trimmed_mean};
use crate::theta::SeriesTolerance;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::{PI, TAU};
use std::path::Path;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How the horocycle abscissae `x_j` are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampler {
    /// `x_j` uniform on `[0, 1)`, drawn from stream `j` of the seeded generator.
    IidUniform,
    /// `x_j = (j + ½)/n`.
    StratifiedGrid,
}

impl std::str::FromStr for Sampler {
    type Err = HamfError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iid" | "iid-uniform" => Ok(Sampler::IidUniform),
            "stratified" | "stratified-grid" => Ok(Sampler::StratifiedGrid),
            other => Err(HamfError::domain(format!("unknown sampler '{other}'"))),
        }
    }
}

impl std::fmt::Display for Sampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sampler::IidUniform => "iid-uniform",
            Sampler::StratifiedGrid => "stratified-grid",
        })
    }
}

/// Samples `w_j = y^{1/4} ξ(x_j + iy)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    pub xs: Vec<f64>,
    pub samples: Vec<Complex64>,
    pub y: f64,
    pub seed: u64,
    pub sampler: Sampler,
}

impl EmpiricalDistribution {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn abs_values(&self) -> Vec<f64> {
        self.samples.iter().map(|w| w.norm()).collect()
    }

    pub fn args(&self) -> Vec<f64> {
        self.samples
            .iter()
            .map(|w| crate::group::principal_arg(*w))
            .collect()
    }

    pub fn mean_abs2(&self) -> f64 {
        let v: Vec<f64> = self.samples.iter().map(|w| w.norm_sqr()).collect();
        pairwise_sum(&v) / v.len() as f64
    }

    /// `E|w|²` with the largest 0.1% of `|w|²` removed; robust if the law is heavy-tailed.
    pub fn trimmed_mean_abs2(&self) -> f64 {
        let v: Vec<f64> = self.samples.iter().map(|w| w.norm_sqr()).collect();
        trimmed_mean(&v, 1e-3)
    }
}

/// Abscissa of sample `j` for the iid sampler: first draw of stream `j`.
pub fn iid_abscissa(seed: u64, j: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(j);
    rng.random::<f64>()
}

/// Damped coefficients `ξ̂_m e^{−2πmy}`, `m ≤ M`.
fn damped_coeffs(h: &CoeffSequence, y: f64, tol: &SeriesTolerance) -> Result<Vec<Complex64>> {
    let m_max = fourier_cutoff(h, y, tol)?;
    let mut c = xi_coeff(h, m_max)?.into_values();
    c.par_iter_mut()
        .enumerate()
        .for_each(|(m, v)| *v *= (-TAU * y * m as f64).exp());
    Ok(c)
}

/// `Σ_m c_m e(mx)` by a rotating phase, re-anchored every 256 steps.
fn eval_damped(c: &[Complex64], x: f64) -> Complex64 {
    const ANCHOR: usize = 256;
    let step = e_real(x);
    let mut acc = ZERO;
    let mut phase = Complex64::new(1.0, 0.0);
    for (m, cm) in c.iter().enumerate() {
        if m % ANCHOR == 0 {
            phase = e_real(frac_mul(m as f64, x));
        }
        acc += cm * phase;
        phase *= step;
    }
    acc
}

/// `ξ` at the grid `x_j = (j + ½)/n` in one pass: fold the coefficients modulo `n`
/// and apply an inverse DFT.
fn eval_on_grid(c: &[Complex64], n: usize) -> Vec<Complex64> {
    let two_n = 2 * n as u64;
    let mut buckets = vec![ZERO; n];
    for (m, cm) in c.iter().enumerate() {
        let m = m as u64;
        let shift = e_real((m % two_n) as f64 / two_n as f64);
        buckets[(m % n as u64) as usize] += cm * shift;
    }
    let fft = FftPlanner::new().plan_fft_inverse(n);
    fft.process(&mut buckets);
    buckets
}

/// Draw `count` samples of `y^{1/4} ξ(x + iy)`.
///
/// Results do not depend on the number of worker threads.
pub fn sample_values(
    h: &CoeffSequence,
    y: f64,
    count: usize,
    seed: u64,
    sampler: Sampler,
    tol: &SeriesTolerance,
) -> Result<EmpiricalDistribution> {
    if !(y > 0.0 && y <= 0.1) {
        return Err(HamfError::domain(format!(
            "sampling needs 0 < y <= 0.1, got {y}"
        )));
    }
    if count == 0 {
        return Err(HamfError::domain("sample count must be at least 1"));
    }
    let c = damped_coeffs(h, y, tol)?;
    let scale = y.powf(0.25);
    let (xs, values): (Vec<f64>, Vec<Complex64>) = match sampler {
        Sampler::StratifiedGrid => {
            let xs = (0..count)
                .map(|j| (j as f64 + 0.5) / count as f64)
                .collect();
            (xs, eval_on_grid(&c, count))
        }
        Sampler::IidUniform => (0..count as u64)
            .into_par_iter()
            .map(|j| {
                let x = iid_abscissa(seed, j);
                (x, eval_damped(&c, x))
            })
            .unzip(),
    };
    Ok(EmpiricalDistribution {
        xs,
        samples: values.into_iter().map(|v| v * scale).collect(),
        y,
        seed,
        sampler,
    })
}

/// Mean of `w^a · conj(w)^b`.
pub fn empirical_moment(d: &EmpiricalDistribution, a: u32, b: u32) -> Result<Complex64> {
    if d.is_empty() {
        return Err(HamfError::domain("moment of an empty sample"));
    }
    let terms: Vec<Complex64> = d
        .samples
        .iter()
        .map(|w| w.powu(a) * w.conj().powu(b))
        .collect();
    Ok(complex_mean(&terms))
}

/// Moments that vanish for every rotation-invariant law.
pub const ROTATION_PROBES: [(u32, u32); 4] = [(1, 0), (2, 0), (3, 1), (2, 1)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationStats {
    /// `max |E w^a w̄^b| / (E|w|²)^{(a+b)/2}` over [`ROTATION_PROBES`].
    pub moment_stat: f64,
    /// Probe attaining the maximum.
    pub worst_probe: (u32, u32),
    /// KS distance of `arg w` from the uniform law on `(−π, π]`.
    pub ks_arg: f64,
}

pub fn rotation_invariance_stat(d: &EmpiricalDistribution) -> Result<RotationStats> {
    let m11 = empirical_moment(d, 1, 1)?.re;
    if m11 <= 0.0 {
        return Err(HamfError::Numerical(
            "rotation statistic of a zero-variance sample".into(),
        ));
    }
    let mut moment_stat = 0.0;
    let mut worst_probe = ROTATION_PROBES[0];
    for (a, b) in ROTATION_PROBES {
        let s = empirical_moment(d, a, b)?.norm() / m11.powf(f64::from(a + b) / 2.0);
        if s > moment_stat {
            moment_stat = s;
            worst_probe = (a, b);
        }
    }
    let ks_arg = ks_one_sample(&d.args(), |t| (t + PI) / TAU);
    Ok(RotationStats {
        moment_stat,
        worst_probe,
        ks_arg,
    })
}

/// Truncated value of `A = Σ_r Σ_{gcd(p,q)=1} ĥ_{rp²} conj(ĥ_{rq²}) / (pq√r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceReport {
    pub a: Complex64,
    pub r_max: u64,
    pub pq_cap: u64,
    /// Certificate bound on the discarded terms.
    pub tail_estimate: f64,
}

/// `Σ_{r ≤ r_max} Σ_{p,q ≤ pq_cap, gcd(p,q) = 1} ĥ_{rp²} conj(ĥ_{rq²}) / (pq√r)`.
///
/// The discarded part is bounded with the decay certificate: with
/// `a = ½ + 2β`, `b = 1 + 2β`, the terms are at most `C² r^{−a} p^{−b} q^{−b}`,
/// and each tail `Σ_{n>N} n^{−s}` is at most `N^{1−s}/(s − 1)`.
pub fn variance_a(h: &CoeffSequence, r_max: u64, pq_cap: u64) -> Result<VarianceReport> {
    if r_max == 0 || pq_cap == 0 {
        return Err(HamfError::domain("r_max and pq_cap must be positive"));
    }
    let cap = pq_cap as usize;
    // Σ_{q ≤ P, gcd(p,q)=1} v_q = Σ_{d | p} μ(d) Σ_{j ≤ P/d} v_{dj}
    let divisors = squarefree_divisors(cap);
    let per_r: Vec<Complex64> = (1..=r_max)
        .into_par_iter()
        .map(|r| {
            let mut v = vec![ZERO; cap + 1];
            for (p, slot) in v.iter_mut().enumerate().skip(1) {
                *slot = h.coeff(r * (p * p) as u64) / p as f64;
            }
            let mut by_step = vec![ZERO; cap + 1];
            for (d, slot) in by_step.iter_mut().enumerate().skip(1) {
                *slot = v.iter().skip(d).step_by(d).map(|c| c.conj()).sum();
            }
            let mut acc = ZERO;
            for p in 1..=cap {
                if v[p] == ZERO {
                    continue;
                }
                let inner: Complex64 = divisors[p].iter().map(|&(d, mu)| mu * by_step[d]).sum();
                acc += v[p] * inner;
            }
            acc / (r as f64).sqrt()
        })
        .collect();
    let a = pairwise_sum(&per_r);

    let beta = h.decay_beta();
    let (sa, sb) = (0.5 + 2.0 * beta, 1.0 + 2.0 * beta);
    // Σ_{n>N} n^{−s} ≤ N^{1−s}/(s − 1)
    let integral_tail = |s: f64, n: u64| (n as f64).powf(1.0 - s) / (s - 1.0);
    let zeta_upper =
        |s: f64| (1..=64u64).map(|n| (n as f64).powf(-s)).sum::<f64>() + integral_tail(s, 64);
    let c2 = h.decay_c() * h.decay_c();
    let tail_estimate = c2
        * (integral_tail(sa, r_max) * zeta_upper(sb).powi(2)
            + zeta_upper(sa) * 2.0 * zeta_upper(sb) * integral_tail(sb, pq_cap));
    Ok(VarianceReport {
        a,
        r_max,
        pq_cap,
        tail_estimate,
    })
}

/// For each `n ≤ cap`, the pairs `(d, μ(d))` over squarefree divisors `d | n`.
fn squarefree_divisors(cap: usize) -> Vec<Vec<(usize, f64)>> {
    let mut mu = vec![1i8; cap + 1];
    let mut composite = vec![false; cap + 1];
    for p in 2..=cap {
        if composite[p] {
            continue;
        }
        for m in (2 * p..=cap).step_by(p) {
            composite[m] = true;
        }
        for m in (p..=cap).step_by(p) {
            mu[m] = -mu[m];
        }
        let pp = p.saturating_mul(p);
        for m in (pp..=cap).step_by(pp.max(1)) {
            mu[m] = 0;
        }
    }
    let mut divs = vec![Vec::new(); cap + 1];
    for (d, &m_d) in mu.iter().enumerate().skip(1) {
        if m_d != 0 {
            for m in (d..=cap).step_by(d) {
                divs[m].push((d, f64::from(m_d)));
            }
        }
    }
    divs
}

/// `α(t) = Σ_{0 ≤ m < t} |ξ̂_m|²`.
pub fn alpha_partial(h: &CoeffSequence, t: f64) -> Result<f64> {
    if !(t >= 1.0 && t.is_finite()) {
        return Err(HamfError::domain(format!("alpha needs t >= 1, got {t}")));
    }
    let m_hi = t.ceil() as u64 - 1;
    if m_hi == 0 {
        return Ok(0.0);
    }
    let c = xi_coeff(h, m_hi)?;
    let terms: Vec<f64> = c.values().iter().map(|v| v.norm_sqr()).collect();
    Ok(pairwise_sum(&terms))
}

/// `y^{1/2} Σ_{m≥1} |ξ̂_m|² e^{−4πmy}`, which tends to `A/4` as `y → 0`.
pub fn parseval_variance_limit(h: &CoeffSequence, y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 0.1) {
        return Err(HamfError::domain(format!("needs 0 < y <= 0.1, got {y}")));
    }
    Ok(y.sqrt() * parseval_sum(h, y)?)
}

/// Finite mean-zero trigonometric polynomial `ψ(t) = Σ_{n≠0} ψ̂_n e(nt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<(i64, Complex64)>,
}

impl TrigPolynomial {
    pub fn new(mut terms: Vec<(i64, Complex64)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(HamfError::domain("trigonometric polynomial needs a term"));
        }
        terms.sort_by_key(|t| t.0);
        for w in terms.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(HamfError::domain(format!(
                    "frequency {} listed twice",
                    w[0].0
                )));
            }
        }
        if terms.iter().any(|t| t.0 == 0) {
            return Err(HamfError::domain("the mean term n = 0 is excluded"));
        }
        Ok(TrigPolynomial { terms })
    }

    /// Rows `n, re, im`.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut terms = Vec::new();
        for (line, rec) in reader.records().enumerate() {
            let rec = rec?;
            if line == 0 && rec.get(0).is_some_and(|f| f.parse::<i64>().is_err()) {
                continue;
            }
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .unwrap_or("0")
                    .parse::<f64>()
                    .map_err(|e| HamfError::Parse(format!("row {}: {e}", line + 1)))
            };
            let n: i64 =
                rec.get(0).unwrap_or("").parse().map_err(|e| {
                    HamfError::Parse(format!("row {}: bad frequency: {e}", line + 1))
                })?;
            terms.push((n, Complex64::new(parse(1)?, parse(2)?)));
        }
        Self::new(terms)
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    /// Whether `ψ̂_{−n} = conj(ψ̂_n)` for every `n`.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|&(n, c)| {
            self.terms
                .iter()
                .find(|t| t.0 == -n)
                .is_some_and(|t| (t.1 - c.conj()).norm() == 0.0)
        })
    }

    /// `ψ` at `t` given as a fractional part in `[0, 1)`.
    fn eval_frac(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|&(n, c)| c * e_real(frac_mul(n.unsigned_abs() as f64, t) * n.signum() as f64))
            .sum()
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.eval_frac(t - t.floor())
    }
}

/// `R(x, M) = M^{−1/2} Σ_{n=1}^{M} ψ(n²x)`.
pub fn error_term_r(psi: &TrigPolynomial, x: f64, m: u64) -> Result<Complex64> {
    if m == 0 {
        return Err(HamfError::domain("M must be at least 1"));
    }
    if !(0.0..1.0).contains(&x) {
        return Err(HamfError::domain(format!("x must lie in [0, 1), got {x}")));
    }
    if m > 90_000_000 {
        return Err(HamfError::domain("M too large for exact n² phases"));
    }
    // e(k(n+1)²x) = e(kn²x)·e(k(2n+1)x) and e(k(2n+3)x) = e(k(2n+1)x)·e(2kx),
    // re-anchored exactly at the start of every block
    const BLOCK: u64 = 256;
    let mut acc = ZERO;
    let mut n = 1;
    while n <= m {
        let end = (n + BLOCK - 1).min(m);
        let sq = frac_mul((n * n) as f64, x);
        let odd = frac_mul((2 * n + 1) as f64, x);
        for &(k, c) in psi.terms() {
            let (kf, sign) = (k.unsigned_abs() as f64, k.signum() as f64);
            let mut u = e_real(sign * frac_mul(kf, sq));
            let mut v = e_real(sign * frac_mul(kf, odd));
            let w = e_real(sign * frac_mul(2.0 * kf, x));
            let mut block = ZERO;
            for _ in n..=end {
                block += u;
                u *= v;
                v *= w;
            }
            acc += c * block;
        }
        n = end + 1;
    }
    Ok(acc / (m as f64).sqrt())
}

/// `(x_j, R(x_j, M))` for iid uniform `x_j` from per-trial streams of `seed`.
pub fn error_term_samples(
    psi: &TrigPolynomial,
    m: u64,
    trials: usize,
    seed: u64,
) -> Result<Vec<(f64, Complex64)>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|j| {
            let x = iid_abscissa(seed, j);
            Ok((x, error_term_r(psi, x, m)?))
        })
        .collect()
}
