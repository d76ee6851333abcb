//! Acceptance suite: one PASS/FAIL line per criterion, details indented below.
//!
//! Run with `cargo test -p hamf --test acceptance`.

mod common;

use hamf::dist::{
    empirical_moment, parseval_variance_limit, rotation_invariance_stat, sample_values, variance_a,
    Sampler, ROTATION_PROBES,
};
use hamf::group::{cover_act, j_factor, moebius, random_gamma1, CoverElement, CoverPoint};
use hamf::hamf::{approx_error, approximant, horocycle_l2, parseval_sum, tail_bound};
use hamf::stats::ks_two_sample;
use hamf::symbol::{legendre_oracle, qr_symbol};
use hamf::theta::{check_transform, lift, SeriesTolerance, Theta};
use hamf::{CoeffSequence, UpperHalfPoint};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

// Pinned tolerances and limits.
const C1_RUNTIME: Duration = Duration::from_secs(10);
const C2_THETA_TOL: f64 = 1e-9;
const C2_XI_TOL: f64 = 1e-8;
const C2_RUNTIME: Duration = Duration::from_secs(30);
const C3_COCYCLE_TOL: f64 = 1e-10;
const C3_LIFT_TOL: f64 = 1e-9;
const C4_REL_TOL: f64 = 1e-6;
const C4_NODES: usize = 4096;
const C4_RUNTIME: Duration = Duration::from_secs(60);
const C5_TAIL_REL: f64 = 1e-6;
const C5_VARIANCE_REL: f64 = 0.02;
const C5_RUNTIME: Duration = Duration::from_secs(120);
const C6_ORACLE_REL: f64 = 1e-10;
const C6_BOUND_FACTOR: f64 = 1.2;
const C7_ROTATION: f64 = 0.05;
const C7_ARG_KS: f64 = 0.03;
const C7_ABS_KS: f64 = 0.05;
const C7_RUNTIME: Duration = Duration::from_secs(300);

struct Outcome {
    pass: bool,
    details: String,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            pass: true,
            details: String::new(),
        }
    }

    fn check(&mut self, ok: bool, what: std::fmt::Arguments) {
        self.pass &= ok;
        let _ = writeln!(
            self.details,
            "    [{}] {what}",
            if ok { "ok" } else { "FAIL" }
        );
    }

    fn info(&mut self, what: std::fmt::Arguments) {
        let _ = writeln!(self.details, "    [info] {what}");
    }

    fn runtime(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check(t < limit, format_args!("runtime {:.2?} < {:?}", t, limit));
    }
}

fn tol() -> SeriesTolerance {
    SeriesTolerance::default()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let sym = |a: i64, b: i64| i64::from(qr_symbol(a, b).unwrap().value());

    let mut oracle_mismatch = 0;
    let mut oracle_cases = 0;
    for p in (3..200i64).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)) {
        for a in -p..=p {
            oracle_cases += 1;
            if qr_symbol(a, p).unwrap() != legendre_oracle(a, p).unwrap() {
                oracle_mismatch += 1;
            }
        }
    }
    o.check(
        oracle_mismatch == 0,
        format_args!("oracle agreement: {oracle_mismatch} mismatches in {oracle_cases} cases"),
    );

    let odd: Vec<i64> = (-99..=99).filter(|b: &i64| b % 2 != 0).collect();
    let (mut top_bad, mut top_cases, mut first_top) = (0u64, 0u64, None);
    let mut top_bad_at_sign_corner = 0u64;
    for a1 in -50..=50i64 {
        for a2 in -50..=50i64 {
            for &b in &odd {
                top_cases += 1;
                if sym(a1 * a2, b) != sym(a1, b) * sym(a2, b) {
                    top_bad += 1;
                    first_top.get_or_insert((a1, a2, b));
                    if b == -1 && (a1 == 0 || a2 == 0) {
                        top_bad_at_sign_corner += 1;
                    }
                }
            }
        }
    }
    let (mut bot_bad, mut bot_cases, mut first_bot) = (0u64, 0u64, None);
    for a in -50..=50i64 {
        for &b1 in &odd {
            for &b2 in &odd {
                bot_cases += 1;
                if sym(a, b1 * b2) != sym(a, b1) * sym(a, b2) {
                    bot_bad += 1;
                    first_bot.get_or_insert((a, b1, b2));
                }
            }
        }
    }
    o.check(
        top_bad == 0,
        format_args!(
            "(a1 a2 / b) = (a1/b)(a2/b): {top_bad} violations in {top_cases} cases, first {first_top:?}"
        ),
    );
    if top_bad > 0 {
        o.info(format_args!(
            "{top_bad_at_sign_corner} of {top_bad} top violations have b = -1 and a zero factor, \
             where (0/-1) = 1 and (a/-1) = sgn a cannot both be multiplicative"
        ));
    }
    o.check(
        bot_bad == 0,
        format_args!("(a / b1 b2) = (a/b1)(a/b2): {bot_bad} violations in {bot_cases} cases, first {first_bot:?}"),
    );
    o.runtime(start, C1_RUNTIME);
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let r = check_transform(&Theta::BASE, 100, 2024, 50, (0.3, 2.0), &tol()).unwrap();
    o.check(
        r.max_residual < C2_THETA_TOL,
        format_args!(
            "theta on Γ₁(4): max residual {:.3e} < {C2_THETA_TOL:e} ({} trials)",
            r.max_residual, r.trials
        ),
    );
    let f = approximant(&CoeffSequence::log_squares(), 4).unwrap();
    let r = check_transform(&f, 100, 2025, 50, (0.3, 2.0), &tol()).unwrap();
    o.check(
        r.max_residual < C2_XI_TOL,
        format_args!(
            "ξ^(4) on Γ₁(48): max residual {:.3e} < {C2_XI_TOL:e}",
            r.max_residual
        ),
    );
    o.runtime(start, C2_RUNTIME);
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g1 = random_gamma1(4, rng.random(), 50).unwrap();
        let g2 = random_gamma1(4, rng.random(), 50).unwrap();
        let z =
            UpperHalfPoint::new(rng.random_range(-1.0..1.0), rng.random_range(0.1..2.0)).unwrap();
        let lhs = j_factor(&g1.compose(&g2).unwrap(), z).unwrap();
        let rhs = j_factor(&g1, moebius(&g2, z)).unwrap() * j_factor(&g2, z).unwrap();
        worst = worst.max((lhs - rhs).norm());
    }
    o.check(
        worst < C3_COCYCLE_TOL,
        format_args!("cocycle: max residual {worst:.3e} < {C3_COCYCLE_TOL:e}"),
    );

    let mut worst = 0.0f64;
    let mut points = 0;
    while points < 50 {
        let g = random_gamma1(4, rng.random(), 50).unwrap();
        let p = CoverPoint {
            z: UpperHalfPoint::new(rng.random(), rng.random_range(0.3..2.0)).unwrap(),
            phi: rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
        };
        let u = CoverElement::theta_lift(g).unwrap();
        let Ok(after) = lift(&Theta::BASE, cover_act(&u, p), &tol()) else {
            continue;
        };
        let before = lift(&Theta::BASE, p, &tol()).unwrap();
        worst = worst.max((after - before).norm());
        points += 1;
    }
    o.check(
        worst < C3_LIFT_TOL,
        format_args!("lift invariance: max |ΔF| {worst:.3e} < {C3_LIFT_TOL:e}"),
    );
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let h = CoeffSequence::log_squares();
    for y in [0.2, 0.1, 0.05] {
        let quad = horocycle_l2(&h, y, C4_NODES, &tol()).unwrap();
        let coef = parseval_sum(&h, y).unwrap();
        let rel = (quad - coef).abs() / coef;
        o.check(
            rel < C4_REL_TOL,
            format_args!(
                "y = {y}: quadrature {quad:.15} vs coefficients {coef:.15}, rel {rel:.2e}"
            ),
        );
    }
    o.runtime(start, C4_RUNTIME);
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let h = CoeffSequence::log_squares();
    let r = variance_a(&h, 200, 200).unwrap();
    let exact = common::variance_constant_log_squares();
    let diff = (r.a.re - exact).abs();
    o.check(
        diff <= r.tail_estimate,
        format_args!("A = {:.12} vs ζ(5/2)ζ(3)²/ζ(6) = {exact:.12}: |diff| {diff:.3e} ≤ tail_estimate {:.3e}", r.a.re, r.tail_estimate),
    );
    let rel = r.tail_estimate / r.a.re;
    o.check(
        rel < C5_TAIL_REL,
        format_args!("tail_estimate / A = {rel:.3e} < {C5_TAIL_REL:e} at r_max = pq_cap = 200"),
    );
    let quarter = r.a.re / 4.0;
    let pvl = parseval_variance_limit(&h, 1e-4).unwrap();
    let gap = (pvl - quarter).abs() / quarter;
    o.check(
        gap < C5_VARIANCE_REL,
        format_args!("parseval_variance_limit(1e-4) = {pvl:.9} vs A/4 = {quarter:.9}: rel {gap:.4} < {C5_VARIANCE_REL}"),
    );
    o.runtime(start, C5_RUNTIME);
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let h = CoeffSequence::log_squares();
    let errs: Vec<(u64, f64)> = [1u64, 2, 4, 8, 16]
        .iter()
        .map(|&k| (k, approx_error(&h, k, 1_000_000).unwrap().error_sq))
        .collect();
    let at = |k: u64| errs.iter().find(|e| e.0 == k).unwrap().1;
    let (e1, e4, e16) = (at(1), at(4), at(16));
    o.check(
        e1 > e4 && e4 > e16,
        format_args!("M = 1e6: K=1 {e1:.6}, K=4 {e4:.6}, K=16 {e16:.6} strictly decreasing"),
    );

    let mut worst = 0.0f64;
    for k in [1u64, 4, 16] {
        let fast = approx_error(&h, k, 10_000).unwrap().error_sq;
        let slow = common::approx_error_brute(|k| Complex64::new(-1.0 / k as f64, 0.0), k, 10_000);
        worst = worst.max((fast - slow).abs() / slow.abs());
    }
    o.check(
        worst < C6_ORACLE_REL,
        format_args!("brute-force oracle at M = 1e4: max rel diff {worst:.2e} < {C6_ORACLE_REL:e}"),
    );

    for k in [1u64, 2, 4, 8] {
        let (e, b) = (at(k), tail_bound(&h, k));
        o.check(
            e <= C6_BOUND_FACTOR * b,
            format_args!(
                "K = {k}: approx_error {e:.6} ≤ {C6_BOUND_FACTOR}·tail_bound {b:.6} (ratio {:.4})",
                e / b
            ),
        );
    }
    o
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let h = CoeffSequence::log_squares();
    let fine = sample_values(&h, 1e-5, 20_000, 7, Sampler::StratifiedGrid, &tol()).unwrap();
    let s = rotation_invariance_stat(&fine).unwrap();
    o.check(
        s.moment_stat < C7_ROTATION,
        format_args!(
            "rotation_invariance_stat {:.4} < {C7_ROTATION} (worst probe {:?})",
            s.moment_stat, s.worst_probe
        ),
    );
    let norm = empirical_moment(&fine, 1, 1).unwrap().re;
    for (a, b) in ROTATION_PROBES {
        let m = empirical_moment(&fine, a, b).unwrap().norm() / norm.powf(f64::from(a + b) / 2.0);
        o.info(format_args!("probe ({a},{b}): {m:.4}"));
    }
    o.info(format_args!(
        "mean |w|² {:.4}, trimmed (top 0.1% removed) {:.4}",
        fine.mean_abs2(),
        fine.trimmed_mean_abs2()
    ));
    o.check(
        s.ks_arg < C7_ARG_KS,
        format_args!("arg KS {:.4} < {C7_ARG_KS}", s.ks_arg),
    );
    let coarse = sample_values(&h, 1e-4, 20_000, 7, Sampler::StratifiedGrid, &tol()).unwrap();
    let ks = ks_two_sample(&coarse.abs_values(), &fine.abs_values());
    o.check(
        ks < C7_ABS_KS,
        format_args!("|w| KS between y = 1e-4 and 1e-5: {ks:.4} < {C7_ABS_KS}"),
    );
    o.runtime(start, C7_RUNTIME);
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let psi = dir.path().join("psi.csv");
    std::fs::write(&psi, "n,re,im\n1,1,0\n-1,1,0\n3,0.5,0.5\n-3,0.5,-0.5\n").unwrap();
    let psi = psi.to_str().unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec![
            "hamf",
            "coeffs",
            "--preset",
            "log-squares",
            "--mmax",
            "300000",
        ],
        vec![
            "dist", "sample", "--y", "1e-4", "--n", "20000", "--seed", "7",
        ],
        vec![
            "dist",
            "sample",
            "--y",
            "1e-3",
            "--n",
            "2000",
            "--seed",
            "7",
            "--sampler",
            "iid-uniform",
        ],
        vec![
            "dist", "r-term", "--psi", psi, "--M", "5000", "--trials", "2000", "--seed", "7",
        ],
    ];
    for args in runs {
        let mut csvs = Vec::new();
        for threads in ["1", "4"] {
            let out = dir.path().join("out.csv");
            let status = Command::new(env!("CARGO_BIN_EXE_hamf"))
                .args(["--threads", threads])
                .args(&args)
                .args(["--out", out.to_str().unwrap()])
                .env_remove("HAMF_TOL")
                .output()
                .unwrap();
            assert!(
                status.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&status.stderr)
            );
            csvs.push(std::fs::read(&out).unwrap());
        }
        o.check(
            csvs[0] == csvs[1] && !csvs[0].is_empty(),
            format_args!(
                "{}: {} bytes identical for --threads 1 and 4",
                args[..2].join(" "),
                csvs[0].len()
            ),
        );
    }
    o
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        (
            "residue symbol: oracle agreement and bimultiplicativity",
            criterion_1,
        ),
        (
            "theta transformation law (θ on Γ₁(4), ξ^(4) on Γ₁(48))",
            criterion_2,
        ),
        ("j-factor cocycle and lift invariance", criterion_3),
        ("Parseval identity", criterion_4),
        ("variance constant", criterion_5),
        ("approximation error by theta combinations", criterion_6),
        ("limit distribution", criterion_7),
        ("CLI determinism across thread counts", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let tag = if outcome.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {}: {name} [{:.2?}]",
            i + 1,
            start.elapsed()
        );
        print!("{}", outcome.details);
        if !outcome.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!(
            "acceptance: {} of {} criteria fail: {failed:?}",
            failed.len(),
            criteria.len()
        );
        ExitCode::FAILURE
    }
}
