//! Command line front end. Every run is a pure function of its arguments.

use crate::dist::{
    error_term_samples, rotation_invariance_stat, sample_values, variance_a, Sampler,
    TrigPolynomial,
};
use crate::error::{HamfError, Result};
use crate::group::{j_factor, random_gamma1, UnimodularInt, UpperHalfPoint};
use crate::hamf::{approx_error, approximant, tail_bound, xi_coeff, xi_eval, CoeffSequence};
use crate::stats::{mean, trimmed_mean};
use crate::symbol::qr_symbol;
use crate::theta::{
    check_transform, lcm_upto, theta_scaled, JacobiDelta, ModularForm, SeriesTolerance, Theta,
};
use crate::VERSION;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

const AFTER_HELP: &str = "\
Output formats:
  JSON objects go to stdout; keys are snake_case and every object carries \"version\".
  Floating point values are written with 17 significant digits.
  CSV files have a header row:
    hamf coeffs    m,re,im
    dist sample    x,re_w,im_w
    dist r-term    x,re_r,im_r

Exit codes: 0 success, 1 numerical failure (series term cap), 2 usage or domain error.";

#[derive(Debug, Parser)]
#[command(name = "hamf", version, about = "Holomorphic almost modular forms of weight 1/2", after_help = AFTER_HELP)]
pub struct Cli {
    /// Worker threads (default: available parallelism). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Absolute truncation tolerance for series evaluation.
    #[arg(long, global = true, env = "HAMF_TOL")]
    pub tol: Option<f64>,

    /// Hard cap on the number of series terms.
    #[arg(long, global = true, default_value_t = SeriesTolerance::DEFAULT_MAX_TERMS)]
    pub max_terms: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generalized quadratic residue symbol (a/b) for odd b.
    #[command(allow_negative_numbers = true)]
    Symbol { a: i64, b: i64 },
    /// Γ₁(N) elements and the theta multiplier.
    #[command(subcommand)]
    Group(GroupCmd),
    /// Theta series and transformation checks.
    #[command(subcommand)]
    Theta(ThetaCmd),
    /// Coefficients, evaluation and approximation error of ξ(z) = Σ h(n²z).
    #[command(subcommand)]
    Hamf(HamfCmd),
    /// Horocycle sampling of y^{1/4} ξ(x+iy), the variance constant, and R(x, M).
    #[command(subcommand)]
    Dist(DistCmd),
}

#[derive(Debug, Subcommand)]
pub enum GroupCmd {
    /// j_γ(z) = (c/d)((cz+d)/|cz+d|)^{1/2} for γ in Γ₁(4).
    #[command(name = "j-factor", allow_negative_numbers = true)]
    JFactor {
        /// Matrix entries a,b,c,d.
        #[arg(long, value_parser = parse_matrix)]
        gamma: [i64; 4],
        /// Point x,y with y > 0.
        #[arg(long, value_parser = parse_pair)]
        z: (f64, f64),
    },
    /// Random element of Γ₁(N) with entries bounded by the height.
    #[command(name = "random-element")]
    RandomElement {
        level: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        height: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FormKind {
    /// θ(kz) with k = N/4.
    Theta,
    /// ½ Σ_{k≤K} ĥ_k θ(kz) for the log-squares coefficients, largest K with 4·lcm(1..K) | N.
    Xi,
    /// Jacobi's Δ (level 1).
    Delta,
}

#[derive(Debug, Subcommand)]
pub enum ThetaCmd {
    /// θ(kz).
    #[command(allow_negative_numbers = true)]
    Eval {
        #[arg(long, value_parser = parse_pair)]
        z: (f64, f64),
        #[arg(long, default_value_t = 1)]
        k: u64,
    },
    /// Maximum residual of the transformation law over random group elements.
    #[command(name = "check-transform")]
    CheckTransform {
        #[arg(long, default_value_t = 4)]
        level: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Entry bound for the random elements (default 50, or 3 for delta whose
        /// weight-12 factor amplifies rounding by |cz+d|^12).
        #[arg(long)]
        height: Option<u64>,
        #[arg(long, value_enum, default_value_t = FormKind::Theta)]
        form: FormKind,
    },
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    /// Coefficient preset: log-squares (ĥ_k = −1/k), theta-only (ĥ_1 = 1) or zero.
    #[arg(long, default_value = "log-squares")]
    pub preset: String,
    /// CSV of k,re,im rows; overrides --preset.
    #[arg(long)]
    pub coeff_file: Option<PathBuf>,
    /// Decay exponent β for a coefficient file (C is fitted).
    #[arg(long, default_value_t = 1.0)]
    pub decay_beta: f64,
}

impl SequenceArgs {
    fn load(&self) -> Result<CoeffSequence> {
        match &self.coeff_file {
            Some(path) => CoeffSequence::from_csv(path, self.decay_beta),
            None => CoeffSequence::preset(&self.preset),
        }
    }

    fn label(&self) -> String {
        match &self.coeff_file {
            Some(p) => p.display().to_string(),
            None => self.preset.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum HamfCmd {
    /// Fourier coefficients ξ̂_m, 0 ≤ m ≤ mmax, as CSV m,re,im.
    Coeffs {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        mmax: u64,
        /// Output file (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// (1/√M) Σ_{m≤M} |ξ̂_m − ξ̂^{(K)}_m|² and its leading-order bound.
    #[command(name = "approx-error")]
    ApproxError {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long = "K", alias = "k")]
        k: u64,
        #[arg(long = "M", alias = "m")]
        m: u64,
    },
    /// ξ(z).
    #[command(allow_negative_numbers = true)]
    Eval {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, value_parser = parse_pair)]
        z: (f64, f64),
    },
}

#[derive(Debug, Subcommand)]
pub enum DistCmd {
    /// Samples w = y^{1/4} ξ(x+iy) as CSV x,re_w,im_w plus a JSON summary.
    #[command(allow_negative_numbers = true)]
    Sample {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        y: f64,
        #[arg(long, default_value_t = 20_000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// iid-uniform or stratified-grid.
        #[arg(long, default_value = "stratified-grid")]
        sampler: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truncated variance constant A and A/4.
    Variance {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, default_value_t = 200)]
        rmax: u64,
        #[arg(long, default_value_t = 200)]
        pqcap: u64,
    },
    /// R(x, M) = M^{−1/2} Σ_{n≤M} ψ(n²x) at random x, as CSV x,re_r,im_r.
    #[command(name = "r-term")]
    RTerm {
        /// CSV of n,re,im rows (n ≠ 0).
        #[arg(long)]
        psi: PathBuf,
        #[arg(long = "M", alias = "m")]
        m: u64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => Ok((
            a.parse().map_err(|e| format!("{a}: {e}"))?,
            b.parse().map_err(|e| format!("{b}: {e}"))?,
        )),
        _ => Err(format!("expected X,Y, got '{s}'")),
    }
}

fn parse_matrix(s: &str) -> std::result::Result<[i64; 4], String> {
    let v: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|e| format!("{p}: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into()
        .map_err(|_| format!("expected a,b,c,d, got '{s}'"))
}

/// JSON number with 17 significant digits; non-finite values become null.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str(&format!("{x:.16e}")).unwrap_or(Value::Null)
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn emit(mut obj: Map<String, Value>) -> Result<()> {
    let mut out = Map::new();
    out.insert("version".into(), json!(VERSION));
    out.append(&mut obj);
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer(&mut lock, &Value::Object(out)).map_err(io::Error::from)?;
    writeln!(lock)?;
    Ok(())
}

fn obj(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => Map::new(),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn point(z: (f64, f64)) -> Result<UpperHalfPoint> {
    UpperHalfPoint::new(z.0, z.1)
}

impl Cli {
    pub fn tolerance(&self) -> Result<SeriesTolerance> {
        SeriesTolerance::new(
            self.tol.unwrap_or(SeriesTolerance::DEFAULT_ABS_TOL),
            self.max_terms,
        )
    }
}

/// Execute a parsed command line.
pub fn run(cli: &Cli) -> Result<()> {
    let tol = cli.tolerance()?;
    match &cli.command {
        Command::Symbol { a, b } => {
            println!("{}", qr_symbol(*a, *b)?);
            Ok(())
        }
        Command::Group(cmd) => run_group(cmd),
        Command::Theta(cmd) => run_theta(cmd, &tol),
        Command::Hamf(cmd) => run_hamf(cmd, &tol),
        Command::Dist(cmd) => run_dist(cmd, &tol),
    }
}

fn run_group(cmd: &GroupCmd) -> Result<()> {
    match cmd {
        GroupCmd::JFactor { gamma, z } => {
            let g = UnimodularInt::new(gamma[0], gamma[1], gamma[2], gamma[3])?;
            let zp = point(*z)?;
            let j = j_factor(&g, zp)?;
            emit(obj(json!({
                "gamma": g.entries(),
                "z": [num(zp.x()), num(zp.y())],
                "symbol": i64::from(qr_symbol(g.c(), g.d())?),
                "re": num(j.re),
                "im": num(j.im),
            })))
        }
        GroupCmd::RandomElement {
            level,
            seed,
            height,
        } => {
            let g = random_gamma1(*level, *seed, *height)?;
            emit(obj(json!({
                "level": level,
                "seed": seed,
                "height": height,
                "a": g.a(), "b": g.b(), "c": g.c(), "d": g.d(),
            })))
        }
    }
}

fn form_for(kind: FormKind, level: u64) -> Result<Box<dyn ModularForm>> {
    match kind {
        FormKind::Theta => {
            if level == 0 || !level.is_multiple_of(4) {
                return Err(HamfError::domain(format!(
                    "theta needs 4 | level, got {level}"
                )));
            }
            Ok(Box::new(Theta { k: level / 4 }))
        }
        FormKind::Xi => {
            if level == 0 || !level.is_multiple_of(4) {
                return Err(HamfError::domain(format!(
                    "xi needs 4 | level, got {level}"
                )));
            }
            let mut k = 1;
            while (level / 4).is_multiple_of(lcm_upto(k + 1)) {
                k += 1;
            }
            Ok(Box::new(approximant(&CoeffSequence::log_squares(), k)?))
        }
        FormKind::Delta => {
            if level != 1 {
                return Err(HamfError::domain("delta is checked on level 1"));
            }
            Ok(Box::new(JacobiDelta))
        }
    }
}

fn run_theta(cmd: &ThetaCmd, tol: &SeriesTolerance) -> Result<()> {
    match cmd {
        ThetaCmd::Eval { z, k } => {
            let zp = point(*z)?;
            let v = theta_scaled(*k, zp, tol)?;
            emit(obj(json!({
                "z": [num(zp.x()), num(zp.y())],
                "k": k,
                "re": num(v.re),
                "im": num(v.im),
            })))
        }
        ThetaCmd::CheckTransform {
            level,
            trials,
            seed,
            height,
            form,
        } => {
            let f = form_for(*form, *level)?;
            let height = height.unwrap_or(if *form == FormKind::Delta { 3 } else { 50 });
            let y_range = if *form == FormKind::Delta {
                (0.8, 1.5)
            } else {
                (0.3, 2.0)
            };
            let check = check_transform(f.as_ref(), *trials, *seed, height, y_range, tol)?;
            emit(obj(json!({
                "level": f.level(),
                "form": format!("{form:?}").to_lowercase(),
                "seed": seed,
                "max_residual": num(check.max_residual),
                "trials": check.trials,
                "resampled": check.resampled,
            })))
        }
    }
}

fn run_hamf(cmd: &HamfCmd, tol: &SeriesTolerance) -> Result<()> {
    match cmd {
        HamfCmd::Coeffs { seq, mmax, out } => {
            let h = seq.load()?;
            let coeffs = xi_coeff(&h, *mmax)?;
            let mut w = open_out(out.as_deref())?;
            writeln!(w, "m,re,im")?;
            for (m, c) in coeffs.values().iter().enumerate() {
                writeln!(w, "{m},{},{}", fmt17(c.re), fmt17(c.im))?;
            }
            w.flush()?;
            if let Some(path) = out {
                emit(obj(json!({
                    "preset": seq.label(),
                    "mmax": mmax,
                    "out": path.display().to_string(),
                })))?;
            }
            Ok(())
        }
        HamfCmd::ApproxError { seq, k, m } => {
            let h = seq.load()?;
            let r = approx_error(&h, *k, *m)?;
            emit(obj(json!({
                "preset": seq.label(),
                "k": r.k,
                "m": r.m,
                "error_sq": num(r.error_sq),
                "tail_bound": num(tail_bound(&h, *k)),
            })))
        }
        HamfCmd::Eval { seq, z } => {
            let h = seq.load()?;
            let zp = point(*z)?;
            let v = xi_eval(&h, zp, tol)?;
            emit(obj(json!({
                "preset": seq.label(),
                "z": [num(zp.x()), num(zp.y())],
                "re": num(v.re),
                "im": num(v.im),
            })))
        }
    }
}

fn run_dist(cmd: &DistCmd, tol: &SeriesTolerance) -> Result<()> {
    match cmd {
        DistCmd::Sample {
            seq,
            y,
            n,
            seed,
            sampler,
            out,
        } => {
            let sampler: Sampler = sampler.parse()?;
            let h = seq.load()?;
            let d = sample_values(&h, *y, *n, *seed, sampler, tol)?;
            if let Some(path) = out {
                let mut w = open_out(Some(path))?;
                writeln!(w, "x,re_w,im_w")?;
                for (x, s) in d.xs.iter().zip(&d.samples) {
                    writeln!(w, "{},{},{}", fmt17(*x), fmt17(s.re), fmt17(s.im))?;
                }
                w.flush()?;
            }
            let (rotation_stat, worst, ks_arg) = match rotation_invariance_stat(&d) {
                Ok(s) => (
                    num(s.moment_stat),
                    json!([s.worst_probe.0, s.worst_probe.1]),
                    num(s.ks_arg),
                ),
                Err(_) => (Value::Null, Value::Null, Value::Null),
            };
            emit(obj(json!({
                "preset": seq.label(),
                "y": num(*y),
                "n": n,
                "seed": seed,
                "sampler": sampler.to_string(),
                "mean_abs2": num(d.mean_abs2()),
                "trimmed_mean_abs2": num(d.trimmed_mean_abs2()),
                "rotation_stat": rotation_stat,
                "rotation_worst_probe": worst,
                "ks_arg": ks_arg,
                "heavy_tail_warning": "higher moments of the limit law may be infinite; moment probes of order >= 3 are unstable",
            })))
        }
        DistCmd::Variance { seq, rmax, pqcap } => {
            let h = seq.load()?;
            let r = variance_a(&h, *rmax, *pqcap)?;
            emit(obj(json!({
                "preset": seq.label(),
                "rmax": rmax,
                "pqcap": pqcap,
                "a_re": num(r.a.re),
                "a_im": num(r.a.im),
                "quarter_a": num(r.a.re / 4.0),
                "tail_estimate": num(r.tail_estimate),
            })))
        }
        DistCmd::RTerm {
            psi,
            m,
            trials,
            seed,
            out,
        } => {
            let psi = TrigPolynomial::from_csv(psi)?;
            let samples = error_term_samples(&psi, *m, *trials, *seed)?;
            if let Some(path) = out {
                let mut w = open_out(Some(path))?;
                writeln!(w, "x,re_r,im_r")?;
                for (x, r) in &samples {
                    writeln!(w, "{},{},{}", fmt17(*x), fmt17(r.re), fmt17(r.im))?;
                }
                w.flush()?;
            }
            let abs2: Vec<f64> = samples.iter().map(|s| s.1.norm_sqr()).collect();
            emit(obj(json!({
                "m": m,
                "trials": trials,
                "seed": seed,
                "mean_abs2": num(mean(&abs2)),
                "trimmed_mean_abs2": num(trimmed_mean(&abs2, 1e-3)),
            })))
        }
    }
}
