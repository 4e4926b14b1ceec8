//! Command-line front end.
//!
//! `run` parses arguments, executes one subcommand and returns the process
//! exit code: 0 on success, 1 when a check fails or a computation errors,
//! 2 on usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::arith::{singular_series, singular_series_at};
use crate::calibration::{default_path, render};
use crate::lattice::ThetaTable;
use crate::maximal::{max_dyadic_exponent, ratio_experiment_with, write_ratio_csv, AveragePath, DyadicSet};
use crate::multiplier::{MultiplierEvaluator, TorusPoint};
use crate::specfun::{krawtchouk_numerators, binomial, Method, SphericalFT};
use crate::sweep::{calibrate, sweep_bounds, write_sweep_csv, SweepDescriptor};
use crate::verify::{run_suite, Scale};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dspheres", version, about = "Discrete spheres: counts, multipliers and maximal averages")]
struct Cli {
    /// Machine-readable JSON output where applicable.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Number of lattice points on the sphere |x|² = λ in Z^d.
    Count(CountArgs),
    /// Singular series with a certified truncation tail.
    Series(SeriesArgs),
    /// Spherical Fourier transform or Krawtchouk tables as CSV.
    Specfun(SpecfunArgs),
    /// Exact multiplier and its decomposition at one point.
    Multiplier(MultiplierArgs),
    /// Bound sweep from a JSON descriptor, or the calibration run.
    Sweep(SweepArgs),
    /// Dyadic maximal ratio experiment as CSV.
    Maximal(MaximalArgs),
    /// Hard-assert verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct CountArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    lambda: u64,
    /// Also print the ball count |{x : |x|² <= λ}|.
    #[arg(long)]
    ball: bool,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    lambda: u64,
    /// Target bound on the truncation tail.
    #[arg(long, default_value_t = 1e-10)]
    tail: f64,
    /// Explicit truncation level; overrides --tail.
    #[arg(long)]
    level: Option<u64>,
}

#[derive(Debug, Args)]
struct SpecfunArgs {
    #[command(subcommand)]
    table: SpecfunTable,
}

#[derive(Debug, Subcommand)]
enum SpecfunTable {
    /// CSV (r, rho, value) of the transform of the normalised sphere measure.
    Fourier {
        #[arg(long)]
        r: u64,
        #[arg(long, default_value_t = 10.0)]
        rho_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Bessel)]
        method: MethodArg,
    },
    /// CSV (n, k, x, num, den) of exact Krawtchouk values.
    Krawtchouk {
        #[arg(long)]
        n: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Bessel,
    Quadrature,
}

#[derive(Debug, Args)]
struct MultiplierArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    lambda: u64,
    /// Comma-separated coordinates of ξ; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    xi: Vec<f64>,
    /// Major-arc cutoff; prints the decomposition when given.
    #[arg(long)]
    n: Option<u64>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// JSON sweep descriptor.
    #[arg(required_unless_present = "calibrate")]
    descriptor: Option<PathBuf>,
    /// Measure and rewrite the frozen constants file.
    #[arg(long, conflicts_with = "descriptor")]
    calibrate: bool,
    /// Destination of the calibration run (default: the crate's data file).
    #[arg(long, requires = "calibrate")]
    constants: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Auto,
    Direct,
    Spectral,
}

#[derive(Debug, Args)]
struct MaximalArgs {
    #[arg(long)]
    d: usize,
    #[arg(long = "M", short = 'M')]
    m: usize,
    /// Largest dyadic exponent n (radius 2^n); default: largest fitting in the box.
    #[arg(long)]
    dyadic_max_exp: Option<u32>,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    mode: ModeArg,
    /// CSV destination (default: standard output).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Reduced ranges; finishes in well under a minute.
    #[arg(long)]
    quick: bool,
}

/// Entry point used by the binary.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut io::stdout(), &mut io::stderr())
}

/// Like [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            let _ = writeln!(err, "error: --threads must be at least 1");
            return 2;
        }
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return 1;
        }
    };
    match pool.install(|| dispatch(&cli, out, err)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    match &cli.command {
        Command::Count(a) => count(a, cli.json, out),
        Command::Series(a) => series(a, out),
        Command::Specfun(a) => specfun(a, out),
        Command::Multiplier(a) => multiplier(a, cli.json, out),
        Command::Sweep(a) => sweep(a, out, err),
        Command::Maximal(a) => maximal(a, out),
        Command::Verify(a) => verify(a, out),
    }
}

fn count(a: &CountArgs, as_json: bool, out: &mut (dyn Write + Send)) -> Result<i32> {
    let table = ThetaTable::build(a.d, a.lambda)?;
    let sphere = table.sphere_count(a.d, a.lambda)?;
    let ball = if a.ball { Some(table.ball_count(a.d, a.lambda)?) } else { None };
    if as_json {
        let mut v = json!({"d": a.d, "lambda": a.lambda, "sphere": sphere.to_string()});
        if let Some(b) = &ball {
            v["ball"] = json!(b.to_string());
        }
        writeln!(out, "{v}")?;
    } else {
        writeln!(out, "{sphere}")?;
        if let Some(b) = ball {
            writeln!(out, "{b}")?;
        }
    }
    Ok(0)
}

fn series(a: &SeriesArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let s = match a.level {
        Some(p) => singular_series_at(a.d, a.lambda, p)?,
        None => singular_series(a.d, a.lambda, a.tail)?,
    };
    let v = json!({
        "d": s.d,
        "lambda": s.lambda,
        "value": s.value,
        "P": s.level,
        "tail_bound": s.tail_bound,
    });
    writeln!(out, "{v}")?;
    Ok(0)
}

fn specfun(a: &SpecfunArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let mut w = csv::Writer::from_writer(out);
    match &a.table {
        SpecfunTable::Fourier { r, rho_max, points, method } => {
            if *points < 2 || !(*rho_max > 0.0) {
                return Err(Error::Precondition("need --points >= 2 and --rho-max > 0".into()));
            }
            let method = match method {
                MethodArg::Bessel => Method::BesselFormula,
                MethodArg::Quadrature => Method::IntervalQuadrature,
            };
            let ft = SphericalFT::new(*r, method)?;
            w.write_record(["r", "rho", "value"])?;
            for j in 0..*points {
                let rho = rho_max * j as f64 / (*points - 1) as f64;
                w.write_record([r.to_string(), format!("{rho:.17e}"), format!("{:.17e}", ft.eval(rho)?)])?;
            }
        }
        SpecfunTable::Krawtchouk { n } => {
            if !(1..=crate::specfun::KRAWTCHOUK_MAX_N).contains(n) {
                return Err(Error::Precondition(format!("--n must lie in 1..=512, got {n}")));
            }
            let nums = krawtchouk_numerators(*n);
            w.write_record(["n", "k", "x", "num", "den"])?;
            for k in 0..=*n {
                let den = binomial(*n, k);
                for x in 0..=*n {
                    let v = num_rational::BigRational::new(nums[x as usize][k as usize].clone(), den.clone().into());
                    w.write_record([
                        n.to_string(),
                        k.to_string(),
                        x.to_string(),
                        v.numer().to_string(),
                        v.denom().to_string(),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(0)
}

fn multiplier(a: &MultiplierArgs, as_json: bool, out: &mut (dyn Write + Send)) -> Result<i32> {
    let xi = if a.xi.is_empty() {
        TorusPoint::zero(a.d)
    } else {
        TorusPoint::new(a.xi.clone())?
    };
    let ev = MultiplierEvaluator::new(a.d, a.lambda)?;
    let m = ev.m_exact(&xi)?;
    let dec = a.n.map(|n| ev.decompose(&xi, n)).transpose()?;
    if as_json {
        let c = |z: num_complex::Complex64| json!([z.re, z.im]);
        let mut v = json!({"d": a.d, "lambda": a.lambda, "xi": xi.coords(), "m": c(m)});
        if let Some(dec) = &dec {
            v["n"] = json!(dec.n);
            v["major_sum"] = c(dec.major_sum);
            v["b_term"] = c(dec.b_term);
            v["residual"] = c(dec.residual);
        }
        writeln!(out, "{v}")?;
    } else {
        let c = |z: num_complex::Complex64| format!("{:.17e} {:+.17e}i", z.re, z.im);
        writeln!(out, "m = {}", c(m))?;
        if let Some(dec) = &dec {
            writeln!(out, "n = {}", dec.n)?;
            writeln!(out, "major_sum = {}", c(dec.major_sum))?;
            writeln!(out, "b_term = {}", c(dec.b_term))?;
            writeln!(out, "residual = {}", c(dec.residual))?;
        }
    }
    Ok(0)
}

fn open_output(path: Option<&PathBuf>, out: &mut (dyn Write + Send), body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = BufWriter::new(File::create(p)?);
            body(&mut f)?;
            f.flush()?;
            Ok(())
        }
        None => body(out),
    }
}

fn sweep(a: &SweepArgs, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    if a.calibrate {
        let measurements = calibrate()?;
        let path = a.constants.clone().unwrap_or_else(|| default_path().to_path_buf());
        std::fs::write(&path, render(crate::VERSION, &measurements))?;
        for m in &measurements {
            writeln!(out, "{} = {:.17e}", m.key, m.value)?;
        }
        writeln!(err, "wrote {}", path.display())?;
        return Ok(0);
    }
    let path = a.descriptor.as_ref().expect("clap enforces a descriptor");
    let desc: SweepDescriptor = serde_json::from_reader(File::open(path)?)?;
    let rows = sweep_bounds(&desc)?;
    open_output(desc.output.as_ref(), out, |w| write_sweep_csv(w, &desc, &rows))?;
    Ok(0)
}

fn maximal(a: &MaximalArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let exp = match a.dyadic_max_exp {
        Some(e) => e,
        None => max_dyadic_exponent(a.m)
            .ok_or_else(|| Error::Precondition(format!("grid side {} admits no dyadic radius", a.m)))?,
    };
    let set = DyadicSet::up_to(exp)?;
    let path = match a.mode {
        ModeArg::Auto => AveragePath::Auto,
        ModeArg::Direct => AveragePath::Direct,
        ModeArg::Spectral => AveragePath::Spectral,
    };
    let report = ratio_experiment_with(a.d, a.m, &set, a.trials, a.seed, path)?;
    open_output(a.output.as_ref(), out, |w| write_ratio_csv(w, a.seed, &report.rows))?;
    Ok(0)
}

fn verify(a: &VerifyArgs, out: &mut (dyn Write + Send)) -> Result<i32> {
    let scale = if a.quick { Scale::Quick } else { Scale::Full };
    let outcomes = run_suite(scale, &mut *out)?;
    Ok(if outcomes.iter().all(|o| o.passed) { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("dspheres").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn count_example() {
        let (code, out, _) = run_capture(&["count", "--d", "5", "--lambda", "5"]);
        assert_eq!(code, 0);
        assert_eq!(out.trim(), "112");
        let (_, out, _) = run_capture(&["--json", "count", "--d", "4", "--lambda", "2", "--ball"]);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert_eq!(v["sphere"], "24");
        assert_eq!(v["ball"], "33");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_capture(&["count", "--d", "5", "--lambda", "5", "--bogus"]).0, 2);
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["--threads", "0", "count", "--d", "1", "--lambda", "1"]).0, 2);
    }

    #[test]
    fn runtime_errors_exit_1() {
        let (code, _, err) = run_capture(&["series", "--d", "4", "--lambda", "5"]);
        assert_eq!(code, 1);
        assert!(err.contains("d >= 5"), "{err}");
    }

    #[test]
    fn series_json() {
        let (code, out, _) = run_capture(&["series", "--d", "16", "--lambda", "3"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!(v["tail_bound"].as_f64().unwrap() <= 1e-10);
        assert!(v["P"].as_u64().unwrap() >= 1);
    }

    #[test]
    fn multiplier_at_origin_is_one() {
        let (code, out, _) = run_capture(&["--json", "multiplier", "--d", "5", "--lambda", "9", "--xi", "0,0,0,0,0"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
        assert!((v["m"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn krawtchouk_table_rows() {
        let (code, out, _) = run_capture(&["specfun", "krawtchouk", "--n", "4"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 1 + 25);
        assert!(out.contains("4,2,2,-1,3"));
    }
}
