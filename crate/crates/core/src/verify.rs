//! Hard-assert suite behind `dspheres verify`.
//!
//! Each check covers one acceptance criterion and reports a single line.
//! Details are deterministic (no timings), so two runs of the suite produce
//! identical logs.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;

use crate::arith::{asymptotic_ratio, singular_series, singular_series_at, RootTable};
use crate::calibration::{Calibration, Direction};
use crate::lattice::{enumerate_sphere, isqrt, ThetaTable, DEFAULT_ENUM_CAP};
use crate::maximal::{
    check_ball_sphere_domination, max_dyadic_exponent, ratio_experiment, spherical_average_with, write_ratio_csv,
    AveragePath, DyadicSet, GridFunction,
};
use crate::multiplier::{m_bruteforce, MultiplierEvaluator, TorusPoint};
use crate::numeric::sample_rng;
use crate::specfun::{
    binomial, check_fourier_decay, krawtchouk_bound_scan, krawtchouk_numerators, krawtchouk_reflects,
    krawtchouk_symmetric, routes_agree, Method, SphericalFT,
};
use crate::sweep::{calibration_suite, sweep_bounds, write_sweep_csv, BoundFamily, SweepDescriptor};
use crate::Result;

/// Problem sizes of the suite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    /// Reduced sample counts and ranges; finishes well under a minute.
    Quick,
    /// The ranges named by the acceptance criteria.
    Full,
}

impl Scale {
    fn pick<T>(self, quick: T, full: T) -> T {
        match self {
            Scale::Quick => quick,
            Scale::Full => full,
        }
    }
}

/// Outcome of one check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

/// Seed shared by all randomized checks.
pub const VERIFY_SEED: u64 = 7_340_033;

/// Ids and names of the checks, in order.
pub const CHECKS: [(u32, &str); 14] = [
    (1, "counting oracle"),
    (2, "ball-sphere sandwich"),
    (3, "gauss sum bounds"),
    (4, "singular series range"),
    (5, "waring asymptotic trend"),
    (6, "explicit multiplier bounds"),
    (7, "half-shift symmetry"),
    (8, "exact vs brute-force multiplier"),
    (9, "decomposition identity"),
    (10, "krawtchouk identities"),
    (11, "spherical fourier transform"),
    (12, "maximal module"),
    (13, "determinism"),
    (14, "frozen constants regression"),
];

type Verdict = Result<(bool, String)>;

/// Runs check `id` at the given scale.
pub fn run_check(id: u32, scale: Scale) -> CheckOutcome {
    let name = CHECKS
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown check");
    let verdict: Verdict = match id {
        1 => counting_oracle(scale),
        2 => sandwich(),
        3 => gauss_bounds(scale),
        4 => series_range(scale),
        5 => waring_trend(),
        6 => multiplier_bounds(scale).map(|(a, _)| a),
        7 => multiplier_bounds(scale).map(|(_, b)| b),
        8 => exact_vs_brute(scale),
        9 => decomposition(scale),
        10 => krawtchouk_checks(),
        11 => fourier_checks(scale),
        12 => maximal_checks(scale),
        13 => determinism(),
        14 => frozen_regression(),
        _ => Ok((false, format!("no check with id {id}"))),
    };
    let (passed, detail) = verdict.unwrap_or_else(|e| (false, format!("error: {e}")));
    CheckOutcome { id, name, passed, detail }
}

/// The suite run by `verify`: checks 1 to 13, plus the frozen-constant
/// regression at full scale.
pub fn suite(scale: Scale) -> Vec<u32> {
    match scale {
        Scale::Quick => (1..=13).collect(),
        Scale::Full => (1..=14).collect(),
    }
}

fn counting_oracle(scale: Scale) -> Verdict {
    let lmax = scale.pick(24, 40);
    let table = ThetaTable::build(5, lmax)?;
    let mut cases = 0;
    let mut bad = Vec::new();
    for d in 1..=5 {
        for lambda in 0..=lmax {
            cases += 1;
            let exact = table.sphere_count(d, lambda)?.value;
            let listed = enumerate_sphere(d, lambda, DEFAULT_ENUM_CAP)?.len();
            if exact != listed.into() {
                bad.push(format!("({d},{lambda})"));
            }
        }
    }
    Ok((bad.is_empty(), format!("cases={cases} mismatches={}{}", bad.len(), list(&bad))))
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!(" first={}", items[0])
    }
}

fn sandwich() -> Verdict {
    let table = ThetaTable::build(10, 200)?;
    let mut cases = 0;
    let mut bad = Vec::new();
    for d in 5..=10 {
        for lambda in 1..=200 {
            cases += 1;
            if !table.check_ball_sphere_bounds(d, lambda)?.ok {
                bad.push(format!("({d},{lambda})"));
            }
        }
    }
    Ok((bad.is_empty(), format!("cases={cases} violations={}{}", bad.len(), list(&bad))))
}

fn gauss_bounds(scale: Scale) -> Verdict {
    let qmax: u64 = scale.pick(60, 200);
    let per_q: Vec<(u64, f64, f64, usize)> = (1..=qmax)
        .into_par_iter()
        .map(|q| {
            let table = RootTable::new(q);
            let mut worst_bound = f64::NEG_INFINITY;
            let mut worst_parseval = 0.0f64;
            let mut fractions = 0;
            for p in (1..=q).filter(|p| p.gcd(&q) == 1) {
                fractions += 1;
                let g: Vec<f64> = table.gauss_row(p).iter().map(|z| z.norm()).collect();
                let gmax = g.iter().copied().fold(0.0, f64::max);
                let energy: f64 = g.iter().map(|x| x * x).sum();
                for d in 1..=32 {
                    let excess = gmax.powi(d) - (2.0 / q as f64).powf(d as f64 / 2.0);
                    worst_bound = worst_bound.max(excess);
                    worst_parseval = worst_parseval.max((energy.powi(d) - 1.0).abs());
                }
            }
            (q, worst_bound, worst_parseval, fractions)
        })
        .collect();
    let fractions: usize = per_q.iter().map(|r| r.3).sum();
    let excess = per_q.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let parseval = per_q.iter().map(|r| r.2).fold(0.0, f64::max);
    let ok = excess <= 1e-12 && parseval <= 1e-10;
    Ok((
        ok,
        format!("q<={qmax} fractions={fractions} d<=32 max_excess={excess:.3e} max_parseval_dev={parseval:.3e}"),
    ))
}

fn series_range(scale: Scale) -> Verdict {
    let lmax: u64 = scale.pick(30, 100);
    let cases: Vec<(usize, u64)> = (16..=24).flat_map(|d| (1..=lmax).map(move |l| (d, l))).collect();
    let values = cases
        .iter()
        .map(|&(d, l)| singular_series(d, l, 1e-10))
        .collect::<Result<Vec<_>>>()?;
    let lo = values.iter().map(|s| s.value).fold(f64::INFINITY, f64::min);
    let hi = values.iter().map(|s| s.value).fold(f64::NEG_INFINITY, f64::max);
    let tail = values.iter().map(|s| s.tail_bound).fold(0.0, f64::max);
    let ok = lo >= 0.5 && hi <= 1.5 && tail <= 1e-10;
    Ok((
        ok,
        format!(
            "cases={} min={lo:.12} max={hi:.12} max_tail={tail:.3e}",
            cases.len()
        ),
    ))
}

fn waring_deviation(table: &ThetaTable, lambda: u64) -> Result<f64> {
    let s = singular_series_at(8, lambda, isqrt(lambda))?;
    Ok((asymptotic_ratio(table, 8, lambda, &s)? - 1.0).abs())
}

fn waring_trend() -> Verdict {
    let table = ThetaTable::build(8, 1 << 18)?;
    let small = waring_deviation(&table, 1 << 12)?;
    let large = waring_deviation(&table, 1 << 18)?;
    let cal = Calibration::embedded();
    let frozen_ok = Direction::Upper.admits(small, cal.get("waring_d8_dev_4096")?)
        && Direction::Upper.admits(large, cal.get("waring_d8_dev_262144")?);
    let ok = large < small && small < 0.25 && frozen_ok;
    Ok((
        ok,
        format!("|R(4^6)-1|={small:.6e} |R(4^9)-1|={large:.6e} frozen_ok={frozen_ok}"),
    ))
}

type BoundVerdicts = ((bool, String), (bool, String));

fn multiplier_bounds(scale: Scale) -> Result<BoundVerdicts> {
    let samples: u64 = scale.pick(300, 10_000);
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for d in [5usize, 8, 12] {
        for lambda in [16u64, 144, 1024] {
            let ev = MultiplierEvaluator::new(d, lambda)?;
            let kappa = ev.kappa().value;
            let sign = if lambda % 2 == 0 { 1.0 } else { -1.0 };
            let c = 2.0 * std::f64::consts::PI.powi(2) * kappa * kappa;
            let rows = (0..samples)
                .into_par_iter()
                .map(|i| {
                    let xi = TorusPoint::random(d, &mut sample_rng(VERIFY_SEED, i));
                    let shifted = xi.half_shift();
                    let m = ev.m_exact(&xi)?;
                    let ms = ev.m_exact(&shifted)?;
                    let r1 = (m - 1.0).norm() / (c * xi.norm_sq());
                    let r2 = (m - sign).norm() / (c * shifted.norm_sq());
                    Ok((r1, r2, (ms - m * sign).norm()))
                })
                .collect::<Result<Vec<_>>>()?;
            for (r1, r2, s) in rows {
                worst = (worst.0.max(r1), worst.1.max(r2), worst.2.max(s));
            }
        }
    }
    let per = format!("pairs=9 samples={samples}");
    Ok((
        (
            worst.0 <= 1.0 + 1e-9 && worst.1 <= 1.0 + 1e-9,
            format!("{per} max_ratio={:.9} max_ratio_shift={:.9}", worst.0, worst.1),
        ),
        (worst.2 <= 1e-10, format!("{per} max_error={:.3e}", worst.2)),
    ))
}

fn exact_vs_brute(scale: Scale) -> Verdict {
    let samples: u64 = scale.pick(10, 100);
    let table = ThetaTable::build(5, 40)?;
    let mut pairs = Vec::new();
    for d in 2..=5usize {
        for lambda in 1..=40u64 {
            if !table.is_zero(d, lambda)? {
                pairs.push((d, lambda));
            }
        }
    }
    let errors = pairs
        .par_iter()
        .map(|&(d, lambda)| {
            let ev = MultiplierEvaluator::with_table(&table, d, lambda)?;
            let mut worst = 0.0f64;
            for i in 0..samples {
                let xi = TorusPoint::random(d, &mut sample_rng(VERIFY_SEED ^ lambda, i));
                worst = worst.max((ev.m_exact(&xi)? - m_bruteforce(d, lambda, &xi)?).norm());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Ok((
        worst <= 1e-10,
        format!("pairs={} samples={samples} max_error={worst:.3e}", pairs.len()),
    ))
}

fn decomposition(scale: Scale) -> Verdict {
    let samples: u64 = scale.pick(3, 20);
    let mut identity = 0.0f64;
    let mut boundary_ok = true;
    let mut trend_ok = true;
    let mut detail = String::new();
    for d in [5usize, 6] {
        let mut residuals = Vec::new();
        for k in [10u32, 12, 14] {
            let lambda = 1u64 << k;
            let ev = MultiplierEvaluator::new(d, lambda)?;
            let top = ev.level() + 1;
            let mut points = vec![TorusPoint::zero(d)];
            points.extend((0..samples).map(|i| TorusPoint::random(d, &mut sample_rng(VERIFY_SEED + k as u64, i))));
            for xi in &points {
                for n in [1, 2, top / 2, top] {
                    let dec = ev.decompose(xi, n)?;
                    let err = (dec.major_sum + dec.b_term + dec.residual - dec.m_exact).norm();
                    identity = identity.max(err);
                }
                boundary_ok &= ev.main_term_m1(xi, 1)? == Complex64::new(0.0, 0.0);
                boundary_ok &= ev.main_term_m2(xi, top)? == Complex64::new(0.0, 0.0);
            }
            residuals.push(ev.decompose(&TorusPoint::zero(d), top)?.residual.norm());
        }
        trend_ok &= residuals.windows(2).all(|w| w[1] < w[0]);
        let _ = write!(
            detail,
            " d={d}:|E(0)|=[{}]",
            residuals.iter().map(|r| format!("{r:.3e}")).collect::<Vec<_>>().join(",")
        );
    }
    Ok((
        identity <= 1e-12 && boundary_ok && trend_ok,
        format!("identity_err={identity:.3e} boundary_exact={boundary_ok} decreasing={trend_ok}{detail}"),
    ))
}

fn krawtchouk_checks() -> Verdict {
    let mut identities = true;
    for n in 1..=64u64 {
        let nums = krawtchouk_numerators(n);
        identities &= krawtchouk_symmetric(n, &nums) && krawtchouk_reflects(n, &nums);
        identities &= (0..=n).all(|k| nums[0][k as usize] == BigInt::from(binomial(n, k)));
    }
    let scan = krawtchouk_bound_scan(64)?;
    let frozen = Calibration::embedded().get("krawtchouk_c_min_n64")?;
    let frozen_ok = Direction::Lower.admits(scan.c_min, frozen);
    Ok((
        identities && scan.c_min >= 0.2 && frozen_ok,
        format!(
            "n<=64 identities={identities} c_min={:.12} at {:?} zeros={} frozen_ok={frozen_ok}",
            scan.c_min, scan.argmin, scan.zeros
        ),
    ))
}

fn fourier_checks(scale: Scale) -> Verdict {
    let radii: Vec<u64> = match scale {
        Scale::Quick => vec![2, 3, 5, 10, 20, 30, 50],
        Scale::Full => (2..=50).collect(),
    };
    let quadratic = radii
        .par_iter()
        .map(|&r| {
            let ft = SphericalFT::new(r, Method::BesselFormula)?;
            let mut worst = f64::NEG_INFINITY;
            for j in 0..100 {
                let rho = j as f64 * 0.05;
                let excess = (ft.eval(rho)? - 1.0).abs() - 2.0 * std::f64::consts::PI.powi(2) * rho * rho / r as f64;
                worst = worst.max(excess);
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let quadratic_excess = quadratic.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let step = scale.pick(2.5, 0.5);
    let cross_radii: Vec<u64> = radii.iter().copied().filter(|&r| r <= 30).collect();
    let disagreements = cross_radii
        .par_iter()
        .map(|&r| {
            let a = SphericalFT::new(r, Method::BesselFormula)?;
            let b = SphericalFT::new(r, Method::IntervalQuadrature)?;
            let mut bad = 0u64;
            let mut j = 0;
            loop {
                let rho = j as f64 * step;
                if rho > 50.0 {
                    break;
                }
                if !routes_agree(a.eval(rho)?, b.eval(rho)?) {
                    bad += 1;
                }
                j += 1;
            }
            Ok(bad)
        })
        .collect::<Result<Vec<u64>>>()?;
    let disagreements: u64 = disagreements.iter().sum();

    let cal = Calibration::embedded();
    let grid = |step: f64, points: usize| (0..=points).map(|i| i as f64 * step).collect::<Vec<_>>();
    let a_exp = check_fourier_decay(10, &grid(0.1, 300))?.a_exp;
    let a_pow = check_fourier_decay(25, &grid(0.25, 400))?.a_pow;
    let decay_ok = a_exp.is_finite()
        && a_pow.is_finite()
        && Direction::Upper.admits(a_exp, cal.get("fourier_a_exp_r10")?)
        && Direction::Upper.admits(a_pow, cal.get("fourier_a_pow_r25")?);
    Ok((
        quadratic_excess <= 0.0 && disagreements == 0 && decay_ok,
        format!(
            "radii={} quadratic_excess={quadratic_excess:.3e} cross_disagreements={disagreements} A_exp(10)={a_exp:.9} A_pow(25)={a_pow:.9} decay_ok={decay_ok}",
            radii.len()
        ),
    ))
}

fn maximal_checks(scale: Scale) -> Verdict {
    let one = Complex64::new(1.0, 0.0);
    let mut constants_ok = true;
    for (d, m, lambda) in [(2usize, 16usize, 25u64), (3, 12, 9), (4, 16, 16)] {
        let f = GridFunction::constant(m, d, one)?;
        let direct = spherical_average_with(&f, lambda, AveragePath::Direct)?;
        constants_ok &= direct.values().iter().all(|&z| z == one);
        let spectral = spherical_average_with(&f, lambda, AveragePath::Spectral)?;
        constants_ok &= spectral.max_abs_diff(&f) <= 1e-12;
    }

    let mut violations = 0;
    for trial in 0..scale.pick(1u64, 3) {
        let f = GridFunction::random_nonnegative_integers(16, 4, 9, VERIFY_SEED, trial)?;
        violations += check_ball_sphere_domination(&f, 16)?.violations;
    }

    let mut path_gap = 0.0f64;
    for (d, m, lambdas) in [
        (2usize, 16usize, vec![1, 2, 5, 25]),
        (3, 12, vec![1, 3, 9, 14]),
        (4, scale.pick(8, 16), vec![1, 2, 4, 7]),
    ] {
        let f = GridFunction::random_gaussian(m, d, VERIFY_SEED, d as u64)?;
        for lambda in lambdas {
            let a = spherical_average_with(&f, lambda, AveragePath::Direct)?;
            let b = spherical_average_with(&f, lambda, AveragePath::Spectral)?;
            path_gap = path_gap.max(a.max_abs_diff(&b));
        }
    }

    let trials = scale.pick(2, 4);
    let mut reports = Vec::new();
    let mut bounded = true;
    for (d, m) in [(3usize, 16usize), (4, 16), (5, 12), (6, 12)] {
        let set = DyadicSet::up_to(max_dyadic_exponent(m).expect("side admits radius 1"))?;
        let report = ratio_experiment(d, m, &set, trials, VERIFY_SEED)?;
        let cap = (set.exponents().len() as f64).sqrt() + 1e-12;
        bounded &= report.rows.iter().all(|r| r.ratio.is_finite() && r.ratio <= cap);
        bounded &= report.rows.iter().any(|r| r.trial == "one" && (r.ratio - 1.0).abs() <= 1e-12);
        reports.push(report);
    }
    let render = |reports: &[crate::maximal::RatioReport]| -> Result<Vec<u8>> {
        let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.clone()).collect();
        let mut buf = Vec::new();
        write_ratio_csv(&mut buf, VERIFY_SEED, &rows)?;
        Ok(buf)
    };
    let first = render(&reports)?;
    let again: Vec<_> = [(3usize, 16usize), (4, 16), (5, 12), (6, 12)]
        .iter()
        .map(|&(d, m)| {
            let set = DyadicSet::up_to(max_dyadic_exponent(m).expect("side admits radius 1"))?;
            ratio_experiment(d, m, &set, trials, VERIFY_SEED)
        })
        .collect::<Result<_>>()?;
    let reproducible = first == render(&again)?;
    let worst = reports.iter().map(|r| r.max_random).fold(0.0, f64::max);

    Ok((
        constants_ok && violations == 0 && path_gap <= 1e-8 && bounded && reproducible,
        format!(
            "constants_ok={constants_ok} domination_violations={violations} path_gap={path_gap:.3e} ratio_bounded={bounded} max_ratio={worst:.9} csv_reproducible={reproducible}"
        ),
    ))
}

fn sweep_csv(desc: &SweepDescriptor, threads: usize) -> Result<Vec<u8>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| crate::Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| {
        let rows = sweep_bounds(desc)?;
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, desc, &rows)?;
        Ok(buf)
    })
}

fn determinism() -> Verdict {
    let descs = [
        SweepDescriptor::new(BoundFamily::Prop42, vec![(5, 100), (8, 144)], 64, VERIFY_SEED),
        SweepDescriptor::new(BoundFamily::FourierDecay, vec![(12, 40)], 64, VERIFY_SEED),
        SweepDescriptor::new(BoundFamily::MaximalRatio, vec![(3, 8)], 3, VERIFY_SEED),
    ];
    let mut same = 0;
    for desc in &descs {
        if sweep_csv(desc, 1)? == sweep_csv(desc, 3)? {
            same += 1;
        }
    }
    Ok((
        same == descs.len(),
        format!("sweeps={} identical_across_thread_counts={same}", descs.len()),
    ))
}

fn frozen_regression() -> Verdict {
    let cal = Calibration::embedded();
    let mut failed = Vec::new();
    let suite = calibration_suite();
    for spec in &suite {
        let measured = (spec.measure)()?;
        let frozen = cal.get(spec.key)?;
        if !spec.direction.admits(measured, frozen) {
            failed.push(format!("{}={measured:.17e} vs {frozen:.17e}", spec.key));
        }
    }
    Ok((
        failed.is_empty(),
        format!("constants={} regressions={}{}", suite.len(), failed.len(), list(&failed)),
    ))
}

/// Runs a suite, writing one line per check and a summary; returns the
/// outcomes.
pub fn run_suite<W: std::io::Write>(scale: Scale, mut log: W) -> Result<Vec<CheckOutcome>> {
    let mut outcomes = Vec::new();
    for id in suite(scale) {
        let outcome = run_check(id, scale);
        writeln!(log, "{}", outcome.line())?;
        outcomes.push(outcome);
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(log, "verify: {} passed, {failed} failed", outcomes.len() - failed)?;
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_checks_pass() {
        for id in [2, 10] {
            let o = run_check(id, Scale::Quick);
            assert!(o.passed, "{}", o.line());
        }
    }

    #[test]
    fn unknown_id_fails() {
        assert!(!run_check(99, Scale::Quick).passed);
    }
}
