//! Seeded sweeps of multiplier, transform and maximal-function bounds.
//!
//! A sweep evaluates one bound family over a list of parameter pairs and
//! reports, per pair, the largest observed ratio `|lhs| / rhs` where `rhs`
//! omits any implicit constant. Samples are drawn from counter-based streams
//! and reduced in index order, so results do not depend on the thread count.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;
use std::sync::OnceLock;

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{asymptotic_ratio, singular_series_at};
use crate::calibration::{csv_preamble, Direction, Measurement};
use crate::lattice::{isqrt, ThetaTable};
use crate::maximal::{max_dyadic_exponent, maximal_ratio, semigroup_gap, AveragePath, DyadicSet, GridFunction};
use crate::multiplier::{semigroup_multipliers, MultiplierEvaluator, TorusPoint};
use crate::numeric::{first_max, ln_abs_bigint, ln_biguint, sample_rng};
use crate::specfun::{binomial, check_fourier_decay, krawtchouk_bound_scan, krawtchouk_numerators, SphericalFT, Method, DECAY_EXPONENT};
use crate::{Error, Result};

/// Exponent used by the `krawtchouk` family: the ratio is `|𝕂| e^{c kx/n}`.
pub const KRAWTCHOUK_REFERENCE_C: f64 = 0.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    /// `|m - 1| / (2π²κ²‖ξ‖²)`
    Prop41,
    /// `|m - (-1)^λ| / (2π²κ²‖ξ + 𝟏/2‖²)`
    Prop41Shift,
    /// `|m| / (e^{-2πκ‖ξ‖} + e^{-2πκ‖ξ+𝟏/2‖} + λ^{-2} + e^{-d/10})`
    Prop42,
    /// `|m| / ((κ‖ξ‖)^{-1} + (κ‖ξ+𝟏/2‖)^{-1} + κ^{-4})`
    Prop61,
    /// `|m - p^i| / min{e^{-cκ²Σ/400}, κ²Σ}`
    Prop71,
    /// `|m| / (e^{-cκ²Σsin²/100} + e^{-cκ²Σcos²/100})`
    Prop72,
    /// `|E_{t,n}| / (d^{3d/4} / λ^{d/4-1})`
    ResidE,
    /// `|ℱμ^r(ρ)| / (e^{-2πρ/√r} + e^{-r/10})`, pairs `(r, ρ_max)`
    FourierDecay,
    /// `|𝕂_k^{(n)}(x)| e^{0.2 kx/n}`, pairs `(n, _)`
    Krawtchouk,
    /// `|R(d, λ) - 1|`
    AsymptoticRatio,
    /// `‖sup_t |𝒜_t f|‖₂ / ‖f‖₂`, pairs `(d, M)`
    MaximalRatio,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 11] = [
        BoundFamily::Prop41,
        BoundFamily::Prop41Shift,
        BoundFamily::Prop42,
        BoundFamily::Prop61,
        BoundFamily::Prop71,
        BoundFamily::Prop72,
        BoundFamily::ResidE,
        BoundFamily::FourierDecay,
        BoundFamily::Krawtchouk,
        BoundFamily::AsymptoticRatio,
        BoundFamily::MaximalRatio,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            BoundFamily::Prop41 => "prop41",
            BoundFamily::Prop41Shift => "prop41_shift",
            BoundFamily::Prop42 => "prop42",
            BoundFamily::Prop61 => "prop61",
            BoundFamily::Prop71 => "prop71",
            BoundFamily::Prop72 => "prop72",
            BoundFamily::ResidE => "resid_e",
            BoundFamily::FourierDecay => "fourier_decay",
            BoundFamily::Krawtchouk => "krawtchouk",
            BoundFamily::AsymptoticRatio => "asymptotic_ratio",
            BoundFamily::MaximalRatio => "maximal_ratio",
        }
    }
}

/// JSON sweep descriptor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDescriptor {
    pub family: BoundFamily,
    /// `(d, λ)` pairs, or `(d, M)`, `(r, ρ_max)`, `(n, _)` depending on the family.
    pub pairs: Vec<(u64, u64)>,
    pub samples: u64,
    pub seed: u64,
    /// CSV destination; standard output when absent.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Major-arc cutoff for `resid_e`; defaults to `⌊√λ⌋ + 1`.
    #[serde(default)]
    pub n: Option<u64>,
}

impl SweepDescriptor {
    pub fn new(family: BoundFamily, pairs: Vec<(u64, u64)>, samples: u64, seed: u64) -> Self {
        Self {
            family,
            pairs,
            samples,
            seed,
            output: None,
            n: None,
        }
    }
}

/// One CSV row: the worst sample of one parameter pair.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub family: BoundFamily,
    pub d: u64,
    pub lambda: u64,
    pub seed: u64,
    pub max_ratio: f64,
    /// Description of the maximising sample (a torus point, radius, index, …).
    pub argmax: String,
}

/// The Krawtchouk exponent `c` used by the small-scale families: the
/// minimum of the uniform-bound scan over `n <= 64`.
pub fn small_scale_c() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| krawtchouk_bound_scan(64).expect("scan range is valid").c_min)
}

fn xi_sample(d: usize, seed: u64, index: u64) -> TorusPoint {
    TorusPoint::random(d, &mut sample_rng(seed, index))
}

fn safe_ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn sign(lambda: u64) -> f64 {
    if lambda % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn to_dim(d: u64) -> Result<usize> {
    usize::try_from(d).map_err(|_| Error::pre("dimension does not fit in usize"))
}

/// Ratio of one multiplier family at one torus point.
fn multiplier_ratio(family: BoundFamily, ev: &MultiplierEvaluator, xi: &TorusPoint, n: u64) -> Result<f64> {
    let d = ev.d();
    let lambda = ev.lambda();
    let kappa = ev.kappa().value;
    let k2 = kappa * kappa;
    Ok(match family {
        BoundFamily::Prop41 => {
            let m = ev.m_exact(xi)?;
            safe_ratio((m - 1.0).norm(), 2.0 * PI * PI * k2 * xi.norm_sq())
        }
        BoundFamily::Prop41Shift => {
            let m = ev.m_exact(xi)?;
            safe_ratio((m - sign(lambda)).norm(), 2.0 * PI * PI * k2 * xi.half_shift().norm_sq())
        }
        BoundFamily::Prop42 => {
            let m = ev.m_exact(xi)?;
            let rhs = (-2.0 * PI * kappa * xi.norm()).exp()
                + (-2.0 * PI * kappa * xi.half_norm()).exp()
                + (lambda as f64).powi(-2)
                + (-(d as f64) / 10.0).exp();
            m.norm() / rhs
        }
        BoundFamily::Prop61 => {
            let m = ev.m_exact(xi)?;
            let rhs = 1.0 / (kappa * xi.norm()) + 1.0 / (kappa * xi.half_norm()) + kappa.powi(-4);
            safe_ratio(m.norm(), rhs)
        }
        BoundFamily::Prop71 => {
            let m = ev.m_exact(xi)?;
            let s = semigroup_multipliers(d, lambda, xi)?;
            let (p, sum) = if 2 * s.v_xi.len() <= d {
                (s.p1, xi.sin_sq_sum())
            } else {
                (s.p2, xi.cos_sq_sum())
            };
            let rhs = (-small_scale_c() * k2 * sum / 400.0).exp().min(k2 * sum);
            safe_ratio((m - p).norm(), rhs)
        }
        BoundFamily::Prop72 => {
            let m = ev.m_exact(xi)?;
            let c = small_scale_c();
            let rhs = (-c * k2 * xi.sin_sq_sum() / 100.0).exp() + (-c * k2 * xi.cos_sq_sum() / 100.0).exp();
            m.norm() / rhs
        }
        BoundFamily::ResidE => {
            let dec = ev.decompose(xi, n)?;
            let df = d as f64;
            let scale = (0.75 * df * df.ln() - (df / 4.0 - 1.0) * (lambda as f64).ln()).exp();
            dec.residual.norm() / scale
        }
        _ => unreachable!("not a multiplier family"),
    })
}

/// Describes sample `i` for the `argmax_xi` column.
type Describe = Box<dyn Fn(usize) -> String + Sync>;

fn pair_ratios(desc: &SweepDescriptor, a: u64, b: u64) -> Result<(Vec<f64>, Describe)> {
    let family = desc.family;
    let seed = desc.seed;
    let samples = desc.samples;
    let indices: Vec<u64> = (0..samples).collect();
    match family {
        BoundFamily::FourierDecay => {
            let r = a;
            let rho_max = b as f64;
            let ft = SphericalFT::new(r, Method::BesselFormula)?;
            let rho_of = move |i: u64| sample_rng(seed, i).random::<f64>() * rho_max;
            let sr = (r as f64).sqrt();
            let ratios = indices
                .par_iter()
                .map(|&i| {
                    let rho = rho_of(i);
                    let env = (-2.0 * PI * rho / sr).exp() + (-DECAY_EXPONENT * r as f64).exp();
                    Ok(ft.eval(rho)?.abs() / env)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((ratios, Box::new(move |i| format!("rho={:.17e}", rho_of(i as u64)))))
        }
        BoundFamily::Krawtchouk => {
            let n = a;
            if !(2..=crate::specfun::KRAWTCHOUK_MAX_N).contains(&n) {
                return Err(Error::pre(format!("krawtchouk family needs 2 <= n <= 512, got {n}")));
            }
            let nums = krawtchouk_numerators(n);
            let ln_binom: Vec<f64> = (0..=n).map(|k| ln_biguint(&binomial(n, k))).collect();
            let kx_of = move |i: u64| {
                let mut rng = sample_rng(seed, i);
                (rng.random_range(1..=n / 2), rng.random_range(1..=n / 2))
            };
            let ratios = indices
                .iter()
                .map(|&i| {
                    let (k, x) = kx_of(i);
                    let num = &nums[x as usize][k as usize];
                    if num.is_zero() {
                        return 0.0;
                    }
                    let ln = ln_abs_bigint(num) - ln_binom[k as usize];
                    (ln + KRAWTCHOUK_REFERENCE_C * (k * x) as f64 / n as f64).exp()
                })
                .collect();
            Ok((
                ratios,
                Box::new(move |i| {
                    let (k, x) = kx_of(i as u64);
                    format!("k={k};x={x}")
                }),
            ))
        }
        BoundFamily::AsymptoticRatio => {
            let d = to_dim(a)?;
            let lambda = b;
            let table = ThetaTable::build(d, lambda)?;
            let s = singular_series_at(d, lambda, isqrt(lambda).max(1))?;
            let r = asymptotic_ratio(&table, d, lambda, &s)?;
            Ok((vec![(r - 1.0).abs()], Box::new(|_| "xi=0".to_string())))
        }
        BoundFamily::MaximalRatio => {
            let d = to_dim(a)?;
            let m = usize::try_from(b).map_err(|_| Error::pre("grid side does not fit in usize"))?;
            let exp = max_dyadic_exponent(m)
                .ok_or_else(|| Error::pre(format!("grid side {m} admits no dyadic radius")))?;
            let set = DyadicSet::up_to(exp)?;
            let ratios = indices
                .iter()
                .map(|&i| maximal_ratio(&GridFunction::random_gaussian(m, d, seed, i)?, &set, AveragePath::Auto))
                .collect::<Result<Vec<f64>>>()?;
            Ok((ratios, Box::new(|i| format!("trial={i}"))))
        }
        _ => {
            let d = to_dim(a)?;
            let lambda = b;
            let ev = MultiplierEvaluator::new(d, lambda)?;
            let n = match desc.n {
                Some(n) => n.min(ev.level() + 1),
                None => ev.level() + 1,
            };
            let ratios = indices
                .par_iter()
                .map(|&i| multiplier_ratio(family, &ev, &xi_sample(d, seed, i), n))
                .collect::<Result<Vec<f64>>>()?;
            Ok((ratios, Box::new(move |i| xi_sample(d, seed, i as u64).format())))
        }
    }
}

/// Runs a sweep; one row per parameter pair.
pub fn sweep_bounds(desc: &SweepDescriptor) -> Result<Vec<SweepRow>> {
    if desc.pairs.is_empty() {
        return Err(Error::EmptySweep("no parameter pairs".into()));
    }
    if desc.samples == 0 {
        return Err(Error::EmptySweep("zero samples".into()));
    }
    desc.pairs
        .iter()
        .map(|&(a, b)| {
            let (ratios, describe) = pair_ratios(desc, a, b)?;
            let (idx, max_ratio) = first_max(&ratios).expect("at least one sample");
            if !max_ratio.is_finite() {
                return Err(Error::pre(format!(
                    "{} ratio is not finite at pair ({a}, {b})",
                    desc.family.name()
                )));
            }
            Ok(SweepRow {
                family: desc.family,
                d: a,
                lambda: b,
                seed: desc.seed,
                max_ratio,
                argmax: describe(idx),
            })
        })
        .collect()
}

/// Writes rows as CSV `(family, d, lambda, seed, max_ratio, argmax_xi)`.
pub fn write_sweep_csv<W: Write>(mut out: W, desc: &SweepDescriptor, rows: &[SweepRow]) -> Result<()> {
    out.write_all(csv_preamble(desc.family.name(), desc.seed).as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "d", "lambda", "seed", "max_ratio", "argmax_xi"])?;
    for r in rows {
        w.write_record([
            r.family.name().to_string(),
            r.d.to_string(),
            r.lambda.to_string(),
            r.seed.to_string(),
            format!("{:.17e}", r.max_ratio),
            r.argmax.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One constant measured by the calibration run.
pub struct CalibrationSpec {
    pub key: &'static str,
    pub direction: Direction,
    pub note: &'static str,
    pub measure: fn() -> Result<f64>,
}

fn sweep_max(desc: SweepDescriptor) -> Result<f64> {
    let rows = sweep_bounds(&desc)?;
    Ok(rows.iter().map(|r| r.max_ratio).fold(f64::NEG_INFINITY, f64::max))
}

pub const CALIBRATION_SEED: u64 = 20_240_601;

/// Small-scale pairs with `κ(d, λ) <= 1/5`.
pub const SMALL_SCALE_PAIRS: [(u64, u64); 3] = [(25, 1), (50, 2), (64, 2)];

fn waring_deviation(lambda: u64) -> Result<f64> {
    let table = ThetaTable::build(8, lambda)?;
    let s = singular_series_at(8, lambda, isqrt(lambda))?;
    Ok((asymptotic_ratio(&table, 8, lambda, &s)? - 1.0).abs())
}

fn max_residual_d6() -> Result<f64> {
    let ev = MultiplierEvaluator::new(6, 4096)?;
    let values = (0..100u64)
        .into_par_iter()
        .map(|i| Ok(ev.decompose(&xi_sample(6, CALIBRATION_SEED, i), 3)?.residual.norm()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

fn semigroup_gap_d4() -> Result<f64> {
    (0..10u64)
        .map(|i| {
            let f = GridFunction::random_gaussian(8, 4, CALIBRATION_SEED, i)?;
            let gap = semigroup_gap(&f, 1, small_scale_c())?;
            Ok(gap.ratio / gap.rhs_max)
        })
        .try_fold(0.0f64, |acc, r: Result<f64>| Ok(acc.max(r?)))
}

/// The calibrate-then-freeze suite.
pub fn calibration_suite() -> Vec<CalibrationSpec> {
    vec![
        CalibrationSpec {
            key: "fourier_a_exp_r10",
            direction: Direction::Upper,
            note: "A_exp for r = 10 on the grid 0, 0.1, ..., 30",
            measure: || Ok(check_fourier_decay(10, &grid(0.1, 300))?.a_exp),
        },
        CalibrationSpec {
            key: "fourier_a_pow_r25",
            direction: Direction::Upper,
            note: "A_pow for r = 25 on the grid 0, 0.25, ..., 100",
            measure: || Ok(check_fourier_decay(25, &grid(0.25, 400))?.a_pow),
        },
        CalibrationSpec {
            key: "krawtchouk_c_min_n64",
            direction: Direction::Lower,
            note: "uniform Krawtchouk exponent over n <= 64",
            measure: || Ok(krawtchouk_bound_scan(64)?.c_min),
        },
        CalibrationSpec {
            key: "waring_d8_dev_4096",
            direction: Direction::Upper,
            note: "|R(8, 4^6) - 1| with the series truncated at sqrt(lambda)",
            measure: || waring_deviation(4096),
        },
        CalibrationSpec {
            key: "waring_d8_dev_262144",
            direction: Direction::Upper,
            note: "|R(8, 4^9) - 1| with the series truncated at sqrt(lambda)",
            measure: || waring_deviation(262_144),
        },
        CalibrationSpec {
            key: "prop42_max_ratio",
            direction: Direction::Upper,
            note: "prop42 over (5,1024), (6,2048), (8,4096), 200 samples",
            measure: || {
                sweep_max(SweepDescriptor::new(
                    BoundFamily::Prop42,
                    vec![(5, 1024), (6, 2048), (8, 4096)],
                    200,
                    CALIBRATION_SEED,
                ))
            },
        },
        CalibrationSpec {
            key: "prop61_max_ratio",
            direction: Direction::Upper,
            note: "prop61 at (10, 1000), 200 samples",
            measure: || {
                sweep_max(SweepDescriptor::new(BoundFamily::Prop61, vec![(10, 1000)], 200, CALIBRATION_SEED))
            },
        },
        CalibrationSpec {
            key: "prop71_max_ratio",
            direction: Direction::Upper,
            note: "prop71 at kappa <= 1/5: (25,1), (50,2), (64,2), 500 samples",
            measure: || {
                sweep_max(SweepDescriptor::new(BoundFamily::Prop71, SMALL_SCALE_PAIRS.to_vec(), 500, CALIBRATION_SEED))
            },
        },
        CalibrationSpec {
            key: "prop72_max_ratio",
            direction: Direction::Upper,
            note: "prop72 at kappa <= 1/5: (25,1), (50,2), (64,2), 500 samples",
            measure: || {
                sweep_max(SweepDescriptor::new(BoundFamily::Prop72, SMALL_SCALE_PAIRS.to_vec(), 500, CALIBRATION_SEED))
            },
        },
        CalibrationSpec {
            key: "resid_e_d6_l4096_n3",
            direction: Direction::Upper,
            note: "resid_e at (6, 4096) with n = 3, 100 samples",
            measure: || {
                let mut desc = SweepDescriptor::new(BoundFamily::ResidE, vec![(6, 4096)], 100, CALIBRATION_SEED);
                desc.n = Some(3);
                sweep_max(desc)
            },
        },
        CalibrationSpec {
            key: "residual_d6_l4096_n3",
            direction: Direction::Upper,
            note: "max |E| at (6, 4096) with n = 3, 100 samples",
            measure: max_residual_d6,
        },
        CalibrationSpec {
            key: "maximal_ratio_d4_m16",
            direction: Direction::Upper,
            note: "maximal ratio for d = 4, M = 16, T = {1,2,4}, 50 trials",
            measure: || {
                sweep_max(SweepDescriptor::new(BoundFamily::MaximalRatio, vec![(4, 16)], 50, CALIBRATION_SEED))
            },
        },
        CalibrationSpec {
            key: "semigroup_gap_d4_m8_l1",
            direction: Direction::Upper,
            note: "semigroup gap over its grid maximum, d = 4, M = 8, lambda = 1, 10 trials",
            measure: semigroup_gap_d4,
        },
    ]
}

fn grid(step: f64, points: usize) -> Vec<f64> {
    (0..=points).map(|i| i as f64 * step).collect()
}

/// Runs the whole calibration suite.
pub fn calibrate() -> Result<Vec<Measurement>> {
    calibration_suite()
        .iter()
        .map(|spec| {
            Ok(Measurement {
                key: spec.key.to_string(),
                value: (spec.measure)()?,
                direction: spec.direction,
                note: spec.note.to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_json() {
        let text = r#"{"family":"prop41_shift","pairs":[[5,16]],"samples":3,"seed":9}"#;
        let desc: SweepDescriptor = serde_json::from_str(text).unwrap();
        assert_eq!(desc.family, BoundFamily::Prop41Shift);
        assert_eq!(desc.output, None);
        assert!(serde_json::from_str::<SweepDescriptor>(r#"{"family":"nope","pairs":[],"samples":1,"seed":1}"#).is_err());
        for f in BoundFamily::ALL {
            let json = serde_json::to_string(&f).unwrap();
            assert_eq!(json, format!("\"{}\"", f.name()));
        }
    }

    #[test]
    fn empty_sweeps_fail() {
        let d = SweepDescriptor::new(BoundFamily::Prop41, vec![], 5, 1);
        assert!(matches!(sweep_bounds(&d), Err(Error::EmptySweep(_))));
        let d = SweepDescriptor::new(BoundFamily::Prop41, vec![(5, 16)], 0, 1);
        assert!(matches!(sweep_bounds(&d), Err(Error::EmptySweep(_))));
    }

    #[test]
    fn explicit_bounds_hold_on_a_small_sweep() {
        for family in [BoundFamily::Prop41, BoundFamily::Prop41Shift] {
            let d = SweepDescriptor::new(family, vec![(5, 16), (8, 144)], 200, 3);
            for row in sweep_bounds(&d).unwrap() {
                assert!(row.max_ratio <= 1.0 + 1e-9, "{row:?}");
            }
        }
    }

    #[test]
    fn every_family_runs() {
        let pairs = |f: BoundFamily| match f {
            BoundFamily::FourierDecay => vec![(10, 30)],
            BoundFamily::Krawtchouk => vec![(16, 0)],
            BoundFamily::AsymptoticRatio => vec![(8, 256)],
            BoundFamily::MaximalRatio => vec![(3, 6)],
            BoundFamily::Prop71 | BoundFamily::Prop72 => vec![(25, 1)],
            _ => vec![(6, 64)],
        };
        for f in BoundFamily::ALL {
            let rows = sweep_bounds(&SweepDescriptor::new(f, pairs(f), 4, 5)).unwrap();
            assert_eq!(rows.len(), 1);
            assert!(rows[0].max_ratio.is_finite(), "{f:?}");
        }
    }

    #[test]
    fn csv_is_reproducible() {
        let d = SweepDescriptor::new(BoundFamily::Prop42, vec![(5, 100)], 20, 8);
        let render = || {
            let mut buf = Vec::new();
            write_sweep_csv(&mut buf, &d, &sweep_bounds(&d).unwrap()).unwrap();
            buf
        };
        let a = render();
        assert_eq!(a, render());
        let text = String::from_utf8(a).unwrap();
        assert!(text.contains("family,d,lambda,seed,max_ratio,argmax_xi"));
        assert!(text.contains("# seed: 8"));
    }
}
