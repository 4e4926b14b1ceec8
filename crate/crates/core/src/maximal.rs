//! Spherical and ball averages on the periodic box `(Z/MZ)^d`, dyadic
//! maximal functions and ℓ² ratio experiments.
//!
//! The box is a finite stand-in for `ℓ²(Z^d)`; every ratio reported here is
//! a periodic-box estimate.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use num_traits::Zero;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::calibration::csv_preamble;
use crate::lattice::{enumerate_sphere, ThetaTable, DEFAULT_ENUM_CAP, ENUM_MAX_DIM, ENUM_MAX_MASS};
use crate::multiplier::{Kappa, MultiplierEvaluator, TorusPoint};
use crate::numeric::{first_max, pairwise_sum, sample_rng};
use crate::{Error, Result};

/// Largest number of grid sites `M^d`.
pub const MAX_SITES: usize = 1 << 24;

/// A complex function on `(Z/MZ)^d`, stored row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    m: usize,
    d: usize,
    values: Vec<Complex64>,
}

fn sites(m: usize, d: usize) -> Result<usize> {
    if m == 0 || d == 0 {
        return Err(Error::pre("grid side and dimension must be positive"));
    }
    let mut n: usize = 1;
    for _ in 0..d {
        n = n.checked_mul(m).filter(|&n| n <= MAX_SITES).ok_or(Error::SizeLimit {
            what: "grid sites",
            value: (m as f64).powi(d as i32).min(u64::MAX as f64) as u64,
            max: MAX_SITES as u64,
        })?;
    }
    Ok(n)
}

impl GridFunction {
    pub fn new(m: usize, d: usize, values: Vec<Complex64>) -> Result<Self> {
        let n = sites(m, d)?;
        if values.len() != n {
            return Err(Error::pre(format!("expected {n} values, got {}", values.len())));
        }
        Ok(Self { m, d, values })
    }

    pub fn from_fn<F: Fn(&[usize]) -> Complex64>(m: usize, d: usize, f: F) -> Result<Self> {
        let n = sites(m, d)?;
        let mut coords = vec![0usize; d];
        let values = (0..n)
            .map(|i| {
                decode(i, m, &mut coords);
                f(&coords)
            })
            .collect();
        Ok(Self { m, d, values })
    }

    pub fn constant(m: usize, d: usize, c: Complex64) -> Result<Self> {
        Ok(Self {
            m,
            d,
            values: vec![c; sites(m, d)?],
        })
    }

    /// Indicator of the origin.
    pub fn delta(m: usize, d: usize) -> Result<Self> {
        let mut f = Self::constant(m, d, Complex64::zero())?;
        f.values[0] = Complex64::new(1.0, 0.0);
        Ok(f)
    }

    /// Independent standard complex Gaussians (real and imaginary parts `N(0,1)`).
    pub fn random_gaussian(m: usize, d: usize, seed: u64, stream: u64) -> Result<Self> {
        let n = sites(m, d)?;
        let mut rng = sample_rng(seed, stream);
        let values = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im)
            })
            .collect();
        Ok(Self { m, d, values })
    }

    /// Independent uniform integers in `0..=max` (real-valued).
    pub fn random_nonnegative_integers(m: usize, d: usize, max: u32, seed: u64, stream: u64) -> Result<Self> {
        let n = sites(m, d)?;
        let mut rng = sample_rng(seed, stream);
        let values = (0..n)
            .map(|_| Complex64::new(rng.random_range(0..=max) as f64, 0.0))
            .collect();
        Ok(Self { m, d, values })
    }

    pub fn side(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Row-major index of `coords`, each reduced mod `M`.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.m + c.rem_euclid(self.m as i64) as usize)
    }

    pub fn at(&self, coords: &[i64]) -> Complex64 {
        self.values[self.index_of(coords)]
    }

    pub fn l2_norm(&self) -> f64 {
        pairwise_sum(&self.values.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `x ↦ f(x_{τ(0)}, …, x_{τ(d-1)})`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.d];
        if perm.len() != self.d || perm.iter().any(|&p| p >= self.d || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::pre("not a permutation of the axes"));
        }
        Self::from_fn(self.m, self.d, |c| {
            let src: Vec<i64> = perm.iter().map(|&p| c[p] as i64).collect();
            self.at(&src)
        })
    }

    /// `x ↦ f(x - s)`.
    pub fn translate(&self, shift: &[i64]) -> Result<Self> {
        if shift.len() != self.d {
            return Err(Error::pre("shift has the wrong dimension"));
        }
        Self::from_fn(self.m, self.d, |c| {
            let src: Vec<i64> = c.iter().zip(shift).map(|(&x, &s)| x as i64 - s).collect();
            self.at(&src)
        })
    }

    /// `max_x |f(x) - g(x)|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn decode(mut i: usize, m: usize, out: &mut [usize]) {
    for c in out.iter_mut().rev() {
        *c = i % m;
        i /= m;
    }
}

/// Dyadic radii `t = 2^n`, i.e. masses `λ = 4^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicSet {
    exponents: Vec<u32>,
}

impl DyadicSet {
    pub fn new(exponents: Vec<u32>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(Error::pre("dyadic set is empty"));
        }
        if exponents.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::pre("dyadic exponents must be strictly increasing"));
        }
        if exponents.iter().any(|&n| n > 30) {
            return Err(Error::pre("dyadic exponent above 30"));
        }
        Ok(Self { exponents })
    }

    /// `{2^0, …, 2^max_exp}`.
    pub fn up_to(max_exp: u32) -> Result<Self> {
        Self::new((0..=max_exp).collect())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn lambdas(&self) -> Vec<u64> {
        self.exponents.iter().map(|&n| 1u64 << (2 * n)).collect()
    }

    /// Radii joined by `;`, e.g. `1;2;4`.
    pub fn label(&self) -> String {
        self.exponents.iter().map(|n| (1u64 << n).to_string()).collect::<Vec<_>>().join(";")
    }
}

/// How an average is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AveragePath {
    /// Pick the cheaper of the two by an operation count.
    Auto,
    /// Sum over enumerated sphere offsets.
    Direct,
    /// Multiply DFT coefficients by `m_t(k/M)`.
    Spectral,
}

fn check_radius(f: &GridFunction, lambda: u64) -> Result<()> {
    if 4 * lambda >= (f.m * f.m) as u64 {
        return Err(Error::pre(format!(
            "grid side M = {} must exceed the sphere diameter 2√λ (λ = {lambda})",
            f.m
        )));
    }
    Ok(())
}

fn direct_feasible(d: usize, lambda: u64) -> bool {
    d <= ENUM_MAX_DIM && lambda <= ENUM_MAX_MASS
}

fn choose_path(f: &GridFunction, lambda: u64, count: f64) -> AveragePath {
    if !direct_feasible(f.d, lambda) {
        return AveragePath::Spectral;
    }
    let per_site_direct = count * f.d as f64;
    let per_site_spectral = 20.0 * f.d as f64 * (f.m as f64).log2().max(1.0) + 64.0;
    if per_site_direct <= per_site_spectral {
        AveragePath::Direct
    } else {
        AveragePath::Spectral
    }
}

/// `(𝒜_t f)(x) = r_d(λ)^{-1} Σ_{|y|² = λ} f(x - y)`, `t = √λ`.
pub fn spherical_average(f: &GridFunction, lambda: u64) -> Result<GridFunction> {
    spherical_average_with(f, lambda, AveragePath::Auto)
}

pub fn spherical_average_with(f: &GridFunction, lambda: u64, path: AveragePath) -> Result<GridFunction> {
    if lambda == 0 {
        return Ok(f.clone());
    }
    check_radius(f, lambda)?;
    let table = ThetaTable::build(f.d, lambda)?;
    let count = table.sphere_count(f.d, lambda)?;
    if count.is_zero() {
        return Err(Error::EmptySphere { d: f.d, lambda });
    }
    let path = match path {
        AveragePath::Auto => choose_path(f, lambda, count.to_f64()),
        p => p,
    };
    match path {
        AveragePath::Direct => direct_average(f, lambda),
        _ => {
            let ev = MultiplierEvaluator::with_table(&table, f.d, lambda)?;
            let mut spec = Spectrum::forward(f);
            spec.multiply_radial(&ev)?;
            Ok(spec.inverse())
        }
    }
}

fn sphere_offsets(d: usize, lambda: u64) -> Result<Vec<Vec<i64>>> {
    enumerate_sphere(d, lambda, DEFAULT_ENUM_CAP)
}

/// `Σ_{y ∈ offsets} f(x - y)` at every site, in the order of `offsets`.
fn offset_sums(f: &GridFunction, offsets: &[Vec<i64>]) -> Vec<Complex64> {
    let (m, d) = (f.m, f.d);
    (0..f.values.len())
        .into_par_iter()
        .map(|i| {
            let mut c = vec![0usize; d];
            decode(i, m, &mut c);
            let mut acc = Complex64::zero();
            for y in offsets {
                let idx = c
                    .iter()
                    .zip(y)
                    .fold(0usize, |a, (&x, &yj)| a * m + (x as i64 - yj).rem_euclid(m as i64) as usize);
                acc += f.values[idx];
            }
            acc
        })
        .collect()
}

fn direct_average(f: &GridFunction, lambda: u64) -> Result<GridFunction> {
    let offsets = sphere_offsets(f.d, lambda)?;
    if offsets.is_empty() {
        return Err(Error::EmptySphere { d: f.d, lambda });
    }
    let r = offsets.len() as f64;
    let values = offset_sums(f, &offsets).into_iter().map(|z| z / r).collect();
    Ok(GridFunction { m: f.m, d: f.d, values })
}

/// DFT of a grid function, `F[k] = Σ_x f(x) e^{-2πi k·x/M}`.
#[derive(Clone, Debug)]
pub struct Spectrum {
    m: usize,
    d: usize,
    coeffs: Vec<Complex64>,
}

fn fft_all_axes(m: usize, d: usize, data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    };
    let n = data.len();
    let mut line = vec![Complex64::zero(); m];
    let mut scratch = vec![Complex64::zero(); fft.get_inplace_scratch_len()];
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        let block = stride * m;
        for start in (0..n).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

impl Spectrum {
    pub fn forward(f: &GridFunction) -> Self {
        let mut coeffs = f.values.clone();
        fft_all_axes(f.m, f.d, &mut coeffs, false);
        Self { m: f.m, d: f.d, coeffs }
    }

    pub fn inverse(mut self) -> GridFunction {
        fft_all_axes(self.m, self.d, &mut self.coeffs, true);
        let scale = 1.0 / self.coeffs.len() as f64;
        GridFunction {
            m: self.m,
            d: self.d,
            values: self.coeffs.into_iter().map(|z| z * scale).collect(),
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Canonical frequency class: sorted `min(k_j, M - k_j)`.
    fn class_of(&self, i: usize, c: &mut [usize]) -> Vec<usize> {
        decode(i, self.m, c);
        let mut key: Vec<usize> = c.iter().map(|&k| k.min(self.m - k)).collect();
        key.sort_unstable();
        key
    }

    fn frequency(&self, key: &[usize]) -> Result<TorusPoint> {
        TorusPoint::new(key.iter().map(|&k| k as f64 / self.m as f64).collect())
    }

    /// Evaluates a function of the frequency `k/M` once per permutation/sign class.
    fn radial_table<F>(&self, eval: F) -> Result<(Vec<usize>, Vec<f64>)>
    where
        F: Fn(&TorusPoint) -> Result<f64> + Sync,
    {
        let mut classes: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut keys: Vec<Vec<usize>> = Vec::new();
        let mut c = vec![0usize; self.d];
        let assignment: Vec<usize> = (0..self.coeffs.len())
            .map(|i| {
                let key = self.class_of(i, &mut c);
                *classes.entry(key.clone()).or_insert_with(|| {
                    keys.push(key);
                    keys.len() - 1
                })
            })
            .collect();
        let values = keys
            .par_iter()
            .map(|k| eval(&self.frequency(k)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok((assignment, values))
    }

    /// `F[k] ← m_t(k/M) F[k]`.
    pub fn multiply_radial(&mut self, ev: &MultiplierEvaluator) -> Result<()> {
        if ev.d() != self.d {
            return Err(Error::pre("multiplier dimension does not match the grid"));
        }
        let (assignment, values) = self.radial_table(|xi| Ok(ev.m_exact(xi)?.re))?;
        for (z, &a) in self.coeffs.iter_mut().zip(&assignment) {
            *z *= values[a];
        }
        Ok(())
    }
}

/// `Σ_{m <= λ} [r_d(m)/|B_t ∩ Z^d|] 𝒜_{√m} f`, with `𝒜_0 f = f`.
pub fn ball_average(f: &GridFunction, lambda: u64) -> Result<GridFunction> {
    if lambda > 0 {
        check_radius(f, lambda)?;
    }
    let table = ThetaTable::build(f.d, lambda)?;
    let ball = table.ball_count(f.d, lambda)?.to_f64();
    let mut acc = vec![Complex64::zero(); f.values.len()];
    for mass in 0..=lambda {
        let r = table.get_f64(f.d, mass)?;
        if r == 0.0 {
            continue;
        }
        let avg = spherical_average(f, mass)?;
        for (a, v) in acc.iter_mut().zip(&avg.values) {
            *a += v * (r / ball);
        }
    }
    Ok(GridFunction {
        m: f.m,
        d: f.d,
        values: acc,
    })
}

/// Outcome of the exact ball-versus-sphere domination check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DominationReport {
    pub sites: usize,
    pub masses: u64,
    pub violations: usize,
}

fn integer_values(f: &GridFunction) -> Result<Vec<u128>> {
    f.values
        .iter()
        .map(|z| {
            if z.im == 0.0 && z.re >= 0.0 && z.re.fract() == 0.0 && z.re <= (1u64 << 40) as f64 {
                Ok(z.re as u128)
            } else {
                Err(Error::pre(format!("domination check needs non-negative integer values, got {z}")))
            }
        })
        .collect()
}

/// Checks `sup_{μ <= λ} B_μ f(x) <= sup_{m <= λ} 𝒜_{√m} f(x)` at every site,
/// in exact integer arithmetic, for non-negative integer-valued `f`.
pub fn check_ball_sphere_domination(f: &GridFunction, lambda: u64) -> Result<DominationReport> {
    if !direct_feasible(f.d, lambda) {
        return Err(Error::SizeLimit {
            what: "domination mass",
            value: lambda,
            max: ENUM_MAX_MASS,
        });
    }
    if lambda > 0 {
        check_radius(f, lambda)?;
    }
    let ints = integer_values(f)?;
    let n = ints.len();
    // sphere sums S_m(x) and counts r_d(m) for non-empty spheres
    let mut sums: Vec<(u128, Vec<u128>)> = Vec::new();
    for mass in 0..=lambda {
        let offsets = sphere_offsets(f.d, mass)?;
        if offsets.is_empty() {
            continue;
        }
        let (m, d) = (f.m, f.d);
        let s: Vec<u128> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut c = vec![0usize; d];
                decode(i, m, &mut c);
                offsets
                    .iter()
                    .map(|y| {
                        let idx = c
                            .iter()
                            .zip(y)
                            .fold(0usize, |a, (&x, &yj)| a * m + (x as i64 - yj).rem_euclid(m as i64) as usize);
                        ints[idx]
                    })
                    .sum()
            })
            .collect();
        sums.push((offsets.len() as u128, s));
    }
    let violations = (0..n)
        .into_par_iter()
        .filter(|&i| {
            // best sphere average as a fraction num/den
            let (mut num, mut den) = (sums[0].1[i], sums[0].0);
            for (r, s) in &sums[1..] {
                if s[i] * den > num * r {
                    num = s[i];
                    den = *r;
                }
            }
            let (mut ball_sum, mut ball_count) = (0u128, 0u128);
            sums.iter().any(|(r, s)| {
                ball_sum += s[i];
                ball_count += r;
                ball_sum * den > num * ball_count
            })
        })
        .count();
    Ok(DominationReport {
        sites: n,
        masses: lambda + 1,
        violations,
    })
}

/// `g(x) = max_{t ∈ T} |𝒜_t f(x)|`.
pub fn dyadic_maximal(f: &GridFunction, set: &DyadicSet) -> Result<GridFunction> {
    dyadic_maximal_with(f, set, AveragePath::Auto)
}

pub fn dyadic_maximal_with(f: &GridFunction, set: &DyadicSet, path: AveragePath) -> Result<GridFunction> {
    for &lambda in &set.lambdas() {
        check_radius(f, lambda)?;
    }
    let mut g = vec![0.0f64; f.values.len()];
    for &lambda in &set.lambdas() {
        let avg = spherical_average_with(f, lambda, path)?;
        for (gi, v) in g.iter_mut().zip(&avg.values) {
            *gi = gi.max(v.norm());
        }
    }
    Ok(GridFunction {
        m: f.m,
        d: f.d,
        values: g.into_iter().map(|x| Complex64::new(x, 0.0)).collect(),
    })
}

/// One line of a ratio experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub d: usize,
    pub m: usize,
    pub set: String,
    /// Trial index, or `delta` / `one` for the canonical inputs.
    pub trial: String,
    pub ratio: f64,
}

/// `‖sup_t |𝒜_t f|‖₂ / ‖f‖₂` over seeded random `f` plus `δ_0` and `𝟙`.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub d: usize,
    pub m: usize,
    pub seed: u64,
    pub rows: Vec<RatioRow>,
    /// Largest ratio over the random trials.
    pub max_random: f64,
    pub mean_random: f64,
}

pub fn maximal_ratio(f: &GridFunction, set: &DyadicSet, path: AveragePath) -> Result<f64> {
    Ok(dyadic_maximal_with(f, set, path)?.l2_norm() / f.l2_norm())
}

pub fn ratio_experiment(d: usize, m: usize, set: &DyadicSet, trials: u64, seed: u64) -> Result<RatioReport> {
    ratio_experiment_with(d, m, set, trials, seed, AveragePath::Auto)
}

pub fn ratio_experiment_with(
    d: usize,
    m: usize,
    set: &DyadicSet,
    trials: u64,
    seed: u64,
    path: AveragePath,
) -> Result<RatioReport> {
    if trials == 0 {
        return Err(Error::pre("ratio experiment needs at least one trial"));
    }
    sites(m, d)?;
    let label = set.label();
    let row = |trial: String, ratio: f64| RatioRow {
        d,
        m,
        set: label.clone(),
        trial,
        ratio,
    };
    let mut rows = Vec::new();
    let mut random = Vec::new();
    for t in 0..trials {
        let f = GridFunction::random_gaussian(m, d, seed, t)?;
        let r = maximal_ratio(&f, set, path)?;
        random.push(r);
        rows.push(row(t.to_string(), r));
    }
    rows.push(row("delta".into(), maximal_ratio(&GridFunction::delta(m, d)?, set, path)?));
    let one = GridFunction::constant(m, d, Complex64::new(1.0, 0.0))?;
    rows.push(row("one".into(), maximal_ratio(&one, set, path)?));
    let (_, max_random) = first_max(&random).expect("at least one trial");
    Ok(RatioReport {
        d,
        m,
        seed,
        rows,
        max_random,
        mean_random: pairwise_sum(&random) / random.len() as f64,
    })
}

/// Writes ratio rows as CSV `(d, M, T, trial, ratio)` after the standard preamble.
pub fn write_ratio_csv<W: Write>(mut out: W, seed: u64, rows: &[RatioRow]) -> Result<()> {
    out.write_all(csv_preamble("maximal_ratio (periodic-box estimate)", seed).as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "M", "T", "trial", "ratio"])?;
    for r in rows {
        w.write_record([
            r.d.to_string(),
            r.m.to_string(),
            r.set.clone(),
            r.trial.clone(),
            format!("{:.17e}", r.ratio),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Distance between `𝒜_t` and its semigroup model on a grid function.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupGap {
    /// `‖𝒜_t f - P f‖₂ / ‖f‖₂`, `P` having multiplier `p¹` or `p²` by the size of `V_ξ`.
    pub ratio: f64,
    /// Largest `min{e^{-cκ²Σ/400}, κ²Σ}` over the grid frequencies.
    pub rhs_max: f64,
    pub kappa: f64,
}

pub fn semigroup_gap(f: &GridFunction, lambda: u64, c: f64) -> Result<SemigroupGap> {
    if lambda == 0 {
        return Err(Error::pre("semigroup comparison needs λ >= 1"));
    }
    let d = f.d;
    let ev = MultiplierEvaluator::new(d, lambda)?;
    let kappa = Kappa::new(d, lambda).value;
    let spec = Spectrum::forward(f);
    let k2 = kappa * kappa;
    let (assignment, diffs) = spec.radial_table(|xi| {
        let m = ev.m_exact(xi)?.re;
        let s = crate::multiplier::semigroup_multipliers(d, lambda, xi)?;
        let p = if 2 * s.v_xi.len() <= d { s.p1 } else { s.p2 };
        Ok(m - p)
    })?;
    let (_, rhs) = spec.radial_table(|xi| {
        let s = crate::multiplier::semigroup_multipliers(d, lambda, xi)?;
        let sum = if 2 * s.v_xi.len() <= d {
            xi.sin_sq_sum()
        } else {
            xi.cos_sq_sum()
        };
        Ok((-c * k2 * sum / 400.0).exp().min(k2 * sum))
    })?;
    let num: Vec<f64> = spec
        .coeffs
        .iter()
        .zip(&assignment)
        .map(|(z, &a)| z.norm_sqr() * diffs[a] * diffs[a])
        .collect();
    let den: Vec<f64> = spec.coeffs.iter().map(|z| z.norm_sqr()).collect();
    Ok(SemigroupGap {
        ratio: (pairwise_sum(&num) / pairwise_sum(&den)).sqrt(),
        rhs_max: rhs.iter().copied().fold(0.0, f64::max),
        kappa,
    })
}

/// Largest dyadic exponent `n` with `4^{n+1} < M²`, i.e. `2·2^n < M`.
pub fn max_dyadic_exponent(m: usize) -> Option<u32> {
    (0..31u32).take_while(|&n| 4u64 << (2 * n) < (m * m) as u64).last()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(m: usize, d: usize) -> GridFunction {
        GridFunction::constant(m, d, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn averages_preserve_constants() {
        let f = one(7, 3);
        for lambda in [0, 1, 2, 3, 5] {
            let a = spherical_average_with(&f, lambda, AveragePath::Direct).unwrap();
            assert!(a.values().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
            let b = spherical_average_with(&f, lambda, AveragePath::Spectral).unwrap();
            assert!(b.max_abs_diff(&f) < 1e-13);
        }
        assert!(ball_average(&f, 4).unwrap().max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn delta_examples() {
        let a = spherical_average(&GridFunction::delta(7, 3).unwrap(), 1).unwrap();
        for i in 0..a.values().len() {
            let mut c = [0usize; 3];
            decode(i, 7, &mut c);
            let unit = c.iter().filter(|&&x| x == 1 || x == 6).count() == 1 && c.iter().filter(|&&x| x == 0).count() == 2;
            let expected = if unit { 1.0 / 6.0 } else { 0.0 };
            assert_eq!(a.values()[i], Complex64::new(expected, 0.0));
        }
        let b = ball_average(&GridFunction::delta(16, 4).unwrap(), 4).unwrap();
        assert!((b.values()[0].re - 1.0 / 89.0).abs() < 1e-15);
    }

    #[test]
    fn radius_precondition() {
        let f = one(4, 2);
        assert!(spherical_average(&f, 4).is_err());
        assert!(spherical_average(&f, 2).is_ok());
        assert!(matches!(spherical_average(&one(9, 3), 7), Err(Error::EmptySphere { .. })));
    }

    #[test]
    fn paths_agree() {
        let f = GridFunction::random_gaussian(10, 3, 5, 0).unwrap();
        for lambda in [1, 2, 3, 6, 9, 11, 24] {
            let a = spherical_average_with(&f, lambda, AveragePath::Direct).unwrap();
            let b = spherical_average_with(&f, lambda, AveragePath::Spectral).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10, "λ={lambda}");
        }
    }

    #[test]
    fn dyadic_examples() {
        let delta = GridFunction::delta(8, 2).unwrap();
        let set = DyadicSet::new(vec![0]).unwrap();
        let g = dyadic_maximal(&delta, &set).unwrap();
        let a = spherical_average(&delta, 1).unwrap();
        for (x, y) in g.values().iter().zip(a.values()) {
            assert_eq!(x.re, y.norm());
        }
        let g = dyadic_maximal(&one(9, 2), &DyadicSet::up_to(1).unwrap()).unwrap();
        assert!(g.max_abs_diff(&one(9, 2)) < 1e-14);
        assert!(DyadicSet::new(vec![]).is_err());
        assert!(DyadicSet::new(vec![1, 1]).is_err());
        assert_eq!(DyadicSet::up_to(2).unwrap().label(), "1;2;4");
        assert_eq!(max_dyadic_exponent(16), Some(2));
        assert_eq!(max_dyadic_exponent(2), None);
    }

    #[test]
    fn domination_small() {
        let f = GridFunction::random_nonnegative_integers(9, 3, 9, 3, 0).unwrap();
        let rep = check_ball_sphere_domination(&f, 6).unwrap();
        assert_eq!(rep.violations, 0);
        let bad = GridFunction::constant(9, 3, Complex64::new(0.5, 0.0)).unwrap();
        assert!(check_ball_sphere_domination(&bad, 2).is_err());
    }

    #[test]
    fn ratio_report_shape() {
        let set = DyadicSet::up_to(1).unwrap();
        let rep = ratio_experiment(3, 6, &set, 2, 11).unwrap();
        assert_eq!(rep.rows.len(), 4);
        assert_eq!(rep.rows[3].trial, "one");
        assert!((rep.rows[3].ratio - 1.0).abs() < 1e-12);
        assert!(rep.max_random.is_finite());
        let mut buf = Vec::new();
        write_ratio_csv(&mut buf, 11, &rep.rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# seed: 11"));
        assert!(text.contains("d,M,T,trial,ratio"));
    }
}
