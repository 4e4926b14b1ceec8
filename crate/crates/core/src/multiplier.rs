//! The normalised exponential sum over the lattice sphere,
//!
//! `m_t(ξ) = r_d(λ)^{-1} Σ_{|x|² = λ} e^{2πi x·ξ}`,  `t = √λ`,
//!
//! together with its circle-method approximation by major-arc terms and the
//! semigroup multipliers it is compared with.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::arith::{farey_sequence, gauss_product, ReducedFraction, RootTable};
use crate::lattice::{enumerate_sphere, isqrt, ThetaTable, DEFAULT_ENUM_CAP};
use crate::numeric::{CompensatedComplex, CompensatedSum};
use crate::specfun::{ln_gamma_half, ln_sphere_area, sphere_area, Method, SphericalFT};
use crate::{Error, Result};

/// Largest mass accepted by [`MultiplierEvaluator`].
pub const MAX_MULTIPLIER_MASS: u64 = 1 << 20;
/// Version of the smooth cutoff profile; decomposition outputs depend on it.
pub const BUMP_PROFILE_VERSION: u32 = 1;
/// Major-arc terms whose a-priori size falls below this multiple of
/// `λ^{1-d/2}` are dropped.
pub const TERM_SKIP_THRESHOLD: f64 = 1e-18;

/// A point of the torus `T^d`, stored in the fundamental cube `[-1/2, 1/2)^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

fn canonical(x: f64) -> f64 {
    let mut c = x - (x + 0.5).floor();
    if c < -0.5 {
        c += 1.0;
    }
    if c >= 0.5 {
        c -= 1.0;
    }
    c
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|x| !x.is_finite()) {
            return Err(Error::pre(format!("torus coordinates must be finite, got {bad}")));
        }
        Ok(Self {
            coords: coords.into_iter().map(canonical).collect(),
        })
    }

    pub fn zero(d: usize) -> Self {
        Self { coords: vec![0.0; d] }
    }

    /// Uniform sample from `[-1/2, 1/2)^d`.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        Self {
            coords: (0..d).map(|_| canonical(rng.random::<f64>() - 0.5)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `‖ξ‖²`, the squared distance to `Z^d`.
    pub fn norm_sq(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.coords.iter().for_each(|c| acc.add(c * c));
        acc.value()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `ξ + (1/2, …, 1/2)`, canonicalised.
    pub fn half_shift(&self) -> Self {
        Self {
            coords: self.coords.iter().map(|c| canonical(c + 0.5)).collect(),
        }
    }

    /// `‖ξ + 𝟏/2‖`.
    pub fn half_norm(&self) -> f64 {
        self.half_shift().norm()
    }

    /// `Σ sin²(π ξ_i)`.
    pub fn sin_sq_sum(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.coords.iter().for_each(|c| acc.add((PI * c).sin().powi(2)));
        acc.value()
    }

    /// `Σ cos²(π ξ_i)`.
    pub fn cos_sq_sum(&self) -> f64 {
        let mut acc = CompensatedSum::new();
        self.coords.iter().for_each(|c| acc.add((PI * c).cos().powi(2)));
        acc.value()
    }

    pub fn format(&self) -> String {
        self.coords.iter().map(|c| format!("{c:.17e}")).collect::<Vec<_>>().join(";")
    }
}

/// The nearest integer vector: `⌊x_i + 1/2⌋` componentwise, so that
/// `x - vfloor(x) ∈ [-1/2, 1/2)^d`.
pub fn vfloor(x: &[f64]) -> Vec<i64> {
    x.iter().map(|&v| (v + 0.5).floor() as i64).collect()
}

/// `κ(d, λ) = √(λ/d)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kappa {
    pub d: usize,
    pub lambda: u64,
    pub value: f64,
}

impl Kappa {
    pub fn new(d: usize, lambda: u64) -> Self {
        Self {
            d,
            lambda,
            value: (lambda as f64 / d as f64).sqrt(),
        }
    }
}

/// Smooth cutoff equal to 1 on `[-inner, inner]` and 0 outside
/// `(-outer, outer)`, glued with the `e^{-1/s}` partition of unity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpFunction {
    pub inner: f64,
    pub outer: f64,
}

impl Default for BumpFunction {
    fn default() -> Self {
        Self {
            inner: 0.125,
            outer: 0.25,
        }
    }
}

fn h(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        (-1.0 / s).exp()
    }
}

impl BumpFunction {
    /// The companion cutoff with plateau `[-1/4, 1/4]` and support in `(-1/2, 1/2)`.
    pub fn wide() -> Self {
        Self {
            inner: 0.25,
            outer: 0.5,
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        let a = x.abs();
        if a <= self.inner {
            1.0
        } else if a >= self.outer {
            0.0
        } else {
            let s = (self.outer - a) / (self.outer - self.inner);
            h(s) / (h(s) + h(1.0 - s))
        }
    }

    /// `ψ(v) = Π_j φ(v_j)`.
    pub fn psi(&self, v: &[f64]) -> f64 {
        v.iter().map(|&x| self.phi(x)).product()
    }
}

/// `m_t(ξ)` split as `major_sum + b_term + residual`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierDecomposition {
    pub d: usize,
    pub lambda: u64,
    pub n: u64,
    pub xi: TorusPoint,
    pub m_exact: Complex64,
    /// `Σ_{q<n} a_{t,p/q}(ξ) = M_1(λ, ξ, n) / r_d(λ)`
    pub major_sum: Complex64,
    /// `b_{t,n}(ξ) = M_2(λ, ξ, n) / r_d(λ)`
    pub b_term: Complex64,
    /// `m_exact - major_sum - b_term`
    pub residual: Complex64,
}

/// Comparison multipliers at `ξ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SemigroupValues {
    /// `exp(-κ² Σ sin²(πξ_i))`
    pub p1: f64,
    /// `(-1)^λ exp(-κ² Σ cos²(πξ_i))`
    pub p2: f64,
    /// `V_ξ = {i : ‖ξ_i‖ > 1/4}`
    pub v_xi: Vec<usize>,
}

pub fn semigroup_multipliers(d: usize, lambda: u64, xi: &TorusPoint) -> Result<SemigroupValues> {
    if xi.dim() != d {
        return Err(Error::pre(format!("ξ has dimension {}, expected {d}", xi.dim())));
    }
    let k2 = Kappa::new(d, lambda).value.powi(2);
    let sign = if lambda % 2 == 0 { 1.0 } else { -1.0 };
    Ok(SemigroupValues {
        p1: (-k2 * xi.sin_sq_sum()).exp(),
        p2: sign * (-k2 * xi.cos_sq_sum()).exp(),
        v_xi: xi
            .coords()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > 0.25)
            .map(|(i, _)| i)
            .collect(),
    })
}

/// `p_s(ξ) = exp(-s Σ sin²(πξ_i))`.
pub fn p_heat(s: f64, xi: &TorusPoint) -> f64 {
    (-s * xi.sin_sq_sum()).exp()
}

/// Evaluates `m_t` and its major-arc approximation for fixed `(d, λ)`.
#[derive(Clone, Debug)]
pub struct MultiplierEvaluator {
    d: usize,
    lambda: u64,
    root: u64,
    count: f64,
    ln_count: f64,
    farey: Vec<ReducedFraction>,
    roots: Vec<RootTable>,
    ft: SphericalFT,
    bump: BumpFunction,
}

impl MultiplierEvaluator {
    pub fn new(d: usize, lambda: u64) -> Result<Self> {
        let table = ThetaTable::build(d, lambda)?;
        Self::with_table(&table, d, lambda)
    }

    /// Shares an existing theta table covering `(d, λ)`.
    pub fn with_table(table: &ThetaTable, d: usize, lambda: u64) -> Result<Self> {
        if d < 2 {
            return Err(Error::pre(format!("multiplier needs d >= 2, got {d}")));
        }
        if lambda > MAX_MULTIPLIER_MASS {
            return Err(Error::SizeLimit {
                what: "multiplier mass",
                value: lambda,
                max: MAX_MULTIPLIER_MASS,
            });
        }
        let count = table.sphere_count(d, lambda)?;
        if count.is_zero() {
            return Err(Error::EmptySphere { d, lambda });
        }
        let root = isqrt(lambda);
        let farey = if root >= 1 { farey_sequence(root)? } else { Vec::new() };
        Ok(Self {
            d,
            lambda,
            root,
            count: count.to_f64(),
            ln_count: count.log_value,
            farey,
            roots: (1..=root).map(RootTable::new).collect(),
            ft: SphericalFT::new(d as u64, Method::BesselFormula)?,
            bump: BumpFunction::default(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda(&self) -> u64 {
        self.lambda
    }

    /// Farey level `N = ⌊√λ⌋`.
    pub fn level(&self) -> u64 {
        self.root
    }

    /// `r_d(λ)` as a float.
    pub fn sphere_count(&self) -> f64 {
        self.count
    }

    pub fn kappa(&self) -> Kappa {
        Kappa::new(self.d, self.lambda)
    }

    fn check_xi(&self, xi: &TorusPoint) -> Result<()> {
        if xi.dim() != self.d {
            return Err(Error::pre(format!("ξ has dimension {}, expected {}", xi.dim(), self.d)));
        }
        Ok(())
    }

    /// `m_t(ξ)` from the coefficient of `z^λ` in
    /// `Π_j (1 + Σ_{k>=1} 2cos(2πkξ_j) z^{k²})`.
    pub fn m_exact(&self, xi: &TorusPoint) -> Result<Complex64> {
        self.check_xi(xi)?;
        let lam = self.lambda as usize;
        let root = self.root as usize;
        let coef = |c: f64| -> Vec<f64> {
            let mut v = Vec::with_capacity(root + 1);
            v.push(1.0);
            v.extend((1..=root).map(|k| 2.0 * (2.0 * PI * c * k as f64).cos()));
            v
        };
        let xs = xi.coords();
        let first = coef(xs[0]);
        let mut acc = vec![0.0f64; lam + 1];
        for (k, &c) in first.iter().enumerate() {
            acc[k * k] = c;
        }
        let mut next = vec![0.0f64; lam + 1];
        for &x in &xs[1..self.d - 1] {
            let c = coef(x);
            next.copy_from_slice(&acc);
            for (k, &ck) in c.iter().enumerate().skip(1) {
                let s = k * k;
                for (dst, &src) in next[s..].iter_mut().zip(&acc[..=lam - s]) {
                    *dst += ck * src;
                }
            }
            std::mem::swap(&mut acc, &mut next);
        }
        let last = coef(xs[self.d - 1]);
        let mut total = CompensatedSum::new();
        for (k, &ck) in last.iter().enumerate() {
            total.add(ck * acc[lam - k * k]);
        }
        Ok(Complex64::new(total.value() / self.count, 0.0))
    }

    /// `ℱσ(ρ)` for the sphere in `R^d`.
    pub fn fourier_sigma(&self, rho: f64) -> Result<f64> {
        self.ft.eval_sigma(rho)
    }

    /// `½ λ^{d/2-1} / r_d(λ)`, the normalisation turning `M_i` into `m`-scale terms.
    fn scale(&self) -> f64 {
        ((self.d as f64 / 2.0 - 1.0) * (self.lambda as f64).ln() - std::f64::consts::LN_2 - self.ln_count).exp()
    }

    fn check_n(&self, n: u64) -> Result<()> {
        if n == 0 || n > self.root + 1 {
            return Err(Error::OutOfRange {
                what: "major arc cutoff n",
                value: n,
                max: self.root + 1,
            });
        }
        Ok(())
    }

    /// Sum over `p/q ∈ H_N` with `q` in `qs` of
    /// `w_q e(-λp/q) G(p/q; x_q) ℱσ(√λ |x_q/q - ξ|)`, `x_q = vfloor(qξ)`.
    fn arc_sum<W: Fn(u64, &[f64], &[i64]) -> f64>(&self, xi: &TorusPoint, qs: std::ops::Range<u64>, weight: W) -> Result<Complex64> {
        let d = self.d;
        let sqrt_lambda = (self.lambda as f64).sqrt();
        let sigma = sphere_area(d as u64);
        let threshold = TERM_SKIP_THRESHOLD * (self.lambda as f64).powf(1.0 - d as f64 / 2.0);
        // |ℱσ(ρ)| <= σ min(1, πΓ(d/2)/(π^{d/2} ρ^{d/2-1})) since |J_ν| <= 1.
        let ln_decay = PI.ln() + ln_gamma_half(d as u64) - d as f64 / 2.0 * PI.ln();
        let mut acc = CompensatedComplex::new();
        for q in qs {
            let scaled: Vec<f64> = xi.coords().iter().map(|c| q as f64 * c).collect();
            let x = vfloor(&scaled);
            let w = weight(q, &scaled, &x);
            if w == 0.0 {
                continue;
            }
            let mut dist = CompensatedSum::new();
            for (&xj, &c) in x.iter().zip(xi.coords()) {
                dist.add((xj as f64 / q as f64 - c).powi(2));
            }
            let rho = sqrt_lambda * dist.value().sqrt();
            let decay = if rho > 0.0 {
                (ln_decay - (d as f64 / 2.0 - 1.0) * rho.ln()).exp().min(1.0)
            } else {
                1.0
            };
            let gauss_bound = (2.0 / q as f64).powf(d as f64 / 2.0).min(1.0);
            if gauss_bound * sigma * decay < threshold {
                continue;
            }
            let f_sigma = self.fourier_sigma(rho)?;
            let table = &self.roots[(q - 1) as usize];
            let lam = self.lambda as i128;
            let mut inner = CompensatedComplex::new();
            for frac in self.farey.iter().filter(|f| f.q() == q) {
                let p = frac.p();
                inner.add(table.e(-lam * p as i128) * gauss_product(table, p, &x));
            }
            acc.add(inner.value() * (w * f_sigma));
        }
        Ok(acc.value())
    }

    /// `Σ_{q<n} a_{t,p/q}(ξ)`, i.e. `M_1(λ, ξ, n) / r_d(λ)`.
    pub fn major_sum(&self, xi: &TorusPoint, n: u64) -> Result<Complex64> {
        self.check_xi(xi)?;
        self.check_n(n)?;
        Ok(self.arc_sum(xi, 1..n, |_, _, _| 1.0)? * self.scale())
    }

    /// `b_{t,n}(ξ)`, i.e. `M_2(λ, ξ, n) / r_d(λ)`.
    pub fn b_term(&self, xi: &TorusPoint, n: u64) -> Result<Complex64> {
        self.check_xi(xi)?;
        self.check_n(n)?;
        let bump = self.bump;
        let weight = move |_q: u64, scaled: &[f64], x: &[i64]| {
            let offset: Vec<f64> = scaled.iter().zip(x).map(|(s, &xj)| s - xj as f64).collect();
            bump.psi(&offset)
        };
        Ok(self.arc_sum(xi, n..self.root + 1, weight)? * self.scale())
    }

    /// `M_1(λ, ξ, n)`.
    pub fn main_term_m1(&self, xi: &TorusPoint, n: u64) -> Result<Complex64> {
        Ok(self.major_sum(xi, n)? * self.count)
    }

    /// `M_2(λ, ξ, n)`.
    pub fn main_term_m2(&self, xi: &TorusPoint, n: u64) -> Result<Complex64> {
        Ok(self.b_term(xi, n)? * self.count)
    }

    pub fn decompose(&self, xi: &TorusPoint, n: u64) -> Result<MultiplierDecomposition> {
        let m_exact = self.m_exact(xi)?;
        let major_sum = self.major_sum(xi, n)?;
        let b_term = self.b_term(xi, n)?;
        Ok(MultiplierDecomposition {
            d: self.d,
            lambda: self.lambda,
            n,
            xi: xi.clone(),
            m_exact,
            major_sum,
            b_term,
            residual: m_exact - major_sum - b_term,
        })
    }

    /// `ln σ(S^{d-1})`, the factor between the `ℱσ` and `ℱμ` normalisations.
    pub fn ln_sigma(&self) -> f64 {
        ln_sphere_area(self.d as u64)
    }
}

/// `m_t(ξ)` by direct summation over the enumerated sphere.
pub fn m_bruteforce(d: usize, lambda: u64, xi: &TorusPoint) -> Result<Complex64> {
    if xi.dim() != d {
        return Err(Error::pre(format!("ξ has dimension {}, expected {d}", xi.dim())));
    }
    let points = enumerate_sphere(d, lambda, DEFAULT_ENUM_CAP)?;
    if points.is_empty() {
        return Err(Error::EmptySphere { d, lambda });
    }
    let mut acc = CompensatedComplex::new();
    for x in &points {
        let mut phase = CompensatedSum::new();
        for (&xi_j, &c) in x.iter().zip(xi.coords()) {
            phase.add(xi_j as f64 * c);
        }
        let t = phase.value();
        let frac = t - t.round();
        acc.add(Complex64::from_polar(1.0, 2.0 * PI * frac));
    }
    Ok(acc.value() / points.len() as f64)
}

/// `m_t(ξ)` for a one-off evaluation.
pub fn m_exact(d: usize, lambda: u64, xi: &TorusPoint) -> Result<Complex64> {
    MultiplierEvaluator::new(d, lambda)?.m_exact(xi)
}

pub fn decompose(d: usize, lambda: u64, xi: &TorusPoint, n: u64) -> Result<MultiplierDecomposition> {
    MultiplierEvaluator::new(d, lambda)?.decompose(xi, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::sample_rng;

    #[test]
    fn vfloor_examples() {
        assert_eq!(vfloor(&[0.5]), vec![1]);
        assert_eq!(vfloor(&[0.49, -0.5]), vec![0, 0]);
        assert_eq!(vfloor(&[1.2, -2.7]), vec![1, -3]);
    }

    #[test]
    fn torus_canonicalisation() {
        let p = TorusPoint::new(vec![0.5, -0.5, 1.25, -3.75, 0.49999999999999994]).unwrap();
        for &c in p.coords() {
            assert!((-0.5..0.5).contains(&c), "{c}");
        }
        assert_eq!(p.coords()[..4], [-0.5, -0.5, 0.25, 0.25]);
        assert!(TorusPoint::new(vec![f64::NAN]).is_err());
        let h = TorusPoint::zero(3).half_shift();
        assert_eq!(h.coords(), &[-0.5, -0.5, -0.5]);
        assert!((TorusPoint::zero(4).half_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bump_profile() {
        let b = BumpFunction::default();
        assert_eq!(b.phi(0.125), 1.0);
        assert_eq!(b.phi(-0.1), 1.0);
        assert_eq!(b.phi(0.25), 0.0);
        assert_eq!(b.phi(0.3), 0.0);
        assert!((b.phi(0.1875) - 0.5).abs() < 1e-15);
        let mut last = 1.0;
        for i in 0..=100 {
            let v = b.phi(0.125 + 0.00125 * i as f64);
            assert!((0.0..=1.0).contains(&v) && v <= last);
            last = v;
        }
        assert_eq!(BumpFunction::wide().phi(0.25), 1.0);
    }

    #[test]
    fn exact_multiplier_examples() {
        let ev = MultiplierEvaluator::new(5, 4).unwrap();
        assert!((ev.m_exact(&TorusPoint::zero(5)).unwrap() - 1.0).norm() < 1e-15);
        let mut rng = sample_rng(1, 0);
        for _ in 0..20 {
            let xi = TorusPoint::random(5, &mut rng);
            let a = ev.m_exact(&xi).unwrap();
            let b = m_bruteforce(5, 4, &xi).unwrap();
            assert!((a - b).norm() <= 1e-10);
        }
        let ev = MultiplierEvaluator::new(4, 3).unwrap();
        let xi = TorusPoint::random(4, &mut rng);
        let shifted = ev.m_exact(&xi.half_shift()).unwrap();
        assert!((shifted + ev.m_exact(&xi).unwrap()).norm() <= 1e-10);
        assert!(matches!(MultiplierEvaluator::new(3, 7), Err(Error::EmptySphere { .. })));
    }

    #[test]
    fn bruteforce_examples() {
        let xi = TorusPoint::new(vec![0.25, 0.25]).unwrap();
        assert!(m_bruteforce(2, 2, &xi).unwrap().norm() < 1e-15);
        let xi = TorusPoint::new(vec![0.1, -0.3, 0.45]).unwrap();
        let expected: f64 = xi.coords().iter().map(|c| (2.0 * PI * c).cos()).sum::<f64>() / 3.0;
        assert!((m_bruteforce(3, 1, &xi).unwrap().re - expected).abs() < 1e-15);
    }

    #[test]
    fn semigroup_examples() {
        let s = semigroup_multipliers(4, 6, &TorusPoint::zero(4)).unwrap();
        assert_eq!((s.p1, s.v_xi.len()), (1.0, 0));
        let half = TorusPoint::zero(4).half_shift();
        for lambda in [5u64, 6] {
            let s = semigroup_multipliers(4, lambda, &half).unwrap();
            let sign = if lambda % 2 == 0 { 1.0 } else { -1.0 };
            assert!((s.p2 - sign).abs() < 1e-15);
            assert_eq!(s.v_xi.len(), 4);
        }
        assert_eq!(p_heat(3.0, &TorusPoint::zero(2)), 1.0);
    }

    #[test]
    fn decomposition_boundaries() {
        let ev = MultiplierEvaluator::new(5, 64).unwrap();
        let mut rng = sample_rng(2, 0);
        let xi = TorusPoint::random(5, &mut rng);
        let n_max = ev.level() + 1;
        assert_eq!(ev.main_term_m1(&xi, 1).unwrap(), Complex64::new(0.0, 0.0));
        assert_eq!(ev.main_term_m2(&xi, n_max).unwrap(), Complex64::new(0.0, 0.0));
        for n in 1..=n_max {
            let dec = ev.decompose(&xi, n).unwrap();
            let back = dec.major_sum + dec.b_term + dec.residual;
            assert!((back - dec.m_exact).norm() <= 1e-12);
        }
        assert!(ev.decompose(&xi, 0).is_err());
        assert!(ev.decompose(&xi, n_max + 1).is_err());
    }

    #[test]
    fn residual_at_zero_matches_truncated_series() {
        let d = 5;
        let lambda = 256;
        let ev = MultiplierEvaluator::new(d, lambda).unwrap();
        let dec = ev.decompose(&TorusPoint::zero(d), ev.level() + 1).unwrap();
        let s = crate::arith::singular_series_at(d, lambda, ev.level()).unwrap();
        let expected = (crate::arith::main_term_log(d, lambda, &s).unwrap() - ev.sphere_count().ln()).exp();
        assert!((dec.major_sum.re - expected).abs() < 1e-12);
        assert!(dec.major_sum.im.abs() < 1e-12);
    }
}
