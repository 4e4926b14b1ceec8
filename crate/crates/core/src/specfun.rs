//! Special functions: log-gamma at half-integers, Bessel `J_ν` for
//! half-integer orders, the normalised Fourier transform of the sphere
//! `S^{r-1}`, and Krawtchouk polynomials in exact rational arithmetic.

use std::f64::consts::PI;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::numeric::{first_max, ln_abs_bigint, ln_biguint, pairwise_sum};
use crate::{Error, Result};

/// The exponent `c` in the `e^{-c r}` term of the decay envelope.
pub const DECAY_EXPONENT: f64 = 0.1;
/// Absolute floor used when comparing the two transform routes.
pub const CROSS_CHECK_ABS_FLOOR: f64 = 1e-13;
/// Relative tolerance of the cross-method contract.
pub const CROSS_CHECK_REL_TOL: f64 = 1e-8;

/// `ln Γ(k/2)` for an integer `k >= 1`, by exact product expansion.
pub fn ln_gamma_half(k: u64) -> f64 {
    assert!(k >= 1, "ln_gamma_half needs k >= 1");
    if k % 2 == 0 {
        // Γ(n) = (n-1)!
        let n = k / 2;
        pairwise_sum(&(2..n).map(|i| (i as f64).ln()).collect::<Vec<_>>())
    } else {
        // Γ(m + 1/2) = √π · Π_{j<m} (j + 1/2)
        let m = (k - 1) / 2;
        let mut terms: Vec<f64> = (0..m).map(|j| (j as f64 + 0.5).ln()).collect();
        terms.push(0.5 * PI.ln());
        pairwise_sum(&terms)
    }
}

/// `ln σ(S^{r-1}) = ln(2π^{r/2}/Γ(r/2))`.
pub fn ln_sphere_area(r: u64) -> f64 {
    assert!(r >= 1, "sphere dimension must be positive");
    std::f64::consts::LN_2 + 0.5 * r as f64 * PI.ln() - ln_gamma_half(r)
}

/// Surface measure `σ(S^{r-1})` of the unit sphere in `R^r`.
pub fn sphere_area(r: u64) -> f64 {
    ln_sphere_area(r).exp()
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    /// Kronrod estimate of `∫|f|`, which sets the rounding floor.
    magnitude: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut magnitude = fc.abs() * WGK[7];
    for (j, (&x, &wk)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        kronrod += wk * (f1 + f2);
        magnitude += wk * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    Panel {
        a,
        b,
        value: kronrod * h,
        error: ((kronrod - gauss) * h).abs(),
        magnitude: magnitude * h,
    }
}

/// Errors below this many ulps of `∫|f|` are indistinguishable from rounding.
const ROUNDING_FLOOR: f64 = 50.0;

/// Adaptive Gauss–Kronrod (7/15) quadrature options.
#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_panels: usize,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-12,
            initial_panels: 4,
            max_panels: 20_000,
        }
    }
}

/// Result of a quadrature: value and error estimate.
#[derive(Clone, Copy, Debug)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

impl Quadrature {
    /// Integrates `f` over `[a, b]`, bisecting the panel with the largest
    /// error estimate until the total estimate meets the tolerance.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        let n = self.initial_panels.max(1);
        let width = (b - a) / n as f64;
        let mut panels: Vec<Panel> = (0..n)
            .map(|i| {
                let lo = a + width * i as f64;
                let hi = if i + 1 == n { b } else { a + width * (i + 1) as f64 };
                gk15(&f, lo, hi)
            })
            .collect();
        loop {
            let value = pairwise_sum(&panels.iter().map(|p| p.value).collect::<Vec<_>>());
            let error = pairwise_sum(&panels.iter().map(|p| p.error).collect::<Vec<_>>());
            let magnitude = pairwise_sum(&panels.iter().map(|p| p.magnitude).collect::<Vec<_>>());
            let target = self
                .abs_tol
                .max(self.rel_tol * value.abs())
                .max(ROUNDING_FLOOR * f64::EPSILON * magnitude);
            if error <= target {
                return Ok(Integral { value, error });
            }
            if panels.len() >= self.max_panels {
                return Err(Error::Accuracy {
                    achieved: error,
                    requested: target,
                });
            }
            let errs: Vec<f64> = panels.iter().map(|p| p.error).collect();
            let (worst, _) = first_max(&errs).expect("panels are never empty");
            let p = panels[worst];
            let mid = 0.5 * (p.a + p.b);
            if !(mid > p.a && mid < p.b) {
                return Err(Error::Accuracy {
                    achieved: error,
                    requested: target,
                });
            }
            panels[worst] = gk15(&f, p.a, mid);
            panels.insert(worst + 1, gk15(&f, mid, p.b));
        }
    }
}

/// `ln((u/2)^ν / (Γ(ν + 1/2) √π))` with `ν = two_nu / 2`.
fn ln_poisson_prefactor(two_nu: u64, u: f64) -> f64 {
    let nu = two_nu as f64 / 2.0;
    nu * (0.5 * u).ln() - ln_gamma_half(two_nu + 1) - 0.5 * PI.ln()
}

/// `∫_{-1}^{1} cos(u s) (1 - s²)^{ν - 1/2} ds` after the substitution
/// `s = 1 - w²`, which removes the endpoint singularity at `ν = 0`.
fn poisson_integral(two_nu: u64, u: f64) -> Result<f64> {
    let nu = two_nu as f64 / 2.0;
    let quad = Quadrature {
        initial_panels: (4.0 * u.abs() / (2.0 * PI)).ceil().max(4.0) as usize,
        ..Quadrature::default()
    };
    let f = |w: f64| {
        let w2 = w * w;
        let mut ln_weight = (nu - 0.5) * (2.0 - w2).ln();
        if two_nu > 0 {
            ln_weight += 2.0 * nu * w.ln();
        }
        2.0 * (u * (1.0 - w2)).cos() * ln_weight.exp()
    };
    Ok(2.0 * quad.integrate(f, 0.0, 1.0)?.value)
}

/// Bessel function `J_ν(u)` for half-integer `ν = two_nu / 2 >= 0` and
/// `u >= 0`, from the Poisson integral representation.
pub fn bessel_j(two_nu: u64, u: f64) -> Result<f64> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::pre(format!("Bessel argument must be finite and >= 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(if two_nu == 0 { 1.0 } else { 0.0 });
    }
    Ok(ln_poisson_prefactor(two_nu, u).exp() * poisson_integral(two_nu, u)?)
}

/// Evaluation route for the spherical Fourier transform.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// `2π σ^{-1} ρ^{1-r/2} J_{r/2-1}(2πρ)`.
    BesselFormula,
    /// `∫_0^{π/2} cos(2πρ cos θ) sin^{r-2}θ dθ`, normalised by its value at `ρ = 0`.
    IntervalQuadrature,
}

/// The radial function `ρ ↦ ℱμ(η)`, `|η| = ρ`, of the normalised surface
/// measure `μ` on `S^{r-1}`.
#[derive(Clone, Copy, Debug)]
pub struct SphericalFT {
    pub r: u64,
    pub method: Method,
}

impl SphericalFT {
    pub fn new(r: u64, method: Method) -> Result<Self> {
        if r < 2 {
            return Err(Error::pre(format!("sphere transform needs r >= 2, got {r}")));
        }
        Ok(Self { r, method })
    }

    /// `ℱμ(ρ)`; equals 1 at `ρ = 0` and is even in `ρ`.
    pub fn eval(&self, rho: f64) -> Result<f64> {
        if !rho.is_finite() {
            return Err(Error::pre(format!("radius must be finite, got {rho}")));
        }
        let rho = rho.abs();
        if rho == 0.0 {
            return Ok(1.0);
        }
        match self.method {
            Method::BesselFormula => self.bessel_route(rho),
            Method::IntervalQuadrature => self.interval_route(rho),
        }
    }

    /// `ℱσ(ρ) = σ(S^{r-1}) · ℱμ(ρ)`.
    pub fn eval_sigma(&self, rho: f64) -> Result<f64> {
        Ok(sphere_area(self.r) * self.eval(rho)?)
    }

    fn bessel_route(&self, rho: f64) -> Result<f64> {
        let r = self.r as f64;
        let two_nu = self.r - 2;
        let u = 2.0 * PI * rho;
        let ln_scale = (2.0 * PI).ln() - ln_sphere_area(self.r) + (1.0 - r / 2.0) * rho.ln()
            + ln_poisson_prefactor(two_nu, u);
        Ok(ln_scale.exp() * poisson_integral(two_nu, u)?)
    }

    fn interval_route(&self, rho: f64) -> Result<f64> {
        let power = (self.r - 2) as i32;
        let u = 2.0 * PI * rho;
        let quad = Quadrature {
            initial_panels: (4.0 * rho).ceil().max(4.0) as usize,
            ..Quadrature::default()
        };
        let half_pi = 0.5 * PI;
        let num = quad.integrate(|th| (u * th.cos()).cos() * th.sin().powi(power), 0.0, half_pi)?;
        let den = Quadrature::default().integrate(|th| th.sin().powi(power), 0.0, half_pi)?;
        Ok(num.value / den.value)
    }
}

/// `ℱμ^r(ρ)` through the Bessel formula.
pub fn fourier_sphere(r: u64, rho: f64) -> Result<f64> {
    SphericalFT::new(r, Method::BesselFormula)?.eval(rho)
}

/// `ℱσ^r(ρ)`, the transform of the unnormalised surface measure.
pub fn fourier_sigma(r: u64, rho: f64) -> Result<f64> {
    SphericalFT::new(r, Method::BesselFormula)?.eval_sigma(rho)
}

/// Whether the two routes agree at `(r, ρ)` under the cross-check contract.
pub fn routes_agree(a: f64, b: f64) -> bool {
    (a - b).abs() <= CROSS_CHECK_REL_TOL * a.abs().max(b.abs()) + CROSS_CHECK_ABS_FLOOR
}

/// Smallest constants making both decay envelopes hold on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierDecayReport {
    pub r: u64,
    /// `max |ℱμ(ρ)| / (e^{-2πρ/√r} + e^{-r/10})`
    pub a_exp: f64,
    pub argmax_exp: f64,
    /// `max |ℱμ(ρ)| · (ρ/√r)^{1/2}` over `ρ > 0`; zero if the grid has no positive point.
    pub a_pow: f64,
    pub argmax_pow: f64,
}

pub fn check_fourier_decay(r: u64, rho_grid: &[f64]) -> Result<FourierDecayReport> {
    let ft = SphericalFT::new(r, Method::BesselFormula)?;
    if let Some(bad) = rho_grid.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
        return Err(Error::pre(format!("grid values must be finite and >= 0, got {bad}")));
    }
    let sr = (r as f64).sqrt();
    let values = rho_grid.iter().map(|&rho| ft.eval(rho)).collect::<Result<Vec<_>>>()?;
    let exp_ratios: Vec<f64> = rho_grid
        .iter()
        .zip(&values)
        .map(|(&rho, v)| v.abs() / ((-2.0 * PI * rho / sr).exp() + (-DECAY_EXPONENT * r as f64).exp()))
        .collect();
    let pow_ratios: Vec<f64> = rho_grid
        .iter()
        .zip(&values)
        .map(|(&rho, v)| if rho > 0.0 { v.abs() * (rho / sr).sqrt() } else { 0.0 })
        .collect();
    let (ie, a_exp) = first_max(&exp_ratios).unwrap_or((0, 0.0));
    let (ip, a_pow) = first_max(&pow_ratios).unwrap_or((0, 0.0));
    Ok(FourierDecayReport {
        r,
        a_exp,
        argmax_exp: rho_grid.get(ie).copied().unwrap_or(0.0),
        a_pow,
        argmax_pow: rho_grid.get(ip).copied().unwrap_or(0.0),
    })
}

/// Largest `n` accepted by [`krawtchouk`].
pub const KRAWTCHOUK_MAX_N: u64 = 512;
/// Largest `n_max` accepted by [`krawtchouk_bound_scan`].
pub const KRAWTCHOUK_SCAN_MAX_N: u64 = 128;

/// Binomial coefficient by the multiplicative formula.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `𝕂_k^{(n)}(x)` as an exact rational.
#[derive(Clone, Debug, PartialEq)]
pub struct KrawtchoukValue {
    pub n: u64,
    pub k: u64,
    pub x: u64,
    pub value: BigRational,
}

/// `𝕂_k^{(n)}(x) = binom(n,k)^{-1} Σ_j (-1)^j binom(x,j) binom(n-x,k-j)`.
pub fn krawtchouk(n: u64, k: u64, x: u64) -> Result<KrawtchoukValue> {
    if n > KRAWTCHOUK_MAX_N {
        return Err(Error::pre(format!("Krawtchouk degree n = {n} exceeds {KRAWTCHOUK_MAX_N}")));
    }
    if k > n || x > n {
        return Err(Error::pre(format!("Krawtchouk needs 0 <= k, x <= n, got n={n} k={k} x={x}")));
    }
    let mut num = BigInt::zero();
    for j in 0..=k.min(x) {
        let term = BigInt::from(binomial(x, j) * binomial(n - x, k - j));
        if j % 2 == 0 {
            num += term;
        } else {
            num -= term;
        }
    }
    Ok(KrawtchoukValue {
        n,
        k,
        x,
        value: BigRational::new(num, BigInt::from(binomial(n, k))),
    })
}

/// All Krawtchouk numerators `N_k(x) = binom(n,k) 𝕂_k^{(n)}(x)` for one `n`,
/// indexed `[x][k]`.
///
/// `N_k(x)` is the coefficient of `z^k` in `(1 - z)^x (1 + z)^{n - x}`; each
/// row is obtained from the previous one by multiplying with `(1 - z)/(1 + z)`.
pub fn krawtchouk_numerators(n: u64) -> Vec<Vec<BigInt>> {
    let n = n as usize;
    let mut row: Vec<BigInt> = (0..=n as u64).map(|k| BigInt::from(binomial(n as u64, k))).collect();
    let mut rows = Vec::with_capacity(n + 1);
    for _ in 0..n {
        // divide by (1 + z)
        let mut q = vec![BigInt::zero(); n];
        for k in 0..n {
            q[k] = if k == 0 { row[0].clone() } else { &row[k] - &q[k - 1] };
        }
        let mut next = vec![BigInt::zero(); n + 1];
        for k in 0..=n {
            let hi = if k < n { q[k].clone() } else { BigInt::zero() };
            let lo = if k > 0 { q[k - 1].clone() } else { BigInt::zero() };
            next[k] = hi - lo;
        }
        rows.push(std::mem::replace(&mut row, next));
    }
    rows.push(row);
    rows
}

/// Outcome of scanning the uniform bound `|𝕂_k^{(n)}(x)| <= e^{-ckx/n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrawtchoukScan {
    pub n_max: u64,
    /// `min -(n/(kx)) ln|𝕂_k^{(n)}(x)|` over non-zero values with `1 <= x, k <= n/2`.
    pub c_min: f64,
    pub argmin: (u64, u64, u64),
    /// Number of `(n, k, x)` in range with `𝕂 = 0`.
    pub zeros: u64,
    pub evaluated: u64,
}

pub fn krawtchouk_bound_scan(n_max: u64) -> Result<KrawtchoukScan> {
    if n_max > KRAWTCHOUK_SCAN_MAX_N {
        return Err(Error::pre(format!("scan limit n_max = {n_max} exceeds {KRAWTCHOUK_SCAN_MAX_N}")));
    }
    if n_max < 2 {
        return Err(Error::pre("scan needs n_max >= 2"));
    }
    let mut c_min = f64::INFINITY;
    let mut argmin = (0, 0, 0);
    let mut zeros = 0;
    let mut evaluated = 0;
    for n in 2..=n_max {
        let nums = krawtchouk_numerators(n);
        let ln_binom: Vec<f64> = (0..=n).map(|k| ln_biguint(&binomial(n, k))).collect();
        for x in 1..=n / 2 {
            for k in 1..=n / 2 {
                let num = &nums[x as usize][k as usize];
                evaluated += 1;
                if num.is_zero() {
                    zeros += 1;
                    continue;
                }
                let ln_abs = ln_abs_bigint(num) - ln_binom[k as usize];
                let c = -(n as f64) / ((k * x) as f64) * ln_abs;
                if c < c_min {
                    c_min = c;
                    argmin = (n, k, x);
                }
            }
        }
    }
    Ok(KrawtchoukScan {
        n_max,
        c_min,
        argmin,
        zeros,
        evaluated,
    })
}

/// Exact symmetry `𝕂_k(x) = 𝕂_x(k)` in the numerator form
/// `N_k(x) binom(n,x) = N_x(k) binom(n,k)`, for all `k, x <= n`.
pub fn krawtchouk_symmetric(n: u64, nums: &[Vec<BigInt>]) -> bool {
    let binom: Vec<BigInt> = (0..=n).map(|k| BigInt::from(binomial(n, k))).collect();
    (0..=n as usize).all(|x| {
        (0..=n as usize).all(|k| &nums[x][k] * &binom[x] == &nums[k][x] * &binom[k])
    })
}

/// Exact reflection `𝕂_k(n - x) = (-1)^k 𝕂_k(x)` for all `k, x <= n`.
pub fn krawtchouk_reflects(n: u64, nums: &[Vec<BigInt>]) -> bool {
    let n = n as usize;
    (0..=n).all(|x| {
        (0..=n).all(|k| {
            let a = &nums[n - x][k];
            let b = &nums[x][k];
            if k % 2 == 0 {
                a == b
            } else {
                *a == -b
            }
        })
    })
}

/// `|𝕂| <= 1` on the whole range, compared exactly.
pub fn krawtchouk_bounded(n: u64, nums: &[Vec<BigInt>]) -> bool {
    (0..=n).all(|k| {
        let b = BigInt::from(binomial(n, k));
        (0..=n as usize).all(|x| nums[x][k as usize].abs() <= b)
    })
}
