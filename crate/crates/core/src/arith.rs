//! Farey fractions and arcs, quadratic Gauss sums and the singular series
//! `𝔖_d(λ)` for sums of `d` squares.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::lattice::ThetaTable;
use crate::numeric::{pairwise_sum_complex, CompensatedComplex};
use crate::specfun::ln_gamma_half;
use crate::{Error, Result};

/// Largest Farey level accepted.
pub const MAX_FAREY_LEVEL: u64 = 100_000;
/// Largest truncation level of the singular series.
pub const MAX_SERIES_LEVEL: u64 = 4096;
/// Imaginary parts of `𝔖_d(λ; P)` above this are reported as a truncation failure.
pub const IMAG_TOLERANCE: f64 = 1e-12;

/// A reduced fraction `p/q` with `1 <= p <= q`; `0/1` is written `1/1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReducedFraction {
    p: u64,
    q: u64,
}

impl ReducedFraction {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if p == 0 || p > q || p.gcd(&q) != 1 {
            return Err(Error::NotReduced { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn to_rational(&self) -> Rational64 {
        Rational64::new_raw(self.p as i64, self.q as i64)
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for ReducedFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

fn check_level(n: u64) -> Result<()> {
    if n == 0 || n > MAX_FAREY_LEVEL {
        return Err(Error::SizeLimit {
            what: "Farey level",
            value: n,
            max: MAX_FAREY_LEVEL,
        });
    }
    Ok(())
}

/// `H_N`: all reduced `p/q` with `1 <= p <= q <= N`, ascending.
pub fn farey_sequence(n: u64) -> Result<Vec<ReducedFraction>> {
    check_level(n)?;
    let mut out = Vec::new();
    let (mut a, mut b, mut c, mut d) = (0u64, 1u64, 1u64, n);
    while c <= n {
        out.push(ReducedFraction { p: c, q: d });
        let k = (n + b) / d;
        let (nc, nd) = (k * c - a, k * d - b);
        (a, b, c, d) = (c, d, nc, nd);
        if a == 1 && b == 1 {
            break;
        }
    }
    Ok(out)
}

/// The arc `V_N(p/q)`, as the half-open interval `[lo, hi)`.
///
/// The arc around `1/1` wraps: its endpoints are `N/(N+1)` and `1 + 1/(N+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FareyArc {
    pub center: ReducedFraction,
    pub lo: Rational64,
    pub hi: Rational64,
}

impl FareyArc {
    pub fn length(&self) -> Rational64 {
        self.hi - self.lo
    }

    /// Whether `α` (taken mod 1) lies in the arc.
    pub fn contains(&self, alpha: Rational64) -> bool {
        let frac = alpha - alpha.floor();
        [frac, frac + Rational64::one()]
            .iter()
            .any(|a| self.lo <= *a && *a < self.hi)
    }
}

fn mediant(a: (u64, u64), b: (u64, u64)) -> Rational64 {
    Rational64::new((a.0 + b.0) as i64, (a.1 + b.1) as i64)
}

/// The Farey dissection of `[0, 1)` at level `N`, by mediants of neighbours.
pub fn farey_arcs(n: u64) -> Result<Vec<FareyArc>> {
    let seq = farey_sequence(n)?;
    let k = seq.len();
    let pairs: Vec<(u64, u64)> = seq.iter().map(|f| (f.p, f.q)).collect();
    let mut arcs = Vec::with_capacity(k);
    for i in 0..k {
        let prev = if i == 0 { (0, 1) } else { pairs[i - 1] };
        let lo = mediant(prev, pairs[i]);
        let hi = if i + 1 < k {
            mediant(pairs[i], pairs[i + 1])
        } else {
            Rational64::one() + mediant((0, 1), pairs[0])
        };
        arcs.push(FareyArc {
            center: seq[i],
            lo,
            hi,
        });
    }
    Ok(arcs)
}

/// Checks that the arcs chain without gaps or overlaps, cover a period
/// exactly, and satisfy `|α - p/q| < 1/(2Nq) ⊆ V ⊆ |α - p/q| < 1/(Nq)`.
pub fn check_farey_tiling(n: u64, arcs: &[FareyArc]) -> bool {
    if arcs.is_empty() {
        return false;
    }
    let chained = arcs.windows(2).all(|w| w[0].hi == w[1].lo);
    let total: Rational64 = arcs.iter().map(|a| a.length()).sum();
    let covers = total == Rational64::one() && arcs[arcs.len() - 1].hi - arcs[0].lo == Rational64::one();
    let nested = arcs.iter().all(|a| {
        let c = a.center.to_rational();
        let inner = Rational64::new(1, 2 * n as i64 * a.center.q as i64);
        let outer = Rational64::new(1, n as i64 * a.center.q as i64);
        let (left, right) = (c - a.lo, a.hi - c);
        left >= inner && right >= inner && left <= outer && right <= outer && left > Rational64::zero()
    });
    chained && covers && nested
}

/// Roots of unity `e(k/q)`, `0 <= k < q`, with `e((q-k)/q)` stored as the
/// exact conjugate of `e(k/q)`.
#[derive(Clone, Debug)]
pub struct RootTable {
    q: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1);
        let mut roots = vec![Complex64::zero(); q as usize];
        for k in 0..=(q / 2) {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q as f64);
            roots[k as usize] = z;
            if k != 0 {
                roots[(q - k) as usize] = z.conj();
            }
        }
        roots[0] = Complex64::one();
        if q % 2 == 0 {
            roots[(q / 2) as usize] = Complex64::new(-1.0, 0.0);
        }
        if q % 4 == 0 {
            roots[(q / 4) as usize] = Complex64::i();
            roots[(3 * q / 4) as usize] = -Complex64::i();
        }
        Self { q, roots }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// `e(k/q)` for any integer `k`.
    #[inline]
    pub fn e(&self, k: i128) -> Complex64 {
        self.roots[k.rem_euclid(self.q as i128) as usize]
    }

    /// `g(p, q, m) = q^{-1} Σ_{n=1}^{q} e((n²p + nm)/q)`, summed directly.
    pub fn gauss_1d(&self, p: u64, m: i64) -> Complex64 {
        let q = self.q as i128;
        let p = p as i128 % q;
        let m = (m as i128).rem_euclid(q);
        let mut acc = CompensatedComplex::new();
        for n in 1..=q {
            let r = n % q;
            acc.add(self.roots[((r * r % q * p + r * m) % q) as usize]);
        }
        acc.value() / self.q as f64
    }

    /// `g(p, q, m)` for `m = 0, …, q-1`, by one inverse DFT of `e(pn²/q)`.
    pub fn gauss_row(&self, p: u64) -> Vec<Complex64> {
        let q = self.q as i128;
        let p = p as i128 % q;
        let mut row: Vec<Complex64> = (0..q).map(|n| self.roots[(n * n % q * p % q) as usize]).collect();
        if q > 1 {
            FftPlanner::new().plan_fft_inverse(q as usize).process(&mut row);
        }
        row.iter().map(|z| z / self.q as f64).collect()
    }
}

fn check_coprime(p: u64, q: u64) -> Result<()> {
    ReducedFraction::new(p, q).map(|_| ())
}

/// One-dimensional Gauss sum `q^{-1} Σ_{n=1}^{q} e((n²p + nm)/q)`.
pub fn gauss_sum_1d(p: u64, q: u64, m: i64) -> Result<Complex64> {
    check_coprime(p, q)?;
    Ok(RootTable::new(q).gauss_1d(p, m))
}

/// `G(p/q; x) = Π_j g(p, q, x_j)`.
pub fn gauss_sum(p: u64, q: u64, x: &[i64]) -> Result<Complex64> {
    check_coprime(p, q)?;
    let table = RootTable::new(q);
    Ok(gauss_product(&table, p, x))
}

pub(crate) fn gauss_product(table: &RootTable, p: u64, x: &[i64]) -> Complex64 {
    let q = table.q() as i64;
    let mut cache: Vec<Option<Complex64>> = vec![None; q as usize];
    let mut acc = Complex64::one();
    for &xj in x {
        let m = xj.rem_euclid(q) as usize;
        let g = *cache[m].get_or_insert_with(|| table.gauss_1d(p, m as i64));
        acc *= g;
    }
    acc
}

/// `|(Σ_{m=1}^{q} |g(p,q,m)|²)^d - 1|`, the d-dimensional Parseval deviation
/// through the product structure.
pub fn gauss_parseval_deviation(p: u64, q: u64, d: u32) -> Result<f64> {
    check_coprime(p, q)?;
    let table = RootTable::new(q);
    let mut sum = crate::numeric::CompensatedSum::new();
    for m in 1..=q {
        sum.add(table.gauss_1d(p, m as i64).norm_sqr());
    }
    Ok((sum.value().powi(d as i32) - 1.0).abs())
}

/// Closed-form bound `2^{d/2}[P^{2-d/2}/(d/2-2) + P^{1-d/2}]` on the tail
/// `Σ_{q>P} |A_q|` of the singular series.
pub fn tail_bound(d: usize, level: u64) -> f64 {
    let h = d as f64 / 2.0;
    let p = level as f64;
    2f64.powf(h) * (p.powf(2.0 - h) / (h - 2.0) + p.powf(1.0 - h))
}

/// A truncated singular series `𝔖_d(λ; P)` with its certified tail.
#[derive(Clone, Debug, PartialEq)]
pub struct SingularSeriesValue {
    pub d: usize,
    pub lambda: u64,
    /// Truncation level `P`.
    pub level: u64,
    pub value: f64,
    /// Imaginary part of the computed sum, before it was discarded.
    pub imag: f64,
    pub tail_bound: f64,
}

/// `A_q(λ) = Σ_{p coprime to q} e(-λp/q) g(p,q,0)^d`.
pub fn series_term(d: usize, lambda: u64, q: u64) -> Complex64 {
    let table = RootTable::new(q);
    let qi = q as i128;
    // g(p,q,0) = q^{-1} Σ_s cnt[s] e(ps/q) for every p at once, by one
    // unnormalised inverse DFT of the square-class counts.
    let mut g = vec![Complex64::zero(); q as usize];
    for n in 0..qi {
        g[(n * n % qi) as usize] += 1.0;
    }
    if q > 1 {
        FftPlanner::new().plan_fft_inverse(q as usize).process(&mut g);
    }
    let lam = (lambda as i128) % qi;
    let mut acc = CompensatedComplex::new();
    for p in 1..=q {
        if p.gcd(&q) != 1 {
            continue;
        }
        let gp = g[(p % q) as usize] / q as f64;
        acc.add(table.e(-lam * p as i128) * gp.powu(d as u32));
    }
    acc.value()
}

/// `𝔖_d(λ; P)` at an explicit truncation level.
pub fn singular_series_at(d: usize, lambda: u64, level: u64) -> Result<SingularSeriesValue> {
    if d < 5 {
        return Err(Error::Divergent { d });
    }
    if level == 0 || level > MAX_SERIES_LEVEL {
        return Err(Error::SizeLimit {
            what: "singular series level",
            value: level,
            max: MAX_SERIES_LEVEL,
        });
    }
    let terms: Vec<Complex64> = (1..=level)
        .into_par_iter()
        .map(|q| series_term(d, lambda, q))
        .collect();
    let total = pairwise_sum_complex(&terms);
    if total.im.abs() >= IMAG_TOLERANCE {
        return Err(Error::Truncation(format!(
            "imaginary part {:e} of the truncated series is not negligible",
            total.im
        )));
    }
    if d >= 16 && total.re <= 0.0 {
        return Err(Error::Truncation(format!("non-positive value {} for d = {d}", total.re)));
    }
    Ok(SingularSeriesValue {
        d,
        lambda,
        level,
        value: total.re,
        imag: total.im,
        tail_bound: tail_bound(d, level),
    })
}

/// Least truncation level whose tail bound is at most `target_tail`.
pub fn truncation_level(d: usize, target_tail: f64) -> Result<u64> {
    if d < 5 {
        return Err(Error::Divergent { d });
    }
    if !(target_tail > 0.0) {
        return Err(Error::pre(format!("target tail must be positive, got {target_tail}")));
    }
    if tail_bound(d, MAX_SERIES_LEVEL) > target_tail {
        return Err(Error::Truncation(format!(
            "tail {target_tail:e} needs a level above {MAX_SERIES_LEVEL} in dimension {d}"
        )));
    }
    let (mut lo, mut hi) = (1u64, MAX_SERIES_LEVEL);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if tail_bound(d, mid) <= target_tail {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// `𝔖_d(λ)` truncated at the least level certifying `target_tail`.
pub fn singular_series(d: usize, lambda: u64, target_tail: f64) -> Result<SingularSeriesValue> {
    let level = truncation_level(d, target_tail)?;
    singular_series_at(d, lambda, level)
}

/// `ln[π^{d/2}/Γ(d/2) · λ^{d/2-1} · 𝔖_d(λ)]`.
pub fn main_term_log(d: usize, lambda: u64, series: &SingularSeriesValue) -> Result<f64> {
    if lambda == 0 {
        return Err(Error::pre("main term needs λ >= 1"));
    }
    if !(series.value > 0.0) {
        return Err(Error::Truncation(format!(
            "singular series value {} is not positive",
            series.value
        )));
    }
    let h = d as f64 / 2.0;
    Ok(h * PI.ln() - ln_gamma_half(d as u64) + (h - 1.0) * (lambda as f64).ln() + series.value.ln())
}

/// `R(d, λ) = r_d(λ) / main term`.
pub fn asymptotic_ratio(table: &ThetaTable, d: usize, lambda: u64, series: &SingularSeriesValue) -> Result<f64> {
    let count = table.sphere_count(d, lambda)?;
    Ok((count.log_value - main_term_log(d, lambda, series)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn gauss_row_matches_direct_sums() {
        for q in [1u64, 2, 4, 6, 9, 12, 35, 64] {
            let table = RootTable::new(q);
            for p in (1..=q).filter(|p| p.gcd(&q) == 1) {
                let row = table.gauss_row(p);
                for (m, z) in row.iter().enumerate() {
                    assert!(close(*z, table.gauss_1d(p, m as i64), 1e-14), "{p}/{q}, m = {m}");
                }
            }
        }
    }

    #[test]
    fn farey_examples() {
        let f1: Vec<String> = farey_sequence(1).unwrap().iter().map(|f| f.to_string()).collect();
        assert_eq!(f1, ["1/1"]);
        let f3: Vec<String> = farey_sequence(3).unwrap().iter().map(|f| f.to_string()).collect();
        assert_eq!(f3, ["1/3", "1/2", "2/3", "1/1"]);
        assert_eq!(farey_sequence(5).unwrap().len(), 10);
        assert!(farey_sequence(0).is_err());
        assert!(farey_sequence(MAX_FAREY_LEVEL + 1).is_err());
    }

    #[test]
    fn arc_examples() {
        let a1 = farey_arcs(1).unwrap();
        assert_eq!(a1.len(), 1);
        assert_eq!(a1[0].length(), Rational64::one());
        assert!(a1[0].contains(Rational64::new(0, 1)) && a1[0].contains(Rational64::new(9, 10)));

        let a2 = farey_arcs(2).unwrap();
        assert_eq!((a2[0].lo, a2[0].hi), (Rational64::new(1, 3), Rational64::new(2, 3)));
        assert_eq!((a2[1].lo, a2[1].hi), (Rational64::new(2, 3), Rational64::new(4, 3)));
        assert!(a2[1].contains(Rational64::new(1, 5)));
        assert!(!a2[1].contains(Rational64::new(1, 3)));

        let a3 = farey_arcs(3).unwrap();
        assert_eq!(a3.len(), 4);
        assert_eq!(a3.iter().map(|a| a.length()).sum::<Rational64>(), Rational64::one());
        for n in 1..60 {
            assert!(check_farey_tiling(n, &farey_arcs(n).unwrap()), "N={n}");
        }
    }

    #[test]
    fn gauss_examples() {
        let one = Complex64::one();
        assert!(close(gauss_sum_1d(1, 1, 0).unwrap(), one, 1e-15));
        assert!(close(gauss_sum_1d(1, 2, 0).unwrap(), Complex64::zero(), 1e-15));
        assert!(close(gauss_sum_1d(1, 2, 1).unwrap(), one, 1e-15));
        let g = gauss_sum_1d(1, 3, 0).unwrap();
        assert!(close(g, Complex64::new(0.0, 1.0 / 3f64.sqrt()), 1e-15));
        assert!(close(gauss_sum(1, 1, &[3, -7, 2]).unwrap(), one, 1e-15));
        assert!(close(gauss_sum(1, 2, &[1, 1, 1]).unwrap(), one, 1e-15));
        assert!(close(gauss_sum(1, 2, &[1, 2, 1]).unwrap(), Complex64::zero(), 1e-15));
        assert!(close(gauss_sum(1, 3, &[0, 0]).unwrap(), Complex64::new(-1.0 / 3.0, 0.0), 1e-15));
        assert!(matches!(gauss_sum_1d(2, 4, 0), Err(Error::NotReduced { .. })));
    }

    #[test]
    fn parseval_examples() {
        assert_eq!(gauss_parseval_deviation(1, 1, 3).unwrap(), 0.0);
        assert!(gauss_parseval_deviation(1, 2, 2).unwrap() <= 1e-12);
        assert!(gauss_parseval_deviation(2, 5, 1).unwrap() <= 1e-12);
    }

    #[test]
    fn series_terms() {
        // A_2 vanishes in dimension 16: g(1,2,0) = 0.
        assert_eq!(series_term(16, 5, 2), Complex64::zero());
        assert_eq!(series_term(16, 5, 1), Complex64::one());
        let s = singular_series(16, 1, 1e-10).unwrap();
        assert!((0.5..=1.5).contains(&s.value));
        assert!(s.tail_bound <= 1e-10);
        let s = singular_series(24, 7, 1e-10).unwrap();
        assert!((s.value - 1.0).abs() <= 0.5);
        assert!(matches!(singular_series(4, 1, 1e-3), Err(Error::Divergent { d: 4 })));
    }

    #[test]
    fn truncation_levels_are_minimal() {
        for d in [5usize, 8, 16, 24] {
            let target = match d {
                5 => 0.5,
                8 => 1e-5,
                _ => 1e-10,
            };
            let p = truncation_level(d, target).unwrap();
            assert!(tail_bound(d, p) <= target);
            if p > 1 {
                assert!(tail_bound(d, p - 1) > target);
            }
        }
        assert!(matches!(truncation_level(5, 1e-10), Err(Error::Truncation(_))));
    }

    #[test]
    fn main_term_requires_positive_mass() {
        let s = singular_series(16, 1, 1e-10).unwrap();
        assert!(main_term_log(16, 0, &s).is_err());
        assert!(main_term_log(16, 1, &s).unwrap().is_finite());
    }
}
