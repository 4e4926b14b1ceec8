//! Lattice points on spheres and in balls of `Z^d`.
//!
//! Counts come from the theta table `r_j(m) = |{x ∈ Z^j : |x|^2 = m}|`,
//! built by repeatedly convolving with the one-dimensional row (which is
//! supported on the perfect squares). Brute-force enumeration by pruned
//! depth-first search serves as the independent oracle.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::numeric::ln_biguint;
use crate::{Error, Result};

/// Largest supported dimension of a theta table.
pub const MAX_DIM: usize = 64;
/// Largest supported mass `Λ` of a theta table.
pub const MAX_MASS: u64 = 1 << 22;
/// Default cap on the number of enumerated sphere points.
pub const DEFAULT_ENUM_CAP: u64 = 10_000_000;
/// Enumeration limits.
pub const ENUM_MAX_DIM: usize = 10;
pub const ENUM_MAX_MASS: u64 = 400;

/// Integer square root.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let n = n as u128;
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r as u64
}

#[derive(Clone, Debug)]
enum Row {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

impl Row {
    fn get(&self, m: usize) -> BigUint {
        match self {
            Row::Small(v) => BigUint::from(v[m]),
            Row::Big(v) => v[m].clone(),
        }
    }

    fn is_zero(&self, m: usize) -> bool {
        match self {
            Row::Small(v) => v[m] == 0,
            Row::Big(v) => v[m].is_zero(),
        }
    }

    fn to_f64(&self, m: usize) -> f64 {
        match self {
            Row::Small(v) => v[m] as f64,
            Row::Big(v) => v[m].to_f64().unwrap_or(f64::INFINITY),
        }
    }

    fn to_big(&self) -> Vec<BigUint> {
        match self {
            Row::Small(v) => v.iter().map(|&x| BigUint::from(x)).collect(),
            Row::Big(v) => v.clone(),
        }
    }
}

/// Representation counts `r_j(m)` for `1 <= j <= dim_max`, `0 <= m <= mass_max`.
///
/// Immutable once built. Rows whose entries provably fit in 126 bits are
/// stored as `u128`, the rest as [`BigUint`].
#[derive(Clone, Debug)]
pub struct ThetaTable {
    dim_max: usize,
    mass_max: usize,
    rows: Vec<Row>,
}

impl ThetaTable {
    /// Builds the table by iterated sparse convolution, `O(d·Λ·√Λ)`.
    pub fn build(dim_max: usize, mass_max: u64) -> Result<Self> {
        if dim_max == 0 || dim_max > MAX_DIM {
            return Err(Error::SizeLimit {
                what: "dimension",
                value: dim_max as u64,
                max: MAX_DIM as u64,
            });
        }
        if mass_max > MAX_MASS {
            return Err(Error::SizeLimit {
                what: "mass",
                value: mass_max,
                max: MAX_MASS,
            });
        }
        let len = mass_max as usize + 1;
        let root = isqrt(mass_max) as usize;

        let mut first = vec![0u128; len];
        first[0] = 1;
        for k in 1..=root {
            first[k * k] = 2;
        }
        let mut rows = vec![Row::Small(first)];

        // r_j(m) <= (2⌊√Λ⌋ + 1)^j, the number of points in the enclosing cube.
        let cube_bits = ((2 * root + 1) as f64).log2();
        for j in 2..=dim_max {
            let prev = rows.last().expect("at least one row");
            let fits = (j as f64) * cube_bits < 126.0;
            let next = match (prev, fits) {
                (Row::Small(p), true) => Row::Small(convolve_square_row_u128(p, root)),
                (p, _) => Row::Big(convolve_square_row_big(&p.to_big(), root)),
            };
            rows.push(next);
        }
        Ok(Self {
            dim_max,
            mass_max: mass_max as usize,
            rows,
        })
    }

    pub fn dim_max(&self) -> usize {
        self.dim_max
    }

    pub fn mass_max(&self) -> u64 {
        self.mass_max as u64
    }

    fn check(&self, d: usize, lambda: u64) -> Result<()> {
        if d == 0 || d > self.dim_max {
            return Err(Error::OutOfRange {
                what: "dimension",
                value: d as u64,
                max: self.dim_max as u64,
            });
        }
        if lambda > self.mass_max as u64 {
            return Err(Error::OutOfRange {
                what: "mass",
                value: lambda,
                max: self.mass_max as u64,
            });
        }
        Ok(())
    }

    /// Exact `r_d(m)`.
    pub fn get(&self, d: usize, m: u64) -> Result<BigUint> {
        self.check(d, m)?;
        Ok(self.rows[d - 1].get(m as usize))
    }

    /// `r_d(m)` rounded to `f64`.
    pub fn get_f64(&self, d: usize, m: u64) -> Result<f64> {
        self.check(d, m)?;
        Ok(self.rows[d - 1].to_f64(m as usize))
    }

    pub fn is_zero(&self, d: usize, m: u64) -> Result<bool> {
        self.check(d, m)?;
        Ok(self.rows[d - 1].is_zero(m as usize))
    }

    /// The full row `r_d(0..=Λ)`.
    pub fn row(&self, d: usize) -> Result<Vec<BigUint>> {
        self.check(d, 0)?;
        Ok(self.rows[d - 1].to_big())
    }

    /// `|S_√λ ∩ Z^d| = r_d(λ)`.
    pub fn sphere_count(&self, d: usize, lambda: u64) -> Result<BigCount> {
        Ok(BigCount::new(self.get(d, lambda)?))
    }

    /// `|B_√λ ∩ Z^d| = Σ_{m <= λ} r_d(m)`.
    pub fn ball_count(&self, d: usize, lambda: u64) -> Result<BigCount> {
        self.check(d, lambda)?;
        let row = &self.rows[d - 1];
        let total = match row {
            Row::Small(v) => {
                let mut acc = BigUint::zero();
                let mut small: u128 = 0;
                for &x in &v[..=lambda as usize] {
                    match small.checked_add(x) {
                        Some(s) => small = s,
                        None => {
                            acc += small;
                            small = x;
                        }
                    }
                }
                acc + small
            }
            Row::Big(v) => v[..=lambda as usize].iter().sum(),
        };
        Ok(BigCount::new(total))
    }

    /// `Σ_{l <= λ} r_a(l) · r_b(λ - l)`, computed from the rows `a` and `b`
    /// independently of how row `a + b` was built.
    pub fn split_convolution(&self, a: usize, b: usize, lambda: u64) -> Result<BigUint> {
        self.check(a, lambda)?;
        self.check(b, lambda)?;
        let ra = &self.rows[a - 1];
        let rb = &self.rows[b - 1];
        let lam = lambda as usize;
        Ok((0..=lam)
            .filter(|&l| !ra.is_zero(l) && !rb.is_zero(lam - l))
            .map(|l| ra.get(l) * rb.get(lam - l))
            .sum())
    }

    /// Verifies `r_d(λ) = Σ_l r_r(l) r_{d-r}(λ - l)` exactly.
    pub fn check_slice_identity(&self, d: usize, r: usize, lambda: u64) -> Result<bool> {
        if r == 0 || r >= d {
            return Err(Error::pre(format!("slice dimension r = {r} must satisfy 1 <= r < d = {d}")));
        }
        self.check(d, lambda)?;
        Ok(self.split_convolution(r, d - r, lambda)? == self.get(d, lambda)?)
    }

    /// Exact check of the ball/sphere sandwich
    /// `|B_t(d-4)| <= |S_t(d)| <= |B_t(d)| <= (2t+1)^4 |S_t(d)|` with `t = √λ`.
    pub fn check_ball_sphere_bounds(&self, d: usize, lambda: u64) -> Result<BallSphereReport> {
        if d < 5 {
            return Err(Error::pre(format!("ball/sphere comparison needs d >= 5, got {d}")));
        }
        if lambda == 0 {
            return Err(Error::pre("ball/sphere comparison needs λ >= 1"));
        }
        let lhs = self.ball_count(d - 4, lambda)?.value;
        let mid = self.sphere_count(d, lambda)?.value;
        let rhs = self.ball_count(d, lambda)?.value;
        let upper_ok = le_times_fourth_power(&rhs, &mid, lambda);
        let ok = lhs <= mid && mid <= rhs && upper_ok;
        Ok(BallSphereReport {
            d,
            lambda,
            lhs,
            mid,
            rhs,
            upper_ok,
            ok,
        })
    }

    /// CSV rows `(d, lambda, r_d_lambda_decimal)` for `0 <= λ <= Λ`.
    pub fn write_row_csv<W: Write>(&self, d: usize, out: W) -> Result<()> {
        self.check(d, 0)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["d", "lambda", "r_d_lambda_decimal"])?;
        let row = &self.rows[d - 1];
        for m in 0..=self.mass_max {
            w.write_record([d.to_string(), m.to_string(), row.get(m).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn convolve_square_row_u128(prev: &[u128], root: usize) -> Vec<u128> {
    let mut next = prev.to_vec();
    for k in 1..=root {
        let s = k * k;
        for (dst, &src) in next[s..].iter_mut().zip(prev.iter()) {
            *dst += 2 * src;
        }
    }
    next
}

fn convolve_square_row_big(prev: &[BigUint], root: usize) -> Vec<BigUint> {
    let mut next = prev.to_vec();
    for k in 1..=root {
        let s = k * k;
        for (dst, src) in next[s..].iter_mut().zip(prev.iter()) {
            if !src.is_zero() {
                *dst += src << 1u32;
            }
        }
    }
    next
}

/// Decides `b <= (2√λ + 1)^4 · s` in integers.
///
/// `(2√λ+1)^4 = (16λ² + 24λ + 1) + (32λ + 8)√λ`, so with
/// `a = b - s(16λ² + 24λ + 1)` and `c = s(32λ + 8)` the claim is `a <= c√λ`,
/// which for `a > 0` is `a² <= c²λ`.
fn le_times_fourth_power(b: &BigUint, s: &BigUint, lambda: u64) -> bool {
    let l = BigUint::from(lambda);
    let rational = &l * &l * 16u32 + &l * 24u32 + 1u32;
    let base = s * rational;
    if *b <= base {
        return true;
    }
    let a = b - base;
    let c = s * (&l * 32u32 + 8u32);
    &a * &a <= &c * &c * l
}

/// An exact count together with its natural logarithm.
#[derive(Clone, Debug, PartialEq)]
pub struct BigCount {
    pub value: BigUint,
    /// `ln(value)`, `-inf` when the value is zero.
    pub log_value: f64,
}

impl BigCount {
    pub fn new(value: BigUint) -> Self {
        let log_value = ln_biguint(&value);
        Self { value, log_value }
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.fmt(f)
    }
}

#[derive(Clone, Debug)]
pub struct BallSphereReport {
    pub d: usize,
    pub lambda: u64,
    /// `|B_t(d-4) ∩ Z^{d-4}|`
    pub lhs: BigUint,
    /// `|S_t ∩ Z^d|`
    pub mid: BigUint,
    /// `|B_t(d) ∩ Z^d|`
    pub rhs: BigUint,
    /// `rhs <= (2t+1)^4 · mid`
    pub upper_ok: bool,
    pub ok: bool,
}

fn check_enum_limits(d: usize, lambda: u64) -> Result<()> {
    if d == 0 || d > ENUM_MAX_DIM {
        return Err(Error::SizeLimit {
            what: "enumeration dimension",
            value: d as u64,
            max: ENUM_MAX_DIM as u64,
        });
    }
    if lambda > ENUM_MAX_MASS {
        return Err(Error::SizeLimit {
            what: "enumeration mass",
            value: lambda,
            max: ENUM_MAX_MASS,
        });
    }
    Ok(())
}

fn check_capacity(table: &ThetaTable, d: usize, lambda: u64, cap: u64) -> Result<()> {
    let count = table.get(d, lambda)?;
    if count > BigUint::from(cap) {
        return Err(Error::Capacity {
            d,
            lambda,
            count: count.to_string(),
            cap,
        });
    }
    Ok(())
}

/// Visits every `x ∈ Z^d` with `|x|^2 = λ` in lexicographic order.
///
/// Depth-first over coordinates; a branch is cut as soon as the remaining
/// mass is not a sum of squares in the remaining coordinates.
pub fn for_each_sphere_point<F: FnMut(&[i64])>(d: usize, lambda: u64, mut visit: F) -> Result<()> {
    if d == 0 {
        return Err(Error::pre("dimension must be positive"));
    }
    let table = ThetaTable::build(d, lambda)?;
    let mut point = vec![0i64; d];
    walk(&table, 0, lambda, &mut point, &mut visit);
    Ok(())
}

fn walk<F: FnMut(&[i64])>(table: &ThetaTable, pos: usize, rem: u64, point: &mut [i64], visit: &mut F) {
    let d = point.len();
    if pos == d {
        if rem == 0 {
            visit(point);
        }
        return;
    }
    let left = d - pos - 1;
    let a = isqrt(rem) as i64;
    for v in -a..=a {
        let rest = rem - (v * v) as u64;
        let reachable = if left == 0 {
            rest == 0
        } else {
            !table.rows[left - 1].is_zero(rest as usize)
        };
        if reachable {
            point[pos] = v;
            walk(table, pos + 1, rest, point, visit);
        }
    }
}

/// All lattice points on the sphere `|x|^2 = λ`, lexicographically sorted.
pub fn enumerate_sphere(d: usize, lambda: u64, cap: u64) -> Result<Vec<Vec<i64>>> {
    check_enum_limits(d, lambda)?;
    let table = ThetaTable::build(d, lambda)?;
    check_capacity(&table, d, lambda, cap)?;
    let mut out = Vec::new();
    let mut point = vec![0i64; d];
    walk(&table, 0, lambda, &mut point, &mut |x: &[i64]| out.push(x.to_vec()));
    Ok(out)
}

/// A sign/permutation orbit of sphere points, represented by its
/// non-increasing vector of absolute values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Orbit {
    pub abs_values: Vec<u64>,
    /// Number of lattice points in the orbit.
    pub size: u128,
}

/// The sign/permutation orbits partitioning `S_√λ ∩ Z^d`.
pub fn sphere_orbits(d: usize, lambda: u64) -> Result<Vec<Orbit>> {
    if d == 0 {
        return Err(Error::pre("dimension must be positive"));
    }
    if d > 30 {
        return Err(Error::SizeLimit {
            what: "orbit dimension",
            value: d as u64,
            max: 30,
        });
    }
    let mut out = Vec::new();
    let mut parts = Vec::with_capacity(d);
    orbit_walk(d, lambda, isqrt(lambda), &mut parts, &mut out);
    Ok(out)
}

fn orbit_walk(d: usize, rem: u64, max_part: u64, parts: &mut Vec<u64>, out: &mut Vec<Orbit>) {
    if parts.len() == d {
        if rem == 0 {
            out.push(Orbit {
                abs_values: parts.clone(),
                size: orbit_size(parts),
            });
        }
        return;
    }
    let slots = (d - parts.len()) as u64;
    let top = max_part.min(isqrt(rem));
    for v in (0..=top).rev() {
        // Largest remaining part is v, so the rest can carry at most slots·v².
        if slots * v * v < rem {
            break;
        }
        parts.push(v);
        orbit_walk(d, rem - v * v, v, parts, out);
        parts.pop();
    }
}

fn orbit_size(parts: &[u64]) -> u128 {
    let d = parts.len() as u128;
    let mut size: u128 = (1..=d).product();
    let mut i = 0;
    while i < parts.len() {
        let mut j = i;
        while j < parts.len() && parts[j] == parts[i] {
            j += 1;
        }
        size /= (1..=(j - i) as u128).product::<u128>();
        if parts[i] != 0 {
            size <<= j - i;
        }
        i = j;
    }
    size
}

/// Coordinate-profile statistics of the lattice sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileHistogram {
    pub d: usize,
    pub lambda: u64,
    pub total: u128,
    /// `k ↦ |{x : |{i : x_i = ±1}| = k}|`
    pub by_pm1: BTreeMap<usize, u128>,
    pub thresholds: Vec<f64>,
    /// One histogram per threshold `θ`: `j ↦ |{x : |{i : |x_i| >= θ}| = j}|`.
    pub by_large: Vec<BTreeMap<usize, u128>>,
}

impl ProfileHistogram {
    pub fn pm1_count(&self, k: usize) -> u128 {
        self.by_pm1.get(&k).copied().unwrap_or(0)
    }

    /// Fraction of sphere points with at most `k` coordinates equal to `±1`.
    pub fn pm1_fraction_at_most(&self, k: usize) -> f64 {
        let hits: u128 = self.by_pm1.range(..=k).map(|(_, &c)| c).sum();
        hits as f64 / self.total as f64
    }

    /// Number of sphere points with at most `cutoff` coordinates of size `>= θ`.
    pub fn large_count_at_most(&self, threshold: usize, cutoff: usize) -> u128 {
        self.by_large[threshold].range(..=cutoff).map(|(_, &c)| c).sum()
    }

    /// CSV `(k, count)` of the `±1` profile.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "count"])?;
        for k in 0..=self.d {
            w.write_record([k.to_string(), self.pm1_count(k).to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Profile histograms over `S_√λ ∩ Z^d`, computed orbit by orbit.
pub fn profile_stats(d: usize, lambda: u64, thresholds: &[f64]) -> Result<ProfileHistogram> {
    check_enum_limits(d, lambda)?;
    let table = ThetaTable::build(d, lambda)?;
    check_capacity(&table, d, lambda, DEFAULT_ENUM_CAP)?;
    if let Some(t) = thresholds.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::pre(format!("threshold {t} must be a non-negative number")));
    }
    let mut by_pm1 = BTreeMap::new();
    let mut by_large = vec![BTreeMap::new(); thresholds.len()];
    let mut total = 0u128;
    for orbit in sphere_orbits(d, lambda)? {
        total += orbit.size;
        let ones = orbit.abs_values.iter().filter(|&&v| v == 1).count();
        *by_pm1.entry(ones).or_insert(0) += orbit.size;
        for (hist, &theta) in by_large.iter_mut().zip(thresholds) {
            let large = orbit.abs_values.iter().filter(|&&v| v as f64 >= theta).count();
            *hist.entry(large).or_insert(0) += orbit.size;
        }
    }
    Ok(ProfileHistogram {
        d,
        lambda,
        total,
        by_pm1,
        thresholds: thresholds.to_vec(),
        by_large,
    })
}
