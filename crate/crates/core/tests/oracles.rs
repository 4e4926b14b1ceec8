//! Library values checked against independent closed forms and brute force.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use dspheres::arith::{farey_sequence, gauss_sum_1d, singular_series_at, tail_bound};
use dspheres::lattice::ThetaTable;
use dspheres::maximal::{spherical_average_with, AveragePath, GridFunction};
use dspheres::multiplier::{m_bruteforce, MultiplierEvaluator, TorusPoint};
use dspheres::numeric::sample_rng;
use dspheres::specfun::{fourier_sphere, krawtchouk};

fn brute_count(d: usize, lambda: i64) -> u64 {
    let r = (lambda as f64).sqrt() as i64 + 1;
    let side = (2 * r + 1) as usize;
    let mut count = 0;
    for idx in 0..side.pow(d as u32) {
        let mut i = idx;
        let mut s = 0;
        for _ in 0..d {
            let x = (i % side) as i64 - r;
            i /= side;
            s += x * x;
        }
        if s == lambda {
            count += 1;
        }
    }
    count
}

#[test]
fn small_counts_match_brute_force() {
    let table = ThetaTable::build(5, 12).unwrap();
    for d in 1..=5 {
        for lambda in 0..=12 {
            assert_eq!(
                table.sphere_count(d, lambda).unwrap().value,
                BigUint::from(brute_count(d, lambda as i64)),
                "d = {d}, λ = {lambda}"
            );
        }
    }
    assert_eq!(table.sphere_count(4, 2).unwrap().value, BigUint::from(24u32));
    assert_eq!(table.sphere_count(5, 4).unwrap().value, BigUint::from(90u32));
    assert_eq!(table.sphere_count(5, 5).unwrap().value, BigUint::from(112u32));
}

fn divisors(n: u64) -> impl Iterator<Item = u64> {
    (1..=n).filter(move |k| n % k == 0)
}

#[test]
fn four_squares_closed_form() {
    let table = ThetaTable::build(4, 600).unwrap();
    for n in 1..=600u64 {
        let expected: u64 = 8 * divisors(n).filter(|k| k % 4 != 0).sum::<u64>();
        assert_eq!(table.sphere_count(4, n).unwrap().value, BigUint::from(expected), "n = {n}");
    }
}

/// `r_8(n) = 16 Σ_{k | n} (-1)^{n+k} k³`.
fn r8(n: u64) -> i128 {
    16 * divisors(n)
        .map(|k| if (n + k) % 2 == 0 { (k as i128).pow(3) } else { -(k as i128).pow(3) })
        .sum::<i128>()
}

#[test]
fn eight_squares_closed_form() {
    let table = ThetaTable::build(8, 5000).unwrap();
    for n in (1..=5000u64).step_by(7).chain([4096]) {
        assert_eq!(table.sphere_count(8, n).unwrap().value, BigUint::from(r8(n) as u128), "n = {n}");
    }
}

#[test]
fn eight_square_series_is_exact() {
    // For eight squares the count equals the main term exactly, so the
    // series is 6 r_8(n) / (π⁴ n³).
    for n in [1u64, 2, 3, 7, 12, 100, 1023] {
        let exact = 6.0 * r8(n) as f64 / (std::f64::consts::PI.powi(4) * (n as f64).powi(3));
        let s = singular_series_at(8, n, 2048).unwrap();
        assert!(
            (s.value - exact).abs() <= tail_bound(8, 2048) + 1e-12,
            "n = {n}: {} vs {exact}",
            s.value
        );
    }
}

#[test]
fn farey_length_is_totient_sum() {
    fn phi(n: u64) -> u64 {
        (1..=n).filter(|k| num_integer::gcd(*k, n) == 1).count() as u64
    }
    for n in 1..=40 {
        let expected: u64 = (1..=n).map(phi).sum();
        assert_eq!(farey_sequence(n).unwrap().len() as u64, expected);
    }
}

#[test]
fn gauss_sums_closed_forms() {
    let g = gauss_sum_1d(1, 4, 0).unwrap();
    assert!((g.re - 0.5).abs() < 1e-15 && (g.im - 0.5).abs() < 1e-15);
    for q in [3u64, 5, 7, 9, 15, 21, 101] {
        for p in 1..q {
            if num_integer::gcd(p, q) == 1 {
                for m in 0..3 {
                    let g = gauss_sum_1d(p, q, m).unwrap();
                    assert!((g.norm() - 1.0 / (q as f64).sqrt()).abs() < 1e-13);
                }
            }
        }
    }
    // q ≡ 2 mod 4 with m even vanishes.
    assert!(gauss_sum_1d(1, 6, 0).unwrap().norm() < 1e-15);
}

#[test]
fn krawtchouk_direct_sum() {
    fn binom(n: i64, k: i64) -> BigRational {
        if k < 0 || k > n {
            return BigRational::zero();
        }
        let mut r = BigRational::one();
        for j in 0..k {
            r = r * BigRational::from_integer((n - j).into()) / BigRational::from_integer((j + 1).into());
        }
        r
    }
    for n in [1i64, 2, 5, 9, 16, 31] {
        for k in 0..=n {
            for x in 0..=n {
                let mut sum = BigRational::zero();
                for j in 0..=k {
                    let term = binom(x, j) * binom(n - x, k - j);
                    sum = if j % 2 == 0 { sum + term } else { sum - term };
                }
                let expected = sum / binom(n, k);
                assert_eq!(krawtchouk(n as u64, k as u64, x as u64).unwrap().value, expected);
            }
        }
    }
}

#[test]
fn sphere_transform_closed_forms() {
    use std::f64::consts::PI;
    for i in 1..200 {
        let rho = i as f64 * 0.1;
        let u = 2.0 * PI * rho;
        // r = 3: sin(u)/u
        assert!((fourier_sphere(3, rho).unwrap() - u.sin() / u).abs() < 1e-12);
        // r = 5: 3(sin u - u cos u)/u³
        let r5 = 3.0 * (u.sin() - u * u.cos()) / u.powi(3);
        assert!((fourier_sphere(5, rho).unwrap() - r5).abs() < 1e-12);
    }
    // r = 2: J_0 by its power series.
    for rho in [0.1, 0.5, 1.3] {
        let u: f64 = 2.0 * PI * rho;
        let mut term = 1.0;
        let mut j0 = 1.0;
        for k in 1..60 {
            term *= -(u * u / 4.0) / (k * k) as f64;
            j0 += term;
        }
        assert!((fourier_sphere(2, rho).unwrap() - j0).abs() < 1e-12);
    }
}

#[test]
fn multiplier_matches_direct_sum() {
    for (d, lambda) in [(2usize, 25u64), (3, 11), (4, 30), (7, 9)] {
        let ev = MultiplierEvaluator::new(d, lambda).unwrap();
        for i in 0..20 {
            let xi = TorusPoint::random(d, &mut sample_rng(17, i));
            let a = ev.m_exact(&xi).unwrap();
            let b = m_bruteforce(d, lambda, &xi).unwrap();
            assert!((a - b).norm() < 1e-12, "d = {d}, λ = {lambda}");
        }
    }
}

#[test]
fn average_of_delta_is_uniform_on_the_sphere() {
    let (m, d, lambda) = (9usize, 3usize, 5u64);
    let delta = GridFunction::delta(m, d).unwrap();
    let avg = spherical_average_with(&delta, lambda, AveragePath::Direct).unwrap();
    let r = brute_count(3, 5) as f64;
    let half = (m / 2) as i64;
    for x in -half..=half {
        for y in -half..=half {
            for z in -half..=half {
                let expected = if x * x + y * y + z * z == lambda as i64 { 1.0 / r } else { 0.0 };
                assert!((avg.at(&[x, y, z]).re - expected).abs() < 1e-15);
            }
        }
    }
}
