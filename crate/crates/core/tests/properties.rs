use num_complex::Complex64;
use proptest::prelude::*;

use dspheres::arith::{farey_arcs, gauss_sum, singular_series_at, tail_bound};
use dspheres::calibration::{render, Calibration, Direction, Measurement};
use dspheres::lattice::ThetaTable;
use dspheres::maximal::{spherical_average, GridFunction};
use dspheres::multiplier::{MultiplierEvaluator, TorusPoint};
use dspheres::specfun::{krawtchouk_numerators, krawtchouk_reflects, krawtchouk_symmetric, routes_agree, Method, SphericalFT};
use num_rational::Rational64;

fn torus(d: usize) -> impl Strategy<Value = TorusPoint> {
    prop::collection::vec(-0.5f64..0.5, d).prop_map(|v| TorusPoint::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_are_even_and_split(d in 2usize..9, lambda in 1u64..300, a in 1usize..8) {
        let table = ThetaTable::build(8, 300).unwrap();
        let r = table.sphere_count(d, lambda).unwrap();
        prop_assert!(r.value.clone() % 2u32 == 0u32.into());
        let a = a.min(d - 1);
        prop_assert_eq!(table.split_convolution(a, d - a, lambda).unwrap(), r.value);
    }

    #[test]
    fn torus_points_are_canonical(v in prop::collection::vec(-10.0f64..10.0, 1..6)) {
        let xi = TorusPoint::new(v).unwrap();
        prop_assert!(xi.coords().iter().all(|c| (-0.5..0.5).contains(c)));
        let back = xi.half_shift().half_shift();
        for (a, b) in back.coords().iter().zip(xi.coords()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn multiplier_is_real_even_and_bounded(xi in torus(5), lambda in 1u64..60) {
        let ev = match MultiplierEvaluator::new(5, lambda) { Ok(e) => e, Err(_) => return Ok(()) };
        let m = ev.m_exact(&xi).unwrap();
        prop_assert!(m.im.abs() < 1e-12);
        prop_assert!(m.norm() <= 1.0 + 1e-12);
        let neg = TorusPoint::new(xi.coords().iter().map(|c| -c).collect()).unwrap();
        prop_assert!((ev.m_exact(&neg).unwrap() - m).norm() < 1e-12);
        let mut rev = xi.coords().to_vec();
        rev.reverse();
        prop_assert!((ev.m_exact(&TorusPoint::new(rev).unwrap()).unwrap() - m).norm() < 1e-12);
        let sign = if lambda % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((ev.m_exact(&xi.half_shift()).unwrap() - m * sign).norm() < 1e-12);
    }

    #[test]
    fn decomposition_sums_to_the_multiplier(xi in torus(6), n in 1u64..12) {
        let ev = MultiplierEvaluator::new(6, 121).unwrap();
        let dec = ev.decompose(&xi, n).unwrap();
        prop_assert!((dec.major_sum + dec.b_term + dec.residual - dec.m_exact).norm() < 1e-12);
    }

    #[test]
    fn gauss_sums_obey_the_bound(q in 1u64..80, p in 1u64..80, x in prop::collection::vec(-50i64..50, 1..12)) {
        prop_assume!(p <= q && num_integer::gcd(p, q) == 1);
        let g = gauss_sum(p, q, &x).unwrap();
        prop_assert!(g.norm() <= (2.0 / q as f64).powf(x.len() as f64 / 2.0) + 1e-12);
    }

    #[test]
    fn series_is_stable_under_truncation(d in 16usize..25, lambda in 1u64..100, p1 in 20u64..120, p2 in 20u64..120) {
        let a = singular_series_at(d, lambda, p1).unwrap();
        let b = singular_series_at(d, lambda, p2).unwrap();
        prop_assert!((a.value - b.value).abs() <= tail_bound(d, p1.min(p2)) + 1e-13);
    }

    #[test]
    fn farey_arcs_cover_each_point_once(n in 1u64..30, num in 0i64..997) {
        let arcs = farey_arcs(n).unwrap();
        let lo = arcs[0].lo;
        let alpha = lo + Rational64::new(num, 997);
        prop_assert_eq!(arcs.iter().filter(|a| a.contains(alpha)).count(), 1);
    }

    #[test]
    fn transform_routes_agree(r in 2u64..31, rho in 0.0f64..50.0) {
        let a = SphericalFT::new(r, Method::BesselFormula).unwrap().eval(rho).unwrap();
        let b = SphericalFT::new(r, Method::IntervalQuadrature).unwrap().eval(rho).unwrap();
        prop_assert!(routes_agree(a, b), "r = {}, ρ = {}: {} vs {}", r, rho, a, b);
        prop_assert!(a.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn krawtchouk_identities(n in 1u64..80) {
        let nums = krawtchouk_numerators(n);
        prop_assert!(krawtchouk_symmetric(n, &nums));
        prop_assert!(krawtchouk_reflects(n, &nums));
    }

    #[test]
    fn averages_are_contractive_and_commute_with_shifts(seed in 0u64..1000, lambda in 1u64..6, s in prop::collection::vec(-7i64..7, 3)) {
        let f = GridFunction::random_gaussian(7, 3, seed, 0).unwrap();
        let a = spherical_average(&f, lambda).unwrap();
        prop_assert!(a.l2_norm() <= f.l2_norm() * (1.0 + 1e-12));
        let lhs = spherical_average(&f.translate(&s).unwrap(), lambda).unwrap();
        let rhs = a.translate(&s).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn calibration_round_trip(values in prop::collection::vec(-1e6f64..1e6, 1..6)) {
        let ms: Vec<Measurement> = values.iter().enumerate().map(|(i, &v)| Measurement {
            key: format!("k{i}"),
            value: v,
            direction: if i % 2 == 0 { Direction::Upper } else { Direction::Lower },
            note: "n".into(),
        }).collect();
        let cal = Calibration::parse(&render("x", &ms)).unwrap();
        for m in &ms {
            prop_assert_eq!(cal.get(&m.key).unwrap(), m.value);
            prop_assert!(m.direction.admits(m.value, m.value));
        }
    }
}

#[test]
fn constant_is_fixed() {
    let one = GridFunction::constant(8, 2, Complex64::new(1.0, 0.0)).unwrap();
    let a = spherical_average(&one, 5).unwrap();
    assert!(a.max_abs_diff(&one) < 1e-14);
}
