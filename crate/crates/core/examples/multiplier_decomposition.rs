//! The exact multiplier, its major-arc decomposition and the semigroup model.
//!
//! cargo run --release --example multiplier_decomposition

use dspheres::multiplier::{semigroup_multipliers, MultiplierEvaluator, TorusPoint};
use dspheres::numeric::sample_rng;

fn main() -> dspheres::Result<()> {
    let ev = MultiplierEvaluator::new(6, 4096)?;
    println!("d = 6, λ = 4096: r = {:e}, κ = {:.3}", ev.sphere_count(), ev.kappa().value);

    let xi = TorusPoint::random(6, &mut sample_rng(1, 0));
    println!("ξ = {}", xi.format());
    for n in [1, 3, 10, ev.level() + 1] {
        let dec = ev.decompose(&xi, n)?;
        println!(
            "n = {n:>2}: m = {:+.6e}  major = {:+.6e}  b = {:+.6e}  E = {:+.3e}",
            dec.m_exact.re, dec.major_sum.re, dec.b_term.re, dec.residual.norm()
        );
    }

    let shifted = xi.half_shift();
    println!("m(ξ + 1/2) = {:+.12e} (λ even)", ev.m_exact(&shifted)?.re);

    let small = MultiplierEvaluator::new(50, 2)?;
    let xi = TorusPoint::random(50, &mut sample_rng(2, 0));
    let s = semigroup_multipliers(50, 2, &xi)?;
    println!(
        "d = 50, λ = 2: m = {:+.6}, p1 = {:.6}, p2 = {:+.6}, |V_ξ| = {}",
        small.m_exact(&xi)?.re,
        s.p1,
        s.p2,
        s.v_xi.len()
    );
    Ok(())
}
