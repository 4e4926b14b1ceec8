//! Fourier transform of the sphere measure by two independent routes.
//!
//! cargo run --release --example spherical_fourier

use dspheres::specfun::{check_fourier_decay, routes_agree, Method, SphericalFT};

fn main() -> dspheres::Result<()> {
    for r in [2, 3, 10, 30] {
        let a = SphericalFT::new(r, Method::BesselFormula)?;
        let b = SphericalFT::new(r, Method::IntervalQuadrature)?;
        for rho in [0.0, 0.25, 1.0, 5.0, 20.0] {
            let (x, y) = (a.eval(rho)?, b.eval(rho)?);
            println!("r = {r:>2}, ρ = {rho:>5}: {x:+.15e} {y:+.15e} agree = {}", routes_agree(x, y));
        }
    }
    let grid: Vec<f64> = (0..=300).map(|i| i as f64 * 0.1).collect();
    let rep = check_fourier_decay(10, &grid)?;
    println!(
        "r = 10: A_exp = {:.6} at ρ = {}, A_pow = {:.6} at ρ = {}",
        rep.a_exp, rep.argmax_exp, rep.a_pow, rep.argmax_pow
    );
    Ok(())
}
