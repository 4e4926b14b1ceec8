//! Sphere and ball counts, the enumeration oracle and coordinate profiles.
//!
//! cargo run --example lattice_counts

use dspheres::lattice::{enumerate_sphere, profile_stats, sphere_orbits, ThetaTable, DEFAULT_ENUM_CAP};

fn main() -> dspheres::Result<()> {
    let table = ThetaTable::build(16, 1 << 12)?;

    println!("r_5(5) = {}", table.sphere_count(5, 5)?);
    println!("r_8(4096) = {}", table.sphere_count(8, 4096)?);
    println!("r_16(4096) = {}", table.sphere_count(16, 4096)?);
    println!("|B ∩ Z^4| at λ = 10: {}", table.ball_count(4, 10)?);

    // Brute force agrees with the convolution.
    let listed = enumerate_sphere(4, 18, DEFAULT_ENUM_CAP)?.len();
    println!("r_4(18) = {} (enumerated: {listed})", table.sphere_count(4, 18)?);

    for orbit in sphere_orbits(4, 18)? {
        println!("  orbit {:?} of size {}", orbit.abs_values, orbit.size);
    }

    let report = table.check_ball_sphere_bounds(7, 50)?;
    println!(
        "sandwich d = 7, λ = 50: {} <= {} <= {}, ok = {}",
        report.lhs, report.mid, report.rhs, report.ok
    );

    let hist = profile_stats(6, 12, &[2.0])?;
    println!("d = 6, λ = 12: {} points", hist.total);
    for k in 0..=6 {
        println!("  {} points with exactly {k} coordinates equal to ±1", hist.pm1_count(k));
    }
    Ok(())
}
