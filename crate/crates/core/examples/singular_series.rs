//! The singular series with a certified tail and the asymptotic count ratio.
//!
//! cargo run --release --example singular_series

use dspheres::arith::{asymptotic_ratio, singular_series, singular_series_at, tail_bound};
use dspheres::lattice::{isqrt, ThetaTable};

fn main() -> dspheres::Result<()> {
    for d in [16, 20, 24] {
        for lambda in [1, 2, 3, 50, 99] {
            let s = singular_series(d, lambda, 1e-10)?;
            println!("S_{d}({lambda}) = {:.12} (P = {}, tail <= {:.2e})", s.value, s.level, s.tail_bound);
        }
    }

    // Waring ratio for eight squares, series truncated at sqrt(λ).
    let table = ThetaTable::build(8, 1 << 18)?;
    for k in [6, 7, 8, 9] {
        let lambda = 1u64 << (2 * k);
        let s = singular_series_at(8, lambda, isqrt(lambda))?;
        let r = asymptotic_ratio(&table, 8, lambda, &s)?;
        println!("d = 8, λ = 4^{k}: R - 1 = {:+.3e}", r - 1.0);
    }
    println!("tail bound at d = 8, P = 512: {:.3e}", tail_bound(8, 512));
    Ok(())
}
