//! Farey dissection of the circle and quadratic Gauss sums.
//!
//! cargo run --example farey_and_gauss

use dspheres::arith::{check_farey_tiling, farey_arcs, farey_sequence, gauss_parseval_deviation, gauss_sum};

fn main() -> dspheres::Result<()> {
    let seq: Vec<String> = farey_sequence(5)?.iter().map(|f| f.to_string()).collect();
    println!("H_5 = {}", seq.join(" "));

    let arcs = farey_arcs(5)?;
    for arc in &arcs {
        println!("  {:>4}: [{}, {})", arc.center.to_string(), arc.lo, arc.hi);
    }
    println!("arcs tile a period: {}", check_farey_tiling(5, &arcs));

    for (p, q) in [(1, 3), (1, 4), (3, 8), (2, 7)] {
        let g = gauss_sum(p, q, &[0, 1, 2, 3])?;
        println!(
            "G({p}/{q}; 0,1,2,3) = {:.6} {:+.6}i, |G| = {:.6}, (2/q)^2 = {:.6}",
            g.re,
            g.im,
            g.norm(),
            (2.0 / q as f64).powi(2)
        );
    }
    println!("Parseval deviation, 5/12 in d = 24: {:e}", gauss_parseval_deviation(5, 12, 24)?);
    Ok(())
}
