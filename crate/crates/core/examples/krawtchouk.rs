//! Exact Krawtchouk values and the uniform exponential bound scan.
//!
//! cargo run --release --example krawtchouk

use dspheres::specfun::{krawtchouk, krawtchouk_bound_scan, krawtchouk_numerators, krawtchouk_symmetric};

fn main() -> dspheres::Result<()> {
    for (n, k, x) in [(4, 2, 2), (10, 3, 4), (64, 7, 20)] {
        let v = krawtchouk(n, k, x)?;
        println!("K_{k}^({n})({x}) = {}", v.value);
    }
    let nums = krawtchouk_numerators(12);
    println!("symmetry holds for n = 12: {}", krawtchouk_symmetric(12, &nums));

    let scan = krawtchouk_bound_scan(64)?;
    println!(
        "n <= 64: c_min = {:.12} at (n, k, x) = {:?}, {} zeros among {} values",
        scan.c_min, scan.argmin, scan.zeros, scan.evaluated
    );
    Ok(())
}
