//! Dyadic maximal ratios on periodic boxes for d = 3..6.
//!
//! cargo run --release --example maximal_experiment

use dspheres::maximal::{check_ball_sphere_domination, max_dyadic_exponent, ratio_experiment, DyadicSet, GridFunction};

fn main() -> dspheres::Result<()> {
    for (d, m) in [(3, 16), (4, 16), (5, 12), (6, 12)] {
        let set = DyadicSet::up_to(max_dyadic_exponent(m).expect("box fits radius 1"))?;
        let rep = ratio_experiment(d, m, &set, 5, 3)?;
        println!(
            "d = {d}, M = {m}, T = {{{}}}: max {:.6}, mean {:.6}",
            set.label(),
            rep.max_random,
            rep.mean_random
        );
    }
    let f = GridFunction::random_nonnegative_integers(16, 4, 9, 3, 0)?;
    let dom = check_ball_sphere_domination(&f, 16)?;
    println!("ball averages dominated by sphere averages: {} violations", dom.violations);
    Ok(())
}
