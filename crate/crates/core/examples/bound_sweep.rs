//! A seeded bound sweep written as CSV.
//!
//! cargo run --release --example bound_sweep

use dspheres::sweep::{sweep_bounds, write_sweep_csv, BoundFamily, SweepDescriptor};

fn main() -> dspheres::Result<()> {
    let json = r#"{"family": "prop41", "pairs": [[5, 16], [8, 144], [12, 1024]], "samples": 500, "seed": 11}"#;
    let desc: SweepDescriptor = serde_json::from_str(json)?;
    let rows = sweep_bounds(&desc)?;
    write_sweep_csv(std::io::stdout().lock(), &desc, &rows)?;

    let desc = SweepDescriptor::new(BoundFamily::Prop72, vec![(25, 1), (64, 2)], 200, 11);
    for row in sweep_bounds(&desc)? {
        println!("prop72 at ({}, {}): max ratio {:.6}", row.d, row.lambda, row.max_ratio);
    }
    Ok(())
}
