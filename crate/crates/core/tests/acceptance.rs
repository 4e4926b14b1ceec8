//! One line per acceptance criterion with its runtime budget.
//!
//! Run with `cargo test --test acceptance`. Exits non-zero when any
//! criterion fails or overruns its budget.

use std::process::Command;
use std::time::{Duration, Instant};

use dspheres::verify::{run_check, Scale};

struct Criterion {
    id: u32,
    title: &'static str,
    budget: Duration,
}

const fn c(id: u32, title: &'static str, secs: u64) -> Criterion {
    Criterion {
        id,
        title,
        budget: Duration::from_secs(secs),
    }
}

const CRITERIA: [Criterion; 13] = [
    c(1, "counting oracle, d <= 5, λ <= 40", 10),
    c(2, "ball-sphere sandwich, 5 <= d <= 10, λ <= 200", 5),
    c(3, "gauss sum bound and Parseval, q <= 200, d <= 32", 10),
    c(4, "singular series in [0.5, 1.5], d = 16..24, λ <= 100", 30),
    c(5, "Waring ratio trend for d = 8", 60),
    c(6, "explicit multiplier bounds, 10^4 samples per pair", 60),
    c(7, "half-shift symmetry over the same sweep", 60),
    c(8, "exact vs brute-force multiplier, d <= 5, λ <= 40", 30),
    c(9, "decomposition identity and residual trend", 120),
    c(10, "Krawtchouk identities and uniform bound, n <= 64", 30),
    c(11, "spherical Fourier transform bounds and cross-check", 60),
    c(12, "maximal module", 120),
    c(13, "determinism of verify logs and sweep CSV", 120),
];

fn binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dspheres")).args(args).output().expect("binary runs")
}

/// Runs `verify --quick` twice and a sweep at two thread counts, comparing bytes.
fn determinism_end_to_end() -> (bool, String) {
    let a = binary(&["verify", "--quick"]);
    let b = binary(&["verify", "--quick"]);
    let logs_equal = a.stdout == b.stdout && a.status.success() && b.status.success();

    let dir = tempfile::tempdir().expect("temp dir");
    let desc = dir.path().join("sweep.json");
    std::fs::write(
        &desc,
        r#"{"family":"prop42","pairs":[[5,1024],[6,2048]],"samples":200,"seed":99}"#,
    )
    .expect("write descriptor");
    let one = binary(&["--threads", "1", "sweep", desc.to_str().unwrap()]);
    let four = binary(&["--threads", "4", "sweep", desc.to_str().unwrap()]);
    let csv_equal = one.status.success() && one.stdout == four.stdout;

    let lib = run_check(13, Scale::Full);
    (
        logs_equal && csv_equal && lib.passed,
        format!("verify_logs_identical={logs_equal} sweep_csv_identical={csv_equal}; {}", lib.detail),
    )
}

fn main() {
    let mut failed = Vec::new();
    for crit in &CRITERIA {
        let start = Instant::now();
        let (passed, detail) = if crit.id == 13 {
            determinism_end_to_end()
        } else {
            let o = run_check(crit.id, Scale::Full);
            (o.passed, o.detail)
        };
        let elapsed = start.elapsed();
        let in_budget = elapsed <= crit.budget;
        let ok = passed && in_budget;
        println!(
            "criterion {:>2} {}: {} ({:.2}s of {}s) {}",
            crit.id,
            if ok { "PASS" } else { "FAIL" },
            crit.title,
            elapsed.as_secs_f64(),
            crit.budget.as_secs(),
            detail
        );
        if !ok {
            failed.push(crit.id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 13 criteria pass");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
