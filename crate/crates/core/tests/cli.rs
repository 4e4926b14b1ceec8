use std::path::Path;
use std::process::{Command, Output};

fn dspheres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dspheres")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn count_prints_112() {
    let o = dspheres(&["count", "--d", "5", "--lambda", "5"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "112\n");
}

#[test]
fn exit_codes() {
    assert_eq!(dspheres(&["count", "--d", "5"]).status.code(), Some(2));
    assert_eq!(dspheres(&["count", "--d", "5", "--lambda", "5", "--nope"]).status.code(), Some(2));
    assert_eq!(dspheres(&["bogus"]).status.code(), Some(2));
    assert_eq!(dspheres(&["count", "--d", "99", "--lambda", "5"]).status.code(), Some(1));
    assert_eq!(dspheres(&["--help"]).status.code(), Some(0));
}

fn write_descriptor(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn sweep_csv_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "2", "4"] {
        let csv = dir.path().join(format!("out{threads}.csv"));
        let desc = write_descriptor(
            dir.path(),
            &format!("d{threads}.json"),
            &format!(
                r#"{{"family":"prop41_shift","pairs":[[5,16],[8,144]],"samples":300,"seed":5,"output":{:?}}}"#,
                csv.to_str().unwrap()
            ),
        );
        let o = dspheres(&["--threads", threads, "sweep", desc.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(&csv).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    assert!(text.contains("# seed: 5"));
    assert!(text.contains("# report: prop41_shift"));
    assert!(text.contains("# constants sha256: "));
    assert!(text.contains("# build: "));
    assert!(text.contains("family,d,lambda,seed,max_ratio,argmax_xi"));
}

#[test]
fn sweep_to_stdout_and_bad_descriptors() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write_descriptor(dir.path(), "ok.json", r#"{"family":"krawtchouk","pairs":[[20,0]],"samples":50,"seed":1}"#);
    let o = dspheres(&["sweep", ok.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("krawtchouk,")).count(), 1);

    let empty = write_descriptor(dir.path(), "e.json", r#"{"family":"prop42","pairs":[],"samples":5,"seed":1}"#);
    let o = dspheres(&["sweep", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty sweep"));

    let bad = write_descriptor(dir.path(), "b.json", r#"{"family":"prop99","pairs":[],"samples":5,"seed":1}"#);
    assert_eq!(dspheres(&["sweep", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn maximal_csv_is_reproducible() {
    let args = ["maximal", "--d", "3", "--M", "10", "--trials", "3", "--seed", "4", "--mode", "direct"];
    let a = dspheres(&args);
    let b = dspheres(&["--threads", "3", "maximal", "--d", "3", "--M", "10", "--trials", "3", "--seed", "4", "--mode", "direct"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("d,M,T,trial,ratio"));
    assert!(text.contains("3,10,1;2;4,one,"));
}

#[test]
fn series_and_specfun() {
    let o = dspheres(&["series", "--d", "20", "--lambda", "7"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 0.01);

    let o = dspheres(&["specfun", "fourier", "--r", "3", "--rho-max", "2", "--points", "5"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("r,rho,value\n3,0.00000000000000000e0,1.00000000000000000e0\n"));
}

#[test]
fn calibration_writes_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("constants.txt");
    let o = dspheres(&["sweep", "--calibrate", "--constants", path.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = dspheres::calibration::Calibration::load(&path).unwrap();
    let embedded = dspheres::calibration::Calibration::embedded();
    assert_eq!(written.entries(), embedded.entries());
}
