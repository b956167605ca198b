use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cylvort(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cylvort"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "\
# tiny cloud
scenario = random_cloud
blob_count = 20
delta = 0.1
seed = 4
dt = 0.01
t_end = 0.5
output_every = 5
";

#[test]
fn simulate_with_zero_duration_writes_one_row() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "scenario = vortex_pair\nblob_count = 2\ndelta = 0\nt_end = 0\n").unwrap();
    let o = cylvort(&["simulate", "run.cfg", "--csv", "out.csv"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("t,mass,h_center,energy,abs_moment,diameter,sup_u1,f_0"));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["records"], 1);
    assert_eq!(manifest["blobs"], 2);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn malformed_config_exits_2_and_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.cfg"), "dt = 0.1\nt_ned = 3\n").unwrap();
    let o = cylvort(&["simulate", "bad.cfg"], dir.path());
    assert_eq!(code(&o), 2);
    let err = stderr(&o);
    assert!(err.contains("t_ned") && err.contains("line 2"), "{err}");

    fs::write(dir.path().join("bad2.cfg"), "dt = quick\n").unwrap();
    let o = cylvort(&["simulate", "bad2.cfg"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("'dt'"));

    let o = cylvort(&["simulate", "missing.cfg"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn simulate_is_deterministic_and_writes_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), SMALL).unwrap();
    for name in ["a", "b"] {
        let csv = format!("{name}.csv");
        let snap = format!("{name}.bin");
        let o = cylvort(&["simulate", "run.cfg", "--csv", &csv, "--snapshot", &snap], dir.path());
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    let b = fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 11);
    let snap = cylvort::io::read_snapshot(fs::File::open(dir.path().join("a.bin")).unwrap()).unwrap();
    assert_eq!(snap.len(), 20);
    assert_eq!(fs::read(dir.path().join("a.bin")).unwrap(), fs::read(dir.path().join("b.bin")).unwrap());
}

#[test]
fn verify_recursion_reference_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = cylvort(&["verify-recursion", "--out", "cert.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cert.json")).unwrap()).unwrap();
    assert!((v["params"]["c3"].as_f64().unwrap() - 2.82843).abs() < 1e-5);
    assert_eq!(v["params"]["c4"], 0.25);
    assert_eq!(v["params"]["n0"], 1);
    assert_eq!(v["certificate"]["pass"], true);
    assert_eq!(v["certificate"]["n_range"], serde_json::json!([1, 8]));
    assert_eq!(v["dominance_pass"], true);
    let t1 = v["hitting_times"]["t"][1].as_f64().unwrap();
    assert!((t1 - 0.047_956_4).abs() < 1e-7);
    assert_eq!(v["envelope_constants"]["non_derivable"], serde_json::json!(["L1", "L2", "c8"]));
}

#[test]
fn verify_recursion_rejects_small_c2_and_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let o = cylvort(&["verify-recursion", "--c2", "1.9"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("c2 >= 2"));
    let o = cylvort(&["verify-recursion", "--c1", "0"], dir.path());
    assert_eq!(code(&o), 2);
    let o = cylvort(&["verify-recursion", "--sweep", "100", "--seed", "9"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["draws"], 100);
    assert_eq!(v["pass"], true);
}

fn synthetic_csv(diameter: impl Fn(f64) -> f64) -> String {
    let mut s = String::from("t,mass,h_center,energy,abs_moment,diameter,sup_u1,f_0,f_1\n");
    for k in 0..=400 {
        let t = k as f64 * 0.5;
        s.push_str(&format!("{t},1.5,0,-0.25,0.3,{},0.2,1.5,0\n", diameter(t)));
    }
    s
}

#[test]
fn analyze_fits_a_cube_root_law() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("d.csv"), synthetic_csv(|t| (1.0 + t).cbrt())).unwrap();
    let o = cylvort(&["analyze", "d.csv", "--out", "fit.json"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fit.json")).unwrap()).unwrap();
    let p = v["growth_fit"]["p"].as_f64().unwrap();
    assert!((0.329..=0.337).contains(&p), "p = {p}");
    assert_eq!(v["drift"]["mass"]["max_abs"], 0.0);
    assert_eq!(v["tail_inequality"][0]["a"], 2.0);
    assert!(v["envelope"]["comparison"]["holds"].is_boolean());
}

#[test]
fn analyze_reports_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("x.csv"), "t,mass\n0,1\n").unwrap();
    let o = cylvort(&["analyze", "x.csv"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("diameter"));
}

fn table(args: &[&str], dir: &Path) -> Vec<Vec<f64>> {
    let mut full = vec!["kernel-table"];
    full.extend_from_slice(args);
    let o = cylvort(&full, dir);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn kernel_table_golden_rows() {
    let dir = tempfile::tempdir().unwrap();
    let pi = std::f64::consts::PI.to_string();
    let rows = table(
        &["--dx-min", "0", "--dx-max", "0", "--dx-count", "1", "--dy-min", &pi, "--dy-max", &pi, "--dy-count", "1", "--delta", "0"],
        dir.path(),
    );
    assert!(rows[0][2].abs() < 1e-15 && rows[0][3] == 0.0);
    assert!((rows[0][4] - 0.346_573_6).abs() < 1e-7);
    let rows = table(
        &["--dx-min", "5", "--dx-max", "5", "--dx-count", "1", "--dy-min", "0", "--dy-max", "0", "--dy-count", "1", "--delta", "0"],
        dir.path(),
    );
    assert_eq!(rows[0][2], 0.0);
    assert!((rows[0][3] - 0.506_783_6).abs() < 1e-7);

    let a = cylvort(&["kernel-table"], dir.path());
    let b = cylvort(&["kernel-table"], dir.path());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(String::from_utf8_lossy(&a.stdout).lines().count(), 1 + 11 * 5);
}

#[test]
fn kernel_table_rejects_singular_points() {
    let dir = tempfile::tempdir().unwrap();
    let o = cylvort(
        &["kernel-table", "--dx-min", "-1", "--dx-max", "1", "--dx-count", "3", "--dy-min", "0", "--dy-max", "0", "--dy-count", "1", "--delta", "0"],
        dir.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("singular"));
}

#[test]
fn bad_usage_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&cylvort(&["frobnicate"], dir.path())), 2);
    assert_eq!(code(&cylvort(&["verify-recursion", "--c2", "abc"], dir.path())), 2);
}
