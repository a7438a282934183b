use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracflux"))
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .args(extra)
        .output()
        .expect("binary runs")
}

fn meta(dir: &Path) -> Vec<(String, String)> {
    fs::read_to_string(dir.join("meta.txt"))
        .unwrap()
        .lines()
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn meta_value(dir: &Path, key: &str) -> String {
    meta(dir)
        .into_iter()
        .find(|(k, _)| k == key)
        .unwrap_or_else(|| panic!("no `{key}` in meta.txt"))
        .1
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const MINIMAL: &str = "[physics]\nalpha = 1.5\nnu = 1\n[solver]\ndt = 0.01\nt_end = 0\n\
                       [grid]\nn = 128\nhalf_length = 8\n[initial]\nkind = gaussian\nsigma = 0.5\n";

#[test]
fn zero_length_run_writes_one_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "min.ini", MINIMAL);
    let out = tmp.path().join("out");
    let res = run("simulate", &cfg, &out, &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 2);
    assert_eq!(traj.lines().nth(1).unwrap().split(',').count(), 129);
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
}

#[test]
fn malformed_config_reports_line_and_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.ini", &MINIMAL.replace("nu = 1", "nu = -x"));
    let res = run("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("line 3") && msg.contains("physics.nu"), "{msg}");

    let cfg = write_config(tmp.path(), "typo.ini", &MINIMAL.replace("sigma", "sigam"));
    let res = run("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("line 10") && msg.contains("initial.sigma"), "{msg}");

    let cfg = write_config(
        tmp.path(),
        "file.ini",
        &MINIMAL.replace("kind = gaussian\nsigma = 0.5", "kind = file\npath = nowhere.txt"),
    );
    let res = run("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("initial.path"));
}

#[test]
fn file_initial_data() {
    let tmp = tempfile::tempdir().unwrap();
    let values: String = (0..128).map(|j| format!("{}\n", if j == 64 { 1.0 } else { 0.0 })).collect();
    fs::write(tmp.path().join("data.txt"), format!("# spike\n{values}")).unwrap();
    let cfg = write_config(
        tmp.path(),
        "file.ini",
        &MINIMAL.replace("kind = gaussian\nsigma = 0.5", "kind = file\npath = data.txt"),
    );
    let out = tmp.path().join("out");
    let res = run("simulate", &cfg, &out, &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let mass: f64 = meta_value(&out, "final_mass").parse().unwrap();
    assert!((mass - 0.125).abs() < 1e-15);
}

#[test]
fn reference_report_matches_golden_file() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("simulate", &configs().join("reference.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0));
    let got = fs::read(tmp.path().join("report.csv")).unwrap();
    let golden = fs::read(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/reference_report.csv")).unwrap();
    assert!(got == golden, "report.csv differs from the golden file");
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("reference.ini");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run("simulate", &cfg, &a, &[]);
    run("simulate", &cfg, &b, &[]);
    for f in ["trajectory.csv", "report.csv", "meta.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn metadata_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("reference.ini");
    run("simulate", &cfg, tmp.path(), &["--seed", "99"]);
    let digest = format!("{:x}", Sha256::digest(fs::read(&cfg).unwrap()));
    assert_eq!(meta_value(tmp.path(), "config_sha256"), digest);
    assert_eq!(meta_value(tmp.path(), "seed"), "99");
    assert_eq!(meta_value(tmp.path(), "files"), "trajectory.csv;report.csv");
    assert_eq!(meta_value(tmp.path(), "config.physics.alpha"), "2");
    assert!(meta_value(tmp.path(), "rng").starts_with("ChaCha8"));
    assert!(meta_value(tmp.path(), "version").starts_with("fracflux "));
}

#[test]
fn decay_slope_for_alpha_two() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("decay", &configs().join("decay.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0));
    let text = fs::read_to_string(tmp.path().join("slopes.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,theta,slope,predicted"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert!(row[0].is_infinite() && row[1] == 0.0);
    assert!((row[2] + 0.5).abs() <= 0.05, "slope {}", row[2]);
}

#[test]
fn particle_pair_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("particles", &configs().join("particles_pair.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0));
    let gap: f64 = meta_value(tmp.path(), "gap").parse().unwrap();
    assert!((gap - 0.564190).abs() < 1e-5, "{gap}");
}

#[test]
fn particle_seed_controls_noise() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "p.ini",
        "[grid]\nn = 256\nhalf_length = 4\n[particles]\ncount = 64\ndt = 0.01\nt_end = 0.5\n",
    );
    let dirs: Vec<PathBuf> = ["a", "b", "c"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, seed) in dirs.iter().zip(["5", "5", "6"]) {
        let res = run("particles", &cfg, d, &["--seed", seed]);
        assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    }
    let read = |d: &PathBuf| fs::read(d.join("positions.csv")).unwrap();
    assert_eq!(read(&dirs[0]), read(&dirs[1]));
    assert_ne!(read(&dirs[0]), read(&dirs[2]));
    assert!(dirs[0].join("density.csv").is_file());
}

#[test]
fn compare_exact_against_direct() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("compare", &configs().join("compare.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0));
    let gap: f64 = meta_value(tmp.path(), "max_linf").parse().unwrap();
    assert!(gap < 2e-3, "{gap}");
    let table = fs::read_to_string(tmp.path().join("compare.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
}

#[test]
fn exact_with_signed_data_inside_horizon() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("exact", &configs().join("exact_signed.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let horizon: f64 = meta_value(tmp.path(), "horizon").parse().unwrap();
    assert!((horizon - 39f64.ln()).abs() < 1e-12);
}

#[test]
fn exact_beyond_horizon_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("exact_signed.ini"))
        .unwrap()
        .replace("times = 0.5, 1, 3", "times = 0.5, 4");
    let cfg = write_config(tmp.path(), "late.ini", &text);
    let res = run("exact", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(4));
    let msg = String::from_utf8_lossy(&res.stderr);
    assert!(msg.contains("T = 3.66"), "{msg}");
}

#[test]
fn exact_long_time_profile() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("exact", &configs().join("exact.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0));
    // distance at t = 12 on |x| <= 3 to the limit of the unit-mass data
    let gap: f64 = meta_value(tmp.path(), "final_gap_rho_inf_mass").parse().unwrap();
    assert!(gap < 1e-2, "{gap}");
    let literal: f64 = meta_value(tmp.path(), "final_gap_rho_inf").parse().unwrap();
    assert!(literal > 1e-2, "closed-form column unexpectedly close: {literal}");
}

#[test]
fn mild_converges_for_small_data() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("mild", &configs().join("mild.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(0));
    assert_eq!(meta_value(tmp.path(), "converged"), "true");
    let gaps = fs::read_to_string(tmp.path().join("picard.csv")).unwrap();
    let g: Vec<f64> = gaps.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(g.windows(2).all(|w| w[1] < 0.5 * w[0]));
}

#[test]
fn exact_rejects_other_alpha() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "e.ini", &(MINIMAL.to_string() + "[exact]\ntimes = 0.1\n"));
    let res = run("exact", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn missing_section_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run("decay", &configs().join("reference.ini"), tmp.path(), &[]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("[decay]"));
}

#[test]
fn oversized_step_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let text = MINIMAL.replace("dt = 0.01\nt_end = 0", "dt = 0.5\nt_end = 1").replace("alpha = 1.5", "alpha = 1");
    let cfg = write_config(tmp.path(), "cfl.ini", &text);
    let res = run("simulate", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(res.status.code(), Some(2), "{}", String::from_utf8_lossy(&res.stderr));
}
