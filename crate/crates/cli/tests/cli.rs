use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rdsir(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdsir"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// A short, small-grid run of the default kinetics.
const SMALL: [&str; 8] = [
    "--set", "n=64", "--set", "t_end=20", "--set", "snapshot_stride=50", "--set", "r1=2",
];

fn with_small<'a>(args: &[&'a str]) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend_from_slice(&SMALL);
    v
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), "beta = 0.1\nbetta = 0.2\n").unwrap();
    let out = rdsir(dir.path(), &["--config", "run.cfg", "equilibria"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("betta"));
    let out = rdsir(dir.path(), &["--set", "r3=1", "equilibria"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_values_are_rejected_at_load() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["beta=-1", "n=10", "integrator=euler", "dt=abc"] {
        let out = rdsir(dir.path(), &["--set", bad, "equilibria"]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
    }
}

#[test]
fn dumped_config_reloads_to_the_same_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = rdsir(
        dir.path(),
        &["--set", "r1=2.345", "--set", "sweep_x=beta:0.1:0.2:3", "--dump-config", "simulate", "--recipe", "turing"],
    );
    assert!(first.status.success());
    fs::write(dir.path().join("dumped.cfg"), &first.stdout).unwrap();
    let second = rdsir(dir.path(), &["--config", "dumped.cfg", "--dump-config", "simulate"]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("r1 = 2.345\n"));
    assert!(text.contains("t_end = 3000\n"));
}

#[test]
fn overrides_on_both_sides_of_the_subcommand_apply_in_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdsir(
        dir.path(),
        &["--set", "r1=3", "--set", "r2=0.02", "--dump-config", "sweep", "--set", "r1=4", "--set=n=128"],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in ["r1 = 4\n", "r2 = 0.02\n", "n = 128\n"] {
        assert!(text.contains(line), "missing {line:?}");
    }
}

#[test]
fn simulate_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let args = with_small(&["--out", out, "--raster", "simulate"]);
        assert!(rdsir(dir.path(), &args).status.success());
    }
    for file in ["spacetime.csv", "modes.csv", "S.ppm", "I.ppm", "report.json", "run.json"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert!(a == b, "{file} differs");
    }
    let csv = fs::read_to_string(dir.path().join("a/spacetime.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,x,S,I"));
    // Initial state plus one snapshot every 0.5 time units, 64 points each.
    assert_eq!(lines.count(), 64 * 41);
    let ppm = fs::read(dir.path().join("a/I.ppm")).unwrap();
    assert!(ppm.starts_with(b"P6\n# colormap rdsir-heat-1"));
}

#[test]
fn classify_reproduces_the_simulate_report() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "binary"] {
        let sim = format!("sim-{format}");
        let args = with_small(&["--out", &sim, "simulate", "--format", format]);
        assert!(rdsir(dir.path(), &args).status.success());
        let cls = format!("cls-{format}");
        let out = rdsir(
            dir.path(),
            &["--out", &cls, "--set", "window_start=10", "--set", "window_end=20", "classify", "--input", &sim],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(
            json(&dir.path().join(&sim).join("report.json")),
            json(&dir.path().join(&cls).join("report.json"))
        );
    }
}

#[test]
fn sweep_output_does_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    for (jobs, out) in [("1", "j1"), ("4", "j4")] {
        let args = [
            "--jobs", jobs, "--out", out,
            "--set", "sweep_x=r1:0.5:5:7", "--set", "sweep_y=r2:0.005:0.02:3",
            "sweep",
        ];
        assert!(rdsir(dir.path(), &args).status.success());
    }
    let a = fs::read(dir.path().join("j1/sweep.json")).unwrap();
    let b = fs::read(dir.path().join("j4/sweep.json")).unwrap();
    assert!(a == b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 21);
}

#[test]
fn one_cell_sweep_equals_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let sim = with_small(&["--out", "sim", "simulate"]);
    assert!(rdsir(dir.path(), &sim).status.success());
    let sweep = with_small(&[
        "--out", "sweep", "--set", "sweep_x=r1:2:2:1", "--set", "sweep_mode=pattern", "sweep",
    ]);
    assert!(rdsir(dir.path(), &sweep).status.success());
    let report = json(&dir.path().join("sim/report.json"));
    let cells = json(&dir.path().join("sweep/sweep.json"))["cells"].clone();
    assert_eq!(cells.as_array().unwrap().len(), 1);
    assert_eq!(cells[0]["pattern"], report);
}

#[test]
fn failed_sweep_cells_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdsir(dir.path(), &["--set", "sweep_x=beta:0:0.1:2", "sweep"]);
    assert!(out.status.success());
    let v = json(&dir.path().join("out/sweep.json"));
    assert!(v["cells"][0]["error"].is_string());
    assert!(v["cells"][1]["threshold"].is_object());
}

#[test]
fn solver_abort_keeps_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "--set", "beta=5", "--set", "dt=2", "--set", "t_end=400", "--set", "n=64",
        "--set", "snapshot_stride=1", "simulate",
    ];
    let out = rdsir(dir.path(), &args);
    assert_eq!(out.status.code(), Some(3));
    let run = json(&dir.path().join("out/run.json"));
    assert!(run["failure"].as_str().unwrap().contains("non-finite"));
    let csv = fs::read_to_string(dir.path().join("out/spacetime.csv")).unwrap();
    assert!(csv.lines().count() > 64);
    assert!(!csv.contains("NaN") && !csv.contains("inf"));
}

#[test]
fn exit_codes_follow_the_failure_kind() {
    let dir = tempfile::tempdir().unwrap();
    // E2 is unstable for the kinetics here.
    let unstable = [
        "--set", "a=1", "--set", "d=1", "--set", "mu0=2", "--set", "mu1=10",
        "--set", "beta=12", "--set", "b=0.06", "turing-scan",
    ];
    assert_eq!(rdsir(dir.path(), &unstable).status.code(), Some(3));
    // No generalized Hopf point in this b range.
    let no_gh = [
        "--set", "a=1", "--set", "d=1", "--set", "mu0=2", "--set", "mu1=10",
        "--set", "b_min=0.02", "--set", "b_max=0.04", "--set", "resolution=11", "bifdiagram",
    ];
    let out = rdsir(dir.path(), &no_gh);
    assert_eq!(out.status.code(), Some(4));
    assert!(dir.path().join("out/bifdiagram.csv").exists());
    assert_eq!(
        rdsir(dir.path(), &["turing-hopf", "--k1", "3", "--k2", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn equilibria_report_lists_stability() {
    let dir = tempfile::tempdir().unwrap();
    let out = rdsir(dir.path(), &["equilibria"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["r0"].as_f64().unwrap() - 4.0 / 3.0).abs() < 1e-12);
    let eqs = v["equilibria"].as_array().unwrap();
    assert_eq!(eqs.len(), 2);
    assert_eq!(eqs[0]["stability"], "saddle");
    assert_eq!(eqs[1]["kind"], "EndemicHigh");
    assert_eq!(eqs[1]["stability"], "stable");
    // Low transmission leaves only the disease-free state.
    let out = rdsir(dir.path(), &["--set", "beta=0.01", "equilibria"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["equilibria"].as_array().unwrap().len(), 1);
    assert_eq!(v["equilibria"][0]["stability"], "stable");
}
