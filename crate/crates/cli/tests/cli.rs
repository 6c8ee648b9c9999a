//! End-to-end runs of the `sampledyn` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const UNIQUE_STATE: &str = r#"{"environment": {"u1": 5, "u2": 0.2, "theta": {"1": 0.5, "5": 0.5}}}"#;
const THREE_STATES: &str = r#"{"environment": {"u1": 20, "u2": 0.05, "theta": {"3": 0.5, "1000": 0.5}}}"#;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.out.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }
}

fn run_in(dir: &Path, config: &str, args: &[&str]) -> Run {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_sampledyn"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    Run {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
        out,
    }
}

fn run(config: &str, args: &[&str]) -> (TempDir, Run) {
    let dir = TempDir::new().unwrap();
    let r = run_in(dir.path(), config, args);
    (dir, r)
}

#[test]
fn analyze_reports_the_stable_interior_state() {
    let (_d, r) = run(UNIQUE_STATE, &["analyze"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(
        r.stdout.contains("(0.632835, 0.367165) asymptotically-stable"),
        "{}",
        r.stdout
    );
    assert!(r.stdout.contains("part 1: holds"), "{}", r.stdout);
    let csv = r.read("stationary.csv");
    assert!(csv.starts_with("p1,p2,stability,slope_product,leading_eigenvalue,residual\n"));
    let report = r.json("report.json");
    assert_eq!(report["population"], "two");
    assert!(report["reports"]
        .as_array()
        .unwrap()
        .iter()
        .any(|t| t["theorem"] == "miscoordination conditions"));
}

#[test]
fn identity_response_prints_the_continuum_sentence() {
    let (_d, r) = run(
        r#"{"command": "analyze", "environment": {"u": 2, "theta": {"1": 1}}}"#,
        &[],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("every state is stationary"), "{}", r.stdout);
    let (_d, r) = run(
        r#"{"environment": {"u1": 2, "u2": 0.7, "theta": {"1": 1}}}"#,
        &["analyze"],
    );
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(
        r.stdout.contains("a state is stationary iff it is symmetric"),
        "{}",
        r.stdout
    );
}

#[test]
fn missing_field_is_a_config_error() {
    let (_d, r) = run(r#"{"environment": {"u1": 2, "theta": {"1": 1}}}"#, &["analyze"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("environment.u2"), "{}", r.stderr);
}

#[test]
fn malformed_and_unknown_fields_are_config_errors() {
    let (_d, r) = run(
        r#"{"environment": {"u": 2, "theta": {"1": 1}}, "colour": 1}"#,
        &["analyze"],
    );
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("colour"), "{}", r.stderr);
    let (_d, r) = run("{ not json", &["analyze"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 1"), "{}", r.stderr);
    let (_d, r) = run(r#"{"environment": {"u": 2, "theta": {"1": 0.5}}}"#, &["analyze"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn mismatched_command_is_a_config_error() {
    let (_d, r) = run(
        r#"{"command": "phase", "environment": {"u": 2, "theta": {"1": 1}}}"#,
        &["analyze"],
    );
    assert_eq!(r.code, 2);
    let (_d, r) = run(r#"{"environment": {"u": 2, "theta": {"1": 1}}}"#, &[]);
    assert_eq!(r.code, 2, "no command anywhere");
}

#[test]
fn unwritable_output_is_exit_three() {
    let dir = TempDir::new().unwrap();
    // `out` exists as a regular file, so the output directory cannot be created.
    std::fs::write(dir.path().join("out"), "x").unwrap();
    let r = run_in(
        dir.path(),
        r#"{"environment": {"u": 1.2, "theta": {"3": 1}}}"#,
        &["phase"],
    );
    assert_eq!(r.code, 3, "{}", r.stderr);
}

#[test]
fn phase_plot_marks_stability() {
    let (_d, r) = run(r#"{"environment": {"u": 1.2, "theta": {"3": 1}}}"#, &["phase"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let svg = r.read("phase.svg");
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    let dot =
        |x: &str, y: &str, fill: &str| format!(r#"<circle cx="{x}" cy="{y}" r="6.000000" fill="{fill}""#);
    assert!(
        svg.contains(&dot("300.000000", "300.000000", "white")),
        "hollow dot at 0.5"
    );
    assert!(
        svg.contains(&dot("50.000000", "550.000000", "black")),
        "filled dot at 0"
    );
    assert!(
        svg.contains(&dot("550.000000", "50.000000", "black")),
        "filled dot at 1"
    );
    let csv = r.read("phase.csv");
    assert!(csv.starts_with("p,w\n"));
    assert_eq!(csv.lines().count(), 202);
}

#[test]
fn two_population_phase_has_three_interior_intersections() {
    let (_d, r) = run(THREE_STATES, &["phase"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let svg = r.read("phase.svg");
    assert_eq!(
        svg.matches("r=\"6.000000\"").count(),
        5,
        "two pure and three interior states"
    );
    assert_eq!(svg.matches("fill=\"white\" stroke").count(), 2);
    assert!(r.read("phase.csv").starts_with("p1,w2_of_p1,w1_inverse_of_p1\n"));
}

#[test]
fn reruns_are_byte_identical() {
    for (cmd, cfg) in [("phase", THREE_STATES), ("analyze", UNIQUE_STATE)] {
        let (_a, r1) = run(cfg, &[cmd]);
        let (_b, r2) = run(cfg, &[cmd]);
        assert_eq!(r1.stdout, r2.stdout);
        let mut names: Vec<_> = std::fs::read_dir(&r1.out)
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        for n in names {
            let n = n.to_str().unwrap();
            assert_eq!(r1.read(n), r2.read(n), "{cmd}: {n}");
        }
    }
}

#[test]
fn trajectory_converges_and_writes_csv() {
    let (_d, r) = run(UNIQUE_STATE, &["trajectory", "--tmax", "100"]);
    // Missing initial state.
    assert_eq!(r.code, 2);
    let cfg =
        r#"{"environment": {"u1": 5, "u2": 0.2, "theta": {"1": 0.5, "5": 0.5}}, "initial": [0.2, 0.7]}"#;
    let (_d, r) = run(cfg, &["trajectory", "--tmax", "1000"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("converged to stationary state"), "{}", r.stdout);
    assert!(r.stdout.contains("(0.632835, 0.367165)"), "{}", r.stdout);
    let csv = r.read("trajectory.csv");
    assert!(csv.lines().next().unwrap().starts_with("t,p1,p2"));
}

#[test]
fn basins_cover_the_grid() {
    let (_d, r) = run(THREE_STATES, &["basins", "--resolution", "11"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = r.read("basins.csv");
    assert!(csv.starts_with("cell_p1,cell_p2,attractor_index,flag\n"));
    assert_eq!(csv.lines().count(), 122);
    let legend = r.json("basins_legend.json");
    assert!(legend.is_object() || legend.is_array());
    assert!(r.stdout.contains("share"));
}

#[test]
fn oracle_is_reproducible_per_seed() {
    let cfg = r#"{"environment": {"u1": 5, "u2": 0.2, "theta": {"1": 0.5, "5": 0.5}},
                 "initial": [0.2, 0.7], "n": 2000, "t_max": 5, "samples": 2000, "grid_points": 5}"#;
    let (_a, r1) = run(cfg, &["oracle", "--seed", "42"]);
    let (_b, r2) = run(cfg, &["oracle", "--seed", "42"]);
    let (_c, r3) = run(cfg, &["oracle", "--seed", "43"]);
    assert_eq!(r1.code, 0, "{}", r1.stderr);
    for f in ["oracle_trajectory.csv", "oracle_response.csv"] {
        assert_eq!(r1.read(f), r2.read(f));
    }
    assert_ne!(r1.read("oracle_trajectory.csv"), r3.read("oracle_trajectory.csv"));
    assert!(r1
        .read("oracle_trajectory.csv")
        .starts_with("# seed=42 n=2000\nt,p1,p2\n"));
    assert_eq!(r1.read("oracle_response.csv").lines().count(), 11);
}

#[test]
fn mass_sweep_locates_stable_interior_states() {
    let cfg = r#"{"environment": {"u": 1.5},
                 "sweep": {"parameter": "mass", "from": 0.4, "to": 0.7, "step": 0.01, "k": 2, "big_k": 1000}}"#;
    let (_d, r) = run(cfg, &["sweep"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let csv = r.read("sweep.csv");
    let stable_at = |v: &str| {
        let row = csv
            .lines()
            .find(|l| l.split(',').next() == Some(v))
            .unwrap_or_else(|| panic!("no row {v}"));
        row.split(',').nth(2).unwrap().to_string()
    };
    assert_eq!(stable_at("0.55"), "true");
    assert_eq!(stable_at("0.45"), "false");
    assert_eq!(stable_at("0.65"), "false");
    assert_eq!(csv.lines().count(), 32);
}

#[test]
fn normalize_examples() {
    let (_d, r) = run(r#"{"hawk_dove": {"g": 0.04, "l": 0.2}}"#, &["normalize"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json("normalize.json");
    assert!((j["game"]["u1"].as_f64().unwrap() - 20.0).abs() < 1e-9);
    assert!((j["game"]["u2"].as_f64().unwrap() - 0.05).abs() < 1e-9);
    assert_eq!(j["antisymmetric"], true);

    let (_d, r) = run(r#"{"symmetric": [3, 0, 2, 2]}"#, &["normalize"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let j = r.json("normalize.json");
    assert!((j["game"]["u1"].as_f64().unwrap() - 0.5).abs() < 1e-9, "{j}");

    let (_d, r) = run(
        r#"{"symmetric": [3, 0, 2, 2], "hawk_dove": {"g": 0.04, "l": 0.2}}"#,
        &["normalize"],
    );
    assert_eq!(r.code, 2);
}

#[test]
fn extension_models_analyze() {
    let cfg = r#"{"environment": {"contracting": {"M": 3, "diag1": [4, 2, 1], "diag2": [1, 2, 4]},
                                  "theta": {"1": 0.6, "4": 0.4}}}"#;
    let (_d, r) = run(cfg, &["analyze"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.matches("  action ").count(), 3);
    let cfg = r#"{"environment": {"min_effort": {"N": 2, "c": 0.5, "observation": "minimum-effort"},
                                  "theta": {"1": 1}}}"#;
    let (_d, r) = run(cfg, &["analyze"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("every state is stationary"), "{}", r.stdout);
    assert!(r.stdout.contains("state L:") && r.stdout.contains("state H:"));
    let cfg = r#"{"environment": {"u": 2.5, "groups": [{"mass": 0.55, "eta": 0.55}, {"mass": 0.45, "eta": 0.01}]}}"#;
    let (_d, r) = run(cfg, &["analyze"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("mistake probability"), "{}", r.stdout);
}

#[test]
fn help_lists_exit_codes() {
    let o = Command::new(env!("CARGO_BIN_EXE_sampledyn"))
        .arg("--help")
        .output()
        .unwrap();
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("Exit codes") || s.contains("exit codes"), "{s}");
    let o = Command::new(env!("CARGO_BIN_EXE_sampledyn"))
        .arg("--bogus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn shipped_configs_run() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    assert!(paths.len() >= 10);
    for path in paths {
        let out = TempDir::new().unwrap();
        let o = Command::new(env!("CARGO_BIN_EXE_sampledyn"))
            .arg("--config")
            .arg(&path)
            .arg("--out")
            .arg(out.path())
            .output()
            .unwrap();
        assert!(
            o.status.success(),
            "{}: {}",
            path.display(),
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(
            std::fs::read_dir(out.path()).unwrap().count() > 0,
            "{}",
            path.display()
        );
    }
}
