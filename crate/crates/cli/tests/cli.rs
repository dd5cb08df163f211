use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn twophase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twophase"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn params_prints_delta_and_reports_uncertified_gap() {
    let out = twophase(&["params"]);
    let text = stdout(&out);
    let delta: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("delta = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((delta - 0.3247).abs() < 5e-4, "{delta}");
    assert!(text.contains("gap_certified = false"));
    assert_eq!(code(&out), 6);
}

#[test]
fn params_with_certified_gap_exits_zero() {
    let out = twophase(&[
        "params",
        "--set",
        "epsilon=auto",
        "--set",
        "lambda=0.9",
        "--set",
        "Lambda=1.1",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).contains("gap_certified = true"));
}

#[test]
fn params_infeasible_ratio_exits_two() {
    assert_eq!(code(&twophase(&["params", "--set", "R=1.5"])), 2);
}

#[test]
fn malformed_input_exits_one() {
    assert_eq!(code(&twophase(&["params", "--set", "bogus=1"])), 1);
    assert_eq!(code(&twophase(&["params", "--set", "R=abc"])), 1);
    assert_eq!(code(&twophase(&["params", "--set", "no_equals_sign"])), 1);
    assert_eq!(code(&twophase(&["params", "--no-such-flag"])), 1);
    assert_eq!(
        code(&twophase(&["params", "--config", "/nonexistent/run.cfg"])),
        1
    );
}

#[test]
fn config_file_is_overridden_by_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("params.cfg");
    fs::write(&cfg, "# infeasible on its own\nR = 1.5\n").unwrap();
    let path = cfg.to_str().unwrap();
    assert_eq!(code(&twophase(&["params", "--config", path])), 2);
    assert_eq!(
        code(&twophase(&["params", "--config", path, "--set", "R=10"])),
        6
    );
}

#[test]
fn half_plane_column_is_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let out = twophase(&[
        "simulate",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "L=4",
        "--set",
        "spacing=0.1",
        "--set",
        "t_end=1",
        "--set",
        "times=0.25 0.5 1",
    ]);
    assert_eq!(code(&out), 0);
    let values = column(&read(dir.path(), "simulate.csv"), "probe_0");
    assert_eq!(values.len(), 3);
    for u in values {
        assert!((u - 0.5).abs() <= 5e-3, "{u}");
    }
    let meta = read(dir.path(), "simulate.meta.txt");
    assert!(meta.contains("budget"), "{meta}");
}

#[test]
fn oversized_end_time_exits_three() {
    assert_eq!(
        code(&twophase(&[
            "simulate",
            "--set",
            "t_end=100",
            "--set",
            "times=100"
        ])),
        3
    );
}

#[test]
fn starved_linear_solver_exits_four() {
    let out = twophase(&[
        "simulate",
        "--set",
        "L=4",
        "--set",
        "spacing=0.1",
        "--set",
        "t_end=1",
        "--set",
        "times=1",
        "--set",
        "max_iterations=1",
    ]);
    assert_eq!(code(&out), 4);
}

#[test]
fn oscillatory_simulation_matches_series() {
    let shell = [
        "--set",
        "kind=oscillatory",
        "--set",
        "arcs=[0, pi/8] [0, pi/2]",
        "--set",
        "R=10",
        "--set",
        "epsilon=0.1",
    ];
    let mut sim = vec![
        "simulate",
        "--set",
        "L=30",
        "--set",
        "spacing=0.2",
        "--set",
        "t_end=4pi",
        "--set",
        "times=2 4pi",
    ];
    sim.extend(shell);
    let out = twophase(&sim);
    assert_eq!(code(&out), 0);
    let solver = column(&stdout(&out), "probe_0");

    let mut series = vec!["series", "--set", "times=2 4pi"];
    series.extend(&shell[..]);
    let out = twophase(&series);
    assert_eq!(code(&out), 0);
    let oracle = column(&stdout(&out), "u");
    for (u, v) in solver.iter().zip(&oracle) {
        assert!((u - v).abs() <= 0.03 * v, "{u} vs {v}");
    }
}

#[test]
fn simulate_output_is_byte_identical_across_runs() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = twophase(&[
            "simulate",
            "--out",
            dir.path().to_str().unwrap(),
            "--set",
            "kind=cone",
            "--set",
            "arcs=[0, pi/4]",
            "--set",
            "sigma_plus=2",
            "--set",
            "sigma_minus=1",
            "--set",
            "L=6",
            "--set",
            "spacing=0.2",
            "--set",
            "t_end=0.5",
            "--set",
            "times=0.1 0.25 0.5",
            "--set",
            "probes=[0, 0] [0.5, 0.5]",
        ]);
        assert_eq!(code(&out), 0);
        fs::read(dir.path().join("simulate.csv")).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn geometry_check_reports_and_validates() {
    let out = twophase(&[
        "geometry-check",
        "--set",
        "p=0",
        "--set",
        "points=[1, 0.1] [0, 1]",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("starshaped = true"));
    assert!(text.contains("contains [1, 0.1] = true"));
    assert!(text.contains("contains [0, 1] = false"));

    assert_eq!(code(&twophase(&["geometry-check", "--set", "p=pi"])), 5);

    let sandwich = [
        "geometry-check",
        "--set",
        "kind=sandwich",
        "--set",
        "p=0",
        "--set",
        "h=0.2",
        "--set",
        "samples=2000",
    ];
    assert_eq!(code(&twophase(&sandwich)), 0);
    let mut broken = sandwich.to_vec();
    broken.extend(["--set", "bumps=[-3, 0, 0.5]"]);
    assert_eq!(code(&twophase(&broken)), 5);
}

#[test]
fn selfsim_with_unit_scale_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = twophase(&[
        "experiment",
        "selfsim",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "ks=1",
        "--set",
        "L=8",
        "--set",
        "spacings=0.4",
    ]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let summary = read(dir.path(), "selfsim.summary");
    assert!(
        summary.starts_with("study=selfsim") && summary.trim_end().ends_with("result=pass"),
        "{summary}"
    );
    assert_eq!(
        column(&read(dir.path(), "selfsim.csv"), "deviation"),
        vec![0.0]
    );
    assert!(dir.path().join("selfsim.txt").exists());
}

#[test]
fn stabilization_with_failing_sandwich_exits_five() {
    assert_eq!(
        code(&twophase(&[
            "experiment",
            "stabilize",
            "--set",
            "bumps=[-3, 0, 0.5]"
        ])),
        5
    );
}

#[test]
fn oscillation_default_passes_with_oracle_agreement() {
    let out = twophase(&["experiment", "oscillate"]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.contains("oracle_agreement=pass"), "{text}");
    assert!(text.contains("oracle_separation=pass"), "{text}");
}

#[test]
fn tighter_tolerance_flag_fails_oscillation_agreement() {
    let out = twophase(&["experiment", "oscillate", "--tol", "1e-4"]);
    assert_eq!(code(&out), 6, "{}", stdout(&out));
    assert!(stdout(&out).contains("oracle_agreement=fail"));
}
