use std::fs;
use std::process::{Command, Output};

fn pathwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathwave"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const SMALL: &str = r#"
schema = 1
name = "small"

[models]
m1 = { num = [4.0, 4.0], den = [0.0, 0.0, 4.0, 1.0] }
m2 = { num = [1.0, 1.0], den = [0.0, 0.0, 3.0, 1.0] }

[chain]
segments = ["2 x m1", "2 x m2"]
absorbers = ["leader", "rear", "soft:2"]

[sim]
t_final_s = 20.0
dt_s = 0.02

[grid]
omega_min_rad_s = 0.01
omega_max_rad_s = 10.0
points = 64
"#;

#[test]
fn presets_lists_and_prints() {
    let o = pathwave(&["presets"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for n in ["fig5", "fig6", "fig7", "fig8"] {
        assert!(text.contains(n));
    }
    let o = pathwave(&["presets", "fig5"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("schema = 1"));
    assert_eq!(code(&pathwave(&["presets", "nope"])), 2);
}

#[test]
fn run_writes_traces_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let o = pathwave(&["run", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let traces = fs::read(out.join("small/traces.csv")).unwrap();
        let report = fs::read(out.join("small/report.toml")).unwrap();
        let agent0 = fs::read(out.join("small/agent0.csv")).unwrap();
        outputs.push((
            traces,
            report,
            agent0,
            fs::read(out.join("summary.toml")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let traces = String::from_utf8(outputs[0].0.clone()).unwrap();
    let header: Vec<&str> = traces.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + 4 * 4);
    assert_eq!(traces.lines().count(), 1 + 1001);
    let report = String::from_utf8(outputs[0].1.clone()).unwrap();
    for key in [
        "config_hash",
        "tool_version",
        "kaa",
        "max_residual",
        "verdict",
    ] {
        assert!(report.contains(key), "{key}");
    }
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.toml");
    fs::write(&cfg, SMALL).unwrap();
    let out = dir.path().join("o");
    let o = pathwave(&[
        "run",
        cfg.to_str().unwrap(),
        "--dt",
        "0.05",
        "--t-final",
        "5",
        "--fir-horizon",
        "5",
        "--omega-min",
        "0.1",
        "--omega-max",
        "5",
        "--grid-points",
        "16",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("small/report.toml")).unwrap();
    assert!(report.contains("dt_s = 0.05"));
    assert!(report.contains("grid_points = 16"));
    assert_eq!(
        fs::read_to_string(out.join("small/traces.csv"))
            .unwrap()
            .lines()
            .count(),
        1 + 101
    );
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, SMALL.replace("soft:2", "soft:1")).unwrap();
    let o = pathwave(&["analyze", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    fs::write(&cfg, SMALL.replace("schema = 1", "schema = 1\ncolour = 3")).unwrap();
    let o = pathwave(&["analyze", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert_eq!(
        code(&pathwave(&["run", "--preset", "fig5", "--dt", "-1"])),
        2
    );
}

#[test]
fn divergence_exits_3() {
    // open-loop pole at s = 1 with negative gain
    let text = r#"
schema = 1
name = "unstable"
[models]
m = { num = [-1.0], den = [-1.0, 1.0] }
[chain]
segments = ["2 x m"]
[sim]
t_final_s = 200.0
dt_s = 0.05
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("u.toml");
    fs::write(&cfg, text).unwrap();
    let o = pathwave(&["run", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn check_stability_strict() {
    let o = pathwave(&["check-stability", "--preset", "fig5", "--strict"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.matches("verdict = true").count(), 2);
    let bad = ["check-stability", "--num", "1,-1", "--den", "0,0,1,1"];
    assert_eq!(code(&pathwave(&bad)), 0);
    let mut strict = bad.to_vec();
    strict.push("--strict");
    let o = pathwave(&strict);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("verdict = false"));
}

#[test]
fn analyze_prints_report() {
    let o = pathwave(&["analyze", "--preset", "fig8", "--variant", "kp1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("kaa = 0.732050807568877"), "{text}");
    assert_eq!(
        code(&pathwave(&[
            "analyze",
            "--preset",
            "fig8",
            "--variant",
            "kp9"
        ])),
        2
    );
}
