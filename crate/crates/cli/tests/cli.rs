use std::f64::consts::{FRAC_PI_2, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use catgate::config::parse_config;
use catgate::output::{CsvRow, HEADER};
use catgate_core::physical::simulate;
use catgate_core::C64;

fn catgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catgate"))
        .args(args)
        .env_remove("CATGATE_DIM_LIMIT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field(text: &str, key: &str) -> C64 {
    let line = text
        .lines()
        .find(|l| l.split('=').next().map(str::trim) == Some(key))
        .unwrap_or_else(|| panic!("no '{key}' in {text}"));
    line.split('=').nth(1).unwrap().trim().parse().unwrap()
}

fn read_csv(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

const PHASE_CFG: &str = r#"
gate = "phase"
alpha = 1.0
phi = "pi/2"
r = 0.05
x = 1.0
y = [0.0, 1.0]
sweep_axis = "r"
sweep_values = [0.2, 0.1, 0.05, 0.02, 0.01]
"#;

fn write_cfg(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn solve_phase_satisfies_the_gate_condition() {
    for (alpha, phi, phi_val) in [("1", "pi/2", FRAC_PI_2), ("0.7-0.4i", "pi", PI), ("1.5", "2.0", 2.0), ("2", "-pi/4", -PI / 4.0)] {
        let o = catgate(&["solve", "phase", "--alpha", alpha, "--phi", phi]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let gamma = field(&stdout(&o), "gamma");
        let a: C64 = alpha.parse().unwrap();
        let ratio = (gamma - a) / (gamma + a);
        assert!((ratio - C64::from_polar(1.0, phi_val)).norm() < 1e-8, "{alpha} {phi}: {gamma}");
    }
}

#[test]
fn solve_cphase_at_pi_gives_golden_roots() {
    let o = catgate(&["solve", "cphase", "--alpha", "1", "--phi", "pi"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let s5 = 5f64.sqrt();
    assert!((field(&out, "gamma1") - C64::new(-1.0 - s5, 0.0)).norm() < 1e-8);
    assert!((field(&out, "gamma2") - C64::new(-1.0 + s5, 0.0)).norm() < 1e-8);
}

#[test]
fn solve_hadamard_reports_the_acceptance_value() {
    let o = catgate(&["solve", "hadamard", "--alpha", "1", "--gamma", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    // q = (β² − ln(β/(Γα)))/(√2 β) with β = 2
    let want = (4.0 - (2.0f64 / 0.1).ln()) / (2.0 * 2f64.sqrt());
    let line = out.lines().find(|l| l.starts_with("projection")).unwrap();
    let value: f64 = line.rsplit('=').next().unwrap().trim_end_matches('|').trim().parse().unwrap();
    assert!((value - want).abs() < 1e-10, "{line}");

    let o = catgate(&["solve", "hadamard", "--alpha", "1", "--variant", "exact_even_fock(4)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("<4|"));
}

#[test]
fn degenerate_phase_exits_with_solver_code() {
    for phi in ["0", "2pi", "2*pi"] {
        let o = catgate(&["solve", "phase", "--alpha", "1", "--phi", phi]);
        assert_eq!(o.status.code(), Some(2), "phi = {phi}: {}", stderr(&o));
    }
    let o = catgate(&["solve", "cphase", "--alpha", "1", "--phi", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_with_config_code() {
    for args in [
        &["solve", "phase", "--phi", "pi"][..],
        &["solve", "phase", "--alpha", "one", "--phi", "pi"],
        &["solve", "hadamard", "--alpha", "1", "--variant", "bogus"],
        &["solve", "hadamard", "--alpha", "1", "--gamma", "0.1", "--t-gamma", "0.1"],
        &["frobnicate"],
        &["validate", "--group", "nonsense"],
        &[],
    ] {
        let o = catgate(args);
        assert_eq!(o.status.code(), Some(3), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(catgate(&["--help"]).status.code(), Some(0));
    assert_eq!(catgate(&["--version"]).status.code(), Some(0));
}

#[test]
fn run_appends_the_simulated_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phase.toml", PHASE_CFG);
    let out = dir.path().join("runs.csv");
    let out_s = out.to_str().unwrap();
    for _ in 0..2 {
        let o = catgate(&["run", "--config", &cfg, "--out", out_s, "--quiet"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(o.stdout.is_empty());
    }
    let rows = read_csv(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0], HEADER);

    let parsed = parse_config(PHASE_CFG).unwrap();
    let want = CsvRow::new(&parsed.spec, &simulate(&parsed.spec, &parsed.input));
    assert_eq!(rows[1], want.0);
    assert_eq!(rows[2], want.0);
    assert_eq!(rows[1][11], "ok");
}

#[test]
fn run_prints_a_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phase.toml", PHASE_CFG);
    let o = catgate(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("phase_fig1"));
    assert!(text.contains("success probability"));
}

#[test]
fn sweep_rows_follow_the_value_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phase.toml", PHASE_CFG);
    let o = catgate(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_csv(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert_eq!(rows[0], HEADER);
    let rs: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(rs, vec![0.2, 0.1, 0.05, 0.02, 0.01]);
    let fid: Vec<f64> = rows[1..].iter().map(|r| r[8].parse().unwrap()).collect();
    assert!(fid.windows(2).all(|w| w[1] >= w[0]), "{fid:?}");
    assert!(rows[1..].iter().all(|r| r[11] == "ok"));
}

#[test]
fn sweep_overwrites_its_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phase.toml", PHASE_CFG);
    let out = dir.path().join("sweep.csv");
    fs::write(&out, "stale\nstale\nstale\nstale\nstale\nstale\nstale\nstale\n").unwrap();
    let o = catgate(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let rows = read_csv(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[0] != "stale"));
}

#[test]
fn detector_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phase.toml", PHASE_CFG);
    let out = dir.path().join("d.csv");
    let o = catgate(&["run", "--config", &cfg, "--out", out.to_str().unwrap(), "--detector", "onoff", "--quiet"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = read_csv(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows[1][6], "onoff_povm");
    let o = catgate(&["run", "--config", &cfg, "--detector", "geiger"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_problems_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "bad.toml", &PHASE_CFG.replace("alpha = 1.0\n", ""));
    let o = catgate(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("alpha"));

    let cfg = write_cfg(dir.path(), "typo.toml", &format!("{PHASE_CFG}colour = 3\n"));
    let o = catgate(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("colour"));

    let o = catgate(&["run", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let cfg = write_cfg(dir.path(), "nosweep.toml", &PHASE_CFG.replace("sweep_axis = \"r\"\n", "").replace("sweep_values = [0.2, 0.1, 0.05, 0.02, 0.01]\n", ""));
    assert_eq!(catgate(&["sweep", "--config", &cfg]).status.code(), Some(3));
}

#[test]
fn simulation_failures_still_write_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "small.toml", &format!("{PHASE_CFG}cutoffs = [3]\n"));
    let out = dir.path().join("fail.csv");
    let o = catgate(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    let rows = read_csv(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 6);
    assert!(rows[1..].iter().all(|r| r[11].starts_with("error:")));
}

#[test]
fn dimension_limit_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "phase.toml", PHASE_CFG);
    let run = |limit: &str| {
        Command::new(env!("CARGO_BIN_EXE_catgate"))
            .args(["run", "--config", &cfg, "--quiet"])
            .env("CATGATE_DIM_LIMIT", limit)
            .output()
            .unwrap()
    };
    assert_eq!(run("10").status.code(), Some(4));
    assert_eq!(run("100000").status.code(), Some(0));
    assert_eq!(run("lots").status.code(), Some(3));
}

#[test]
fn validate_exit_codes() {
    let o = catgate(&["validate", "--group", "solvers"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("[PASS] solvers"));

    let o = catgate(&["validate", "--group", "solvers", "--tolerance", "0"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("[FAIL] solvers"));

    let o = catgate(&["validate", "--group", "operators", "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}
