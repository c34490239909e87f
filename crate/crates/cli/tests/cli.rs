use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use gauge_measure::lab::{self, ReportFormat, Theorem};
use gauge_measure::{hk_integrate, HkOptions, ScalarMeasure};
use gauge_measure_cli::config::{integrand_of, parse_expr, parse_set, Config};
use gauge_measure_cli::exit;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gauge-measure")).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["gauge-measure"];
    full.extend_from_slice(args);
    let code = gauge_measure_cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn field(stdout: &str, key: &str) -> String {
    let prefix = format!("{key} = ");
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{stdout}"))
        .to_string()
}

const VECTOR_CONFIG: &str = r#"
[measures.leb01]
density = "1"
support = [0.0, 1.0]

[measures.rho]
density = "2*t"
support = [0.0, 1.0]

[vector_measures.mu]
components = ["leb01", "rho"]
"#;

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn integrate_square_on_unit_interval() {
    let (code, out, _) = run(&["integrate", "--f", "t^2", "--measure", "lebesgue", "--set", "[0,1]", "--tol", "1e-9"]);
    assert_eq!(code, exit::OK);
    let v: f64 = field(&out, "value").parse().unwrap();
    assert!((v - 1.0 / 3.0).abs() <= 1e-9, "{v}");
}

#[test]
fn integrate_zero() {
    let (code, out, _) = run(&["integrate", "--f", "0"]);
    assert_eq!(code, exit::OK);
    assert_eq!(field(&out, "value").parse::<f64>().unwrap(), 0.0);
}

#[test]
fn printed_value_matches_library_bit_for_bit() {
    let (_, out, _) = run(&["integrate", "--f", "sin(3*t) + t^2", "--set", "[0,2]", "--tol", "1e-8"]);
    let printed: f64 = field(&out, "value").parse().unwrap();
    let f = integrand_of(&parse_expr("--f", "sin(3*t) + t^2").unwrap());
    let set = parse_set("[0,2]").unwrap();
    let r = hk_integrate(&f, &set, &ScalarMeasure::lebesgue(), &HkOptions::new(1e-8)).unwrap();
    assert_eq!(printed.to_bits(), r.value.to_bits());
}

#[test]
fn kl_signed_mode_prints_documented_vector() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", VECTOR_CONFIG);
    let (code, out, _) = run(&["integrate", "--config", &cfg, "--f", "t", "--measure", "mu"]);
    assert_eq!(code, exit::OK);
    let x = field(&out, "x");
    let parts: Vec<f64> = x.trim_matches(|c| c == '[' || c == ']').split(", ").map(|s| s.parse().unwrap()).collect();
    assert!((parts[0] - 0.5).abs() < 1e-6 && (parts[1] - 2.0 / 3.0).abs() < 1e-6, "{x}");
    assert!(field(&out, "residual").parse::<f64>().unwrap() <= 1e-8);
}

#[test]
fn variation_mode_on_antipodal_grid_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", VECTOR_CONFIG);
    let (code, _, err) = run(&["integrate", "--config", &cfg, "--f", "t", "--measure", "mu", "--mode", "variation"]);
    assert_eq!(code, exit::INTEGRABILITY);
    assert!(err.contains("antipodal"), "{err}");
    let (code, _, err) =
        run(&["integrate", "--config", &cfg, "--f", "t", "--measure", "mu", "--mode", "variation", "--hemisphere"]);
    // |x*mu| is not linear in x* here, so assembly fails on the residual instead
    assert_eq!(code, exit::INTEGRABILITY);
    assert!(!err.contains("antipodal") && err.contains("residual"), "{err}");
}

#[test]
fn config_with_unknown_key_exits_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "tol = 1e-6\nfoo = 1\n");
    let (code, _, err) = run(&["integrate", "--config", &cfg]);
    assert_eq!(code, exit::CONFIG);
    assert!(err.contains("line 2") && err.contains("foo"), "{err}");
}

#[test]
fn nonpositive_tolerance_is_a_config_error() {
    assert_eq!(run(&["integrate", "--f", "t", "--tol", "0"]).0, exit::CONFIG);
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "tol = -1.0\n");
    assert_eq!(run(&["integrate", "--config", &cfg]).0, exit::CONFIG);
}

#[test]
fn bad_expression_exits_one() {
    let (code, _, err) = run(&["integrate", "--f", "t +* 2"]);
    assert_eq!(code, exit::CONFIG);
    assert!(err.contains("column"), "{err}");
}

#[test]
fn experiment_dct_default_passes_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dct.csv");
    let (code, out, _) = run(&["experiment", "--theorem", "dct", "--output", path.to_str().unwrap()]);
    assert_eq!(code, exit::OK);
    assert_eq!(field(&out, "verdict"), "pass");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("theorem_id,seed,n,discrepancy,tolerance,verdict"), "{text}");
    assert_eq!(text.lines().count(), 1 + lab::DEFAULT_N_VALUES.len());
}

#[test]
fn experiment_report_matches_library() {
    let (code, out, _) = run(&["experiment", "--theorem", "bct", "--instance", "power", "--format", "json"]);
    assert_eq!(code, exit::OK);
    let exp = lab::builtin(Theorem::Bct, "power", 0, None, None).unwrap();
    let bytes = lab::render_report(&exp.run().unwrap(), ReportFormat::Json).unwrap();
    assert_eq!(out.as_bytes(), &bytes[..]);
}

#[test]
fn experiment_fail_verdict_exits_three() {
    let (code, out, _) = run(&["experiment", "--theorem", "bct", "--instance", "alternating"]);
    assert_eq!(code, exit::CONVERGENCE);
    assert!(out.contains("fail"));
}

#[test]
fn experiment_generator_violation_exits_four() {
    let (code, _, err) = run(&["experiment", "--theorem", "dct-sv", "--instance", "violating"]);
    assert_eq!(code, exit::GENERATOR);
    assert!(err.contains("precondition"), "{err}");
}

#[test]
fn bad_theorem_exits_one_with_usage() {
    let (code, _, err) = run(&["experiment", "--theorem", "dtc"]);
    assert_eq!(code, exit::CONFIG);
    assert!(err.contains("usage:"), "{err}");
}

#[test]
fn experiment_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("r.json");
    let text = format!(
        r#"
seed = 7

[experiments.vit]
theorem = "vitali-sv"
instance = "shift"
format = "json"
output = "{}"
"#,
        out_path.to_str().unwrap()
    );
    let cfg = write(dir.path(), "e.toml", &text);
    let (code, out, _) = run(&["experiment", "--config", &cfg, "--name", "vit"]);
    assert_eq!(code, exit::OK, "{out}");
    let report = fs::read_to_string(&out_path).unwrap();
    assert!(report.contains("\"seed\": 7") || report.contains("\"seed\":7"), "{report}");
    assert!(Config::parse(&text).is_ok());
}

#[test]
fn setintegrate_unit_ball_has_norm_one() {
    let (code, out, _) =
        run(&["setintegrate", "--shape", "ball", "--center", "0,0", "--radius", "1", "--set", "[0,1]"]);
    assert_eq!(code, exit::OK);
    let n: f64 = field(&out, "norm_of_set").parse().unwrap();
    assert!((n - 1.0).abs() < 1e-9, "{n}");
    assert!(field(&out, "convex").starts_with("true"));
    assert!(out.contains("direction,support"));
}

#[test]
fn setintegrate_zero_density_gives_origin() {
    let (code, out, _) = run(&["setintegrate", "--shape", "ball", "--center", "0,0", "--radius", "1", "--f", "0"]);
    assert_eq!(code, exit::OK);
    assert_eq!(field(&out, "norm_of_set").parse::<f64>().unwrap(), 0.0);
}

#[test]
fn setintegrate_sign_changing_density_exits_two() {
    let (code, _, err) = run(&["setintegrate", "--shape", "ball", "--center", "0,0", "--radius", "1", "--f", "t-1"]);
    assert_eq!(code, exit::INTEGRABILITY);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn repeated_commands_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", VECTOR_CONFIG);
    let commands: Vec<Vec<&str>> = vec![
        vec!["integrate", "--f", "sin(1/t)*t", "--set", "[0,1]", "--exempt", "0"],
        vec!["integrate", "--config", &cfg, "--f", "t^2", "--measure", "mu"],
        vec!["experiment", "--theorem", "dct", "--seed", "3"],
        vec!["experiment", "--theorem", "vitali-sv", "--format", "json"],
        vec!["setintegrate", "--shape", "zonotope", "--center", "0,0", "--generator", "1,0", "--generator", "1,1"],
    ];
    for args in commands {
        let a = bin(&args);
        let b = bin(&args);
        assert_eq!(a.status.code(), b.status.code(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.stderr, b.stderr, "{args:?}");
    }
}

#[test]
fn repeated_report_files_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.csv");
    let p2 = dir.path().join("b.csv");
    for p in [&p1, &p2] {
        let o = bin(&["experiment", "--theorem", "dct-sv", "--seed", "11", "--output", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(exit::OK));
    }
    assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
}
