use std::io::Write;
use std::process::{Command, Output, Stdio};

use changekit::indicator::{eval_f, Lambda, PositivePair};
use serde_json::Value;

const SALES: &str = "label,past,present\nI,10,20\nII,500,570\nIII,140,210\nIV,35,70\nV,80,135\n";

fn run_with(args: &[&str], stdin: &str, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_changekit"));
    cmd.args(args)
        .env_remove("CHANGEKIT_SEED")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped());
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn run(args: &[&str]) -> Output {
    run_with(args, "", &[])
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn rank_table_from_stdin() {
    let out = run_with(&["rank"], SALES, &[]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("f_0.5") && lines[0].contains("rank"));
    assert!(lines[1].starts_with("V ") && lines[1].trim_end().ends_with('1'));
    assert!(text.contains("68.75%"));
    assert!(text.contains("u^0.5"));
}

#[test]
fn rank_from_file_matches_stdin() {
    let dir = std::env::temp_dir().join(format!("changekit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sales.csv");
    std::fs::write(&path, SALES.replace('\n', "\r\n")).unwrap();
    let from_file = run(&["rank", "--format", "csv", path.to_str().unwrap()]);
    let from_stdin = run_with(&["rank", "--format", "csv", "-"], SALES, &[]);
    assert!(from_file.status.success());
    assert_eq!(from_file.stdout, from_stdin.stdout);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn rank_absolute_change_ties_top() {
    let out = run_with(&["rank", "--lambda", "0", "--format", "csv"], SALES, &[]);
    let text = stdout(&out);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows[0][0], "II");
    assert_eq!(rows[1][0], "III");
    assert_eq!((rows[0][6], rows[1][6]), ("1", "1"));
    assert_eq!(rows[0][5], "70.00");
}

#[test]
fn rank_json_is_an_array_in_column_order() {
    let out = run_with(
        &["rank", "--format", "json", "--indicator", "F"],
        SALES,
        &[],
    );
    let text = stdout(&out);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 5);
    let first = text.find("\"label\"").unwrap();
    let last = text.find("\"rank\"").unwrap();
    assert!(
        first < text.find("\"indicator\"").unwrap() && text.find("\"indicator\"").unwrap() < last
    );
}

#[test]
fn full_precision_csv_round_trips() {
    let first = run_with(
        &[
            "rank",
            "--format",
            "csv",
            "--precision",
            "15",
            "--lambda",
            "0.3",
        ],
        SALES,
        &[],
    );
    let again = run_with(
        &[
            "rank",
            "--format",
            "csv",
            "--precision",
            "15",
            "--lambda",
            "0.3",
        ],
        &stdout(&first),
        &[],
    );
    assert_eq!(first.stdout, again.stdout);
    let lambda = Lambda::new(0.3).unwrap();
    for line in stdout(&first).lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        let p = PositivePair::new(cells[1].parse().unwrap(), cells[2].parse().unwrap()).unwrap();
        let written: f64 = cells[5].parse().unwrap();
        assert_eq!(written.to_bits(), eval_f(lambda, p).to_bits());
    }
}

#[test]
fn rank_input_errors_exit_one() {
    let out = run_with(&["rank"], "label,past,present\nX,0,5\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ValidationError"));
    assert!(stderr(&out).contains("past"));

    let out = run_with(&["rank"], "label,past,present\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no observations"));

    let out = run_with(&["rank"], "a,b,c\nX,1,2\n", &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("ParseError"));

    let out = run_with(&["rank", "--precision", "16"], SALES, &[]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_with(&["rank", "--indicator", "g"], SALES, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic() {
    let a = run_with(&["rank", "--format", "json"], SALES, &[]);
    let b = run_with(&["rank", "--format", "json"], SALES, &[]);
    assert_eq!(a.stdout, b.stdout);
    let a = run(&["verify", "--target", "f", "--samples", "200"]);
    let b = run(&["verify", "--target", "f", "--samples", "200"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn compare_prints_unit_free_quotient() {
    let out = run(&["compare", "--ref", "10,20", "--cmp", "80,135"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let q: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("quotient = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!((q - 1.946).abs() < 2e-3);
    let out = run(&["compare", "--ref", "3,3", "--cmp", "1,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("StagnantReference"));
}

#[test]
fn calibrate_examples() {
    let out = run(&["calibrate", "--ref", "1,2", "--cmp", "2,4"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("lambda = 1\n"));
    assert!(stdout(&out).contains("residual = 0e0"));

    let out = run(&["calibrate", "--ref", "1,2", "--cmp", "1,2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("EqualPastValues"));

    let out = run(&["calibrate", "--ref", "1,2", "--cmp", "4,3"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("SignMismatch"));

    let out = run(&["calibrate", "--ref", "1,2", "--cmp", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_big_f_all_pass() {
    let out = run(&["verify", "--target", "F", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let reports: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = reports
        .iter()
        .map(|r| r["property"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "naturality",
            "relative_scaling",
            "antisymmetry",
            "additivity",
            "normed"
        ]
    );
    assert!(reports
        .iter()
        .all(|r| r["pass"] == true && r["samples"] == 10_000));
}

#[test]
fn verify_rel_reports_expected_failures() {
    let out = run(&["verify", "--target", "rel"]);
    assert_eq!(out.status.code(), Some(0));
    let reports: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    for property in ["antisymmetry", "additivity"] {
        let r = reports.iter().find(|r| r["property"] == property).unwrap();
        assert_eq!(r["pass"], false);
        assert!(r["worst_case"]["x"].is_number());
    }
    assert!(stderr(&out).contains("expected fail"));
}

#[test]
fn verify_small_f_passes_core_properties() {
    let out = run(&["verify", "--target", "f", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let reports: Vec<Value> = serde_json::from_slice(&out.stdout).unwrap();
    for property in ["affine_linearity", "naturality", "relative_scaling"] {
        assert_eq!(
            reports.iter().find(|r| r["property"] == property).unwrap()["pass"],
            true
        );
    }
    let vartia = reports
        .iter()
        .find(|r| r["property"] == "vartia_invariance")
        .unwrap();
    assert_eq!(vartia["pass"], false);
}

#[test]
fn verify_seed_sources() {
    let args = ["verify", "--target", "abs", "--samples", "50"];
    let env_seed = run_with(&args, "", &[("CHANGEKIT_SEED", "7")]);
    let flag_seed = run(&[&args[..], &["--seed", "7"]].concat());
    let default_seed = run(&args);
    assert_eq!(env_seed.stdout, flag_seed.stdout);
    assert_ne!(env_seed.stdout, default_seed.stdout);
    let flag_wins = run_with(
        &[&args[..], &["--seed", "7"]].concat(),
        "",
        &[("CHANGEKIT_SEED", "8")],
    );
    assert_eq!(flag_wins.stdout, flag_seed.stdout);
    let bad = run_with(&args, "", &[("CHANGEKIT_SEED", "abc")]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn elasticity_of_power_function() {
    let out = run(&[
        "elasticity",
        "--fn",
        "power:A=5,k=0.3",
        "--x",
        "2",
        "--lambda",
        "1",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("classical = 0.3\n"));
    assert!(text.contains("generalized = 0.3\n"));
    let out = run(&[
        "elasticity",
        "--fn",
        "power:A=5,k=0.3",
        "--x",
        "2",
        "--lambda",
        "-1",
        "--h",
        "0.01",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("quotient = "));
    let out = run(&["elasticity", "--fn", "cubic:A=1", "--x", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("InvalidFunction"));
}

#[test]
fn plot_data_defaults() {
    let out = run(&["plot-data"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "y,F_0,F_0.2,F_0.5,F_1");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.contains(&"1,0,0,0,0"));
    assert!(rows.last().unwrap().starts_with("5,"));
}

#[test]
fn plot_data_explicit_points() {
    let out = run(&["plot-data", "--lambdas", "1", "--ys", "2.718281828459045"]);
    assert_eq!(stdout(&out), "y,F_1\n2.718281828459045,1\n");
    let out = run(&["plot-data", "--lambdas", "0.5", "--ys", "4"]);
    assert_eq!(stdout(&out), "y,F_0.5\n4,2\n");
    let out = run(&["plot-data", "--y-min", "0", "--y-max", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["plot-data", "--points", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["compare", "--ref", "1,2"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let out = run(&["--version"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("changekit "));
}
