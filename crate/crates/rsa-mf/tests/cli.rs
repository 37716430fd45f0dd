//! End-to-end tests of the command-line interface: output schema and
//! determinism, config-file merging, metadata round-trips, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsa-mf"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn rsa-mf")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn solve_output_schema() {
    let text = stdout_of(&["solve", "--p", "3", "--c", "0.8", "--s", "0.5", "--lambda", "0.5"]);
    assert!(text.contains("# command=solve"));
    assert!(text.contains("# p=3"));
    assert!(text.contains("# global_m="));
    assert!(text.lines().any(|l| l == "m,mx,f,stable,source"), "{text}");
    // LF only, no CR.
    assert!(!text.contains('\r'));
}

#[test]
fn sweep_columns_and_float_format() {
    let text = stdout_of(&[
        "sweep", "--p", "3", "--c", "0.8", "--lambda", "0.0", "--s-min", "0.3", "--s-max", "0.4",
        "--s-step", "0.05",
    ]);
    assert!(text.lines().any(|l| l == "s,m,f"));
    // 12 significant digits in scientific notation.
    let data_line = text.lines().find(|l| l.starts_with("3.")).unwrap();
    let m_field = data_line.split(',').nth(1).unwrap();
    assert!(m_field.contains('e'), "scientific notation expected, got {m_field}");
    let mantissa = m_field.split('e').next().unwrap();
    let digits = mantissa.chars().filter(|c| c.is_ascii_digit()).count();
    assert_eq!(digits, 12, "12 significant digits expected, got {m_field}");
}

#[test]
fn phase_lines_and_jump_columns() {
    let text = stdout_of(&[
        "phase-lines", "--p", "3", "--c", "0.8", "--lambda-min", "0.0", "--lambda-max", "0.02",
        "--lambda-step", "0.01",
    ]);
    assert!(text.lines().any(|l| l == "lambda,s_star,order,delta_m,m_low,m_high"), "{text}");

    let text = stdout_of(&[
        "jump", "--p", "3", "--c", "0.8", "--lambda-min", "0.0", "--lambda-max", "0.02",
        "--lambda-step", "0.01",
    ]);
    assert!(text.lines().any(|l| l == "lambda,delta_m"), "{text}");
}

#[test]
fn byte_identical_across_runs_and_worker_counts() {
    let args = [
        "sweep", "--p", "3", "--c", "0.8", "--lambda", "0.4", "--s-min", "0.2", "--s-max", "0.5",
        "--s-step", "0.01",
    ];
    let one = stdout_of(&args);
    let again = stdout_of(&args);
    assert_eq!(one, again);

    let mut with_workers = args.to_vec();
    with_workers.extend(["--workers", "2"]);
    let parallel = stdout_of(&with_workers);
    // Worker count must not leak into the output or perturb row order.
    assert_eq!(one, parallel);

    let out = bin().args(args).env("RSA_MF_WORKERS", "3").output().unwrap();
    assert!(out.status.success());
    assert_eq!(one, String::from_utf8(out.stdout).unwrap());
}

#[test]
fn json_format_mirrors_csv_values() {
    let args = ["solve", "--p", "3", "--c", "0.8", "--s", "1.0", "--lambda", "1.0"];
    let csv = stdout_of(&args);
    let mut jargs = args.to_vec();
    jargs.extend(["--format", "json"]);
    let json = stdout_of(&jargs);
    // The CSV global minimum value string appears verbatim in the JSON.
    let gm = csv
        .lines()
        .find(|l| l.starts_with("# global_m="))
        .unwrap()
        .trim_start_matches("# global_m=");
    assert!(json.contains(gm), "JSON missing {gm}: {json}");
    assert!(json.contains("\"command\""));
}

#[test]
fn output_file_written() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let out = run(&[
        "solve", "--p", "3", "--c", "0.8", "--s", "0.5", "--lambda", "0.5", "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# command=solve"));
}

#[test]
fn unwritable_output_is_io_error() {
    let out = run(&[
        "solve", "--p", "3", "--c", "0.8", "--s", "0.5", "--lambda", "0.5", "--output",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn out_of_range_c_is_usage_error_naming_c() {
    let out = run(&["solve", "--p", "3", "--c", "1.3", "--s", "0.5", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('c'), "stderr should name c: {err}");
}

#[test]
fn missing_required_field_is_usage_error() {
    let out = run(&["solve", "--p", "3", "--s", "0.5", "--lambda", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('c'), "stderr should name the missing key: {err}");
}

#[test]
fn unknown_flag_is_usage_error() {
    let out = run(&["solve", "--p", "3", "--c", "0.8", "--bogus", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_merging_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "p = 3\nc = 0.7\ns = 0.5\nlambda = 0.5\n").unwrap();
    let from_file = stdout_of(&["solve", "--config", cfg.to_str().unwrap()]);
    assert!(from_file.contains("# c=0.7"));

    let overridden =
        stdout_of(&["solve", "--config", cfg.to_str().unwrap(), "--c", "0.8"]);
    assert!(overridden.contains("# c=0.8"));
    assert!(overridden.contains("# p=3"));
}

#[test]
fn config_file_unknown_key_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "p = 3\nc = 0.8\nnot_a_key = 1\n").unwrap();
    let out = run(&[
        "solve", "--config", cfg.to_str().unwrap(), "--s", "0.5", "--lambda", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("not_a_key"), "stderr should name the key: {err}");
}

#[test]
fn metadata_round_trips_to_equivalent_config() {
    let text = stdout_of(&[
        "sweep", "--p", "5", "--c", "0.9", "--field", "bimodal", "--h0", "0.5", "--lambda",
        "0.3", "--s-min", "0.2", "--s-max", "0.3", "--s-step", "0.05",
    ]);
    let meta = rsa_mf::output::parse_metadata(&text);
    let cfg = rsa_mf::config::RunConfig::from_metadata(&meta).unwrap();
    assert_eq!(cfg.command.as_deref(), Some("sweep"));
    assert_eq!(cfg.p, Some(5));
    assert_eq!(cfg.c, Some(0.9));
    assert_eq!(cfg.field.as_deref(), Some("bimodal"));
    assert_eq!(cfg.h0, Some(0.5));
    let spec = cfg.model_spec().unwrap();
    assert_eq!(
        spec.field,
        rsa_mf::model::FieldDistribution::Bimodal { h0: 0.5 }
    );
    // Re-running with the reconstructed configuration reproduces the output.
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("rt.toml");
    std::fs::write(&cfg_path, toml::to_string(&cfg).unwrap()).unwrap();
    let again = stdout_of(&["sweep", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(text, again);
}

#[test]
fn lambda0_and_ed_scaling_run() {
    let text = stdout_of(&["lambda0", "--p", "3", "--c", "0.8", "--field", "bimodal", "--h0",
        "0.8", "--s", "0.35"]);
    assert!(text.lines().any(|l| l == "m,f,source"), "{text}");

    let text = stdout_of(&[
        "ed-scaling", "--p", "3", "--c", "0.8", "--s", "0.2", "--lambda", "0.5", "--n-list",
        "10,20,40",
    ]);
    assert!(text.lines().any(|l| l == "n,energy_per_site,mf_free_energy,gap,ratio"), "{text}");
}

#[test]
fn helper_reads_config_written_by_hand() {
    // Guards against Path-handling regressions in from_file.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "p = 3\nc = 0.8\n").unwrap();
    let parsed = rsa_mf::config::RunConfig::from_file(Path::new(cfg.to_str().unwrap())).unwrap();
    assert_eq!(parsed.p, Some(3));
}
