//! Exit-code and file-output contract of the binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn minweier(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minweier"))
        .args(args)
        .output()
        .expect("spawn minweier")
}

fn tmp(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("minweier-cli-{}-{label}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn no_command_is_a_usage_error() {
    let out = minweier(&[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing command"));
}

#[test]
fn unknown_command_is_a_usage_error() {
    let out = minweier(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let out = minweier(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for cmd in ["generate", "verify", "pde", "reconstruct", "classify"] {
        assert!(text.contains(cmd));
    }
}

#[test]
fn missing_expr_names_the_key() {
    let dir = tmp("noexpr");
    let out = minweier(&["generate", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("expr"));
}

#[test]
fn malformed_expression_reports_column() {
    let out = minweier(&["verify", "--expr", "z +"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("column"));
}

#[test]
fn constant_datum_exits_two_with_report() {
    let dir = tmp("const");
    let out = minweier(&[
        "generate",
        "--expr",
        "0",
        "--grid",
        "5x5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("points_mu_floor = 25"));
    assert!(report.contains("points_admissible = 0"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn degenerate_grid_exits_one() {
    let out = minweier(&["verify", "--expr", "z", "--grid", "1x1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("grid"));
}

#[test]
fn generate_writes_requested_formats() {
    let dir = tmp("gen");
    let out = minweier(&[
        "generate",
        "--expr",
        "z",
        "--grid",
        "5x5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["report.txt", "surface.obj", "surface.ply"] {
        assert!(dir.join(name).is_file(), "{name} missing");
    }
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("command = generate"));
    assert!(report.contains("[family mean_curvature]"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_report_includes_richardson_ratios() {
    let dir = tmp("verify");
    let out = minweier(&[
        "verify",
        "--expr",
        "exp(z)",
        "--domain",
        "0.1,0.9,0.1,0.9",
        "--grid",
        "5x5",
        "--fd-step",
        "1e-3",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    let measured = report
        .lines()
        .filter(|l| l.starts_with("richardson = ") && !l.ends_with("n/a"))
        .count();
    assert!(measured >= 12, "only {measured} measured ratios:\n{report}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reconstruct_from_csv_round_trips() {
    let dir = tmp("recon");
    // round-trip run also saves the sampled field as gauss.csv
    let first = minweier(&[
        "reconstruct",
        "--expr",
        "z",
        "--grid",
        "9x9",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(first.status.code(), Some(0));
    let csv = dir.join("gauss.csv");
    assert!(csv.is_file());

    // feed the CSV back in through a config file
    let cfg = dir.join("fromcsv.cfg");
    let out2 = dir.join("fromcsv");
    std::fs::write(
        &cfg,
        format!("gauss_csv = {}\nout = {}\n", csv.display(), out2.display()),
    )
    .unwrap();
    let second = minweier(&["reconstruct", "--config", cfg.to_str().unwrap()]);
    assert_eq!(second.status.code(), Some(0));
    let report = std::fs::read_to_string(out2.join("report.txt")).unwrap();
    assert!(report.contains("command = reconstruct"));
    assert!(report.contains("[family field_iso]"));
    assert!(out2.join("surface.obj").is_file());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn classify_counts_quadrant_signs() {
    let dir = tmp("classify");
    let out = minweier(&[
        "classify",
        "--expr",
        "z",
        "--domain",
        "-1.1,-0.1,0.1,1.1",
        "--grid",
        "7x7",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("subclass_negative = 49"));
    assert!(report.contains("subclass_positive = 0"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_thread_cap_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_minweier"))
        .args(["classify", "--expr", "z"])
        .env("MINWEIER_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("MINWEIER_THREADS"));
}

#[test]
fn bad_csv_exits_one_naming_the_line() {
    let dir = tmp("badcsv");
    let csv = dir.join("bad.csv");
    std::fs::write(&csv, "x,y,xi,eta,zeta\n0,0,0,0\n").unwrap();
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, format!("gauss_csv = {}\n", csv.display())).unwrap();
    let out = minweier(&["reconstruct", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn flagged_field_exits_two() {
    let dir = tmp("flagged");
    let csv = dir.join("flat.csv");
    // a constant normal field recovers nu = 0 everywhere
    let mut text = String::from("x,y,xi,eta,zeta\n");
    for j in 0..3 {
        for i in 0..3 {
            text.push_str(&format!("{},{},0,0,-1\n", 0.1 * i as f64, 0.1 * j as f64));
        }
    }
    std::fs::write(&csv, text).unwrap();
    let cfg = dir.join("flat.cfg");
    std::fs::write(
        &cfg,
        format!("gauss_csv = {}\nout = {}\n", csv.display(), dir.join("flat").display()),
    )
    .unwrap();
    let out = minweier(&["reconstruct", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    // validation report still written
    assert!(dir.join("flat/report.txt").is_file());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn pde_excludes_degenerate_points_from_the_max() {
    let dir = tmp("pdeflag");
    // the grid contains the w' = 0 point of the quadratic datum
    let out = minweier(&[
        "pde",
        "--expr",
        "z^2/2",
        "--domain",
        "-0.5,0.5,-0.5,0.5",
        "--grid",
        "5x5",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    assert!(report.contains("points_refused = 1"));
    // the remaining points still satisfy the identity
    let max_line = report
        .lines()
        .skip_while(|l| *l != "[family pde_analytic]")
        .find(|l| l.starts_with("max = "))
        .unwrap();
    let max: f64 = max_line.trim_start_matches("max = ").parse().unwrap();
    assert!(max < 1e-10, "{max_line}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn enneper_demo_report_shows_minimality() {
    let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/enneper.cfg");
    let dir = tmp("demo-h");
    let out = minweier(&[
        "generate",
        "--config",
        config.to_str().unwrap(),
        "--grid",
        "17x17",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.join("report.txt")).unwrap();
    let max_line = report
        .lines()
        .skip_while(|l| *l != "[family mean_curvature]")
        .find(|l| l.starts_with("max = "))
        .unwrap();
    let max: f64 = max_line.trim_start_matches("max = ").parse().unwrap();
    assert!(max < 1e-3, "report max |H| = {max}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn shipped_demo_configs_parse_and_run() {
    for name in ["enneper.cfg", "catenoid.cfg", "quadratic.cfg"] {
        let config = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../configs")
            .join(name);
        let dir = tmp(&format!("demo-{name}"));
        // pde is cheap and meaningful for all three demos
        let out = minweier(&[
            "pde",
            "--config",
            config.to_str().unwrap(),
            "--grid",
            "9x9",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        std::fs::remove_dir_all(&dir).ok();
    }
}
