//! End-to-end tests of the command-line binary: exit codes, stderr error
//! classes, stdout shapes, and the files it writes.

use aquaplan::formats::{builtin_scenario, read_manifest};
use std::fs;
use std::process::{Command, Output};

fn aquaplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aquaplan"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf-8 stderr")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

/// Value of a `name value` stdout line.
fn field(output: &Output, name: &str) -> String {
    let text = stdout(output);
    let line = text
        .lines()
        .find(|l| l.starts_with(&format!("{name} ")))
        .unwrap_or_else(|| panic!("no {name} line in:\n{text}"));
    line[name.len() + 1..].to_string()
}

fn field_f64(output: &Output, name: &str) -> f64 {
    field(output, name).parse().expect("numeric field")
}

#[test]
fn validate_accepts_bundled_scenarios() {
    for name in ["representative", "toy-linear", "toy-envlimited"] {
        let out = aquaplan(&["validate", name]);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        assert!(stdout(&out).starts_with("ok:"), "{name}: {}", stdout(&out));
    }
}

#[test]
fn validate_reports_every_violation_and_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    let mut raw = builtin_scenario("toy-linear").unwrap().to_raw();
    raw.months[0].inflow = -5.0;
    raw.limits.area_total = -1.0;
    fs::write(&path, toml::to_string_pretty(&raw).unwrap()).unwrap();

    let out = aquaplan(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 4);
    let err = stderr(&out);
    assert!(err.contains("error[validation]: months[0].inflow"), "{err}");
    assert!(err.contains("error[validation]: limits.area_total"), "{err}");
}

#[test]
fn missing_files_exit_3_with_io_class() {
    let out = aquaplan(&["validate", "/no/such/scenario.toml"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).starts_with("error[io]:"), "{}", stderr(&out));
}

#[test]
fn malformed_toml_exits_3_with_parse_class_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("garbage.toml");
    fs::write(&path, "crops = [[\n").unwrap();
    let out = aquaplan(&["validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    let err = stderr(&out);
    assert!(err.starts_with("error[parse]:"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn usage_mistakes_exit_2() {
    let out = aquaplan(&["no-such-command"]);
    assert_eq!(code(&out), 2);
    let out = aquaplan(&["front", "toy-linear", "--grid-points", "many"]);
    assert_eq!(code(&out), 2);
    let out = aquaplan(&["front", "toy-linear", "--grid-points", "0"]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).starts_with("error[usage]:"),
        "{}",
        stderr(&out)
    );
    let out = aquaplan(&["baseline", "toy-linear", "--pop", "7"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("even"), "{}", stderr(&out));
    let out = aquaplan(&[]);
    assert_eq!(code(&out), 2);
    // Help and version are not failures.
    let out = aquaplan(&["--help"]);
    assert_eq!(code(&out), 0);
    let out = aquaplan(&["--version"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn solve_nb_finds_the_ideal_and_its_cleanest_plan() {
    let out = aquaplan(&["solve-nb", "toy-linear"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((field_f64(&out, "net_benefit") - 4_999_000.0).abs() < 1e-3);
    assert!((field_f64(&out, "efd") - 60.0).abs() < 1e-9);
    assert!((field_f64(&out, "area rice") - 10_000.0).abs() < 1e-6);
    assert!(field_f64(&out, "flow m01").abs() < 1e-9);
}

#[test]
fn solve_nb_with_pinned_targets_trades_benefit_for_flow() {
    let out = aquaplan(&["solve-nb", "toy-linear", "--with-target-flow"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((field_f64(&out, "net_benefit") - 1_999_600.0).abs() < 1e-3);
    assert!(field_f64(&out, "efd").abs() < 1e-9);
    assert_eq!(field(&out, "flow m01"), "60");
}

#[test]
fn pinned_targets_beyond_the_river_report_infeasible() {
    let out = aquaplan(&["solve-nb", "toy-envlimited", "--with-target-flow"]);
    assert_eq!(code(&out), 5);
    assert!(
        stderr(&out).starts_with("error[infeasible]:"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn solve_efd_reaches_the_floor_with_the_best_benefit() {
    let out = aquaplan(&["solve-efd", "toy-linear"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(field_f64(&out, "efd").abs() < 1e-9);
    assert!((field_f64(&out, "net_benefit") - 1_999_600.0).abs() < 1e-3);
}

#[test]
fn plans_can_be_written_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.csv");
    let out = aquaplan(&["solve-efd", "toy-linear", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains(&format!("wrote {}", path.display())));
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("section,name,value\n"));
    assert!(text.contains("area,rice,"), "{text}");
    assert!(text.contains("flow,m01,60"), "{text}");
    assert!(text.contains("objective,efd,0"), "{text}");
}

#[test]
fn front_exports_a_verified_curve_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("front.csv");
    let out = aquaplan(&[
        "front",
        "toy-linear",
        "--grid-points",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((field_f64(&out, "ideal_net_benefit") - 4_999_000.0).abs() < 1e-3);
    assert!(field_f64(&out, "shortfall_floor").abs() < 1e-9);
    assert_eq!(field(&out, "subproblems_solved"), "18");
    assert_eq!(field(&out, "points"), "11");

    let report = aquaplan(&[
        "report",
        path.to_str().unwrap(),
        "--scenario",
        "toy-linear",
    ]);
    assert_eq!(code(&report), 0, "{}", stderr(&report));
    let text = stdout(&report);
    assert!(text.contains("11 rows"), "{text}");
    assert!(text.contains("digest matches"), "{text}");

    let manifest = read_manifest(&path).unwrap();
    assert_eq!(manifest.method, "weighted-scalarization");
    assert_eq!(manifest.parameters.grid_points, Some(9));
    assert_eq!(manifest.points_written, 11);
}

#[test]
fn report_rejects_a_corrupted_curve_naming_the_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("front.csv");
    let out = aquaplan(&[
        "front",
        "toy-linear",
        "--grid-points",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    // Inject a row dominated by the existing maximum-benefit endpoint.
    let mut text = fs::read_to_string(&path).unwrap();
    text.push_str("4.00000000e6,5.90000000e1,,endpoint\n");
    fs::write(&path, text).unwrap();

    let report = aquaplan(&["report", path.to_str().unwrap()]);
    assert_eq!(code(&report), 6);
    let err = stderr(&report);
    assert!(err.starts_with("error[verify]:"), "{err}");
    assert!(err.contains("line"), "{err}");
}

#[test]
fn report_catches_a_tampered_endpoint() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("front.csv");
    let out = aquaplan(&[
        "front",
        "toy-linear",
        "--grid-points",
        "9",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);

    // Shave 1% off the best-benefit row: the file still passes the pairwise
    // and staircase checks, but no longer reaches the recomputed ideal.
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let last = lines.last().unwrap().clone();
    let mut fields: Vec<&str> = last.split(',').collect();
    let shaved = format!("{:.8e}", fields[0].parse::<f64>().unwrap() * 0.99);
    fields[0] = &shaved;
    *lines.last_mut().unwrap() = fields.join(",");
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let report = aquaplan(&["report", path.to_str().unwrap()]);
    assert_eq!(code(&report), 0, "{}", stderr(&report));

    let report = aquaplan(&[
        "report",
        path.to_str().unwrap(),
        "--scenario",
        "toy-linear",
    ]);
    assert_eq!(code(&report), 6);
    assert!(
        stderr(&report).contains("endpoint mismatch"),
        "{}",
        stderr(&report)
    );
}

#[test]
fn report_catches_a_scenario_digest_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("front.csv");
    let out = aquaplan(&[
        "front",
        "toy-linear",
        "--grid-points",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let report = aquaplan(&[
        "report",
        path.to_str().unwrap(),
        "--scenario",
        "toy-envlimited",
    ]);
    assert_eq!(code(&report), 6);
    assert!(
        stderr(&report).contains("does not match"),
        "{}",
        stderr(&report)
    );
}

#[test]
fn baseline_exports_a_verified_curve() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ga.csv");
    let out = aquaplan(&[
        "baseline",
        "toy-linear",
        "--pop",
        "30",
        "--gens",
        "30",
        "--seed",
        "7",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = aquaplan(&["report", path.to_str().unwrap(), "--scenario", "toy-linear"]);
    assert_eq!(code(&report), 0, "{}", stderr(&report));
    // An approximate search does not have to reach the exact corners.
    assert!(
        stdout(&report).contains("endpoint check skipped"),
        "{}",
        stdout(&report)
    );

    let manifest = read_manifest(&path).unwrap();
    assert_eq!(manifest.method, "evolutionary-baseline");
    assert_eq!(manifest.parameters.seed, Some(7));
    assert_eq!(manifest.parameters.population_size, Some(30));
}

#[test]
fn reruns_are_byte_identical_except_manifest_timestamps() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, _) in [(&a, 0), (&b, 1)] {
        let out = aquaplan(&[
            "front",
            "toy-linear",
            "--grid-points",
            "15",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ma = read_manifest(&a).unwrap();
    let mb = read_manifest(&b).unwrap();
    assert_eq!(ma.without_timestamp(), mb.without_timestamp());
}

#[test]
fn infeasible_subproblems_are_reported_not_fatal() {
    let out = aquaplan(&["front", "toy-envlimited", "--grid-points", "8"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(field(&out, "points"), "1");
    assert!(field_f64(&out, "infeasible_subproblems") > 0.0);
    assert_eq!(field(&out, "solver_faults"), "0");
}

#[test]
fn threads_flag_leaves_the_curve_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let seq = dir.path().join("seq.csv");
    let par = dir.path().join("par.csv");
    let out = aquaplan(&[
        "front", "toy-linear", "--grid-points", "9", "--out",
        seq.to_str().unwrap(), "--threads", "1",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let out = aquaplan(&[
        "front", "toy-linear", "--grid-points", "9", "--out",
        par.to_str().unwrap(), "--threads", "4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(fs::read(&seq).unwrap(), fs::read(&par).unwrap());
}

#[test]
fn verbose_dumps_the_model_to_stderr() {
    let out = aquaplan(&["solve-nb", "toy-linear", "--verbose"]);
    assert_eq!(code(&out), 0);
    let err = stderr(&out);
    assert!(err.contains("maximize"), "{err}");
    assert!(err.contains("area[rice]"), "{err}");
}

#[test]
fn scenario_files_work_end_to_end_like_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("copy.toml");
    let raw = builtin_scenario("toy-linear").unwrap().to_raw();
    fs::write(&path, toml::to_string_pretty(&raw).unwrap()).unwrap();
    let out = aquaplan(&["solve-nb", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!((field_f64(&out, "net_benefit") - 4_999_000.0).abs() < 1e-3);
}
