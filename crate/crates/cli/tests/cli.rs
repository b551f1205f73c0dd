//! End-to-end runs of the `scalecalc` binary on the shipped problem files:
//! exit codes, report contents and schema validity.

use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn problem(name: &str) -> PathBuf {
    root().join("problems").join(name)
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn scalecalc(out: &Path, args: &[&str]) -> Run {
    let o = Command::new(env!("CARGO_BIN_EXE_scalecalc"))
        .arg("--output-dir")
        .arg(out)
        .args(args)
        .output()
        .unwrap();
    Run {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let schema = read_json(&root().join("schemas").join(schema));
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}");
}

/// Schema-check a report, including the echoed problem.
fn checked_report(out: &Path) -> Value {
    let r = read_json(&out.join("report.json"));
    assert_valid("report.schema.json", &r);
    assert_valid("problem.schema.json", &r["problem"]);
    r
}

#[test]
fn shipped_problem_files_are_schema_valid() {
    let mut n = 0;
    for entry in std::fs::read_dir(root().join("problems")).unwrap() {
        let p = entry.unwrap().path();
        assert_valid("problem.schema.json", &read_json(&p));
        n += 1;
    }
    assert!(n >= 8);
}

#[test]
fn schema_rejects_what_the_reader_rejects() {
    let schema = read_json(&root().join("schemas/problem.schema.json"));
    let v = jsonschema::validator_for(&schema).unwrap();
    let good = read_json(&problem("golden_a.json"));
    assert!(v.is_valid(&good));
    let mut extra = good.clone();
    extra["regime"]["y_T"] = 1.0.into();
    assert!(!v.is_valid(&extra));
    let mut both = good.clone();
    both["grid"]["ladder"] = serde_json::json!({"h0": 0.1, "ratio": 0.5, "rungs": 2});
    assert!(!v.is_valid(&both));
    let mut fixed = good;
    fixed["regime"] = serde_json::json!({"type": "fixedT", "T": 1, "y_T": 1});
    assert!(!v.is_valid(&fixed));
}

#[test]
fn golden_a_solves_and_its_trajectory_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let run = scalecalc(dir.path(), &["solve", path(&problem("golden_a.json"))]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("root T ="));
    let r = checked_report(dir.path());
    assert_eq!(r["status"], "ok");
    let roots = r["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 1);
    let t = roots[0]["T"].as_f64().unwrap();
    assert!((t - 1.0).abs() <= 1e-3, "{t}");
    assert_eq!(roots[0]["natural_conditions"].as_array().unwrap().len(), 3);
    assert_eq!(r["scan"].as_array().unwrap().len(), 200);

    let csv = dir.path().join(roots[0]["trajectory"].as_str().unwrap());
    let header = std::fs::read_to_string(&csv)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string();
    assert_eq!(header, "t,re_y,im_y,re_dy1,im_dy1");
    let check = tempfile::tempdir().unwrap();
    let t_arg = format!("{t:.17e}");
    let run = scalecalc(
        check.path(),
        &["verify", path(&problem("golden_a.json")), path(&csv), "--t-end", &t_arg],
    );
    assert_eq!(run.code, 0, "{}{}", run.stdout, run.stderr);
    let v = checked_report(check.path());
    let fv = &v["roots"][0]["first_variation"];
    assert_eq!(fv["draws"], 20);
    assert!(fv["max_magnitude"].as_f64().unwrap() <= 1e-3);
    assert_eq!(fv["all_agree"], true);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert_eq!(
            scalecalc(d.path(), &["-q", "solve", path(&problem("golden_d.json"))]).code,
            0
        );
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read(d.path().join(f)).unwrap();
    assert_eq!(read(&a, "report.json"), read(&b, "report.json"));
    assert_eq!(read(&a, "trajectory_1.csv"), read(&b, "trajectory_1.csv"));
}

#[test]
fn negative_controls_write_valid_reports() {
    for (file, code, status) in [
        ("negative_c_noroot.json", 2, "no_root"),
        ("negative_higher_flat.json", 3, "indeterminate"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let run = scalecalc(dir.path(), &["solve", path(&problem(file))]);
        assert_eq!(run.code, code, "{file}: {}", run.stderr);
        let r = checked_report(dir.path());
        assert_eq!(r["status"], status);
        assert_eq!(r["exit_code"], code);
        assert!(r["roots"].as_array().unwrap().is_empty());
        assert!(r["message"].is_string());
    }
}

#[test]
fn malformed_lagrangian_reports_its_position() {
    let dir = tempfile::tempdir().unwrap();
    let run = scalecalc(dir.path(), &["solve", path(&problem("malformed.json"))]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("syntax error at position 6"), "{}", run.stderr);
    let derive = scalecalc(dir.path(), &["derive", path(&problem("malformed.json"))]);
    assert_eq!(derive.code, 1);
}

#[test]
fn schema_errors_report_line_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"lagrangian\": \"0.5*v^2\",\n  \"order\": \"one\"\n}\n").unwrap();
    let run = scalecalc(dir.path(), &["solve", path(&bad)]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("line 3 column"), "{}", run.stderr);
    let missing = scalecalc(dir.path(), &["solve", path(&dir.path().join("absent.json"))]);
    assert_eq!(missing.code, 1);
}

#[test]
fn constant_candidate_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let h = 1.0 / 1024.0;
    let csv = dir.path().join("const.csv");
    let mut text = String::from("t,re_y,im_y\n");
    for j in -2..=1026 {
        text.push_str(&format!("{},0.5,0\n", j as f64 * h));
    }
    std::fs::write(&csv, text).unwrap();
    let run = scalecalc(dir.path(), &["verify", path(&problem("golden_a.json")), path(&csv)]);
    assert_eq!(run.code, 4, "{}", run.stderr);
    let r = checked_report(dir.path());
    assert_eq!(r["status"], "unverified");
    let root = &r["roots"][0];
    assert_eq!(root["verdict"], false);
    let lt = root["natural_conditions"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["label"] == "L(T)")
        .unwrap();
    assert!((lt["re"].as_f64().unwrap() - 0.5).abs() <= 1e-12, "{lt}");
    assert_eq!(root["T"].as_f64().unwrap(), 1.0);
}

#[test]
fn wrong_step_is_a_grid_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("coarse.csv");
    let h = 1.0 / 512.0;
    let mut text = String::from("t,re_y,im_y\n");
    for j in -2..=514 {
        text.push_str(&format!("{},0.5,0\n", j as f64 * h));
    }
    std::fs::write(&csv, text).unwrap();
    let run = scalecalc(dir.path(), &["verify", path(&problem("golden_a.json")), path(&csv)]);
    assert_eq!(run.code, 1);
    assert!(run.stderr.contains("grid mismatch"), "{}", run.stderr);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn identities_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sin = scalecalc(dir.path(), &["identities", "--function", "sin"]);
    assert_eq!(sin.code, 0, "{}{}", sin.stdout, sin.stderr);
    let r = read_json(&dir.path().join("identities.json"));
    assert_valid("identities.schema.json", &r);
    assert_eq!(r["taylor"]["pass"], true);

    let w = scalecalc(dir.path(), &["identities", "--function", "weierstrass:0.5,3"]);
    assert_eq!(w.code, 0, "{}{}", w.stdout, w.stderr);
    let r = read_json(&dir.path().join("identities.json"));
    assert_valid("identities.schema.json", &r);
    assert!(r["taylor"].is_null());
    assert!(r["warnings"][0].as_str().unwrap().contains("taylor skipped"));
    for k in ["leibniz", "barrow"] {
        assert_eq!(r[k]["pass"], true, "{k}");
        assert_eq!(r[k]["strictly_decreasing"], true, "{k}");
    }

    let bad = scalecalc(dir.path(), &["identities", "--function", "tangent"]);
    assert_eq!(bad.code, 1);
    assert!(bad.stderr.contains("tangent"), "{}", bad.stderr);

    let custom = scalecalc(
        dir.path(),
        &[
            "-q",
            "identities",
            "--function",
            "exp",
            "--with",
            "poly_2",
            "--interval",
            "-1,1",
            "--ladder",
            "0.0078125,0.5,4",
        ],
    );
    assert_eq!(custom.code, 0, "{}", custom.stderr);
    assert!(custom.stdout.is_empty());
    let r = read_json(&dir.path().join("identities.json"));
    assert_eq!(r["ladder"].as_array().unwrap().len(), 4);
    assert_eq!(r["with"], "poly_2");
}

#[test]
fn derive_prints_the_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let lines = |file: &str| {
        let run = scalecalc(dir.path(), &["derive", path(&problem(file))]);
        assert_eq!(run.code, 0, "{}", run.stderr);
        run.stdout.lines().map(String::from).collect::<Vec<_>>()
    };
    let natural = |ls: &[String]| ls.iter().filter(|l| l.starts_with("natural:")).count();

    let a = lines("golden_a.json");
    assert_eq!(a[0], "Euler-Lagrange: 1 = □/□t(v)");
    assert_eq!(natural(&a) + a.iter().filter(|l| l.starts_with("boundary:")).count(), 3);
    assert_eq!(natural(&lines("golden_higher.json")), 3);
    assert!(lines("golden_d.json").iter().any(|l| l.contains("□ψ/□t")));
}

#[test]
fn ladder_grids_report_every_rung() {
    let dir = tempfile::tempdir().unwrap();
    let run = scalecalc(dir.path(), &["-q", "solve", path(&problem("golden_a_ladder.json"))]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = checked_report(dir.path());
    let rungs = r["ladder"].as_array().unwrap();
    assert_eq!(rungs.len(), 4);
    let errors: Vec<f64> = rungs
        .iter()
        .map(|g| (g["T"][0].as_f64().unwrap() - 1.0).abs())
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert_eq!(r["h"].as_f64().unwrap(), 1.0 / 1024.0);
}

#[test]
fn fixed_terminal_time_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let run = scalecalc(
        dir.path(),
        &[
            "-q",
            "--h",
            "0.03125",
            "--tol",
            "1e-8",
            "solve",
            path(&problem("fixed_t.json")),
        ],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let r = checked_report(dir.path());
    assert_eq!(r["h"].as_f64().unwrap(), 0.03125);
    assert_eq!(r["roots"][0]["tol"].as_f64().unwrap(), 1e-8);
    assert!(r.get("scan").is_none());
    let csv = std::fs::read_to_string(dir.path().join("trajectory_1.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 33 + 4);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(scalecalc(dir.path(), &["bogus"]).code, 1);
    assert_eq!(scalecalc(dir.path(), &["solve"]).code, 1);
    assert_eq!(scalecalc(dir.path(), &["--help"]).code, 0);
}
