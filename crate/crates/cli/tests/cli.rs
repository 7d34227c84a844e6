//! End-to-end tests of the `gridscreen` binary: exit codes, artifact
//! layout, determinism across thread counts, and agreement between the
//! `analyze` and `solve` views of the same outage.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridscreen"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary spawns")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Splits one CSV row, honoring double-quoted cells.
fn split_csv(row: &str) -> Vec<String> {
    let mut cells = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in row.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => cells.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    cells.push(cur);
    cells
}

#[test]
fn help_lists_every_subcommand() {
    let out = run(&["--help"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    for sub in ["analyze", "lodf", "metrics", "subgraph", "brute-force", "solve"] {
        assert!(text.contains(sub), "--help does not mention {sub}:\n{text}");
    }
}

#[test]
fn rejects_search_level_below_distance() {
    let out = run(&["analyze", "--case", "triangle3", "--distance", "3", "--search-level", "1"]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("search-level must be ≥ distance"));
}

#[test]
fn missing_case_file_exits_2() {
    let out = run(&["metrics", "--case", "/nonexistent/grid.m"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).starts_with("error:"), "stderr: {}", stderr_of(&out));
}

/// On the built-in triangle every branch outage reroutes the full flow
/// through the two remaining branches in series, so every off-diagonal
/// distribution factor has magnitude exactly 1.
#[test]
fn lodf_matrix_on_builtin_triangle() {
    let out = run(&["lodf", "--case", "triangle3"]);
    assert!(out.status.success(), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some(r#"branch,pair,bridge,"[1,2]","[2,3]","[1,3]""#),
        "full output:\n{text}"
    );
    let rows: Vec<Vec<String>> = lines.map(split_csv).collect();
    assert_eq!(rows.len(), 3);
    for (k, row) in rows.iter().enumerate() {
        assert_eq!(row[0], k.to_string());
        assert_eq!(row[2], "false", "no branch of a triangle is a bridge");
        for (l, cell) in row[3..].iter().enumerate() {
            let v: f64 = cell.parse().expect("numeric cell");
            if l == k {
                assert_eq!(v, -1.0, "diagonal convention");
            } else {
                assert!((v.abs() - 1.0).abs() < 1e-9, "lodf[{l},{k}] = {v}");
            }
        }
    }
}

#[test]
fn analyze_writes_artifacts_and_signals_violations() {
    let dir = tempfile::tempdir().unwrap();
    let case = fixture("case200.m");
    let out = run(&[
        "analyze",
        "--case",
        case.to_str().unwrap(),
        "--x",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "expected violating sets; stderr: {}", stderr_of(&out));

    let report = std::fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["tool"], "gridscreen");
    assert_eq!(manifest["config"]["x"], 1);
    assert_eq!(manifest["case_sha256"].as_str().unwrap().len(), 64);
    let data_rows = report.lines().filter(|l| !l.starts_with('#') && !l.starts_with('x')).count();
    assert_eq!(manifest["records_written"], data_rows as u64);

    // The same run with --no-fail keeps the report but exits cleanly.
    let soft = run(&[
        "analyze",
        "--case",
        case.to_str().unwrap(),
        "--x",
        "1",
        "--no-fail",
    ]);
    assert_eq!(soft.status.code(), Some(0), "stderr: {}", stderr_of(&soft));
}

/// Reports are byte-identical no matter how the work is parallelized;
/// only the manifest (timings) may differ.
#[test]
fn reports_are_identical_across_thread_counts() {
    let case = fixture("case200.m");
    let mut bodies = Vec::new();
    for threads in ["1", "7"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&[
            "--threads",
            threads,
            "analyze",
            "--case",
            case.to_str().unwrap(),
            "--x",
            "2",
            "--output",
            "json",
            "--out",
            dir.path().to_str().unwrap(),
            "--no-fail",
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        bodies.push(std::fs::read(dir.path().join("report.json")).unwrap());
    }
    assert_eq!(bodies[0], bodies[1], "report bytes depend on --threads");
}

/// Feeding a violating row from `analyze` back through `solve` reproduces
/// the same classification counts.
#[test]
fn solve_reproduces_analyze_classification() {
    let dir = tempfile::tempdir().unwrap();
    let case = fixture("case200.m");
    let out = run(&[
        "analyze",
        "--case",
        case.to_str().unwrap(),
        "--x",
        "2",
        "--output",
        "json",
        "--out",
        dir.path().to_str().unwrap(),
        "--no-fail",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let records = doc["records"].as_array().unwrap();
    let violating = records
        .iter()
        .find(|r| {
            r["overflow"].as_u64().unwrap() > 0
                || r["undervoltage"].as_u64().unwrap() > 0
                || r["overvoltage"].as_u64().unwrap() > 0
                || r["reserve_limit"].as_bool().unwrap()
        })
        .expect("case200 x=2 screening yields at least one violating set");

    let outage = violating["branches"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("[{},{}]", p[0], p[1]))
        .collect::<Vec<_>>()
        .join(",");

    let dir2 = tempfile::tempdir().unwrap();
    let solved = run(&[
        "solve",
        "--case",
        case.to_str().unwrap(),
        "--outage",
        &outage,
        "--output",
        "json",
        "--out",
        dir2.path().to_str().unwrap(),
        "--no-fail",
    ]);
    assert_eq!(solved.status.code(), Some(0), "stderr: {}", stderr_of(&solved));
    let solved_doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir2.path().join("solve.json")).unwrap())
            .unwrap();
    let row = &solved_doc["records"].as_array().unwrap()[0];
    for field in ["overflow", "undervoltage", "overvoltage", "reserve_limit", "unsolved"] {
        assert_eq!(row[field], violating[field], "{field} differs for outage {outage}");
    }
}

#[test]
fn brute_force_enumerates_singles() {
    let dir = tempfile::tempdir().unwrap();
    let case = fixture("case200.m");
    let out = run(&[
        "brute-force",
        "--case",
        case.to_str().unwrap(),
        "--x",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
        "--no-fail",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("enumerated"));
    let report = std::fs::read_to_string(dir.path().join("brute_force.csv")).unwrap();
    assert!(report.contains("\"[189,187]\""), "known critical outage missing:\n{report}");
}
