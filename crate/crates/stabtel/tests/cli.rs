//! End-to-end checks of the `stabtel` binary: subcommands, file formats,
//! and the documented exit codes (0 ok, 1 parse/validation, 2 no
//! decomposition, 3 verdict IMPERFECT).

use std::process::Command;

fn stabtel() -> Command {
    Command::new(env!("CARGO_BIN_EXE_stabtel"))
}

fn write_temp(name: &str, content: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join(name);
    std::fs::write(&path, content).unwrap();
    (dir, path)
}

#[test]
fn demo_cases_exit_zero() {
    for case in ["example1", "example2", "example3a", "example3b"] {
        let out = stabtel().args(["demo", case, "--trials", "1"]).output().unwrap();
        assert!(out.status.success(), "{case}: {:?}", out);
        let text = String::from_utf8_lossy(&out.stdout);
        assert!(text.contains("verdict: PERFECT"), "{case}: {text}");
    }
}

#[test]
fn demo_reports_expected_capacities() {
    let out = stabtel()
        .args(["demo", "example3a", "--trials", "1", "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["check"]["capacities"], serde_json::json!([1, 2]));
    assert_eq!(v["check"]["projector_rank"], serde_json::json!(2));
    assert_eq!(v["simulation"]["verdict"], "PERFECT");
}

#[test]
fn check_text_and_json_inputs() {
    let (_dir, path) = write_temp(
        "problem.txt",
        "d 3\nn 2\ng Z^-1 Z\ng X X\npart 1\npart 2\nreceiver 2\n",
    );
    let out = stabtel()
        .args(["check", "--input", path.to_str().unwrap(), "--json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["capacities"], serde_json::json!([1]));
    assert_eq!(v["state_kind"], "pure");
}

#[test]
fn parse_error_exits_one() {
    let (_dir, path) = write_temp("bad.txt", "d 3\nn 2\ng Q Q\npart 1\npart 2\n");
    let out = stabtel()
        .args(["check", "--input", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn invalid_group_exits_one() {
    let (_dir, path) = write_temp(
        "noncommuting.txt",
        "d 2\nn 2\ng Z I\ng X I\npart 1\npart 2\nreceiver 2\n",
    );
    let out = stabtel()
        .args(["check", "--input", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("do not commute"));
}

#[test]
fn zero_capacity_synthesis_exits_two() {
    let (_dir, path) = write_temp(
        "product.txt",
        "d 3\nn 2\ng Z I\ng I Z\npart 1\npart 2\nreceiver 2\n",
    );
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("protocol.json");
    let out = stabtel()
        .args([
            "synthesize",
            "--input",
            path.to_str().unwrap(),
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero total capacity"));
}

#[test]
fn synthesize_then_simulate_protocol_file() {
    let (_dir, path) = write_temp(
        "bell.txt",
        "d 2\nn 2\ng Z^-1 Z\ng X X\npart 1\npart 2\nreceiver 2\n",
    );
    let dir = tempfile::tempdir().unwrap();
    let protocol_path = dir.path().join("protocol.json");
    let out = stabtel()
        .args([
            "synthesize",
            "--input",
            path.to_str().unwrap(),
            "--out",
            protocol_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    // identical bytes on a second run
    let first = std::fs::read(&protocol_path).unwrap();
    stabtel()
        .args([
            "synthesize",
            "--input",
            path.to_str().unwrap(),
            "--out",
            protocol_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(first, std::fs::read(&protocol_path).unwrap());
    let out = stabtel()
        .args([
            "simulate",
            "--input",
            protocol_path.to_str().unwrap(),
            "--trials",
            "2",
            "--seed",
            "5",
            "--json",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "PERFECT");
}

#[test]
fn corrupted_protocol_exits_three() {
    let (_dir, path) = write_temp(
        "bell.txt",
        "d 2\nn 2\ng Z^-1 Z\ng X X\npart 1\npart 2\nreceiver 2\n",
    );
    let dir = tempfile::tempdir().unwrap();
    let protocol_path = dir.path().join("protocol.json");
    stabtel()
        .args([
            "synthesize",
            "--input",
            path.to_str().unwrap(),
            "--out",
            protocol_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    let json = std::fs::read_to_string(&protocol_path).unwrap();
    let corrupted = json.replace(
        "\"correction_x_coeff\": [\n    1\n  ]",
        "\"correction_x_coeff\": [\n    0\n  ]",
    );
    assert_ne!(json, corrupted);
    std::fs::write(&protocol_path, corrupted).unwrap();
    let out = stabtel()
        .args(["simulate", "--input", protocol_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("IMPERFECT"));
}

#[test]
fn explicit_seeded_inputs_and_user_decomposition() {
    // user-supplied decomposition indices are certified rather than searched
    let (_dir, path) = write_temp(
        "ex3.txt",
        "d 2\nn 8\n\
         g X Y I I I Z Y I\n\
         g X Z I I I X Y I\n\
         g I I Z Y Z I Y X\n\
         g I I Z I X I Y Z\n\
         g I I Z Z X Y X Y\n\
         g I I X X Z Y Z Y\n\
         g Z X I Z X I I I\n\
         part 1,2\npart 3,4,5\npart 6,7,8\nreceiver 3\n\
         decomp 1,2 | 3,4,5,6 | 7\n\
         input seed 11\ninput seed 12\n",
    );
    let out = stabtel()
        .args(["simulate", "--input", path.to_str().unwrap(), "--json"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{:?}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "PERFECT");
    assert_eq!(v["trials"][0]["input_seeds"], serde_json::json!([11, 12]));
}

#[test]
fn sample_mode_is_seed_deterministic() {
    let (_dir, path) = write_temp(
        "ex3.txt",
        "d 2\nn 8\n\
         g X Y I I I Z Y I\n\
         g X Z I I I X Y I\n\
         g I I Z Y Z I Y X\n\
         g I I Z I X I Y Z\n\
         g I I Z Z X Y X Y\n\
         g I I X X Z Y Z Y\n\
         g Z X I Z X I I I\n\
         part 1,2\npart 3,4,5\npart 6,7,8\nreceiver 3\n",
    );
    let run = || {
        let out = stabtel()
            .args([
                "simulate",
                "--input",
                path.to_str().unwrap(),
                "--mode",
                "sample",
                "--samples",
                "20",
                "--seed",
                "17",
                "--json",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{out:?}");
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap()
    };
    let a = run();
    let b = run();
    assert_eq!(a["verdict"], "PERFECT");
    assert!(!a["enumerated"].as_bool().unwrap());
    assert_eq!(a["trials"][0]["outcomes"], b["trials"][0]["outcomes"]);
}

#[test]
fn budget_violation_exits_one() {
    let (_dir, path) = write_temp(
        "bell.txt",
        "d 2\nn 2\ng Z^-1 Z\ng X X\npart 1\npart 2\nreceiver 2\n",
    );
    let out = stabtel()
        .args([
            "simulate",
            "--input",
            path.to_str().unwrap(),
            "--budget",
            "4",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}
