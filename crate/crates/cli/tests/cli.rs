use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

/// Runs the binary; returns the exit code and the parsed JSON report, if any.
fn run(args: &[&str]) -> (i32, Option<Value>) {
    let out = Command::new(env!("CARGO_BIN_EXE_lensgrid"))
        .args(args)
        .output()
        .unwrap();
    let json = serde_json::from_slice(&out.stdout).ok();
    (out.status.code().unwrap(), json)
}

fn ok(args: &[&str]) -> Value {
    let (code, json) = run(args);
    assert_eq!(code, 0, "{args:?}");
    let json = json.expect("JSON report");
    assert_eq!(json["schema"], 1);
    json
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn info_counts_l52_knot() {
    let r = ok(&["info", path(&data("l52_knot.grid"))]);
    assert_eq!(r["result"]["generators"], "750");
    assert_eq!(r["result"]["components"], 1);
    assert_eq!(r["digest"].as_str().unwrap().len(), 64);
}

#[test]
fn grading_of_worked_generator_is_shift_stable() {
    let f = data("l52_knot.grid");
    for extra in [
        &[][..],
        &["--shift", "3", "-1"][..],
        &["--shift", "7", "2"][..],
    ] {
        let mut args = vec!["grading", path(&f), "1,2,0|4,0,3"];
        args.extend_from_slice(extra);
        let r = ok(&args);
        assert_eq!(r["result"]["S"], 4);
        assert_eq!(r["result"]["M"], "2/5");
        assert_eq!(r["result"]["A"], "-3/5");
    }
}

#[test]
fn o_generator_has_spin_q_minus_one() {
    let r = ok(&["grading", path(&data("l52_knot.grid")), "0,1,2|3,4,2"]);
    assert_eq!(r["result"]["S"], 1);
}

#[test]
fn malformed_files_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.grid");
    std::fs::write(&bad, "lensgrid 1\np 2\nq 1\nn 2\nX 0 0\nX 0 1\n").unwrap();
    assert_eq!(run(&["validate", bad.to_str().unwrap()]).0, 2);
    assert_eq!(run(&["validate", "/nonexistent.grid"]).0, 2);
    assert_eq!(
        run(&["grading", path(&data("l52_knot.grid")), "0,0,1|0,0,0"]).0,
        2
    );
}

#[test]
fn tilde_ranks_of_small_unknots() {
    let total = |r: &Value| -> u64 {
        r["result"]["pieces"]
            .as_array()
            .unwrap()
            .iter()
            .map(|p| p["rank"].as_u64().unwrap())
            .sum()
    };
    let one = ok(&["homology", path(&data("unknot_1x1.grid"))]);
    assert_eq!(one["result"]["pieces"].as_array().unwrap().len(), 1);
    assert_eq!(total(&one), 1);
    let two = ok(&["homology", path(&data("unknot_2x2.grid")), "--ring", "z"]);
    assert_eq!(total(&two), 2);
}

#[test]
fn minus_flavor_needs_a_window() {
    let f = data("l52_knot.grid");
    assert_eq!(run(&["homology", path(&f), "--flavor", "minus"]).0, 2);
    ok(&[
        "homology",
        path(&f),
        "--flavor",
        "minus",
        "--window-min",
        "-2",
        "--window-max",
        "-1",
    ]);
}

#[test]
fn verification_suites_pass_on_l52_knot() {
    let f = data("l52_knot.grid");
    for suite in ["d2", "signs"] {
        assert_eq!(ok(&["verify", path(&f), suite])["passed"], true, "{suite}");
    }
    let script = data("l52_knot_moves.txt");
    let r = ok(&["verify", path(&f), "move", "--script", path(&script)]);
    assert!(r["verdicts"].as_array().unwrap().len() > 10);
}

#[test]
fn stabilization_suites_pass() {
    let f = data("unknot_2x2.grid");
    for kind in ["X:SW", "X:NE", "X:SE", "O:NW"] {
        assert_eq!(
            ok(&["verify", path(&f), "stab", "--kind", kind, "--row", "1"])["passed"],
            true
        );
    }
}

#[test]
fn corrupted_signs_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let signs = dir.path().join("u.signs");
    let f = data("unknot_2x2.grid");
    ok(&[
        "signs",
        "export",
        path(&f),
        "--out",
        signs.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&signs).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    lines[1] = if lines[1].ends_with("+1") {
        lines[1].replace("+1", "-1")
    } else {
        lines[1].replace("-1", "+1")
    };
    std::fs::write(&signs, lines.join("\n")).unwrap();
    let (code, json) = run(&["signs", "import", path(&f), signs.to_str().unwrap()]);
    assert_eq!(code, 1);
    let detail = json.unwrap()["verdicts"][0]["detail"]
        .as_str()
        .unwrap()
        .to_string();
    assert!(detail.contains("violations"), "{detail}");
}

#[test]
fn sign_cache_is_keyed_by_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().to_str().unwrap();
    let f = data("l52_knot.grid");
    let r = ok(&["--sign-cache", cache, "homology", path(&f), "--ring", "z"]);
    let digest = r["digest"].as_str().unwrap();
    assert!(dir.path().join(format!("{digest}.signs")).exists());
    let again = ok(&["--sign-cache", cache, "homology", path(&f), "--ring", "z"]);
    assert_eq!(r["result"], again["result"]);
}

#[test]
fn torsion_scan_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let logs: Vec<String> = (0..2)
        .map(|k| {
            let log = dir.path().join(format!("scan{k}.jsonl"));
            let args = [
                "scan-torsion",
                "--p-max",
                "3",
                "--exhaustive-n",
                "2",
                "--random-count",
                "5",
                "--seed",
                "3",
                "--log",
                log.to_str().unwrap(),
            ];
            let r = ok(&args);
            assert_eq!(
                r["result"]["diagrams"].as_u64().unwrap() as usize + 1,
                std::fs::read_to_string(&log).unwrap().lines().count()
            );
            std::fs::read_to_string(log).unwrap()
        })
        .collect();
    assert_eq!(logs[0], logs[1]);
}

#[test]
fn moves_print_every_intermediate_diagram() {
    let r = ok(&[
        "moves",
        path(&data("l52_knot.grid")),
        path(&data("l52_knot_moves.txt")),
    ]);
    assert_eq!(r["result"]["diagrams"].as_array().unwrap().len(), 4);
}
