use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (Value, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_mihailova"))
        .args(args)
        .output()
        .unwrap();
    let code = out.status.code().unwrap();
    let value = if out.stdout.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&out.stdout).unwrap_or(Value::Null)
    };
    (value, code)
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn gens_for_each_oracle() {
    for (oracle, n) in [("s3", 5), ("zsq", 3), ("free", 2)] {
        let (v, code) = run(&["gens", "--oracle", oracle]);
        assert_eq!(code, 0);
        assert_eq!(v["generators"].as_array().unwrap().len(), n, "{oracle}");
    }
}

#[test]
fn member_exit_codes() {
    let (v, code) = run(&["member", "--left", "a b a", "--right", "b^2"]);
    assert_eq!((v["member"].as_bool(), code), (Some(true), 0));
    let (v, code) = run(&["member", "--left", "a", "--right", "b"]);
    assert_eq!((v["member"].as_bool(), code), (Some(false), 3));
    let (v, code) = run(&[
        "member", "--oracle", "zsq", "--left", "a b", "--right", "b a",
    ]);
    assert_eq!((v["member"].as_bool(), code), (Some(true), 0));
}

#[test]
fn express_reports_word_and_bounds() {
    let (v, code) = run(&["express", "--left", "a", "--right", "a^3"]);
    assert_eq!(code, 0);
    assert_eq!(v["method"], "breadth");
    let word = v["word"].as_str().unwrap();
    assert!(word == "h1 h3" || word == "h3 h1", "{word}");
    // a kernel element beyond the breadth stage, with the kernel stage disabled
    let (v, code) = run(&[
        "express",
        "--left",
        "",
        "--right",
        "a b a^2 b^-1 a^-1",
        "--depth",
        "2",
        "--budget",
        "0",
    ]);
    assert_eq!(code, 2);
    assert!(v["word"].is_null());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["member", "--left", "a"]).1, 1);
    assert_eq!(run(&["member", "--left", "q", "--right", "a"]).1, 1);
    assert_eq!(run(&["pipeline-lemma2"]).1, 1);
    assert_eq!(run(&["gens", "--presentation", "/nonexistent.json"]).1, 1);
    assert_eq!(run(&["gens", "--oracle", "a5"]).1, 1);
    assert_eq!(run(&["--help"]).1, 0);
}

#[test]
fn target_shape_requires_twelve_relators() {
    assert_eq!(
        run(&[
            "emit-iso-instance",
            "--symbol",
            "h1",
            "--target-shape",
            "f15"
        ])
        .1,
        1
    );
    let twelve = fixture("twelve_relators.json");
    let (v, code) = run(&[
        "emit-iso-instance",
        "--presentation",
        &twelve,
        "--symbol",
        "h1",
        "--target-shape",
        "f15",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["provenance"]["p"], 14);
}

#[test]
fn iso_instance_files_verify() {
    let dir = scratch("iso");
    let d = dir.to_str().unwrap();
    let (_, code) = run(&[
        "emit-iso-instance",
        "--symbol",
        "h2 h3^-1 h5",
        "--out-dir",
        d,
    ]);
    assert_eq!(code, 0);
    let (w, code) = run(&["iso-witness", "--symbol", "h2 h3^-1 h5"]);
    assert_eq!(code, 0);
    for (dir_name, src, tgt) in [
        ("forward", "g_h", "action_1"),
        ("backward", "g_1", "action_h"),
    ] {
        let path = dir.join(format!("{dir_name}.json"));
        std::fs::write(&path, w[dir_name].to_string()).unwrap();
        let src = dir.join(format!("{src}.json"));
        let tgt = dir.join(format!("{tgt}.json"));
        let (v, code) = run(&[
            "verify",
            "--source",
            src.to_str().unwrap(),
            "--target-action",
            tgt.to_str().unwrap(),
            "--witness",
            path.to_str().unwrap(),
        ]);
        assert_eq!((code, v["ok"].as_bool()), (0, Some(true)), "{dir_name}");
    }
    // the forward map is not a homomorphism G_1 -> G_h
    let (v, code) = run(&[
        "verify",
        "--source",
        dir.join("g_1.json").to_str().unwrap(),
        "--target-action",
        dir.join("action_h.json").to_str().unwrap(),
        "--witness",
        dir.join("forward.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 3);
    assert!(!v["violated"].as_array().unwrap().is_empty());
}

#[test]
fn conj_instance_and_planes() {
    let dir = scratch("conj");
    let (v, code) = run(&[
        "emit-conj-instance",
        "--left",
        "a b",
        "--right",
        "b a",
        "--out-dir",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["with_h"].as_array().unwrap().len(), 6);
    assert_eq!(v["without_h"].as_array().unwrap().len(), 5);
    let (p, code) = run(&[
        "planes",
        "--matrices",
        dir.join("without_h.json").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(p["commutant_dim"], 2);
    assert_eq!(
        p["report"]["lambdas"],
        serde_json::json!(["0/1", "infinity"])
    );
    let (p, _) = run(&[
        "planes",
        "--matrices",
        dir.join("with_h.json").to_str().unwrap(),
    ]);
    assert_eq!(p["commutant_dim"], 2);
    let (p, _) = run(&["planes", "--oracle", "free"]);
    assert_eq!(p["commutant_dim"], 4);
    assert_eq!(p["report"]["family"], true);
}

#[test]
fn power_and_conjugator_pipeline() {
    let dir = scratch("power");
    let swap = fixture("swap.json");
    let (v, code) = run(&["power", "--matrix", &swap]);
    assert_eq!((code, v["k"].as_u64()), (0, Some(2)));
    let (v, code) = run(&["power", "--matrix", &swap, "--power-bound", "1"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "not_found_within_bound");
    let odd = dir.join("odd.json");
    std::fs::write(
        &odd,
        r#"{"dim":4,"rows":[[1,1,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]}"#,
    )
    .unwrap();
    let (v, code) = run(&["power", "--matrix", odd.to_str().unwrap()]);
    assert_eq!((code, v["k"].as_u64()), (0, Some(2)));

    let (v, code) = run(&[
        "pipeline-3to1",
        "--symbol",
        "h1 h5",
        "--conjugator",
        odd.to_str().unwrap(),
    ]);
    assert_eq!(code, 3, "{v}");
    let (v, code) = run(&[
        "pipeline-3to1",
        "--oracle",
        "free",
        "--symbol",
        "h2",
        "--conjugator",
        &swap,
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["decomposition"], "swaps");
    assert_eq!(v["power"]["k"], 2);
}

#[test]
fn lemma2_pipeline_exit_codes() {
    let (v, code) = run(&["pipeline-lemma2", "--symbol", "h2 h3^-1"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "consistent");
    let (v, code) = run(&["pipeline-lemma2", "--left", "x1", "--right", "x2"]);
    assert_eq!(code, 3);
    assert_eq!(v["non_member_branch"]["no_word_within_depth"], true);
}

#[test]
fn pretty_output_is_the_same_document() {
    let out = |extra: &[&str]| {
        let mut args = vec!["emit-conj-instance", "--symbol", "h4"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_mihailova"))
            .args(&args)
            .output()
            .unwrap()
            .stdout
    };
    let (compact, pretty) = (out(&[]), out(&["--pretty"]));
    assert_ne!(compact, pretty);
    let a: Value = serde_json::from_slice(&compact).unwrap();
    let b: Value = serde_json::from_slice(&pretty).unwrap();
    assert_eq!(a, b);
}
