//! End-to-end tests of the `candleseg` binary: exit codes, determinism,
//! stage toggles and composability of the per-operator subcommands.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_candleseg"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn assert_code(output: &Output, expected: i32) {
    assert_eq!(
        output.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
}

fn phantom_at(path: &Path, w: u32, h: u32) {
    let out = run(&[
        "phantom",
        "--out",
        path.to_str().unwrap(),
        "--width",
        &w.to_string(),
        "--height",
        &h.to_string(),
    ]);
    assert_code(&out, 0);
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_code(&out, 0);
    for sub in ["pipeline", "segment", "metrics", "phantom"] {
        assert!(
            String::from_utf8_lossy(&out.stdout).contains(sub),
            "help missing {sub}"
        );
    }
    assert_code(&run(&["pipeline", "--help"]), 0);
    assert_code(&run(&["metrics", "--help"]), 0);
}

#[test]
fn unknown_subcommand_exits_one() {
    let out = run(&["frobnicate"]);
    assert_code(&out, 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn bad_flag_value_exits_one() {
    let out = run(&["segment", "in.png", "--out", "d", "--feature-mode", "rgb"]);
    assert_code(&out, 1);
}

#[test]
fn metrics_identity_reports_zero_error() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("a.png");
    phantom_at(&img, 64, 64);
    let out = run(&["metrics", img.to_str().unwrap(), img.to_str().unwrap()]);
    assert_code(&out, 0);
    let json: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    assert_eq!(json["mse"], 0.0);
    let mssim = json["mssim"].as_f64().unwrap();
    assert!((mssim - 1.0).abs() < 1e-9, "mssim = {mssim}");
}

#[test]
fn metrics_dimension_mismatch_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    let b = dir.path().join("b.png");
    phantom_at(&a, 32, 32);
    phantom_at(&b, 48, 32);
    let out = run(&["metrics", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_code(&out, 2);
}

#[test]
fn segment_is_deterministic_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("egg.png");
    phantom_at(&img, 96, 128);
    for run_dir in ["s1", "s2"] {
        let out = run(&[
            "segment",
            img.to_str().unwrap(),
            "--out",
            dir.path().join(run_dir).to_str().unwrap(),
            "--k",
            "3",
            "--seed",
            "42",
        ]);
        assert_code(&out, 0);
    }
    for name in ["cluster_map.png", "cluster_1.png", "color_segmented.png"] {
        let a = std::fs::read(dir.path().join("s1").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("s2").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn pipeline_missing_input_exits_two_with_stage_tag() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "pipeline",
        dir.path().join("missing.png").to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_code(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("load"), "stderr not stage-tagged: {stderr}");
}

#[test]
fn pipeline_without_input_exits_two() {
    let out = run(&["pipeline"]);
    assert_code(&out, 2);
}

#[test]
fn config_k1_is_rejected_naming_k() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, "k = 1\n").unwrap();
    let out = run(&["pipeline", "--config", cfg.to_str().unwrap()]);
    assert_code(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("k must be >= 2"), "{stderr}");
}

#[test]
fn config_unknown_key_is_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.txt");
    std::fs::write(&cfg, "klusters = 3\n").unwrap();
    let out = run(&["pipeline", "--config", cfg.to_str().unwrap()]);
    assert_code(&out, 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("klusters"), "{stderr}");
}

#[test]
fn stage_toggles_shrink_artifact_list() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("egg.png");
    phantom_at(&img, 96, 128);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "pipeline",
        img.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--no-dilate",
        "--no-thicken",
        "--no-edges",
    ]);
    assert_code(&out, 0);
    assert!(out_dir.join("10_bw.png").exists());
    assert!(!out_dir.join("11_dilate.png").exists());
    assert!(!out_dir.join("12_thicken.png").exists());
    assert!(!out_dir.join("13_edges.png").exists());
    assert!(out_dir.join("report.json").exists());
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert!(report["mse"].as_f64().unwrap() >= 0.0);
}

#[test]
fn crop_flag_changes_stage_zero() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("egg.png");
    phantom_at(&img, 96, 128);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "pipeline",
        img.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--crop",
        "8,8,64,96",
    ]);
    assert_code(&out, 0);
    assert!(out_dir.join("00_crop.png").exists());
}

/// Running the per-operator subcommands in sequence must reproduce the
/// pipeline's intermediate files byte for byte.
#[test]
fn pipeline_equals_manual_stage_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("egg.png");
    phantom_at(&img, 146, 195);

    let pipe_dir = dir.path().join("pipe");
    let out = run(&[
        "pipeline",
        img.to_str().unwrap(),
        "--out",
        pipe_dir.to_str().unwrap(),
    ]);
    assert_code(&out, 0);

    let manual = dir.path().join("manual");
    let manual_s = manual.to_str().unwrap();
    assert_code(&run(&["lab", img.to_str().unwrap(), "--out", manual_s]), 0);
    assert_code(
        &run(&[
            "segment",
            img.to_str().unwrap(),
            "--out",
            manual_s,
            "--k",
            "3",
            "--seed",
            "42",
        ]),
        0,
    );
    let gray = manual.join("gray.png");
    assert_code(
        &run(&[
            "gray",
            manual.join("color_segmented.png").to_str().unwrap(),
            "--out",
            gray.to_str().unwrap(),
        ]),
        0,
    );
    assert_code(&run(&["enhance", gray.to_str().unwrap(), "--out", manual_s]), 0);
    assert_code(
        &run(&[
            "morph",
            manual.join("clahe.png").to_str().unwrap(),
            "--out",
            manual_s,
        ]),
        0,
    );
    let edges = manual.join("edges.png");
    assert_code(
        &run(&[
            "edges",
            manual.join("thicken.png").to_str().unwrap(),
            "--out",
            edges.to_str().unwrap(),
        ]),
        0,
    );

    let pairs = [
        ("01_lab.png", "lab.png"),
        ("02_cluster_map.png", "cluster_map.png"),
        ("03_cluster_1.png", "cluster_1.png"),
        ("04_cluster_2.png", "cluster_2.png"),
        ("05_cluster_3.png", "cluster_3.png"),
        ("06_color_segmented.png", "color_segmented.png"),
        ("07_gray.png", "gray.png"),
        ("08_he.png", "he.png"),
        ("09_clahe.png", "clahe.png"),
        ("10_bw.png", "bw.png"),
        ("11_dilate.png", "dilate.png"),
        ("12_thicken.png", "thicken.png"),
        ("13_edges.png", "edges.png"),
    ];
    for (pipeline_name, manual_name) in pairs {
        let a = std::fs::read(pipe_dir.join(pipeline_name)).unwrap();
        let b = std::fs::read(manual.join(manual_name)).unwrap();
        assert_eq!(a, b, "{pipeline_name} != {manual_name}");
    }

    // The report equals the metrics subcommand run on the reference mask
    // (Otsu of the pre-enhancement grayscale) against the final edge mask.
    let ref_dir = dir.path().join("refbw");
    assert_code(
        &run(&[
            "morph",
            gray.to_str().unwrap(),
            "--out",
            ref_dir.to_str().unwrap(),
            "--no-dilate",
            "--no-thicken",
        ]),
        0,
    );
    let json_path = dir.path().join("metrics.json");
    assert_code(
        &run(&[
            "metrics",
            ref_dir.join("bw.png").to_str().unwrap(),
            edges.to_str().unwrap(),
            "--json",
            json_path.to_str().unwrap(),
        ]),
        0,
    );
    let manual_report = std::fs::read(&json_path).unwrap();
    let pipeline_report = std::fs::read(pipe_dir.join("report.json")).unwrap();
    assert_eq!(manual_report, pipeline_report);
}

#[test]
fn batch_mode_processes_directory() {
    let dir = tempfile::tempdir().unwrap();
    let images = dir.path().join("imgs");
    std::fs::create_dir_all(&images).unwrap();
    for (name, w) in [("a.png", 64u32), ("b.png", 72)] {
        phantom_at(&images.join(name), w, 96);
    }
    let out_dir = dir.path().join("out");
    let out = bin()
        .args([
            "pipeline",
            images.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--batch",
        ])
        .env("CANDLESEG_THREADS", "2")
        .output()
        .unwrap();
    assert_code(&out, 0);
    assert!(out_dir.join("a").join("report.json").exists());
    assert!(out_dir.join("b").join("report.json").exists());
}

#[test]
fn phantom_truth_masks_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let img = dir.path().join("p.png");
    let truth = dir.path().join("truth");
    let out = run(&[
        "phantom",
        "--out",
        img.to_str().unwrap(),
        "--width",
        "64",
        "--height",
        "64",
        "--truth-dir",
        truth.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    for name in ["truth_background.png", "truth_egg.png", "truth_yolk.png"] {
        assert!(truth.join(name).exists());
    }
}
