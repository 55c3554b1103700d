//! Exit-code and determinism contracts of the scatterlab binary.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scatterlab"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scatterlab-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SMALL_CFG: &str =
    r#"{"grid": {"n": 16, "L": 0.7}, "field": {"radius": 0.25}, "tau": {"n": 4}}"#;

#[test]
fn synth_succeeds_and_writes_output() {
    let dir = scratch("synth");
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, SMALL_CFG).unwrap();
    let out = dir.join("v.ffpk");
    let status = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .args(["--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.exists());
    assert!(dir.join("v.ffpk.manifest.json").exists());
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let output = bin().args(["synth", "--bogus", "x"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.to_lowercase().contains("usage"), "stderr: {err}");
}

#[test]
fn unknown_subcommand_exits_2() {
    let output = bin().arg("frobnicate").output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_constraint_violation_exits_2_naming_key() {
    let dir = scratch("badcfg");
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, r#"{"field": {"m": 4.5}}"#).unwrap();
    let out = dir.join("v.ffpk");
    let output = bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .args(["--seed", "1", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("field.m"), "stderr: {err}");
}

#[test]
fn born_divergent_forward_exits_3_naming_theta_and_k() {
    let dir = scratch("div");
    let cfg = dir.join("c.json");
    // Amplitude far past the Neumann gate at k ~ 2.
    std::fs::write(
        &cfg,
        r#"{"grid": {"n": 16, "L": 0.7}, "field": {"radius": 0.25, "amplitude": 4.0e6}}"#,
    )
    .unwrap();
    let pot = dir.join("v.ffpk");
    assert_eq!(
        bin()
            .args(["synth", "--config"])
            .arg(&cfg)
            .args(["--seed", "3", "--out"])
            .arg(&pot)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let out = dir.join("d.ffpk");
    let output = bin()
        .args(["forward", "--potential"])
        .arg(&pot)
        .args([
            "--kmin", "2.0", "--kmax", "2.5", "--nk", "3", "--ndir", "2", "--method", "born",
            "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3), "{output:?}");
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(
        err.contains("theta") && err.contains("k="),
        "diagnostic must name (theta, k): {err}"
    );
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let dir = scratch("threads");
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, SMALL_CFG).unwrap();
    let mut contents = Vec::new();
    for threads in ["1", "4"] {
        let pot = dir.join(format!("v{threads}.ffpk"));
        let ds = dir.join(format!("d{threads}.ffpk"));
        assert_eq!(
            bin()
                .env("SCATTERLAB_THREADS", threads)
                .args(["synth", "--config"])
                .arg(&cfg)
                .args(["--seed", "9", "--out"])
                .arg(&pot)
                .status()
                .unwrap()
                .code(),
            Some(0)
        );
        assert_eq!(
            bin()
                .env("SCATTERLAB_THREADS", threads)
                .args(["forward", "--potential"])
                .arg(&pot)
                .args([
                    "--kmin", "4.0", "--kmax", "6.0", "--nk", "40", "--ndir", "6", "--method",
                    "born0", "--out",
                ])
                .arg(&ds)
                .status()
                .unwrap()
                .code(),
            Some(0)
        );
        contents.push((std::fs::read(&pot).unwrap(), std::fs::read(&ds).unwrap()));
    }
    assert_eq!(contents[0].0, contents[1].0);
    assert_eq!(contents[0].1, contents[1].1);
}

#[test]
fn reconstruct_and_resolvent_roundtrip() {
    let dir = scratch("rec");
    let cfg = dir.join("c.json");
    std::fs::write(&cfg, SMALL_CFG).unwrap();
    let pot = dir.join("v.ffpk");
    bin()
        .args(["synth", "--config"])
        .arg(&cfg)
        .args(["--seed", "5", "--out"])
        .arg(&pot)
        .status()
        .unwrap();
    let ds = dir.join("d.ffpk");
    assert_eq!(
        bin()
            .args(["forward", "--potential"])
            .arg(&pot)
            .args([
                "--kmin", "4.0", "--kmax", "8.6", "--nk", "160", "--ndir", "6", "--method",
                "born0", "--out",
            ])
            .arg(&ds)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let prefix = dir.join("rec").to_string_lossy().into_owned();
    assert_eq!(
        bin()
            .args(["reconstruct", "--data"])
            .arg(&ds)
            .args(["--ntau", "4", "--ntheta", "6", "--out-prefix", &prefix])
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    assert!(PathBuf::from(format!("{prefix}_hhat.csv")).exists());
    assert!(PathBuf::from(format!("{prefix}_hrec.ffpk")).exists());
    assert!(PathBuf::from(format!("{prefix}_report.csv")).exists());

    let lambdas = dir.join("lambdas.csv");
    std::fs::write(&lambdas, "4.0,0.0\n8.0,0.0\n4.0,-0.5\n").unwrap();
    let res_out = dir.join("resolvent.csv");
    assert_eq!(
        bin()
            .args(["resolvent", "--grid-n", "16", "--L", "0.7", "--lambda-list"])
            .arg(&lambdas)
            .arg("--out")
            .arg(&res_out)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(&res_out).unwrap();
    assert!(text.starts_with("re_lambda,im_lambda,norm_estimate,bound_value"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn experiment_emits_rows_summary_and_svg() {
    let dir = scratch("exp");
    let cfg = dir.join("exp.json");
    std::fs::write(
        &cfg,
        r#"{
            "grid": {"n": 16, "L": 0.7},
            "field": {"radius": 0.25},
            "directions": {"n": 6},
            "ensemble": {"R": 2},
            "tau": {"n": 4},
            "experiment": {"bands": [4.0], "delta": 0.1}
        }"#,
    )
    .unwrap();
    let prefix = dir.join("exp").to_string_lossy().into_owned();
    assert_eq!(
        bin()
            .args(["experiment", "--config"])
            .arg(&cfg)
            .args(["--out-prefix", &prefix])
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let rows = std::fs::read_to_string(format!("{prefix}_rows.csv")).unwrap();
    assert!(rows.starts_with("realization,band_k,eps_sq"));
    assert_eq!(rows.lines().count(), 3); // header + 2 realizations x 1 band
    assert!(PathBuf::from(format!("{prefix}_summary.csv")).exists());
    let svg = std::fs::read_to_string(format!("{prefix}_curves.svg")).unwrap();
    assert!(svg.contains("<polyline"));
}

#[test]
fn ergodic_reports_worst_case_exceedance() {
    use scatterlab_core::dataset::SweepMethod;
    use scatterlab_core::datastore::save_dataset;
    use scatterlab_core::forward::backscatter_sweep;
    use scatterlab_core::gridfield::{make_grid, strength_preset, synthesize_potential, PresetId};

    let dir = scratch("ergodic");
    // Build a 100-member Born-0 ensemble directly through the library (the
    // CLI equivalent is 100 `forward` runs).
    let grid = make_grid(16, 0.7).unwrap();
    let h = strength_preset(PresetId::SingleBump, grid, 1.0, 0.25).unwrap();
    let dirs = vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]];
    let k_grid: Vec<f64> = (0..170).map(|j| 4.0 + 0.05 * j as f64).collect();
    let mut files = Vec::new();
    for seed in 0..100u64 {
        let v = synthesize_potential(&h, 3.0, 600 + seed).unwrap();
        let ds = backscatter_sweep(&v, &dirs, &k_grid, 1e-8, SweepMethod::Born0, 0).unwrap();
        let name = format!("member{seed:03}.ffpk");
        save_dataset(&dir.join(&name), &ds).unwrap();
        files.push(name);
    }
    std::fs::write(
        dir.join("index.json"),
        serde_json::to_string(&serde_json::json!({ "files": files })).unwrap(),
    )
    .unwrap();
    let out = dir.join("ergodic.csv");
    assert_eq!(
        bin()
            .args(["ergodic", "--ensemble-dir"])
            .arg(&dir)
            .args(["--eps", "0.2", "--tau", "0.25", "--ktilde-list", "4,5", "--out"])
            .arg(&out)
            .status()
            .unwrap()
            .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("component,k_tilde,exceedance"));
    // 8 components x 2 thresholds + 2 worst-case rows.
    assert_eq!(text.lines().count(), 1 + 8 * 2 + 2);
    assert!(text.contains("worst_case"));
}
