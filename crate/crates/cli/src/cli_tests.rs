//! The command line end to end, driven through the same entry point as the
//! binary, so exit codes are the ones a shell would see.

use crate::main_with_args;
use crate::verify::{fast_checks, run_checks};
use std::path::Path;

fn semiham(args: &[&str]) -> i32 {
    let mut argv = vec!["semiham".into()];
    argv.extend(args.iter().map(Into::into));
    main_with_args(argv)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec!["simulate", "--strategy", "bogus", "--out", out],
        vec!["simulate", "--strategy", "fr", "--eps", "1.5", "--out", out],
        vec!["simulate", "--strategy", "fr", "--stop", "sometime", "--out", out],
        vec!["--n", "1", "simulate", "--strategy", "fr", "--out", out],
        vec!["frobnicate"],
    ] {
        assert_eq!(semiham(&args), 1, "{args:?}");
    }
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    let out = file.join("sub");
    assert_eq!(semiham(&["--n", "1000", "simulate", "--strategy", "fr", "--out", out.to_str().unwrap()]), 2);
}

#[test]
fn verify_passes_and_detects_an_injected_fault() {
    assert_eq!(semiham(&["verify"]), 0);
    assert_eq!(semiham(&["verify", "--inject-fault", "f-coefficient"]), 3);
    let failed: Vec<&str> =
        run_checks(fast_checks(Some("f-coefficient"))).into_iter().filter(|o| !o.passed).map(|o| o.name).collect();
    assert_eq!(failed, ["lower-bound root and identity"]);
}

#[test]
fn claim_check_exit_code_reflects_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(semiham(&["--n", "6", "lowerbound", "--mode", "claim-check", "--trials", "50", "--out", out]), 0);
    assert_eq!(json(&dir.path().join("summary.json"))["status"], "pass");
}

#[test]
fn simulate_writes_summary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(semiham(&["--n", "3000", "--seeds", "2", "simulate", "--strategy", "dg", "--N", "3", "--out", out]), 0);
    let s = json(&dir.path().join("summary.json"));
    assert_eq!(s["schema_version"], 1);
    for key in ["tau_001", "tau_002", "tau_003", "end"] {
        assert!(s["hitting_times"][key].is_number(), "missing {key}");
    }
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["command"], "simulate");
    assert_eq!(m["config"]["flags"]["N"], 3);
    let files: Vec<&str> = m["files"].as_array().unwrap().iter().map(|f| f.as_str().unwrap()).collect();
    for f in ["trace_dg_seed0.csv", "trace_dg_seed1.csv", "plot.csv", "summary.json"] {
        assert!(files.contains(&f), "{f} not listed in {files:?}");
    }
    let header = std::fs::read_to_string(dir.path().join("trace_dg_seed0.csv")).unwrap();
    assert_eq!(header.lines().next().unwrap(), "t,phase,X,Y,R,B,M,D");
}

#[test]
fn rerun_from_manifest_is_bit_exact() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    assert_eq!(semiham(&[
        "--n", "2000", "--seed", "5", "--seeds", "2", "simulate", "--strategy", "cleanup", "--eps", "0.01",
        "--out", first.path().to_str().unwrap(),
    ]), 0);
    let manifest = first.path().join("manifest.json");
    assert_eq!(semiham(&["simulate", "--config", manifest.to_str().unwrap(), "--out", second.path().to_str().unwrap()]), 0);
    let mut names: Vec<String> = std::fs::read_dir(first.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    names.sort();
    assert!(names.len() >= 4, "{names:?}");
    for n in &names {
        let a = std::fs::read(first.path().join(n)).unwrap();
        let b = std::fs::read(second.path().join(n)).unwrap_or_else(|_| panic!("{n} missing on rerun"));
        assert!(a == b, "{n} differs on rerun");
    }
}

#[test]
fn toml_config_values_are_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "n = 1500\nseed = 4\n[ode]\nsystem = \"dg-pipeline\"\n[simulate]\nstrategy = \"uniform\"\n").unwrap();
    let out = dir.path().join("out");
    assert_eq!(semiham(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--seed", "8", "--stop", "budget:100", "--out",
        out.to_str().unwrap(),
    ]), 0);
    let flags = &json(&out.join("manifest.json"))["config"]["flags"];
    assert_eq!(flags["n"], 1500);
    assert_eq!(flags["seed"], 8);
    assert_eq!(flags["strategy"], "uniform");
    assert_eq!(json(&out.join("summary.json"))["hitting_times"]["end"].as_f64().unwrap(), 100.0 / 1500.0);
}

#[test]
fn ode_and_lowerbound_write_their_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ode");
    assert_eq!(semiham(&["ode", "--system", "dg-pipeline", "--N", "2", "--out", out.to_str().unwrap()]), 0);
    let s = json(&out.join("summary.json"));
    assert_eq!(s["constants"]["sigma"].as_array().unwrap().len(), 2);
    assert!(out.join("plot.csv").exists());

    let out = dir.path().join("lb");
    assert_eq!(semiham(&["lowerbound", "--mode", "analytic", "--out", out.to_str().unwrap()]), 0);
    let beta = json(&out.join("summary.json"))["constants"]["beta"].as_f64().unwrap();
    assert!((beta - 1.26575).abs() < 1e-4);
    let table = std::fs::read_to_string(out.join("f_table.csv")).unwrap();
    assert_eq!(table.lines().count(), 62);
}
