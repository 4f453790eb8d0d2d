//! The five subcommands through their library entry points.

use std::fs;
use std::path::{Path, PathBuf};

use depthlab_cli::*;
use depthlab_core::bits::bs;
use sha2::{Digest, Sha256};

/// sha256 of `trace.jsonl` for the reference config at 200 stages, frozen
/// from the first build.
const REFERENCE_200_DIGEST: &str = "461ff7744cf54572fe1629f0637ba588874133f784d3d39a0141e11abefdc1b6";

fn repo(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn construct(config: &Path, stages: Option<u64>, out_dir: &Path) -> String {
    let args = ConstructArgs {
        config: config.to_path_buf(),
        stages,
        trace_out: None,
        snapshot_len: None,
        out_dir: out_dir.to_path_buf(),
    };
    let mut out = Vec::new();
    assert_eq!(cmd_construct(&args, &mut out).unwrap(), EXIT_OK);
    String::from_utf8(out).unwrap()
}

fn verify(trace: &Path, config: &Path, format: Format) -> (anyhow::Result<i32>, String) {
    let args = VerifyArgs {
        trace: trace.to_path_buf(),
        config: config.to_path_buf(),
        requests: None,
        format,
        out_dir: None,
    };
    let mut out = Vec::new();
    let status = cmd_verify(&args, &mut out);
    (status, String::from_utf8(out).unwrap())
}

fn sha256(path: &Path) -> String {
    hex::encode(Sha256::digest(fs::read(path).unwrap()))
}

#[test]
fn reference_trace_matches_golden_digest() {
    let dir = tempfile::tempdir().unwrap();
    let summary = construct(&repo("configs/reference.toml"), Some(200), dir.path());
    assert_eq!(sha256(&dir.path().join("trace.jsonl")), REFERENCE_200_DIGEST);
    assert!(summary.contains("I_4 = [15, 30]"), "{summary}");
    let a = fs::read_to_string(dir.path().join("final_a.txt")).unwrap();
    assert!(a.starts_with("0000001000000000000000000000001"));
    assert_eq!(fs::read_to_string(dir.path().join("requests.jsonl")).unwrap(), "");
}

#[test]
fn construct_is_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let config = repo("configs/seeded/acting-set.toml");
    construct(&config, Some(300), a.path());
    construct(&config, Some(300), b.path());
    for file in ["trace.jsonl", "final_a.txt", "requests.jsonl"] {
        assert_eq!(
            fs::read(a.path().join(file)).unwrap(),
            fs::read(b.path().join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn zero_stages_give_one_stage_record() {
    let dir = tempfile::tempdir().unwrap();
    construct(&repo("configs/reference.toml"), Some(0), dir.path());
    let trace = fs::read_to_string(dir.path().join("trace.jsonl")).unwrap();
    let stage_ends = trace.lines().filter(|l| l.contains("\"stage_end\"")).count();
    assert_eq!(stage_ends, 1);
}

#[test]
fn snapshot_length_and_trace_path_flags() {
    let dir = tempfile::tempdir().unwrap();
    let args = ConstructArgs {
        config: repo("configs/reference.toml"),
        stages: Some(40),
        trace_out: Some(dir.path().join("custom.jsonl")),
        snapshot_len: Some(8),
        out_dir: dir.path().join("out"),
    };
    cmd_construct(&args, &mut Vec::new()).unwrap();
    let trace = fs::read_to_string(dir.path().join("custom.jsonl")).unwrap();
    assert!(trace.lines().next().unwrap().contains("\"snapshot_len\":8"));
    assert!(trace.contains("\"snapshot\":\"00000010\""));
    assert!(dir.path().join("out/final_a.txt").exists());
}

#[test]
fn missing_roster_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(repo("configs/reference.toml"))
        .unwrap()
        .replace("reference_roster.toml", "no_such_roster.toml");
    let config = dir.path().join("config.toml");
    fs::write(&config, text).unwrap();
    let args = ConstructArgs {
        config,
        stages: Some(1),
        trace_out: None,
        snapshot_len: None,
        out_dir: dir.path().join("out"),
    };
    let err = cmd_construct(&args, &mut Vec::new()).unwrap_err();
    assert!(format!("{err:#}").contains("no_such_roster.toml"), "{err:#}");
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(repo("configs/reference.toml"))
        .unwrap()
        .replace("step_horizon = 100000", "step_horizon = 0")
        .replace(
            "\"reference_roster.toml\"",
            &format!("\"{}\"", repo("configs/reference_roster.toml").display()),
        );
    let config = dir.path().join("config.toml");
    fs::write(&config, text).unwrap();
    let args = ConstructArgs {
        config,
        stages: Some(1),
        trace_out: None,
        snapshot_len: None,
        out_dir: dir.path().join("out"),
    };
    let err = cmd_construct(&args, &mut Vec::new()).unwrap_err();
    assert!(format!("{err:#}").contains("caps.step_horizon"), "{err:#}");
}

#[test]
fn verify_passes_golden_and_locates_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo("configs/reference.toml");
    construct(&config, Some(200), dir.path());
    let trace = dir.path().join("trace.jsonl");
    let (status, report) = verify(&trace, &config, Format::Text);
    assert_eq!(status.unwrap(), EXIT_OK, "{report}");

    let text = fs::read_to_string(&trace).unwrap();
    let tampered = dir.path().join("tampered.jsonl");
    let move_line = text.lines().find(|l| l.contains("\"move_in\"")).unwrap();
    let tau = move_line.split("\"tau\":\"").nth(1).unwrap().split('"').next().unwrap();
    let forged = move_line.replace(&format!("\"tau\":\"{tau}\""), &format!("\"tau\":\"{}\"", "0".repeat(tau.len())));
    fs::write(&tampered, text.replace(move_line, &forged)).unwrap();
    let (status, report) = verify(&tampered, &config, Format::Json);
    assert_eq!(status.unwrap(), EXIT_FAILED);
    let json: serde_json::Value = serde_json::from_str(&report).unwrap();
    let failed: Vec<&serde_json::Value> = json["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["asserting"] == true && r["passed"] == false)
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|r| r["witness"]["detail"].is_string()));
}

#[test]
fn verify_refuses_wrong_config_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    construct(&repo("configs/reference.toml"), Some(20), dir.path());
    let trace = dir.path().join("trace.jsonl");
    let (status, _) = verify(&trace, &repo("configs/seeded/slow-phi.toml"), Format::Text);
    assert!(format!("{:#}", status.unwrap_err()).contains("hashes to"));

    let text = fs::read_to_string(&trace).unwrap().replace("depthlab-trace/1", "depthlab-trace/0");
    let old = dir.path().join("old.jsonl");
    fs::write(&old, text).unwrap();
    let (status, _) = verify(&old, &repo("configs/reference.toml"), Format::Text);
    assert!(format!("{:#}", status.unwrap_err()).contains("unsupported trace schema"));
}

#[test]
fn complexity_of_zero_is_two() {
    let args = ComplexityArgs {
        target: bs("0"),
        horizon: 100_000,
        cap: 15,
        roster: Some(repo("configs/reference_roster.toml")),
        table: false,
        format: Format::Json,
    };
    let mut out = Vec::new();
    assert_eq!(cmd_complexity(&args, &mut out).unwrap(), EXIT_OK);
    let json: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(json["value"], 2);
    assert_eq!(json["witness"]["program"], "10");
    assert!(json.get("table").is_none());
}

#[test]
fn solovay_sixteen_rows() {
    let args = SolovayArgs {
        n_max: 16,
        horizon: 100_000,
        cap: 20,
        roster: None,
        format: Format::Json,
    };
    let mut out = Vec::new();
    assert_eq!(cmd_solovay(&args, &mut out).unwrap(), EXIT_OK);
    let json: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 16);
    assert_eq!(json["rows"][1]["s_n"], 3);
}

#[test]
fn kc_audits_two_requests_at_weight_one() {
    let args = |file: &str| KcArgs {
        requests: repo(file),
        index: None,
        cost: 1,
        format: Format::Json,
    };
    let mut out = Vec::new();
    assert_eq!(cmd_kc(&args("configs/requests/two.jsonl"), &mut out).unwrap(), EXIT_OK);
    let json: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(json["weight"], "1");
    assert_eq!(json["bounded"], true);
    assert!(json["fragment"].as_str().unwrap().contains("index = 14"));

    let mut out = Vec::new();
    assert_eq!(cmd_kc(&args("configs/requests/overweight.jsonl"), &mut out).unwrap(), EXIT_FAILED);
    let json: serde_json::Value = serde_json::from_slice(&out).unwrap();
    assert_eq!(json["weight"], "9/8");
    assert!(json["refused"].is_string());
}
