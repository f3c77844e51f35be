use std::path::PathBuf;
use std::process::Command;

use cayley_ltc_cli::instance::build_group;
use cayley_ltc_cli::{run_command, CliError, ExperimentConfig, RunOptions};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn z8(a: &str) -> String {
    format!(
        r#"{{
  "name": "z8",
  "seed": 1,
  "group": {{ "kind": "cyclic", "n": 8 }},
  "generators": {{ "kind": "explicit", "a": {a}, "b": [3, 5] }},
  "codes": {{ "a": {{ "kind": "repetition", "n": 2 }}, "b": {{ "kind": "repetition", "n": 2 }} }}
}}"#
    )
}

#[test]
fn asymmetric_generator_set_is_rejected() {
    let cfg = ExperimentConfig::from_json(&z8("[1, 6]")).unwrap();
    let err = run_command("build", &cfg, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, CliError::Group(_)), "{err:?}");
    assert!(err.to_string().contains("inverses"), "{err}");
}

#[test]
fn parse_errors_name_the_line() {
    let text = z8("[1, 7]").replace("\"seed\": 1", "\"seed\": 1,\n  \"sede\": 2");
    let err = ExperimentConfig::from_json(&text).unwrap_err().to_string();
    assert!(err.contains("unknown field `sede`"), "{err}");
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn unknown_experiment_is_rejected() {
    let text = z8("[1, 7]").replace("\"seed\": 1", "\"seed\": 1,\n  \"experiments\": [\"build\", \"bild\"]");
    let err = ExperimentConfig::from_json(&text).unwrap_err().to_string();
    assert!(err.contains("bild"), "{err}");
}

#[test]
fn code_lengths_must_match_generator_sets() {
    let text = z8("[1, 7]").replace("\"kind\": \"repetition\", \"n\": 2 }, \"b\"", "\"kind\": \"repetition\", \"n\": 3 }, \"b\"");
    let cfg = ExperimentConfig::from_json(&text).unwrap();
    let err = run_command("code", &cfg, &RunOptions::default()).unwrap_err().to_string();
    assert!(err.contains("|A| = 2"), "{err}");
}

#[test]
fn permutation_groups_from_config_and_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("s3.txt"), "# transpositions of S3\n1 0 2\n0 2 1\n").unwrap();
    let body = r#"{
  "name": "s3",
  "seed": 3,
  "group": GROUP,
  "generators": { "kind": "explicit", "a": [1], "b": [2] }
}"#;
    std::fs::write(dir.path().join("file.json"), body.replace("GROUP", r#"{ "kind": "permutation_file", "path": "s3.txt" }"#)).unwrap();
    let from_file = ExperimentConfig::load(&dir.path().join("file.json")).unwrap();
    let inline = ExperimentConfig::from_json(&body.replace("GROUP", r#"{ "kind": "permutations", "generators": [[1, 0, 2], [0, 2, 1]] }"#)).unwrap();
    for cfg in [from_file, inline] {
        let g = build_group(cfg.group.as_ref().unwrap(), &cfg.caps).unwrap();
        assert_eq!(g.order(), 6);
        // every transposition of S3 is conjugate to every other
        let err = run_command("build", &cfg, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, CliError::Complex(_)), "{err:?}");
    }
}

#[test]
fn binary_writes_outputs_and_sets_exit_code() {
    let exe = env!("CARGO_BIN_EXE_cayley-ltc");
    let out = tempfile::tempdir().unwrap();
    let status = Command::new(exe)
        .args(["montecarlo", "--config"])
        .arg(configs().join("z8-demo.json"))
        .arg("--out")
        .arg(out.path())
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let stdout = String::from_utf8(status.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("pass decoder-completeness")), "{stdout}");
    for f in ["montecarlo.json", "montecarlo.csv", "montecarlo.timings.json"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(out.path().join("montecarlo.csv")).unwrap();
    assert!(csv.starts_with("trial,seed,weight,zeta,dist,verdict,iters,dist_out\n"));

    let bad = out.path().join("bad.json");
    std::fs::write(&bad, z8("[1, 6]")).unwrap();
    let status = Command::new(exe).args(["build", "--config"]).arg(&bad).arg("--out").arg(out.path()).output().unwrap();
    assert_eq!(status.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&status.stderr).contains("inverses"));
}

#[test]
fn seed_override_changes_trials() {
    let cfg = ExperimentConfig::load(&configs().join("psl2-5.json")).unwrap();
    let mut small = cfg.clone();
    small.montecarlo.as_mut().unwrap().trials = 50;
    let a = run_command("montecarlo", &small, &RunOptions::default()).unwrap();
    let b = run_command("montecarlo", &small, &RunOptions { seed: Some(small.seed + 1), threads: None }).unwrap();
    assert_ne!(a.csv, b.csv);
}
