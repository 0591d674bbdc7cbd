use std::path::{Path, PathBuf};
use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;
use wavectl_cli::config::{parse_config, ProblemConfig, Sweep, SweepParam};
use wavectl_cli::{run, Options};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn wavectl(args: &[&str], out: Option<&Path>) -> (i32, Value) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wavectl"));
    cmd.args(args).env_remove("WAVECTL_TOLERANCE_PROFILE");
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    let output = cmd.output().unwrap();
    let report: Value = serde_json::from_slice(&output.stdout).unwrap();
    (output.status.code().unwrap(), report)
}

fn config(name: &str) -> String {
    configs().join(name).display().to_string()
}

#[test]
fn verify_succeeds_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = wavectl(&["verify", "--config", &config("coupled.json")], Some(dir.path()));
    assert_eq!(code, 0);
    assert_eq!(report["verification"]["pass"], true);
    for f in ["report.json", "control.csv", "control_combo.json", "state.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(dir.path().join("control.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,f"));
    assert_eq!(lines.count(), 2048);
    let state = std::fs::read_to_string(dir.path().join("state.csv")).unwrap();
    assert!(state.starts_with("x,u1,u2,ut1,ut2\n"));
    assert_eq!(state.lines().count(), 514);
    let combo: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("control_combo.json")).unwrap()).unwrap();
    assert_eq!(combo["terms"].as_array().unwrap().len(), report["synthesis"]["terms"].as_u64().unwrap() as usize);
}

#[test]
fn exit_codes_follow_the_error_taxonomy() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = wavectl(&["analyze", "--config", &config("resonant.json")], None);
    assert_eq!(code, 2);
    assert!(report["conditions"]["resonances"].as_array().unwrap().iter().any(|r| r["k"] == 2 && r["l"] == 1));

    let (code, _) = wavectl(&["synthesize", "--config", &config("resonant.json")], Some(dir.path()));
    assert_eq!(code, 2);
    let (code, report) = wavectl(&["synthesize", "--force", "--config", &config("resonant.json")], Some(dir.path()));
    assert_eq!(code, 3);
    assert!(report["errors"].to_string().contains("singular system"));
    assert!(!dir.path().join("control.csv").exists());

    let (code, report) = wavectl(&["verify", "--config", &config("kalman.json")], Some(dir.path()));
    assert_eq!(code, 2);
    assert_eq!(report["conditions"]["kalman_ok"], false);
    assert!(!dir.path().join("control.csv").exists());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"A": [[1, 2]], "b": [1]}"#).unwrap();
    let (code, report) = wavectl(&["analyze", "--config", bad.to_str().unwrap()], None);
    assert_eq!(code, 4);
    assert_eq!(report["errors"].as_array().unwrap().len(), 2);
}

#[test]
fn unknown_tolerance_profile_is_bad_input() {
    let out = Command::new(env!("CARGO_BIN_EXE_wavectl"))
        .args(["analyze", "--config", &config("scalar.json")])
        .env("WAVECTL_TOLERANCE_PROFILE", "sloppy")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let strict = Command::new(env!("CARGO_BIN_EXE_wavectl"))
        .args(["verify", "--config", &config("scalar.json")])
        .env("WAVECTL_TOLERANCE_PROFILE", "strict")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = wavectl_cli::load_config(&configs().join("coupled.json")).unwrap();
    let opts = |d: &Path| Options { out: Some(d.to_path_buf()), seed: Some(42), ..Options::default() };
    let ra = run(wavectl_cli::Command::Verify, &cfg, &opts(a.path()));
    let rb = run(wavectl_cli::Command::Verify, &cfg, &opts(b.path()));
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("files");
        v
    };
    assert_eq!(strip(ra.payload()), strip(rb.payload()));
    for f in ["control.csv", "control_combo.json", "state.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    assert!(ra.self_test.unwrap().pass);
}

#[test]
fn threshold_sweep_tabulates_conditioning() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = wavectl(&["sweep", "--config", &config("threshold_sweep.json")], Some(dir.path()));
    assert_eq!(code, 0);
    let rows = report["sweep"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let dd: Vec<f64> = rows.iter().map(|r| r["cond_dd"].as_f64().unwrap()).collect();
    // conditioning improves as the horizon grows past the threshold
    assert!(dd[0] > dd[1] && dd[1] > dd[2], "{dd:?}");
    assert_eq!(rows[2]["pass"], true);
    let table = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
}

#[test]
fn sweep_without_a_grid_is_bad_input() {
    let (code, _) = wavectl(&["sweep", "--config", &config("coupled.json")], None);
    assert_eq!(code, 4);
}

fn arb_config() -> impl Strategy<Value = ProblemConfig> {
    (1usize..=3).prop_flat_map(|n| {
        let num = || prop_oneof![(-1e3..1e3f64), Just(0.0), (-1.0..1.0f64).prop_map(|x| x * 1e-12)];
        let comp = move || prop_oneof![num().prop_map(|x| num_complex::Complex::new(x, 0.0)), (num(), num().prop_filter("im", |x| *x != 0.0)).prop_map(|(a, b)| num_complex::Complex::new(a, b))];
        let entries = move || prop::collection::vec((1usize..=8, prop::collection::vec(comp(), n)), 0..3);
        (
            prop::collection::vec(prop::collection::vec(num(), n), n),
            prop::collection::vec(0.1..5.0f64, n),
            0.01..50.0f64,
            8usize..40,
            prop_oneof![Just("raw"), Just("edd")],
            (entries(), entries()),
            prop::option::of(2usize..5000),
            prop::collection::btree_map(prop_oneof![Just("pivot_tol".to_string()), Just("cond_cap".to_string())], 1e-14..1e14f64, 0..2),
            prop::option::of(prop_oneof![
                prop::collection::vec(0.5..30.0f64, 1..4).prop_map(|v| Sweep { param: SweepParam::T, values: v }),
                prop::collection::vec(1usize..64, 1..4).prop_map(|v| Sweep { param: SweepParam::K, values: v.into_iter().map(|k| k as f64).collect() }),
            ]),
        )
            .prop_map(|(a, b, t, k, m, (z0, z1), samples, tolerances, sweep)| ProblemConfig {
                a,
                b,
                t,
                k,
                method: wavectl_core::pipeline::Method::parse(m).unwrap(),
                target: wavectl_core::moments::TargetSpec { z0, z1 },
                samples,
                tolerances,
                sweep,
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn parse_serialize_parse_is_identity(c in arb_config()) {
        let text = c.to_text();
        let back = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e:?}\n{text}")))?;
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.to_text(), text);
    }
}
