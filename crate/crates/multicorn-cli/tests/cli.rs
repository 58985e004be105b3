use std::path::Path;
use std::process::{Command, Output};

use multicorn::atlas::{find_centers, CenterConfig};
use multicorn::render::decode_png;
use multicorn_cli::config::{Config, ConfigError, DEFAULT_SEED};
use multicorn_cli::experiments::run_experiment;
use multicorn_cli::manifest::{manifest_schema, sha256_hex, validate_manifest};

fn multicorn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multicorn"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn empty_config_gives_defaults() {
    let cfg = Config::from_toml_str("").unwrap();
    assert_eq!(cfg, Config::default());
    assert_eq!(cfg.seed(), DEFAULT_SEED);
    assert_eq!(cfg.tolerances.e8_jump_factor, 10.0);
    assert_eq!(cfg.sizes.e8_offsets, vec![1e-2, 1e-3, 1e-4]);
}

#[test]
fn unknown_key_is_named() {
    let err = Config::from_toml_str("[tolerances]\ne7_heigth_quarter = 1e-3\n").unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, ConfigError::Schema { .. }), "{msg}");
    assert!(msg.contains("tolerances"), "{msg}");
    assert!(msg.contains("e7_heigth_quarter"), "{msg}");
}

#[test]
fn type_error_reports_its_path() {
    match Config::from_toml_str("[sizes]\ne1_pixels = \"many\"\n").unwrap_err() {
        ConfigError::Schema { path, .. } => assert_eq!(path, "sizes.e1_pixels"),
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn overrides_merge_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.toml");
    std::fs::write(&file, "seed = 7\n[tolerances]\ne4_cusp = 1e-9\n").unwrap();
    let cfg = Config::load(Some(&file), &["tolerances.e4_cusp=1e-7".into(), "sizes.e0_grid=11".into()]).unwrap();
    assert_eq!(cfg.seed(), 7);
    assert_eq!(cfg.tolerances.e4_cusp, 1e-7);
    assert_eq!(cfg.sizes.e0_grid, 11);
    assert!(Config::load(None, &["no_equals_sign".into()]).is_err());
}

#[test]
fn manifests_validate_against_emitted_schema() {
    let m = run_experiment("E3", &Config::default(), None).unwrap();
    assert!(m.passed);
    let value = serde_json::to_value(&m).unwrap();
    validate_manifest(&value).unwrap();

    let mut broken = value.clone();
    broken.as_object_mut().unwrap().remove("verdicts");
    assert!(validate_manifest(&broken).is_err());
    let mut broken = value;
    broken["passed"] = serde_json::json!("yes");
    let errs = validate_manifest(&broken).unwrap_err();
    assert!(errs.iter().any(|e| e.contains("/passed")), "{errs:?}");

    let o = multicorn(&["--emit-schema"]);
    assert!(o.status.success());
    let emitted: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(emitted, manifest_schema());
}

#[test]
fn experiment_writes_manifest_and_hashed_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = multicorn(&["experiment", "E3", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).lines().all(|l| l.starts_with("E3 PASS")));
    let text = std::fs::read_to_string(dir.path().join("E3/manifest.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    validate_manifest(&value).unwrap();
    for a in value["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(dir.path().join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
}

#[test]
fn verdicts_are_reproducible() {
    let cfg = Config::default();
    let a = run_experiment("E3", &cfg, None).unwrap();
    let b = run_experiment("E3", &cfg, None).unwrap();
    let strip = |m: &multicorn_cli::manifest::ExperimentManifest| {
        m.verdicts.iter().filter(|v| v.criterion != "runtime").cloned().collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.outputs, b.outputs);
}

#[test]
fn tightened_tolerance_fails_with_nonzero_exit() {
    let o = multicorn(&["--set", "tolerances.e0_min_fraction=1.5", "experiment", "E0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("E0 FAIL non-repelling fraction around mu0"));
    let ok = multicorn(&["experiment", "E0"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(multicorn(&["experiment", "E9"]).status.code(), Some(2));
    assert_eq!(multicorn(&["--set", "bogus=1", "count"]).status.code(), Some(2));
    assert_eq!(multicorn(&["ray", "--space", "dyn", "--angle", "1/3"]).status.code(), Some(2));
}

#[test]
fn centers_command_matches_library_call() {
    let o = multicorn(&["--seed", "11", "centers", "--degree", "2", "--period", "3"]);
    assert!(o.status.success());
    let cli: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let lib = find_centers(
        2,
        3,
        &CenterConfig {
            seed: 11,
            ..CenterConfig::default()
        },
    );
    assert_eq!(cli, serde_json::to_value(&lib).unwrap());
    // Complex numbers are [re, im] pairs.
    assert_eq!(cli["centers"][0].as_array().unwrap().len(), 2);
}

#[test]
fn count_command_emits_csv_table() {
    let o = multicorn(&["count", "--degrees", "2", "--periods", "5..6"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,k,phi_minus,phi_plus,s,s_star");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("2,5,") && lines[1].ends_with(",15"), "{}", lines[1]);
    assert!(lines[2].starts_with("2,6,") && lines[2].ends_with(",27,33"), "{}", lines[2]);
}

#[test]
fn ray_command_emits_polyline() {
    let o = multicorn(&["ray", "--space", "dyn", "--angle", "1/3", "--param", "-1,0"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    let f: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    let alpha = (1.0 - 5f64.sqrt()) / 2.0;
    assert!((f[1] - alpha).hypot(f[2]) < 1e-6, "{last}");
}

#[test]
fn index_and_height_commands_at_the_deltoid_tip() {
    let o = multicorn(&["index", "--param", "0.25,0", "--period", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let row: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((row[2] - 0.5).abs() < 1e-6 && row[3].abs() < 1e-6);
    let o = multicorn(&["ecalle-height", "--param", "0.25,0", "--period", "1"]);
    assert!(o.status.success());
    let row: Vec<f64> = stdout(&o).lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!(row[2].abs() < 1e-4);
}

#[test]
fn render_command_writes_images() {
    let dir = tempfile::tempdir().unwrap();
    let png = dir.path().join("t.png");
    let overlay = dir.path().join("o.json");
    std::fs::write(&overlay, r#"{"points": [[-0.75, 0.0]], "curves": [[[0.25, 0.0], [-0.375, 0.6495]]]}"#).unwrap();
    let o = multicorn(&[
        "render",
        "param",
        "--px",
        "48",
        "--py",
        "32",
        "--overlay",
        overlay.to_str().unwrap(),
        "--out",
        png.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let img = decode_png(&std::fs::read(&png).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (48, 32));

    let ppm = dir.path().join("j.ppm");
    let o = multicorn(&["render", "julia", "--param", "-1,0", "--px", "16", "--out", ppm.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read(&ppm).unwrap().starts_with(b"P6"));
    let bad = multicorn(&["render", "param", "--out", dir.path().join("x.gif").to_str().unwrap(), "--px", "8"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!Path::new(&dir.path().join("x.gif")).exists());
}
