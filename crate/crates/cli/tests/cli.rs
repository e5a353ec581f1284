use std::fs;
use std::path::Path;
use std::process::Command;

use dismem_cli::{run, EXIT_ERROR, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE};
use dismem_core::techdb::SystemConfig;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn dismem(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("dismem").chain(args.iter().copied()), &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classify_deepcam_is_green() {
    let r = dismem(&["classify", "--app", "deepcam", "--scope", "global"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let line = r.stdout.lines().find(|l| l.starts_with("DeepCAM")).unwrap();
    assert!(line.contains("Green"), "{line}");
}

#[test]
fn topology_reference_counts() {
    let r = dismem(&["topology", "--ref", "disagg-24x32-28pct"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let line = r.stdout.lines().find(|l| l.starts_with("disagg-24x32-28pct")).unwrap();
    let cells: Vec<&str> = line.split_whitespace().collect();
    assert_eq!(cells[1], "768");
    assert_eq!(cells[2], "6624");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let r = dismem(&["frobnicate"]);
    assert_eq!(r.code, EXIT_USAGE);
    assert!(r.stderr.contains("Usage"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn help_goes_to_stdout() {
    let r = dismem(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    assert!(r.stdout.contains("reproduce"));
}

#[test]
fn schema_violation_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = SystemConfig::default_json().replacen("\"rack_taper\"", "\"rack_tapr\"", 1);
    fs::write(&bad, text).unwrap();
    let r = dismem(&["--machine", path(&bad), "roofline"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("network"), "{}", r.stderr);
    assert!(r.stderr.contains("rack_tapr"), "{}", r.stderr);
}

#[test]
fn out_of_range_value_is_rejected() {
    let r = dismem(&["--demand-fraction", "1.5", "design-space"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("demand_fraction"), "{}", r.stderr);
}

#[test]
fn reproduce_reports_the_taper_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let r = dismem(&["reproduce", "--out", path(dir.path())]);
    assert_eq!(r.code, EXIT_MISMATCH, "{}", r.stderr);
    assert!(r.stdout.contains("disagg-24x32-9pct global taper"), "{}", r.stdout);
    for f in [
        "heatmap-capacity.svg",
        "heatmap-bandwidth-global.csv",
        "roofline.svg",
        "zones-global.svg",
        "zones-rack.csv",
        "concurrency.svg",
        "topology.csv",
        "golden.json",
        "manifest.json",
    ] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "reproduce");
    assert_eq!(manifest["config_digest"].as_str().unwrap().len(), 64);
    assert!(manifest["artifacts"].as_array().unwrap().iter().any(|a| a == "roofline.svg"));
}

#[test]
fn reproduce_passes_at_fitted_link_bandwidth() {
    let dir = tempfile::tempdir().unwrap();
    let r = dismem(&["reproduce", "--link-bandwidth", "88.3", "--out", path(dir.path())]);
    assert_eq!(r.code, EXIT_OK, "{}\n{}", r.stdout, r.stderr);
    assert!(r.stdout.contains("0 mismatches"));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    dismem(&["reproduce", "--out", path(a.path())]);
    dismem(&["reproduce", "--out", path(b.path())]);
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        let y = fs::read(b.path().join(&name)).unwrap();
        if name == "manifest.json" {
            let strip = |v: &[u8]| {
                let mut m: serde_json::Value = serde_json::from_slice(v).unwrap();
                m.as_object_mut().unwrap().remove("timestamp");
                m
            };
            assert_eq!(strip(&x), strip(&y));
        } else {
            assert!(x == y, "{name:?} differs");
        }
    }
}

#[test]
fn stdout_is_deterministic() {
    for args in [&["design-space", "--format", "csv"][..], &["classify", "--format", "svg"], &["roofline", "--format", "json"]] {
        assert_eq!(dismem(args).stdout, dismem(args).stdout);
    }
}

#[test]
fn config_options_fill_unset_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    let text = SystemConfig::default_json().replacen(
        '{',
        r#"{ "options": { "classify": { "app": ["STREAM"], "scope": "rack" } },"#,
        1,
    );
    fs::write(&cfg, text).unwrap();
    let r = dismem(&["--machine", path(&cfg), "classify"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(r.stdout.starts_with("scope rack"), "{}", r.stdout);
    assert!(r.stdout.contains("STREAM"));
    assert!(!r.stdout.contains("DeepCAM"));

    let r = dismem(&["--machine", path(&cfg), "classify", "--app", "deepcam"]);
    assert!(r.stdout.contains("DeepCAM") && !r.stdout.contains("STREAM"), "{}", r.stdout);
}

#[test]
fn unknown_config_option_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    let text = SystemConfig::default_json().replacen('{', r#"{ "options": { "roofline": { "lr-maxx": 5 } },"#, 1);
    fs::write(&cfg, text).unwrap();
    let r = dismem(&["--machine", path(&cfg), "roofline"]);
    assert_eq!(r.code, EXIT_ERROR);
    assert!(r.stderr.contains("options.roofline"), "{}", r.stderr);
}

#[test]
fn named_machine_from_config_dir_env() {
    let dir = tempfile::tempdir().unwrap();
    let text = SystemConfig::default_json().replacen("\"global_taper\": 0.28", "\"global_taper\": 0.5", 1);
    assert_ne!(text, SystemConfig::default_json(), "default config layout changed");
    fs::write(dir.path().join("wide.json"), text).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_dismem"))
        .args(["--machine", "wide", "roofline"])
        .env("DISMEM_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let global = stdout.lines().find(|l| l.starts_with("global")).unwrap();
    assert!(global.contains("50%") && global.contains("131"), "{global}");

    let missing = Command::new(env!("CARGO_BIN_EXE_dismem"))
        .args(["--machine", "nope", "roofline"])
        .env("DISMEM_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(EXIT_ERROR));
}

#[test]
fn workload_entries_mix_names_and_specs() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.json");
    fs::write(
        &f,
        r#"[
          {"app": "DeepCAM", "node_hours": 100},
          {"app": "STREAM", "node_hours": 50},
          {"app": {"name": "mine", "model": {"kind": "literature", "lr": 3000}, "footprint": "2 TB"}, "node_hours": 10}
        ]"#,
    )
    .unwrap();
    let r = dismem(&["workload", "--entries", path(&f), "--format", "json"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["classifications"].as_array().unwrap().len(), 3);
}

#[test]
fn apps_counters_csv() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.csv");
    fs::write(&f, "counter,value\ndram__sectors_read.sum,1000\ndram__sectors_write.sum,0\nremote_bytes,320\n").unwrap();
    let r = dismem(&["apps", "--counters", path(&f), "--format", "json"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["lr"], 100.0);
}

#[test]
fn concurrency_target() {
    let r = dismem(&["concurrency", "--quanta", "4KiB", "--target", "50", "--format", "json"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["required_concurrency"][0][1], 25);
}

#[test]
fn topologies_from_machine_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("m.json");
    let text = SystemConfig::default_json().replacen(
        '{',
        r#"{ "topologies": { "small": { "kind": "dragonfly", "groups": 4, "switches_per_group": 4,
             "intra_links_per_pair": 1, "inter_links_per_pair": 2, "link_bandwidth": "50 GB/s",
             "endpoints": 64, "endpoint_nic": { "name": "PCIe6", "bandwidth": "100 GB/s", "latency": "2 us" } } },"#,
        1,
    );
    fs::write(&cfg, text).unwrap();
    let r = dismem(&["--machine", path(&cfg), "topology", "--ref", "small"]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let cells: Vec<&str> = r.stdout.lines().find(|l| l.starts_with("small")).unwrap().split_whitespace().collect();
    assert_eq!(cells[1], "16");
    assert_eq!(cells[2], "24");
}

fn schemas_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

#[test]
fn shipped_schemas_are_json() {
    let mut n = 0;
    for entry in fs::read_dir(schemas_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
            assert!(v["$schema"].is_string(), "{}", p.display());
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn shipped_examples_run() {
    let ex = schemas_dir().join("examples");
    let ex = |name: &str| ex.join(name).to_str().unwrap().to_string();
    let cases: Vec<Vec<String>> = vec![
        vec!["--machine".into(), ex("cxl-pool.json"), "topology".into(), "--ref".into(), "pool-16x16".into()],
        vec!["--machine".into(), ex("cxl-pool.json"), "design-space".into()],
        vec!["--machine".into(), ex("cxl-pool.json"), "concurrency".into()],
        vec!["--machine".into(), ex("default-machine.json"), "classify".into()],
        vec!["apps".into(), "--apps-file".into(), ex("apps.json")],
        vec!["classify".into(), "--apps-file".into(), ex("apps.json")],
        vec!["workload".into(), "--entries".into(), ex("workload.json")],
        vec!["topology".into(), "--spec".into(), ex("fat-tree.json")],
    ];
    for args in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let r = dismem(&args);
        assert_eq!(r.code, EXIT_OK, "{args:?}: {}", r.stderr);
    }
}
