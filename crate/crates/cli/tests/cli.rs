use std::fs;
use std::path::{Path, PathBuf};

use ovskale::config::ExperimentConfig;
use ovskale::main_with_args;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(config: &Path, out: &Path) -> i32 {
    main_with_args(["ovskale", "run", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

/// Writes `fixture` with `edit` applied to its JSON into `dir`.
fn edited(dir: &Path, fixture_name: &str, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(fixture(fixture_name)).unwrap()).unwrap();
    edit(&mut v);
    let p = dir.join(fixture_name);
    fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    p
}

#[test]
fn missing_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&dir.path().join("nope.json"), dir.path()), 2);
    assert_eq!(main_with_args(["ovskale", "validate", "--config", "/definitely/missing.json"]), 2);
}

#[test]
fn unknown_keys_and_bad_values_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = edited(dir.path(), "evolve.json", |v| v["solver"] = serde_json::json!({"grid": 5}));
    assert_eq!(run(&p, &dir.path().join("a")), 2);
    let p = edited(dir.path(), "evolve.json", |v| v["scale"]["alpha_star"] = 1.0.into());
    assert_eq!(run(&p, &dir.path().join("b")), 2);
    assert!(!dir.path().join("b/manifest.json").exists());
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = edited(dir.path(), "kinetic.json", |v| {
        v["experiment"]["dt"] = 1e9.into();
        v["experiment"]["t_end"] = 1e9.into();
    });
    let out = dir.path().join("out");
    assert_eq!(run(&p, &out), 3);
    let m = manifest(&out);
    assert_eq!(m["exit_code"], 3);
    assert_eq!(m["passed"], false);
}

#[test]
fn failed_assertion_exits_with_1_and_manifest_agrees() {
    let dir = tempfile::tempdir().unwrap();
    let p = edited(dir.path(), "bifurcation.json", |v| v["experiment"]["expect_roots"] = 3.into());
    let out = dir.path().join("out");
    assert_eq!(run(&p, &out), 1);
    let m = manifest(&out);
    assert_eq!(m["passed"], false);
    assert_eq!(m["exit_code"], 1);
}

#[test]
fn bifurcation_b_005_has_one_root_everywhere() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&fixture("bifurcation.json"), dir.path()), 0);
    let csv = fs::read_to_string(dir.path().join("bifurcation.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "root_count").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert_eq!(r.split(',').nth(col).unwrap(), "1");
    }
    let m = manifest(dir.path());
    assert_eq!(m["passed"], true);
    assert_eq!(m["exit_code"], 0);
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["vlasov.json", "bounds.json", "evolve.json"] {
        let (a, b) = (dir.path().join(format!("{name}.1")), dir.path().join(format!("{name}.2")));
        assert_eq!(run(&fixture(name), &a), 0, "{name}");
        assert_eq!(run(&fixture(name), &b), 0, "{name}");
        let m = manifest(&a);
        for f in m["files"].as_array().unwrap() {
            let f = f.as_str().unwrap();
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{name}: {f}");
        }
        assert_eq!(m["config_sha256"], manifest(&b)["config_sha256"]);
    }
}

#[test]
fn seed_flag_changes_sampled_output() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = fixture("bounds.json");
    assert_eq!(run(&cfg, &a), 0);
    let code = main_with_args([
        "ovskale", "run", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap(), "--seed", "99",
    ]);
    assert_eq!(code, 0);
    assert_ne!(fs::read(a.join("samples.csv")).unwrap(), fs::read(b.join("samples.csv")).unwrap());
    assert_eq!(manifest(&b)["seed"], 99);
}

#[test]
fn fixtures_round_trip_and_validate() {
    for entry in fs::read_dir(fixture("")).unwrap() {
        let p = entry.unwrap().path();
        let cfg = ExperimentConfig::load(&p).unwrap();
        cfg.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&cfg.to_json()).unwrap(), cfg, "{}", p.display());
        assert_eq!(main_with_args(["ovskale", "validate", "--config", p.to_str().unwrap()]), 0);
    }
}

#[test]
fn empty_sweep_gives_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let p = edited(dir.path(), "vlasov.json", |v| v["experiment"]["epsilons"] = serde_json::json!([]));
    let out = dir.path().join("out");
    assert_eq!(run(&p, &out), 0);
    assert_eq!(fs::read_to_string(out.join("plot_sweep.csv")).unwrap(), "series,x,y\n");
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 1);
}

#[test]
fn majorant_tables_have_one_row_per_term() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&fixture("evolve.json"), dir.path()), 0);
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let n = summary["terms_used"].as_u64().unwrap() as usize;
    let terms = fs::read_to_string(dir.path().join("terms.csv")).unwrap();
    assert_eq!(terms.lines().count(), n + 1);
    let plot = fs::read_to_string(dir.path().join("plot_majorant.csv")).unwrap();
    assert_eq!(plot.lines().filter(|l| l.starts_with("majorant,")).count(), n);
}

#[test]
fn final_state_feeds_a_new_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    assert_eq!(run(&fixture("evolve.json"), &first), 0);
    let state = first.join("final_state.json");
    let p = edited(dir.path(), "evolve.json", |v| {
        v["experiment"]["initial"] = serde_json::json!({"file": state.to_str().unwrap()});
        v["experiment"]["t_fraction"] = 0.4.into();
    });
    assert_eq!(run(&p, &dir.path().join("second")), 0);
}

#[test]
fn short_runs_fail_the_plain_apriori_bound_only() {
    let dir = tempfile::tempdir().unwrap();
    let p = edited(dir.path(), "evolve.json", |v| v["experiment"]["t_fraction"] = 0.05.into());
    let out = dir.path().join("out");
    assert_eq!(run(&p, &out), 1);
    let m = manifest(&out);
    let status = |name: &str| {
        m["assertions"].as_array().unwrap().iter().find(|a| a["name"] == name).unwrap()["passed"].clone()
    };
    assert_eq!(status("apriori"), false);
    assert_eq!(status("apriori_corrected"), true);
    assert_eq!(status("oracle_agreement"), true);
}

#[test]
fn schema_prints() {
    assert_eq!(main_with_args(["ovskale", "schema"]), 0);
}
