use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.toml"))
}

fn relstab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relstab")).args(args).output().expect("spawn relstab")
}

fn run(task: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![task, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    relstab(&args)
}

fn run_fixture(task: &str, name: &str, out: &Path) -> Output {
    run(task, &fixture(name), out, &[])
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn exit_codes_follow_the_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("check-res", "burgers_check_res", 0),
        ("no-contraction", "euler_contact_ratio", 0),
        ("no-contraction", "euler_contact_forbidden", 2),
        ("check-res", "mhd_2shock_check_res", 2),
        ("no-contraction", "euler_shock_contact_theorem", 3),
        ("check-res", "invalid_negative_weight", 1),
        ("simulate", "burgers_boundary_reach", 1),
    ];
    for (task, name, code) in cases {
        let o = run_fixture(task, name, &tmp.path().join(name));
        assert_eq!(o.status.code(), Some(code), "{name}: {}", stderr(&o));
        if code == 0 || code == 2 {
            assert_eq!(summary(&tmp.path().join(name))["exit_code"], code);
        }
    }
}

#[test]
fn negative_weight_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_fixture("check-res", "invalid_negative_weight", tmp.path());
    assert!(stderr(&o).contains("weights.a"), "{}", stderr(&o));
}

#[test]
fn boundary_reach_reports_a_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_fixture("simulate", "burgers_boundary_reach", tmp.path());
    assert!(stderr(&o).contains("boundary"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_task_mismatch_are_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("extra.toml");
    fs::write(&cfg, "[model]\nname = \"burgers\"\ngamma = 1.4\n[identities]\nlo = [-1.0]\nhi = [1.0]\n").unwrap();
    let o = run("identities", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gamma"), "{}", stderr(&o));

    let o = run_fixture("trace", "burgers_identities", &tmp.path().join("mismatch"));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn every_output_embeds_the_config_hash() {
    let tmp = tempfile::tempdir().unwrap();
    for (task, name) in [("trace", "euler_shock_trace"), ("simulate", "burgers_simulate"), ("classify", "euler_shock_classify"), ("check-res", "burgers_check_res")] {
        let dir = tmp.path().join(name);
        assert_eq!(run_fixture(task, name, &dir).status.code(), Some(0));
        let hash = summary(&dir)["config_hash"].as_str().unwrap().to_owned();
        assert_eq!(hash.len(), 64);
        for e in fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            let text = fs::read_to_string(&p).unwrap();
            assert!(text.contains(&hash), "{} lacks the config hash", p.display());
        }
    }
}

#[test]
fn seed_override_changes_the_hash_and_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_fixture("identities", "burgers_identities", &a);
    run("identities", &fixture("burgers_identities"), &b, &["--seed", "42"]);
    let (sa, sb) = (summary(&a), summary(&b));
    assert_ne!(sa["config_hash"], sb["config_hash"]);
    assert_eq!(sb["seed"], 42);
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = tempfile::tempdir().unwrap();
    for (task, name) in [("check-res", "mhd_2shock_check_res"), ("simulate", "euler_contact_simulate")] {
        let (a, b) = (tmp.path().join(name).join("a"), tmp.path().join(name).join("b"));
        run(task, &fixture(name), &a, &["--threads", "1"]);
        run(task, &fixture(name), &b, &["--threads", "4"]);
        let mut files: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        files.sort();
        assert!(!files.is_empty());
        for f in files {
            assert_eq!(fs::read(a.join(&f)).unwrap(), fs::read(b.join(&f)).unwrap(), "{name}/{f:?}");
        }
    }
}

fn series(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut rows = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(rows.next(), Some("t,h,E_a,dEa_dt_estimate,max_wave_speed"));
    rows.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect()
}

#[test]
fn unperturbed_shock_stays_flat_up_to_grid_effects() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_fixture("simulate", "burgers_simulate_unperturbed", tmp.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows = series(&tmp.path().join("simulate_a1e0.csv"));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("simulate_a1e0.json")).unwrap()).unwrap();
    let tol = report["report"]["tol_scheme"].as_f64().unwrap();
    assert_eq!(rows[0][2], 0.0);
    // the dissipative flux smears the step over a few cells
    assert!(rows.iter().all(|r| r[2] >= 0.0 && r[2] <= tol), "E_a leaves [0, tol_scheme]");
}

#[test]
fn contraction_run_has_nonincreasing_series() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run_fixture("simulate", "burgers_simulate", tmp.path()).status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("simulate_a1e0.json")).unwrap()).unwrap();
    let tol = report["report"]["tol_scheme"].as_f64().unwrap();
    let rows = series(&tmp.path().join("simulate_a1e0.csv"));
    let mut peak = f64::NEG_INFINITY;
    let mut low = f64::INFINITY;
    for r in &rows {
        low = low.min(r[2]);
        peak = peak.max(r[2] - low);
    }
    assert!(peak <= tol, "E_a rises by {peak} against tol {tol}");
    assert_eq!(report["nonincreasing_within_tolerance"], true);
}
