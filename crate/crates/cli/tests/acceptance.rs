//! End-to-end acceptance suite: one PASS/FAIL line per criterion, with the
//! measured runtime next to its budget.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use relstab_cli::{load, run, Outcome};
use relstab_core::criteria::{Certificate, WeightedSetup};
use relstab_core::entropy::{rel_eta, state, State, SystemModel};
use relstab_core::models::{Burgers, Euler, IsentropicEuler, Mhd};
use relstab_core::sim::{run_contraction_experiment, Perturbation, SimOptions};
use relstab_core::wave_curves::{
    diperna_check, partial_ok, speed_derivative_range, trace_hugoniot, trace_hugoniot_with, BaseSide, HugoniotOptions, WaveCurve,
};
use serde_json::Value;

type Check = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.toml"))
}

fn run_fixture(name: &str, out: &Path) -> Result<Outcome, String> {
    let text = fs::read_to_string(fixture(name)).map_err(|e| format!("{name}: {e}"))?;
    let loaded = load(&text, None).map_err(|e| format!("{name}: {e:#}"))?;
    let task = loaded.config.task.ok_or_else(|| format!("{name}: fixture has no task"))?;
    run(task, &loaded, out).map_err(|e| format!("{name}: {e:#}"))
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn json_files(dir: &Path, prefix: &str) -> Result<Vec<PathBuf>, String> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.starts_with(prefix) && n.ends_with(".json")
        })
        .collect();
    v.sort();
    Ok(v)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table_rows(cert: &Value, table: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let t = &cert["tables"][table];
    let cols: Vec<String> = serde_json::from_value(t["columns"].clone()).map_err(|e| format!("{table}: {e}"))?;
    let rows: Vec<Vec<f64>> = serde_json::from_value(t["rows"].clone()).map_err(|e| format!("{table}: {e}"))?;
    Ok((cols, rows))
}

fn col(cols: &[String], name: &str) -> Result<usize, String> {
    cols.iter().position(|c| c == name).ok_or_else(|| format!("missing column {name}"))
}

fn identities(tmp: &Path) -> Check {
    let mut worst: f64 = 0.0;
    for name in ["burgers_identities", "isentropic_identities", "euler_identities", "mhd_identities"] {
        let dir = tmp.join(name);
        let outcome = run_fixture(name, &dir)?;
        let r = read_json(&dir.join("identities.json"))?;
        let rep = &r["report"];
        ensure(outcome == Outcome::Pass, || format!("{name}: outcome {outcome:?}"))?;
        ensure(rep["triples"].as_u64() == Some(1000) && rep["fd_states"].as_u64() == Some(100), || format!("{name}: sample counts {rep}"))?;
        for key in ["max_eta_gap", "max_q_gap", "max_metric_gap"] {
            let g = rep[key].as_f64().unwrap_or(f64::NAN);
            ensure(g <= 1e-10, || format!("{name}: {key} = {g:e}"))?;
            worst = worst.max(g);
        }
        let c = rep["max_compatibility_gap"].as_f64().unwrap_or(f64::NAN);
        ensure(c <= 1e-6, || format!("{name}: compatibility gap {c:e}"))?;
    }
    Ok(format!("4 models, worst identity gap {worst:.1e}"))
}

fn extremal(model: &dyn SystemModel, base: &State, family: usize, span: f64) -> Result<WaveCurve, String> {
    let side = if family == 1 { BaseSide::Left } else { BaseSide::Right };
    let opts = HugoniotOptions::new(span, span / 40.0).side(side);
    let (curve, _) = partial_ok(trace_hugoniot_with(model, base, family, &opts)).map_err(|e| format!("{}: {e}", model.name()))?;
    ensure(curve.samples.len() > 5, || format!("{}: curve has {} samples", model.name(), curve.samples.len()))?;
    Ok(curve)
}

fn diperna_gap(model: &dyn SystemModel, curve: &WaveCurve, v: &State) -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        let s = curve.span() * k as f64 / 20.0;
        let (lhs, rhs) = diperna_check(model, curve, v, s).map_err(|e| e.to_string())?;
        let gap = (lhs - rhs).abs() / (1.0 + lhs.abs().max(rhs.abs()));
        ensure(gap <= 1e-6, || format!("{} s={s}: {lhs} vs {rhs}", model.name()))?;
        worst = worst.max(gap);
    }
    Ok(worst)
}

fn diperna() -> Check {
    let e = Euler::default();
    let base = e.from_rho_v_p(1.0, 0.0, 1.0).map_err(|e| e.to_string())?;
    let curve = extremal(&e, &base, 1, 1.0)?;
    let g_euler = diperna_gap(&e, &curve, &e.from_rho_v_p(0.7, 0.4, 1.6).map_err(|e| e.to_string())?)?;
    let m = Mhd::default();
    let curve = extremal(&m, &m.from_w(&[1.0, 1.0, 0.0, 0.0]), 1, 0.6)?;
    let g_mhd = diperna_gap(&m, &curve, &m.from_w(&[1.3, 0.6, 0.2, -0.1]))?;

    let b = Burgers;
    let curve = trace_hugoniot(&b, &state(&[1.0]), 1, 1.5, 0.02).map_err(|e| e.to_string())?;
    let v = state(&[0.3]);
    let mut g_burgers: f64 = 0.0;
    for p in &curve.samples {
        let st = 1.0 - p.s;
        let sigma = 0.5 * (1.0 + st);
        g_burgers = g_burgers.max((p.state[0] - st).abs()).max((p.speed - sigma).abs());
        let (lhs, rhs) = diperna_check(&b, &curve, &v, p.s).map_err(|e| e.to_string())?;
        let cubic = (st.powi(3) - v[0].powi(3)) / 3.0 - v[0] * (st * st - v[0] * v[0]) / 2.0;
        let exact = cubic - sigma * 0.5 * (st - v[0]).powi(2);
        g_burgers = g_burgers.max((lhs - exact).abs()).max((rhs - exact).abs());
    }
    ensure(g_burgers <= 1e-10, || format!("Burgers closed-form gap {g_burgers:e}"))?;
    Ok(format!("relative gaps euler {g_euler:.1e}, mhd {g_mhd:.1e}; burgers closed form {g_burgers:.1e}"))
}

fn burgers_setup() -> WeightedSetup {
    WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, 1.0, Some(1)).unwrap()
}

fn scalar(tmp: &Path) -> Check {
    let dir = tmp.join("burgers_check_res");
    let outcome = run_fixture("burgers_check_res", &dir)?;
    ensure(outcome == Outcome::Pass, || format!("check-res outcome {outcome:?}"))?;
    let h1 = read_json(&dir.join("check-res_a1e0_h1.json"))?["max_value"].as_f64().unwrap_or(f64::NAN);
    let h2 = read_json(&dir.join("check-res_a1e0_h2.json"))?["max_value"].as_f64().unwrap_or(f64::NAN);
    ensure((h1 + 1.0 / 24.0).abs() <= 1e-10, || format!("max D_sm = {h1}"))?;
    ensure(h2 <= 1e-10, || format!("max D_RH = {h2}"))?;
    let mut incs = Vec::new();
    for n in [200, 400, 800] {
        let opts = SimOptions {
            n_cells: n,
            t_final: 0.5,
            perturbation: Perturbation::Bump { center: -0.6, half_width: 0.3, amplitude: vec![0.3] },
            ..SimOptions::default()
        };
        let r = run_contraction_experiment(&burgers_setup(), &opts).map_err(|e| e.to_string())?;
        if n == 400 {
            ensure(r.nonincreasing_within_tolerance(), || format!("n=400: increase {:e} > tol {:e}", r.max_increase, r.tol_scheme))?;
        }
        incs.push(r.max_increase);
    }
    ensure(incs[0] > incs[1] && incs[1] > incs[2], || format!("max increments {incs:?} do not shrink"))?;
    Ok(format!("D_sm+1/24 = {:.1e}, D_RH max {h2:.1e}, max increments {:.2e} > {:.2e} > {:.2e}", h1 + 1.0 / 24.0, incs[0], incs[1], incs[2]))
}

fn mhd(tmp: &Path) -> Check {
    let mut smallest = f64::INFINITY;
    for name in ["mhd_2shock_no_contraction", "mhd_3shock_no_contraction"] {
        let dir = tmp.join(name);
        let outcome = run_fixture(name, &dir)?;
        ensure(outcome == Outcome::Violation, || format!("{name}: outcome {outcome:?}"))?;
        let files = json_files(&dir, "no-contraction_a")?;
        ensure(files.len() == 13, || format!("{name}: {} weights", files.len()))?;
        for f in files {
            let c = read_json(&f)?;
            let (v, tol) = (c["max_value"].as_f64().unwrap_or(f64::NAN), c["tolerance"].as_f64().unwrap_or(f64::NAN));
            ensure(c["verdict"] == "violation" && v > tol, || format!("{}: D_sm {v:e} vs tol {tol:e}", f.display()))?;
            smallest = smallest.min(v / tol);
        }
    }
    Ok(format!("26/26 weights violate, smallest D_sm/tol = {smallest:.1e}"))
}

fn contact(tmp: &Path) -> Check {
    let dir = tmp.join("euler_contact_forbidden");
    let outcome = run_fixture("euler_contact_forbidden", &dir)?;
    ensure(outcome == Outcome::Violation, || format!("forbidden weights: outcome {outcome:?}"))?;
    let files = json_files(&dir, "no-contraction_a")?;
    ensure(files.len() == 6, || format!("{} forbidden weights", files.len()))?;
    let mut rows_checked = 0;
    for f in &files {
        let c = read_json(f)?;
        ensure(c["verdict"] == "violation", || format!("{}: verdict {}", f.display(), c["verdict"]))?;
        let sbar = c["coverage"]["sbar"].as_f64().ok_or("missing sbar")?;
        let (cols, rows) = table_rows(&c, "f_profile")?;
        let (is, iff, ifp) = (col(&cols, "s")?, col(&cols, "F")?, col(&cols, "F_prime")?);
        let first = rows.first().ok_or("empty F profile")?;
        ensure(first[is] == 0.0 && first[iff] > 0.0, || format!("{}: F(0) = {}", f.display(), first[iff]))?;
        for r in rows.iter().filter(|r| r[is] > 0.0 && r[is] < sbar) {
            ensure(r[ifp] > 0.0, || format!("{}: F'({}) = {}", f.display(), r[is], r[ifp]))?;
            rows_checked += 1;
        }
    }
    let dir = tmp.join("euler_contact_ratio");
    let outcome = run_fixture("euler_contact_ratio", &dir)?;
    ensure(outcome == Outcome::Pass, || format!("a=0.5: outcome {outcome:?}"))?;
    Ok(format!("6/6 forbidden weights violate, a=0.5 clean, F' > 0 at {rows_checked} profile samples"))
}

fn weight_range(tmp: &Path) -> Check {
    let dir = tmp.join("euler_shock_weight_range");
    let outcome = run_fixture("euler_shock_weight_range", &dir)?;
    ensure(outcome == Outcome::Pass, || format!("outcome {outcome:?}"))?;
    let c = read_json(&dir.join("weight-range.json"))?;
    let edge = c["coverage"]["edge"].as_f64().ok_or("missing edge")?;
    ensure(edge > 0.0, || format!("edge {edge}"))?;
    let (cols, rows) = table_rows(&c, "trials")?;
    let (ia, ip, id, ic) = (col(&cols, "a")?, col(&cols, "pass")?, col(&cols, "r_a_diameter")?, col(&cols, "surface_closed")?);
    let below: Vec<&Vec<f64>> = rows.iter().filter(|r| r[ia] <= edge).collect();
    ensure(below.iter().all(|r| r[ip] == 1.0), || "a trial below the edge failed".into())?;
    let closed: Vec<(f64, f64)> = below.iter().filter(|r| r[ic] == 1.0).map(|r| (r[ia], r[id])).collect();
    ensure(closed.len() >= 3, || format!("only {} closed surfaces below the edge", closed.len()))?;
    ensure(closed.windows(2).all(|w| w[1].1 > w[0].1), || format!("diameters not monotone: {closed:?}"))?;
    Ok(format!(
        "passing range (0, {edge:.4}], diameter {:.3} at a={:.0e} up to {:.3} at a={:.3} over {} closed surfaces",
        closed[0].1,
        closed[0].0,
        closed[closed.len() - 1].1,
        closed[closed.len() - 1].0,
        closed.len()
    ))
}

fn admissibility() -> Check {
    let e = Euler::default();
    let i = IsentropicEuler::default();
    let m = Mhd::default();
    let mut curves = 0;
    for &(rho, v, p) in &[(1.0, 0.0, 1.0), (0.5, 1.0, 2.0), (2.5, -1.5, 0.4), (1.2, 0.3, 2.8)] {
        let bases: [(&dyn SystemModel, State, f64); 3] = [
            (&e, e.from_rho_v_p(rho, v, p).unwrap(), 0.5),
            (&i, state(&[rho, rho * v]), 0.5),
            (&m, m.from_w(&[rho, 0.5 + 0.3 * p, v, 0.2 * v]), 0.3),
        ];
        for (model, base, span) in bases {
            let n = model.dim();
            let (_, hi) = speed_derivative_range(&extremal(model, &base, 1, span)?).map_err(|e| e.to_string())?;
            ensure(hi < 0.0, || format!("{} 1-family speed slope reaches {hi:e}", model.name()))?;
            let (lo, _) = speed_derivative_range(&extremal(model, &base, n, span)?).map_err(|e| e.to_string())?;
            ensure(lo > 0.0, || format!("{} {n}-family speed slope reaches {lo:e}", model.name()))?;
            curves += 2;
        }
        let base = e.from_rho_v_p(rho, v, p).unwrap();
        let curve = extremal(&e, &base, 1, 0.8)?;
        let eta: Vec<f64> = curve.samples.iter().map(|s| rel_eta(&e, &base, &s.state)).collect();
        ensure(eta.windows(2).all(|w| w[1] > w[0]), || format!("relative entropy not growing from ({rho}, {v}, {p})"))?;
    }
    let base = state(&[1.0, 0.0, 2.0]);
    let (v0, p0) = (e.velocity(&base), e.pressure(&base));
    let mut gap: f64 = 0.0;
    for side in [BaseSide::Left, BaseSide::Right] {
        let opts = HugoniotOptions::new(2.0, 0.05).side(side);
        let (curve, _) = partial_ok(trace_hugoniot_with(&e, &base, 2, &opts)).map_err(|e| e.to_string())?;
        for s in &curve.samples {
            gap = gap.max((e.velocity(&s.state) - v0).abs()).max((e.pressure(&s.state) - p0).abs() / (1.0 + p0));
        }
    }
    ensure(gap <= 1e-8, || format!("contact velocity/pressure gap {gap:e}"))?;
    Ok(format!("{curves} extremal branches with Liu signs, 4 entropy-growth curves, contact gap {gap:.1e}"))
}

const FIXTURES: &[&str] = &[
    "burgers_check_res",
    "burgers_identities",
    "burgers_simulate",
    "burgers_simulate_unperturbed",
    "euler_contact_forbidden",
    "euler_contact_ratio",
    "euler_contact_simulate",
    "euler_identities",
    "euler_shock_classify",
    "euler_shock_trace",
    "euler_shock_weight_range",
    "isentropic_identities",
    "mhd_2shock_check_res",
    "mhd_2shock_no_contraction",
    "mhd_3shock_no_contraction",
    "mhd_identities",
];

fn is_certificate(name: &str) -> bool {
    name.ends_with(".json") && ["check-res_", "no-contraction_", "weight-range"].iter().any(|p| name.starts_with(p))
}

fn determinism(tmp: &Path) -> Check {
    let (mut files, mut witnesses) = (0, 0);
    for name in FIXTURES {
        let (a, b) = (tmp.join("first").join(name), tmp.join("second").join(name));
        run_fixture(name, &a)?;
        run_fixture(name, &b)?;
        let mut names: Vec<String> = fs::read_dir(&a).map_err(|e| e.to_string())?.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
        names.sort();
        for f in &names {
            let (x, y) = (fs::read(a.join(f)).map_err(|e| e.to_string())?, fs::read(b.join(f)).map_err(|e| e.to_string())?);
            ensure(x == y, || format!("{name}/{f} differs between runs"))?;
            files += 1;
            if is_certificate(f) {
                let text = String::from_utf8(x).map_err(|e| e.to_string())?;
                let c = Certificate::from_json(&text).map_err(|e| format!("{name}/{f}: {e}"))?;
                witnesses += c.revalidate().map_err(|e| format!("{name}/{f}: {e}"))?;
            }
        }
    }
    Ok(format!("{} fixtures, {files} byte-identical files, {witnesses} witnesses re-evaluated", FIXTURES.len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let root = tmp.path();
    let criteria: Vec<(&str, u64, Box<dyn Fn() -> Check + '_>)> = vec![
        ("algebraic identities", 10, Box::new(|| identities(root))),
        ("DiPerna oracle", 30, Box::new(diperna)),
        ("scalar ground truth", 120, Box::new(|| scalar(root))),
        ("MHD intermediate shocks", 300, Box::new(|| mhd(root))),
        ("Euler contact weights", 180, Box::new(|| contact(root))),
        ("weight range of an Euler 1-shock", 300, Box::new(|| weight_range(root))),
        ("admissibility invariants", 60, Box::new(admissibility)),
        ("determinism and revalidation", 600, Box::new(|| determinism(&root.join("rerun")))),
    ];
    let mut failed = 0;
    for (k, (title, budget, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let result = check();
        let dt = t0.elapsed();
        let result = result.and_then(|msg| {
            if dt <= Duration::from_secs(*budget) {
                Ok(msg)
            } else {
                Err(format!("{msg}; runtime over the {budget} s budget"))
            }
        });
        let (tag, msg) = match &result {
            Ok(m) => ("PASS", m),
            Err(m) => ("FAIL", m),
        };
        failed += usize::from(result.is_err());
        println!("criterion {} {tag} [{:.2} s / {budget} s] {title}: {msg}", k + 1, dt.as_secs_f64());
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
