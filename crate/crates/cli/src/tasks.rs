use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use relstab_core::criteria::{
    check_h1_with, check_h2, degenerate_neighbor_check, euler_contact_range_certificate, find_weight_range,
    mhd_intersection_certificate, neighbor_rarefaction_certificate, sample_sigma_surface, Certificate, Functional,
    H1Options, H2Mode, MhdShock, NeighborOptions, SetupRecord, SurfaceOptions, Verdict, WeightRangeOptions,
    WeightedSetup, TOOL_VERSION,
};
use relstab_core::entropy::{identity_suite, FieldKind, State, SystemModel};
use relstab_core::models::ModelSpec;
use relstab_core::sim::{run_contraction_experiment, write_series_csv, Perturbation, ShiftMode, SimOptions};
use relstab_core::wave_curves::{
    diperna_check, partial_ok, speed_derivative_range, trace_hugoniot_with, trace_rarefaction, BaseSide,
    CurveKind, Direction, Discontinuity, HugoniotOptions, classify_admissibility, default_base_side,
};

use crate::config::{Coordinates, CurveKindConfig, Loaded, PerturbationKind, RunConfig, ShiftConfig, Task, Theorem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Violation,
    NotApplicable,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Violation => 2,
            Outcome::NotApplicable => 3,
        }
    }

    fn of_verdict(v: Verdict) -> Self {
        match v {
            Verdict::NoViolationFound => Outcome::Pass,
            Verdict::Violation => Outcome::Violation,
            Verdict::NotApplicable => Outcome::NotApplicable,
        }
    }

    /// Violation dominates, then not-applicable.
    fn combine(items: impl IntoIterator<Item = Outcome>) -> Self {
        let mut out = Outcome::Pass;
        for o in items {
            out = match (out, o) {
                (Outcome::Violation, _) | (_, Outcome::Violation) => Outcome::Violation,
                (Outcome::NotApplicable, _) | (_, Outcome::NotApplicable) => Outcome::NotApplicable,
                _ => Outcome::Pass,
            };
        }
        out
    }
}

/// Exit code for an error: hypotheses that do not hold map to 3.
pub fn error_exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<relstab_core::Error>() {
            return match err {
                relstab_core::Error::NotApplicable(_)
                | relstab_core::Error::Precondition(_)
                | relstab_core::Error::Admissibility(_) => 3,
                _ => 1,
            };
        }
    }
    1
}

struct Writer {
    dir: PathBuf,
    hash: String,
    files: Vec<String>,
}

impl Writer {
    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.raw(name, text.as_bytes())
    }

    fn certificate(&mut self, name: &str, mut c: Certificate) -> Result<Outcome> {
        c.set_config_hash(&self.hash);
        let out = Outcome::of_verdict(c.verdict);
        self.raw(name, (c.to_json()? + "\n").as_bytes())?;
        Ok(out)
    }

    fn raw(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("write {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// CSV preceded by a `#` comment line carrying the config hash.
    fn csv(&mut self, name: &str, body: Vec<u8>) -> Result<()> {
        let mut bytes = format!("# config_hash={}\n", self.hash).into_bytes();
        bytes.extend(body);
        self.raw(name, &bytes)
    }
}

fn weight_tag(a: f64) -> String {
    format!("a{a:e}")
}

fn weights(cfg: &RunConfig) -> Result<Vec<f64>> {
    cfg.weights.as_ref().ok_or_else(|| anyhow!("weights: section is required for this task"))?.resolve()
}

fn setup(cfg: &RunConfig, model: &Arc<dyn SystemModel>, a: f64) -> Result<WeightedSetup> {
    let (ul, ur, sigma, family) = cfg.discontinuity(model.as_ref())?;
    Ok(WeightedSetup::new(model.clone(), ul, ur, sigma, a, family)?)
}

fn surface_options(cfg: &RunConfig) -> SurfaceOptions {
    SurfaceOptions { n_rays: cfg.surface.n_rays, seed: cfg.seed, box_factor: cfg.surface.box_factor, march_steps: cfg.surface.march_steps }
}

fn neighbor_options(cfg: &RunConfig, s: &WeightedSetup) -> NeighborOptions {
    let mut o = NeighborOptions::scaled(s);
    let n = &cfg.no_contraction;
    o.span = n.span.unwrap_or(o.span);
    o.max_span = n.max_span.unwrap_or(o.max_span);
    o.step = n.step.unwrap_or(o.step);
    o.fd_step = n.fd_step.unwrap_or(o.fd_step);
    o
}

/// Runs `task` and writes every output plus `summary.json` into `out`.
pub fn run(task: Task, loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let cfg = &loaded.config;
    if let Some(t) = cfg.task {
        if t != task {
            bail!("task: config is for {} but {} was requested", t.name(), task.name());
        }
    }
    fs::create_dir_all(out).with_context(|| format!("create {}", out.display()))?;
    let mut w = Writer { dir: out.to_path_buf(), hash: loaded.hash.clone(), files: Vec::new() };
    let model = cfg.build_model()?;
    let outcome = match task {
        Task::Identities => identities(cfg, &model, &mut w)?,
        Task::Trace => trace(cfg, &model, &mut w)?,
        Task::Classify => classify(cfg, &model, &mut w)?,
        Task::CheckRes => check_res(cfg, &model, &mut w)?,
        Task::NoContraction => no_contraction(cfg, &model, &mut w)?,
        Task::WeightRange => weight_range(cfg, &model, &mut w)?,
        Task::Simulate => simulate(cfg, &model, &mut w)?,
    };
    let files = w.files.clone();
    w.json(
        "summary.json",
        &json!({
            "task": task.name(),
            "outcome": outcome,
            "exit_code": outcome.exit_code(),
            "seed": cfg.seed,
            "files": files,
            "tool_version": TOOL_VERSION,
            "config_hash": loaded.hash,
        }),
    )?;
    Ok(outcome)
}

fn identities(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let ic = &cfg.identities;
    let (lo, hi) = match (&ic.lo, &ic.hi) {
        (Some(l), Some(h)) => (l.clone(), h.clone()),
        (None, None) => {
            let (ul, ur, _, _) = cfg
                .discontinuity(model.as_ref())
                .context("identities: give lo/hi or a discontinuity to centre the sampling box")?;
            let mut lo = Vec::new();
            let mut hi = Vec::new();
            for k in 0..ul.len() {
                let c = 0.5 * (ul[k] + ur[k]);
                let half = (ul[k] - ur[k]).abs().max(0.5 * (ul[k].abs() + ur[k].abs())).max(0.1);
                lo.push(c - half);
                hi.push(c + half);
            }
            (lo, hi)
        }
        _ => bail!("identities: lo and hi must be given together"),
    };
    let r = identity_suite(model.as_ref(), &lo, &hi, ic.triples, ic.fd_states, cfg.seed)?;
    let outcome = if r.passed() { Outcome::Pass } else { Outcome::Violation };
    w.json("identities.json", &json!({ "report": r, "box": { "lo": lo, "hi": hi }, "passed": r.passed(), "tool_version": TOOL_VERSION, "config_hash": w.hash }))?;
    Ok(outcome)
}

fn trace(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let t = cfg.trace.as_ref().ok_or_else(|| anyhow!("trace: section is required for this task"))?;
    let m = model.as_ref();
    let base: State = match &t.base {
        Some(b) => {
            let coords = cfg.discontinuity.as_ref().map(|d| d.coordinates).unwrap_or(Coordinates::Conservative);
            cfg.to_state(m, coords, b, "trace.base")?
        }
        None => cfg.discontinuity(m).context("trace: give trace.base or a discontinuity")?.0,
    };
    let (curve, complete) = match t.kind {
        CurveKindConfig::Hugoniot => {
            let mut o = HugoniotOptions::new(t.span, t.step);
            o.base_side = t.side;
            if let Some(b) = t.branch {
                o.branch = b;
            }
            partial_ok(trace_hugoniot_with(m, &base, t.family, &o))?
        }
        CurveKindConfig::Rarefaction => {
            partial_ok(trace_rarefaction(m, &base, t.family, t.direction.unwrap_or(Direction::Forward), t.span, t.step))?
        }
    };
    let kind = match t.kind {
        CurveKindConfig::Hugoniot => "hugoniot",
        CurveKindConfig::Rarefaction => "rarefaction",
    };
    let stem = format!("trace_{kind}_family{}", t.family);
    let mut body = Vec::new();
    curve.write_csv(&m.component_names(), &mut body)?;
    w.csv(&format!("{stem}.csv"), body)?;
    let slope = speed_derivative_range(&curve).ok();
    let mut diperna_gap: Option<f64> = None;
    if curve.kind == CurveKind::Hugoniot && curve.samples.len() > 2 {
        let mut g: f64 = 0.0;
        for p in curve.samples.iter().skip(1) {
            let (l, r) = diperna_check(m, &curve, &curve.base, p.s)?;
            g = g.max((l - r).abs() / (1.0 + l.abs().max(r.abs())));
        }
        diperna_gap = Some(g);
    }
    w.json(
        &format!("{stem}.json"),
        &json!({
            "family": t.family,
            "kind": curve.kind,
            "base_side": curve.base_side,
            "base": curve.base.as_slice(),
            "samples": curve.samples.len(),
            "span": curve.span(),
            "complete": complete,
            "speed_slope_range": slope.map(|(a, b)| [a, b]),
            "max_diperna_gap": diperna_gap,
            "parameterization": curve.parameterization,
            "tool_version": TOOL_VERSION,
            "config_hash": w.hash,
        }),
    )?;
    Ok(Outcome::Pass)
}

fn classify(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let m = model.as_ref();
    let (ul, ur, sigma, family) = cfg.discontinuity(m)?;
    let mut d = Discontinuity::new(m, ul.clone(), ur.clone(), sigma, family);
    if let Some(f) = family {
        // trace the family's locus from its base end to test the Liu condition
        let side = if (1..=m.dim()).contains(&f) { default_base_side(m, f) } else { BaseSide::Left };
        let base = if side == BaseSide::Left { &ul } else { &ur };
        let span = 1.25 * (&ul - &ur).norm();
        if span > 0.0 {
            let o = HugoniotOptions::new(span, span / 100.0).side(side);
            if let Ok((curve, _)) = partial_ok(trace_hugoniot_with(m, base, f, &o)) {
                d.admissibility = classify_admissibility(m, &d, Some(&curve));
            }
        }
    }
    let f = d.admissibility;
    let admissible = f.rankine_hugoniot && f.entropy_inequality && (f.lax || f.lax_extended) && f.liu != Some(false);
    w.json(
        "classify.json",
        &json!({
            "u_l": ul.as_slice(),
            "u_r": ur.as_slice(),
            "sigma": sigma,
            "family": family,
            "admissibility": f,
            "admissible": admissible,
            "tool_version": TOOL_VERSION,
            "config_hash": w.hash,
        }),
    )?;
    Ok(if admissible { Outcome::Pass } else { Outcome::Violation })
}

fn check_res(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let base = setup(cfg, model, 1.0)?;
    let h1o = H1Options { top_q: cfg.h1.top_q, max_iter: cfg.h1.max_iter, extra: Vec::new() };
    let h2o = cfg.h2.options(H2Mode::Res);
    let so = surface_options(cfg);
    let results: Vec<Result<(f64, Certificate, Certificate)>> = weights(cfg)?
        .par_iter()
        .map(|&a| {
            let s = base.with_weight(a)?;
            let surf = sample_sigma_surface(&s, &so, None)?;
            Ok((a, check_h1_with(&s, &surf, &h1o)?, check_h2(&s, &surf, &h2o)?))
        })
        .collect();
    let mut outs = Vec::new();
    for r in results {
        let (a, h1, h2) = r?;
        outs.push(w.certificate(&format!("check-res_{}_h1.json", weight_tag(a)), h1)?);
        outs.push(w.certificate(&format!("check-res_{}_h2.json", weight_tag(a)), h2)?);
    }
    Ok(Outcome::combine(outs))
}

/// Theorem picked by `auto` from the model and the shock family.
fn resolve_theorem(cfg: &RunConfig, s: &WeightedSetup) -> Result<Theorem> {
    if cfg.no_contraction.theorem != Theorem::Auto {
        return Ok(cfg.no_contraction.theorem);
    }
    let family = s.family.ok_or_else(|| anyhow!("discontinuity.family: required to select a theorem"))?;
    Ok(match (&cfg.model, family) {
        (ModelSpec::Euler { .. }, 2) => Theorem::EulerContact,
        (ModelSpec::Mhd { .. }, 2 | 3) => Theorem::MhdIntermediate,
        _ if family >= 1 && family <= s.model.dim() && s.model.field_kind(family) == FieldKind::LinearlyDegenerate => {
            Theorem::DegenerateNeighbor
        }
        _ => Theorem::NeighborRarefaction,
    })
}

fn no_contraction_certificate(cfg: &RunConfig, s: &WeightedSetup) -> Result<Certificate> {
    let o = neighbor_options(cfg, s);
    let family = || s.family.ok_or_else(|| anyhow!("discontinuity.family: required by this theorem"));
    Ok(match resolve_theorem(cfg, s)? {
        Theorem::EulerContact => euler_contact_range_certificate(s, &o, cfg.seed)?,
        Theorem::MhdIntermediate => {
            let shock = match (cfg.no_contraction.shock, s.family) {
                (Some(k), _) => k,
                (None, Some(2)) => MhdShock::Two,
                (None, Some(3)) => MhdShock::Three,
                _ => return Err(relstab_core::Error::NotApplicable("MHD theorem needs a 2- or 3-shock".into()).into()),
            };
            mhd_intersection_certificate(s, shock, &o)?
        }
        Theorem::NeighborRarefaction => neighbor_rarefaction_certificate(s, family()?, &o)?,
        Theorem::DegenerateNeighbor => degenerate_neighbor_check(s, family()?, &o)?,
        Theorem::Auto => unreachable!("resolved above"),
    })
}

fn no_contraction(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let base = setup(cfg, model, 1.0)?;
    let results: Vec<Result<(f64, Certificate)>> = weights(cfg)?
        .par_iter()
        .map(|&a| {
            let s = base.with_weight(a)?;
            Ok((a, no_contraction_certificate(cfg, &s)?))
        })
        .collect();
    let mut outs = Vec::new();
    for r in results {
        let (a, c) = r?;
        outs.push(w.certificate(&format!("no-contraction_{}.json", weight_tag(a)), c)?);
    }
    Ok(Outcome::combine(outs))
}

fn weight_range(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let r = cfg.weight_range.as_ref().ok_or_else(|| anyhow!("weight_range: section is required for this task"))?;
    let s = setup(cfg, model, r.bracket[0])?;
    let opts = WeightRangeOptions { surface: surface_options(cfg), h2: cfg.h2.options(H2Mode::Strong), rel_tol: r.rel_tol, budget: r.budget };
    let c = find_weight_range(&s, r.side, (r.bracket[0], r.bracket[1]), &opts)?;
    w.certificate("weight-range.json", c)
}

fn perturbation(cfg: &RunConfig, s: &WeightedSetup) -> Result<Perturbation> {
    let p = &cfg.simulate.perturbation;
    let half_width = || p.half_width.ok_or_else(|| anyhow!("simulate.perturbation.half_width: required for this kind"));
    Ok(match p.kind {
        PerturbationKind::None => Perturbation::None,
        PerturbationKind::Bump => Perturbation::Bump {
            center: p.center,
            half_width: half_width()?,
            amplitude: p.amplitude.clone().ok_or_else(|| anyhow!("simulate.perturbation.amplitude: required for a bump"))?,
        },
        PerturbationKind::Patch => {
            let coords = cfg.discontinuity.as_ref().map(|d| d.coordinates).unwrap_or_default();
            let xs = p.state.as_ref().ok_or_else(|| anyhow!("simulate.perturbation.state: required for a patch"))?;
            let u = cfg.to_state(s.model(), coords, xs, "simulate.perturbation.state")?;
            Perturbation::Patch { center: p.center, half_width: half_width()?, state: u.as_slice().to_vec() }
        }
        PerturbationKind::Witness => {
            let c = no_contraction_certificate(cfg, s)?;
            let wit = c
                .witness
                .filter(|x| x.functional == Functional::DSm)
                .ok_or_else(|| relstab_core::Error::NotApplicable(format!("no state witness at a = {}", s.a)))?;
            Perturbation::Patch { center: p.center, half_width: half_width()?, state: wit.states[0].clone() }
        }
    })
}

fn simulate(cfg: &RunConfig, model: &Arc<dyn SystemModel>, w: &mut Writer) -> Result<Outcome> {
    let base = setup(cfg, model, 1.0)?;
    let sc = &cfg.simulate;
    let weights = weights(cfg)?;
    let results: Vec<Result<_>> = weights
        .par_iter()
        .map(|&a| {
            let s = base.with_weight(a)?;
            let opts = SimOptions {
                x_min: sc.x_min,
                x_max: sc.x_max,
                n_cells: sc.n_cells,
                t_final: sc.t_final,
                cfl: sc.cfl,
                epsilon: sc.epsilon,
                shift: match sc.shift {
                    ShiftConfig::VEpsilon => ShiftMode::VEpsilon,
                    ShiftConfig::Fixed => ShiftMode::Fixed { speed: sc.shift_speed.unwrap_or(s.sigma) },
                },
                perturbation: perturbation(cfg, &s)?,
                scheme_constant: sc.scheme_constant,
                boundary_cells: sc.boundary_cells,
                record_every: sc.record_every,
            };
            let report = run_contraction_experiment(&s, &opts)?;
            Ok((a, SetupRecord::of(&s)?, opts, report))
        })
        .collect();
    for r in results {
        let (a, record, opts, report) = r?;
        let tag = weight_tag(a);
        let mut body = Vec::new();
        write_series_csv(&report.shift.history, &mut body)?;
        w.csv(&format!("simulate_{tag}.csv"), body)?;
        let mut summary = serde_json::to_value(&report)?;
        if let Some(obj) = summary.get_mut("shift").and_then(|x| x.as_object_mut()) {
            obj.remove("history");
        }
        w.json(
            &format!("simulate_{tag}.json"),
            &json!({
                "setup": record,
                "options": opts,
                "report": summary,
                "nonincreasing_within_tolerance": report.nonincreasing_within_tolerance(),
                "series": format!("simulate_{tag}.csv"),
                "tool_version": TOOL_VERSION,
                "config_hash": w.hash,
            }),
        )?;
    }
    Ok(Outcome::Pass)
}
