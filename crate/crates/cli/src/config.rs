//! TOML run configuration. Unknown keys are rejected everywhere.

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use relstab_core::criteria::{H1Options, H2Mode, H2Options, MhdShock, RangeSide, SurfaceOptions};
use relstab_core::entropy::{state, State, SystemModel};
use relstab_core::models::{Euler, Mhd, ModelSpec};
use relstab_core::wave_curves::{hugoniot_point, BaseSide, Branch, Direction, Discontinuity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Identities,
    Trace,
    Classify,
    CheckRes,
    NoContraction,
    WeightRange,
    Simulate,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Identities => "identities",
            Task::Trace => "trace",
            Task::Classify => "classify",
            Task::CheckRes => "check-res",
            Task::NoContraction => "no-contraction",
            Task::WeightRange => "weight-range",
            Task::Simulate => "simulate",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Must match the subcommand when given.
    pub task: Option<Task>,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<String>,
    pub model: ModelSpec,
    pub discontinuity: Option<DiscontinuityConfig>,
    pub weights: Option<WeightsConfig>,
    #[serde(default)]
    pub surface: SurfaceConfig,
    #[serde(default)]
    pub h1: H1Config,
    #[serde(default)]
    pub h2: H2Config,
    #[serde(default)]
    pub identities: IdentitiesConfig,
    pub trace: Option<TraceConfig>,
    #[serde(default)]
    pub no_contraction: NoContractionConfig,
    pub weight_range: Option<WeightRangeConfig>,
    #[serde(default)]
    pub simulate: SimulateConfig,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coordinates {
    #[default]
    Conservative,
    /// `u` for Burgers, `(ρ, v)` isentropic, `(ρ, v, p)` Euler, `(v, B, u, w)` MHD.
    Primitive,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscontinuityConfig {
    #[serde(default)]
    pub coordinates: Coordinates,
    pub u_l: Option<Vec<f64>>,
    pub u_r: Option<Vec<f64>>,
    /// Defaults to the least-squares Rankine-Hugoniot speed.
    pub sigma: Option<f64>,
    pub family: Option<usize>,
    /// Generated form: `base` joined to `S(s0)` on the family's Hugoniot branch.
    pub base: Option<Vec<f64>>,
    pub s0: Option<f64>,
    pub side: Option<BaseSide>,
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsConfig {
    pub a: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub log_grid: Option<LogGrid>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceConfig {
    pub n_rays: usize,
    pub box_factor: f64,
    pub march_steps: usize,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        let d = SurfaceOptions::default();
        Self { n_rays: d.n_rays, box_factor: d.box_factor, march_steps: d.march_steps }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct H1Config {
    pub top_q: usize,
    pub max_iter: usize,
}

impl Default for H1Config {
    fn default() -> Self {
        let d = H1Options::default();
        Self { top_q: d.top_q, max_iter: d.max_iter }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct H2Config {
    /// Defaults to `res` for check-res and `strong` for weight-range.
    pub mode: Option<H2Mode>,
    /// Empty selects every family.
    pub families: Vec<usize>,
    pub tube_radius: f64,
    pub span_factor: f64,
    pub steps: usize,
    pub max_surface_points: usize,
}

impl Default for H2Config {
    fn default() -> Self {
        let d = H2Options::default();
        Self {
            mode: None,
            families: d.families,
            tube_radius: d.tube_radius,
            span_factor: d.span_factor,
            steps: d.steps,
            max_surface_points: d.max_surface_points,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IdentitiesConfig {
    pub triples: usize,
    pub fd_states: usize,
    /// Sampling box; defaults to a box around the discontinuity states.
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
}

impl Default for IdentitiesConfig {
    fn default() -> Self {
        Self { triples: 1000, fd_states: 100, lo: None, hi: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKindConfig {
    #[default]
    Hugoniot,
    Rarefaction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    #[serde(default)]
    pub kind: CurveKindConfig,
    pub family: usize,
    /// Defaults to `u_l` of the discontinuity.
    pub base: Option<Vec<f64>>,
    pub span: f64,
    pub step: f64,
    pub side: Option<BaseSide>,
    pub branch: Option<Branch>,
    pub direction: Option<Direction>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    #[default]
    Auto,
    EulerContact,
    MhdIntermediate,
    NeighborRarefaction,
    DegenerateNeighbor,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoContractionConfig {
    #[serde(default)]
    pub theorem: Theorem,
    /// Defaults from the shock family (2 or 3).
    pub shock: Option<MhdShock>,
    /// Curve knobs in absolute units; unset ones scale with `|u_l − u_r|`.
    pub span: Option<f64>,
    pub max_span: Option<f64>,
    pub step: Option<f64>,
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightRangeConfig {
    pub side: RangeSide,
    pub bracket: [f64; 2],
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_budget")]
    pub budget: usize,
}

fn default_rel_tol() -> f64 {
    1e-3
}
fn default_budget() -> usize {
    40
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShiftConfig {
    #[default]
    VEpsilon,
    Fixed,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationKind {
    #[default]
    None,
    Bump,
    Patch,
    /// Constant patch at the witness state of the no-contraction task.
    Witness,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default)]
    pub kind: PerturbationKind,
    #[serde(default)]
    pub center: f64,
    pub half_width: Option<f64>,
    /// Bump amplitude per conservative component.
    pub amplitude: Option<Vec<f64>>,
    /// Patch state in the discontinuity's coordinates.
    pub state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub t_final: f64,
    pub cfl: f64,
    pub epsilon: Option<f64>,
    pub shift: ShiftConfig,
    /// Speed of the fixed shift; defaults to σ.
    pub shift_speed: Option<f64>,
    pub scheme_constant: f64,
    pub boundary_cells: usize,
    pub record_every: usize,
    pub perturbation: PerturbationConfig,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        let d = relstab_core::sim::SimOptions::default();
        Self {
            x_min: d.x_min,
            x_max: d.x_max,
            n_cells: d.n_cells,
            t_final: d.t_final,
            cfl: d.cfl,
            epsilon: None,
            shift: ShiftConfig::VEpsilon,
            shift_speed: None,
            scheme_constant: d.scheme_constant,
            boundary_cells: d.boundary_cells,
            record_every: d.record_every,
            perturbation: PerturbationConfig::default(),
        }
    }
}

/// Parsed configuration together with the hash of what produced it.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub hash: String,
}

/// Parses and validates `text`; `seed` overrides the file's seed and is
/// folded into the hash.
pub fn load(text: &str, seed: Option<u64>) -> Result<Loaded> {
    let mut config: RunConfig = toml::from_str(text).context("config")?;
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    if let Some(s) = seed {
        config.seed = s;
        hasher.update(format!("\n#seed-override={s}").as_bytes());
    }
    config.validate()?;
    Ok(Loaded { config, hash: hex::encode(hasher.finalize()) })
}

fn positive(field: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        bail!("{field}: must be positive and finite, got {x}");
    }
    Ok(())
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(w) = &self.weights {
            w.resolve()?;
        }
        if let Some(d) = &self.discontinuity {
            let explicit = d.u_l.is_some() || d.u_r.is_some();
            let generated = d.base.is_some() || d.s0.is_some();
            match (explicit, generated) {
                (true, true) => bail!("discontinuity: give either u_l/u_r or base/s0, not both"),
                (false, false) => bail!("discontinuity: needs u_l and u_r, or base, family and s0"),
                (true, false) if d.u_l.is_none() || d.u_r.is_none() => bail!("discontinuity: u_l and u_r must both be given"),
                (false, true) if d.base.is_none() || d.s0.is_none() || d.family.is_none() => {
                    bail!("discontinuity: generated form needs base, family and s0")
                }
                _ => {}
            }
            if let Some(s0) = d.s0 {
                positive("discontinuity.s0", s0)?;
            }
            if let Some(st) = d.step {
                positive("discontinuity.step", st)?;
            }
        }
        positive("surface.box_factor", self.surface.box_factor)?;
        if self.surface.n_rays == 0 {
            bail!("surface.n_rays: must be at least 1");
        }
        positive("h2.tube_radius", self.h2.tube_radius)?;
        positive("h2.span_factor", self.h2.span_factor)?;
        if let Some(r) = &self.weight_range {
            positive("weight_range.bracket[0]", r.bracket[0])?;
            positive("weight_range.bracket[1]", r.bracket[1])?;
            if r.bracket[1] <= r.bracket[0] {
                bail!("weight_range.bracket: lower end must be below the upper end");
            }
            positive("weight_range.rel_tol", r.rel_tol)?;
        }
        if let Some(t) = &self.trace {
            positive("trace.span", t.span)?;
            positive("trace.step", t.step)?;
        }
        for (name, v) in [
            ("no_contraction.span", self.no_contraction.span),
            ("no_contraction.max_span", self.no_contraction.max_span),
            ("no_contraction.step", self.no_contraction.step),
            ("no_contraction.fd_step", self.no_contraction.fd_step),
            ("simulate.epsilon", self.simulate.epsilon),
            ("simulate.perturbation.half_width", self.simulate.perturbation.half_width),
        ] {
            if let Some(x) = v {
                positive(name, x)?;
            }
        }
        let s = &self.simulate;
        positive("simulate.t_final", s.t_final)?;
        positive("simulate.cfl", s.cfl)?;
        if s.cfl > relstab_core::sim::CFL_MAX {
            bail!("simulate.cfl: must not exceed {}, got {}", relstab_core::sim::CFL_MAX, s.cfl);
        }
        if !(s.x_max > s.x_min) {
            bail!("simulate.x_max: must exceed x_min");
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<std::sync::Arc<dyn SystemModel>> {
        self.model.build().map_err(|e| anyhow!("model: {e}"))
    }

    /// Conservative state from a vector given in `coords`.
    pub fn to_state(&self, model: &dyn SystemModel, coords: Coordinates, xs: &[f64], field: &str) -> Result<State> {
        if xs.len() != model.dim() {
            bail!("{field}: expected {} components for {}, got {}", model.dim(), model.name(), xs.len());
        }
        Ok(match coords {
            Coordinates::Conservative => state(xs),
            Coordinates::Primitive => match &self.model {
                ModelSpec::Burgers {} => state(xs),
                ModelSpec::IsentropicEuler { .. } => state(&[xs[0], xs[0] * xs[1]]),
                ModelSpec::Euler { gamma, .. } => {
                    Euler::new(*gamma)?.from_rho_v_p(xs[0], xs[1], xs[2]).with_context(|| field.to_string())?
                }
                ModelSpec::Mhd { gamma, beta, .. } => Mhd::new(*gamma, *beta)?.from_w(&[xs[0], xs[1], xs[2], xs[3]]),
            },
        })
    }

    /// `(u_l, u_r, σ, family)` of the configured discontinuity.
    pub fn discontinuity(&self, model: &dyn SystemModel) -> Result<(State, State, f64, Option<usize>)> {
        let d = self.discontinuity.as_ref().ok_or_else(|| anyhow!("discontinuity: section is required for this task"))?;
        if let (Some(l), Some(r)) = (&d.u_l, &d.u_r) {
            let ul = self.to_state(model, d.coordinates, l, "discontinuity.u_l")?;
            let ur = self.to_state(model, d.coordinates, r, "discontinuity.u_r")?;
            let sigma = d.sigma.unwrap_or_else(|| Discontinuity::speed_of(model, &ul, &ur));
            return Ok((ul, ur, sigma, d.family));
        }
        let base = self.to_state(model, d.coordinates, d.base.as_deref().unwrap_or_default(), "discontinuity.base")?;
        let family = d.family.expect("validated");
        let s0 = d.s0.expect("validated");
        let step = d.step.unwrap_or(s0 / 30.0);
        let (other, sigma, curve) = hugoniot_point(model, &base, family, s0, step, d.side)?;
        if curve.base_side == BaseSide::Left {
            Ok((base, other, sigma, Some(family)))
        } else {
            Ok((other, base, sigma, Some(family)))
        }
    }
}

impl H2Config {
    pub fn options(&self, default_mode: H2Mode) -> H2Options {
        H2Options {
            mode: self.mode.unwrap_or(default_mode),
            families: self.families.clone(),
            tube_radius: self.tube_radius,
            span_factor: self.span_factor,
            steps: self.steps,
            max_surface_points: self.max_surface_points,
            ..H2Options::default()
        }
    }
}

impl WeightsConfig {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        let given = [self.a.is_some(), self.values.is_some(), self.log_grid.is_some()].iter().filter(|x| **x).count();
        if given != 1 {
            bail!("weights: give exactly one of a, values, log_grid");
        }
        if let Some(a) = self.a {
            positive("weights.a", a)?;
            return Ok(vec![a]);
        }
        if let Some(v) = &self.values {
            if v.is_empty() {
                bail!("weights.values: must not be empty");
            }
            for (i, a) in v.iter().enumerate() {
                positive(&format!("weights.values[{i}]"), *a)?;
            }
            return Ok(v.clone());
        }
        let g = self.log_grid.as_ref().expect("counted");
        positive("weights.log_grid.min", g.min)?;
        positive("weights.log_grid.max", g.max)?;
        if g.points < 2 || g.max <= g.min {
            bail!("weights.log_grid: needs points >= 2 and min < max");
        }
        let (l0, l1) = (g.min.log10(), g.max.log10());
        Ok((0..g.points).map(|k| 10f64.powf(l0 + (l1 - l0) * k as f64 / (g.points - 1) as f64)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BURGERS: &str = r#"
[model]
name = "burgers"

[discontinuity]
u_l = [1.0]
u_r = [0.0]

[weights]
a = 1.0
"#;

    #[test]
    fn parses_minimal_config() {
        let l = load(BURGERS, None).unwrap();
        let m = l.config.build_model().unwrap();
        let (ul, ur, sigma, fam) = l.config.discontinuity(&*m).unwrap();
        assert_eq!((ul[0], ur[0], sigma, fam), (1.0, 0.0, 0.5, None));
        assert_eq!(l.hash.len(), 64);
        assert_ne!(l.hash, load(BURGERS, Some(3)).unwrap().hash);
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = BURGERS.replace("a = 1.0", "a = 1.0\nb = 2.0");
        let e = format!("{:#}", load(&text, None).unwrap_err());
        assert!(e.contains("unknown field"), "{e}");
        let text = BURGERS.replace("name = \"burgers\"", "name = \"burgers\"\ngamma = 1.4");
        assert!(load(&text, None).is_err());
    }

    #[test]
    fn negative_weight_names_the_field() {
        let e = load(&BURGERS.replace("a = 1.0", "a = -0.5"), None).unwrap_err().to_string();
        assert!(e.contains("weights.a"), "{e}");
    }

    #[test]
    fn log_grid_endpoints() {
        let w = WeightsConfig { log_grid: Some(LogGrid { min: 1e-3, max: 1e3, points: 13 }), ..Default::default() };
        let v = w.resolve().unwrap();
        assert_eq!(v.len(), 13);
        assert!((v[0] - 1e-3).abs() < 1e-15 && (v[12] - 1e3).abs() < 1e-9 && (v[6] - 1.0).abs() < 1e-12);
    }
}
