//! Finite-volume evolution of a perturbed discontinuity with a coupled
//! shift, recording the weighted pseudo-distance over time.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::criteria::WeightedSetup;
use crate::entropy::{pseudo_distance, rel_eta, rel_q, state, CellProfile, State, SystemModel};
use crate::error::{Error, Result};

pub const CFL_MAX: f64 = 0.45;

/// Uniform cells with Dirichlet far-field states.
#[derive(Debug, Clone)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub dx: f64,
    pub cells: Vec<State>,
    pub left: State,
    pub right: State,
}

// 3-point Gauss-Legendre on [-1, 1]
const GAUSS: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

impl Grid1D {
    /// Cell averages of `profile`, integrated piecewise between `breaks`
    /// (points where the profile may jump).
    pub fn from_profile(
        x_min: f64,
        x_max: f64,
        n_cells: usize,
        breaks: &[f64],
        left: State,
        right: State,
        profile: impl Fn(f64) -> State,
    ) -> Result<Self> {
        if !(x_max > x_min) || n_cells < 4 {
            return Err(Error::Invalid(format!("grid [{x_min}, {x_max}] with {n_cells} cells")));
        }
        let dx = (x_max - x_min) / n_cells as f64;
        let n = left.len();
        let mut cells = Vec::with_capacity(n_cells);
        for i in 0..n_cells {
            let (x0, x1) = (x_min + i as f64 * dx, x_min + (i + 1) as f64 * dx);
            let mut nodes = vec![x0];
            nodes.extend(breaks.iter().copied().filter(|b| *b > x0 && *b < x1));
            nodes.push(x1);
            nodes.sort_by(f64::total_cmp);
            let mut pts = Vec::new();
            for w in nodes.windows(2) {
                let (m, r) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                for (xi, wi) in GAUSS {
                    pts.push((profile(m + r * xi), wi * r));
                }
            }
            // keep constant cells bitwise equal to their state
            if pts.iter().all(|(u, _)| *u == pts[0].0) {
                cells.push(pts[0].0.clone());
            } else {
                let avg = pts.iter().fold(DVector::zeros(n), |acc, (u, w)| acc + u * *w);
                cells.push(avg / dx);
            }
        }
        Ok(Self { x_min, x_max, n_cells, dx, cells, left, right })
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..=self.n_cells).map(|i| self.x_min + i as f64 * self.dx).collect()
    }

    /// Linear interpolation of cell averages between cell centres.
    pub fn sample(&self, x: f64) -> State {
        let t = (x - self.x_min) / self.dx - 0.5;
        if t <= 0.0 {
            return self.cells[0].clone();
        }
        let i = t.floor() as usize;
        if i + 1 >= self.n_cells {
            return self.cells[self.n_cells - 1].clone();
        }
        let w = t - i as f64;
        &self.cells[i] * (1.0 - w) + &self.cells[i + 1] * w
    }

    /// `Σ u_i Δx` per component.
    pub fn totals(&self) -> DVector<f64> {
        self.cells.iter().fold(DVector::zeros(self.left.len()), |acc, u| acc + u) * self.dx
    }

    pub fn max_wave_speed(&self, model: &dyn SystemModel) -> Result<f64> {
        let mut m: f64 = 0.0;
        for u in self.cells.iter().chain([&self.left, &self.right]) {
            m = m.max(wave_speed_bound(model, u)?);
        }
        Ok(m)
    }
}

/// Largest `|λ|` at `u`; falls back to the flux Jacobian spectrum where the
/// model's eigen-decomposition is degenerate.
pub fn wave_speed_bound(model: &dyn SystemModel, u: &State) -> Result<f64> {
    match model.eigen(u) {
        Ok(e) => Ok(e.values.iter().fold(0.0, |m: f64, l| m.max(l.abs()))),
        Err(Error::Degenerate(_)) => {
            let ev = model.flux_jacobian(u).complex_eigenvalues();
            Ok(ev.iter().fold(0.0, |m: f64, z| m.max(z.norm())))
        }
        Err(e) => Err(e),
    }
}

fn rusanov(model: &dyn SystemModel, ul: &State, ur: &State, al: f64, ar: f64) -> DVector<f64> {
    (model.flux(ul) + model.flux(ur)) * 0.5 - (ur - ul) * (0.5 * al.max(ar))
}

/// One conservative local Lax-Friedrichs update. Returns the new grid and
/// the total flux through the left and right boundary faces.
pub fn step_with_fluxes(grid: &Grid1D, model: &dyn SystemModel, dt: f64) -> Result<(Grid1D, DVector<f64>, DVector<f64>)> {
    let n = grid.n_cells;
    let mut speeds = Vec::with_capacity(n + 2);
    speeds.push(wave_speed_bound(model, &grid.left)?);
    for u in &grid.cells {
        speeds.push(wave_speed_bound(model, u)?);
    }
    speeds.push(wave_speed_bound(model, &grid.right)?);
    let smax = speeds.iter().cloned().fold(0.0, f64::max);
    let cfl = dt * smax / grid.dx;
    if !(dt > 0.0) || cfl > CFL_MAX * (1.0 + 1e-12) {
        return Err(Error::Cfl(format!("dt={dt:e} gives CFL number {cfl:.4} > {CFL_MAX}")));
    }
    let at = |k: usize| -> &State {
        if k == 0 {
            &grid.left
        } else if k == n + 1 {
            &grid.right
        } else {
            &grid.cells[k - 1]
        }
    };
    let fluxes: Vec<DVector<f64>> = (0..=n).map(|k| rusanov(model, at(k), at(k + 1), speeds[k], speeds[k + 1])).collect();
    let r = dt / grid.dx;
    let mut cells = Vec::with_capacity(n);
    for i in 0..n {
        let u = &grid.cells[i] - (&fluxes[i + 1] - &fluxes[i]) * r;
        if !u.iter().all(|x| x.is_finite()) || !model.in_extended_domain(&u) {
            return Err(Error::Domain(format!("cell {i} left the domain: {:?}", u.as_slice())));
        }
        cells.push(u);
    }
    let out = Grid1D { cells, ..grid.clone() };
    Ok((out, fluxes[0].clone(), fluxes[n].clone()))
}

pub fn step(grid: &Grid1D, model: &dyn SystemModel, dt: f64) -> Result<Grid1D> {
    step_with_fluxes(grid, model, dt).map(|(g, _, _)| g)
}

/// `[a q(u;u_r) − q(u;u_l) − ε]_+ / (a η(u|u_r) − η(u|u_l))`, zero on `Σ_a`.
pub fn v_epsilon(setup: &WeightedSetup, u: &State, epsilon: f64) -> f64 {
    let m = setup.model();
    let num = setup.a * rel_q(m, u, &setup.u_r) - rel_q(m, u, &setup.u_l) - epsilon;
    if !(num > 0.0) {
        return 0.0;
    }
    let den = setup.a * rel_eta(m, u, &setup.u_r) - rel_eta(m, u, &setup.u_l);
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn default_epsilon(setup: &WeightedSetup) -> f64 {
    let m = setup.model();
    1e-6 * (1.0 + m.entropy_flux(&setup.u_l).abs() + m.entropy_flux(&setup.u_r).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ShiftMode {
    /// `ḣ = V_ε(u(t, h))`.
    VEpsilon,
    /// `ḣ = speed`.
    Fixed { speed: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Perturbation {
    None,
    /// Adds `amplitude · cos²(π(x−center)/(2·half_width))` on the support.
    Bump { center: f64, half_width: f64, amplitude: Vec<f64> },
    /// Replaces the profile by a constant state on `[center − half_width, center + half_width]`.
    Patch { center: f64, half_width: f64, state: Vec<f64> },
}

impl Perturbation {
    fn support(&self) -> Option<(f64, f64)> {
        match self {
            Self::None => None,
            Self::Bump { center, half_width, .. } | Self::Patch { center, half_width, .. } => {
                Some((center - half_width, center + half_width))
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let (w, len) = match self {
            Self::None => return Ok(()),
            Self::Bump { half_width, amplitude, .. } => (*half_width, amplitude.len()),
            Self::Patch { half_width, state, .. } => (*half_width, state.len()),
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Invalid(format!("perturbation half_width must be positive, got {w}")));
        }
        if len != n {
            return Err(Error::Invalid(format!("perturbation state has {len} components, model has {n}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub t_final: f64,
    pub cfl: f64,
    /// `None` selects the default `1e-6(1 + |q(u_l)| + |q(u_r)|)`.
    pub epsilon: Option<f64>,
    pub shift: ShiftMode,
    pub perturbation: Perturbation,
    /// Constant `K` in the `O(Δx)` scheme tolerance.
    pub scheme_constant: f64,
    /// Cells at each end that must stay at the far-field state.
    pub boundary_cells: usize,
    /// Record every k-th step (the last step is always recorded).
    pub record_every: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            x_min: -2.0,
            x_max: 2.0,
            n_cells: 400,
            t_final: 0.5,
            cfl: 0.4,
            epsilon: None,
            shift: ShiftMode::VEpsilon,
            perturbation: Perturbation::None,
            scheme_constant: 1.0,
            boundary_cells: 3,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub h: f64,
    pub e_a: f64,
    pub de_dt: f64,
    pub max_wave_speed: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftState {
    pub h: f64,
    pub epsilon: f64,
    pub history: Vec<Sample>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimReport {
    pub shift: ShiftState,
    pub steps: usize,
    pub dx: f64,
    /// `max_{s<t} (E_a(t) − E_a(s))_+` over all steps.
    pub max_increase: f64,
    /// Largest single-step increase of `E_a`.
    pub max_step_increase: f64,
    pub tol_scheme: f64,
    /// Largest `|Δh/Δt|` over the run.
    pub max_shift_speed: f64,
    /// Largest `|V_ε|` at the interpolated states (zero for a fixed shift).
    pub max_v: f64,
    /// Relative defect of `Σ u Δx` against the boundary fluxes.
    pub conservation_defect: f64,
    pub e_initial: f64,
    pub e_final: f64,
}

impl SimReport {
    pub fn nonincreasing_within_tolerance(&self) -> bool {
        self.max_increase <= self.tol_scheme
    }
}

fn initial_grid(setup: &WeightedSetup, opts: &SimOptions) -> Result<Grid1D> {
    let n = setup.model.dim();
    opts.perturbation.validate(n)?;
    let (ul, ur) = (setup.u_l.clone(), setup.u_r.clone());
    let mut breaks = vec![0.0];
    if let Some((a, b)) = opts.perturbation.support() {
        if a <= opts.x_min || b >= opts.x_max {
            return Err(Error::Invalid(format!("perturbation support [{a}, {b}] exceeds the grid")));
        }
        breaks.extend([a, b]);
    }
    let pert = opts.perturbation.clone();
    let profile = move |x: f64| -> State {
        let base = if x < 0.0 { ul.clone() } else { ur.clone() };
        match &pert {
            Perturbation::None => base,
            Perturbation::Bump { center, half_width, amplitude } => {
                let z = (x - center) / half_width;
                if z.abs() >= 1.0 {
                    base
                } else {
                    let c = (0.5 * std::f64::consts::PI * z).cos();
                    base + state(amplitude) * (c * c)
                }
            }
            Perturbation::Patch { center, half_width, state: s } => {
                if (x - center).abs() < *half_width {
                    state(s)
                } else {
                    base
                }
            }
        }
    };
    let g = Grid1D::from_profile(opts.x_min, opts.x_max, opts.n_cells, &breaks, setup.u_l.clone(), setup.u_r.clone(), profile)?;
    let model = setup.model();
    for (i, u) in g.cells.iter().enumerate() {
        if !model.in_domain(u) {
            return Err(Error::Domain(format!("initial cell {i} at x={} is outside the domain", g.center(i))));
        }
    }
    Ok(g)
}

fn e_a(setup: &WeightedSetup, g: &Grid1D, faces: &[f64], h: f64) -> Result<f64> {
    let p = CellProfile { x_min: g.x_min, dx: g.dx, cells: &g.cells };
    pseudo_distance(setup.model(), setup.a, &setup.u_l, &setup.u_r, &p, faces, h)
}

fn boundary_reached(g: &Grid1D, k: usize) -> bool {
    let near = |u: &State, v: &State| (u - v).amax() > 1e-9 * (1.0 + v.amax());
    let k = k.min(g.n_cells / 2);
    g.cells[..k].iter().any(|u| near(u, &g.left)) || g.cells[g.n_cells - k..].iter().any(|u| near(u, &g.right))
}

/// Co-evolves the grid and the shift up to `t_final`.
pub fn run_contraction_experiment(setup: &WeightedSetup, opts: &SimOptions) -> Result<SimReport> {
    if !(opts.cfl > 0.0 && opts.cfl <= CFL_MAX) {
        return Err(Error::Cfl(format!("requested CFL number {} must lie in (0, {CFL_MAX}]", opts.cfl)));
    }
    if !(opts.t_final > 0.0 && opts.t_final.is_finite()) {
        return Err(Error::Invalid(format!("t_final must be positive, got {}", opts.t_final)));
    }
    let epsilon = opts.epsilon.unwrap_or_else(|| default_epsilon(setup));
    if !(epsilon > 0.0) {
        return Err(Error::Invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    let model = setup.model();
    let mut g = initial_grid(setup, opts)?;
    let faces = g.faces();
    let mut h = 0.0;
    let mut t = 0.0;
    let e0 = e_a(setup, &g, &faces, h)?;
    let s0 = g.max_wave_speed(model)?;
    let mut history = vec![Sample { t, h, e_a: e0, de_dt: 0.0, max_wave_speed: s0 }];
    let (mut running_min, mut max_increase, mut max_step_increase) = (e0, 0.0f64, 0.0f64);
    let (mut max_shift_speed, mut max_v, mut defect) = (0.0f64, 0.0f64, 0.0f64);
    let mut e_prev = e0;
    let mut steps = 0;
    while t < opts.t_final * (1.0 - 1e-14) {
        let smax = g.max_wave_speed(model)?.max(1e-12);
        let dt = (opts.cfl * g.dx / smax).min(opts.t_final - t);
        let hdot = match &opts.shift {
            ShiftMode::VEpsilon => {
                let v = v_epsilon(setup, &g.sample(h), epsilon);
                max_v = max_v.max(v.abs());
                v
            }
            ShiftMode::Fixed { speed } => *speed,
        };
        let before = g.totals();
        let (next, f_in, f_out) = step_with_fluxes(&g, model, dt)?;
        let after = next.totals();
        let expect = &before + (f_in - f_out) * dt;
        let scale = before.amax().max(1e-300);
        defect = defect.max((after - expect).amax() / scale);
        g = next;
        h += dt * hdot;
        t += dt;
        steps += 1;
        max_shift_speed = max_shift_speed.max(hdot.abs());
        if boundary_reached(&g, opts.boundary_cells) {
            return Err(Error::BoundaryReached(t));
        }
        if h <= g.x_min + g.dx || h >= g.x_max - g.dx {
            return Err(Error::BoundaryReached(t));
        }
        let e = e_a(setup, &g, &faces, h)?;
        max_step_increase = max_step_increase.max(e - e_prev);
        max_increase = max_increase.max(e - running_min);
        running_min = running_min.min(e);
        let last = t >= opts.t_final * (1.0 - 1e-14);
        if steps % opts.record_every.max(1) == 0 || last {
            history.push(Sample { t, h, e_a: e, de_dt: (e - e_prev) / dt, max_wave_speed: smax });
        }
        e_prev = e;
    }
    let jump = rel_eta(model, &setup.u_l, &setup.u_r).max(rel_eta(model, &setup.u_r, &setup.u_l));
    let tol_scheme = opts.scheme_constant * g.dx * (1.0 + setup.a) * jump + opts.t_final * epsilon;
    Ok(SimReport {
        shift: ShiftState { h, epsilon, history },
        steps,
        dx: g.dx,
        max_increase,
        max_step_increase,
        tol_scheme,
        max_shift_speed,
        max_v,
        conservation_defect: defect,
        e_initial: e0,
        e_final: e_prev,
    })
}

/// Time series as CSV with header `t,h,E_a,dEa_dt_estimate,max_wave_speed`.
pub fn write_series_csv(history: &[Sample], out: impl Write) -> Result<()> {
    let io = |e: csv::Error| Error::Invalid(format!("write csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "h", "E_a", "dEa_dt_estimate", "max_wave_speed"]).map_err(io)?;
    for s in history {
        w.write_record([s.t, s.h, s.e_a, s.de_dt, s.max_wave_speed].iter().map(|v| format!("{v:e}"))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Invalid(format!("write csv: {e}")))
}
