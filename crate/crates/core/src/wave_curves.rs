//! Hugoniot loci, rarefaction curves and admissibility of discontinuities.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::entropy::{nonlinearity, rel_eta, rel_q, FieldKind, State, SystemModel};
use crate::error::{Error, Result};
use crate::numerics::{adaptive_simpson, dormand_prince, CubicSpline, OdeStop};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Eigenvalue increases along the curve.
    Forward,
    /// Eigenvalue decreases along the curve.
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveKind {
    Hugoniot,
    Rarefaction(Direction),
}

/// Which end of the discontinuity the base state occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseSide {
    /// The base is `u_−`; curve points are right states.
    Left,
    /// The base is `u_+`; curve points are left states.
    Right,
}

/// Branch of the Hugoniot locus leaving the base point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// The branch whose speed trend satisfies the Liu sign for the base side:
    /// decreasing speed for a left base, increasing for a right base.
    Admissible,
    AlongEigenvector,
    AgainstEigenvector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub s: f64,
    pub state: State,
    /// Shock speed on Hugoniot curves, eigenvalue on rarefactions.
    pub speed: f64,
    pub rh_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveCurve {
    pub family: usize,
    pub kind: CurveKind,
    pub base_side: BaseSide,
    pub base: State,
    pub samples: Vec<CurveSample>,
    pub parameterization: String,
}

impl WaveCurve {
    pub fn last(&self) -> &CurveSample {
        self.samples.last().expect("curves always hold the base sample")
    }

    pub fn span(&self) -> f64 {
        self.last().s
    }

    pub fn params(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.s).collect()
    }

    pub fn speeds(&self) -> Vec<f64> {
        self.samples.iter().map(|p| p.speed).collect()
    }

    /// Writes `s, <components>, sigma_or_lambda, rh_residual`.
    pub fn write_csv<W: Write>(&self, names: &[&str], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["s".to_string()];
        header.extend(names.iter().map(|s| s.to_string()));
        header.push("sigma_or_lambda".into());
        header.push("rh_residual".into());
        w.write_record(&header).map_err(io_err)?;
        for p in &self.samples {
            let mut row = vec![format!("{:.17e}", p.s)];
            row.extend(p.state.iter().map(|x| format!("{x:.17e}")));
            row.push(format!("{:.17e}", p.speed));
            row.push(p.rh_residual.map(|r| format!("{r:.3e}")).unwrap_or_default());
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::Invalid(e.to_string()))?;
        Ok(())
    }
}

fn io_err(e: csv::Error) -> Error {
    Error::Invalid(format!("csv: {e}"))
}

/// Cubic-spline view of a traced curve.
#[derive(Debug, Clone)]
pub struct CurveSplines {
    pub components: Vec<CubicSpline>,
    pub speed: CubicSpline,
}

impl CurveSplines {
    pub fn new(curve: &WaveCurve) -> Result<Self> {
        let s = curve.params();
        if s.len() < 2 {
            return Err(Error::Quadrature("curve has fewer than two samples".into()));
        }
        let n = curve.base.len();
        let components = (0..n)
            .map(|k| {
                let y: Vec<f64> = curve.samples.iter().map(|p| p.state[k]).collect();
                CubicSpline::new(&s, &y)
            })
            .collect::<Result<Vec<_>>>()?;
        let speed = CubicSpline::new(&s, &curve.speeds())?;
        Ok(Self { components, speed })
    }

    pub fn state(&self, s: f64) -> State {
        DVector::from_iterator(self.components.len(), self.components.iter().map(|c| c.eval(s)))
    }

    pub fn tangent(&self, s: f64) -> DVector<f64> {
        DVector::from_iterator(self.components.len(), self.components.iter().map(|c| c.derivative(s)))
    }

    pub fn speed(&self, s: f64) -> f64 {
        self.speed.eval(s)
    }

    pub fn speed_derivative(&self, s: f64) -> f64 {
        self.speed.derivative(s)
    }
}

pub fn rh_residual(model: &dyn SystemModel, u_minus: &State, u_plus: &State, sigma: f64) -> f64 {
    (model.flux(u_plus) - model.flux(u_minus) - (u_plus - u_minus) * sigma).amax()
}

/// Tolerance of the Rankine-Hugoniot flag: `1e-9 (1 + |f(u)|)`.
pub fn rh_tolerance(model: &dyn SystemModel, u: &State) -> f64 {
    1e-9 * (1.0 + model.flux(u).amax())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HugoniotOptions {
    pub span: f64,
    pub step: f64,
    pub branch: Branch,
    /// `None` selects a right base for the last family of a system and a
    /// left base otherwise.
    pub base_side: Option<BaseSide>,
    pub newton_tol: f64,
    pub max_newton: usize,
}

impl HugoniotOptions {
    pub fn new(span: f64, step: f64) -> Self {
        Self { span, step, branch: Branch::Admissible, base_side: None, newton_tol: 1e-12, max_newton: 50 }
    }
    pub fn side(mut self, side: BaseSide) -> Self {
        self.base_side = Some(side);
        self
    }
    pub fn branch(mut self, branch: Branch) -> Self {
        self.branch = branch;
        self
    }
}

pub fn default_base_side(model: &dyn SystemModel, family: usize) -> BaseSide {
    let n = model.dim();
    if n > 1 && family == n {
        BaseSide::Right
    } else {
        BaseSide::Left
    }
}

fn check_family(model: &dyn SystemModel, family: usize) -> Result<()> {
    if family == 0 || family > model.dim() {
        return Err(Error::Invalid(format!("family {family} outside 1..={}", model.dim())));
    }
    Ok(())
}

/// Traces the `family` Hugoniot locus through `base` on the admissible branch.
pub fn trace_hugoniot(model: &dyn SystemModel, base: &State, family: usize, span: f64, step: f64) -> Result<WaveCurve> {
    trace_hugoniot_with(model, base, family, &HugoniotOptions::new(span, step))
}

/// Pseudo-arclength continuation of `f(S) − f(u) = σ(S − u)` in `(S, σ)`.
///
/// The curve parameter `s` accumulates the constrained steps
/// `⟨S_{k+1} − S_k, t_k⟩ = h_k` where `t_k` is the unit state tangent.
pub fn trace_hugoniot_with(
    model: &dyn SystemModel,
    base: &State,
    family: usize,
    opts: &HugoniotOptions,
) -> Result<WaveCurve> {
    check_family(model, family)?;
    if !model.in_domain(base) {
        return Err(Error::Domain(format!("base {:?} not in domain", base.as_slice())));
    }
    if !(opts.span > 0.0) || !(opts.step > 0.0) {
        return Err(Error::Invalid("span and step must be positive".into()));
    }
    let side = opts.base_side.unwrap_or_else(|| default_base_side(model, family));
    let eig = model.eigen(base)?;
    let lambda = eig.values[family - 1];
    let r = eig.vectors[family - 1].clone();
    let nl = match model.field_kind(family) {
        FieldKind::LinearlyDegenerate => 0.0,
        FieldKind::GenuinelyNonlinear => nonlinearity(model, base, family)?,
    };
    let sign = match opts.branch {
        Branch::AlongEigenvector => 1.0,
        Branch::AgainstEigenvector => -1.0,
        Branch::Admissible => {
            // σ'(0) = ½ ∇λ·d along direction d
            let want = if side == BaseSide::Left { -1.0 } else { 1.0 };
            if nl == 0.0 {
                1.0
            } else if nl * want > 0.0 {
                1.0
            } else {
                -1.0
            }
        }
    };
    let mut tangent = &r * sign;
    let mut slope = 0.5 * nl * sign;
    let f_base = model.flux(base);
    let mut curve = WaveCurve {
        family,
        kind: CurveKind::Hugoniot,
        base_side: side,
        base: base.clone(),
        samples: vec![CurveSample { s: 0.0, state: base.clone(), speed: lambda, rh_residual: Some(0.0) }],
        parameterization: "pseudo-arclength".into(),
    };
    let accept_tol = 1e-9 * (1.0 + f_base.amax());
    let h_min = 1e-6 * opts.span;
    let mut h_cur = opts.step;
    let mut s = 0.0;
    let mut cur = base.clone();
    let mut sigma = lambda;
    while s < opts.span * (1.0 - 1e-14) {
        let h = h_cur.min(opts.span - s);
        let pred_s = &cur + &tangent * h;
        let pred_sig = sigma + slope * h;
        let attempt = newton_rh(model, base, &f_base, &cur, &tangent, h, pred_s, pred_sig, opts);
        let failure = match attempt {
            Ok((st, sg, res, iters)) => {
                if !model.in_domain(&st) {
                    Some("left the domain".to_string())
                } else {
                    // tangent at the new point from the bordered system
                    match curve_tangent(model, base, &st, sg, &tangent) {
                        Some((t_new, dsig)) => {
                            if t_new.dot(&tangent) <= 0.0 {
                                Some("fold detected".to_string())
                            } else {
                                s += h;
                                tangent = t_new;
                                slope = dsig;
                                cur = st.clone();
                                sigma = sg;
                                curve.samples.push(CurveSample {
                                    s,
                                    state: st,
                                    speed: sg,
                                    rh_residual: Some(res),
                                });
                                if res > accept_tol {
                                    return Err(Error::Continuation {
                                        s,
                                        reason: format!("residual {res:e} above tolerance"),
                                        partial: Box::new(curve),
                                    });
                                }
                                if iters <= 4 {
                                    h_cur = (h_cur * 1.5).min(opts.step);
                                }
                                None
                            }
                        }
                        None => Some("fold detected (singular bordered Jacobian)".to_string()),
                    }
                }
            }
            Err(msg) => Some(msg),
        };
        if let Some(reason) = failure {
            h_cur = 0.5 * h.min(h_cur);
            if h_cur < h_min {
                return Err(Error::Continuation { s, reason, partial: Box::new(curve) });
            }
        }
    }
    Ok(curve)
}

#[allow(clippy::too_many_arguments)]
fn newton_rh(
    model: &dyn SystemModel,
    base: &State,
    f_base: &DVector<f64>,
    anchor: &State,
    tangent: &DVector<f64>,
    h: f64,
    mut st: State,
    mut sg: f64,
    opts: &HugoniotOptions,
) -> std::result::Result<(State, f64, f64, usize), String> {
    let n = base.len();
    let loose = 1e-9 * (1.0 + f_base.amax());
    for it in 0..opts.max_newton {
        if !model.in_extended_domain(&st) || st.iter().any(|x| !x.is_finite()) {
            return Err("newton iterate left the domain".into());
        }
        let rh = model.flux(&st) - f_base - (&st - base) * sg;
        let cons = tangent.dot(&(&st - anchor)) - h;
        let res = rh.amax();
        if res <= opts.newton_tol && cons.abs() <= 1e-13 * (1.0 + h) {
            return Ok((st, sg, res, it));
        }
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let mut df = model.flux_jacobian(&st);
        for k in 0..n {
            df[(k, k)] -= sg;
        }
        jac.view_mut((0, 0), (n, n)).copy_from(&df);
        let d = &st - base;
        for k in 0..n {
            jac[(k, n)] = -d[k];
            jac[(n, k)] = tangent[k];
        }
        let mut rhs = DVector::zeros(n + 1);
        rhs.rows_mut(0, n).copy_from(&(-rh));
        rhs[n] = -cons;
        let Some(dx) = jac.lu().solve(&rhs) else {
            return Err("singular Newton matrix".into());
        };
        st += dx.rows(0, n);
        sg += dx[n];
        let step = dx.amax();
        if step <= 1e-15 * (1.0 + st.amax()) {
            let rh = model.flux(&st) - f_base - (&st - base) * sg;
            let res = rh.amax();
            if res <= loose {
                return Ok((st, sg, res, it + 1));
            }
        }
    }
    let rh = model.flux(&st) - f_base - (&st - base) * sg;
    let res = rh.amax();
    // rounding floor for large flux magnitudes
    if res <= 1e-3 * loose {
        return Ok((st, sg, res, opts.max_newton));
    }
    Err(format!("newton did not converge (residual {res:e})"))
}

/// Unit state tangent of the locus at `(st, sg)` and `dσ/ds` along it.
fn curve_tangent(
    model: &dyn SystemModel,
    base: &State,
    st: &State,
    sg: f64,
    prev: &DVector<f64>,
) -> Option<(DVector<f64>, f64)> {
    let n = base.len();
    let mut jac = DMatrix::zeros(n + 1, n + 1);
    let mut df = model.flux_jacobian(st);
    for k in 0..n {
        df[(k, k)] -= sg;
    }
    jac.view_mut((0, 0), (n, n)).copy_from(&df);
    let d = st - base;
    for k in 0..n {
        jac[(k, n)] = -d[k];
        jac[(n, k)] = prev[k];
    }
    let mut rhs = DVector::zeros(n + 1);
    rhs[n] = 1.0;
    let x = jac.lu().solve(&rhs)?;
    let ds = x.rows(0, n).into_owned();
    let norm = ds.norm();
    if !(norm.is_finite() && norm > 0.0) {
        return None;
    }
    Some((ds / norm, x[n] / norm))
}

/// State at parameter `s0` on the admissible Hugoniot branch.
pub fn hugoniot_point(
    model: &dyn SystemModel,
    base: &State,
    family: usize,
    s0: f64,
    step: f64,
    side: Option<BaseSide>,
) -> Result<(State, f64, WaveCurve)> {
    let mut opts = HugoniotOptions::new(s0, step.min(s0));
    opts.base_side = side;
    let curve = trace_hugoniot_with(model, base, family, &opts)?;
    let p = curve.last().clone();
    Ok((p.state, p.speed, curve))
}

/// Integral curve of `±r_family` with eigenvalue monotone in `direction`.
pub fn trace_rarefaction(
    model: &dyn SystemModel,
    base: &State,
    family: usize,
    direction: Direction,
    span: f64,
    step: f64,
) -> Result<WaveCurve> {
    check_family(model, family)?;
    if model.field_kind(family) != FieldKind::GenuinelyNonlinear {
        return Err(Error::Invalid(format!("field {family} is not genuinely nonlinear")));
    }
    if !model.in_domain(base) {
        return Err(Error::Domain(format!("base {:?} not in domain", base.as_slice())));
    }
    let nl = nonlinearity(model, base, family)?;
    if nl == 0.0 {
        return Err(Error::Invalid(format!("field {family} degenerate at the base")));
    }
    let want = if direction == Direction::Forward { 1.0 } else { -1.0 };
    let sign = if nl * want > 0.0 { 1.0 } else { -1.0 };
    let lambda0 = model.eigen(base)?.values[family - 1];
    let side = if direction == Direction::Backward { BaseSide::Left } else { BaseSide::Right };
    let mut curve = WaveCurve {
        family,
        kind: CurveKind::Rarefaction(direction),
        base_side: side,
        base: base.clone(),
        samples: vec![CurveSample { s: 0.0, state: base.clone(), speed: lambda0, rh_residual: None }],
        parameterization: "arclength".into(),
    };
    let r0 = model.eigen(base)?.vectors[family - 1].clone() * sign;
    let reference = std::cell::RefCell::new(r0);
    let rhs = |_t: f64, y: &DVector<f64>| -> Option<DVector<f64>> {
        if !model.in_domain(y) {
            return None;
        }
        let e = model.eigen(y).ok()?;
        let mut r = e.vectors[family - 1].clone();
        if r.dot(&reference.borrow()) < 0.0 {
            r = -r;
        }
        Some(r)
    };
    let mut samples = Vec::new();
    let stop = dormand_prince(&rhs, 0.0, base, span, 1e-10, step, &mut |t, y| {
        let Ok(e) = model.eigen(y) else { return false };
        let mut r = e.vectors[family - 1].clone();
        if r.dot(&reference.borrow()) < 0.0 {
            r = -r;
        }
        *reference.borrow_mut() = r;
        samples.push(CurveSample { s: t, state: y.clone(), speed: e.values[family - 1], rh_residual: None });
        true
    });
    curve.samples.extend(samples);
    match stop {
        OdeStop::Completed => Ok(curve),
        OdeStop::Halted(t) => Err(Error::DomainExit { s: t, partial: Box::new(curve) }),
    }
}

/// Like the tracers above but keeps the partial curve on early termination.
pub fn partial_ok(r: Result<WaveCurve>) -> Result<(WaveCurve, bool)> {
    match r {
        Ok(c) => Ok((c, true)),
        Err(Error::DomainExit { partial, .. }) | Err(Error::Continuation { partial, .. }) => Ok((*partial, false)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discontinuity {
    pub u_minus: State,
    pub u_plus: State,
    pub sigma: f64,
    pub family: Option<usize>,
    pub admissibility: AdmissibilityFlags,
}

impl Discontinuity {
    pub fn new(model: &dyn SystemModel, u_minus: State, u_plus: State, sigma: f64, family: Option<usize>) -> Self {
        let mut d = Self { u_minus, u_plus, sigma, family, admissibility: AdmissibilityFlags::default() };
        d.admissibility = classify_admissibility(model, &d, None);
        d
    }

    /// Least-squares speed `σ = Δf·Δu / |Δu|²`.
    pub fn speed_of(model: &dyn SystemModel, u_minus: &State, u_plus: &State) -> f64 {
        let du = u_plus - u_minus;
        let df = model.flux(u_plus) - model.flux(u_minus);
        df.dot(&du) / du.norm_squared()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityFlags {
    pub rankine_hugoniot: bool,
    pub entropy_inequality: bool,
    /// Classical Lax inequalities (equality of speeds for degenerate fields).
    pub lax: bool,
    /// `λ_{i−1}(u_−) ≤ σ ≤ λ_{i+1}(u_+)`.
    pub lax_extended: bool,
    /// Set only when a connecting curve was supplied.
    pub liu: Option<bool>,
    /// `σ(η(u_+)−η(u_−)) − (q(u_+)−q(u_−))`, nonnegative for entropic jumps.
    pub entropy_dissipation: f64,
}

/// Entropy slack `σΔη − Δq` of a jump.
pub fn entropy_dissipation(model: &dyn SystemModel, u_minus: &State, u_plus: &State, sigma: f64) -> f64 {
    sigma * (model.entropy(u_plus) - model.entropy(u_minus)) - (model.entropy_flux(u_plus) - model.entropy_flux(u_minus))
}

/// Slack allowed in the entropy inequality.
pub fn entropy_slack_tolerance(model: &dyn SystemModel, u_minus: &State, u_plus: &State) -> f64 {
    1e-10 * (1.0 + model.entropy_flux(u_minus).abs().max(model.entropy_flux(u_plus).abs()))
}

pub fn classify_admissibility(model: &dyn SystemModel, d: &Discontinuity, curve: Option<&WaveCurve>) -> AdmissibilityFlags {
    let mut flags = AdmissibilityFlags {
        rankine_hugoniot: rh_residual(model, &d.u_minus, &d.u_plus, d.sigma) <= rh_tolerance(model, &d.u_minus),
        ..Default::default()
    };
    let diss = entropy_dissipation(model, &d.u_minus, &d.u_plus, d.sigma);
    flags.entropy_dissipation = diss;
    flags.entropy_inequality = diss >= -entropy_slack_tolerance(model, &d.u_minus, &d.u_plus);
    let (Ok(em), Ok(ep)) = (model.eigen(&d.u_minus), model.eigen(&d.u_plus)) else {
        return flags;
    };
    let n = model.dim();
    let scale = 1e-9 * (1.0 + d.sigma.abs());
    let lax_for = |i: usize| -> (bool, bool) {
        let k = i - 1;
        let classical = match model.field_kind(i) {
            FieldKind::GenuinelyNonlinear => ep.values[k] < d.sigma && d.sigma < em.values[k],
            FieldKind::LinearlyDegenerate => {
                (ep.values[k] - d.sigma).abs() <= scale && (em.values[k] - d.sigma).abs() <= scale
            }
        };
        let lo = if i > 1 { em.values[k - 1] <= d.sigma + scale } else { true };
        let hi = if i < n { d.sigma <= ep.values[k + 1] + scale } else { true };
        (classical, lo && hi)
    };
    match d.family {
        Some(i) if (1..=n).contains(&i) => {
            let (c, e) = lax_for(i);
            flags.lax = c;
            flags.lax_extended = e;
        }
        _ => {
            for i in 1..=n {
                let (c, e) = lax_for(i);
                if c {
                    flags.lax = true;
                    flags.lax_extended = e;
                    break;
                }
            }
        }
    }
    if let Some(c) = curve {
        flags.liu = liu_along(model, d, c);
    }
    flags
}

/// Index of the sample matching `target`, if the curve passes through it.
pub fn locate_on_curve(curve: &WaveCurve, target: &State) -> Option<usize> {
    let tol = 1e-6 * (1.0 + target.amax());
    curve
        .samples
        .iter()
        .enumerate()
        .map(|(i, p)| (i, (&p.state - target).amax()))
        .filter(|(_, d)| *d <= tol)
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .map(|(i, _)| i)
}

fn liu_along(model: &dyn SystemModel, d: &Discontinuity, c: &WaveCurve) -> Option<bool> {
    let tol_base = 1e-9 * (1.0 + c.base.amax());
    let (other, expect_side) = if (&c.base - &d.u_minus).amax() <= tol_base {
        (&d.u_plus, BaseSide::Left)
    } else if (&c.base - &d.u_plus).amax() <= tol_base {
        (&d.u_minus, BaseSide::Right)
    } else {
        return None;
    };
    if c.kind != CurveKind::Hugoniot || c.base_side != expect_side {
        return None;
    }
    let k = locate_on_curve(c, other)?;
    let s0 = c.samples[k].speed;
    let tol = 1e-9 * (1.0 + s0.abs());
    if model.field_kind(c.family) == FieldKind::LinearlyDegenerate {
        return Some(c.samples[..=k].iter().all(|p| (p.speed - s0).abs() <= 1e-8 * (1.0 + s0.abs())));
    }
    Some(c.samples[..=k].iter().all(|p| match expect_side {
        BaseSide::Left => p.speed >= s0 - tol,
        BaseSide::Right => p.speed <= s0 + tol,
    }))
}

/// Sign of `dσ/ds` at every sample: `(min, max)` of the spline derivative.
pub fn speed_derivative_range(curve: &WaveCurve) -> Result<(f64, f64)> {
    let sp = CurveSplines::new(curve)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in curve.samples.iter().skip(1) {
        let d = sp.speed_derivative(p.s);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}

/// Both sides of `q(S(s),v) − σ(s)η(S(s)|v) = q(u,v) − σ(s)η(u|v) + ∫_0^s σ'η(u|S)`.
pub fn diperna_check(model: &dyn SystemModel, curve: &WaveCurve, v: &State, s: f64) -> Result<(f64, f64)> {
    if curve.kind != CurveKind::Hugoniot {
        return Err(Error::Invalid("DiPerna check needs a Hugoniot curve".into()));
    }
    if s < 0.0 || s > curve.span() * (1.0 + 1e-12) {
        return Err(Error::Invalid(format!("s={s} outside traced span [0, {}]", curve.span())));
    }
    let sp = CurveSplines::new(curve)?;
    let u = &curve.base;
    let (st, sig) = match curve.samples.iter().find(|p| (p.s - s).abs() <= 1e-14 * (1.0 + s)) {
        Some(p) => (p.state.clone(), p.speed),
        None => (sp.state(s), sp.speed(s)),
    };
    let lhs = rel_q(model, &st, v) - sig * rel_eta(model, &st, v);
    let integral = integrate_knots(curve, s, &|t| sp.speed_derivative(t) * rel_eta(model, u, &sp.state(t)))?;
    let rhs = rel_q(model, u, v) - sig * rel_eta(model, u, v) + integral;
    Ok((lhs, rhs))
}

/// Adaptive quadrature split at the curve knots between the ends.
fn integrate_knots(curve: &WaveCurve, s: f64, g: &dyn Fn(f64) -> f64) -> Result<f64> {
    integrate_between(curve, 0.0, s, g)
}

fn integrate_between(curve: &WaveCurve, a: f64, b: f64, g: &dyn Fn(f64) -> f64) -> Result<f64> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut nodes = vec![lo];
    nodes.extend(curve.samples.iter().map(|p| p.s).filter(|&t| t > lo && t < hi));
    nodes.push(hi);
    let mut total = 0.0;
    for w in nodes.windows(2) {
        if w[1] > w[0] {
            let scale = 1e-13 * (1.0 + g(w[0]).abs() * (w[1] - w[0]));
            total += adaptive_simpson(g, w[0], w[1], scale, 30)?;
        }
    }
    Ok(sign * total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaKRow {
    pub s: f64,
    pub g: f64,
    /// `q(S(s),S(s_0)) − σ(s)η(S(s)|S(s_0))` evaluated directly.
    pub g_direct: f64,
    pub bound_quadratic: f64,
    pub bound_linear: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaKProfile {
    pub s0: f64,
    pub k: f64,
    pub delta: f64,
    pub rows: Vec<DeltaKRow>,
}

/// `g(s) = ∫_{s0}^s σ'(t)(η(u|S(t)) − η(u|S(s0))) dt` along the curve and the
/// largest `k` (over `δ ∈ (0, s0/2)`) for which `g ≤ −k|Δσ|²` near `s0` and
/// `g ≤ −k|Δσ|` away from it.
pub fn delta_k_profile(model: &dyn SystemModel, curve: &WaveCurve, s0: f64) -> Result<DeltaKProfile> {
    if curve.kind != CurveKind::Hugoniot {
        return Err(Error::Invalid("delta-k profile needs a Hugoniot curve".into()));
    }
    if !(s0 > 0.0 && s0 < curve.span()) {
        return Err(Error::Invalid(format!("s0={s0} must be interior to (0, {})", curve.span())));
    }
    let sp = CurveSplines::new(curve)?;
    let u = &curve.base;
    let s_ref = sp.state(s0);
    let sig0 = sp.speed(s0);
    let e0 = rel_eta(model, u, &s_ref);
    let mut raw = Vec::new();
    for p in &curve.samples {
        let g = integrate_between(curve, s0, p.s, &|t| sp.speed_derivative(t) * (rel_eta(model, u, &sp.state(t)) - e0))?;
        let g_direct = rel_q(model, &p.state, &s_ref) - p.speed * rel_eta(model, &p.state, &s_ref);
        raw.push((p.s, g, g_direct, (p.speed - sig0).abs()));
    }
    let mut best = (f64::NEG_INFINITY, 0.0);
    let deltas: Vec<f64> = (1..=40).map(|i| 0.5 * s0 * i as f64 / 41.0).collect();
    for &delta in &deltas {
        let mut k = f64::INFINITY;
        for &(s, g, _, ds) in &raw {
            if ds <= 1e-12 || (s - s0).abs() <= 1e-12 * (1.0 + s0) {
                continue;
            }
            let ratio = if (s - s0).abs() < delta { -g / (ds * ds) } else { -g / ds };
            k = k.min(ratio);
        }
        if k > best.0 {
            best = (k, delta);
        }
    }
    let (k, delta) = best;
    let rows = raw
        .into_iter()
        .map(|(s, g, g_direct, ds)| DeltaKRow { s, g, g_direct, bound_quadratic: -k * ds * ds, bound_linear: -k * ds })
        .collect();
    Ok(DeltaKProfile { s0, k, delta, rows })
}
