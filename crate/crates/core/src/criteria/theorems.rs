use serde::{Deserialize, Serialize};

use super::certificate::{Certificate, CertificateKind, Table, Verdict, Witness};
use super::checks::{check_h1_with, check_h2, H1Options, H2Mode, H2Options};
use super::surface::{sample_sigma_surface, SurfaceOptions};
use super::WeightedSetup;
use crate::entropy::{nonlinearity, rel_eta, rel_q, FieldKind, State};
use crate::error::{Error, Result};
use crate::models::{Euler, Mhd, ModelSpec};
use crate::numerics::bisect;
use crate::wave_curves::{
    partial_ok, trace_hugoniot_with, trace_rarefaction, BaseSide, Branch, CurveSample, Direction, HugoniotOptions, WaveCurve,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeighborOptions {
    /// Initial curve length; doubled while no crossing is found.
    pub span: f64,
    /// Curve length traced before giving up.
    pub max_span: f64,
    /// Maximal step of the curve integrator.
    pub step: f64,
    /// Step of the central difference in the derivative oracle.
    pub fd_step: f64,
}

impl Default for NeighborOptions {
    fn default() -> Self {
        Self { span: 40.0, max_span: 1e4, step: 0.02, fd_step: 1e-5 }
    }
}

impl NeighborOptions {
    /// Span and step scaled to the jump size.
    pub fn scaled(setup: &WeightedSetup) -> Self {
        let d = (&setup.u_l - &setup.u_r).norm().max(1e-3);
        Self { span: 40.0 * d, max_span: 1e4 * d, step: 0.02 * d, fd_step: 1e-5 * d }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Intersection {
    pub found: bool,
    pub ubar: State,
    pub sbar: f64,
    /// Curve from the base up to `ubar` (or the whole traced part).
    pub curve: WaveCurve,
    pub traced_span: f64,
    pub complete: bool,
}

fn opposite(d: Direction) -> Direction {
    match d {
        Direction::Forward => Direction::Backward,
        Direction::Backward => Direction::Forward,
    }
}

/// Rarefaction state at arclength `ds ≥ 0` beyond `from` in `direction`.
fn advance(setup: &WeightedSetup, from: &State, family: usize, direction: Direction, ds: f64, step: f64) -> Option<CurveSample> {
    if ds == 0.0 {
        let lam = setup.model.eigen(from).ok()?.values[family - 1];
        return Some(CurveSample { s: 0.0, state: from.clone(), speed: lam, rh_residual: None });
    }
    trace_rarefaction(setup.model(), from, family, direction, ds, step.min(ds)).ok().map(|c| c.last().clone())
}

/// First crossing of `Σ_a` along the rarefaction curve of `family`: the
/// backward curve leaves `u_l`, the forward curve leaves `u_r`.
pub fn rarefaction_intersection(
    setup: &WeightedSetup,
    family: usize,
    direction: Direction,
    opts: &NeighborOptions,
) -> Result<Intersection> {
    let base = match direction {
        Direction::Backward => setup.u_l.clone(),
        Direction::Forward => setup.u_r.clone(),
    };
    let s0 = setup.phi(&base).signum();
    let mut span = opts.span;
    let (curve, complete, k) = loop {
        // keep the sample count bounded on long curves
        let step = opts.step.max(span / 4000.0);
        let (curve, complete) = partial_ok(trace_rarefaction(setup.model(), &base, family, direction, span, step))?;
        let hit = curve.samples.iter().position(|p| setup.phi(&p.state).signum() != s0);
        match hit {
            Some(k) => break (curve, complete, k),
            None if complete && span < opts.max_span => span = (2.0 * span).min(opts.max_span),
            None => {
                let traced_span = curve.span();
                return Ok(Intersection { found: false, ubar: curve.last().state.clone(), sbar: traced_span, curve, traced_span, complete });
            }
        }
    };
    let traced_span = curve.span();
    let prev = curve.samples[k - 1].clone();
    let gap = curve.samples[k].s - prev.s;
    let g = |ds: f64| match advance(setup, &prev.state, family, direction, ds, opts.step) {
        Some(p) => setup.phi(&p.state),
        None => f64::NAN,
    };
    let (ds, _, _) = bisect(&g, 0.0, gap, &|v: f64| v == 0.0);
    let end = advance(setup, &prev.state, family, direction, ds, opts.step)
        .ok_or_else(|| Error::Domain("rarefaction refinement left the domain".into()))?;
    let mut truncated = curve.clone();
    truncated.samples.truncate(k);
    let sbar = prev.s + ds;
    truncated.samples.push(CurveSample { s: sbar, ..end.clone() });
    Ok(Intersection { found: true, ubar: end.state, sbar, curve: truncated, traced_span, complete })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FRow {
    pub s: f64,
    pub lambda: f64,
    pub f: f64,
    /// `(dλ/ds)(η(R|u_l) − a η(R|u_r))`.
    pub f_prime: f64,
    /// Central difference of `F` along the re-integrated curve.
    pub f_prime_fd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FProfile {
    pub family: usize,
    pub direction: Direction,
    pub sbar: f64,
    pub rows: Vec<FRow>,
    pub f_at_sbar: f64,
    pub d_sm_at_sbar: f64,
    /// Largest `|F'_fd − F'|` relative to the tolerance scale.
    pub max_derivative_gap: f64,
}

impl FProfile {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["s", "lambda", "F", "F_prime", "F_prime_fd"]);
        t.rows = self.rows.iter().map(|r| vec![r.s, r.lambda, r.f, r.f_prime, r.f_prime_fd]).collect();
        t
    }
}

fn f_value(setup: &WeightedSetup, r: &State, lambda: f64) -> f64 {
    let m = setup.model();
    setup.a * (rel_q(m, r, &setup.u_r) - lambda * rel_eta(m, r, &setup.u_r)) - rel_q(m, r, &setup.u_l)
        + lambda * rel_eta(m, r, &setup.u_l)
}

/// Tabulates `F(s) = a(q(R;u_r) − λη(R|u_r)) − q(R;u_l) + λη(R|u_l)` along
/// the rarefaction curve up to `sbar`, with the reduced derivative and a
/// finite-difference check of it.
pub fn f_function_profile(setup: &WeightedSetup, curve: &WaveCurve, sbar: f64, opts: &NeighborOptions) -> Result<FProfile> {
    let crate::wave_curves::CurveKind::Rarefaction(direction) = curve.kind else {
        return Err(Error::Invalid("F-function profile needs a rarefaction curve".into()));
    };
    let family = curve.family;
    let model = setup.model();
    let sign = if direction == Direction::Forward { 1.0 } else { -1.0 };
    let base_size = 1.0 + curve.base.amax();
    let mut rows = Vec::new();
    let mut one_sided = Vec::new();
    let mut fd_noise = Vec::new();
    let fd = |r: &State, f: f64, h: f64, central: bool| -> (f64, bool) {
        let fwd = advance(setup, r, family, direction, h, h);
        let back = if central { advance(setup, r, family, opposite(direction), h, h) } else { None };
        match (fwd, back) {
            (Some(a), Some(b)) => ((f_value(setup, &a.state, a.speed) - f_value(setup, &b.state, b.speed)) / (2.0 * h), false),
            (Some(a), None) => ((f_value(setup, &a.state, a.speed) - f) / h, true),
            _ => (f64::NAN, true),
        }
    };
    for p in curve.samples.iter().filter(|p| p.s <= sbar * (1.0 + 1e-12)) {
        let r = &p.state;
        // F is a difference of terms growing with |R|; widen h against roundoff
        let h = opts.fd_step * (1.0 + r.amax()) / base_size;
        let dlam = sign * nonlinearity(model, r, family)?.abs();
        let f = f_value(setup, r, p.speed);
        let f_prime = dlam * setup.phi(r);
        let (f_prime_fd, one) = fd(r, f, h, p.s >= 2.0 * h);
        let (coarse, _) = fd(r, f, 2.0 * h, p.s >= 2.0 * h);
        one_sided.push(one);
        fd_noise.push((f_prime_fd - coarse).abs());
        rows.push(FRow { s: p.s, lambda: p.speed, f, f_prime, f_prime_fd });
    }
    let last = curve.samples.iter().filter(|p| p.s <= sbar * (1.0 + 1e-12)).last().expect("base sample");
    let f_at_sbar = f_value(setup, &last.state, last.speed);
    let d_sm_at_sbar = setup.d_sm(&last.state);
    let fmax = rows.iter().map(|r| r.f.abs()).fold(0.0, f64::max);
    let mut max_gap: f64 = 0.0;
    for (i, r) in rows.iter().enumerate() {
        if i == 0 && !(r.f > 0.0) {
            return Err(Error::Assertion { s: r.s, what: format!("F(0) = {:e} is not positive", r.f) });
        }
        if r.s > 0.0 && r.s < sbar && !(r.f_prime > 0.0) {
            return Err(Error::Assertion { s: r.s, what: format!("F'(s) = {:e} is not positive", r.f_prime) });
        }
        // one-sided differences at the base are first order: O(h) slack
        let order = if one_sided[i] { 1e-6 + 10.0 * opts.fd_step } else { 1e-6 };
        // the h/2h spread bounds truncation and cancellation error of the difference
        let tol = order * r.f_prime.abs().max(r.f_prime_fd.abs()) + 1e-8 * (1.0 + fmax) + 4.0 * fd_noise[i];
        let gap = (r.f_prime_fd - r.f_prime).abs();
        if !(gap <= tol) {
            return Err(Error::Assertion {
                s: r.s,
                what: format!("reduced F' = {:e} disagrees with finite difference {:e}", r.f_prime, r.f_prime_fd),
            });
        }
        max_gap = max_gap.max(gap / tol);
    }
    if (f_at_sbar - d_sm_at_sbar).abs() > 1e-8 * (1.0 + d_sm_at_sbar.abs()) {
        return Err(Error::Assertion { s: sbar, what: format!("F(sbar) = {f_at_sbar:e} but D_sm = {d_sm_at_sbar:e}") });
    }
    Ok(FProfile { family, direction, sbar, rows, f_at_sbar, d_sm_at_sbar, max_derivative_gap: max_gap })
}

/// Witness certificate for a rarefaction crossing: `D_sm(ū) > tol` refutes
/// `(H1)`. Verdict is not-applicable when the curve misses `Σ_a`.
fn crossing_certificate(setup: &WeightedSetup, family: usize, direction: Direction, opts: &NeighborOptions) -> Result<Certificate> {
    let tol = setup.tol_violation();
    let hit = rarefaction_intersection(setup, family, direction, opts)?;
    let mut c = Certificate::new(CertificateKind::NoContractionWitness, Verdict::NotApplicable, Some(setup.record()?), tol);
    c.cover("family", family);
    c.cover("direction", direction);
    c.cover("max_span", opts.max_span);
    c.cover("traced_span", hit.traced_span);
    c.cover("curve_complete", hit.complete);
    if !hit.found {
        c.note(format!("rarefaction curve of family {family} did not meet the level surface on the traced span"));
        return Ok(c);
    }
    let profile = f_function_profile(setup, &hit.curve, hit.sbar, opts)?;
    c.cover("sbar", hit.sbar);
    c.cover("f_profile_max_derivative_gap", profile.max_derivative_gap);
    c.tables.insert("f_profile".into(), profile.table());
    let w = Witness::d_sm(setup, &hit.ubar);
    c.max_value = Some(w.value);
    c.verdict = if w.value > tol { Verdict::Violation } else { Verdict::NoViolationFound };
    if c.verdict != Verdict::Violation {
        c.note("crossing found but D_sm does not exceed the violation tolerance");
    }
    c.witness = Some(w);
    Ok(c)
}

/// Neighbouring genuinely nonlinear field criterion: backward rarefactions of
/// families below `shock_family` from `u_l` when `a ≤ 1`, forward
/// rarefactions of families above it from `u_r` when `a ≥ 1`.
pub fn neighbor_rarefaction_certificate(setup: &WeightedSetup, shock_family: usize, opts: &NeighborOptions) -> Result<Certificate> {
    let n = setup.model.dim();
    let mut tried = Vec::new();
    if setup.a <= 1.0 {
        for j in 1..shock_family {
            if setup.model.field_kind(j) == FieldKind::GenuinelyNonlinear {
                tried.push((j, Direction::Backward));
            }
        }
    }
    if setup.a >= 1.0 {
        for k in shock_family + 1..=n {
            if setup.model.field_kind(k) == FieldKind::GenuinelyNonlinear {
                tried.push((k, Direction::Forward));
            }
        }
    }
    if tried.is_empty() {
        return Err(Error::NotApplicable(format!(
            "no genuinely nonlinear neighbour of family {shock_family} on the side required by a = {}",
            setup.a
        )));
    }
    let mut last = None;
    for (f, d) in tried {
        let c = crossing_certificate(setup, f, d, opts)?;
        if c.is_violation() {
            return Ok(c);
        }
        last = Some(c);
    }
    Ok(last.expect("at least one neighbour tried"))
}

/// Linearly degenerate neighbour criterion. For `a ≤ 1` and a degenerate
/// family `j` below the shock family the contact curve from `u_l` is followed
/// until `φ > 0`; for `a ≥ 1` and `k` above, the curve into `u_r` until
/// `φ < 0`. The contact piece `(u_−, u_+)` is then a `D_RH > 0` witness.
pub fn degenerate_neighbor_check(setup: &WeightedSetup, shock_family: usize, opts: &NeighborOptions) -> Result<Certificate> {
    let n = setup.model.dim();
    let model = setup.model();
    let mut candidates = Vec::new();
    if setup.a <= 1.0 {
        candidates.extend((1..shock_family).filter(|&j| model.field_kind(j) == FieldKind::LinearlyDegenerate).map(|j| (j, BaseSide::Left)));
    }
    if setup.a >= 1.0 {
        candidates
            .extend((shock_family + 1..=n).filter(|&k| model.field_kind(k) == FieldKind::LinearlyDegenerate).map(|k| (k, BaseSide::Right)));
    }
    if candidates.is_empty() {
        return Err(Error::NotApplicable(format!("no linearly degenerate neighbour of family {shock_family} for a = {}", setup.a)));
    }
    let tol = setup.tol_violation();
    for (family, side) in candidates {
        let (base, want_positive) = match side {
            BaseSide::Left => (&setup.u_l, true),
            BaseSide::Right => (&setup.u_r, false),
        };
        let lambda0 = setup.model.eigen(base)?.values[family - 1];
        for branch in [Branch::AlongEigenvector, Branch::AgainstEigenvector] {
            let ho = HugoniotOptions::new(opts.span, opts.step).side(side).branch(branch);
            let Ok((curve, _)) = partial_ok(trace_hugoniot_with(model, base, family, &ho)) else { continue };
            let Some(k) = curve.samples.iter().position(|p| {
                let f = setup.phi(&p.state);
                if want_positive {
                    f > 0.0
                } else {
                    f < 0.0
                }
            }) else {
                continue;
            };
            let p = &curve.samples[k];
            let sig = p.speed;
            let spread = curve.samples[..=k].iter().map(|q| (q.speed - lambda0).abs()).fold(0.0, f64::max);
            let (um, up) = match side {
                BaseSide::Left => (setup.u_l.clone(), p.state.clone()),
                BaseSide::Right => (p.state.clone(), setup.u_r.clone()),
            };
            let d_rh = setup.d_rh_raw(&um, &up, sig);
            let (t1, t2, t3) = match side {
                BaseSide::Left => {
                    let e = rel_eta(model, &setup.u_l, &setup.u_r);
                    (
                        setup.a * (rel_q(model, &setup.u_l, &setup.u_r) - lambda0 * e),
                        setup.a * (lambda0 - sig) * e,
                        setup.a * (rel_q(model, &up, &um) - sig * rel_eta(model, &up, &um)),
                    )
                }
                BaseSide::Right => {
                    let e = rel_eta(model, &setup.u_r, &setup.u_l);
                    (
                        -(rel_q(model, &setup.u_r, &setup.u_l) - lambda0 * e),
                        (sig - lambda0) * e,
                        -(rel_q(model, &um, &up) - sig * rel_eta(model, &um, &up)),
                    )
                }
            };
            let mut c = Certificate::new(CertificateKind::NoContractionWitness, Verdict::NoViolationFound, Some(setup.record()?), tol);
            c.cover("family", family);
            c.cover("base_side", side);
            c.cover("branch", branch);
            c.cover("span", opts.span);
            c.cover("s_crossing", p.s);
            c.cover("speed_spread", spread);
            c.cover("term_1", t1);
            c.cover("term_2", t2);
            c.cover("term_3", t3);
            c.cover("decomposition_gap", (t1 + t2 + t3 - d_rh).abs());
            let scale = 1e-8 * (1.0 + d_rh.abs());
            if spread > 1e-8 * (1.0 + lambda0.abs()) {
                return Err(Error::Assertion { s: p.s, what: format!("contact speed varies by {spread:e} along the curve") });
            }
            if t3.abs() > scale || t2.abs() > scale {
                return Err(Error::Assertion { s: p.s, what: format!("vanishing terms are {t2:e}, {t3:e}") });
            }
            let w = Witness::d_rh(setup, &um, &up, sig);
            c.max_value = Some(w.value);
            if w.value > tol {
                c.verdict = Verdict::Violation;
            } else {
                c.note("contact piece found but D_RH does not exceed the violation tolerance");
            }
            c.witness = Some(w);
            return Ok(c);
        }
    }
    Err(Error::NotApplicable("no point of the degenerate curve satisfies the side condition on the traced span".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MhdShock {
    #[serde(rename = "2-shock")]
    Two,
    #[serde(rename = "3-shock")]
    Three,
}

fn mhd_of(setup: &WeightedSetup) -> Result<Mhd> {
    match ModelSpec::of(setup.model())? {
        ModelSpec::Mhd { gamma, beta, b_floor } => {
            let mut m = Mhd::new(gamma, beta)?;
            m.b_floor = b_floor;
            Ok(m)
        }
        _ => Err(Error::Precondition(format!("model {} is not MHD", setup.model.name()))),
    }
}

/// Intermediate MHD shock criterion: the backward 1-rarefaction from `U_l`
/// (small weights) or the forward 4-rarefaction from `U_r` (large weights)
/// meets `Σ_a` at a state with `D_sm > 0`.
pub fn mhd_intersection_certificate(setup: &WeightedSetup, shock: MhdShock, opts: &NeighborOptions) -> Result<Certificate> {
    let m = mhd_of(setup)?;
    let (bl, br) = (m.magnetic(&setup.u_l), m.magnetic(&setup.u_r));
    let ok = match shock {
        MhdShock::Two => (bl > br && br > 0.0) || (bl < br && br < 0.0),
        MhdShock::Three => (br > bl && bl > 0.0) || (br < bl && bl < 0.0),
    };
    if !ok {
        return Err(Error::Precondition(format!("magnetic sign condition fails: B_l = {bl}, B_r = {br}")));
    }
    let small = match shock {
        MhdShock::Two => setup.a < 1.0,
        MhdShock::Three => setup.a <= 1.0,
    };
    let mut c = if small {
        crossing_certificate(setup, 1, Direction::Backward, opts)?
    } else {
        crossing_certificate(setup, 4, Direction::Forward, opts)?
    };
    c.cover("shock", shock);
    c.cover("b_left", bl);
    c.cover("b_right", br);
    // F_1 = η(U|U_l) − η(U|U_r) along the forward 4-curve from U_r
    let (curve, _) = partial_ok(trace_rarefaction(setup.model(), &setup.u_r, 4, Direction::Forward, opts.span, opts.step))?;
    let mut t = Table::new(&["s", "v", "F1", "dF1_ds", "dF1_dv"]);
    let f1: Vec<f64> = curve
        .samples
        .iter()
        .map(|p| rel_eta(setup.model(), &p.state, &setup.u_l) - rel_eta(setup.model(), &p.state, &setup.u_r))
        .collect();
    for i in 1..curve.samples.len().saturating_sub(1) {
        let (a, b) = (&curve.samples[i - 1], &curve.samples[i + 1]);
        let ds = b.s - a.s;
        let dv = b.state[0] - a.state[0];
        let df = f1[i + 1] - f1[i - 1];
        t.rows.push(vec![curve.samples[i].s, curve.samples[i].state[0], f1[i], df / ds, df / dv]);
    }
    let eventually_negative = t.rows.last().is_some_and(|r| r[3] < 0.0);
    let f1_negative = f1.last().is_some_and(|&v| v < 0.0);
    c.cover("f1_derivative_eventually_negative", eventually_negative);
    c.cover("f1_becomes_negative", f1_negative);
    c.tables.insert("f1_forward_4".into(), t);
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactRange {
    pub e_left: f64,
    pub e_right: f64,
    pub ratio: f64,
}

impl ContactRange {
    /// Whether `a` lies in the range where no contraction is possible.
    pub fn forbidden(&self, a: f64) -> bool {
        if self.e_left > self.e_right {
            a < self.ratio || a > 1.0
        } else {
            a < 1.0 || a > self.ratio
        }
    }
}

fn euler_of(setup: &WeightedSetup) -> Result<Euler> {
    match ModelSpec::of(setup.model())? {
        ModelSpec::Euler { gamma, rho_min, e_min } => Ok(Euler::new(gamma)?.with_floors(rho_min, e_min)),
        _ => Err(Error::Precondition(format!("model {} is not the full Euler system", setup.model.name()))),
    }
}

/// Euler 2-contact: certificate over the weight ranges of the contact theorem.
pub fn euler_contact_range_certificate(setup: &WeightedSetup, opts: &NeighborOptions, seed: u64) -> Result<Certificate> {
    let m = euler_of(setup)?;
    let (vl, vr) = (m.velocity(&setup.u_l), m.velocity(&setup.u_r));
    let (pl, pr) = (m.pressure(&setup.u_l), m.pressure(&setup.u_r));
    let tol = 1e-8;
    if (vl - vr).abs() > tol * (1.0 + vl.abs()) || (pl - pr).abs() > tol * (1.0 + pl.abs()) || (setup.sigma - vl).abs() > tol * (1.0 + vl.abs()) {
        return Err(Error::Precondition(format!(
            "not a 2-contact: velocities {vl}, {vr}, pressures {pl}, {pr}, speed {}",
            setup.sigma
        )));
    }
    let range = ContactRange {
        e_left: m.internal_energy(&setup.u_l),
        e_right: m.internal_energy(&setup.u_r),
        ratio: m.internal_energy(&setup.u_r) / m.internal_energy(&setup.u_l),
    };
    let a = setup.a;
    if range.forbidden(a) {
        let (family, dir) = if a < 1.0 { (1, Direction::Backward) } else { (3, Direction::Forward) };
        let mut c = crossing_certificate(setup, family, dir, opts)?;
        c.cover("contact_range", range);
        return Ok(c);
    }
    let mut c = Certificate::new(CertificateKind::Summary, Verdict::NoViolationFound, Some(setup.record()?), setup.tol_violation());
    c.cover("contact_range", range);
    if (a - range.ratio).abs() <= 1e-9 * range.ratio {
        c.note("weight equals e_r/e_l; contraction is expected here and checks report evidence only");
    } else {
        c.note("weight outside the theorem's forbidden range; checks are heuristic");
    }
    let surf = sample_sigma_surface(setup, &SurfaceOptions { seed, ..Default::default() }, None)?;
    let h1 = check_h1_with(setup, &surf, &H1Options::default())?;
    let h2 = check_h2(setup, &surf, &H2Options { mode: H2Mode::Res, ..Default::default() })?;
    if h1.is_violation() || h2.is_violation() {
        c.verdict = Verdict::Violation;
    }
    c.max_value = [h1.max_value, h2.max_value].into_iter().flatten().reduce(f64::max);
    c.sub_certificates = vec![h1, h2];
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::state;
    use crate::models::Burgers;
    use std::sync::Arc;

    fn contact(a: f64) -> WeightedSetup {
        WeightedSetup::new(Arc::new(Euler::default()), state(&[1.0, 0.0, 2.0]), state(&[2.0, 0.0, 2.0]), 0.0, a, Some(2)).unwrap()
    }

    #[test]
    fn contact_forbidden_ranges() {
        let r = ContactRange { e_left: 2.0, e_right: 1.0, ratio: 0.5 };
        assert!(r.forbidden(0.3) && r.forbidden(1.5));
        assert!(!r.forbidden(0.5) && !r.forbidden(0.8) && !r.forbidden(1.0));
        let r = ContactRange { e_left: 1.0, e_right: 2.0, ratio: 2.0 };
        assert!(r.forbidden(0.9) && r.forbidden(2.5) && !r.forbidden(1.5));
    }

    #[test]
    fn contact_small_weight_witness() {
        let s = contact(0.3);
        let c = euler_contact_range_certificate(&s, &NeighborOptions::scaled(&s), 0).unwrap();
        assert_eq!(c.verdict, Verdict::Violation, "{:?}", c.notes);
        assert!(c.witness.as_ref().unwrap().value > 0.0);
        assert_eq!(c.revalidate().unwrap(), 1);
    }

    #[test]
    fn contact_large_weight_witness() {
        let s = contact(1.5);
        let c = euler_contact_range_certificate(&s, &NeighborOptions::scaled(&s), 0).unwrap();
        assert_eq!(c.verdict, Verdict::Violation, "{:?}", c.notes);
    }

    #[test]
    fn contact_rejects_shock() {
        let m = Euler::default();
        let ul = m.from_rho_v_p(1.0, 0.0, 1.0).unwrap();
        let (ur, sig, _) = crate::wave_curves::hugoniot_point(&m, &ul, 1, 0.5, 0.02, None).unwrap();
        let s = WeightedSetup::new(Arc::new(m), ul, ur, sig, 0.3, Some(1)).unwrap();
        assert!(matches!(euler_contact_range_certificate(&s, &NeighborOptions::default(), 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn burgers_has_no_neighbour() {
        let s = WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, 0.5, Some(1)).unwrap();
        assert!(matches!(neighbor_rarefaction_certificate(&s, 1, &NeighborOptions::default()), Err(Error::NotApplicable(_))));
        assert!(matches!(degenerate_neighbor_check(&s, 1, &NeighborOptions::default()), Err(Error::NotApplicable(_))));
    }
}
