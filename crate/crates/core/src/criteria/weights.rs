use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certificate::{Certificate, CertificateKind, Table, Verdict};
use super::checks::{check_h1, check_h2, H2Options};
use super::surface::{sample_sigma_surface, SigmaSurface, SurfaceOptions};
use super::WeightedSetup;
use crate::error::{Error, Result};
use crate::wave_curves::{partial_ok, speed_derivative_range, trace_hugoniot_with, BaseSide, HugoniotOptions};
use crate::entropy::rel_eta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RangeSide {
    /// Weights `0 < a ≤ a_*`.
    Below,
    /// Weights `a ≥ a^*`.
    Above,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightRangeOptions {
    pub surface: SurfaceOptions,
    pub h2: H2Options,
    /// Relative bracket width at which the bisection stops.
    pub rel_tol: f64,
    /// Maximal number of bisection trials.
    pub budget: usize,
}

impl Default for WeightRangeOptions {
    fn default() -> Self {
        Self { surface: SurfaceOptions::default(), h2: H2Options::strong(), rel_tol: 1e-3, budget: 40 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightVerdict {
    pub a: f64,
    pub pass: bool,
    pub r_a_diameter: f64,
    /// Every ray hit the surface, so the diameter is not a lower bound only.
    pub surface_closed: bool,
    pub h1: Certificate,
    pub h2: Certificate,
}

/// Largest distance between two surface samples. Only a lower bound when
/// some rays left the box or the domain before crossing.
pub fn r_a_diameter(surface: &SigmaSurface) -> f64 {
    let pts = &surface.hits;
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((&pts[i].state - &pts[j].state).norm());
        }
    }
    d
}

fn verdict_at(setup: &WeightedSetup, a: f64, opts: &WeightRangeOptions) -> Result<WeightVerdict> {
    let s = setup.with_weight(a)?;
    let surf = sample_sigma_surface(&s, &opts.surface, None)?;
    let h1 = check_h1(&s, &surf)?;
    let h2 = check_h2(&s, &surf, &opts.h2)?;
    let pass = !h1.is_violation() && !h2.is_violation();
    let surface_closed = surf.box_exits == 0 && surf.domain_exits == 0;
    Ok(WeightVerdict { a, pass, r_a_diameter: r_a_diameter(&surf), surface_closed, h1, h2 })
}

/// Checks `(H1)` and `(H2)`/`(H2*)` at every weight independently.
pub fn weight_sweep(setup: &WeightedSetup, weights: &[f64], opts: &WeightRangeOptions) -> Result<Vec<WeightVerdict>> {
    weights.par_iter().map(|&a| verdict_at(setup, a, opts)).collect()
}

/// Monotone speed and growing relative entropy on the extremal Hugoniot
/// branch through the base state of the shock.
fn extremal_hypotheses(setup: &WeightedSetup) -> Result<Table> {
    let n = setup.model.dim();
    let family = setup.family.ok_or_else(|| Error::Precondition("shock family must be given".into()))?;
    let (base, side) = if family == 1 {
        (&setup.u_l, BaseSide::Left)
    } else if family == n {
        (&setup.u_r, BaseSide::Right)
    } else {
        return Err(Error::Precondition(format!("family {family} is not extremal")));
    };
    let span = 1.5 * (&setup.u_l - &setup.u_r).norm();
    let ho = HugoniotOptions::new(span, span / 60.0).side(side);
    let (curve, _) = partial_ok(trace_hugoniot_with(setup.model(), base, family, &ho))?;
    let (lo, hi) = speed_derivative_range(&curve)?;
    let liu = if side == BaseSide::Left { hi < 0.0 } else { lo > 0.0 };
    let eta: Vec<f64> = curve.samples.iter().map(|p| rel_eta(setup.model(), base, &p.state)).collect();
    let growing = eta.windows(2).all(|w| w[1] > w[0]);
    if !liu || !growing {
        return Err(Error::Precondition(format!(
            "extremal hypotheses fail on the traced curve: speed slope in [{lo:e}, {hi:e}], entropy growth {growing}"
        )));
    }
    let mut t = Table::new(&["s", "speed", "rel_entropy"]);
    t.rows = curve.samples.iter().zip(&eta).map(|(p, e)| vec![p.s, p.speed, *e]).collect();
    Ok(t)
}

/// Log-bisection for the end of the weight range on which both checks pass.
pub fn find_weight_range(setup: &WeightedSetup, side: RangeSide, bracket: (f64, f64), opts: &WeightRangeOptions) -> Result<Certificate> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::Invalid(format!("weight bracket ({lo}, {hi}) must satisfy 0 < lo < hi")));
    }
    let hyp = extremal_hypotheses(setup)?;
    let mut trials = Vec::new();
    let ends = weight_sweep(setup, &[lo, hi], opts)?;
    let (pass_lo, pass_hi) = (ends[0].pass, ends[1].pass);
    let expect = match side {
        RangeSide::Below => pass_lo && !pass_hi,
        RangeSide::Above => !pass_lo && pass_hi,
    };
    if !expect {
        return Err(Error::Bracket(format!("verdicts at {lo} and {hi} are pass={pass_lo} and pass={pass_hi}")));
    }
    trials.extend(ends);
    let mut used = 0;
    while hi / lo - 1.0 > opts.rel_tol && used < opts.budget {
        let mid = (lo * hi).sqrt();
        let v = verdict_at(setup, mid, opts)?;
        let passes = v.pass;
        trials.push(v);
        used += 1;
        match (side, passes) {
            (RangeSide::Below, true) | (RangeSide::Above, false) => lo = mid,
            _ => hi = mid,
        }
    }
    let edge = match side {
        RangeSide::Below => lo,
        RangeSide::Above => hi,
    };
    let mut c = Certificate::new(CertificateKind::WeightRange, Verdict::NoViolationFound, Some(setup.with_weight(edge)?.record()?), setup.tol_violation());
    c.cover("side", side);
    c.cover("bracket", [bracket.0, bracket.1]);
    c.cover("edge", edge);
    c.cover("final_bracket", [lo, hi]);
    c.cover("trials", trials.len());
    c.cover("converged", hi / lo - 1.0 <= opts.rel_tol);
    let mut t = Table::new(&["a", "pass", "max_d_sm", "max_d_rh", "d_rh_evaluated", "r_a_diameter", "surface_closed"]);
    trials.sort_by(|x, y| x.a.total_cmp(&y.a));
    for v in &trials {
        t.rows.push(vec![
            v.a,
            f64::from(u8::from(v.pass)),
            v.h1.max_value.unwrap_or(0.0),
            v.h2.max_value.unwrap_or(0.0),
            v.h2.coverage.get("evaluated_discontinuities").and_then(|x| x.as_f64()).unwrap_or(0.0),
            v.r_a_diameter,
            f64::from(u8::from(v.surface_closed)),
        ]);
    }
    c.tables.insert("trials".into(), t);
    c.tables.insert("extremal_curve".into(), hyp);
    c.note("the edge is empirical: passing weights record absence of violations on the searched sets only");
    for v in trials {
        c.sub_certificates.push(v.h1);
        c.sub_certificates.push(v.h2);
    }
    Ok(c)
}
