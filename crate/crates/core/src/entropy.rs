//! System interface and relative-entropy algebra.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point of phase space. Components are model specific (see each model).
pub type State = DVector<f64>;

pub fn state(xs: &[f64]) -> State {
    DVector::from_column_slice(xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    GenuinelyNonlinear,
    LinearlyDegenerate,
}

/// Eigenvalues sorted ascending with matching unit eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<DVector<f64>>,
}

/// A hyperbolic system `u_t + f(u)_x = 0` together with an entropy pair.
///
/// Families are indexed from 1 to `dim()` in every public API.
pub trait SystemModel: Send + Sync {
    fn name(&self) -> &'static str;
    fn dim(&self) -> usize;
    fn component_names(&self) -> Vec<&'static str>;
    /// Model parameters, echoed into certificates.
    fn params(&self) -> serde_json::Value;

    fn flux(&self, u: &State) -> DVector<f64>;
    fn entropy(&self, u: &State) -> f64;
    fn entropy_flux(&self, u: &State) -> f64;

    fn flux_jacobian(&self, u: &State) -> DMatrix<f64> {
        fd_jacobian(|x| self.flux(x), u)
    }
    fn entropy_gradient(&self, u: &State) -> DVector<f64> {
        fd_gradient(|x| self.entropy(x), u)
    }
    fn entropy_hessian(&self, u: &State) -> DMatrix<f64> {
        let j = fd_jacobian(|x| self.entropy_gradient(x), u);
        (&j + j.transpose()) * 0.5
    }

    /// Eigen-structure with the model's sign convention. Fails where the
    /// system loses strict hyperbolicity.
    fn eigen(&self, u: &State) -> Result<Eigen>;

    /// Strict interior of the state domain.
    fn in_domain(&self, u: &State) -> bool;
    /// Closure where entropy evaluation is still permitted.
    fn in_extended_domain(&self, u: &State) -> bool {
        self.in_domain(u)
    }
    fn field_kind(&self, family: usize) -> FieldKind;
}

/// Central-difference step used by every finite-difference fallback.
pub fn fd_step(x: f64) -> f64 {
    1e-6 * (1.0 + x.abs())
}

pub fn fd_gradient(f: impl Fn(&State) -> f64, u: &State) -> DVector<f64> {
    let n = u.len();
    let mut g = DVector::zeros(n);
    let mut x = u.clone();
    for k in 0..n {
        let h = fd_step(u[k]);
        x[k] = u[k] + h;
        let fp = f(&x);
        x[k] = u[k] - h;
        let fm = f(&x);
        x[k] = u[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    g
}

pub fn fd_jacobian(f: impl Fn(&State) -> DVector<f64>, u: &State) -> DMatrix<f64> {
    let n = u.len();
    let m = f(u).len();
    let mut jac = DMatrix::zeros(m, n);
    let mut x = u.clone();
    for k in 0..n {
        let h = fd_step(u[k]);
        x[k] = u[k] + h;
        let fp = f(&x);
        x[k] = u[k] - h;
        let fm = f(&x);
        x[k] = u[k];
        jac.set_column(k, &((fp - fm) / (2.0 * h)));
    }
    jac
}

/// Checks dimension and finiteness.
pub fn validate_state(model: &dyn SystemModel, u: &State) -> Result<()> {
    if u.len() != model.dim() {
        return Err(Error::Invalid(format!(
            "state has {} components, {} expects {}",
            u.len(),
            model.name(),
            model.dim()
        )));
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid(format!("non-finite state component in {u:?}")));
    }
    Ok(())
}

fn require_interior(model: &dyn SystemModel, v: &State, what: &str) -> Result<()> {
    validate_state(model, v)?;
    if !model.in_domain(v) {
        return Err(Error::Domain(format!(
            "{what} = {:?} is not strictly inside the {} domain",
            v.as_slice(),
            model.name()
        )));
    }
    Ok(())
}

fn require_extended(model: &dyn SystemModel, u: &State, what: &str) -> Result<()> {
    validate_state(model, u)?;
    if !model.in_extended_domain(u) {
        return Err(Error::Domain(format!(
            "{what} = {:?} is outside the extended {} domain",
            u.as_slice(),
            model.name()
        )));
    }
    Ok(())
}

/// Gradient of eigenvalue `family` by central differences.
pub fn eigenvalue_gradient(model: &dyn SystemModel, u: &State, family: usize) -> Result<DVector<f64>> {
    let n = u.len();
    let mut g = DVector::zeros(n);
    let mut x = u.clone();
    for k in 0..n {
        let h = fd_step(u[k]);
        x[k] = u[k] + h;
        let lp = model.eigen(&x)?.values[family - 1];
        x[k] = u[k] - h;
        let lm = model.eigen(&x)?.values[family - 1];
        x[k] = u[k];
        g[k] = (lp - lm) / (2.0 * h);
    }
    Ok(g)
}

/// `∇λ_i · r_i` at `u`; positive for genuinely nonlinear fields under the
/// sign convention of every bundled model, zero for degenerate ones.
pub fn nonlinearity(model: &dyn SystemModel, u: &State, family: usize) -> Result<f64> {
    let e = model.eigen(u)?;
    Ok(eigenvalue_gradient(model, u, family)?.dot(&e.vectors[family - 1]))
}

/// Relative entropy without domain checks.
pub fn rel_eta(model: &dyn SystemModel, u: &State, v: &State) -> f64 {
    model.entropy(u) - model.entropy(v) - model.entropy_gradient(v).dot(&(u - v))
}

/// Relative entropy flux without domain checks.
pub fn rel_q(model: &dyn SystemModel, u: &State, v: &State) -> f64 {
    model.entropy_flux(u)
        - model.entropy_flux(v)
        - model.entropy_gradient(v).dot(&(model.flux(u) - model.flux(v)))
}

/// `η(u|v) = η(u) − η(v) − ∇η(v)·(u−v)`.
pub fn relative_entropy(model: &dyn SystemModel, u: &State, v: &State) -> Result<f64> {
    require_interior(model, v, "v")?;
    require_extended(model, u, "u")?;
    Ok(rel_eta(model, u, v))
}

/// `q(u;v) = q(u) − q(v) − ∇η(v)·(f(u)−f(v))`.
pub fn relative_entropy_flux(model: &dyn SystemModel, u: &State, v: &State) -> Result<f64> {
    require_interior(model, v, "v")?;
    require_extended(model, u, "u")?;
    Ok(rel_q(model, u, v))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativePair {
    pub value: f64,
    pub flux_value: f64,
}

pub fn relative_pair(model: &dyn SystemModel, u: &State, v: &State) -> Result<RelativePair> {
    Ok(RelativePair {
        value: relative_entropy(model, u, v)?,
        flux_value: relative_entropy_flux(model, u, v)?,
    })
}

/// Both sides of the three-point identities for η, q and the combined
/// `q − ση` form. Each side is assembled from its own terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TriangleSides {
    pub lhs_eta: f64,
    pub rhs_eta: f64,
    pub lhs_q: f64,
    pub rhs_q: f64,
    pub lhs_metric: f64,
    pub rhs_metric: f64,
}

impl TriangleSides {
    /// Largest relative mismatch, scaled by the magnitude of the terms.
    pub fn max_relative_gap(&self, scale: f64) -> f64 {
        let s = scale.max(1.0);
        [
            (self.lhs_eta - self.rhs_eta).abs(),
            (self.lhs_q - self.rhs_q).abs(),
            (self.lhs_metric - self.rhs_metric).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
            / s
    }
}

pub fn triangle_identities(
    model: &dyn SystemModel,
    u: &State,
    v: &State,
    w: &State,
    sigma: f64,
) -> Result<TriangleSides> {
    require_interior(model, v, "v")?;
    require_interior(model, w, "w")?;
    require_extended(model, u, "u")?;
    let g_vw = model.entropy_gradient(w) - model.entropy_gradient(v);
    let e_uw = rel_eta(model, u, w);
    let e_wv = rel_eta(model, w, v);
    let e_uv = rel_eta(model, u, v);
    let q_uw = rel_q(model, u, w);
    let q_wv = rel_q(model, w, v);
    let q_uv = rel_q(model, u, v);
    let fw_fu = model.flux(w) - model.flux(u);
    let w_u = w - u;
    Ok(TriangleSides {
        lhs_eta: e_uw + e_wv,
        rhs_eta: e_uv + g_vw.dot(&w_u),
        lhs_q: q_uw + q_wv,
        rhs_q: q_uv + g_vw.dot(&fw_fu),
        lhs_metric: q_uv - sigma * e_uv,
        rhs_metric: (q_uw - sigma * e_uw) + (q_wv - sigma * e_wv)
            - g_vw.dot(&(&fw_fu - &w_u * sigma)),
    })
}

/// Side of a point from which a profile value is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A spatial profile `x ↦ u(x)` that equals `left` far to the left and
/// `right` far to the right of its perturbation support.
pub trait Profile {
    fn value(&self, x: f64, side: Side) -> State;
    /// Interval outside which the profile equals the far-field states.
    fn support(&self) -> (f64, f64);
}

/// Step `u_l` for `x < at`, `u_r` for `x > at`.
#[derive(Debug, Clone)]
pub struct StepProfile {
    pub u_l: State,
    pub u_r: State,
    pub at: f64,
}

impl Profile for StepProfile {
    fn value(&self, x: f64, side: Side) -> State {
        let left = x < self.at || (x == self.at && side == Side::Left);
        if left {
            self.u_l.clone()
        } else {
            self.u_r.clone()
        }
    }
    fn support(&self) -> (f64, f64) {
        (self.at.min(0.0), self.at.max(0.0))
    }
}

/// Piecewise-constant finite-volume profile on uniform cells.
#[derive(Debug, Clone)]
pub struct CellProfile<'a> {
    pub x_min: f64,
    pub dx: f64,
    pub cells: &'a [State],
}

impl CellProfile<'_> {
    fn index(&self, x: f64, side: Side) -> usize {
        let t = (x - self.x_min) / self.dx;
        let k = t.floor();
        let mut i = k as isize;
        if side == Side::Left && (t - k).abs() < 1e-12 {
            i -= 1;
        }
        i.clamp(0, self.cells.len() as isize - 1) as usize
    }
    pub fn faces(&self) -> Vec<f64> {
        (0..=self.cells.len())
            .map(|i| self.x_min + i as f64 * self.dx)
            .collect()
    }
}

impl Profile for CellProfile<'_> {
    fn value(&self, x: f64, side: Side) -> State {
        self.cells[self.index(x, side)].clone()
    }
    fn support(&self) -> (f64, f64) {
        (self.x_min, self.x_min + self.dx * self.cells.len() as f64)
    }
}

/// `E_a = ∫_{x<h} η(u|u_l) + a ∫_{x>h} η(u|u_r)` by composite Simpson on
/// `grid` (strictly increasing nodes), with the cell holding `h` split at `h`.
pub fn pseudo_distance(
    model: &dyn SystemModel,
    a: f64,
    u_l: &State,
    u_r: &State,
    profile: &dyn Profile,
    grid: &[f64],
    h: f64,
) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Invalid(format!("weight a must be positive, got {a}")));
    }
    require_interior(model, u_l, "u_l")?;
    require_interior(model, u_r, "u_r")?;
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Grid("grid must have at least two increasing nodes".into()));
    }
    let (lo, hi) = profile.support();
    let need_lo = lo.min(h);
    let need_hi = hi.max(h);
    let (g0, g1) = (grid[0], grid[grid.len() - 1]);
    let slack = 1e-12 * (1.0 + g0.abs().max(g1.abs()));
    if g0 > need_lo + slack || g1 < need_hi - slack {
        return Err(Error::Grid(format!(
            "grid [{g0}, {g1}] does not cover [{need_lo}, {need_hi}]"
        )));
    }
    let density = |x: f64, side: Side| -> f64 {
        let u = profile.value(x, side);
        let left = x < h || (x == h && side == Side::Left);
        if left {
            rel_eta(model, &u, u_l)
        } else {
            a * rel_eta(model, &u, u_r)
        }
    };
    let simpson = |x0: f64, x1: f64| -> f64 {
        let m = 0.5 * (x0 + x1);
        (x1 - x0) / 6.0 * (density(x0, Side::Right) + 4.0 * density(m, Side::Right) + density(x1, Side::Left))
    };
    let mut total = 0.0;
    for w in grid.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x0 < h && h < x1 {
            total += simpson(x0, h) + simpson(h, x1);
        } else {
            total += simpson(x0, x1);
        }
    }
    Ok(total)
}

/// Worst mismatches of the three-point identities and of `∇q = ∇η ∇f` on
/// random states from a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub model: String,
    pub seed: u64,
    pub triples: usize,
    pub fd_states: usize,
    /// Relative to `1 + |lhs| + |rhs|`.
    pub max_eta_gap: f64,
    pub max_q_gap: f64,
    pub max_metric_gap: f64,
    /// Relative to `1 + |∇η ∇f|_∞`.
    pub max_compatibility_gap: f64,
    pub identity_tolerance: f64,
    pub compatibility_tolerance: f64,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.max_eta_gap.max(self.max_q_gap).max(self.max_metric_gap) <= self.identity_tolerance
            && self.max_compatibility_gap <= self.compatibility_tolerance
    }
}

/// Uniform samples of the box `[lo, hi]` that lie in the model's domain.
pub fn sample_domain_states(model: &dyn SystemModel, lo: &[f64], hi: &[f64], count: usize, seed: u64) -> Result<Vec<State>> {
    use rand::{Rng, SeedableRng};
    let n = model.dim();
    if lo.len() != n || hi.len() != n || lo.iter().zip(hi).any(|(l, h)| !(h > l)) {
        return Err(Error::Invalid(format!("sampling box needs {n} components with lo < hi")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0usize;
    while out.len() < count {
        tries += 1;
        if tries > 1000 * count.max(1) {
            return Err(Error::Domain("sampling box hardly intersects the domain".into()));
        }
        let u = DVector::from_iterator(n, (0..n).map(|k| rng.random_range(lo[k]..hi[k])));
        if model.in_domain(&u) {
            out.push(u);
        }
    }
    Ok(out)
}

pub fn identity_suite(model: &dyn SystemModel, lo: &[f64], hi: &[f64], triples: usize, fd_states: usize, seed: u64) -> Result<IdentityReport> {
    use rand::{Rng, SeedableRng};
    let pts = sample_domain_states(model, lo, hi, 3 * triples + fd_states, seed)?;
    let mut speeds = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let spread = |a: f64, b: f64| (a - b).abs() / (1.0 + a.abs() + b.abs());
    let (mut ge, mut gq, mut gm) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..triples {
        let (u, v, w) = (&pts[3 * k], &pts[3 * k + 1], &pts[3 * k + 2]);
        let sigma: f64 = speeds.random_range(-3.0..3.0);
        let t = triangle_identities(model, u, v, w, sigma)?;
        ge = ge.max(spread(t.lhs_eta, t.rhs_eta));
        gq = gq.max(spread(t.lhs_q, t.rhs_q));
        gm = gm.max(spread(t.lhs_metric, t.rhs_metric));
    }
    let mut gc = 0.0f64;
    for u in &pts[3 * triples..] {
        let fd = fd_gradient(|x| model.entropy_flux(x), u);
        let exact = model.flux_jacobian(u).transpose() * model.entropy_gradient(u);
        gc = gc.max((fd - &exact).amax() / (1.0 + exact.amax()));
    }
    Ok(IdentityReport {
        model: model.name().to_string(),
        seed,
        triples,
        fd_states,
        max_eta_gap: ge,
        max_q_gap: gq,
        max_metric_gap: gm,
        max_compatibility_gap: gc,
        identity_tolerance: 1e-10,
        compatibility_tolerance: 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Burgers;
    use approx::assert_abs_diff_eq;

    #[test]
    fn burgers_relative_quantities() {
        let m = Burgers;
        let one = state(&[1.0]);
        assert_eq!(relative_entropy(&m, &one, &one).unwrap(), 0.0);
        assert_abs_diff_eq!(relative_entropy(&m, &state(&[2.0]), &one).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(
            relative_entropy_flux(&m, &state(&[0.5]), &state(&[0.0])).unwrap(),
            1.0 / 24.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            relative_entropy_flux(&m, &state(&[0.5]), &one).unwrap(),
            1.0 / 12.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn burgers_triangle_closed_form() {
        let m = Burgers;
        let t = triangle_identities(&m, &state(&[2.0]), &state(&[1.0]), &state(&[0.5]), 0.3).unwrap();
        assert_abs_diff_eq!(t.lhs_eta, t.rhs_eta, epsilon = 1e-12);
        assert_abs_diff_eq!(t.lhs_q, t.rhs_q, epsilon = 1e-12);
        assert_abs_diff_eq!(t.lhs_metric, t.rhs_metric, epsilon = 1e-12);
        let z = triangle_identities(&m, &state(&[1.0]), &state(&[1.0]), &state(&[1.0]), 0.3).unwrap();
        assert_eq!([z.lhs_eta, z.rhs_eta, z.lhs_q, z.rhs_q], [0.0; 4]);
    }

    #[test]
    fn pseudo_distance_of_steps() {
        let m = Burgers;
        let (ul, ur) = (state(&[1.0]), state(&[0.0]));
        let grid: Vec<f64> = (0..=50).map(|i| -2.0 + 0.1 * i as f64).collect();
        let same = StepProfile { u_l: ul.clone(), u_r: ur.clone(), at: 0.0 };
        assert_eq!(pseudo_distance(&m, 1.0, &ul, &ur, &same, &grid, 0.0).unwrap(), 0.0);
        let shifted = StepProfile { u_l: ul.clone(), u_r: ur.clone(), at: 1.0 };
        let e = pseudo_distance(&m, 1.0, &ul, &ur, &shifted, &grid, 0.0).unwrap();
        assert_abs_diff_eq!(e, 0.5, epsilon = 1e-13);
        let e = pseudo_distance(&m, 1.0, &ul, &ur, &shifted, &grid, 1.0).unwrap();
        assert_abs_diff_eq!(e, 0.0, epsilon = 1e-14);
        // split exactly at an off-node shift
        let e = pseudo_distance(&m, 2.0, &ul, &ur, &shifted, &grid, 0.55).unwrap();
        assert_abs_diff_eq!(e, 2.0 * 0.45 * 0.5, epsilon = 1e-13);
    }

    #[test]
    fn pseudo_distance_rejects_short_grid() {
        let m = Burgers;
        let (ul, ur) = (state(&[1.0]), state(&[0.0]));
        let p = StepProfile { u_l: ul.clone(), u_r: ur.clone(), at: 2.0 };
        let grid = [-1.0, 0.0, 1.0];
        assert!(matches!(
            pseudo_distance(&m, 1.0, &ul, &ur, &p, &grid, 0.0),
            Err(Error::Grid(_))
        ));
    }

    #[test]
    fn identity_suite_on_burgers() {
        let r = identity_suite(&Burgers, &[-2.0], &[2.0], 200, 20, 7).unwrap();
        assert!(r.passed(), "{r:?}");
        assert_eq!(r, identity_suite(&Burgers, &[-2.0], &[2.0], 200, 20, 7).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let m = Burgers;
        assert!(relative_entropy(&m, &state(&[1.0, 2.0]), &state(&[1.0])).is_err());
    }
}
