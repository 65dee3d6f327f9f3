use nalgebra::{DMatrix, DVector};

use crate::entropy::{Eigen, FieldKind, State, SystemModel};
use crate::error::{Error, Result};

/// Planar isentropic MHD in Lagrangian coordinates with `p(v) = v^{-γ}`.
///
/// Conservative variables `U = (v, q, u, w)` with `q = vB`; `β` is the
/// constant normal field. Eigen-structure is computed in `W = (v, B, u, w)`
/// and mapped back through `dq = B dv + v dB`.
#[derive(Debug, Clone, Copy)]
pub struct Mhd {
    pub gamma: f64,
    pub beta: f64,
    pub b_floor: f64,
    pub v_min: f64,
}

impl Default for Mhd {
    fn default() -> Self {
        Self { gamma: 5.0 / 3.0, beta: 1.0, b_floor: 1e-8, v_min: 1e-10 }
    }
}

impl Mhd {
    pub fn new(gamma: f64, beta: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Invalid("beta must be a nonzero finite number".into()));
        }
        Ok(Self { gamma, beta, ..Default::default() })
    }

    pub fn pressure(&self, v: f64) -> f64 {
        v.powf(-self.gamma)
    }

    /// `c² = −p'(v)`.
    pub fn c2(&self, v: f64) -> f64 {
        self.gamma * v.powf(-self.gamma - 1.0)
    }

    pub fn magnetic(&self, u: &State) -> f64 {
        u[1] / u[0]
    }

    /// `(v, B, u, w)` to conservative `(v, vB, u, w)`.
    pub fn from_w(&self, w: &[f64; 4]) -> State {
        DVector::from_vec(vec![w[0], w[0] * w[1], w[2], w[3]])
    }

    pub fn to_w(&self, u: &State) -> [f64; 4] {
        [u[0], u[1] / u[0], u[2], u[3]]
    }

    /// The quasilinear matrix `A(W)` of `W_t + A W_x = 0`.
    pub fn quasilinear_matrix(&self, w: &[f64; 4]) -> DMatrix<f64> {
        let (v, b) = (w[0], w[1]);
        let c2 = self.c2(v);
        let be = self.beta;
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, b / v, -be / v, //
                -c2, b, 0.0, 0.0, //
                0.0, -be, 0.0, 0.0,
            ],
        )
    }

    /// Eigenvalues and eigenvectors in `W` variables following the closed
    /// forms; vectors are not normalized and carry the `u`-component `√α`.
    pub fn eigen_w(&self, w: &[f64; 4]) -> Result<(Vec<f64>, Vec<DVector<f64>>)> {
        let (v, b) = (w[0], w[1]);
        if !(v > 0.0) {
            return Err(Error::Domain(format!("specific volume must be positive, got {v}")));
        }
        if b.abs() < self.b_floor {
            return Err(Error::Degenerate(format!("|B| = {} below floor {}", b.abs(), self.b_floor)));
        }
        let c2 = self.c2(v);
        let (am, ap) = mhd_alpha(v, b, self.beta, self.gamma)?;
        let be = self.beta;
        // α − c² in the cancellation-free form
        let s = (b * b + be * be) / v - c2;
        let root = (s * s + 4.0 * b * b * c2 / v).sqrt();
        let ap_c = 0.5 * (s + root);
        let am_c = if s < 0.0 { 0.5 * (s - root) } else { -2.0 * b * b * c2 / v / (s + root) };
        let (sp, sm) = (ap.sqrt(), am.sqrt());
        let r1 = DVector::from_vec(vec![1.0, -ap_c / b, sp, -be * ap_c / (b * sp)]);
        let r2 = DVector::from_vec(vec![1.0, -am_c / b, sm, -be * am_c / (b * sm)]);
        let r3 = DVector::from_vec(vec![-1.0, am_c / b, sm, -be * am_c / (b * sm)]);
        let r4 = DVector::from_vec(vec![-1.0, ap_c / b, sp, -be * ap_c / (b * sp)]);
        Ok((vec![-sp, -sm, sm, sp], vec![r1, r2, r3, r4]))
    }
}

/// Roots `α_− < α_+` in `λ²` of `λ⁴ − ((B²+β²)/v + c²)λ² + (β²/v)c² = 0`.
pub fn mhd_alpha(v: f64, b: f64, beta: f64, gamma: f64) -> Result<(f64, f64)> {
    if !(v > 0.0) {
        return Err(Error::Domain(format!("specific volume must be positive, got {v}")));
    }
    let c2 = gamma * v.powf(-gamma - 1.0);
    let t = (b * b + beta * beta) / v + c2;
    let d = (b * b + beta * beta) / v - c2;
    // discriminant t² − 4β²c²/v written as a sum of squares
    let disc = (d * d + 4.0 * b * b * c2 / v).sqrt();
    let ap = 0.5 * (t + disc);
    let am = beta * beta * c2 / v / ap;
    Ok((am, ap))
}

/// Eigenvalues and unit eigenvectors in conservative variables.
pub fn mhd_eigen(model: &Mhd, u: &State) -> Result<Eigen> {
    let w = model.to_w(u);
    let (values, rw) = model.eigen_w(&w)?;
    let (v, b) = (w[0], w[1]);
    let vectors = rw
        .into_iter()
        .map(|r| DVector::from_vec(vec![r[0], b * r[0] + v * r[1], r[2], r[3]]).normalize())
        .collect();
    Ok(Eigen { values, vectors })
}

impl SystemModel for Mhd {
    fn name(&self) -> &'static str {
        "mhd"
    }
    fn dim(&self) -> usize {
        4
    }
    fn component_names(&self) -> Vec<&'static str> {
        vec!["v", "q", "u", "w"]
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "gamma": self.gamma, "beta": self.beta, "b_floor": self.b_floor })
    }
    fn flux(&self, u: &State) -> DVector<f64> {
        let (v, q) = (u[0], u[1]);
        DVector::from_vec(vec![
            -u[2],
            -self.beta * u[3],
            self.pressure(v) + q * q / (2.0 * v * v),
            -self.beta * q / v,
        ])
    }
    fn entropy(&self, u: &State) -> f64 {
        let v = u[0].max(self.v_min);
        let q = u[1];
        v.powf(1.0 - self.gamma) / (self.gamma - 1.0) + 0.5 * (u[2] * u[2] + u[3] * u[3]) + q * q / (2.0 * v)
    }
    fn entropy_flux(&self, u: &State) -> f64 {
        let v = u[0].max(self.v_min);
        let q = u[1];
        u[2] * (self.pressure(v) + q * q / (2.0 * v * v)) - self.beta * u[3] * q / v
    }
    fn entropy_gradient(&self, u: &State) -> DVector<f64> {
        let v = u[0].max(self.v_min);
        let q = u[1];
        DVector::from_vec(vec![-self.pressure(v) - q * q / (2.0 * v * v), q / v, u[2], u[3]])
    }
    fn entropy_hessian(&self, u: &State) -> DMatrix<f64> {
        let v = u[0].max(self.v_min);
        let q = u[1];
        let h11 = self.c2(v) + q * q / v.powi(3);
        let h12 = -q / (v * v);
        DMatrix::from_row_slice(
            4,
            4,
            &[
                h11, h12, 0.0, 0.0, //
                h12, 1.0 / v, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )
    }
    fn flux_jacobian(&self, u: &State) -> DMatrix<f64> {
        let (v, q) = (u[0], u[1]);
        let be = self.beta;
        DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, -be, //
                -self.c2(v) - q * q / v.powi(3), q / (v * v), 0.0, 0.0, //
                be * q / (v * v), -be / v, 0.0, 0.0,
            ],
        )
    }
    /// Unit eigenvectors with positive `u`-component, matching the closed
    /// forms (`r_1`, `r_2` have positive `v`-component, `r_3`, `r_4` negative).
    fn eigen(&self, u: &State) -> Result<Eigen> {
        mhd_eigen(self, u)
    }
    fn in_domain(&self, u: &State) -> bool {
        u[0] > self.v_min && (u[1] / u[0]).abs() >= self.b_floor && u.iter().all(|x| x.is_finite())
    }
    fn in_extended_domain(&self, u: &State) -> bool {
        u[0] > 0.0 && u.iter().all(|x| x.is_finite())
    }
    fn field_kind(&self, _family: usize) -> FieldKind {
        FieldKind::GenuinelyNonlinear
    }
}
