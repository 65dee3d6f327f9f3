use nalgebra::{DMatrix, DVector};

use crate::entropy::{Eigen, FieldKind, State, SystemModel};
use crate::error::{Error, Result};

/// Isentropic gas dynamics in `(ρ, m)`, `p = κρ^γ`.
#[derive(Debug, Clone, Copy)]
pub struct IsentropicEuler {
    pub gamma: f64,
    pub kappa: f64,
    pub rho_min: f64,
}

impl Default for IsentropicEuler {
    fn default() -> Self {
        Self { gamma: 1.4, kappa: 1.0, rho_min: 1e-10 }
    }
}

impl IsentropicEuler {
    pub fn new(gamma: f64, kappa: f64) -> Result<Self> {
        if !(gamma > 1.0) || !(kappa > 0.0) {
            return Err(Error::Invalid(format!("need gamma>1, kappa>0 (got {gamma}, {kappa})")));
        }
        Ok(Self { gamma, kappa, ..Default::default() })
    }
    pub fn pressure(&self, rho: f64) -> f64 {
        self.kappa * rho.powf(self.gamma)
    }
    pub fn sound_speed(&self, rho: f64) -> f64 {
        (self.gamma * self.kappa * rho.powf(self.gamma - 1.0)).sqrt()
    }
    fn rho(&self, u: &State) -> f64 {
        u[0].max(self.rho_min)
    }
}

impl SystemModel for IsentropicEuler {
    fn name(&self) -> &'static str {
        "isentropic-euler"
    }
    fn dim(&self) -> usize {
        2
    }
    fn component_names(&self) -> Vec<&'static str> {
        vec!["rho", "m"]
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "gamma": self.gamma, "kappa": self.kappa })
    }
    fn flux(&self, u: &State) -> DVector<f64> {
        let rho = self.rho(u);
        let m = u[1];
        DVector::from_vec(vec![m, m * m / rho + self.pressure(rho)])
    }
    fn entropy(&self, u: &State) -> f64 {
        let rho = self.rho(u);
        let m = u[1];
        m * m / (2.0 * rho) + self.kappa * rho.powf(self.gamma) / (self.gamma - 1.0)
    }
    fn entropy_flux(&self, u: &State) -> f64 {
        let rho = self.rho(u);
        let m = u[1];
        let g = self.gamma;
        m * m * m / (2.0 * rho * rho) + g * self.kappa / (g - 1.0) * rho.powf(g - 1.0) * m
    }
    fn flux_jacobian(&self, u: &State) -> DMatrix<f64> {
        let rho = self.rho(u);
        let v = u[1] / rho;
        let c2 = self.sound_speed(rho).powi(2);
        DMatrix::from_row_slice(2, 2, &[0.0, 1.0, c2 - v * v, 2.0 * v])
    }
    fn entropy_gradient(&self, u: &State) -> DVector<f64> {
        let rho = self.rho(u);
        let v = u[1] / rho;
        let g = self.gamma;
        DVector::from_vec(vec![
            -0.5 * v * v + g * self.kappa / (g - 1.0) * rho.powf(g - 1.0),
            v,
        ])
    }
    fn entropy_hessian(&self, u: &State) -> DMatrix<f64> {
        let rho = self.rho(u);
        let m = u[1];
        let g = self.gamma;
        let a11 = m * m / rho.powi(3) + self.kappa * g * rho.powf(g - 2.0);
        let a12 = -m / (rho * rho);
        DMatrix::from_row_slice(2, 2, &[a11, a12, a12, 1.0 / rho])
    }
    /// `r_1 ∝ −(1, v−c)`, `r_2 ∝ (1, v+c)`: oriented so that `∇λ_i·r_i > 0`.
    fn eigen(&self, u: &State) -> Result<Eigen> {
        if !self.in_domain(u) {
            return Err(Error::Domain(format!("isentropic state {:?}", u.as_slice())));
        }
        let rho = u[0];
        let v = u[1] / rho;
        let c = self.sound_speed(rho);
        let r1 = -DVector::from_vec(vec![1.0, v - c]).normalize();
        let r2 = DVector::from_vec(vec![1.0, v + c]).normalize();
        Ok(Eigen { values: vec![v - c, v + c], vectors: vec![r1, r2] })
    }
    fn in_domain(&self, u: &State) -> bool {
        u[0] > self.rho_min && u[1].is_finite()
    }
    fn in_extended_domain(&self, u: &State) -> bool {
        u[0] >= 0.0 && u[1].is_finite()
    }
    fn field_kind(&self, _family: usize) -> FieldKind {
        FieldKind::GenuinelyNonlinear
    }
}
