use nalgebra::{DMatrix, DVector};

use crate::entropy::{Eigen, FieldKind, State, SystemModel};
use crate::error::{Error, Result};

/// Full gas dynamics for a perfect gas in conservative variables
/// `(ρ, m = ρv, E = ρ(v²/2 + e))`, `p = (γ−1)ρe`.
///
/// Entropy `η = (γ−1)ρ ln ρ − ρ ln e` with flux `q = vη`.
#[derive(Debug, Clone, Copy)]
pub struct Euler {
    pub gamma: f64,
    pub rho_min: f64,
    pub e_min: f64,
}

impl Default for Euler {
    fn default() -> Self {
        Self { gamma: 1.4, rho_min: 1e-10, e_min: 1e-10 }
    }
}

/// Primitive description `(ρ, v, e)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub v: f64,
    pub e: f64,
}

impl Euler {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Invalid(format!("gamma must exceed 1, got {gamma}")));
        }
        Ok(Self { gamma, ..Default::default() })
    }

    pub fn with_floors(mut self, rho_min: f64, e_min: f64) -> Self {
        self.rho_min = rho_min;
        self.e_min = e_min;
        self
    }

    pub fn internal_energy(&self, u: &State) -> f64 {
        u[2] / u[0] - u[1] * u[1] / (2.0 * u[0] * u[0])
    }

    pub fn pressure(&self, u: &State) -> f64 {
        (self.gamma - 1.0) * u[0] * self.internal_energy(u)
    }

    pub fn velocity(&self, u: &State) -> f64 {
        u[1] / u[0]
    }

    /// Clamped `(ρ, v, e)` used by the entropy evaluations near vacuum.
    fn clamped(&self, u: &State) -> (f64, f64, f64) {
        let rho = u[0].max(self.rho_min);
        let v = u[1] / rho;
        let e = (u[2] / rho - 0.5 * v * v).max(self.e_min);
        (rho, v, e)
    }

    pub fn to_primitive(&self, u: &State) -> Result<Primitive> {
        let p = Primitive { rho: u[0], v: u[1] / u[0], e: self.internal_energy(u) };
        if !(p.rho > 0.0) || !(p.e > 0.0) {
            return Err(Error::Domain(format!("conservative state {:?} has ρ≤0 or e≤0", u.as_slice())));
        }
        Ok(p)
    }

    /// State with given density, velocity and pressure.
    pub fn from_rho_v_p(&self, rho: f64, v: f64, p: f64) -> Result<State> {
        euler_primitive_to_conservative(rho, v, p / ((self.gamma - 1.0) * rho), self.gamma)
    }
}

pub fn euler_primitive_to_conservative(rho: f64, v: f64, e: f64, gamma: f64) -> Result<State> {
    if !(rho > 0.0) || !(e > 0.0) || !v.is_finite() || !(gamma > 1.0) {
        return Err(Error::Domain(format!("primitive (ρ={rho}, v={v}, e={e}, γ={gamma})")));
    }
    Ok(DVector::from_vec(vec![rho, rho * v, rho * (0.5 * v * v + e)]))
}

pub fn euler_conservative_to_primitive(u: &State, gamma: f64) -> Result<Primitive> {
    Euler::new(gamma)?.to_primitive(u)
}

pub fn euler_sound_speed(_rho: f64, e: f64, gamma: f64) -> Result<f64> {
    if !(e > 0.0) {
        return Err(Error::Domain(format!("internal energy must be positive, got {e}")));
    }
    Ok((gamma * (gamma - 1.0) * e).sqrt())
}

impl SystemModel for Euler {
    fn name(&self) -> &'static str {
        "euler"
    }
    fn dim(&self) -> usize {
        3
    }
    fn component_names(&self) -> Vec<&'static str> {
        vec!["rho", "m", "E"]
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({ "gamma": self.gamma, "rho_min": self.rho_min, "e_min": self.e_min })
    }
    fn flux(&self, u: &State) -> DVector<f64> {
        let (rho, m, en) = (u[0], u[1], u[2]);
        let v = m / rho;
        let p = self.pressure(u);
        DVector::from_vec(vec![m, m * v + p, (en + p) * v])
    }
    fn entropy(&self, u: &State) -> f64 {
        let (rho, _, e) = self.clamped(u);
        (self.gamma - 1.0) * rho * rho.ln() - rho * e.ln()
    }
    fn entropy_flux(&self, u: &State) -> f64 {
        let (_, v, _) = self.clamped(u);
        v * self.entropy(u)
    }
    fn entropy_gradient(&self, u: &State) -> DVector<f64> {
        let (rho, v, e) = self.clamped(u);
        let g = self.gamma;
        DVector::from_vec(vec![
            g * (rho.ln() + 1.0) - (rho * e).ln() - v * v / (2.0 * e),
            v / e,
            -1.0 / e,
        ])
    }
    fn flux_jacobian(&self, u: &State) -> DMatrix<f64> {
        let (rho, m, en) = (u[0], u[1], u[2]);
        let g = self.gamma;
        let v = m / rho;
        DMatrix::from_row_slice(
            3,
            3,
            &[
                0.0,
                1.0,
                0.0,
                0.5 * (g - 3.0) * v * v,
                (3.0 - g) * v,
                g - 1.0,
                -g * en * m / (rho * rho) + (g - 1.0) * m * m * m / rho.powi(3),
                g * en / rho - 1.5 * (g - 1.0) * m * m / (rho * rho),
                g * v,
            ],
        )
    }
    /// Right eigenvectors `(1, v−c, H−vc)`, `(1, v, v²/2)`, `(1, v+c, H+vc)`
    /// with `H = (E+p)/ρ`, normalized. The density component is negative for
    /// `r_1` and positive for `r_2`, `r_3`, which gives `∇λ_i·r_i > 0` on the
    /// nonlinear fields.
    fn eigen(&self, u: &State) -> Result<Eigen> {
        if !self.in_domain(u) {
            return Err(Error::Domain(format!("euler state {:?}", u.as_slice())));
        }
        let rho = u[0];
        let v = u[1] / rho;
        let e = self.internal_energy(u);
        let c = (self.gamma * (self.gamma - 1.0) * e).sqrt();
        let h = (u[2] + self.pressure(u)) / rho;
        let r1 = -DVector::from_vec(vec![1.0, v - c, h - v * c]).normalize();
        let r2 = DVector::from_vec(vec![1.0, v, 0.5 * v * v]).normalize();
        let r3 = DVector::from_vec(vec![1.0, v + c, h + v * c]).normalize();
        Ok(Eigen { values: vec![v - c, v, v + c], vectors: vec![r1, r2, r3] })
    }
    fn in_domain(&self, u: &State) -> bool {
        u[0] > self.rho_min && self.internal_energy(u) > self.e_min
    }
    fn in_extended_domain(&self, u: &State) -> bool {
        u[0] >= 0.0 && u.iter().all(|x| x.is_finite()) && (u[0] == 0.0 || self.internal_energy(u) >= 0.0)
    }
    fn field_kind(&self, family: usize) -> FieldKind {
        if family == 2 {
            FieldKind::LinearlyDegenerate
        } else {
            FieldKind::GenuinelyNonlinear
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::state;
    use approx::assert_abs_diff_eq;

    #[test]
    fn primitive_conversions() {
        let u = euler_primitive_to_conservative(1.0, 0.0, 2.5, 1.4).unwrap();
        assert_eq!(u.as_slice(), &[1.0, 0.0, 2.5]);
        let u = euler_primitive_to_conservative(2.0, 1.0, 1.0, 1.4).unwrap();
        assert_eq!(u.as_slice(), &[2.0, 2.0, 3.0]);
        let p = euler_conservative_to_primitive(&state(&[1.0, 0.0, 2.5]), 1.4).unwrap();
        assert_eq!((p.rho, p.v, p.e), (1.0, 0.0, 2.5));
        assert!(euler_primitive_to_conservative(0.0, 0.0, 1.0, 1.4).is_err());
        assert!(euler_primitive_to_conservative(1.0, 0.0, -1.0, 1.4).is_err());
    }

    #[test]
    fn sound_speed() {
        assert_abs_diff_eq!(euler_sound_speed(1.0, 2.5, 1.4).unwrap(), 1.4f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(euler_sound_speed(1.0, 1.0, 2.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert!(euler_sound_speed(1.0, 0.0, 1.4).is_err());
    }

    #[test]
    fn degenerate_field_constant_speed_and_pressure() {
        let m = Euler::default();
        let u = m.from_rho_v_p(1.3, 0.4, 0.9).unwrap();
        let e = m.eigen(&u).unwrap();
        let w = &u + &e.vectors[1] * 0.3;
        assert_abs_diff_eq!(m.velocity(&w), 0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(m.pressure(&w), 0.9, epsilon = 1e-13);
    }
}
