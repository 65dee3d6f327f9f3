use nalgebra::{DMatrix, DVector};

use crate::entropy::{Eigen, FieldKind, State, SystemModel};
use crate::error::Result;

/// Inviscid Burgers: `f = u²/2`, `η = u²/2`, `q = u³/3`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Burgers;

impl SystemModel for Burgers {
    fn name(&self) -> &'static str {
        "burgers"
    }
    fn dim(&self) -> usize {
        1
    }
    fn component_names(&self) -> Vec<&'static str> {
        vec!["u"]
    }
    fn params(&self) -> serde_json::Value {
        serde_json::json!({})
    }
    fn flux(&self, u: &State) -> DVector<f64> {
        DVector::from_element(1, 0.5 * u[0] * u[0])
    }
    fn entropy(&self, u: &State) -> f64 {
        0.5 * u[0] * u[0]
    }
    fn entropy_flux(&self, u: &State) -> f64 {
        u[0] * u[0] * u[0] / 3.0
    }
    fn flux_jacobian(&self, u: &State) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, u[0])
    }
    fn entropy_gradient(&self, u: &State) -> DVector<f64> {
        DVector::from_element(1, u[0])
    }
    fn entropy_hessian(&self, _u: &State) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, 1.0)
    }
    fn eigen(&self, u: &State) -> Result<Eigen> {
        Ok(Eigen {
            values: vec![u[0]],
            vectors: vec![DVector::from_element(1, 1.0)],
        })
    }
    fn in_domain(&self, u: &State) -> bool {
        u[0].is_finite()
    }
    fn field_kind(&self, _family: usize) -> FieldKind {
        FieldKind::GenuinelyNonlinear
    }
}
