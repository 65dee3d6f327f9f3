//! Concrete systems.

mod burgers;
mod euler;
mod isentropic;
mod mhd;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use burgers::Burgers;
pub use euler::{
    euler_conservative_to_primitive, euler_primitive_to_conservative, euler_sound_speed, Euler, Primitive,
};
pub use isentropic::IsentropicEuler;
pub use mhd::{mhd_alpha, mhd_eigen, Mhd};

use crate::entropy::SystemModel;
use crate::error::Result;

fn default_floor() -> f64 {
    1e-10
}
fn default_euler_gamma() -> f64 {
    1.4
}
fn default_mhd_gamma() -> f64 {
    5.0 / 3.0
}
fn default_kappa() -> f64 {
    1.0
}
fn default_beta() -> f64 {
    1.0
}
fn default_b_floor() -> f64 {
    1e-8
}

/// Serializable model selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    Burgers {},
    IsentropicEuler {
        #[serde(default = "default_euler_gamma")]
        gamma: f64,
        #[serde(default = "default_kappa")]
        kappa: f64,
    },
    Euler {
        #[serde(default = "default_euler_gamma")]
        gamma: f64,
        #[serde(default = "default_floor")]
        rho_min: f64,
        #[serde(default = "default_floor")]
        e_min: f64,
    },
    Mhd {
        #[serde(default = "default_mhd_gamma")]
        gamma: f64,
        #[serde(default = "default_beta")]
        beta: f64,
        #[serde(default = "default_b_floor")]
        b_floor: f64,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Arc<dyn SystemModel>> {
        Ok(match *self {
            ModelSpec::Burgers {} => Arc::new(Burgers),
            ModelSpec::IsentropicEuler { gamma, kappa } => Arc::new(IsentropicEuler::new(gamma, kappa)?),
            ModelSpec::Euler { gamma, rho_min, e_min } => Arc::new(Euler::new(gamma)?.with_floors(rho_min, e_min)),
            ModelSpec::Mhd { gamma, beta, b_floor } => {
                let mut m = Mhd::new(gamma, beta)?;
                m.b_floor = b_floor;
                Arc::new(m)
            }
        })
    }

    pub fn euler() -> Self {
        ModelSpec::Euler { gamma: 1.4, rho_min: 1e-10, e_min: 1e-10 }
    }

    pub fn mhd() -> Self {
        ModelSpec::Mhd { gamma: 5.0 / 3.0, beta: 1.0, b_floor: 1e-8 }
    }
}

impl ModelSpec {
    /// Recovers the spec of a bundled model from its name and parameters.
    pub fn of(model: &dyn SystemModel) -> Result<Self> {
        let mut obj = match model.params() {
            serde_json::Value::Object(m) => m,
            _ => serde_json::Map::new(),
        };
        obj.insert("name".into(), serde_json::Value::String(model.name().into()));
        serde_json::from_value(serde_json::Value::Object(obj))
            .map_err(|e| crate::error::Error::Invalid(format!("model {} has no spec: {e}", model.name())))
    }
}
