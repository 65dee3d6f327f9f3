//! Weighted relative-entropy criteria: level surface, functionals, checks
//! and no-contraction certificates.

mod certificate;
mod checks;
mod surface;
mod theorems;
mod weights;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use certificate::{Certificate, CertificateKind, Functional, SetupRecord, Verdict, Witness, TOOL_VERSION};
pub use checks::{check_h1, check_h1_with, check_h2, H1Options, H2Mode, H2Options};
pub use surface::{sample_sigma_surface, RayHit, SearchBox, SigmaSurface, SurfaceOptions};
pub use theorems::{
    degenerate_neighbor_check, euler_contact_range_certificate, f_function_profile, mhd_intersection_certificate,
    neighbor_rarefaction_certificate, rarefaction_intersection, ContactRange, FProfile, FRow, Intersection,
    MhdShock, NeighborOptions,
};
pub use weights::{find_weight_range, r_a_diameter, weight_sweep, RangeSide, WeightRangeOptions, WeightVerdict};

use crate::entropy::{rel_eta, rel_q, validate_state, State, SystemModel};
use crate::error::{Error, Result};
use crate::wave_curves::{classify_admissibility, AdmissibilityFlags, Discontinuity};

/// A reference discontinuity `(u_l, u_r, σ)` together with a weight `a`.
#[derive(Clone)]
pub struct WeightedSetup {
    pub model: Arc<dyn SystemModel>,
    pub u_l: State,
    pub u_r: State,
    pub sigma: f64,
    pub a: f64,
    pub family: Option<usize>,
    pub flags: AdmissibilityFlags,
}

impl std::fmt::Debug for WeightedSetup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WeightedSetup")
            .field("model", &self.model.name())
            .field("u_l", &self.u_l.as_slice())
            .field("u_r", &self.u_r.as_slice())
            .field("sigma", &self.sigma)
            .field("a", &self.a)
            .finish()
    }
}

impl WeightedSetup {
    /// Validates that the reference jump satisfies Rankine-Hugoniot and the
    /// entropy inequality.
    pub fn new(
        model: Arc<dyn SystemModel>,
        u_l: State,
        u_r: State,
        sigma: f64,
        a: f64,
        family: Option<usize>,
    ) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Invalid(format!("weight a must be positive and finite, got {a}")));
        }
        validate_state(model.as_ref(), &u_l)?;
        validate_state(model.as_ref(), &u_r)?;
        for (name, u) in [("u_l", &u_l), ("u_r", &u_r)] {
            if !model.in_domain(u) {
                return Err(Error::Domain(format!("{name} = {:?} outside the domain", u.as_slice())));
            }
        }
        let d = Discontinuity { u_minus: u_l.clone(), u_plus: u_r.clone(), sigma, family, admissibility: Default::default() };
        let flags = classify_admissibility(model.as_ref(), &d, None);
        if !flags.rankine_hugoniot {
            return Err(Error::Admissibility(format!(
                "Rankine-Hugoniot residual too large for σ = {sigma}"
            )));
        }
        if !flags.entropy_inequality {
            return Err(Error::Admissibility(format!(
                "entropy inequality fails (dissipation {:e})",
                flags.entropy_dissipation
            )));
        }
        Ok(Self { model, u_l, u_r, sigma, a, family, flags })
    }

    pub fn with_weight(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Invalid(format!("weight a must be positive and finite, got {a}")));
        }
        let mut s = self.clone();
        s.a = a;
        Ok(s)
    }

    pub fn model(&self) -> &dyn SystemModel {
        self.model.as_ref()
    }

    /// `φ(u) = η(u|u_l) − a η(u|u_r)`; `Σ_a = {φ = 0}`.
    pub fn phi(&self, u: &State) -> f64 {
        rel_eta(self.model(), u, &self.u_l) - self.a * rel_eta(self.model(), u, &self.u_r)
    }

    /// Tolerance for membership of `Σ_a`: `1e-10 (1 + |η(u)|)`.
    pub fn phi_tolerance(&self, u: &State) -> f64 {
        1e-10 * (1.0 + self.model.entropy(u).abs())
    }

    /// `D_sm(u) = a q(u;u_r) − q(u;u_l)`.
    pub fn d_sm(&self, u: &State) -> f64 {
        self.a * rel_q(self.model(), u, &self.u_r) - rel_q(self.model(), u, &self.u_l)
    }

    /// `D_RH = a q(u_+;u_r) − q(u_−;u_l) − σ_± (a η(u_+|u_r) − η(u_−|u_l))`.
    pub fn d_rh_raw(&self, u_minus: &State, u_plus: &State, sigma: f64) -> f64 {
        let m = self.model();
        self.a * rel_q(m, u_plus, &self.u_r)
            - rel_q(m, u_minus, &self.u_l)
            - sigma * (self.a * rel_eta(m, u_plus, &self.u_r) - rel_eta(m, u_minus, &self.u_l))
    }

    /// `D_RH` after checking the sub-discontinuity is an entropic RH jump.
    pub fn d_rh(&self, d: &Discontinuity) -> Result<f64> {
        let flags = classify_admissibility(self.model(), d, None);
        if !flags.rankine_hugoniot || !flags.entropy_inequality {
            return Err(Error::Admissibility(format!(
                "sub-discontinuity fails RH ({}) or entropy ({}) check",
                flags.rankine_hugoniot, flags.entropy_inequality
            )));
        }
        Ok(self.d_rh_raw(&d.u_minus, &d.u_plus, d.sigma))
    }

    /// `1e-8 (1 + |q(u_l)| + |q(u_r)|)`.
    pub fn tol_violation(&self) -> f64 {
        1e-8 * (1.0 + self.model.entropy_flux(&self.u_l).abs() + self.model.entropy_flux(&self.u_r).abs())
    }

    /// Seed of the ray search: the state enclosed by `Σ_a`.
    pub fn interior_seed(&self) -> &State {
        if self.a > 1.0 {
            &self.u_r
        } else {
            &self.u_l
        }
    }

    pub fn record(&self) -> Result<SetupRecord> {
        SetupRecord::of(self)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ValueAt {
    pub state: Vec<f64>,
    pub value: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::state;
    use crate::models::Burgers;
    use approx::assert_abs_diff_eq;

    fn burgers(a: f64) -> WeightedSetup {
        WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, a, Some(1)).unwrap()
    }

    #[test]
    fn d_sm_reductions() {
        let s = burgers(1.0);
        assert_abs_diff_eq!(s.d_sm(&state(&[0.5])), -1.0 / 24.0, epsilon = 1e-15);
        let s3 = burgers(3.0);
        let q_lr = rel_q(&Burgers, &state(&[1.0]), &state(&[0.0]));
        assert_abs_diff_eq!(s3.d_sm(&state(&[1.0])), 3.0 * q_lr, epsilon = 1e-15);
        let q_rl = rel_q(&Burgers, &state(&[0.0]), &state(&[1.0]));
        assert_abs_diff_eq!(s3.d_sm(&state(&[0.0])), -q_rl, epsilon = 1e-15);
    }

    #[test]
    fn d_rh_of_reference_vanishes() {
        let s = burgers(2.0);
        let d = Discontinuity::new(&Burgers, s.u_l.clone(), s.u_r.clone(), 0.5, Some(1));
        assert_eq!(s.d_rh(&d).unwrap(), 0.0);
    }

    #[test]
    fn d_rh_rejects_non_entropic() {
        let s = burgers(1.0);
        let d = Discontinuity::new(&Burgers, state(&[0.0]), state(&[1.0]), 0.5, Some(1));
        assert!(s.d_rh(&d).is_err());
    }

    #[test]
    fn setup_validation() {
        assert!(WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, -1.0, None).is_err());
        assert!(WeightedSetup::new(Arc::new(Burgers), state(&[0.0]), state(&[1.0]), 0.5, 1.0, None).is_err());
        assert!(WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.4, 1.0, None).is_err());
    }
}
