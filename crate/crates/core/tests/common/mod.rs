#![allow(dead_code)]

use std::sync::Arc;

use proptest::prelude::*;
use relstab_core::entropy::{state, State, SystemModel};
use relstab_core::models::{Burgers, Euler, IsentropicEuler, Mhd};

pub fn models() -> Vec<Arc<dyn SystemModel>> {
    vec![
        Arc::new(Burgers),
        Arc::new(IsentropicEuler::default()),
        Arc::new(Euler::default()),
        Arc::new(Mhd::default()),
    ]
}

/// Interior state of `model` from unit-interval coordinates.
pub fn state_from_unit(model: &dyn SystemModel, c: &[f64; 4]) -> State {
    let lin = |x: f64, lo: f64, hi: f64| lo + (hi - lo) * x;
    match model.name() {
        "burgers" => state(&[lin(c[0], -2.0, 2.0)]),
        "isentropic-euler" => {
            let rho = lin(c[0], 0.3, 3.0);
            state(&[rho, rho * lin(c[1], -2.0, 2.0)])
        }
        "euler" => Euler::default().from_rho_v_p(lin(c[0], 0.3, 3.0), lin(c[1], -2.0, 2.0), lin(c[2], 0.3, 3.0)).unwrap(),
        "mhd" => {
            let b = lin(c[1], 0.2, 2.0) * if c[3] < 0.5 { -1.0 } else { 1.0 };
            Mhd::default().from_w(&[lin(c[0], 0.4, 2.5), b, lin(c[2], -2.0, 2.0), lin(c[3], -1.0, 1.0)])
        }
        other => panic!("no sampler for {other}"),
    }
}

pub fn unit4() -> impl Strategy<Value = [f64; 4]> {
    [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]
}
