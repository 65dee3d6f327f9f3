//! Fixed inputs shared by the kernel benchmarks.

use std::sync::Arc;

use relstab_core::criteria::WeightedSetup;
use relstab_core::entropy::{state, State};
use relstab_core::models::{Burgers, Euler, Mhd};
use relstab_core::sim::Grid1D;
use relstab_core::wave_curves::hugoniot_point;

pub fn burgers_shock(a: f64) -> WeightedSetup {
    WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, a, Some(1)).unwrap()
}

/// Moderate 1-shock from `(ρ, v, p) = (1, 0, 1)`.
pub fn euler_shock(a: f64) -> WeightedSetup {
    let e = Euler::default();
    let ul = e.from_rho_v_p(1.0, 0.0, 1.0).unwrap();
    let (ur, sigma, _) = hugoniot_point(&e, &ul, 1, 0.5, 0.02, None).unwrap();
    WeightedSetup::new(Arc::new(e), ul, ur, sigma, a, Some(1)).unwrap()
}

/// Intermediate 2-shock from `(v, B, u, w) = (1, 1, 0, 0)`.
pub fn mhd_two_shock(a: f64) -> WeightedSetup {
    let m = Mhd::default();
    let ul = m.from_w(&[1.0, 1.0, 0.0, 0.0]);
    let (ur, sigma, _) = hugoniot_point(&m, &ul, 2, 0.3, 0.01, None).unwrap();
    WeightedSetup::new(Arc::new(m), ul, ur, sigma, a, Some(2)).unwrap()
}

/// Riemann data of `setup` on `[-2, 2]`.
pub fn step_grid(setup: &WeightedSetup, n_cells: usize) -> Grid1D {
    let (l, r) = (setup.u_l.clone(), setup.u_r.clone());
    Grid1D::from_profile(-2.0, 2.0, n_cells, &[0.0], l.clone(), r.clone(), |x| if x < 0.0 { l.clone() } else { r.clone() }).unwrap()
}

/// Points on the segment between the two states of `setup`, ends excluded.
pub fn segment_states(setup: &WeightedSetup, count: usize) -> Vec<State> {
    (1..=count)
        .map(|k| {
            let t = k as f64 / (count + 1) as f64;
            &setup.u_l * (1.0 - t) + &setup.u_r * t
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn setups_build() {
        for s in [burgers_shock(1.0), euler_shock(0.5), mhd_two_shock(0.5)] {
            assert_eq!(segment_states(&s, 8).len(), 8);
            assert_eq!(step_grid(&s, 64).cells.len(), 64);
        }
    }
}
