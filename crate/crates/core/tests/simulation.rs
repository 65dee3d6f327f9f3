use std::sync::Arc;

use relstab_core::criteria::WeightedSetup;
use relstab_core::entropy::state;
use relstab_core::models::{Burgers, Euler};
use relstab_core::sim::{run_contraction_experiment, Perturbation, ShiftMode, SimOptions};

fn burgers() -> WeightedSetup {
    WeightedSetup::new(Arc::new(Burgers), state(&[1.0]), state(&[0.0]), 0.5, 1.0, Some(1)).unwrap()
}

fn bump_run(n: usize) -> relstab_core::sim::SimReport {
    let opts = SimOptions {
        n_cells: n,
        t_final: 0.5,
        perturbation: Perturbation::Bump { center: -0.6, half_width: 0.3, amplitude: vec![0.3] },
        ..SimOptions::default()
    };
    run_contraction_experiment(&burgers(), &opts).unwrap()
}

#[test]
fn burgers_contraction_within_scheme_tolerance_and_refines() {
    let runs: Vec<_> = [200, 400, 800].into_iter().map(bump_run).collect();
    for r in &runs {
        assert!(r.nonincreasing_within_tolerance(), "increase {} > tol {}", r.max_increase, r.tol_scheme);
        assert!(r.max_shift_speed <= r.max_v + 1e-12);
        assert!(r.conservation_defect <= 1e-12);
    }
    assert!(runs[0].max_increase > runs[1].max_increase && runs[1].max_increase > runs[2].max_increase);
}

#[test]
fn zero_perturbation_starts_at_zero() {
    let r = run_contraction_experiment(&burgers(), &SimOptions { t_final: 0.2, ..SimOptions::default() }).unwrap();
    assert_eq!(r.e_initial, 0.0);
}

#[test]
fn steady_contact_conserves_cell_sums() {
    let e = Euler::default();
    let s = WeightedSetup::new(Arc::new(e), state(&[1.0, 0.0, 2.0]), state(&[2.0, 0.0, 2.0]), 0.0, 0.5, Some(2)).unwrap();
    let opts = SimOptions {
        t_final: 0.1,
        shift: ShiftMode::Fixed { speed: 0.0 },
        perturbation: Perturbation::Bump { center: -0.5, half_width: 0.2, amplitude: vec![0.1, 0.05, 0.2] },
        ..SimOptions::default()
    };
    let r = run_contraction_experiment(&s, &opts).unwrap();
    assert!(r.conservation_defect <= 1e-12);
    assert_eq!(r.shift.h, 0.0);
}
