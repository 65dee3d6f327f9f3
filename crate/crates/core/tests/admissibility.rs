mod common;

use common::{state_from_unit, unit4};
use proptest::prelude::*;
use relstab_core::entropy::{rel_eta, state, SystemModel};
use relstab_core::models::{Euler, IsentropicEuler, Mhd};
use relstab_core::wave_curves::{
    diperna_check, partial_ok, speed_derivative_range, trace_hugoniot_with, BaseSide, HugoniotOptions, WaveCurve,
};

fn extremal(model: &dyn SystemModel, base: &relstab_core::State, family: usize, span: f64) -> WaveCurve {
    let side = if family == 1 { BaseSide::Left } else { BaseSide::Right };
    let opts = HugoniotOptions::new(span, span / 40.0).side(side);
    let (curve, _) = partial_ok(trace_hugoniot_with(model, base, family, &opts)).unwrap();
    assert!(curve.samples.len() > 5, "curve too short for {}", model.name());
    curve
}

fn diperna_along(model: &dyn SystemModel, curve: &WaveCurve, v: &relstab_core::State) {
    let span = curve.span();
    for k in 1..=20 {
        let s = span * k as f64 / 20.0;
        let (lhs, rhs) = diperna_check(model, curve, v, s).unwrap();
        assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + lhs.abs().max(rhs.abs())), "{} s={s}: {lhs} vs {rhs}", model.name());
    }
}

#[test]
fn diperna_identity_on_euler_and_mhd_shocks() {
    let e = Euler::default();
    let base = e.from_rho_v_p(1.0, 0.0, 1.0).unwrap();
    let curve = extremal(&e, &base, 1, 1.0);
    diperna_along(&e, &curve, &e.from_rho_v_p(0.7, 0.4, 1.6).unwrap());
    diperna_along(&e, &curve, &base);
    let m = Mhd::default();
    let base = m.from_w(&[1.0, 1.0, 0.0, 0.0]);
    let curve = extremal(&m, &base, 1, 0.6);
    diperna_along(&m, &curve, &m.from_w(&[1.3, 0.6, 0.2, -0.1]));
}

#[test]
fn euler_contact_keeps_velocity_and_pressure() {
    let e = Euler::default();
    let base = state(&[1.0, 0.0, 2.0]);
    for branch_side in [BaseSide::Left, BaseSide::Right] {
        let opts = HugoniotOptions::new(2.0, 0.05).side(branch_side);
        let (curve, _) = partial_ok(trace_hugoniot_with(&e, &base, 2, &opts)).unwrap();
        let (v0, p0) = (e.velocity(&base), e.pressure(&base));
        for p in &curve.samples {
            assert!((e.velocity(&p.state) - v0).abs() <= 1e-8);
            assert!((e.pressure(&p.state) - p0).abs() <= 1e-8 * (1.0 + p0));
            assert!((p.speed - v0).abs() <= 1e-8);
        }
    }
}

fn check_liu(model: &dyn SystemModel, base: &relstab_core::State, span: f64) -> Result<(), TestCaseError> {
    let n = model.dim();
    let first = extremal(model, base, 1, span);
    let (_, hi) = speed_derivative_range(&first).unwrap();
    prop_assert!(hi < 0.0, "{}: 1-family speed slope up to {hi}", model.name());
    let last = extremal(model, base, n, span);
    let (lo, _) = speed_derivative_range(&last).unwrap();
    prop_assert!(lo > 0.0, "{}: {n}-family speed slope down to {lo}", model.name());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn liu_signs_on_extremal_branches(c in unit4()) {
        let e = Euler::default();
        check_liu(&e, &state_from_unit(&e, &c), 0.5)?;
        let i = IsentropicEuler::default();
        check_liu(&i, &state_from_unit(&i, &c), 0.5)?;
        let m = Mhd::default();
        check_liu(&m, &state_from_unit(&m, &c), 0.3)?;
    }

    #[test]
    fn relative_entropy_grows_along_euler_first_shocks(c in unit4()) {
        let e = Euler::default();
        let base = state_from_unit(&e, &c);
        let curve = extremal(&e, &base, 1, 0.8);
        let eta: Vec<f64> = curve.samples.iter().map(|p| rel_eta(&e, &base, &p.state)).collect();
        prop_assert!(eta.windows(2).all(|w| w[1] > w[0]), "{eta:?}");
    }
}
