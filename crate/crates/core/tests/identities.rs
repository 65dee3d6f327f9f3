mod common;

use common::{models, state_from_unit, unit4};
use proptest::prelude::*;
use relstab_core::entropy::{fd_gradient, rel_eta, triangle_identities};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs() + b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn three_point_identities(cu in unit4(), cv in unit4(), cw in unit4(), sigma in -3.0..3.0f64) {
        for m in models() {
            let (u, v, w) = (state_from_unit(&*m, &cu), state_from_unit(&*m, &cv), state_from_unit(&*m, &cw));
            let t = triangle_identities(&*m, &u, &v, &w, sigma).unwrap();
            prop_assert!(close(t.lhs_eta, t.rhs_eta, 1e-10), "{} eta {} vs {}", m.name(), t.lhs_eta, t.rhs_eta);
            prop_assert!(close(t.lhs_q, t.rhs_q, 1e-10), "{} q {} vs {}", m.name(), t.lhs_q, t.rhs_q);
            prop_assert!(close(t.lhs_metric, t.rhs_metric, 1e-10), "{} metric {} vs {}", m.name(), t.lhs_metric, t.rhs_metric);
        }
    }

    #[test]
    fn relative_entropy_is_nonnegative(cu in unit4(), cv in unit4()) {
        for m in models() {
            let (u, v) = (state_from_unit(&*m, &cu), state_from_unit(&*m, &cv));
            prop_assert!(rel_eta(&*m, &u, &v) >= -1e-12 * (1.0 + m.entropy(&u).abs()));
            prop_assert_eq!(rel_eta(&*m, &u, &u), 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn entropy_flux_compatibility(c in unit4()) {
        for m in models() {
            let u = state_from_unit(&*m, &c);
            let fd = fd_gradient(|x| m.entropy_flux(x), &u);
            let exact = m.flux_jacobian(&u).transpose() * m.entropy_gradient(&u);
            for k in 0..u.len() {
                prop_assert!((fd[k] - exact[k]).abs() <= 1e-6 * (1.0 + exact.amax()), "{} component {k}: {} vs {}", m.name(), fd[k], exact[k]);
            }
        }
    }

    #[test]
    fn entropy_gradient_matches_finite_differences(c in unit4()) {
        for m in models() {
            let u = state_from_unit(&*m, &c);
            let fd = fd_gradient(|x| m.entropy(x), &u);
            let g = m.entropy_gradient(&u);
            prop_assert!((fd - &g).amax() <= 1e-6 * (1.0 + g.amax()), "{}", m.name());
        }
    }
}
