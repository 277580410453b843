use contractive_core::evolution::{com_evolve, omega_sq_closed};
use contractive_core::gaussian::{apply_local_transform, covariance_of, is_stms, make_stms,
    lambda_from_state, state_from_covariance};
use contractive_core::measures::{epr_dispersion, epr_stms, omega_of};
use contractive_core::restore::transformed_coefficients;
use contractive_core::{Complex, LocalTransform, StmsParams, SymmetricGaussianState};
use proptest::prelude::*;
use std::f64::consts::TAU;

fn params() -> impl Strategy<Value = StmsParams> {
    (0.0..2.0f64, 0.0..TAU).prop_map(|(s, p)| StmsParams::new(s, p).unwrap())
}

fn state() -> impl Strategy<Value = SymmetricGaussianState> {
    (0.05..10.0f64, -0.95..0.95f64, -10.0..10.0f64, -10.0..10.0f64).prop_map(|(a1, frac, a2, g2)| {
        SymmetricGaussianState::new(Complex::new(a1, a2), Complex::new(frac * a1, g2)).unwrap()
    })
}

fn transform() -> impl Strategy<Value = LocalTransform> {
    (-std::f64::consts::PI..std::f64::consts::PI, -1.5..1.5f64)
        .prop_map(|(theta, r)| LocalTransform::new(theta, r))
}

fn close(a: Complex, b: Complex, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #[test]
    fn stms_identity(p in params()) {
        let st = make_stms(p);
        let scale = 1.0 + st.alpha().norm_sqr() + st.gamma().norm_sqr();
        prop_assert!((st.alpha() * st.alpha() - st.gamma() * st.gamma() - 1.0).norm() <= 1e-14 * scale);
        prop_assert!(is_stms(&st, 1e-12 * scale));
    }

    #[test]
    fn lambda_round_trip(p in params()) {
        let l = lambda_from_state(&make_stms(p)).unwrap();
        prop_assert!(close(l, p.lambda0(), 1e-12));
    }

    #[test]
    fn covariance_is_pure(st in state()) {
        let cov = covariance_of(&st).unwrap();
        let [w1, w2] = cov.symplectic_eigenvalues();
        let scale = cov.matrix().abs().max();
        prop_assert!((w1 - 0.5).abs() <= 1e-9 * scale && (w2 - 0.5).abs() <= 1e-9 * scale);
        prop_assert!(cov.exchange_asymmetry() <= 1e-12 * scale);
    }

    #[test]
    fn covariance_round_trip(st in state()) {
        let back = state_from_covariance(&covariance_of(&st).unwrap()).unwrap();
        prop_assert!(close(back.alpha(), st.alpha(), 1e-9));
        prop_assert!(close(back.gamma(), st.gamma(), 1e-9));
    }

    #[test]
    fn transforms_are_symplectic(xf in transform()) {
        let (dp, dm, d0) = xf.deltas();
        prop_assert!((dp * dm + d0 * d0 - 1.0).abs() <= 1e-12 * (1.0 + dp.abs() * dm.abs()));
        prop_assert!((xf.mode_matrix().determinant() - 1.0).abs() <= 1e-11);
        prop_assert!((xf.state_map() * xf.mode_matrix() - nalgebra::Matrix2::identity()).abs().max() <= 1e-11);
    }

    #[test]
    fn omega_at_least_half(p in params(), t in 0.0..10.0f64) {
        let omega = omega_of(&com_evolve(p, t).unwrap()).unwrap();
        prop_assert!(omega >= 0.5 - 1e-12);
        prop_assert!((4.0 * omega * omega - omega_sq_closed(p, t)).abs() <= 1e-10 * omega_sq_closed(p, t));
    }

    #[test]
    fn dispersion_is_conserved(p in params(), t in 0.0..10.0f64) {
        let f = epr_dispersion(&com_evolve(p, t).unwrap()).unwrap();
        prop_assert!((f - epr_stms(p)).abs() <= 1e-10 * epr_stms(p));
    }

    #[test]
    fn closed_form_transform_matches_covariance_route(p in params(), t in 0.0..5.0f64, xf in transform()) {
        let a = transformed_coefficients(p, t, &xf).unwrap();
        let b = apply_local_transform(&com_evolve(p, t).unwrap(), &xf).unwrap();
        prop_assert!(close(a.alpha(), b.alpha(), 1e-9));
        prop_assert!(close(a.gamma(), b.gamma(), 1e-9));
    }

    #[test]
    fn transforms_preserve_entanglement(st in state(), xf in transform()) {
        let moved = apply_local_transform(&st, &xf).unwrap();
        let (a, b) = (omega_of(&st).unwrap(), omega_of(&moved).unwrap());
        prop_assert!((a - b).abs() <= 1e-8 * a);
    }
}
