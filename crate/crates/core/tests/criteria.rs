use holder_euler::criteria::*;
use holder_euler::sde::{ParamFn, PrototypeKind, PrototypeParams};
use proptest::prelude::*;

fn cir_nu(nu: f64) -> AutonomousModel {
    // ν = 2κλ/θ² with κ = θ = 1
    let p = PrototypeParams::constant(PrototypeKind::Cir, 1.0, nu / 2.0, 1.0, 1.0);
    AutonomousModel::from_prototype(&p).unwrap()
}

#[test]
fn feller_matches_cir_boundary_oracle() {
    for nu in [0.25, 0.5, 0.9, 1.1, 2.0, 4.0] {
        let r = feller_test(&cir_nu(nu), 1.0).unwrap();
        let want = if nu >= 1.0 { FellerConclusion::NoExit } else { FellerConclusion::ExitPossible };
        assert_eq!(r.conclusion, want, "nu = {nu}: left {} ({}), right {} ({})", r.left.class.as_str(), r.left.reason, r.right.class.as_str(), r.right.reason);
        assert_eq!(r.right.class, EndpointClass::Divergent);
    }
}

#[test]
fn feller_knife_edge_is_not_exit_possible() {
    let r = feller_test(&cir_nu(1.0), 1.0).unwrap();
    eprintln!("nu = 1: {} after {} shells ({})", r.conclusion.as_str(), r.left.sequence.len(), r.left.reason);
    assert_ne!(r.conclusion, FellerConclusion::ExitPossible);
}

#[test]
fn brownian_motion_on_line_never_exits() {
    use std::sync::Arc;
    let zero: ScalarFn = Arc::new(|_| 0.0);
    let m = AutonomousModel::new(
        zero.clone(),
        zero.clone(),
        Arc::new(|_| 1.0),
        zero.clone(),
        zero,
        0.5,
        holder_euler::sde::Domain::real_line(),
        0.0,
    )
    .unwrap();
    assert_eq!(feller_test(&m, 0.0).unwrap().conclusion, FellerConclusion::NoExit);
}

#[test]
fn inverse_clock_recovers_time() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
    let families = [
        ParamFn::Constant(1.7),
        ParamFn::Affine { p: 0.5, q: 2.0 },
        ParamFn::Sinusoidal { p: 1.0, q: 0.6, omega: 9.0 },
    ];
    for theta in families {
        let horizon = 2.0;
        let tc = build_timechange(theta, horizon).unwrap();
        for _ in 0..1000 {
            let t = rng.random_range(0.0..=horizon);
            let back = tc.inverse(tc.big_theta(t).unwrap()).unwrap();
            assert!((back - t).abs() <= 1e-10 * horizon, "{theta}: A(Θ({t})) = {back}");
        }
    }
}

#[test]
fn elliptic_diffusion_agrees_across_criteria() {
    use std::sync::Arc;
    let m = AutonomousModel::new(
        Arc::new(|x: f64| -x.atan()),
        Arc::new(|x: f64| -1.0 / (1.0 + x * x)),
        Arc::new(|x: f64| 1.5 + 0.5 * x.cos()),
        Arc::new(|x: f64| -0.5 * x.sin()),
        Arc::new(|x: f64| -0.5 * x.cos()),
        0.75,
        holder_euler::sde::Domain::real_line(),
        0.0,
    )
    .unwrap();
    let r = ito_criterion(&m, &ItoGrid::default()).unwrap();
    assert_eq!(r.trend, Trend::BoundedBelow);
    let p = r.prediction.unwrap();
    assert_eq!(p.s, 0.0);
    assert_eq!(p.lambda_sup, theorem_rate(0.75, 0.0).unwrap());
    let ckls = predict_rate(&PrototypeParams::constant(PrototypeKind::Ckls, 1.0, 1.0, 1.0, 1.0)).unwrap();
    assert_eq!(ckls.lambda_sup, p.lambda_sup);
}

proptest! {
    #[test]
    fn mu0_is_scale_invariant(k in 0.01f64..10.0, l in 0.01f64..10.0, th in 0.1f64..5.0, c in 0.01f64..100.0) {
        let base = PrototypeParams::constant(PrototypeKind::Cir, k, l, th, 1.0);
        let scaled = PrototypeParams::constant(PrototypeKind::Cir, c * k, l, c.sqrt() * th, 1.0);
        let (a, b) = (predict_rate(&base).unwrap(), predict_rate(&scaled).unwrap());
        let (m0, m1) = (a.mu0.unwrap(), b.mu0.unwrap());
        prop_assert!((m0 - m1).abs() <= 1e-12 * m0.max(1.0));
        prop_assert!((a.lambda_sup - b.lambda_sup).abs() <= 1e-12);
    }

    #[test]
    fn theorem_rate_decreases_in_s(gamma in 0.5f64..0.999, f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let (s1, s2) = (f1.min(f2) * (1.0 - gamma), f1.max(f2) * (1.0 - gamma));
        let (r1, r2) = (theorem_rate(gamma, s1).unwrap(), theorem_rate(gamma, s2).unwrap());
        prop_assert!(r1 >= r2);
        prop_assert_eq!(r1, theorem_rate(0.5, s1).unwrap());
        let edge = theorem_rate(gamma, 1.0 - gamma).unwrap();
        prop_assert!((edge - (gamma - 0.5)).abs() <= 1e-15);
    }

    #[test]
    fn lambda_sup_within_bounds(k in 0.01f64..10.0, l in 0.01f64..0.99, th in 0.1f64..5.0) {
        for kind in [PrototypeKind::Cir, PrototypeKind::Wf, PrototypeKind::Ckls] {
            let p = predict_rate(&PrototypeParams::constant(kind, k, l, th, 0.5)).unwrap();
            prop_assert!(p.lambda_sup > 0.0 && p.lambda_sup <= 0.5);
            prop_assert!((p.s - (0.5 - p.lambda_sup)).abs() <= 1e-15);
        }
    }
}
