use std::f64::consts::PI;

use proptest::prelude::*;

use lri_control::analysis::{sweep_beta_dot0_with, validate_schedule};
use lri_control::dynamics::{
    evolve, invariant_eigenstate, invariant_state, DensityMatrix, Matrix2, Weights,
};
use lri_control::parallel::Execution;
use lri_control::poly::{fit, real_roots, Condition, Polynomial};
use lri_control::pulse::{synthesize_with, Branch};
use lri_control::schedule::{
    antedated_pair, beta_dot0_from_units, fourth_order_pair, third_order_pair,
};

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0..5.0_f64, 1..7)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_matches_finite_difference(c in coeffs(), s in 0.05..0.95_f64) {
        let p = Polynomial::new(c);
        let h = 1e-5;
        let fd = (p.eval(s + h) - p.eval(s - h)) / (2.0 * h);
        prop_assert!((p.derivative().eval(s) - fd).abs() < 1e-6);
    }

    #[test]
    fn fit_meets_its_conditions(v0 in -3.0..3.0_f64, v1 in -3.0..3.0_f64, d0 in -3.0..3.0_f64, d1 in -3.0..3.0_f64, vm in -3.0..3.0_f64) {
        let conds = [
            Condition::value(0.0, v0),
            Condition::value(1.0, v1),
            Condition::slope(0.0, d0),
            Condition::slope(1.0, d1),
            Condition::value(0.5, vm),
        ];
        let p = fit(&conds, 4).unwrap();
        for c in &conds {
            prop_assert!((p.eval_derivative(c.derivative_order, c.s) - c.value).abs() < 1e-9);
        }
    }

    #[test]
    fn roots_are_sorted_and_vanish(c in coeffs()) {
        let p = Polynomial::new(c);
        prop_assume!(!p.is_zero() && p.degree() > 0);
        let roots = real_roots(&p, -1.0, 1.0);
        prop_assert!(roots.windows(2).all(|w| w[0] < w[1]));
        let scale: f64 = p.coeffs().iter().map(|a| a.abs()).sum();
        for r in roots {
            prop_assert!(p.eval(r).abs() <= 1e-9 * scale.max(1.0));
        }
    }

    #[test]
    fn invariant_state_bloch_norm_is_polarization(p_plus in 0.0..1.0_f64, s in 0.0..1.0_f64) {
        let w = Weights::new(p_plus, 1.0 - p_plus).unwrap();
        let pair = third_order_pair(1.0).unwrap();
        let rho = invariant_state(&pair, w, s);
        prop_assert!((rho.bloch().norm() - (2.0 * p_plus - 1.0).abs()).abs() < 1e-12);
        // Diagonal in the invariant eigenbasis.
        let plus = invariant_eigenstate(&pair, s, Branch::Plus);
        let minus = invariant_eigenstate(&pair, s, Branch::Minus);
        let m = rho.matrix().apply(&minus);
        let off = plus[0].conj() * m[0] + plus[1].conj() * m[1];
        prop_assert!(off.norm() < 1e-12);
    }

    #[test]
    fn fourth_order_is_physical_above_critical(gm in 1.0..1.5_f64) {
        let pair = fourth_order_pair(1.0, gm).unwrap();
        prop_assert!(validate_schedule(&pair).is_physical());
    }
}

#[test]
fn evolution_preserves_trace_hermiticity_and_purity() {
    let pair = antedated_pair(1.0, 0.4, beta_dot0_from_units(2.0, 1.0)).unwrap();
    let rho0 = DensityMatrix::from_bloch(lri_control::dynamics::BlochVector {
        x: 0.3,
        y: -0.2,
        z: 0.5,
    });
    let traj = evolve(&pair, rho0, 2000).unwrap();
    for x in &traj.samples {
        let m = x.rho.matrix();
        assert!((m.trace().re - 1.0).abs() < 1e-8);
        assert!(m.is_hermitian(1e-8));
        assert!((x.rho.purity() - rho0.purity()).abs() < 1e-8);
        assert!(x.rho.min_eigenvalue() > -1e-10);
    }
    assert!(traj.samples.windows(2).all(|w| w[0].t < w[1].t));
}

#[test]
fn maximally_mixed_state_is_stationary() {
    let pair = third_order_pair(3.0).unwrap();
    let traj = evolve(&pair, DensityMatrix::maximally_mixed(), 500).unwrap();
    let half = Matrix2::identity().scale_re(0.5);
    for x in &traj.samples {
        assert!((*x.rho.matrix() - half).frobenius() < 1e-14);
    }
}

#[test]
fn parallel_sweep_equals_serial() {
    let serial = sweep_beta_dot0_with(1.0, 0.5, 0.1, 8.0, 60, Execution::Serial).unwrap();
    let parallel = sweep_beta_dot0_with(1.0, 0.5, 0.1, 8.0, 60, Execution::Parallel).unwrap();
    assert_eq!(serial, parallel);
    assert!(serial.minimum.1 >= PI - 1e-6);
}

#[test]
fn parallel_synthesis_equals_serial() {
    let pair = antedated_pair(2.0, 1.0, beta_dot0_from_units(1.0, 2.0)).unwrap();
    let a = synthesize_with(&pair, 500, Execution::Serial).unwrap();
    let b = synthesize_with(&pair, 500, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
