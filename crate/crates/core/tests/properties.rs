use std::f64::consts::PI;

use esp_core::liouvillian::{build_jump_set, unvectorize, vectorize, DensityMatrix, Liouvillian};
use esp_core::model::*;
use esp_core::{max_abs, CMatrix, C64};
use proptest::prelude::*;

prop_compose! {
    fn params()(
        omega_ab in 0.0..200.0f64,
        omega_ca in 0.5..200.0f64,
        omega_cb in 0.5..200.0f64,
        omega_ce in 0.0..200.0f64,
        phi_l in -10.0..10.0f64,
        delta in -100.0..100.0f64,
        delta_c in -100.0..100.0f64,
        delta_e in -300.0..300.0f64,
        gamma in 0.0..100.0f64,
        kappa in 0.0..1.0f64,
        n in 0usize..6,
    ) -> SystemParams {
        SystemParams { omega_ab, omega_ca, omega_cb, omega_ce, phi_l, delta, delta_c, delta_e, gamma, kappa, n }
    }
}

prop_compose! {
    fn gauge_params()(p in params(), pi in any::<bool>()) -> SystemParams {
        p.with_phi_l(if pi { PI } else { 0.0 })
    }
}

fn hermitian(d: usize, entries: &[(f64, f64)]) -> CMatrix {
    let m = CMatrix::from_fn(d, d, |i, j| {
        let (re, im) = entries[(i * d + j) % entries.len()];
        C64::new(re, im)
    });
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hamiltonians_are_hermitian(p in params()) {
        for h in Handedness::BOTH {
            prop_assert!(build_hamiltonian3(&p, h).hermiticity_residual() < 1e-12);
            let full = build_hamiltonian_full(&p, h);
            let m = full.as_matrix();
            prop_assert!(max_abs(&(m - m.adjoint())) < 1e-14);
        }
    }

    #[test]
    fn gauge_swap(p in params()) {
        let shifted = p.with_phi_l(p.phi_l + PI);
        prop_assert_eq!(build_hamiltonian3(&shifted, Handedness::Left), build_hamiltonian3(&p, Handedness::Right));
    }

    #[test]
    fn dressed_states_orthonormal(p in params()) {
        let (d, b) = dressed_states(&p).unwrap();
        prop_assert!((d.inner(&d).re - 1.0).abs() < 1e-12);
        prop_assert!((b.inner(&b).re - 1.0).abs() < 1e-12);
        prop_assert!(d.inner(&b).norm() < 1e-12);
        for i in [HilbertSpace::C, HilbertSpace::E] {
            prop_assert_eq!(d.amplitudes()[i], C64::new(0.0, 0.0));
            prop_assert_eq!(b.amplitudes()[i], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn bright_coupling_and_dark_decoupling(p in params()) {
        let (d, b) = dressed_states(&p).unwrap();
        let c = StateVector::basis(p.dim(), HilbertSpace::C);
        let z = (p.omega_ca.powi(2) + p.omega_cb.powi(2)).sqrt();
        for h in Handedness::BOTH {
            let m = build_hamiltonian3(&p, h);
            prop_assert!((c.matrix_element(m.as_matrix(), &b) - C64::new(z / 2.0, 0.0)).norm() < 1e-10);
            prop_assert!(c.matrix_element(m.as_matrix(), &d).norm() < 1e-10);
        }
    }

    #[test]
    fn dressed_coupling_is_the_matrix_element(p in gauge_params()) {
        let (d, b) = dressed_states(&p).unwrap();
        for h in Handedness::BOTH {
            let elem = b.matrix_element(build_hamiltonian3(&p, h).as_matrix(), &d);
            prop_assert!((elem - C64::new(dressed_coupling(&p, h).unwrap(), 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn dark_state_exclusivity(
        omega_ab in 0.5..100.0f64,
        omega_ca in 0.5..100.0f64,
        omega_cb in 0.5..100.0f64,
        delta_c in -50.0..50.0f64,
    ) {
        prop_assume!((omega_ca - omega_cb).abs() > 0.1);
        let mut p = SystemParams { omega_ab, omega_ca, omega_cb, delta_c, n: 1, ..SystemParams::default() };
        p.delta = delta0(&p).unwrap();
        let z2 = omega_ca * omega_ca + omega_cb * omega_cb;
        let bound = 0.1 * omega_ab / z2 * (omega_ca * omega_ca - omega_cb * omega_cb).abs();
        prop_assert!(dark_state_residual(&p, Handedness::Left).unwrap() < 1e-10);
        prop_assert!(dark_state_residual(&p, Handedness::Right).unwrap() > bound);
    }

    #[test]
    fn jump_rates_sum_to_gamma(gamma in 0.0..1e3f64, n in 0usize..20) {
        let p = SystemParams { gamma, n, ..SystemParams::default() };
        let jumps = build_jump_set(&p);
        prop_assert_eq!(jumps.len(), n + 3);
        let total: f64 = jumps.iter().map(|j| j.rate).sum();
        prop_assert!((total - gamma).abs() <= 1e-12 * gamma.max(1.0));
    }

    #[test]
    fn rhs_hermitian_traceless(p in params(), entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..64)) {
        let rho = hermitian(p.dim(), &entries);
        for h in Handedness::BOTH {
            let l = Liouvillian::new(&p, h).unwrap();
            let out = l.apply_raw(&rho).unwrap();
            prop_assert!(hermiticity_residual(&out) < 1e-12);
            prop_assert!(out.trace().norm() < 1e-10);
        }
    }

    #[test]
    fn assembled_agrees_with_matrix_free(p in params(), entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..64)) {
        let rho = hermitian(p.dim(), &entries);
        let l = Liouvillian::new(&p, Handedness::Right).unwrap();
        let sup = l.assemble_matrix().unwrap();
        let via = unvectorize(&(&sup * vectorize(&rho)), p.dim());
        prop_assert!(max_abs(&(via - l.apply_raw(&rho).unwrap())) < 1e-10);
    }
}

#[test]
fn maximally_mixed_is_valid_for_every_dimension() {
    for d in 4..20 {
        assert!(DensityMatrix::maximally_mixed(d).check().is_ok());
    }
}
