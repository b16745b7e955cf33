//! Propagation and steady-state checks against independent routes.

use std::f64::consts::TAU;

use esp_core::dynamics::*;
use esp_core::liouvillian::{unvectorize, vectorize, DensityMatrix, Liouvillian};
use esp_core::model::{dressed_states, Handedness, HilbertSpace, SystemParams};
use esp_core::{max_abs, CMatrix};

fn uniform_ab() -> DensityMatrix {
    DensityMatrix::from_diagonal(&[1.0, 1.0, 0.0, 0.0, 0.0]).unwrap()
}

fn uniform_abc() -> DensityMatrix {
    DensityMatrix::from_diagonal(&[1.0, 1.0, 1.0, 0.0, 0.0]).unwrap()
}

/// `exp(S t) vec(ρ0)` with the dense matrix exponential of the assembled superoperator.
fn expm_oracle(l: &Liouvillian, rho0: &DensityMatrix, t: f64) -> CMatrix {
    let sup = l.assemble_matrix().unwrap() * esp_core::C64::new(t, 0.0);
    unvectorize(&(sup.exp() * vectorize(rho0.as_matrix())), l.dim())
}

#[test]
fn propagator_matches_matrix_exponential() {
    for kappa in [0.0, TAU * 0.001] {
        let p = SystemParams::reference().with_kappa(kappa);
        for h in Handedness::BOTH {
            let l = Liouvillian::new(&p, h).unwrap();
            for rho0 in [uniform_ab(), uniform_abc()] {
                let traj = propagate(&l, &rho0, &PropagateOptions::new(1.0, 5e-5, 4)).unwrap();
                let dev = max_abs(&(traj.final_state().as_matrix() - expm_oracle(&l, &rho0, 1.0)));
                assert!(dev < 1e-8, "{h} kappa={kappa}: deviation {dev:e}");
            }
        }
    }
}

#[test]
fn trace_hermiticity_and_positivity_over_ten_microseconds() {
    let p = SystemParams::reference().with_kappa(TAU * 0.001);
    for h in Handedness::BOTH {
        let l = Liouvillian::new(&p, h).unwrap();
        for rho0 in [
            uniform_ab(),
            uniform_abc(),
            DensityMatrix::basis(5, HilbertSpace::E),
        ] {
            let traj = propagate(&l, &rho0, &PropagateOptions::new(10.0, 1e-3, 100)).unwrap();
            for s in &traj.states {
                assert!((s.trace().re - 1.0).abs() < 1e-7);
                assert!(s.trace().im.abs() < 1e-7);
                assert!(s.hermiticity_residual() < 1e-9);
                assert!(s.min_eigenvalue() >= -1e-6);
            }
        }
    }
}

#[test]
fn halving_the_step_bound_changes_nothing_visible() {
    let p = SystemParams::reference().with_kappa(TAU * 0.001);
    for h in Handedness::BOTH {
        let l = Liouvillian::new(&p, h).unwrap();
        let coarse = propagate(&l, &uniform_abc(), &PropagateOptions::new(2.0, 1e-4, 40)).unwrap();
        let fine = propagate(&l, &uniform_abc(), &PropagateOptions::new(2.0, 5e-5, 40)).unwrap();
        for (a, b) in coarse.states.iter().zip(&fine.states) {
            for i in 0..5 {
                assert!((a.population(i) - b.population(i)).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn dark_state_is_stationary() {
    let p = SystemParams::reference();
    let (dark, _) = dressed_states(&p).unwrap();
    let l = Liouvillian::new(&p, Handedness::Left).unwrap();
    let traj = propagate(
        &l,
        &DensityMatrix::pure(&dark).unwrap(),
        &PropagateOptions::new(10.0, 1e-3, 200),
    )
    .unwrap();
    let (pd, _) = traj.dressed_series(&p).unwrap();
    let worst = pd.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "max |p_D - 1| = {worst:e}");
}

#[test]
fn dressed_populations_follow_the_pumping_picture() {
    let p = SystemParams::reference();
    let mut dressed = Vec::new();
    for h in Handedness::BOTH {
        let l = Liouvillian::new(&p, h).unwrap();
        let traj = propagate(&l, &uniform_ab(), &PropagateOptions::new(2.0, 1e-3, 20)).unwrap();
        let (pd, pb) = traj.dressed_series(&p).unwrap();
        dressed.push((*pd.last().unwrap(), *pb.last().unwrap()));
    }
    let (dl, bl) = dressed[0];
    let (dr, br) = dressed[1];
    assert!(dr < 1e-2 && bl < 1e-2 && br < 1e-2, "{dressed:?}");

    let l = Liouvillian::new(&p, Handedness::Left).unwrap();
    let ss = steady_state(&l, Some(&uniform_ab())).unwrap();
    let pops = populations(&ss.rho, &p);
    assert!(pops.dark.unwrap() > 0.1);
    assert!((pops.dark.unwrap() - dl).abs() < 1e-3);
}

#[test]
fn null_space_and_long_time_agree() {
    let p = SystemParams::reference().with_kappa(TAU * 0.001);
    let opts = SteadyStateOptions::default();
    for h in Handedness::BOTH {
        let l = Liouvillian::new(&p, h).unwrap();
        let ns = steady_state_with(&l, None, Some(SteadyStateMethod::NullSpace), &opts).unwrap();
        let mixed = DensityMatrix::maximally_mixed(5);
        let lt =
            steady_state_with(&l, Some(&mixed), Some(SteadyStateMethod::LongTime), &opts).unwrap();
        assert_eq!(ns.method, SteadyStateMethod::NullSpace);
        assert_eq!(lt.method, SteadyStateMethod::LongTime);
        let dev = max_abs(&(ns.rho.as_matrix() - lt.rho.as_matrix()));
        assert!(dev < 1e-6, "{h}: {dev:e}");
        assert!(ns.residual < 1e-8 * p.gamma);
        assert!(lt.residual < 1e-8 * p.gamma);
        assert!(lt.elapsed.unwrap() >= 10.0 / p.kappa);
    }
}

#[test]
fn kappa_zero_long_time_depends_on_initial_state() {
    let p = SystemParams::reference();
    let l = Liouvillian::new(&p, Handedness::Left).unwrap();
    let from_ab = steady_state(&l, Some(&uniform_ab())).unwrap();
    let from_abc = steady_state(&l, Some(&uniform_abc())).unwrap();
    assert_eq!(from_ab.method, SteadyStateMethod::LongTime);
    let pa = populations(&from_ab.rho, &p);
    let pc = populations(&from_abc.rho, &p);
    // the limit remembers the initial state
    assert!((pa.dark.unwrap() - pc.dark.unwrap()).abs() > 0.01);
    assert!(pa.dark.unwrap() > 0.1 && pc.dark.unwrap() > 0.1);
    assert!(from_ab.residual < 1e-8 * p.gamma);

    let r = Liouvillian::new(&p, Handedness::Right).unwrap();
    let ss = steady_state(&r, Some(&uniform_ab())).unwrap();
    let pr = populations(&ss.rho, &p);
    assert!(pr.bare[HilbertSpace::A] + pr.bare[HilbertSpace::B] < 1e-6);
}

#[test]
fn long_time_cap_reports_no_convergence() {
    let p = SystemParams::reference().with_kappa(TAU * 0.001);
    let l = Liouvillian::new(&p, Handedness::Right).unwrap();
    let opts = SteadyStateOptions {
        max_time: 5.0,
        ..SteadyStateOptions::default()
    };
    let err = steady_state_with(&l, None, Some(SteadyStateMethod::LongTime), &opts).unwrap_err();
    assert_eq!(err, esp_core::Error::NoConvergence { t_max: 5.0 });
}

#[test]
fn collision_only_relaxation() {
    let kappa = TAU * 0.001;
    let p = SystemParams {
        kappa,
        n: 1,
        ..SystemParams::default()
    };
    let l = Liouvillian::new(&p, Handedness::Left).unwrap();
    let mixed = DensityMatrix::maximally_mixed(5);

    let fixed = propagate(&l, &mixed, &PropagateOptions::new(10.0 / kappa, 1.0, 1)).unwrap();
    assert!(max_abs(&(fixed.final_state().as_matrix() - mixed.as_matrix())) < 1e-6);

    // from |a><a| the deviation from I/d decays as exp(-kappa t)
    let a = DensityMatrix::basis(5, HilbertSpace::A);
    let traj = propagate(&l, &a, &PropagateOptions::new(20.0 / kappa, 1.0, 2)).unwrap();
    let expected_dev =
        |t: f64| (a.as_matrix() - mixed.as_matrix()) * esp_core::C64::new((-kappa * t).exp(), 0.0);
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let dev = s.as_matrix() - mixed.as_matrix();
        assert!(max_abs(&(dev - expected_dev(*t))) < 1e-6);
    }
    assert!(max_abs(&(traj.final_state().as_matrix() - mixed.as_matrix())) < 1e-6);

    let ss = steady_state(&l, None).unwrap();
    assert!(max_abs(&(ss.rho.as_matrix() - mixed.as_matrix())) < 1e-12);
}
