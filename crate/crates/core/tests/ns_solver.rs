mod common;

use std::f64::consts::PI;

use nsch_core::ch_solver::chemical_potential;
use nsch_core::constitutive::FluidParams;
use nsch_core::coupled::{kinetic_energy, Forcing, State, StepConfig, Stepper};
use nsch_core::grid::{
    curl_of_nodes, divergence, gradient, helmholtz_project, Bc, EllipticSolverConfig, Grid, NodeField, ScalarField,
    VectorField,
};
use nsch_core::ns_solver::{
    advective, capillary_force, conservative, momentum_step, weak_form_residual, CapillaryForm, MomentumSolver,
    MomentumStepConfig, PhaseSamples, ViscousOperator, WeakTestField,
};
use nsch_core::scenario::low_mode_noise;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(p: f64, nu: f64) -> FluidParams {
    FluidParams { p, nu1: nu, nu2: nu, ..FluidParams::default() }.normalized()
}

fn vortex(g: &Grid, amp: f64) -> VectorField {
    let (lx, ly) = (g.lx(), g.ly());
    let psi = NodeField::from_fn(g, |x, y| {
        if g.periodic() {
            amp * (2.0 * PI * x / lx).sin() * (2.0 * PI * y / ly).sin()
        } else {
            amp * ((PI * x / lx).sin() * (PI * y / ly).sin()).powi(2)
        }
    });
    curl_of_nodes(&psi).unwrap()
}

fn bump_psi(g: &Grid) -> NodeField {
    let (lx, ly) = (g.lx(), g.ly());
    NodeField::from_fn(g, |x, y| ((PI * x / lx).sin() * (PI * y / ly).sin()).powi(2))
}

#[test]
fn rest_state_is_preserved() {
    for bc in [Bc::Periodic, Bc::Physical] {
        let g = Grid::new(16, 16, 2.0, 2.0, bc).unwrap();
        for p in [2.0, 3.0, 1.5] {
            let prm = params(p, 1.0);
            let phi = ScalarField::constant(&g, 0.3);
            let state = State::initial(VectorField::zeros(&g), phi.clone(), &prm).unwrap();
            let mu = chemical_potential(&phi, &prm);
            let (v, pi) = momentum_step(&state, &phi, &mu, &prm, &MomentumStepConfig::new(0.01)).unwrap();
            assert_eq!(v.max_abs(), 0.0, "{bc:?} p={p}");
            assert!(pi.max_abs() <= 1e-14);
        }
    }
}

#[test]
fn constant_phase_exerts_no_capillary_force() {
    let g = Grid::new(16, 16, 2.0, 2.0, Bc::Physical).unwrap();
    let mu = low_mode_noise(&g, 0.0, 1.0, 3, 4);
    assert_eq!(capillary_force(&ScalarField::constant(&g, -0.4), &mu).unwrap().max_abs(), 0.0);
}

#[test]
fn capillary_force_with_constant_potential_is_a_gradient() {
    for bc in [Bc::Periodic, Bc::Physical] {
        let g = Grid::new(24, 24, 3.0, 3.0, bc).unwrap();
        let phi = low_mode_noise(&g, 0.1, 0.8, 4, 9);
        let f = capillary_force(&phi, &ScalarField::constant(&g, 1.7)).unwrap();
        assert!(f.norm_l2() > 0.1);
        assert!(helmholtz_project(&f).unwrap().norm_l2() <= 1e-9 * f.norm_l2());
    }
}

#[test]
fn newtonian_step_needs_one_picard_iteration_and_is_solenoidal() {
    for bc in [Bc::Periodic, Bc::Physical] {
        let g = Grid::new(24, 24, 3.0, 3.0, bc).unwrap();
        let prm = FluidParams { rho1: 1.0, rho2: 3.0, ..params(2.0, 1.0) };
        let phi = low_mode_noise(&g, 0.0, 0.6, 3, 5);
        let state = State::initial(vortex(&g, 0.5), phi.clone(), &prm).unwrap();
        let solver =
            MomentumSolver::new(&g, &prm, MomentumStepConfig::new(0.01), EllipticSolverConfig::default()).unwrap();
        let out = solver.step(&state, &phi, &state.mu, None, None).unwrap();
        assert_eq!(out.picard_iterations, 1);
        assert!(divergence(&out.v).norm_l2() <= 1e-9, "{bc:?}");
    }
}

#[test]
fn shear_thickening_shear_flow_loses_kinetic_energy() {
    let g = Grid::new(16, 32, 1.0, 1.0, Bc::Periodic).unwrap();
    let prm = params(3.0, 0.5);
    let phi = ScalarField::constant(&g, 0.0);
    let mu = chemical_potential(&phi, &prm);
    let v0 = VectorField::from_fn(&g, |_, y| (2.0 * PI * y).sin(), |_, _| 0.0);
    let cfg = MomentumStepConfig::new(0.01);
    let mut state = State::initial(v0, phi.clone(), &prm).unwrap();
    let mut prev = kinetic_energy(&state.rho, &state.v);
    for n in 1..=20 {
        let solver = MomentumSolver::new(&g, &prm, cfg, EllipticSolverConfig::default()).unwrap();
        let out = solver.step(&state, &phi, &mu, None, None).unwrap();
        assert!(out.picard_iterations > 1);
        state = State::assemble(n as f64 * cfg.dt, n, out.v, phi.clone(), mu.clone(), out.pi, &prm).unwrap();
        let e = kinetic_energy(&state.rho, &state.v);
        assert!(e < prev, "step {n}: {e} >= {prev}");
        prev = e;
    }
    // The profile keeps its shape: still a pure x-shear.
    assert!(state.v.v().iter().all(|x| x.abs() < 1e-12));
}

#[test]
fn accelerated_and_plain_picard_agree() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Periodic).unwrap();
    let prm = params(3.0, 0.5);
    let phi = low_mode_noise(&g, 0.0, 0.5, 2, 3);
    let state = State::initial(vortex(&g, 0.2), phi.clone(), &prm).unwrap();
    let solve = |depth: usize| {
        let cfg = MomentumStepConfig { anderson_depth: depth, max_picard_iter: 5000, picard_tol: 1e-11, ..MomentumStepConfig::new(0.01) };
        MomentumSolver::new(&g, &prm, cfg, EllipticSolverConfig::default()).unwrap().step(&state, &phi, &state.mu, None, None).unwrap()
    };
    let (plain, fast) = (solve(0), solve(5));
    assert!(fast.picard_iterations < plain.picard_iterations);
    assert!(fast.v.sub(&plain.v).norm_l2() <= 1e-8 * plain.v.norm_l2());
}

#[test]
fn viscous_operator_pairs_with_its_dissipation() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Physical).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut v = VectorField::zeros(&g);
    v.data_mut().iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    v.enforce_walls();
    let phi = low_mode_noise(&g, 0.0, 0.9, 3, 1);
    for p in [1.5, 2.0, 3.0] {
        let prm = FluidParams { nu2: 3.0, ..params(p, 1.0) };
        let op = ViscousOperator::new(&PhaseSamples::new(&phi), &v, &prm);
        let lhs = op.apply(&v).dot(&v);
        let d = op.dissipation(&v);
        assert!(d > 0.0 && (lhs - d).abs() <= 1e-11 * d, "p={p}: {lhs} vs {d}");
    }
}

#[test]
fn advective_and_conservative_forms_agree_asymptotically() {
    let err = |n: usize| {
        let g = Grid::new(n, n, 1.0, 1.0, Bc::Periodic).unwrap();
        let v = vortex(&g, 0.2);
        let f = vortex(&g, 0.3);
        advective(&v, &f).sub(&conservative(&v, &f)).max_abs()
    };
    let (a, b, c) = (err(16), err(32), err(64));
    assert!(c < b && b < a && (b / c).log2() >= 1.8, "{a:e} {b:e} {c:e}");
}

#[test]
fn weak_residual_vanishes_at_rest() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Physical).unwrap();
    let prm = params(2.0, 1.0);
    let phi = ScalarField::constant(&g, 0.2);
    let traj: Vec<State> = (0..4)
        .map(|n| {
            let mut s = State::initial(VectorField::zeros(&g), phi.clone(), &prm).unwrap();
            s.t = 0.1 * n as f64;
            s.step = n;
            s
        })
        .collect();
    let tf = WeakTestField::from_streamfunction(&bump_psi(&g)).unwrap();
    assert!(weak_form_residual(&traj, &prm, &[tf.clone()]).unwrap() <= 1e-10);
    assert!(weak_form_residual(&traj[..1], &prm, &[tf]).is_err());
}

#[test]
fn compressible_test_field_is_rejected() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Physical).unwrap();
    let mut grad = gradient(&ScalarField::from_fn(&g, |x, y| (PI * x).cos() * (PI * y).cos()));
    grad.enforce_walls();
    assert!(WeakTestField::new(grad, |t, t_end| 1.0 - t / t_end).is_err());
}

#[test]
fn invalid_momentum_configuration_is_rejected() {
    let bad = [
        MomentumStepConfig { relaxation: 0.0, ..MomentumStepConfig::new(0.1) },
        MomentumStepConfig { eps: -1.0, ..MomentumStepConfig::new(0.1) },
        MomentumStepConfig::new(0.0),
    ];
    for cfg in bad {
        assert!(cfg.validate().is_err(), "{cfg:?}");
    }
}

#[test]
fn newtonian_matched_density_matches_fourier_oracle() {
    let g = Grid::new(32, 32, 2.0, 2.0, Bc::Periodic).unwrap();
    let nu = 0.5;
    let prm = params(2.0, nu);
    let dt = 1e-2;
    let mut cfg = StepConfig::new(dt);
    cfg.momentum.capillary = CapillaryForm::MuGradPhi;
    let stepper = Stepper::new(&g, &prm, cfg).unwrap();
    let mut state = State::initial(vortex(&g, 0.3), low_mode_noise(&g, 0.0, 0.7, 3, 21), &prm).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let (next, _, stats) = stepper.step_with(&state, Forcing::default()).unwrap();
        assert_eq!(stats.picard_iterations, 1);
        let oracle = common::newtonian_step(&state.v, &next.phi, &next.mu, nu, dt);
        worst = worst.max(next.v.sub(&oracle).norm_l2() / oracle.norm_l2());
        state = next;
    }
    assert!(worst <= 1e-8, "relative deviation {worst:e}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn momentum_output_is_discretely_solenoidal(seed in any::<u64>(), p in 1.6..3.0f64, physical in any::<bool>()) {
        let bc = if physical { Bc::Physical } else { Bc::Periodic };
        let g = Grid::new(16, 16, 2.0, 2.0, bc).unwrap();
        let prm = FluidParams { rho2: 2.0, nu2: 2.0, ..params(p, 1.0) };
        let phi = low_mode_noise(&g, 0.0, 0.8, 3, seed);
        let state = State::initial(vortex(&g, 0.3), phi.clone(), &prm).unwrap();
        let cfg = MomentumStepConfig::new(0.01);
        let (v, _) = momentum_step(&state, &phi, &state.mu, &prm, &cfg).unwrap();
        prop_assert!(divergence(&v).norm_l2() <= 1e-9);
    }
}
