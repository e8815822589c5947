use std::f64::consts::PI;

use nsch_core::grid::snapshot::{read_scalar, read_vector, write_scalar, write_vector, Encoding, MAGIC};
use nsch_core::grid::{
    biharmonic_apply, biharmonic_solve_clamped, divergence, gradient, helmholtz_project, laplacian,
    poisson_solve_neumann, stokes_mollify, sym_gradient, Bc, BiharmonicSolver, EllipticMethod, EllipticSolverConfig,
    Grid, NodeField, Projector, ScalarField, VectorField,
};
use nsch_core::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_scalar(g: &Grid, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..g.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_vec(g, data)
}

fn random_vector(g: &Grid, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = VectorField::zeros(g);
    v.data_mut().iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
    v.enforce_walls();
    v
}

fn grids() -> [Grid; 2] {
    [
        Grid::new(24, 16, 3.0, 2.0, Bc::Periodic).unwrap(),
        Grid::new(24, 16, 3.0, 2.0, Bc::Physical).unwrap(),
    ]
}

fn order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}

#[test]
fn grid_rejects_small_or_degenerate_sizes() {
    assert!(Grid::new(4, 16, 1.0, 1.0, Bc::Periodic).is_err());
    assert!(Grid::new(16, 16, 0.0, 1.0, Bc::Periodic).is_err());
    let g = Grid::new(16, 8, 2.0, 1.0, Bc::Physical).unwrap();
    assert_eq!((g.nux(), g.nvy()), (17, 9));
    assert_eq!(g.dx, 0.125);
}

#[test]
fn gradient_of_constant_vanishes() {
    for g in grids() {
        assert_eq!(gradient(&ScalarField::constant(&g, 3.7)).max_abs(), 0.0);
        assert_eq!(laplacian(&ScalarField::constant(&g, -2.0)).max_abs(), 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gradient_is_negative_adjoint_of_divergence(seed in any::<u64>(), physical in any::<bool>()) {
        let g = grids()[physical as usize];
        let f = random_scalar(&g, seed);
        let u = random_vector(&g, seed ^ 0xabc);
        let lhs = gradient(&f).dot(&u);
        let rhs = -f.dot(&divergence(&u));
        let scale = gradient(&f).norm_l2() * u.norm_l2();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn laplacian_is_div_grad(seed in any::<u64>(), physical in any::<bool>()) {
        let g = grids()[physical as usize];
        let f = random_scalar(&g, seed);
        let a = laplacian(&f);
        let b = divergence(&gradient(&f));
        prop_assert!(a.sub(&b).max_abs() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), physical in any::<bool>()) {
        let g = grids()[physical as usize];
        let u = random_vector(&g, seed);
        let p1 = helmholtz_project(&u).unwrap();
        let p2 = helmholtz_project(&p1).unwrap();
        prop_assert!(divergence(&p1).norm_l2() <= 1e-9);
        prop_assert!(p2.sub(&p1).norm_l2() <= 1e-9 * p1.norm_l2());
        // Orthogonal: the removed part is a gradient, hence normal to P u.
        prop_assert!(u.sub(&p1).dot(&p1).abs() <= 1e-9 * u.norm_l2() * p1.norm_l2());
    }

    #[test]
    fn mollifier_contracts(seed in any::<u64>(), physical in any::<bool>(), eps in 1e-4..10.0f64) {
        let g = grids()[physical as usize];
        let u = random_vector(&g, seed);
        let pu = helmholtz_project(&u).unwrap();
        let m = stokes_mollify(&u, eps).unwrap();
        prop_assert!(m.norm_l2() <= pu.norm_l2() * (1.0 + 1e-12));
        prop_assert!(divergence(&m).norm_l2() <= 1e-9);
        prop_assert!(sym_gradient(&m).norm_lq(2.0) <= sym_gradient(&pu).norm_lq(2.0) * (1.0 + 1e-12));
    }
}

#[test]
fn periodic_laplacian_converges_on_eigenfunction() {
    let err = |n: usize| {
        let g = Grid::new(n, n, 2.0, 2.0, Bc::Periodic).unwrap();
        let k = 2.0 * PI / g.lx();
        let f = ScalarField::from_fn(&g, |x, _| (k * x).sin());
        laplacian(&f).sub(&f.scaled(-k * k)).max_abs()
    };
    let (a, b, c) = (err(16), err(32), err(64));
    assert!(order(a, b) >= 1.9 && order(b, c) >= 1.9, "{a} {b} {c}");
}

#[test]
fn masked_rotation_is_nearly_divergence_free() {
    // u = ∇⊥ψ sampled pointwise, ψ vanishing with its gradient on walls.
    let err = |n: usize| {
        let g = Grid::new(n, n, 1.0, 1.0, Bc::Physical).unwrap();
        let b = |s: f64| s * s * (1.0 - s) * (1.0 - s);
        let db = |s: f64| 2.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
        let u = VectorField::from_fn(&g, |x, y| b(x) * db(y), |x, y| -db(x) * b(y));
        divergence(&u).max_abs()
    };
    let (a, b, c) = (err(32), err(64), err(128));
    assert!(c < 1e-4 && order(a, b) >= 1.8 && order(b, c) >= order(a, b), "{a} {b} {c}");
}

#[test]
fn poisson_zero_rhs_gives_zero() {
    for g in grids() {
        assert_eq!(poisson_solve_neumann(&ScalarField::zeros(&g)).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn poisson_recovers_fourier_eigenfunction() {
    let n = 32;
    let g = Grid::new(n, n, 3.0, 3.0, Bc::Periodic).unwrap();
    let k = 2.0 * PI / g.lx();
    let rhs = ScalarField::from_fn(&g, |x, _| (k * x).sin());
    let u = poisson_solve_neumann(&rhs).unwrap();
    // Exact for the discrete symbol, O(dx²) against the continuum.
    let lam = 4.0 * (0.5 * k * g.dx).sin().powi(2) / (g.dx * g.dx);
    assert!(u.sub(&rhs.scaled(-1.0 / lam)).max_abs() < 1e-12);
    let cont = rhs.scaled(-1.0 / (k * k));
    assert!(u.sub(&cont).max_abs() < (k * g.dx).powi(2) / 12.0 / (k * k) * 1.01);
}

#[test]
fn poisson_residual_on_random_data() {
    for g in grids() {
        for method in [EllipticMethod::Direct, EllipticMethod::ConjugateGradient] {
            let p = Projector::with_config(&g, EllipticSolverConfig { method, ..EllipticSolverConfig::default() }).unwrap();
            let mut rhs = random_scalar(&g, 11);
            rhs.subtract_mean();
            let u = p.poisson(&rhs).unwrap();
            let res = laplacian(&u).sub(&rhs).norm_l2() / rhs.norm_l2();
            assert!(res <= 1e-10, "{method:?} {:?}: {res:e}", g.bc);
            assert!(u.mean().abs() < 1e-14);
        }
    }
}

#[test]
fn poisson_rejects_incompatible_rhs() {
    let g = grids()[1];
    let r = poisson_solve_neumann(&ScalarField::constant(&g, 1.0));
    assert!(matches!(r, Err(Error::Incompatible(_))));
}

#[test]
fn neumann_poisson_converges_second_order() {
    let err = |n: usize| {
        let g = Grid::new(n, n, 1.0, 1.0, Bc::Physical).unwrap();
        let exact = ScalarField::from_fn(&g, |x, y| (PI * x).cos() * (2.0 * PI * y).cos());
        let rhs = exact.scaled(-5.0 * PI * PI);
        let u = poisson_solve_neumann(&rhs).unwrap();
        u.sub(&exact).max_abs()
    };
    let (a, b, c) = (err(16), err(32), err(64));
    assert!(order(a, b) >= 1.9 && order(b, c) >= 1.9, "{a} {b} {c}");
}

#[test]
fn projection_removes_gradients_and_keeps_solenoidal_fields() {
    for g in grids() {
        let grad = gradient(&random_scalar(&g, 3));
        assert!(helmholtz_project(&grad).unwrap().norm_l2() <= 1e-9 * grad.norm_l2());
        let sol = helmholtz_project(&random_vector(&g, 4)).unwrap();
        assert!(helmholtz_project(&sol).unwrap().sub(&sol).norm_l2() <= 1e-10 * sol.norm_l2());
    }
}

#[test]
fn mollifier_symbol_on_fourier_mode() {
    let g = Grid::new(32, 32, 2.0, 2.0, Bc::Periodic).unwrap();
    let k = 2.0 * PI * 2.0 / g.ly();
    let u = VectorField::from_fn(&g, |_, y| (k * y).sin(), |_, _| 0.0);
    for eps in [0.0, 0.01, 0.1, 1.0] {
        let m = stokes_mollify(&u, eps).unwrap();
        let lam = 4.0 * (0.5 * k * g.dy).sin().powi(2) / (g.dy * g.dy);
        assert!(m.sub(&u.scaled(1.0 / (1.0 + eps * lam))).max_abs() < 1e-12);
        let cont = u.scaled(1.0 / (1.0 + eps * k * k));
        assert!(m.sub(&cont).max_abs() <= (k * g.dy).powi(2) / 12.0);
    }
}

#[test]
fn mollifier_norm_decays_monotonically_in_eps() {
    for g in grids() {
        let u = random_vector(&g, 9);
        let mut prev = helmholtz_project(&u).unwrap().norm_l2();
        for eps in [1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0] {
            let n = stokes_mollify(&u, eps).unwrap().norm_l2();
            assert!(n <= prev * (1.0 + 1e-12), "{:?} eps {eps}: {n} > {prev}", g.bc);
            prev = n;
        }
        assert!(prev < 0.05 * helmholtz_project(&u).unwrap().norm_l2() || g.periodic());
    }
}

fn plate(x: f64, y: f64) -> (f64, f64) {
    // w = sin²(πx) sin²(πy) and Δ²w.
    let a = (PI * x).sin().powi(2);
    let b = (PI * y).sin().powi(2);
    let a2 = 2.0 * PI * PI * (2.0 * PI * x).cos();
    let b2 = 2.0 * PI * PI * (2.0 * PI * y).cos();
    let a4 = -8.0 * PI.powi(4) * (2.0 * PI * x).cos();
    let b4 = -8.0 * PI.powi(4) * (2.0 * PI * y).cos();
    (a * b, a4 * b + 2.0 * a2 * b2 + a * b4)
}

#[test]
fn biharmonic_zero_rhs_gives_zero() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Physical).unwrap();
    assert_eq!(biharmonic_solve_clamped(&ScalarField::zeros(&g)).unwrap().max_abs(), 0.0);
}

#[test]
fn biharmonic_manufactured_plate_converges() {
    let err = |n: usize| {
        let g = Grid::new(n, n, 1.0, 1.0, Bc::Physical).unwrap();
        let rhs = NodeField::from_fn(&g, |x, y| plate(x, y).1);
        let exact = NodeField::from_fn(&g, |x, y| plate(x, y).0);
        let u = BiharmonicSolver::new(&g).unwrap().solve(&rhs).unwrap();
        let mut e: f64 = 0.0;
        for (a, b) in u.data().iter().zip(exact.data()) {
            e = e.max((a - b).abs());
        }
        e
    };
    let (a, b, c) = (err(16), err(32), err(64));
    assert!(c < 2e-3 && order(a, b) >= 1.9 && order(b, c) >= 1.9, "{a} {b} {c}");
}

#[test]
fn biharmonic_direct_and_iterative_agree() {
    let g = Grid::new(20, 20, 1.0, 1.0, Bc::Physical).unwrap();
    let rhs = NodeField::from_fn(&g, |x, y| (3.0 * x).sin() + y * y - x * y);
    let s = BiharmonicSolver::new(&g).unwrap();
    let a = s.solve(&rhs).unwrap();
    let (b, st) = s.solve_cg(&rhs, 1e-12, 2000).unwrap();
    assert!(st.converged);
    let diff = a.data().iter().zip(b.data()).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-9 * a.max_abs(), "{diff:e}");
    // Residual of the direct solve on interior nodes.
    let r = biharmonic_apply(&a);
    let (na, nb) = g.node_dims();
    for j in 1..nb - 1 {
        for i in 1..na - 1 {
            assert!((r.get(i, j) - rhs.get(i, j)).abs() <= 1e-8 * rhs.max_abs());
        }
    }
}

#[test]
fn biharmonic_point_load_is_symmetric() {
    let g = Grid::new(16, 16, 1.0, 1.0, Bc::Physical).unwrap();
    let (na, nb) = g.node_dims();
    let mut rhs = NodeField::zeros(&g);
    rhs.set(na / 2, nb / 2, 1.0 / g.cell_area());
    let u = BiharmonicSolver::new(&g).unwrap().solve(&rhs).unwrap();
    assert!(u.data().iter().all(|v| v.is_finite()));
    assert!(u.get(na / 2, nb / 2) > 0.0);
    let m = u.max_abs();
    for j in 0..nb {
        for i in 0..na {
            let c = u.get(i, j);
            assert!((c - u.get(na - 1 - i, j)).abs() <= 1e-12 * m);
            assert!((c - u.get(i, nb - 1 - j)).abs() <= 1e-12 * m);
            assert!((c - u.get(j, i)).abs() <= 1e-12 * m);
        }
    }
    for i in 0..na {
        assert_eq!(u.get(i, 0), 0.0);
        assert_eq!(u.get(0, i), 0.0);
    }
}

#[test]
fn grid_mismatch_is_reported() {
    let [a, b] = grids();
    assert!(matches!(random_scalar(&a, 1).zip_map(&random_scalar(&b, 1), |x, y| x + y), Err(Error::GridMismatch(_))));
}

#[test]
fn snapshots_round_trip_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    for g in grids() {
        for enc in [Encoding::Text, Encoding::Binary] {
            let f = random_scalar(&g, 5).map(|x| x / 3.0);
            let v = random_vector(&g, 6).map(|x| x * PI);
            let fp = dir.path().join(format!("f_{:?}_{enc:?}.dat", g.bc));
            let vp = dir.path().join(format!("v_{:?}_{enc:?}.dat", g.bc));
            write_scalar(&fp, &f, 0.125, enc).unwrap();
            write_vector(&vp, &v, 0.25, enc).unwrap();
            let (f2, t) = read_scalar(&fp).unwrap();
            let (v2, s) = read_vector(&vp).unwrap();
            assert_eq!((t, s), (0.125, 0.25));
            assert_eq!(f2, f);
            assert_eq!(v2, v);
            let head = std::fs::read(&fp).unwrap();
            assert!(head.starts_with(MAGIC.as_bytes()));
        }
    }
}

#[test]
fn truncated_snapshot_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let g = grids()[0];
    let p = dir.path().join("f.dat");
    write_scalar(&p, &random_scalar(&g, 1), 0.0, Encoding::Text).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
    std::fs::write(&p, cut).unwrap();
    assert!(matches!(read_scalar(&p), Err(Error::Snapshot { .. })));
}
