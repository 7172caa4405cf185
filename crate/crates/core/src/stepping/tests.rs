use super::*;
use crate::grid::{build_grid, GridSpec};
use crate::jump_operator::JumpOperator;
use crate::linalg::DenseMatrix;
use crate::model::{ParameterSet, PayoffKind, SetId};
use crate::spatial_operator::OperatorSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scalar(a1: f64, jump: f64) -> DenseSystem<f64> {
    let m = |x: f64| DenseMatrix::from_rows(vec![vec![x]]);
    DenseSystem::new(m(0.0), m(a1), m(0.0), m(jump)).unwrap()
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DenseMatrix<f64> {
    DenseMatrix::from_rows((0..n).map(|_| (0..n).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).collect())
}

/// Random system with a diagonally weighted negative `A_1`, `A_2`.
fn random_system(seed: u64, n: usize) -> DenseSystem<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dir1 = random_matrix(&mut rng, n, 0.3);
    let mut dir2 = random_matrix(&mut rng, n, 0.3);
    for i in 0..n {
        dir1[(i, i)] -= 2.0;
        dir2[(i, i)] -= 1.5;
    }
    let mixed = random_matrix(&mut rng, n, 0.2);
    let jump = random_matrix(&mut rng, n, 0.5);
    DenseSystem::new(mixed, dir1, dir2, jump).unwrap()
}

fn random_vec(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn stepper(sys: &DenseSystem<f64>, kind: SchemeKind, dt: f64) -> Stepper<'_, f64, DenseSystem<f64>> {
    Stepper::new(sys, SchemeConfig::new(kind), dt).unwrap()
}

#[test]
fn scalar_surrogate_values() {
    let sys = scalar(-1.0, 0.5);
    let dt = 0.1;
    let v = [1.0];
    let close = |x: f64, y: f64| assert!((x - y).abs() < 1e-15, "{x} vs {y}");
    close(stepper(&sys, SchemeKind::Cnfe, dt).imex_euler_start(&v).unwrap()[0], 0.9529478458049887);
    close(stepper(&sys, SchemeKind::Cnfe, dt).cnfe_step(&v).unwrap()[0], 1.0 / 1.05);
    close(stepper(&sys, SchemeKind::Cnfi, dt).cnfi_step(&v).unwrap()[0], 0.9512471655328798);
    close(stepper(&sys, SchemeKind::Ietr, dt).ietr_step(&v).unwrap()[0], 0.9511904761904761);
    close(stepper(&sys, SchemeKind::Mcs, dt).mcs_step(&v).unwrap()[0], 0.951222684703434);
    close(stepper(&sys, SchemeKind::Mcs2, dt).mcs2_step(&v, &[0.9]).unwrap()[0], 0.9547736732570239);
    close(stepper(&sys, SchemeKind::Sc2a, dt).sc2a_step(&v, &[0.9]).unwrap()[0], 0.958139534883721);
    // equal history: Adams-Bashforth weights sum to one
    close(stepper(&sys, SchemeKind::Cnab, dt).cnab_step(&v, &v).unwrap()[0], 1.0 / 1.05);
}

#[test]
fn trivial_operators_leave_state_unchanged() {
    let z = || DenseMatrix::zeros(3, 3);
    let sys = DenseSystem::new(z(), z(), z(), z()).unwrap();
    let v0 = vec![0.3, -1.0, 2.5];
    for kind in SchemeKind::ALL {
        assert_eq!(run(&sys, SchemeConfig::new(kind), &v0, 5, 1.0).unwrap(), v0, "{kind}");
    }
}

#[test]
fn start_replaces_single_step() {
    let sys = random_system(3, 6);
    let v0 = random_vec(4, 6);
    let s = stepper(&sys, SchemeKind::Cnfe, 0.2);
    assert_eq!(s.integrate(&v0, 1).unwrap(), s.imex_euler_start(&v0).unwrap());
    let s = stepper(&sys, SchemeKind::Mcs2, 0.2);
    assert!(matches!(s.integrate(&v0, 1), Err(Error::InvalidParameter(_))));
    assert!(run(&sys, SchemeConfig::new(SchemeKind::Mcs), &v0, 0, 1.0).is_err());
}

#[test]
fn missing_history_is_reported() {
    let sys = random_system(5, 4);
    for kind in [SchemeKind::Cnab, SchemeKind::Mcs2, SchemeKind::Sc2a] {
        let s = stepper(&sys, kind, 0.1);
        let mut state = StepperState { v_curr: vec![1.0; 4], v_prev: None, n: 1, dt: 0.1 };
        assert!(matches!(s.step(&mut state), Err(Error::MissingHistory { .. })), "{kind}");
    }
}

#[test]
fn cnfi_with_one_iteration_is_cnfe() {
    for seed in 0..5 {
        let sys = random_system(seed, 20);
        let v0 = random_vec(100 + seed, 20);
        let cnfe = run(&sys, SchemeConfig::new(SchemeKind::Cnfe), &v0, 9, 1.0).unwrap();
        let cnfi = run(&sys, SchemeConfig::new(SchemeKind::Cnfi).with_iterations(1), &v0, 9, 1.0).unwrap();
        assert_eq!(cnfe, cnfi);
    }
}

#[test]
fn equal_history_preserves_steady_states() {
    // rows of every part sum to zero, so constants are steady states
    let n = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut zero_rows = |scale: f64| {
        let mut a = random_matrix(&mut rng, n, scale);
        for i in 0..n {
            let s: f64 = (0..n).map(|j| a[(i, j)]).sum();
            a[(i, i)] -= s;
        }
        a
    };
    let sys = DenseSystem::new(zero_rows(0.2), zero_rows(1.0), zero_rows(1.0), zero_rows(0.5)).unwrap();
    let v = vec![2.0; n];
    for kind in [SchemeKind::Cnab, SchemeKind::Mcs2, SchemeKind::Sc2a] {
        let s = stepper(&sys, kind, 0.1);
        let out = match kind {
            SchemeKind::Cnab => s.cnab_step(&v, &v),
            SchemeKind::Mcs2 => s.mcs2_step(&v, &v),
            _ => s.sc2a_step(&v, &v),
        }
        .unwrap();
        for x in out {
            assert!((x - 2.0).abs() < 1e-13, "{kind}: {x}");
        }
    }
}

#[test]
fn mcs2_equal_history_jump_stage_is_forward_euler() {
    // with A_M = 0 the MCS2 jump stage reads dt A_J V, exactly as in the Y_0 of MCS
    let mut sys = random_system(21, 6);
    sys.mixed = DenseMatrix::zeros(6, 6);
    let v = random_vec(22, 6);
    let dt = 0.05;
    let s = stepper(&sys, SchemeKind::Mcs2, dt);
    let got = s.mcs2_step(&v, &v).unwrap();
    let mut no_jump = sys.clone();
    no_jump.jump = DenseMatrix::zeros(6, 6);
    let jv = sys.jump.matvec(&v);
    let shifted: Vec<f64> = v.iter().zip(&jv).map(|(a, b)| a + dt * b).collect();
    // the jump enters only Y_0, so the step is the jump-free step plus the
    // jump-free propagation of the extra Y_0 term
    let base = stepper(&no_jump, SchemeKind::Mcs2, dt);
    let av = [no_jump.dir1.matvec(&v), no_jump.dir2.matvec(&v)];
    let d: Vec<f64> = no_jump.full().matvec(&v);
    let mut y0: Vec<f64> = shifted.iter().zip(&d).map(|(a, b)| a + dt * b).collect();
    let dirs = base.stages().directional().unwrap();
    let theta = 1.0 / 3.0;
    let mut y = y0.clone();
    for k in 0..2 {
        for (yi, ai) in y.iter_mut().zip(&av[k]) {
            *yi -= theta * dt * ai;
        }
        dirs[k].solve_in_place(&mut y);
    }
    let w: Vec<f64> = y.iter().zip(&v).map(|(a, b)| a - b).collect();
    let dw = no_jump.full().matvec(&w);
    for (yi, di) in y0.iter_mut().zip(&dw) {
        *yi += (0.5 - theta) * dt * di;
    }
    for k in 0..2 {
        for (yi, ai) in y0.iter_mut().zip(&av[k]) {
            *yi -= theta * dt * ai;
        }
        dirs[k].solve_in_place(&mut y0);
    }
    for (a, b) in got.iter().zip(&y0) {
        assert!((a - b).abs() < 1e-14, "{a} vs {b}");
    }
}

#[test]
fn jump_evaluations_per_step() {
    let sys = random_system(9, 7);
    let v0 = random_vec(10, 7);
    for kind in SchemeKind::ALL {
        let s = stepper(&sys, kind, 0.1);
        let mut state = s.start(&v0).unwrap();
        let after_start = s.jump_evaluations();
        // two IMEX Euler half-steps, or one MCS step
        assert_eq!(after_start, 2, "{kind}");
        for _ in 0..10 {
            s.step(&mut state).unwrap();
        }
        let per_step = (s.jump_evaluations() - after_start) / 10;
        assert_eq!(per_step, kind.jump_evaluations_per_step(), "{kind}");
        assert_eq!(per_step, SchemeConfig::<f64>::new(kind).jump_evaluations_per_step());
    }
    let s = Stepper::new(&sys, SchemeConfig::new(SchemeKind::Cnfi).with_iterations(3), 0.1).unwrap();
    s.cnfi_step(&v0).unwrap();
    assert_eq!(s.jump_evaluations(), 3);
}

#[test]
fn fair_step_counts_equalize_jump_work() {
    for kind in SchemeKind::ALL {
        assert_eq!(kind.fair_steps(50) * kind.jump_evaluations_per_step(), 100, "{kind}");
    }
    assert_eq!("mcs2".parse::<SchemeKind>().unwrap(), SchemeKind::Mcs2);
    assert_eq!(" SC2A".parse::<SchemeKind>().unwrap(), SchemeKind::Sc2a);
    assert!("adi".parse::<SchemeKind>().is_err());
    assert_eq!(SchemeKind::Cnab.to_string(), "CNAB");
}

#[test]
fn default_coefficients() {
    let c = SchemeConfig::<f64>::new(SchemeKind::Sc2a);
    assert_eq!(c.theta, 0.75);
    assert_eq!(c.adams_hat, [1.5, -0.5]);
    assert_eq!(c.adams_check, [0.75, 0.25]);
    assert_eq!(c.adams_check[0] + c.adams_check[1], 1.0);
    let c = SchemeConfig::<f64>::new(SchemeKind::Mcs);
    assert!((c.theta - 1.0 / 3.0).abs() < 1e-16);
    assert_eq!(c.iterations, 2);
    assert!(c.with_iterations(0).validate().is_err());
    assert!(c.with_theta(0.0).validate().is_err());
}

/// Scalar amplification of each scheme on `a_1 = z1/dt`, `a_2 = z2/dt` with no
/// mixed or jump part, iterated over `n` steps from `v0 = 1`.
fn diagonal_mode(kind: SchemeKind, z1: f64, z2: f64, n: usize) -> f64 {
    let z = z1 + z2;
    let cn = (1.0 + z / 2.0) / (1.0 - z / 2.0);
    let mcs = |th: f64| {
        let p = (1.0 - th * z1) * (1.0 - th * z2);
        1.0 + z / p + (0.5 - th) * z * z / (p * p)
    };
    match kind {
        SchemeKind::Cnfe | SchemeKind::Cnfi | SchemeKind::Ietr | SchemeKind::Cnab => {
            cn.powi(n as i32 - 1) / (1.0 - z / 2.0).powi(2)
        }
        SchemeKind::Mcs | SchemeKind::Mcs2 => mcs(1.0 / 3.0).powi(n as i32),
        SchemeKind::Sc2a => {
            let th = 0.75;
            let p = (1.0 - th * z1) * (1.0 - th * z2);
            let (c1, c2) = (1.5 - th, -0.5 + th);
            let (mut prev, mut cur) = (1.0, mcs(1.0 / 3.0));
            for _ in 1..n {
                let next = cur + z * (c1 * cur + c2 * prev) / p;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

#[test]
fn diagonal_systems_follow_scalar_amplification() {
    let n = 5;
    let dt = 0.1;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let d1: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..0.0)).collect();
    let d2: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..0.0)).collect();
    let diag = |d: &[f64]| {
        let mut m = DenseMatrix::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    };
    let sys = DenseSystem::new(DenseMatrix::zeros(n, n), diag(&d1), diag(&d2), DenseMatrix::zeros(n, n)).unwrap();
    let v0 = vec![1.0; n];
    for kind in SchemeKind::ALL {
        let out = run(&sys, SchemeConfig::new(kind), &v0, 7, 0.7).unwrap();
        for i in 0..n {
            let want = diagonal_mode(kind, d1[i] * dt, d2[i] * dt, 7);
            assert!((out[i] - want).abs() < 1e-12, "{kind} mode {i}: {} vs {want}", out[i]);
        }
    }
}

fn small_pide(m: usize) -> PideSystem<f64> {
    let ps = ParameterSet::preset(SetId::Set1);
    let grid = build_grid(&GridSpec::new(PayoffKind::PutOnMin, m, ps.strike, ps.s_max(PayoffKind::PutOnMin))).unwrap();
    let ops = OperatorSet::assemble(&ps.params, &grid).unwrap();
    let jump = JumpOperator::new(&ps.params, &grid).unwrap();
    PideSystem::new(ops, jump).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn classical_orders_on_small_system() {
    let sys = small_pide(6);
    let v0 = random_vec(33, sys.len());
    for kind in SchemeKind::ALL {
        let sol: Vec<Vec<f64>> = [20, 40, 80].iter().map(|&n| run(&sys, SchemeConfig::new(kind), &v0, n, 1.0).unwrap()).collect();
        let p = (max_diff(&sol[0], &sol[1]) / max_diff(&sol[1], &sol[2])).log2();
        let (lo, hi) = if kind == SchemeKind::Cnfe { (0.9, 1.1) } else { (1.9, 2.1) };
        assert!(p >= lo && p <= hi, "{kind}: order {p}");
    }
}

#[test]
fn factored_stages_solve_accurately() {
    let sys = small_pide(20);
    let n = sys.len();
    let b = random_vec(44, n);
    let bnorm = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let c = 0.01;
    for (which, solver) in [
        (Which::Dir1, sys.factor_direction(1, c).unwrap()),
        (Which::Dir2, sys.factor_direction(2, c).unwrap()),
        (Which::FullD, sys.factor_full(c).unwrap()),
    ] {
        let mut x = b.clone();
        solver.solve_in_place(&mut x);
        let mut ax = vec![0.0; n];
        sys.apply_part(which, &x, &mut ax).unwrap();
        let res = x.iter().zip(&ax).zip(&b).map(|((xi, ai), bi)| (xi - c * ai - bi).abs()).fold(0.0, f64::max);
        assert!(res <= 1e-11 * bnorm, "{which:?}: {res}");
    }
}

#[test]
fn stage_structures() {
    let sys = small_pide(12);
    for kind in SchemeKind::ALL {
        let s = Stepper::new(&sys, SchemeConfig::new(kind), 0.01).unwrap();
        let st = s.stages().structures();
        if kind.is_crank_nicolson() {
            assert_eq!(st, vec![StageStructure::Banded { kl: 14, ku: 14 }], "{kind}");
        } else {
            assert!(st.len() >= 2);
            assert!(st.iter().all(|x| *x == StageStructure::Tridiagonal { lines: 13, line_len: 13 }), "{kind}");
        }
    }
    // SC2A keeps a second pair of factors for its theta = 1/3 start
    let s = Stepper::new(&sys, SchemeConfig::new(SchemeKind::Sc2a), 0.01).unwrap();
    assert_eq!(s.stages().structures().len(), 4);
}

#[test]
fn single_precision_pide_step() {
    let ps = ParameterSet::preset(SetId::Set1);
    let p = ps.params.cast::<f32>();
    let grid = build_grid(&GridSpec::<f32>::new(PayoffKind::PutOnMin, 10, 100.0, 500.0)).unwrap();
    let sys = PideSystem::new(OperatorSet::assemble(&p, &grid).unwrap(), JumpOperator::new(&p, &grid).unwrap()).unwrap();
    let v0 = vec![1.0f32; sys.len()];
    let out = run(&sys, SchemeConfig::new(SchemeKind::Mcs2), &v0, 4, 1.0).unwrap();
    // a constant decays at the discount rate
    assert!((out[0] - (-0.05f32).exp()).abs() < 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn schemes_are_linear(seed in 0u64..1000, alpha in -3.0f64..3.0, beta in -3.0f64..3.0) {
        let sys = random_system(seed, 6);
        let u = random_vec(seed + 1, 6);
        let v = random_vec(seed + 2, 6);
        let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| alpha * a + beta * b).collect();
        for kind in SchemeKind::ALL {
            let cfg = SchemeConfig::new(kind);
            let su = run(&sys, cfg, &u, 4, 0.4).unwrap();
            let sv = run(&sys, cfg, &v, 4, 0.4).unwrap();
            let sw = run(&sys, cfg, &w, 4, 0.4).unwrap();
            for i in 0..6 {
                prop_assert!((sw[i] - alpha * su[i] - beta * sv[i]).abs() < 1e-12 * (1.0 + alpha.abs() + beta.abs()));
            }
        }
    }

    #[test]
    fn cnfi_single_iteration_bitwise(seed in 0u64..1000) {
        let sys = random_system(seed, 20);
        let v0 = random_vec(seed + 7, 20);
        let a = run(&sys, SchemeConfig::new(SchemeKind::Cnfe), &v0, 3, 0.3).unwrap();
        let b = run(&sys, SchemeConfig::new(SchemeKind::Cnfi).with_iterations(1), &v0, 3, 0.3).unwrap();
        prop_assert_eq!(a, b);
    }
}
