mod common;

use common::{upwind_propagator, Explicit};
use mgrit_modes::advection::{AdvectionModel, AdvectionParams};
use mgrit_modes::mgrit::{
    exact_solve, f_relax, initial_guess, initial_value_rhs, mgrit_cycle, run_experiment, ErrorScope, ExperimentSpec,
    Guess, InitialCondition, SpaceTimeState, Stepper,
};
use mgrit_modes::sama::{sama_maps_on, NormKind, SamaVariant, Scope};
use mgrit_modes::sweep::discrete_grid;
use mgrit_modes::{Cycle, Hierarchy, MethodSpec, Relaxation};
use proptest::prelude::*;
use std::f64::consts::PI;

fn params(nx: usize) -> AdvectionParams {
    AdvectionParams::new(1.0, 0.5, 0.2, nx).unwrap()
}

fn wave(nx: usize) -> Vec<f64> {
    (0..nx)
        .map(|j| (0.9 * j as f64).sin() + 0.3 * (2.1 * j as f64).cos())
        .collect()
}

fn methods() -> Vec<(MethodSpec, usize)> {
    let mut out = Vec::new();
    for relax in [Relaxation::F, Relaxation::FCF] {
        out.push((MethodSpec::two_level(relax), 1));
        out.push((MethodSpec::new(relax, Cycle::ThreeLevelV), 2));
        out.push((MethodSpec::new(relax, Cycle::ThreeLevelF), 2));
    }
    out
}

/// Scalar multiples of the identity with a deliberately poor coarse
/// propagator, so convergence before the exactness index is slow.
struct BadCoarse;

impl Stepper for BadCoarse {
    fn nx(&self) -> usize {
        3
    }

    fn step(&self, scale: usize, u: &[f64]) -> Vec<f64> {
        let a = if scale == 1 { 0.95 } else { 0.2 };
        u.iter().map(|x| a * x).collect()
    }
}

fn error(h: &Hierarchy, method: &MethodSpec, iters: usize) -> (f64, f64) {
    let u0 = [1.0, -0.5, 2.0];
    let exact = exact_solve(&BadCoarse, h, &u0).unwrap();
    let rhs = initial_value_rhs(h, &u0);
    let mut s = initial_guess(h, &u0, Guess::Random { seed: 3 });
    let e0 = s.distance(&exact, ErrorScope::AllPoints);
    for _ in 0..iters {
        mgrit_cycle(&BadCoarse, &mut s, &rhs, method).unwrap();
    }
    (s.distance(&exact, ErrorScope::AllPoints), e0)
}

#[test]
fn exact_after_coarse_interval_count() {
    for nt in [8, 16, 32, 64] {
        for m in [2, 4] {
            let h = Hierarchy::two_level(nt, m).unwrap();
            let nc = nt / m;
            for (relax, n) in [(Relaxation::F, nc), (Relaxation::FCF, nc.div_ceil(2))] {
                let method = MethodSpec::two_level(relax);
                let (e, e0) = error(&h, &method, n);
                assert!(e <= 1e-13 * e0, "nt {nt} m {m} {relax:?}: {e} after {n}");
                let (e, e0) = error(&h, &method, n - 1);
                assert!(e > 1e-6 * e0, "nt {nt} m {m} {relax:?}: exact already after {}", n - 1);
            }
        }
    }
}

#[test]
fn solution_is_a_fixed_point() {
    let p = params(8);
    let u0 = wave(8);
    for (method, m2) in methods() {
        let h = Hierarchy::new(16, 2, m2).unwrap();
        let exact = exact_solve(&p, &h, &u0).unwrap();
        let mut s = exact.clone();
        mgrit_cycle(&p, &mut s, &initial_value_rhs(&h, &u0), &method).unwrap();
        assert!(s.distance(&exact, ErrorScope::AllPoints) < 1e-13, "{method:?}");
    }
}

#[test]
fn f_relaxation_is_idempotent() {
    let p = params(8);
    let h = Hierarchy::two_level(16, 4).unwrap();
    let u0 = wave(8);
    let rhs = initial_value_rhs(&h, &u0);
    let mut s = initial_guess(&h, &u0, Guess::Random { seed: 9 });
    f_relax(&p, &mut s, &rhs);
    let once = s.clone();
    f_relax(&p, &mut s, &rhs);
    assert_eq!(s, once);
}

fn random_state(h: &Hierarchy, nx: usize, seed: u64) -> SpaceTimeState {
    initial_guess(h, &vec![0.0; nx], Guess::Random { seed })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn error_propagation_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, s1 in 0u64..1000, s2 in 0u64..1000, which in 0usize..6) {
        let (method, m2) = methods()[which];
        let p = params(6);
        let h = Hierarchy::new(16, 2, m2).unwrap();
        let g = initial_value_rhs(&h, &[0.0; 6]);
        let (mut x, mut y) = (random_state(&h, 6, s1), random_state(&h, 6, s2));
        let mut z = x.clone();
        for (zi, yi) in z.values.iter_mut().zip(&y.values) {
            for (zv, yv) in zi.iter_mut().zip(yi) {
                *zv = a * *zv + b * yv;
            }
        }
        mgrit_cycle(&p, &mut x, &g, &method).unwrap();
        mgrit_cycle(&p, &mut y, &g, &method).unwrap();
        mgrit_cycle(&p, &mut z, &g, &method).unwrap();
        for i in 0..z.values.len() {
            for j in 0..6 {
                let want = a * x.values[i][j] + b * y.values[i][j];
                prop_assert!((z.values[i][j] - want).abs() <= 1e-12 * (1.0 + want.abs()));
            }
        }
    }
}

#[test]
fn simulator_matches_dense_iteration_matrix() {
    let nx = 4;
    let p = params(nx);
    for (method, m2) in methods() {
        let h = Hierarchy::new(8, 2, m2).unwrap();
        let mut phis = vec![upwind_propagator(nx, p.cfl(1)), upwind_propagator(nx, p.cfl(2))];
        let mut factors = vec![2];
        if m2 > 1 {
            phis.push(upwind_propagator(nx, p.cfl(2 * m2)));
            factors.push(m2);
        }
        let e = Explicit::new(phis, 8, &factors, method.relax, method.cycle).formula_matrix();
        let g = initial_value_rhs(&h, &vec![0.0; nx]);
        // Columns with a nonzero initial block are outside the error space.
        for col in nx..e.cols() {
            let mut s = SpaceTimeState::zeros(h, nx);
            s.values[col / nx][col % nx] = 1.0;
            mgrit_cycle(&p, &mut s, &g, &method).unwrap();
            for (i, block) in s.values.iter().enumerate() {
                for (x, v) in block.iter().enumerate() {
                    let want = e[(i * nx + x, col)];
                    assert!(
                        (v - want.re).abs() < 1e-13 && want.im.abs() < 1e-13,
                        "{method:?} col {col}"
                    );
                }
            }
        }
    }
}

#[test]
fn measured_reduction_is_bounded_by_sama() {
    let nx = 16;
    let p = params(nx);
    let source = AdvectionModel::new(p);
    let full = SamaVariant::new(Scope::Full, NormKind::Exact2);
    let ic = InitialCondition::CosineSum(vec![(2.0, PI / 8.0), (1.0, 7.0 * PI / 8.0)]);
    for (method, m2) in methods() {
        let h = Hierarchy::new(32, 2, m2).unwrap();
        let bound = sama_maps_on(&source, &discrete_grid(nx), &h, &method, &[full], 6).unwrap()[0]
            .reduce()
            .values();
        for guess in [Guess::Random { seed: 5 }, Guess::Zero] {
            let spec = ExperimentSpec {
                initial_condition: ic.clone(),
                guess,
                iters: 6,
                error_norm_scope: ErrorScope::AllPoints,
            };
            let r = run_experiment(&p, &h, &method, &spec).unwrap().reductions;
            for (k, (got, b)) in r.iter().zip(&bound).enumerate() {
                assert!(*got <= b + 1e-9, "{method:?} {guess:?} k {}: {got} > {b}", k + 1);
            }
        }
    }
}

#[test]
fn invalid_experiments_are_rejected() {
    let p = params(16);
    let h = Hierarchy::two_level(8, 2).unwrap();
    let mut spec = ExperimentSpec {
        initial_condition: InitialCondition::CosineSum(vec![(1.0, 0.3)]),
        guess: Guess::Zero,
        iters: 2,
        error_norm_scope: ErrorScope::AllPoints,
    };
    assert!(run_experiment(&p, &h, &MethodSpec::two_level(Relaxation::F), &spec).is_err());
    spec.initial_condition = InitialCondition::Custom(vec![0.0; 3]);
    assert!(run_experiment(&p, &h, &MethodSpec::two_level(Relaxation::F), &spec).is_err());
    spec.initial_condition = InitialCondition::Custom(vec![0.0; 16]);
    spec.iters = 0;
    assert!(run_experiment(&p, &h, &MethodSpec::two_level(Relaxation::F), &spec).is_err());
}

#[test]
fn error_equation_reproduces_full_problem() {
    let p = params(16);
    let u0 = InitialCondition::CosineSum(vec![(2.0, PI / 8.0)]).samples(16).unwrap();
    for (method, m2) in methods() {
        let h = Hierarchy::new(32, 2, m2).unwrap();
        let exact = exact_solve(&p, &h, &u0).unwrap();
        let rhs = initial_value_rhs(&h, &u0);
        let zero_rhs = initial_value_rhs(&h, &[0.0; 16]);
        let mut u = initial_guess(&h, &u0, Guess::Random { seed: 11 });
        let mut e = u.clone();
        for (ei, xi) in e.values.iter_mut().zip(&exact.values) {
            for (a, b) in ei.iter_mut().zip(xi) {
                *a -= b;
            }
        }
        let zero = SpaceTimeState::zeros(h, 16);
        for k in 0..6 {
            let full = u.distance(&exact, ErrorScope::AllPoints);
            let err = e.distance(&zero, ErrorScope::AllPoints);
            assert!(
                (full - err).abs() <= 1e-12 * err.max(1e-300) + 1e-15,
                "{method:?} k {k}: {full} vs {err}"
            );
            mgrit_cycle(&p, &mut u, &rhs, &method).unwrap();
            mgrit_cycle(&p, &mut e, &zero_rhs, &method).unwrap();
        }
    }
}
