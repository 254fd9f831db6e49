use mgrit_modes::advection::{phi_symbol, AdvectionModel, AdvectionParams};
use mgrit_modes::lfa::{power_norms, sigma_lfa, three_level_symbol, two_level_symbol, LfaSweep, SingularPolicy};
use mgrit_modes::sama::{sigma_sama, NormKind, SamaSweep, SamaVariant, Scope};
use mgrit_modes::{CMatrix, Complex64, Cycle, Hierarchy, MethodSpec, Relaxation};
use proptest::prelude::*;
use std::f64::consts::PI;

fn adv() -> AdvectionParams {
    AdvectionParams::new(1.0, 0.5, 0.1, 64).unwrap()
}

fn symbols(theta: f64, m: usize) -> (CMatrix, CMatrix) {
    let p = adv();
    (
        CMatrix::scalar(phi_symbol(theta, &p, 1)),
        CMatrix::scalar(phi_symbol(theta, &p, m)),
    )
}

fn relaxations() -> impl Strategy<Value = Relaxation> {
    prop_oneof![Just(Relaxation::F), Just(Relaxation::FCF)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn powers_are_submultiplicative(theta in -PI..PI, u in -0.5..0.5f64, m in 2usize..6, relax in relaxations()) {
        let (phi, phic) = symbols(theta, m);
        let e = two_level_symbol(&phi, &phic, m, u * 2.0 * PI / m as f64, relax).unwrap();
        let n = power_norms(&e, 8).unwrap();
        for k in 1..8 {
            prop_assert!(n[k] <= n[k - 1] * n[0] * (1.0 + 1e-12) + 1e-300);
        }
    }

    #[test]
    fn real_operator_symmetry(theta in -PI..PI, u in -0.49..0.49f64, m in 2usize..6, relax in relaxations()) {
        let w = u * 2.0 * PI / m as f64;
        let (phi, phic) = symbols(theta, m);
        let (phim, phicm) = symbols(-theta, m);
        let a = two_level_symbol(&phi, &phic, m, w, relax).unwrap();
        let b = two_level_symbol(&phim, &phicm, m, -w, relax).unwrap();
        let conj = CMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)].conj());
        prop_assert!(b.max_abs_diff(&conj) <= 1e-13 * (1.0 + a.max_abs()));
    }

    #[test]
    fn f_relaxation_acts_through_first_block(theta in -PI..PI, u in -0.5..0.5f64, m in 2usize..6) {
        let (phi, phic) = symbols(theta, m);
        let e = two_level_symbol(&phi, &phic, m, u * 2.0 * PI / m as f64, Relaxation::F).unwrap();
        for i in 0..e.rows() {
            for j in 1..e.cols() {
                prop_assert_eq!(e[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }
}

/// The norm at `(θ, ω)` against `(θ, −ω)` alone, which is not a symmetry of
/// the upwind scheme; only the joint reflection is.
#[test]
fn omega_reflection_alone_is_not_a_symmetry() {
    let (phi, phic) = symbols(0.8, 2);
    let a = two_level_symbol(&phi, &phic, 2, 0.9, Relaxation::F)
        .unwrap()
        .norm_two()
        .unwrap();
    let b = two_level_symbol(&phi, &phic, 2, -0.9, Relaxation::F)
        .unwrap()
        .norm_two()
        .unwrap();
    let (phim, phicm) = symbols(-0.8, 2);
    let c = two_level_symbol(&phim, &phicm, 2, -0.9, Relaxation::F)
        .unwrap()
        .norm_two()
        .unwrap();
    assert!((a - c).abs() < 1e-14 * a);
    assert!((a - b).abs() > 1e-6, "{a} {b}");
}

#[test]
fn three_level_f_relaxation_structure() {
    let p = adv();
    let s = |k| CMatrix::scalar(phi_symbol(1.1, &p, k));
    for cycle in [Cycle::ThreeLevelV, Cycle::ThreeLevelF] {
        let e = three_level_symbol(&s(1), &s(2), &s(4), 2, 2, 0.3, Relaxation::F, cycle).unwrap();
        assert_eq!(e.rows(), 4);
        // Only the columns of C-points are read.
        for i in 0..4 {
            assert_eq!(e[(i, 1)], Complex64::new(0.0, 0.0));
            assert_eq!(e[(i, 3)], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn sigma_is_submultiplicative_over_the_sweep() {
    let source = AdvectionModel::new(adv());
    for (cycle, m2) in [(Cycle::TwoLevel, 1), (Cycle::ThreeLevelV, 2)] {
        for relax in [Relaxation::F, Relaxation::FCF] {
            let h = Hierarchy::new(64, 2, m2).unwrap();
            let sweep = LfaSweep {
                k_max: 6,
                h_theta: PI / 16.0,
                h_omega: PI / 32.0,
                singular: SingularPolicy::Exclude,
            };
            let s = sigma_lfa(&source, &h, &MethodSpec::new(relax, cycle), &sweep)
                .unwrap()
                .values();
            for (k, v) in s.iter().enumerate() {
                assert!(
                    *v <= s[0].powi(k as i32 + 1) * (1.0 + 1e-12),
                    "{cycle:?} {relax:?} k {}",
                    k + 1
                );
            }
        }
    }
}

/// Finite-interval SAMA stays below the infinite-grid supremum and
/// approaches it as the interval grows.
#[test]
fn sama_approaches_lfa_from_below() {
    let source = AdvectionModel::new(adv());
    let method = MethodSpec::two_level(Relaxation::F);
    let full = SamaVariant::new(Scope::Full, NormKind::Exact2);
    let h_theta = PI / 8.0;
    let lfa_h = Hierarchy::two_level(64, 2).unwrap();
    let sweep = LfaSweep {
        k_max: 1,
        h_theta,
        h_omega: PI / 512.0,
        singular: SingularPolicy::Exclude,
    };
    let lfa = sigma_lfa(&source, &lfa_h, &method, &sweep).unwrap().points[0].value;
    let mut prev_gap = f64::INFINITY;
    for nt in [16, 64, 256, 1024] {
        let h = Hierarchy::two_level(nt, 2).unwrap();
        let s = sigma_sama(&source, &h, &method, full, &SamaSweep { k_max: 1, h_theta })
            .unwrap()
            .points[0]
            .value;
        // The ω grid is fine enough that its sampling error is below 1e-5.
        assert!(s <= lfa + 1e-5, "nt {nt}: {s} > {lfa}");
        let gap = lfa - s;
        assert!(gap < prev_gap, "nt {nt}: gap {gap} not shrinking");
        prev_gap = gap;
    }
    assert!(prev_gap < 0.02 * lfa, "gap {prev_gap} of {lfa}");
}
