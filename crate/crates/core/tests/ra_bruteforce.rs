mod common;

use common::{rel_diff, Explicit};
use mgrit_modes::elasticity::{ElasticityModel, ElasticityParams};
use mgrit_modes::ra::{
    binomial_sum, ra_cpoint_bound, ra_full_bound, ra_full_norms, ra_map, simultaneous_eigs, EigenPair,
};
use mgrit_modes::sama::Scope;
use mgrit_modes::{CMatrix, Complex64, Cycle, Hierarchy, Relaxation};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_in_disk(rng: &mut StdRng, radius: f64) -> Complex64 {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex64::from_polar(r, rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// `(E_Δ, E_n)` of the scalar two-level method.
fn assembled(lam: Complex64, mu: Complex64, m: usize, nt_c: usize, relax: Relaxation) -> (CMatrix, CMatrix) {
    let ex = Explicit::new(
        vec![CMatrix::scalar(lam), CMatrix::scalar(mu)],
        m * nt_c,
        &[m],
        relax,
        Cycle::TwoLevel,
    );
    let e = ex.formula_matrix();
    let x = &(&ex.injection() * &e) * &ex.interpolation();
    (x, e)
}

/// 1e-12 relative, with a 1e-15 absolute floor for the round-off of the
/// dense assembly when a power is nearly annihilated.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) + 1e-15
}

#[test]
fn closed_forms_match_assembled_powers() {
    let mut rng = StdRng::seed_from_u64(7);
    for case in 0..1000 {
        let lam = random_in_disk(&mut rng, 1.05);
        let mu = random_in_disk(&mut rng, 1.05);
        let m = [2, 4][rng.gen_range(0..2)];
        let nt_c = [4, 16, 32][rng.gen_range(0..3)];
        let k = rng.gen_range(1..=4);
        let relax = if case % 2 == 0 { Relaxation::F } else { Relaxation::FCF };
        let (x, e) = assembled(lam, mu, m, nt_c, relax);
        let (xk, ek) = (x.pow(k).unwrap(), e.pow(k).unwrap());
        let pair = EigenPair::scalar(lam, mu);

        let (one, inf) = (xk.norm_one(), xk.norm_inf());
        assert!(close(one, inf), "case {case}: Toeplitz norms differ {one} {inf}");
        let cp = ra_cpoint_bound(&pair, m, nt_c, relax, k);
        assert!(
            close(cp, (one * inf).sqrt()),
            "case {case} C-points {lam} {mu} m {m} N {nt_c} k {k} {relax:?}: {cp} vs {one}"
        );

        let (fone, finf) = ra_full_norms(&pair, m, nt_c, relax, k);
        assert!(
            close(fone, ek.norm_one()),
            "case {case} full 1-norm: {fone} vs {}",
            ek.norm_one()
        );
        assert!(
            close(finf, ek.norm_inf()),
            "case {case} full inf-norm: {finf} vs {}",
            ek.norm_inf()
        );
        let full = ra_full_bound(&pair, m, nt_c, relax, k);
        assert!(
            close(full, (ek.norm_one() * ek.norm_inf()).sqrt()),
            "case {case} full bound"
        );
    }
}

#[test]
fn coarse_eigenvalue_on_unit_circle() {
    for (lam, mu) in [(0.9, 1.0), (-0.5, -1.0)] {
        let (lam, mu) = (Complex64::new(lam, 0.0), Complex64::new(mu, 0.0));
        for relax in [Relaxation::F, Relaxation::FCF] {
            let (x, _) = assembled(lam, mu, 2, 8, relax);
            for k in 1..=3 {
                let want = x.pow(k).unwrap().norm_one();
                let got = ra_cpoint_bound(&EigenPair::scalar(lam, mu), 2, 8, relax, k);
                assert!(rel_diff(want, got) < 1e-13);
            }
        }
    }
}

#[test]
fn binomial_sum_against_direct_terms() {
    for (a, k, upper) in [(0.5, 1, 6), (0.9, 3, 10), (1.0, 2, 5), (1.04, 4, 20), (0.0, 2, 3)] {
        let mut want = 0.0;
        for j in 0..=upper {
            let mut c = 1.0;
            for i in 1..=j {
                c *= (j + k - 1 - (j - i)) as f64 / i as f64;
            }
            want += c * f64::powi(a, j as i32);
        }
        assert!(
            rel_diff(binomial_sum(a, k, upper as i64), want) < 1e-14,
            "{a} {k} {upper}"
        );
    }
    assert_eq!(binomial_sum(0.7, 2, -1), 0.0);
}

#[test]
fn simultaneous_diagonalization_of_commuting_pair() {
    let u = CMatrix::from_fn(3, 3, |i, j| {
        Complex64::new(1.0 / (1 + i + 2 * j) as f64, if i == j { 0.2 } else { 0.0 })
    });
    let d1 = CMatrix::diagonal(&[0.5, -0.2, 0.8].map(|x| Complex64::new(x, 0.1)));
    let d2 = CMatrix::diagonal(&[0.3, 0.1, -0.6].map(|x| Complex64::new(x, 0.0)));
    let uinv = u.inverse().unwrap();
    let phi = &(&u * &d1) * &uinv;
    let phic = &(&u * &d2) * &uinv;
    let s = simultaneous_eigs(&phi, &phic).unwrap();
    assert!(s.simultaneous && s.diagonalizable);
    let mut pairs: Vec<(f64, f64)> = s.pairs.iter().map(|p| (p.lam.re, p.mu.re)).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let want = [(-0.2, 0.1), (0.5, 0.3), (0.8, -0.6)];
    for (g, w) in pairs.iter().zip(want) {
        assert!((g.0 - w.0).abs() < 1e-10 && (g.1 - w.1).abs() < 1e-10, "{pairs:?}");
    }
    assert!(s.kappa >= 1.0 && s.kappa.is_finite());
}

#[test]
fn repeated_eigenvalue_gets_a_well_conditioned_basis() {
    // Eigenspace span(e1, e2) for 0.5 (given by nearly parallel vectors)
    // and (1, 0, 1) for 0.2. Orthonormal within the eigenspace, κ ≈ 2.4.
    let c = |x: f64| Complex64::new(x, 0.0);
    let v = CMatrix::from_real(3, 3, &[1.0, 1.0, 1.0, 0.0, 1e-6, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let vinv = v.inverse().unwrap();
    let phi = &(&v * &CMatrix::diagonal(&[c(0.5), c(0.5), c(0.2)])) * &vinv;
    let phic = &(&v * &CMatrix::diagonal(&[c(0.3), c(0.3), c(0.04)])) * &vinv;
    let s = simultaneous_eigs(&phi, &phic).unwrap();
    assert!(s.diagonalizable && s.simultaneous, "{s:?}");
    assert!(s.kappa < 3.0, "kappa {}", s.kappa);
    for p in &s.pairs {
        let want = if (p.lam.re - 0.5).abs() < 1e-9 { 0.3 } else { 0.04 };
        assert!((p.mu - c(want)).norm() < 1e-9, "{p:?}");
    }
}

#[test]
fn defective_symbol_is_not_diagonalizable() {
    let c = |x: f64| Complex64::new(x, 0.0);
    let jordan = CMatrix::from_fn(3, 3, |i, j| match (i, j) {
        (0, 0) | (1, 1) => c(0.9),
        (0, 1) => c(1.0),
        (2, 2) => c(0.4),
        _ => c(0.0),
    });
    let s = simultaneous_eigs(&jordan, &jordan).unwrap();
    assert!(!s.diagonalizable && !s.simultaneous);
}

#[test]
fn elasticity_rigid_motion_is_excluded() {
    // At θ = 0, constant displacement and velocity form Jordan blocks.
    let src = ElasticityModel::new(ElasticityParams::new(1.0, 1.0, 0.5, 0.1).unwrap());
    let h = Hierarchy::two_level(16, 2).unwrap();
    let sweep = ra_map(&src, &h, Relaxation::F, Scope::CPoints, 2, std::f64::consts::PI / 8.0).unwrap();
    assert_eq!(sweep.map.excluded.len(), 1);
    let f = sweep.map.excluded[0].frequency;
    assert!(f.theta_x.abs() < 1e-12 && f.theta_y.unwrap().abs() < 1e-12);
    assert!(sweep.diagnostics.kappa_max < 100.0, "{:?}", sweep.diagnostics);
    assert_eq!(sweep.diagnostics.non_simultaneous, 0);
}

fn pair_strategy(radius: f64) -> impl Strategy<Value = EigenPair> {
    (0.0..radius, -3.2..3.2f64, 0.0..radius, -3.2..3.2f64)
        .prop_map(|(r1, a1, r2, a2)| EigenPair::scalar(Complex64::from_polar(r1, a1), Complex64::from_polar(r2, a2)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn vanishes_past_exactness(pair in pair_strategy(1.0), m in 2usize..6, nt_c in 1usize..20) {
        // The coarse matrices include t_0, so the sums end at N_T − k and N_T − 2k.
        prop_assert_eq!(ra_cpoint_bound(&pair, m, nt_c, Relaxation::F, nt_c + 1), 0.0);
        prop_assert_eq!(ra_cpoint_bound(&pair, m, nt_c, Relaxation::FCF, nt_c / 2 + 1), 0.0);
        let c = (pair.lam.powi(m as i32) - pair.mu).norm();
        prop_assert!((ra_cpoint_bound(&pair, m, nt_c, Relaxation::F, nt_c) - c.powi(nt_c as i32)).abs()
            <= 1e-12 * c.powi(nt_c as i32));
    }

    #[test]
    fn vanishes_for_exact_coarse_eigenvalue(lam in pair_strategy(1.0), m in 2usize..6, k in 1usize..5) {
        let pair = EigenPair::scalar(lam.lam, lam.lam.powi(m as i32));
        for relax in [Relaxation::F, Relaxation::FCF] {
            prop_assert!(ra_cpoint_bound(&pair, m, 16, relax, k) < 1e-15);
        }
    }

    #[test]
    fn monotone_in_interval_count(pair in pair_strategy(0.99), m in 2usize..5, k in 1usize..5, n in 2usize..30) {
        for relax in [Relaxation::F, Relaxation::FCF] {
            let a = ra_cpoint_bound(&pair, m, n, relax, k);
            let b = ra_cpoint_bound(&pair, m, n + 1, relax, k);
            prop_assert!(b >= a * (1.0 - 1e-14), "{} then {}", a, b);
        }
    }

    #[test]
    fn full_over_cpoint_ratio(pair in pair_strategy(1.0), m in 2usize..6, k in 1usize..5, n in 2usize..24) {
        // Holds for the pairs that arise from one propagator (μ near λ^m).
        let pair = EigenPair::scalar(pair.lam, pair.lam.powi(m as i32) * 0.9);
        for relax in [Relaxation::F, Relaxation::FCF] {
            let cp = ra_cpoint_bound(&pair, m, n, relax, k);
            if cp > 1e-250 {
                let r = ra_full_bound(&pair, m, n, relax, k) / cp;
                prop_assert!(r >= 1.0 - 1e-12 && r <= (m as f64).sqrt() * (1.0 + 1e-12), "ratio {}", r);
            }
        }
    }
}
