//! Two-level reduction analysis: closed-form norms of the error propagator
//! for a single eigenvalue pair `(λ, μ)` of the fine and coarse
//! propagators, and the condition-number-weighted bound for systems.
//!
//! For one pair the C-point propagator is the scalar series
//! `(λ^m − μ)^k z^{s} (1 − μz)^{−k}` with `s = k` (F) or, with the extra
//! factor `λ^{mk}`, `s = 2k` (FCF). Its entries on the `N_T+1` C-points have
//! magnitudes `c·C(j+k−1, j)|μ|^j` at offset `s + j`, which is all the
//! bounds below need.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fmath;
use crate::hierarchy::{Hierarchy, Relaxation};
use crate::matrix::{CMatrix, MatrixError, EIG_TOL};
use crate::sama::Scope;
use crate::sweep::{self, Excluded, Frequency, GridError, ModeValues, PredictionSeries, SweepMap};
use crate::symbols::{SymbolError, SymbolSource};

/// Tolerance on the off-diagonal part of `U⁻¹Φ_cU`.
pub const SIMULTANEITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RaError {
    #[error("symbol assembly failed at {frequency:?}: {source}")]
    Symbol { frequency: Frequency, source: SymbolError },
    #[error("coarsening factor must be positive")]
    InvalidM,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lam: Complex64,
    pub mu: Complex64,
    /// Condition number of the shared eigenvector matrix; 1 for scalars.
    pub kappa: f64,
}

impl EigenPair {
    pub fn scalar(lam: Complex64, mu: Complex64) -> Self {
        Self { lam, mu, kappa: 1.0 }
    }
}

/// `Σ_{j=0}^{upper} C(j+k−1, j) a^j`, zero for an empty range. Terms are
/// accumulated in ascending `j` with the binomial updated multiplicatively.
pub fn binomial_sum(a: f64, k: usize, upper: i64) -> f64 {
    if upper < 0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..=upper {
        term *= (j as f64 + k as f64 - 1.0) / j as f64 * a;
        sum += term;
    }
    sum
}

/// `C(j+k−1, j) a^j` for a single `j`; zero for `j < 0`.
fn binomial_term(a: f64, k: usize, j: i64) -> f64 {
    if j < 0 {
        return 0.0;
    }
    let mut term = 1.0;
    for i in 1..=j {
        term *= (i as f64 + k as f64 - 1.0) / i as f64 * a;
    }
    term
}

/// Prefactor `c` and offset `s` of the k-th power.
fn power_shape(pair: &EigenPair, m: usize, relax: Relaxation, k: usize) -> (f64, i64) {
    let lam_m = pair.lam.powu(m as u32);
    let diff = (lam_m - pair.mu).norm();
    match relax {
        Relaxation::F => (fmath::powi(diff, k as i32), k as i64),
        Relaxation::FCF => (fmath::powi(diff * lam_m.norm(), k as i32), 2 * k as i64),
    }
}

/// `‖E_Δ^k‖₁ = ‖E_Δ^k‖_∞` on the `nt_c + 1` C-points.
///
/// `|μ| = 1` needs no special branch: the sum is evaluated term by term
/// and yields `N_T − s + 1` there, which is the limit of the geometric form.
pub fn ra_cpoint_bound(pair: &EigenPair, m: usize, nt_c: usize, relax: Relaxation, k: usize) -> f64 {
    let (c, s) = power_shape(pair, m, relax, k);
    if c == 0.0 {
        return 0.0;
    }
    c * binomial_sum(pair.mu.norm(), k, nt_c as i64 - s)
}

/// `‖E^k‖₁` and `‖E^k‖_∞` of the full-grid propagator `P E_Δ^k R`.
pub fn ra_full_norms(pair: &EigenPair, m: usize, nt_c: usize, relax: Relaxation, k: usize) -> (f64, f64) {
    let (c, s) = power_shape(pair, m, relax, k);
    if c == 0.0 {
        return (0.0, 0.0);
    }
    let a = pair.mu.norm();
    let lam = pair.lam.norm();
    let n = nt_c as i64;
    // Σ_{l<m} |λ|^l weights every C-row except the last.
    let w: f64 = (0..m).map(|l| fmath::powi(lam, l as i32)).sum();
    let top = binomial_sum(a, k, n - s - 1);
    let one = c * (w * top + binomial_term(a, k, n - s));
    let lam_max = (0..m).map(|l| fmath::powi(lam, l as i32)).fold(0.0, f64::max);
    let inf = c * binomial_sum(a, k, n - s).max(lam_max * top);
    (one, inf)
}

/// `√(‖E^k‖₁‖E^k‖_∞)` for the full-grid propagator.
pub fn ra_full_bound(pair: &EigenPair, m: usize, nt_c: usize, relax: Relaxation, k: usize) -> f64 {
    let (one, inf) = ra_full_norms(pair, m, nt_c, relax, k);
    fmath::sqrt(one * inf)
}

/// Scalar bound for the chosen scope.
pub fn ra_bound(pair: &EigenPair, m: usize, nt_c: usize, relax: Relaxation, k: usize, scope: Scope) -> f64 {
    match scope {
        Scope::CPoints => ra_cpoint_bound(pair, m, nt_c, relax, k),
        Scope::Full => ra_full_bound(pair, m, nt_c, relax, k),
    }
}

/// Eigenpairs of `Φ` and `Φ_c` in `Φ`'s eigenbasis.
#[derive(Debug, Clone)]
pub struct SimultaneousEigs {
    pub pairs: Vec<EigenPair>,
    /// `cond₂(U)`; infinite when `U` is singular.
    pub kappa: f64,
    /// Largest off-diagonal magnitude of `U⁻¹Φ_cU` relative to its 2-norm.
    pub simultaneity_residual: f64,
    /// `Φ` diagonalizable and `Φ_c` diagonal in the same basis.
    pub simultaneous: bool,
    pub diagonalizable: bool,
    /// Relative eigen-reconstruction residual of `Φ`.
    pub residual: f64,
}

/// Relative gap below which eigenvalues count as one repeated eigenvalue.
/// A defective eigenvalue splits by about √ε under round-off.
pub const CLUSTER_TOL: f64 = 1e-6;

/// Relative norm left after orthogonalization below which a cluster's
/// eigenvectors are taken as dependent.
const DEPENDENCE_TOL: f64 = 1e-6;

enum Clusters {
    Orthonormalized,
    Defective,
}

/// Replaces the eigenvectors of each repeated eigenvalue by an orthonormal
/// basis of their span. Any basis of an eigenspace diagonalizes the matrix,
/// and the solver's choice can be nearly parallel (huge κ). Leaves `u`
/// alone when a cluster's vectors are numerically dependent, i.e. the
/// eigenvalue is defective.
fn orthonormalize_clusters(u: &mut CMatrix, values: &[Complex64]) -> Clusters {
    let n = values.len();
    let mut done = alloc::vec![false; n];
    let mut out = u.clone();
    for i in 0..n {
        if done[i] {
            continue;
        }
        let scale = values[i].norm().max(1.0);
        let cluster: Vec<usize> = (i..n)
            .filter(|&j| !done[j] && (values[j] - values[i]).norm() <= CLUSTER_TOL * scale)
            .collect();
        for &j in &cluster {
            done[j] = true;
        }
        if cluster.len() < 2 {
            continue;
        }
        // Modified Gram-Schmidt, twice for stability.
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for &j in &cluster {
            let mut v: Vec<Complex64> = (0..n).map(|r| u[(r, j)]).collect();
            for _ in 0..2 {
                for b in &basis {
                    let dot: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (y, x) in v.iter_mut().zip(b) {
                        *y -= dot * x;
                    }
                }
            }
            let nrm = fmath::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if nrm <= DEPENDENCE_TOL {
                return Clusters::Defective;
            }
            for y in &mut v {
                *y /= nrm;
            }
            for (r, y) in v.iter().enumerate() {
                out[(r, j)] = *y;
            }
            basis.push(v);
        }
    }
    *u = out;
    Clusters::Orthonormalized
}

pub fn simultaneous_eigs(phi: &CMatrix, phic: &CMatrix) -> Result<SimultaneousEigs, MatrixError> {
    let eig = phi.eig()?;
    let mut vectors = eig.vectors.clone();
    let mut diagonalizable = eig.diagonalizable;
    let mut residual = eig.residual;
    let mut kappa = vectors.cond_two().unwrap_or(f64::INFINITY);
    match orthonormalize_clusters(&mut vectors, &eig.values) {
        Clusters::Defective => diagonalizable = false,
        Clusters::Orthonormalized => {
            let lambda = CMatrix::diagonal(&eig.values);
            let scale = phi.norm_two()?.max(f64::MIN_POSITIVE);
            let r = (&(phi * &vectors) - &(&vectors * &lambda)).norm_two()? / scale;
            let k = vectors.cond_two().unwrap_or(f64::INFINITY);
            // r·κ bounds the relative reconstruction error ‖Φ − UΛU⁻¹‖.
            if r * k <= EIG_TOL {
                (residual, kappa, diagonalizable) = (r, k, true);
            } else {
                vectors = eig.vectors.clone();
            }
        }
    }
    let u = &vectors;
    let diagonalizable = diagonalizable && kappa.is_finite();
    let (mus, simultaneity_residual) = match u.solve(&(phic * u)) {
        Ok(d) => {
            let scale = d.norm_two()?;
            let mut off: f64 = 0.0;
            for i in 0..d.rows() {
                for j in 0..d.cols() {
                    if i != j {
                        off = off.max(d[(i, j)].norm());
                    }
                }
            }
            let res = if scale > 0.0 { off / scale } else { 0.0 };
            ((0..d.rows()).map(|i| d[(i, i)]).collect::<Vec<_>>(), res)
        }
        Err(_) => (alloc::vec![Complex64::new(f64::NAN, 0.0); phi.rows()], f64::INFINITY),
    };
    let pairs = eig
        .values
        .iter()
        .zip(&mus)
        .map(|(&lam, &mu)| EigenPair { lam, mu, kappa })
        .collect();
    Ok(SimultaneousEigs {
        pairs,
        kappa,
        simultaneity_residual,
        simultaneous: diagonalizable && simultaneity_residual <= SIMULTANEITY_TOL,
        diagonalizable,
        residual,
    })
}

/// Eigenpairs at one frequency, as consumed by [`ra_system_bound`].
#[derive(Debug, Clone)]
pub struct FrequencyPairs {
    pub frequency: Frequency,
    pub pairs: Vec<EigenPair>,
    pub diagonalizable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemBound {
    pub value: f64,
    /// Indices of frequencies left out because their symbol is not
    /// diagonalizable.
    pub excluded: Vec<usize>,
    /// True when any frequency was excluded.
    pub degraded: bool,
}

/// `max_n κ(U_n) · max_l bound(λ_{n,l}, μ_{n,l})` over the diagonalizable
/// frequencies.
pub fn ra_system_bound(
    frequencies: &[FrequencyPairs],
    m: usize,
    nt_c: usize,
    relax: Relaxation,
    k: usize,
    scope: Scope,
) -> SystemBound {
    let mut value: f64 = 0.0;
    let mut excluded = Vec::new();
    for (i, f) in frequencies.iter().enumerate() {
        if !f.diagonalizable {
            excluded.push(i);
            continue;
        }
        value = value.max(frequency_bound(&f.pairs, m, nt_c, relax, k, scope));
    }
    let degraded = !excluded.is_empty();
    SystemBound {
        value,
        excluded,
        degraded,
    }
}

fn frequency_bound(pairs: &[EigenPair], m: usize, nt_c: usize, relax: Relaxation, k: usize, scope: Scope) -> f64 {
    let kappa = pairs.iter().map(|p| p.kappa).fold(1.0, f64::max);
    kappa
        * pairs
            .iter()
            .map(|p| ra_bound(p, m, nt_c, relax, k, scope))
            .fold(0.0, f64::max)
}

/// Diagnostics of an RA sweep.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RaDiagnostics {
    pub kappa_max: f64,
    pub simultaneity_residual_max: f64,
    /// Frequencies where `Φ_c` is not diagonal in `Φ`'s eigenbasis (kept).
    pub non_simultaneous: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaSweep {
    pub map: SweepMap,
    pub diagnostics: RaDiagnostics,
}

/// κ-weighted RA bound per sampled θ and `k = 1..=k_max`.
pub fn ra_map(
    source: &dyn SymbolSource,
    h: &Hierarchy,
    relax: Relaxation,
    scope: Scope,
    k_max: usize,
    h_theta: f64,
) -> Result<RaSweep, RaError> {
    let thetas = sweep::spatial_grid(source.dimension(), h_theta)?;
    let nt_c = h.coarse_intervals();
    let results = sweep::map_ordered(&thetas, |theta| -> Result<_, RaError> {
        let wrap = |e| RaError::Symbol {
            frequency: *theta,
            source: e,
        };
        let phi = source.phi(theta, 1).map_err(wrap)?;
        let phic = source.phi(theta, h.m).map_err(wrap)?;
        let eigs = simultaneous_eigs(&phi, &phic)?;
        let values: Vec<f64> = (1..=k_max)
            .map(|k| frequency_bound(&eigs.pairs, h.m, nt_c, relax, k, scope))
            .collect();
        Ok((eigs, values))
    });
    let mut map = SweepMap::default();
    let mut diagnostics = RaDiagnostics {
        kappa_max: 1.0,
        ..Default::default()
    };
    for (theta, res) in thetas.iter().zip(results) {
        let (eigs, values) = res?;
        if !eigs.diagonalizable {
            map.excluded.push(Excluded {
                frequency: *theta,
                reason: alloc::format!("symbol not diagonalizable (kappa {:e})", eigs.kappa),
            });
            continue;
        }
        diagnostics.kappa_max = diagnostics.kappa_max.max(eigs.kappa);
        diagnostics.simultaneity_residual_max = diagnostics.simultaneity_residual_max.max(eigs.simultaneity_residual);
        if !eigs.simultaneous {
            diagnostics.non_simultaneous += 1;
        }
        map.modes.push(ModeValues {
            frequency: *theta,
            values,
        });
    }
    Ok(RaSweep { map, diagnostics })
}

/// Worst-case RA bound over the sampled θ.
pub fn sigma_ra(
    source: &dyn SymbolSource,
    h: &Hierarchy,
    relax: Relaxation,
    scope: Scope,
    k_max: usize,
    h_theta: f64,
) -> Result<(PredictionSeries, RaDiagnostics), RaError> {
    let sweep = ra_map(source, h, relax, scope, k_max, h_theta)?;
    Ok((sweep.map.reduce(), sweep.diagnostics))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(lam: f64, mu: f64) -> EigenPair {
        EigenPair::scalar(Complex64::new(lam, 0.0), Complex64::new(mu, 0.0))
    }

    #[test]
    fn geometric_example() {
        let v = ra_cpoint_bound(&pair(0.9, 0.8), 2, 4, Relaxation::F, 1);
        let want = (0.81f64 - 0.8).abs() * (1.0 - 0.8f64.powi(4)) / (1.0 - 0.8);
        assert!((v - want).abs() < 1e-15);
        assert!((v - 0.029520).abs() < 1e-6);
    }

    #[test]
    fn unit_modulus_coarse_eigenvalue() {
        let v = ra_cpoint_bound(&pair(0.9, 1.0), 1, 3, Relaxation::F, 1);
        assert!((v - 0.3).abs() < 1e-15);
    }

    #[test]
    fn exact_coarse_eigenvalue() {
        for relax in [Relaxation::F, Relaxation::FCF] {
            for k in 1..4 {
                assert_eq!(ra_cpoint_bound(&pair(0.5, 0.25), 2, 8, relax, k), 0.0);
                assert_eq!(ra_full_bound(&pair(0.5, 0.25), 2, 8, relax, k), 0.0);
            }
        }
    }

    #[test]
    fn empty_sums_vanish() {
        let p = pair(0.9, 0.5);
        assert_eq!(ra_cpoint_bound(&p, 2, 4, Relaxation::F, 5), 0.0);
        assert!(ra_cpoint_bound(&p, 2, 4, Relaxation::F, 4) > 0.0);
        assert_eq!(ra_cpoint_bound(&p, 2, 4, Relaxation::FCF, 3), 0.0);
        assert!(ra_cpoint_bound(&p, 2, 4, Relaxation::FCF, 2) > 0.0);
    }

    #[test]
    fn diagonal_symbols_are_simultaneous() {
        let d = |a: f64, b: f64| CMatrix::diagonal(&[Complex64::new(a, 0.0), Complex64::new(b, 0.0)]);
        let e = simultaneous_eigs(&d(0.5, 0.2), &d(0.3, 0.1)).unwrap();
        assert!(e.simultaneous);
        assert!((e.kappa - 1.0).abs() < 1e-12);
        let mut mus: Vec<f64> = e.pairs.iter().map(|p| p.mu.re).collect();
        mus.sort_by(f64::total_cmp);
        assert!((mus[0] - 0.1).abs() < 1e-14 && (mus[1] - 0.3).abs() < 1e-14);
    }
}
