//! Space-time local Fourier analysis.
//!
//! On an infinite temporal grid the iteration matrices are block Toeplitz
//! and act invariantly on the span of `m` (two-level) or `m·m2`
//! (three-level) harmonics of a base frequency `ω⁽⁰⁾`. The symbols built
//! here are those invariant blocks, written in the phase-shifted basis where
//! each fine point carries `e^{iω t/Δt}`: the fine operator then has
//! `−Φe^{−iω}` on its subdiagonal and in the wrap-around corner.

use alloc::string::ToString;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fmath;
use crate::hierarchy::{Cycle, Hierarchy, HierarchyError, MethodSpec, Relaxation};
use crate::matrix::{CMatrix, MatrixError};
use crate::sweep::{self, Excluded, Frequency, GridError, ModeValues, PredictionSeries, SweepMap};
use crate::symbols::{LevelSymbols, SymbolError, SymbolSource};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LfaError {
    #[error("coarse operator symbol on level {level} is singular at {frequency:?}")]
    SingularCoarseOperator { level: usize, frequency: Option<Frequency> },
    #[error("symbol assembly failed at {frequency:?}: {source}")]
    Symbol { frequency: Frequency, source: SymbolError },
    #[error("three-level symbol requested without a second coarse propagator")]
    MissingCoarsestSymbol,
    #[error("base frequency {omega0} outside (-pi/{factor}, pi/{factor}]")]
    FrequencyOutOfRange { omega0: f64, factor: usize },
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// What a sweep does with frequencies where a coarse symbol is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SingularPolicy {
    Fail,
    /// Leave the frequency out and list it in the result.
    Exclude,
}

fn phase(omega: f64) -> Complex64 {
    Complex64::new(fmath::cos(omega), -fmath::sin(omega))
}

/// Symbol of the time-stepping operator `u_l − Φu_{l−1}` on `blocks`
/// consecutive points.
pub fn fine_operator_symbol(phi: &CMatrix, blocks: usize, omega: f64) -> CMatrix {
    let q = phi.rows();
    let n = blocks * q;
    let mut a = CMatrix::identity(n);
    let s = -phase(omega);
    for i in 1..blocks {
        a.add_block(i * q, (i - 1) * q, phi, s);
    }
    a.add_block(0, (blocks - 1) * q, phi, s);
    a
}

/// Ideal interpolation `P̂_Φ` from `coarse_blocks` C-points: block row
/// `jm + l` of column `j` is `Φ^l e^{−ilω}`.
pub fn interpolation_symbol(phi: &CMatrix, m: usize, coarse_blocks: usize, omega: f64) -> CMatrix {
    let q = phi.rows();
    let mut p = CMatrix::zeros(coarse_blocks * m * q, coarse_blocks * q);
    let mut power = CMatrix::identity(q);
    for l in 0..m {
        let s = phase(omega * l as f64);
        for j in 0..coarse_blocks {
            p.add_block((j * m + l) * q, j * q, &power, s);
        }
        power = &power * phi;
    }
    p
}

/// Injection `R̂_I` onto every m-th point.
pub fn injection_symbol(q: usize, m: usize, coarse_blocks: usize) -> CMatrix {
    let mut r = CMatrix::zeros(coarse_blocks * q, coarse_blocks * m * q);
    for j in 0..coarse_blocks {
        r.set_block(j * q, j * m * q, &CMatrix::identity(q));
    }
    r
}

/// Two-grid error symbol on level `level` of a hierarchy described by the
/// propagators `phis` and coarsening factors `factors`; `omega` is the base
/// frequency on the finest level.
fn two_grid(
    phis: &[&CMatrix],
    factors: &[usize],
    level: usize,
    omega: f64,
    relax: Relaxation,
    inner: usize,
) -> Result<CMatrix, LfaError> {
    let q = phis[0].rows();
    let scale: usize = factors[..level].iter().product();
    let w = omega * scale as f64;
    let m = factors[level];
    let coarse_blocks: usize = factors[level + 1..].iter().product();
    let blocks = coarse_blocks * m;

    let a = fine_operator_symbol(phis[level], blocks, w);
    let p = interpolation_symbol(phis[level], m, coarse_blocks, w);
    let r = injection_symbol(q, m, coarse_blocks);
    let rp_relax = match relax {
        Relaxation::F => CMatrix::identity(coarse_blocks * q),
        Relaxation::FCF => {
            let a_s = &(&r * &a) * &p;
            &CMatrix::identity(coarse_blocks * q) - &a_s
        }
    };
    let smoother = &(&p * &rp_relax) * &r;

    let ac = fine_operator_symbol(phis[level + 1], coarse_blocks, w * m as f64);
    let ac_inv = ac.inverse().map_err(|e| match e {
        MatrixError::Singular { .. } => LfaError::SingularCoarseOperator {
            level: level + 1,
            frequency: None,
        },
        other => other.into(),
    })?;
    let coarse_solve = if level + 2 == phis.len() {
        ac_inv
    } else {
        let ec = two_grid(phis, factors, level + 1, omega, relax, inner)?;
        let ec_pow = ec.pow(inner)?;
        &(&CMatrix::identity(ec.rows()) - &ec_pow) * &ac_inv
    };
    let correction = &CMatrix::identity(blocks * q) - &(&(&(&p * &coarse_solve) * &r) * &a);
    Ok(&correction * &smoother)
}

fn check_omega(omega0: f64, factor: usize) -> Result<(), LfaError> {
    let half = core::f64::consts::PI / factor as f64;
    if !(omega0 > -half - 1e-12 && omega0 <= half + 1e-12) {
        return Err(LfaError::FrequencyOutOfRange { omega0, factor });
    }
    Ok(())
}

/// `mq`×`mq` error symbol of two-level MGRIT.
pub fn two_level_symbol(
    phi: &CMatrix,
    phic: &CMatrix,
    m: usize,
    omega0: f64,
    relax: Relaxation,
) -> Result<CMatrix, LfaError> {
    if m < 2 {
        return Err(HierarchyError::InvalidM(m).into());
    }
    check_omega(omega0, m)?;
    two_grid(&[phi, phic], &[m], 0, omega0, relax, 0)
}

/// `m·m2·q` square error symbol of a three-level V- or F-cycle.
#[allow(clippy::too_many_arguments)]
pub fn three_level_symbol(
    phi: &CMatrix,
    phic: &CMatrix,
    phicc: &CMatrix,
    m: usize,
    m2: usize,
    omega0: f64,
    relax: Relaxation,
    cycle: Cycle,
) -> Result<CMatrix, LfaError> {
    if m < 2 {
        return Err(HierarchyError::InvalidM(m).into());
    }
    if m2 < 2 || cycle.levels() != 3 {
        return Err(HierarchyError::ThreeLevelNeedsM2 { cycle, m2 }.into());
    }
    check_omega(omega0, m * m2)?;
    two_grid(&[phi, phic, phicc], &[m, m2], 0, omega0, relax, cycle.inner_cycles())
}

/// Error symbol for any supported method.
pub fn iteration_symbol(
    symbols: &LevelSymbols,
    hierarchy: &Hierarchy,
    method: &MethodSpec,
    omega0: f64,
) -> Result<CMatrix, LfaError> {
    match method.cycle {
        Cycle::TwoLevel => two_level_symbol(&symbols.phi, &symbols.phic, hierarchy.m, omega0, method.relax),
        cycle => {
            let phicc = symbols.phicc.as_ref().ok_or(LfaError::MissingCoarsestSymbol)?;
            three_level_symbol(
                &symbols.phi,
                &symbols.phic,
                phicc,
                hierarchy.m,
                hierarchy.m2,
                omega0,
                method.relax,
                cycle,
            )
        }
    }
}

/// `‖E^k‖₂` for `k = 1..=k_max`.
pub fn power_norms(e: &CMatrix, k_max: usize) -> Result<Vec<f64>, MatrixError> {
    let mut out = Vec::with_capacity(k_max);
    let mut power = e.clone();
    for k in 1..=k_max {
        if k > 1 {
            power = &power * e;
        }
        out.push(power.norm_two()?);
    }
    Ok(out)
}

/// Sweep parameters shared by [`lfa_map`] and [`sigma_lfa`].
#[derive(Debug, Clone, Copy)]
pub struct LfaSweep {
    pub k_max: usize,
    pub h_theta: f64,
    pub h_omega: f64,
    pub singular: SingularPolicy,
}

/// `‖Ê^k‖₂` at every sampled `(θ, ω⁽⁰⁾)`, `θ` outer and `ω⁽⁰⁾` inner.
pub fn lfa_map(
    source: &dyn SymbolSource,
    hierarchy: &Hierarchy,
    method: &MethodSpec,
    sweep: &LfaSweep,
) -> Result<SweepMap, LfaError> {
    method.validate(hierarchy)?;
    let thetas = sweep::spatial_grid(source.dimension(), sweep.h_theta)?;
    let factor = match method.cycle {
        Cycle::TwoLevel => hierarchy.m,
        _ => hierarchy.m * hierarchy.m2,
    };
    let omegas = sweep::omega_grid(sweep.h_omega, factor)?;

    type Row = Vec<Result<ModeValues, (Frequency, LfaError)>>;
    let rows: Vec<Row> = sweep::map_ordered(&thetas, |theta| {
        let symbols = match LevelSymbols::at(source, theta, hierarchy, method.cycle) {
            Ok(s) => s,
            Err(source) => {
                return alloc::vec![Err((
                    *theta,
                    LfaError::Symbol {
                        frequency: *theta,
                        source
                    }
                ))]
            }
        };
        omegas
            .iter()
            .map(|&w| {
                let frequency = theta.with_omega(w);
                let values = iteration_symbol(&symbols, hierarchy, method, w)
                    .and_then(|e| Ok(power_norms(&e, sweep.k_max)?))
                    .map_err(|e| (frequency, e))?;
                Ok(ModeValues { frequency, values })
            })
            .collect()
    });

    let mut map = SweepMap::default();
    for item in rows.into_iter().flatten() {
        match item {
            Ok(mode) => map.modes.push(mode),
            Err((frequency, LfaError::SingularCoarseOperator { level, .. }))
                if sweep.singular == SingularPolicy::Exclude =>
            {
                map.excluded.push(Excluded {
                    frequency,
                    reason: LfaError::SingularCoarseOperator { level, frequency: None }.to_string(),
                });
            }
            Err((frequency, LfaError::SingularCoarseOperator { level, .. })) => {
                return Err(LfaError::SingularCoarseOperator {
                    level,
                    frequency: Some(frequency),
                })
            }
            Err((_, e)) => return Err(e),
        }
    }
    Ok(map)
}

/// `σ_LFA(E^k) = max ‖Ê^k‖₂` over the sampled frequencies.
pub fn sigma_lfa(
    source: &dyn SymbolSource,
    hierarchy: &Hierarchy,
    method: &MethodSpec,
    sweep: &LfaSweep,
) -> Result<PredictionSeries, LfaError> {
    Ok(lfa_map(source, hierarchy, method, sweep)?.reduce())
}
