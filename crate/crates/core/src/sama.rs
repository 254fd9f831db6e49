//! Semi-algebraic mode analysis: exact algebra over the finite time grid
//! for one spatial Fourier mode at a time.
//!
//! For a spatial frequency θ every space-time operator becomes a block
//! matrix over the `nt+1` time points with `q×q` blocks. [`sama_blocks`]
//! assembles those matrices literally. The sweeps use a cheaper route
//! built on one identity: with ideal interpolation `P` and injection `R`
//! (`RP = I`), every iteration matrix has the form `E = P X R` where `X`
//! acts on the `N_T+1` C-points, so `E^k = P X^k R`. In the two-level case
//! `X` is block lower-triangular Toeplitz, i.e. a truncated power series in
//! the shift `z`:
//!
//! ```text
//! X(z) = (I − Φ_c z)⁻¹ (Φ^m − Φ_c) z · Y(z),   Y = I (F) or Φ^m z (FCF)
//! ```
//!
//! and powers of `X` cost `O(N_T q³)` each. Norms of `P X^k R` follow from
//! the blocks of `X^k` without forming the `(nt+1)q` square matrix; see
//! [`CoarseIteration`].

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fmath;
use crate::hierarchy::{Cycle, Hierarchy, HierarchyError, MethodSpec, Relaxation};
use crate::matrix::{CMatrix, MatrixError};
use crate::sweep::{self, GridError, ModeValues, PredictionSeries, SweepMap};
use crate::symbols::{LevelSymbols, SymbolError, SymbolSource};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SamaError {
    #[error("symbol assembly failed at {frequency:?}: {source}")]
    Symbol {
        frequency: sweep::Frequency,
        source: SymbolError,
    },
    #[error("three-level analysis requested without a second coarse propagator")]
    MissingCoarsestSymbol,
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Which time points the iteration matrix acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    /// All `nt+1` fine time points.
    Full,
    /// The `N_T+1` C-points only.
    CPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NormKind {
    /// Exact 2-norm.
    Exact2,
    /// `√(‖·‖₁‖·‖_∞)`, an upper bound on the 2-norm.
    OneInfBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SamaVariant {
    pub scope: Scope,
    pub norm: NormKind,
}

impl SamaVariant {
    pub const fn new(scope: Scope, norm: NormKind) -> Self {
        Self { scope, norm }
    }
}

fn norm_of(m: &CMatrix, kind: NormKind) -> Result<f64, MatrixError> {
    Ok(match kind {
        NormKind::Exact2 => m.norm_two()?,
        NormKind::OneInfBound => fmath::sqrt(m.norm_one() * m.norm_inf()),
    })
}

// ---------------------------------------------------------------------------
// Explicit block matrices.

/// Block bidiagonal time-stepping matrix on `points` time points: identity
/// diagonal, `−Φ` subdiagonal.
pub fn time_stepping_blocks(phi: &CMatrix, points: usize) -> CMatrix {
    let q = phi.rows();
    let mut a = CMatrix::identity(points * q);
    let minus = Complex64::new(-1.0, 0.0);
    for i in 1..points {
        a.add_block(i * q, (i - 1) * q, phi, minus);
    }
    a
}

/// Injection from `m·n + 1` fine points onto the `n + 1` C-points.
pub fn injection_blocks(q: usize, m: usize, coarse_intervals: usize) -> CMatrix {
    let mut r = CMatrix::zeros((coarse_intervals + 1) * q, (coarse_intervals * m + 1) * q);
    let id = CMatrix::identity(q);
    for j in 0..=coarse_intervals {
        r.set_block(j * q, j * m * q, &id);
    }
    r
}

/// Ideal interpolation: C-point `j` feeds fine points `jm + l` with `Φ^l`,
/// the last C-point is copied.
pub fn interpolation_blocks(phi: &CMatrix, m: usize, coarse_intervals: usize) -> CMatrix {
    let q = phi.rows();
    let n = coarse_intervals;
    let mut p = CMatrix::zeros((n * m + 1) * q, (n + 1) * q);
    let mut power = CMatrix::identity(q);
    for l in 0..m {
        for j in 0..n {
            p.set_block((j * m + l) * q, j * q, &power);
        }
        power = &power * phi;
    }
    p.set_block(n * m * q, n * q, &CMatrix::identity(q));
    p
}

/// `I − S·` for relaxation on C-points: `I` (F) or `I − A_S` (FCF).
fn c_relaxation(a_s: &CMatrix, relax: Relaxation) -> CMatrix {
    let id = CMatrix::identity(a_s.rows());
    match relax {
        Relaxation::F => id,
        Relaxation::FCF => &id - a_s,
    }
}

/// Two-grid error on one level, given the level operator and the coarse
/// solve `M` (≈ `A_c⁻¹`).
fn compose_two_grid(
    a: &CMatrix,
    p: &CMatrix,
    r: &CMatrix,
    a_s: &CMatrix,
    coarse_solve: &CMatrix,
    relax: Relaxation,
) -> CMatrix {
    let smoother = &(p * &c_relaxation(a_s, relax)) * r;
    let correction = &CMatrix::identity(a.rows()) - &(&(&(p * coarse_solve) * r) * a);
    &correction * &smoother
}

/// Coarse solve `M` on the first coarse level: `A_c⁻¹` for two levels,
/// `(I − E_c^ν)A_c⁻¹` with the level-1 two-grid error `E_c` for three.
fn coarse_solve_blocks(symbols: &LevelSymbols, h: &Hierarchy, method: &MethodSpec) -> Result<CMatrix, SamaError> {
    let n_c = h.coarse_intervals();
    let a_c = time_stepping_blocks(&symbols.phic, n_c + 1);
    let ac_inv = a_c.inverse()?;
    if method.cycle == Cycle::TwoLevel {
        return Ok(ac_inv);
    }
    let phicc = symbols.phicc.as_ref().ok_or(SamaError::MissingCoarsestSymbol)?;
    let n_cc = h.coarsest_intervals();
    let q = symbols.block_size();
    let p_c = interpolation_blocks(&symbols.phic, h.m2, n_cc);
    let r_c = injection_blocks(q, h.m2, n_cc);
    let a_cs = time_stepping_blocks(&symbols.phic.pow(h.m2)?, n_cc + 1);
    let a_cc_inv = time_stepping_blocks(phicc, n_cc + 1).inverse()?;
    let e_c = compose_two_grid(&a_c, &p_c, &r_c, &a_cs, &a_cc_inv, method.relax);
    let e_pow = e_c.pow(method.cycle.inner_cycles())?;
    Ok(&(&CMatrix::identity(e_c.rows()) - &e_pow) * &ac_inv)
}

/// The block iteration matrix for one spatial frequency, assembled
/// literally from the block operators.
///
/// `Full` is `(nt+1)q` square; `CPoints` is the `(N_T+1)q` square
/// C-point propagator `(I − M A_S)(I or I − A_S)`.
pub fn sama_blocks(
    symbols: &LevelSymbols,
    h: &Hierarchy,
    method: &MethodSpec,
    scope: Scope,
) -> Result<CMatrix, SamaError> {
    method.validate(h)?;
    let q = symbols.block_size();
    let n_c = h.coarse_intervals();
    let a_s = time_stepping_blocks(&symbols.phi.pow(h.m)?, n_c + 1);
    let coarse_solve = coarse_solve_blocks(symbols, h, method)?;
    match scope {
        Scope::CPoints => {
            let id = CMatrix::identity(a_s.rows());
            let x = &id - &(&coarse_solve * &a_s);
            Ok(&x * &c_relaxation(&a_s, method.relax))
        }
        Scope::Full => {
            let a = time_stepping_blocks(&symbols.phi, h.nt + 1);
            let p = interpolation_blocks(&symbols.phi, h.m, n_c);
            let r = injection_blocks(q, h.m, n_c);
            Ok(compose_two_grid(&a, &p, &r, &a_s, &coarse_solve, method.relax))
        }
    }
}

/// Norms of `block^k` for `k = 1..=k_max` by incremental multiplication.
pub fn sama_power_series(block: &CMatrix, k_max: usize, norm: NormKind) -> Result<Vec<f64>, MatrixError> {
    let mut out = Vec::with_capacity(k_max);
    let mut power = block.clone();
    for k in 1..=k_max {
        if k > 1 {
            power = &power * block;
        }
        out.push(norm_of(&power, norm)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Structured evaluation.

/// Lower-triangular block Toeplitz matrix of `len` block rows, stored by
/// its first block column (`blocks[d]` sits on the d-th subdiagonal).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockSeries {
    pub blocks: Vec<CMatrix>,
}

impl BlockSeries {
    pub fn identity(q: usize, len: usize) -> Self {
        let mut blocks = vec![CMatrix::zeros(q, q); len];
        blocks[0] = CMatrix::identity(q);
        Self { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    fn q(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn to_dense(&self) -> CMatrix {
        let q = self.q();
        let n = self.len();
        let mut out = CMatrix::zeros(n * q, n * q);
        for i in 0..n {
            for j in 0..=i {
                out.set_block(i * q, j * q, &self.blocks[i - j]);
            }
        }
        out
    }

    /// `(I − D z)⁻¹ (Σ_d N_d z^d) · self`, truncated to the same length.
    fn rational_mul(&self, denominator: &CMatrix, taps: &[(usize, CMatrix)]) -> Self {
        let q = self.q();
        let mut out: Vec<CMatrix> = Vec::with_capacity(self.len());
        for j in 0..self.len() {
            let mut z = if j > 0 {
                denominator * &out[j - 1]
            } else {
                CMatrix::zeros(q, q)
            };
            for (d, tap) in taps {
                if *d <= j {
                    z = &z + &(tap * &self.blocks[j - d]);
                }
            }
            out.push(z);
        }
        Self { blocks: out }
    }
}

/// The C-point iteration `X` of `E = P X R`, plus what is needed to take
/// norms of `P X^k R`.
#[derive(Debug, Clone)]
pub struct CoarseIteration {
    kind: IterationKind,
    /// `Φ^l`, `l = 0..m`.
    interp: Vec<CMatrix>,
    /// Upper Cholesky factor of `Σ_l (Φ^l)ᴴΦ^l`.
    gram_factor: CMatrix,
    q: usize,
    n_c: usize,
}

#[derive(Debug, Clone)]
enum IterationKind {
    /// `X(z) = (I − Φ_c z)⁻¹ Σ taps`.
    Toeplitz {
        phic: CMatrix,
        taps: Vec<(usize, CMatrix)>,
    },
    Dense(CMatrix),
}

/// `X^k` in whichever representation [`CoarseIteration`] holds.
#[derive(Debug, Clone)]
pub enum IterationPower {
    Toeplitz(BlockSeries),
    Dense(CMatrix),
}

impl IterationPower {
    pub fn to_dense(&self) -> CMatrix {
        match self {
            IterationPower::Toeplitz(s) => s.to_dense(),
            IterationPower::Dense(d) => d.clone(),
        }
    }
}

impl CoarseIteration {
    pub fn new(symbols: &LevelSymbols, h: &Hierarchy, method: &MethodSpec) -> Result<Self, SamaError> {
        method.validate(h)?;
        let q = symbols.block_size();
        let n_c = h.coarse_intervals();
        let mut interp = Vec::with_capacity(h.m + 1);
        interp.push(CMatrix::identity(q));
        for l in 1..=h.m {
            let next = &interp[l - 1] * &symbols.phi;
            interp.push(next);
        }
        let phi_m = interp.pop().expect("m >= 2");
        let mut gram = CMatrix::zeros(q, q);
        for pw in &interp {
            gram = &gram + &(&pw.adjoint() * pw);
        }
        let gram_factor = gram.cholesky_upper()?;

        let kind = match method.cycle {
            Cycle::TwoLevel => {
                let diff = &phi_m - &symbols.phic;
                let taps = match method.relax {
                    Relaxation::F => vec![(1, diff)],
                    Relaxation::FCF => vec![(2, &diff * &phi_m)],
                };
                IterationKind::Toeplitz {
                    phic: symbols.phic.clone(),
                    taps,
                }
            }
            _ => IterationKind::Dense(sama_blocks(symbols, h, method, Scope::CPoints)?),
        };
        Ok(Self {
            kind,
            interp,
            gram_factor,
            q,
            n_c,
        })
    }

    /// `X^k` for `k = 1..=k_max`, passed to `visit` in order.
    pub fn for_each_power(
        &self,
        k_max: usize,
        mut visit: impl FnMut(usize, &IterationPower) -> Result<(), SamaError>,
    ) -> Result<(), SamaError> {
        match &self.kind {
            IterationKind::Toeplitz { phic, taps } => {
                let mut y = BlockSeries::identity(self.q, self.n_c + 1);
                for k in 1..=k_max {
                    y = y.rational_mul(phic, taps);
                    let p = IterationPower::Toeplitz(y);
                    visit(k, &p)?;
                    let IterationPower::Toeplitz(back) = p else {
                        unreachable!()
                    };
                    y = back;
                }
            }
            IterationKind::Dense(x) => {
                let mut y = x.clone();
                for k in 1..=k_max {
                    if k > 1 {
                        y = &y * x;
                    }
                    let p = IterationPower::Dense(y);
                    visit(k, &p)?;
                    let IterationPower::Dense(back) = p else { unreachable!() };
                    y = back;
                }
            }
        }
        Ok(())
    }

    /// Norm of `X^k` (C-points) or of `P X^k R` (full grid).
    pub fn norm(&self, power: &IterationPower, variant: SamaVariant) -> Result<f64, MatrixError> {
        match (variant.scope, variant.norm) {
            (Scope::CPoints, NormKind::Exact2) => power.to_dense().norm_two(),
            (Scope::CPoints, NormKind::OneInfBound) => Ok(match power {
                IterationPower::Dense(d) => fmath::sqrt(d.norm_one() * d.norm_inf()),
                IterationPower::Toeplitz(s) => {
                    let (one, inf) = toeplitz_one_inf(s);
                    fmath::sqrt(one * inf)
                }
            }),
            (Scope::Full, NormKind::Exact2) => self.weighted(power).norm_two(),
            (Scope::Full, NormKind::OneInfBound) => {
                let (one, inf) = match power {
                    IterationPower::Toeplitz(s) => self.full_one_inf_toeplitz(s),
                    IterationPower::Dense(d) => self.full_one_inf_dense(d),
                };
                Ok(fmath::sqrt(one * inf))
            }
        }
    }

    /// `C X^k` with `CᴴC = PᴴP`, so `‖C X^k‖₂ = ‖P X^k R‖₂`.
    fn weighted(&self, power: &IterationPower) -> CMatrix {
        let q = self.q;
        let mut x = power.to_dense();
        let cols = x.cols();
        for i in 0..self.n_c {
            let rows = x.block(i * q, 0, q, cols);
            x.set_block(i * q, 0, &(&self.gram_factor * &rows));
        }
        x
    }

    /// 1- and ∞-norms of `P X^k R` for Toeplitz `X^k`.
    ///
    /// Block column `j` of `P X^k` holds `Φ^l X_{i−j}` in fine row `(i, l)`
    /// for `i < N_T` and `X_{N_T−j}` in the last row. Block row `(i, l)`
    /// holds `Φ^l X_d`, `d ≤ i`; with nonnegative terms the largest row
    /// sums sit at `i = N_T − 1` and at the last row.
    fn full_one_inf_toeplitz(&self, s: &BlockSeries) -> (f64, f64) {
        let q = self.q;
        let n = self.n_c;
        // w[d][c] = Σ_l Σ_r |(Φ^l X_d)_{rc}|, lrow[l][r] = Σ_{d<n} Σ_c |(Φ^l X_d)_{rc}|
        let mut w = vec![vec![0.0; q]; n + 1];
        let mut lrow = vec![vec![0.0; q]; self.interp.len()];
        for (d, xd) in s.blocks.iter().enumerate() {
            for (l, pw) in self.interp.iter().enumerate() {
                let y = if l == 0 { xd.clone() } else { pw * xd };
                for r in 0..q {
                    for (c, z) in y.row(r).iter().enumerate() {
                        let a = z.norm();
                        w[d][c] += a;
                        if d < n {
                            lrow[l][r] += a;
                        }
                    }
                }
            }
        }
        let colabs = |d: usize| -> Vec<f64> {
            let mut v = vec![0.0; q];
            for r in 0..q {
                for (c, z) in s.blocks[d].row(r).iter().enumerate() {
                    v[c] += z.norm();
                }
            }
            v
        };
        let mut one: f64 = 0.0;
        let mut prefix = vec![0.0; q];
        // Column block j = n − t uses Σ_{d<t} w_d + colabs(X_t).
        for t in 0..=n {
            let last = colabs(t);
            for c in 0..q {
                one = one.max(prefix[c] + last[c]);
            }
            for c in 0..q {
                prefix[c] += w[t][c];
            }
        }
        let mut inf: f64 = lrow.iter().flatten().copied().fold(0.0, f64::max);
        let mut last_row = vec![0.0; q];
        for xd in &s.blocks {
            for (r, acc) in last_row.iter_mut().enumerate() {
                *acc += xd.row(r).iter().map(|z| z.norm()).sum::<f64>();
            }
        }
        inf = inf.max(last_row.into_iter().fold(0.0, f64::max));
        (one, inf)
    }

    /// 1- and ∞-norms of `P X^k R` for dense `X^k`.
    fn full_one_inf_dense(&self, x: &CMatrix) -> (f64, f64) {
        let q = self.q;
        let n = self.n_c;
        let cols = x.cols();
        let mut colsum = vec![0.0; cols];
        let mut inf: f64 = 0.0;
        for i in 0..=n {
            let rows = x.block(i * q, 0, q, cols);
            let weights: &[CMatrix] = if i < n { &self.interp } else { &self.interp[..1] };
            for (l, pw) in weights.iter().enumerate() {
                let y = if l == 0 { rows.clone() } else { pw * &rows };
                for r in 0..q {
                    let mut rs = 0.0;
                    for (c, z) in y.row(r).iter().enumerate() {
                        let a = z.norm();
                        colsum[c] += a;
                        rs += a;
                    }
                    inf = inf.max(rs);
                }
            }
        }
        (colsum.into_iter().fold(0.0, f64::max), inf)
    }
}

fn toeplitz_one_inf(s: &BlockSeries) -> (f64, f64) {
    let q = s.q();
    let mut col = vec![0.0; q];
    let mut row = vec![0.0; q];
    for b in &s.blocks {
        for r in 0..q {
            for (c, z) in b.row(r).iter().enumerate() {
                let a = z.norm();
                col[c] += a;
                row[r] += a;
            }
        }
    }
    (col.into_iter().fold(0.0, f64::max), row.into_iter().fold(0.0, f64::max))
}

/// Per-variant values for `k = 1..=k_max` at one spatial frequency.
pub fn sama_mode_values(
    symbols: &LevelSymbols,
    h: &Hierarchy,
    method: &MethodSpec,
    variants: &[SamaVariant],
    k_max: usize,
) -> Result<Vec<Vec<f64>>, SamaError> {
    let it = CoarseIteration::new(symbols, h, method)?;
    let mut out = vec![Vec::with_capacity(k_max); variants.len()];
    it.for_each_power(k_max, |_, power| {
        for (v, vals) in variants.iter().zip(out.iter_mut()) {
            vals.push(it.norm(power, *v)?);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Sweep parameters for [`sama_maps`] and [`sigma_sama`].
#[derive(Debug, Clone, Copy)]
pub struct SamaSweep {
    pub k_max: usize,
    pub h_theta: f64,
}

/// Per-frequency values for several variants in one pass over the grid.
pub fn sama_maps_on(
    source: &dyn SymbolSource,
    thetas: &[sweep::Frequency],
    h: &Hierarchy,
    method: &MethodSpec,
    variants: &[SamaVariant],
    k_max: usize,
) -> Result<Vec<SweepMap>, SamaError> {
    method.validate(h)?;
    let results = sweep::map_ordered(thetas, |theta| {
        let symbols = LevelSymbols::at(source, theta, h, method.cycle).map_err(|e| SamaError::Symbol {
            frequency: *theta,
            source: e,
        })?;
        sama_mode_values(&symbols, h, method, variants, k_max)
    });
    let mut maps = vec![SweepMap::default(); variants.len()];
    for (theta, res) in thetas.iter().zip(results) {
        for (map, values) in maps.iter_mut().zip(res?) {
            map.modes.push(ModeValues {
                frequency: *theta,
                values,
            });
        }
    }
    Ok(maps)
}

/// [`sama_maps_on`] over the uniform grid with spacing `h_theta`.
pub fn sama_maps(
    source: &dyn SymbolSource,
    h: &Hierarchy,
    method: &MethodSpec,
    variants: &[SamaVariant],
    sweep_params: &SamaSweep,
) -> Result<Vec<SweepMap>, SamaError> {
    let thetas = sweep::spatial_grid(source.dimension(), sweep_params.h_theta)?;
    sama_maps_on(source, &thetas, h, method, variants, sweep_params.k_max)
}

/// `σ_SAMA(E^k)`: the max over sampled θ of the chosen norm of `B_θ^k`.
pub fn sigma_sama(
    source: &dyn SymbolSource,
    h: &Hierarchy,
    method: &MethodSpec,
    variant: SamaVariant,
    sweep_params: &SamaSweep,
) -> Result<PredictionSeries, SamaError> {
    let maps = sama_maps(source, h, method, &[variant], sweep_params)?;
    Ok(maps[0].reduce())
}
