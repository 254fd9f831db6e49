//! Problem-independent access to propagator symbols on every level.

use crate::hierarchy::{Cycle, Hierarchy};
use crate::matrix::{CMatrix, MatrixError};
use crate::sweep::Frequency;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SymbolError {
    #[error("degenerate spatial frequency {theta:?}: discrete gradient symbol vanishes")]
    DegenerateFrequency { theta: Frequency },
    #[error("expected a {expected}-dimensional frequency, got {theta:?}")]
    WrongDimension { expected: usize, theta: Frequency },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// A spatial discretization whose time stepper has a Fourier symbol.
///
/// `phi(θ, s)` is the q×q symbol of the single-step propagator with time
/// step `s·Δt`; coarse levels use `s = m` and `s = m·m2` (rediscretization).
pub trait SymbolSource: Sync {
    /// q, the size of one symbol block.
    fn block_size(&self) -> usize;
    /// Number of spatial dimensions (1 or 2).
    fn dimension(&self) -> usize;
    fn phi(&self, theta: &Frequency, step_scale: usize) -> Result<CMatrix, SymbolError>;
    /// Short problem name used in reports.
    fn name(&self) -> &'static str;
}

/// Propagator symbols of all levels at one spatial frequency.
#[derive(Debug, Clone)]
pub struct LevelSymbols {
    pub phi: CMatrix,
    pub phic: CMatrix,
    /// Present for three-level cycles only.
    pub phicc: Option<CMatrix>,
}

impl LevelSymbols {
    pub fn new(phi: CMatrix, phic: CMatrix, phicc: Option<CMatrix>) -> Self {
        Self { phi, phic, phicc }
    }

    /// Evaluates the symbols a cycle needs at `theta`.
    pub fn at(
        source: &dyn SymbolSource,
        theta: &Frequency,
        hierarchy: &Hierarchy,
        cycle: Cycle,
    ) -> Result<Self, SymbolError> {
        let phi = source.phi(theta, 1)?;
        let phic = source.phi(theta, hierarchy.m)?;
        let phicc = if cycle.levels() == 3 {
            Some(source.phi(theta, hierarchy.m * hierarchy.m2)?)
        } else {
            None
        };
        Ok(Self { phi, phic, phicc })
    }

    pub fn block_size(&self) -> usize {
        self.phi.rows()
    }
}
