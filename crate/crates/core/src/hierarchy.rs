//! Temporal grid hierarchy and MGRIT method variants.

use core::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HierarchyError {
    #[error("coarsening factor m must be at least 2, got {0}")]
    InvalidM(usize),
    #[error("second coarsening factor m2 must be at least 1, got {0}")]
    InvalidM2(usize),
    #[error("nt = {nt} is not divisible by the total coarsening factor {factor}")]
    NotDivisible { nt: usize, factor: usize },
    #[error("nt must be positive")]
    EmptyTimeGrid,
    #[error("{cycle} requires m2 >= 2, got m2 = {m2}")]
    ThreeLevelNeedsM2 { cycle: Cycle, m2: usize },
}

/// Fine grid of `nt` intervals, coarsened by `m` and then by `m2`.
/// `m2 = 1` means two levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hierarchy {
    pub nt: usize,
    pub m: usize,
    pub m2: usize,
}

impl Hierarchy {
    pub fn new(nt: usize, m: usize, m2: usize) -> Result<Self, HierarchyError> {
        if nt == 0 {
            return Err(HierarchyError::EmptyTimeGrid);
        }
        if m < 2 {
            return Err(HierarchyError::InvalidM(m));
        }
        if m2 < 1 {
            return Err(HierarchyError::InvalidM2(m2));
        }
        if nt % (m * m2) != 0 {
            return Err(HierarchyError::NotDivisible { nt, factor: m * m2 });
        }
        Ok(Self { nt, m, m2 })
    }

    pub fn two_level(nt: usize, m: usize) -> Result<Self, HierarchyError> {
        Self::new(nt, m, 1)
    }

    /// `N_T = nt/m`, the number of intervals on the first coarse grid.
    pub fn coarse_intervals(&self) -> usize {
        self.nt / self.m
    }

    /// Number of intervals on the second coarse grid.
    pub fn coarsest_intervals(&self) -> usize {
        self.nt / (self.m * self.m2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relaxation {
    F,
    FCF,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cycle {
    TwoLevel,
    /// Three levels, one inner two-grid cycle on the middle level.
    ThreeLevelV,
    /// Three levels, two inner two-grid cycles on the middle level.
    ThreeLevelF,
}

impl Cycle {
    pub fn levels(self) -> usize {
        match self {
            Cycle::TwoLevel => 2,
            Cycle::ThreeLevelV | Cycle::ThreeLevelF => 3,
        }
    }

    /// Inner cycles applied on the middle level per outer iteration.
    pub fn inner_cycles(self) -> usize {
        match self {
            Cycle::TwoLevel => 0,
            Cycle::ThreeLevelV => 1,
            Cycle::ThreeLevelF => 2,
        }
    }
}

impl fmt::Display for Relaxation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relaxation::F => "F",
            Relaxation::FCF => "FCF",
        })
    }
}

impl fmt::Display for Cycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cycle::TwoLevel => "two-level",
            Cycle::ThreeLevelV => "V",
            Cycle::ThreeLevelF => "F",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MethodSpec {
    pub relax: Relaxation,
    pub cycle: Cycle,
}

impl MethodSpec {
    pub fn new(relax: Relaxation, cycle: Cycle) -> Self {
        Self { relax, cycle }
    }

    pub fn two_level(relax: Relaxation) -> Self {
        Self::new(relax, Cycle::TwoLevel)
    }

    /// Checks that the hierarchy has as many levels as the cycle uses.
    pub fn validate(&self, h: &Hierarchy) -> Result<(), HierarchyError> {
        if self.cycle.levels() == 3 && h.m2 < 2 {
            return Err(HierarchyError::ThreeLevelNeedsM2 {
                cycle: self.cycle,
                m2: h.m2,
            });
        }
        Ok(())
    }
}
