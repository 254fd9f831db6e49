//! Sequential two- and three-level MGRIT (Parareal with F-relaxation) for
//! time-independent linear one-step methods, used to measure actual error
//! reduction.
//!
//! The space-time system is `u_0 = g_0`, `u_i − Φu_{i−1} = g_i`. One
//! iteration is relaxation (F or FCF), the residual at C-points, a coarse
//! solve with the rediscretized propagator and an ideal-interpolation
//! correction. The middle level of a three-level hierarchy is solved
//! approximately by one (V) or two (F) two-grid cycles from a zero guess.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::advection::{self, AdvectionParams};
use crate::fmath;
use crate::hierarchy::{Hierarchy, HierarchyError, MethodSpec, Relaxation};

/// Default seed of the random initial guess.
pub const DEFAULT_SEED: u64 = 20240101;
/// `‖e_{k−1}‖ < CONVERGED_TOL·‖e_0‖` ends a measured series.
pub const CONVERGED_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MgritError {
    #[error("initial condition has {got} values, expected nx = {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("wavenumber {theta} is not periodic on {nx} points (theta*nx/(2pi) = {cycles})")]
    NonPeriodicWavenumber { theta: f64, nx: usize, cycles: f64 },
    #[error("at least one iteration is required")]
    NoIterations,
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
}

/// A linear one-step time integrator on real spatial vectors.
pub trait Stepper {
    fn nx(&self) -> usize;
    /// Applies the propagator for time step `step_scale·Δt`.
    fn step(&self, step_scale: usize, u: &[f64]) -> Vec<f64>;
}

impl Stepper for AdvectionParams {
    fn nx(&self) -> usize {
        self.nx
    }

    fn step(&self, step_scale: usize, u: &[f64]) -> Vec<f64> {
        advection::step(self, step_scale, u)
    }
}

/// Spatial vectors at all `nt + 1` fine time points.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeState {
    pub values: Vec<Vec<f64>>,
    pub hierarchy: Hierarchy,
}

impl SpaceTimeState {
    pub fn zeros(h: Hierarchy, nx: usize) -> Self {
        Self {
            values: vec![vec![0.0; nx]; h.nt + 1],
            hierarchy: h,
        }
    }

    /// C-point marks of fine time points on `level` (0: every m-th point,
    /// 1: every (m·m2)-th point).
    pub fn cf_marks(&self, level: usize) -> Vec<bool> {
        let stride = match level {
            0 => self.hierarchy.m,
            _ => self.hierarchy.m * self.hierarchy.m2,
        };
        (0..=self.hierarchy.nt).map(|i| i % stride == 0).collect()
    }

    /// Space-time 2-norm of `self − other` over all points or fine-level
    /// C-points.
    pub fn distance(&self, other: &SpaceTimeState, scope: ErrorScope) -> f64 {
        let m = self.hierarchy.m;
        let mut acc = 0.0;
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            if scope == ErrorScope::CPoints && i % m != 0 {
                continue;
            }
            acc += a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        }
        fmath::sqrt(acc)
    }
}

/// Right-hand side `g` of a homogeneous problem: `g_0 = u0`, zero elsewhere.
pub fn initial_value_rhs(h: &Hierarchy, u0: &[f64]) -> Vec<Vec<f64>> {
    let mut g = vec![vec![0.0; u0.len()]; h.nt + 1];
    g[0] = u0.to_vec();
    g
}

/// Forward substitution: `u_0 = g_0`, `u_i = Φ_s u_{i−1} + g_i`.
fn sequential_solve(stepper: &dyn Stepper, scale: usize, g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut u = Vec::with_capacity(g.len());
    u.push(g[0].clone());
    for i in 1..g.len() {
        let mut next = stepper.step(scale, &u[i - 1]);
        add_assign(&mut next, &g[i]);
        u.push(next);
    }
    u
}

fn add_assign(a: &mut [f64], b: &[f64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
}

/// The sequentially time-stepped solution with initial value `u0`.
pub fn exact_solve(stepper: &dyn Stepper, h: &Hierarchy, u0: &[f64]) -> Result<SpaceTimeState, MgritError> {
    check_len(stepper, u0)?;
    Ok(SpaceTimeState {
        values: sequential_solve(stepper, 1, &initial_value_rhs(h, u0)),
        hierarchy: *h,
    })
}

fn check_len(stepper: &dyn Stepper, u: &[f64]) -> Result<(), MgritError> {
    if u.len() != stepper.nx() {
        return Err(MgritError::WrongLength {
            expected: stepper.nx(),
            got: u.len(),
        });
    }
    Ok(())
}

/// One level of the hierarchy seen as its own time grid.
#[derive(Clone, Copy)]
struct Level {
    /// Time step of this level in fine steps.
    scale: usize,
    /// Coarsening factor to the next level.
    factor: usize,
}

fn levels(h: &Hierarchy, method: &MethodSpec) -> Vec<Level> {
    let mut out = vec![Level { scale: 1, factor: h.m }];
    if method.cycle.levels() == 3 {
        out.push(Level {
            scale: h.m,
            factor: h.m2,
        });
    }
    let coarsest = if method.cycle.levels() == 3 { h.m * h.m2 } else { h.m };
    out.push(Level {
        scale: coarsest,
        factor: 1,
    });
    out
}

fn f_relax_level(stepper: &dyn Stepper, lvl: Level, u: &mut [Vec<f64>], g: &[Vec<f64>]) {
    let n = u.len() - 1;
    for i in 1..=n {
        if i % lvl.factor != 0 {
            let mut next = stepper.step(lvl.scale, &u[i - 1]);
            add_assign(&mut next, &g[i]);
            u[i] = next;
        }
    }
}

fn c_relax_level(stepper: &dyn Stepper, lvl: Level, u: &mut [Vec<f64>], g: &[Vec<f64>]) {
    let n = u.len() - 1;
    for i in (lvl.factor..=n).step_by(lvl.factor) {
        let mut next = stepper.step(lvl.scale, &u[i - 1]);
        add_assign(&mut next, &g[i]);
        u[i] = next;
    }
}

/// `R_I(g − Au)`.
fn c_point_residual(stepper: &dyn Stepper, lvl: Level, u: &[Vec<f64>], g: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = u.len() - 1;
    let mut r = Vec::with_capacity(n / lvl.factor + 1);
    r.push(g[0].iter().zip(&u[0]).map(|(a, b)| a - b).collect());
    for i in (lvl.factor..=n).step_by(lvl.factor) {
        let prev = stepper.step(lvl.scale, &u[i - 1]);
        r.push(
            g[i].iter()
                .zip(&u[i])
                .zip(&prev)
                .map(|((gi, ui), pi)| gi - ui + pi)
                .collect(),
        );
    }
    r
}

/// `u += P_Φ e`.
fn interpolate_correction(stepper: &dyn Stepper, lvl: Level, u: &mut [Vec<f64>], e: &[Vec<f64>]) {
    let n_c = e.len() - 1;
    for (j, ej) in e.iter().enumerate() {
        let mut carry = ej.clone();
        let span = if j < n_c { lvl.factor } else { 1 };
        for l in 0..span {
            if l > 0 {
                carry = stepper.step(lvl.scale, &carry);
            }
            add_assign(&mut u[j * lvl.factor + l], &carry);
        }
    }
}

fn two_grid(
    stepper: &dyn Stepper,
    levels: &[Level],
    depth: usize,
    relax: Relaxation,
    inner: usize,
    u: &mut [Vec<f64>],
    g: &[Vec<f64>],
) {
    let lvl = levels[depth];
    f_relax_level(stepper, lvl, u, g);
    if relax == Relaxation::FCF {
        c_relax_level(stepper, lvl, u, g);
        f_relax_level(stepper, lvl, u, g);
    }
    let r = c_point_residual(stepper, lvl, u, g);
    let e = if depth + 2 == levels.len() {
        sequential_solve(stepper, levels[depth + 1].scale, &r)
    } else {
        let mut e = vec![vec![0.0; stepper.nx()]; r.len()];
        for _ in 0..inner {
            two_grid(stepper, levels, depth + 1, relax, inner, &mut e, &r);
        }
        e
    };
    interpolate_correction(stepper, lvl, u, &e);
}

/// F-relaxation on the fine level.
pub fn f_relax(stepper: &dyn Stepper, state: &mut SpaceTimeState, rhs: &[Vec<f64>]) {
    let lvl = Level {
        scale: 1,
        factor: state.hierarchy.m,
    };
    f_relax_level(stepper, lvl, &mut state.values, rhs);
}

/// C-relaxation on the fine level.
pub fn c_relax(stepper: &dyn Stepper, state: &mut SpaceTimeState, rhs: &[Vec<f64>]) {
    let lvl = Level {
        scale: 1,
        factor: state.hierarchy.m,
    };
    c_relax_level(stepper, lvl, &mut state.values, rhs);
}

/// One MGRIT iteration in place.
pub fn mgrit_cycle(
    stepper: &dyn Stepper,
    state: &mut SpaceTimeState,
    rhs: &[Vec<f64>],
    method: &MethodSpec,
) -> Result<(), MgritError> {
    method.validate(&state.hierarchy)?;
    let lv = levels(&state.hierarchy, method);
    two_grid(
        stepper,
        &lv,
        0,
        method.relax,
        method.cycle.inner_cycles(),
        &mut state.values,
        rhs,
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `u0(x_j) = Σ a·cos(θ j)` over `(a, θ)` pairs.
    CosineSum(Vec<(f64, f64)>),
    Custom(Vec<f64>),
}

impl InitialCondition {
    pub fn samples(&self, nx: usize) -> Result<Vec<f64>, MgritError> {
        match self {
            InitialCondition::Custom(v) => {
                if v.len() != nx {
                    return Err(MgritError::WrongLength {
                        expected: nx,
                        got: v.len(),
                    });
                }
                Ok(v.clone())
            }
            InitialCondition::CosineSum(terms) => {
                for &(_, theta) in terms {
                    let cycles = theta * nx as f64 / (2.0 * PI);
                    if fmath::abs(cycles - fmath::round(cycles)) > 1e-9 {
                        return Err(MgritError::NonPeriodicWavenumber { theta, nx, cycles });
                    }
                }
                Ok((0..nx)
                    .map(|j| terms.iter().map(|&(a, t)| a * fmath::cos(t * j as f64)).sum())
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guess {
    /// Uniform in `[−1, 1]` at every point after the initial time.
    Random {
        seed: u64,
    },
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ErrorScope {
    AllPoints,
    CPoints,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub initial_condition: InitialCondition,
    pub guess: Guess,
    pub iters: usize,
    pub error_norm_scope: ErrorScope,
}

/// Initial iterate: exact initial value, guess elsewhere.
pub fn initial_guess(h: &Hierarchy, u0: &[f64], guess: Guess) -> SpaceTimeState {
    let mut state = SpaceTimeState::zeros(*h, u0.len());
    state.values[0] = u0.to_vec();
    if let Guess::Random { seed } = guess {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for v in state.values.iter_mut().skip(1) {
            for x in v.iter_mut() {
                *x = rng.gen_range(-1.0..=1.0);
            }
        }
    }
    state
}

/// Error norms and reduction factors of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// `‖e_k‖` for `k = 0..`.
    pub error_norms: Vec<f64>,
    /// `‖e_k‖/‖e_{k−1}‖` for `k = 1..`, stopping at convergence.
    pub factors: Vec<f64>,
    /// `‖e_k‖/‖e_0‖` for `k = 1..`; the quantity `σ(E^k)` bounds.
    pub reductions: Vec<f64>,
    /// Iteration at which the error fell below the guard.
    pub converged_at: Option<usize>,
}

impl Measurement {
    /// Per-iteration ratios of a norm history with the convergence guard.
    pub fn from_norms(error_norms: Vec<f64>) -> Self {
        let e0 = error_norms.first().copied().unwrap_or(0.0);
        let mut factors = Vec::new();
        let mut converged_at = None;
        for k in 1..=error_norms.len() {
            let prev = error_norms[k - 1];
            if prev <= CONVERGED_TOL * e0 || prev == 0.0 {
                converged_at = Some(k - 1);
                break;
            }
            if k == error_norms.len() {
                break;
            }
            factors.push(error_norms[k] / prev);
        }
        let reductions = if e0 > 0.0 {
            error_norms[1..].iter().map(|e| e / e0).collect()
        } else {
            Vec::new()
        };
        Self {
            error_norms,
            factors,
            reductions,
            converged_at,
        }
    }
}

/// Runs `spec.iters` iterations and measures the error against the
/// sequential solution.
pub fn run_experiment(
    stepper: &dyn Stepper,
    h: &Hierarchy,
    method: &MethodSpec,
    spec: &ExperimentSpec,
) -> Result<Measurement, MgritError> {
    if spec.iters == 0 {
        return Err(MgritError::NoIterations);
    }
    method.validate(h)?;
    let u0 = spec.initial_condition.samples(stepper.nx())?;
    let exact = exact_solve(stepper, h, &u0)?;
    let rhs = initial_value_rhs(h, &u0);
    let mut state = initial_guess(h, &u0, spec.guess);
    let mut norms = Vec::with_capacity(spec.iters + 1);
    norms.push(state.distance(&exact, spec.error_norm_scope));
    for _ in 0..spec.iters {
        mgrit_cycle(stepper, &mut state, &rhs, method)?;
        norms.push(state.distance(&exact, spec.error_norm_scope));
    }
    Ok(Measurement::from_norms(norms))
}
