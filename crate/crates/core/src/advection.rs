//! Implicit first-order upwind discretization of `u_t + c u_x = 0` on a
//! periodic mesh.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::fmath;
use crate::matrix::CMatrix;
use crate::sweep::Frequency;
use crate::symbols::{SymbolError, SymbolSource};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdvectionError {
    #[error("invalid advection parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdvectionParams {
    /// Flow speed.
    pub c: f64,
    pub dx: f64,
    pub dt: f64,
    /// Number of spatial intervals (= unknowns, periodic).
    pub nx: usize,
}

impl AdvectionParams {
    pub fn new(c: f64, dx: f64, dt: f64, nx: usize) -> Result<Self, AdvectionError> {
        for (name, value) in [("c", c), ("dx", dx), ("dt", dt)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(AdvectionError::InvalidParameter {
                    name,
                    value,
                    reason: "must be positive and finite",
                });
            }
        }
        if nx < 2 {
            return Err(AdvectionError::InvalidParameter {
                name: "nx",
                value: nx as f64,
                reason: "need at least 2 intervals",
            });
        }
        Ok(Self { c, dx, dt, nx })
    }

    /// Effective CFL number `c·s·Δt/Δx` for time step `s·Δt`.
    pub fn cfl(&self, step_scale: usize) -> f64 {
        self.c * step_scale as f64 * self.dt / self.dx
    }
}

/// `[1 + λ(1 − e^{−iθ})]⁻¹` with `λ = c·s·Δt/Δx`.
pub fn phi_symbol(theta: f64, p: &AdvectionParams, step_scale: usize) -> Complex64 {
    let lam = p.cfl(step_scale);
    let z = Complex64::new(fmath::cos(theta), -fmath::sin(theta));
    let denom = Complex64::new(1.0, 0.0) + (Complex64::new(1.0, 0.0) - z) * lam;
    denom.inv()
}

/// Dense `nx`×`nx` propagator `Φ` with `u_i = Φ u_{i−1}`.
///
/// `Φ` inverts the circulant with `1+λ` on the diagonal and `−λ` on the
/// periodic subdiagonal. Writing `r = λ/(1+λ)`, unrolling the recurrence
/// once around the period gives `Φ_{jk} = r^{(j−k) mod nx} / ((1+λ)(1 − r^{nx}))`.
pub fn assemble_propagator(p: &AdvectionParams) -> CMatrix {
    let lam = p.cfl(1);
    let n = p.nx;
    let r = lam / (1.0 + lam);
    let scale = 1.0 / ((1.0 + lam) * (1.0 - fmath::powi(r, n as i32)));
    let powers: Vec<f64> = (0..n).map(|d| fmath::powi(r, d as i32) * scale).collect();
    CMatrix::from_fn(n, n, |j, k| Complex64::new(powers[(j + n - k) % n], 0.0))
}

/// One implicit upwind step of size `s·Δt`, solved directly: `O(nx)`.
pub fn step(p: &AdvectionParams, step_scale: usize, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let lam = p.cfl(step_scale);
    let a = 1.0 + lam;
    let r = lam / a;
    // u_j = f_j/a + r u_{j−1}; the periodic wrap is closed by summing once
    // around the ring for u_{n−1}.
    let mut acc = 0.0;
    let mut rp = 1.0;
    for j in (0..n).rev() {
        acc += rp * u[j] / a;
        rp *= r;
    }
    let last = acc / (1.0 - rp);
    let mut out = vec![0.0; n];
    let mut prev = last;
    for j in 0..n {
        prev = u[j] / a + r * prev;
        out[j] = prev;
    }
    out
}

/// [`SymbolSource`] for the advection problem (q = 1).
#[derive(Debug, Clone, Copy)]
pub struct AdvectionModel {
    pub params: AdvectionParams,
}

impl AdvectionModel {
    pub fn new(params: AdvectionParams) -> Self {
        Self { params }
    }
}

impl SymbolSource for AdvectionModel {
    fn block_size(&self) -> usize {
        1
    }

    fn dimension(&self) -> usize {
        1
    }

    fn phi(&self, theta: &Frequency, step_scale: usize) -> Result<CMatrix, SymbolError> {
        if theta.theta_y.is_some() {
            return Err(SymbolError::WrongDimension {
                expected: 1,
                theta: *theta,
            });
        }
        Ok(CMatrix::scalar(phi_symbol(theta.theta_x, &self.params, step_scale)))
    }

    fn name(&self) -> &'static str {
        "advection"
    }
}
