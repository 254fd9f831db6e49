//! Fourier symbols of the Q2–Q1 Taylor-Hood discretization of 2D
//! incompressible linear elasticity, with the pressure eliminated so that
//! one implicit Euler step becomes a 16×16 propagator symbol.
//!
//! Unknown ordering inside a 4-block is (N, XE, YE, C): vertex, x-edge
//! midpoint, y-edge midpoint, cell center. The 16 unknowns are
//! (velocity-x, velocity-y, displacement-x, displacement-y).

use num_complex::Complex64;

use crate::fmath::{cos, sin, sqrt};
use crate::matrix::{CMatrix, MatrixError};
use crate::sweep::Frequency;
use crate::symbols::{SymbolError, SymbolSource};

/// `‖B̃‖₂ < DEGENERATE_TOL·dx` marks a degenerate frequency.
pub const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ElasticityError {
    #[error("invalid elasticity parameter {name} = {value}: must be positive and finite")]
    InvalidParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticityParams {
    pub rho: f64,
    pub mu: f64,
    pub dx: f64,
    pub dt: f64,
}

impl ElasticityParams {
    pub fn new(rho: f64, mu: f64, dx: f64, dt: f64) -> Result<Self, ElasticityError> {
        for (name, value) in [("rho", rho), ("mu", mu), ("dx", dx), ("dt", dt)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ElasticityError::InvalidParameter { name, value });
            }
        }
        Ok(Self { rho, mu, dx, dt })
    }

    /// `ν = (Δt/Δx²)(μ/ρ)`.
    pub fn nu(&self) -> f64 {
        self.dt / (self.dx * self.dx) * (self.mu / self.rho)
    }
}

/// How [`phi_symbol_elasticity`] treats frequencies where `B̃` vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Degeneracy {
    /// Report [`SymbolError::DegenerateFrequency`].
    Reject,
    /// Use `P̃ = I`: projecting onto the complement of a zero vector.
    IdentityProjection,
}

/// All intermediate symbols at one frequency.
#[derive(Debug, Clone)]
pub struct ElasticitySymbolSet {
    pub mfull: CMatrix,
    pub kfull: CMatrix,
    pub b: CMatrix,
    /// 1×1; zero at a degenerate frequency.
    pub s: CMatrix,
    pub p: CMatrix,
    pub phi: CMatrix,
    pub degenerate: bool,
}

pub fn mass_1d_symbol(theta: f64, dx: f64) -> CMatrix {
    let s = dx / 30.0;
    let off = 4.0 * cos(theta / 2.0) * s;
    CMatrix::from_real(2, 2, &[(8.0 - 2.0 * cos(theta)) * s, off, off, 16.0 * s]).expect("2x2 shape")
}

pub fn stiffness_1d_symbol(theta: f64, dx: f64) -> CMatrix {
    let s = 1.0 / (3.0 * dx);
    let off = -16.0 * cos(theta / 2.0) * s;
    CMatrix::from_real(2, 2, &[(14.0 + 2.0 * cos(theta)) * s, off, off, 16.0 * s]).expect("2x2 shape")
}

pub fn mass_2d_symbol(theta1: f64, theta2: f64, dx: f64) -> CMatrix {
    mass_1d_symbol(theta2, dx).kron(&mass_1d_symbol(theta1, dx))
}

pub fn stiffness_2d_symbol(theta1: f64, theta2: f64, dx: f64) -> CMatrix {
    let a = mass_1d_symbol(theta2, dx).kron(&stiffness_1d_symbol(theta1, dx));
    let b = stiffness_1d_symbol(theta2, dx).kron(&mass_1d_symbol(theta1, dx));
    &a + &b
}

/// Symbols of the x- and y-derivative parts of the discrete gradient.
pub fn gradient_symbols(theta1: f64, theta2: f64, dx: f64) -> (CMatrix, CMatrix) {
    let f = Complex64::new(0.0, -dx / 9.0);
    let (s1, s2) = (sin(theta1), sin(theta2));
    let (h1, h2) = (sin(theta1 / 2.0), sin(theta2 / 2.0));
    let (c1, c2) = (cos(theta1 / 2.0), cos(theta2 / 2.0));
    let bx = [s1, 4.0 * h1, 2.0 * s1 * c2, 8.0 * h1 * c2];
    let by = [s2, 2.0 * s2 * c1, 4.0 * h2, 8.0 * h2 * c1];
    let col = |v: [f64; 4]| CMatrix::from_fn(4, 1, |i, _| f * v[i]);
    (col(bx), col(by))
}

fn block_diag2(a: &CMatrix) -> CMatrix {
    let n = a.rows();
    let mut out = CMatrix::zeros(2 * n, 2 * n);
    out.set_block(0, 0, a);
    out.set_block(n, n, a);
    out
}

/// Builds `M̃`, `K̃`, `B̃`, `S̃`, `P̃` and the 16×16 propagator symbol `Φ̃` for
/// time step `step_scale·Δt`.
pub fn phi_symbol_elasticity(
    theta1: f64,
    theta2: f64,
    p: &ElasticityParams,
    step_scale: usize,
    degeneracy: Degeneracy,
) -> Result<ElasticitySymbolSet, SymbolError> {
    let dt = step_scale as f64 * p.dt;
    let mfull = block_diag2(&mass_2d_symbol(theta1, theta2, p.dx));
    let kfull = block_diag2(&stiffness_2d_symbol(theta1, theta2, p.dx));
    let (bx, by) = gradient_symbols(theta1, theta2, p.dx);
    let mut b = CMatrix::zeros(8, 1);
    b.set_block(0, 0, &bx);
    b.set_block(4, 0, &by);

    let h = &mfull.scale_real(p.rho) + &kfull.scale_real(dt * dt * p.mu);
    let hinv_m = h.solve(&mfull)?;
    let hinv_k = h.solve(&kfull)?;

    let bnorm = sqrt(b.as_slice().iter().map(|z| z.norm_sqr()).sum());
    let degenerate = bnorm < DEGENERATE_TOL * p.dx;
    let (s, proj) = if degenerate {
        if degeneracy == Degeneracy::Reject {
            return Err(SymbolError::DegenerateFrequency {
                theta: Frequency::spatial_2d(theta1, theta2),
            });
        }
        (CMatrix::zeros(1, 1), CMatrix::identity(8))
    } else {
        let hinv_b = h.solve(&b)?;
        let s = &b.adjoint() * &hinv_b;
        let sinv = s.inverse()?;
        let correction = &(&hinv_b * &sinv) * &b.adjoint();
        (s, &CMatrix::identity(8) - &correction)
    };

    let a11 = (&proj * &hinv_m).scale_real(p.rho);
    let a12 = (&proj * &hinv_k).scale_real(-dt * p.mu);
    let a21 = a11.scale_real(dt);
    let a22 = &a12.scale_real(dt) + &CMatrix::identity(8);
    let mut phi = CMatrix::zeros(16, 16);
    phi.set_block(0, 0, &a11);
    phi.set_block(0, 8, &a12);
    phi.set_block(8, 0, &a21);
    phi.set_block(8, 8, &a22);
    if !phi.is_finite() {
        return Err(MatrixError::NonFinite {
            op: "elasticity propagator symbol",
        }
        .into());
    }
    Ok(ElasticitySymbolSet {
        mfull,
        kfull,
        b,
        s,
        p: proj,
        phi,
        degenerate,
    })
}

/// [`SymbolSource`] for the elasticity problem (q = 16).
#[derive(Debug, Clone, Copy)]
pub struct ElasticityModel {
    pub params: ElasticityParams,
    pub degeneracy: Degeneracy,
}

impl ElasticityModel {
    /// Sweeps stay total: degenerate frequencies use `P̃ = I`.
    pub fn new(params: ElasticityParams) -> Self {
        Self {
            params,
            degeneracy: Degeneracy::IdentityProjection,
        }
    }
}

impl SymbolSource for ElasticityModel {
    fn block_size(&self) -> usize {
        16
    }

    fn dimension(&self) -> usize {
        2
    }

    fn phi(&self, theta: &Frequency, step_scale: usize) -> Result<CMatrix, SymbolError> {
        let Some(ty) = theta.theta_y else {
            return Err(SymbolError::WrongDimension {
                expected: 2,
                theta: *theta,
            });
        };
        Ok(phi_symbol_elasticity(theta.theta_x, ty, &self.params, step_scale, self.degeneracy)?.phi)
    }

    fn name(&self) -> &'static str {
        "elasticity"
    }
}
