//! Explicit space-time references with dense spatial propagators: the
//! iteration matrix assembled from `A`, `P_Φ`, `R_I`, `A_c` by the operator
//! formulas, and the cycle applied as a sweep to unit vectors.
#![allow(dead_code)]

use mgrit_modes::{CMatrix, Complex64, Cycle, Relaxation};

/// One level of the explicit hierarchy.
pub struct ExplicitLevel {
    pub phi: CMatrix,
    /// Number of time intervals on this level.
    pub n: usize,
    /// Coarsening factor to the next level (1 on the coarsest).
    pub factor: usize,
}

pub struct Explicit {
    pub levels: Vec<ExplicitLevel>,
    pub relax: Relaxation,
    pub inner: usize,
}

type Blocks = Vec<Vec<Complex64>>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl Explicit {
    /// `phis[l]` propagates level `l`; `factors` are the coarsening factors.
    pub fn new(phis: Vec<CMatrix>, nt: usize, factors: &[usize], relax: Relaxation, cycle: Cycle) -> Self {
        assert_eq!(phis.len(), factors.len() + 1);
        let mut levels = Vec::new();
        let mut n = nt;
        for (l, phi) in phis.into_iter().enumerate() {
            let factor = factors.get(l).copied().unwrap_or(1);
            levels.push(ExplicitLevel { phi, n, factor });
            n /= factor;
        }
        Self {
            levels,
            relax,
            inner: cycle.inner_cycles().max(1),
        }
    }

    pub fn q(&self) -> usize {
        self.levels[0].phi.rows()
    }

    fn step(&self, l: usize, u: &[Complex64]) -> Vec<Complex64> {
        self.levels[l].phi.mul_vec(u)
    }

    fn relax_points(&self, l: usize, u: &mut Blocks, g: &Blocks, c_points: bool) {
        let f = self.levels[l].factor;
        for i in 1..=self.levels[l].n {
            if (i % f == 0) == c_points {
                let s = self.step(l, &u[i - 1]);
                u[i] = s.iter().zip(&g[i]).map(|(a, b)| a + b).collect();
            }
        }
    }

    fn sequential(&self, l: usize, g: &Blocks) -> Blocks {
        let mut u = vec![g[0].clone()];
        for i in 1..=self.levels[l].n {
            let s = self.step(l, &u[i - 1]);
            u.push(s.iter().zip(&g[i]).map(|(a, b)| a + b).collect());
        }
        u
    }

    fn cycle(&self, l: usize, u: &mut Blocks, g: &Blocks) {
        if l + 1 == self.levels.len() {
            *u = self.sequential(l, g);
            return;
        }
        let f = self.levels[l].factor;
        self.relax_points(l, u, g, false);
        if self.relax == Relaxation::FCF {
            self.relax_points(l, u, g, true);
            self.relax_points(l, u, g, false);
        }
        // Residual at C-points: r_i = g_i − (u_i − Φ u_{i−1}).
        let nc = self.levels[l].n / f;
        let mut rc: Blocks = Vec::with_capacity(nc + 1);
        for j in 0..=nc {
            let i = j * f;
            let prev = if i == 0 {
                vec![zero(); u[0].len()]
            } else {
                self.step(l, &u[i - 1])
            };
            rc.push((0..u[i].len()).map(|x| g[i][x] - u[i][x] + prev[x]).collect());
        }
        let mut ec: Blocks = vec![vec![zero(); u[0].len()]; nc + 1];
        if l + 2 == self.levels.len() {
            ec = self.sequential(l + 1, &rc);
        } else {
            for _ in 0..self.inner {
                self.cycle(l + 1, &mut ec, &rc);
            }
        }
        for j in 0..=nc {
            for x in 0..u[0].len() {
                u[j * f][x] += ec[j][x];
            }
        }
        self.relax_points(l, u, g, false);
    }

    /// Space-time operator `A` of level `l`.
    pub fn operator(&self, l: usize) -> CMatrix {
        let lv = &self.levels[l];
        let q = self.q();
        let mut a = CMatrix::identity((lv.n + 1) * q);
        for i in 1..=lv.n {
            a.add_block(i * q, (i - 1) * q, &lv.phi, Complex64::new(-1.0, 0.0));
        }
        a
    }

    fn level_injection(&self, l: usize) -> CMatrix {
        let q = self.q();
        let (n, f) = (self.levels[l].n, self.levels[l].factor);
        let nc = n / f;
        let mut r = CMatrix::zeros((nc + 1) * q, (n + 1) * q);
        for j in 0..=nc {
            for x in 0..q {
                r[(j * q + x, j * f * q + x)] = Complex64::new(1.0, 0.0);
            }
        }
        r
    }

    fn level_interpolation(&self, l: usize) -> CMatrix {
        let q = self.q();
        let (n, f) = (self.levels[l].n, self.levels[l].factor);
        let nc = n / f;
        let mut p = CMatrix::zeros((n + 1) * q, (nc + 1) * q);
        for j in 0..=nc {
            let mut blk = CMatrix::identity(q);
            for k in 0..f {
                let i = j * f + k;
                if i > n {
                    break;
                }
                p.set_block(i * q, j * q, &blk);
                blk = &self.levels[l].phi * &blk;
            }
        }
        p
    }

    /// `E = (I − P M R A) P Y R` with `Y = I` (F) or `I − R A P` (FCF) and
    /// `M = A_c⁻¹` or `(I − E_c^ν) A_c⁻¹` below the second-coarsest level.
    pub fn formula_matrix(&self) -> CMatrix {
        self.formula_level(0)
    }

    fn formula_level(&self, l: usize) -> CMatrix {
        let a = self.operator(l);
        let (p, r) = (self.level_interpolation(l), self.level_injection(l));
        let ac_inv = self.operator(l + 1).inverse().unwrap();
        let m = if l + 2 == self.levels.len() {
            ac_inv
        } else {
            let ec = self.formula_level(l + 1);
            let id = CMatrix::identity(ec.rows());
            &(&id - &ec.pow(self.inner).unwrap()) * &ac_inv
        };
        let relax = match self.relax {
            Relaxation::F => p.clone(),
            Relaxation::FCF => {
                let a_s = &(&r * &a) * &p;
                &p * &(&CMatrix::identity(a_s.rows()) - &a_s)
            }
        };
        let correction = &CMatrix::identity(a.rows()) - &(&(&(&p * &m) * &r) * &a);
        &(&correction * &relax) * &r
    }

    /// Error propagation of one sweep-form cycle on the full fine grid. The
    /// sweeps never touch `t_0`, so columns of the initial block differ from
    /// the formula for FCF; the two agree whenever `e_0 = 0`.
    pub fn iteration_matrix(&self) -> CMatrix {
        let q = self.q();
        let n = self.levels[0].n;
        let dim = (n + 1) * q;
        let g: Blocks = vec![vec![zero(); q]; n + 1];
        let mut e = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut u: Blocks = vec![vec![zero(); q]; n + 1];
            u[col / q][col % q] = Complex64::new(1.0, 0.0);
            // g = 0 makes u the error; the initial row is pinned to g_0 = 0.
            self.cycle(0, &mut u, &g);
            for (i, block) in u.iter().enumerate() {
                for (x, v) in block.iter().enumerate() {
                    e[(i * q + x, col)] = *v;
                }
            }
        }
        e
    }

    /// Injection of fine to C-point blocks, `(nc+1)q × (n+1)q`.
    pub fn injection(&self) -> CMatrix {
        self.level_injection(0)
    }

    /// Ideal interpolation `P_Φ`, `(n+1)q × (nc+1)q`.
    pub fn interpolation(&self) -> CMatrix {
        self.level_interpolation(0)
    }
}

/// Implicit upwind step matrix `((1+λ)I − λS)^{-1}` built from the stencil.
pub fn upwind_propagator(nx: usize, cfl: f64) -> CMatrix {
    let l = CMatrix::from_fn(nx, nx, |j, k| {
        if j == k {
            Complex64::new(1.0 + cfl, 0.0)
        } else if (j + nx - 1) % nx == k {
            Complex64::new(-cfl, 0.0)
        } else {
            zero()
        }
    });
    l.inverse().unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
