//! Frequency grids, per-frequency results and their max-reduction.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

/// A sampled frequency: spatial `θ` (one or two components) and, for
/// space-time LFA, the temporal base frequency `ω⁽⁰⁾`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency {
    pub theta_x: f64,
    pub theta_y: Option<f64>,
    pub omega0: Option<f64>,
}

impl Frequency {
    pub fn spatial_1d(theta: f64) -> Self {
        Self {
            theta_x: theta,
            theta_y: None,
            omega0: None,
        }
    }

    pub fn spatial_2d(theta_x: f64, theta_y: f64) -> Self {
        Self {
            theta_x,
            theta_y: Some(theta_y),
            omega0: None,
        }
    }

    pub fn with_omega(self, omega0: f64) -> Self {
        Self {
            omega0: Some(omega0),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid spacing {h} yields no sample points in an interval of length {len}")]
    Empty { h: f64, len: f64 },
    #[error("grid spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
}

fn count(len: f64, h: f64) -> Result<usize, GridError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(GridError::InvalidSpacing(h));
    }
    let n = (len / h + 1e-9) as usize;
    if n == 0 {
        return Err(GridError::Empty { h, len });
    }
    Ok(n)
}

/// `θ_j = −π + j·h`, `j = 1..⌊2π/h⌋`: samples of `(−π, π]`.
pub fn theta_grid(h: f64) -> Result<Vec<f64>, GridError> {
    let n = count(2.0 * PI, h)?;
    Ok((1..=n).map(|j| -PI + j as f64 * h).collect())
}

/// Samples of `(−π/factor, π/factor]` with spacing `h`.
pub fn omega_grid(h: f64, factor: usize) -> Result<Vec<f64>, GridError> {
    let half = PI / factor as f64;
    let n = count(2.0 * half, h)?;
    Ok((1..=n).map(|j| -half + j as f64 * h).collect())
}

/// Spatial frequency grid in row-major order (`θ_x` outer, `θ_y` inner).
pub fn spatial_grid(dimension: usize, h: f64) -> Result<Vec<Frequency>, GridError> {
    let axis = theta_grid(h)?;
    Ok(match dimension {
        1 => axis.iter().map(|&t| Frequency::spatial_1d(t)).collect(),
        _ => axis
            .iter()
            .flat_map(|&tx| axis.iter().map(move |&ty| Frequency::spatial_2d(tx, ty)))
            .collect(),
    })
}

/// The discrete frequencies `2πj/nx`, `j = 0..nx`, of a periodic mesh.
pub fn discrete_grid(nx: usize) -> Vec<Frequency> {
    (0..nx)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / nx as f64;
            Frequency::spatial_1d(if t > PI { t - 2.0 * PI } else { t })
        })
        .collect()
}

/// `values[k−1]` is the reduction factor of the k-th power at `frequency`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeValues {
    pub frequency: Frequency,
    pub values: Vec<f64>,
}

/// A frequency left out of a sweep and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Excluded {
    pub frequency: Frequency,
    pub reason: String,
}

/// Per-frequency results of a sweep, in grid order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepMap {
    pub modes: Vec<ModeValues>,
    pub excluded: Vec<Excluded>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub k: usize,
    pub value: f64,
    pub argmax: Frequency,
}

/// Worst case over the sampled frequencies for each `k = 1..k_max`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PredictionSeries {
    pub points: Vec<SeriesPoint>,
    pub excluded: Vec<Excluded>,
}

impl PredictionSeries {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn value(&self, k: usize) -> Option<f64> {
        self.points.iter().find(|p| p.k == k).map(|p| p.value)
    }
}

impl SweepMap {
    /// Max over frequencies per k. Ties keep the first frequency in grid
    /// order; an empty map gives an empty series.
    pub fn reduce(&self) -> PredictionSeries {
        let kmax = self.modes.iter().map(|m| m.values.len()).max().unwrap_or(0);
        let mut points = Vec::with_capacity(kmax);
        for k in 1..=kmax {
            let mut best: Option<(f64, Frequency)> = None;
            for mode in &self.modes {
                let Some(&v) = mode.values.get(k - 1) else {
                    continue;
                };
                if best.map_or(true, |(b, _)| v > b) {
                    best = Some((v, mode.frequency));
                }
            }
            if let Some((value, argmax)) = best {
                points.push(SeriesPoint { k, value, argmax });
            }
        }
        PredictionSeries {
            points,
            excluded: self.excluded.clone(),
        }
    }
}

/// Evaluates `f` on every item, in parallel with the `rayon` feature.
/// Output order always matches input order.
pub(crate) fn map_ordered<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "rayon")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "rayon"))]
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_grid_is_half_open() {
        let g = theta_grid(PI / 32.0).unwrap();
        assert_eq!(g.len(), 64);
        assert!((g[0] + PI - PI / 32.0).abs() < 1e-15);
        assert!((g[63] - PI).abs() < 1e-12);
        assert!(g.iter().any(|&t| t.abs() < 1e-12));
    }

    #[test]
    fn omega_grid_covers_reduced_interval() {
        let g = omega_grid(PI / 32.0, 2).unwrap();
        assert_eq!(g.len(), 32);
        assert!((g[31] - PI / 2.0).abs() < 1e-12);
        assert!(g[0] > -PI / 2.0);
    }

    #[test]
    fn reduce_keeps_first_argmax() {
        let map = SweepMap {
            modes: alloc::vec![
                ModeValues {
                    frequency: Frequency::spatial_1d(0.1),
                    values: alloc::vec![1.0, 0.5]
                },
                ModeValues {
                    frequency: Frequency::spatial_1d(0.2),
                    values: alloc::vec![1.0, 0.7]
                },
            ],
            excluded: Vec::new(),
        };
        let s = map.reduce();
        assert_eq!(s.points[0].argmax.theta_x, 0.1);
        assert_eq!(s.points[1].argmax.theta_x, 0.2);
        assert_eq!(s.values(), alloc::vec![1.0, 0.7]);
    }
}
