//! Average reduction factor of a series: `10^slope` of the least-squares
//! line through `log10(value)` against `k`.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Average {
    Factor(f64),
    /// A value in the window is zero: the iteration hit exactness at `k`.
    Converged {
        k: usize,
    },
}

impl Average {
    pub fn factor(self) -> Option<f64> {
        match self {
            Average::Factor(f) => Some(f),
            Average::Converged { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AverageError {
    #[error("window {lo}..={hi} is not within the series k = 1..={len}")]
    Window { lo: usize, hi: usize, len: usize },
    #[error("value {value} at k = {k} is not a finite nonnegative number")]
    BadValue { k: usize, value: f64 },
}

/// `series[k − 1]` is the value at iteration `k`; `window` is inclusive.
/// A one-point window gives that value itself.
pub fn average_reduction(series: &[f64], window: (usize, usize)) -> Result<Average, AverageError> {
    let (lo, hi) = window;
    if lo == 0 || lo > hi || hi > series.len() {
        return Err(AverageError::Window {
            lo,
            hi,
            len: series.len(),
        });
    }
    for k in lo..=hi {
        let v = series[k - 1];
        if !(v.is_finite() && v >= 0.0) {
            return Err(AverageError::BadValue { k, value: v });
        }
        if v == 0.0 {
            return Ok(Average::Converged { k });
        }
    }
    if lo == hi {
        return Ok(Average::Factor(series[lo - 1]));
    }
    let n = (hi - lo + 1) as f64;
    let xs = lo..=hi;
    let mean_x = xs.clone().map(|k| k as f64).sum::<f64>() / n;
    let mean_y = xs.clone().map(|k| series[k - 1].log10()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for k in xs {
        let dx = k as f64 - mean_x;
        sxy += dx * (series[k - 1].log10() - mean_y);
        sxx += dx * dx;
    }
    Ok(Average::Factor(10f64.powf(sxy / sxx)))
}
