//! Total-gradient score.
//!
//! The gradient stencil is the central difference in the interior and the
//! one-sided difference on the borders, with unit spacing, along both axes.

use crate::error::{Error, Result};
use crate::hadamard::Pattern2D;

/// Gradient of a `rows x cols` row-major grid. Returns `(gx, gy)` where `gx`
/// differentiates along columns (`j`) and `gy` along rows (`i`). An axis of
/// length one has zero derivative.
pub fn gradient_grid(values: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(values.len(), rows * cols, "grid size");
    let at = |i: usize, j: usize| values[i * cols + j];
    let mut gx = vec![0.0; values.len()];
    let mut gy = vec![0.0; values.len()];
    for i in 0..rows {
        for j in 0..cols {
            let k = i * cols + j;
            if cols > 1 {
                gx[k] = if j == 0 {
                    at(i, 1) - at(i, 0)
                } else if j == cols - 1 {
                    at(i, j) - at(i, j - 1)
                } else {
                    (at(i, j + 1) - at(i, j - 1)) / 2.0
                };
            }
            if rows > 1 {
                gy[k] = if i == 0 {
                    at(1, j) - at(0, j)
                } else if i == rows - 1 {
                    at(i, j) - at(i - 1, j)
                } else {
                    (at(i + 1, j) - at(i - 1, j)) / 2.0
                };
            }
        }
    }
    (gx, gy)
}

pub fn gradient_2d(p: &Pattern2D) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = p.side();
    if r < 2 {
        return Err(Error::Shape(format!(
            "gradient needs a pattern side of at least 2, got {r}"
        )));
    }
    let values: Vec<f64> = p.values().iter().map(|&v| v as f64).collect();
    Ok(gradient_grid(&values, r, r))
}

/// `TG = sum_j |Gx_j| + |Gy_j|` over all pixels.
pub fn score_total_gradient(p: &Pattern2D) -> Result<f64> {
    let (gx, gy) = gradient_2d(p)?;
    Ok(gx.iter().zip(&gy).map(|(x, y)| x.abs() + y.abs()).sum())
}
