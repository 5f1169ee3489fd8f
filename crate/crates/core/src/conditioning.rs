//! Condition numbers of transform matrices (reporting only).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// `σ_max / σ_min`.
    Two,
    /// `‖M‖_F · ‖M⁺‖_F`; equals `‖M‖_F · ‖M⁻¹‖_F` for square nonsingular `M`.
    Frobenius,
}

/// Relative cutoff under which the smallest singular value counts as zero.
const SINGULAR_RTOL: f64 = 1e-14;

pub fn singular_values(matrix: &Matrix<f64>) -> Vec<f64> {
    let (r, c) = matrix.shape();
    if r == 0 || c == 0 {
        return Vec::new();
    }
    let dm = DMatrix::from_row_slice(r, c, matrix.data());
    let mut sv: Vec<f64> = dm.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Condition number of `matrix` in the chosen norm. Rectangular matrices use
/// their singular values; singular (or empty) matrices give `f64::INFINITY`.
pub fn condition_number(matrix: &Matrix<f64>, norm: Norm) -> f64 {
    let sv = singular_values(matrix);
    let (Some(&max), Some(&min)) = (sv.first(), sv.last()) else {
        return f64::INFINITY;
    };
    if max.is_nan() || max <= 0.0 || min <= max * SINGULAR_RTOL || !min.is_finite() {
        return f64::INFINITY;
    }
    match norm {
        Norm::Two => max / min,
        Norm::Frobenius => {
            let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
            let fro_inv: f64 = sv.iter().map(|s| 1.0 / (s * s)).sum::<f64>().sqrt();
            fro * fro_inv
        }
    }
}
