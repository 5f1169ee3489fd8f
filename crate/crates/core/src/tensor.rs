//! Dense row-major tensors with shape metadata.
//!
//! Activations are `[c, H, W]`, weights `[c_out, c_in, k, k]`. On disk a
//! tensor is the JSON object `{"shape": [...], "data": [...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T = f64> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if expected != data.len() {
            return Err(Error::Dimension(format!(
                "shape {shape:?} needs {expected} values, got {}",
                data.len()
            )));
        }
        Ok(Self { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let n = shape.iter().product();
        Self {
            shape,
            data: vec![T::zero(); n],
        }
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(usize) -> T) -> Self {
        let n: usize = shape.iter().product();
        Self {
            shape,
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(f).collect(),
        }
    }

    /// `[c, h, w]` of an activation tensor.
    pub fn dims3(&self) -> Result<(usize, usize, usize)> {
        match self.shape[..] {
            [c, h, w] => Ok((c, h, w)),
            _ => Err(Error::Dimension(format!(
                "expected [channels, H, W], got {:?}",
                self.shape
            ))),
        }
    }

    /// `[c_out, c_in, kh, kw]` of a weight tensor.
    pub fn dims4(&self) -> Result<(usize, usize, usize, usize)> {
        match self.shape[..] {
            [a, b, c, d] => Ok((a, b, c, d)),
            _ => Err(Error::Dimension(format!(
                "expected [c_out, c_in, k, k], got {:?}",
                self.shape
            ))),
        }
    }

    /// Copy of the trailing 2-D plane at `index` (all leading indices
    /// flattened) as a matrix.
    pub fn plane(&self, index: usize) -> Matrix<T> {
        let (r, c) = self.plane_dims();
        let start = index * r * c;
        Matrix::from_vec(r, c, self.data[start..start + r * c].to_vec())
    }

    fn plane_dims(&self) -> (usize, usize) {
        let n = self.shape.len();
        assert!(n >= 2, "tensor has no 2-D planes");
        (self.shape[n - 2], self.shape[n - 1])
    }
}

#[derive(Serialize, Deserialize)]
struct TensorFile {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TensorFile = serde_json::from_str(text)?;
        Self::new(raw.shape, raw.data)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TensorFile {
            shape: self.shape.clone(),
            data: self.data.clone(),
        })
        .expect("f64 tensor serializes")
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// `‖got − want‖₂ / ‖want‖₂`; `‖got − want‖₂` when `want` is all zero.
pub fn rel_l2_error(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "rel_l2_error length");
    let num: f64 = got
        .iter()
        .zip(want)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let den: f64 = want.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn max_abs_error(got: &[f64], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "max_abs_error length");
    got.iter()
        .zip(want)
        .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checked() {
        assert!(Tensor::new(vec![2, 2], vec![1.0; 3]).is_err());
        let t = Tensor::new(vec![1, 2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(t.dims3().unwrap(), (1, 2, 2));
        assert!(t.dims4().is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = Tensor::new(vec![1, 1, 3], vec![0.1, -2.5, 1e-300]).unwrap();
        let back = Tensor::from_json(&t.to_json()).unwrap();
        assert_eq!(back, t);
        assert!(Tensor::from_json(r#"{"shape":[2],"data":[1]}"#).is_err());
        assert!(Tensor::from_json("not json").is_err());
    }

    #[test]
    fn error_metrics() {
        assert_eq!(rel_l2_error(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
        assert!((rel_l2_error(&[1.0, 1.0], &[1.0, 2.0]) - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(max_abs_error(&[1.0, -3.0], &[0.5, -1.0]), 2.0);
    }
}
