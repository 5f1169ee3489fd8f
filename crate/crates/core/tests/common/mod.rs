#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use winograd_core::rational::{rat, Rational};
use winograd_core::{Matrix, Tensor};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small random rational: numerator in [-20, 20], denominator in [1, 7].
pub fn rational(rng: &mut impl Rng) -> Rational {
    rat(rng.random_range(-20..=20), rng.random_range(1..=7))
}

pub fn rational_vec(rng: &mut impl Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| rational(rng)).collect()
}

pub fn rational_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<Rational> {
    Matrix::from_fn(rows, cols, |_, _| rational(rng))
}

pub fn rational_tensor(rng: &mut impl Rng, shape: Vec<usize>) -> Tensor<Rational> {
    Tensor::from_fn(shape, |_| rational(rng))
}

pub fn normal_tensor(rng: &mut impl Rng, shape: Vec<usize>) -> Tensor<f64> {
    Tensor::from_fn(shape, |_| rng.sample(StandardNormal))
}

pub fn fractions(rows: &[&[(i64, i64)]]) -> Matrix<Rational> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&(n, d)| rat(n, d)).collect())
            .collect(),
    )
}

pub fn integers(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&n| rat(n, 1)).collect())
            .collect(),
    )
}

/// 2-D valid cross-correlation of a single plane, written out longhand.
pub fn correlate_2d(x: &Matrix<Rational>, w: &Matrix<Rational>) -> Matrix<Rational> {
    let (h, wd) = x.shape();
    let k = w.rows();
    Matrix::from_fn(h - k + 1, wd - k + 1, |i, j| {
        let mut acc = rat(0, 1);
        for a in 0..k {
            for b in 0..k {
                acc += &x[(i + a, j + b)] * &w[(a, b)];
            }
        }
        acc
    })
}
