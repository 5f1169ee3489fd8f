//! Direct valid cross-correlation, the ground truth for every other path.

use crate::error::{Error, Result};
use crate::matrix::Scalar;
use crate::rational::Rational;
use crate::tensor::Tensor;

/// Valid cross-correlation (no kernel flip) of `[c_in, H, W]` with
/// `[c_out, c_in, k, k]`, summed over `c_in` in ascending order.
pub fn conv2d_direct_generic<T: Scalar>(input: &Tensor<T>, weights: &Tensor<T>) -> Result<Tensor<T>> {
    let (c_in, h, w) = input.dims3()?;
    let (c_out, wc_in, kh, kw) = weights.dims4()?;
    check_conv_shapes(c_in, h, w, wc_in, kh, kw)?;
    let (oh, ow) = (h - kh + 1, w - kw + 1);
    let x = input.data();
    let f = weights.data();
    let mut out = Vec::with_capacity(c_out * oh * ow);
    for co in 0..c_out {
        for i in 0..oh {
            for j in 0..ow {
                let mut acc = T::zero();
                for ci in 0..c_in {
                    for u in 0..kh {
                        for v in 0..kw {
                            let xv = &x[(ci * h + i + u) * w + j + v];
                            let fv = &f[((co * c_in + ci) * kh + u) * kw + v];
                            acc = acc + xv.clone() * fv.clone();
                        }
                    }
                }
                out.push(acc);
            }
        }
    }
    Tensor::new(vec![c_out, oh, ow], out)
}

pub fn conv2d_direct(input: &Tensor<f64>, weights: &Tensor<f64>) -> Result<Tensor<f64>> {
    conv2d_direct_generic(input, weights)
}

pub fn conv2d_direct_rational(
    input: &Tensor<Rational>,
    weights: &Tensor<Rational>,
) -> Result<Tensor<Rational>> {
    conv2d_direct_generic(input, weights)
}

/// 1-D valid correlation: `y[i] = Σⱼ d[i+j]·g[j]`.
pub fn correlate_1d<T: Scalar>(d: &[T], g: &[T]) -> Result<Vec<T>> {
    if g.is_empty() || d.len() < g.len() {
        return Err(Error::Dimension(format!(
            "signal of length {} shorter than kernel of length {}",
            d.len(),
            g.len()
        )));
    }
    Ok((0..=d.len() - g.len())
        .map(|i| {
            g.iter()
                .enumerate()
                .fold(T::zero(), |acc, (j, gj)| acc + d[i + j].clone() * gj.clone())
        })
        .collect())
}

pub(crate) fn check_conv_shapes(
    c_in: usize,
    h: usize,
    w: usize,
    wc_in: usize,
    kh: usize,
    kw: usize,
) -> Result<()> {
    if kh != kw {
        return Err(Error::Dimension(format!("non-square kernel {kh}x{kw}")));
    }
    if wc_in != c_in {
        return Err(Error::Dimension(format!(
            "weights expect {wc_in} input channels, input has {c_in}"
        )));
    }
    if kh == 0 || h < kh || w < kw {
        return Err(Error::Dimension(format!(
            "input {h}x{w} smaller than kernel {kh}x{kw}"
        )));
    }
    Ok(())
}
