//! Winograd (Toom-Cook) convolution with exact transform construction, an
//! optional monic-Legendre polynomial base change, bit-accurate fake
//! quantization at every stage boundary, and a Monte-Carlo harness that
//! measures error against direct convolution.

pub mod conditioning;
pub mod construct;
pub mod error;
pub mod harness;
pub mod legendre;
pub mod matrix;
pub mod pipeline;
pub mod quantization;
pub mod rational;
pub mod reference;
pub mod tensor;

pub use conditioning::{condition_number, Norm};
pub use construct::{
    build_plan, plan_to_float, poly_from_roots, FloatPlan, InterpolationPoints, Transforms,
    WinogradPlan,
};
pub use error::{Error, Result};
pub use legendre::{build_base_change, monic_legendre, BaseChange};
pub use matrix::Matrix;
pub use pipeline::{
    conv2d_winograd, conv2d_winograd_exact, transform_input, transform_output,
    transform_weights, BaseMode, Stage,
};
pub use quantization::{
    compute_scale, conv2d_direct_quantized, conv2d_winograd_quantized, fake_quant, QuantConfig,
    QuantParams,
};
pub use rational::Rational;
pub use reference::{conv2d_direct, conv2d_direct_rational};
pub use tensor::Tensor;
