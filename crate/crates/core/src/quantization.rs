//! Symmetric linear quantization and the quantized Winograd pipelines.
//!
//! A `b`-bit symmetric quantizer has integer levels `−L..=L` with
//! `L = 2^{b−1} − 1` and a single scale `max_abs / L` calibrated on the
//! tensor being cast. Rounding is half-to-even. Level `q` maps back to
//! `max_abs · (q / L)`, so the extreme levels reproduce `±max_abs` exactly
//! and re-quantizing at the same width is the identity.

use serde::{Deserialize, Serialize};

use crate::construct::FloatPlan;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::pipeline::{conv2d_winograd_with, BaseMode, Stage, StageHook};
use crate::reference::check_conv_shapes;
use crate::tensor::{max_abs, Tensor};

pub const MIN_BITS: u32 = 2;
/// Above this the level grid is finer than `f64` can resolve.
pub const MAX_BITS: u32 = 48;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantParams {
    pub bits: u32,
    /// `max_abs / L`, or `1` for an all-zero tensor.
    pub scale: f64,
    pub max_abs: f64,
}

impl QuantParams {
    /// `2^{bits−1} − 1`.
    pub fn levels(bits: u32) -> i64 {
        (1i64 << (bits - 1)) - 1
    }

    pub fn max_level(&self) -> i64 {
        Self::levels(self.bits)
    }

    pub fn quantize(&self, x: f64) -> i64 {
        let l = self.max_level();
        let t = if self.max_abs > 0.0 {
            x / self.max_abs * l as f64
        } else {
            x / self.scale
        };
        (t.round_ties_even() as i64).clamp(-l, l)
    }

    pub fn dequantize(&self, q: i64) -> f64 {
        if self.max_abs > 0.0 {
            self.max_abs * (q as f64 / self.max_level() as f64)
        } else {
            q as f64 * self.scale
        }
    }

    pub fn fake(&self, x: f64) -> f64 {
        self.dequantize(self.quantize(x))
    }
}

fn check_bits(bits: u32) -> Result<()> {
    if !(MIN_BITS..=MAX_BITS).contains(&bits) {
        return Err(Error::Config(format!(
            "bit width {bits} outside {MIN_BITS}..={MAX_BITS}"
        )));
    }
    Ok(())
}

/// Per-tensor max-abs calibration.
pub fn compute_scale(values: &[f64], bits: u32) -> Result<QuantParams> {
    check_bits(bits)?;
    Ok(params_for(max_abs(values), bits))
}

fn params_for(max_abs: f64, bits: u32) -> QuantParams {
    let scale = if max_abs > 0.0 {
        max_abs / QuantParams::levels(bits) as f64
    } else {
        1.0
    };
    QuantParams {
        bits,
        scale,
        max_abs,
    }
}

pub fn fake_quant(tensor: &Tensor<f64>, bits: u32) -> Result<Tensor<f64>> {
    let params = compute_scale(tensor.data(), bits)?;
    Ok(tensor.map(|&x| params.fake(x)))
}

pub fn fake_quant_slice(values: &mut [f64], bits: u32) -> Result<QuantParams> {
    let params = compute_scale(values, bits)?;
    values.iter_mut().for_each(|x| *x = params.fake(*x));
    Ok(params)
}

/// Casts a whole stage (all tiles share one scale).
pub fn fake_quant_tiles(tiles: &mut [Matrix<f64>], bits: u32) -> Result<QuantParams> {
    check_bits(bits)?;
    let m = tiles
        .iter()
        .fold(0.0, |acc, t| f64::max(acc, max_abs(t.data())));
    let params = params_for(m, bits);
    for t in tiles.iter_mut() {
        t.data_mut().iter_mut().for_each(|x| *x = params.fake(*x));
    }
    Ok(params)
}

/// Bit width at each stage boundary of the quantized pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuantConfig {
    pub input_bits: u32,
    pub weight_bits: u32,
    pub input_transform_bits: u32,
    pub weight_transform_bits: u32,
    pub base_change_bits: u32,
    pub hadamard_bits: u32,
    pub output_transform_bits: u32,
}

impl Default for QuantConfig {
    fn default() -> Self {
        Self::uniform(8)
    }
}

impl QuantConfig {
    pub fn uniform(bits: u32) -> Self {
        Self {
            input_bits: bits,
            weight_bits: bits,
            input_transform_bits: bits,
            weight_transform_bits: bits,
            base_change_bits: bits,
            hadamard_bits: bits,
            output_transform_bits: bits,
        }
    }

    pub fn with_hadamard_bits(mut self, bits: u32) -> Self {
        self.hadamard_bits = bits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for b in [
            self.input_bits,
            self.weight_bits,
            self.input_transform_bits,
            self.weight_transform_bits,
            self.base_change_bits,
            self.hadamard_bits,
            self.output_transform_bits,
        ] {
            check_bits(b)?;
        }
        Ok(())
    }

    pub fn bits_for(&self, stage: Stage) -> u32 {
        match stage {
            Stage::Input => self.input_bits,
            Stage::Weights => self.weight_bits,
            Stage::InputBaseChange | Stage::WeightBaseChange | Stage::OutputBaseChange => {
                self.base_change_bits
            }
            Stage::InputTransform => self.input_transform_bits,
            Stage::WeightTransform => self.weight_transform_bits,
            Stage::Hadamard => self.hadamard_bits,
            Stage::Output => self.output_transform_bits,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: Stage,
    pub bits: u32,
    pub max_abs: f64,
    pub scale: f64,
}

/// Stage hook that fake-quantizes every stage tensor at its configured width.
pub struct QuantHook {
    config: QuantConfig,
    stats: Vec<StageStats>,
}

impl QuantHook {
    pub fn new(config: QuantConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            stats: Vec::new(),
        })
    }

    pub fn into_stats(self) -> Vec<StageStats> {
        self.stats
    }
}

impl StageHook<f64> for QuantHook {
    fn apply(&mut self, stage: Stage, tiles: &mut [Matrix<f64>]) {
        let bits = self.config.bits_for(stage);
        let p = fake_quant_tiles(tiles, bits).expect("widths validated in QuantHook::new");
        self.stats.push(StageStats {
            stage,
            bits,
            max_abs: p.max_abs,
            scale: p.scale,
        });
    }
}

#[derive(Clone, Debug)]
pub struct QuantizedConv {
    pub output: Tensor<f64>,
    /// One entry per cast, in execution order.
    pub stages: Vec<StageStats>,
}

/// Winograd convolution with a fake-quantization cast at every stage
/// boundary. Channel accumulation runs in double precision and is cast once
/// at `hadamard_bits`.
pub fn conv2d_winograd_quantized(
    input: &Tensor<f64>,
    weights: &Tensor<f64>,
    plan: &FloatPlan,
    mode: BaseMode,
    qconfig: &QuantConfig,
) -> Result<QuantizedConv> {
    let mut hook = QuantHook::new(*qconfig)?;
    let output = conv2d_winograd_with(input, weights, plan.transforms(), mode, &mut hook)?;
    Ok(QuantizedConv {
        output,
        stages: hook.into_stats(),
    })
}

/// Quantized direct convolution: integer levels of the quantized input and
/// weights are correlated in an exact `i128` accumulator, rescaled, and the
/// result is cast at `output_transform_bits`.
pub fn conv2d_direct_quantized(
    input: &Tensor<f64>,
    weights: &Tensor<f64>,
    qconfig: &QuantConfig,
) -> Result<Tensor<f64>> {
    qconfig.validate()?;
    let (c_in, h, w) = input.dims3()?;
    let (c_out, wc_in, k, kw) = weights.dims4()?;
    check_conv_shapes(c_in, h, w, wc_in, k, kw)?;
    let px = compute_scale(input.data(), qconfig.input_bits)?;
    let pw = compute_scale(weights.data(), qconfig.weight_bits)?;
    // Levels reach 2^47, so products need the wider accumulator.
    let qx: Vec<i128> = input.data().iter().map(|&v| px.quantize(v).into()).collect();
    let qw: Vec<i128> = weights.data().iter().map(|&v| pw.quantize(v).into()).collect();
    let (ls_x, ls_w) = (level_scale(&px), level_scale(&pw));

    let (oh, ow) = (h - k + 1, w - k + 1);
    let mut out = Vec::with_capacity(c_out * oh * ow);
    for co in 0..c_out {
        for i in 0..oh {
            for j in 0..ow {
                let mut acc: i128 = 0;
                for ci in 0..c_in {
                    for u in 0..k {
                        for v in 0..k {
                            acc += qx[(ci * h + i + u) * w + j + v]
                                * qw[((co * c_in + ci) * k + u) * k + v];
                        }
                    }
                }
                out.push(acc as f64 * ls_x * ls_w);
            }
        }
    }
    let mut out = Tensor::new(vec![c_out, oh, ow], out)?;
    fake_quant_slice(out.data_mut(), qconfig.output_transform_bits)?;
    Ok(out)
}

/// Real value of one integer level.
fn level_scale(p: &QuantParams) -> f64 {
    if p.max_abs > 0.0 {
        p.max_abs / p.max_level() as f64
    } else {
        p.scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scales() {
        assert_eq!(compute_scale(&[0.5, -1.0], 8).unwrap().scale, 1.0 / 127.0);
        assert_eq!(compute_scale(&[0.0, 0.0], 8).unwrap().scale, 1.0);
        assert_eq!(compute_scale(&[2.54, -1.0], 9).unwrap().scale, 2.54 / 255.0);
        assert!(compute_scale(&[1.0], 1).is_err());
        assert!(compute_scale(&[1.0], 64).is_err());
    }

    #[test]
    fn fake_quant_examples() {
        let z = Tensor::new(vec![1], vec![0.0]).unwrap();
        for bits in [2, 8, 16] {
            assert_eq!(fake_quant(&z, bits).unwrap().data(), &[0.0]);
        }
        let t = Tensor::new(vec![3], vec![1.0, -1.0, 0.5]).unwrap();
        let q = fake_quant(&t, 8).unwrap();
        assert_eq!(q.data(), &[1.0, -1.0, 64.0 / 127.0]);
        assert_eq!(fake_quant(&q, 8).unwrap(), q);
    }

    #[test]
    fn half_even_ties() {
        let unit = QuantParams {
            bits: 8,
            scale: 1.0,
            max_abs: 0.0,
        };
        assert_eq!(unit.quantize(2.5), 2);
        assert_eq!(unit.quantize(3.5), 4);
        assert_eq!(unit.quantize(0.5), 0);
        assert_eq!(unit.quantize(-2.5), -2);
        assert_eq!(unit.quantize(500.0), 127);
        assert_eq!(unit.quantize(-500.0), -127);
        // L = 3: 1.5 is an exact tie.
        let p = compute_scale(&[3.0], 3).unwrap();
        assert_eq!(p.quantize(1.5), 2);
        assert_eq!(p.quantize(-1.5), -2);
        assert_eq!(p.fake(3.0), 3.0);
    }

    #[test]
    fn bits_per_stage() {
        let c = QuantConfig::uniform(8).with_hadamard_bits(9);
        assert_eq!(c.bits_for(Stage::Hadamard), 9);
        assert_eq!(c.bits_for(Stage::OutputBaseChange), 8);
        let mut bad = c;
        bad.base_change_bits = 1;
        assert!(bad.validate().is_err());
        assert!(QuantHook::new(bad).is_err());
    }

    #[test]
    fn direct_quantized_delta_kernel() {
        let x = Tensor::from_fn(vec![1, 5, 5], |i| (i as f64 * 0.37).sin());
        let mut k = Tensor::zeros(vec![1, 1, 3, 3]);
        k.data_mut()[4] = 1.0;
        let y = conv2d_direct_quantized(&x, &k, &QuantConfig::default()).unwrap();
        let xq = fake_quant(&x, 8).unwrap();
        let crop: Vec<f64> = (1..4)
            .flat_map(|i| (1..4).map(move |j| i * 5 + j))
            .map(|idx| xq.data()[idx])
            .collect();
        let want = fake_quant(&Tensor::new(vec![1, 3, 3], crop).unwrap(), 8).unwrap();
        for (a, b) in y.data().iter().zip(want.data()) {
            assert!((a - b).abs() <= 1e-15 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let x = Tensor::zeros(vec![2, 7, 7]);
        let w = Tensor::from_fn(vec![3, 2, 3, 3], |i| i as f64 - 20.0);
        let y = conv2d_direct_quantized(&x, &w, &QuantConfig::default()).unwrap();
        assert!(y.data().iter().all(|&v| v == 0.0));
    }
}
