//! Winograd convolution dataflow in the canonical or Legendre base.
//!
//! Canonical: `Aᵀ[(G·W·Gᵀ) ⊙ (Bᵀ·X·B)]A`.
//!
//! Legendre: every transform becomes two sandwich products, a Vandermonde
//! stage expressed through `G_P`, `B_P`, `A_P` and a base-change stage
//! through `P⁻¹`:
//!
//! ```text
//! U = P⁻¹·(G_P·W·G_Pᵀ)·P⁻ᵀ
//! V = B_Pᵀ·(P⁻ᵀ·X·P⁻¹)·B_P
//! Y = A_Pᵀ·(P⁻ᵀ·M·P⁻¹)·A_P,   M = Σ_c U_c ⊙ V_c
//! ```
//!
//! Each equals its canonical counterpart in exact arithmetic. The stages
//! are kept separate so a [`StageHook`] (quantization) can act between them.

use serde::{Deserialize, Serialize};

use crate::construct::{FloatPlan, Transforms, WinogradPlan};
use crate::error::{Error, Result};
use crate::matrix::{Matrix, Scalar};
use crate::rational::Rational;
use crate::reference::check_conv_shapes;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseMode {
    Canonical,
    Legendre,
}

impl BaseMode {
    pub fn name(self) -> &'static str {
        match self {
            BaseMode::Canonical => "canonical",
            BaseMode::Legendre => "legendre",
        }
    }
}

impl std::str::FromStr for BaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(BaseMode::Canonical),
            "legendre" => Ok(BaseMode::Legendre),
            _ => Err(Error::Parse(format!("unknown base mode {s:?}"))),
        }
    }
}

/// Tensor boundaries in the dataflow at which a hook may rewrite values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Input,
    Weights,
    InputBaseChange,
    InputTransform,
    WeightTransform,
    WeightBaseChange,
    Hadamard,
    OutputBaseChange,
    Output,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Input => "input",
            Stage::Weights => "weights",
            Stage::InputBaseChange => "input_base_change",
            Stage::InputTransform => "input_transform",
            Stage::WeightTransform => "weight_transform",
            Stage::WeightBaseChange => "weight_base_change",
            Stage::Hadamard => "hadamard",
            Stage::OutputBaseChange => "output_base_change",
            Stage::Output => "output",
        }
    }
}

/// Called once per stage with every tile of that stage, in a fixed order.
pub trait StageHook<T> {
    fn apply(&mut self, stage: Stage, tiles: &mut [Matrix<T>]);
}

/// Leaves every stage untouched.
pub struct NoHook;

impl<T> StageHook<T> for NoHook {
    fn apply(&mut self, _: Stage, _: &mut [Matrix<T>]) {}
}

struct Step<T> {
    stage: Stage,
    left: Matrix<T>,
    right: Matrix<T>,
}

impl<T: Scalar> Step<T> {
    fn new(stage: Stage, left: &Matrix<T>) -> Self {
        Self {
            stage,
            right: left.transpose(),
            left: left.clone(),
        }
    }

    fn run(&self, x: &Matrix<T>) -> Matrix<T> {
        x.sandwich(&self.left, &self.right)
    }
}

/// The sandwich products of one plan/mode pair, in execution order.
struct Steps<T> {
    weights: Vec<Step<T>>,
    input: Vec<Step<T>>,
    output: Vec<Step<T>>,
}

impl<T: Scalar> Steps<T> {
    fn new(t: &Transforms<T>, mode: BaseMode) -> Result<Self> {
        match mode {
            BaseMode::Canonical => Ok(Self {
                weights: vec![Step::new(Stage::WeightTransform, &t.g)],
                input: vec![Step::new(Stage::InputTransform, &t.b.transpose())],
                output: vec![Step::new(Stage::Output, &t.a.transpose())],
            }),
            BaseMode::Legendre => {
                let bt = t.base.as_ref().ok_or_else(|| {
                    Error::Config("legendre mode needs a plan with a base change".into())
                })?;
                let p_inv_t = bt.p_inv.transpose();
                Ok(Self {
                    weights: vec![
                        Step::new(Stage::WeightTransform, &bt.g_p),
                        Step::new(Stage::WeightBaseChange, &bt.p_inv),
                    ],
                    input: vec![
                        Step::new(Stage::InputBaseChange, &p_inv_t),
                        Step::new(Stage::InputTransform, &bt.b_p.transpose()),
                    ],
                    output: vec![
                        Step::new(Stage::OutputBaseChange, &p_inv_t),
                        Step::new(Stage::Output, &bt.a_p.transpose()),
                    ],
                })
            }
        }
    }
}

fn check_square(x: &Matrix<impl Scalar>, n: usize, what: &str) -> Result<()> {
    if x.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "{what} tile is {}x{}, expected {n}x{n}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}

fn run_steps<T: Scalar>(steps: &[Step<T>], x: &Matrix<T>) -> Matrix<T> {
    steps.iter().fold(x.clone(), |acc, s| s.run(&acc))
}

/// `k×k` weights to the `m×m` Winograd domain.
pub fn transform_weights<T: Scalar>(
    w: &Matrix<T>,
    t: &Transforms<T>,
    mode: BaseMode,
) -> Result<Matrix<T>> {
    check_square(w, t.k(), "weight")?;
    Ok(run_steps(&Steps::new(t, mode)?.weights, w))
}

/// `m×m` input tile to the Winograd domain.
pub fn transform_input<T: Scalar>(
    x: &Matrix<T>,
    t: &Transforms<T>,
    mode: BaseMode,
) -> Result<Matrix<T>> {
    check_square(x, t.m(), "input")?;
    Ok(run_steps(&Steps::new(t, mode)?.input, x))
}

/// `m×m` Hadamard result back to an `o×o` output tile.
pub fn transform_output<T: Scalar>(
    m: &Matrix<T>,
    t: &Transforms<T>,
    mode: BaseMode,
) -> Result<Matrix<T>> {
    check_square(m, t.m(), "Hadamard")?;
    Ok(run_steps(&Steps::new(t, mode)?.output, m))
}

/// Single-tile 2-D Winograd correlation of an `m×m` input with a `k×k` kernel.
pub fn winograd_tile_2d<T: Scalar>(
    w: &Matrix<T>,
    x: &Matrix<T>,
    t: &Transforms<T>,
    mode: BaseMode,
) -> Result<Matrix<T>> {
    let u = transform_weights(w, t, mode)?;
    let v = transform_input(x, t, mode)?;
    transform_output(&u.hadamard(&v), t, mode)
}

/// 1-D Winograd correlation of `d` (length `m`) with `g` (length `k`).
pub fn winograd_1d<T: Scalar>(
    g: &[T],
    d: &[T],
    t: &Transforms<T>,
    mode: BaseMode,
) -> Result<Vec<T>> {
    if g.len() != t.k() || d.len() != t.m() {
        return Err(Error::Dimension(format!(
            "1-D F({}, {}) needs kernel {} and input {}, got {} and {}",
            t.o(),
            t.k(),
            t.k(),
            t.m(),
            g.len(),
            d.len()
        )));
    }
    let steps = Steps::new(t, mode)?;
    let apply = |steps: &[Step<T>], v: Vec<T>| steps.iter().fold(v, |acc, s| s.left.apply(&acc));
    let u = apply(&steps.weights, g.to_vec());
    let v = apply(&steps.input, d.to_vec());
    let prod: Vec<T> = u.into_iter().zip(v).map(|(a, b)| a * b).collect();
    Ok(apply(&steps.output, prod))
}

/// Tiled multi-channel Winograd convolution over any scalar, with a hook
/// invoked at every stage boundary.
///
/// The output `[c_out, H−k+1, W−k+1]` is cut into `o×o` tiles; the input is
/// zero-padded on the right/bottom so the tile grid covers it and the
/// result is cropped. Hadamard products are summed over `c_in` in ascending
/// order before the output transform.
pub fn conv2d_winograd_with<T: Scalar, H: StageHook<T>>(
    input: &Tensor<T>,
    weights: &Tensor<T>,
    t: &Transforms<T>,
    mode: BaseMode,
    hook: &mut H,
) -> Result<Tensor<T>> {
    let (c_in, h, w) = input.dims3()?;
    let (c_out, wc_in, kh, kw) = weights.dims4()?;
    check_conv_shapes(c_in, h, w, wc_in, kh, kw)?;
    let (o, k, m) = (t.o(), t.k(), t.m());
    if kh != k {
        return Err(Error::Dimension(format!(
            "kernel is {kh}x{kh}, plan is for k = {k}"
        )));
    }
    let steps = Steps::new(t, mode)?;
    let (oh, ow) = (h - k + 1, w - k + 1);
    let (th, tw) = (oh.div_ceil(o), ow.div_ceil(o));
    let tiles = th * tw;

    let mut x_planes: Vec<Matrix<T>> = (0..c_in).map(|c| input.plane(c)).collect();
    hook.apply(Stage::Input, &mut x_planes);
    let mut w_tiles: Vec<Matrix<T>> = (0..c_out * c_in).map(|i| weights.plane(i)).collect();
    hook.apply(Stage::Weights, &mut w_tiles);

    // Weight transforms, indexed [co * c_in + ci].
    let mut u = w_tiles;
    for step in &steps.weights {
        u = u.iter().map(|x| step.run(x)).collect();
        hook.apply(step.stage, &mut u);
    }

    // Input patches, indexed [ci * tiles + tile].
    let mut v: Vec<Matrix<T>> = Vec::with_capacity(c_in * tiles);
    for plane in &x_planes {
        for ti in 0..th {
            for tj in 0..tw {
                v.push(Matrix::from_fn(m, m, |r, c| {
                    let (y, x) = (ti * o + r, tj * o + c);
                    if y < h && x < w {
                        plane[(y, x)].clone()
                    } else {
                        T::zero()
                    }
                }));
            }
        }
    }
    for step in &steps.input {
        v = v.iter().map(|x| step.run(x)).collect();
        hook.apply(step.stage, &mut v);
    }

    // Channel-accumulated Hadamard products, indexed [co * tiles + tile].
    let mut acc: Vec<Matrix<T>> = Vec::with_capacity(c_out * tiles);
    for co in 0..c_out {
        for tile in 0..tiles {
            let mut sum = Matrix::zeros(m, m);
            for ci in 0..c_in {
                sum.add_assign(&u[co * c_in + ci].hadamard(&v[ci * tiles + tile]));
            }
            acc.push(sum);
        }
    }
    hook.apply(Stage::Hadamard, &mut acc);

    let mut y = acc;
    for step in &steps.output {
        y = y.iter().map(|x| step.run(x)).collect();
        hook.apply(step.stage, &mut y);
    }

    let mut out = Tensor::zeros(vec![c_out, oh, ow]);
    let data = out.data_mut();
    for co in 0..c_out {
        for ti in 0..th {
            for tj in 0..tw {
                let tile = &y[co * tiles + ti * tw + tj];
                for r in 0..o {
                    for c in 0..o {
                        let (i, j) = (ti * o + r, tj * o + c);
                        if i < oh && j < ow {
                            data[(co * oh + i) * ow + j] = tile[(r, c)].clone();
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Double-precision Winograd convolution.
pub fn conv2d_winograd(
    input: &Tensor<f64>,
    weights: &Tensor<f64>,
    plan: &FloatPlan,
    mode: BaseMode,
) -> Result<Tensor<f64>> {
    conv2d_winograd_with(input, weights, plan.transforms(), mode, &mut NoHook)
}

/// Exact rational Winograd convolution.
pub fn conv2d_winograd_exact(
    input: &Tensor<Rational>,
    weights: &Tensor<Rational>,
    plan: &WinogradPlan,
    mode: BaseMode,
) -> Result<Tensor<Rational>> {
    conv2d_winograd_with(input, weights, plan.transforms(), mode, &mut NoHook)
}
