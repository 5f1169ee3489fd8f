//! Exact Toom-Cook construction of the Winograd transforms `G`, `B`, `A`.
//!
//! For `F(o, k)` with `m = o + k − 1` interpolation points the 1-D algorithm
//! is `y = Aᵀ[(G·g) ⊙ (Bᵀ·d)]`, a valid correlation of `d` (length `m`) with
//! `g` (length `k`). `G` and `A` are evaluation (Vandermonde) matrices,
//! `Bᵀ` carries the Lagrange numerator polynomials and the Lagrange
//! denominators `1/∏_{j≠i}(pᵢ − pⱼ)` are folded into the rows of `G`.
//!
//! The point at infinity picks out the leading coefficient: its `G` and `A`
//! rows are unit vectors on the last column and its `Bᵀ` row is the full
//! modulus polynomial `∏ⱼ(x − pⱼ)`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::legendre::{build_base_change, BaseChange};
use crate::matrix::{Matrix, Scalar};
use crate::rational::{int, parse_rational, pow, rat, to_f64, Rational};

/// Ascending coefficients of `∏(x − rᵢ)`.
pub fn poly_from_roots(roots: &[Rational]) -> Vec<Rational> {
    let mut coeffs = vec![Rational::one()];
    for r in roots {
        let mut next = vec![Rational::zero(); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= r * c;
        }
        coeffs = next;
    }
    coeffs
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterpolationPoints {
    finite: Vec<Rational>,
    use_infinity: bool,
}

impl InterpolationPoints {
    /// Unvalidated; [`build_plan`] rejects duplicates and count mismatches.
    pub fn new(finite: Vec<Rational>, use_infinity: bool) -> Self {
        Self {
            finite,
            use_infinity,
        }
    }

    /// `m − 1` finite points from `0, 1, −1, 2, −2, 1/2, −1/2, 3, −3, 1/3, …`
    /// followed by the point at infinity.
    pub fn default_for(m: usize) -> Self {
        let want = m.saturating_sub(1);
        let mut finite = vec![int(0)];
        let mut t = 1i64;
        while finite.len() < want {
            finite.push(int(t));
            finite.push(int(-t));
            if t > 1 {
                finite.push(rat(1, t));
                finite.push(rat(-1, t));
            }
            t += 1;
        }
        finite.truncate(want);
        Self::new(finite, true)
    }

    pub fn finite(&self) -> &[Rational] {
        &self.finite
    }

    pub fn use_infinity(&self) -> bool {
        self.use_infinity
    }

    pub fn len(&self) -> usize {
        self.finite.len() + usize::from(self.use_infinity)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.len() != m {
            return Err(Error::Dimension(format!(
                "{} interpolation points given, F(o, k) needs m = o + k - 1 = {m}",
                self.len()
            )));
        }
        for (i, a) in self.finite.iter().enumerate() {
            if self.finite[..i].contains(a) {
                return Err(Error::InvalidPoints(format!("duplicate point {a}")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for InterpolationPoints {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.finite.iter().map(ToString::to_string).collect();
        if self.use_infinity {
            parts.push("inf".into());
        }
        f.write_str(&parts.join(","))
    }
}

impl FromStr for InterpolationPoints {
    type Err = Error;

    /// Comma-separated rationals; `inf` (or `∞`) marks the point at infinity.
    fn from_str(s: &str) -> Result<Self> {
        let mut finite = Vec::new();
        let mut use_infinity = false;
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match tok {
                "inf" | "Inf" | "infinity" | "∞" => {
                    if use_infinity {
                        return Err(Error::InvalidPoints("infinity given twice".into()));
                    }
                    use_infinity = true;
                }
                _ => finite.push(parse_rational(tok).map_err(|e| {
                    Error::InvalidPoints(format!("bad point {tok:?}: {e}"))
                })?),
            }
        }
        Ok(Self::new(finite, use_infinity))
    }
}

/// Matrices of a plan expressed over one scalar type.
#[derive(Clone, Debug, PartialEq)]
pub struct Transforms<T> {
    /// `m × k` weight transform.
    pub g: Matrix<T>,
    /// `m × m` input transform (applied as `Bᵀ·X·B`).
    pub b: Matrix<T>,
    /// `m × o` output transform (applied as `Aᵀ·M·A`).
    pub a: Matrix<T>,
    pub base: Option<BaseTransforms<T>>,
}

/// Base-change factors and the base-changed transforms `G_P = P·G`,
/// `B_P = P·B`, `A_P = P·A`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseTransforms<T> {
    pub p: Matrix<T>,
    pub p_inv: Matrix<T>,
    pub g_p: Matrix<T>,
    pub b_p: Matrix<T>,
    pub a_p: Matrix<T>,
}

impl<T: Scalar> Transforms<T> {
    pub fn m(&self) -> usize {
        self.g.rows()
    }

    pub fn k(&self) -> usize {
        self.g.cols()
    }

    pub fn o(&self) -> usize {
        self.a.cols()
    }

    fn map<U: Scalar>(&self, f: impl Fn(&T) -> U + Copy) -> Transforms<U> {
        Transforms {
            g: self.g.map(f),
            b: self.b.map(f),
            a: self.a.map(f),
            base: self.base.as_ref().map(|bt| BaseTransforms {
                p: bt.p.map(f),
                p_inv: bt.p_inv.map(f),
                g_p: bt.g_p.map(f),
                b_p: bt.b_p.map(f),
                a_p: bt.a_p.map(f),
            }),
        }
    }
}

/// Exact transforms for one `F(o, k)` configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct WinogradPlan {
    o: usize,
    k: usize,
    points: InterpolationPoints,
    base_change: Option<BaseChange>,
    transforms: Transforms<Rational>,
}

impl WinogradPlan {
    pub fn o(&self) -> usize {
        self.o
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.o + self.k - 1
    }

    pub fn points(&self) -> &InterpolationPoints {
        &self.points
    }

    pub fn base_change(&self) -> Option<&BaseChange> {
        self.base_change.as_ref()
    }

    pub fn transforms(&self) -> &Transforms<Rational> {
        &self.transforms
    }

    pub fn g(&self) -> &Matrix<Rational> {
        &self.transforms.g
    }

    pub fn b(&self) -> &Matrix<Rational> {
        &self.transforms.b
    }

    pub fn a(&self) -> &Matrix<Rational> {
        &self.transforms.a
    }

    /// Attaches an arbitrary base change (e.g. [`BaseChange::identity`]) and
    /// derives `G_P`, `B_P`, `A_P` from it.
    pub fn with_base_change(mut self, base: BaseChange) -> Result<Self> {
        if base.dim() != self.m() {
            return Err(Error::Dimension(format!(
                "base change of dimension {} for a plan with m = {}",
                base.dim(),
                self.m()
            )));
        }
        let t = &self.transforms;
        self.transforms.base = Some(BaseTransforms {
            g_p: base.p().matmul(&t.g),
            b_p: base.p().matmul(&t.b),
            a_p: base.p().matmul(&t.a),
            p: base.p().clone(),
            p_inv: base.p_inv().clone(),
        });
        self.base_change = Some(base);
        Ok(self)
    }

    pub fn without_base_change(mut self) -> Self {
        self.base_change = None;
        self.transforms.base = None;
        self
    }
}

/// Builds the exact `G` (m×k), `B` (m×m), `A` (m×o) for `F(o, k)`, and the
/// monic-Legendre base change when `use_legendre` is set.
pub fn build_plan(
    o: usize,
    k: usize,
    points: InterpolationPoints,
    use_legendre: bool,
) -> Result<WinogradPlan> {
    if o == 0 || k == 0 {
        return Err(Error::Dimension(format!("F({o}, {k}) needs o, k >= 1")));
    }
    let m = o + k - 1;
    points.validate(m)?;

    let finite = points.finite();
    let mut g = Matrix::zeros(m, k);
    let mut b_t = Matrix::zeros(m, m);
    let mut a = Matrix::zeros(m, o);

    for (i, p) in finite.iter().enumerate() {
        let others: Vec<Rational> = finite
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, q)| q.clone())
            .collect();
        let denom = others
            .iter()
            .fold(Rational::one(), |acc, q| acc * (p - q));
        for c in 0..k {
            g[(i, c)] = pow(p, c) / &denom;
        }
        for c in 0..o {
            a[(i, c)] = pow(p, c);
        }
        for (c, coeff) in poly_from_roots(&others).into_iter().enumerate() {
            b_t[(i, c)] = coeff;
        }
    }
    if points.use_infinity() {
        let row = m - 1;
        g[(row, k - 1)] = Rational::one();
        a[(row, o - 1)] = Rational::one();
        for (c, coeff) in poly_from_roots(finite).into_iter().enumerate() {
            b_t[(row, c)] = coeff;
        }
    }

    let plan = WinogradPlan {
        o,
        k,
        points,
        base_change: None,
        transforms: Transforms {
            g,
            b: b_t.transpose(),
            a,
            base: None,
        },
    };
    if use_legendre {
        plan.with_base_change(build_base_change(m)?)
    } else {
        Ok(plan)
    }
}

/// Double-precision lowering of a plan; the exact plan is kept alongside.
#[derive(Clone, Debug)]
pub struct FloatPlan {
    exact: WinogradPlan,
    transforms: Transforms<f64>,
}

impl FloatPlan {
    pub fn exact(&self) -> &WinogradPlan {
        &self.exact
    }

    pub fn transforms(&self) -> &Transforms<f64> {
        &self.transforms
    }

    pub fn o(&self) -> usize {
        self.exact.o()
    }

    pub fn k(&self) -> usize {
        self.exact.k()
    }

    pub fn m(&self) -> usize {
        self.exact.m()
    }
}

/// Rounds every entry to the nearest double.
pub fn plan_to_float(plan: &WinogradPlan) -> FloatPlan {
    FloatPlan {
        exact: plan.clone(),
        transforms: plan.transforms.map(to_f64),
    }
}
