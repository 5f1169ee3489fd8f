//! Monic Legendre polynomials and the polynomial base-change matrices.
//!
//! `Pᵀ` has the ascending-power coefficients of the monic Legendre
//! polynomial `p_i` in row `i`, so it is unit lower-triangular. `P` is its
//! transpose and `P⁻¹` is obtained by exact forward substitution.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{rat, Rational};

/// Ascending coefficients of the monic Legendre polynomial of degree `n`.
///
/// Built from `p₀ = 1`, `p₁ = x`, `p_{j+1} = x·p_j − j²/(4j²−1)·p_{j−1}`.
pub fn monic_legendre(n: usize) -> Vec<Rational> {
    monic_legendre_family(n + 1).pop().expect("family is non-empty")
}

/// `[p₀, p₁, …, p_{count−1}]`.
pub fn monic_legendre_family(count: usize) -> Vec<Vec<Rational>> {
    let mut family: Vec<Vec<Rational>> = Vec::with_capacity(count.max(1));
    family.push(vec![Rational::one()]);
    if count > 1 {
        family.push(vec![Rational::zero(), Rational::one()]);
    }
    for j in 1..count.saturating_sub(1) {
        let j2 = (j * j) as i64;
        let c = rat(j2, 4 * j2 - 1);
        let mut next = vec![Rational::zero()];
        next.extend(family[j].iter().cloned());
        for (slot, prev) in next.iter_mut().zip(&family[j - 1]) {
            *slot -= &c * prev;
        }
        family.push(next);
    }
    family.truncate(count.max(1));
    family
}

/// Evaluates ascending coefficients at `x` by Horner's rule.
pub fn eval_poly(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs
        .iter()
        .rev()
        .fold(Rational::zero(), |acc, c| acc * x + c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseChange {
    m: usize,
    p: Matrix<Rational>,
    p_inv: Matrix<Rational>,
}

impl BaseChange {
    /// Base change whose `Pᵀ` rows are the given monic polynomials
    /// (`polys[i]` of degree exactly `i`).
    pub fn from_monic_polynomials(polys: &[Vec<Rational>]) -> Result<Self> {
        let m = polys.len();
        if m == 0 {
            return Err(Error::Dimension("base change needs m >= 1".into()));
        }
        let mut pt = Matrix::zeros(m, m);
        for (i, poly) in polys.iter().enumerate() {
            if poly.len() != i + 1 || !poly[i].is_one() {
                return Err(Error::Config(format!(
                    "polynomial {i} must be monic of degree {i}"
                )));
            }
            for (j, c) in poly.iter().enumerate() {
                pt[(i, j)] = c.clone();
            }
        }
        let pt_inv = invert_unit_lower(&pt);
        Ok(Self {
            m,
            p: pt.transpose(),
            p_inv: pt_inv.transpose(),
        })
    }

    /// `P = P⁻¹ = I`; degenerates every base-changed formula to the canonical one.
    pub fn identity(m: usize) -> Self {
        Self {
            m,
            p: Matrix::identity(m),
            p_inv: Matrix::identity(m),
        }
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> &Matrix<Rational> {
        &self.p
    }

    pub fn p_inv(&self) -> &Matrix<Rational> {
        &self.p_inv
    }

    pub fn p_t(&self) -> Matrix<Rational> {
        self.p.transpose()
    }

    pub fn p_inv_t(&self) -> Matrix<Rational> {
        self.p_inv.transpose()
    }
}

/// Monic-Legendre base change of dimension `m`.
pub fn build_base_change(m: usize) -> Result<BaseChange> {
    if m == 0 {
        return Err(Error::Dimension("base change needs m >= 1".into()));
    }
    BaseChange::from_monic_polynomials(&monic_legendre_family(m))
}

// Forward substitution on L·X = I with a unit diagonal.
fn invert_unit_lower(l: &Matrix<Rational>) -> Matrix<Rational> {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut v = if i == col {
                Rational::one()
            } else {
                Rational::zero()
            };
            for j in col..i {
                if !l[(i, j)].is_zero() {
                    v -= &l[(i, j)] * &inv[(j, col)];
                }
            }
            inv[(i, col)] = v;
        }
    }
    inv
}
