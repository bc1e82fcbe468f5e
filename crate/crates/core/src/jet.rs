//! Truncated Taylor jets used for exact derivative propagation.
//!
//! [`Jet2`] carries a value, its gradient and its (symmetric) Hessian with
//! respect to a fixed set of active variables. [`Jet1`] drops the Hessian.
//! Taking a partial derivative of a `Jet2` yields a `Jet1`, and a partial of a
//! `Jet1` yields a plain `f64`; the [`Truncate`] trait captures that ladder so
//! tensor formulas that consume one derivative can be written once.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;
use thiserror::Error;

/// Largest accepted condition number of the value part of a matrix before
/// inversion is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Arithmetic shared by `f64`, [`Jet1`] and [`Jet2`].
pub trait Scalar:
    Clone
    + fmt::Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn value(&self) -> f64;

    /// A constant carrying the same number of active variables as `self`.
    fn lift_const(&self, c: f64) -> Self;

    fn scale(&self, c: f64) -> Self;

    fn is_finite(&self) -> bool;
}

/// Scalars that can be seeded as variables and pushed through elementary
/// functions.
pub trait Real: Scalar {
    fn constant(c: f64, nvars: usize) -> Self;

    fn variable(v: f64, index: usize, nvars: usize) -> Self;

    /// Applies a univariate function given `f(a)`, `f'(a)` and `f''(a)` at
    /// `a = self.value()`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self;
}

/// One step down the derivative ladder.
pub trait Truncate: Scalar {
    type Lower: Scalar;

    /// Drops the highest derivative order.
    fn lower(&self) -> Self::Lower;

    /// Partial derivative with respect to active variable `i`.
    fn partial(&self, i: usize) -> Self::Lower;

    fn nvars(&self) -> usize;
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn lift_const(&self, c: f64) -> Self {
        c
    }

    fn scale(&self, c: f64) -> Self {
        self * c
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Real for f64 {
    fn constant(c: f64, _nvars: usize) -> Self {
        c
    }

    fn variable(v: f64, _index: usize, _nvars: usize) -> Self {
        v
    }

    fn chain(&self, f0: f64, _f1: f64, _f2: f64) -> Self {
        f0
    }
}

/// First-order jet: value and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet1 {
    pub value: f64,
    pub grad: Vec<f64>,
}

impl Jet1 {
    pub fn new(value: f64, grad: Vec<f64>) -> Self {
        Self { value, grad }
    }

    /// Re-expresses the jet in a larger variable set, placing the current
    /// variables at `offset..offset + nvars`.
    pub fn embed(&self, offset: usize, total: usize) -> Jet1 {
        let mut grad = vec![0.0; total];
        grad[offset..offset + self.grad.len()].copy_from_slice(&self.grad);
        Jet1 {
            value: self.value,
            grad,
        }
    }

    /// `self += a·b` without allocating.
    pub fn add_product(&mut self, a: &Jet1, b: &Jet1) {
        debug_assert_eq!(a.grad.len(), self.grad.len());
        debug_assert_eq!(b.grad.len(), self.grad.len());
        self.value += a.value * b.value;
        for ((g, da), db) in self.grad.iter_mut().zip(&a.grad).zip(&b.grad) {
            *g += a.value * db + b.value * da;
        }
    }

    /// Directional derivative `Σ v_i ∂_i`.
    pub fn directional(&self, v: &[f64]) -> f64 {
        self.grad.iter().zip(v).map(|(g, d)| g * d).sum()
    }
}

impl Scalar for Jet1 {
    fn value(&self) -> f64 {
        self.value
    }

    fn lift_const(&self, c: f64) -> Self {
        Jet1::constant(c, self.grad.len())
    }

    fn scale(&self, c: f64) -> Self {
        Jet1 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.grad.iter().all(|g| g.is_finite())
    }
}

impl Real for Jet1 {
    fn constant(c: f64, nvars: usize) -> Self {
        Jet1 {
            value: c,
            grad: vec![0.0; nvars],
        }
    }

    fn variable(v: f64, index: usize, nvars: usize) -> Self {
        let mut grad = vec![0.0; nvars];
        grad[index] = 1.0;
        Jet1 { value: v, grad }
    }

    fn chain(&self, f0: f64, f1: f64, _f2: f64) -> Self {
        Jet1 {
            value: f0,
            grad: self.grad.iter().map(|g| f1 * g).collect(),
        }
    }
}

impl Truncate for Jet1 {
    type Lower = f64;

    fn lower(&self) -> f64 {
        self.value
    }

    fn partial(&self, i: usize) -> f64 {
        self.grad[i]
    }

    fn nvars(&self) -> usize {
        self.grad.len()
    }
}

impl Add for Jet1 {
    type Output = Jet1;

    fn add(mut self, rhs: Jet1) -> Jet1 {
        debug_assert_eq!(self.grad.len(), rhs.grad.len());
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet1 {
    type Output = Jet1;

    fn sub(mut self, rhs: Jet1) -> Jet1 {
        debug_assert_eq!(self.grad.len(), rhs.grad.len());
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet1 {
    type Output = Jet1;

    fn mul(self, rhs: Jet1) -> Jet1 {
        debug_assert_eq!(self.grad.len(), rhs.grad.len());
        let grad = self
            .grad
            .iter()
            .zip(&rhs.grad)
            .map(|(a, b)| self.value * b + rhs.value * a)
            .collect();
        Jet1 {
            value: self.value * rhs.value,
            grad,
        }
    }
}

impl Div for Jet1 {
    type Output = Jet1;

    fn div(self, rhs: Jet1) -> Jet1 {
        let b = rhs.value;
        self * rhs.chain(1.0 / b, -1.0 / (b * b), 2.0 / (b * b * b))
    }
}

impl Neg for Jet1 {
    type Output = Jet1;

    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

/// Second-order jet: value, gradient and symmetric Hessian (row-major).
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet2 {
    pub fn n(&self) -> usize {
        self.grad.len()
    }

    pub fn hess_at(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.n() + j]
    }

    /// Builds the Hessian from its upper triangle so that `hess[i][j]` and
    /// `hess[j][i]` are bitwise identical.
    fn symmetric_hess(n: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Vec<f64> {
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let h = entry(i, j);
                hess[i * n + j] = h;
                hess[j * n + i] = h;
            }
        }
        hess
    }
}

impl Scalar for Jet2 {
    fn value(&self) -> f64 {
        self.value
    }

    fn lift_const(&self, c: f64) -> Self {
        Jet2::constant(c, self.n())
    }

    fn scale(&self, c: f64) -> Self {
        Jet2 {
            value: self.value * c,
            grad: self.grad.iter().map(|g| g * c).collect(),
            hess: self.hess.iter().map(|h| h * c).collect(),
        }
    }

    fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|g| g.is_finite())
            && self.hess.iter().all(|h| h.is_finite())
    }
}

impl Real for Jet2 {
    fn constant(c: f64, nvars: usize) -> Self {
        Jet2 {
            value: c,
            grad: vec![0.0; nvars],
            hess: vec![0.0; nvars * nvars],
        }
    }

    fn variable(v: f64, index: usize, nvars: usize) -> Self {
        let mut grad = vec![0.0; nvars];
        grad[index] = 1.0;
        Jet2 {
            value: v,
            grad,
            hess: vec![0.0; nvars * nvars],
        }
    }

    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Self {
        let n = self.n();
        let g = &self.grad;
        Jet2 {
            value: f0,
            grad: g.iter().map(|gi| f1 * gi).collect(),
            hess: Jet2::symmetric_hess(n, |i, j| f2 * g[i] * g[j] + f1 * self.hess[i * n + j]),
        }
    }
}

impl Truncate for Jet2 {
    type Lower = Jet1;

    fn lower(&self) -> Jet1 {
        Jet1 {
            value: self.value,
            grad: self.grad.clone(),
        }
    }

    fn partial(&self, i: usize) -> Jet1 {
        let n = self.n();
        Jet1 {
            value: self.grad[i],
            grad: self.hess[i * n..(i + 1) * n].to_vec(),
        }
    }

    fn nvars(&self) -> usize {
        self.n()
    }
}

impl Add for Jet2 {
    type Output = Jet2;

    fn add(mut self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.n(), rhs.n());
        self.value += rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a += b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet2 {
    type Output = Jet2;

    fn sub(mut self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.n(), rhs.n());
        self.value -= rhs.value;
        for (a, b) in self.grad.iter_mut().zip(&rhs.grad) {
            *a -= b;
        }
        for (a, b) in self.hess.iter_mut().zip(&rhs.hess) {
            *a -= b;
        }
        self
    }
}

impl Mul for Jet2 {
    type Output = Jet2;

    fn mul(self, rhs: Jet2) -> Jet2 {
        debug_assert_eq!(self.n(), rhs.n());
        let n = self.n();
        let (a, b) = (&self, &rhs);
        Jet2 {
            value: a.value * b.value,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(ga, gb)| a.value * gb + b.value * ga)
                .collect(),
            hess: Jet2::symmetric_hess(n, |i, j| {
                a.value * b.hess[i * n + j]
                    + b.value * a.hess[i * n + j]
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
            }),
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;

    fn div(self, rhs: Jet2) -> Jet2 {
        let b = rhs.value;
        self * rhs.chain(1.0 / b, -1.0 / (b * b), 2.0 / (b * b * b))
    }
}

impl Neg for Jet2 {
    type Output = Jet2;

    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("matrix is singular or ill-conditioned (condition estimate {condition:e})")]
pub struct SingularMatrix {
    pub condition: f64,
}

/// 2-norm condition number of a square row-major matrix of values.
pub fn condition_number(values: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, values);
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverts an `n × n` row-major matrix of jets by Gauss–Jordan elimination,
/// pivoting on the value parts. Derivative parts follow from the jet
/// arithmetic.
pub fn jet_matrix_inverse<T: Scalar>(m: &[T], n: usize) -> Result<Vec<T>, SingularMatrix> {
    assert_eq!(m.len(), n * n, "matrix must be n × n");
    let values: Vec<f64> = m.iter().map(Scalar::value).collect();
    let condition = condition_number(&values, n);
    if !(condition <= MAX_CONDITION) {
        return Err(SingularMatrix { condition });
    }

    let one = m[0].lift_const(1.0);
    let zero = m[0].lift_const(0.0);
    let mut a: Vec<T> = m.to_vec();
    let mut inv: Vec<T> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                one.clone()
            } else {
                zero.clone()
            }
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i * n + col]
                    .value()
                    .abs()
                    .total_cmp(&a[j * n + col].value().abs())
            })
            .expect("nonempty pivot range");
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let p = a[col * n + col].clone();
        for k in 0..n {
            a[col * n + k] = a[col * n + k].clone() / p.clone();
            inv[col * n + k] = inv[col * n + k].clone() / p.clone();
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row * n + col].clone();
            for k in 0..n {
                a[row * n + k] = a[row * n + k].clone() - factor.clone() * a[col * n + k].clone();
                inv[row * n + k] =
                    inv[row * n + k].clone() - factor.clone() * inv[col * n + k].clone();
            }
        }
    }
    Ok(inv)
}

/// Row-major product of two square matrices of scalars.
pub fn mat_mul<T: Scalar>(a: &[T], b: &[T], n: usize) -> Vec<T> {
    (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            (1..n).fold(a[i * n].clone() * b[j].clone(), |acc, r| {
                acc + a[i * n + r].clone() * b[r * n + j].clone()
            })
        })
        .collect()
}
