//! Dense pointwise tensor values.
//!
//! Components are stored row-major with all contravariant (upper) indices
//! first, then the covariant (lower) ones: a `(1, 2)` tensor `Γ^λ_{μν}` sits
//! at `[λ, μ, ν]`.

use crate::jet::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    dim: usize,
    upper: usize,
    lower: usize,
    data: Vec<T>,
}

impl<T> Tensor<T> {
    pub fn from_fn(
        dim: usize,
        upper: usize,
        lower: usize,
        mut f: impl FnMut(&[usize]) -> T,
    ) -> Self {
        let rank = upper + lower;
        let len = dim.pow(rank as u32);
        let mut idx = vec![0usize; rank];
        let mut data = Vec::with_capacity(len);
        for k in 0..len {
            let mut rem = k;
            for slot in (0..rank).rev() {
                idx[slot] = rem % dim;
                rem /= dim;
            }
            data.push(f(&idx));
        }
        Tensor {
            dim,
            upper,
            lower,
            data,
        }
    }

    pub fn from_vec(dim: usize, upper: usize, lower: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), dim.pow((upper + lower) as u32), "tensor shape");
        Tensor {
            dim,
            upper,
            lower,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(upper, lower)`.
    pub fn rank(&self) -> (usize, usize) {
        (self.upper, self.lower)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.upper + self.lower);
        idx.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> &T {
        &self.data[self.offset(idx)]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Tensor<U> {
        Tensor {
            dim: self.dim,
            upper: self.upper,
            lower: self.lower,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> Tensor<T> {
    pub fn values(&self) -> Tensor<f64> {
        self.map(Scalar::value)
    }
}

impl Tensor<f64> {
    pub fn zeros(dim: usize, upper: usize, lower: usize) -> Self {
        Tensor::from_vec(
            dim,
            upper,
            lower,
            vec![0.0; dim.pow((upper + lower) as u32)],
        )
    }

    pub fn sup_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Tensor<f64>) -> f64 {
        assert_eq!(self.rank(), other.rank());
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
