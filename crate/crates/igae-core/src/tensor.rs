//! Dense row-major tensors of `f64` plus the parameter storage precision.
//!
//! Compute always runs in 64-bit. When the configured precision is 32-bit,
//! parameters and optimizer moments are rounded through `f32` after every
//! write so that the in-memory state is exactly what the 32-bit checkpoint
//! container stores.

use alloc::vec;
use alloc::vec::Vec;

/// A dense tensor: explicit dimensions over a flat row-major `f64` buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        let n = dims.iter().product();
        Tensor {
            dims: dims.to_vec(),
            data: vec![0.0; n],
        }
    }

    pub fn from_vec(dims: &[usize], data: Vec<f64>) -> Self {
        assert_eq!(dims.iter().product::<usize>(), data.len());
        Tensor {
            dims: dims.to_vec(),
            data,
        }
    }

    pub fn scalar(value: f64) -> Self {
        Tensor {
            dims: Vec::new(),
            data: vec![value],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// Same shape, all zeros.
    pub fn zeros_like(&self) -> Self {
        Tensor::zeros(&self.dims)
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.data.iter()
    }
}

/// Parameter storage precision. `F32` keeps every stored value exactly
/// representable in the 32-bit checkpoint payload; `F64` keeps full
/// precision in memory (used by the gradient tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

impl Precision {
    pub fn quantize(self, x: f64) -> f64 {
        match self {
            Precision::F32 => x as f32 as f64,
            Precision::F64 => x,
        }
    }

    pub fn quantize_tensor(self, t: &mut Tensor) {
        if self == Precision::F32 {
            for x in t.data_mut() {
                *x = *x as f32 as f64;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_shape_and_len() {
        let t = Tensor::zeros(&[2, 3, 4]);
        assert_eq!(t.dims(), &[2, 3, 4]);
        assert_eq!(t.numel(), 24);
        assert!(t.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn scalar_has_rank_zero() {
        let t = Tensor::scalar(3.5);
        assert!(t.dims().is_empty());
        assert_eq!(t.numel(), 1);
        assert_eq!(t.data()[0], 3.5);
    }

    #[test]
    fn f32_quantization_is_idempotent() {
        let x = 0.1f64 + 0.2;
        let q = Precision::F32.quantize(x);
        assert_eq!(Precision::F32.quantize(q), q);
        assert_eq!(Precision::F64.quantize(x), x);
    }
}
