//! Dense row-major tensor of f64 scalars.
//!
//! This is the universal value type of the crate. Layout conventions used
//! everywhere else are fixed here once:
//!
//! - row-major (last axis fastest);
//! - images are `[rows x cols x channels]`, i.e. height first;
//! - matrices are `[rows x cols]`, a dense layer weight is `[out x in]`;
//! - tensors are immutable values: operations return new tensors and never
//!   mutate their inputs.

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Elementwise binary operation selector for [`Tensor::ewise`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EwiseOp {
    Add,
    Sub,
    Mul,
}

/// Dense n-dimensional array of f64 with shape metadata.
///
/// Invariants: rank >= 1, every extent >= 1, `data.len() == product(shape)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// Build a tensor from a shape and flat row-major data.
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        validate_shape(shape)?;
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::Dimension(format!(
                "shape {shape:?} requires {expected} elements, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    /// All-zero tensor. Panics on an invalid shape (programmer error).
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor::filled(shape, 0.0)
    }

    /// Constant tensor. Panics on an invalid shape (programmer error).
    pub fn filled(shape: &[usize], value: f64) -> Self {
        validate_shape(shape).expect("invalid tensor shape");
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    /// Rank-1 tensor from a vector. Panics if empty.
    pub fn from_vec(data: Vec<f64>) -> Self {
        assert!(!data.is_empty(), "rank-1 tensor must be nonempty");
        Tensor {
            shape: vec![data.len()],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    /// Total number of scalars.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: extents >= 1
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Flat offset of `[i, j]` in a rank-2 tensor.
    #[inline]
    pub fn idx2(&self, i: usize, j: usize) -> usize {
        debug_assert_eq!(self.rank(), 2);
        debug_assert!(i < self.shape[0] && j < self.shape[1]);
        i * self.shape[1] + j
    }

    /// Flat offset of `[i, j, k]` in a rank-3 tensor.
    #[inline]
    pub fn idx3(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert_eq!(self.rank(), 3);
        debug_assert!(i < self.shape[0] && j < self.shape[1] && k < self.shape[2]);
        (i * self.shape[1] + j) * self.shape[2] + k
    }

    /// Flat offset of `[i, j, k, l]` in a rank-4 tensor.
    #[inline]
    pub fn idx4(&self, i: usize, j: usize, k: usize, l: usize) -> usize {
        debug_assert_eq!(self.rank(), 4);
        debug_assert!(
            i < self.shape[0] && j < self.shape[1] && k < self.shape[2] && l < self.shape[3]
        );
        ((i * self.shape[1] + j) * self.shape[2] + k) * self.shape[3] + l
    }

    /// Matrix product of two rank-2 tensors `[m x k] . [k x n] -> [m x n]`.
    pub fn matmul(&self, other: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || other.rank() != 2 {
            return Err(Error::Dimension(format!(
                "matmul needs rank-2 operands, got {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let (m, k) = (self.shape[0], self.shape[1]);
        let (k2, n) = (other.shape[0], other.shape[1]);
        if k != k2 {
            return Err(Error::Dimension(format!(
                "matmul inner extents differ: {:?} x {:?}",
                self.shape, other.shape
            )));
        }
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for p in 0..k {
                let a = self.data[i * k + p];
                let row = &other.data[p * n..(p + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Tensor::new(&[m, n], out)
    }

    /// Matrix-vector product `[m x n] . [n] -> [m]`.
    pub fn matvec(&self, x: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || x.rank() != 1 || self.shape[1] != x.shape[0] {
            return Err(Error::Dimension(format!(
                "matvec shapes incompatible: {:?} . {:?}",
                self.shape, x.shape
            )));
        }
        let (m, n) = (self.shape[0], self.shape[1]);
        let out: Vec<f64> = self
            .data
            .chunks_exact(n)
            .map(|row| row.iter().zip(&x.data).map(|(a, b)| a * b).sum())
            .collect();
        Tensor::new(&[m], out)
    }

    /// Transposed matrix-vector product `[m x n]^T . [m] -> [n]`.
    pub fn matvec_t(&self, g: &Tensor) -> Result<Tensor> {
        if self.rank() != 2 || g.rank() != 1 || self.shape[0] != g.shape[0] {
            return Err(Error::Dimension(format!(
                "matvec_t shapes incompatible: {:?}^T . {:?}",
                self.shape, g.shape
            )));
        }
        let (m, n) = (self.shape[0], self.shape[1]);
        let mut out = vec![0.0; n];
        for i in 0..m {
            let gi = g.data[i];
            let row = &self.data[i * n..(i + 1) * n];
            for (o, &w) in out.iter_mut().zip(row) {
                *o += w * gi;
            }
        }
        Tensor::new(&[n], out)
    }

    /// Elementwise combine of two same-shape tensors.
    pub fn ewise(&self, other: &Tensor, op: EwiseOp) -> Result<Tensor> {
        if self.shape != other.shape {
            return Err(Error::Dimension(format!(
                "elementwise op on mismatched shapes {:?} and {:?}",
                self.shape, other.shape
            )));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&a, &b)| match op {
                EwiseOp::Add => a + b,
                EwiseOp::Sub => a - b,
                EwiseOp::Mul => a * b,
            })
            .collect();
        Ok(Tensor {
            shape: self.shape.clone(),
            data,
        })
    }

    pub fn add(&self, other: &Tensor) -> Result<Tensor> {
        self.ewise(other, EwiseOp::Add)
    }

    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        self.ewise(other, EwiseOp::Sub)
    }

    pub fn mul(&self, other: &Tensor) -> Result<Tensor> {
        self.ewise(other, EwiseOp::Mul)
    }

    /// Same flat data under a new shape with equal element count.
    pub fn reshape(&self, new_shape: &[usize]) -> Result<Tensor> {
        validate_shape(new_shape)?;
        let n: usize = new_shape.iter().product();
        if n != self.data.len() {
            return Err(Error::Dimension(format!(
                "cannot reshape {:?} ({} elements) into {new_shape:?} ({n} elements)",
                self.shape,
                self.data.len()
            )));
        }
        Ok(Tensor {
            shape: new_shape.to_vec(),
            data: self.data.clone(),
        })
    }

    /// Elementwise map.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: f64) -> Tensor {
        self.map(|x| x * s)
    }

    /// Index of the largest element of a rank-1 tensor; ties break toward the
    /// lower index.
    pub fn argmax(&self) -> Result<usize> {
        if self.rank() != 1 {
            return Err(Error::Dimension(format!(
                "argmax needs a rank-1 tensor, got {:?}",
                self.shape
            )));
        }
        let mut best = 0;
        for (i, &v) in self.data.iter().enumerate() {
            if v > self.data[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Contiguous rank-1 row `i` of a rank-2 tensor.
    pub fn row(&self, i: usize) -> Result<Tensor> {
        if self.rank() != 2 {
            return Err(Error::Dimension(format!(
                "row() needs a rank-2 tensor, got {:?}",
                self.shape
            )));
        }
        let n = self.shape[1];
        Tensor::new(&[n], self.data[i * n..(i + 1) * n].to_vec())
    }

    /// First-axis slice of any tensor: element `i` of axis 0, one rank lower
    /// (or rank-1 when the input is rank-1... which would be a scalar, so the
    /// input must be rank >= 2).
    pub fn index_axis0(&self, i: usize) -> Result<Tensor> {
        if self.rank() < 2 {
            return Err(Error::Dimension(format!(
                "index_axis0 needs rank >= 2, got {:?}",
                self.shape
            )));
        }
        if i >= self.shape[0] {
            return Err(Error::Dimension(format!(
                "index {i} out of bounds for axis of extent {}",
                self.shape[0]
            )));
        }
        let inner: usize = self.shape[1..].iter().product();
        Tensor::new(
            &self.shape[1..],
            self.data[i * inner..(i + 1) * inner].to_vec(),
        )
    }

    /// Stack equal-shape tensors along a new leading axis.
    pub fn stack(items: &[Tensor]) -> Result<Tensor> {
        let first = items
            .first()
            .ok_or_else(|| Error::Dimension("cannot stack zero tensors".into()))?;
        let mut data = Vec::with_capacity(items.len() * first.len());
        for t in items {
            if t.shape != first.shape {
                return Err(Error::Dimension(format!(
                    "stack of mismatched shapes {:?} and {:?}",
                    first.shape, t.shape
                )));
            }
            data.extend_from_slice(&t.data);
        }
        let mut shape = vec![items.len()];
        shape.extend_from_slice(&first.shape);
        Tensor::new(&shape, data)
    }

    /// Concatenate rank-1 tensors.
    pub fn concat1(parts: &[&Tensor]) -> Result<Tensor> {
        let mut data = Vec::new();
        for p in parts {
            if p.rank() != 1 {
                return Err(Error::Dimension(format!(
                    "concat1 needs rank-1 parts, got {:?}",
                    p.shape
                )));
            }
            data.extend_from_slice(&p.data);
        }
        if data.is_empty() {
            return Err(Error::Dimension("concat1 of zero elements".into()));
        }
        Ok(Tensor::from_vec(data))
    }

    /// Sum of all elements.
    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

fn validate_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::Dimension("tensor rank must be >= 1".into()));
    }
    if shape.contains(&0) {
        return Err(Error::Dimension(format!(
            "tensor extents must be >= 1, got {shape:?}"
        )));
    }
    Ok(())
}

/// Glorot/Xavier uniform initialization: samples from
/// `±sqrt(6 / (fan_in + fan_out))`, deterministic given the generator state.
pub fn glorot_init(
    rng: &mut Rng,
    shape: &[usize],
    fan_in: usize,
    fan_out: usize,
) -> Result<Tensor> {
    if fan_in == 0 || fan_out == 0 {
        return Err(Error::Config(format!(
            "glorot fans must be positive, got fan_in={fan_in}, fan_out={fan_out}"
        )));
    }
    validate_shape(shape)?;
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.uniform(-limit, limit)).collect();
    Tensor::new(shape, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_identity() {
        let eye = Tensor::new(&[2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let a = Tensor::new(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(eye.matmul(&a).unwrap(), a);
    }

    #[test]
    fn matmul_zero_annihilator() {
        let a = Tensor::new(&[1, 2], vec![1.0, 2.0]).unwrap();
        let z = Tensor::new(&[2, 1], vec![0.0, 0.0]).unwrap();
        let c = a.matmul(&z).unwrap();
        assert_eq!(c.shape(), &[1, 1]);
        assert_eq!(c.data(), &[0.0]);
    }

    #[test]
    fn matmul_shape_error_names_both_shapes() {
        let a = Tensor::zeros(&[2, 3]);
        let b = Tensor::zeros(&[4, 2]);
        let err = a.matmul(&b).unwrap_err().to_string();
        assert!(err.contains("[2, 3]") && err.contains("[4, 2]"), "{err}");
    }

    #[test]
    fn ewise_hand_cases() {
        let a = Tensor::from_vec(vec![2.0, 3.0]);
        let b = Tensor::from_vec(vec![4.0, 5.0]);
        assert_eq!(a.mul(&b).unwrap().data(), &[8.0, 15.0]);
        assert_eq!(b.sub(&a).unwrap().data(), &[2.0, 2.0]);
        let ones = Tensor::filled(&[2], 1.0);
        let zeros = Tensor::zeros(&[2]);
        assert_eq!(a.mul(&ones).unwrap(), a);
        assert_eq!(a.add(&zeros).unwrap(), a);
    }

    #[test]
    fn ewise_shape_mismatch() {
        let a = Tensor::zeros(&[2]);
        let b = Tensor::zeros(&[3]);
        assert!(matches!(a.add(&b), Err(Error::Dimension(_))));
    }

    #[test]
    fn reshape_preserves_row_major_order() {
        let a = Tensor::new(&[2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let flat = a.reshape(&[6]).unwrap();
        assert_eq!(flat.data(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(flat.reshape(&[2, 3]).unwrap(), a);
        // same-shape reshape is identity
        assert_eq!(a.reshape(&[2, 3]).unwrap(), a);
    }

    #[test]
    fn reshape_count_mismatch() {
        let a = Tensor::zeros(&[2, 3]);
        assert!(matches!(a.reshape(&[7]), Err(Error::Dimension(_))));
    }

    #[test]
    fn argmax_tie_breaks_low() {
        let a = Tensor::from_vec(vec![0.1, 0.7, 0.1, 0.1]);
        assert_eq!(a.argmax().unwrap(), 1);
        let tie = Tensor::from_vec(vec![0.25, 0.25, 0.25, 0.25]);
        assert_eq!(tie.argmax().unwrap(), 0);
    }

    #[test]
    fn argmax_rejects_rank2() {
        let a = Tensor::zeros(&[2, 2]);
        assert!(matches!(a.argmax(), Err(Error::Dimension(_))));
    }

    #[test]
    fn glorot_support_and_determinism() {
        let limit = (6.0f64 / 30.0).sqrt();
        let mut rng = Rng::new(11);
        let t = glorot_init(&mut rng, &[10, 10], 10, 20).unwrap();
        assert!(t.data().iter().all(|&v| v > -limit && v < limit));
        let mut rng2 = Rng::new(11);
        let t2 = glorot_init(&mut rng2, &[10, 10], 10, 20).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn glorot_rejects_zero_fan() {
        let mut rng = Rng::new(1);
        assert!(glorot_init(&mut rng, &[2], 0, 3).is_err());
    }

    #[test]
    fn stack_and_slice_round_trip() {
        let a = Tensor::new(&[2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = Tensor::new(&[2, 2], vec![5.0, 6.0, 7.0, 8.0]).unwrap();
        let s = Tensor::stack(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.shape(), &[2, 2, 2]);
        assert_eq!(s.index_axis0(0).unwrap(), a);
        assert_eq!(s.index_axis0(1).unwrap(), b);
    }
}
