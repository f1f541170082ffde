//! Dense row-major matrices and named parameter collections.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Mat { rows, cols, data }
    }

    /// Uniform in `[-bound, bound]`.
    pub fn uniform<R: Rng + ?Sized>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        Mat { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }
}

/// `y[t] = W x[t] + b` for each of the `n` rows of `x` (`W` is `out × in`).
pub fn affine(x: &[f64], n: usize, w: &Mat, b: &Mat) -> Vec<f64> {
    let (out, inp) = (w.rows, w.cols);
    debug_assert_eq!(x.len(), n * inp);
    let mut y = Vec::with_capacity(n * out);
    for t in 0..n {
        let xt = &x[t * inp..(t + 1) * inp];
        for o in 0..out {
            y.push(dot(w.row(o), xt) + b.data[o]);
        }
    }
    y
}

/// Backward of [`affine`]: accumulates `dW += dyᵀ x`, `db += Σ dy` and, if
/// requested, adds `dy W` into `dx`.
pub fn affine_backward(
    x: &[f64],
    dy: &[f64],
    n: usize,
    w: &Mat,
    dw: &mut Mat,
    db: &mut Mat,
    dx: Option<&mut [f64]>,
) {
    let (out, inp) = (w.rows, w.cols);
    for t in 0..n {
        let xt = &x[t * inp..(t + 1) * inp];
        let dyt = &dy[t * out..(t + 1) * out];
        for o in 0..out {
            let g = dyt[o];
            if g == 0.0 {
                continue;
            }
            db.data[o] += g;
            axpy(g, xt, dw.row_mut(o));
        }
    }
    if let Some(dx) = dx {
        for t in 0..n {
            let dyt = &dy[t * out..(t + 1) * out];
            let dxt = &mut dx[t * inp..(t + 1) * inp];
            for o in 0..out {
                let g = dyt[o];
                if g != 0.0 {
                    axpy(g, w.row(o), dxt);
                }
            }
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += a x`
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Named tensors in a fixed order. Gradients and optimizer state are
/// parameter sets of identical layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSet {
    names: Vec<String>,
    tensors: Vec<Mat>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet {
            names: Vec::new(),
            tensors: Vec::new(),
        }
    }

    /// Adds a tensor and returns its handle.
    pub fn add(&mut self, name: impl Into<String>, tensor: Mat) -> usize {
        let name = name.into();
        assert!(!self.names.contains(&name), "duplicate parameter {name}");
        self.names.push(name);
        self.tensors.push(tensor);
        self.tensors.len() - 1
    }

    pub fn zeros_like(&self) -> Self {
        ParamSet {
            names: self.names.clone(),
            tensors: self
                .tensors
                .iter()
                .map(|t| Mat::zeros(t.rows, t.cols))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, i: usize) -> &Mat {
        &self.tensors[i]
    }

    pub fn get_mut(&mut self, i: usize) -> &mut Mat {
        &mut self.tensors[i]
    }

    pub fn tensors(&self) -> &[Mat] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Mat] {
        &mut self.tensors
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn n_scalars(&self) -> usize {
        self.tensors.iter().map(Mat::len).sum()
    }

    pub fn zero(&mut self) {
        self.tensors.iter_mut().for_each(|t| t.fill(0.0));
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &ParamSet) {
        for (a, b) in self.tensors.iter_mut().zip(&other.tensors) {
            for (x, y) in a.data.iter_mut().zip(&b.data) {
                *x += y;
            }
        }
    }

    pub fn scale(&mut self, c: f64) {
        for t in &mut self.tensors {
            t.data.iter_mut().for_each(|x| *x *= c);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors
            .iter()
            .all(|t| t.data.iter().all(|x| x.is_finite()))
    }

    /// Checks that `other` has the same names and shapes.
    pub fn check_layout(&self, other: &ParamSet) -> Result<()> {
        if self.names != other.names {
            return Err(Error::Shape("parameter names differ".into()));
        }
        for (n, (a, b)) in self.names.iter().zip(self.tensors.iter().zip(&other.tensors)) {
            if (a.rows, a.cols) != (b.rows, b.cols) {
                return Err(Error::Shape(format!(
                    "{n}: {}x{} vs {}x{}",
                    a.rows, a.cols, b.rows, b.cols
                )));
            }
        }
        Ok(())
    }
}

impl Default for ParamSet {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_and_backward() {
        // W = [[1, 2], [3, 4], [5, 6]], b = [1, 0, -1], x = [[1, -1]]
        let w = Mat::from_vec(3, 2, vec![1., 2., 3., 4., 5., 6.]);
        let b = Mat::from_vec(1, 3, vec![1., 0., -1.]);
        let y = affine(&[1., -1.], 1, &w, &b);
        assert_eq!(y, vec![0., -1., -2.]);
        let mut dw = Mat::zeros(3, 2);
        let mut db = Mat::zeros(1, 3);
        let mut dx = vec![0.0; 2];
        affine_backward(&[1., -1.], &[1., 0., 2.], 1, &w, &mut dw, &mut db, Some(&mut dx));
        assert_eq!(dw.data, vec![1., -1., 0., 0., 2., -2.]);
        assert_eq!(db.data, vec![1., 0., 2.]);
        assert_eq!(dx, vec![11., 14.]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-1000.0) >= 0.0);
        assert!(sigmoid(1000.0) <= 1.0);
    }
}
