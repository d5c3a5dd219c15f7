use std::ops::{Deref, Index};

/// Coordinates of an element of a finite-dimensional truncation of a
/// separable Hilbert space, in a fixed orthonormal basis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(coords: Vec<f64>) -> Self {
        Vector(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn scalar(x: f64) -> Self {
        Vector(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<f64> for Vector {
    fn from(x: f64) -> Self {
        Vector::scalar(x)
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

/// Euclidean norm of a coordinate slice.
pub fn norm(v: &[f64]) -> f64 {
    // Scalar fast path keeps |x| bit-exact instead of sqrt(x*x).
    if v.len() == 1 {
        return v[0].abs();
    }
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn norm_pow(v: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        v.iter().map(|x| x * x).sum()
    } else if p == 1.0 {
        norm(v)
    } else {
        norm(v).powf(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_is_euclidean() {
        assert_eq!(Vector::new(vec![3.0, 4.0]).norm(), 5.0);
        assert_eq!(Vector::scalar(-2.5).norm(), 2.5);
        assert_eq!(Vector::zeros(4).norm(), 0.0);
    }

    #[test]
    fn norm_pow_matches_powf() {
        let v = [1.0, -2.0, 2.0];
        assert_eq!(norm_pow(&v, 2.0), 9.0);
        assert_eq!(norm_pow(&v, 1.0), 3.0);
        assert!((norm_pow(&v, 3.0) - 27.0).abs() < 1e-12);
    }
}
