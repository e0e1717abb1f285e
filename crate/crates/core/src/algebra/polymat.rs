//! Polynomial matrices `sum_k M_k z^k`.

use std::ops::{Add, Mul, Neg, Sub};

use super::dual::Dual;
use super::mat::Mat;
use super::poly::Poly;
use super::scalar::{Scalar, C64};

/// Square matrix polynomial stored as coefficient matrices, lowest first.
/// The vector length is the declared degree bound (entries of degree <
/// `coeffs.len()`); it may contain zero matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<S: Scalar = C64> {
    r: usize,
    coeffs: Vec<Mat<S>>,
}

impl<S: Scalar> PolyMatrix<S> {
    pub fn new(r: usize, coeffs: Vec<Mat<S>>) -> Self {
        assert!(coeffs.iter().all(|c| c.rows() == r && c.cols() == r), "coefficient shape");
        PolyMatrix { r, coeffs }
    }

    pub fn zeros(r: usize, bound: usize) -> Self {
        PolyMatrix { r, coeffs: vec![Mat::zeros(r, r); bound] }
    }

    pub fn constant(m: Mat<S>) -> Self {
        PolyMatrix { r: m.rows(), coeffs: vec![m] }
    }

    pub fn from_entries(r: usize, entries: &[Vec<Poly<S>>], bound: usize) -> Self {
        let coeffs = (0..bound).map(|k| Mat::from_fn(r, r, |i, j| entries[i][j].coeff(k))).collect();
        PolyMatrix { r, coeffs }
    }

    pub fn size(&self) -> usize {
        self.r
    }

    /// Degree bound (number of stored coefficients).
    pub fn bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Mat<S>] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Mat<S> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| Mat::zeros(self.r, self.r))
    }

    pub fn set_coeff(&mut self, k: usize, m: Mat<S>) {
        if k >= self.coeffs.len() {
            self.coeffs.resize(k + 1, Mat::zeros(self.r, self.r));
        }
        self.coeffs[k] = m;
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| c[(i, j)]).collect())
    }

    /// Same polynomial with the bound changed (dropping higher terms).
    pub fn with_bound(&self, bound: usize) -> Self {
        PolyMatrix { r: self.r, coeffs: (0..bound).map(|k| self.coeff(k)).collect() }
    }

    pub fn eval(&self, z: S) -> Mat<S> {
        let mut acc = Mat::zeros(self.r, self.r);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(z) + c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.scale_c(C64::new(k as f64, 0.0)))
            .collect();
        PolyMatrix { r: self.r, coeffs }
    }

    pub fn scale(&self, c: S) -> Self {
        PolyMatrix { r: self.r, coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T + Copy) -> PolyMatrix<T> {
        PolyMatrix { r: self.r, coeffs: self.coeffs.iter().map(|m| m.map(f)).collect() }
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![Mat::zeros(self.r, self.r); k];
        coeffs.extend(self.coeffs.iter().cloned());
        PolyMatrix { r: self.r, coeffs }
    }

    pub fn commutator(&self, o: &Self) -> Self {
        &(self * o) - &(o * self)
    }

    pub fn trace(&self) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|c| c.trace()).collect())
    }

    pub fn transpose(&self) -> Self {
        PolyMatrix { r: self.r, coeffs: self.coeffs.iter().map(|c| c.transpose()).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}

impl PolyMatrix<C64> {
    pub fn to_dual(&self) -> PolyMatrix<Dual> {
        self.map(Dual::constant)
    }
}

impl PolyMatrix<Dual> {
    /// `a + h b`.
    pub fn from_parts(a: &PolyMatrix<C64>, b: &PolyMatrix<C64>) -> Self {
        let n = a.bound().max(b.bound());
        let coeffs = (0..n).map(|k| Mat::from_parts(&a.coeff(k), &b.coeff(k))).collect();
        PolyMatrix { r: a.size(), coeffs }
    }

    pub fn base_part(&self) -> PolyMatrix<C64> {
        PolyMatrix { r: self.r, coeffs: self.coeffs.iter().map(|c| c.base_part()).collect() }
    }

    pub fn h_part(&self) -> PolyMatrix<C64> {
        PolyMatrix { r: self.r, coeffs: self.coeffs.iter().map(|c| c.h_part()).collect() }
    }
}

impl<S: Scalar> Add for &PolyMatrix<S> {
    type Output = PolyMatrix<S>;
    fn add(self, o: &PolyMatrix<S>) -> PolyMatrix<S> {
        let n = self.bound().max(o.bound());
        PolyMatrix { r: self.r, coeffs: (0..n).map(|k| &self.coeff(k) + &o.coeff(k)).collect() }
    }
}

impl<S: Scalar> Sub for &PolyMatrix<S> {
    type Output = PolyMatrix<S>;
    fn sub(self, o: &PolyMatrix<S>) -> PolyMatrix<S> {
        let n = self.bound().max(o.bound());
        PolyMatrix { r: self.r, coeffs: (0..n).map(|k| &self.coeff(k) - &o.coeff(k)).collect() }
    }
}

impl<S: Scalar> Mul for &PolyMatrix<S> {
    type Output = PolyMatrix<S>;
    fn mul(self, o: &PolyMatrix<S>) -> PolyMatrix<S> {
        if self.bound() == 0 || o.bound() == 0 {
            return PolyMatrix::zeros(self.r, 0);
        }
        let mut coeffs = vec![Mat::zeros(self.r, self.r); self.bound() + o.bound() - 1];
        for (a, ca) in self.coeffs.iter().enumerate() {
            for (b, cb) in o.coeffs.iter().enumerate() {
                coeffs[a + b] = &coeffs[a + b] + &(ca * cb);
            }
        }
        PolyMatrix { r: self.r, coeffs }
    }
}

impl<S: Scalar> Neg for &PolyMatrix<S> {
    type Output = PolyMatrix<S>;
    fn neg(self) -> PolyMatrix<S> {
        PolyMatrix { r: self.r, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_evaluates_pointwise() {
        let a = PolyMatrix::new(
            2,
            vec![
                Mat::from_fn(2, 2, |i, j| C64::new(i as f64 + 1.0, j as f64)),
                Mat::from_fn(2, 2, |i, j| C64::new(0.5 * j as f64, -(i as f64))),
            ],
        );
        let b = a.transpose();
        let z = C64::new(0.3, -0.7);
        let lhs = (&a * &b).eval(z);
        let rhs = &a.eval(z) * &b.eval(z);
        assert!((&lhs - &rhs).max_abs() < 1e-14);
    }
}
