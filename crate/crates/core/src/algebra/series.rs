//! Truncated matrix Laurent series `sum_{e >= low} M_e x^e + O(x^prec)`.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use super::dual::Dual;
use super::mat::Mat;
use super::polymat::PolyMatrix;
use super::scalar::{Scalar, C64};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq)]
pub struct Series<S: Scalar = C64> {
    r: usize,
    low: i64,
    coeffs: Vec<Mat<S>>,
}

impl<S: Scalar> Series<S> {
    /// Terms `coeffs[k] x^(low + k)`, known through exponent
    /// `low + coeffs.len() - 1`.
    pub fn new(r: usize, low: i64, coeffs: Vec<Mat<S>>) -> Self {
        Series { r, low, coeffs }
    }

    pub fn zero(r: usize, low: i64, prec: i64) -> Self {
        let n = (prec - low).max(0) as usize;
        Series { r, low, coeffs: vec![Mat::zeros(r, r); n] }
    }

    pub fn from_poly(p: &PolyMatrix<S>, prec: i64) -> Self {
        let n = prec.max(0) as usize;
        Series { r: p.size(), low: 0, coeffs: (0..n).map(|k| p.coeff(k)).collect() }
    }

    pub fn identity(r: usize, prec: i64) -> Self {
        Self::from_poly(&PolyMatrix::constant(Mat::identity(r)), prec)
    }

    pub fn size(&self) -> usize {
        self.r
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    /// First exponent that is not known.
    pub fn prec(&self) -> i64 {
        self.low + self.coeffs.len() as i64
    }

    /// Coefficient of `x^e` (zero below `low`; must be below `prec`).
    pub fn coeff(&self, e: i64) -> Mat<S> {
        assert!(e < self.prec(), "exponent {e} beyond precision {}", self.prec());
        if e < self.low {
            Mat::zeros(self.r, self.r)
        } else {
            self.coeffs[(e - self.low) as usize].clone()
        }
    }

    pub fn coeffs(&self) -> &[Mat<S>] {
        &self.coeffs
    }

    /// Rewrite with a different start exponent (padding with zeros) and
    /// precision (dropping or requiring terms).
    pub fn reframe(&self, low: i64, prec: i64) -> Self {
        let prec = prec.min(self.prec());
        let coeffs = (low..prec).map(|e| self.coeff(e)).collect();
        Series { r: self.r, low, coeffs }
    }

    pub fn truncate(&self, prec: i64) -> Self {
        self.reframe(self.low, prec)
    }

    /// Multiply by `x^k`.
    pub fn shift(&self, k: i64) -> Self {
        Series { r: self.r, low: self.low + k, coeffs: self.coeffs.clone() }
    }

    pub fn scale(&self, c: S) -> Self {
        Series { r: self.r, low: self.low, coeffs: self.coeffs.iter().map(|m| m.scale(c)).collect() }
    }

    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.scale_c(C64::new((self.low + k as i64) as f64, 0.0)))
            .collect();
        Series { r: self.r, low: self.low - 1, coeffs }
    }

    pub fn eval(&self, x: S) -> Mat<S> {
        let mut acc = Mat::zeros(self.r, self.r);
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        // x^low factor; x must be a unit when low < 0
        let p = pow_i(x, self.low);
        acc.scale(p)
    }

    /// Inverse when the coefficient at `low` is invertible.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.coeffs.len();
        let c0inv = self.coeffs[0].inverse()?;
        let mut d: Vec<Mat<S>> = Vec::with_capacity(n);
        d.push(c0inv.clone());
        for k in 1..n {
            let mut acc = Mat::zeros(self.r, self.r);
            for i in 1..=k {
                acc = &acc + &(&self.coeffs[i] * &d[k - i]);
            }
            d.push(-&(&c0inv * &acc));
        }
        Ok(Series { r: self.r, low: -self.low, coeffs: d })
    }

    pub fn commutator(&self, o: &Self) -> Self {
        &(self * o) - &(o * self)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Max coefficient norm over exponents in `[from, to)`.
    pub fn max_abs_range(&self, from: i64, to: i64) -> f64 {
        (from.max(self.low)..to.min(self.prec())).map(|e| self.coeff(e).max_abs()).fold(0.0, f64::max)
    }
}

impl Series<Dual> {
    pub fn base_part(&self) -> Series<C64> {
        Series::new(self.r, self.low, self.coeffs.iter().map(|c| c.base_part()).collect())
    }

    pub fn h_part(&self) -> Series<C64> {
        Series::new(self.r, self.low, self.coeffs.iter().map(|c| c.h_part()).collect())
    }
}

fn pow_i<S: Scalar>(x: S, e: i64) -> S {
    let mut acc = S::one();
    for _ in 0..e.unsigned_abs() {
        acc *= x;
    }
    if e < 0 {
        acc.recip().expect("negative power of a non-unit")
    } else {
        acc
    }
}

impl<S: Scalar> Add for &Series<S> {
    type Output = Series<S>;
    fn add(self, o: &Series<S>) -> Series<S> {
        let low = self.low.min(o.low);
        let prec = self.prec().min(o.prec());
        let coeffs = (low..prec).map(|e| &self.coeff(e) + &o.coeff(e)).collect();
        Series { r: self.r, low, coeffs }
    }
}

impl<S: Scalar> Sub for &Series<S> {
    type Output = Series<S>;
    fn sub(self, o: &Series<S>) -> Series<S> {
        let low = self.low.min(o.low);
        let prec = self.prec().min(o.prec());
        let coeffs = (low..prec).map(|e| &self.coeff(e) - &o.coeff(e)).collect();
        Series { r: self.r, low, coeffs }
    }
}

impl<S: Scalar> Mul for &Series<S> {
    type Output = Series<S>;
    fn mul(self, o: &Series<S>) -> Series<S> {
        let low = self.low + o.low;
        let prec = (self.prec() + o.low).min(o.prec() + self.low);
        let n = (prec - low).max(0) as usize;
        let mut coeffs = vec![Mat::zeros(self.r, self.r); n];
        for (a, ca) in self.coeffs.iter().enumerate() {
            if a >= n || ca.max_abs().is_zero() {
                continue;
            }
            for (b, cb) in o.coeffs.iter().enumerate().take(n - a) {
                coeffs[a + b] = &coeffs[a + b] + &(ca * cb);
            }
        }
        Series { r: self.r, low, coeffs }
    }
}

impl<S: Scalar> Neg for &Series<S> {
    type Output = Series<S>;
    fn neg(self) -> Series<S> {
        Series { r: self.r, low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn geometric_inverse() {
        // (1 - x)^-1 = 1 + x + x^2 + ...
        let mut terms = vec![Mat::from_diag(&[c(0.0)]); 6];
        terms[0] = Mat::from_diag(&[c(1.0)]);
        terms[1] = Mat::from_diag(&[c(-1.0)]);
        let s = Series::new(1, 0, terms);
        let inv = s.inverse().unwrap();
        for e in 0..6 {
            assert_eq!(inv.coeff(e)[(0, 0)], c(1.0));
        }
    }

    #[test]
    fn laurent_product_precision() {
        let a = Series::new(1, -2, vec![Mat::from_diag(&[c(1.0)]); 5]); // x^-2 .. x^2
        let b = Series::new(1, 1, vec![Mat::from_diag(&[c(1.0)]); 3]); // x .. x^3
        let p = &a * &b;
        assert_eq!(p.low(), -1);
        assert_eq!(p.prec(), 2);
        assert_eq!(p.coeff(1)[(0, 0)], c(3.0));
    }

    #[test]
    fn derivative_and_eval() {
        let s = Series::new(1, -1, vec![Mat::from_diag(&[c(2.0)]), Mat::from_diag(&[c(3.0)])]);
        let x = c(0.5);
        assert!((s.eval(x)[(0, 0)] - c(7.0)).norm() < 1e-15);
        assert!((s.derivative().eval(x)[(0, 0)] - c(-8.0)).norm() < 1e-15);
    }
}
