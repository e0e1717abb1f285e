//! Dense univariate polynomials with ascending coefficients.

use std::ops::{Add, Mul, Neg, Sub};


use super::scalar::{Scalar, C64};

/// `coeffs[k]` is the coefficient of `x^k`. Trailing exact zeros are trimmed,
/// so the zero polynomial has no coefficients and degree `None`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<S: Scalar = C64> {
    coeffs: Vec<S>,
}

impl<S: Scalar> Poly<S> {
    pub fn new(mut coeffs: Vec<S>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: S) -> Self {
        Poly::new(vec![c])
    }

    /// `c * x^k`.
    pub fn monomial(c: S, k: usize) -> Self {
        let mut v = vec![S::zero(); k + 1];
        v[k] = c;
        Poly::new(v)
    }

    /// `prod (x - r)` over the given roots.
    pub fn from_roots(roots: &[S]) -> Self {
        roots.iter().fold(Poly::constant(S::one()), |acc, &r| {
            acc * Poly::new(vec![-r, S::one()])
        })
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `x^k` (zero past the degree).
    pub fn coeff(&self, k: usize) -> S {
        self.coeffs.get(k).copied().unwrap_or_else(S::zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficients padded or cut to exactly `n` entries.
    pub fn padded(&self, n: usize) -> Vec<S> {
        (0..n).map(|k| self.coeff(k)).collect()
    }

    pub fn eval(&self, x: S) -> S {
        self.coeffs.iter().rev().fold(S::zero(), |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c.scale(C64::new(k as f64, 0.0)))
                .collect(),
        )
    }

    pub fn scale(&self, c: S) -> Self {
        Poly::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Quotient and remainder on division by a monic polynomial.
    pub fn div_rem_monic(&self, d: &Poly<S>) -> (Poly<S>, Poly<S>) {
        let dd = d.degree().expect("division by the zero polynomial");
        assert!(d.coeffs[dd] == S::one(), "divisor must be monic");
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![S::zero(); rem.len() - dd];
        for k in (dd..rem.len()).rev() {
            let c = rem[k];
            if c.is_zero() {
                continue;
            }
            quot[k - dd] = c;
            for (i, &dc) in d.coeffs.iter().enumerate() {
                rem[k - dd + i] -= c * dc;
            }
        }
        rem.truncate(dd);
        (Poly::new(quot), Poly::new(rem))
    }

    /// Largest coefficient norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl<S: Scalar> Add for &Poly<S> {
    type Output = Poly<S>;
    fn add(self, o: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl<S: Scalar> Sub for &Poly<S> {
    type Output = Poly<S>;
    fn sub(self, o: &Poly<S>) -> Poly<S> {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl<S: Scalar> Mul for &Poly<S> {
    type Output = Poly<S>;
    fn mul(self, o: &Poly<S>) -> Poly<S> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let mut v = vec![S::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        Poly::new(v)
    }
}

impl<S: Scalar> Neg for &Poly<S> {
    type Output = Poly<S>;
    fn neg(self) -> Poly<S> {
        Poly::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<S: Scalar> $tr for Poly<S> {
            type Output = Poly<S>;
            fn $f(self, o: Poly<S>) -> Poly<S> {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn trims_and_degree() {
        let p = Poly::new(vec![c(1.0), c(0.0), c(0.0)]);
        assert_eq!(p.degree(), Some(0));
        assert_eq!(Poly::<C64>::new(vec![c(0.0)]).degree(), None);
    }

    #[test]
    fn division_by_monic() {
        // z^3 = z * (z^2 - 4) + 4z
        let p = Poly::monomial(c(1.0), 3);
        let d = Poly::new(vec![c(-4.0), c(0.0), c(1.0)]);
        let (q, r) = p.div_rem_monic(&d);
        assert_eq!(q, Poly::monomial(c(1.0), 1));
        assert_eq!(r, Poly::monomial(c(4.0), 1));
    }

    #[test]
    fn roots_and_derivative() {
        let p = Poly::from_roots(&[c(1.0), c(-1.0)]);
        assert_eq!(p, Poly::new(vec![c(-1.0), c(0.0), c(1.0)]));
        assert_eq!(p.derivative(), Poly::monomial(c(2.0), 1));
        assert_eq!(p.eval(c(3.0)), c(8.0));
    }
}
