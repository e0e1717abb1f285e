//! Dual numbers `C[h]/(h^2)`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::scalar::{Scalar, C64};

/// `re + eps * h` with `h^2 = 0`.
#[derive(Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Dual {
    pub re: C64,
    pub eps: C64,
}

impl Dual {
    pub const fn new(re: C64, eps: C64) -> Self {
        Dual { re, eps }
    }

    pub fn h() -> Self {
        Dual::new(C64::zero(), C64::one())
    }

    pub fn constant(re: C64) -> Self {
        Dual::new(re, C64::zero())
    }

    /// `(1/re, -eps/re^2)`, or `None` when `re = 0`.
    pub fn inverse(self) -> Option<Self> {
        if self.re == C64::zero() {
            return None;
        }
        let inv = self.re.inv();
        Some(Dual::new(inv, -self.eps * inv * inv))
    }
}

impl fmt::Debug for Dual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}h)", self.re, self.eps)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    /// Panics when the divisor is not a unit; use [`Dual::inverse`] to test.
    fn div(self, o: Dual) -> Dual {
        self * o.inverse().expect("division by a non-unit dual number")
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl AddAssign for Dual {
    fn add_assign(&mut self, o: Dual) {
        *self = *self + o;
    }
}

impl SubAssign for Dual {
    fn sub_assign(&mut self, o: Dual) {
        *self = *self - o;
    }
}

impl MulAssign for Dual {
    fn mul_assign(&mut self, o: Dual) {
        *self = *self * o;
    }
}

impl Zero for Dual {
    fn zero() -> Self {
        Dual::default()
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
}

impl One for Dual {
    fn one() -> Self {
        Dual::constant(C64::one())
    }
}

impl Scalar for Dual {
    fn from_c64(c: C64) -> Self {
        Dual::constant(c)
    }
    fn base(self) -> C64 {
        self.re
    }
    fn norm(self) -> f64 {
        self.re.norm().max(self.eps.norm())
    }
    fn recip(self) -> Option<Self> {
        self.inverse()
    }
    fn scale(self, c: C64) -> Self {
        Dual::new(self.re * c, self.eps * c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(a: f64, b: f64, c: f64, e: f64) -> Dual {
        Dual::new(C64::new(a, b), C64::new(c, e))
    }

    #[test]
    fn product_rule() {
        let x = d(1.5, -0.5, 2.0, 0.25);
        let y = d(-0.75, 1.0, 0.5, 3.0);
        let p = x * y;
        assert_eq!(p.re, x.re * y.re);
        assert_eq!(p.eps, x.eps * y.re + x.re * y.eps);
    }

    #[test]
    fn inverse_formula() {
        let x = d(2.0, 1.0, -1.0, 0.5);
        let inv = x.inverse().unwrap();
        assert!((inv.re - x.re.inv()).norm() < 1e-15);
        assert!((inv.eps + x.eps / (x.re * x.re)).norm() < 1e-15);
        let one = x * inv;
        assert!((one.re - C64::one()).norm() < 1e-15);
        assert!(one.eps.norm() < 1e-15);
    }

    #[test]
    fn nilpotent_has_no_inverse() {
        assert!(Dual::h().inverse().is_none());
        assert_eq!(Dual::h() * Dual::h(), Dual::zero());
    }
}
