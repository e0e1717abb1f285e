use std::fmt::Debug;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use num_traits::{One, Zero};

pub type C64 = Complex64;

/// Coefficient ring used by polynomials, matrices and series.
///
/// Implemented by `C64` and [`Dual`](super::Dual). For dual numbers the
/// "base" is the h^0 part and a value is a unit iff its base is nonzero.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
{
    fn from_c64(c: C64) -> Self;
    fn base(self) -> C64;
    /// Max of the moduli of all components.
    fn norm(self) -> f64;
    fn recip(self) -> Option<Self>;
    fn scale(self, c: C64) -> Self;

    fn from_f64(x: f64) -> Self {
        Self::from_c64(C64::new(x, 0.0))
    }
}

impl Scalar for C64 {
    fn from_c64(c: C64) -> Self {
        c
    }
    fn base(self) -> C64 {
        self
    }
    fn norm(self) -> f64 {
        self.norm()
    }
    fn recip(self) -> Option<Self> {
        if self == C64::zero() {
            None
        } else {
            Some(self.inv())
        }
    }
    fn scale(self, c: C64) -> Self {
        self * c
    }
}

/// `e^{i x}`.
pub fn cis(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

/// The `m` roots of `z^m - eps^m`, `eps * zeta_m^j` for `j = 0..m`, or the
/// single point `0` when `eps == 0`.
pub fn divisor_points(m: usize, eps: C64) -> Vec<C64> {
    if eps == C64::zero() {
        vec![C64::zero()]
    } else {
        (0..m)
            .map(|j| eps * cis(2.0 * std::f64::consts::PI * j as f64 / m as f64))
            .collect()
    }
}
