//! Small dense matrices over a [`Scalar`] ring.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;

use super::dual::Dual;
use super::scalar::{Scalar, C64};
use crate::error::{Error, Result};

/// Row-major `rows x cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat<S: Scalar = C64> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![S::one(); n])
    }

    pub fn from_diag(d: &[S]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| rows[i][j])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        (0..self.rows).map(|i| self.data[i * self.cols..(i + 1) * self.cols].to_vec()).collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> Mat<T> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn diag(&self) -> Vec<S> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&self, c: S) -> Self {
        self.map(|x| x * c)
    }

    pub fn scale_c(&self, c: C64) -> Self {
        self.map(|x| x.scale(c))
    }

    /// `[self, o] = self*o - o*self`.
    pub fn commutator(&self, o: &Mat<S>) -> Self {
        &(self * o) - &(o * self)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(self.rows), |acc, _| &acc * self)
    }

    /// Frobenius norm with each entry measured by [`Scalar::norm`].
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn column(&self, j: usize) -> Vec<S> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(S::zero(), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// Gauss–Jordan inverse with pivoting on the modulus of the base part.
    ///
    /// Over dual numbers this reproduces `M0^-1 - h M0^-1 M1 M0^-1`.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch(format!("inverse of {}x{}", self.rows, self.cols)));
        }
        let n = self.rows;
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].base().norm().total_cmp(&a[(y, col)].base().norm()))
                .unwrap();
            if a[(piv, col)].base().norm() <= 1e-14 * scale {
                return Err(Error::SingularBase);
            }
            a.swap_rows(col, piv);
            inv.swap_rows(col, piv);
            let p = a[(col, col)].recip().ok_or(Error::SingularBase)?;
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let f = a[(i, col)];
                if f.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let (x, y) = (a[(col, j)], inv[(col, j)]);
                    a[(i, j)] -= f * x;
                    inv[(i, j)] -= f * y;
                }
            }
        }
        Ok(inv)
    }

    /// Determinant by elimination, without eigen-decomposition.
    pub fn det(&self) -> S {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = S::one();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&x, &y| a[(x, col)].base().norm().total_cmp(&a[(y, col)].base().norm()))
                .unwrap();
            let Some(p) = a[(piv, col)].recip() else {
                // Base column vanishes: fall back to the cofactor expansion,
                // which needs no division.
                return self.det_cofactor();
            };
            if piv != col {
                a.swap_rows(col, piv);
                det = -det;
            }
            det *= a[(col, col)];
            for i in col + 1..n {
                let f = a[(i, col)] * p;
                for j in col..n {
                    let x = a[(col, j)];
                    a[(i, j)] -= f * x;
                }
            }
        }
        det
    }

    /// Division-free Laplace expansion along the first row.
    pub fn det_cofactor(&self) -> S {
        let n = self.rows;
        if n == 0 {
            return S::one();
        }
        if n == 1 {
            return self[(0, 0)];
        }
        let mut acc = S::zero();
        for j in 0..n {
            let minor = self.minor(0, j);
            let term = self[(0, j)] * minor.det_cofactor();
            if j % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    /// The matrix with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> Self {
        Self::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            self[(if i < r { i } else { i + 1 }, if j < c { j } else { j + 1 })]
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Mat<C64> {
    pub fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_na(m: &DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }

    pub fn to_dual(&self) -> Mat<Dual> {
        self.map(Dual::constant)
    }
}

impl Mat<Dual> {
    /// Assemble `m0 + h m1`.
    pub fn from_parts(m0: &Mat<C64>, m1: &Mat<C64>) -> Self {
        assert_eq!((m0.rows, m0.cols), (m1.rows, m1.cols));
        Mat::from_fn(m0.rows, m0.cols, |i, j| Dual::new(m0[(i, j)], m1[(i, j)]))
    }

    pub fn base_part(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].re)
    }

    pub fn h_part(&self) -> Mat<C64> {
        Mat::from_fn(self.rows, self.cols, |i, j| self[(i, j)].eps)
    }
}

impl<S: Scalar> Index<(usize, usize)> for Mat<S> {
    type Output = S;
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S: Scalar> IndexMut<(usize, usize)> for Mat<S> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<S: Scalar> Add for &Mat<S> {
    type Output = Mat<S>;
    fn add(self, o: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch in add");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<S: Scalar> Sub for &Mat<S> {
    type Output = Mat<S>;
    fn sub(self, o: &Mat<S>) -> Mat<S> {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "shape mismatch in sub");
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<S: Scalar> Mul for &Mat<S> {
    type Output = Mat<S>;
    fn mul(self, o: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, o.rows, "shape mismatch in mul");
        let mut out = Mat::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o[(k, j)];
                }
            }
        }
        out
    }
}

impl<S: Scalar> Neg for &Mat<S> {
    type Output = Mat<S>;
    fn neg(self) -> Mat<S> {
        self.map(|x| -x)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl<S: Scalar> $tr for Mat<S> {
            type Output = Mat<S>;
            fn $f(self, o: Mat<S>) -> Mat<S> {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Distance of `m` from the identity in max-entry norm.
pub fn dist_identity<S: Scalar>(m: &Mat<S>) -> f64 {
    (m - &Mat::identity(m.rows())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn dual_inverse_of_nilpotent_shift() {
        let n = Mat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 2.0)], vec![c(3.0, 0.0), c(0.5, 0.0)]]);
        let m = Mat::from_parts(&Mat::identity(2), &n);
        let inv = m.inverse().unwrap();
        assert_eq!(inv.base_part(), Mat::identity(2));
        assert!((&inv.h_part() + &n).max_abs() < 1e-15);
    }

    #[test]
    fn scalar_inverse() {
        let m: Mat<Dual> = Mat::identity(3).scale(Dual::from_f64(2.0));
        let inv = m.inverse().unwrap();
        assert!((&inv - &Mat::identity(3).scale(Dual::from_f64(0.5))).max_abs() < 1e-16);
    }

    #[test]
    fn singular_base_detected() {
        let m0 = Mat::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]);
        let m = Mat::from_parts(&m0, &Mat::identity(2));
        assert_eq!(m.inverse(), Err(Error::SingularBase));
    }

    #[test]
    fn det_matches_cofactor() {
        let m = Mat::from_fn(4, 4, |i, j| {
            let shift = if i == j { 2.0 } else { 0.0 };
            c((i * 4 + j) as f64 * 0.3 - 1.0 + shift, (i as f64) - 0.7 * (j * j) as f64)
        });
        assert!((m.det() - m.det_cofactor()).norm() < 1e-10);
        let d = Mat::from_parts(&m, &Mat::identity(4));
        let det = d.det();
        // d/dh det(M + hI) = tr(adj M) = det(M) tr(M^-1)
        let tr_inv = m.inverse().unwrap().trace();
        assert!((det.eps - m.det() * tr_inv).norm() < 1e-9 * det.re.norm().max(1.0));
    }
}

/// Nested rows; complex entries serialize as `[re, im]`.
impl<S: Scalar + serde::Serialize> serde::Serialize for Mat<S> {
    fn serialize<Se: serde::Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        self.to_rows().serialize(s)
    }
}
