//! Quotient rings `C[z]/(p(z))` and matrices over them.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use super::mat::Mat;
use super::poly::Poly;
use super::polymat::PolyMatrix;
use super::scalar::{divisor_points, Scalar, C64};
use crate::error::{Error, Result};

/// `C[z]/(p)` for a monic modulus `p` of degree `m >= 1`.
///
/// Elements are polynomials of degree `< m`. Rings built with
/// [`QuotRing::unfolded`] also remember `eps` so that the roots of
/// `z^m - eps^m` are available for evaluation (the CRT picture).
#[derive(Clone, Debug, PartialEq)]
pub struct QuotRing<S: Scalar = C64> {
    modulus: Poly<S>,
    eps: Option<C64>,
    /// `z^k mod p` for `k < 2m - 1`.
    powers: Vec<Poly<S>>,
}

impl<S: Scalar> QuotRing<S> {
    pub fn new(modulus: Poly<S>) -> Result<Self> {
        let m = modulus.degree().filter(|&d| d >= 1).ok_or_else(|| {
            Error::InvalidParameter("modulus must have degree >= 1".into())
        })?;
        if modulus.coeff(m) != S::one() {
            return Err(Error::InvalidParameter("modulus must be monic".into()));
        }
        Ok(Self::build(modulus, None))
    }

    /// `C[z]/(z^m - eps^m)`.
    pub fn unfolded(m: usize, eps: C64) -> Self {
        assert!(m >= 1, "m must be positive");
        let mut c = vec![S::zero(); m + 1];
        c[0] = -S::from_c64(eps.powu(m as u32));
        c[m] = S::one();
        Self::build(Poly::new(c), Some(eps))
    }

    /// `C[z]/(z)`, i.e. the scalars.
    pub fn scalars() -> Self {
        Self::unfolded(1, C64::zero())
    }

    fn build(modulus: Poly<S>, eps: Option<C64>) -> Self {
        let m = modulus.degree().unwrap();
        let mut powers = Vec::with_capacity(2 * m);
        for k in 0..(2 * m).max(1) {
            powers.push(Poly::monomial(S::one(), k).div_rem_monic(&modulus).1);
        }
        QuotRing { modulus, eps, powers }
    }

    pub fn m(&self) -> usize {
        self.modulus.degree().unwrap()
    }

    pub fn modulus(&self) -> &Poly<S> {
        &self.modulus
    }

    pub fn epsilon(&self) -> Option<C64> {
        self.eps
    }

    /// Roots of `z^m - eps^m` (a single `0` when `eps = 0`); `None` for a
    /// general modulus.
    pub fn points(&self) -> Option<Vec<C64>> {
        self.eps.map(|e| divisor_points(self.m(), e))
    }

    pub fn reduce(&self, a: &Poly<S>) -> Poly<S> {
        a.div_rem_monic(&self.modulus).1
    }

    pub fn one(&self) -> Poly<S> {
        Poly::constant(S::one())
    }

    pub fn mul(&self, a: &Poly<S>, b: &Poly<S>) -> Poly<S> {
        self.reduce(&(a * b))
    }

    /// Matrix of multiplication by `a` in the basis `1, z, .., z^{m-1}`.
    pub fn mult_matrix(&self, a: &Poly<S>) -> Mat<S> {
        let m = self.m();
        let cols: Vec<Vec<S>> =
            (0..m).map(|k| self.mul(a, &self.powers[k]).padded(m)).collect();
        Mat::from_fn(m, m, |i, k| cols[k][i])
    }

    /// Inverse via the linear system `mult_matrix(a) x = 1`.
    pub fn inverse(&self, a: &Poly<S>) -> Result<Poly<S>> {
        let inv = self.mult_matrix(&self.reduce(a)).inverse().map_err(|_| Error::NonUnit)?;
        Ok(Poly::new(inv.column(0)))
    }

    pub fn is_unit(&self, a: &Poly<S>) -> bool {
        self.inverse(a).is_ok()
    }

    /// How far `a` is from the non-units: the smallest modulus of its values
    /// at the divisor points (base parts), or `0` when `a` is not a unit of
    /// a ring without known points.
    pub fn unit_margin(&self, a: &Poly<S>) -> f64 {
        match self.points() {
            Some(pts) => pts
                .into_iter()
                .map(|p| a.eval(S::from_c64(p)).base().norm())
                .fold(f64::INFINITY, f64::min),
            None => {
                if self.is_unit(a) {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
        }
    }

    /// Values at the divisor points (CRT coordinates for `eps != 0`).
    pub fn eval_points(&self, a: &Poly<S>) -> Vec<S> {
        self.points()
            .expect("ring has no known points")
            .into_iter()
            .map(|p| a.eval(S::from_c64(p)))
            .collect()
    }
}

impl QuotRing<C64> {
    /// Element with prescribed values at the `m` distinct divisor points
    /// (inverse CRT). Requires `eps != 0`.
    pub fn from_values(&self, values: &[C64]) -> Poly<C64> {
        let pts = self.points().expect("ring has no known points");
        assert!(pts.len() == values.len() && self.eps != Some(C64::zero()));
        let q = self.modulus.clone();
        let dq = q.derivative();
        let mut acc = Poly::zero();
        for (&p, &v) in pts.iter().zip(values) {
            let (basis, _) = q.div_rem_monic(&Poly::new(vec![-p, C64::one()]));
            acc = &acc + &basis.scale(v / dq.eval(p));
        }
        acc
    }
}

/// `r x r` matrix over a [`QuotRing`], stored as its degree-`< m` lift.
#[derive(Clone, Debug, PartialEq)]
pub struct QuotMatrix<S: Scalar = C64> {
    ring: QuotRing<S>,
    lift: PolyMatrix<S>,
}

impl<S: Scalar> QuotMatrix<S> {
    /// Reduce a polynomial matrix modulo the ring's modulus.
    pub fn from_poly(ring: &QuotRing<S>, p: &PolyMatrix<S>) -> Self {
        let m = ring.m();
        let r = p.size();
        let mut coeffs = vec![Mat::zeros(r, r); m];
        for (k, c) in p.coeffs().iter().enumerate() {
            let red = if k < ring.powers.len() {
                ring.powers[k].clone()
            } else {
                ring.reduce(&Poly::monomial(S::one(), k))
            };
            for (i, &w) in red.coeffs().iter().enumerate() {
                if !w.is_zero() {
                    coeffs[i] = &coeffs[i] + &c.scale(w);
                }
            }
        }
        QuotMatrix { ring: ring.clone(), lift: PolyMatrix::new(r, coeffs) }
    }

    pub fn from_const(ring: &QuotRing<S>, m: &Mat<S>) -> Self {
        Self::from_poly(ring, &PolyMatrix::constant(m.clone()))
    }

    pub fn from_entries(ring: &QuotRing<S>, entries: &[Vec<Poly<S>>]) -> Self {
        let r = entries.len();
        let bound = entries
            .iter()
            .flatten()
            .map(|p| p.degree().map_or(0, |d| d + 1))
            .max()
            .unwrap_or(0);
        Self::from_poly(ring, &PolyMatrix::from_entries(r, entries, bound))
    }

    pub fn zeros(ring: &QuotRing<S>, r: usize) -> Self {
        Self::from_const(ring, &Mat::zeros(r, r))
    }

    pub fn identity(ring: &QuotRing<S>, r: usize) -> Self {
        Self::from_const(ring, &Mat::identity(r))
    }

    /// Diagonal matrix with ring elements on the diagonal.
    pub fn from_diag(ring: &QuotRing<S>, d: &[Poly<S>]) -> Self {
        let r = d.len();
        let entries: Vec<Vec<Poly<S>>> = (0..r)
            .map(|i| (0..r).map(|j| if i == j { d[i].clone() } else { Poly::zero() }).collect())
            .collect();
        Self::from_entries(ring, &entries)
    }

    pub fn ring(&self) -> &QuotRing<S> {
        &self.ring
    }

    pub fn size(&self) -> usize {
        self.lift.size()
    }

    /// The unique representative with entries of degree `< m`.
    pub fn lift(&self) -> &PolyMatrix<S> {
        &self.lift
    }

    pub fn coeff(&self, k: usize) -> Mat<S> {
        self.lift.coeff(k)
    }

    pub fn entry(&self, i: usize, j: usize) -> Poly<S> {
        self.lift.entry(i, j)
    }

    pub fn eval(&self, z: C64) -> Mat<S> {
        self.lift.eval(S::from_c64(z))
    }

    pub fn scale(&self, c: S) -> Self {
        QuotMatrix { ring: self.ring.clone(), lift: self.lift.scale(c) }
    }

    /// Multiply by a ring element.
    pub fn scale_elem(&self, a: &Poly<S>) -> Self {
        let pa = PolyMatrix::new(
            self.size(),
            a.coeffs().iter().map(|&c| Mat::identity(self.size()).scale(c)).collect(),
        );
        Self::from_poly(&self.ring, &(&pa * &self.lift))
    }

    pub fn transpose(&self) -> Self {
        QuotMatrix { ring: self.ring.clone(), lift: self.lift.transpose() }
    }

    pub fn trace(&self) -> Poly<S> {
        self.lift.trace()
    }

    pub fn commutator(&self, o: &Self) -> Self {
        &(self * o) - &(o * self)
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::identity(&self.ring, self.size()), |acc, _| &acc * self)
    }

    /// `sum_i p_i N^i` for ring-valued coefficients `p_i` (Horner).
    pub fn poly_eval(&self, p: &[Poly<S>]) -> Self {
        let id = Self::identity(&self.ring, self.size());
        p.iter().rev().fold(Self::zeros(&self.ring, self.size()), |acc, c| {
            &(&acc * self) + &id.scale_elem(c)
        })
    }

    /// `sum_i c_i N^i` for scalar coefficients.
    pub fn poly_eval_scalar(&self, p: &Poly<S>) -> Self {
        let coeffs: Vec<Poly<S>> = p.coeffs().iter().map(|&c| Poly::constant(c)).collect();
        self.poly_eval(&coeffs)
    }

    /// Determinant by division-free cofactor expansion over the ring.
    pub fn det(&self) -> Poly<S> {
        let r = self.size();
        let entries: Vec<Vec<Poly<S>>> =
            (0..r).map(|i| (0..r).map(|j| self.entry(i, j)).collect()).collect();
        let rows: Vec<usize> = (0..r).collect();
        det_rec(&self.ring, &entries, &rows, &rows)
    }

    /// Inverse through the adjugate; `NonUnit` when the determinant is not a
    /// ring unit.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.size();
        let d_inv = self.ring.inverse(&self.det())?;
        let entries: Vec<Vec<Poly<S>>> =
            (0..r).map(|i| (0..r).map(|j| self.entry(i, j)).collect()).collect();
        let all: Vec<usize> = (0..r).collect();
        let mut adj = vec![vec![Poly::zero(); r]; r];
        for i in 0..r {
            for j in 0..r {
                let rows: Vec<usize> = all.iter().cloned().filter(|&x| x != j).collect();
                let cols: Vec<usize> = all.iter().cloned().filter(|&x| x != i).collect();
                let c = det_rec(&self.ring, &entries, &rows, &cols);
                adj[i][j] = if (i + j) % 2 == 0 { c } else { -&c };
            }
        }
        Ok(QuotMatrix::from_entries(&self.ring, &adj).scale_elem(&d_inv))
    }

    pub fn max_abs(&self) -> f64 {
        self.lift.max_abs()
    }

    /// Matrix-vector product over the ring.
    pub fn mul_vec(&self, v: &[Poly<S>]) -> Vec<Poly<S>> {
        let r = self.size();
        (0..r)
            .map(|i| {
                let mut acc = Poly::zero();
                for (j, vj) in v.iter().enumerate() {
                    acc = &acc + &self.ring.mul(&self.entry(i, j), vj);
                }
                acc
            })
            .collect()
    }

    /// Matrix whose `j`-th column is `cols[j]`.
    pub fn from_columns(ring: &QuotRing<S>, cols: &[Vec<Poly<S>>]) -> Self {
        let r = cols.len();
        let entries: Vec<Vec<Poly<S>>> =
            (0..r).map(|i| (0..r).map(|j| cols[j][i].clone()).collect()).collect();
        Self::from_entries(ring, &entries)
    }

    pub fn map<T: Scalar>(&self, ring: &QuotRing<T>, f: impl Fn(S) -> T + Copy) -> QuotMatrix<T> {
        QuotMatrix::from_poly(ring, &self.lift.map(f))
    }
}

impl QuotMatrix<C64> {
    /// Real-linear coordinates: coefficient `k`, row `i`, column `j`.
    pub fn to_vec(&self) -> DVector<C64> {
        let (m, r) = (self.ring.m(), self.size());
        DVector::from_iterator(m * r * r, (0..m).flat_map(|k| self.coeff(k).data().to_vec()))
    }

    /// Matrix of a C-linear map on `r x r` matrices over the ring, in the
    /// [`to_vec`](Self::to_vec) coordinates.
    pub fn operator_matrix(
        ring: &QuotRing<C64>,
        r: usize,
        f: impl Fn(&QuotMatrix<C64>) -> QuotMatrix<C64>,
    ) -> DMatrix<C64> {
        let n = ring.m() * r * r;
        let mut out = DMatrix::<C64>::zeros(n, n);
        let mut e = vec![C64::zero(); n];
        for col in 0..n {
            e[col] = C64::one();
            out.set_column(col, &f(&Self::from_vec(ring, r, &e)).to_vec());
            e[col] = C64::zero();
        }
        out
    }

    pub fn from_vec(ring: &QuotRing<C64>, r: usize, v: &[C64]) -> Self {
        let m = ring.m();
        let coeffs =
            (0..m).map(|k| Mat::from_fn(r, r, |i, j| v[k * r * r + i * r + j])).collect();
        QuotMatrix { ring: ring.clone(), lift: PolyMatrix::new(r, coeffs) }
    }
}

fn det_rec<S: Scalar>(
    ring: &QuotRing<S>,
    e: &[Vec<Poly<S>>],
    rows: &[usize],
    cols: &[usize],
) -> Poly<S> {
    match rows.len() {
        0 => ring.one(),
        1 => e[rows[0]][cols[0]].clone(),
        _ => {
            let mut acc = Poly::zero();
            let sub_rows = &rows[1..];
            for (k, &c) in cols.iter().enumerate() {
                let a = &e[rows[0]][c];
                if a.is_zero() {
                    continue;
                }
                let sub_cols: Vec<usize> = cols.iter().cloned().filter(|&x| x != c).collect();
                let term = ring.mul(a, &det_rec(ring, e, sub_rows, &sub_cols));
                acc = if k % 2 == 0 { &acc + &term } else { &acc - &term };
            }
            acc
        }
    }
}

impl<S: Scalar> Add for &QuotMatrix<S> {
    type Output = QuotMatrix<S>;
    fn add(self, o: &QuotMatrix<S>) -> QuotMatrix<S> {
        QuotMatrix { ring: self.ring.clone(), lift: &self.lift + &o.lift }
    }
}

impl<S: Scalar> Sub for &QuotMatrix<S> {
    type Output = QuotMatrix<S>;
    fn sub(self, o: &QuotMatrix<S>) -> QuotMatrix<S> {
        QuotMatrix { ring: self.ring.clone(), lift: &self.lift - &o.lift }
    }
}

impl<S: Scalar> Mul for &QuotMatrix<S> {
    type Output = QuotMatrix<S>;
    fn mul(self, o: &QuotMatrix<S>) -> QuotMatrix<S> {
        QuotMatrix::from_poly(&self.ring, &(&self.lift * &o.lift))
    }
}

impl<S: Scalar> Neg for &QuotMatrix<S> {
    type Output = QuotMatrix<S>;
    fn neg(self) -> QuotMatrix<S> {
        QuotMatrix { ring: self.ring.clone(), lift: -&self.lift }
    }
}
