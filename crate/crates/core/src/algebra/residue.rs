//! Rational one-forms `A(z) dz / q(z)`, partial fractions and residues.

use num_traits::{One, Zero};

use super::mat::Mat;
use super::poly::Poly;
use super::polymat::PolyMatrix;
use super::scalar::{divisor_points, C64};
use crate::error::{Error, Result};

/// `numerator(z) dz / denominator(z)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalForm {
    pub numerator: PolyMatrix<C64>,
    pub denominator: Poly<C64>,
}

impl RationalForm {
    /// `A(z) dz / (z^m - eps^m)`.
    pub fn unfolded(a: PolyMatrix<C64>, m: usize, eps: C64) -> Self {
        let mut q = vec![C64::zero(); m + 1];
        q[0] = -eps.powu(m as u32);
        q[m] = C64::one();
        RationalForm { numerator: a, denominator: Poly::new(q) }
    }
}

/// Simple-pole expansion `A/q = sum_j C_j / (z - rho_j)` with
/// `C_j = A(rho_j) / q'(rho_j)`. Requires `deg A < deg q`.
pub fn partial_fractions(f: &RationalForm, roots: &[C64]) -> Result<Vec<(C64, Mat<C64>)>> {
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() <= 1e-12 * scale {
                return Err(Error::RepeatedRoot(i, j));
            }
        }
    }
    let dq = f.denominator.derivative();
    Ok(roots
        .iter()
        .map(|&rho| (rho, f.numerator.eval(rho).scale(dq.eval(rho).inv())))
        .collect())
}

/// `sum_j C_j q(z)/(z - rho_j)`, the numerator recovered from a partial
/// fraction expansion over the monic denominator `q`.
pub fn recombine(q: &Poly<C64>, parts: &[(C64, Mat<C64>)]) -> PolyMatrix<C64> {
    let r = parts.first().map_or(0, |p| p.1.rows());
    let deg = q.degree().unwrap_or(0);
    let mut out = PolyMatrix::zeros(r, deg);
    for (rho, c) in parts {
        let (basis, _) = q.div_rem_monic(&Poly::new(vec![-rho, C64::one()]));
        let term = PolyMatrix::new(r, basis.coeffs().iter().map(|&b| c.scale(b)).collect());
        out = &out + &term;
    }
    out
}

/// Residues of `A dz / (z^m - eps^m)` at the `m` simple poles (`eps != 0`).
pub fn finite_residues(a: &PolyMatrix<C64>, m: usize, eps: C64) -> Vec<(C64, Mat<C64>)> {
    let q = RationalForm::unfolded(a.clone(), m, eps);
    let dq = q.denominator.derivative();
    divisor_points(m, eps)
        .into_iter()
        .map(|rho| (rho, a.eval(rho).scale(dq.eval(rho).inv())))
        .collect()
}

/// `res_{z=inf} A(z) dz / (z^m - eps^m) = -sum_{p>=0} eps^{pm} A_{pm+m-1}`.
pub fn residue_at_infinity(a: &PolyMatrix<C64>, m: usize, eps: C64) -> Mat<C64> {
    let r = a.size();
    let em = eps.powu(m as u32);
    let mut acc = Mat::zeros(r, r);
    let mut w = C64::one();
    let mut idx = m - 1;
    while idx < a.bound() {
        acc = &acc + &a.coeff(idx).scale(w);
        w *= em;
        idx += m;
    }
    acc.scale(-C64::one())
}

/// Sum of the finite residues of `dz / prod_s (z - p_s)^{1 - l_s}`.
///
/// Points may repeat; residues at multiple poles come from the Taylor
/// expansion of the remaining factors. The result vanishes whenever the
/// total pole order is at least 2.
pub fn residue_sum_check(points: &[C64], l: &[u8]) -> Result<C64> {
    if points.len() != l.len() || l.iter().any(|&x| x > 1) {
        return Err(Error::InvalidParameter("exponents must be 0 or 1, one per point".into()));
    }
    if points.len() < 2 {
        return Err(Error::InvalidParameter("need m >= 2 points".into()));
    }
    // distinct poles with multiplicities
    let mut poles: Vec<(C64, usize)> = Vec::new();
    for (&p, &ls) in points.iter().zip(l) {
        if ls == 1 {
            continue;
        }
        match poles.iter_mut().find(|(q, _)| *q == p) {
            Some(e) => e.1 += 1,
            None => poles.push((p, 1)),
        }
    }
    let total: usize = poles.iter().map(|p| p.1).sum();
    if total < 2 {
        return Err(Error::DegenerateOrder(total));
    }
    Ok(residues_of_reciprocal(&poles).into_iter().sum())
}

/// Residue of `1 / prod (z - a)^e_a` at each listed pole.
pub fn residues_of_reciprocal(poles: &[(C64, usize)]) -> Vec<C64> {
    poles
        .iter()
        .enumerate()
        .map(|(i, &(a, e))| {
            // Taylor coefficients in t = z - a of prod_{b != a} (a - b + t)^{-e_b}
            let mut series = vec![C64::zero(); e];
            series[0] = C64::one();
            for (k, &(b, eb)) in poles.iter().enumerate() {
                if k == i {
                    continue;
                }
                let d = a - b;
                let factor: Vec<C64> = (0..e)
                    .map(|n| binom_neg(eb, n) * d.powi(-(eb as i32) - n as i32))
                    .collect();
                series = (0..e)
                    .map(|n| (0..=n).map(|j| series[j] * factor[n - j]).sum())
                    .collect();
            }
            series[e - 1]
        })
        .collect()
}

/// `binom(-e, n) = (-1)^n binom(e + n - 1, n)`.
fn binom_neg(e: usize, n: usize) -> f64 {
    let mut b = 1.0;
    for k in 0..n {
        b *= (e + k) as f64 / (k + 1) as f64;
    }
    if n % 2 == 1 {
        -b
    } else {
        b
    }
}
