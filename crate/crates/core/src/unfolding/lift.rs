//! Frobenius solutions at infinity over the dual numbers, the `dh`-component
//! `B` and the curvature of the lifted connection.
//!
//! Flat sections satisfy `dY/dz = -A/q Y`. In `w = 1/z` this reads
//! `w dY/dw = M(w) Y` with `M(w) = A~(w) / (1 - eps^m w^m)` and
//! `A~(w) = sum_i A_i w^{m-1-i}`, so `Y = U(w) w^Lambda` with
//! `Lambda = A_{m-1}` and `k U_k - [Lambda, U_k] = sum_{i>=1} M_i U_{k-i}`.
//!
//! `B = -U^1 (U^0)^{-1}` satisfies `dB/dz = (Xi~ - [A, B]) / q`, which in `w`
//! is a recursion for its coefficients with `b_0 = 0`. The coefficients are
//! taken from that recursion; inverting the series `U^0` loses accuracy at
//! high order and ruins the evaluation close to the divisor.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::Serialize;

use super::AdjustedXiFamily;
use crate::algebra::linalg::{ad_matrix, eigenvalues, mat_of, vec_of};
use crate::algebra::{cis, divisor_points, Dual, Mat, PolyMatrix, Scalar, Series, C64};
use crate::error::{Error, Result};

pub const DEFAULT_FROBENIUS_ORDER: usize = 24;
pub const MAX_FROBENIUS_ORDER: usize = 192;

/// Tail size, relative to the largest term, accepted on the annulus.
const TAIL_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub struct FrobeniusSolution {
    pub m: usize,
    pub eps: C64,
    pub lambda: Mat<C64>,
    /// `U_0 = I, U_1, .., U_K`.
    pub u: Vec<Mat<Dual>>,
    /// Max coefficient residual of the recursion, both `h`-components.
    pub residual: f64,
}

impl FrobeniusSolution {
    pub fn order(&self) -> usize {
        self.u.len() - 1
    }
}

fn m_coeffs(p: &PolyMatrix<Dual>, m: usize, eps: C64, k_max: usize) -> Vec<Mat<Dual>> {
    let r = p.size();
    let em = Dual::constant(eps.powu(m as u32));
    (0..=k_max)
        .map(|k| {
            let mut acc = Mat::zeros(r, r);
            let mut w = Dual::constant(C64::new(1.0, 0.0));
            let mut pm = 0;
            while pm <= k {
                let n = k - pm;
                if n < m {
                    acc = &acc + &p.coeff(m - 1 - n).scale(w);
                }
                w *= em;
                pm += m;
                if em.re.is_zero() {
                    break;
                }
            }
            acc
        })
        .collect()
}

/// Series solution at infinity of `d + (A + h Xi~) dz/q` to order `K`.
pub fn frobenius_infinity(
    a: &PolyMatrix<C64>,
    xt: &PolyMatrix<C64>,
    m: usize,
    eps: C64,
    order: usize,
) -> Result<FrobeniusSolution> {
    let r = a.size();
    let p = PolyMatrix::<Dual>::from_parts(&a.with_bound(m), &xt.with_bound(m));
    let mm = m_coeffs(&p, m, eps, order);
    let lambda = mm[0].base_part();
    let drift = mm[0].h_part().max_abs();
    if drift > 1e-9 * xt.max_abs().max(1.0) {
        return Err(Error::ResidueNotConstant(drift));
    }
    let ev = eigenvalues(&lambda);
    let ad = ad_matrix(&lambda);
    let mut u: Vec<Mat<Dual>> = vec![Mat::identity(r)];
    for k in 1..=order {
        for a_i in 0..r {
            for b_i in 0..r {
                if a_i != b_i && (ev[a_i] - ev[b_i] - C64::new(k as f64, 0.0)).norm() < 1e-8 {
                    return Err(Error::Resonance { k, a: a_i, b: b_i });
                }
            }
        }
        let mut rhs = Mat::zeros(r, r);
        for i in 1..=k {
            rhs = &rhs + &(&mm[i] * &u[k - i]);
        }
        let op = DMatrix::<C64>::identity(r * r, r * r) * C64::new(k as f64, 0.0) - &ad;
        let lu = op.lu();
        let solve = |b: &Mat<C64>| -> Result<Mat<C64>> {
            let x = lu.solve(&vec_of(b)).ok_or(Error::Resonance { k, a: 0, b: 0 })?;
            Ok(mat_of(x.as_slice(), r, r))
        };
        let u0 = solve(&rhs.base_part())?;
        let u1 = solve(&rhs.h_part())?;
        u.push(Mat::from_parts(&u0, &u1));
    }
    let lam_d = lambda.to_dual();
    let mut residual: f64 = 0.0;
    for k in 1..=order {
        let mut rhs = Mat::zeros(r, r);
        for i in 1..=k {
            rhs = &rhs + &(&mm[i] * &u[k - i]);
        }
        let lhs = &u[k].scale(Dual::from_f64(k as f64)) - &lam_d.commutator(&u[k]);
        let scale = rhs.max_abs().max(1.0);
        residual = residual.max((&lhs - &rhs).max_abs() / scale);
    }
    Ok(FrobeniusSolution { m, eps, lambda, u, residual })
}

/// `B = -(dY~/dh) Y^{-1}` as a series in `w = 1/z`, with its annulus.
#[derive(Clone, Debug)]
pub struct HorizontalLift {
    pub a: PolyMatrix<C64>,
    pub xt: PolyMatrix<C64>,
    pub m: usize,
    pub eps: C64,
    /// `B(z) = sum_k b_k z^{-k}`.
    pub b: Series<C64>,
    pub rho1: f64,
    pub rho2: f64,
    /// Number of retained Frobenius terms.
    pub order: usize,
    pub gauge: &'static str,
    /// Max distance between the recursion coefficients and those of
    /// `-U^1 (U^0)^{-1}` over the first `m + 8` orders, relative.
    pub series_agreement: f64,
}

impl HorizontalLift {
    pub fn b_at(&self, z: C64) -> Mat<C64> {
        self.b.eval(z.inv())
    }

    /// `dB/dz = sum_k -k b_k z^{-k-1}`.
    pub fn db_at(&self, z: C64) -> Mat<C64> {
        let w = z.inv();
        self.b.derivative().eval(w).scale(-w * w)
    }
}

/// Coefficients `b_0 = 0, b_1, .., b_K` of `B(w)` from
/// `(k - ad Lambda) b_k = -X_k + sum_{1<=i<m} [A~_i, b_{k-i}] + eps^m (k-m) b_{k-m}`
/// with `X(w) = w^{m-1} Xi~(1/w)`.
fn b_recursion(frob: &FrobeniusSolution, a: &PolyMatrix<C64>, xt: &PolyMatrix<C64>) -> Result<Vec<Mat<C64>>> {
    let (m, r, k_max) = (frob.m, frob.lambda.rows(), frob.order());
    let em = frob.eps.powu(m as u32);
    let at: Vec<Mat<C64>> = (0..m).map(|i| a.coeff(m - 1 - i)).collect();
    let ad = ad_matrix(&frob.lambda);
    let mut b = vec![Mat::zeros(r, r)];
    for k in 1..=k_max {
        let mut rhs = if k < m { -&xt.coeff(m - 1 - k) } else { Mat::zeros(r, r) };
        for i in 1..m.min(k + 1) {
            rhs = &rhs + &at[i].commutator(&b[k - i]);
        }
        if k >= m {
            rhs = &rhs + &b[k - m].scale(em * (k - m) as f64);
        }
        let op = DMatrix::<C64>::identity(r * r, r * r) * C64::new(k as f64, 0.0) - &ad;
        let x = op.lu().solve(&vec_of(&rhs)).ok_or(Error::Resonance { k, a: 0, b: 0 })?;
        b.push(mat_of(x.as_slice(), r, r));
    }
    Ok(b)
}

pub fn b_matrix(frob: &FrobeniusSolution, a: &PolyMatrix<C64>, xt: &PolyMatrix<C64>) -> Result<HorizontalLift> {
    let r = frob.lambda.rows();
    let k = frob.order() as i64;
    let coeffs = b_recursion(frob, a, xt)?;
    let check = (frob.m + 8).min(frob.order());
    let u0 = Series::new(r, 0, frob.u[..=check].iter().map(|x| x.base_part()).collect());
    let u1 = Series::new(r, 0, frob.u[..=check].iter().map(|x| x.h_part()).collect());
    let direct = (&u1 * &u0.inverse()?).scale(C64::new(-1.0, 0.0));
    let scale = coeffs.iter().map(|c| c.max_abs()).fold(1.0, f64::max);
    let series_agreement = (0..=check)
        .map(|e| (&direct.coeff(e as i64) - &coeffs[e]).max_abs() / scale)
        .fold(0.0, f64::max);
    let b = Series::new(r, 0, coeffs);
    let (spectral, tail) = annulus_radii(&b, k, frob.m, frob.eps);
    let rho1 = spectral.max(tail);
    Ok(HorizontalLift {
        a: a.with_bound(frob.m),
        xt: xt.with_bound(frob.m),
        m: frob.m,
        eps: frob.eps,
        b,
        rho1,
        rho2: 2.0 * rho1,
        order: frob.order(),
        gauge: "U_0 = I at infinity",
        series_agreement,
    })
}

/// Frobenius solution and `B`, doubling the order from `order` (up to
/// `MAX_FROBENIUS_ORDER`) until truncation no longer limits the annulus.
pub fn horizontal_lift(
    a: &PolyMatrix<C64>,
    xt: &PolyMatrix<C64>,
    m: usize,
    eps: C64,
    order: usize,
) -> Result<HorizontalLift> {
    let mut k = order.max(1);
    loop {
        let frob = frobenius_infinity(a, xt, m, eps, k)?;
        let lift = b_matrix(&frob, a, xt)?;
        let (spectral, tail) = annulus_radii(&lift.b, k as i64, m, eps);
        if tail <= spectral || 2 * k > MAX_FROBENIUS_ORDER {
            return Ok(lift);
        }
        k *= 2;
    }
}

/// `(spectral, tail)`: twice the larger of `|eps|` and a root-test estimate
/// of the singular radius, and the radius beyond which the last `2m`
/// retained terms (with their derivative weights) are below `TAIL_TOL` of
/// the largest term.
fn annulus_radii(b: &Series<C64>, k: i64, m: usize, eps: C64) -> (f64, f64) {
    let norms: Vec<f64> = (0..=k).map(|e| b.coeff(e).max_abs()).collect();
    let big = norms.iter().cloned().fold(0.0, f64::max);
    let floor = (2.0 * eps.norm()).max(1e-3);
    if big == 0.0 {
        return (floor, 0.0);
    }
    let est = (k / 2..=k)
        .filter(|&e| e > 0 && norms[e as usize] > 0.0)
        .map(|e| (norms[e as usize] / big).powf(1.0 / e as f64))
        .fold(0.0, f64::max);
    let tail = ((k - 2 * m as i64 + 1).max(1)..=k)
        .map(|e| (norms[e as usize] * (e as f64 + 1.0) / (TAIL_TOL * big)).powf(1.0 / e as f64))
        .fold(0.0, f64::max);
    (floor.max(2.0 * est), tail)
}

/// `n_angles` points on each of the two boundary circles of the annulus.
pub fn annulus_grid(lift: &HorizontalLift, n_angles: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(2 * n_angles);
    for rad in [lift.rho1, lift.rho2] {
        for i in 0..n_angles {
            let t = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n_angles as f64;
            out.push(cis(t) * rad);
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureReport {
    /// Max of `|dB/dz - Xi~/q + [A, B]/q|` over the grid.
    pub h0: f64,
    /// Max of `|[Xi~, B]/q|`, the coefficient of `h dz^dh`, which vanishes
    /// in the forms over `C[h]/(h^2)` since `h dh = d(h^2)/2 = 0`.
    pub h_dh_coefficient: f64,
    pub points: usize,
}

pub fn curvature_check(lift: &HorizontalLift, grid: &[C64]) -> Result<CurvatureReport> {
    let m = lift.m;
    let em = lift.eps.powu(m as u32);
    let pts = divisor_points(m, lift.eps);
    let mut rep = CurvatureReport { h0: 0.0, h_dh_coefficient: 0.0, points: grid.len() };
    for &z in grid {
        let rad = z.norm();
        let inside = rad >= lift.rho1 * (1.0 - 1e-9) && rad <= lift.rho2 * (1.0 + 1e-9);
        if !inside || pts.iter().any(|p| (z - p).norm() < 1e-12) {
            return Err(Error::OutsideDomain(z));
        }
        let qinv = (z.powu(m as u32) - em).inv();
        let b = lift.b_at(z);
        let a = lift.a.eval(z);
        let xt = lift.xt.eval(z);
        let res = &(&lift.db_at(z) - &xt.scale(qinv)) + &a.commutator(&b).scale(qinv);
        rep.h0 = rep.h0.max(res.max_abs());
        rep.h_dh_coefficient = rep.h_dh_coefficient.max(xt.commutator(&b).scale(qinv).max_abs());
    }
    Ok(rep)
}

/// Lifts `B_{l,j}` for every adjusted direction (`j <= m-2`).
pub fn build_lifts(adj: &AdjustedXiFamily, order: usize) -> Result<Vec<Vec<Option<HorizontalLift>>>> {
    let fam = &adj.base;
    let (r, m, eps) = (fam.r(), fam.m(), fam.eps());
    let mut out = vec![vec![None; m]; r];
    for l in 0..r {
        for j in 0..m {
            if adj.adjusted[l][j] {
                out[l][j] = Some(horizontal_lift(&fam.conn.a, &adj.xitilde[l][j], m, eps, order)?);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct DirectionLift {
    /// `A + h sum v_{l,j} Xi~_{l,j}`.
    pub a_dual: PolyMatrix<Dual>,
    /// Combined lift with `B_v = sum v_{l,j} B_{l,j}`.
    pub lift: HorizontalLift,
}

/// First-order deformation in the exponent direction `v[l][j]`. The
/// `j = m-1` entries move `lambda` and must vanish.
pub fn isomonodromy_direction(
    adj: &AdjustedXiFamily,
    lifts: &[Vec<Option<HorizontalLift>>],
    v: &[Vec<C64>],
) -> Result<DirectionLift> {
    let fam = &adj.base;
    let (r, m, eps) = (fam.r(), fam.m(), fam.eps());
    if v.len() != r || v.iter().any(|row| row.len() != m) {
        return Err(Error::ShapeMismatch(format!("direction must be {r}x{m}")));
    }
    for (l, row) in v.iter().enumerate() {
        if row[m - 1] != C64::zero() {
            return Err(Error::LambdaViolation(l));
        }
    }
    let mut xt = PolyMatrix::zeros(r, m);
    let mut b = Series::zero(r, 0, 1);
    let mut rho1: f64 = 0.0;
    let mut k_min = usize::MAX;
    let mut first = true;
    for l in 0..r {
        for j in 0..m - 1 {
            if v[l][j] == C64::zero() {
                continue;
            }
            let lj = lifts[l][j].as_ref().ok_or_else(|| Error::GaugeUnavailable(format!("no lift for ({l}, {j})")))?;
            xt = &xt + &adj.xitilde[l][j].scale(v[l][j]);
            let term = lj.b.scale(v[l][j]);
            b = if first { term } else { &b + &term };
            first = false;
            rho1 = rho1.max(lj.rho1);
            k_min = k_min.min(lj.order);
        }
    }
    if first {
        rho1 = (2.0 * eps.norm()).max(1e-3);
    }
    let lift = HorizontalLift {
        a: fam.conn.a.clone(),
        xt: xt.clone(),
        m,
        eps,
        b,
        rho1,
        rho2: 2.0 * rho1,
        order: if first { 0 } else { k_min },
        gauge: "U_0 = I at infinity",
        series_agreement: 0.0,
    };
    Ok(DirectionLift { a_dual: PolyMatrix::from_parts(&fam.conn.a, &xt), lift })
}
