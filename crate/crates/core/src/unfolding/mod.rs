//! First-order horizontal lifts of an unfolded connection.
//!
//! For each exponent direction `(l, j)` the pipeline builds `Xi_{l,j}`
//! (the lift of `z^j N^l`), removes its residue at infinity with adjusting
//! data `R`, and integrates the resulting dual-number connection at infinity
//! to obtain the `dh`-component `B_{l,j}`. At `eps = 0` a formal
//! diagonalizing gauge gives the irregular counterpart.

mod irregular;
mod lift;

pub use irregular::{
    default_gauge_order, family_distance, gauge_diagonalize_eps0, irregular_lift_eps0, GaugeSeries, IrregularLift,
    IrregularResiduals,
};
pub use lift::{
    annulus_grid, b_matrix, build_lifts, curvature_check, frobenius_infinity, horizontal_lift,
    isomonodromy_direction, CurvatureReport, DirectionLift, FrobeniusSolution, HorizontalLift,
    DEFAULT_FROBENIUS_ORDER, MAX_FROBENIUS_ORDER,
};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::algebra::linalg::{ad_matrix, joint_commutant_dim, mat_of, vec_of, PseudoInverse};
use crate::algebra::{residue_at_infinity, Mat, Poly, PolyMatrix, QuotMatrix, C64};
use crate::connection::{interpolation_poly, UnfoldedConnection};
use crate::error::{Error, Result};

/// Residual bound for the adjusting-data solve, relative to the target.
pub const ADJUST_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct XiFamily {
    pub conn: UnfoldedConnection,
    /// Ring coefficients of the interpolation polynomial `psi(T)`.
    pub psi: Vec<Poly<C64>>,
    /// `xi[l][j]`, `z`-degree `< m`.
    pub xi: Vec<Vec<PolyMatrix<C64>>>,
}

impl XiFamily {
    pub fn r(&self) -> usize {
        self.conn.spec.r
    }

    pub fn m(&self) -> usize {
        self.conn.spec.m
    }

    pub fn eps(&self) -> C64 {
        self.conn.spec.epsilon
    }
}

pub fn build_xi(conn: &UnfoldedConnection) -> Result<XiFamily> {
    let spec = &conn.spec;
    let ring = spec.ring();
    let (r, m) = (spec.r, spec.m);
    let psi = interpolation_poly(spec)?;
    let n = conn.a_mod().poly_eval(&psi);
    let mut xi = Vec::with_capacity(r);
    let mut nl = QuotMatrix::identity(&ring, r);
    for _ in 0..r {
        let row = (0..m)
            .map(|j| nl.scale_elem(&Poly::monomial(C64::new(1.0, 0.0), j)).lift().with_bound(m))
            .collect();
        xi.push(row);
        nl = &nl * &n;
    }
    Ok(XiFamily { conn: conn.clone(), psi, xi })
}

#[derive(Clone, Debug, Serialize)]
pub struct XiReport {
    /// Max `|res_inf Tr(Xi_{l,j} dz/q)|` over `j <= m-2`.
    pub trace_residue: f64,
    /// `|A - sum c_{l,j} Xi_{l,j}|`.
    pub reconstruction: f64,
}

pub fn xi_report(fam: &XiFamily) -> XiReport {
    let (r, m, eps) = (fam.r(), fam.m(), fam.eps());
    let mut trace_residue: f64 = 0.0;
    let mut sum = PolyMatrix::zeros(r, m);
    for l in 0..r {
        for j in 0..m {
            let x = &fam.xi[l][j];
            if j + 2 <= m {
                trace_residue = trace_residue.max(residue_at_infinity(x, m, eps).trace().norm());
            }
            sum = &sum + &x.scale(fam.conn.spec.c[l][j]);
        }
    }
    XiReport { trace_residue, reconstruction: (&sum - &fam.conn.a).max_abs() }
}

/// Least-norm solver for `sum_{l'} [A_{m-l'-1}, R_{l'}] = T`.
#[derive(Clone, Debug)]
pub struct AdjustingSolver {
    r: usize,
    m: usize,
    op: PseudoInverse,
    /// Dimension of `ker` of the stacked commutator map.
    pub kernel_dim: usize,
}

impl AdjustingSolver {
    pub fn new(a: &PolyMatrix<C64>, m: usize) -> Result<Self> {
        let r = a.size();
        let coeffs: Vec<Mat<C64>> = (0..m).map(|i| a.coeff(i)).collect();
        if m >= 2 {
            let dim = joint_commutant_dim(&coeffs);
            if dim > 1 {
                return Err(Error::CommutantTooBig(dim));
            }
        }
        let mut stacked = DMatrix::<C64>::zeros(r * r, m * r * r);
        for lp in 0..m {
            stacked
                .view_mut((0, lp * r * r), (r * r, r * r))
                .copy_from(&ad_matrix(&coeffs[m - lp - 1]));
        }
        let op = PseudoInverse::new(&stacked);
        let kernel_dim = m * r * r - op.rank;
        Ok(AdjustingSolver { r, m, op, kernel_dim })
    }

    /// `(R_0, .., R_{m-1})` and the residual norm.
    pub fn solve(&self, target: &Mat<C64>) -> (Vec<Mat<C64>>, f64) {
        let (x, res) = self.op.solve(&vec_of(target));
        let rr = self.r * self.r;
        let blocks = (0..self.m).map(|lp| mat_of(&x.as_slice()[lp * rr..(lp + 1) * rr], self.r, self.r)).collect();
        (blocks, res)
    }

    /// `sum_{l'} [A_{m-l'-1}, R_{l'}]`.
    pub fn apply(a: &PolyMatrix<C64>, rs: &[Mat<C64>]) -> Mat<C64> {
        let m = rs.len();
        let mut acc = Mat::zeros(a.size(), a.size());
        for (lp, r) in rs.iter().enumerate() {
            acc = &acc + &a.coeff(m - lp - 1).commutator(r);
        }
        acc
    }

    /// Basis of the kernel of the stacked map, each as `(R_0, .., R_{m-1})`.
    pub fn kernel(a: &PolyMatrix<C64>, m: usize) -> Vec<Vec<Mat<C64>>> {
        let r = a.size();
        let mut stacked = DMatrix::<C64>::zeros(r * r, m * r * r);
        for lp in 0..m {
            stacked.view_mut((0, lp * r * r), (r * r, r * r)).copy_from(&ad_matrix(&a.coeff(m - lp - 1)));
        }
        let ns = crate::algebra::linalg::nullspace(&stacked, 1e-10);
        (0..ns.ncols())
            .map(|c| {
                let col: DVector<C64> = ns.column(c).into();
                (0..m).map(|lp| mat_of(&col.as_slice()[lp * r * r..(lp + 1) * r * r], r, r)).collect()
            })
            .collect()
    }
}

/// `Xi - ([A, R(z)] mod (z^m - eps^m))` with `R(z) = sum R_{l'} z^{l'}`.
pub fn adjust(conn: &UnfoldedConnection, xi: &PolyMatrix<C64>, rs: &[Mat<C64>]) -> PolyMatrix<C64> {
    let m = conn.spec.m;
    let rz = PolyMatrix::new(conn.spec.r, rs.to_vec());
    let comm = QuotMatrix::from_poly(&conn.ring(), &conn.a.commutator(&rz));
    (xi - comm.lift()).with_bound(m)
}

#[derive(Clone, Debug)]
pub struct AdjustedXiFamily {
    pub base: XiFamily,
    /// `r_data[l][j][l']`.
    pub r_data: Vec<Vec<Vec<Mat<C64>>>>,
    pub xitilde: Vec<Vec<PolyMatrix<C64>>>,
    /// `false` for `j = m-1`, which is stored unadjusted.
    pub adjusted: Vec<Vec<bool>>,
    pub kernel_dim: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdjustedReport {
    /// Max relative residual of the commutator identity.
    pub commutator_residual: f64,
    /// Max `|res_inf(Xi~ dz/q)|` over adjusted entries.
    pub residue: f64,
    /// Max deviation of `Xi~|_D` from `z^j psi(A)^l|_D - [A, R]|_D`.
    pub divisor_restriction: f64,
}

pub fn solve_adjusting_data(fam: &XiFamily) -> Result<AdjustedXiFamily> {
    let (r, m) = (fam.r(), fam.m());
    let conn = &fam.conn;
    let solver = AdjustingSolver::new(&conn.a, m)?;
    let mut r_data = vec![vec![vec![Mat::zeros(r, r); m]; m]; r];
    let mut xitilde = fam.xi.clone();
    let mut adjusted = vec![vec![false; m]; r];
    for l in 0..r {
        for j in 0..m.saturating_sub(1) {
            let target = fam.xi[l][j].coeff(m - 1);
            let (rs, res) = solver.solve(&target);
            let bound = ADJUST_TOL * target.norm();
            if res > bound && res > 1e-13 {
                return Err(Error::Unsolvable { residual: res, bound });
            }
            xitilde[l][j] = adjust(conn, &fam.xi[l][j], &rs);
            r_data[l][j] = rs;
            adjusted[l][j] = true;
        }
    }
    Ok(AdjustedXiFamily { base: fam.clone(), r_data, xitilde, adjusted, kernel_dim: solver.kernel_dim })
}

pub fn adjusted_report(adj: &AdjustedXiFamily) -> AdjustedReport {
    let fam = &adj.base;
    let (r, m, eps) = (fam.r(), fam.m(), fam.eps());
    let a = &fam.conn.a;
    let pts = fam.conn.spec.points();
    let mut rep = AdjustedReport { commutator_residual: 0.0, residue: 0.0, divisor_restriction: 0.0 };
    for l in 0..r {
        for j in 0..m {
            if !adj.adjusted[l][j] {
                continue;
            }
            let rs = &adj.r_data[l][j];
            let target = fam.xi[l][j].coeff(m - 1);
            let lhs = AdjustingSolver::apply(a, rs);
            let rel = (&lhs - &target).norm() / target.norm().max(1.0);
            rep.commutator_residual = rep.commutator_residual.max(rel);
            let xt = &adj.xitilde[l][j];
            rep.residue = rep.residue.max(residue_at_infinity(xt, m, eps).max_abs());
            let rz = PolyMatrix::new(r, rs.clone());
            for &p in &pts {
                let expect = &fam.xi[l][j].eval(p) - &a.eval(p).commutator(&rz.eval(p));
                rep.divisor_restriction = rep.divisor_restriction.max((&xt.eval(p) - &expect).max_abs());
            }
        }
    }
    rep
}

#[derive(Clone, Debug, Serialize)]
pub struct XiJson {
    pub l: usize,
    pub j: usize,
    pub adjusted: bool,
    pub xi: Vec<Vec<Vec<C64>>>,
    pub r: Vec<Vec<Vec<C64>>>,
    pub xitilde: Vec<Vec<Vec<C64>>>,
}

pub fn family_json(adj: &AdjustedXiFamily) -> Vec<XiJson> {
    let rows = |p: &PolyMatrix<C64>| p.coeffs().iter().map(|c| c.to_rows()).collect();
    let mut out = Vec::new();
    for l in 0..adj.base.r() {
        for j in 0..adj.base.m() {
            out.push(XiJson {
                l,
                j,
                adjusted: adj.adjusted[l][j],
                xi: rows(&adj.base.xi[l][j]),
                r: adj.r_data[l][j].iter().map(|c| c.to_rows()).collect(),
                xitilde: rows(&adj.xitilde[l][j]),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests;
