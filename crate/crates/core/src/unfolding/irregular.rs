//! Formal diagonalization at the irregular point `eps = 0` and the
//! corresponding lifts `B_{l,j}` as Laurent series in `z`.

use serde::Serialize;

use super::AdjustedXiFamily;
use crate::algebra::linalg::{eigenvalues, eigenvector_matrix, match_spectrum};
use crate::algebra::{Mat, PolyMatrix, Series, C64};
use crate::connection::MATCH_TOL;
use crate::error::{Error, Result};

/// Default truncation of the formal gauge.
pub fn default_gauge_order(m: usize) -> usize {
    4 * m
}

/// Formal gauge `P = P_0 G(z)` with `A P + z^m P' = P D`, `D` diagonal.
#[derive(Clone, Debug)]
pub struct GaugeSeries {
    pub m: usize,
    pub p0: Mat<C64>,
    /// `G_0 = I, G_1, .., G_K` with zero diagonals for `n >= 1`.
    pub g: Vec<Mat<C64>>,
    /// Diagonals of `D_0, .., D_K`.
    pub d: Vec<Vec<C64>>,
    /// Max coefficient residual of `A~ G + z^m G' - G D`, relative.
    pub residual: f64,
}

impl GaugeSeries {
    pub fn order(&self) -> usize {
        self.g.len() - 1
    }

    pub fn p(&self) -> Series<C64> {
        Series::new(self.p0.rows(), 0, self.g.iter().map(|g| &self.p0 * g).collect())
    }

    pub fn d_series(&self) -> Series<C64> {
        Series::new(self.p0.rows(), 0, self.d.iter().map(|d| Mat::from_diag(d)).collect())
    }
}

pub fn gauge_diagonalize_eps0(adj: &AdjustedXiFamily, order: usize) -> Result<GaugeSeries> {
    let fam = &adj.base;
    let (r, m, eps) = (fam.r(), fam.m(), fam.eps());
    if eps != C64::new(0.0, 0.0) {
        return Err(Error::WrongStratum(format!("formal gauge needs eps = 0, got {eps}")));
    }
    if order < m {
        return Err(Error::InsufficientOrder { order, needed: m });
    }
    let spec = &fam.conn.spec;
    let a = &fam.conn.a;
    let nu0: Vec<C64> = (0..r).map(|k| spec.nu(k).coeff(0)).collect();
    for i in 0..r {
        for k in i + 1..r {
            if (nu0[i] - nu0[k]).norm() < 1e-8 {
                return Err(Error::ResonantLeading(i, k));
            }
        }
    }
    let a0 = a.coeff(0);
    let ev = eigenvalues(&a0);
    let scale = a0.max_abs().max(1.0);
    let perm = match_spectrum(&ev, &nu0, MATCH_TOL * scale).map_err(|k| Error::SpectralMismatch {
        root: C64::new(0.0, 0.0),
        detail: format!("A(0) has no eigenvalue near nu_{k}(0)"),
    })?;
    let lam: Vec<C64> = perm.iter().map(|&i| ev[i]).collect();
    let p0 = eigenvector_matrix(&a0, &lam);
    let p0inv = p0.inverse()?;
    let at: Vec<Mat<C64>> = (0..=order).map(|i| &(&p0inv * &a.coeff(i)) * &p0).collect();

    let mut g = vec![Mat::identity(r)];
    let mut d = vec![lam.clone()];
    for n in 1..=order {
        let mut rhs = at[n].clone();
        for i in 1..n {
            rhs = &rhs + &(&(&at[i] * &g[n - i]) - &(&g[n - i] * &Mat::from_diag(&d[i])));
        }
        let shift = if m == 1 { n as f64 } else { 0.0 };
        if m >= 2 && n + 1 >= m {
            let k = n + 1 - m;
            rhs = &rhs + &g[k].scale(C64::new(k as f64, 0.0));
        }
        let mut gn = Mat::zeros(r, r);
        for ai in 0..r {
            for bi in 0..r {
                if ai == bi {
                    continue;
                }
                let den = lam[ai] - lam[bi] + shift;
                if den.norm() < 1e-8 {
                    return Err(Error::Resonance { k: n, a: ai, b: bi });
                }
                gn[(ai, bi)] = -rhs[(ai, bi)] / den;
            }
        }
        d.push(rhs.diag());
        g.push(gn);
    }

    let mut gs = GaugeSeries { m, p0, g, d, residual: 0.0 };
    gs.residual = gauge_residual(&gs, &at);
    Ok(gs)
}

fn gauge_residual(gs: &GaugeSeries, at: &[Mat<C64>]) -> f64 {
    let k = gs.order();
    let m = gs.m;
    let mut worst: f64 = 0.0;
    for n in 0..=k {
        let mut lhs = Mat::zeros(gs.p0.rows(), gs.p0.rows());
        for i in 0..=n {
            lhs = &lhs + &(&(&at[i] * &gs.g[n - i]) - &(&gs.g[n - i] * &Mat::from_diag(&gs.d[i])));
        }
        if n + 1 >= m {
            let e = n + 1 - m;
            lhs = &lhs + &gs.g[e].scale(C64::new(e as f64, 0.0));
        }
        let scale = at[n].max_abs().max(gs.g[n].max_abs()).max(1.0);
        worst = worst.max(lhs.max_abs() / scale);
    }
    worst
}

#[derive(Clone, Debug)]
pub struct IrregularLift {
    pub l: usize,
    pub j: usize,
    /// `P E P^{-1}` with `E = Diag(mu^l) z^{j-m+1} / (j-m+1)`.
    pub b0: Series<C64>,
    /// `b0 - R(z)`.
    pub b: Series<C64>,
    pub residuals: IrregularResiduals,
}

#[derive(Clone, Debug, Serialize)]
pub struct IrregularResiduals {
    /// `|z^m dB0 + [A, B0] - P z^j Diag(mu^l) P^{-1}|` through `z^{K-m}`,
    /// relative.
    pub identity: f64,
    /// `|P z^j Diag(mu^l) P^{-1} mod z^m - Xi_{l,j}|`.
    pub reduction: f64,
    /// Polar part of `z^m dB + [A, B] - Xi~`, i.e. exponents `< m`.
    pub polar: f64,
    /// Exponents `>= m` of the same, which a finite `R` does not remove.
    pub holomorphic: f64,
    pub prec: i64,
}

pub fn irregular_lift_eps0(adj: &AdjustedXiFamily, gauge: &GaugeSeries, l: usize, j: usize) -> Result<IrregularLift> {
    let fam = &adj.base;
    let (r, m) = (fam.r(), fam.m());
    if l >= r || j >= m {
        return Err(Error::InvalidParameter(format!("direction ({l}, {j}) out of range")));
    }
    if j + 1 >= m {
        return Err(Error::LogTerm);
    }
    let k = gauge.order();
    let needed = 2 * m - 2 - j;
    if k < needed {
        return Err(Error::InsufficientOrder { order: k, needed });
    }
    let e = j as i64 - m as i64 + 1;
    let n = k + 1;
    let mul: Vec<C64> = fam.conn.spec.mu.iter().map(|mu| mu.powu(l as u32)).collect();
    let p = gauge.p();
    let pinv = p.inverse()?;

    let mut ecoef = vec![Mat::zeros(r, r); n];
    ecoef[0] = Mat::from_diag(&mul).scale(C64::new(1.0 / e as f64, 0.0));
    let b0 = &(&p * &Series::new(r, e, ecoef)) * &pinv;
    let mut dcoef = vec![Mat::zeros(r, r); n];
    dcoef[0] = Mat::from_diag(&mul);
    let target = &(&p * &Series::new(r, j as i64, dcoef)) * &pinv;

    let a = Series::from_poly(&fam.conn.a, n as i64 + m as i64);
    let curv = |b: &Series<C64>| &b.derivative().shift(m as i64) + &a.commutator(b);

    let lhs = curv(&b0);
    let prec = lhs.prec();
    let scale = target.max_abs().max(1.0);
    let through = k as i64 - m as i64 + 1;
    let identity = (&lhs - &target).max_abs_range(e, through) / scale;
    let xi = &fam.xi[l][j];
    let reduction = (0..m as i64)
        .map(|ex| (&target.coeff(ex) - &xi.coeff(ex as usize)).max_abs())
        .fold(0.0, f64::max);

    let mut rcoef = adj.r_data[l][j].clone();
    rcoef.resize((b0.prec().max(m as i64)) as usize, Mat::zeros(r, r));
    let b = &b0 - &Series::new(r, 0, rcoef);
    let xt = Series::from_poly(&adj.xitilde[l][j], prec);
    let defect = &curv(&b) - &xt;
    let dscale = xt.max_abs().max(1.0);
    let residuals = IrregularResiduals {
        identity,
        reduction,
        polar: defect.max_abs_range(defect.low(), m as i64) / dscale,
        holomorphic: defect.max_abs_range(m as i64, defect.prec()) / dscale,
        prec: defect.prec(),
    };
    Ok(IrregularLift { l, j, b0, b, residuals })
}

/// Max coefficient distance between two `Xi~` families of the same shape.
pub fn family_distance(a: &[Vec<PolyMatrix<C64>>], b: &[Vec<PolyMatrix<C64>>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb))
        .map(|(x, y)| (x - y).max_abs())
        .fold(0.0, f64::max)
}
