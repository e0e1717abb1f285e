//! Rank-two, `m = 2` confluence demo: `(A0 + A1 z) dz / (z^2 - eps^2)`
//! followed through the full pipeline at several values of `eps`.
//!
//! Besides the per-stage residuals it checks the ambiguity of adjusting
//! data. Adding the kernel element `(a A0 + b A1, c A0 + a A1)` to `(R0, R1)`
//! lowers `Xi~` by `(b - eps^2 c)[A0, A1]`, and the two relative connections
//! are conjugate under `I - h (b - eps^2 c) A1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::algebra::linalg::{eigenvalues, lstsq, vec_of};
use crate::algebra::{Mat, PolyMatrix, QuotMatrix, C64};
use crate::connection::{connection_from_n, local_data, make_spec, random_n, LocalReport, UnfoldedConnection};
use crate::error::{Error, Result};
use crate::flows::{big_loop_monodromy, local_monodromy, monodromy_invariance_check, InvarianceReport};
use crate::random::rng;
use crate::unfolding::{
    adjust, adjusted_report, annulus_grid, build_lifts, build_xi, curvature_check, default_gauge_order, family_json,
    gauge_diagonalize_eps0, irregular_lift_eps0, isomonodromy_direction, solve_adjusting_data, xi_report,
    AdjustedReport, AdjustingSolver, IrregularResiduals, XiJson, XiReport, DEFAULT_FROBENIUS_ORDER,
};

/// Thresholds applied by the demo; they match the acceptance suite.
pub mod tol {
    pub const RECONSTRUCTION: f64 = 1e-10;
    pub const TRACE_RESIDUE: f64 = 1e-10;
    pub const COMMUTATOR: f64 = 1e-9;
    pub const RESIDUE: f64 = 1e-10;
    pub const CURVATURE: f64 = 1e-8;
    pub const SERIES_IDENTITY: f64 = 1e-9;
    pub const LOCAL_MONODROMY: f64 = 1e-6;
    pub const TRACE_H: f64 = 1e-6;
    pub const GAUGE: f64 = 1e-9;
    /// Distance to the nearest integer below which exponents count as integral.
    pub const INTEGRALITY: f64 = 1e-6;
    pub const TRANSPORT: f64 = 1e-11;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoConfig {
    pub mu: Vec<C64>,
    /// `c[l][j]`, `2 x 2`.
    pub c: Vec<Vec<C64>>,
    pub seed: u64,
    pub epsilons: Vec<C64>,
    /// Kernel coefficients `(a, b, c)` for the second adjusting data.
    pub shift: [C64; 3],
    /// Direction used for the monodromy check, `v[l][0]`.
    pub direction: [C64; 2],
    /// Explicit `N` as coefficient matrices of `z^0, z^1`; drawn from `seed`
    /// when absent.
    pub n: Option<Vec<Vec<Vec<C64>>>>,
}

impl Default for DemoConfig {
    fn default() -> Self {
        let c = |re: f64, im: f64| C64::new(re, im);
        DemoConfig {
            mu: vec![c(0.5, 0.0), c(-0.7, 0.0)],
            c: vec![vec![c(0.2, 0.1), c(0.3, 0.0)], vec![c(1.0, 0.0), c(0.4, -0.3)]],
            seed: 2,
            epsilons: vec![c(0.2, 0.0), c(0.05, 0.0), c(0.0, 0.0)],
            shift: [c(0.3, 0.0), c(-0.4, 0.2), c(0.7, 0.0)],
            direction: [c(1.0, 0.0), c(-0.5, 0.25)],
            n: None,
        }
    }
}

/// Eigenvalues `alpha` of `A1`, the residue at infinity up to sign, after
/// checking that no `lambda_k + alpha_k'` is an integer.
pub fn check_exponents(conn: &UnfoldedConnection) -> Result<Vec<C64>> {
    let m = conn.spec.m;
    let alpha = eigenvalues(&conn.a.coeff(m - 1));
    for (k, l) in conn.spec.lambda.iter().enumerate() {
        for (k2, a) in alpha.iter().enumerate() {
            let s = l + a;
            if s.im.abs() < tol::INTEGRALITY && (s.re - s.re.round()).abs() < tol::INTEGRALITY {
                return Err(Error::IntegralExponents(format!("lambda_{k} + alpha_{k2} = {s}")));
            }
        }
    }
    Ok(alpha)
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeRelation {
    pub l: usize,
    pub kappa: C64,
    /// `|(Xi~ - Xi~') - kappa [A0, A1]|`.
    pub difference: f64,
    /// `|g^{-1}(A + h Xi~) g - (A + h Xi~')|` with `g = I - h kappa A1`.
    pub conjugation: f64,
    /// Residual of the shifted data in the adjusting equation.
    pub adjusting: f64,
    /// Distance of the shift from the solver's kernel.
    pub kernel_projection: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopInvariants {
    pub trace: C64,
    pub det: C64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EpsilonReport {
    pub epsilon: C64,
    pub local: LocalReport,
    pub infinity_exponents: Vec<C64>,
    pub xi: XiReport,
    pub adjusted: AdjustedReport,
    pub kernel_dim: usize,
    pub family: Vec<XiJson>,
    /// `h^0` curvature residual per adjusted `(l, 0)`, `eps != 0`.
    pub curvature: Vec<f64>,
    /// Series residuals per `(l, 0)`, `eps = 0`.
    pub irregular: Vec<IrregularResiduals>,
    /// Eigenvalue deviations of the local monodromies, `eps != 0`.
    pub local_monodromy: Vec<f64>,
    pub big_loop: LoopInvariants,
    pub invariance: InvarianceReport,
    pub gauge: Vec<GaugeRelation>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DemoReport {
    pub config: DemoConfig,
    pub runs: Vec<EpsilonReport>,
    pub pass: bool,
}

fn gauge_relation(conn: &UnfoldedConnection, xi: &PolyMatrix<C64>, rs: &[Mat<C64>], xt: &PolyMatrix<C64>, l: usize, shift: [C64; 3]) -> GaugeRelation {
    let (a0, a1) = (conn.a.coeff(0), conn.a.coeff(1));
    let [ka, kb, kc] = shift;
    let d0 = &a0.scale(ka) + &a1.scale(kb);
    let d1 = &a0.scale(kc) + &a1.scale(ka);
    let shifted = vec![&rs[0] + &d0, &rs[1] + &d1];
    let xt2 = adjust(conn, xi, &shifted);
    let eps2 = conn.spec.epsilon.powu(2);
    let kappa = kb - eps2 * kc;
    let comm = a0.commutator(&a1);

    let diff = &(xt - &xt2).coeff(0) - &comm.scale(kappa);
    let difference = diff.max_abs().max((xt - &xt2).coeff(1).max_abs());

    let g = Mat::from_parts(&Mat::identity(2), &a1.scale(-kappa));
    let ginv = g.inverse().expect("I - h kappa A1 is a unit");
    let lhs = PolyMatrix::from_parts(&conn.a, xt);
    let rhs = PolyMatrix::from_parts(&conn.a, &xt2);
    let conjugation = (0..2)
        .map(|k| (&(&(&ginv * &lhs.coeff(k)) * &g) - &rhs.coeff(k)).max_abs())
        .fold(0.0, f64::max);

    let target = xi.coeff(1);
    let adjusting = (&AdjustingSolver::apply(&conn.a, &shifted) - &target).max_abs();

    let kernel = AdjustingSolver::kernel(&conn.a, 2);
    let cols: Vec<DVector<C64>> = kernel
        .iter()
        .map(|pair| {
            let (u, v) = (vec_of(&pair[0]), vec_of(&pair[1]));
            DVector::from_iterator(8, u.iter().chain(v.iter()).cloned())
        })
        .collect();
    let basis = DMatrix::from_columns(&cols);
    let d = DVector::from_iterator(8, vec_of(&d0).iter().chain(vec_of(&d1).iter()).cloned());
    let (x, _) = lstsq(&basis, &d);
    let kernel_projection = (&basis * x - &d).iter().map(|e| e.norm()).fold(0.0, f64::max);

    GaugeRelation { l, kappa, difference, conjugation, adjusting, kernel_projection }
}

fn run_one(cfg: &DemoConfig, eps: C64) -> Result<EpsilonReport> {
    let spec = make_spec(2, 2, &cfg.mu, &cfg.c, eps)?;
    let n = match &cfg.n {
        Some(coeffs) => {
            if coeffs.iter().any(|c| c.len() != 2 || c.iter().any(|row| row.len() != 2)) {
                return Err(Error::ShapeMismatch("n must be a list of 2x2 matrices".into()));
            }
            QuotMatrix::from_poly(&spec.ring(), &PolyMatrix::new(2, coeffs.iter().map(|c| Mat::from_rows(c)).collect()))
        }
        None => random_n(&spec.ring(), &spec.mu, &mut rng(cfg.seed)),
    };
    let conn = connection_from_n(&n, &spec)?;
    let local = local_data(&conn);
    let infinity_exponents = check_exponents(&conn)?;
    let fam = build_xi(&conn)?;
    let xi = xi_report(&fam);
    let adj = solve_adjusting_data(&fam)?;
    let adjusted = adjusted_report(&adj);

    let mut curvature = Vec::new();
    let mut irregular = Vec::new();
    let mut local_mono = Vec::new();
    let lifts = build_lifts(&adj, DEFAULT_FROBENIUS_ORDER)?;
    if eps == C64::new(0.0, 0.0) {
        let gauge = gauge_diagonalize_eps0(&adj, default_gauge_order(2))?;
        for l in 0..2 {
            irregular.push(irregular_lift_eps0(&adj, &gauge, l, 0)?.residuals);
        }
    } else {
        for row in &lifts {
            let lift = row[0].as_ref().ok_or_else(|| Error::GaugeUnavailable("missing (l, 0) lift".into()))?;
            curvature.push(curvature_check(lift, &annulus_grid(lift, 16))?.h0);
        }
        for j in 0..2 {
            local_mono.push(local_monodromy(&conn, j, tol::TRANSPORT)?.deviation);
        }
    }
    let big = big_loop_monodromy(&conn.a, 2, eps, tol::TRANSPORT)?.matrix;
    let big_loop = LoopInvariants { trace: big.trace(), det: big.det() };
    let v = vec![vec![cfg.direction[0], C64::new(0.0, 0.0)], vec![cfg.direction[1], C64::new(0.0, 0.0)]];
    let invariance = monodromy_invariance_check(&isomonodromy_direction(&adj, &lifts, &v)?, tol::TRANSPORT, tol::TRACE_H)?;

    let gauge: Vec<GaugeRelation> = (0..2)
        .map(|l| gauge_relation(&conn, &fam.xi[l][0], &adj.r_data[l][0], &adj.xitilde[l][0], l, cfg.shift))
        .collect();

    let pass = local.pass
        && xi.reconstruction <= tol::RECONSTRUCTION
        && xi.trace_residue <= tol::TRACE_RESIDUE
        && adjusted.commutator_residual <= tol::COMMUTATOR
        && adjusted.residue <= tol::RESIDUE
        && curvature.iter().all(|&c| c <= tol::CURVATURE)
        && irregular.iter().all(|r| r.identity <= tol::SERIES_IDENTITY && r.polar <= tol::SERIES_IDENTITY)
        && local_mono.iter().all(|&d| d <= tol::LOCAL_MONODROMY)
        && invariance.pass
        && gauge.iter().all(|g| {
            g.difference <= tol::GAUGE && g.conjugation <= tol::GAUGE && g.adjusting <= tol::GAUGE && g.kernel_projection <= tol::GAUGE
        });
    Ok(EpsilonReport {
        epsilon: eps,
        local,
        infinity_exponents,
        xi,
        adjusted,
        kernel_dim: adj.kernel_dim,
        family: family_json(&adj),
        curvature,
        irregular,
        local_monodromy: local_mono,
        big_loop,
        invariance,
        gauge,
        pass,
    })
}

pub fn hypergeometric_demo(cfg: &DemoConfig) -> Result<DemoReport> {
    if cfg.mu.len() != 2 || cfg.c.len() != 2 || cfg.c.iter().any(|r| r.len() != 2) {
        return Err(Error::ShapeMismatch("the demo needs r = 2 and m = 2".into()));
    }
    let runs = cfg.epsilons.iter().map(|&e| run_one(cfg, e)).collect::<Result<Vec<_>>>()?;
    let pass = runs.iter().all(|r| r.pass);
    Ok(DemoReport { config: cfg.clone(), runs, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Poly;

    #[test]
    fn default_demo_passes() {
        let rep = hypergeometric_demo(&DemoConfig::default()).unwrap();
        for run in &rep.runs {
            assert!(
                run.pass,
                "eps {} local {} curvature {:?} irregular {:?} monodromy {:?} traces {} gauge {:?}",
                run.epsilon,
                run.local.pass,
                run.curvature,
                run.irregular,
                run.local_monodromy,
                run.invariance.max_trace_h,
                run.gauge.iter().map(|g| (g.difference, g.conjugation, g.adjusting, g.kernel_projection)).collect::<Vec<_>>()
            );
            assert_eq!(run.kernel_dim, 5);
        }
    }

    #[test]
    fn integral_exponents_rejected() {
        // diagonal N: A1 = Diag(lambda), and 2 lambda_0 = 1
        let c = |x: f64| C64::new(x, 0.0);
        let spec = make_spec(2, 2, &[c(0.5), c(-0.7)], &[vec![c(0.1), c(0.25)], vec![c(1.0), c(0.5)]], c(0.2)).unwrap();
        let n = QuotMatrix::from_diag(&spec.ring(), &[Poly::constant(c(0.5)), Poly::constant(c(-0.7))]);
        let conn = connection_from_n(&n, &spec).unwrap();
        assert!(matches!(check_exponents(&conn), Err(Error::IntegralExponents(_))));
    }

    #[test]
    fn shape_is_checked() {
        let cfg = DemoConfig { mu: vec![C64::new(1.0, 0.0)], ..DemoConfig::default() };
        assert!(matches!(hypergeometric_demo(&cfg), Err(Error::ShapeMismatch(_))));
    }
}
