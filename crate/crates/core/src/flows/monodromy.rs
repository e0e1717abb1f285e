//! Local and big-loop monodromy, and constancy of the big-loop monodromy
//! along an isomonodromy direction.

use std::f64::consts::PI;

use serde::Serialize;

use super::transport::{transport, Path, TransportResult};
use crate::algebra::linalg::{eigenvalues, match_spectrum};
use crate::algebra::{cis, divisor_points, Dual, Mat, PolyMatrix, Scalar, C64};
use crate::connection::UnfoldedConnection;
use crate::error::{Error, Result};
use crate::unfolding::DirectionLift;

/// `max(2|eps|, 0.5)`.
pub fn big_loop_radius(eps: C64) -> f64 {
    (2.0 * eps.norm()).max(0.5)
}

/// `|eps| sin(pi/m) / 2`.
pub fn local_loop_radius(m: usize, eps: C64) -> f64 {
    eps.norm() * (PI / m as f64).sin() / 2.0
}

/// Counterclockwise circle of radius `max(2|eps|, 0.5)` based at the
/// positive real axis.
pub fn big_loop_monodromy<S: Scalar>(a: &PolyMatrix<S>, m: usize, eps: C64, tol: f64) -> Result<TransportResult<S>> {
    transport(a, m, eps, &Path::circle(C64::new(0.0, 0.0), big_loop_radius(eps)), tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct LoopMonodromy {
    pub root: usize,
    pub point: C64,
    pub radius: f64,
    pub matrix: Mat<C64>,
    pub eigenvalues: Vec<C64>,
    /// `exp(-2 pi i nu_k(rho) / q'(rho))`, in the order of the `mu_k`.
    pub expected: Vec<C64>,
    /// Max distance between matched eigenvalues.
    pub deviation: f64,
    pub error: f64,
}

/// Monodromy of a small counterclockwise loop around `eps zeta_m^j`, based
/// at `rho + radius`.
pub fn local_monodromy(conn: &UnfoldedConnection, j: usize, tol: f64) -> Result<LoopMonodromy> {
    let spec = &conn.spec;
    let (m, eps) = (spec.m, spec.epsilon);
    if eps == C64::new(0.0, 0.0) {
        return Err(Error::WrongStratum("local loops need eps != 0".into()));
    }
    if j >= m {
        return Err(Error::InvalidParameter(format!("root index {j} >= m = {m}")));
    }
    let rho = divisor_points(m, eps)[j];
    let radius = local_loop_radius(m, eps);
    let path = Path::Circle { center: rho, radius, turns: 1, start: rho.arg() };
    let res = transport(&conn.a, m, eps, &path, tol)?;
    let dq = rho.powu(m as u32 - 1) * m as f64;
    let expected: Vec<C64> = (0..spec.r)
        .map(|k| (C64::new(0.0, -2.0 * PI) * spec.nu(k).eval(rho) / dq).exp())
        .collect();
    let ev = eigenvalues(&res.matrix);
    let deviation = match match_spectrum(&ev, &expected, f64::INFINITY) {
        Ok(perm) => perm.iter().zip(&expected).map(|(&i, e)| (ev[i] - e).norm()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    Ok(LoopMonodromy {
        root: j,
        point: rho,
        radius,
        matrix: res.matrix,
        eigenvalues: ev,
        expected,
        deviation,
        error: res.error,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    pub radius: f64,
    pub m0: Mat<C64>,
    pub m1: Mat<C64>,
    /// `Tr(M^k)` for `k = 1..r`, as `(h^0, h^1)` parts.
    pub traces: Vec<(C64, C64)>,
    pub max_trace_h: f64,
    /// Each h-part over `max(1, |h^0 part|)`; this is what `pass` tests.
    pub max_trace_h_rel: f64,
    /// `|M1 - (M0 B(z0) - B(z0) M0)|` on a loop inside the lift's annulus,
    /// relative to `max(1, |M1|)`.
    pub gauge_defect: Option<f64>,
    /// Radius of the loop used for the gauge cross-check.
    pub gauge_radius: Option<f64>,
    pub error: f64,
    pub pass: bool,
}

/// Big-loop monodromy `M0 + h M1` of `A + h Xi~_v`; the direction is
/// isomonodromic when every `Tr(M^k)` has vanishing `h`-part.
pub fn monodromy_invariance_check(dl: &DirectionLift, tol: f64, trace_tol: f64) -> Result<InvarianceReport> {
    let lift = &dl.lift;
    let (m, eps) = (lift.m, lift.eps);
    let r = dl.a_dual.size();
    let radius = big_loop_radius(eps);
    let res = big_loop_monodromy(&dl.a_dual, m, eps, tol)?;
    let mon = &res.matrix;
    let mut traces = Vec::with_capacity(r);
    let mut p = Mat::<Dual>::identity(r);
    for _ in 0..r {
        p = &p * mon;
        let t = p.trace();
        traces.push((t.re, t.eps));
    }
    let max_trace_h = traces.iter().map(|t| t.1.norm()).fold(0.0, f64::max);
    let max_trace_h_rel = traces.iter().map(|t| t.1.norm() / t.0.norm().max(1.0)).fold(0.0, f64::max);

    let (mut gauge_defect, mut gauge_radius) = (None, None);
    let mut error = res.error;
    if lift.b.prec() > 0 {
        let rg = radius.max(lift.rho2);
        let mg = if rg == radius {
            res.matrix.clone()
        } else {
            let alt = transport(&dl.a_dual, m, eps, &Path::circle(C64::new(0.0, 0.0), rg), tol)?;
            error = error.max(alt.error);
            alt.matrix
        };
        let (m0, m1) = (mg.base_part(), mg.h_part());
        let b = lift.b_at(cis(0.0) * rg);
        let diff = &m1 - &(&(&m0 * &b) - &(&b * &m0));
        gauge_defect = Some(diff.max_abs() / m1.max_abs().max(1.0));
        gauge_radius = Some(rg);
    }
    Ok(InvarianceReport {
        radius,
        m0: mon.base_part(),
        m1: mon.h_part(),
        traces,
        max_trace_h,
        max_trace_h_rel,
        gauge_defect,
        gauge_radius,
        error,
        pass: max_trace_h_rel <= trace_tol,
    })
}
