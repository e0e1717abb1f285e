//! Diagonal-limit diagnostic for fundamental solutions along a flow line,
//! and the size of the horizontal lift `B` along the same line.
//!
//! Along `z(t)` the flat sections satisfy `dY/dt = -e^{i theta} A(z(t)) Y`.
//! In the eigenbasis `S` of `A(rho)` write `Y = S U exp(Lambda(t))` with
//! `Lambda_k' = -e^{i theta} nu_k(z(t))`. `U` solves a Volterra equation
//! whose components are integrated forward from `t0` or backward from `T`
//! according to the sign of `Re(lambda_i - lambda_k)` at the root.

use serde::Serialize;

use super::integrate::Trajectory;
use super::transport::{transport, Path, PATH_MARGIN};
use super::FlowField;
use crate::algebra::linalg::{eigenvalues, eigenvector_matrix, match_spectrum};
use crate::algebra::{cis, Dual, Mat, C64};
use crate::connection::{UnfoldedConnection, MATCH_TOL};
use crate::error::{Error, Result};
use crate::unfolding::DirectionLift;

/// Budget for `int |F| dt` over the window `[t0, T]`.
const TAIL_BUDGET: f64 = 0.05;
const PICARD_MAX: usize = 60;

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticReport {
    pub root: usize,
    pub t0: f64,
    pub t_final: f64,
    pub nodes: usize,
    /// `int_{t0}^T |F| dt`.
    pub tail_integral: f64,
    /// `U(T)` in the eigenbasis of `A(rho)`.
    pub limit: Mat<C64>,
    /// `S U(T)`, the normalized solution `Y exp(-Lambda)` at `T`.
    pub normalized: Mat<C64>,
    /// Max off-diagonal over min diagonal modulus of `U(T)`.
    pub ratio: f64,
    pub consistent: bool,
    pub iterations: usize,
    /// Sum over nodes of the one-step mismatch between transporting
    /// `S U exp(Lambda)` directly and the Volterra solution, relative.
    pub transport_defect: f64,
}

struct Grid {
    t: Vec<f64>,
    z: Vec<C64>,
}

/// Resamples the trajectory so that consecutive nodes are at most `dt_max`
/// apart, integrating the field with RK4 between the stored samples.
fn densify(traj: &Trajectory, field: &FlowField, dt_max: f64) -> Grid {
    let mut t = vec![traj.samples[0].0];
    let mut z = vec![traj.samples[0].1];
    for w in traj.samples.windows(2) {
        let ((t0, z0), (t1, _)) = (w[0], w[1]);
        let n = ((t1 - t0) / dt_max).ceil().max(1.0) as usize;
        let h = (t1 - t0) / n as f64;
        let mut zz = z0;
        for k in 1..=n {
            let k1 = field.velocity(zz);
            let k2 = field.velocity(zz + k1 * (h / 2.0));
            let k3 = field.velocity(zz + k2 * (h / 2.0));
            let k4 = field.velocity(zz + k3 * h);
            zz += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            t.push(t0 + h * k as f64);
            z.push(if k == n { w[1].1 } else { zz });
        }
    }
    Grid { t, z }
}

pub fn asymptotic_limit(conn: &UnfoldedConnection, field: &FlowField, traj: &Trajectory) -> Result<AsymptoticReport> {
    let root = traj.converged_to().ok_or(Error::NotConverged)?;
    let spec = &conn.spec;
    let r = spec.r;
    let rho = field.zeros()[root];
    let rot = cis(field.theta);
    let nu_rho: Vec<C64> = (0..r).map(|k| spec.nu(k).eval(rho)).collect();
    let keys: Vec<f64> = nu_rho.iter().map(|n| (rot * n).re).collect();
    for a in 0..r {
        for b in a + 1..r {
            if (keys[a] - keys[b]).abs() < 1e-8 {
                return Err(Error::OrderingViolated);
            }
        }
    }
    let a_rho = conn.a.eval(rho);
    let ev = eigenvalues(&a_rho);
    let scale = a_rho.max_abs().max(1.0);
    let perm = match_spectrum(&ev, &nu_rho, MATCH_TOL * scale * 1e2).map_err(|k| Error::SpectralMismatch {
        root: rho,
        detail: format!("A(rho) has no eigenvalue near nu_{k}(rho)"),
    })?;
    let s = eigenvector_matrix(&a_rho, &perm.iter().map(|&i| ev[i]).collect::<Vec<_>>());
    let sinv = s.inverse()?;

    let nu_max = nu_rho.iter().map(|n| n.norm()).fold(0.0, f64::max);
    let grid = densify(traj, field, 0.05 / (1.0 + nu_max));
    let n_all = grid.t.len();
    let f_at = |z: C64| -> Mat<C64> {
        let inner = &(&sinv * &conn.a.eval(z)) * &s;
        let d: Vec<C64> = (0..r).map(|k| spec.nu(k).eval(z)).collect();
        (&inner - &Mat::from_diag(&d)).scale(-rot)
    };
    let f_all: Vec<Mat<C64>> = grid.z.iter().map(|&z| f_at(z)).collect();
    let fnorm: Vec<f64> = f_all.iter().map(|f| f.norm()).collect();

    // largest window [t0, T] whose tail integral stays within budget
    let mut start = n_all - 1;
    let mut tail = 0.0;
    while start > 0 {
        let add = 0.5 * (fnorm[start] + fnorm[start - 1]) * (grid.t[start] - grid.t[start - 1]);
        if tail + add > TAIL_BUDGET {
            break;
        }
        tail += add;
        start -= 1;
    }
    let t: &[f64] = &grid.t[start..];
    let zs: &[C64] = &grid.z[start..];
    let fs: &[Mat<C64>] = &f_all[start..];
    let n = t.len();

    // Lambda_k(t) by trapezoid
    let lam = |z: C64| -> Vec<C64> { (0..r).map(|k| -rot * spec.nu(k).eval(z)).collect() };
    let lams: Vec<Vec<C64>> = zs.iter().map(|&z| lam(z)).collect();
    let mut big = vec![vec![C64::new(0.0, 0.0); r]; n];
    for i in 1..n {
        let h = t[i] - t[i - 1];
        for k in 0..r {
            big[i][k] = big[i - 1][k] + (lams[i][k] + lams[i - 1][k]) * (h / 2.0);
        }
    }
    let lam_rho: Vec<C64> = nu_rho.iter().map(|v| -rot * v).collect();

    let mut u: Vec<Mat<C64>> = vec![Mat::identity(r); n];
    let mut iterations = 0;
    for it in 0..PICARD_MAX {
        iterations = it + 1;
        let g: Vec<Mat<C64>> = (0..n).map(|p| &fs[p] * &u[p]).collect();
        let mut next = vec![Mat::zeros(r, r); n];
        for k in 0..r {
            for i in 0..r {
                let delta = if i == k { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                let forward = i == k || (lam_rho[i] - lam_rho[k]).re <= 0.0;
                let phase = |p: usize| big[p][i] - big[p][k];
                if forward {
                    next[0][(i, k)] = delta;
                    for p in 0..n - 1 {
                        let h = t[p + 1] - t[p];
                        let e = (phase(p + 1) - phase(p)).exp();
                        let prev = next[p][(i, k)] - delta;
                        next[p + 1][(i, k)] = delta + e * prev + (e * g[p][(i, k)] + g[p + 1][(i, k)]) * (h / 2.0);
                    }
                } else {
                    next[n - 1][(i, k)] = delta;
                    for p in (0..n - 1).rev() {
                        let h = t[p + 1] - t[p];
                        let e = (phase(p) - phase(p + 1)).exp();
                        let prev = next[p + 1][(i, k)] - delta;
                        next[p][(i, k)] = delta + e * prev - (g[p][(i, k)] + e * g[p + 1][(i, k)]) * (h / 2.0);
                    }
                }
            }
        }
        let change = next.iter().zip(&u).map(|(a, b)| (a - b).max_abs()).fold(0.0, f64::max);
        u = next;
        if change < 1e-14 {
            break;
        }
    }

    let ut = u[n - 1].clone();
    let diag_min = (0..r).map(|k| ut[(k, k)].norm()).fold(f64::INFINITY, f64::min);
    let off_max = (0..r)
        .flat_map(|i| (0..r).map(move |k| (i, k)))
        .filter(|(i, k)| i != k)
        .map(|(i, k)| ut[(i, k)].norm())
        .fold(0.0, f64::max);
    let ratio = if r == 1 { 0.0 } else { off_max / diag_min };

    // one-step transport of the normalized solution V = S U between nodes;
    // comparing step by step avoids amplifying errors in subdominant columns
    let normalized = &s * &ut;
    let rhs = |z: C64, y: &Mat<C64>| (&conn.a.eval(z) * y).scale_c(-rot);
    let vscale = u.iter().map(|x| x.max_abs()).fold(0.0, f64::max) * s.max_abs();
    let mut transport_defect: f64 = 0.0;
    for p in 0..n - 1 {
        let h = t[p + 1] - t[p];
        let zm = zs[p] + field.velocity(zs[p]) * (h / 2.0);
        let y = &s * &u[p];
        let k1 = rhs(zs[p], &y);
        let k2 = rhs(zm, &(&y + &k1.scale_c(C64::new(h / 2.0, 0.0))));
        let k3 = rhs(zm, &(&y + &k2.scale_c(C64::new(h / 2.0, 0.0))));
        let k4 = rhs(zs[p + 1], &(&y + &k3.scale_c(C64::new(h, 0.0))));
        let sum = &(&k1 + &k2.scale_c(C64::new(2.0, 0.0))) + &(&k3.scale_c(C64::new(2.0, 0.0)) + &k4);
        let stepped = &y + &sum.scale_c(C64::new(h / 6.0, 0.0));
        let decay: Vec<C64> = (0..r).map(|k| (big[p][k] - big[p + 1][k]).exp()).collect();
        let renorm = &stepped * &Mat::from_diag(&decay);
        transport_defect += (&renorm - &(&s * &u[p + 1])).max_abs() / vscale;
    }

    Ok(AsymptoticReport {
        root,
        t0: t[0],
        t_final: t[n - 1],
        nodes: n,
        tail_integral: tail,
        limit: ut,
        normalized,
        ratio,
        consistent: ratio < 1e-3,
        iterations,
        transport_defect,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LiftBoundLog {
    /// Annulus point the lift was continued from.
    pub base: C64,
    /// `(t, |B(z(t))|)` at the logged samples.
    pub samples: Vec<(f64, f64)>,
    pub max_norm: f64,
}

/// Continues `B` from the annulus to the samples of `traj` by transport of
/// `A + h Xi~_v`: with `Phi = Phi0 + h Phi1` the transport from the base
/// point, `B(z) = Phi0 B(base) Phi0^{-1} - Phi1 Phi0^{-1}`. Samples closer
/// than `10 * PATH_MARGIN` to a divisor point are skipped.
pub fn lift_along_trajectory(dl: &DirectionLift, traj: &Trajectory, max_samples: usize, tol: f64) -> Result<LiftBoundLog> {
    let lift = &dl.lift;
    let (m, eps) = (lift.m, lift.eps);
    let pts = crate::algebra::divisor_points(m, eps);
    let far = |z: C64| pts.iter().all(|p| (z - p).norm() >= 10.0 * PATH_MARGIN);
    let stride = (traj.samples.len() / max_samples.max(1)).max(1);
    let picked: Vec<(f64, C64)> = traj.samples.iter().step_by(stride).cloned().filter(|s| far(s.1)).collect();
    if picked.is_empty() {
        return Ok(LiftBoundLog { base: C64::new(0.0, 0.0), samples: vec![], max_norm: 0.0 });
    }
    let z0 = picked[0].1;
    let dir = if z0.norm() > 0.0 { z0 / z0.norm() } else { C64::new(1.0, 0.0) };
    let mut base = None;
    for k in 0..16 {
        let cand = dir * cis(k as f64 * std::f64::consts::PI / 8.0) * lift.rho2.max(1.5 * lift.rho1 + 1e-9);
        let seg = Path::Polyline(vec![cand, z0]);
        if pts.iter().all(|&p| seg.distance_to(p) >= 10.0 * PATH_MARGIN) {
            base = Some(cand);
            break;
        }
    }
    let base = base.ok_or(Error::PathTooClose(0.0))?;
    let b0 = lift.b_at(base).to_dual();
    let mut phi = Mat::<Dual>::identity(dl.a_dual.size());
    let mut at = base;
    let mut samples = Vec::with_capacity(picked.len());
    let mut max_norm: f64 = 0.0;
    for &(t, z) in &picked {
        if z != at {
            let step = transport(&dl.a_dual, m, eps, &Path::Segment { from: at, to: z }, tol)?;
            phi = &step.matrix * &phi;
            at = z;
        }
        let p0 = phi.base_part();
        let p0inv = p0.inverse()?;
        let b = &(&(&p0 * &b0.base_part()) * &p0inv) - &(&phi.h_part() * &p0inv);
        let nb = b.norm();
        max_norm = max_norm.max(nb);
        samples.push((t, nb));
    }
    Ok(LiftBoundLog { base, samples, max_norm })
}
