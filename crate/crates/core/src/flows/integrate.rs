//! Adaptive RK4 integration of the flow and the convergence-rate test.

use serde::Serialize;

use super::FlowField;
use crate::algebra::C64;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct FlowOptions {
    /// Initial step.
    pub dt: f64,
    pub t_max: f64,
    /// Stop once within this distance of a zero of the field.
    pub tol: f64,
    /// Local error per step, relative to the step's displacement (floored
    /// at roundoff of `|z|`).
    pub local_tol: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { dt: 1e-2, t_max: 1e9, tol: 1e-6, local_tol: 1e-10, max_steps: 200_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlowStatus {
    Converged { root: usize },
    LeftDomain,
    Budget,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<(f64, C64)>,
    pub status: FlowStatus,
}

impl Trajectory {
    pub fn end(&self) -> (f64, C64) {
        *self.samples.last().unwrap()
    }

    pub fn converged_to(&self) -> Option<usize> {
        match self.status {
            FlowStatus::Converged { root } => Some(root),
            _ => None,
        }
    }
}

fn rk4(f: &FlowField, z: C64, h: f64) -> C64 {
    let k1 = f.velocity(z);
    let k2 = f.velocity(z + k1 * (h / 2.0));
    let k3 = f.velocity(z + k2 * (h / 2.0));
    let k4 = f.velocity(z + k3 * h);
    z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrates from `z0` until a zero is reached within `tol`, the unit disk
/// is left, or the time/step budget runs out. Steps are capped by
/// `1 / (m |z|^{m-1})`.
pub fn integrate_flow(z0: C64, field: &FlowField, opts: &FlowOptions) -> Result<Trajectory> {
    let zeros = field.zeros();
    if zeros.iter().any(|&p| p == z0) {
        return Err(Error::ZeroStart);
    }
    let m = field.m as i32;
    let mut samples = vec![(0.0, z0)];
    let (mut t, mut z, mut h) = (0.0, z0, opts.dt);
    for _ in 0..opts.max_steps {
        let (k, dist) = field.nearest_zero(z);
        if dist <= opts.tol {
            return Ok(Trajectory { samples, status: FlowStatus::Converged { root: k } });
        }
        if z.norm() >= 1.0 {
            return Ok(Trajectory { samples, status: FlowStatus::LeftDomain });
        }
        if t >= opts.t_max {
            break;
        }
        let cap = 1.0 / (field.m as f64 * z.norm().powi(m - 1)).max(1e-300);
        h = h.min(cap).min(opts.t_max - t);
        loop {
            let full = rk4(field, z, h);
            let half = rk4(field, rk4(field, z, h / 2.0), h / 2.0);
            let err = (half - full).norm() / 15.0;
            let disp = (half - z).norm();
            // floor at roundoff so that steps near a zero are not rejected forever
            let allowed = (opts.local_tol * disp).max(100.0 * f64::EPSILON * half.norm());
            if err <= allowed || h < 1e-14 {
                z = half + (half - full) / 15.0;
                t += h;
                if err < 0.1 * allowed {
                    h *= 2.0;
                }
                break;
            }
            h /= 2.0;
        }
        samples.push((t, z));
    }
    let (k, dist) = field.nearest_zero(z);
    let status = if dist <= opts.tol { FlowStatus::Converged { root: k } } else { FlowStatus::Budget };
    Ok(Trajectory { samples, status })
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub slope: f64,
    /// `0.9 m / 4^m`.
    pub bound: f64,
    pub pass: bool,
}

/// Least-squares slope of `1 / |z(t) - rho|^{2m}` against `t` over the last
/// quarter of the samples, compared with `0.9 m / 4^m`.
pub fn convergence_rate_check(traj: &Trajectory, field: &FlowField, root: usize) -> Result<RateReport> {
    if traj.converged_to() != Some(root) || traj.samples.len() < 8 {
        return Err(Error::NotConverged);
    }
    let rho = field.zeros()[root];
    let two_m = 2 * field.m as i32;
    let n = traj.samples.len();
    let tail = &traj.samples[n - (n / 4).max(4)..];
    let pts: Vec<(f64, f64)> = tail.iter().map(|&(t, z)| (t, (z - rho).norm().powi(-two_m))).collect();
    let k = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::NotConverged);
    }
    let slope = sxy / sxx;
    let bound = 0.9 * field.m as f64 / 4f64.powi(field.m as i32);
    Ok(RateReport { slope, bound, pass: slope >= bound })
}
