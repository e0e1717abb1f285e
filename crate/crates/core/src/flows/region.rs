//! Sector angles and the attracting regions `P`, `Q` around one root.

use std::f64::consts::PI;

use rand::Rng;

use super::FlowField;
use crate::algebra::{cis, C64};
use crate::error::{Error, Result};

/// `-2j(m-1)pi/m - (m-1) psi0 + pi + delta` for `xi = 1`, `- delta` for
/// `xi = 2`.
pub fn theta_for(j: usize, psi0: f64, xi: u8, m: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < PI / (24.0 * m as f64)) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    let sign = match xi {
        1 => 1.0,
        2 => -1.0,
        _ => return Err(Error::InvalidParameter(format!("xi must be 1 or 2, got {xi}"))),
    };
    let (mf, jf) = (m as f64, j as f64);
    Ok(-2.0 * jf * (mf - 1.0) * PI / mf - (mf - 1.0) * psi0 + PI + sign * delta)
}

pub fn default_delta(m: usize) -> f64 {
    PI / (48.0 * m as f64)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorParams {
    pub m: usize,
    pub j: usize,
    pub psi0: f64,
    pub xi: u8,
    pub delta: f64,
    pub theta: f64,
    pub eta: f64,
}

impl SectorParams {
    pub fn new(m: usize, j: usize, psi0: f64, xi: u8, delta: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter("sector regions need m >= 2".into()));
        }
        let theta = theta_for(j, psi0, xi, m, delta)?;
        let eta = choose_eta(m, j, theta, delta);
        Ok(SectorParams { m, j: j % m, psi0, xi, delta, theta, eta })
    }

    /// `(theta - pi) / (m - 1)`, the rotation putting the target root on
    /// the positive real axis.
    pub fn alpha(&self) -> f64 {
        (self.theta - PI) / (self.m as f64 - 1.0)
    }

    pub fn field(&self, eps: C64) -> FlowField {
        FlowField::new(self.m, eps, self.theta)
    }

    /// Center and half-width of the admissible `psi` window.
    pub fn psi_window(&self) -> (f64, f64) {
        let mf = self.m as f64;
        (-2.0 * self.j as f64 * PI / mf - self.alpha(), 3.0 * self.delta / (2.0 * mf - 2.0))
    }

    pub fn target(&self, eps: C64) -> C64 {
        eps * cis(2.0 * PI * self.j as f64 / self.m as f64)
    }
}

/// Largest `eta` in `(0, 1/4)` (by bisection) for which the argument bound
/// `|arg(e^{i alpha} e^{i theta}(w^m - (e^{i psi} zeta^j)^m))| < 2 m delta/(m-1)`
/// holds on 64 points of `|w| = eta`, for `psi` across its window.
pub fn choose_eta(m: usize, j: usize, theta: f64, delta: f64) -> f64 {
    let mf = m as f64;
    let alpha = (theta - PI) / (mf - 1.0);
    let bound = 2.0 * mf * delta / (mf - 1.0);
    let center = -2.0 * j as f64 * PI / mf - alpha;
    let half = 3.0 * delta / (2.0 * mf - 2.0);
    let rot = cis(alpha + theta);
    let zeta = cis(2.0 * PI * j as f64 / mf);
    let ok = |eta: f64| {
        (0..=8).all(|p| {
            let psi = center + half * 0.999 * (p as f64 / 4.0 - 1.0);
            let c = (cis(psi) * zeta).powu(m as u32);
            (0..64).all(|k| {
                let w = cis(2.0 * PI * k as f64 / 64.0) * eta;
                (rot * (w.powu(m as u32) - c)).arg().abs() < bound
            })
        })
    };
    let (mut lo, mut hi) = (0.0, 0.25);
    if ok(hi) {
        return hi * (1.0 - 1e-12);
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    P,
    Q,
    Outside,
}

/// `lo < angle < hi` (or `<=` when `closed`) after reducing `angle` into
/// `[lo, lo + 2 pi)`, shrunk by `margin` on both sides.
fn window(angle: f64, lo: f64, hi: f64, margin: f64, closed: bool) -> bool {
    let a = lo + (angle - lo).rem_euclid(2.0 * PI);
    let (l, h) = (lo + margin, hi - margin);
    if closed {
        a >= l && a <= h
    } else {
        a > l && a < h
    }
}

pub fn region_contains(z: C64, s: f64, psi: f64, p: &SectorParams) -> Region {
    region_with_margin(z, s, psi, p, 0.0)
}

/// Region membership with every defining inequality required to hold with
/// slack `margin` (radians for angles, absolute for moduli).
pub fn region_with_margin(z: C64, s: f64, psi: f64, p: &SectorParams, margin: f64) -> Region {
    if !(0.0..1.0 / 3.0).contains(&s) || z.norm() >= 1.0 - margin {
        return Region::Outside;
    }
    let mf = p.m as f64;
    let d = p.delta / (mf - 1.0);
    let alpha = p.alpha();
    let (c, half) = p.psi_window();
    if !window(psi - c, -half, half, margin, false) {
        return Region::Outside;
    }
    let zt = cis(alpha) * z;
    let nonzero = z.norm() > margin;
    let arg_rot = z.arg() + alpha;
    let in_p = nonzero
        && match p.xi {
            1 => {
                window((cis(PI / (3.0 * mf)) - zt).arg(), (2.0 * mf + 1.0) * d, PI / 2.0 + PI / (3.0 * mf), margin, false)
                    && window(arg_rot, -PI / (3.0 * mf), PI / mf + 2.0 * d, margin, false)
            }
            _ => {
                window((cis(-PI / (3.0 * mf)) - zt).arg(), -PI / 2.0 - PI / (3.0 * mf), -(2.0 * mf + 1.0) * d, margin, false)
                    && window(arg_rot, -PI / mf - 2.0 * d, PI / (3.0 * mf), margin, false)
            }
        };
    if in_p {
        return Region::P;
    }
    let w = zt + p.eta * s;
    let arg_ok = if z == C64::new(0.0, 0.0) {
        true
    } else if !nonzero {
        false
    } else {
        match p.xi {
            1 => window(arg_rot, PI / mf + 2.0 * d, 2.0 * PI - PI / (3.0 * mf), margin, true),
            _ => window(arg_rot, PI / (3.0 * mf), 2.0 * PI - PI / mf - 2.0 * d, margin, true),
        }
    };
    if w.norm() > margin && window(w.arg(), -PI / (6.0 * mf), PI / (6.0 * mf), margin, false) && arg_ok {
        return Region::Q;
    }
    Region::Outside
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegionSample {
    pub z: C64,
    pub s: f64,
    pub psi: f64,
    pub region: Region,
}

impl RegionSample {
    pub fn eps(&self) -> C64 {
        cis(self.psi) * self.s
    }
}

/// Rejection sample of a point of `P u Q` with `s` in `[s_lo, s_hi)`,
/// uniform `z` in the unit disk and `psi` in its window.
pub fn sample_region<R: Rng>(p: &SectorParams, rng: &mut R, s_lo: f64, s_hi: f64, margin: f64) -> RegionSample {
    let (c, half) = p.psi_window();
    loop {
        let s = rng.gen_range(s_lo..s_hi);
        let psi = c + half * rng.gen_range(-1.0..1.0);
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm() >= 1.0 {
            continue;
        }
        let region = region_with_margin(z, s, psi, p, margin);
        if region != Region::Outside {
            return RegionSample { z, s, psi, region };
        }
    }
}
