//! Flows of `dz/dt = e^{i theta}(z^m - eps^m)` toward the divisor, sector
//! regions attracted to a single root, parallel transport over `C` and
//! `C[h]/(h^2)`, monodromy and the diagonal-limit diagnostic.

mod asymptotic;
mod integrate;
mod monodromy;
mod region;
mod transport;

#[cfg(test)]
mod tests;

pub use asymptotic::{asymptotic_limit, lift_along_trajectory, AsymptoticReport, LiftBoundLog};
pub use integrate::{convergence_rate_check, integrate_flow, FlowOptions, FlowStatus, RateReport, Trajectory};
pub use monodromy::{
    big_loop_monodromy, big_loop_radius, local_loop_radius, local_monodromy, monodromy_invariance_check,
    InvarianceReport, LoopMonodromy,
};
pub use region::{
    choose_eta, default_delta, region_contains, region_with_margin, sample_region, theta_for, Region,
    RegionSample, SectorParams,
};
pub use transport::{transport, Path, TransportResult, PATH_MARGIN};

use crate::algebra::{cis, divisor_points, C64};

/// The planar field `Re(e^{i theta} q) d/dx + Im(e^{i theta} q) d/dy` with
/// `q = z^m - eps^m`, stored through its complex form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowField {
    pub m: usize,
    pub eps: C64,
    pub theta: f64,
}

impl FlowField {
    pub fn new(m: usize, eps: C64, theta: f64) -> Self {
        FlowField { m, eps, theta }
    }

    /// `dz/dt`.
    pub fn velocity(&self, z: C64) -> C64 {
        cis(self.theta) * (z.powu(self.m as u32) - self.eps.powu(self.m as u32))
    }

    pub fn planar(&self, x: f64, y: f64) -> (f64, f64) {
        let v = self.velocity(C64::new(x, y));
        (v.re, v.im)
    }

    pub fn zeros(&self) -> Vec<C64> {
        divisor_points(self.m, self.eps)
    }

    /// Index of the zero closest to `z` and its distance.
    pub fn nearest_zero(&self, z: C64) -> (usize, f64) {
        self.zeros()
            .iter()
            .enumerate()
            .map(|(k, p)| (k, (z - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
    }
}
