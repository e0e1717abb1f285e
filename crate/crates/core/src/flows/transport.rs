//! Parallel transport of `dY/dz = -A/q Y` along explicit paths.
//!
//! The transport matrix of `g1` followed by `g2` is `M(g2) M(g1)`.

use std::f64::consts::PI;

use crate::algebra::{divisor_points, cis, Mat, PolyMatrix, Scalar, C64};
use crate::error::{Error, Result};

/// Minimal distance between a path and the divisor.
pub const PATH_MARGIN: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub enum Path {
    /// `center + radius e^{i(start + 2 pi turns s)}`, `s` in `[0, 1]`.
    Circle { center: C64, radius: f64, turns: i32, start: f64 },
    Segment { from: C64, to: C64 },
    Polyline(Vec<C64>),
    /// Traversed left to right.
    Composite(Vec<Path>),
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Arc { c: C64, r: f64, a0: f64, sweep: f64 },
    Seg { a: C64, b: C64 },
}

impl Piece {
    fn point(&self, s: f64) -> C64 {
        match *self {
            Piece::Arc { c, r, a0, sweep } => c + cis(a0 + sweep * s) * r,
            Piece::Seg { a, b } => {
                if s == 1.0 {
                    b
                } else {
                    a + (b - a) * s
                }
            }
        }
    }

    fn velocity(&self, s: f64) -> C64 {
        match *self {
            Piece::Arc { r, a0, sweep, .. } => cis(a0 + sweep * s) * C64::new(0.0, r * sweep),
            Piece::Seg { a, b } => b - a,
        }
    }

    fn distance(&self, p: C64) -> f64 {
        match *self {
            Piece::Arc { c, r, a0, sweep } => {
                let ends = (self.point(0.0) - p).norm().min((self.point(1.0) - p).norm());
                if sweep.abs() >= 2.0 * PI - 1e-12 || in_arc(p - c, a0, sweep) {
                    ((p - c).norm() - r).abs().min(ends)
                } else {
                    ends
                }
            }
            Piece::Seg { a, b } => {
                let d = b - a;
                let t = if d.norm_sqr() == 0.0 { 0.0 } else { (((p - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
                (a + d * t - p).norm()
            }
        }
    }
}

fn in_arc(v: C64, a0: f64, sweep: f64) -> bool {
    let (lo, len) = if sweep >= 0.0 { (a0, sweep) } else { (a0 + sweep, -sweep) };
    (v.arg() - lo).rem_euclid(2.0 * PI) <= len
}

impl Path {
    pub fn circle(center: C64, radius: f64) -> Self {
        Path::Circle { center, radius, turns: 1, start: 0.0 }
    }

    fn pieces(&self) -> Vec<Piece> {
        match self {
            Path::Circle { center, radius, turns, start } => {
                vec![Piece::Arc { c: *center, r: *radius, a0: *start, sweep: 2.0 * PI * *turns as f64 }]
            }
            Path::Segment { from, to } => vec![Piece::Seg { a: *from, b: *to }],
            Path::Polyline(pts) => pts.windows(2).map(|w| Piece::Seg { a: w[0], b: w[1] }).collect(),
            Path::Composite(parts) => parts.iter().flat_map(|p| p.pieces()).collect(),
        }
    }

    pub fn start(&self) -> C64 {
        self.pieces()[0].point(0.0)
    }

    pub fn end(&self) -> C64 {
        self.pieces().last().unwrap().point(1.0)
    }

    pub fn reversed(&self) -> Path {
        match self {
            Path::Circle { center, radius, turns, start } => Path::Circle {
                center: *center,
                radius: *radius,
                turns: -turns,
                start: start + 2.0 * PI * *turns as f64,
            },
            Path::Segment { from, to } => Path::Segment { from: *to, to: *from },
            Path::Polyline(pts) => Path::Polyline(pts.iter().rev().cloned().collect()),
            Path::Composite(parts) => Path::Composite(parts.iter().rev().map(|p| p.reversed()).collect()),
        }
    }

    pub fn distance_to(&self, p: C64) -> f64 {
        self.pieces().iter().map(|pc| pc.distance(p)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug)]
pub struct TransportResult<S: Scalar> {
    pub matrix: Mat<S>,
    /// Accumulated local error estimate.
    pub error: f64,
    pub steps: usize,
    /// `(point, Y)` at the end of every smooth piece.
    pub checkpoints: Vec<(C64, Mat<S>)>,
}

/// Fundamental solution `Y(end)` with `Y(start) = I` for
/// `dY/dz = -A(z)/(z^m - eps^m) Y`, by adaptive RK4 with step doubling.
/// `tol` bounds the local error per unit parameter, relative to `|Y|`.
pub fn transport<S: Scalar>(
    a: &PolyMatrix<S>,
    m: usize,
    eps: C64,
    path: &Path,
    tol: f64,
) -> Result<TransportResult<S>> {
    let pts = divisor_points(m, eps);
    let dist = pts.iter().map(|&p| path.distance_to(p)).fold(f64::INFINITY, f64::min);
    if dist < PATH_MARGIN {
        return Err(Error::PathTooClose(dist));
    }
    let em = eps.powu(m as u32);
    let r = a.size();
    let mut y = Mat::<S>::identity(r);
    let mut error = 0.0;
    let mut steps = 0;
    let mut checkpoints = Vec::new();
    for piece in path.pieces() {
        let f = |s: f64, y: &Mat<S>| -> Mat<S> {
            let z = piece.point(s);
            let c = -piece.velocity(s) / (z.powu(m as u32) - em);
            (&a.eval(S::from_c64(z)) * y).scale_c(c)
        };
        let rk = |s: f64, y: &Mat<S>, h: f64| -> Mat<S> {
            let k1 = f(s, y);
            let k2 = f(s + h / 2.0, &(y + &k1.scale_c(C64::new(h / 2.0, 0.0))));
            let k3 = f(s + h / 2.0, &(y + &k2.scale_c(C64::new(h / 2.0, 0.0))));
            let k4 = f(s + h, &(y + &k3.scale_c(C64::new(h, 0.0))));
            let sum = &(&k1 + &k2.scale_c(C64::new(2.0, 0.0))) + &(&k3.scale_c(C64::new(2.0, 0.0)) + &k4);
            y + &sum.scale_c(C64::new(h / 6.0, 0.0))
        };
        let (mut s, mut h) = (0.0_f64, 1.0_f64 / 64.0);
        while s < 1.0 {
            h = h.min(1.0 - s);
            loop {
                let full = rk(s, &y, h);
                let half = rk(s + h / 2.0, &rk(s, &y, h / 2.0), h / 2.0);
                let err = (&half - &full).max_abs() / 15.0;
                let scale = half.max_abs().max(1.0);
                if err <= tol * h * scale || h < 1e-12 {
                    y = &half + &(&half - &full).scale_c(C64::new(1.0 / 15.0, 0.0));
                    s += h;
                    error += err;
                    steps += 1;
                    if err < 0.05 * tol * h * scale {
                        h *= 2.0;
                    }
                    break;
                }
                h /= 2.0;
            }
        }
        checkpoints.push((piece.point(1.0), y.clone()));
    }
    Ok(TransportResult { matrix: y, error, steps, checkpoints })
}
