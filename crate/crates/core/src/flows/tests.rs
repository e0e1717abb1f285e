use std::f64::consts::PI;

use super::*;
use crate::algebra::{Mat, Poly, PolyMatrix, QuotMatrix, C64};
use crate::connection::{connection_from_n, make_spec, random_n, ExponentSpec, UnfoldedConnection};
use crate::error::Error;
use crate::random::rng;
use crate::unfolding::{build_lifts, build_xi, isomonodromy_direction, solve_adjusting_data, DEFAULT_FROBENIUS_ORDER};

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn spec2(eps: C64) -> ExponentSpec {
    let cc = vec![vec![C64::new(0.2, 0.1), c(0.3)], vec![c(1.0), C64::new(0.4, -0.3)]];
    make_spec(2, 2, &[c(0.5), c(-0.7)], &cc, eps).unwrap()
}

fn conn2(eps: C64, seed: u64) -> UnfoldedConnection {
    let spec = spec2(eps);
    let n = random_n(&spec.ring(), &spec.mu, &mut rng(seed));
    connection_from_n(&n, &spec).unwrap()
}

#[test]
fn theta_substitution() {
    let d = default_delta(2);
    assert!((theta_for(2, 0.0, 1, 2, d).unwrap() - (-PI + d)).abs() < 1e-15);
    assert!((theta_for(2, 0.0, 2, 2, d).unwrap() - (-PI - d)).abs() < 1e-15);
    assert_eq!(theta_for(2, 0.0, 1, 2, PI / 2.0), Err(Error::DeltaOutOfRange(PI / 2.0)));
    assert!(theta_for(0, 0.0, 3, 2, d).is_err());
}

#[test]
fn region_examples() {
    let p = SectorParams::new(3, 1, 0.2, 1, default_delta(3)).unwrap();
    let (center, _) = p.psi_window();
    let on_ray = cis(-p.alpha()) * 0.1;
    assert_eq!(region_contains(on_ray, 0.0, center, &p), Region::P);
    assert_eq!(region_contains(C64::new(0.0, 0.0), 0.01, center, &p), Region::Q);
    assert_eq!(region_contains(cis(PI - p.alpha()) * 0.3, 0.01, center, &p), Region::Outside);
    assert_eq!(region_contains(on_ray, 0.5, center, &p), Region::Outside);
    let q = SectorParams::new(3, 1, 0.2, 2, default_delta(3)).unwrap();
    assert_eq!(region_contains(cis(-q.alpha()) * 0.1, 0.0, q.psi_window().0, &q), Region::P);
}

#[test]
fn eta_certifies_argument_window() {
    for m in 2..5 {
        let p = SectorParams::new(m, 1, 0.0, 1, default_delta(m)).unwrap();
        assert!(p.eta > 0.0 && p.eta < 0.25, "m={m} eta={}", p.eta);
    }
}

#[test]
fn closed_form_flow() {
    let field = FlowField::new(2, c(0.0), PI);
    let traj = integrate_flow(c(0.2), &field, &FlowOptions::default()).unwrap();
    assert_eq!(traj.status, FlowStatus::Converged { root: 0 });
    for &(t, z) in traj.samples.iter().step_by(7) {
        let exact = 0.2 / (1.0 + 0.2 * t);
        assert!((z - c(exact)).norm() <= 1e-8 * exact, "t={t} z={z} exact={exact}");
    }
    assert!(traj.end().1.norm() <= 1e-6);
    let rate = convergence_rate_check(&traj, &field, 0).unwrap();
    assert!(rate.pass, "{rate:?}");

    let short = Trajectory { samples: traj.samples[..3].to_vec(), status: traj.status };
    assert_eq!(convergence_rate_check(&short, &field, 0).unwrap_err(), Error::NotConverged);
}

#[test]
fn zero_start_rejected() {
    let field = FlowField::new(3, C64::new(0.1, 0.05), 0.3);
    let z0 = field.zeros()[2];
    assert_eq!(integrate_flow(z0, &field, &FlowOptions::default()).unwrap_err(), Error::ZeroStart);
    assert!(field.velocity(z0).norm() < 1e-15);
}

#[test]
fn region_samples_reach_their_root() {
    let p = SectorParams::new(3, 1, 0.4, 2, default_delta(3)).unwrap();
    let mut r = rng(5);
    let mut hits = 0;
    for _ in 0..40 {
        let smp = sample_region(&p, &mut r, 0.02, 1.0 / 3.0, 1e-3);
        let field = p.field(smp.eps());
        let traj = integrate_flow(smp.z, &field, &FlowOptions::default()).unwrap();
        if traj.converged_to() == Some(p.j) {
            hits += 1;
            assert!(convergence_rate_check(&traj, &field, p.j).unwrap().pass);
        }
    }
    assert!(hits >= 38, "{hits}/40");
}

#[test]
fn zero_connection_transports_to_identity() {
    let a = PolyMatrix::<C64>::zeros(2, 2);
    let res = transport(&a, 2, c(0.1), &Path::circle(c(0.0), 0.5), 1e-10).unwrap();
    assert!(crate::algebra::dist_identity(&res.matrix) < 1e-14);
}

#[test]
fn rank_one_big_loop() {
    for (m, lambda, eps) in [(2, C64::new(0.3, 0.2), C64::new(0.1, 0.0)), (3, C64::new(-1.2, 0.4), C64::new(0.2, 0.3))] {
        let mut a = PolyMatrix::<C64>::zeros(1, m);
        a.set_coeff(m - 1, Mat::from_diag(&[lambda]));
        let res = big_loop_monodromy(&a, m, eps, 1e-12).unwrap();
        let exact = (C64::new(0.0, -2.0 * PI) * lambda).exp();
        assert!((res.matrix[(0, 0)] - exact).norm() < 1e-8, "{:?} vs {exact}", res.matrix);
    }
}

#[test]
fn reversed_path_inverts() {
    let conn = conn2(C64::new(0.2, 0.1), 3);
    let path = Path::Composite(vec![
        Path::Segment { from: C64::new(0.6, 0.0), to: C64::new(0.0, 0.7) },
        Path::Circle { center: c(0.0), radius: 0.7, turns: 1, start: PI / 2.0 },
        Path::Polyline(vec![C64::new(0.0, 0.7), C64::new(-0.5, -0.5), C64::new(0.3, -0.6)]),
    ]);
    let fwd = transport(&conn.a, 2, conn.spec.epsilon, &path, 1e-11).unwrap();
    let back = transport(&conn.a, 2, conn.spec.epsilon, &path.reversed(), 1e-11).unwrap();
    assert_eq!(path.reversed().start(), path.end());
    let prod = &fwd.matrix * &back.matrix;
    let bound = 2.0 * (fwd.error + back.error) * fwd.matrix.max_abs() * back.matrix.max_abs();
    assert!(crate::algebra::dist_identity(&prod) <= bound.max(1e-12), "{} > {bound}", crate::algebra::dist_identity(&prod));
}

#[test]
fn path_margin_enforced() {
    let a = PolyMatrix::<C64>::zeros(1, 2);
    let path = Path::Segment { from: c(-1.0), to: c(1.0) };
    assert!(matches!(transport(&a, 2, c(0.5), &path, 1e-10), Err(Error::PathTooClose(_))));
}

#[test]
fn local_monodromy_matches_exponents() {
    let conn = conn2(C64::new(0.3, 0.1), 9);
    for j in 0..2 {
        let lm = local_monodromy(&conn, j, 1e-12).unwrap();
        assert!(lm.deviation < 1e-6, "{lm:?}");
    }
    assert!(matches!(local_monodromy(&conn2(c(0.0), 9), 0, 1e-10), Err(Error::WrongStratum(_))));
}

#[test]
fn isomonodromy_direction_preserves_traces() {
    let conn = conn2(c(0.1), 21);
    let adj = solve_adjusting_data(&build_xi(&conn).unwrap()).unwrap();
    let lifts = build_lifts(&adj, DEFAULT_FROBENIUS_ORDER).unwrap();

    let zero = vec![vec![c(0.0); 2]; 2];
    let rep0 = monodromy_invariance_check(&isomonodromy_direction(&adj, &lifts, &zero).unwrap(), 1e-11, 1e-6).unwrap();
    assert_eq!(rep0.m1.max_abs(), 0.0);

    let v = vec![vec![C64::new(0.7, -0.2), c(0.0)], vec![C64::new(-0.3, 0.5), c(0.0)]];
    let v2: Vec<Vec<C64>> = v.iter().map(|row| row.iter().map(|x| x * 2.0).collect()).collect();
    let rep = monodromy_invariance_check(&isomonodromy_direction(&adj, &lifts, &v).unwrap(), 1e-11, 1e-6).unwrap();
    let rep2 = monodromy_invariance_check(&isomonodromy_direction(&adj, &lifts, &v2).unwrap(), 1e-11, 1e-6).unwrap();
    assert!(rep.pass && rep2.pass, "{:?}", rep.traces);
    assert!(rep.m1.max_abs() > 1e-3);
    assert!((&rep2.m1 - &rep.m1.scale(c(2.0))).max_abs() < 1e-8 * rep.m1.max_abs());
    assert!(rep.gauge_defect.unwrap() < 1e-6, "{:?}", rep.gauge_defect);
    assert!((&rep.m0 - &rep0.m0).max_abs() < 1e-12);

    let nontrivial = vec![vec![c(0.0), c(1.0)], vec![c(0.0), c(0.0)]];
    assert!(matches!(isomonodromy_direction(&adj, &lifts, &nontrivial), Err(Error::LambdaViolation(0))));
}

/// Start on the ray through the target root, inside the attracting sector.
fn converging_trajectory(conn: &UnfoldedConnection, theta: f64, j: usize) -> (FlowField, Trajectory) {
    let field = FlowField::new(conn.spec.m, conn.spec.epsilon, theta);
    let rho = field.zeros()[j];
    let traj = integrate_flow(rho * 1.5, &field, &FlowOptions::default()).unwrap();
    (field, traj)
}

#[test]
fn asymptotic_limit_is_diagonal() {
    let eps = c(0.2);
    let conn = conn2(eps, 4);
    // root rho = eps is attracting when Re(e^{i theta} m rho^{m-1}) < 0
    let (field, traj) = converging_trajectory(&conn, PI, 0);
    assert_eq!(traj.converged_to(), Some(0));
    let rep = asymptotic_limit(&conn, &field, &traj).unwrap();
    assert!(rep.consistent, "{rep:?}");
    assert!(rep.transport_defect < 1e-4, "{rep:?}");

    let spec = spec2(eps);
    let n = QuotMatrix::from_diag(&spec.ring(), &[Poly::constant(c(0.5)), Poly::constant(c(-0.7))]);
    let diag = connection_from_n(&n, &spec).unwrap();
    let rep = asymptotic_limit(&diag, &field, &traj).unwrap();
    assert_eq!(rep.limit[(0, 1)], c(0.0));
    assert_eq!(rep.limit[(1, 0)], c(0.0));

    let unconverged = Trajectory { samples: traj.samples.clone(), status: FlowStatus::Budget };
    assert_eq!(asymptotic_limit(&conn, &field, &unconverged).unwrap_err(), Error::NotConverged);
}

#[test]
fn lift_bound_is_logged() {
    let conn = conn2(c(0.2), 4);
    let adj = solve_adjusting_data(&build_xi(&conn).unwrap()).unwrap();
    let lifts = build_lifts(&adj, DEFAULT_FROBENIUS_ORDER).unwrap();
    let v = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.0)]];
    let dl = isomonodromy_direction(&adj, &lifts, &v).unwrap();
    let (_, traj) = converging_trajectory(&conn, PI, 0);
    let log = lift_along_trajectory(&dl, &traj, 50, 1e-10).unwrap();
    assert!(!log.samples.is_empty());
    assert!(log.max_norm.is_finite());
    // at the annulus point itself the continuation reproduces the series
    let z = log.base * 1.1;
    let seg = transport(&dl.a_dual, 2, c(0.2), &Path::Segment { from: log.base, to: z }, 1e-12).unwrap();
    let p0 = seg.matrix.base_part();
    let p0inv = p0.inverse().unwrap();
    let cont = &(&(&p0 * &dl.lift.b_at(log.base)) * &p0inv) - &(&seg.matrix.h_part() * &p0inv);
    assert!((&cont - &dl.lift.b_at(z)).max_abs() < 1e-7 * cont.max_abs().max(1.0));
}
