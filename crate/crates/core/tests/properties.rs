//! Property tests for the invariants of every module.

use std::f64::consts::PI;

use isodeform::algebra::linalg::eigenvalues;
use isodeform::algebra::{
    cis, divisor_points, finite_residues, partial_fractions, recombine, residue_at_infinity, residue_sum_check, Dual,
    Mat, Poly, PolyMatrix, QuotMatrix, QuotRing, RationalForm, C64,
};
use isodeform::connection::{connection_from_n, local_data, make_spec, n_from_connection, random_n, ExponentSpec, UnfoldedConnection};
use isodeform::flows::{
    default_delta, integrate_flow, sample_region, transport, FlowField, FlowOptions, Path, SectorParams,
};
use isodeform::orbit::{
    d0, d1, factorize, gauge_compare, kk_pairing, orbit_pairing, random_gauge, random_tangent,
    Factorization,
};
use isodeform::random::{self, rng};
use isodeform::unfolding::{
    adjusted_report, build_xi, frobenius_infinity, solve_adjusting_data, xi_report, AdjustingSolver,
};
use proptest::prelude::*;
use rand::Rng;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn eps_of(choice: u8) -> C64 {
    match choice {
        0 => c(0.0),
        1 => c(0.3),
        _ => C64::new(0.2, 0.15),
    }
}

fn ring_of(m: usize, eps: C64) -> QuotRing {
    QuotRing::unfolded(m, eps)
}

/// Distinct exponents with pairwise distance at least `0.3`.
fn spread_mu<R: Rng>(g: &mut R, r: usize) -> Vec<C64> {
    let mut mu: Vec<C64> = Vec::new();
    while mu.len() < r {
        let z = random::disk(g) * 2.0;
        if mu.iter().all(|w| (w - z).norm() > 0.3) {
            mu.push(z);
        }
    }
    mu
}

fn random_spec(seed: u64, r: usize, m: usize, eps: C64) -> Option<ExponentSpec> {
    let mut g = rng(seed);
    let mu = spread_mu(&mut g, r);
    let cc: Vec<Vec<C64>> = (0..r).map(|_| (0..m).map(|_| random::disk(&mut g)).collect()).collect();
    let spec = make_spec(r, m, &mu, &cc, eps).ok()?;
    (nu_margin(&spec) >= 0.25).then_some(spec)
}

/// Smallest separation of the `nu(mu_k)` over the divisor; near-coincident
/// values make every inverse in the ring large.
fn nu_margin(spec: &ExponentSpec) -> f64 {
    let ring = spec.ring();
    let mut margin = f64::INFINITY;
    for k in 0..spec.r {
        for j in 0..k {
            margin = margin.min(ring.unit_margin(&(&spec.nu(k) - &spec.nu(j))));
        }
    }
    margin
}

fn random_conn(seed: u64, r: usize, m: usize, eps: C64) -> Option<UnfoldedConnection> {
    let spec = random_spec(seed, r, m, eps)?;
    let n = random_n(&spec.ring(), &spec.mu, &mut rng(seed ^ 0x9e37));
    connection_from_n(&n, &spec).ok()
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}

// ---------------------------------------------------------------- algebra

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn crt_consistency(seed in any::<u64>(), m in 1usize..=6, e in 1u8..=2) {
        let ring = ring_of(m, eps_of(e));
        let mut g = rng(seed);
        let (a, b) = (random::elem(&mut g, &ring), random::elem(&mut g, &ring));
        let (va, vb) = (ring.eval_points(&a), ring.eval_points(&b));
        let prod = ring.eval_points(&ring.mul(&a, &b));
        let sum = ring.eval_points(&ring.reduce(&(&a + &b)));
        for k in 0..m {
            prop_assert!(close(prod[k], va[k] * vb[k], 1e-12));
            prop_assert!(close(sum[k], va[k] + vb[k], 1e-12));
        }
        if ring.unit_margin(&a) > 1e-2 {
            let inv = ring.eval_points(&ring.inverse(&a).unwrap());
            for k in 0..m {
                prop_assert!(close(inv[k] * va[k], c(1.0), 1e-10));
            }
        }
    }

    #[test]
    fn partial_fractions_recombine(seed in any::<u64>(), r in 1usize..=3, m in 1usize..=6, e in 1u8..=2) {
        let eps = eps_of(e);
        let mut g = rng(seed);
        let a = PolyMatrix::new(r, (0..m).map(|_| random::mat(&mut g, r)).collect());
        let form = RationalForm::unfolded(a.clone(), m, eps);
        let parts = partial_fractions(&form, &divisor_points(m, eps)).unwrap();
        let back = recombine(&form.denominator, &parts);
        prop_assert!((&back - &a).max_abs() <= 1e-12 * a.max_abs().max(1.0));
    }

    #[test]
    fn residue_sum_vanishes(seed in any::<u64>(), m in 2usize..=6) {
        let mut g = rng(seed);
        // a pool of well separated points; draws may repeat to create higher poles
        let pool = spread_points(&mut g, m);
        let points: Vec<C64> = (0..m).map(|_| pool[g.gen_range(0..m)]).collect();
        let l: Vec<u8> = (0..m).map(|_| (g.gen_range(0..4) == 0) as u8).collect();
        match residue_sum_check(&points, &l) {
            Ok(s) => prop_assert!(s.norm() <= 1e-12, "{s}"),
            Err(isodeform::Error::DegenerateOrder(k)) => prop_assert!(k < 2),
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn global_residue_theorem(seed in any::<u64>(), r in 1usize..=3, m in 1usize..=6, extra in 0usize..=2, e in 1u8..=2) {
        let eps = eps_of(e);
        let mut g = rng(seed);
        let a = PolyMatrix::new(r, (0..m * (1 + extra)).map(|_| random::mat(&mut g, r)).collect());
        let mut total = residue_at_infinity(&a, m, eps);
        for (_, res) in finite_residues(&a, m, eps) {
            total = &total + &res;
        }
        prop_assert!(total.max_abs() <= 1e-10);
    }

    #[test]
    fn dual_ring_axioms(v in proptest::collection::vec(-40i32..40, 12)) {
        let d = |i: usize| Dual::new(C64::new(v[i] as f64, v[i + 1] as f64), C64::new(v[i + 2] as f64, v[i + 3] as f64));
        let (x, y, z) = (d(0), d(4), d(8));
        prop_assert_eq!((x * y) * z, x * (y * z));
        prop_assert_eq!((x + y) + z, x + (y + z));
        prop_assert_eq!(x * y, y * x);
        prop_assert_eq!(x * (y + z), x * y + x * z);
        prop_assert_eq!(x - x, Dual::default());
        prop_assert_eq!(x * Dual::constant(c(1.0)), x);
        prop_assert_eq!((x * y).eps, x.eps * y.re + x.re * y.eps);
        prop_assert_eq!(Dual::h() * Dual::h(), Dual::default());
    }
}

fn spread_points<R: Rng>(g: &mut R, n: usize) -> Vec<C64> {
    let mut pts: Vec<C64> = Vec::new();
    while pts.len() < n {
        let z = random::disk(g) * 3.0;
        if pts.iter().all(|w| (w - z).norm() > 1.0) {
            pts.push(z);
        }
    }
    pts
}

// ---------------------------------------------------------------- orbit

fn factorized(seed: u64, r: usize, m: usize, e: u8) -> (QuotMatrix, Factorization) {
    let ring = if e == 3 { QuotRing::scalars() } else { ring_of(m, eps_of(e)) };
    let mut g = rng(seed);
    let mu = spread_mu(&mut g, r);
    let n = random_n(&ring, &mu, &mut g);
    let fac = factorize(&n, &Poly::from_roots(&mu), &mut g).unwrap();
    (n, fac)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn factorization_round_trip(seed in any::<u64>(), r in 1usize..=5, m in 1usize..=3, e in 0u8..=3) {
        let (n, fac) = factorized(seed, r, m, e);
        let prod = fac.product();
        let size = (fac.theta.max_abs() * fac.kappa.max_abs()).max(1.0);
        prop_assert!((&prod - &n).max_abs() <= 1e-10 * size);
        prop_assert_eq!((&fac.theta - &fac.theta.transpose()).max_abs(), 0.0);
        prop_assert_eq!((&fac.kappa - &fac.kappa.transpose()).max_abs(), 0.0);
        // phi(N) has degree r in N
        let annihilated = prod.poly_eval_scalar(&fac.phi).max_abs();
        prop_assert!(annihilated <= 1e-10 * (n.max_abs() + 1.0).powi(r as i32));
    }

    #[test]
    fn factorizations_are_gauge_equivalent(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=3, e in 0u8..=3) {
        let (n, f1) = factorized(seed, r, m, e);
        let f2 = factorize(&n, &f1.phi, &mut rng(seed.wrapping_add(1))).unwrap();
        let p = gauge_compare(&f1, &f2).unwrap();
        // theta' = theta P(N^T)
        let nt = n.transpose();
        let mut pn = QuotMatrix::zeros(n.ring(), r);
        let mut power = QuotMatrix::identity(n.ring(), r);
        for pi in &p {
            pn = &pn + &power.scale_elem(pi);
            power = &power * &nt;
        }
        let scale = f2.theta.max_abs().max(1.0);
        prop_assert!((&(&f1.theta * &pn) - &f2.theta).max_abs() <= 1e-8 * scale);
    }

    #[test]
    fn d1_after_d0_vanishes(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=3, e in 0u8..=3) {
        let (_, fac) = factorized(seed, r, m, e);
        let p = random_gauge(fac.ring(), r, &mut rng(seed ^ 7));
        let pair = d0(&fac, &p);
        let scale = (pair.tau.max_abs() + pair.xi.max_abs()).max(1.0) * fac.product().max_abs().max(1.0).powi(r as i32);
        for t in d1(&fac, &pair).unwrap() {
            prop_assert!(t.norm() <= 1e-10 * scale);
        }
    }

    #[test]
    fn pairing_is_bilinear_antisymmetric_and_descends(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=2, e in 0u8..=3) {
        let (_, fac) = factorized(seed, r, m, e);
        let mut g = rng(seed ^ 11);
        let p = random_tangent(&fac, &mut g).unwrap();
        let q = random_tangent(&fac, &mut g).unwrap();
        let s = random_tangent(&fac, &mut g).unwrap();
        let w = |a, b| orbit_pairing(&fac, a, b).unwrap();
        let a = C64::new(0.7, -0.4);
        let ps = p.scale(a).add(&s);
        let scale = w(&p, &q).norm().max(w(&s, &q).norm()).max(1.0);
        let lin = &w(&ps, &q) - &(&w(&p, &q).scale(a) + &w(&s, &q));
        prop_assert!(lin.norm() <= 1e-9 * scale);
        prop_assert!((&w(&p, &q) + &w(&q, &p)).norm() <= 1e-9 * scale);
        let shifted = p.add(&d0(&fac, &random_gauge(fac.ring(), r, &mut g)));
        let ws = w(&shifted, &q);
        prop_assert!((&ws - &w(&p, &q)).norm() <= 1e-9 * scale.max(ws.norm()));
    }

    #[test]
    fn pairing_matches_kirillov_kostant(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=2, e in 0u8..=3) {
        let (_, fac) = factorized(seed, r, m, e);
        let mut g = rng(seed ^ 13);
        let p = random_tangent(&fac, &mut g).unwrap();
        let q = random_tangent(&fac, &mut g).unwrap();
        let (a, b) = (orbit_pairing(&fac, &p, &q).unwrap(), kk_pairing(&fac, &p, &q).unwrap());
        prop_assert!((&a - &b).norm() <= 1e-9 * a.norm().max(1.0));
    }

    #[test]
    fn trace_is_cyclic(seed in any::<u64>(), r in 1usize..=5, m in 1usize..=3, e in 0u8..=2) {
        let ring = ring_of(m, eps_of(e));
        let mut g = rng(seed);
        let (u, v) = (random::quot_mat(&mut g, &ring, r), random::quot_mat(&mut g, &ring, r));
        prop_assert!((&(&u * &v).trace() - &(&v * &u).trace()).norm() <= 1e-12);
    }
}

// ---------------------------------------------------------------- connection

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn n_to_a_to_n(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=4, e in 0u8..=2) {
        let conn = random_conn(seed, r, m, eps_of(e));
        prop_assume!(conn.is_some());
        let conn = conn.unwrap();
        let back = n_from_connection(&conn.a, &conn.spec).unwrap();
        prop_assert!((&back - &conn.n).max_abs() <= 1e-10 * conn.n.max_abs().max(1.0));
    }

    #[test]
    fn residue_eigenvalues_and_sums(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=4, e in 1u8..=2) {
        let conn = random_conn(seed, r, m, eps_of(e));
        prop_assume!(conn.is_some());
        let rep = local_data(&conn.unwrap());
        prop_assert!(rep.pass);
        prop_assert!(rep.residue_sum_defect <= 1e-10);
    }

    #[test]
    fn factorization_of_connection(seed in any::<u64>(), r in 1usize..=4, m in 1usize..=3, e in 0u8..=2) {
        let conn = random_conn(seed, r, m, eps_of(e));
        prop_assume!(conn.is_some());
        let conn = conn.unwrap();
        let fac = factorize(&conn.n, &conn.spec.phi(), &mut rng(seed)).unwrap();
        let size = (fac.theta.max_abs() * fac.kappa.max_abs()).max(1.0);
        prop_assert!((&fac.product() - &conn.n).max_abs() <= 1e-10 * size);
    }
}

// ---------------------------------------------------------------- unfolding

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn xi_family_identities(seed in any::<u64>(), r in 1usize..=3, m in 1usize..=4, e in 0u8..=2) {
        let conn = random_conn(seed, r, m, eps_of(e));
        prop_assume!(conn.is_some());
        let fam = build_xi(&conn.unwrap()).unwrap();
        let rep = xi_report(&fam);
        prop_assert!(rep.trace_residue <= 1e-10, "{rep:?}");
        prop_assert!(rep.reconstruction <= 1e-10, "{rep:?}");
        let adj = solve_adjusting_data(&fam);
        prop_assume!(adj.is_ok());
        let arep = adjusted_report(&adj.unwrap());
        prop_assert!(arep.commutator_residual <= 1e-9 && arep.residue <= 1e-10, "{arep:?}");
    }

    #[test]
    fn trivial_joint_commutant_solves_every_traceless_target(seed in any::<u64>(), r in 2usize..=4, m in 2usize..=4) {
        let mut g = rng(seed);
        let a = PolyMatrix::new(r, (0..m).map(|_| random::mat(&mut g, r)).collect());
        let solver = AdjustingSolver::new(&a, m).unwrap();
        let mut t = random::mat(&mut g, r);
        let tr = t.trace() / c(r as f64);
        t = &t - &Mat::identity(r).scale(tr);
        let (rs, res) = solver.solve(&t);
        prop_assert!(res <= 1e-9 * t.norm());
        prop_assert!((&AdjustingSolver::apply(&a, &rs) - &t).max_abs() <= 1e-9 * t.norm());
    }

    #[test]
    fn frobenius_recursion_residual(seed in any::<u64>(), r in 1usize..=3, m in 2usize..=3, e in 1u8..=2) {
        let eps = eps_of(e);
        let conn = random_conn(seed, r, m, eps);
        prop_assume!(conn.is_some());
        let adj = solve_adjusting_data(&build_xi(&conn.unwrap()).unwrap());
        prop_assume!(adj.is_ok());
        let adj = adj.unwrap();
        let frob = frobenius_infinity(&adj.base.conn.a, &adj.xitilde[0][0], m, eps, 24);
        prop_assume!(frob.is_ok());
        prop_assert!(frob.unwrap().residual <= 1e-10);
    }
}

// ---------------------------------------------------------------- flows

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_vanishes_exactly_on_the_divisor(m in 1usize..=6, re in -1.0f64..1.0, im in -1.0f64..1.0, theta in -PI..PI, seed in any::<u64>()) {
        let field = FlowField::new(m, C64::new(re, im), theta);
        // roots of unity are rounded, so zeros hold to a few ulps of eps^m
        let scale = C64::new(re, im).norm().powi(m as i32).max(f64::MIN_POSITIVE);
        for z in field.zeros() {
            prop_assert!(field.velocity(z).norm() <= 8.0 * m as f64 * f64::EPSILON * scale);
        }
        let mut g = rng(seed);
        for _ in 0..16 {
            let z = random::disk(&mut g) * 2.0;
            if field.nearest_zero(z).1 > 1e-3 {
                prop_assert!(field.velocity(z).norm() > 0.0);
            }
        }
    }

    #[test]
    fn transport_composes_and_reverses(seed in any::<u64>(), e in 1u8..=2) {
        let eps = eps_of(e);
        let conn = random_conn(seed, 2, 2, eps);
        prop_assume!(conn.is_some());
        let a = conn.unwrap().a;
        let mut g = rng(seed);
        // radial segment into a circle, both clear of the poles
        let p1 = cis(g.gen_range(0.0..2.0 * PI)) * 1.1;
        let g1 = Path::Segment { from: p1 * 1.5, to: p1 };
        let g2 = Path::Circle { center: c(0.0), radius: p1.norm(), turns: 1, start: p1.arg() };
        let both = Path::Composite(vec![g1.clone(), g2.clone()]);
        let tol = 1e-11;
        let (m1, m2, m12) = (
            transport(&a, 2, eps, &g1, tol).unwrap(),
            transport(&a, 2, eps, &g2, tol).unwrap(),
            transport(&a, 2, eps, &both, tol).unwrap(),
        );
        let bound = 10.0 * (m1.error + m2.error + m12.error) * m1.matrix.max_abs() * m2.matrix.max_abs();
        prop_assert!((&(&m2.matrix * &m1.matrix) - &m12.matrix).max_abs() <= bound.max(1e-12));
        let back = transport(&a, 2, eps, &both.reversed(), tol).unwrap();
        let rbound = 10.0 * (m12.error + back.error) * m12.matrix.max_abs() * back.matrix.max_abs();
        prop_assert!(isodeform::algebra::dist_identity(&(&back.matrix * &m12.matrix)) <= rbound.max(1e-12));
    }

    #[test]
    fn region_samples_flow_to_their_root(seed in any::<u64>(), m in 2usize..=4, xi in 1u8..=2, psi0 in -PI..PI, j_raw in 0usize..4) {
        let j = j_raw % m;
        let p = SectorParams::new(m, j, psi0, xi, default_delta(m)).unwrap();
        let mut g = rng(seed);
        let mut hits = 0;
        for _ in 0..20 {
            let smp = sample_region(&p, &mut g, 0.02, 1.0 / 3.0, 1e-3);
            let traj = integrate_flow(smp.z, &p.field(smp.eps()), &FlowOptions::default()).unwrap();
            if traj.converged_to() == Some(j) && (traj.end().1 - p.target(smp.eps())).norm() <= 1e-6 {
                hits += 1;
            }
        }
        prop_assert!(hits >= 19, "{hits}/20");
    }
}

#[test]
fn eigenvalues_helper_is_consistent() {
    // guards the helper used by the connection properties
    let m = Mat::from_rows(&[vec![c(2.0), c(1.0)], vec![c(0.0), c(-1.0)]]);
    let mut ev = eigenvalues(&m);
    ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
    assert!((ev[0] - c(-1.0)).norm() < 1e-14 && (ev[1] - c(2.0)).norm() < 1e-14);
}
