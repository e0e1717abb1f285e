use super::*;
use crate::connection::{connection_from_n, make_spec, random_n, ExponentSpec};
use crate::random::rng;

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn spec2(eps: C64) -> ExponentSpec {
    let cc = vec![vec![C64::new(0.2, 0.1), c(0.3)], vec![c(1.0), C64::new(0.4, -0.3)]];
    make_spec(2, 2, &[c(0.5), c(-0.7)], &cc, eps).unwrap()
}

fn family(eps: C64, seed: u64) -> AdjustedXiFamily {
    let spec = spec2(eps);
    let n = random_n(&spec.ring(), &spec.mu, &mut rng(seed));
    let conn = connection_from_n(&n, &spec).unwrap();
    solve_adjusting_data(&build_xi(&conn).unwrap()).unwrap()
}

#[test]
fn xi_family_reconstructs_a() {
    let adj = family(C64::new(0.3, 0.1), 7);
    let rep = xi_report(&adj.base);
    assert!(rep.reconstruction < 1e-10, "{rep:?}");
    assert!(rep.trace_residue < 1e-10, "{rep:?}");
    let arep = adjusted_report(&adj);
    assert!(arep.commutator_residual < 1e-9 && arep.residue < 1e-9, "{arep:?}");
    assert!(arep.divisor_restriction < 1e-9, "{arep:?}");
}

#[test]
fn curvature_vanishes_on_annulus() {
    let adj = family(C64::new(0.3, 0.1), 11);
    let lifts = build_lifts(&adj, DEFAULT_FROBENIUS_ORDER).unwrap();
    for row in &lifts {
        let lift = row[0].as_ref().unwrap();
        assert!(row[1].is_none());
        let rep = curvature_check(lift, &annulus_grid(lift, 16)).unwrap();
        assert!(rep.h0 < 1e-8, "{rep:?} rho1 {}", lift.rho1);
        assert!(lift.series_agreement < 1e-10, "{}", lift.series_agreement);
    }
}

#[test]
fn rank_one_matches_closed_form() {
    // U = exp(a0 atanh(eps w) / eps) (1 - eps^2 w^2)^(-a1/2), B = -atanh(eps w) / eps
    let (a0, a1, eps) = (C64::new(0.3, -0.2), C64::new(1.5, 0.5), C64::new(0.4, 0.1));
    let a = PolyMatrix::new(1, vec![Mat::from_diag(&[a0]), Mat::from_diag(&[a1])]);
    let xt = PolyMatrix::new(1, vec![Mat::from_diag(&[c(1.0)]), Mat::from_diag(&[c(0.0)])]);
    let frob = frobenius_infinity(&a, &xt, 2, eps, 40).unwrap();
    assert!(frob.residual < 1e-12);
    let w = C64::new(0.6, 0.3);
    let mut u = C64::new(0.0, 0.0);
    for (k, uk) in frob.u.iter().enumerate() {
        u += uk[(0, 0)].re * w.powu(k as u32);
    }
    let at = (eps * w).atanh();
    let exact = (a0 * at / eps).exp() * (c(1.0) - eps * eps * w * w).powc(-a1 / 2.0);
    assert!((u - exact).norm() < 1e-10, "{u} vs {exact}");
    let lift = b_matrix(&frob, &a, &xt).unwrap();
    let b = lift.b_at(w.inv())[(0, 0)];
    assert!((b + at / eps).norm() < 1e-10);
}

#[test]
fn integer_exponent_gap_is_resonant() {
    let a = PolyMatrix::new(2, vec![Mat::from_diag(&[c(0.2), c(0.1)]), Mat::from_diag(&[c(0.0), c(1.0)])]);
    let xt = PolyMatrix::zeros(2, 2);
    let res = frobenius_infinity(&a, &xt, 2, c(0.3), 8);
    assert!(matches!(res, Err(Error::Resonance { k: 1, .. })));
}

#[test]
fn residue_drift_is_rejected() {
    let a = PolyMatrix::new(1, vec![Mat::from_diag(&[c(0.2)]), Mat::from_diag(&[c(0.3)])]);
    let xt = PolyMatrix::new(1, vec![Mat::from_diag(&[c(0.0)]), Mat::from_diag(&[c(1.0)])]);
    assert!(matches!(frobenius_infinity(&a, &xt, 2, c(0.3), 8), Err(Error::ResidueNotConstant(_))));
}

#[test]
fn lambda_direction_is_rejected() {
    let adj = family(C64::new(0.2, 0.0), 3);
    let lifts = build_lifts(&adj, 16).unwrap();
    let v = vec![vec![c(1.0), c(0.0)], vec![c(0.0), c(0.5)]];
    assert!(matches!(isomonodromy_direction(&adj, &lifts, &v), Err(Error::LambdaViolation(1))));
    let ok = vec![vec![c(1.0), c(0.0)], vec![c(-0.5), c(0.0)]];
    let dir = isomonodromy_direction(&adj, &lifts, &ok).unwrap();
    let rep = curvature_check(&dir.lift, &annulus_grid(&dir.lift, 16)).unwrap();
    assert!(rep.h0 < 1e-8, "{rep:?}");
}

#[test]
fn irregular_lift_identities() {
    let adj = family(c(0.0), 5);
    let gauge = gauge_diagonalize_eps0(&adj, 12).unwrap();
    assert!(gauge.residual < 1e-12, "{}", gauge.residual);
    for l in 0..2 {
        let lift = irregular_lift_eps0(&adj, &gauge, l, 0).unwrap();
        let r = &lift.residuals;
        assert!(r.identity < 1e-9 && r.reduction < 1e-9 && r.polar < 1e-9, "{r:?}");
    }
    assert_eq!(irregular_lift_eps0(&adj, &gauge, 0, 1).unwrap_err(), Error::LogTerm);
    assert!(matches!(gauge_diagonalize_eps0(&adj, 1), Err(Error::InsufficientOrder { .. })));
    let regular = family(c(0.2), 5);
    assert!(matches!(gauge_diagonalize_eps0(&regular, 8), Err(Error::WrongStratum(_))));
}

#[test]
fn binomial_series_at_infinity() {
    // A = lam z^{m-1}: U(w) = (1 - eps^m w^m)^{-lam/m}
    let (lam, eps, m) = (C64::new(0.7, -0.4), C64::new(0.5, 0.2), 3usize);
    let mut coeffs = vec![Mat::zeros(1, 1); m];
    coeffs[m - 1] = Mat::from_diag(&[lam]);
    let a = PolyMatrix::new(1, coeffs);
    let frob = frobenius_infinity(&a, &PolyMatrix::zeros(1, m), m, eps, 30).unwrap();
    let em = eps.powu(m as u32);
    let mut binom = c(1.0);
    for k in 0..=30 {
        let u = frob.u[k][(0, 0)];
        assert_eq!(u.eps, c(0.0));
        if k % m == 0 {
            let p = (k / m) as f64;
            assert!((u.re - binom).norm() < 1e-12 * binom.norm().max(1.0), "k={k}");
            // coefficient of x^{p+1} in (1 - x)^{-s}: prev * (s + p) / (p + 1), times em
            binom = binom * (lam / m as f64 + p) / (p + 1.0) * em;
        } else {
            assert!(u.re.norm() < 1e-14);
        }
    }
    let lift = b_matrix(&frob, &a, &PolyMatrix::zeros(1, m)).unwrap();
    assert_eq!(lift.b.max_abs(), 0.0);
}

#[test]
fn rank_one_family() {
    let spec = make_spec(1, 3, &[c(0.4)], &[vec![c(0.2), c(-0.1), C64::new(0.3, 0.6)]], c(0.25)).unwrap();
    let n = random_n(&spec.ring(), &spec.mu, &mut rng(1));
    let conn = connection_from_n(&n, &spec).unwrap();
    let fam = build_xi(&conn).unwrap();
    for j in 0..3 {
        let x = &fam.xi[0][j];
        for e in 0..3 {
            let want = if e == j { 1.0 } else { 0.0 };
            assert!((x.coeff(e)[(0, 0)] - c(want)).norm() < 1e-13);
        }
    }
    let adj = solve_adjusting_data(&fam).unwrap();
    assert_eq!(adj.xitilde, fam.xi);
    assert!(adj.r_data.iter().flatten().flatten().all(|r| r.max_abs() == 0.0));
    let lifts = build_lifts(&adj, DEFAULT_FROBENIUS_ORDER).unwrap();
    for j in 0..2 {
        let lift = lifts[0][j].as_ref().unwrap();
        let rep = curvature_check(lift, &annulus_grid(lift, 16)).unwrap();
        assert!(rep.h0 < 1e-10, "{rep:?}");
    }
}

#[test]
fn diagonal_connection_family() {
    let spec = spec2(c(0.3));
    let n = crate::algebra::QuotMatrix::from_diag(&spec.ring(), &[Poly::constant(c(0.5)), Poly::constant(c(-0.7))]);
    let conn = connection_from_n(&n, &spec).unwrap();
    let fam = build_xi(&conn).unwrap();
    for l in 0..2 {
        for j in 0..2 {
            let want = PolyMatrix::new(2, vec![Mat::zeros(2, 2); 2]);
            let mut want = want;
            want.set_coeff(j, Mat::from_diag(&[c(0.5).powu(l as u32), c(-0.7).powu(l as u32)]));
            assert!((&fam.xi[l][j] - &want).max_abs() < 1e-13);
        }
    }
    assert!(matches!(solve_adjusting_data(&fam), Err(Error::CommutantTooBig(_))));
}

fn conjugated(s: &Mat<C64>) -> AdjustedXiFamily {
    let spec = spec2(c(0.0));
    let sinv = s.inverse().unwrap();
    let n = &(s * &Mat::from_diag(&spec.mu)) * &sinv;
    let n = crate::algebra::QuotMatrix::from_const(&spec.ring(), &n);
    let conn = connection_from_n(&n, &spec).unwrap();
    let fam = build_xi(&conn).unwrap();
    AdjustedXiFamily {
        r_data: vec![vec![vec![Mat::zeros(2, 2); 2]; 2]; 2],
        xitilde: fam.xi.clone(),
        adjusted: vec![vec![true, false]; 2],
        kernel_dim: 0,
        base: fam,
    }
}

#[test]
fn constant_conjugation_gauge() {
    let s = Mat::from_rows(&[vec![c(1.0), C64::new(0.3, 0.2)], vec![c(-0.4), c(1.2)]]);
    let adj = conjugated(&s);
    let gauge = gauge_diagonalize_eps0(&adj, default_gauge_order(2)).unwrap();
    assert!(gauge.g.iter().skip(1).all(|g| g.max_abs() < 1e-12));
    // columns of P_0 are multiples of those of S
    let ratio = &s.inverse().unwrap() * &gauge.p0;
    assert!(ratio[(0, 1)].norm() < 1e-12 && ratio[(1, 0)].norm() < 1e-12);
    let lift = irregular_lift_eps0(&adj, &gauge, 1, 0).unwrap();
    assert!(lift.residuals.identity < 1e-12 && lift.residuals.polar < 1e-12);
    assert!(lift.residuals.holomorphic < 1e-12);
}

#[test]
fn rank_one_irregular_primitive() {
    let spec = make_spec(1, 3, &[c(0.4)], &[vec![c(0.2), c(-0.1), C64::new(0.3, 0.6)]], c(0.0)).unwrap();
    let n = random_n(&spec.ring(), &spec.mu, &mut rng(2));
    let conn = connection_from_n(&n, &spec).unwrap();
    let adj = solve_adjusting_data(&build_xi(&conn).unwrap()).unwrap();
    let gauge = gauge_diagonalize_eps0(&adj, default_gauge_order(3)).unwrap();
    assert_eq!(gauge.p0.max_abs(), 1.0);
    for j in 0..2 {
        let lift = irregular_lift_eps0(&adj, &gauge, 0, j).unwrap();
        let e = j as i64 - 2;
        for ex in lift.b.low()..lift.b.prec() {
            let want = if ex == e { c(1.0 / e as f64) } else { c(0.0) };
            assert!((lift.b.coeff(ex)[(0, 0)] - want).norm() < 1e-14, "j={j} ex={ex}");
        }
    }
}

#[test]
fn small_eps_family_approaches_eps0() {
    let s = 1e-5;
    let at = |eps: C64| {
        let spec = spec2(eps);
        let n = random_n(&spec.ring(), &spec.mu, &mut rng(9));
        let conn = connection_from_n(&n, &spec).unwrap();
        solve_adjusting_data(&build_xi(&conn).unwrap()).unwrap()
    };
    let near = at(c(s));
    let zero = at(c(0.0));
    assert!(family_distance(&near.xitilde, &zero.xitilde) < 1e-9);
}

