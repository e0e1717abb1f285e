//! Symmetric factorizations `N = theta kappa` of an endomorphism with
//! maximal minimal polynomial, their gauge group, the tangent complex and
//! the two symplectic pairings.
//!
//! `theta: V^* -> V` and `kappa: V -> V^*` are stored as matrices in the
//! standard basis and its dual, so transposition of maps is matrix
//! transposition. Everything works over a [`QuotRing`]; "over C" means
//! [`QuotRing::scalars`].

use nalgebra::DVector;
use num_traits::One;
use rand::Rng;

use crate::algebra::linalg::lstsq;
use crate::algebra::{Dual, Mat, Poly, PolyMatrix, QuotMatrix, QuotRing, C64};
use crate::error::{Error, Result};
use crate::random;

/// Retry budget for the random cyclic-vector search.
pub const CYCLIC_RETRIES: usize = 32;
/// Cyclic-vector pairs tried by [`factorize`]; the best conditioned `theta` wins.
pub const FACTORIZE_CANDIDATES: usize = 6;

const UNIT_MARGIN: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct Factorization {
    pub theta: QuotMatrix,
    pub kappa: QuotMatrix,
    pub phi: Poly<C64>,
}

impl Factorization {
    pub fn product(&self) -> QuotMatrix {
        &self.theta * &self.kappa
    }

    pub fn ring(&self) -> &QuotRing {
        self.theta.ring()
    }

    pub fn size(&self) -> usize {
        self.theta.size()
    }
}

/// A deformation `(theta + h tau, kappa + h xi)`.
#[derive(Clone, Debug)]
pub struct TangentPair {
    pub tau: QuotMatrix,
    pub xi: QuotMatrix,
}

impl TangentPair {
    pub fn add(&self, o: &Self) -> Self {
        TangentPair { tau: &self.tau + &o.tau, xi: &self.xi + &o.xi }
    }

    pub fn scale(&self, c: C64) -> Self {
        TangentPair { tau: self.tau.scale(c), xi: self.xi.scale(c) }
    }
}

/// Columns `v, Nv, .., N^{r-1} v`.
pub fn krylov(n: &QuotMatrix, v: &[Poly<C64>]) -> QuotMatrix {
    let mut cols = vec![v.to_vec()];
    for _ in 1..n.size() {
        let next = n.mul_vec(cols.last().unwrap());
        cols.push(next);
    }
    QuotMatrix::from_columns(n.ring(), &cols)
}

/// Krylov matrix of a random cyclic vector for `n`, or `NotCyclic` after
/// [`CYCLIC_RETRIES`] attempts.
pub fn cyclic_krylov<R: Rng>(n: &QuotMatrix, rng: &mut R) -> Result<QuotMatrix> {
    let ring = n.ring();
    let r = n.size();
    for _ in 0..CYCLIC_RETRIES {
        let v: Vec<Poly<C64>> = (0..r).map(|_| random::elem(rng, ring)).collect();
        let k = krylov(n, &v);
        // Hadamard bound of the Krylov columns
        let scale: f64 = (0..r)
            .map(|j| (0..r).map(|i| k.entry(i, j).norm().powi(2)).sum::<f64>().sqrt())
            .product();
        if ring.unit_margin(&k.det()) > UNIT_MARGIN * scale {
            return Ok(k);
        }
    }
    Err(Error::NotCyclic(CYCLIC_RETRIES))
}

fn scale_tol(x: f64) -> f64 {
    1e-10 * x.max(1.0)
}

/// `phi(N)` must vanish for the factorization to exist.
pub fn check_phi(n: &QuotMatrix, phi: &Poly<C64>) -> Result<()> {
    let defect = n.poly_eval_scalar(phi).max_abs();
    let scale = phi.norm() * n.max_abs().max(1.0).powi(n.size() as i32);
    if defect > scale_tol(scale) {
        return Err(Error::PhiNotAnnihilating(defect));
    }
    Ok(())
}

fn symmetrize(a: &QuotMatrix) -> QuotMatrix {
    (a + &a.transpose()).scale(C64::new(0.5, 0.0))
}

/// Symmetric factorization `N = theta kappa`.
///
/// With cyclic vectors `v` for `N` and `u` for `N^T`, the map
/// `P(N^T) u -> P(N) v` intertwines `N^T` and `N`; for a cyclic `N` every
/// such intertwiner is symmetric, so it serves as `theta`.
pub fn factorize<R: Rng>(n: &QuotMatrix, phi: &Poly<C64>, rng: &mut R) -> Result<Factorization> {
    let r = n.size();
    if phi.degree() != Some(r) || phi.coeff(r) != C64::one() {
        return Err(Error::ShapeMismatch(format!("phi must be monic of degree {r}")));
    }
    check_phi(n, phi)?;
    let nt = n.transpose();
    let mut best: Option<(f64, QuotMatrix, QuotMatrix)> = None;
    for _ in 0..FACTORIZE_CANDIDATES {
        let kv = cyclic_krylov(n, rng)?;
        let ku = cyclic_krylov(&nt, rng)?;
        let theta = symmetrize(&(&kv * &ku.inverse()?));
        let Ok(inv) = theta.inverse() else { continue };
        let cond = theta.max_abs() * inv.max_abs();
        if best.as_ref().map_or(true, |b| cond < b.0) {
            best = Some((cond, theta, inv));
        }
    }
    let (_, theta, inv) = best.ok_or(Error::NotCyclic(CYCLIC_RETRIES))?;
    let kappa = symmetrize(&(&inv * n));
    Ok(Factorization { theta, kappa, phi: phi.clone() })
}

/// Largest deviation from the factorization invariants:
/// `theta kappa = N`, `theta^T = theta`, `kappa^T = kappa`, `phi(theta kappa) = 0`.
pub fn factorization_defect(fac: &Factorization, n: &QuotMatrix) -> f64 {
    let prod = fac.product();
    [
        (&prod - n).max_abs(),
        (&fac.theta - &fac.theta.transpose()).max_abs(),
        (&fac.kappa - &fac.kappa.transpose()).max_abs(),
        prod.poly_eval_scalar(&fac.phi).max_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

/// `sum_i p_i M^i` for ring coefficients.
fn eval_gauge(p: &[Poly<C64>], m: &QuotMatrix) -> QuotMatrix {
    m.poly_eval(p)
}

/// Find `P` with `theta2 = theta1 P(N^T)` and `kappa2 = P(N^T)^{-1} kappa1`.
/// Returns the ring coefficients of `P(T) = sum_i p_i T^i`, `i < r`.
pub fn gauge_compare(f1: &Factorization, f2: &Factorization) -> Result<Vec<Poly<C64>>> {
    let ring = f1.ring();
    let r = f1.size();
    let n = f1.product();
    let nt = n.transpose();
    let g = &f1.theta.inverse()? * &f2.theta;
    let scale = g.max_abs().max(1.0) * nt.max_abs().max(1.0);
    let comm = g.commutator(&nt).max_abs();
    if comm > 1e-8 * scale {
        return Err(Error::Inequivalent(comm));
    }
    // Columns: z^k (N^T)^i for i < r, k < m.
    let m = ring.m();
    let powers: Vec<QuotMatrix> = (0..r).map(|i| nt.pow(i)).collect();
    let mut cols = Vec::with_capacity(r * m);
    for p in &powers {
        for k in 0..m {
            cols.push(p.scale_elem(&Poly::monomial(C64::one(), k)).to_vec());
        }
    }
    let a = nalgebra::DMatrix::from_columns(&cols);
    let (x, res) = lstsq(&a, &g.to_vec());
    if res > 1e-8 * g.to_vec().norm().max(1.0) {
        return Err(Error::Inequivalent(res));
    }
    let p: Vec<Poly<C64>> =
        (0..r).map(|i| Poly::new((0..m).map(|k| x[i * m + k]).collect())).collect();
    let pg = eval_gauge(&p, &nt);
    let kappa_defect = (&(&pg * &f2.kappa) - &f1.kappa).max_abs();
    if kappa_defect > 1e-8 * scale * f1.kappa.max_abs().max(1.0) {
        return Err(Error::Inequivalent(kappa_defect));
    }
    Ok(p)
}

/// `d0(P) = (theta P(N^T), -P(N^T) kappa)`.
pub fn d0(fac: &Factorization, p: &[Poly<C64>]) -> TangentPair {
    let pg = eval_gauge(p, &fac.product().transpose());
    TangentPair { tau: &fac.theta * &pg, xi: -&(&pg * &fac.kappa) }
}

/// `d1(tau, xi)`: the traces `Tr(N^i (theta xi + tau kappa))`, `i < r`.
pub fn d1(fac: &Factorization, pair: &TangentPair) -> Result<Vec<Poly<C64>>> {
    check_shapes(fac, pair)?;
    let n = fac.product();
    let dn = &(&fac.theta * &pair.xi) + &(&pair.tau * &fac.kappa);
    let mut out = Vec::with_capacity(fac.size());
    let mut np = QuotMatrix::identity(fac.ring(), fac.size());
    for _ in 0..fac.size() {
        out.push((&np * &dn).trace());
        np = &np * &n;
    }
    Ok(out)
}

fn check_shapes(fac: &Factorization, pair: &TangentPair) -> Result<()> {
    let r = fac.size();
    if pair.tau.size() != r || pair.xi.size() != r || pair.tau.ring() != fac.ring() {
        return Err(Error::ShapeMismatch(format!(
            "tangent pair of size {} against factorization of size {r}",
            pair.tau.size()
        )));
    }
    Ok(())
}

fn tangent_scale(fac: &Factorization, pair: &TangentPair) -> f64 {
    let base = fac.theta.max_abs() * pair.xi.max_abs() + pair.tau.max_abs() * fac.kappa.max_abs();
    base.max(1.0) * fac.product().max_abs().max(1.0).powi(fac.size() as i32 - 1)
}

/// Largest coefficient of `d1(tau, xi)`.
pub fn tangent_defect(fac: &Factorization, pair: &TangentPair) -> Result<f64> {
    Ok(d1(fac, pair)?.iter().map(|p| p.norm()).fold(0.0, f64::max))
}

/// Whether `(tau, xi)` lies in `ker d1`.
pub fn tangent_check(fac: &Factorization, pair: &TangentPair) -> Result<bool> {
    let sym = (&pair.tau - &pair.tau.transpose()).max_abs() + (&pair.xi - &pair.xi.transpose()).max_abs();
    let scale = tangent_scale(fac, pair);
    Ok(sym <= scale_tol(scale) && tangent_defect(fac, pair)? <= scale_tol(scale))
}

/// h-part of `phi((theta + h tau)(kappa + h xi))` over the dual numbers.
pub fn phi_first_order(fac: &Factorization, pair: &TangentPair) -> f64 {
    let ring = fac.ring();
    let eps = ring.epsilon().unwrap_or_default();
    let dring = QuotRing::<Dual>::unfolded(ring.m(), eps);
    let lift = |a: &QuotMatrix, b: &QuotMatrix| {
        QuotMatrix::from_poly(&dring, &PolyMatrix::from_parts(a.lift(), b.lift()))
    };
    let th = lift(&fac.theta, &pair.tau);
    let ka = lift(&fac.kappa, &pair.xi);
    let phi = Poly::new(fac.phi.coeffs().iter().map(|&c| Dual::constant(c)).collect());
    (&th * &ka).poly_eval_scalar(&phi).lift().h_part().max_abs()
}

/// Correct the `xi` part of a symmetric pair so that `d1` vanishes, using
/// the symmetric directions `theta^{-1} N^k` whose trace matrix against
/// `N^i` is the Hankel matrix `Tr(N^{i+k})`.
pub fn project_to_tangent(fac: &Factorization, pair: &TangentPair) -> Result<TangentPair> {
    let ring = fac.ring();
    let r = fac.size();
    let n = fac.product();
    let t = d1(fac, pair)?;
    let powers: Vec<QuotMatrix> = (0..2 * r).map(|i| n.pow(i)).collect();
    let hankel: Vec<Vec<Poly<C64>>> =
        (0..r).map(|i| (0..r).map(|k| powers[i + k].trace()).collect()).collect();
    let h = QuotMatrix::from_entries(ring, &hankel);
    let neg_t: Vec<Poly<C64>> = t.iter().map(|p| -p).collect();
    let a = h.inverse()?.mul_vec(&neg_t);
    let theta_inv = fac.theta.inverse()?;
    let mut xi = pair.xi.clone();
    for (k, ak) in a.iter().enumerate() {
        xi = &xi + &(&theta_inv * &powers[k]).scale_elem(ak);
    }
    Ok(TangentPair { tau: pair.tau.clone(), xi: symmetrize(&xi) })
}

/// Random element of `ker d1`.
pub fn random_tangent<R: Rng>(fac: &Factorization, rng: &mut R) -> Result<TangentPair> {
    let ring = fac.ring();
    let r = fac.size();
    let pair = TangentPair {
        tau: random::quot_symmetric(rng, ring, r),
        xi: random::quot_symmetric(rng, ring, r),
    };
    project_to_tangent(fac, &pair)
}

/// Random gauge polynomial `P` with ring coefficients.
pub fn random_gauge<R: Rng>(ring: &QuotRing, r: usize, rng: &mut R) -> Vec<Poly<C64>> {
    (0..r).map(|_| random::elem(rng, ring)).collect()
}

/// `1/2 Tr(tau xi' - tau' xi)`, a ring element.
pub fn orbit_pairing(fac: &Factorization, p1: &TangentPair, p2: &TangentPair) -> Result<Poly<C64>> {
    for p in [p1, p2] {
        if !tangent_check(fac, p)? {
            return Err(Error::NotTangent);
        }
    }
    let a = (&p1.tau * &p2.xi).trace();
    let b = (&p2.tau * &p1.xi).trace();
    Ok((&a - &b).scale(C64::new(0.5, 0.0)))
}

/// Least-norm solution of `N g - g N = rhs` over the ring, with the residual
/// bound `1e-8 |rhs|`.
pub fn solve_sylvester(n: &QuotMatrix, rhs: &QuotMatrix) -> Result<QuotMatrix> {
    let ring = n.ring();
    let r = n.size();
    let op = QuotMatrix::operator_matrix(ring, r, |g| n.commutator(g));
    let b: DVector<C64> = rhs.to_vec();
    let (x, res) = lstsq(&op, &b);
    let bound = 1e-8 * b.norm().max(f64::MIN_POSITIVE);
    if res > bound && res > 1e-14 {
        return Err(Error::Unsolvable { residual: res, bound });
    }
    Ok(QuotMatrix::from_vec(ring, r, x.as_slice()))
}

/// Kirillov–Kostant form `Tr(N [g, g'])` with `ad(N) g = theta xi + tau kappa`.
pub fn kk_pairing(fac: &Factorization, p1: &TangentPair, p2: &TangentPair) -> Result<Poly<C64>> {
    check_shapes(fac, p1)?;
    check_shapes(fac, p2)?;
    let n = fac.product();
    let rhs = |p: &TangentPair| &(&fac.theta * &p.xi) + &(&p.tau * &fac.kappa);
    let g1 = solve_sylvester(&n, &rhs(p1))?;
    let g2 = solve_sylvester(&n, &rhs(p2))?;
    Ok((&n * &g1.commutator(&g2)).trace())
}

/// Diagonal matrix of scalars as a ring matrix.
pub fn diag_over(ring: &QuotRing, d: &[C64]) -> QuotMatrix {
    QuotMatrix::from_const(ring, &Mat::from_diag(d))
}
