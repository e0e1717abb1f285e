//! Exponent data and connections `d + A(z) dz / (z^m - eps^m)` on the
//! trivial rank-`r` bundle, built from (and reduced back to) the local
//! endomorphism `N` over `C[z]/(z^m - eps^m)`.

use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::linalg::{eigenvalues, match_spectrum};
use crate::algebra::{Dual, Mat, Poly, PolyMatrix, QuotMatrix, QuotRing, C64};
use crate::error::{Error, Result};
use crate::orbit::cyclic_krylov;
use crate::random;

/// Relative tolerance for coincidences among exponents.
pub const GENERIC_TOL: f64 = 1e-10;
/// Eigenvalue matching tolerance at divisor points.
pub const MATCH_TOL: f64 = 1e-8;

/// Local exponent data: `mu_k`, `nu(T) = sum c[l][j] z^j T^l`, `lambda_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentSpec {
    pub r: usize,
    pub m: usize,
    pub mu: Vec<C64>,
    /// `c[l][j]` for `l < r`, `j < m`.
    pub c: Vec<Vec<C64>>,
    pub lambda: Vec<C64>,
    pub epsilon: C64,
}

/// User-facing form of an [`ExponentSpec`]; `lambda` is derived.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecInput {
    pub r: usize,
    pub m: usize,
    pub mu: Vec<C64>,
    pub c: Vec<Vec<C64>>,
    pub epsilon: C64,
}

impl SpecInput {
    pub fn build(&self) -> Result<ExponentSpec> {
        make_spec(self.r, self.m, &self.mu, &self.c, self.epsilon)
    }
}

fn scale_of(xs: impl IntoIterator<Item = C64>) -> f64 {
    xs.into_iter().map(|x| x.norm()).fold(1.0, f64::max)
}

pub fn make_spec(r: usize, m: usize, mu: &[C64], c: &[Vec<C64>], eps: C64) -> Result<ExponentSpec> {
    if r == 0 || m == 0 {
        return Err(Error::ShapeMismatch("r and m must be positive".into()));
    }
    if mu.len() != r || c.len() != r || c.iter().any(|row| row.len() != m) {
        return Err(Error::ShapeMismatch(format!("expected {r} exponents and an {r}x{m} table c")));
    }
    let mscale = scale_of(mu.iter().cloned());
    for k in 0..r {
        for k2 in k + 1..r {
            if (mu[k] - mu[k2]).norm() <= GENERIC_TOL * mscale {
                return Err(Error::DuplicateMu(k, k2));
            }
        }
    }
    let lambda = (0..r)
        .map(|k| (0..r).map(|l| c[l][m - 1] * mu[k].powu(l as u32)).sum())
        .collect();
    let spec = ExponentSpec { r, m, mu: mu.to_vec(), c: c.to_vec(), lambda, epsilon: eps };
    spec.check_generic()?;
    Ok(spec)
}

impl ExponentSpec {
    pub fn ring(&self) -> QuotRing {
        QuotRing::unfolded(self.m, self.epsilon)
    }

    pub fn is_irregular(&self) -> bool {
        self.epsilon == C64::zero()
    }

    pub fn points(&self) -> Vec<C64> {
        crate::algebra::divisor_points(self.m, self.epsilon)
    }

    /// `phi_mu(T) = prod (T - mu_k)`.
    pub fn phi(&self) -> Poly<C64> {
        Poly::from_roots(&self.mu)
    }

    /// `nu(mu_k)` as a polynomial in `z` of degree `< m`.
    pub fn nu(&self, k: usize) -> Poly<C64> {
        Poly::new(
            (0..self.m)
                .map(|j| (0..self.r).map(|l| self.c[l][j] * self.mu[k].powu(l as u32)).sum())
                .collect(),
        )
    }

    /// Ring coefficient of `T^l` in `nu(T)`.
    pub fn nu_coeffs(&self) -> Vec<Poly<C64>> {
        (0..self.r).map(|l| Poly::new(self.c[l].clone())).collect()
    }

    /// `nu(mu_k)` pairwise distinct at every divisor point.
    pub fn check_generic(&self) -> Result<()> {
        let nus: Vec<Poly<C64>> = (0..self.r).map(|k| self.nu(k)).collect();
        for p in self.points() {
            let vals: Vec<C64> = nus.iter().map(|n| n.eval(p)).collect();
            let scale = scale_of(vals.iter().cloned());
            for k in 0..self.r {
                for k2 in k + 1..self.r {
                    if (vals[k] - vals[k2]).norm() <= GENERIC_TOL * scale {
                        return Err(Error::GenericityFailure { k, k2, root: p });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_input(&self) -> SpecInput {
        SpecInput { r: self.r, m: self.m, mu: self.mu.clone(), c: self.c.clone(), epsilon: self.epsilon }
    }

    /// Same exponents over another divisor parameter.
    pub fn with_epsilon(&self, eps: C64) -> Result<ExponentSpec> {
        make_spec(self.r, self.m, &self.mu, &self.c, eps)
    }
}

/// `N = S(z) diag(mu) S(z)^{-1}` with a random `S` of degree `< m` whose
/// determinant is a unit with margin at least `0.05` and whose inverse has
/// coefficients bounded by [`MAX_CONJUGATOR_INVERSE`].
pub fn random_n<R: Rng>(ring: &QuotRing, mu: &[C64], rng: &mut R) -> QuotMatrix {
    let r = mu.len();
    let d = QuotMatrix::from_const(ring, &Mat::from_diag(mu));
    loop {
        let s = &random::quot_mat(rng, ring, r) + &QuotMatrix::identity(ring, r);
        if ring.unit_margin(&s.det()) < 0.05 {
            continue;
        }
        match s.inverse() {
            Ok(si) if si.max_abs() <= MAX_CONJUGATOR_INVERSE => return &(&s * &d) * &si,
            _ => {}
        }
    }
}

/// Keeps random `N` within a few digits of normal.
pub const MAX_CONJUGATOR_INVERSE: f64 = 8.0;

#[derive(Clone, Debug)]
pub struct UnfoldedConnection {
    pub spec: ExponentSpec,
    /// Connection matrix, `z`-degree `< m`.
    pub a: PolyMatrix<C64>,
    pub n: QuotMatrix,
}

impl UnfoldedConnection {
    pub fn ring(&self) -> QuotRing {
        self.spec.ring()
    }

    pub fn a_mod(&self) -> QuotMatrix {
        QuotMatrix::from_poly(&self.ring(), &self.a)
    }
}

fn check_injective(n: &QuotMatrix) -> Result<()> {
    cyclic_krylov(n, &mut random::rng(0x5eed)).map(|_| ()).map_err(|_| Error::NotInjectiveAction)
}

/// `A` = the degree-`< m` lift of `nu(N)`.
pub fn connection_from_n(n: &QuotMatrix, spec: &ExponentSpec) -> Result<UnfoldedConnection> {
    if n.size() != spec.r || n.ring().m() != spec.m {
        return Err(Error::ShapeMismatch("N does not match the exponent spec".into()));
    }
    crate::orbit::check_phi(n, &spec.phi())?;
    check_injective(n)?;
    let a = n.poly_eval(&spec.nu_coeffs()).lift().with_bound(spec.m);
    Ok(UnfoldedConnection { spec: spec.clone(), a, n: n.clone() })
}

/// Ring coefficients of `psi(T)` with `psi(nu(mu_k)) = mu_k` in the ring
/// (Lagrange interpolation).
pub fn interpolation_poly(spec: &ExponentSpec) -> Result<Vec<Poly<C64>>> {
    let ring = spec.ring();
    let r = spec.r;
    let nus: Vec<Poly<C64>> = (0..r).map(|k| spec.nu(k)).collect();
    let scale = scale_of(nus.iter().flat_map(|p| p.coeffs().to_vec()));
    let mut psi = vec![Poly::zero(); r];
    for k in 0..r {
        let mut basis = vec![Poly::constant(spec.mu[k])];
        for k2 in 0..r {
            if k2 == k {
                continue;
            }
            let diff = &nus[k] - &nus[k2];
            if ring.unit_margin(&diff) <= GENERIC_TOL * scale {
                return Err(Error::InterpolationSingular(k, k2));
            }
            let inv = ring.inverse(&diff).map_err(|_| Error::InterpolationSingular(k, k2))?;
            // basis *= (T - nu_k2) / (nu_k - nu_k2)
            let neg = ring.mul(&(-&nus[k2]), &inv);
            let mut next = vec![Poly::zero(); basis.len() + 1];
            for (i, b) in basis.iter().enumerate() {
                next[i + 1] = &next[i + 1] + &ring.mul(b, &inv);
                next[i] = &next[i] + &ring.mul(b, &neg);
            }
            basis = next;
        }
        for (i, b) in basis.into_iter().enumerate() {
            psi[i] = &psi[i] + &b;
        }
    }
    Ok(psi)
}

fn spectral_check(a: &QuotMatrix, spec: &ExponentSpec) -> Result<()> {
    for p in spec.points() {
        let computed = eigenvalues(&a.eval(p));
        let expected: Vec<C64> = (0..spec.r).map(|k| spec.nu(k).eval(p)).collect();
        let tol = MATCH_TOL * scale_of(expected.iter().cloned());
        if let Err(k) = match_spectrum(&computed, &expected, tol) {
            return Err(Error::SpectralMismatch {
                root: p,
                detail: format!("no eigenvalue near nu(mu_{k}) = {}", expected[k]),
            });
        }
    }
    Ok(())
}

/// `N = psi(A mod (z^m - eps^m))`.
pub fn n_from_connection(a: &PolyMatrix<C64>, spec: &ExponentSpec) -> Result<QuotMatrix> {
    if a.size() != spec.r {
        return Err(Error::ShapeMismatch("A does not match the exponent spec".into()));
    }
    let ring = spec.ring();
    let am = QuotMatrix::from_poly(&ring, a);
    spectral_check(&am, spec)?;
    let psi = interpolation_poly(spec)?;
    let n = am.poly_eval(&psi);
    crate::orbit::check_phi(&n, &spec.phi()).map_err(|e| Error::SpectralMismatch {
        root: C64::zero(),
        detail: format!("higher-order eigenvalues do not match nu(mu_k): {e}"),
    })?;
    Ok(n)
}

/// Eigenvalue of `A` in `C[z]/(z^m)` near the simple eigenvalue `start` of
/// `A(0)`, by Newton's method on `det(e - A)` (derivative through dual
/// numbers).
pub fn ring_eigenvalue(a: &QuotMatrix, start: C64) -> Result<Poly<C64>> {
    let ring = a.ring();
    let eps = ring.epsilon().unwrap_or_default();
    let dring = QuotRing::<Dual>::unfolded(ring.m(), eps);
    let ad = a.map(&dring, Dual::constant);
    let r = a.size();
    let mut e = Poly::constant(start);
    let iters = 2 + (ring.m() as f64).log2().ceil() as usize;
    for _ in 0..iters {
        let ed = Poly::new(e.coeffs().iter().map(|&x| Dual::constant(x)).collect::<Vec<_>>());
        let id = QuotMatrix::identity(&dring, r);
        let shifted = &id.scale_elem(&ed) + &id.scale(Dual::h());
        let chi = (&shifted - &ad).det();
        let val = Poly::new(chi.coeffs().iter().map(|x| x.re).collect::<Vec<_>>());
        let der = Poly::new(chi.coeffs().iter().map(|x| x.eps).collect::<Vec<_>>());
        let step = ring.mul(&val, &ring.inverse(&der)?);
        e = &e - &step;
    }
    Ok(e)
}

#[derive(Clone, Debug, Serialize)]
pub struct PointData {
    pub point: C64,
    /// Residue matrix `A(p)/q'(p)`; for `eps = 0` the leading coefficient `A(0)`.
    pub residue: Vec<Vec<C64>>,
    /// Residue eigenvalues, ordered to match `k`.
    pub eigenvalues: Vec<C64>,
    pub expected: Vec<C64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalReport {
    pub irregular: bool,
    pub points: Vec<PointData>,
    /// `eps = 0`: max distance between the ring eigenvalues of `A mod z^m`
    /// and `nu(mu_k)`.
    pub polar_defect: Option<f64>,
    /// Sum over divisor points of the `k`-th residue eigenvalue.
    pub residue_sums: Vec<C64>,
    pub lambda: Vec<C64>,
    pub residue_sum_defect: f64,
    pub pass: bool,
}

pub fn local_data(conn: &UnfoldedConnection) -> LocalReport {
    let spec = &conn.spec;
    let r = spec.r;
    let m = spec.m;
    let q = crate::algebra::RationalForm::unfolded(conn.a.clone(), m, spec.epsilon).denominator;
    let dq = q.derivative();
    let irregular = spec.is_irregular();
    let mut points = Vec::new();
    let mut sums = vec![C64::zero(); r];
    let mut polar_defect = None;
    let mut all_pass = true;
    for p in spec.points() {
        let scale_p = if irregular { C64::one() } else { dq.eval(p).inv() };
        let res = conn.a.eval(p).scale(scale_p);
        let expected: Vec<C64> = (0..r).map(|k| spec.nu(k).eval(p) * scale_p).collect();
        let computed = eigenvalues(&res);
        let tol = MATCH_TOL * scale_of(expected.iter().cloned());
        let (eigs, pass) = match match_spectrum(&computed, &expected, tol) {
            Ok(perm) => (perm.iter().map(|&i| computed[i]).collect::<Vec<_>>(), true),
            Err(_) => (computed.clone(), false),
        };
        all_pass &= pass;
        if !irregular && pass {
            for k in 0..r {
                sums[k] += eigs[k];
            }
        }
        points.push(PointData { point: p, residue: res.to_rows(), eigenvalues: eigs, expected, pass });
    }
    if irregular {
        let am = conn.a_mod();
        let mut defect: f64 = 0.0;
        for k in 0..r {
            match ring_eigenvalue(&am, spec.nu(k).coeff(0)) {
                Ok(e) => {
                    defect = defect.max((&e - &spec.nu(k)).norm());
                    sums[k] = e.coeff(m - 1);
                }
                Err(_) => defect = f64::INFINITY,
            }
        }
        all_pass &= defect <= MATCH_TOL * scale_of(conn.a.coeffs().iter().flat_map(|c| c.data().to_vec()));
        polar_defect = Some(defect);
    }
    let residue_sum_defect =
        sums.iter().zip(&spec.lambda).map(|(s, l)| (s - l).norm()).fold(0.0, f64::max);
    let pass = all_pass && residue_sum_defect <= GENERIC_TOL * scale_of(spec.lambda.iter().cloned()) * 10.0;
    LocalReport {
        irregular,
        points,
        polar_defect,
        residue_sums: sums,
        lambda: spec.lambda.clone(),
        residue_sum_defect,
        pass,
    }
}

/// JSON view of a connection: coefficient matrices lowest degree first.
#[derive(Clone, Debug, Serialize)]
pub struct ConnectionJson {
    pub spec: ExponentSpec,
    pub a: Vec<Vec<Vec<C64>>>,
    pub n: Vec<Vec<Vec<C64>>>,
}

impl From<&UnfoldedConnection> for ConnectionJson {
    fn from(c: &UnfoldedConnection) -> Self {
        ConnectionJson {
            spec: c.spec.clone(),
            a: c.a.coeffs().iter().map(|m| m.to_rows()).collect(),
            n: c.n.lift().coeffs().iter().map(|m| m.to_rows()).collect(),
        }
    }
}
