//! Complex numerical linear algebra: least squares, null spaces, eigen-data
//! and spectrum matching. Matrices are nalgebra types; singular value and
//! eigenvalue decompositions go through LAPACK.

use nalgebra::{DMatrix, DVector};
use ndarray::Array2;
use ndarray_linalg::{EigVals, SVD};
use num_traits::Zero;

use super::mat::Mat;
use super::scalar::C64;

/// Relative cutoff for singular values treated as zero.
pub const RCOND: f64 = 1e-12;

/// Full SVD `a = U diag(s) V^H`, returning `(U, s, V^H)`.
pub fn svd(a: &DMatrix<C64>) -> (DMatrix<C64>, Vec<f64>, DMatrix<C64>) {
    let (rows, cols) = a.shape();
    let nd = Array2::from_shape_fn((rows, cols), |(i, j)| a[(i, j)]);
    let (u, s, vt) = nd.svd(true, true).expect("LAPACK SVD failed");
    let (u, vt) = (u.unwrap(), vt.unwrap());
    (
        DMatrix::from_fn(rows, rows, |i, j| u[(i, j)]),
        s.to_vec(),
        DMatrix::from_fn(cols, cols, |i, j| vt[(i, j)]),
    )
}

/// Moore–Penrose pseudo-inverse, reusable across right-hand sides.
#[derive(Clone, Debug)]
pub struct PseudoInverse {
    pinv: DMatrix<C64>,
    a: DMatrix<C64>,
    pub rank: usize,
}

impl PseudoInverse {
    pub fn new(a: &DMatrix<C64>) -> Self {
        let (rows, cols) = a.shape();
        if rows == 0 || cols == 0 {
            return PseudoInverse { pinv: DMatrix::zeros(cols, rows), a: a.clone(), rank: 0 };
        }
        let (u, sv, vt) = svd(a);
        let smax = sv.iter().cloned().fold(0.0, f64::max);
        let mut pinv = DMatrix::<C64>::zeros(cols, rows);
        let mut rank = 0;
        for (k, &s) in sv.iter().enumerate() {
            if s <= RCOND * smax || s == 0.0 {
                continue;
            }
            rank += 1;
            let vk = vt.row(k).adjoint();
            let uk = u.column(k).adjoint();
            pinv += (vk * uk) * C64::new(1.0 / s, 0.0);
        }
        PseudoInverse { pinv, a: a.clone(), rank }
    }

    /// Least-norm least-squares solution and its residual norm `|Ax - b|`.
    pub fn solve(&self, b: &DVector<C64>) -> (DVector<C64>, f64) {
        let x = &self.pinv * b;
        let res = (&self.a * &x - b).norm();
        (x, res)
    }
}

/// Least-norm solution of `A x = b` and the residual norm.
pub fn lstsq(a: &DMatrix<C64>, b: &DVector<C64>) -> (DVector<C64>, f64) {
    PseudoInverse::new(a).solve(b)
}

/// Orthonormal basis (columns) of the null space of `a`, using singular
/// values below `rel_tol * sigma_max`.
pub fn nullspace(a: &DMatrix<C64>, rel_tol: f64) -> DMatrix<C64> {
    let cols = a.ncols();
    let (_, sv, vt) = svd(a);
    let smax = sv.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let keep: Vec<usize> = (0..cols).filter(|&k| sv.get(k).map_or(true, |&s| s <= rel_tol * smax)).collect();
    let mut ns = DMatrix::<C64>::zeros(cols, keep.len());
    for (c, &k) in keep.iter().enumerate() {
        ns.set_column(c, &vt.row(k).adjoint());
    }
    ns
}

pub fn rank(a: &DMatrix<C64>, rel_tol: f64) -> usize {
    if a.is_empty() {
        return 0;
    }
    let (_, sv, _) = svd(a);
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > rel_tol * smax && s > 0.0).count()
}

pub fn eigenvalues(m: &Mat<C64>) -> Vec<C64> {
    let n = m.rows();
    if n == 0 {
        return Vec::new();
    }
    let nd = Array2::from_shape_fn((n, n), |(i, j)| m[(i, j)]);
    nd.eigvals().expect("LAPACK eigenvalue solver failed").to_vec()
}

/// Unit eigenvector for a simple eigenvalue `lambda`: the right singular
/// vector of `m - lambda I` with smallest singular value.
pub fn eigenvector(m: &Mat<C64>, lambda: C64) -> Vec<C64> {
    let n = m.rows();
    let shifted = m.to_na() - DMatrix::<C64>::identity(n, n) * lambda;
    // singular values come in decreasing order
    let (_, _, vt) = svd(&shifted);
    vt.row(n - 1).adjoint().iter().cloned().collect()
}

/// Matrix whose columns are eigenvectors for the given (simple) eigenvalues.
pub fn eigenvector_matrix(m: &Mat<C64>, lambdas: &[C64]) -> Mat<C64> {
    let cols: Vec<Vec<C64>> = lambdas.iter().map(|&l| eigenvector(m, l)).collect();
    Mat::from_fn(m.rows(), lambdas.len(), |i, j| cols[j][i])
}

/// Greedy nearest matching of `computed` against `expected`.
///
/// Expected values are visited in order of increasing real part; each takes
/// the nearest unused computed value. Returns `perm` with
/// `computed[perm[k]] ~ expected[k]`, or the first failing index when a
/// distance exceeds `tol` or the sizes differ.
pub fn match_spectrum(computed: &[C64], expected: &[C64], tol: f64) -> Result<Vec<usize>, usize> {
    if computed.len() != expected.len() {
        return Err(0);
    }
    let mut order: Vec<usize> = (0..expected.len()).collect();
    order.sort_by(|&a, &b| expected[a].re.total_cmp(&expected[b].re));
    let mut used = vec![false; computed.len()];
    let mut perm = vec![usize::MAX; expected.len()];
    for &k in &order {
        let best = (0..computed.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                (computed[a] - expected[k]).norm().total_cmp(&(computed[b] - expected[k]).norm())
            })
            .ok_or(k)?;
        if (computed[best] - expected[k]).norm() > tol {
            return Err(k);
        }
        used[best] = true;
        perm[k] = best;
    }
    Ok(perm)
}

/// Column-stacked vectorization helpers for matrix equations.
pub fn vec_of(m: &Mat<C64>) -> DVector<C64> {
    DVector::from_iterator(m.rows() * m.cols(), m.data().iter().cloned())
}

pub fn mat_of(v: &[C64], rows: usize, cols: usize) -> Mat<C64> {
    Mat::from_fn(rows, cols, |i, j| v[i * cols + j])
}

/// Matrix of the linear map `X -> [a, X]` on row-major vectorized `X`.
pub fn ad_matrix(a: &Mat<C64>) -> DMatrix<C64> {
    let n = a.rows();
    let mut out = DMatrix::<C64>::zeros(n * n, n * n);
    for p in 0..n {
        for q in 0..n {
            let col = p * n + q;
            // [a, E_pq] = a E_pq - E_pq a
            for i in 0..n {
                out[(i * n + q, col)] += a[(i, p)];
            }
            for j in 0..n {
                out[(p * n + j, col)] -= a[(q, j)];
            }
        }
    }
    out
}

/// Dimension of the joint commutant `{X : [a_i, X] = 0 for all i}`.
pub fn joint_commutant_dim(mats: &[Mat<C64>]) -> usize {
    let n = mats.first().map_or(0, |m| m.rows());
    if n == 0 {
        return 0;
    }
    let mut stacked = DMatrix::<C64>::zeros(mats.len() * n * n, n * n);
    let mut scale: f64 = 0.0;
    for (k, a) in mats.iter().enumerate() {
        stacked.view_mut((k * n * n, 0), (n * n, n * n)).copy_from(&ad_matrix(a));
        scale = scale.max(a.max_abs());
    }
    if scale.is_zero() {
        return n * n;
    }
    n * n - rank(&stacked, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    #[test]
    fn ad_matrix_matches_commutator() {
        let a = Mat::from_fn(3, 3, |i, j| c(i as f64 - j as f64 * 0.5, (i * j) as f64));
        let x = Mat::from_fn(3, 3, |i, j| c(0.1 * (i + 2 * j) as f64, -0.3 * i as f64));
        let lhs = &ad_matrix(&a) * &vec_of(&x);
        let rhs = vec_of(&a.commutator(&x));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let ns = nullspace(&a, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).norm() < 1e-12);
    }

    #[test]
    fn eigen_pairs() {
        let m = Mat::from_rows(&[vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 1.0)]]);
        let ev = eigenvalues(&m);
        let perm = match_spectrum(&ev, &[c(-1.0, 1.0), c(2.0, 0.0)], 1e-10).unwrap();
        assert_eq!(perm.len(), 2);
        for &l in &ev {
            let v = eigenvector(&m, l);
            let mv = m.mul_vec(&v);
            assert!(mv.iter().zip(&v).all(|(a, b)| (a - l * b).norm() < 1e-12));
        }
    }

    #[test]
    fn commutant_of_scalars_and_generic_pair() {
        let d = Mat::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(joint_commutant_dim(&[d.clone()]), 2);
        let e = Mat::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]);
        assert_eq!(joint_commutant_dim(&[d, e]), 1);
    }
}
