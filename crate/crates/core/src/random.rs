//! Seeded random generators for test instances and cyclic-vector search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Mat, Poly, PolyMatrix, QuotMatrix, QuotRing, C64};

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform sample from the open unit disk.
pub fn disk<R: Rng>(rng: &mut R) -> C64 {
    loop {
        let z = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if z.norm_sqr() < 1.0 {
            return z;
        }
    }
}

pub fn mat<R: Rng>(rng: &mut R, r: usize) -> Mat<C64> {
    Mat::from_fn(r, r, |_, _| disk(rng))
}

pub fn symmetric<R: Rng>(rng: &mut R, r: usize) -> Mat<C64> {
    let a = mat(rng, r);
    (&a + &a.transpose()).scale(C64::new(0.5, 0.0))
}

/// Ring element with `m` random coefficients.
pub fn elem<R: Rng>(rng: &mut R, ring: &QuotRing<C64>) -> Poly<C64> {
    Poly::new((0..ring.m()).map(|_| disk(rng)).collect())
}

pub fn quot_mat<R: Rng>(rng: &mut R, ring: &QuotRing<C64>, r: usize) -> QuotMatrix<C64> {
    let coeffs = (0..ring.m()).map(|_| mat(rng, r)).collect();
    QuotMatrix::from_poly(ring, &PolyMatrix::new(r, coeffs))
}

pub fn quot_symmetric<R: Rng>(rng: &mut R, ring: &QuotRing<C64>, r: usize) -> QuotMatrix<C64> {
    let coeffs = (0..ring.m()).map(|_| symmetric(rng, r)).collect();
    QuotMatrix::from_poly(ring, &PolyMatrix::new(r, coeffs))
}
