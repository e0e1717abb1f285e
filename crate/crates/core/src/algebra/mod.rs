//! Exact and numerical algebra: dual numbers, polynomials, quotient rings,
//! polynomial matrices, truncated series, residues and complex linear algebra.

mod dual;
pub mod linalg;
mod mat;
mod poly;
mod polymat;
mod quot;
pub mod residue;
mod scalar;
mod series;

pub use dual::Dual;
pub use mat::{dist_identity, Mat};
pub use poly::Poly;
pub use polymat::PolyMatrix;
pub use quot::{QuotMatrix, QuotRing};
pub use residue::{
    finite_residues, partial_fractions, recombine, residue_at_infinity, residue_sum_check,
    RationalForm,
};
pub use scalar::{cis, divisor_points, Scalar, C64};
pub use series::Series;
