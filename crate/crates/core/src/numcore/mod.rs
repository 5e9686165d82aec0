//! Small dense complex linear algebra.

mod expm;
mod linalg;
mod matrix;

pub use expm::mat_exp;
pub use linalg::{
    adjugate, det, hermitian_eigenvalues, inverse, nullspace, rank, singular_values, solve,
    solve_with, Lu, Tolerance,
};
pub use matrix::CMatrix;
pub use num_complex::Complex64 as C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
