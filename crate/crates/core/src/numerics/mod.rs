//! Complex polynomials, dense solves, root finding, adaptive quadrature and
//! a few special functions shared by the model solvers.

mod interp;
mod linalg;
mod poly;
mod quad;
mod roots;
mod special;

pub use interp::{circle_mean, neville_at_zero, Pchip};
pub use linalg::{solve_linear, CMatrix, LinSolveReport};
pub use poly::{poly_eval, Poly};
pub use quad::{integrate, integrate_complex, integrate_complex_with_error, QuadRule};
pub use roots::poly_roots;
pub use special::incomplete_beta;

pub type C64 = num_complex::Complex64;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}
