//! Polynomial-coefficient vectors shared by the rational-transform solvers.

use num_complex::Complex64;
use serde::Serialize;

use crate::dist::PoleSplit;
use crate::error::{Error, Result};
use crate::numerics::{circle_mean, solve_linear, CMatrix, LinSolveReport};

/// Condition number above which the system is re-solved with rescaled columns.
pub const COND_LIMIT: f64 = 1e10;

/// Coefficients `a_0 .. a_K` of the numerator polynomial of a transform.
///
/// `r = 1` marks the stationary limit `a_k = lim (1 - r) a_k(r)`.
#[derive(Clone, Debug, Serialize)]
pub struct CoeffVector {
    pub r: f64,
    pub coeffs: Vec<Complex64>,
    pub solve_report: LinSolveReport,
    /// Column scale `sigma` used when the plain system was ill conditioned.
    pub rescaled_by: Option<f64>,
    pub pole_split: Option<PoleSplit>,
}

impl CoeffVector {
    /// `sum_k a_k s^k`.
    pub fn poly_at(&self, s: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }
}

/// Solves `A x = b`; when `cond(A) > COND_LIMIT`, column `k` is divided by
/// `sigma^(k + first_power)` first (the substitution `s -> sigma t`) and the
/// solution mapped back.
pub fn solve_guarded(
    a: &CMatrix,
    b: &[Complex64],
    sigma: f64,
    first_power: i32,
) -> Result<(LinSolveReport, Option<f64>)> {
    let plain = solve_linear(a, b);
    match plain {
        Ok(rep) if rep.condition_estimate <= COND_LIMIT => return Ok((rep, None)),
        Err(Error::SingularMatrix { .. }) | Ok(_) => {}
        Err(e) => return Err(e),
    }
    let n = a.dim();
    let mut scaled = a.clone();
    for k in 0..n {
        let f = sigma.powi(k as i32 + first_power);
        for i in 0..n {
            scaled[(i, k)] = a[(i, k)] / f;
        }
    }
    let rep = match solve_linear(&scaled, b) {
        Ok(rep) => rep,
        Err(e) => return plain.map(|p| (p, None)).map_err(|_| e),
    };
    if let Ok(p) = &plain {
        if p.condition_estimate <= rep.condition_estimate {
            return Ok((p.clone(), None));
        }
    }
    let solution = rep
        .solution
        .iter()
        .enumerate()
        .map(|(k, x)| x / sigma.powi(k as i32 + first_power))
        .collect();
    Ok((LinSolveReport { solution, ..rep }, Some(sigma)))
}

/// Evaluates `f(s)` directly, or by a circle mean when `s` sits within
/// `1e-6 (1 + |p|)` of an apparent pole `p` that `f` is known to cancel.
pub fn eval_removable<F>(f: F, s: Complex64, apparent: &[Complex64], radius: f64) -> Result<Complex64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let near = apparent.iter().any(|p| (s - p).norm() <= 1e-6 * (1.0 + p.norm()));
    if !near {
        return f(s);
    }
    let mut err = None;
    let v = circle_mean(
        |z| match f(z) {
            Ok(x) => vec![x],
            Err(e) => {
                err = Some(e);
                vec![Complex64::new(f64::NAN, 0.0)]
            }
        },
        s,
        radius,
        16,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(v[0]),
    }
}

/// Fails when a transform that must be real on the real axis is not.
pub fn check_real(value: Complex64, s: f64) -> Result<()> {
    if value.im.abs() > 1e-8 * (1.0 + value.re.abs()) {
        return Err(Error::Domain(format!(
            "transform at real s = {s} has imaginary part {:e}; coefficient assembly is inconsistent",
            value.im
        )));
    }
    Ok(())
}
