use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};

/// Non-regularized incomplete beta function `B(x; a, b) = int_0^x u^(a-1) (1-u)^(b-1) du`.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !(a > 0.0) || !(b > 0.0) {
        return Err(Error::Domain(format!(
            "incomplete_beta requires 0 <= x <= 1, a > 0, b > 0 (got x={x}, a={a}, b={b})"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(beta_reg(a, b, x) * ln_beta(a, b).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate, QuadRule};

    #[test]
    fn endpoints() {
        assert_eq!(incomplete_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert!((incomplete_beta(1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn matches_quadrature_of_definition() {
        let rule = QuadRule::with_tol(1e-13, 1e-13).with_hints(&[0.0]);
        let oracle = integrate(|u| u.powf(-0.5) * (1.0 - u).powf(0.5), 0.0, 0.5, &rule).unwrap();
        let v = incomplete_beta(0.5, 0.5, 1.5).unwrap();
        assert!((v - oracle).abs() < 1e-10, "{v} vs {oracle}");
        // closed form: B(1/2; 1/2, 3/2) = pi/4 + 1/2
        assert!((v - (std::f64::consts::FRAC_PI_4 + 0.5)).abs() < 1e-12 * v);
    }

    #[test]
    fn domain_errors() {
        assert!(incomplete_beta(1.5, 1.0, 1.0).is_err());
        assert!(incomplete_beta(0.5, 0.0, 1.0).is_err());
    }
}
