use num_complex::Complex64;

use super::poly::Poly;
use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 500;

/// All complex roots of `p` (with multiplicity) by Aberth–Ehrlich iteration
/// followed by Newton polishing on the undeflated polynomial.
///
/// For real-coefficient input the result is closed under conjugation.
pub fn poly_roots(p: &Poly) -> Result<Vec<Complex64>> {
    let n = p.degree();
    if p.is_zero() || n == 0 {
        return Err(Error::Domain("poly_roots needs degree >= 1".into()));
    }
    let lead = p.leading();
    let monic = p.scale(lead.inv());
    let dp = monic.derivative();
    let c = monic.coeffs();

    if n == 1 {
        return Ok(vec![-c[0]]);
    }

    // Initial guesses on a circle of radius given by the geometric mean of the
    // root moduli, rotated off the real axis to avoid symmetric stalls.
    let radius = c[0].norm().powf(1.0 / n as f64).max(1e-3);
    let cauchy = 1.0 + c[..n].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let radius = radius.min(cauchy);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64) + 0.4;
            Complex64::from_polar(radius, theta)
        })
        .collect();

    for _ in 0..MAX_ITERATIONS {
        let mut max_step = 0.0_f64;
        for i in 0..n {
            let pv = monic.eval(z[i]);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dp.eval(z[i]);
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-15 {
            break;
        }
    }

    for zi in z.iter_mut() {
        for _ in 0..3 {
            let d = dp.eval(*zi);
            if d.norm() == 0.0 {
                break;
            }
            let step = monic.eval(*zi) / d;
            if step.re.is_finite() && step.im.is_finite() {
                *zi -= step;
            }
        }
    }

    if p.has_real_coeffs(1e-14) {
        conjugate_close(&mut z);
    }

    let scale = 1.0 + p.max_abs_coeff();
    let residual = z.iter().map(|&r| p.eval(r).norm()).fold(0.0, f64::max);
    // Clustered roots can stall the step criterion while the residual is
    // already acceptable; the residual is the acceptance test.
    if !residual.is_finite() || residual > 1e-8 * scale {
        return Err(Error::NonConvergence { iterations: MAX_ITERATIONS, residual });
    }
    Ok(z)
}

/// Snap nearly real roots onto the axis and pair the rest with their mirrors.
fn conjugate_close(z: &mut [Complex64]) {
    let n = z.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] {
            continue;
        }
        if z[i].im.abs() <= 1e-10 * (1.0 + z[i].norm()) {
            z[i].im = 0.0;
            used[i] = true;
            continue;
        }
        let target = z[i].conj();
        let partner = (0..n)
            .filter(|&j| j != i && !used[j])
            .min_by(|&a, &b| {
                (z[a] - target)
                    .norm()
                    .partial_cmp(&(z[b] - target).norm())
                    .unwrap()
            });
        used[i] = true;
        if let Some(j) = partner {
            let avg = 0.5 * (z[i] + z[j].conj());
            z[i] = avg;
            z[j] = avg.conj();
            used[j] = true;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted_re(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn linear_root() {
        let r = poly_roots(&Poly::from_real(&[1.0, 1.0])).unwrap();
        assert_eq!(r, vec![c(-1.0, 0.0)]);
    }

    #[test]
    fn difference_of_squares() {
        let r = sorted_re(poly_roots(&Poly::from_real(&[-1.0, 0.0, 1.0])).unwrap());
        assert!((r[0] - c(-1.0, 0.0)).norm() < 1e-12);
        assert!((r[1] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_constant() {
        assert!(poly_roots(&Poly::from_real(&[2.0])).is_err());
    }

    #[test]
    fn complex_pairs_are_conjugate() {
        // (s^2 + 2s + 5)(s - 3)(s + 0.5)
        let p = Poly::from_real(&[5.0, 2.0, 1.0]) * Poly::from_real(&[-3.0, 1.0]) * Poly::from_real(&[0.5, 1.0]);
        let roots = poly_roots(&p).unwrap();
        assert_eq!(roots.len(), 4);
        for r in &roots {
            assert!(roots.iter().any(|q| (q - r.conj()).norm() < 1e-8));
            assert!(p.eval(*r).norm() < 1e-10);
        }
    }

    #[test]
    fn clustered_roots_within_tolerance() {
        let p = Poly::from_roots(&[c(-1.0, 0.0), c(-1.000001, 0.0), c(-2.0, 0.0)]);
        let roots = poly_roots(&p).unwrap();
        for r in roots {
            assert!(p.eval(r).norm() < 1e-8 * (1.0 + p.max_abs_coeff()));
        }
    }
}
