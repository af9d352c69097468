//! Strictly negative multiplier `V < 0` with `B` of rational transform.
//!
//! The transient transform is `Psi_W(r, s) = e^{-s w} + P_r(s) / D_B(s)` for a
//! polynomial `P_r` of degree `l` (the pole count of `Phi_B`); its coefficients
//! follow from requiring the left-half-plane side to stay analytic at every pole.

use num_complex::Complex64;
use serde::Serialize;

use crate::coeffs::{check_real, eval_removable, solve_guarded, CoeffVector};
use crate::dist::{ModelKind, ModelSpec, PoleSplit, RationalLst};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, Poly, QuadRule};
use crate::stability::classify;

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Clone, Debug)]
pub struct ModelOne {
    pub spec: ModelSpec,
    pub rule: QuadRule,
    /// `Phi_B` with pairwise distinct poles.
    pub b: RationalLst,
    pub pole_split: Option<PoleSplit>,
    d_b: Poly,
}

#[derive(Clone, Debug, Serialize)]
pub struct M1Stationary {
    pub coeffs: CoeffVector,
    /// `P(W = 0) = a_l`.
    pub atom: f64,
    pub mean: f64,
}

impl ModelOne {
    pub fn new(spec: &ModelSpec, rule: &QuadRule) -> Result<Self> {
        if spec.model != ModelKind::I {
            return Err(Error::InvalidModel("not a model I config".into()));
        }
        spec.validate()?;
        let (b, pole_split) = spec.b.lst()?.with_distinct_poles();
        let d_b = b.denominator();
        Ok(ModelOne { spec: spec.clone(), rule: rule.clone(), b, pole_split, d_b })
    }

    pub fn order(&self) -> usize {
        self.b.order()
    }

    /// `int y^k / prod_m (s_j y - s_m) P(V in dy)` for `k = 0..=l`.
    fn pole_integrals(&self, sj: Complex64) -> Result<Vec<Complex64>> {
        let poles = &self.b.poles;
        (0..=self.order())
            .map(|k| {
                self.spec.v.integrate_negative(
                    |y| {
                        let den: Complex64 = poles.iter().map(|&sm| sj * y - sm).product();
                        c64(y.powi(k as i32)) / den
                    },
                    &self.rule,
                )
            })
            .collect()
    }

    /// Assembles and solves the coefficient system; `r = None` gives the
    /// stationary limit.
    fn solve(&self, r: Option<f64>) -> Result<CoeffVector> {
        let l = self.order();
        let d0 = self.d_b.coeff(0);
        let a0 = match r {
            Some(r) => d0 * (r / (1.0 - r)),
            None => d0,
        };
        let rr = r.unwrap_or(1.0);
        let w = self.spec.w0;
        let mut mat = CMatrix::zeros(l);
        let mut rhs = vec![c64(0.0); l];
        for (j, &sj) in self.b.poles.iter().enumerate() {
            let kj = self.b.numerator.eval(sj) * self.spec.a.lst_eval(-sj)? * rr;
            let ints = self.pole_integrals(sj)?;
            for k in 1..=l {
                mat[(j, k - 1)] = sj.powi(k as i32) * (1.0 - kj * ints[k]);
            }
            let drive = match r {
                // E e^{-s_j w V}: the e^{-z w} term of Psi_W(r, z) at z = s_j V
                Some(_) => kj * self.spec.v.integrate_negative(|y| (-sj * y * w).exp(), &self.rule)?,
                None => c64(0.0),
            };
            rhs[j] = drive - a0 * (1.0 - kj * ints[0]);
        }
        let sigma = self.b.poles.iter().map(|p| p.norm().ln()).sum::<f64>() / l as f64;
        let (report, rescaled_by) = solve_guarded(&mat, &rhs, sigma.exp(), 1)?;
        let mut coeffs = vec![a0];
        coeffs.extend_from_slice(&report.solution);
        Ok(CoeffVector { r: rr, coeffs, solve_report: report, rescaled_by, pole_split: self.pole_split.clone() })
    }

    pub fn transient_coeffs(&self, r: f64) -> Result<CoeffVector> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
        }
        let cv = self.solve(Some(r))?;
        for s in [0.0, 0.5, 1.0, 2.0] {
            check_real(self.transient_lst(&cv, c64(s))?, s)?;
        }
        Ok(cv)
    }

    /// `Psi_W(r, s) = e^{-s w} + sum_k a_k(r) s^k / D_B(s)`.
    pub fn transient_lst(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        let d = self.d_b.eval(s);
        if d.norm() == 0.0 {
            return Err(Error::PoleHit { point: s });
        }
        Ok((-s * self.spec.w0).exp() + cv.poly_at(s) / d)
    }

    /// `int Psi_W(r, s y) P(V in dy)`.
    pub fn psi_vw(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        self.spec.v.try_integrate_negative(|y| self.transient_lst(cv, s * y), &self.rule)
    }

    /// Transform of the negative parts `min(V_i W_i + Y_i, 0)` for `Re s <= 0`.
    pub fn transient_minus(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        let r = cv.r;
        let f = |z: Complex64| -> Result<Complex64> {
            let d = self.d_b.eval(z);
            let phi_y = self.spec.y_transform(z)?;
            Ok(1.0 / (1.0 - r) - cv.poly_at(z) / (d * r) + phi_y * self.psi_vw(cv, z)?)
        };
        let radius = 0.25 * self.b.poles.iter().map(|p| p.norm()).fold(f64::INFINITY, f64::min);
        eval_removable(f, s, &self.b.poles, radius)
    }

    /// `|Psi_W - e^{-sw} - r (Phi_Y Psi_VW + 1/(1-r) - Psi_Wbar)|` on `Re s = 0`.
    pub fn basic_residual(&self, cv: &CoeffVector, s: Complex64) -> Result<f64> {
        let r = cv.r;
        let lhs = self.transient_lst(cv, s)?;
        let rhs = (-s * self.spec.w0).exp()
            + r * (self.spec.y_transform(s)? * self.psi_vw(cv, s)? + 1.0 / (1.0 - r) - self.transient_minus(cv, s)?);
        Ok((lhs - rhs).norm())
    }

    pub fn stationary(&self) -> Result<M1Stationary> {
        let verdict = classify(&self.spec, &self.rule, 0, 0)?;
        if !verdict.diagnostics.y_nonpositive_possible {
            return Err(Error::Stability("P(B <= A) = 0; no proper limit for model I".into()));
        }
        let cv = self.solve(None)?;
        for s in [0.0, 0.5, 1.0, 2.0] {
            check_real(self.stationary_lst(&cv, c64(s))?, s)?;
        }
        let l = self.order();
        let atom = cv.coeffs[l].re;
        // E W = -Phi'(0) = (D_B'(0) - a_1) / D_B(0)
        let mean = ((self.d_b.coeff(1) - cv.coeffs[1]) / self.d_b.coeff(0)).re;
        Ok(M1Stationary { coeffs: cv, atom, mean })
    }

    /// `Phi_W(s) = sum_k a_k s^k / D_B(s)`.
    pub fn stationary_lst(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        let d = self.d_b.eval(s);
        if d.norm() == 0.0 {
            return Err(Error::PoleHit { point: s });
        }
        Ok(cv.poly_at(s) / d)
    }
}

pub fn m1_transient_coeffs(spec: &ModelSpec, r: f64, rule: &QuadRule) -> Result<CoeffVector> {
    ModelOne::new(spec, rule)?.transient_coeffs(r)
}

pub fn m1_stationary(spec: &ModelSpec, rule: &QuadRule) -> Result<M1Stationary> {
    ModelOne::new(spec, rule)?.stationary()
}
