//! Uniform proportional multiplier: `V = U^{1/alpha}` (`alpha = 1` is
//! `Uniform[0, 1]`), `A ~ exp(lambda)`, `B` arbitrary with finite mean.
//!
//! All integrals over `t` of `lambda r Phi_B(t) / (t (lambda - t))` are split as
//! `r [log t - Phi_B(lambda) log|lambda - t| + F(t)]` with the smooth part
//! `F(t) = int_0^t g1 + g2`, `g1 = (Phi_B - 1)/t`, `g2 = (Phi_B - Phi_B(lambda))/(lambda - t)`.
//! Endpoint singularities of the outer integrals are absorbed by power
//! substitutions chosen so that the transformed integrands are bounded.

use serde::Serialize;

use crate::dist::{DistSpec, ModelKind, ModelSpec, MultiplierSpec};
use crate::error::{Error, Result};
use crate::numerics::{incomplete_beta, integrate, Pchip, QuadRule};

fn c64(x: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(x, 0.0)
}

#[derive(Clone, Debug)]
pub struct M3Kernel {
    pub lambda: f64,
    pub alpha: f64,
    pub b: DistSpec,
    pub w0: f64,
    pub rule: QuadRule,
    phi_b_lambda: f64,
    mean_b: f64,
}

/// Transient solution for one `r`: the constant `c = Psi_W(r, inf) - P(W_0 = 0)`.
#[derive(Clone, Debug, Serialize)]
pub struct M3Transient {
    pub r: f64,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct M3Stationary {
    /// `P(W = 0)`.
    pub p_inf: f64,
    /// `p_inf` from the direct integral over `(0, lambda)`.
    pub p_inf_direct: f64,
    /// Closed form when `B` is exponential and `alpha = 1`.
    pub p_inf_beta: Option<f64>,
    pub mean: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentSeq {
    /// `omega_1 .. omega_j`.
    pub omegas: Vec<f64>,
    pub p_inf: f64,
    /// Orders `k` with `omega_k < 0`; those moments do not exist.
    pub negative: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct M3Iteration {
    pub s_grid: Vec<f64>,
    /// `values[i][k] = Phi_{W_i}(s_grid[k])` for `i = 0..=n`.
    pub values: Vec<Vec<f64>>,
    /// `p[i] = P(W_i = 0)`.
    pub p: Vec<f64>,
    /// Largest difference between the monotone and the centered interpolant runs.
    pub discrepancy: f64,
}

/// Largest interpolant disagreement tolerated by the iteration.
pub const GRID_TOL: f64 = 1e-5;

impl M3Kernel {
    pub fn new(spec: &ModelSpec, rule: &QuadRule) -> Result<Self> {
        if spec.model != ModelKind::III {
            return Err(Error::InvalidModel("not a model III config".into()));
        }
        spec.validate()?;
        let DistSpec::Exponential { rate } = spec.a else {
            return Err(Error::InvalidModel("model III needs an exponential A".into()));
        };
        let alpha = match spec.v {
            MultiplierSpec::Uniform01 => 1.0,
            MultiplierSpec::PowerUniform { alpha } => alpha,
            _ => return Err(Error::InvalidModel("model III needs a uniform or power-uniform V".into())),
        };
        Self::from_parts(rate, spec.b.clone(), spec.w0, alpha, rule)
    }

    pub fn from_parts(lambda: f64, b: DistSpec, w0: f64, alpha: f64, rule: &QuadRule) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(alpha > 0.0 && alpha.is_finite()) || !(w0 >= 0.0) {
            return Err(Error::Domain("need lambda > 0, alpha > 0, w0 >= 0".into()));
        }
        b.validate()?;
        let mean_b = b.mean();
        if !mean_b.is_finite() {
            return Err(Error::UnsupportedParameter("B must have a finite mean".into()));
        }
        let phi_b_lambda = b.lst_eval(c64(lambda))?.re;
        Ok(M3Kernel { lambda, alpha, b, w0, rule: rule.clone(), phi_b_lambda, mean_b })
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::from_parts(self.lambda, self.b.clone(), self.w0, alpha, &self.rule)
    }

    pub fn phi_b(&self, t: f64) -> Result<f64> {
        Ok(self.b.lst_eval(c64(t))?.re)
    }

    fn phi_b_or_nan(&self, t: f64) -> f64 {
        self.phi_b(t).unwrap_or(f64::NAN)
    }

    fn phi_w0(&self, u: f64) -> f64 {
        (-u * self.w0).exp()
    }

    /// `g1 + g2`, smooth in `t`.
    fn g_smooth(&self, t: f64) -> f64 {
        let lam = self.lambda;
        let h0 = 1e-5;
        let g1 = if t.abs() > h0 {
            (self.phi_b_or_nan(t) - 1.0) / t
        } else if t == 0.0 {
            -self.mean_b
        } else {
            let h = h0.copysign(t);
            let at_h = (self.phi_b_or_nan(h) - 1.0) / h;
            -self.mean_b + (at_h + self.mean_b) * t / h
        };
        let scale = lam.max(1.0);
        let g2 = if (t - lam).abs() > 1e-5 * scale {
            (self.phi_b_or_nan(t) - self.phi_b_lambda) / (lam - t)
        } else {
            let h = 1e-4 * scale;
            (self.phi_b_or_nan(lam - h) - self.phi_b_or_nan(lam + h)) / (2.0 * h)
        };
        g1 + g2
    }

    /// `F(s) - F(u) = int_u^s (g1 + g2) dt`.
    fn f_diff(&self, u: f64, s: f64) -> Result<f64> {
        integrate(|t| self.g_smooth(t), u, s, &self.rule)
    }

    /// `lambda r int_u^s Phi_B(t) / (t (lambda - t)) dt` for `u, s` on the same side of 0 and of `lambda`.
    pub fn exponent(&self, r: f64, u: f64, s: f64) -> Result<f64> {
        let lam = self.lambda;
        if u <= 0.0 || s <= 0.0 || (u - lam) * (s - lam) <= 0.0 {
            if u == s && u > 0.0 && u != lam {
                return Ok(0.0);
            }
            return Err(Error::Domain(format!("exponent needs u, s > 0 on one side of lambda = {lam}; got {u}, {s}")));
        }
        let log_part = (s / u).ln() + self.phi_b_lambda * ((lam - u).abs() / (lam - s).abs()).ln();
        Ok(r * (log_part + self.f_diff(u, s)?))
    }

    fn check_s(&self, s: f64) -> Result<()> {
        if !s.is_finite() {
            return Err(Error::Domain(format!("s must be finite, got {s}")));
        }
        if (s - self.lambda).abs() < 1e-9 * self.lambda.max(1.0) {
            return Err(Error::SEvalAtLambda);
        }
        Ok(())
    }

    fn rho(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
        }
        let rho = r * self.alpha;
        if rho >= 1.0 {
            return Err(Error::UnsupportedParameter(format!(
                "r * alpha = {rho} >= 1 is outside the supported range of the transient solution"
            )));
        }
        Ok(rho)
    }

    /// `int_0^a u^{beta - 1} h(u) du` via `u = a v^{1/beta}`.
    fn int_left(&self, beta: f64, a: f64, h: impl Fn(f64) -> f64) -> Result<f64> {
        let v = integrate(|v| h(a * v.powf(1.0 / beta)), 0.0, 1.0, &self.rule)?;
        Ok(a.powf(beta) / beta * v)
    }

    /// `int_{lambda - a}^lambda (lambda - u)^{gamma - 1} k(u) du` via `lambda - u = a v^{1/gamma}`.
    fn int_right(&self, gamma: f64, a: f64, k: impl Fn(f64) -> f64) -> Result<f64> {
        let lam = self.lambda;
        let v = integrate(|v| k(lam - a * v.powf(1.0 / gamma)), 0.0, 1.0, &self.rule)?;
        Ok(a.powf(gamma) / gamma * v)
    }

    /// Fixes `c` by requiring `Psi_W(r, .)` to stay bounded at `s = lambda`:
    /// `int_0^lambda K(u) exp(-Lambda(u)) du = 0` for `K(u) = u^{alpha-1} Phi_{W_0}(u) - c u^alpha / (lambda - u)`.
    pub fn transient(&self, r: f64) -> Result<M3Transient> {
        let rho = self.rho(r)?;
        let lam = self.lambda;
        let alpha = self.alpha;
        let beta = alpha - rho;
        let gamma = rho * self.phi_b_lambda;
        let half = 0.5 * lam;
        let fz = |u: f64| -> f64 { self.f_diff(0.0, u).unwrap_or(f64::NAN) };
        // weight exp(-Lambda(u)) = u^{-rho} ((lambda - u)/lambda)^gamma e^{-rho F(u)}
        let num = self.int_left(beta, half, |u| ((lam - u) / lam).powf(gamma) * (-rho * fz(u)).exp() * self.phi_w0(u))?
            + self.int_right(gamma, half, |u| {
                u.powf(alpha - 1.0 - rho) * (lam - u) * lam.powf(-gamma) * (-rho * fz(u)).exp() * self.phi_w0(u)
            })?;
        let den = self.int_left(beta, half, |u| u * ((lam - u) / lam).powf(gamma) / (lam - u) * (-rho * fz(u)).exp())?
            + self.int_right(gamma, half, |u| u.powf(alpha - rho) * lam.powf(-gamma) * (-rho * fz(u)).exp())?;
        Ok(M3Transient { r, c: num / den })
    }

    /// `Psi_W(r, s) = sum_i r^i Phi_{W_i}(s)` for real `s >= 0`, `s != lambda`.
    pub fn transient_lst(&self, tr: &M3Transient, s: f64) -> Result<f64> {
        let r = tr.r;
        let rho = self.rho(r)?;
        if s == 0.0 {
            return Ok(1.0 / (1.0 - r));
        }
        if s < 0.0 {
            return Err(Error::Domain(format!("s must be nonnegative, got {s}")));
        }
        self.check_s(s)?;
        let (lam, alpha, c) = (self.lambda, self.alpha, tr.c);
        let gamma = rho * self.phi_b_lambda;
        let phi_bs = self.phi_b(s)?;
        let head = self.phi_w0(s) - s * c / (lam - s);
        if s < 0.5 * lam {
            // I(s) = int_0^s, substituting u = s v^{1/beta}
            let beta = alpha - rho;
            let int = integrate(
                |v| {
                    let u = s * v.powf(1.0 / beta);
                    let fd = self.f_diff(u, s).unwrap_or(f64::NAN);
                    (self.phi_w0(u) - u * c / (lam - u)) * ((lam - u) / (lam - s)).powf(gamma) * (rho * fd).exp()
                },
                0.0,
                1.0,
                &self.rule,
            )?;
            return Ok(head + lam * rho * phi_bs / (beta * (lam - s)) * int);
        }
        // I(s) = int_lambda^s, substituting u = lambda + d v^{1/gamma}
        let d = s - lam;
        let int = integrate(
            |v| {
                let u = lam + d * v.powf(1.0 / gamma);
                let fd = self.f_diff(u, s).unwrap_or(f64::NAN);
                (s / u).powf(rho)
                    * (rho * fd).exp()
                    * (u.powf(alpha - 1.0) * self.phi_w0(u) * v.powf(1.0 / gamma) + u.powf(alpha) * c / d)
            },
            0.0,
            1.0,
            &self.rule,
        )?;
        let i_s = d / gamma * int;
        Ok(head + lam * rho * phi_bs / (s.powf(alpha) * (lam - s)) * i_s)
    }

    /// `M(s) = int_0^1 exp(alpha (F(s) - F(u))) dv` with `u = lambda + (s - lambda) v^{1/gamma}`.
    fn stationary_m(&self, s: f64) -> Result<f64> {
        let lam = self.lambda;
        let gamma = self.alpha * self.phi_b_lambda;
        integrate(
            |v| {
                let u = lam + (s - lam) * v.powf(1.0 / gamma);
                (self.alpha * self.f_diff(u, s).unwrap_or(f64::NAN)).exp()
            },
            0.0,
            1.0,
            &self.rule,
        )
    }

    pub fn stationary(&self) -> Result<M3Stationary> {
        let lam = self.lambda;
        let gamma = self.alpha * self.phi_b_lambda;
        let p_inf = self.phi_b_lambda / self.stationary_m(0.0)?;
        let alpha = self.alpha;
        let direct_rule = self.rule.clone().with_hints(&[lam]);
        // (lambda - u)^(gamma - 1) h(u) with the endpoint value h(lambda) subtracted and integrated exactly
        let h = |u: f64| alpha * lam.powf(-gamma) * (-alpha * self.f_diff(0.0, u).unwrap_or(f64::NAN)).exp();
        let h_lam = h(lam);
        let inv = integrate(
            |u| {
                let d = lam - u;
                if d <= 0.0 {
                    return 0.0;
                }
                d.powf(gamma - 1.0) * (h(u) - h_lam)
            },
            0.0,
            lam,
            &direct_rule,
        )? + h_lam * lam.powf(gamma) / gamma;
        let p_inf_direct = 1.0 / inv;
        let p_inf_beta = match self.b {
            DistSpec::Exponential { rate } if self.alpha == 1.0 => Some(p_inf_exp_b(lam, rate)?),
            _ => None,
        };
        for (name, other) in [("direct integral", Some(p_inf_direct)), ("beta closed form", p_inf_beta)] {
            if let Some(o) = other {
                if (o - p_inf).abs() > 1e-8 * p_inf.max(1e-300) {
                    return Err(Error::ToleranceNotMet { estimate: p_inf, error: (o - p_inf).abs() })
                        .map_err(|e| annotate(e, name));
                }
            }
        }
        let mean = (alpha + 1.0) / alpha * (self.mean_b - (1.0 - p_inf) / lam);
        Ok(M3Stationary { p_inf, p_inf_direct, p_inf_beta, mean })
    }

    /// `Phi_W(s) = p_inf (s - lambda Phi_B(s) M(s) / Phi_B(lambda)) / (s - lambda)`.
    ///
    /// Also valid for negative `s` as long as `Phi_B` is finite on `[s, 0]`.
    pub fn stationary_lst(&self, st: &M3Stationary, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        self.check_s(s)?;
        let lam = self.lambda;
        let m = self.stationary_m(s)?;
        Ok(st.p_inf * (s - lam * self.phi_b(s)? * m / self.phi_b_lambda) / (s - lam))
    }

    /// Iterates `Phi_{W_{i+1}}(s) = lambda Phi_B(s)/(s(lambda - s)) int_0^s Phi_{W_i} - s p_{i+1}/(lambda - s)`
    /// on a Chebyshev grid, reporting the iterates on `s_grid`.
    pub fn iterate_transient(&self, n: usize, s_grid: &[f64]) -> Result<M3Iteration> {
        if self.alpha != 1.0 {
            return Err(Error::UnsupportedParameter("the iteration is implemented for V ~ Uniform[0, 1]".into()));
        }
        if n < 1 {
            return Err(Error::Domain("need at least one step".into()));
        }
        if s_grid.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(Error::Domain("s_grid must be finite and nonnegative".into()));
        }
        let lam = self.lambda;
        let top = s_grid.iter().copied().fold((4.0 * lam).max(20.0 / self.mean_b), f64::max);
        let nodes = 257;
        let x: Vec<f64> = (0..nodes)
            .map(|k| 0.5 * top * (1.0 - (std::f64::consts::PI * k as f64 / (nodes - 1) as f64).cos()))
            .collect();
        let phi_b: Vec<f64> = x.iter().map(|&s| self.phi_b(s)).collect::<Result<_>>()?;
        let h = 1e-4 * lam.max(1.0);
        let dphi_lam = (self.phi_b(lam + h)? - self.phi_b(lam - h)?) / (2.0 * h);

        let step = |y: &[f64], centered: bool| -> (Vec<f64>, f64, Pchip) {
            let pc = if centered { Pchip::centered(&x, y) } else { Pchip::monotone(&x, y) };
            let c_lam = pc.integral_to(lam);
            let p_next = self.phi_b_lambda / lam * c_lam;
            let next = x
                .iter()
                .zip(&phi_b)
                .map(|(&s, &pb)| {
                    if s == 0.0 {
                        pc.eval(0.0)
                    } else if (s - lam).abs() < 1e-6 * lam {
                        // removable point: minus the derivative of the numerator at lambda
                        -dphi_lam * c_lam - self.phi_b_lambda * pc.eval(lam) + self.phi_b_lambda * c_lam / lam + p_next
                    } else {
                        lam * pb / (s * (lam - s)) * pc.integral_to(s) - s * p_next / (lam - s)
                    }
                })
                .collect();
            (next, p_next, pc)
        };

        let report = |pc: &Pchip| -> Vec<f64> { s_grid.iter().map(|&s| pc.eval(s)).collect() };
        let mut y: Vec<f64> = x.iter().map(|&s| self.phi_w0(s)).collect();
        let mut y_alt = y.clone();
        let mut values = Vec::with_capacity(n + 1);
        let mut p = vec![if self.w0 == 0.0 { 1.0 } else { 0.0 }];
        let mut discrepancy: f64 = 0.0;
        for _ in 0..n {
            let (next, p_next, pc) = step(&y, false);
            let (alt, _, _) = step(&y_alt, true);
            values.push(report(&pc));
            discrepancy = next.iter().zip(&alt).map(|(a, b)| (a - b).abs()).fold(discrepancy, f64::max);
            y = next;
            y_alt = alt;
            p.push(p_next);
        }
        values.push(report(&Pchip::monotone(&x, &y)));
        if discrepancy > GRID_TOL {
            return Err(Error::GridTooCoarse { discrepancy });
        }
        Ok(M3Iteration { s_grid: s_grid.to_vec(), values, p, discrepancy })
    }
}

fn annotate(e: Error, route: &str) -> Error {
    match e {
        Error::ToleranceNotMet { estimate, error } => {
            eprintln!("p_inf route mismatch ({route}): estimate {estimate}, difference {error:e}");
            Error::ToleranceNotMet { estimate, error }
        }
        other => other,
    }
}

/// `P(W = 0)` for `V ~ Uniform[0, 1]`, `A ~ exp(lambda)`, `B ~ exp(mu)`.
pub fn p_inf_exp_b(lambda: f64, mu: f64) -> Result<f64> {
    let (a, b) = (lambda / (lambda + mu), mu / (lambda + mu));
    Ok(mu.powf(a) * lambda.powf(b) / ((lambda + mu) * incomplete_beta(a, b, 1.0 + a)?))
}

/// Closed-form `Phi_W(s)` for exponential `B` and `0 <= s < lambda`.
pub fn stationary_exp_b(lambda: f64, mu: f64, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s < lambda) {
        return Err(Error::Domain(format!("closed form holds for 0 <= s < lambda, got s = {s}")));
    }
    let (a, b) = (lambda / (lambda + mu), mu / (lambda + mu));
    let p = p_inf_exp_b(lambda, mu)?;
    let beta = incomplete_beta((lambda - s) / (lambda + mu), b, 1.0 + a)?;
    let first = lambda * mu * (lambda + mu) * beta / ((mu + s).powf(1.0 + a) * (lambda - s).powf(1.0 + b));
    Ok(p * (first - s / (lambda - s)))
}

/// Moments `E W^k`, `k = 1..=j`, for `V ~ Uniform[0, 1]`, `A ~ exp(lambda)`, `B ~ exp(mu)`.
pub fn moments_exp_b(lambda: f64, mu: f64, j: usize) -> Result<MomentSeq> {
    if !(lambda > 0.0 && mu > 0.0) || j < 1 {
        return Err(Error::Domain("need lambda, mu > 0 and j >= 1".into()));
    }
    let p = p_inf_exp_b(lambda, mu)?;
    let mut om = vec![1.0, 2.0 * (1.0 / mu - (1.0 - p) / lambda)];
    if j >= 2 {
        om.push(3.0 * (1.0 - p - (mu - lambda) * om[1]) / (mu * lambda));
    }
    for k in 3..=j {
        let kf = k as f64;
        om.push(((kf * kf - 1.0) * om[k - 2] - (kf + 1.0) * (mu - lambda) * om[k - 1]) / (lambda * mu));
    }
    let omegas: Vec<f64> = om[1..=j].to_vec();
    let negative: Vec<usize> = omegas.iter().enumerate().filter(|(_, w)| **w < 0.0).map(|(i, _)| i + 1).collect();
    let mut warnings = Vec::new();
    if !negative.is_empty() {
        warnings.push(format!("negative moment estimates at orders {negative:?}; those moments do not exist"));
    }
    if mu <= lambda {
        warnings.push("mu <= lambda: B is heavier than A; verify that high moments exist".into());
    }
    Ok(MomentSeq { omegas, p_inf: p, negative, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kernel(lambda: f64, mu: f64, w0: f64) -> M3Kernel {
        M3Kernel::from_parts(lambda, DistSpec::Exponential { rate: mu }, w0, 1.0, &QuadRule::default()).unwrap()
    }

    #[test]
    fn exponent_matches_exponential_closed_form() {
        let (lam, mu) = (1.0, 2.0);
        let k = kernel(lam, mu, 0.0);
        let (a, b) = (lam / (lam + mu), mu / (lam + mu));
        for (u, s) in [(0.2f64, 0.7f64), (1.5, 4.0), (3.0, 1.2)] {
            let closed = (s / u).ln() + b * ((lam - u) / (lam - s)).abs().ln() + a * ((mu + u) / (mu + s)).ln();
            let got = k.exponent(1.0, u, s).unwrap();
            assert!((got - closed).abs() < 1e-10, "{u} {s}: {got} vs {closed}");
        }
        let sum = k.exponent(0.5, 0.1, 0.4).unwrap() + k.exponent(0.5, 0.4, 0.8).unwrap();
        assert!((sum - k.exponent(0.5, 0.1, 0.8).unwrap()).abs() < 1e-10);
        assert!(k.exponent(1.0, 0.5, 1.5).is_err());
    }

    #[test]
    fn stationary_matches_closed_form() {
        let k = kernel(1.0, 1.0, 0.0);
        let st = k.stationary().unwrap();
        assert!((st.p_inf - 1.0 / (2.0 * incomplete_beta(0.5, 0.5, 1.5).unwrap())).abs() < 1e-10);
        for s in [0.1, 0.4, 0.8] {
            let a = k.stationary_lst(&st, s).unwrap();
            let b = stationary_exp_b(1.0, 1.0, s).unwrap();
            assert!((a - b).abs() < 1e-8 * b, "{s}: {a} vs {b}");
        }
        assert!((st.mean - 2.0 * st.p_inf).abs() < 1e-12);
    }

    #[test]
    fn transient_normalization_and_iteration_agree() {
        let k = kernel(1.0, 1.0, 0.5);
        let r = 0.5;
        let tr = k.transient(r).unwrap();
        let grid = [0.3, 0.7, 1.6, 3.0];
        let it = k.iterate_transient(60, &grid).unwrap();
        for (idx, &s) in grid.iter().enumerate() {
            let series: f64 = it.values.iter().enumerate().map(|(i, v)| r.powi(i as i32) * v[idx]).sum();
            let psi = k.transient_lst(&tr, s).unwrap();
            assert!((series - psi).abs() < 1e-6, "{s}: {series} vs {psi}");
        }
        assert!((k.transient_lst(&tr, 0.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn first_step_atom_is_phi_b_at_lambda() {
        let k = kernel(1.0, 1.0, 0.0);
        let it = k.iterate_transient(1, &[0.5]).unwrap();
        assert!((it.p[1] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn moments_recursion_first_order() {
        let m = moments_exp_b(1.0, 2.0, 4).unwrap();
        let p = p_inf_exp_b(1.0, 2.0).unwrap();
        assert!((m.omegas[0] - 2.0 * (0.5 - (1.0 - p))).abs() < 1e-12);
        let eq = moments_exp_b(1.5, 1.5, 2).unwrap();
        assert!((eq.omegas[1] - 3.0 * (1.0 - eq.p_inf) / 2.25).abs() < 1e-12);
    }

    #[test]
    fn alpha_power_normalization() {
        let k = kernel(1.0, 1.0, 0.0).with_alpha(2.0).unwrap();
        let tr = k.transient(0.4).unwrap();
        let near0 = k.transient_lst(&tr, 1e-6).unwrap();
        assert!((near0 - 1.0 / 0.6).abs() < 1e-4, "{near0}");
        assert!(matches!(k.transient(0.6), Err(Error::UnsupportedParameter(_))));
    }
}
