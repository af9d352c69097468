//! Mixed multiplier: `V = a > 0` with probability `p`, otherwise `V < 0`;
//! `A` and `B` both with rational transforms.
//!
//! Every transient transform is written as `Psi(r, s) = G_w(s) + sum_k a_k G_k(s)`
//! over known basis functions:
//! * `a = 1`: `G_k = s^k / (D_Y - r p N_Y)`, `G_w = D_Y e^{-s w} / (D_Y - r p N_Y)`;
//! * `a < 1`: `G_k = sum_h P_h (a^h s)^k / D_Y(a^h s)`, `G_w = sum_h P_h e^{-a^h s w}`
//!   with `P_h = prod_{j<h} r p Phi_Y(a^j s)`.
//!
//! The `m + l` unknown coefficients come from analyticity in the right half-plane
//! (`m` equations) and from the poles `s_j` of `Phi_B` (`l` equations).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::{check_real, solve_guarded, CoeffVector};
use crate::dist::{ModelKind, ModelSpec, MultiplierSpec, PoleSplit, RationalLst};
use crate::error::{Error, Result};
use crate::numerics::{circle_mean, neville_at_zero, poly_roots, CMatrix, Poly, QuadRule};
use crate::stability::classify;

fn c64(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Truncation control for the `a < 1` series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesControl {
    pub max_terms: usize,
    pub tail_tol: f64,
    /// Largest number of terms used by any evaluation so far (output).
    pub achieved_terms: usize,
    /// Largest tail bound reported by any evaluation so far (output).
    pub tail_bound: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { max_terms: 5000, tail_tol: 1e-13, achieved_terms: 0, tail_bound: 0.0 }
    }
}

/// Zeros of `D_Y(s) - r p N_Y(s)`.
#[derive(Clone, Debug, Serialize)]
pub struct DeltaRoots {
    pub r: f64,
    /// The `m` zeros with positive real part.
    pub roots: Vec<Complex64>,
    pub all_roots: Vec<Complex64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct M2Stationary {
    pub coeffs: CoeffVector,
    pub atom: f64,
    pub mean: f64,
    /// `(1 - r) a_k(r)` extrapolated to `r = 1` from `r` in {0.9, 0.99, 0.999}.
    pub extrapolated: Vec<Complex64>,
    /// `max_k |limit - extrapolated| / max_k |limit|`.
    pub route_gap: f64,
}

#[derive(Clone, Debug)]
struct BasisValue {
    g: Vec<Complex64>,
    gw: Complex64,
    terms: usize,
    tail: f64,
}

#[derive(Clone, Debug)]
pub struct ModelTwo {
    pub spec: ModelSpec,
    pub rule: QuadRule,
    pub a: f64,
    pub p: f64,
    pub vbar: MultiplierSpec,
    /// `Phi_B` and `Phi_A` with pairwise distinct poles.
    pub b: RationalLst,
    pub a_lst: RationalLst,
    pub pole_split_b: Option<PoleSplit>,
    pub pole_split_a: Option<PoleSplit>,
    pub n_y: Poly,
    pub d_y: Poly,
    /// Zeros of `D_Y`: the `s_j` and the `-t_i`.
    y_zeros: Vec<Complex64>,
    ctl: SeriesControl,
}

/// Basis functions for one value of `r` (`r = 1` for the stationary limit).
struct Kernel<'a> {
    m: &'a ModelTwo,
    r: f64,
    /// Zeros of `D_Y - r p N_Y` (only used when `a = 1`).
    den_roots: Vec<Complex64>,
}

impl ModelTwo {
    pub fn new(spec: &ModelSpec, rule: &QuadRule, ctl: &SeriesControl) -> Result<Self> {
        if spec.model != ModelKind::II {
            return Err(Error::InvalidModel("not a model II config".into()));
        }
        spec.validate()?;
        let MultiplierSpec::MixedAtom { a, p, negative } = &spec.v else {
            return Err(Error::InvalidModel("model II needs a mixed_atom multiplier".into()));
        };
        if *a > 1.0 {
            return Err(Error::UnsupportedParameter(format!(
                "a = {a} > 1: the series for Psi_W diverges (successive-term ratio tends to infinity)"
            )));
        }
        let (b, pole_split_b) = spec.b.lst()?.with_distinct_poles();
        // with a = 1 the poles of Phi_A never enter an equation, so repeated ones can stay
        let (a_lst, pole_split_a) = if *a == 1.0 { (spec.a.lst()?, None) } else { spec.a.lst()?.with_distinct_poles() };
        let n_y = &b.numerator * &a_lst.numerator.reflect();
        let d_y = &b.denominator() * &a_lst.denominator().reflect();
        let mut y_zeros = b.poles.clone();
        y_zeros.extend(a_lst.poles.iter().map(|t| -t));
        Ok(ModelTwo {
            spec: spec.clone(),
            rule: rule.clone(),
            a: *a,
            p: *p,
            vbar: (**negative).clone(),
            b,
            a_lst,
            pole_split_b,
            pole_split_a,
            n_y,
            d_y,
            y_zeros,
            ctl: ctl.clone(),
        })
    }

    /// `l`, the pole count of `Phi_B`.
    pub fn l(&self) -> usize {
        self.b.order()
    }

    /// `m`, the pole count of `Phi_A`.
    pub fn m(&self) -> usize {
        self.a_lst.order()
    }

    fn unit_a(&self) -> bool {
        self.a == 1.0
    }

    pub fn phi_y(&self, s: Complex64) -> Complex64 {
        self.n_y.eval(s) / self.d_y.eval(s)
    }

    pub fn find_deltas(&self, r: f64) -> Result<DeltaRoots> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1], got {r}")));
        }
        let poly = &self.d_y - &self.n_y.scale(c64(r * self.p));
        let all_roots = poly_roots(&poly)?;
        let roots: Vec<Complex64> = all_roots.iter().copied().filter(|z| z.re > 0.0).collect();
        if roots.len() != self.m() {
            return Err(Error::RootCountMismatch { expected: self.m(), found: roots.len() });
        }
        for i in 0..roots.len() {
            for j in 0..i {
                if (roots[i] - roots[j]).norm() < 1e-7 * (1.0 + roots[i].norm()) {
                    return Err(Error::Domain(format!(
                        "right-half-plane zeros {} and {} coincide; equations would be confluent",
                        roots[i], roots[j]
                    )));
                }
            }
        }
        Ok(DeltaRoots { r, roots, all_roots })
    }

    fn kernel(&self, r: f64) -> Result<Kernel<'_>> {
        let den_roots = if self.unit_a() {
            let poly = &self.d_y - &self.n_y.scale(c64(r * self.p));
            poly_roots(&poly)?
        } else {
            Vec::new()
        };
        Ok(Kernel { m: self, r, den_roots })
    }

    /// `int f(y) P(Vbar in dy)` for vector-valued `f`.
    fn integrate_vbar(&self, n: usize, f: impl Fn(f64) -> Result<Vec<Complex64>>) -> Result<Vec<Complex64>> {
        if let MultiplierSpec::NegativeAtoms { atoms } = &self.vbar {
            let mut acc = vec![c64(0.0); n];
            for at in atoms {
                for (a, v) in acc.iter_mut().zip(f(at.value)?) {
                    *a += v * at.prob;
                }
            }
            return Ok(acc);
        }
        (0..n)
            .map(|i| self.vbar.try_integrate_negative(|y| f(y).map(|v| v[i]), &self.rule))
            .collect()
    }

    /// Fails when the ray `s y` over the continuous support of `Vbar` meets a pole.
    fn check_path(&self, kernel: &Kernel, s: Complex64) -> Result<()> {
        let (lo, hi) = match &self.vbar {
            MultiplierSpec::NegativeAtoms { .. } => return Ok(()),
            MultiplierSpec::NegativeScaled { c, dist } => {
                let (a, b) = dist.support();
                (-c * b, -c * a)
            }
            _ => return Ok(()),
        };
        let reach = s.norm() * lo.abs().max(hi.abs());
        for q in kernel.pole_set(reach) {
            let y = q / s;
            if y.im.abs() <= 1e-9 * y.norm() && y.re >= lo && y.re <= hi {
                return Err(Error::PoleCollision(format!(
                    "s = {s} times y = {:.6} from the negative multiplier support reaches the pole {q}",
                    y.re
                )));
            }
        }
        Ok(())
    }

    fn solve(&self, r: Option<f64>) -> Result<CoeffVector> {
        let rr = r.unwrap_or(1.0);
        let transient = r.is_some();
        let (l, m) = (self.l(), self.m());
        let big_k = l + m;
        let dy0 = self.d_y.coeff(0);
        let a0 = if transient { dy0 * ((1.0 - self.p) * rr / (1.0 - rr)) } else { dy0 * (1.0 - self.p) };
        let kernel = self.kernel(rr)?;
        let w = self.spec.w0;
        let mut mat = CMatrix::zeros(big_k);
        let mut rhs = vec![c64(0.0); big_k];

        // m equations from the right half-plane
        if self.unit_a() {
            let deltas = self.find_deltas(rr)?;
            for (i, &d) in deltas.roots.iter().enumerate() {
                for k in 1..=big_k {
                    mat[(i, k - 1)] = d.powi(k as i32);
                }
                let drive = if transient { -(-d * w).exp() * self.d_y.eval(d) } else { c64(0.0) };
                rhs[i] = drive - a0;
            }
        } else {
            for (i, &t) in self.a_lst.poles.iter().enumerate() {
                let z = -t;
                let coef = self.n_y.eval(z) * (rr * self.p);
                let g = kernel.basis(z * self.a)?;
                for k in 1..=big_k {
                    mat[(i, k - 1)] = z.powi(k as i32) + coef * g.g[k];
                }
                let drive = if transient { -coef * g.gw } else { c64(0.0) };
                rhs[i] = drive - a0 * (1.0 + coef * g.g[0]);
            }
        }

        // l equations from the poles of Phi_B
        for (j, &sj) in self.b.poles.iter().enumerate() {
            self.check_path(&kernel, sj)?;
            let coef = self.n_y.eval(sj) * (rr * (1.0 - self.p));
            let ints = self.integrate_vbar(big_k + 2, |y| {
                let g = kernel.basis(sj * y)?;
                let mut v = g.g;
                v.push(g.gw);
                Ok(v)
            })?;
            let row = m + j;
            for k in 1..=big_k {
                mat[(row, k - 1)] = sj.powi(k as i32) - coef * ints[k];
            }
            let drive = if transient { coef * ints[big_k + 1] } else { c64(0.0) };
            rhs[row] = drive - a0 * (1.0 - coef * ints[0]);
        }

        let sigma = (self.y_zeros.iter().map(|z| z.norm().ln()).sum::<f64>() / big_k as f64).exp();
        let (report, rescaled_by) = solve_guarded(&mat, &rhs, sigma, 1)?;
        let mut coeffs = vec![a0];
        coeffs.extend_from_slice(&report.solution);
        let pole_split = match (&self.pole_split_b, &self.pole_split_a) {
            (Some(s), _) | (None, Some(s)) => Some(s.clone()),
            _ => None,
        };
        Ok(CoeffVector { r: rr, coeffs, solve_report: report, rescaled_by, pole_split })
    }

    pub fn transient_coeffs(&self, r: f64) -> Result<CoeffVector> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
        }
        let cv = self.solve(Some(r))?;
        for s in [0.0, 0.5, 1.0, 2.0] {
            check_real(self.transient_lst(&cv, c64(s))?.0, s)?;
        }
        Ok(cv)
    }

    /// `Psi_W(r, s)` with the series statistics of the evaluation.
    pub fn transient_lst(&self, cv: &CoeffVector, s: Complex64) -> Result<(Complex64, SeriesControl)> {
        let kernel = self.kernel(cv.r)?;
        let g = kernel.basis(s)?;
        let value = g.gw + g.g.iter().zip(&cv.coeffs).map(|(x, a)| x * a).sum::<Complex64>();
        let ctl = SeriesControl { achieved_terms: g.terms, tail_bound: g.tail, ..self.ctl.clone() };
        Ok((value, ctl))
    }

    /// `Psi_VW(r, s) = p Psi_W(r, a s) + (1 - p) int Psi_W(r, s y) P(Vbar in dy)`.
    pub fn psi_vw(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        let kernel = self.kernel(cv.r)?;
        let eval = |z: Complex64| -> Result<Complex64> {
            let g = kernel.basis(z)?;
            Ok(g.gw + g.g.iter().zip(&cv.coeffs).map(|(x, a)| x * a).sum::<Complex64>())
        };
        let neg = self.integrate_vbar(1, |y| Ok(vec![eval(s * y)?]))?[0];
        Ok(eval(s * self.a)? * self.p + neg * (1.0 - self.p))
    }

    /// Transform of `min(V_i W_i + Y_i, 0)` for `Re s <= 0`, from the left-half-plane side.
    pub fn transient_minus(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        let r = cv.r;
        let kernel = self.kernel(r)?;
        let f = |z: Complex64| -> Result<Complex64> {
            let neg = self.integrate_vbar(1, |y| {
                let g = kernel.basis(z * y)?;
                Ok(vec![g.gw + g.g.iter().zip(&cv.coeffs).map(|(x, a)| x * a).sum::<Complex64>()])
            })?[0];
            let lhs = cv.poly_at(z) - self.n_y.eval(z) * neg * (r * (1.0 - self.p));
            Ok(1.0 / (1.0 - r) - lhs / (self.d_y.eval(z) * r))
        };
        crate::coeffs::eval_removable(f, s, &self.b.poles, 0.25 * min_modulus(&self.y_zeros))
    }

    pub fn basic_residual(&self, cv: &CoeffVector, s: Complex64) -> Result<f64> {
        let r = cv.r;
        let lhs = self.transient_lst(cv, s)?.0;
        let rhs = (-s * self.spec.w0).exp()
            + r * (self.phi_y(s) * self.psi_vw(cv, s)? + 1.0 / (1.0 - r) - self.transient_minus(cv, s)?);
        Ok((lhs - rhs).norm())
    }

    /// Stationary coefficients with the extrapolation cross-check.
    pub fn stationary(&self) -> Result<M2Stationary> {
        let verdict = classify(&self.spec, &self.rule, 0, 0)?;
        if !verdict.diagnostics.y_nonpositive_possible {
            return Err(Error::Stability("P(B <= A) = 0; no proper limit for model II".into()));
        }
        let cv = self.solve(None)?;
        let rs = [0.9, 0.99, 0.999];
        let hs: Vec<f64> = rs.iter().map(|r| 1.0 - r).collect();
        let scaled: Vec<Vec<Complex64>> = rs
            .iter()
            .map(|&r| self.solve(Some(r)).map(|c| c.coeffs.iter().map(|a| a * (1.0 - r)).collect()))
            .collect::<Result<_>>()?;
        let extrapolated: Vec<Complex64> = (0..cv.coeffs.len())
            .map(|k| neville_at_zero(&hs, &scaled.iter().map(|v| v[k]).collect::<Vec<_>>()))
            .collect();
        let scale = cv.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let route_gap = cv
            .coeffs
            .iter()
            .zip(&extrapolated)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale;
        if !(route_gap <= 1e-4) {
            return Err(Error::ExtrapolationMismatch(format!(
                "limit system and r -> 1 extrapolation differ by {route_gap:e} (relative)"
            )));
        }
        for s in [0.0, 0.5, 1.0, 2.0] {
            check_real(self.stationary_lst(&cv, c64(s))?, s)?;
        }
        let k = cv.coeffs.len() - 1;
        let sign = if self.m() % 2 == 0 { 1.0 } else { -1.0 };
        let atom = sign * cv.coeffs[k].re;
        let mean = self.mean_from(&cv)?;
        Ok(M2Stationary { coeffs: cv, atom, mean, extrapolated, route_gap })
    }

    pub fn stationary_lst(&self, cv: &CoeffVector, s: Complex64) -> Result<Complex64> {
        let kernel = self.kernel(1.0)?;
        let g = kernel.basis(s)?;
        Ok(g.g.iter().zip(&cv.coeffs).map(|(x, a)| x * a).sum())
    }

    /// `-Phi_W'(0)` by a Cauchy integral on a circle inside the pole-free disc.
    fn mean_from(&self, cv: &CoeffVector) -> Result<f64> {
        let kernel = self.kernel(1.0)?;
        let mut nearest = min_modulus(&self.y_zeros);
        if self.unit_a() {
            nearest = nearest.min(min_modulus(&kernel.den_roots));
        }
        let rho = 0.25 * nearest;
        let n = 64;
        let mut acc = c64(0.0);
        for i in 0..n {
            let theta = 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            let e = Complex64::from_polar(1.0, theta);
            acc += self.stationary_lst(cv, e * rho)? / e;
        }
        Ok(-(acc / (n as f64 * rho)).re)
    }
}

fn min_modulus(z: &[Complex64]) -> f64 {
    z.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min)
}

impl Kernel<'_> {
    /// Poles of the basis functions with modulus up to `reach`.
    fn pole_set(&self, reach: f64) -> Vec<Complex64> {
        let m = self.m;
        if m.unit_a() {
            return self.den_roots.clone();
        }
        let mut out = Vec::new();
        for &q in &m.y_zeros {
            let mut z = q;
            while z.norm() <= 2.0 * reach + 1.0 {
                out.push(z);
                z /= m.a;
            }
            out.push(z);
        }
        out
    }

    /// Basis values at `s`, averaged over a small circle when `s` sits on
    /// (or next to) a pole of an individual basis function.
    fn basis(&self, s: Complex64) -> Result<BasisValue> {
        let poles = self.pole_set(s.norm());
        let mut dists: Vec<f64> = poles.iter().map(|q| (s - q).norm()).collect();
        dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let d0 = dists.first().copied().unwrap_or(f64::INFINITY);
        // split copies of a repeated pole form one cluster; the circle has to enclose all of it
        let cluster = 1e-4 * (1.0 + s.norm());
        let d_out = dists.iter().copied().find(|&d| d > d0 + cluster).unwrap_or(f64::INFINITY);
        let eps = (0.02 * (1.0 + s.norm())).min(0.4 * d_out);
        if d0 >= 0.1 * eps {
            return self.basis_raw(s);
        }
        let mut err = None;
        let mut terms = 0;
        let mut tail: f64 = 0.0;
        let n = self.m.l() + self.m.m() + 2;
        let avg = circle_mean(
            |z| match self.basis_raw(z) {
                Ok(b) => {
                    terms = terms.max(b.terms);
                    tail = tail.max(b.tail);
                    let mut v = b.g;
                    v.push(b.gw);
                    v
                }
                Err(e) => {
                    err = Some(e);
                    vec![c64(f64::NAN); n]
                }
            },
            s,
            eps,
            32,
        );
        if let Some(e) = err {
            return Err(e);
        }
        let gw = avg[n - 1];
        Ok(BasisValue { g: avg[..n - 1].to_vec(), gw, terms, tail })
    }

    fn basis_raw(&self, s: Complex64) -> Result<BasisValue> {
        let m = self.m;
        let big_k = m.l() + m.m();
        let w = m.spec.w0;
        let rp = self.r * m.p;
        if m.unit_a() {
            let dy = m.d_y.eval(s);
            let den = dy - m.n_y.eval(s) * rp;
            if den.norm() == 0.0 {
                return Err(Error::PoleHit { point: s });
            }
            let g = (0..=big_k).map(|k| s.powi(k as i32) / den).collect();
            return Ok(BasisValue { g, gw: dy * (-s * w).exp() / den, terms: 1, tail: 0.0 });
        }
        let mut g = vec![c64(0.0); big_k + 1];
        let mut gw = c64(0.0);
        let mut prod = c64(1.0);
        let mut z = s;
        for h in 0..m.ctl.max_terms {
            let dy = m.d_y.eval(z);
            if dy.norm() == 0.0 {
                return Err(Error::PoleHit { point: z });
            }
            let mut zk = c64(1.0);
            let mut lmax: f64 = (-z * w).exp().norm();
            for gk in g.iter_mut() {
                let term = zk / dy;
                lmax = lmax.max(term.norm());
                *gk += prod * term;
                zk *= z;
            }
            gw += prod * (-z * w).exp();
            let k_here = m.n_y.eval(z) / dy * rp;
            prod *= k_here;
            z *= m.a;
            // geometric bound on the remaining terms; the terms themselves tend
            // to `(rp)^h L(0)` once `a^h s` is small
            let z_next = z;
            let k_next = (m.n_y.eval(z_next) / m.d_y.eval(z_next) * rp).norm();
            let l0 = (1.0 / m.d_y.eval(c64(0.0)).norm()).max(1.0);
            let ratio = k_next.max(rp);
            if ratio < 1.0 {
                let tail = prod.norm() * lmax.max(l0) / (1.0 - ratio);
                let scale = 1.0 + g.iter().map(|x| x.norm()).fold(gw.norm(), f64::max);
                if tail <= m.ctl.tail_tol * scale {
                    return Ok(BasisValue { g, gw, terms: h + 1, tail });
                }
            }
        }
        let tail = prod.norm();
        Err(Error::SeriesBudgetExceeded { max_terms: m.ctl.max_terms, tail_tol: m.ctl.tail_tol, tail_bound: tail })
    }
}

pub fn m2_find_deltas(spec: &ModelSpec, r: f64) -> Result<DeltaRoots> {
    ModelTwo::new(spec, &QuadRule::default(), &SeriesControl::default())?.find_deltas(r)
}
