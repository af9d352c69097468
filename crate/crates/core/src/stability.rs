//! Long-run classification of a model: does `W_i` converge, and to what.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::digamma;

use crate::dist::{DistSpec, ModelSpec, MultiplierSpec};
use crate::error::{Error, Result};
use crate::numerics::{integrate, QuadRule};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitCondition {
    /// `P(V < 0) > 0` and `P(Y <= 0) > 0`.
    C1,
    /// `V >= 0` a.s. and `P(V = 0) > 0`.
    C2,
    /// `V > 0` a.s. and `E log|V| < 0`.
    C3,
    /// `E log|V| < 0` for a multiplier of any sign.
    LogMoment,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StationaryReason {
    /// `Y >= 0` a.s.
    NonnegativeY,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ProperUniqueLimit(LimitCondition),
    /// A stationary law exists; `W_i` itself may oscillate.
    StationaryExists(StationaryReason),
    PossiblyImproper,
    Unsupported,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub p_v_negative: f64,
    pub p_v_zero: f64,
    /// `P(Y <= 0) > 0`, decided from the supports of `A` and `B`.
    pub y_nonpositive_possible: bool,
    pub p_y_nonpositive: f64,
    /// `[lo, hi]` bracket on `P(Y <= 0)`; degenerate for closed forms.
    pub p_y_nonpositive_interval: [f64; 2],
    pub p_y_nonpositive_method: String,
    pub e_log_abs_v: Option<f64>,
    pub e_abs_v: f64,
    pub c3_holds: bool,
    /// Uniqueness of the limit, which holds in cases C1 and C2.
    pub unique_limit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub verdict: Verdict,
    pub diagnostics: Diagnostics,
    pub warnings: Vec<String>,
}

impl StabilityVerdict {
    pub fn is_proper(&self) -> bool {
        matches!(self.verdict, Verdict::ProperUniqueLimit(_))
    }
}

/// `E log|V|`; fails when `P(V = 0) > 0`.
pub fn e_log_abs_v(v: &MultiplierSpec, rule: &QuadRule) -> Result<f64> {
    match v {
        MultiplierSpec::NegativeAtoms { atoms } => Ok(atoms.iter().map(|a| a.prob * a.value.abs().ln()).sum()),
        MultiplierSpec::NegativeScaled { c, dist } => Ok(c.ln() + e_log(dist, rule)?),
        MultiplierSpec::MixedAtom { a, p, negative } => Ok(p * a.ln() + (1.0 - p) * e_log_abs_v(negative, rule)?),
        MultiplierSpec::Uniform01 => Ok(-1.0),
        MultiplierSpec::PowerUniform { alpha } => Ok(-1.0 / alpha),
    }
}

/// `E log X` for a nonnegative law.
fn e_log(d: &DistSpec, rule: &QuadRule) -> Result<f64> {
    let xlogx = |x: f64| if x == 0.0 { 0.0 } else { x * x.ln() };
    match d {
        DistSpec::Deterministic { value } => {
            if *value == 0.0 {
                Err(Error::Domain("E log|V| undefined: V = 0 with positive probability".into()))
            } else {
                Ok(value.ln())
            }
        }
        DistSpec::Uniform { lo, hi } => Ok((xlogx(*hi) - hi - xlogx(*lo) + lo) / (hi - lo)),
        DistSpec::Exponential { rate } => Ok(-EULER_GAMMA - rate.ln()),
        DistSpec::Erlang { shape, rate } => Ok(digamma(*shape as f64) - rate.ln()),
        DistSpec::HyperExponential { weights, rates } => {
            Ok(weights.iter().zip(rates).map(|(w, r)| w * (-EULER_GAMMA - r.ln())).sum())
        }
        _ => {
            let rule = rule.clone().with_hints(&[0.0]);
            integrate(|x| if x > 0.0 { x.ln() * d.density(x).unwrap_or(f64::NAN) } else { 0.0 }, 0.0, f64::INFINITY, &rule)
        }
    }
}

/// `P(B <= A) > 0` from the supports alone.
fn b_le_a_possible(a: &DistSpec, b: &DistSpec) -> bool {
    let (b_inf, _) = b.support();
    let (_, a_sup) = a.support();
    b_inf < a_sup || (b_inf == a_sup && b.atom_at(b_inf) > 0.0 && a.atom_at(a_sup) > 0.0)
}

/// Closed form for `P(B <= A)` when one exists.
fn b_le_a_exact(a: &DistSpec, b: &DistSpec) -> Option<(f64, &'static str)> {
    if let DistSpec::Exponential { rate } = a {
        // P(A >= B) = E e^{-lambda B}
        return b.lst_eval(Complex64::new(*rate, 0.0)).ok().map(|v| (v.re, "exponential_a"));
    }
    if let (DistSpec::Deterministic { value: x }, DistSpec::Deterministic { value: y }) = (a, b) {
        return Some((if y <= x { 1.0 } else { 0.0 }, "deterministic"));
    }
    if b.is_rational() {
        // P(B > x) = sum_j -R_j / s_j e^{s_j x}, hence P(B > A) = sum_j -R_j / s_j Phi_A(-s_j)
        let lst = b.lst().ok()?.with_distinct_poles().0;
        let mut tail = Complex64::new(0.0, 0.0);
        for (r, s) in lst.residues().iter().zip(&lst.poles) {
            tail += -r / s * a.lst_eval(-s).ok()?;
        }
        return Some(((1.0 - tail.re).clamp(0.0, 1.0), "residues"));
    }
    None
}

/// Wilson score interval at 99% confidence.
fn wilson(hits: usize, n: usize) -> [f64; 2] {
    let z = 2.575_829_303_548_901;
    let n = n as f64;
    let p = hits as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

/// Classifies the long-run behaviour of `spec`.
///
/// `mc_budget` samples (seeded by `seed`) are used for `P(Y <= 0)` only when
/// no closed form applies.
pub fn classify(spec: &ModelSpec, rule: &QuadRule, mc_budget: usize, seed: u64) -> Result<StabilityVerdict> {
    spec.validate_laws()?;
    let v = &spec.v;
    let p_v_negative = v.prob_negative();
    let p_v_zero = v.prob_zero();
    let possible = b_le_a_possible(&spec.a, &spec.b);

    let (p_y, interval, method) = if !possible {
        (0.0, [0.0, 0.0], "support".to_string())
    } else if let Some((p, m)) = b_le_a_exact(&spec.a, &spec.b) {
        (p, [p, p], m.to_string())
    } else {
        if !spec.simulable() || mc_budget == 0 {
            return Err(Error::Inconclusive("no closed form for P(B <= A) and no sampling budget".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hits = (0..mc_budget)
            .filter(|_| spec.b.sample(&mut rng) <= spec.a.sample(&mut rng))
            .count();
        (hits as f64 / mc_budget as f64, wilson(hits, mc_budget), "monte_carlo".to_string())
    };

    let e_log_abs_v = if p_v_zero > 0.0 { None } else { Some(e_log_abs_v(v, rule)?) };
    let positive_v = p_v_negative == 0.0 && p_v_zero == 0.0;
    let c3_holds = positive_v && e_log_abs_v.is_some_and(|x| x < 0.0);
    let mut warnings = Vec::new();

    let verdict = if p_v_negative > 0.0 && possible {
        Verdict::ProperUniqueLimit(LimitCondition::C1)
    } else if p_v_negative == 0.0 && p_v_zero > 0.0 {
        Verdict::ProperUniqueLimit(LimitCondition::C2)
    } else if e_log_abs_v.is_some_and(|x| x < 0.0) {
        Verdict::ProperUniqueLimit(LimitCondition::LogMoment)
    } else if p_v_negative + p_v_zero > 0.0 && !possible {
        warnings.push(
            "Y >= 0 a.s.: a stationary law exists but W_i need not converge (the chain may be periodic)".into(),
        );
        Verdict::StationaryExists(StationaryReason::NonnegativeY)
    } else if positive_v && e_log_abs_v.is_some_and(|x| x.abs() <= 1e-12) && spec.w0 == 0.0 {
        warnings.push("E log|V| = 0: the limit may be improper".into());
        Verdict::PossiblyImproper
    } else {
        Verdict::Unsupported
    };

    let unique_limit = matches!(
        verdict,
        Verdict::ProperUniqueLimit(LimitCondition::C1 | LimitCondition::C2 | LimitCondition::LogMoment)
    );
    Ok(StabilityVerdict {
        verdict,
        diagnostics: Diagnostics {
            p_v_negative,
            p_v_zero,
            y_nonpositive_possible: possible,
            p_y_nonpositive: p_y,
            p_y_nonpositive_interval: interval,
            p_y_nonpositive_method: method,
            e_log_abs_v,
            e_abs_v: v.mean_abs(),
            c3_holds,
            unique_limit,
        },
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Atom, ModelKind};

    fn atoms(v: &[(f64, f64)]) -> MultiplierSpec {
        MultiplierSpec::NegativeAtoms { atoms: v.iter().map(|&(value, prob)| Atom { value, prob }).collect() }
    }

    #[test]
    fn exp_unit_is_c1() {
        let spec = ModelSpec {
            model: ModelKind::I,
            v: atoms(&[(-1.0, 1.0)]),
            a: DistSpec::Exponential { rate: 1.0 },
            b: DistSpec::Exponential { rate: 1.0 },
            w0: 0.0,
        };
        let v = classify(&spec, &QuadRule::default(), 0, 1).unwrap();
        assert_eq!(v.verdict, Verdict::ProperUniqueLimit(LimitCondition::C1));
        assert!((v.diagnostics.p_y_nonpositive - 0.5).abs() < 1e-14);
        assert!(v.diagnostics.unique_limit);
    }

    #[test]
    fn uniform_multiplier_log_moment() {
        let spec = ModelSpec {
            model: ModelKind::III,
            v: MultiplierSpec::Uniform01,
            a: DistSpec::Exponential { rate: 1.0 },
            b: DistSpec::Exponential { rate: 1.0 },
            w0: 0.0,
        };
        let v = classify(&spec, &QuadRule::default(), 0, 1).unwrap();
        assert_eq!(v.verdict, Verdict::ProperUniqueLimit(LimitCondition::LogMoment));
        assert!(v.diagnostics.c3_holds);
        assert_eq!(v.diagnostics.e_log_abs_v, Some(-1.0));
    }

    #[test]
    fn periodic_example() {
        let spec = ModelSpec {
            model: ModelKind::I,
            v: atoms(&[(-2.0, 0.5), (-3.0, 0.5)]),
            a: DistSpec::Deterministic { value: 0.0 },
            b: DistSpec::Uniform { lo: 1.0, hi: 2.0 },
            w0: 0.0,
        };
        let v = classify(&spec, &QuadRule::default(), 0, 1).unwrap();
        assert_eq!(v.verdict, Verdict::StationaryExists(StationaryReason::NonnegativeY));
        assert_eq!(v.warnings.len(), 1);
        assert_eq!(v.diagnostics.p_y_nonpositive, 0.0);
    }

    #[test]
    fn residue_route_matches_exponential_route() {
        // A exponential lets both closed forms apply; compare them
        let a = DistSpec::Exponential { rate: 0.7 };
        let b = DistSpec::Erlang { shape: 2, rate: 1.3 };
        let direct = b.lst_eval(Complex64::new(0.7, 0.0)).unwrap().re;
        let lst = b.lst().unwrap().with_distinct_poles().0;
        let tail: Complex64 = lst
            .residues()
            .iter()
            .zip(&lst.poles)
            .map(|(r, s)| -r / s * a.lst_eval(-s).unwrap())
            .sum();
        // splitting the double pole moves the law by O(1e-6)
        assert!((1.0 - tail.re - direct).abs() < 1e-5);
    }

    #[test]
    fn monte_carlo_bracket_covers_truth() {
        let spec = ModelSpec {
            model: ModelKind::I,
            v: atoms(&[(-1.0, 1.0)]),
            a: DistSpec::Uniform { lo: 0.0, hi: 2.0 },
            b: DistSpec::Uniform { lo: 1.0, hi: 2.0 },
            w0: 0.0,
        };
        // P(B <= A) = int_1^2 (2 - b)/2 db = 1/4
        let v = classify(&spec, &QuadRule::default(), 200_000, 3).unwrap();
        let [lo, hi] = v.diagnostics.p_y_nonpositive_interval;
        assert!(lo <= 0.25 && 0.25 <= hi, "{lo} {hi}");
        assert_eq!(v.diagnostics.p_y_nonpositive_method, "monte_carlo");
    }

    #[test]
    fn log_moments_closed_forms() {
        let rule = QuadRule::default();
        assert_eq!(e_log_abs_v(&atoms(&[(-std::f64::consts::E, 1.0)]), &rule).unwrap(), 1.0);
        assert!((e_log_abs_v(&MultiplierSpec::PowerUniform { alpha: 4.0 }, &rule).unwrap() + 0.25).abs() < 1e-15);
        // closed forms against the quadrature fallback
        let cox = DistSpec::CoxianChain { rates: vec![2.0, 2.0], exit_probs: vec![0.0, 1.0] };
        let erl = DistSpec::Erlang { shape: 2, rate: 2.0 };
        assert!((e_log(&cox, &rule).unwrap() - e_log(&erl, &rule).unwrap()).abs() < 1e-9);
        let exp_as_cox = DistSpec::CoxianChain { rates: vec![3.0], exit_probs: vec![1.0] };
        let exp = DistSpec::Exponential { rate: 3.0 };
        assert!((e_log(&exp_as_cox, &rule).unwrap() - e_log(&exp, &rule).unwrap()).abs() < 1e-9);
    }
}
