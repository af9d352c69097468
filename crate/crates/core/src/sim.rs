//! Seeded Monte Carlo for `W_{i+1} = [V_i W_i + B_i - A_i]^+`.
//!
//! Replication `k` draws from the ChaCha8 stream `k` of the configured seed, so
//! results do not depend on the thread count. In antithetic mode a unit is the
//! average of a plain run and its reflected-uniform twin on the same stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{Antithetic, ModelSpec, UniformSource};
use crate::error::{Error, Result};
use crate::numerics::QuadRule;
use crate::stability::{classify, Verdict};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub replications: usize,
    pub path_length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { replications: 100, path_length: 11_000, burn_in: 1_000, seed: 20240229, antithetic: false }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let min = if self.antithetic { 4 } else { 2 };
        if self.replications < min {
            return Err(Error::Domain(format!("need at least {min} replications for a standard error")));
        }
        if self.burn_in >= self.path_length {
            return Err(Error::Domain("burn_in must be smaller than path_length".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Number of independent units behind the standard error.
    pub n_effective: usize,
    pub seed: u64,
}

/// Quantities recorded at the sampled epoch.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "s", rename_all = "snake_case")]
pub enum Functional {
    /// `e^{-s W}`.
    Lst(f64),
    /// `e^{-s min(V W + B - A, 0)}` with one further step drawn; use `s <= 0`.
    LstMinus(f64),
    /// `1{W = 0}`.
    Atom,
    /// `W`.
    Mean,
    /// `W^2`.
    SecondMoment,
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryEstimates {
    pub atom: SimEstimate,
    pub mean: SimEstimate,
    pub second_moment: SimEstimate,
    pub lst: Vec<(f64, SimEstimate)>,
}

fn positive_part(x: f64) -> f64 {
    // also maps -0.0 to +0.0 so zeros are exact
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Pre-reflection value `V W + B - A` for one fresh step.
fn raw_step<U: UniformSource + ?Sized>(spec: &ModelSpec, w: f64, u: &mut U) -> f64 {
    let v = spec.v.sample(u);
    let a = spec.a.sample(u);
    let b = spec.b.sample(u);
    v * w + b - a
}

fn check_simulable(spec: &ModelSpec) -> Result<()> {
    spec.validate_laws()?;
    if !spec.simulable() {
        return Err(Error::NotSimulable("a law without a constructive sampler (raw rational transform)".into()));
    }
    Ok(())
}

/// `W_0 .. W_steps`.
pub fn simulate_path<U: UniformSource + ?Sized>(spec: &ModelSpec, steps: usize, u: &mut U) -> Vec<f64> {
    let mut path = Vec::with_capacity(steps + 1);
    let mut w = spec.w0;
    path.push(w);
    for _ in 0..steps {
        w = positive_part(raw_step(spec, w, u));
        path.push(w);
    }
    path
}

fn record<U: UniformSource + ?Sized>(spec: &ModelSpec, w: f64, fs: &[Functional], u: &mut U) -> Vec<f64> {
    let mut minus = None;
    fs.iter()
        .map(|f| match *f {
            Functional::Lst(s) => (-s * w).exp(),
            Functional::LstMinus(s) => {
                let m = *minus.get_or_insert_with(|| raw_step(spec, w, u).min(0.0));
                (-s * m).exp()
            }
            Functional::Atom => {
                if w == 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Functional::Mean => w,
            Functional::SecondMoment => w * w,
        })
        .collect()
}

/// Runs `unit` once per replication (or antithetic pair), in parallel, and
/// merges in replication order.
fn run_units<F>(cfg: &SimConfig, unit: F) -> Vec<SimEstimate>
where
    F: Fn(&mut dyn UniformSource) -> Vec<f64> + Sync,
{
    let units = if cfg.antithetic { cfg.replications / 2 } else { cfg.replications };
    let stream = |k: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(k as u64);
        rng
    };
    let results: Vec<Vec<f64>> = (0..units)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(k);
            let plain = unit(&mut rng);
            if !cfg.antithetic {
                return plain;
            }
            let mut anti = Antithetic(stream(k));
            let twin = unit(&mut anti);
            plain.iter().zip(&twin).map(|(a, b)| 0.5 * (a + b)).collect()
        })
        .collect();
    let n = results.len() as f64;
    let width = results.first().map_or(0, |r| r.len());
    (0..width)
        .map(|j| {
            let mean = results.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = results.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / (n - 1.0);
            SimEstimate { value: mean, std_error: (var / n).sqrt(), n_effective: results.len(), seed: cfg.seed }
        })
        .collect()
}

/// Long-run time averages after burn-in; one standard-error unit per replication.
pub fn estimate_stationary(spec: &ModelSpec, s_values: &[f64], cfg: &SimConfig) -> Result<StationaryEstimates> {
    cfg.validate()?;
    check_simulable(spec)?;
    let verdict = classify(spec, &QuadRule::default(), 0, cfg.seed)?;
    if matches!(verdict.verdict, Verdict::PossiblyImproper | Verdict::Unsupported) {
        return Err(Error::Stability(format!("no stationary regime to estimate: {:?}", verdict.verdict)));
    }
    let mut fs = vec![Functional::Atom, Functional::Mean, Functional::SecondMoment];
    fs.extend(s_values.iter().map(|&s| Functional::Lst(s)));
    let kept = (cfg.path_length - cfg.burn_in) as f64;
    let est = run_units(cfg, |u| {
        let mut acc = vec![0.0; fs.len()];
        let mut w = spec.w0;
        for i in 0..cfg.path_length {
            w = positive_part(raw_step(spec, w, u));
            if i >= cfg.burn_in {
                for (a, x) in acc.iter_mut().zip(record(spec, w, &fs, u)) {
                    *a += x;
                }
            }
        }
        acc.iter().map(|a| a / kept).collect()
    });
    Ok(StationaryEstimates {
        atom: est[0].clone(),
        mean: est[1].clone(),
        second_moment: est[2].clone(),
        lst: s_values.iter().copied().zip(est[3..].iter().cloned()).collect(),
    })
}

/// `E f(W_N)` with `P(N = k) = (1 - r) r^k`, i.e. `(1 - r) sum_k r^k E f(W_k)`.
pub fn estimate_geometric(spec: &ModelSpec, r: f64, fs: &[Functional], cfg: &SimConfig) -> Result<Vec<SimEstimate>> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("r must lie in (0, 1), got {r}")));
    }
    cfg.validate()?;
    check_simulable(spec)?;
    let log_r = r.ln();
    Ok(run_units(cfg, |u| {
        let n = (u.uniform().ln() / log_r).floor() as u64;
        let mut w = spec.w0;
        for _ in 0..n {
            w = positive_part(raw_step(spec, w, u));
        }
        record(spec, w, fs, u)
    }))
}

pub fn estimate_geometric_transform(spec: &ModelSpec, r: f64, s: f64, cfg: &SimConfig) -> Result<SimEstimate> {
    Ok(estimate_geometric(spec, r, &[Functional::Lst(s)], cfg)?.remove(0))
}

/// `E f(W_i)` across replications.
pub fn estimate_at_step(spec: &ModelSpec, i: usize, fs: &[Functional], cfg: &SimConfig) -> Result<Vec<SimEstimate>> {
    cfg.validate()?;
    check_simulable(spec)?;
    Ok(run_units(cfg, |u| {
        let mut w = spec.w0;
        for _ in 0..i {
            w = positive_part(raw_step(spec, w, u));
        }
        record(spec, w, fs, u)
    }))
}

/// `P(W_i = 0)` as the fraction of replications ending exactly at zero.
pub fn estimate_transient_atom(spec: &ModelSpec, i: usize, cfg: &SimConfig) -> Result<SimEstimate> {
    Ok(estimate_at_step(spec, i, &[Functional::Atom], cfg)?.remove(0))
}
