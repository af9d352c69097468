//! Command-line front end: JSON run configuration, subcommand dispatch and
//! CSV/JSON emission with reproducibility metadata.

use std::fmt::Write as _;
use std::io::Read as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dist::{DistSpec, ModelKind, ModelSpec, MultiplierSpec};
use crate::error::Error;
use crate::model1::ModelOne;
use crate::model2::{ModelTwo, SeriesControl};
use crate::model3::{moments_exp_b, M3Kernel};
use crate::numerics::QuadRule;
use crate::sim::{estimate_geometric, estimate_stationary, Functional, SimConfig};
use crate::stability::classify;

pub const EXIT_OK: i32 = 0;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_VALIDATION: i32 = 4;

/// Validation threshold on `|z|`.
pub const Z_LIMIT: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum, Default)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub format: Format,
    /// Output file; standard output when absent.
    pub path: Option<String>,
}

/// Evaluation points: an explicit list or `points` equally spaced values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Default for SGrid {
    fn default() -> Self {
        SGrid::Range { start: 0.0, stop: 10.0, points: 21 }
    }
}

impl SGrid {
    pub fn points(&self) -> Vec<f64> {
        match self {
            SGrid::List(v) => v.clone(),
            SGrid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|i| start + (stop - start) * i as f64 / (*n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub quad: QuadRule,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub series: SeriesControl,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub s_grid: SGrid,
    #[serde(default = "default_r")]
    pub r_values: Vec<f64>,
    /// Highest moment order for `moments`.
    #[serde(default = "default_order")]
    pub order: usize,
    /// Iteration count for `iterate`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Monte Carlo budget for the stability check when no closed form applies.
    #[serde(default = "default_mc_budget")]
    pub stability_mc_budget: usize,
}

fn default_r() -> Vec<f64> {
    vec![0.5]
}
fn default_order() -> usize {
    4
}
fn default_steps() -> usize {
    200
}
fn default_mc_budget() -> usize {
    200_000
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemaError {
    pub field: String,
    pub message: String,
    pub line: Option<usize>,
    pub column: Option<usize>,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "schema error in `{}`: {}", self.field, self.message)?;
        if let (Some(l), Some(c)) = (self.line, self.column) {
            write!(f, " (line {l}, column {c})")?;
        }
        Ok(())
    }
}

fn schema(field: &str, message: impl Into<String>) -> SchemaError {
    SchemaError { field: field.into(), message: message.into(), line: None, column: None }
}

/// Parses and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        SchemaError { field, message: inner.to_string(), line: Some(inner.line()), column: Some(inner.column()) }
    })?;
    validate_config(&cfg)?;
    Ok(cfg)
}

pub fn validate_config(cfg: &RunConfig) -> Result<(), SchemaError> {
    let m = &cfg.model;
    if !(m.w0.is_finite() && m.w0 >= 0.0) {
        return Err(schema("model.w0", format!("w0 must be >= 0, got {}", m.w0)));
    }
    m.v.validate().map_err(|e| schema("model.v", e.to_string()))?;
    m.a.validate().map_err(|e| schema("model.a", e.to_string()))?;
    m.b.validate().map_err(|e| schema("model.b", e.to_string()))?;
    m.validate().map_err(|e| schema("model.model", e.to_string()))?;
    cfg.quad.validate().map_err(|e| schema("quad", e.to_string()))?;
    cfg.sim.validate().map_err(|e| schema("sim", e.to_string()))?;
    if cfg.series.max_terms < 1 || !(cfg.series.tail_tol > 0.0) {
        return Err(schema("series", "need max_terms >= 1 and tail_tol > 0"));
    }
    if let Some(r) = cfg.r_values.iter().find(|r| !(**r > 0.0 && **r < 1.0)) {
        return Err(schema("r_values", format!("each r must lie in (0, 1), got {r}")));
    }
    let pts = cfg.s_grid.points();
    if pts.is_empty() || pts.iter().any(|s| !s.is_finite()) {
        return Err(schema("s_grid", "grid must contain finite values"));
    }
    Ok(())
}

#[derive(Parser, Debug)]
#[command(name = "arproc", version, about = "Reflected autoregressive recursion W' = [V W + B - A]^+")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
    /// JSON run configuration ("-" for standard input).
    #[arg(long, global = true)]
    pub config: Option<String>,
    /// Values of r, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub r: Option<Vec<f64>>,
    /// Evaluation points: "start:stop:points" or a comma-separated list.
    #[arg(long = "s-grid", global = true)]
    pub s_grid: Option<String>,
    /// Number of moments for `moments`.
    #[arg(long, global = true)]
    pub order: Option<usize>,
    /// Iteration count for `iterate`.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Simulation seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Simulation replications.
    #[arg(long, global = true)]
    pub replications: Option<usize>,
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<String>,
    /// Model override; "auto" keeps the configured one.
    #[arg(long, global = true, default_value = "auto")]
    pub model: String,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Classify the model: stationary law exists, possibly improper, or unsupported.
    Stability,
    /// Stationary transform on the s grid, with atom and mean.
    Stationary,
    /// Geometric-epoch transform Psi_W(r, s) for each r.
    Transient,
    /// Stationary moments, model III with exponential B.
    Moments,
    /// Iterated transforms Phi_{W_i}, model III.
    Iterate,
    /// Monte Carlo estimates only.
    Simulate,
    /// Compare analytic values against simulation, with z-scores.
    Validate,
}

fn parse_s_grid(text: &str) -> Result<SGrid, SchemaError> {
    let bad = || schema("s_grid", format!("cannot parse --s-grid `{text}`"));
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() == 3 {
        let start = parts[0].trim().parse().map_err(|_| bad())?;
        let stop = parts[1].trim().parse().map_err(|_| bad())?;
        let points = parts[2].trim().parse().map_err(|_| bad())?;
        return Ok(SGrid::Range { start, stop, points });
    }
    text.split(',').map(|x| x.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>().map(SGrid::List)
}

/// Applies command-line overrides and re-validates.
pub fn apply_overrides(mut cfg: RunConfig, cli: &Cli) -> Result<RunConfig, SchemaError> {
    if let Some(r) = &cli.r {
        cfg.r_values = r.clone();
    }
    if let Some(g) = &cli.s_grid {
        cfg.s_grid = parse_s_grid(g)?;
    }
    if let Some(o) = cli.order {
        cfg.order = o;
    }
    if let Some(s) = cli.steps {
        cfg.steps = s;
    }
    if let Some(s) = cli.seed {
        cfg.sim.seed = s;
    }
    if let Some(n) = cli.replications {
        cfg.sim.replications = n;
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(p) = &cli.output {
        cfg.output.path = Some(p.clone());
    }
    match cli.model.to_ascii_lowercase().as_str() {
        "auto" => {}
        "i" | "1" => cfg.model.model = ModelKind::I,
        "ii" | "2" => cfg.model.model = ModelKind::II,
        "iii" | "3" => cfg.model.model = ModelKind::III,
        other => return Err(schema("model", format!("unknown --model `{other}` (auto, I, II, III)"))),
    }
    validate_config(&cfg)?;
    Ok(cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub series_tail_tol: f64,
    pub config: RunConfig,
}

impl Meta {
    pub fn new(cfg: &RunConfig) -> Self {
        let canonical = serde_json::to_string(cfg).expect("config serializes");
        Meta {
            tool: "arproc",
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: hex::encode(Sha256::digest(canonical.as_bytes())),
            seed: cfg.sim.seed,
            abs_tol: cfg.quad.abs_tol,
            rel_tol: cfg.quad.rel_tol,
            series_tail_tol: cfg.series.tail_tol,
            config: cfg.clone(),
        }
    }

    fn csv_header(&self) -> String {
        format!(
            "# tool: {} {}\n# config_sha256: {}\n# seed: {}\n# tolerances: abs={:e} rel={:e} series_tail={:e}\n# config: {}\n",
            self.tool,
            self.version,
            self.config_sha256,
            self.seed,
            self.abs_tol,
            self.rel_tol,
            self.series_tail_tol,
            serde_json::to_string(&self.config).expect("config serializes")
        )
    }
}

/// Failure of a subcommand with its exit code.
#[derive(Debug)]
pub enum RunError {
    Schema(SchemaError),
    Numeric(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => EXIT_SCHEMA,
            RunError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    pub fn to_json(&self) -> String {
        let v = match self {
            RunError::Schema(s) => serde_json::json!({"error": "schema", "field": s.field, "message": s.message,
                "line": s.line, "column": s.column}),
            RunError::Numeric(e) => serde_json::json!({"error": "numeric", "kind": error_kind(e), "message": e.to_string()}),
        };
        v.to_string()
    }
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string()
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Numeric(e)
    }
}

/// Rendered output and the exit status it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub text: String,
    pub exit: i32,
}

enum Analytic {
    One(ModelOne),
    Two(ModelTwo),
    Three(M3Kernel),
}

impl Analytic {
    fn new(cfg: &RunConfig) -> Result<Self, Error> {
        Ok(match cfg.model.model {
            ModelKind::I => Analytic::One(ModelOne::new(&cfg.model, &cfg.quad)?),
            ModelKind::II => Analytic::Two(ModelTwo::new(&cfg.model, &cfg.quad, &cfg.series)?),
            ModelKind::III => Analytic::Three(M3Kernel::new(&cfg.model, &cfg.quad)?),
        })
    }

    /// `(atom, mean, Phi_W(s) for each s)`.
    fn stationary(&self, s: &[f64]) -> Result<(f64, f64, Vec<f64>), Error> {
        let c = |x: f64| num_complex::Complex64::new(x, 0.0);
        match self {
            Analytic::One(m) => {
                let st = m.stationary()?;
                let v = s.iter().map(|&x| m.stationary_lst(&st.coeffs, c(x)).map(|z| z.re)).collect::<Result<_, _>>()?;
                Ok((st.atom, st.mean, v))
            }
            Analytic::Two(m) => {
                let st = m.stationary()?;
                let v = s.iter().map(|&x| m.stationary_lst(&st.coeffs, c(x)).map(|z| z.re)).collect::<Result<_, _>>()?;
                Ok((st.atom, st.mean, v))
            }
            Analytic::Three(k) => {
                let st = k.stationary()?;
                let v = s
                    .iter()
                    .map(|&x| around_lambda(k.lambda, x, |y| k.stationary_lst(&st, y)))
                    .collect::<Result<_, _>>()?;
                Ok((st.p_inf, st.mean, v))
            }
        }
    }

    /// `Psi_W(r, s)` for each `s`.
    fn transient(&self, r: f64, s: &[f64]) -> Result<Vec<f64>, Error> {
        let c = |x: f64| num_complex::Complex64::new(x, 0.0);
        match self {
            Analytic::One(m) => {
                let cv = m.transient_coeffs(r)?;
                s.iter().map(|&x| m.transient_lst(&cv, c(x)).map(|z| z.re)).collect()
            }
            Analytic::Two(m) => {
                let cv = m.transient_coeffs(r)?;
                s.iter().map(|&x| m.transient_lst(&cv, c(x)).map(|z| z.0.re)).collect()
            }
            Analytic::Three(k) => {
                let tr = k.transient(r)?;
                s.iter().map(|&x| around_lambda(k.lambda, x, |y| k.transient_lst(&tr, y))).collect()
            }
        }
    }
}

/// Evaluates `f(s)`; at `s = lambda`, where the formulas are removable,
/// returns the mean of the two neighbours at relative distance `1e-6`.
fn around_lambda(lambda: f64, s: f64, f: impl Fn(f64) -> Result<f64, Error>) -> Result<f64, Error> {
    match f(s) {
        Err(Error::SEvalAtLambda) => {
            let h = 1e-6 * lambda.max(1.0);
            Ok(0.5 * (f(lambda - h)? + f(lambda + h)?))
        }
        other => other,
    }
}

fn fmt_num(x: f64) -> String {
    // shortest round-trip representation
    serde_json::to_string(&x).unwrap_or_else(|_| "NaN".into())
}

fn ensure_finite(vals: &[f64], what: &str) -> Result<(), Error> {
    if let Some(v) = vals.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite {what} value {v}")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationItem {
    pub name: String,
    pub analytic: f64,
    pub simulated: f64,
    pub std_error: f64,
    /// `None` when the standard error is zero.
    pub z: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub meta: Meta,
    pub items: Vec<ValidationItem>,
    pub skipped: Vec<String>,
    pub passed: bool,
}

fn item(name: String, analytic: f64, simulated: f64, std_error: f64) -> ValidationItem {
    let diff = analytic - simulated;
    let (z, pass) = if std_error > 0.0 {
        let z = diff / std_error;
        (Some(z), z.abs() < Z_LIMIT)
    } else {
        (None, diff.abs() <= 1e-12 * (1.0 + analytic.abs()))
    };
    ValidationItem { name, analytic, simulated, std_error, z, pass }
}

pub fn validate_report(cfg: &RunConfig) -> Result<ValidationReport, Error> {
    let analytic = Analytic::new(cfg)?;
    let s = cfg.s_grid.points();
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    let verdict = classify(&cfg.model, &cfg.quad, cfg.stability_mc_budget, cfg.sim.seed)?;
    if verdict.is_proper() {
        let (atom, mean, lst) = analytic.stationary(&s)?;
        let mc = estimate_stationary(&cfg.model, &s, &cfg.sim)?;
        items.push(item("stationary.atom".into(), atom, mc.atom.value, mc.atom.std_error));
        items.push(item("stationary.mean".into(), mean, mc.mean.value, mc.mean.std_error));
        for ((x, v), (_, e)) in s.iter().zip(&lst).zip(&mc.lst) {
            items.push(item(format!("stationary.lst(s={})", fmt_num(*x)), *v, e.value, e.std_error));
        }
    } else {
        skipped.push(format!("stationary comparison skipped: verdict {:?}", verdict.verdict));
    }
    for &r in &cfg.r_values {
        let psi = analytic.transient(r, &s)?;
        let fs: Vec<Functional> = s.iter().map(|&x| Functional::Lst(x)).collect();
        let mc = estimate_geometric(&cfg.model, r, &fs, &cfg.sim)?;
        for ((x, p), e) in s.iter().zip(&psi).zip(&mc) {
            items.push(item(format!("geometric(r={}, s={})", fmt_num(r), fmt_num(*x)), (1.0 - r) * p, e.value, e.std_error));
        }
    }
    let passed = items.iter().all(|i| i.pass);
    Ok(ValidationReport { meta: Meta::new(cfg), items, skipped, passed })
}

/// Runs one subcommand on a validated configuration.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Output, RunError> {
    let meta = Meta::new(cfg);
    let json_out = cfg.output.format == Format::Json;
    let s = cfg.s_grid.points();
    let wrap = |result: serde_json::Value| -> String {
        let v = serde_json::json!({"meta": meta, "result": result});
        serde_json::to_string_pretty(&v).expect("serializable") + "\n"
    };
    let text = match cmd {
        Command::Stability => {
            let v = classify(&cfg.model, &cfg.quad, cfg.stability_mc_budget, cfg.sim.seed)?;
            wrap(serde_json::to_value(&v).expect("serializable"))
        }
        Command::Stationary => {
            let (atom, mean, vals) = Analytic::new(cfg)?.stationary(&s)?;
            ensure_finite(&vals, "stationary transform")?;
            if json_out {
                wrap(serde_json::json!({"atom": atom, "mean": mean, "s": s, "lst": vals}))
            } else {
                let mut out = meta.csv_header();
                let _ = writeln!(out, "# atom: {}\n# mean: {}\ns,lst", fmt_num(atom), fmt_num(mean));
                for (x, v) in s.iter().zip(&vals) {
                    let _ = writeln!(out, "{},{}", fmt_num(*x), fmt_num(*v));
                }
                out
            }
        }
        Command::Transient => {
            let a = Analytic::new(cfg)?;
            let curves: Vec<Vec<f64>> = cfg.r_values.iter().map(|&r| a.transient(r, &s)).collect::<Result<_, _>>()?;
            for c in &curves {
                ensure_finite(c, "transient transform")?;
            }
            if json_out {
                wrap(serde_json::json!({"r": cfg.r_values, "s": s, "psi": curves}))
            } else {
                let mut out = meta.csv_header();
                out.push_str("r,s,psi\n");
                for (r, c) in cfg.r_values.iter().zip(&curves) {
                    for (x, v) in s.iter().zip(c) {
                        let _ = writeln!(out, "{},{},{}", fmt_num(*r), fmt_num(*x), fmt_num(*v));
                    }
                }
                out
            }
        }
        Command::Moments => {
            let (lambda, mu) = match (&cfg.model.model, &cfg.model.v, &cfg.model.a, &cfg.model.b) {
                (ModelKind::III, MultiplierSpec::Uniform01, DistSpec::Exponential { rate: l }, DistSpec::Exponential { rate: m }) => {
                    (*l, *m)
                }
                _ => {
                    return Err(RunError::Numeric(Error::UnsupportedParameter(
                        "the moment recursion needs model III with uniform V and exponential A and B".into(),
                    )))
                }
            };
            let m = moments_exp_b(lambda, mu, cfg.order)?;
            if json_out {
                wrap(serde_json::to_value(&m).expect("serializable"))
            } else {
                let mut out = meta.csv_header();
                let _ = writeln!(out, "# p_inf: {}", fmt_num(m.p_inf));
                for w in &m.warnings {
                    let _ = writeln!(out, "# warning: {w}");
                }
                out.push_str("k,omega\n");
                for (k, w) in m.omegas.iter().enumerate() {
                    let _ = writeln!(out, "{},{}", k + 1, fmt_num(*w));
                }
                out
            }
        }
        Command::Iterate => {
            if cfg.model.model != ModelKind::III {
                return Err(RunError::Numeric(Error::UnsupportedParameter("iterate needs a model III configuration".into())));
            }
            let k = M3Kernel::new(&cfg.model, &cfg.quad)?;
            let it = k.iterate_transient(cfg.steps, &s)?;
            if json_out {
                wrap(serde_json::to_value(&it).expect("serializable"))
            } else {
                let mut out = meta.csv_header();
                let _ = writeln!(out, "# grid_discrepancy: {}", fmt_num(it.discrepancy));
                out.push_str("i,s,phi,p_i\n");
                for (i, row) in it.values.iter().enumerate() {
                    for (x, v) in s.iter().zip(row) {
                        let _ = writeln!(out, "{},{},{},{}", i, fmt_num(*x), fmt_num(*v), fmt_num(it.p[i]));
                    }
                }
                out
            }
        }
        Command::Simulate => {
            let st = estimate_stationary(&cfg.model, &s, &cfg.sim).ok();
            let fs: Vec<Functional> = s.iter().map(|&x| Functional::Lst(x)).collect();
            let geo: Vec<_> = cfg
                .r_values
                .iter()
                .map(|&r| estimate_geometric(&cfg.model, r, &fs, &cfg.sim))
                .collect::<Result<_, _>>()?;
            if json_out {
                wrap(serde_json::json!({"stationary": st, "r": cfg.r_values, "s": s, "geometric": geo}))
            } else {
                let mut out = meta.csv_header();
                out.push_str("functional,r,s,value,std_error,n\n");
                if let Some(st) = &st {
                    let mut row = |name: &str, x: &str, e: &crate::sim::SimEstimate| {
                        let _ = writeln!(out, "{name},,{x},{},{},{}", fmt_num(e.value), fmt_num(e.std_error), e.n_effective);
                    };
                    row("stationary_atom", "", &st.atom);
                    row("stationary_mean", "", &st.mean);
                    row("stationary_second_moment", "", &st.second_moment);
                    for (x, e) in &st.lst {
                        row("stationary_lst", &fmt_num(*x), e);
                    }
                }
                for (r, ests) in cfg.r_values.iter().zip(&geo) {
                    for (x, e) in s.iter().zip(ests) {
                        let _ = writeln!(
                            out,
                            "geometric_lst,{},{},{},{},{}",
                            fmt_num(*r),
                            fmt_num(*x),
                            fmt_num(e.value),
                            fmt_num(e.std_error),
                            e.n_effective
                        );
                    }
                }
                out
            }
        }
        Command::Validate => {
            let rep = validate_report(cfg)?;
            let exit = if rep.passed { EXIT_OK } else { EXIT_VALIDATION };
            let text = serde_json::to_string_pretty(&rep).expect("serializable") + "\n";
            return Ok(Output { text, exit });
        }
    };
    Ok(Output { text, exit: EXIT_OK })
}

fn read_config(path: &str) -> Result<String, SchemaError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| schema("config", e.to_string()))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| schema("config", format!("cannot read {path}: {e}")))
}

fn init_threads() {
    if let Some(n) = std::env::var("ARPROC_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            // a second initialisation in the same process is harmless to ignore
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    init_threads();
    let fail = |e: RunError| {
        eprintln!("{}", e.to_json());
        e.exit_code()
    };
    let Some(path) = cli.config.as_deref() else {
        return fail(RunError::Schema(schema("config", "--config <path> is required")));
    };
    let cfg = match read_config(path).and_then(|t| parse_config(&t)).and_then(|c| apply_overrides(c, &cli)) {
        Ok(c) => c,
        Err(e) => return fail(RunError::Schema(e)),
    };
    match run(cli.cmd, &cfg) {
        Ok(out) => {
            let written = match &cfg.output.path {
                Some(p) => std::fs::write(p, &out.text).map_err(|e| e.to_string()),
                None => {
                    print!("{}", out.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                return fail(RunError::Numeric(Error::Domain(format!("cannot write output: {e}"))));
            }
            out.exit
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"model": {"model": "I",
        "v": {"kind": "negative_atoms", "atoms": [{"value": -1.0, "prob": 1.0}]},
        "a": {"kind": "exponential", "rate": 1.0}, "b": {"kind": "exponential", "rate": 1.0}}}"#;

    #[test]
    fn minimal_config_parses() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.r_values, vec![0.5]);
        let again = parse_config(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn bad_probability_names_field() {
        let text = r#"{"model": {"model": "II",
            "v": {"kind": "mixed_atom", "a": 1.0, "p": 1.2, "negative": {"kind": "negative_atoms", "atoms": [{"value": -1.0, "prob": 1.0}]}},
            "a": {"kind": "exponential", "rate": 1.0}, "b": {"kind": "exponential", "rate": 1.0}}}"#;
        let e = parse_config(text).unwrap_err();
        assert_eq!(e.field, "model.v");
        assert!(e.message.contains("p must"), "{}", e.message);
    }

    #[test]
    fn unknown_key_rejected_with_location() {
        let e = parse_config(&MINIMAL.replacen("{\"model\"", "{\"colour\": 1, \"model\"", 1)).unwrap_err();
        assert_eq!(e.field, "colour");
        assert!(e.line.is_some());
    }

    #[test]
    fn transient_first_row_is_normalization() {
        let mut cfg = parse_config(MINIMAL).unwrap();
        cfg.s_grid = SGrid::List(vec![0.0, 1.0]);
        let out = run(Command::Transient, &cfg).unwrap();
        let first = out.text.lines().find(|l| !l.starts_with('#') && !l.starts_with('r')).unwrap();
        assert_eq!(first, "0.5,0.0,2.0");
    }

    #[test]
    fn s_grid_flag_forms() {
        assert_eq!(parse_s_grid("0:1:3").unwrap().points(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_s_grid("0.5, 2").unwrap().points(), vec![0.5, 2.0]);
        assert!(parse_s_grid("x").is_err());
    }
}
