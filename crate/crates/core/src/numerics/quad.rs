use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and hints for adaptive quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadRule {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Points (in the original variable) where the integrand has an
    /// integrable singularity. Interior hints split the range; hints at an
    /// endpoint switch that end to a clustering substitution.
    pub singularity_hints: Vec<f64>,
}

impl Default for QuadRule {
    fn default() -> Self {
        QuadRule { abs_tol: 1e-10, rel_tol: 1e-10, max_subdivisions: 2000, singularity_hints: Vec::new() }
    }
}

impl QuadRule {
    pub fn with_tol(abs_tol: f64, rel_tol: f64) -> Self {
        QuadRule { abs_tol, rel_tol, ..Default::default() }
    }

    pub fn with_hints(mut self, hints: &[f64]) -> Self {
        self.singularity_hints = hints.to_vec();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 1 {
            return Err(Error::Domain(
                "quadrature tolerances must be positive and max_subdivisions >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 21-point Gauss–Kronrod panel: (estimate, error estimate).
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    let mut res_abs = fc.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kron += (f1 + f2) * WGK[j];
        res_abs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            gauss += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = kron * 0.5;
    let mut res_asc = WGK[10] * (fc - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }
    let h = half.abs();
    let res_abs = res_abs * h;
    let res_asc = res_asc * h;
    let mut err = ((kron - gauss) * half).norm();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (kron * half, err)
}

#[derive(Clone, Copy)]
enum PieceMap {
    Identity,
    /// t = a + (b - a) v^2
    ClusterLeft,
    /// t = b - (b - a) v^2
    ClusterRight,
}

#[derive(Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    map: PieceMap,
}

impl Piece {
    fn param_range(&self) -> (f64, f64) {
        match self.map {
            PieceMap::Identity => (self.a, self.b),
            _ => (0.0, 1.0),
        }
    }

    fn eval<F: Fn(f64) -> Complex64 + ?Sized>(&self, f: &F, v: f64) -> Complex64 {
        match self.map {
            PieceMap::Identity => f(v),
            PieceMap::ClusterLeft => {
                let w = self.b - self.a;
                f(self.a + w * v * v) * (2.0 * w * v)
            }
            PieceMap::ClusterRight => {
                let w = self.b - self.a;
                f(self.b - w * v * v) * (2.0 * w * v)
            }
        }
    }
}

struct Panel {
    piece: usize,
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

fn adaptive<F: Fn(f64) -> Complex64 + ?Sized>(
    f: &F,
    lo: f64,
    hi: f64,
    hints: &[f64],
    rule: &QuadRule,
) -> Result<(Complex64, f64)> {
    let span = hi - lo;
    let near = |x: f64, y: f64| (x - y).abs() <= 1e-14 * span.abs().max(1.0);
    let mut cuts: Vec<f64> = hints
        .iter()
        .copied()
        .filter(|h| *h > lo && *h < hi && !near(*h, lo) && !near(*h, hi))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let sing_lo = hints.iter().any(|&h| near(h, lo));
    let sing_hi = hints.iter().any(|&h| near(h, hi));

    let mut bounds = vec![lo];
    bounds.extend(cuts.iter().copied());
    bounds.push(hi);
    let mut pieces = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let left = (a == lo && sing_lo) || cuts.contains(&a);
        let right = (b == hi && sing_hi) || cuts.contains(&b);
        match (left, right) {
            (false, false) => pieces.push(Piece { a, b, map: PieceMap::Identity }),
            (true, false) => pieces.push(Piece { a, b, map: PieceMap::ClusterLeft }),
            (false, true) => pieces.push(Piece { a, b, map: PieceMap::ClusterRight }),
            (true, true) => {
                let m = 0.5 * (a + b);
                pieces.push(Piece { a, b: m, map: PieceMap::ClusterLeft });
                pieces.push(Piece { a: m, b, map: PieceMap::ClusterRight });
            }
        }
    }

    let mut panels: Vec<Panel> = Vec::new();
    for (idx, piece) in pieces.iter().enumerate() {
        let (a, b) = piece.param_range();
        let g = |v: f64| piece.eval(f, v);
        let (value, error) = gk21(&g, a, b);
        panels.push(Panel { piece: idx, a, b, value, error });
    }

    let mut subdivisions = panels.len();
    loop {
        let total: Complex64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.re.is_finite() || !total.im.is_finite() || !err.is_finite() {
            return Err(Error::Domain("integrand produced a non-finite value".into()));
        }
        let target = rule.abs_tol.max(rule.rel_tol * total.norm());
        if err <= target {
            return Ok((total, err));
        }
        // Split the worst panel that can still be split.
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let m = 0.5 * (p.a + p.b);
                m > p.a && m < p.b && (p.b - p.a).abs() > 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs())
            })
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Err(Error::ToleranceNotMet { estimate: total.re, error: err });
        };
        if subdivisions >= rule.max_subdivisions {
            return Err(Error::ToleranceNotMet { estimate: total.re, error: err });
        }
        let p = panels.swap_remove(i);
        let piece = pieces[p.piece];
        let g = |v: f64| piece.eval(f, v);
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk21(&g, p.a, m);
        let (v2, e2) = gk21(&g, m, p.b);
        panels.push(Panel { piece: p.piece, a: p.a, b: m, value: v1, error: e1 });
        panels.push(Panel { piece: p.piece, a: m, b: p.b, value: v2, error: e2 });
        subdivisions += 1;
    }
}

/// Adaptive Gauss–Kronrod integration of a complex-valued integrand over
/// `[lo, hi]`; either bound may be infinite.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    rule: &QuadRule,
) -> Result<Complex64> {
    integrate_complex_with_error(f, lo, hi, rule).map(|(v, _)| v)
}

pub fn integrate_complex_with_error<F: Fn(f64) -> Complex64>(
    f: F,
    lo: f64,
    hi: f64,
    rule: &QuadRule,
) -> Result<(Complex64, f64)> {
    integrate_dyn(&f, lo, hi, rule)
}

fn integrate_dyn(
    f: &dyn Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    rule: &QuadRule,
) -> Result<(Complex64, f64)> {
    rule.validate()?;
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::Domain("integration bounds are NaN".into()));
    }
    if lo == hi {
        return Ok((Complex64::new(0.0, 0.0), 0.0));
    }
    if lo > hi {
        return integrate_dyn(f, hi, lo, rule).map(|(v, e)| (-v, e));
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => adaptive(f, lo, hi, &rule.singularity_hints, rule),
        (true, false) => {
            // t = lo + u / (1 - u)
            let g = |u: f64| {
                let om = 1.0 - u;
                f(lo + u / om) / (om * om)
            };
            let hints: Vec<f64> = rule
                .singularity_hints
                .iter()
                .filter(|&&h| h >= lo && h.is_finite())
                .map(|&h| (h - lo) / (1.0 + h - lo))
                .collect();
            adaptive(&g, 0.0, 1.0, &hints, rule)
        }
        (false, true) => {
            // t = hi - u / (1 - u)
            let g = |u: f64| {
                let om = 1.0 - u;
                f(hi - u / om) / (om * om)
            };
            let hints: Vec<f64> = rule
                .singularity_hints
                .iter()
                .filter(|&&h| h <= hi && h.is_finite())
                .map(|&h| (hi - h) / (1.0 + hi - h))
                .collect();
            adaptive(&g, 0.0, 1.0, &hints, rule)
        }
        (false, false) => {
            let (a, ea) = integrate_dyn(f, f64::NEG_INFINITY, 0.0, rule)?;
            let (b, eb) = integrate_dyn(f, 0.0, f64::INFINITY, rule)?;
            Ok((a + b, ea + eb))
        }
    }
}

/// Real-valued counterpart of [`integrate_complex`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rule: &QuadRule) -> Result<f64> {
    integrate_complex(|t| Complex64::new(f(t), 0.0), lo, hi, rule).map(|v| v.re)
}
