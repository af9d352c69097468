use num_complex::Complex64;

/// Piecewise cubic Hermite interpolant on a strictly increasing grid.
///
/// `Pchip::monotone` uses Fritsch–Butland slopes (shape preserving);
/// `Pchip::centered` uses three-point finite-difference slopes, which is a
/// different cubic of the same order used to gauge interpolation error.
#[derive(Clone, Debug)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    /// cumulative integral at each node
    cum: Vec<f64>,
}

impl Pchip {
    pub fn monotone(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Self::build(x, y, d)
    }

    pub fn centered(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        assert!(n >= 3 && y.len() == n);
        let mut d = vec![0.0; n];
        for i in 0..n {
            let (a, b, c) = if i == 0 {
                (0, 1, 2)
            } else if i == n - 1 {
                (n - 3, n - 2, n - 1)
            } else {
                (i - 1, i, i + 1)
            };
            // derivative at x[i] of the quadratic through (a, b, c)
            let (xa, xb, xc) = (x[a], x[b], x[c]);
            let t = x[i];
            d[i] = y[a] * ((t - xb) + (t - xc)) / ((xa - xb) * (xa - xc))
                + y[b] * ((t - xa) + (t - xc)) / ((xb - xa) * (xb - xc))
                + y[c] * ((t - xa) + (t - xb)) / ((xc - xa) * (xc - xb));
        }
        Self::build(x, y, d)
    }

    fn build(x: &[f64], y: &[f64], d: Vec<f64>) -> Self {
        let n = x.len();
        let mut cum = vec![0.0; n];
        for i in 0..n - 1 {
            let h = x[i + 1] - x[i];
            cum[i + 1] = cum[i] + h * (y[i] + y[i + 1]) / 2.0 + h * h * (d[i] - d[i + 1]) / 12.0;
        }
        Pchip { x: x.to_vec(), y: y.to_vec(), d, cum }
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        if t <= self.x[0] {
            return 0;
        }
        if t >= self.x[n - 1] {
            return n - 2;
        }
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(u);
        h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let dh00 = 6.0 * u * u - 6.0 * u;
        let dh10 = 3.0 * u * u - 4.0 * u + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * u * u - 2.0 * u;
        (dh00 * self.y[i] + dh01 * self.y[i + 1]) / h + dh10 * self.d[i] + dh11 * self.d[i + 1]
    }

    /// Exact integral of the interpolant from the first node to `t`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        // antiderivatives of the Hermite basis on [0, u]
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u3 * u;
        let i00 = u4 / 2.0 - u3 + u;
        let i10 = u4 / 4.0 - 2.0 * u3 / 3.0 + u2 / 2.0;
        let i01 = -u4 / 2.0 + u3;
        let i11 = u4 / 4.0 - u3 / 3.0;
        self.cum[i]
            + h * (i00 * self.y[i] + i10 * h * self.d[i] + i01 * self.y[i + 1] + i11 * h * self.d[i + 1])
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (2.0 * u3 - 3.0 * u2 + 1.0, u3 - 2.0 * u2 + u, -2.0 * u3 + 3.0 * u2, u3 - u2)
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

/// Mean of `f` over `n` equispaced points on the circle `|z - center| = radius`.
///
/// For `f` analytic on the closed disc this reproduces `f(center)` up to
/// `O(radius^n)`; a simple pole exactly at `center` contributes nothing, so
/// removable singularities of a sum of meromorphic parts evaluate cleanly.
pub fn circle_mean<F>(mut f: F, center: Complex64, radius: f64, n: usize) -> Vec<Complex64>
where
    F: FnMut(Complex64) -> Vec<Complex64>,
{
    let mut acc: Vec<Complex64> = Vec::new();
    for k in 0..n {
        let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
        let v = f(center + Complex64::from_polar(radius, theta));
        if acc.is_empty() {
            acc = vec![Complex64::new(0.0, 0.0); v.len()];
        }
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    acc.iter_mut().for_each(|a| *a /= n as f64);
    acc
}

/// Polynomial extrapolation of `(h_i, v_i)` to `h = 0` (Neville's scheme).
pub fn neville_at_zero(h: &[f64], v: &[Complex64]) -> Complex64 {
    let n = h.len();
    let mut p = v.to_vec();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i] * (-h[i + m]) + p[i + 1] * h[i]) / (h[i] - h[i + m]);
        }
    }
    p[0]
}
