//! Small numerical kernels: cubic splines, adaptive Simpson, embedded RK.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Clamped cubic spline through `(x_i, y_i)`, `x` strictly increasing.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at the knots
}

impl CubicSpline {
    /// End slopes from four-point one-sided differences (or the secant when
    /// fewer knots are available).
    pub fn new(x: &[f64], y: &[f64]) -> Result<Self> {
        let n = x.len();
        if n != y.len() || n < 2 {
            return Err(Error::Quadrature("spline needs at least two matching knots".into()));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Quadrature("spline knots must be strictly increasing".into()));
        }
        let d0 = end_slope(&x[..n.min(4)], &y[..n.min(4)]);
        let xr: Vec<f64> = x[n - n.min(4)..].iter().rev().copied().collect();
        let yr: Vec<f64> = y[n - n.min(4)..].iter().rev().copied().collect();
        let dn = end_slope(&xr, &yr);
        Ok(Self::clamped(x, y, d0, dn))
    }

    pub fn clamped(x: &[f64], y: &[f64], d0: f64, dn: f64) -> Self {
        let n = x.len();
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut r = vec![0.0; n];
        let h0 = x[1] - x[0];
        b[0] = h0 / 3.0;
        c[0] = h0 / 6.0;
        r[0] = (y[1] - y[0]) / h0 - d0;
        for i in 1..n - 1 {
            let hl = x[i] - x[i - 1];
            let hr = x[i + 1] - x[i];
            a[i] = hl / 6.0;
            b[i] = (hl + hr) / 3.0;
            c[i] = hr / 6.0;
            r[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
        }
        let hn = x[n - 1] - x[n - 2];
        a[n - 1] = hn / 6.0;
        b[n - 1] = hn / 3.0;
        r[n - 1] = dn - (y[n - 1] - y[n - 2]) / hn;
        // Thomas algorithm
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            r[i] -= w * r[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = r[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (r[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn interval(&self, t: f64) -> usize {
        match self.x.binary_search_by(|v| v.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(self.x.len() - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.interval(t);
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        (self.y[i + 1] - self.y[i]) / h + ((1.0 - 3.0 * a * a) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1]) * h / 6.0
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

/// Derivative at `x[0]` of the interpolating polynomial through the points.
fn end_slope(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len();
    if k < 3 {
        return (y[1] - y[0]) / (x[1] - x[0]);
    }
    // derivative of the Lagrange basis at x0
    let x0 = x[0];
    let mut d = 0.0;
    for j in 0..k {
        let mut wj = 0.0;
        if j == 0 {
            for m in 1..k {
                wj += 1.0 / (x0 - x[m]);
            }
        } else {
            let mut num = 1.0;
            let mut den = 1.0;
            for m in 0..k {
                if m != j {
                    den *= x[j] - x[m];
                    if m != 0 {
                        num *= x0 - x[m];
                    }
                }
            }
            wj = num / den;
        }
        d += wj * y[j];
    }
    d
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth)?;
    if !v.is_finite() {
        return Err(Error::Quadrature("non-finite integrand".into()));
    }
    Ok(v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!("depth exhausted on [{a}, {b}], error estimate {delta:e}")));
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Outcome of an integration that may stop early.
pub enum OdeStop {
    Completed,
    /// The right-hand side or the guard rejected the state at this time.
    Halted(f64),
}

/// Dormand-Prince 5(4) integration of `y' = f(t, y)` from `t0` to `t1`.
///
/// `rhs` returns `None` where the field is undefined. `observe` is called at
/// every accepted step and may stop the integration by returning `false`.
pub fn dormand_prince(
    rhs: &dyn Fn(f64, &DVector<f64>) -> Option<DVector<f64>>,
    t0: f64,
    y0: &DVector<f64>,
    t1: f64,
    tol: f64,
    h_max: f64,
    observe: &mut dyn FnMut(f64, &DVector<f64>) -> bool,
) -> OdeStop {
    const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
    const A: [[f64; 6]; 7] = [
        [0.0; 6],
        [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0.clone();
    let mut h = h_max.min(span).max(1e-12 * span) * 0.25;
    let h_min = 1e-14 * (1.0 + span);
    let Some(mut k0) = rhs(t, &y) else { return OdeStop::Halted(t) };
    while (t1 - t) * dir > 1e-15 * (1.0 + span) {
        h = h.min((t1 - t).abs()).min(h_max);
        let mut k: Vec<DVector<f64>> = Vec::with_capacity(7);
        k.push(k0.clone());
        let mut ok = true;
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                if A[s][j] != 0.0 {
                    ys += kj * (dir * h * A[s][j]);
                }
            }
            match rhs(t + dir * h * C[s], &ys) {
                Some(v) => k.push(v),
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            h *= 0.25;
            if h < h_min {
                return OdeStop::Halted(t);
            }
            continue;
        }
        let mut y5 = y.clone();
        let mut err = DVector::zeros(y.len());
        for s in 0..7 {
            y5 += &k[s] * (dir * h * B5[s]);
            err += &k[s] * (dir * h * (B5[s] - B4[s]));
        }
        let scale = 1.0 + y.amax().max(y5.amax());
        let en = err.amax() / (tol * scale);
        if en <= 1.0 {
            t += dir * h;
            y = y5;
            k0 = k[6].clone();
            if !observe(t, &y) {
                return OdeStop::Halted(t);
            }
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            h *= (0.9 * en.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return OdeStop::Halted(t);
            }
        }
    }
    OdeStop::Completed
}

/// Bisection for a sign change of `g` on `[lo, hi]`; returns the endpoint on
/// the side where `g` has the sign of `g(lo)` together with the final bracket.
pub fn bisect(g: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: &dyn Fn(f64) -> bool) -> (f64, f64, f64) {
    let mut glo = g(lo);
    let mut best = (lo, glo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let gm = g(mid);
        if gm.abs() < best.1.abs() {
            best = (mid, gm);
        }
        if tol(gm) {
            return (mid, lo, hi);
        }
        if (gm < 0.0) == (glo < 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    let g_hi = g(hi);
    if g_hi.abs() < best.1.abs() {
        best = (hi, g_hi);
    }
    (best.0, lo, hi)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}
