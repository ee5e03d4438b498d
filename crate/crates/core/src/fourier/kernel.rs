//! The log-tan kernel representation of `H_T`.
//!
//! For `f`, `g` on `(0, T)`,
//! `<f, H_T d_t^{-1} g> = -1/pi int int f(t) K(s, t) g(s) ds dt` with
//! `K(s, t) = ln tan(pi (s + t) / 4T) + ln tan(pi |t - s| / 4T)`.
//!
//! For step functions the double integral over a rectangle reduces to second
//! antiderivatives of `z -> ln tan(pi z / 4T)`, which are evaluated here by
//! splitting off the two logarithmic singularities analytically and
//! integrating the analytic remainder with Gauss-Legendre.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::PiecewisePoly;
use crate::quadrature::{gauss12, gauss20, gauss24, graded_integral};

/// `K(s, t)`; the singular set `s = t`, `s + t = 0`, `s + t = 2T` is rejected.
pub fn log_tan_kernel(s: f64, t: f64, horizon: f64) -> Result<f64> {
    let sum = s + t;
    let diff = (t - s).abs();
    if diff == 0.0 || sum <= 0.0 || sum >= 2.0 * horizon {
        return Err(Error::Singularity { s, t });
    }
    let c = PI / (4.0 * horizon);
    Ok((c * sum).tan().ln() + (c * diff).tan().ln())
}

/// `ln(sin x / x)`, accurate near zero.
fn ln_sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        -x2 / 6.0 - x2 * x2 / 180.0
    } else {
        (x.sin() / x).ln()
    }
}

/// `int_0^y (y - v) ln tan(v) dv` for `y` in `[0, pi/2]`.
fn second_antiderivative_unit(y: f64) -> f64 {
    let y = y.clamp(0.0, FRAC_PI_2);
    if y == 0.0 {
        return 0.0;
    }
    let c = FRAC_PI_2;
    let d = (c - y).max(0.0);
    let p = |v: f64| if v == 0.0 { 0.0 } else { 0.5 * v * v * v.ln() - 0.25 * v * v };
    let q = |v: f64| if v == 0.0 { 0.0 } else { v * v.ln() - v };
    // ln tan v = ln v - ln(pi/2 - v) + r(v), r analytic on [0, pi/2]
    let from_ln = 0.5 * y * y * y.ln() - 0.75 * y * y;
    let from_reflected = (p(c) - p(d)) - d * (q(c) - q(d));
    let remainder = gauss20().integrate(0.0, y, |v| (y - v) * (ln_sinc(v) - ln_sinc(c - v)));
    from_ln - from_reflected + remainder
}

/// `G(x) = int_0^x (x - z) ln tan(pi z / 4T) dz` for `x` in `[0, 2T]`.
pub fn second_antiderivative(x: f64, horizon: f64) -> f64 {
    let scale = 4.0 * horizon / PI;
    scale * scale * second_antiderivative_unit(x / scale)
}

/// `int_{t0}^{t1} int_{s0}^{s1} K(s, t) ds dt` for subintervals of `[0, T]`.
pub fn rectangle_integral(t: (f64, f64), s: (f64, f64), horizon: f64) -> f64 {
    let g = |x: f64| second_antiderivative(x, horizon);
    let e = |x: f64| second_antiderivative(x.abs(), horizon);
    let (t0, t1) = t;
    let (s0, s1) = s;
    (g(t1 + s1) - g(t0 + s1) - g(t1 + s0) + g(t0 + s0)) + (e(t1 - s0) - e(t0 - s0) - e(t1 - s1) + e(t0 - s1))
}

/// Second antiderivatives tabulated on a tensor grid of test points `xs`
/// and trial points `ys`, so that every rectangle integral with corners on
/// the grid costs eight lookups.
#[derive(Debug, Clone)]
pub struct KernelTable {
    nx: usize,
    ny: usize,
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl KernelTable {
    pub fn new(xs: &[f64], ys: &[f64], horizon: f64) -> Self {
        let ny = ys.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = xs
            .par_iter()
            .map(|&x| {
                let plus = ys.iter().map(|&y| second_antiderivative(x + y, horizon)).collect();
                let minus = ys.iter().map(|&y| second_antiderivative((x - y).abs(), horizon)).collect();
                (plus, minus)
            })
            .collect();
        let mut plus = Vec::with_capacity(xs.len() * ny);
        let mut minus = Vec::with_capacity(xs.len() * ny);
        for (p, m) in rows {
            plus.extend(p);
            minus.extend(m);
        }
        Self { nx: xs.len(), ny, plus, minus }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    /// Kernel integral over `[xs[a0], xs[a1]] x [ys[b0], ys[b1]]`.
    #[inline]
    pub fn rectangle(&self, a0: usize, a1: usize, b0: usize, b1: usize) -> f64 {
        let p = |a: usize, b: usize| self.plus[a * self.ny + b];
        let m = |a: usize, b: usize| self.minus[a * self.ny + b];
        (p(a1, b1) - p(a0, b1) - p(a1, b0) + p(a0, b0)) + (m(a1, b0) - m(a0, b0) - m(a1, b1) + m(a0, b1))
    }
}

/// `<f, H_T d_t^{-1} g>` for step functions `f`, `g`, by exact integration of
/// the kernel over all rectangles of their breakpoint grid.
pub fn step_pairing_kernel(f: &PiecewisePoly, g: &PiecewisePoly) -> Result<f64> {
    if f.degree() > 0 || g.degree() > 0 {
        return Err(Error::domain("kernel pairing needs step functions"));
    }
    let horizon = f.horizon();
    if horizon != g.horizon() {
        return Err(Error::domain("horizons differ"));
    }
    let table = KernelTable::new(f.breaks(), g.breaks(), horizon);
    let mut acc = 0.0;
    for i in 0..f.pieces() {
        let fi = f.piece_coeffs(i)[0];
        if fi == 0.0 {
            continue;
        }
        for j in 0..g.pieces() {
            let gj = g.piece_coeffs(j)[0];
            if gj != 0.0 {
                acc += fi * gj * table.rectangle(i, i + 1, j, j + 1);
            }
        }
    }
    Ok(-acc / PI)
}

const GRADING_LEVELS: usize = 36;
const GRADING_RATIO: f64 = 0.4;

/// `-1/pi int int f(t) K(s, t) h(s) ds dt` for smooth `f`, `h` on `(0, T)`.
///
/// In the coordinates `sigma = s + t` and `delta = |t - s|` the kernel is a
/// function of one variable, and the three logarithmic singularities
/// (`sigma = 0`, `sigma = 2T`, `delta = 0`) become endpoint singularities of
/// one-dimensional integrals, resolved by geometric grading.
pub fn smooth_pairing_kernel<F, H>(f: F, h: H, horizon: f64) -> f64
where
    F: Fn(f64) -> f64,
    H: Fn(f64) -> f64,
{
    let t = horizon;
    let c = PI / (4.0 * t);
    let log_tan = |z: f64| (c * z).tan().ln();
    let inner = gauss24();
    let outer = gauss12();
    let along_sum = |sigma: f64| {
        let lo = (sigma - t).max(0.0);
        let hi = sigma.min(t);
        inner.integrate(lo, hi, |x| f(x) * h(sigma - x))
    };
    let along_diff = |delta: f64| inner.integrate(0.0, t - delta, |x| f(x + delta) * h(x) + f(x) * h(x + delta));
    let first = graded_integral(outer, 0.0, t, GRADING_LEVELS, GRADING_RATIO, |z| log_tan(z) * along_sum(z));
    // graded towards 2T: integrate from the singular end backwards
    let second = -graded_integral(outer, 2.0 * t, t, GRADING_LEVELS, GRADING_RATIO, |z| log_tan(z) * along_sum(z));
    let third = graded_integral(outer, 0.0, t, GRADING_LEVELS, GRADING_RATIO, |z| log_tan(z) * along_diff(z));
    -(first + second + third) / PI
}
