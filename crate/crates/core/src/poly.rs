//! Piecewise polynomials on a time interval `[0, T]`.
//!
//! Every boundary operator in this crate maps piecewise polynomials to
//! piecewise polynomials, so operator outputs are represented exactly over a
//! refined breakpoint set instead of being sampled. Outside `[0, T]` a function
//! is extended by zero.

use crate::error::{Error, Result};

/// Breakpoints closer than this (relative to the horizon) are merged.
const MERGE_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breaks: Vec<f64>,
    /// Coefficients of each piece in the local variable `t - breaks[i]`,
    /// lowest degree first.
    coeffs: Vec<Vec<f64>>,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<f64>, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if breaks.len() < 2 || coeffs.len() + 1 != breaks.len() {
            return Err(Error::domain(format!("{} breaks do not fit {} pieces", breaks.len(), coeffs.len())));
        }
        if breaks[0] != 0.0 {
            return Err(Error::domain("piecewise polynomials start at t = 0"));
        }
        if breaks.windows(2).any(|w| !(w[1] > w[0])) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(Error::domain("breakpoints must be finite and strictly increasing"));
        }
        if coeffs.iter().any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::domain("piece coefficients must be non-empty and finite"));
        }
        Ok(Self { breaks, coeffs })
    }

    pub fn zero(horizon: f64) -> Self {
        Self::constant(horizon, 0.0)
    }

    pub fn constant(horizon: f64, value: f64) -> Self {
        assert!(horizon > 0.0, "horizon must be positive");
        Self { breaks: vec![0.0, horizon], coeffs: vec![vec![value]] }
    }

    /// Piecewise constant function with `values[i]` on `(breaks[i], breaks[i+1])`.
    pub fn steps(breaks: &[f64], values: &[f64]) -> Result<Self> {
        Self::new(breaks.to_vec(), values.iter().map(|&v| vec![v]).collect())
    }

    /// Continuous piecewise linear interpolant of `values` at `knots`.
    pub fn linear(knots: &[f64], values: &[f64]) -> Result<Self> {
        if knots.len() != values.len() {
            return Err(Error::domain("knot and value counts differ"));
        }
        let coeffs =
            knots.windows(2).zip(values.windows(2)).map(|(k, v)| vec![v[0], (v[1] - v[0]) / (k[1] - k[0])]).collect();
        Self::new(knots.to_vec(), coeffs)
    }

    /// `p(t - lo)` for `t` in `[lo, hi]` and zero elsewhere, where `p` is given by
    /// monomial coefficients; the support is clipped to `[0, horizon]`.
    pub fn pulse(horizon: f64, coeffs: &[f64], lo: f64, hi: f64) -> Self {
        assert!(lo >= 0.0 && hi > lo, "pulse support must be a non-empty interval in t >= 0");
        if lo >= horizon {
            return Self::zero(horizon);
        }
        let mut breaks = vec![0.0];
        let mut pieces = Vec::new();
        if lo > 0.0 {
            breaks.push(lo);
            pieces.push(vec![0.0]);
        }
        pieces.push(coeffs.to_vec());
        if hi < horizon {
            breaks.push(hi);
            pieces.push(vec![0.0]);
        }
        breaks.push(horizon);
        Self { breaks, coeffs: pieces }
    }

    pub fn horizon(&self) -> f64 {
        *self.breaks.last().unwrap()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn pieces(&self) -> usize {
        self.coeffs.len()
    }

    pub fn piece_coeffs(&self, i: usize) -> &[f64] {
        &self.coeffs[i]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().map(|c| c.iter().rposition(|&v| v != 0.0).unwrap_or(0)).max().unwrap_or(0)
    }

    fn piece_index(&self, t: f64) -> usize {
        let idx = self.breaks.partition_point(|&b| b <= t);
        idx.saturating_sub(1).min(self.pieces() - 1)
    }

    /// Evaluates the function (right-continuous at breakpoints, zero outside
    /// `[0, T]`).
    pub fn eval(&self, t: f64) -> f64 {
        if t < 0.0 || t > self.horizon() {
            return 0.0;
        }
        let i = self.piece_index(t);
        horner(&self.coeffs[i], t - self.breaks[i])
    }

    /// `t -> int_0^t f`.
    pub fn antiderivative(&self) -> Self {
        let mut acc = 0.0;
        let mut coeffs = Vec::with_capacity(self.pieces());
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut integ = Vec::with_capacity(c.len() + 1);
            integ.push(acc);
            integ.extend(c.iter().enumerate().map(|(k, v)| v / (k as f64 + 1.0)));
            acc = horner(&integ, self.breaks[i + 1] - self.breaks[i]);
            coeffs.push(integ);
        }
        Self { breaks: self.breaks.clone(), coeffs }
    }

    /// `t -> -int_t^T f`, the antiderivative vanishing at the final time.
    pub fn antiderivative_rev(&self) -> Self {
        let mut out = self.antiderivative();
        let total = out.eval(self.horizon());
        for c in &mut out.coeffs {
            c[0] -= total;
        }
        out
    }

    /// Piecewise derivative (jumps are dropped).
    pub fn derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                if c.len() <= 1 {
                    vec![0.0]
                } else {
                    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
                }
            })
            .collect();
        Self { breaks: self.breaks.clone(), coeffs }
    }

    /// `t -> f(t - delta)` on `[0, T]` for `delta >= 0`.
    pub fn shifted(&self, delta: f64) -> Self {
        assert!(delta >= 0.0, "only delays are supported");
        let horizon = self.horizon();
        if delta == 0.0 {
            return self.clone();
        }
        if delta >= horizon {
            return Self::zero(horizon);
        }
        let mut breaks = vec![0.0, delta];
        let mut coeffs = vec![vec![0.0]];
        for i in 0..self.pieces() {
            let right = self.breaks[i + 1] + delta;
            coeffs.push(self.coeffs[i].clone());
            if right >= horizon * (1.0 - MERGE_TOL) {
                break;
            }
            breaks.push(right);
        }
        breaks.push(horizon);
        Self { breaks, coeffs }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            coeffs: self.coeffs.iter().map(|c| c.iter().map(|v| v * factor).collect()).collect(),
        }
    }

    /// `alpha * self + beta * other` on the merged breakpoint set.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let horizon = self.horizon();
        debug_assert!((horizon - other.horizon()).abs() <= MERGE_TOL * horizon);
        let breaks = merge_breaks(&self.breaks, &other.breaks, horizon);
        let coeffs = breaks
            .windows(2)
            .map(|w| {
                let a = self.local_at(w[0], w[1]);
                let b = other.local_at(w[0], w[1]);
                let n = a.len().max(b.len());
                (0..n)
                    .map(|k| alpha * a.get(k).copied().unwrap_or(0.0) + beta * b.get(k).copied().unwrap_or(0.0))
                    .collect()
            })
            .collect();
        Self { breaks, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(1.0, other, 1.0)
    }

    /// Local coefficients, expanded at `left`, of the piece covering `(left, right)`.
    fn local_at(&self, left: f64, right: f64) -> Vec<f64> {
        let i = self.piece_index(0.5 * (left + right));
        taylor_shift(&self.coeffs[i], left - self.breaks[i])
    }

    pub fn integral(&self) -> f64 {
        self.antiderivative().eval(self.horizon())
    }

    /// Exact `L^2(0, T)` inner product.
    pub fn inner(&self, other: &Self) -> f64 {
        let breaks = merge_breaks(&self.breaks, &other.breaks, self.horizon());
        breaks
            .windows(2)
            .map(|w| {
                let prod = poly_mul(&self.local_at(w[0], w[1]), &other.local_at(w[0], w[1]));
                let h = w[1] - w[0];
                prod.iter().enumerate().map(|(k, c)| c * h.powi(k as i32 + 1) / (k as f64 + 1.0)).sum::<f64>()
            })
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).max(0.0).sqrt()
    }

    /// Jumps `f(p-) - f(p+)` of a piecewise constant function at its
    /// breakpoints in `(0, T]`, with `f` extended by zero past `T`. Zero jumps
    /// are dropped.
    ///
    /// For a step function `f`, `int_0^T f(t) cos(w t / T) dt` equals
    /// `(T / w) * sum_p jump_p * sin(w p / T)`.
    pub fn step_jumps(&self) -> Result<Vec<(f64, f64)>> {
        if self.degree() > 0 {
            return Err(Error::domain("step_jumps needs a piecewise constant function"));
        }
        let n = self.pieces();
        let mut out = Vec::with_capacity(n);
        for i in 1..=n {
            let left = self.coeffs[i - 1][0];
            let right = if i < n { self.coeffs[i][0] } else { 0.0 };
            let jump = left - right;
            if jump != 0.0 {
                out.push((self.breaks[i], jump));
            }
        }
        Ok(out)
    }

    /// Largest absolute difference between one-sided limits at interior
    /// breakpoints.
    pub fn max_interior_jump(&self) -> f64 {
        (1..self.pieces())
            .map(|i| {
                let left = horner(&self.coeffs[i - 1], self.breaks[i] - self.breaks[i - 1]);
                (left - self.coeffs[i][0]).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub(crate) fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &v| acc * x + v)
}

/// Coefficients of `y -> p(y + d)`.
fn taylor_shift(c: &[f64], d: f64) -> Vec<f64> {
    let mut out = c.to_vec();
    if d == 0.0 {
        return out;
    }
    let n = out.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            out[j] += d * out[j + 1];
        }
    }
    out
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Union of two breakpoint sets on `[0, horizon]`, merging near-duplicates.
fn merge_breaks(a: &[f64], b: &[f64], horizon: f64) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    let tol = MERGE_TOL * horizon;
    let mut out: Vec<f64> = Vec::with_capacity(all.len());
    for p in all {
        match out.last() {
            Some(&last) if p - last <= tol => {}
            _ => out.push(p),
        }
    }
    // keep the exact endpoint
    if let Some(last) = out.last_mut() {
        *last = horizon;
    }
    if out.len() >= 2 && out[out.len() - 1] - out[out.len() - 2] <= tol {
        out.remove(out.len() - 2);
    }
    out
}
