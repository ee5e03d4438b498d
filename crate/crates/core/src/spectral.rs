//! Coupling coefficients `b_{kl}` between the two boundary sides in the
//! `H_T`-weighted form, the Gram matrices `C_m = B^T B` and their largest
//! eigenvalues.
//!
//! `b_{kl}` vanishes unless `k - l` is even, so `B` splits into an even and an
//! odd block and `C_m` is block diagonal after reordering; both blocks are
//! stored densely and probed by power iteration without forming `C_m`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fourier::{omega, CosineSeries};
use crate::linalg::{dot, power_max_gram_from, GramFactor};
use crate::mesh::time_slice_count;
use crate::quadrature::gauss20;

/// Relative tolerance of the power iteration. The top of the spectrum of
/// `C_m` is a dense cluster, which makes tighter tolerances impractical.
pub const POWER_TOL: f64 = 1e-9;

/// Relative change below which the row cutoff `k_max` is accepted.
pub const KMAX_TOL: f64 = 1e-4;

fn check_geometry(length: f64, horizon: f64) -> Result<()> {
    if !(length > 0.0 && horizon > 0.0 && length.is_finite() && horizon.is_finite()) {
        return Err(Error::domain("L and T must be positive"));
    }
    if horizon <= length {
        return Err(Error::domain(format!("coupling coefficients need T > L, got L = {length}, T = {horizon}")));
    }
    Ok(())
}

/// `b_{kl}` for `0 < L < T`.
pub fn b_coeff(k: usize, l: usize, length: f64, horizon: f64) -> Result<f64> {
    check_geometry(length, horizon)?;
    let ratio = length / horizon;
    if k == l {
        return Ok(2.0 * (1.0 - ratio) * (omega(k) * ratio).cos());
    }
    if (k + l) % 2 == 1 {
        return Ok(0.0);
    }
    let theta = 0.5 * PI * ratio;
    let (kf, lf) = (k as f64, l as f64);
    let scale = 4.0 / PI * (2.0 * kf + 1.0).sqrt() * (2.0 * lf + 1.0).sqrt() / ((kf + lf + 1.0) * (kf - lf));
    Ok(scale * ((kf + lf + 1.0) * theta).cos() * ((lf - kf) * theta).sin())
}

/// Parameters of `C_m`: columns `0..=m`, rows of `B` truncated at `k_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingMatrixSpec {
    pub length: f64,
    pub horizon: f64,
    pub m: usize,
    pub k_max: usize,
}

impl CouplingMatrixSpec {
    pub fn new(length: f64, horizon: f64, m: usize, k_max: usize) -> Result<Self> {
        if !(length > 0.0 && horizon > 0.0) {
            return Err(Error::domain("L and T must be positive"));
        }
        if k_max < m {
            return Err(Error::domain(format!("k_max = {k_max} must be at least m = {m}")));
        }
        Ok(Self { length, horizon, m, k_max })
    }
}

/// One parity block of `B`: rows `k = 2i + p`, columns `l = 2j + p`, stored
/// row-major so that `B^T B x` is a single pass over memory.
#[derive(Debug, Clone)]
pub struct ParityBlock {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl ParityBlock {
    fn build(spec: &CouplingMatrixSpec, parity: usize) -> Self {
        let rows = (spec.k_max + 2 - parity) / 2;
        let cols = (spec.m + 2 - parity) / 2;
        let ratio = spec.length / spec.horizon;
        let theta = 0.5 * PI * ratio;
        // 2 cos(A) sin(B) = sin(A + B) - sin(A - B) turns the off-diagonal
        // entries into (2/pi) s_k s_l (sin_l - sin_k) / ((k + l + 1)(k - l))
        // with s_j = sqrt(2j + 1) and sin_j = sin((2j + 1) theta).
        let k_of = |i: usize| 2 * i + parity;
        let sq: Vec<f64> = (0..rows).map(|i| (2.0 * k_of(i) as f64 + 1.0).sqrt()).collect();
        let sn: Vec<f64> = (0..rows).map(|i| ((2.0 * k_of(i) as f64 + 1.0) * theta).sin()).collect();
        let mut data = vec![0.0; rows * cols];
        if cols == 0 {
            return Self { rows, cols, data };
        }
        for (i, row) in data.chunks_exact_mut(cols).enumerate() {
            let k = k_of(i);
            let kf = k as f64;
            for (j, entry) in row.iter_mut().enumerate() {
                let l = k_of(j);
                *entry = if k == l {
                    2.0 * (1.0 - ratio) * (omega(k) * ratio).cos()
                } else {
                    let lf = l as f64;
                    2.0 / PI * sq[i] * sq[j] * (sn[j] - sn[i]) / ((kf + lf + 1.0) * (kf - lf))
                };
            }
        }
        Self { rows, cols, data }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

impl GramFactor for ParityBlock {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot(self.row(i), x);
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (i, &yi) in y.iter().enumerate() {
            for (xj, b) in x.iter_mut().zip(self.row(i)) {
                *xj += b * yi;
            }
        }
    }

    fn apply_gram(&self, x: &[f64], z: &mut [f64]) -> f64 {
        z.fill(0.0);
        let mut norm_sq = 0.0;
        if self.cols == 0 {
            return norm_sq;
        }
        for row in self.data.chunks_exact(self.cols) {
            let s = dot(row, x);
            norm_sq += s * s;
            for (zj, b) in z.iter_mut().zip(row) {
                *zj += b * s;
            }
        }
        norm_sq
    }
}

/// `B` split by parity.
#[derive(Debug, Clone)]
pub struct CouplingFactor {
    pub even: ParityBlock,
    pub odd: ParityBlock,
}

impl CouplingFactor {
    pub fn new(spec: &CouplingMatrixSpec) -> Result<Self> {
        check_geometry(spec.length, spec.horizon)?;
        Ok(Self { even: ParityBlock::build(spec, 0), odd: ParityBlock::build(spec, 1) })
    }

    /// `c_{ll}`, the squared norm of column `l` of `B`.
    pub fn gram_diagonal(&self, l: usize) -> f64 {
        let block = if l.is_multiple_of(2) { &self.even } else { &self.odd };
        let j = l / 2;
        (0..block.rows).map(|i| block.entry(i, j).powi(2)).sum()
    }
}

/// Power-iteration vectors of both parity blocks, reusable as warm starts.
#[derive(Debug, Clone, Default)]
pub struct WarmStart {
    even: Option<Vec<f64>>,
    odd: Option<Vec<f64>>,
}

/// `lambda_max(C_m)` for a fixed `k_max`, updating `warm` with the final
/// iterates. Warm vectors are truncated or zero-padded to the block width.
pub fn lambda_max_with(factor: &CouplingFactor, warm: &mut WarmStart) -> Result<f64> {
    fn run(block: &ParityBlock, slot: &mut Option<Vec<f64>>) -> Result<f64> {
        let start = slot.as_deref().map(|v| &v[..v.len().min(block.cols)]);
        let r = power_max_gram_from(block, POWER_TOL, start)?;
        *slot = Some(r.vector);
        Ok(r.lambda)
    }
    let mut lambda = run(&factor.even, &mut warm.even)?;
    // the odd block is empty for m = 0
    if factor.odd.cols > 0 {
        lambda = lambda.max(run(&factor.odd, &mut warm.odd)?);
    }
    Ok(lambda)
}

/// `lambda_max(C_m)` with the row cutoff of `spec`; zero when `T <= L`.
pub fn lambda_max_cm(spec: &CouplingMatrixSpec) -> Result<f64> {
    if spec.horizon <= spec.length {
        return Ok(0.0);
    }
    lambda_max_with(&CouplingFactor::new(spec)?, &mut WarmStart::default())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    pub lambda: f64,
    pub k_max: usize,
}

/// Smallest column cutoff used to seed cold power iterations.
const SEED_M: usize = 64;

/// `lambda_max(C_m)` with `k_max` doubled from `kmax_factor (m + 1)` until the
/// value changes by less than [`KMAX_TOL`] relative.
///
/// Large `m` is approached through `m / 2^j`, each level seeding the next, as
/// a cold start converges slowly on the clustered top of the spectrum.
pub fn lambda_max_adaptive(length: f64, horizon: f64, m: usize, kmax_factor: usize) -> Result<LambdaEstimate> {
    lambda_max_adaptive_from(length, horizon, m, kmax_factor, &mut WarmStart::default())
}

fn lambda_max_adaptive_from(
    length: f64,
    horizon: f64,
    m: usize,
    kmax_factor: usize,
    warm: &mut WarmStart,
) -> Result<LambdaEstimate> {
    if kmax_factor == 0 {
        return Err(Error::domain("k_max factor must be positive"));
    }
    if horizon <= length {
        return Ok(LambdaEstimate { lambda: 0.0, k_max: kmax_factor * (m + 1) });
    }
    let factor_for = |m: usize, k_max: usize| {
        CouplingMatrixSpec::new(length, horizon, m, k_max).and_then(|s| CouplingFactor::new(&s))
    };
    let ladder: Vec<usize> =
        std::iter::successors(Some(m / 2), |&c| Some(c / 2)).take_while(|&c| c >= SEED_M).collect();
    for &c in ladder.iter().rev() {
        lambda_max_with(&factor_for(c, kmax_factor * (c + 1))?, warm)?;
    }
    let mut k_max = kmax_factor * (m + 1);
    let mut prev = lambda_max_with(&factor_for(m, k_max)?, warm)?;
    for _ in 0..12 {
        let next_k = 2 * k_max;
        let next = lambda_max_with(&factor_for(m, next_k)?, warm)?;
        if (next - prev).abs() < KMAX_TOL * next {
            return Ok(LambdaEstimate { lambda: next, k_max: next_k });
        }
        prev = next;
        k_max = next_k;
    }
    Err(Error::numeric("row cutoff k_max did not settle"))
}

/// `lambda_max(C_m)` for increasing `ms` sharing one row cutoff (chosen
/// adaptively for the largest `m`), each run warm-started from the previous
/// one and the first from the truncated top iterate of the adaptive run. `C_m` is then a leading principal submatrix of `C_{m'}` and power
/// iterates only increase their Rayleigh quotient, so the returned values are
/// nondecreasing.
pub fn lambda_max_sweep(length: f64, horizon: f64, ms: &[usize], kmax_factor: usize) -> Result<Vec<LambdaEstimate>> {
    if ms.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::domain("m values must be nondecreasing"));
    }
    let Some(&m_top) = ms.last() else { return Ok(Vec::new()) };
    if horizon <= length {
        return Ok(ms.iter().map(|&m| LambdaEstimate { lambda: 0.0, k_max: kmax_factor * (m + 1) }).collect());
    }
    let mut warm = WarmStart::default();
    let k_max = lambda_max_adaptive_from(length, horizon, m_top, kmax_factor, &mut warm)?.k_max;
    let mut out = Vec::with_capacity(ms.len());
    for &m in ms {
        let spec = CouplingMatrixSpec::new(length, horizon, m, k_max)?;
        let lambda = lambda_max_with(&CouplingFactor::new(&spec)?, &mut warm)?;
        out.push(LambdaEstimate { lambda, k_max });
    }
    Ok(out)
}

/// `2 - 4 sin^2(pi / (2 (n + 1)))` with `n` the number of time slices.
pub fn conjectured_constant(length: f64, horizon: f64) -> Result<f64> {
    let n = time_slice_count(length, horizon)?;
    if n == 1 {
        return Ok(0.0);
    }
    let n = n as f64;
    let s = (PI / (2.0 * (n + 1.0))).sin();
    Ok(2.0 - 4.0 * s * s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRow {
    pub horizon: f64,
    pub sqrt_lambda_max: f64,
    pub conjectured: f64,
}

/// `sqrt(lambda_max(C_m))` against the conjectured constant for each horizon.
pub fn constant_sweep(length: f64, horizons: &[f64], m: usize, kmax_factor: usize) -> Result<Vec<ConstantRow>> {
    if m == 0 {
        return Err(Error::domain("m must be at least 1"));
    }
    horizons
        .iter()
        .map(|&t| {
            let est = lambda_max_adaptive(length, t, m, kmax_factor)?;
            Ok(ConstantRow {
                horizon: t,
                sqrt_lambda_max: est.lambda.sqrt(),
                conjectured: conjectured_constant(length, t)?,
            })
        })
        .collect()
}

/// `sum_k sum_l b_{kl} w0_l wl_k` for scaled cosine coefficients
/// `w_hat_k = w_k / sqrt((2k + 1) pi)` of the two sides.
pub fn coupling_form(w0_hat: &[f64], wl_hat: &[f64], length: f64, horizon: f64) -> Result<f64> {
    let mut sum = 0.0;
    for (k, wl) in wl_hat.iter().enumerate() {
        for (l, w0) in w0_hat.iter().enumerate() {
            sum += b_coeff(k, l, length, horizon)? * w0 * wl;
        }
    }
    Ok(sum)
}

/// [`coupling_form`] evaluated from the cross terms of `<H_T V w, w>`, where
/// `d/dt V w` on side `x = 0` is `w_0 / 2 + w_L(. - L) / 2` and symmetrically.
/// The shifted densities are expanded by numerical quadrature; since `w` has
/// finitely many modes the pairing sum is finite.
pub fn coupling_form_via_pairing(w0_hat: &[f64], wl_hat: &[f64], length: f64, horizon: f64) -> Result<f64> {
    check_geometry(length, horizon)?;
    let unscale = |hat: &[f64]| -> Result<CosineSeries> {
        let c = hat.iter().enumerate().map(|(k, h)| h * ((2 * k + 1) as f64 * PI).sqrt()).collect();
        CosineSeries::new(horizon, c)
    };
    let (w0, wl) = (unscale(w0_hat)?, unscale(wl_hat)?);
    let rule = gauss20();
    const PANELS: usize = 64;
    let shifted_coeff = |w: &CosineSeries, k: usize| {
        let h = (horizon - length) / PANELS as f64;
        let integral: f64 = (0..PANELS)
            .map(|p| {
                let a = length + p as f64 * h;
                rule.integrate(a, a + h, |t| 0.5 * w.eval(t - length) * (omega(k) * t / horizon).cos())
            })
            .sum();
        2.0 / horizon * integral
    };
    let mut sum = 0.0;
    for k in 0..w0.modes().max(wl.modes()) {
        let a = w0.coeffs().get(k).map_or(0.0, |c| c * shifted_coeff(&wl, k));
        let b = wl.coeffs().get(k).map_or(0.0, |c| c * shifted_coeff(&w0, k));
        sum += (a + b) / omega(k);
    }
    Ok(sum)
}
