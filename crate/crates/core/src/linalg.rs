//! Small dense linear algebra kit: LU with partial pivoting, extreme
//! eigenvalues of symmetric matrices and power iteration on Gram operators.

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row slices (convenient for literals).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::domain("ragged rows"));
        }
        Ok(Self::from_fn(r, c, |i, j| rows[i][j]))
    }

    /// Wraps column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::domain("data length does not match dimensions"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `(A + A^T) / 2`.
    pub fn symmetric_part(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::domain("symmetric part needs a square matrix"));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| 0.5 * (self[(i, j)] + self[(j, i)])))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "dimension mismatch in matvec");
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.col(j)) {
                    *yi += a * xj;
                }
            }
        }
        y
    }

    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows, "dimension mismatch in transpose_matvec");
        (0..self.cols).map(|j| dot(self.col(j), y)).collect()
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        dot(x, &self.matvec(y))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::domain("dimension mismatch in matmul"));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let c = self.matvec(other.col(j));
            out.col_mut(j).copy_from_slice(&c);
        }
        Ok(out)
    }

    /// Largest entrywise difference to a matrix of the same shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i + j * self.rows]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i + j * self.rows]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    // four independent accumulators let the compiler vectorize
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// LU factorization `PA = LU` stored in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::domain("LU needs a square matrix"));
        }
        if !a.all_finite() {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        let n = a.rows();
        let threshold = 1e-14 * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot <= threshold || pivot == 0.0 {
                return Err(Error::SingularMatrix { column: k, pivot });
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let col = lu.col_mut(j);
                    col.swap(p, k);
                }
            }
            let d = lu[(k, k)];
            for i in k + 1..n {
                lu[(i, k)] /= d;
            }
            for j in k + 1..n {
                let ukj = lu[(k, j)];
                if ukj == 0.0 {
                    continue;
                }
                let (left, right) = lu.data.split_at_mut(j * n);
                let lcol = &left[k * n..(k + 1) * n];
                let col = &mut right[..n];
                for i in k + 1..n {
                    col[i] -= lcol[i] * ukj;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.rows();
        if b.len() != n {
            return Err(Error::domain(format!("rhs has length {}, expected {n}", b.len())));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != 0.0 {
                let col = self.lu.col(j);
                for i in j + 1..n {
                    x[i] -= col[i] * xj;
                }
            }
        }
        for j in (0..n).rev() {
            let col = self.lu.col(j);
            x[j] /= col[j];
            let xj = x[j];
            for i in 0..j {
                x[i] -= col[i] * xj;
            }
        }
        Ok(x)
    }
}

/// Cholesky factor `A = L L^T` of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    l: DenseMatrix,
}

impl Cholesky {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::domain("Cholesky needs a square matrix"));
        }
        let n = a.rows;
        let mut l = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > 0.0) {
                return Err(Error::SingularMatrix { column: j, pivot: d });
            }
            let d = d.sqrt();
            l[(j, j)] = d;
            for i in j + 1..n {
                let mut v = a[(i, j)];
                for k in 0..j {
                    v -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = v / d;
            }
        }
        Ok(Self { l })
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.l
    }

    /// `L^{-1} M` by forward substitution.
    fn forward(&self, m: &DenseMatrix) -> DenseMatrix {
        let n = self.l.rows;
        let mut x = m.clone();
        for c in 0..m.cols {
            let col = x.col_mut(c);
            for i in 0..n {
                let v = col[i] - (0..i).map(|k| self.l[(i, k)] * col[k]).sum::<f64>();
                col[i] = v / self.l[(i, i)];
            }
        }
        x
    }

    /// `L^{-1} M L^{-T}`, the matrix of `M` in coordinates orthonormal for `A`.
    pub fn whiten(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        if m.rows != self.l.rows || m.cols != self.l.rows {
            return Err(Error::domain("dimension mismatch"));
        }
        Ok(self.forward(&self.forward(m).transpose()).transpose())
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::domain("rhs length does not match the matrix"));
    }
    Lu::factor(a)?.solve(b)
}

/// `||A x - b|| / ||b||` (or the absolute residual when `b = 0`).
pub fn relative_residual(a: &DenseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let nb = norm2(b);
    if nb > 0.0 {
        r / nb
    } else {
        r
    }
}

/// Largest dimension handled by the Jacobi method.
pub const JACOBI_MAX_DIM: usize = 2048;

/// `(lambda_min, lambda_max)` of a symmetric matrix.
pub fn sym_eig_extremes(a: &DenseMatrix) -> Result<(f64, f64)> {
    if !a.is_square() || a.rows() == 0 {
        return Err(Error::domain("need a non-empty square matrix"));
    }
    let scale = a.max_abs();
    let n = a.rows();
    for j in 0..n {
        for i in 0..j {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::domain(format!("matrix is not symmetric at ({i}, {j})")));
            }
        }
    }
    if scale == 0.0 {
        return Ok((0.0, 0.0));
    }
    if n <= JACOBI_MAX_DIM {
        let d = jacobi_eigenvalues(a);
        let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok((lo, hi))
    } else {
        iterative_extremes(a)
    }
}

/// All eigenvalues by cyclic threshold Jacobi rotations.
fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m = a.symmetric_part().expect("square");
    let frob: f64 = m.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    for sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|j| (0..j).map(move |i| (i, j)))
            .map(|(i, j)| 2.0 * m[(i, j)] * m[(i, j)])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            break;
        }
        // Skip tiny rotations during the first sweeps.
        let threshold = if sweep < 3 { 0.2 * off / (n * n) as f64 } else { 0.0 };
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= threshold || apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

struct ShiftedOperator<'a> {
    a: &'a DenseMatrix,
    shift: f64,
    sign: f64,
}

impl ShiftedOperator<'_> {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.a.matvec(x).into_iter().zip(x).map(|(ax, xi)| self.sign * ax + self.shift * xi).collect()
    }
}

fn power_symmetric(op: &ShiftedOperator<'_>, n: usize) -> Result<f64> {
    let mut x = start_vector(n);
    let mut prev = f64::NAN;
    let mut calm = 0;
    for _ in 0..MAX_POWER_ITERATIONS {
        let y = op.apply(&x);
        let lambda = dot(&x, &y);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok(0.0);
        }
        x = y.into_iter().map(|v| v / ny).collect();
        if (lambda - prev).abs() <= 1e-13 * lambda.abs().max(1e-300) {
            calm += 1;
            if calm >= 3 {
                return Ok(lambda);
            }
        } else {
            calm = 0;
        }
        prev = lambda;
    }
    Err(Error::numeric("power iteration did not converge"))
}

/// Fallback for large matrices: power iteration for the dominant end, then a
/// shifted power iteration for the other end.
fn iterative_extremes(a: &DenseMatrix) -> Result<(f64, f64)> {
    let n = a.rows();
    let gersh = (0..n).map(|i| (0..n).map(|j| a[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    // Shifting by the Gershgorin radius makes both shifted operators PSD.
    let top = power_symmetric(&ShiftedOperator { a, shift: gersh, sign: 1.0 }, n)? - gersh;
    let bottom = gersh - power_symmetric(&ShiftedOperator { a, shift: gersh, sign: -1.0 }, n)?;
    Ok((bottom, top))
}

fn start_vector(n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * (1.3 * i as f64 + 0.7).sin()).collect();
    let nv = norm2(&v);
    v.into_iter().map(|x| x / nv).collect()
}

pub const MAX_POWER_ITERATIONS: usize = 100_000;

/// A linear map `B` whose Gram operator `B^T B` is probed by power iteration.
pub trait GramFactor {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// `y = B x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// `x = B^T y`.
    fn apply_transpose(&self, y: &[f64], x: &mut [f64]);

    /// `z = B^T B x`, returning `|B x|^2`.
    fn apply_gram(&self, x: &[f64], z: &mut [f64]) -> f64 {
        let mut y = vec![0.0; self.nrows()];
        self.apply(x, &mut y);
        self.apply_transpose(&y, z);
        dot(&y, &y)
    }
}

impl GramFactor for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.fill(0.0);
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.col(j)) {
                    *yi += a * xj;
                }
            }
        }
    }

    fn apply_transpose(&self, y: &[f64], x: &mut [f64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = dot(self.col(j), y);
        }
    }
}

#[derive(Debug, Clone)]
pub struct PowerResult {
    pub lambda: f64,
    /// Normalized final iterate; reusable as a warm start.
    pub vector: Vec<f64>,
    pub iterations: usize,
}

/// Largest eigenvalue of `B^T B`, stopping once the relative change of the
/// Rayleigh quotient stays below `tol` for three consecutive iterations.
pub fn power_max_gram(b: &impl GramFactor, tol: f64) -> Result<f64> {
    power_max_gram_from(b, tol, None).map(|r| r.lambda)
}

/// [`power_max_gram`] with an optional starting vector. A start shorter than
/// the column count is padded with zeros; a (numerically) zero start falls
/// back to the default.
pub fn power_max_gram_from(b: &impl GramFactor, tol: f64, start: Option<&[f64]>) -> Result<PowerResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let (rows, cols) = (b.nrows(), b.ncols());
    if rows == 0 || cols == 0 {
        return Err(Error::domain("empty factor"));
    }
    let mut x = match start {
        Some(s) if s.len() <= cols && norm2(s) > 0.0 => {
            let mut v = s.to_vec();
            v.resize(cols, 0.0);
            let nv = norm2(&v);
            v.iter_mut().for_each(|e| *e /= nv);
            v
        }
        _ => start_vector(cols),
    };
    let mut z = vec![0.0; cols];
    let mut prev = f64::NAN;
    let mut calm = 0;
    for it in 1..=MAX_POWER_ITERATIONS {
        let lambda = b.apply_gram(&x, &mut z);
        let nz = norm2(&z);
        if nz == 0.0 || lambda == 0.0 {
            if it == 1 && start.is_some() {
                // A warm start in the null space says nothing; restart cold.
                return power_max_gram_from(b, tol, None);
            }
            return Err(Error::domain("factor is zero"));
        }
        for (xi, zi) in x.iter_mut().zip(&z) {
            *xi = zi / nz;
        }
        if (lambda - prev).abs() < tol * lambda {
            calm += 1;
            if calm >= 3 {
                // One more Rayleigh quotient on the updated iterate.
                let lambda = b.apply_gram(&x, &mut z).max(lambda);
                return Ok(PowerResult { lambda, vector: x, iterations: it });
            }
        } else {
            calm = 0;
        }
        prev = lambda;
    }
    Err(Error::numeric(format!("power iteration stalled after {MAX_POWER_ITERATIONS} iterations")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cholesky_whitening() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = DenseMatrix::from_fn(12, 12, |_, _| rng.gen_range(-1.0..1.0));
        let a = b.transpose().matmul(&b).unwrap();
        let a = DenseMatrix::from_fn(12, 12, |i, j| a[(i, j)] + if i == j { 0.5 } else { 0.0 });
        let c = Cholesky::factor(&a).unwrap();
        let l = c.lower();
        assert!(l.matmul(&l.transpose()).unwrap().max_abs_diff(&a) < 1e-12);
        assert!(c.whiten(&a).unwrap().max_abs_diff(&DenseMatrix::identity(12)) < 1e-12);
        let neg = DenseMatrix::from_fn(2, 2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(matches!(Cholesky::factor(&neg), Err(Error::SingularMatrix { column: 0, .. })));
    }

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DenseMatrix {
        DenseMatrix::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn lu_small_cases() {
        let x = lu_solve(&DenseMatrix::identity(3), &[1.0, -2.0, 5.0]).unwrap();
        assert_eq!(x, vec![1.0, -2.0, 5.0]);
        let a = DenseMatrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]).unwrap();
        assert_eq!(lu_solve(&a, &[2.0, 4.0]).unwrap(), vec![1.0, 1.0]);
        let p = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve(&p, &[3.0, 7.0]).unwrap(), vec![7.0, 3.0]);
    }

    #[test]
    fn lu_detects_singular() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(lu_solve(&a, &[1.0, 1.0]), Err(Error::SingularMatrix { column: 1, .. })));
        assert!(lu_solve(&DenseMatrix::zeros(2, 2), &[0.0, 0.0]).is_err());
    }

    #[test]
    fn lu_random_spd_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = random_matrix(&mut rng, 50, 50);
        let mut a = g.transpose().matmul(&g).unwrap();
        for i in 0..50 {
            a[(i, i)] += 1.0;
        }
        let b: Vec<f64> = (0..50).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = lu_solve(&a, &b).unwrap();
        assert!(relative_residual(&a, &x, &b) <= 1e-11);
    }

    #[test]
    fn tridiagonal_extremes() {
        for n in [2usize, 3, 7, 20] {
            let a = DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
                0 => 1.0,
                1 => -0.5,
                _ => 0.0,
            });
            let (lo, hi) = sym_eig_extremes(&a).unwrap();
            let s = (std::f64::consts::PI / (2.0 * (n as f64 + 1.0))).sin();
            assert!((lo - 2.0 * s * s).abs() < 1e-12, "n = {n}: {lo}");
            assert!((hi - (1.0 + (std::f64::consts::PI / (n as f64 + 1.0)).cos())).abs() < 1e-12);
        }
        let two = DenseMatrix::from_rows(&[&[1.0, -0.5], &[-0.5, 1.0]]).unwrap();
        let (lo, hi) = sym_eig_extremes(&two).unwrap();
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 1.5).abs() < 1e-15);
        assert_eq!(sym_eig_extremes(&DenseMatrix::identity(4)).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(sym_eig_extremes(&a), Err(Error::Domain(_))));
    }

    #[test]
    fn iterative_fallback_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_matrix(&mut rng, 30, 30);
        let a = g.symmetric_part().unwrap();
        let (lo, hi) = sym_eig_extremes(&a).unwrap();
        let (lo2, hi2) = iterative_extremes(&a).unwrap();
        assert!((lo - lo2).abs() < 1e-8 && (hi - hi2).abs() < 1e-8, "{lo} {lo2} {hi} {hi2}");
    }

    #[test]
    fn gram_power_examples() {
        let b = DenseMatrix::from_rows(&[&[3.0]]).unwrap();
        assert!((power_max_gram(&b, 1e-12).unwrap() - 9.0).abs() < 1e-12);
        let b = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        assert!((power_max_gram(&b, 1e-12).unwrap() - 4.0).abs() < 1e-10);
    }

    #[test]
    fn gram_power_matches_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = random_matrix(&mut rng, 100, 20);
        let c = b.transpose().matmul(&b).unwrap();
        let (_, hi) = sym_eig_extremes(&c).unwrap();
        let p = power_max_gram(&b, 1e-14).unwrap();
        assert!((p - hi).abs() <= 1e-10 * hi, "{p} vs {hi}");
    }

    #[test]
    fn warm_start_is_padded() {
        let b = DenseMatrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 1.0]]).unwrap();
        let r = power_max_gram_from(&b, 1e-12, Some(&[1.0, 1.0])).unwrap();
        assert!((r.lambda - 4.0).abs() < 1e-10);
        assert_eq!(r.vector.len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn lu_recovers_solution(seed in 0u64..1000, n in 1usize..40) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut a = random_matrix(&mut rng, n, n);
            for i in 0..n {
                a[(i, i)] += n as f64;
            }
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y = lu_solve(&a, &a.matvec(&x)).unwrap();
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-10 * norm2(&x).max(1e-300));
        }

        #[test]
        fn eigenvalues_inside_gershgorin(seed in 0u64..1000, n in 1usize..25) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n, n).symmetric_part().unwrap();
            let (lo, hi) = sym_eig_extremes(&a).unwrap();
            let mut glo = f64::INFINITY;
            let mut ghi = f64::NEG_INFINITY;
            for i in 0..n {
                let r: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
                glo = glo.min(a[(i, i)] - r);
                ghi = ghi.max(a[(i, i)] + r);
            }
            prop_assert!(lo >= glo - 1e-12 && hi <= ghi + 1e-12 && lo <= hi + 1e-12);
        }

        #[test]
        fn gram_power_dominates_columns(seed in 0u64..1000, r in 1usize..30, c in 1usize..15) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = random_matrix(&mut rng, r, c);
            let lambda = power_max_gram(&b, 1e-12).unwrap();
            for j in 0..c {
                let col = dot(b.col(j), b.col(j));
                prop_assert!(lambda >= col * (1.0 - 1e-9));
            }
        }
    }
}
