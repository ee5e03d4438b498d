//! Galerkin matrices and right-hand sides for piecewise constant densities,
//! the `L^2` projection of Dirichlet data, linear solve and error measures.
//!
//! Degrees of freedom are the elements of side `Zero` followed by those of side
//! `Ell`, and `A[i][j] = a(phi_j, phi_i)` (trial `j`, test `i`).

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::kernel::KernelTable;
use crate::fourier::{with_truncation, FourierSettings, StepSpectrum};
use crate::linalg::{relative_residual, DenseMatrix, Lu};
use crate::mesh::{LateralMesh, Pair, PiecewiseLinear, Side};
use crate::poly::PiecewisePoly;
use crate::quadrature::{gauss10, gauss8};
use crate::wave_ops::{direct_rhs, ManufacturedCase};

/// How the `H_T` pairing is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HtMethod {
    /// Exact integration of the log-tan kernel over element rectangles.
    KernelQuadrature,
    /// Truncated cosine series of both factors.
    FourierTruncation(FourierSettings),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Formulation {
    /// Test `d/dt V w` with `L^2`.
    Energetic,
    /// Test `H_T V w` with `L^2`.
    Ht(HtMethod),
}

impl Formulation {
    pub fn ht() -> Self {
        Formulation::Ht(HtMethod::KernelQuadrature)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSystem {
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

fn overlap(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.1.min(b.1) - a.0.max(b.0)).max(0.0)
}

/// Trial breakpoints of `(V phi_j)'` seen from `test` side: the element
/// itself on the same side, otherwise shifted by `L` and clipped to `T`.
fn trial_nodes(mesh: &LateralMesh, test: Side, trial: Side) -> Vec<f64> {
    let nodes = mesh.nodes(trial);
    if test == trial {
        nodes.to_vec()
    } else {
        let g = mesh.geometry();
        nodes.iter().map(|&x| (x + g.length()).min(g.horizon())).collect()
    }
}

/// Energetic matrix `A[i][j] = <phi_i, d/dt V phi_j>`.
pub fn assemble_energetic(mesh: &LateralMesh) -> DenseMatrix {
    let n = mesh.dofs();
    let mut a = DenseMatrix::zeros(n, n);
    for test in Side::BOTH {
        for trial in Side::BOTH {
            let ys = trial_nodes(mesh, test, trial);
            for i in 0..mesh.elements(test) {
                let ti = mesh.element(test, i);
                for j in 0..mesh.elements(trial) {
                    let v = 0.5 * overlap(ti, (ys[j], ys[j + 1]));
                    if v != 0.0 {
                        a[(mesh.dof(test, i), mesh.dof(trial, j))] = v;
                    }
                }
            }
        }
    }
    a
}

/// Matrix `A[i][j] = <phi_i, H_T V phi_j>`.
pub fn assemble_ht(mesh: &LateralMesh, method: &HtMethod) -> Result<DenseMatrix> {
    match method {
        HtMethod::KernelQuadrature => Ok(assemble_ht_kernel(mesh)),
        HtMethod::FourierTruncation(settings) => assemble_ht_fourier(mesh, settings),
    }
}

pub fn assemble(mesh: &LateralMesh, formulation: &Formulation) -> Result<DenseMatrix> {
    match formulation {
        Formulation::Energetic => Ok(assemble_energetic(mesh)),
        Formulation::Ht(method) => assemble_ht(mesh, method),
    }
}

fn assemble_ht_kernel(mesh: &LateralMesh) -> DenseMatrix {
    let n = mesh.dofs();
    let horizon = mesh.geometry().horizon();
    let mut a = DenseMatrix::zeros(n, n);
    for test in Side::BOTH {
        let xs = mesh.nodes(test);
        for trial in Side::BOTH {
            let ys = trial_nodes(mesh, test, trial);
            if ys[0] >= horizon {
                continue;
            }
            let table = KernelTable::new(xs, &ys, horizon);
            for j in 0..mesh.elements(trial) {
                let col = mesh.dof(trial, j);
                for i in 0..mesh.elements(test) {
                    // (V phi_j)' is 1/2 on the (shifted) trial element
                    a[(mesh.dof(test, i), col)] = -0.5 / PI * table.rectangle(i, i + 1, j, j + 1);
                }
            }
        }
    }
    a
}

/// Indicator of `(a, b)` on `[0, T]`, zero when the interval is empty.
fn indicator(a: f64, b: f64, horizon: f64, value: f64) -> PiecewisePoly {
    if b <= a || a >= horizon {
        return PiecewisePoly::zero(horizon);
    }
    let mut breaks = vec![0.0];
    let mut vals = Vec::new();
    if a > 0.0 {
        breaks.push(a);
        vals.push(0.0);
    }
    vals.push(value);
    if b < horizon {
        breaks.push(b);
        vals.push(0.0);
    }
    breaks.push(horizon);
    PiecewisePoly::steps(&breaks, &vals).expect("ordered breakpoints")
}

fn element_spectra(
    mesh: &LateralMesh,
    side: Side,
    nodes: &[f64],
    value: f64,
    modes: usize,
) -> Result<Vec<StepSpectrum>> {
    let horizon = mesh.geometry().horizon();
    (0..mesh.elements(side))
        .into_par_iter()
        .map(|j| StepSpectrum::new(&indicator(nodes[j], nodes[j + 1], horizon, value), modes))
        .collect()
}

fn assemble_ht_fourier(mesh: &LateralMesh, settings: &FourierSettings) -> Result<DenseMatrix> {
    let n = mesh.dofs();
    let (values, _) = with_truncation(settings.truncation, |modes| {
        let mut a = DenseMatrix::zeros(n, n);
        for test in Side::BOTH {
            let tests = element_spectra(mesh, test, mesh.nodes(test), 1.0, modes)?;
            for trial in Side::BOTH {
                let ys = trial_nodes(mesh, test, trial);
                let trials = element_spectra(mesh, trial, &ys, 0.5, modes)?;
                let cols: Vec<Vec<f64>> = trials
                    .par_iter()
                    .map(|tj| tests.iter().map(|ti| ti.ht_pairing(tj, settings.tail_correction)).collect())
                    .collect::<Result<_>>()?;
                for (j, col) in cols.into_iter().enumerate() {
                    for (i, v) in col.into_iter().enumerate() {
                        a[(mesh.dof(test, i), mesh.dof(trial, j))] = v;
                    }
                }
            }
        }
        Ok(a.as_slice().to_vec())
    })?;
    DenseMatrix::from_col_major(n, n, values)
}

/// Gram matrix of `<phi_i, H_T d_t^{-1} phi_j>`, whose quadratic form is the
/// squared `[H^{1/2}_{,0}]'` norm of a density (sides do not interact).
pub fn dual_norm_gram(mesh: &LateralMesh, method: &HtMethod) -> Result<DenseMatrix> {
    let n = mesh.dofs();
    let horizon = mesh.geometry().horizon();
    match method {
        HtMethod::KernelQuadrature => {
            let mut g = DenseMatrix::zeros(n, n);
            for side in Side::BOTH {
                let xs = mesh.nodes(side);
                let table = KernelTable::new(xs, xs, horizon);
                for j in 0..mesh.elements(side) {
                    for i in 0..mesh.elements(side) {
                        g[(mesh.dof(side, i), mesh.dof(side, j))] = -table.rectangle(i, i + 1, j, j + 1) / PI;
                    }
                }
            }
            Ok(g)
        }
        HtMethod::FourierTruncation(settings) => {
            let (values, _) = with_truncation(settings.truncation, |modes| {
                let mut g = DenseMatrix::zeros(n, n);
                for side in Side::BOTH {
                    let spectra = element_spectra(mesh, side, mesh.nodes(side), 1.0, modes)?;
                    let cols: Vec<Vec<f64>> = spectra
                        .par_iter()
                        .map(|sj| spectra.iter().map(|si| si.ht_pairing(sj, settings.tail_correction)).collect())
                        .collect::<Result<_>>()?;
                    for (j, col) in cols.into_iter().enumerate() {
                        for (i, v) in col.into_iter().enumerate() {
                            g[(mesh.dof(side, i), mesh.dof(side, j))] = v;
                        }
                    }
                }
                Ok(g.as_slice().to_vec())
            })?;
            DenseMatrix::from_col_major(n, n, values)
        }
    }
}

/// `L^2` projection onto continuous piecewise linears vanishing at `t = 0`,
/// per side; moments use Gauss order 10 split at `kinks`.
pub fn project_qh_fn<G>(mesh: &LateralMesh, g: G, kinks: &Pair<Vec<f64>>) -> Result<Pair<PiecewiseLinear>>
where
    G: Fn(Side, f64) -> f64,
{
    let project = |side: Side| -> Result<PiecewiseLinear> {
        let nodes = mesh.nodes(side);
        let ne = nodes.len() - 1;
        let rule = gauss10();
        let kinks = kinks.get(side);
        // hats at nodes 1..=ne; unknown k belongs to node k + 1
        let mut diag = vec![0.0; ne];
        let mut off = vec![0.0; ne.saturating_sub(1)];
        let mut load = vec![0.0; ne];
        for e in 0..ne {
            let (a, b) = (nodes[e], nodes[e + 1]);
            let h = b - a;
            let left = |t: f64| (b - t) / h;
            let right = |t: f64| (t - a) / h;
            let ml = rule.integrate_split(a, b, kinks, |t| g(side, t) * left(t));
            let mr = rule.integrate_split(a, b, kinks, |t| g(side, t) * right(t));
            load[e] += mr;
            diag[e] += h / 3.0;
            if e > 0 {
                load[e - 1] += ml;
                diag[e - 1] += h / 3.0;
                off[e - 1] += h / 6.0;
            }
        }
        let coeffs = solve_tridiagonal(&off, &diag, &off, &load)?;
        let mut values = Vec::with_capacity(ne + 1);
        values.push(0.0);
        values.extend(coeffs);
        PiecewiseLinear::new(side, nodes.to_vec(), values, true)
    };
    Ok(Pair::new(project(Side::Zero)?, project(Side::Ell)?))
}

/// `Q_h g` for a manufactured case.
pub fn project_qh(case: &ManufacturedCase, mesh: &LateralMesh) -> Result<Pair<PiecewiseLinear>> {
    let kinks = Pair::new(case.kinks(Side::Zero), case.kinks(Side::Ell));
    project_qh_fn(mesh, |side, t| case.g(side, t), &kinks)
}

/// Thomas algorithm for `lower[i-1] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    for i in 0..n {
        let l = if i > 0 { lower[i - 1] } else { 0.0 };
        let denom = diag[i] - if i > 0 { l * c[i - 1] } else { 0.0 };
        if denom.abs() <= f64::MIN_POSITIVE {
            return Err(Error::SingularMatrix { column: i, pivot: denom });
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - if i > 0 { l * d[i - 1] } else { 0.0 }) / denom;
    }
    for i in (0..n.saturating_sub(1)).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Right-hand side for the direct method with datum `g_h`:
/// `<phi_i, H_T (1/2 I + K) g_h>` or `<phi_i, d/dt (1/2 I + K) g_h>`.
pub fn assemble_rhs(mesh: &LateralMesh, g_h: &Pair<PiecewiseLinear>, formulation: &Formulation) -> Result<Vec<f64>> {
    let g = g_h.try_map(|_, gl| {
        if !gl.zero_at_start() {
            return Err(Error::domain("Dirichlet data must vanish at t = 0"));
        }
        Ok(gl.to_poly())
    })?;
    let r = direct_rhs(&g, mesh.geometry().length());
    assemble_rhs_from_trace(mesh, &r, formulation)
}

/// Load vector `<phi_i, H_T r>` or `<phi_i, d/dt r>` for a continuous
/// piecewise linear pair `r` vanishing at `t = 0`.
pub fn assemble_rhs_from_trace(
    mesh: &LateralMesh,
    r: &Pair<PiecewisePoly>,
    formulation: &Formulation,
) -> Result<Vec<f64>> {
    let horizon = mesh.geometry().horizon();
    let mut b = vec![0.0; mesh.dofs()];
    for side in Side::BOTH {
        let rs = r.get(side);
        let dr = rs.derivative();
        if dr.degree() > 0 {
            return Err(Error::domain("trace must be piecewise linear"));
        }
        let nodes = mesh.nodes(side);
        match formulation {
            Formulation::Energetic => {
                for i in 0..mesh.elements(side) {
                    b[mesh.dof(side, i)] = rs.eval(nodes[i + 1]) - rs.eval(nodes[i]);
                }
            }
            Formulation::Ht(HtMethod::KernelQuadrature) => {
                let table = KernelTable::new(nodes, dr.breaks(), horizon);
                for i in 0..mesh.elements(side) {
                    let s: f64 = (0..dr.pieces())
                        .map(|j| dr.piece_coeffs(j)[0])
                        .enumerate()
                        .filter(|(_, v)| *v != 0.0)
                        .map(|(j, v)| v * table.rectangle(i, i + 1, j, j + 1))
                        .sum();
                    b[mesh.dof(side, i)] = -s / PI;
                }
            }
            Formulation::Ht(HtMethod::FourierTruncation(settings)) => {
                let (vals, _) = with_truncation(settings.truncation, |modes| {
                    let target = StepSpectrum::new(&dr, modes)?;
                    let tests = element_spectra(mesh, side, nodes, 1.0, modes)?;
                    tests.iter().map(|ti| ti.ht_pairing(&target, settings.tail_correction)).collect()
                })?;
                for (i, v) in vals.into_iter().enumerate() {
                    b[mesh.dof(side, i)] = v;
                }
            }
        }
    }
    Ok(b)
}

/// Solution of a Galerkin system with its relative residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub coefficients: Vec<f64>,
    pub residual: f64,
}

/// Direct solve by LU with partial pivoting.
pub fn solve(system: &GalerkinSystem) -> Result<Solution> {
    if !system.matrix.is_square() || system.matrix.rows() != system.rhs.len() {
        return Err(Error::domain("system dimensions do not match"));
    }
    let lu = Lu::factor(&system.matrix)?;
    let coefficients = lu.solve(&system.rhs)?;
    let residual = relative_residual(&system.matrix, &coefficients, &system.rhs);
    Ok(Solution { coefficients, residual })
}

/// `||w_h - w||_{L^2(Sigma)}`, Gauss order 8 on every element split at the
/// case's kinks.
pub fn l2_error(mesh: &LateralMesh, coefficients: &[f64], case: &ManufacturedCase) -> Result<f64> {
    if coefficients.len() != mesh.dofs() {
        return Err(Error::domain("coefficient vector does not match the mesh"));
    }
    let rule = gauss8();
    let mut sum = 0.0;
    for side in Side::BOTH {
        let kinks = case.kinks(side);
        for i in 0..mesh.elements(side) {
            let (a, b) = mesh.element(side, i);
            let c = coefficients[mesh.dof(side, i)];
            sum += rule.integrate_split(a, b, &kinks, |t| {
                let d = c - case.exact_w(side, t);
                d * d
            });
        }
    }
    Ok(sum.sqrt())
}

/// Experimental orders `log2(e_{l-1} / e_l)` for successive halvings of `h`.
pub fn eoc(errors: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::domain(format!("errors must be positive, got {bad}")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::ProblemGeometry;

    fn mesh(l: f64, t: f64, n: usize) -> LateralMesh {
        LateralMesh::uniform(ProblemGeometry::new(l, t).unwrap(), n, n).unwrap()
    }

    #[test]
    fn energetic_structure() {
        let m = mesh(3.0, 6.0, 4);
        let a = assemble_energetic(&m);
        for i in 0..8 {
            for j in 0..8 {
                let (si, ki) = m.locate(i);
                let (sj, kj) = m.locate(j);
                let expected = if si == sj {
                    if ki == kj {
                        0.75
                    } else {
                        0.0
                    }
                } else if ki == kj + 2 {
                    0.75
                } else {
                    0.0
                };
                assert_eq!(a[(i, j)], expected, "({i}, {j})");
            }
        }
        let short = mesh(3.0, 2.0, 4);
        let a = assemble_energetic(&short);
        let expected = DenseMatrix::from_fn(8, 8, |i, j| if i == j { 0.25 } else { 0.0 });
        assert_eq!(a, expected);
    }

    #[test]
    fn ht_paths_agree_on_small_meshes() {
        for (l, t) in [(3.0, 6.0), (3.0, 2.0)] {
            let m = mesh(l, t, 4);
            let k = assemble_ht(&m, &HtMethod::KernelQuadrature).unwrap();
            let f = assemble_ht(&m, &HtMethod::FourierTruncation(FourierSettings::for_elements(4))).unwrap();
            assert!(k.max_abs_diff(&f) < 1e-9, "{}", k.max_abs_diff(&f));
        }
    }

    #[test]
    fn projection_reproduces_linears() {
        let m = mesh(3.0, 6.0, 6);
        let g = |side: Side, t: f64| match side {
            Side::Zero => 0.5 * t,
            Side::Ell => (t - 2.0).max(0.0),
        };
        let kinks = Pair::new(vec![], vec![2.0]);
        let q = project_qh_fn(&m, g, &kinks).unwrap();
        for (k, &x) in m.nodes(Side::Zero).iter().enumerate() {
            assert!((q.zero.values()[k] - 0.5 * x).abs() < 1e-13);
            assert!((q.ell.values()[k] - (x - 2.0).max(0.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn projection_of_a_square_converges_quadratically() {
        let mut errs = Vec::new();
        for n in [16, 32, 64, 128] {
            let m = mesh(3.0, 6.0, n);
            let none = Pair::new(vec![], vec![]);
            let q = project_qh_fn(&m, |_, t| t * t, &none).unwrap();
            let p = q.zero.to_poly();
            let err = gauss10().integrate_split(0.0, 6.0, m.nodes(Side::Zero), |t| (p.eval(t) - t * t).powi(2)).sqrt();
            errs.push(err);
        }
        for r in eoc(&errs).unwrap() {
            assert!((r - 2.0).abs() < 0.1, "{r}");
        }
    }

    #[test]
    fn eoc_examples() {
        assert_eq!(eoc(&[4.0, 2.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert!(eoc(&[1.0, 0.0]).is_err());
        assert!(eoc(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let m = mesh(3.0, 6.0, 4);
        let z = Pair::new(
            PiecewiseLinear::new(Side::Zero, m.nodes(Side::Zero).to_vec(), vec![0.0; 5], true).unwrap(),
            PiecewiseLinear::new(Side::Ell, m.nodes(Side::Ell).to_vec(), vec![0.0; 5], true).unwrap(),
        );
        for f in [Formulation::Energetic, Formulation::ht()] {
            assert!(assemble_rhs(&m, &z, &f).unwrap().iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn identity_solve() {
        let sys = GalerkinSystem { matrix: DenseMatrix::identity(3), rhs: vec![1.0, 0.0, 0.0] };
        let s = solve(&sys).unwrap();
        assert_eq!(s.coefficients, vec![1.0, 0.0, 0.0]);
        assert_eq!(s.residual, 0.0);
    }
}
