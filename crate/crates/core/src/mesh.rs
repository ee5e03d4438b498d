//! Geometry of the space-time strip `(0, L) x (0, T)`, meshes of its two
//! lateral boundary lines and the discrete spaces living on them.

use crate::error::{Error, Result};
use crate::poly::PiecewisePoly;

/// Smallest `n >= 1` with `T <= n L`: the number of time slices of length `L`
/// needed to cover `(0, T)`.
pub fn time_slice_count(length: f64, horizon: f64) -> Result<usize> {
    if !(length > 0.0 && length.is_finite()) || !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::domain(format!("need L > 0 and T > 0, got L = {length}, T = {horizon}")));
    }
    let mut n = (horizon / length).ceil().max(1.0) as usize;
    while n > 1 && horizon <= (n - 1) as f64 * length {
        n -= 1;
    }
    while horizon > n as f64 * length {
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemGeometry {
    length: f64,
    horizon: f64,
    slices: usize,
}

impl ProblemGeometry {
    pub fn new(length: f64, horizon: f64) -> Result<Self> {
        let slices = time_slice_count(length, horizon)?;
        Ok(Self { length, horizon, slices })
    }

    /// Spatial length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Time horizon `T`.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Number of time slices `n`.
    pub fn slices(&self) -> usize {
        self.slices
    }

    /// `sin^2(pi / (2 (n + 1)))`, the ellipticity constant of both formulations.
    pub fn ellipticity_constant(&self) -> f64 {
        let s = (std::f64::consts::PI / (2.0 * (self.slices as f64 + 1.0))).sin();
        s * s
    }

    /// The `j`-th time slice, `j = 1..=n`; the last one is cut at `T`.
    pub fn slice(&self, j: usize) -> (f64, f64) {
        assert!(j >= 1 && j <= self.slices, "slice index out of range");
        let lo = (j - 1) as f64 * self.length;
        let hi = (j as f64 * self.length).min(self.horizon);
        (lo, hi)
    }
}

/// The two lateral boundary lines: `x = 0` and `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Zero,
    Ell,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Zero, Side::Ell];

    pub fn other(self) -> Side {
        match self {
            Side::Zero => Side::Ell,
            Side::Ell => Side::Zero,
        }
    }
}

/// A pair of functions `(f_0, f_L)` on the lateral boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Pair<F> {
    pub zero: F,
    pub ell: F,
}

impl<F> Pair<F> {
    pub fn new(zero: F, ell: F) -> Self {
        Self { zero, ell }
    }

    pub fn get(&self, side: Side) -> &F {
        match side {
            Side::Zero => &self.zero,
            Side::Ell => &self.ell,
        }
    }

    pub fn map<G>(&self, mut f: impl FnMut(Side, &F) -> G) -> Pair<G> {
        Pair { zero: f(Side::Zero, &self.zero), ell: f(Side::Ell, &self.ell) }
    }

    pub fn try_map<G>(&self, mut f: impl FnMut(Side, &F) -> Result<G>) -> Result<Pair<G>> {
        Ok(Pair { zero: f(Side::Zero, &self.zero)?, ell: f(Side::Ell, &self.ell)? })
    }
}

/// Meshes of `{0} x (0, T)` and `{L} x (0, T)`. Node coordinates are absolute
/// times; the two sides are independent.
#[derive(Debug, Clone, PartialEq)]
pub struct LateralMesh {
    geometry: ProblemGeometry,
    nodes: Pair<Vec<f64>>,
}

impl LateralMesh {
    pub fn new(geometry: ProblemGeometry, nodes0: Vec<f64>, nodes_ell: Vec<f64>) -> Result<Self> {
        for nodes in [&nodes0, &nodes_ell] {
            if nodes.len() < 2 {
                return Err(Error::domain("each side needs at least one element"));
            }
            if nodes[0] != 0.0 || *nodes.last().unwrap() != geometry.horizon() {
                return Err(Error::domain("side meshes must start at 0 and end at T"));
            }
            if nodes.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::domain("mesh nodes must be strictly increasing"));
            }
        }
        Ok(Self { geometry, nodes: Pair::new(nodes0, nodes_ell) })
    }

    /// Uniform meshes with `n0` and `n_ell` elements.
    pub fn uniform(geometry: ProblemGeometry, n0: usize, n_ell: usize) -> Result<Self> {
        if n0 == 0 || n_ell == 0 {
            return Err(Error::domain("element counts must be positive"));
        }
        let t = geometry.horizon();
        let nodes = |n: usize| -> Vec<f64> {
            let mut v: Vec<f64> = (0..=n).map(|k| k as f64 * t / n as f64).collect();
            v[n] = t;
            v
        };
        Self::new(geometry, nodes(n0), nodes(n_ell))
    }

    /// Uniform meshes with `2^(level+1)` elements per side.
    pub fn uniform_level(geometry: ProblemGeometry, level: u32) -> Result<Self> {
        let n = 1usize.checked_shl(level + 1).ok_or_else(|| Error::domain("refinement level too large"))?;
        Self::uniform(geometry, n, n)
    }

    /// Bisects every element on both sides.
    pub fn refined(&self) -> Self {
        let bisect = |nodes: &Vec<f64>| {
            let mut out = Vec::with_capacity(2 * nodes.len() - 1);
            for w in nodes.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(*nodes.last().unwrap());
            out
        };
        Self { geometry: self.geometry, nodes: self.nodes.map(|_, n| bisect(n)) }
    }

    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    pub fn nodes(&self, side: Side) -> &[f64] {
        self.nodes.get(side)
    }

    pub fn elements(&self, side: Side) -> usize {
        self.nodes(side).len() - 1
    }

    pub fn element(&self, side: Side, i: usize) -> (f64, f64) {
        let n = self.nodes(side);
        (n[i], n[i + 1])
    }

    /// Total number of elements `N_0 + N_L`.
    pub fn dofs(&self) -> usize {
        self.elements(Side::Zero) + self.elements(Side::Ell)
    }

    /// Global index of element `i` on `side`; side `Zero` comes first.
    pub fn dof(&self, side: Side, i: usize) -> usize {
        match side {
            Side::Zero => i,
            Side::Ell => self.elements(Side::Zero) + i,
        }
    }

    /// Inverse of [`LateralMesh::dof`].
    pub fn locate(&self, dof: usize) -> (Side, usize) {
        let n0 = self.elements(Side::Zero);
        if dof < n0 {
            (Side::Zero, dof)
        } else {
            (Side::Ell, dof - n0)
        }
    }

    /// Maximal element length.
    pub fn h(&self) -> f64 {
        Side::BOTH.iter().flat_map(|&s| self.nodes(s).windows(2).map(|w| w[1] - w[0])).fold(0.0, f64::max)
    }

    /// Splits a global coefficient vector into piecewise constants per side.
    pub fn density(&self, coefficients: &[f64]) -> Result<Pair<PiecewiseConstant>> {
        if coefficients.len() != self.dofs() {
            return Err(Error::domain(format!("expected {} coefficients, got {}", self.dofs(), coefficients.len())));
        }
        let n0 = self.elements(Side::Zero);
        Ok(Pair::new(
            PiecewiseConstant::new(Side::Zero, self.nodes(Side::Zero).to_vec(), coefficients[..n0].to_vec())?,
            PiecewiseConstant::new(Side::Ell, self.nodes(Side::Ell).to_vec(), coefficients[n0..].to_vec())?,
        ))
    }

    /// The basis function of global index `dof` as a pair of step functions.
    pub fn basis_function(&self, dof: usize) -> Pair<PiecewisePoly> {
        let mut c = vec![0.0; self.dofs()];
        c[dof] = 1.0;
        self.density(&c).expect("valid dof").map(|_, w| w.to_poly())
    }
}

/// Element of `S^0_h` on one side.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant {
    side: Side,
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn new(side: Side, nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() != values.len() + 1 {
            return Err(Error::domain("one value per element is required"));
        }
        Ok(Self { side, nodes, values })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_poly(&self) -> PiecewisePoly {
        PiecewisePoly::steps(&self.nodes, &self.values).expect("mesh nodes are valid")
    }

    /// `sum_i h_i v_i^2`.
    pub fn l2_norm_squared(&self) -> f64 {
        self.nodes.windows(2).zip(&self.values).map(|(w, v)| (w[1] - w[0]) * v * v).sum()
    }
}

/// Continuous piecewise linear function given by nodal values; with
/// `zero_at_start` it belongs to the space vanishing at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    side: Side,
    nodes: Vec<f64>,
    values: Vec<f64>,
    zero_at_start: bool,
}

impl PiecewiseLinear {
    pub fn new(side: Side, nodes: Vec<f64>, values: Vec<f64>, zero_at_start: bool) -> Result<Self> {
        if nodes.len() != values.len() || nodes.len() < 2 {
            return Err(Error::domain("one value per node is required"));
        }
        if zero_at_start && values[0] != 0.0 {
            return Err(Error::domain("value at t = 0 must vanish"));
        }
        Ok(Self { side, nodes, values, zero_at_start })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn zero_at_start(&self) -> bool {
        self.zero_at_start
    }

    pub fn to_poly(&self) -> PiecewisePoly {
        PiecewisePoly::linear(&self.nodes, &self.values).expect("mesh nodes are valid")
    }
}

/// `||v||_{L^2(Sigma)}` for a pair of piecewise constants.
pub fn l2_norm_sigma(v: &Pair<PiecewiseConstant>) -> f64 {
    (v.zero.l2_norm_squared() + v.ell.l2_norm_squared()).sqrt()
}
