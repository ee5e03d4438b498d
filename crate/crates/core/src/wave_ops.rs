//! Boundary operators of the 1D wave equation `d_tt u - d_xx u = 0` on
//! `(0, L) x (0, T)` with zero initial data, and manufactured solutions.
//!
//! With the fundamental solution `H(t - |x - y|) / 2` the single layer
//! operator acting on `w = (w_0, w_L)` reads
//!
//! ```text
//! (V w)_0(t) = 1/2 int_0^t w_0 + 1/2 int_0^{t-L} w_L
//! (V w)_L(t) = 1/2 int_0^{t-L} w_0 + 1/2 int_0^t w_L
//! ```
//!
//! and every operator below maps piecewise polynomials to piecewise
//! polynomials, so results are exact up to rounding.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::mesh::{Pair, PiecewiseConstant, ProblemGeometry, Side};
use crate::poly::{horner, PiecewisePoly};

/// Converts a mesh density into exact piecewise polynomials.
pub fn density_poly(w: &Pair<PiecewiseConstant>) -> Pair<PiecewisePoly> {
    w.map(|_, c| c.to_poly())
}

/// `t -> int_0^t f`.
pub fn antiderivative(f: &PiecewisePoly) -> PiecewisePoly {
    f.antiderivative()
}

/// `t -> -int_t^T f`.
pub fn antiderivative_rev(f: &PiecewisePoly) -> PiecewisePoly {
    f.antiderivative_rev()
}

/// Single layer operator `V w`.
pub fn apply_v(w: &Pair<PiecewisePoly>, length: f64) -> Pair<PiecewisePoly> {
    let a0 = w.zero.antiderivative();
    let al = w.ell.antiderivative();
    Pair::new(a0.combine(0.5, &al.shifted(length), 0.5), a0.shifted(length).combine(0.5, &al, 0.5))
}

/// `d/dt V w = (1/2 [w_0(t) + w_L(t - L)], 1/2 [w_0(t - L) + w_L(t)])`.
pub fn apply_dt_v(w: &Pair<PiecewisePoly>, length: f64) -> Pair<PiecewisePoly> {
    Pair::new(w.zero.combine(0.5, &w.ell.shifted(length), 0.5), w.zero.shifted(length).combine(0.5, &w.ell, 0.5))
}

/// Right-hand side `(1/2 I + K) g` of the direct boundary integral equation,
/// `(1/2 g_0(t) - 1/2 g_L(t - L), 1/2 g_L(t) - 1/2 g_0(t - L))`.
///
/// This follows from the representation formula with the double layer
/// potential `-1/2 g_0(t - x) - 1/2 g_L(t - (L - x))`.
pub fn direct_rhs(g: &Pair<PiecewisePoly>, length: f64) -> Pair<PiecewisePoly> {
    Pair::new(g.zero.combine(0.5, &g.ell.shifted(length), -0.5), g.ell.combine(0.5, &g.zero.shifted(length), -0.5))
}

/// A point strictly inside the space-time strip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationPoint {
    x: f64,
    t: f64,
}

impl EvaluationPoint {
    pub fn new(x: f64, t: f64, geometry: &ProblemGeometry) -> Result<Self> {
        if !(x > 0.0 && x < geometry.length() && t > 0.0 && t < geometry.horizon()) {
            return Err(Error::domain(format!("({x}, {t}) is not an interior point")));
        }
        Ok(Self { x, t })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn t(&self) -> f64 {
        self.t
    }
}

/// Representation formula
/// `u(x, t) = 1/2 int_0^{t-x} w_0 + 1/2 int_0^{t-L+x} w_L + 1/2 g_0(t-x) + 1/2 g_L(t-L+x)`.
pub fn interior_solution(w: &Pair<PiecewisePoly>, g: &Pair<PiecewisePoly>, length: f64, p: EvaluationPoint) -> f64 {
    let near = p.t - p.x;
    let far = p.t - (length - p.x);
    let a0 = w.zero.antiderivative();
    let al = w.ell.antiderivative();
    let prim = |a: &PiecewisePoly, s: f64| if s <= 0.0 { 0.0 } else { a.eval(s.min(a.horizon())) };
    0.5 * (prim(&a0, near) + prim(&al, far) + g.zero.eval(near) + g.ell.eval(far))
}

/// Shape `f` of a left-to-right traveling wave `u(x, t) = f(t - x)`, with
/// `f(tau) = 0` for `tau < 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `f(tau) = p(tau)` on `[0, width]`, zero afterwards; `p` in monomials.
    Pulse { coeffs: Vec<f64>, width: f64 },
    /// `f(tau) = |sin(pi tau)| / 2`.
    RectifiedSine,
}

impl Profile {
    pub fn value(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match self {
            Profile::Pulse { coeffs, width } => {
                if tau <= *width {
                    horner(coeffs, tau)
                } else {
                    0.0
                }
            }
            Profile::RectifiedSine => 0.5 * (PI * tau).sin().abs(),
        }
    }

    pub fn derivative(&self, tau: f64) -> f64 {
        if tau < 0.0 {
            return 0.0;
        }
        match self {
            Profile::Pulse { coeffs, width } => {
                if tau <= *width {
                    coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (k, c)| acc * tau + k as f64 * c)
                } else {
                    0.0
                }
            }
            Profile::RectifiedSine => {
                let s = (PI * tau).sin();
                let sign = if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                0.5 * PI * sign * (PI * tau).cos()
            }
        }
    }

    /// Points `tau >= 0` where `f'` is not smooth.
    fn kinks(&self, up_to: f64) -> Vec<f64> {
        match self {
            Profile::Pulse { width, .. } => [0.0, *width].into_iter().filter(|&k| k <= up_to).collect(),
            Profile::RectifiedSine => (0..).map(|k| k as f64).take_while(|&k| k <= up_to).collect(),
        }
    }
}

/// Exact solution `u(x, t) = f(t - x)` with its Dirichlet data
/// `g = (f(t), f(t - L))` and density `w = (f'(t), -f'(t - L))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedCase {
    name: String,
    geometry: ProblemGeometry,
    profile: Profile,
    sobolev_s: f64,
}

impl ManufacturedCase {
    pub fn new(name: &str, geometry: ProblemGeometry, profile: Profile, sobolev_s: f64) -> Result<Self> {
        if let Profile::Pulse { coeffs, width } = &profile {
            if coeffs.is_empty() || coeffs[0] != 0.0 {
                return Err(Error::domain("pulse must vanish at tau = 0"));
            }
            if !(*width > 0.0 && width.is_finite()) {
                return Err(Error::domain("pulse width must be positive"));
            }
            let (end, scale) = coeffs.iter().rev().fold((0.0, 0.0), |(v, s), c| (v * width + c, s * width + c.abs()));
            if end.abs() > 1e-12 * scale {
                return Err(Error::domain("pulse must vanish at tau = width"));
            }
        }
        Ok(Self { name: name.to_string(), geometry, profile, sobolev_s })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn geometry(&self) -> &ProblemGeometry {
        &self.geometry
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    /// Sobolev regularity of the density (supremum of admissible `s`, capped
    /// at one).
    pub fn sobolev_s(&self) -> f64 {
        self.sobolev_s
    }

    pub fn exact_u(&self, x: f64, t: f64) -> f64 {
        self.profile.value(t - x)
    }

    fn delay(&self, side: Side) -> f64 {
        match side {
            Side::Zero => 0.0,
            Side::Ell => self.geometry.length(),
        }
    }

    /// Dirichlet datum on `side` at time `t`.
    pub fn g(&self, side: Side, t: f64) -> f64 {
        self.profile.value(t - self.delay(side))
    }

    /// Exact density (outward normal derivative) on `side` at time `t`.
    pub fn exact_w(&self, side: Side, t: f64) -> f64 {
        match side {
            Side::Zero => self.profile.derivative(t),
            Side::Ell => -self.profile.derivative(t - self.delay(side)),
        }
    }

    /// Sorted times in `[0, T]` where the exact density loses smoothness.
    pub fn kinks(&self, side: Side) -> Vec<f64> {
        let d = self.delay(side);
        let horizon = self.geometry.horizon();
        if d > horizon {
            return Vec::new();
        }
        self.profile.kinks(horizon - d).into_iter().map(|k| k + d).collect()
    }

    /// Dirichlet data as exact piecewise polynomials (pulse profiles only).
    pub fn g_poly(&self) -> Option<Pair<PiecewisePoly>> {
        let Profile::Pulse { coeffs, width } = &self.profile else { return None };
        let t = self.geometry.horizon();
        let l = self.geometry.length();
        Some(Pair::new(PiecewisePoly::pulse(t, coeffs, 0.0, *width), PiecewisePoly::pulse(t, coeffs, l, l + width)))
    }

    /// Exact density as piecewise polynomials (pulse profiles only).
    pub fn w_poly(&self) -> Option<Pair<PiecewisePoly>> {
        let Profile::Pulse { coeffs, width } = &self.profile else { return None };
        let t = self.geometry.horizon();
        let l = self.geometry.length();
        let d: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
        let d = if d.is_empty() { vec![0.0] } else { d };
        let neg: Vec<f64> = d.iter().map(|c| -c).collect();
        Some(Pair::new(PiecewisePoly::pulse(t, &d, 0.0, *width), PiecewisePoly::pulse(t, &neg, l, l + width)))
    }
}

/// `u(x, t) = 1/2 (t - x)^3 (2 - t + x)^3` for `x <= t <= x + 2`.
pub fn case_smooth(geometry: ProblemGeometry) -> ManufacturedCase {
    // 1/2 tau^3 (2 - tau)^3 expanded
    let coeffs = vec![0.0, 0.0, 0.0, 4.0, -6.0, 3.0, -0.5];
    ManufacturedCase::new("smooth", geometry, Profile::Pulse { coeffs, width: 2.0 }, 1.0).expect("valid pulse")
}

/// `u(x, t) = |sin(pi (x - t))| / 2` for `x <= t`; the density is only in
/// `H^s` for `s < 1/2`.
pub fn case_singular(geometry: ProblemGeometry) -> ManufacturedCase {
    ManufacturedCase::new("singular", geometry, Profile::RectifiedSine, 0.5).expect("valid profile")
}

/// Traveling pulse `u(x, t) = f(t - x)` for a polynomial `f` on `[0, width]`
/// with `f(0) = 0`.
pub fn case_traveling(geometry: ProblemGeometry, coeffs: &[f64], width: f64) -> Result<ManufacturedCase> {
    ManufacturedCase::new("traveling", geometry, Profile::Pulse { coeffs: coeffs.to_vec(), width }, 1.0)
}

/// `f(t) = t^3 (1 - t)^3` on `[0, 1]`.
pub fn standard_traveling_pulse() -> (Vec<f64>, f64) {
    (vec![0.0, 0.0, 0.0, 1.0, -3.0, 3.0, -1.0], 1.0)
}

pub fn case_traveling_standard(geometry: ProblemGeometry) -> ManufacturedCase {
    let (c, w) = standard_traveling_pulse();
    case_traveling(geometry, &c, w).expect("valid pulse")
}
