//! Nonlinearity catalog, energy functionals, and the Lyapunov functional E₀.
//!
//! The concrete nonlinearities are a fixed catalog; each carries the constants
//! of the growth and sign conditions it satisfies so experiments can evaluate
//! the closed-form radii and entry times.

use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::integrate::{Problem, State, StateA, StateR};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum InteriorKind {
    Zero,
    Cubic,
    /// `s³ − λs`
    CubicMinusLinear { lambda: f64 },
}

/// Interior nonlinearity `f` with `F(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub kind: InteriorKind,
    /// Extra linear term: the evaluated function is `f(s) + shift·s`.
    pub shift: f64,
    /// Growth: `|f′(s)| ≤ ℓ(1 + s²)`.
    pub ell: f64,
    /// Sign condition: `2∫F(ξ) ≥ −(1 − μ₀)‖ξ‖₁² − κ_f`.
    pub mu0: f64,
    pub kappa_f: f64,
    /// `|f″(s)| ≤ ℓ₁(1 + |s|)`
    pub ell1: f64,
    /// `f′(s) ≥ −ℓ₂`
    pub ell2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum BoundaryKind {
    Zero,
    /// `ρ sin s`
    BoundedSine { rho: f64 },
}

/// Boundary nonlinearity `g` with `G(0) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNonlinearity {
    pub kind: BoundaryKind,
    /// `|g′(s)| ≤ ρ`
    pub rho: f64,
    pub mu1: f64,
    pub kappa_g: f64,
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Nonlinearity {
            kind: InteriorKind::Zero,
            shift: 0.0,
            ell: 0.0,
            mu0: 1.0,
            kappa_f: 0.0,
            ell1: 0.0,
            ell2: 0.0,
        }
    }

    pub fn cubic() -> Self {
        Nonlinearity {
            kind: InteriorKind::Cubic,
            shift: 0.0,
            ell: 3.0,
            mu0: 1.0,
            kappa_f: 0.0,
            ell1: 6.0,
            ell2: 0.0,
        }
    }

    /// `f(s) = s³ − λs` for `λ ∈ [0, 1)`.
    ///
    /// `2F(s) = s⁴/2 − λs² ≥ −λs²` and `‖ξ‖² ≤ ‖ξ‖₁²`, so `μ₀ = 1 − λ`
    /// with `κ_f = 0`.
    pub fn cubic_minus_linear(lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::param("lambda", format!("must lie in [0, 1), got {lambda}")));
        }
        Ok(Nonlinearity {
            kind: InteriorKind::CubicMinusLinear { lambda },
            shift: 0.0,
            ell: 3.0,
            mu0: 1.0 - lambda,
            kappa_f: 0.0,
            ell1: 6.0,
            ell2: lambda,
        })
    }

    pub fn builtin(name: &str, param: Option<f64>) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "cubic" => Ok(Self::cubic()),
            "cubic_minus_linear" => Self::cubic_minus_linear(param.unwrap_or(0.0)),
            other => Err(Error::UnknownNonlinearity(other.to_string())),
        }
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            InteriorKind::Zero => "zero".to_string(),
            InteriorKind::Cubic => "cubic".to_string(),
            InteriorKind::CubicMinusLinear { lambda } => format!("cubic_minus_linear({lambda})"),
        };
        if self.shift != 0.0 {
            format!("{base}+{}s", self.shift)
        } else {
            base
        }
    }

    /// `ψ(s) = f(s) + βs`.
    pub fn with_shift(&self, beta: f64) -> Self {
        let mut out = self.clone();
        out.shift += beta;
        out.ell2 = (self.ell2 - beta).max(0.0);
        out
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, InteriorKind::Zero) && self.shift == 0.0
    }

    pub fn f(&self, s: f64) -> f64 {
        let base = match self.kind {
            InteriorKind::Zero => 0.0,
            InteriorKind::Cubic => s * s * s,
            InteriorKind::CubicMinusLinear { lambda } => s * s * s - lambda * s,
        };
        base + self.shift * s
    }

    pub fn fprime(&self, s: f64) -> f64 {
        let base = match self.kind {
            InteriorKind::Zero => 0.0,
            InteriorKind::Cubic => 3.0 * s * s,
            InteriorKind::CubicMinusLinear { lambda } => 3.0 * s * s - lambda,
        };
        base + self.shift
    }

    pub fn fsecond(&self, s: f64) -> f64 {
        match self.kind {
            InteriorKind::Zero => 0.0,
            InteriorKind::Cubic | InteriorKind::CubicMinusLinear { .. } => 6.0 * s,
        }
    }

    /// Antiderivative `F` with `F(0) = 0`.
    pub fn potential(&self, s: f64) -> f64 {
        let s2 = s * s;
        let base = match self.kind {
            InteriorKind::Zero => 0.0,
            InteriorKind::Cubic => 0.25 * s2 * s2,
            InteriorKind::CubicMinusLinear { lambda } => 0.25 * s2 * s2 - 0.5 * lambda * s2,
        };
        base + 0.5 * self.shift * s2
    }

    /// Discrete gradient `(F(b) − F(a))/(b − a)`, in closed form for the
    /// polynomial catalog so no cancellation occurs when `b ≈ a`.
    pub fn discrete_gradient(&self, a: f64, b: f64) -> f64 {
        let lin = 0.5 * (a + b);
        let base = match self.kind {
            InteriorKind::Zero => 0.0,
            InteriorKind::Cubic => cubic_quotient(a, b),
            InteriorKind::CubicMinusLinear { lambda } => cubic_quotient(a, b) - lambda * lin,
        };
        base + self.shift * lin
    }

    /// `∂/∂b` of [`Self::discrete_gradient`].
    pub fn discrete_gradient_db(&self, a: f64, b: f64) -> f64 {
        let cubic = 0.25 * (a * a + 2.0 * a * b + 3.0 * b * b);
        let base = match self.kind {
            InteriorKind::Zero => 0.0,
            InteriorKind::Cubic => cubic,
            InteriorKind::CubicMinusLinear { lambda } => cubic - 0.5 * lambda,
        };
        base + 0.5 * self.shift
    }
}

fn cubic_quotient(a: f64, b: f64) -> f64 {
    0.25 * (a * a * a + a * a * b + a * b * b + b * b * b)
}

impl BoundaryNonlinearity {
    pub fn zero() -> Self {
        BoundaryNonlinearity {
            kind: BoundaryKind::Zero,
            rho: 0.0,
            mu1: 1.0,
            kappa_g: 0.0,
        }
    }

    /// `g(s) = ρ sin s`, `G(s) = ρ(1 − cos s) ≥ 0`.
    pub fn bounded_sine(rho: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::param("rho", format!("must be finite and >= 0, got {rho}")));
        }
        Ok(BoundaryNonlinearity {
            kind: BoundaryKind::BoundedSine { rho },
            rho,
            mu1: 1.0,
            kappa_g: 0.0,
        })
    }

    pub fn builtin(name: &str, param: Option<f64>) -> Result<Self> {
        match name {
            "zero" => Ok(Self::zero()),
            "bounded_sine" => Self::bounded_sine(param.unwrap_or(0.0)),
            other => Err(Error::UnknownNonlinearity(other.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self.kind {
            BoundaryKind::Zero => "zero".into(),
            BoundaryKind::BoundedSine { rho } => format!("bounded_sine({rho})"),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self.kind {
            BoundaryKind::Zero => true,
            BoundaryKind::BoundedSine { rho } => rho == 0.0,
        }
    }

    pub fn g(&self, s: f64) -> f64 {
        match self.kind {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::BoundedSine { rho } => rho * s.sin(),
        }
    }

    pub fn gprime(&self, s: f64) -> f64 {
        match self.kind {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::BoundedSine { rho } => rho * s.cos(),
        }
    }

    pub fn potential(&self, s: f64) -> f64 {
        match self.kind {
            BoundaryKind::Zero => 0.0,
            // 1 − cos s = 2 sin²(s/2), stable near 0
            BoundaryKind::BoundedSine { rho } => 2.0 * rho * (0.5 * s).sin().powi(2),
        }
    }

    /// `(G(b) − G(a))/(b − a) = ρ sin((a+b)/2)·sinc((b−a)/2)`.
    pub fn discrete_gradient(&self, a: f64, b: f64) -> f64 {
        match self.kind {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::BoundedSine { rho } => {
                rho * (0.5 * (a + b)).sin() * sinc(0.5 * (b - a))
            }
        }
    }

    /// Midpoint approximation `g′((a+b)/2)/2` of the exact derivative in `b`.
    pub fn discrete_gradient_db(&self, a: f64, b: f64) -> f64 {
        0.5 * self.gprime(0.5 * (a + b))
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    /// Phase-space norm squared.
    pub quadratic: f64,
    /// `2∫F(u)`
    pub potential: f64,
    /// `2ε∫_Γ G(δ)`; zero for Problem (R).
    pub boundary_potential: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn new(quadratic: f64, potential: f64, boundary_potential: f64) -> Self {
        EnergyBreakdown {
            quadratic,
            potential,
            boundary_potential,
            total: quadratic + potential + boundary_potential,
        }
    }
}

pub fn energy_r(mesh: &Mesh, s: &StateR, nl: &Nonlinearity) -> EnergyBreakdown {
    let q = mesh.norm_h0_sq(s);
    let p = 2.0 * mesh.integrate_with(&s.u, |x| nl.potential(x));
    EnergyBreakdown::new(q, p, 0.0)
}

pub fn energy_a(
    mesh: &Mesh,
    s: &StateA,
    eps: f64,
    nl: &Nonlinearity,
    bnl: &BoundaryNonlinearity,
) -> EnergyBreakdown {
    let q = mesh.norm_heps_sq(s, eps);
    let p = 2.0 * mesh.integrate_with(&s.u, |x| nl.potential(x));
    let b = 2.0 * eps * s.delta.0.iter().map(|&d| bnl.potential(d)).sum::<f64>();
    EnergyBreakdown::new(q, p, b)
}

/// Energy of either problem; the state must match the problem.
pub fn energy(
    problem: Problem,
    state: &State,
    mesh: &Mesh,
    nl: &Nonlinearity,
    bnl: &BoundaryNonlinearity,
) -> Result<EnergyBreakdown> {
    match (problem, state) {
        (Problem::Robin, State::R(s)) => Ok(energy_r(mesh, s, nl)),
        (Problem::Acoustic { eps }, State::A(s)) => {
            check_epsilon(eps)?;
            Ok(energy_a(mesh, s, eps, nl, bnl))
        }
        _ => Err(Error::KindMismatch(
            "energy: state kind does not match the problem".into(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub value: f64,
    /// `C₁‖φ‖² − κ_f`
    pub lower: f64,
    /// `C₂‖φ‖(1 + ‖φ‖³)`
    pub upper: f64,
    pub violates_lower: bool,
    pub violates_upper: bool,
}

/// `E₀(φ) = ‖φ‖²_{H₀} + 2μ₀⟨u, v⟩ + 2∫F(u)` with its two-sided bounds.
pub fn lyapunov_e0(phi: &StateR, mesh: &Mesh, nl: &Nonlinearity, c1: f64, c2: f64) -> LyapunovReport {
    let value = e0_value(phi, mesh, nl, nl.mu0);
    let norm = mesh.norm_h0(phi);
    let lower = c1 * norm * norm - nl.kappa_f;
    let upper = c2 * norm * (1.0 + norm.powi(3));
    let slack = 1e-12 * (1.0 + value.abs());
    LyapunovReport {
        value,
        lower,
        upper,
        violates_lower: value < lower - slack,
        violates_upper: value > upper + slack,
    }
}

pub fn e0_value(phi: &StateR, mesh: &Mesh, nl: &Nonlinearity, mu0: f64) -> f64 {
    mesh.norm_h0_sq(phi)
        + 2.0 * mu0 * mesh.l2(&phi.u, &phi.v)
        + 2.0 * mesh.integrate_with(&phi.u, |x| nl.potential(x))
}

/// `1.5 · max E₀/(‖φ‖(1 + ‖φ‖³))` over the given directions rescaled to
/// norms on a log grid spanning `[1e-3, 10]`.
pub fn calibrate_c2(mesh: &Mesh, nl: &Nonlinearity, directions: &[StateR]) -> f64 {
    let grid: Vec<f64> = (0..=40).map(|i| 10f64.powf(-3.0 + 4.0 * i as f64 / 40.0)).collect();
    let mut best: f64 = 0.0;
    for d in directions {
        let n0 = mesh.norm_h0(d);
        if n0 == 0.0 {
            continue;
        }
        for &r in &grid {
            let phi = d.scaled(r / n0);
            let e = e0_value(&phi, mesh, nl, nl.mu0);
            best = best.max(e / (r * (1.0 + r.powi(3))));
        }
    }
    1.5 * best
}

/// Largest relative defect of `F′ = f` by central differences on `grid`.
pub fn antiderivative_defect(grid: &[f64], f: impl Fn(f64) -> f64, big_f: impl Fn(f64) -> f64) -> f64 {
    let h = 1e-5;
    grid.iter()
        .map(|&s| {
            let fd = (big_f(s + h) - big_f(s - h)) / (2.0 * h);
            (fd - f(s)).abs() / (1.0 + f(s).abs())
        })
        .fold(0.0, f64::max)
}

/// Worst value of `|f′(s)| − ℓ(1 + s²)` on `grid` (≤ 0 when the growth bound holds).
pub fn growth_excess(nl: &Nonlinearity, grid: &[f64]) -> f64 {
    grid.iter()
        .map(|&s| nl.fprime(s).abs() - nl.ell * (1.0 + s * s))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `2∫F(ξ) + (1 − μ₀)‖ξ‖₁² + κ_f`, nonnegative when the sign condition holds.
pub fn sign_condition_margin(mesh: &Mesh, nl: &Nonlinearity, xi: &crate::mesh::Field) -> f64 {
    2.0 * mesh.integrate_with(xi, |x| nl.potential(x)) + (1.0 - nl.mu0) * mesh.h1(xi, xi) + nl.kappa_f
}

/// Evenly spaced sample grid on `[-10, 10]`.
pub fn sample_grid(points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| -10.0 + 20.0 * i as f64 / (points - 1) as f64)
        .collect()
}
