use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::mesh::{BoundaryField, Field, Mesh};

/// `φ = (u, u_t)` for Problem (R).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateR {
    pub u: Field,
    pub v: Field,
}

/// `ζ = (u, u_t, δ, δ_t)` for Problem (A).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateA {
    pub u: Field,
    pub v: Field,
    pub delta: BoundaryField,
    pub gamma: BoundaryField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum State {
    R(StateR),
    A(StateA),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Problem {
    Robin,
    Acoustic { eps: f64 },
}

impl Problem {
    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Problem::Robin => None,
            Problem::Acoustic { eps } => Some(*eps),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Problem::Robin => "R".into(),
            Problem::Acoustic { eps } => format!("A({eps})"),
        }
    }
}

impl StateR {
    pub fn zeros(n: usize) -> Self {
        StateR {
            u: Field::zeros(n),
            v: Field::zeros(n),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.u.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        StateR {
            u: self.u.scaled(s),
            v: self.v.scaled(s),
        }
    }

    pub fn sub(&self, other: &StateR) -> Self {
        StateR {
            u: self.u.sub(&other.u),
            v: self.v.sub(&other.v),
        }
    }

    pub fn add(&self, other: &StateR) -> Self {
        StateR {
            u: self.u.add(&other.u),
            v: self.v.add(&other.v),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite()
    }

    /// Flat `[u, v]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.u.0.clone();
        out.extend_from_slice(&self.v.0);
        out
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = x.len() / 2;
        StateR {
            u: Field(x[..n].to_vec()),
            v: Field(x[n..].to_vec()),
        }
    }
}

impl StateA {
    pub fn zeros(n: usize) -> Self {
        StateA {
            u: Field::zeros(n),
            v: Field::zeros(n),
            delta: BoundaryField::default(),
            gamma: BoundaryField::default(),
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.u.len()
    }

    /// `Π(u, v, δ, γ) = (u, v)`.
    pub fn project(&self) -> StateR {
        StateR {
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        StateA {
            u: self.u.scaled(s),
            v: self.v.scaled(s),
            delta: self.delta.scaled(s),
            gamma: self.gamma.scaled(s),
        }
    }

    pub fn sub(&self, other: &StateA) -> Self {
        StateA {
            u: self.u.sub(&other.u),
            v: self.v.sub(&other.v),
            delta: self.delta.sub(&other.delta),
            gamma: self.gamma.sub(&other.gamma),
        }
    }

    pub fn add(&self, other: &StateA) -> Self {
        StateA {
            u: self.u.add(&other.u),
            v: self.v.add(&other.v),
            delta: self.delta.add(&other.delta),
            gamma: self.gamma.add(&other.gamma),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.delta.is_finite() && self.gamma.is_finite()
    }

    /// Flat `[u, v, δ, γ]`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.u.0.clone();
        out.extend_from_slice(&self.v.0);
        out.extend_from_slice(&self.delta.0);
        out.extend_from_slice(&self.gamma.0);
        out
    }

    pub fn from_slice(x: &[f64]) -> Self {
        let n = (x.len() - 4) / 2;
        StateA {
            u: Field(x[..n].to_vec()),
            v: Field(x[n..2 * n].to_vec()),
            delta: BoundaryField([x[2 * n], x[2 * n + 1]]),
            gamma: BoundaryField([x[2 * n + 2], x[2 * n + 3]]),
        }
    }
}

impl State {
    pub fn as_r(&self) -> Option<&StateR> {
        match self {
            State::R(s) => Some(s),
            State::A(_) => None,
        }
    }

    pub fn as_a(&self) -> Option<&StateA> {
        match self {
            State::A(s) => Some(s),
            State::R(_) => None,
        }
    }

    pub fn u(&self) -> &Field {
        match self {
            State::R(s) => &s.u,
            State::A(s) => &s.u,
        }
    }

    pub fn v(&self) -> &Field {
        match self {
            State::R(s) => &s.v,
            State::A(s) => &s.v,
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            State::R(s) => s.to_vec(),
            State::A(s) => s.to_vec(),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            State::R(s) => s.is_finite(),
            State::A(s) => s.is_finite(),
        }
    }
}

/// Initial state of Problem (A) with `γ(0) = εδ₁ − (1 − ε)·u₀|_Γ`.
///
/// This wiring makes the formal limit `ε → 0` reproduce Problem (R): the
/// boundary velocity tends to `−u₀|_Γ`, the canonical extension of `(u₀, u₁)`.
pub fn initial_data_a(
    mesh: &Mesh,
    u0: &Field,
    u1: &Field,
    delta0: BoundaryField,
    delta1: BoundaryField,
    eps: f64,
) -> Result<StateA> {
    check_epsilon(eps)?;
    for f in [u0, u1] {
        if f.len() != mesh.n_nodes() {
            return Err(Error::DimensionMismatch {
                expected: mesh.n_nodes(),
                got: f.len(),
            });
        }
    }
    let tr = mesh.trace(u0);
    let gamma = delta1.scaled(eps).sub(&tr.scaled(1.0 - eps));
    Ok(StateA {
        u: u0.clone(),
        v: u1.clone(),
        delta: delta0,
        gamma,
    })
}
