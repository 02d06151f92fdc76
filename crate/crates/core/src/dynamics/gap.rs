//! Distance between the acoustic trajectory and the lifted Robin trajectory.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::integrate::{initial_data_a, Problem, State, StateA, StateR, WaveSystem};
use crate::mesh::{BoundaryField, Field, Mesh};

use super::fit::{power_law_fit, RateFit};

/// `E(u, v) = (0, −u|_Γ)`, the boundary components a Robin state is given.
pub fn canonical_extension(phi: &StateR, mesh: &Mesh) -> (BoundaryField, BoundaryField) {
    (BoundaryField::default(), mesh.trace(&phi.u).scaled(-1.0))
}

/// `L(u, v) = (u, v, 0, −u|_Γ)`.
pub fn lift(phi: &StateR, mesh: &Mesh) -> StateA {
    let (delta, gamma) = canonical_extension(phi, mesh);
    StateA {
        u: phi.u.clone(),
        v: phi.v.clone(),
        delta,
        gamma,
    }
}

/// `Π(u, v, δ, γ) = (u, v)`.
pub fn project(zeta: &StateA) -> StateR {
    zeta.project()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// `‖S_ε(t)ζ₀ − L S₀(t)Πζ₀‖_{H_ε}`
    Lifted,
    /// `‖Π S_ε(t)ζ₀ − S₀(t)Πζ₀‖_{H₀}`
    Projected,
}

/// Initial data of the comparison: `(u₀, u₁)` and the boundary data `δ₀, δ₁`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapData {
    pub u0: Field,
    pub u1: Field,
    pub delta0: BoundaryField,
    pub delta1: BoundaryField,
}

impl GapData {
    pub fn acoustic(&self, mesh: &Mesh, eps: f64) -> Result<StateA> {
        initial_data_a(mesh, &self.u0, &self.u1, self.delta0, self.delta1, eps)
    }

    pub fn robin(&self) -> StateR {
        StateR {
            u: self.u0.clone(),
            v: self.u1.clone(),
        }
    }

    /// `√(ε‖δ₀‖²_Γ + ε²‖δ₁ + u₀|_Γ‖²_Γ)`, the lifted gap at `t = 0`.
    pub fn initial_lifted_gap(&self, mesh: &Mesh, eps: f64) -> f64 {
        let s = self.delta1.add(&mesh.trace(&self.u0));
        (eps * self.delta0.dot(&self.delta0) + eps * eps * s.dot(&s)).sqrt()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapSeries {
    pub eps: f64,
    pub times: Vec<f64>,
    pub lifted: Vec<f64>,
    pub projected: Vec<f64>,
}

impl GapSeries {
    pub fn series(&self, mode: GapMode) -> &[f64] {
        match mode {
            GapMode::Lifted => &self.lifted,
            GapMode::Projected => &self.projected,
        }
    }

    pub fn sup(&self, mode: GapMode) -> f64 {
        self.series(mode).iter().fold(0.0, |m, v| m.max(*v))
    }

    pub fn at_end(&self, mode: GapMode) -> f64 {
        *self.series(mode).last().expect("series holds t = 0")
    }
}

/// Gap series against a precomputed Robin trajectory sampled every step.
fn gap_against(
    sys: &WaveSystem,
    data: &GapData,
    robin: &[State],
    eps: f64,
    t_end: f64,
    dt: f64,
) -> Result<GapSeries> {
    let zeta0 = data.acoustic(&sys.mesh, eps)?;
    let rec = sys.simulate(Problem::Acoustic { eps }, &State::A(zeta0), t_end, dt, 1)?;
    let mut out = GapSeries {
        eps,
        times: rec.times.clone(),
        lifted: Vec::with_capacity(rec.times.len()),
        projected: Vec::with_capacity(rec.times.len()),
    };
    for (sa, sr) in rec.states.iter().zip(robin) {
        let (State::A(a), State::R(r)) = (sa, sr) else {
            return Err(Error::KindMismatch("gap run produced unexpected state kinds".into()));
        };
        let lifted = a.sub(&lift(r, &sys.mesh));
        out.lifted.push(sys.mesh.norm_heps(&lifted, eps)?);
        out.projected.push(sys.mesh.norm_h0(&a.project().sub(r)));
    }
    Ok(out)
}

fn robin_run(sys: &WaveSystem, data: &GapData, t_end: f64, dt: f64) -> Result<Vec<State>> {
    Ok(sys
        .simulate(Problem::Robin, &State::R(data.robin()), t_end, dt, 1)?
        .states)
}

/// Both gap modes for one `ε` over `[0, T]`, sampled every step.
pub fn trajectory_gap(sys: &WaveSystem, data: &GapData, eps: f64, t_end: f64, dt: f64) -> Result<GapSeries> {
    check_epsilon(eps)?;
    let robin = robin_run(sys, data, t_end, dt)?;
    gap_against(sys, data, &robin, eps, t_end, dt)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub eps: f64,
    pub sup_lifted: f64,
    pub sup_projected: f64,
    pub end_lifted: f64,
    pub end_projected: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonSweep {
    /// Sorted by decreasing `ε`.
    pub entries: Vec<SweepEntry>,
    pub series: Vec<GapSeries>,
}

impl EpsilonSweep {
    pub fn eps(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eps).collect()
    }

    pub fn sups(&self, mode: GapMode) -> Vec<f64> {
        self.entries
            .iter()
            .map(|e| match mode {
                GapMode::Lifted => e.sup_lifted,
                GapMode::Projected => e.sup_projected,
            })
            .collect()
    }

    /// Power-law fit of the sup-gap against `ε`.
    pub fn fit(&self, mode: GapMode) -> Result<RateFit> {
        power_law_fit(&self.eps(), &self.sups(mode))
    }

    /// Sup-gap nondecreasing in `ε` up to a relative `band`.
    pub fn monotone(&self, mode: GapMode, band: f64) -> bool {
        // entries run from large to small ε
        self.sups(mode).windows(2).all(|w| w[1] <= w[0] * (1.0 + band))
    }
}

/// Runs the gap for each `ε` in parallel; the Robin run is shared.
pub fn epsilon_sweep(sys: &WaveSystem, data: &GapData, eps_list: &[f64], t_end: f64, dt: f64) -> Result<EpsilonSweep> {
    if eps_list.is_empty() {
        return Err(Error::param("eps", "sweep needs at least one value"));
    }
    for &e in eps_list {
        check_epsilon(e)?;
    }
    let robin = robin_run(sys, data, t_end, dt)?;
    let mut eps_sorted = eps_list.to_vec();
    eps_sorted.sort_by(|a, b| b.total_cmp(a));
    eps_sorted.dedup();
    let results = eps_sorted
        .par_iter()
        .map(|&eps| {
            let start = Instant::now();
            let s = gap_against(sys, data, &robin, eps, t_end, dt)?;
            Ok((s, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<Vec<_>>>()?;
    let entries = results
        .iter()
        .map(|(s, rt)| SweepEntry {
            eps: s.eps,
            sup_lifted: s.sup(GapMode::Lifted),
            sup_projected: s.sup(GapMode::Projected),
            end_lifted: s.at_end(GapMode::Lifted),
            end_projected: s.at_end(GapMode::Projected),
            runtime_s: *rt,
        })
        .collect();
    Ok(EpsilonSweep {
        entries,
        series: results.into_iter().map(|(s, _)| s).collect(),
    })
}
