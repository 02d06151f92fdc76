//! Splitting of Problem (A) into a decaying part and a compact part.
//!
//! With `ψ(s) = f(s) + βs`, the compact part `χ = (w, w_t, θ, θ_t)` solves
//! the acoustic system with nonlinearity `ψ`, source `βu` taken from the full
//! solution and zero data. The remainder `ξ = ζ − χ` then solves the same
//! system with the coupling `ψ(u) − ψ(w)`, no source, and data `ζ₀`.

use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::model::BoundaryNonlinearity;

use super::state::StateA;
use super::stepper::{failure, WaveSystem};
use super::trajectory::step_count;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionRecord {
    pub eps: f64,
    pub beta: f64,
    pub times: Vec<f64>,
    pub full: Vec<StateA>,
    pub chi: Vec<StateA>,
    pub xi: Vec<StateA>,
    pub full_norms: Vec<f64>,
    pub chi_norms: Vec<f64>,
    pub xi_norms: Vec<f64>,
    /// Per step: max-norm residual of the discrete ξ system.
    pub xi_residuals: Vec<f64>,
}

impl DecompositionRecord {
    pub fn max_xi_residual(&self) -> f64 {
        self.xi_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// `sup_{t ≤ T/2} ‖χ‖ ≥ (1 − tol)·sup_t ‖χ‖`.
    pub fn chi_max_stabilized(&self, tol: f64) -> bool {
        let t_half = 0.5 * self.times.last().copied().unwrap_or(0.0);
        let all = self.chi_norms.iter().fold(0.0f64, |m, v| m.max(*v));
        let early = self
            .times
            .iter()
            .zip(&self.chi_norms)
            .filter(|(t, _)| **t <= t_half)
            .fold(0.0f64, |m, (_, v)| m.max(*v));
        early >= (1.0 - tol) * all
    }
}

impl WaveSystem {
    /// Runs the full solution and the compact part side by side.
    pub fn decomposition_run(
        &self,
        zeta0: &StateA,
        eps: f64,
        beta: f64,
        t_end: f64,
        dt: f64,
        stride: usize,
    ) -> Result<DecompositionRecord> {
        check_epsilon(eps)?;
        if !(beta >= self.nl.ell2) {
            return Err(Error::param(
                "beta",
                format!("must be at least l2 = {}, got {beta}", self.nl.ell2),
            ));
        }
        if !self.bnl.is_zero() {
            return Err(Error::param("boundary_nonlinearity", "the splitting requires g = 0"));
        }
        if stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        let steps = step_count(t_end, dt)?;
        let psi = self.nl.with_shift(beta);
        let chi_sys = WaveSystem::new(self.mesh.clone(), psi.clone(), BoundaryNonlinearity::zero(), self.solver);
        let n = self.mesh.n_nodes();

        let mut full = zeta0.clone();
        let mut chi = StateA::zeros(n);
        let mut rec = DecompositionRecord {
            eps,
            beta,
            times: vec![],
            full: vec![],
            chi: vec![],
            xi: vec![],
            full_norms: vec![],
            chi_norms: vec![],
            xi_norms: vec![],
            xi_residuals: Vec::with_capacity(steps),
        };
        let push = |rec: &mut DecompositionRecord, t: f64, full: &StateA, chi: &StateA| {
            let xi = full.sub(chi);
            rec.times.push(t);
            rec.full_norms.push(self.mesh.norm_heps_sq(full, eps).sqrt());
            rec.chi_norms.push(self.mesh.norm_heps_sq(chi, eps).sqrt());
            rec.xi_norms.push(self.mesh.norm_heps_sq(&xi, eps).sqrt());
            rec.full.push(full.clone());
            rec.chi.push(chi.clone());
            rec.xi.push(xi);
        };
        push(&mut rec, 0.0, &full, &chi);

        for k in 0..steps {
            let t = (k + 1) as f64 * dt;
            let (full_next, _) = self
                .step_a_inner(&full, eps, dt, None)
                .map_err(|r| failure(t, r))?;
            let source: Vec<f64> = full
                .u
                .0
                .iter()
                .zip(&full_next.u.0)
                .map(|(a, b)| 0.5 * beta * (a + b))
                .collect();
            let (chi_next, _) = chi_sys
                .step_a_inner(&chi, eps, dt, Some(&source))
                .map_err(|r| failure(t, r))?;

            // discrete ξ system: coupling f̄(u) + βū − ψ̄(w)
            let q: Vec<f64> = (0..n)
                .map(|i| {
                    self.nl.discrete_gradient(full.u.0[i], full_next.u.0[i]) + source[i]
                        - psi.discrete_gradient(chi.u.0[i], chi_next.u.0[i])
                })
                .collect();
            let xi0 = full.sub(&chi);
            let xi1 = full_next.sub(&chi_next);
            let (ru, rb) = self.momentum_residual_a(&xi0, &xi1, &q, [0.0; 2], eps, dt);
            let mut res = ru.iter().chain(&rb).fold(0.0f64, |m, r| m.max(r.abs()));
            // kinematic relations in velocity units
            for i in 0..n {
                let vb = 0.5 * (xi0.v.0[i] + xi1.v.0[i]);
                res = res.max(((xi1.u.0[i] - xi0.u.0[i]) / dt - vb).abs());
            }
            for j in 0..2 {
                let gb = 0.5 * (xi0.gamma.0[j] + xi1.gamma.0[j]);
                res = res.max(((xi1.delta.0[j] - xi0.delta.0[j]) / dt - gb).abs());
            }
            rec.xi_residuals.push(res);

            full = full_next;
            chi = chi_next;
            if (k + 1) % stride == 0 || k + 1 == steps {
                push(&mut rec, t, &full, &chi);
            }
        }
        Ok(rec)
    }
}
