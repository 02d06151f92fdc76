//! Implicit midpoint stepping with discrete-gradient nonlinearities.
//!
//! The velocity unknowns are eliminated through `v^{n+1} = 2(u^{n+1} − u^n)/dt − v^n`
//! (and likewise `γ` through `δ`), so Newton runs on the displacement
//! unknowns only. For Problem (A) the two boundary unknowns are removed by a
//! Schur complement and every Newton system stays tridiagonal.

use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::linalg::Tridiagonal;
use crate::mesh::{BoundaryField, Field, Mesh};
use crate::model::{energy_a, energy_r, BoundaryNonlinearity, EnergyBreakdown, Nonlinearity};
use crate::operators::stiffness;

use super::state::{Problem, State, StateA, StateR};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Bound on the max-norm of the step residual (velocity units).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-11,
            max_iter: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub residual: f64,
    pub iterations: usize,
}

/// Step output before the caller attaches the failure time.
pub(crate) type StepOutcome<T> = std::result::Result<(T, StepReport), StepReport>;

/// Mesh, nonlinearities and the assembled stiffness needed by the stepper.
#[derive(Debug, Clone)]
pub struct WaveSystem {
    pub mesh: Mesh,
    pub nl: Nonlinearity,
    pub bnl: BoundaryNonlinearity,
    pub solver: SolverOptions,
    stiff: Tridiagonal,
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Newton's method with residual-halving damping on the stacked unknown `z`.
fn newton(
    mut z: Vec<f64>,
    opts: &SolverOptions,
    residual: impl Fn(&[f64]) -> Vec<f64>,
    direction: impl Fn(&[f64], &[f64]) -> Option<Vec<f64>>,
) -> std::result::Result<(Vec<f64>, StepReport), StepReport> {
    let mut r = residual(&z);
    let mut norm = max_abs(&r);
    for it in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok((z, StepReport { residual: norm, iterations: it }));
        }
        if !norm.is_finite() {
            break;
        }
        let Some(dz) = direction(&z, &r) else { break };
        let mut lambda = 1.0;
        let (mut z_new, mut r_new, mut norm_new);
        loop {
            z_new = z.iter().zip(&dz).map(|(a, d)| a + lambda * d).collect::<Vec<_>>();
            r_new = residual(&z_new);
            norm_new = max_abs(&r_new);
            if norm_new < norm || lambda < 1e-6 {
                break;
            }
            lambda *= 0.5;
        }
        let scale = 1.0 + max_abs(&z);
        if !(norm_new < norm) && max_abs(&dz) <= 64.0 * f64::EPSILON * scale {
            // update below roundoff: the residual is at its floating-point floor
            if norm <= 1e3 * opts.tol {
                return Ok((z, StepReport { residual: norm, iterations: it + 1 }));
            }
            break;
        }
        z = z_new;
        r = r_new;
        norm = norm_new;
    }
    if norm <= opts.tol {
        return Ok((z, StepReport { residual: norm, iterations: opts.max_iter }));
    }
    Err(StepReport {
        residual: norm,
        iterations: opts.max_iter,
    })
}

impl WaveSystem {
    pub fn new(mesh: Mesh, nl: Nonlinearity, bnl: BoundaryNonlinearity, solver: SolverOptions) -> Self {
        let stiff = stiffness(&mesh);
        WaveSystem {
            mesh,
            nl,
            bnl,
            solver,
            stiff,
        }
    }

    pub fn with_solver(&self, solver: SolverOptions) -> Self {
        WaveSystem {
            solver,
            ..self.clone()
        }
    }

    pub fn energy(&self, problem: Problem, state: &State) -> Result<EnergyBreakdown> {
        crate::model::energy(problem, state, &self.mesh, &self.nl, &self.bnl)
    }

    pub fn norm(&self, problem: Problem, state: &State) -> Result<f64> {
        match (problem, state) {
            (Problem::Robin, State::R(s)) => Ok(self.mesh.norm_h0(s)),
            (Problem::Acoustic { eps }, State::A(s)) => self.mesh.norm_heps(s, eps),
            _ => Err(Error::KindMismatch("state kind does not match the problem".into())),
        }
    }

    /// One step of either problem.
    pub fn step(&self, problem: Problem, state: &State, dt: f64) -> Result<State> {
        check_dt(dt)?;
        match (problem, state) {
            (Problem::Robin, State::R(s)) => self
                .step_r_inner(s, dt, None)
                .map(|(s, _)| State::R(s))
                .map_err(|rep| failure(0.0, rep)),
            (Problem::Acoustic { eps }, State::A(s)) => {
                check_epsilon(eps)?;
                self.step_a_inner(s, eps, dt, None)
                    .map(|(s, _)| State::A(s))
                    .map_err(|rep| failure(0.0, rep))
            }
            _ => Err(Error::KindMismatch("state kind does not match the problem".into())),
        }
    }

    pub fn step_r(&self, s: &StateR, dt: f64) -> Result<(StateR, StepReport)> {
        check_dt(dt)?;
        self.step_r_inner(s, dt, None).map_err(|rep| failure(0.0, rep))
    }

    pub fn step_a(&self, s: &StateA, eps: f64, dt: f64) -> Result<(StateA, StepReport)> {
        check_dt(dt)?;
        check_epsilon(eps)?;
        self.step_a_inner(s, eps, dt, None).map_err(|rep| failure(0.0, rep))
    }

    /// `(K + B + M)` action divided by the mass, i.e. `(−Δ_R + 1)u`.
    fn robin_operator(&self, u: &[f64]) -> Vec<f64> {
        let w = self.mesh.weights();
        let mut out = self.stiff.matvec(u);
        let [b0, b1] = self.mesh.boundary_indices();
        out[b0] += u[b0];
        out[b1] += u[b1];
        out.iter_mut()
            .zip(w.iter().zip(u))
            .for_each(|(o, (wi, ui))| *o = *o / wi + ui);
        out
    }

    /// `M⁻¹(K + M)u`, the Neumann part of the acoustic volume operator.
    fn neumann_operator(&self, u: &[f64]) -> Vec<f64> {
        let w = self.mesh.weights();
        let mut out = self.stiff.matvec(u);
        out.iter_mut()
            .zip(w.iter().zip(u))
            .for_each(|(o, (wi, ui))| *o = *o / wi + ui);
        out
    }

    /// Momentum residual of one Robin step given both end states and the
    /// evaluated nonlinear term `q` (discrete gradient minus any source).
    pub(crate) fn momentum_residual_r(&self, prev: &StateR, next: &StateR, q: &[f64], dt: f64) -> Vec<f64> {
        let n = prev.n_nodes();
        let ub: Vec<f64> = (0..n).map(|i| 0.5 * (prev.u.0[i] + next.u.0[i])).collect();
        let su = self.robin_operator(&ub);
        (0..n)
            .map(|i| {
                let vb = 0.5 * (prev.v.0[i] + next.v.0[i]);
                (next.v.0[i] - prev.v.0[i]) + dt * (su[i] + vb + q[i])
            })
            .collect()
    }

    /// Volume and boundary momentum residuals of one acoustic step.
    pub(crate) fn momentum_residual_a(
        &self,
        prev: &StateA,
        next: &StateA,
        q: &[f64],
        qb: [f64; 2],
        eps: f64,
        dt: f64,
    ) -> (Vec<f64>, [f64; 2]) {
        let n = prev.n_nodes();
        let w = self.mesh.weights();
        let ub: Vec<f64> = (0..n).map(|i| 0.5 * (prev.u.0[i] + next.u.0[i])).collect();
        let mut su = self.neumann_operator(&ub);
        let gb = [
            0.5 * (prev.gamma.0[0] + next.gamma.0[0]),
            0.5 * (prev.gamma.0[1] + next.gamma.0[1]),
        ];
        for (j, b) in self.mesh.boundary_indices().into_iter().enumerate() {
            su[b] -= gb[j] / w[b];
        }
        let ru: Vec<f64> = (0..n)
            .map(|i| {
                let vb = 0.5 * (prev.v.0[i] + next.v.0[i]);
                (next.v.0[i] - prev.v.0[i]) + dt * (su[i] + vb + q[i])
            })
            .collect();
        let mut rb = [0.0; 2];
        for (j, b) in self.mesh.boundary_indices().into_iter().enumerate() {
            let vb = 0.5 * (prev.v.0[b] + next.v.0[b]);
            let db = 0.5 * (prev.delta.0[j] + next.delta.0[j]);
            rb[j] = (next.gamma.0[j] - prev.gamma.0[j]) + dt * (vb + eps * (db + gb[j] + qb[j]));
        }
        (ru, rb)
    }

    fn interior_term(&self, u0: &[f64], x: &[f64], forcing: Option<&[f64]>) -> Vec<f64> {
        let mut q: Vec<f64> = u0
            .iter()
            .zip(x)
            .map(|(&a, &b)| self.nl.discrete_gradient(a, b))
            .collect();
        if let Some(s) = forcing {
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi -= si);
        }
        q
    }

    fn robin_end_state(prev: &StateR, x: &[f64], dt: f64) -> StateR {
        let v = x
            .iter()
            .zip(prev.u.0.iter().zip(&prev.v.0))
            .map(|(xi, (ui, vi))| 2.0 * (xi - ui) / dt - vi)
            .collect();
        StateR {
            u: Field(x.to_vec()),
            v: Field(v),
        }
    }

    fn acoustic_end_state(prev: &StateA, z: &[f64], dt: f64) -> StateA {
        let n = prev.n_nodes();
        let r = Self::robin_end_state(&prev.project(), &z[..n], dt);
        let y = [z[n], z[n + 1]];
        let g = [
            2.0 * (y[0] - prev.delta.0[0]) / dt - prev.gamma.0[0],
            2.0 * (y[1] - prev.delta.0[1]) / dt - prev.gamma.0[1],
        ];
        StateA {
            u: r.u,
            v: r.v,
            delta: BoundaryField(y),
            gamma: BoundaryField(g),
        }
    }

    /// Newton Jacobian of the eliminated volume residual, before any Schur term.
    fn volume_jacobian(&self, u0: &[f64], x: &[f64], dt: f64, robin: bool) -> Tridiagonal {
        let w = self.mesh.weights();
        let mut j = self.stiff.row_scaled(w).scaled(0.5 * dt);
        let base = 2.0 / dt + 1.0 + 0.5 * dt;
        for i in 0..j.dim() {
            j.diag[i] += base + dt * self.nl.discrete_gradient_db(u0[i], x[i]);
        }
        if robin {
            for b in self.mesh.boundary_indices() {
                j.diag[b] += 0.5 * dt / w[b];
            }
        }
        j
    }

    pub(crate) fn step_r_inner(&self, prev: &StateR, dt: f64, forcing: Option<&[f64]>) -> StepOutcome<StateR> {
        let z0: Vec<f64> = prev
            .u
            .0
            .iter()
            .zip(&prev.v.0)
            .map(|(u, v)| u + dt * v)
            .collect();
        let residual = |x: &[f64]| {
            let next = Self::robin_end_state(prev, x, dt);
            let q = self.interior_term(&prev.u.0, x, forcing);
            self.momentum_residual_r(prev, &next, &q, dt)
        };
        let direction = |x: &[f64], r: &[f64]| {
            let j = self.volume_jacobian(&prev.u.0, x, dt, true);
            let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            j.solve(&rhs)
        };
        let (x, rep) = newton(z0, &self.solver, residual, direction)?;
        Ok((Self::robin_end_state(prev, &x, dt), rep))
    }

    pub(crate) fn step_a_inner(
        &self,
        prev: &StateA,
        eps: f64,
        dt: f64,
        forcing: Option<&[f64]>,
    ) -> StepOutcome<StateA> {
        let n = prev.n_nodes();
        let w = self.mesh.weights();
        let bidx = self.mesh.boundary_indices();
        let mut z0: Vec<f64> = prev
            .u
            .0
            .iter()
            .zip(&prev.v.0)
            .map(|(u, v)| u + dt * v)
            .collect();
        z0.push(prev.delta.0[0] + dt * prev.gamma.0[0]);
        z0.push(prev.delta.0[1] + dt * prev.gamma.0[1]);

        let residual = |z: &[f64]| {
            let next = Self::acoustic_end_state(prev, z, dt);
            let q = self.interior_term(&prev.u.0, &z[..n], forcing);
            let qb = [
                self.bnl.discrete_gradient(prev.delta.0[0], z[n]),
                self.bnl.discrete_gradient(prev.delta.0[1], z[n + 1]),
            ];
            let (mut ru, rb) = self.momentum_residual_a(prev, &next, &q, qb, eps, dt);
            ru.extend_from_slice(&rb);
            ru
        };
        let direction = |z: &[f64], r: &[f64]| {
            let mut j = self.volume_jacobian(&prev.u.0, &z[..n], dt, false);
            let mut rhs: Vec<f64> = r[..n].iter().map(|v| -v).collect();
            let mut d = [0.0; 2];
            for (k, &b) in bidx.iter().enumerate() {
                d[k] = 2.0 / dt
                    + 0.5 * eps * dt
                    + eps
                    + eps * dt * self.bnl.discrete_gradient_db(prev.delta.0[k], z[n + k]);
                j.diag[b] += 1.0 / (w[b] * d[k]);
                rhs[b] -= r[n + k] / (w[b] * d[k]);
            }
            let mut dx = j.solve(&rhs)?;
            for (k, &b) in bidx.iter().enumerate() {
                let dy = (-r[n + k] - dx[b]) / d[k];
                dx.push(dy);
            }
            Some(dx)
        };
        let (z, rep) = newton(z0, &self.solver, residual, direction)?;
        Ok((Self::acoustic_end_state(prev, &z, dt), rep))
    }

    /// `2(‖v̄‖² + ε‖γ̄‖²_Γ)` over one step.
    pub(crate) fn dissipation_r(&self, prev: &StateR, next: &StateR) -> f64 {
        let vb = prev.v.add(&next.v).scaled(0.5);
        2.0 * self.mesh.l2(&vb, &vb)
    }

    pub(crate) fn dissipation_a(&self, prev: &StateA, next: &StateA, eps: f64) -> f64 {
        let vb = prev.v.add(&next.v).scaled(0.5);
        let gb = prev.gamma.add(&next.gamma).scaled(0.5);
        2.0 * (self.mesh.l2(&vb, &vb) + eps * gb.dot(&gb))
    }

    pub(crate) fn energy_r(&self, s: &StateR) -> EnergyBreakdown {
        energy_r(&self.mesh, s, &self.nl)
    }

    pub(crate) fn energy_a(&self, s: &StateA, eps: f64) -> EnergyBreakdown {
        energy_a(&self.mesh, s, eps, &self.nl, &self.bnl)
    }
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::param("dt", format!("must be finite and positive, got {dt}")))
    }
}

pub(crate) fn failure(time: f64, rep: StepReport) -> Error {
    Error::NewtonFailure {
        time,
        residual: rep.residual,
        iterations: rep.iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn system(n: usize, nl: Nonlinearity, bnl: BoundaryNonlinearity) -> WaveSystem {
        WaveSystem::new(Mesh::new(n, 1.0).unwrap(), nl, bnl, SolverOptions::default())
    }

    fn smooth(m: &Mesh, a: f64, k: f64) -> Field {
        m.field_from_fn(|x| a * (k * x).cos() + 0.3 * a * x)
    }

    #[test]
    fn zero_state_is_fixed() {
        let sys = system(20, Nonlinearity::cubic(), BoundaryNonlinearity::zero());
        let n = sys.mesh.n_nodes();
        let (s, _) = sys.step_r(&StateR::zeros(n), 1e-2).unwrap();
        assert_eq!(s, StateR::zeros(n));
        let (s, _) = sys.step_a(&StateA::zeros(n), 0.3, 1e-2).unwrap();
        assert_eq!(s, StateA::zeros(n));
    }

    #[test]
    fn robin_step_balances_energy() {
        let sys = system(50, Nonlinearity::cubic(), BoundaryNonlinearity::zero());
        let m = &sys.mesh;
        let mut s = StateR {
            u: smooth(m, 1.5, 2.0),
            v: smooth(m, -0.5, 3.0),
        };
        let dt = 1e-2;
        for _ in 0..20 {
            let (next, rep) = sys.step_r(&s, dt).unwrap();
            assert!(rep.residual <= 1e-11);
            let bal = sys.energy_r(&next).total - sys.energy_r(&s).total + dt * sys.dissipation_r(&s, &next);
            assert!(bal.abs() <= 1e-10, "{bal}");
            s = next;
        }
    }

    #[test]
    fn acoustic_step_balances_energy_with_boundary_nonlinearity() {
        let sys = system(
            40,
            Nonlinearity::cubic_minus_linear(0.5).unwrap(),
            BoundaryNonlinearity::bounded_sine(0.8).unwrap(),
        );
        let m = &sys.mesh;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for &eps in &[1.0, 0.2, 0.01] {
            let mut s = StateA {
                u: smooth(m, rng.gen_range(0.5..2.0), 2.0),
                v: smooth(m, rng.gen_range(-1.0..1.0), 1.0),
                delta: BoundaryField([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]),
                gamma: BoundaryField([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]),
            };
            let dt = 5e-3;
            for _ in 0..20 {
                let (next, _) = sys.step_a(&s, eps, dt).unwrap();
                let bal = sys.energy_a(&next, eps).total - sys.energy_a(&s, eps).total
                    + dt * sys.dissipation_a(&s, &next, eps);
                assert!(bal.abs() <= 1e-10, "eps {eps}: {bal}");
                s = next;
            }
        }
    }

    #[test]
    fn kind_mismatch_and_bad_dt() {
        let sys = system(10, Nonlinearity::zero(), BoundaryNonlinearity::zero());
        let n = sys.mesh.n_nodes();
        let r = State::R(StateR::zeros(n));
        assert!(sys.step(Problem::Acoustic { eps: 0.5 }, &r, 0.1).is_err());
        assert!(sys.step(Problem::Robin, &r, 0.0).is_err());
        assert!(sys.step(Problem::Robin, &r, f64::NAN).is_err());
        let a = State::A(StateA::zeros(n));
        assert!(sys.step(Problem::Acoustic { eps: 1.5 }, &a, 0.1).is_err());
    }

    #[test]
    fn newton_failure_is_reported() {
        let sys = system(10, Nonlinearity::cubic(), BoundaryNonlinearity::zero()).with_solver(SolverOptions {
            tol: 1e-11,
            max_iter: 1,
        });
        let m = &sys.mesh;
        let s = StateR {
            u: smooth(m, 5.0, 2.0),
            v: smooth(m, 3.0, 1.0),
        };
        match sys.step_r(&s, 0.1) {
            Err(Error::NewtonFailure { residual, .. }) => assert!(residual > 1e-11),
            other => panic!("expected failure, got {other:?}"),
        }
    }
}
