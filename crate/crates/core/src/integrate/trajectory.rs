use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::model::EnergyBreakdown;

use super::state::{Problem, State};
use super::stepper::{check_dt, failure, WaveSystem};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub problem: Problem,
    pub dt: f64,
    pub stride: usize,
    /// Sample times; the first is 0.
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub energies: Vec<EnergyBreakdown>,
    /// Phase-space norms of the samples.
    pub norms: Vec<f64>,
    /// Per step: `E^{n+1} − E^n + dt·dissipation`.
    pub balance_residuals: Vec<f64>,
    /// Per step: `2(‖v̄‖² + ε‖γ̄‖²_Γ)`.
    pub dissipation: Vec<f64>,
    /// Per step: final Newton residual.
    pub newton_residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotFormat {
    Csv,
    Binary,
}

/// Number of steps `T/dt`, rejecting horizons that are not a whole number of steps.
pub fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    check_dt(dt)?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::param("T", format!("must be finite and positive, got {t_end}")));
    }
    let ratio = t_end / dt;
    let steps = ratio.round();
    if (ratio - steps).abs() > 1e-9 * ratio.max(1.0) || steps < 1.0 {
        return Err(Error::param(
            "T",
            format!("T/dt = {ratio} is not an integer number of steps"),
        ));
    }
    Ok(steps as usize)
}

impl WaveSystem {
    /// Integrates to `t_end`, keeping every `stride`-th state (and the last).
    pub fn simulate(
        &self,
        problem: Problem,
        initial: &State,
        t_end: f64,
        dt: f64,
        stride: usize,
    ) -> Result<TrajectoryRecord> {
        let steps = step_count(t_end, dt)?;
        if stride == 0 {
            return Err(Error::param("stride", "must be at least 1"));
        }
        if let Problem::Acoustic { eps } = problem {
            check_epsilon(eps)?;
        }
        if !initial.is_finite() {
            return Err(Error::param("initial", "state has non-finite entries"));
        }
        let mut rec = TrajectoryRecord {
            problem,
            dt,
            stride,
            times: vec![0.0],
            states: vec![initial.clone()],
            energies: vec![self.energy(problem, initial)?],
            norms: vec![self.norm(problem, initial)?],
            balance_residuals: Vec::with_capacity(steps),
            dissipation: Vec::with_capacity(steps),
            newton_residuals: Vec::with_capacity(steps),
        };
        let mut state = initial.clone();
        let mut e_prev = rec.energies[0];
        for k in 0..steps {
            let t = (k + 1) as f64 * dt;
            let (next, diss, rep) = match (&state, problem) {
                (State::R(s), Problem::Robin) => {
                    let (n, rep) = self
                        .step_r_inner(s, dt, None)
                        .map_err(|r| failure(t, r))?;
                    let d = self.dissipation_r(s, &n);
                    (State::R(n), d, rep)
                }
                (State::A(s), Problem::Acoustic { eps }) => {
                    let (n, rep) = self
                        .step_a_inner(s, eps, dt, None)
                        .map_err(|r| failure(t, r))?;
                    let d = self.dissipation_a(s, &n, eps);
                    (State::A(n), d, rep)
                }
                _ => return Err(Error::KindMismatch("initial state does not match the problem".into())),
            };
            let e = match &next {
                State::R(s) => self.energy_r(s),
                State::A(s) => self.energy_a(s, problem.epsilon().unwrap_or(1.0)),
            };
            rec.balance_residuals.push(e.total - e_prev.total + dt * diss);
            rec.dissipation.push(diss);
            rec.newton_residuals.push(rep.residual);
            e_prev = e;
            if (k + 1) % stride == 0 || k + 1 == steps {
                rec.times.push(t);
                rec.norms.push(self.norm(problem, &next)?);
                rec.energies.push(e);
                rec.states.push(next.clone());
            }
            state = next;
        }
        Ok(rec)
    }
}

impl TrajectoryRecord {
    pub fn n_steps(&self) -> usize {
        self.balance_residuals.len()
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("record holds the initial state")
    }

    pub fn max_balance_residual(&self) -> f64 {
        self.balance_residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Step index that ends at sample `i` (none for the initial sample).
    fn step_of_sample(&self, i: usize) -> Option<usize> {
        if i == 0 {
            None
        } else {
            Some(((self.times[i] / self.dt).round() as usize).saturating_sub(1))
        }
    }

    /// Energies are nonincreasing up to `slack` per step.
    pub fn energy_nonincreasing(&self, slack: f64) -> bool {
        self.energies
            .windows(2)
            .all(|w| w[1].total <= w[0].total + slack)
    }

    /// One row per sample: t, energies, dissipation and balance residual of
    /// the step ending there, and the phase-space norm.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "t",
            "E_total",
            "E_quadratic",
            "E_potential",
            "E_boundary",
            "dissipation",
            "balance_residual",
            "norm",
        ])?;
        for i in 0..self.times.len() {
            let (d, r) = match self.step_of_sample(i) {
                Some(k) => (self.dissipation[k], self.balance_residuals[k]),
                None => (0.0, 0.0),
            };
            let e = &self.energies[i];
            w.write_record(
                [self.times[i], e.total, e.quadratic, e.potential, e.boundary_potential, d, r, self.norms[i]]
                    .iter()
                    .map(|x| format!("{x:e}")),
            )?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(BufWriter::new(f))
    }

    /// Full states per sample. CSV rows are `t, x_0, x_1, …` over the flat
    /// state; binary is little-endian f64 records of the same layout.
    pub fn save_snapshots(&self, path: &Path, format: SnapshotFormat) -> Result<()> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(f);
        match format {
            SnapshotFormat::Csv => {
                let mut w = csv::Writer::from_writer(out);
                for (t, s) in self.times.iter().zip(&self.states) {
                    let mut row = vec![format!("{t:e}")];
                    row.extend(s.to_vec().iter().map(|x| format!("{x:e}")));
                    w.write_record(&row)?;
                }
                w.flush().map_err(|e| Error::io(path, e))?;
            }
            SnapshotFormat::Binary => {
                for (t, s) in self.times.iter().zip(&self.states) {
                    out.write_all(&t.to_le_bytes()).map_err(|e| Error::io(path, e))?;
                    for x in s.to_vec() {
                        out.write_all(&x.to_le_bytes()).map_err(|e| Error::io(path, e))?;
                    }
                }
                out.flush().map_err(|e| Error::io(path, e))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::{SolverOptions, StateR};
    use crate::mesh::Mesh;
    use crate::model::{BoundaryNonlinearity, Nonlinearity};

    #[test]
    fn step_count_validation() {
        assert_eq!(step_count(1.0, 0.1).unwrap(), 10);
        assert_eq!(step_count(5.0, 1e-3).unwrap(), 5000);
        assert!(step_count(1.0, 0.3).is_err());
        assert!(step_count(0.0, 0.1).is_err());
        assert!(step_count(1.0, -0.1).is_err());
    }

    #[test]
    fn sampling_and_lengths() {
        let m = Mesh::new(10, 1.0).unwrap();
        let sys = WaveSystem::new(m.clone(), Nonlinearity::cubic(), BoundaryNonlinearity::zero(), SolverOptions::default());
        let s = State::R(StateR {
            u: m.field_from_fn(|x| x.sin()),
            v: m.field_from_fn(|_| 0.0),
        });
        let rec = sys.simulate(Problem::Robin, &s, 1.0, 0.01, 7).unwrap();
        assert_eq!(rec.n_steps(), 100);
        assert_eq!(rec.times.len(), 1 + 14 + 1);
        assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
        assert!((rec.times.last().unwrap() - 1.0).abs() < 1e-12);
        assert!(rec.energy_nonincreasing(1e-12));
        assert!(rec.dissipation.iter().all(|d| *d >= 0.0));

        let mut buf = Vec::new();
        rec.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,E_total,E_quadratic,E_potential,E_boundary,dissipation,balance_residual,norm"));
        assert_eq!(text.lines().count(), rec.times.len() + 1);
    }

    #[test]
    fn snapshots_round_trip_binary() {
        let m = Mesh::new(4, 1.0).unwrap();
        let sys = WaveSystem::new(m.clone(), Nonlinearity::zero(), BoundaryNonlinearity::zero(), SolverOptions::default());
        let s = State::R(StateR {
            u: m.field_from_fn(|x| x),
            v: m.field_from_fn(|_| 0.0),
        });
        let rec = sys.simulate(Problem::Robin, &s, 0.1, 0.05, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("snap.bin");
        rec.save_snapshots(&p, SnapshotFormat::Binary).unwrap();
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(bytes.len(), 3 * (1 + 10) * 8);
        let first: Vec<f64> = bytes[..8 * 11]
            .chunks(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(first[0], 0.0);
        assert_eq!(&first[1..6], &m.coords()[..]);
        let p = dir.path().join("snap.csv");
        rec.save_snapshots(&p, SnapshotFormat::Csv).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 3);
    }
}
