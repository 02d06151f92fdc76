//! Empirical Lipschitz growth of the semiflows.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Problem, State, WaveSystem};

use super::fit::RateFit;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LipschitzReport {
    /// Smallest `ν` with `ln r(t) ≤ νt` at every sample of every pair.
    pub nu_hat: f64,
    /// Largest per-pair least-squares slope of `ln r(t)` through the origin.
    pub nu_lsq: f64,
    /// Samples with `r(t) > e^{ν̂t}(1 + 1e-6)`.
    pub violations: usize,
    /// Largest `r(t) e^{−ν̂t} − 1` over all samples.
    pub worst_excess: f64,
    pub times: Vec<f64>,
    /// `r(t)` per pair.
    pub ratios: Vec<Vec<f64>>,
    pub fit: RateFit,
}

/// Runs each pair and fits `r(t) = ‖S(t)x − S(t)y‖/‖x − y‖ ≤ e^{ν̂t}`.
pub fn lipschitz_fit(
    sys: &WaveSystem,
    problem: Problem,
    pairs: &[(State, State)],
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<LipschitzReport> {
    if pairs.is_empty() {
        return Err(Error::param("pairs", "need at least one pair"));
    }
    let diff_norm = |a: &State, b: &State| -> Result<f64> {
        match (a, b) {
            (State::R(x), State::R(y)) => sys.norm(problem, &State::R(x.sub(y))),
            (State::A(x), State::A(y)) => sys.norm(problem, &State::A(x.sub(y))),
            _ => Err(Error::KindMismatch("pair mixes state kinds".into())),
        }
    };
    for (a, b) in pairs {
        if diff_norm(a, b)? == 0.0 {
            return Err(Error::param("pairs", "initial states of a pair coincide"));
        }
    }
    let runs = pairs
        .par_iter()
        .map(|(a, b)| {
            let ra = sys.simulate(problem, a, t_end, dt, stride)?;
            let rb = sys.simulate(problem, b, t_end, dt, stride)?;
            let d0 = diff_norm(a, b)?;
            let r = ra
                .states
                .iter()
                .zip(&rb.states)
                .map(|(x, y)| Ok(diff_norm(x, y)? / d0))
                .collect::<Result<Vec<f64>>>()?;
            Ok((ra.times, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let times = runs[0].0.clone();
    let ratios: Vec<Vec<f64>> = runs.into_iter().map(|(_, r)| r).collect();

    let mut nu_hat = f64::NEG_INFINITY;
    let mut nu_lsq = f64::NEG_INFINITY;
    let mut samples = 0;
    let mut sq = 0.0;
    for r in &ratios {
        let (mut stl, mut stt) = (0.0, 0.0);
        for (&t, &ri) in times.iter().zip(r) {
            if t > 0.0 {
                let l = ri.ln();
                nu_hat = nu_hat.max(l / t);
                stl += t * l;
                stt += t * t;
                samples += 1;
            }
        }
        nu_lsq = nu_lsq.max(stl / stt);
    }
    let mut violations = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    for r in &ratios {
        for (&t, &ri) in times.iter().zip(r) {
            let bound = (nu_hat * t).exp();
            worst_excess = worst_excess.max(ri / bound - 1.0);
            if ri > bound * (1.0 + 1e-6) {
                violations += 1;
            }
        }
    }
    for r in &ratios {
        for (&t, &ri) in times.iter().zip(r) {
            if t > 0.0 {
                sq += (ri.ln() - nu_hat * t).powi(2);
            }
        }
    }
    Ok(LipschitzReport {
        nu_hat,
        nu_lsq,
        violations,
        worst_excess,
        fit: RateFit {
            prefactor: 1.0,
            rate: nu_hat,
            residual: (sq / samples.max(1) as f64).sqrt(),
            samples,
        },
        times,
        ratios,
    })
}
