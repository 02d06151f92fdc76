//! Finite point clouds sampled from long-time dynamics.
//!
//! Points are stored as coordinates in which the phase-space norm is
//! Euclidean (see [`Mesh::embed_h0`] and [`Mesh::embed_heps`]), so distances
//! are plain vector norms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{Problem, State, WaveSystem};
use crate::mesh::{Mesh, PhaseSpace};

use super::fit::{linear_fit, RateFit};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CloudMeta {
    pub problem: Option<Problem>,
    pub burn_in: f64,
    pub stride: usize,
    pub description: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cloud {
    pub space: PhaseSpace,
    pub points: Vec<Vec<f64>>,
    /// The sampled states when the cloud comes from a simulation.
    pub states: Vec<State>,
    pub meta: CloudMeta,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl Cloud {
    /// Cloud of raw coordinates, e.g. synthetic test geometry.
    pub fn from_points(space: PhaseSpace, points: Vec<Vec<f64>>, description: &str) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::param("cloud", "must contain at least one point"));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::KindMismatch("cloud points have differing dimensions".into()));
        }
        Ok(Cloud {
            space,
            points,
            states: vec![],
            meta: CloudMeta {
                problem: None,
                burn_in: 0.0,
                stride: 0,
                description: description.to_string(),
            },
        })
    }

    /// Embeds homogeneous states; Robin states need `H0`, acoustic ones `Heps`.
    pub fn from_states(mesh: &Mesh, space: PhaseSpace, states: Vec<State>, meta: CloudMeta) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::param("cloud", "no states collected"));
        }
        let points = states
            .iter()
            .map(|s| match (space, s) {
                (PhaseSpace::H0, State::R(r)) => Ok(mesh.embed_h0(r)),
                (PhaseSpace::Heps(eps), State::A(a)) => Ok(mesh.embed_heps(a, eps)),
                _ => Err(Error::KindMismatch("state kind does not match the cloud space".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cloud {
            space,
            points,
            states,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn norms(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.iter().map(|x| x * x).sum::<f64>().sqrt()).collect()
    }

    pub fn max_norm(&self) -> f64 {
        self.norms().into_iter().fold(0.0, f64::max)
    }
}

/// Simulates every initial state and keeps the samples with `t ≥ burn_in`.
pub fn omega_cloud(
    sys: &WaveSystem,
    problem: Problem,
    initial: &[State],
    burn_in: f64,
    t_end: f64,
    stride: usize,
    dt: f64,
) -> Result<Cloud> {
    if initial.is_empty() {
        return Err(Error::param("initial", "need at least one initial state"));
    }
    if !(burn_in >= 0.0 && burn_in < t_end) {
        return Err(Error::param("burn_in", format!("must lie in [0, T), got {burn_in}")));
    }
    let runs = initial
        .par_iter()
        .map(|s| sys.simulate(problem, s, t_end, dt, stride))
        .collect::<Result<Vec<_>>>()?;
    let tol = 1e-9 * dt;
    let states: Vec<State> = runs
        .into_iter()
        .flat_map(|rec| {
            rec.times
                .into_iter()
                .zip(rec.states)
                .filter(|(t, _)| *t >= burn_in - tol)
                .map(|(_, s)| s)
                .collect::<Vec<_>>()
        })
        .collect();
    let space = match problem {
        Problem::Robin => PhaseSpace::H0,
        Problem::Acoustic { eps } => PhaseSpace::Heps(eps),
    };
    let meta = CloudMeta {
        problem: Some(problem),
        burn_in,
        stride,
        description: format!("{} initial states, T = {t_end}, dt = {dt}", initial.len()),
    };
    Cloud::from_states(&sys.mesh, space, states, meta)
}

/// `sup_{a∈A} inf_{b∈B} ‖a − b‖` by exhaustive pairing.
pub fn hausdorff_semidist(a: &Cloud, b: &Cloud) -> Result<f64> {
    if a.space != b.space {
        return Err(Error::KindMismatch(format!(
            "clouds live in different spaces: {:?} vs {:?}",
            a.space, b.space
        )));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("cloud", "must be nonempty"));
    }
    if a.points[0].len() != b.points[0].len() {
        return Err(Error::KindMismatch("clouds have differing dimensions".into()));
    }
    Ok(a.points
        .par_iter()
        .map(|p| b.points.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max))
}

/// Number of balls of radius `r` in a farthest-point greedy cover.
pub fn greedy_cover_count(points: &[Vec<f64>], r: f64) -> usize {
    if points.is_empty() {
        return 0;
    }
    let mut nearest: Vec<f64> = points.iter().map(|p| dist(p, &points[0])).collect();
    let mut count = 1;
    loop {
        let (far, &d) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        if d <= r {
            return count;
        }
        count += 1;
        let c = points[far].clone();
        nearest
            .iter_mut()
            .zip(points)
            .for_each(|(n, p)| *n = n.min(dist(p, &c)));
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoxCounting {
    pub fit: RateFit,
    pub counts: Vec<usize>,
    /// All points coincide; the dimension is reported as 0.
    pub degenerate: bool,
}

/// Slope of `ln μ(r)` against `−ln r`.
pub fn box_counting_dim(cloud: &Cloud, radii: &[f64]) -> Result<BoxCounting> {
    if radii.len() < 3 {
        return Err(Error::param("radii", "need at least 3 radii"));
    }
    let (lo, hi) = radii
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(l, h), r| (l.min(*r), h.max(*r)));
    if !(lo > 0.0) || hi / lo < 10.0 - 1e-9 {
        return Err(Error::param("radii", "must be positive and span a decade"));
    }
    let spread = cloud
        .points
        .iter()
        .map(|p| dist(p, &cloud.points[0]))
        .fold(0.0, f64::max);
    if spread == 0.0 {
        return Ok(BoxCounting {
            fit: RateFit {
                prefactor: 1.0,
                rate: 0.0,
                residual: 0.0,
                samples: radii.len(),
            },
            counts: vec![1; radii.len()],
            degenerate: true,
        });
    }
    if cloud.len() < 10 {
        return Err(Error::param("cloud", "need at least 10 points"));
    }
    let counts: Vec<usize> = radii.par_iter().map(|&r| greedy_cover_count(&cloud.points, r)).collect();
    let x: Vec<f64> = radii.iter().map(|r| -r.ln()).collect();
    let y: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (a, b, rms) = linear_fit(&x, &y)?;
    Ok(BoxCounting {
        fit: RateFit {
            prefactor: a.exp(),
            rate: b,
            residual: rms,
            samples: radii.len(),
        },
        counts,
        degenerate: false,
    })
}
