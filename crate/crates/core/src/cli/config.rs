//! TOML experiment configuration.
//!
//! The file is parsed into an all-optional raw form, then resolved against
//! defaults and validated field by field, so a bad value is reported with
//! its dotted key path before any run starts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::integrate::{Problem, SolverOptions, SnapshotFormat};
use crate::mesh::Mesh;
use crate::model::{BoundaryNonlinearity, Nonlinearity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Eigen,
    SweepEpsilon,
    Lipschitz,
    Absorbing,
    Attractor,
    Decompose,
    Check,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::Eigen => "eigen",
            ExperimentKind::SweepEpsilon => "sweep_epsilon",
            ExperimentKind::Lipschitz => "lipschitz",
            ExperimentKind::Absorbing => "absorbing",
            ExperimentKind::Attractor => "attractor",
            ExperimentKind::Decompose => "decompose",
            ExperimentKind::Check => "check",
        }
    }

    fn needs_time(&self) -> bool {
        !matches!(self, ExperimentKind::Eigen | ExperimentKind::Check)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: Option<ExperimentKind>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    mesh: Option<RawMesh>,
    problem: Option<RawProblem>,
    nonlinearity: Option<RawNl>,
    boundary_nonlinearity: Option<RawNl>,
    time: Option<RawTime>,
    solver: Option<RawSolver>,
    constants: Option<RawConstants>,
    initial: Option<RawInitial>,
    output: Option<RawOutput>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    n_cells: Option<usize>,
    length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    kind: Option<String>,
    eps: Option<f64>,
    eps_grid: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNl {
    name: Option<String>,
    param: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t_end: Option<f64>,
    dt: Option<f64>,
    burn_in: Option<f64>,
    stride: Option<usize>,
    fit_start: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol: Option<f64>,
    max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstants {
    eta: Option<f64>,
    m0: Option<f64>,
    m1: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    iota: Option<f64>,
    beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    norm: Option<f64>,
    boundary: Option<f64>,
    count: Option<usize>,
    perturbation: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    snapshots: Option<String>,
    timings: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshConfig {
    pub n_cells: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    /// `None` means Problem (R).
    pub eps: Option<f64>,
    pub eps_grid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NlConfig {
    pub name: String,
    pub param: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeConfig {
    pub t_end: f64,
    pub dt: f64,
    pub burn_in: f64,
    pub stride: usize,
    /// Fit windows start here to skip early transients.
    pub fit_start: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub eta: f64,
    pub m0: f64,
    pub m1: f64,
    pub c1: f64,
    /// `None`: calibrate from random smooth states.
    pub c2: Option<f64>,
    /// `None`: `m₀` for Problem (R).
    pub iota: Option<f64>,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialConfig {
    /// H₀-norm of the random smooth `(u₀, u₁)`.
    pub norm: f64,
    /// Amplitude of the boundary data `δ₀, δ₁`.
    pub boundary: f64,
    pub count: usize,
    /// Relative size of the second state of a Lipschitz pair.
    pub perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub snapshots: Option<SnapshotFormat>,
    /// Wall-clock columns make CSVs nondeterministic, so they are opt-in.
    pub timings: bool,
}

/// Resolved and validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub mesh: MeshConfig,
    pub problem: ProblemConfig,
    pub nonlinearity: NlConfig,
    pub boundary_nonlinearity: NlConfig,
    pub time: TimeConfig,
    pub solver: SolverOptions,
    pub constants: Constants,
    pub initial: InitialConfig,
    pub output: OutputConfig,
    /// Not part of the hash.
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

fn cfg_err(field: &str, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(field, format!("must be finite and positive, got {v}")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(field, format!("must be finite and nonnegative, got {v}")))
    }
}

fn epsilon(field: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(cfg_err(field, format!("must lie in (0, 1], got {v}")))
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let (field, msg) = match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    (format!("line {line}"), e.message().to_string())
                }
                None => ("<document>".to_string(), e.message().to_string()),
            };
            cfg_err(&field, msg)
        })?;
        Self::resolve(raw)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Configuration used by the `check` subcommand.
    pub fn default_check() -> Self {
        Self::resolve(RawConfig {
            experiment: Some(ExperimentKind::Check),
            ..RawConfig::default()
        })
        .expect("built-in defaults are valid")
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let experiment = raw
            .experiment
            .ok_or_else(|| cfg_err("experiment", "missing field"))?;

        let m = raw.mesh.unwrap_or_default();
        let mesh = MeshConfig {
            n_cells: m.n_cells.unwrap_or(100),
            length: positive("mesh.length", m.length.unwrap_or(1.0))?,
        };
        if mesh.n_cells < 8 {
            return Err(cfg_err("mesh.n_cells", format!("must be at least 8, got {}", mesh.n_cells)));
        }

        let p = raw.problem.unwrap_or_default();
        let eps = match p.kind.as_deref().unwrap_or("robin") {
            "robin" | "R" => None,
            "acoustic" | "A" => Some(epsilon(
                "problem.eps",
                p.eps.ok_or_else(|| cfg_err("problem.eps", "required for the acoustic problem"))?,
            )?),
            other => return Err(cfg_err("problem.kind", format!("unknown problem `{other}`"))),
        };
        let eps_grid = p.eps_grid.unwrap_or_default();
        for (i, &e) in eps_grid.iter().enumerate() {
            epsilon(&format!("problem.eps_grid[{i}]"), e)?;
        }
        if experiment == ExperimentKind::SweepEpsilon {
            if eps_grid.len() < 4 {
                return Err(cfg_err("problem.eps_grid", "sweep needs at least 4 values"));
            }
            let (lo, hi) = eps_grid
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(l, h), e| (l.min(*e), h.max(*e)));
            if hi / lo < 100.0 * (1.0 - 1e-9) {
                return Err(cfg_err("problem.eps_grid", "values must span at least two decades"));
            }
        }

        let nl = raw.nonlinearity.unwrap_or_default();
        let nonlinearity = NlConfig {
            name: nl.name.unwrap_or_else(|| "cubic".into()),
            param: nl.param,
        };
        Nonlinearity::builtin(&nonlinearity.name, nonlinearity.param)
            .map_err(|e| cfg_err("nonlinearity", e.to_string()))?;
        let bnl = raw.boundary_nonlinearity.unwrap_or_default();
        let boundary_nonlinearity = NlConfig {
            name: bnl.name.unwrap_or_else(|| "zero".into()),
            param: bnl.param,
        };
        BoundaryNonlinearity::builtin(&boundary_nonlinearity.name, boundary_nonlinearity.param)
            .map_err(|e| cfg_err("boundary_nonlinearity", e.to_string()))?;

        let t = raw.time.unwrap_or_default();
        let time = if experiment.needs_time() {
            let dt = positive("time.dt", t.dt.ok_or_else(|| cfg_err("time.dt", "missing field"))?)?;
            let t_end = positive("time.t_end", t.t_end.ok_or_else(|| cfg_err("time.t_end", "missing field"))?)?;
            crate::integrate::step_count(t_end, dt).map_err(|e| cfg_err("time.t_end", e.to_string()))?;
            TimeConfig {
                t_end,
                dt,
                burn_in: nonnegative("time.burn_in", t.burn_in.unwrap_or(0.0))?,
                stride: t.stride.unwrap_or(1),
                fit_start: nonnegative("time.fit_start", t.fit_start.unwrap_or(1.0))?,
            }
        } else {
            TimeConfig {
                t_end: positive("time.t_end", t.t_end.unwrap_or(1.0))?,
                dt: positive("time.dt", t.dt.unwrap_or(1e-2))?,
                burn_in: 0.0,
                stride: t.stride.unwrap_or(1),
                fit_start: 1.0,
            }
        };
        if time.stride == 0 {
            return Err(cfg_err("time.stride", "must be at least 1"));
        }
        if experiment == ExperimentKind::Attractor && time.burn_in >= time.t_end {
            return Err(cfg_err("time.burn_in", "must be smaller than time.t_end"));
        }

        let s = raw.solver.unwrap_or_default();
        let solver = SolverOptions {
            tol: positive("solver.tol", s.tol.unwrap_or(1e-11))?,
            max_iter: s.max_iter.unwrap_or(50),
        };
        if solver.max_iter == 0 {
            return Err(cfg_err("solver.max_iter", "must be at least 1"));
        }

        let c = raw.constants.unwrap_or_default();
        let constants = Constants {
            eta: nonnegative("constants.eta", c.eta.unwrap_or(0.25))?,
            m0: positive("constants.m0", c.m0.unwrap_or(0.1))?,
            m1: positive("constants.m1", c.m1.unwrap_or(0.1))?,
            c1: positive("constants.c1", c.c1.unwrap_or(0.25))?,
            c2: c.c2.map(|v| positive("constants.c2", v)).transpose()?,
            iota: c.iota.map(|v| positive("constants.iota", v)).transpose()?,
            beta: nonnegative("constants.beta", c.beta.unwrap_or(1.0))?,
        };

        let i = raw.initial.unwrap_or_default();
        let initial = InitialConfig {
            norm: positive("initial.norm", i.norm.unwrap_or(1.0))?,
            boundary: nonnegative("initial.boundary", i.boundary.unwrap_or(0.5))?,
            count: i.count.unwrap_or(4),
            perturbation: positive("initial.perturbation", i.perturbation.unwrap_or(1e-2))?,
        };
        if initial.count == 0 {
            return Err(cfg_err("initial.count", "must be at least 1"));
        }

        let o = raw.output.unwrap_or_default();
        let snapshots = match o.snapshots.as_deref() {
            None | Some("none") => None,
            Some("csv") => Some(SnapshotFormat::Csv),
            Some("binary") => Some(SnapshotFormat::Binary),
            Some(other) => return Err(cfg_err("output.snapshots", format!("expected none, csv or binary, got `{other}`"))),
        };

        Ok(ExperimentConfig {
            experiment,
            seed: raw.seed.unwrap_or(0),
            mesh,
            problem: ProblemConfig { eps, eps_grid },
            nonlinearity,
            boundary_nonlinearity,
            time,
            solver,
            constants,
            initial,
            output: OutputConfig {
                snapshots,
                timings: o.timings.unwrap_or(false),
            },
            out: raw.out,
        })
    }

    /// SHA-256 over the resolved configuration, excluding the output path.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&canonical))
    }

    pub fn problem(&self) -> Problem {
        match self.problem.eps {
            None => Problem::Robin,
            Some(eps) => Problem::Acoustic { eps },
        }
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        Mesh::new(self.mesh.n_cells, self.mesh.length)
    }

    pub fn build_nonlinearity(&self) -> Result<Nonlinearity> {
        Nonlinearity::builtin(&self.nonlinearity.name, self.nonlinearity.param)
    }

    pub fn build_boundary_nonlinearity(&self) -> Result<BoundaryNonlinearity> {
        BoundaryNonlinearity::builtin(&self.boundary_nonlinearity.name, self.boundary_nonlinearity.param)
    }
}
