//! Experiment execution and the run summary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    absorbing_spec, acoustic_entry_time_specialized, box_counting_dim, epsilon_sweep, exp_attraction_fit,
    hausdorff_semidist, invariance_check, lift, lipschitz_fit, omega_cloud, AbsorbingParams, Cloud, CloudMeta,
    GapData, GapMode,
};
use crate::error::{Error, Result};
use crate::integrate::{initial_data_a, Problem, State, WaveSystem};
use crate::mesh::{BoundaryField, Field, Mesh, PhaseSpace};
use crate::model::calibrate_c2;
use crate::operators::{
    eigenpairs, robin_lambda1_exact, stiffness, tridiagonal_to_dense, write_triplets, Generator,
};
use crate::random::{rng, SmoothSampler};

use super::config::{ExperimentConfig, ExperimentKind};
use super::plot::{emit_plot_data, PlotInput, PlotStyle};

/// Written as `summary.json`; maps serialize with sorted keys.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub wall_time_s: f64,
    pub pass: bool,
    pub metrics: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
}

impl RunSummary {
    /// 0 on pass, 2 on a failed threshold, 1 on error.
    pub fn exit_code(&self) -> i32 {
        if self.error.is_some() {
            1
        } else if self.pass {
            0
        } else {
            2
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the configured output directory.
    pub out: Option<PathBuf>,
    pub dump_matrices: bool,
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    dir: PathBuf,
    metrics: BTreeMap<String, f64>,
    flags: BTreeMap<String, bool>,
    artifacts: Vec<String>,
}

impl Ctx<'_> {
    fn path(&mut self, name: &str) -> PathBuf {
        self.artifacts.push(name.to_string());
        self.dir.join(name)
    }

    fn metric(&mut self, name: &str, v: f64) {
        self.metrics.insert(name.to_string(), v);
    }

    fn flag(&mut self, name: &str, v: bool) {
        self.flags.insert(name.to_string(), v);
    }

    fn system(&self) -> Result<WaveSystem> {
        Ok(WaveSystem::new(
            self.cfg.build_mesh()?,
            self.cfg.build_nonlinearity()?,
            self.cfg.build_boundary_nonlinearity()?,
            self.cfg.solver,
        ))
    }

    fn csv(&mut self, name: &str) -> Result<csv::Writer<BufWriter<File>>> {
        let path = self.path(name);
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        Ok(csv::Writer::from_writer(BufWriter::new(f)))
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn finish<W: std::io::Write>(mut w: csv::Writer<W>) -> Result<()> {
    w.flush().map_err(|e| Error::io("<csv>", e))
}

/// Runs the configured experiment, writing outputs and `summary.json` into
/// the output directory. Errors are recorded in the summary before returning.
pub fn run(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunSummary> {
    let start = Instant::now();
    let dir = opts
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut ctx = Ctx {
        cfg,
        dir: dir.clone(),
        metrics: BTreeMap::new(),
        flags: BTreeMap::new(),
        artifacts: Vec::new(),
    };
    let mut outcome = if opts.dump_matrices { dump_matrices(&mut ctx) } else { Ok(()) };
    if outcome.is_ok() {
        outcome = match cfg.experiment {
            ExperimentKind::Simulate => simulate(&mut ctx),
            ExperimentKind::Eigen => eigen(&mut ctx),
            ExperimentKind::SweepEpsilon => sweep(&mut ctx),
            ExperimentKind::Lipschitz => lipschitz(&mut ctx),
            ExperimentKind::Absorbing => absorbing(&mut ctx),
            ExperimentKind::Attractor => attractor(&mut ctx),
            ExperimentKind::Decompose => decompose(&mut ctx),
            ExperimentKind::Check => check(&mut ctx),
        };
    }
    let summary = RunSummary {
        experiment: cfg.experiment.name().to_string(),
        config_hash: cfg.hash(),
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        pass: outcome.is_ok() && ctx.flags.values().all(|v| *v),
        metrics: ctx.metrics,
        flags: ctx.flags,
        artifacts: ctx.artifacts,
        error: outcome.as_ref().err().map(|e| e.to_string()),
    };
    let path = dir.join("summary.json");
    let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::to_writer_pretty(BufWriter::new(f), &summary)?;
    outcome.map(|_| summary)
}

fn dump_matrices(ctx: &mut Ctx) -> Result<()> {
    let mesh = ctx.cfg.build_mesh()?;
    let mut mats = vec![
        ("stiffness.txt", tridiagonal_to_dense(&stiffness(&mesh))),
        ("generator_r.txt", Generator::robin(&mesh).matrix),
    ];
    if let Some(eps) = ctx.cfg.problem.eps {
        mats.push(("generator_a.txt", Generator::acoustic(&mesh, eps)?.matrix));
    }
    let sub = ctx.dir.join("matrices");
    fs::create_dir_all(&sub).map_err(|e| Error::io(&sub, e))?;
    for (name, m) in mats {
        let path = ctx.path(&format!("matrices/{name}"));
        let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_triplets(&m, BufWriter::new(f)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Seeded initial state of the configured problem with the configured norm.
fn initial_state<R: Rng>(sampler: &SmoothSampler, rng: &mut R, problem: Problem, norm: f64, b: f64) -> Result<State> {
    Ok(match problem {
        Problem::Robin => State::R(sampler.state_r(rng, norm)),
        Problem::Acoustic { eps } => State::A(sampler.state_a(rng, norm, b, eps)?),
    })
}

fn simulate(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sys = ctx.system()?;
    let sampler = SmoothSampler::new(&sys.mesh)?;
    let problem = cfg.problem();
    let x0 = initial_state(&sampler, &mut rng(cfg.seed), problem, cfg.initial.norm, cfg.initial.boundary)?;
    let rec = sys.simulate(problem, &x0, cfg.time.t_end, cfg.time.dt, cfg.time.stride)?;
    let p = ctx.path("trajectory.csv");
    rec.save_csv(&p)?;
    let p = ctx.path("energy.dat");
    emit_plot_data(PlotInput::Trajectory(&rec), PlotStyle::Energy, &p)?;
    if let Some(fmt) = cfg.output.snapshots {
        let name = match fmt {
            crate::integrate::SnapshotFormat::Csv => "snapshots.csv",
            crate::integrate::SnapshotFormat::Binary => "snapshots.bin",
        };
        let p = ctx.path(name);
        rec.save_snapshots(&p, fmt)?;
    }
    let bal = rec.max_balance_residual();
    ctx.metric("max_balance_residual", bal);
    ctx.metric("initial_energy", rec.energies[0].total);
    ctx.metric("final_energy", rec.energies.last().map(|e| e.total).unwrap_or(f64::NAN));
    ctx.metric("final_norm", rec.norms.last().copied().unwrap_or(f64::NAN));
    ctx.metric("steps", rec.n_steps() as f64);
    ctx.flag("balance_within_10_tol", bal <= 10.0 * cfg.solver.tol);
    ctx.flag("dissipation_nonnegative", rec.dissipation.iter().all(|d| *d >= 0.0));
    Ok(())
}

fn eigen(ctx: &mut Ctx) -> Result<()> {
    let mesh = ctx.cfg.build_mesh()?;
    let k = 10.min(mesh.n_nodes());
    let res = eigenpairs(&mesh, k)?;
    let mut w = ctx.csv("eigen.csv")?;
    w.write_record(["j", "lambda", "residual"])?;
    for (j, (l, r)) in res.values.iter().zip(&res.residuals).enumerate() {
        w.write_record([(j + 1).to_string(), num(*l), num(*r)])?;
    }
    finish(w)?;
    let exact = robin_lambda1_exact(mesh.length());
    let rel = ((res.lambda1() - exact) / exact).abs();
    let max_res = res.residuals.iter().fold(0.0f64, |m, r| m.max(*r));
    ctx.metric("lambda1", res.lambda1());
    ctx.metric("lambda1_continuous", exact);
    ctx.metric("lambda1_rel_error", rel);
    ctx.metric("poincare_constant", res.poincare_constant());
    ctx.metric("max_residual", max_res);
    ctx.flag("residuals_le_1e-10", max_res <= 1e-10);
    Ok(())
}

fn sweep(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sys = ctx.system()?;
    let sampler = SmoothSampler::new(&sys.mesh)?;
    let mut r = rng(cfg.seed);
    let phi = sampler.state_r(&mut r, cfg.initial.norm);
    let b = cfg.initial.boundary;
    let mut bf = || BoundaryField([r.gen_range(-b..=b), r.gen_range(-b..=b)]);
    let data = GapData {
        u0: phi.u,
        u1: phi.v,
        delta0: bf(),
        delta1: bf(),
    };
    let sw = epsilon_sweep(&sys, &data, &cfg.problem.eps_grid, cfg.time.t_end, cfg.time.dt)?;
    let mut w = ctx.csv("sweep.csv")?;
    w.write_record(["eps", "sup_gap", "gap_at_T", "runtime", "sup_gap_H0", "gap_at_T_H0"])?;
    for e in &sw.entries {
        let rt = if cfg.output.timings { num(e.runtime_s) } else { String::new() };
        w.write_record([num(e.eps), num(e.sup_lifted), num(e.end_lifted), rt, num(e.sup_projected), num(e.end_projected)])?;
    }
    finish(w)?;
    for (i, s) in sw.series.iter().enumerate() {
        let p = ctx.path(&format!("gap_{i}.dat"));
        emit_plot_data(PlotInput::Gap(s), PlotStyle::Gap, &p)?;
    }
    for (mode, tag) in [(GapMode::Lifted, ""), (GapMode::Projected, "_projected")] {
        let fit = sw.fit(mode)?;
        ctx.metric(&format!("rho_hat{tag}"), fit.rate);
        ctx.metric(&format!("m_hat{tag}"), fit.prefactor);
        ctx.metric(&format!("fit_rms{tag}"), fit.residual);
        ctx.flag(&format!("rho_ge_0.45{tag}"), fit.rate >= 0.45);
        ctx.flag(&format!("rms_le_0.3{tag}"), fit.residual <= 0.3);
        ctx.flag(&format!("monotone{tag}"), sw.monotone(mode, 0.1));
    }
    Ok(())
}

fn lipschitz(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sys = ctx.system()?;
    let sampler = SmoothSampler::new(&sys.mesh)?;
    let problem = cfg.problem();
    let mut r = rng(cfg.seed);
    let (norm, b, pert) = (cfg.initial.norm, cfg.initial.boundary, cfg.initial.perturbation);
    let mut pairs = Vec::with_capacity(cfg.initial.count);
    for _ in 0..cfg.initial.count {
        let x = initial_state(&sampler, &mut r, problem, norm, b)?;
        let d = initial_state(&sampler, &mut r, problem, norm * pert, b * pert)?;
        let y = match (&x, &d) {
            (State::R(x), State::R(d)) => State::R(x.add(d)),
            (State::A(x), State::A(d)) => State::A(x.add(d)),
            _ => unreachable!("both states come from the same problem"),
        };
        pairs.push((x, y));
    }
    let rep = lipschitz_fit(&sys, problem, &pairs, cfg.time.t_end, cfg.time.dt, cfg.time.stride)?;
    let mut w = ctx.csv("lipschitz.csv")?;
    let mut header = vec!["t".to_string()];
    header.extend((0..rep.ratios.len()).map(|i| format!("r_{i}")));
    w.write_record(&header)?;
    for (k, t) in rep.times.iter().enumerate() {
        let mut row = vec![num(*t)];
        row.extend(rep.ratios.iter().map(|r| num(r[k])));
        w.write_record(&row)?;
    }
    finish(w)?;
    ctx.metric("nu_hat", rep.nu_hat);
    ctx.metric("nu_lsq", rep.nu_lsq);
    ctx.metric("violations", rep.violations as f64);
    ctx.metric("worst_excess", rep.worst_excess);
    ctx.flag("no_violations", rep.violations == 0);
    Ok(())
}

fn absorbing(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sys = ctx.system()?;
    let sampler = SmoothSampler::new(&sys.mesh)?;
    let problem = cfg.problem();
    let mut r = rng(cfg.seed);
    let c = &cfg.constants;
    let c2 = match c.c2 {
        Some(v) => v,
        None => {
            let dirs: Vec<_> = (0..50).map(|_| sampler.state_r(&mut r, 1.0)).collect();
            calibrate_c2(&sys.mesh, &sys.nl, &dirs)
        }
    };
    let params = AbsorbingParams {
        c1: c.c1,
        c2,
        eta: c.eta,
        m0: c.m0,
        m1: c.m1,
        kappa_f: sys.nl.kappa_f,
        kappa_g: sys.bnl.kappa_g,
        iota: c.iota.unwrap_or(c.m0),
    };
    let spec = absorbing_spec(&params, cfg.problem.eps, cfg.initial.norm)?;
    ctx.metric("c2", c2);
    ctx.metric("radius", spec.radius);
    ctx.metric("radius_sq", spec.radius_sq);
    if let Some(t) = spec.entry_time {
        ctx.metric("entry_time_bound", t);
    }
    if let Some(eps) = cfg.problem.eps {
        if let Some(t) = acoustic_entry_time_specialized(&params, eps, cfg.initial.norm)? {
            ctx.metric("entry_time_specialized", t);
        }
    }
    let n = cfg.initial.count;
    let initial = (0..n)
        .map(|i| {
            let norm = cfg.initial.norm * (i + 1) as f64 / n as f64;
            initial_state(&sampler, &mut r, problem, norm, cfg.initial.boundary)
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = initial
        .par_iter()
        .map(|x| {
            let rec = sys.simulate(problem, x, cfg.time.t_end, cfg.time.dt, cfg.time.stride)?;
            Ok((rec.norms[0], invariance_check(&rec.times, &rec.norms, spec.radius), *rec.norms.last().unwrap()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut w = ctx.csv("absorbing.csv")?;
    w.write_record(["ic", "initial_norm", "entry_time", "violations", "final_norm"])?;
    for (i, (n0, rep, nf)) in reports.iter().enumerate() {
        let et = rep.entry_time.map(num).unwrap_or_default();
        w.write_record([i.to_string(), num(*n0), et, rep.violations.to_string(), num(*nf)])?;
    }
    finish(w)?;
    let worst_entry = reports.iter().filter_map(|r| r.1.entry_time).fold(0.0f64, f64::max);
    let violations: usize = reports.iter().map(|r| r.1.violations).sum();
    ctx.metric("latest_entry", worst_entry);
    ctx.metric("violations", violations as f64);
    ctx.flag("all_entered", reports.iter().all(|r| r.1.entry_time.is_some()));
    ctx.flag("no_violations", violations == 0);
    Ok(())
}

/// Clouds whose semidistance falls below this have collapsed onto the same
/// set as far as the sampling can tell.
const COLLAPSE_TOL: f64 = 1e-6;

fn attractor(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sys = ctx.system()?;
    let sampler = SmoothSampler::new(&sys.mesh)?;
    let problem = cfg.problem();
    let t = &cfg.time;
    let mut r = rng(cfg.seed);
    let data: Vec<_> = (0..cfg.initial.count).map(|_| sampler.state_r(&mut r, cfg.initial.norm)).collect();
    let initial = data
        .iter()
        .map(|phi| {
            Ok(match problem {
                Problem::Robin => State::R(phi.clone()),
                Problem::Acoustic { eps } => State::A(initial_data_a(
                    &sys.mesh,
                    &phi.u,
                    &phi.v,
                    BoundaryField::default(),
                    BoundaryField::default(),
                    eps,
                )?),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cloud = omega_cloud(&sys, problem, &initial, t.burn_in, t.t_end, t.stride, t.dt)?;
    let p = ctx.path("cloud.dat");
    emit_plot_data(PlotInput::Cloud(&cloud, &sys.mesh), PlotStyle::Cloud, &p)?;
    ctx.metric("cloud_size", cloud.len() as f64);
    ctx.metric("max_norm", cloud.max_norm());
    let scale = cloud.max_norm();
    if cloud.len() >= 10 && scale > 0.0 {
        let radii: Vec<f64> = (0..5).map(|i| scale * 1e-2 * 10f64.powf(i as f64 / 4.0)).collect();
        let bc = box_counting_dim(&cloud, &radii)?;
        ctx.metric("box_dimension", bc.fit.rate);
    }

    if !cfg.problem.eps_grid.is_empty() {
        let robin_initial: Vec<State> = data.iter().cloned().map(State::R).collect();
        let c0 = omega_cloud(&sys, Problem::Robin, &robin_initial, t.burn_in, t.t_end, t.stride, t.dt)?;
        let mut grid = cfg.problem.eps_grid.clone();
        grid.sort_by(|a, b| b.total_cmp(a));
        let mut w = ctx.csv("semidistance.csv")?;
        w.write_record(["eps", "semidist"])?;
        let mut dists = Vec::new();
        for eps in grid {
            let ia = data
                .iter()
                .map(|phi| {
                    Ok(State::A(initial_data_a(
                        &sys.mesh,
                        &phi.u,
                        &phi.v,
                        BoundaryField::default(),
                        BoundaryField::default(),
                        eps,
                    )?))
                })
                .collect::<Result<Vec<_>>>()?;
            let ca = omega_cloud(&sys, Problem::Acoustic { eps }, &ia, t.burn_in, t.t_end, t.stride, t.dt)?;
            let lifted: Vec<State> = c0
                .states
                .iter()
                .map(|s| State::A(lift(s.as_r().expect("Robin cloud"), &sys.mesh)))
                .collect();
            let meta = CloudMeta {
                problem: Some(Problem::Acoustic { eps }),
                ..c0.meta.clone()
            };
            let cl = Cloud::from_states(&sys.mesh, PhaseSpace::Heps(eps), lifted, meta)?;
            let d = hausdorff_semidist(&ca, &cl)?;
            w.write_record([num(eps), num(d)])?;
            dists.push(d);
        }
        finish(w)?;
        ctx.metric("semidist_max", dists.iter().fold(0.0f64, |m, d| m.max(*d)));
        ctx.flag(
            "semidist_decreasing_in_eps",
            dists.windows(2).all(|w| w[1] <= 1.1 * w[0] + COLLAPSE_TOL),
        );
    }
    Ok(())
}

fn decompose(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let eps = cfg
        .problem
        .eps
        .ok_or_else(|| Error::param("problem.eps", "decomposition needs the acoustic problem"))?;
    let sys = ctx.system()?;
    let sampler = SmoothSampler::new(&sys.mesh)?;
    let zeta0 = sampler.state_a(&mut rng(cfg.seed), cfg.initial.norm, cfg.initial.boundary, eps)?;
    let t = &cfg.time;
    let rec = sys.decomposition_run(&zeta0, eps, cfg.constants.beta, t.t_end, t.dt, t.stride)?;
    let mut w = ctx.csv("decompose.csv")?;
    w.write_record(["t", "full_norm", "chi_norm", "xi_norm"])?;
    for i in 0..rec.times.len() {
        w.write_record([num(rec.times[i]), num(rec.full_norms[i]), num(rec.chi_norms[i]), num(rec.xi_norms[i])])?;
    }
    finish(w)?;
    let fit = exp_attraction_fit(&rec.times, &rec.xi_norms, (t.fit_start, t.t_end))?;
    ctx.metric("max_xi_residual", rec.max_xi_residual());
    ctx.metric("xi_decay_rate", fit.rate);
    ctx.metric("xi_prefactor", fit.prefactor);
    ctx.metric("chi_max", rec.chi_norms.iter().fold(0.0f64, |m, v| m.max(*v)));
    ctx.flag("xi_residual_le_1e-8", rec.max_xi_residual() <= 1e-8);
    ctx.flag("xi_decays", fit.rate > 0.0);
    ctx.flag("chi_max_stabilized", rec.chi_max_stabilized(1e-9));
    Ok(())
}

struct CheckRow {
    name: &'static str,
    value: f64,
    threshold: f64,
}

fn random_field<R: Rng>(rng: &mut R, n: usize) -> Field {
    Field((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
}

/// The invariant suite: energy identity, adjoint structure, dissipativity,
/// Poincaré inequality and `Π∘L = id`.
fn check(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg;
    let sys = ctx.system()?;
    let mesh = &sys.mesh;
    let sampler = SmoothSampler::new(mesh)?;
    let mut r = rng(cfg.seed);
    let mut rows = Vec::new();

    let (t_end, dt) = (0.5, 1e-2);
    for (name, problem) in [
        ("energy_identity_r", Problem::Robin),
        ("energy_identity_a", Problem::Acoustic { eps: 0.5 }),
    ] {
        let x0 = initial_state(&sampler, &mut r, problem, 1.0, 0.5)?;
        let rec = sys.simulate(problem, &x0, t_end, dt, 10)?;
        rows.push(CheckRow {
            name,
            value: rec.max_balance_residual(),
            threshold: 10.0 * cfg.solver.tol,
        });
    }

    let small = Mesh::new(32, 1.0)?;
    let mut adjoint = Generator::robin(&small).adjoint_defect(&small);
    for eps in [1.0, 0.5, 0.01] {
        adjoint = adjoint.max(Generator::acoustic(&small, eps)?.adjoint_defect(&small));
    }
    rows.push(CheckRow {
        name: "adjoint_defect",
        value: adjoint,
        threshold: 1e-10,
    });

    let gens = [Generator::robin(mesh), Generator::acoustic(mesh, 0.5)?];
    let mut diss = 0.0f64;
    for g in &gens {
        for _ in 0..20 {
            let x: Vec<f64> = (0..g.dim()).map(|_| r.gen_range(-1.0..=1.0)).collect();
            diss = diss.max(g.dissipativity_defect(mesh, &x).abs());
        }
    }
    rows.push(CheckRow {
        name: "dissipativity_defect",
        value: diss,
        threshold: 1e-10,
    });

    // rough fields, smooth fields and the first eigenvector, where equality holds
    let modes = eigenpairs(mesh, 1)?;
    let lambda1 = modes.lambda1();
    let mut fields: Vec<Field> = (0..100).map(|_| random_field(&mut r, mesh.n_nodes())).collect();
    fields.extend((0..100).map(|_| sampler.field(&mut r)));
    fields.push(modes.vectors[0].clone());
    let mut worst = 0.0f64;
    for u in &fields {
        let tr = mesh.trace(u);
        let ratio = lambda1 * mesh.l2(u, u) / (mesh.grad(u, u) + tr.dot(&tr));
        worst = worst.max(ratio);
    }
    rows.push(CheckRow {
        name: "poincare_ratio",
        value: worst,
        threshold: 1.0 + 1e-8,
    });

    let mut pil = 0.0f64;
    for _ in 0..20 {
        let phi = sampler.state_r(&mut r, 1.0);
        let back = lift(&phi, mesh).project();
        let d = back.sub(&phi).to_vec().iter().fold(0.0f64, |m, x| m.max(x.abs()));
        pil = pil.max(d);
    }
    rows.push(CheckRow {
        name: "project_lift_identity",
        value: pil,
        threshold: 0.0,
    });

    let mut w = ctx.csv("check.csv")?;
    w.write_record(["check", "value", "threshold", "pass"])?;
    for row in &rows {
        let pass = row.value <= row.threshold;
        w.write_record([row.name.to_string(), num(row.value), num(row.threshold), pass.to_string()])?;
        ctx.metric(row.name, row.value);
        ctx.flag(row.name, pass);
    }
    finish(w)
}

/// Loads a configuration, applying a seed override.
pub fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}
