use std::fs;
use std::path::Path;
use std::process::Command;

use dampwave::cli::{emit_plot_data, run, ExperimentConfig, PlotInput, PlotStyle, RunOptions, RunSummary};
use dampwave::integrate::{Problem, SolverOptions, State, WaveSystem};
use dampwave::random::{rng, SmoothSampler};
use dampwave::{BoundaryNonlinearity, Mesh, Nonlinearity};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dampwave"))
}

fn summary(dir: &Path) -> RunSummary {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn check_subcommand_passes_and_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for d in [&a, &b] {
        let st = bin().args(["check", "--seed", "5", "--out"]).arg(d).status().unwrap();
        assert_eq!(st.code(), Some(0));
    }
    assert_eq!(fs::read(a.join("check.csv")).unwrap(), fs::read(b.join("check.csv")).unwrap());
    let s = summary(&a);
    assert!(s.pass && s.error.is_none());
    assert_eq!(s.experiment, "check");
    for k in ["adjoint_defect", "energy_identity_a", "poincare_ratio", "project_lift_identity"] {
        assert!(s.flags[k], "{k}");
    }
}

#[test]
fn missing_dt_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    fs::write(&cfg, "experiment = \"simulate\"\n[time]\nt_end = 1.0\n").unwrap();
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path().join("o")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time.dt"));
}

#[test]
fn sweep_reports_fit_and_threshold_failure_exits_two() {
    let text = r#"
experiment = "sweep_epsilon"
seed = 2
[mesh]
n_cells = 40
[problem]
kind = "acoustic"
eps = 0.1
eps_grid = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
[time]
t_end = 1.0
dt = 1e-2
"#;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let s = run(&cfg, &RunOptions { out: Some(tmp.path().to_path_buf()), dump_matrices: true }).unwrap();
    assert!(s.metrics.contains_key("rho_hat") && s.flags.contains_key("rho_ge_0.45"));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("eps,sup_gap,gap_at_T,runtime"));
    assert_eq!(csv.lines().count(), 6);
    assert!(tmp.path().join("matrices/generator_a.txt").exists());
    assert!(fs::read_to_string(tmp.path().join("gap_0.dat")).unwrap().starts_with("# t gap_Heps gap_H0"));

    // at t = 40 the ε = 0.01 cloud is still far from collapsed, so the trend flag fails
    let fail = tmp.path().join("fail.toml");
    fs::write(
        &fail,
        r#"
experiment = "attractor"
[mesh]
n_cells = 20
[problem]
kind = "robin"
eps_grid = [1.0, 0.01]
[time]
t_end = 45.0
burn_in = 40.0
dt = 1e-1
[initial]
norm = 3.0
count = 2
"#,
    )
    .unwrap();
    let st = bin().arg("run").arg(&fail).arg("--out").arg(tmp.path().join("f")).status().unwrap();
    assert_eq!(st.code(), Some(2));
    assert!(!summary(&tmp.path().join("f")).pass);
}

#[test]
fn solver_failure_is_recorded() {
    let text = r#"
experiment = "simulate"
[mesh]
n_cells = 20
[time]
t_end = 1.0
dt = 0.5
[solver]
max_iter = 1
tol = 1e-15
[initial]
norm = 50.0
"#;
    let tmp = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    assert!(run(&cfg, &RunOptions { out: Some(tmp.path().to_path_buf()), dump_matrices: false }).is_err());
    let s = summary(tmp.path());
    assert!(s.error.unwrap().contains("newton"));
    assert_eq!(RunSummary { error: Some("x".into()), ..s }.exit_code(), 1);
}

#[test]
fn plot_files_have_documented_columns() {
    let tmp = tempfile::tempdir().unwrap();
    let sys = WaveSystem::new(Mesh::new(20, 1.0).unwrap(), Nonlinearity::cubic(), BoundaryNonlinearity::zero(), SolverOptions::default());
    let sampler = SmoothSampler::new(&sys.mesh).unwrap();
    let x = State::R(sampler.state_r(&mut rng(0), 1.0));
    let rec = sys.simulate(Problem::Robin, &x, 1.0, 0.1, 1).unwrap();
    let p = tmp.path().join("e.dat");
    emit_plot_data(PlotInput::Trajectory(&rec), PlotStyle::Energy, &p).unwrap();
    let text = fs::read_to_string(&p).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# t E dissipation residual"));
    assert!(lines.all(|l| l.split_whitespace().count() == 4));
    assert_eq!(text.lines().count(), 12);
    assert!(emit_plot_data(PlotInput::Trajectory(&rec), PlotStyle::Cloud, &p).is_err());
    let bad = tmp.path().join("missing/dir/e.dat");
    assert!(emit_plot_data(PlotInput::Trajectory(&rec), PlotStyle::Energy, &bad).is_err());
}
