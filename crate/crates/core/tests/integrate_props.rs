use dampwave::integrate::{initial_data_a, Problem, SolverOptions, State, StateA, StateR, WaveSystem};
use dampwave::operators::eigenpairs;
use dampwave::random::{rng, SmoothSampler};
use dampwave::{BoundaryField, BoundaryNonlinearity, Field, Mesh, Nonlinearity};
use proptest::prelude::*;

fn system(n: usize, nl: Nonlinearity, bnl: BoundaryNonlinearity) -> WaveSystem {
    WaveSystem::new(Mesh::new(n, 1.0).unwrap(), nl, bnl, SolverOptions::default())
}

/// Closed-form `a'' + a' + k a = 0`, `a(0) = 1`, `a'(0) = 0`, underdamped.
fn damped_oscillator(k: f64, t: f64) -> f64 {
    let w = (k - 0.25).sqrt();
    (-0.5 * t).exp() * ((w * t).cos() + (w * t).sin() / (2.0 * w))
}

fn modal_error(n: usize, dt: f64) -> f64 {
    let sys = system(n, Nonlinearity::zero(), BoundaryNonlinearity::zero());
    let modes = eigenpairs(&sys.mesh, 2).unwrap();
    let w1 = &modes.vectors[0];
    let x0 = State::R(StateR {
        u: w1.clone(),
        v: Field::zeros(sys.mesh.n_nodes()),
    });
    let rec = sys.simulate(Problem::Robin, &x0, 1.0, dt, 1_000_000).unwrap();
    let u = rec.final_state().u();
    let amp = sys.mesh.l2(u, w1);
    // the other modes stay unexcited
    let other = sys.mesh.l2(u, &modes.vectors[1]);
    assert!(other.abs() < 1e-10, "leak into mode 2: {other:e}");
    let exact = damped_oscillator(modes.lambda1() + 1.0, 1.0);
    ((amp - exact) / exact).abs()
}

#[test]
fn modal_oracle_is_second_order() {
    let e1 = modal_error(200, 1e-4);
    let e2 = modal_error(200, 5e-5);
    assert!(e1 <= 1e-5, "error {e1:e}");
    let ratio = e1 / e2;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    let coarse = modal_error(50, 4e-3) / modal_error(50, 2e-3);
    assert!(coarse.log2() >= 1.9, "order {}", coarse.log2());
}

/// `Δ(γ + Tu) = −ε dt (δ̄ + γ̄ + ḡ)` per step, so
/// `γⁿ + Tuⁿ = ε(δ₁ + Tu₀) − ε Σ dt (δ̄ + γ̄ + ḡ)`.
#[test]
fn projected_boundary_invariant() {
    for (bnl, eps) in [
        (BoundaryNonlinearity::zero(), 0.1),
        (BoundaryNonlinearity::bounded_sine(0.7).unwrap(), 0.5),
    ] {
        let sys = system(60, Nonlinearity::cubic(), bnl.clone());
        let sampler = SmoothSampler::new(&sys.mesh).unwrap();
        let mut r = rng(4);
        let phi = sampler.state_r(&mut r, 1.5);
        let d0 = BoundaryField([0.3, -0.2]);
        let d1 = BoundaryField([0.1, 0.4]);
        let z0 = initial_data_a(&sys.mesh, &phi.u, &phi.v, d0, d1, eps).unwrap();
        let dt = 1e-2;
        let rec = sys.simulate(Problem::Acoustic { eps }, &State::A(z0), 2.0, dt, 1).unwrap();
        let states: Vec<&StateA> = rec.states.iter().map(|s| s.as_a().unwrap()).collect();
        let tu0 = sys.mesh.trace(&phi.u);
        let mut acc = [0.0; 2];
        let mut worst = 0.0f64;
        for w in states.windows(2) {
            for j in 0..2 {
                let db = 0.5 * (w[0].delta.0[j] + w[1].delta.0[j]);
                let gb = 0.5 * (w[0].gamma.0[j] + w[1].gamma.0[j]);
                let g = bnl.discrete_gradient(w[0].delta.0[j], w[1].delta.0[j]);
                acc[j] += dt * (db + gb + g);
            }
            let tu = sys.mesh.trace(&w[1].u);
            for j in 0..2 {
                let expected = eps * (d1.0[j] + tu0.0[j]) - eps * acc[j];
                worst = worst.max((w[1].gamma.0[j] + tu.0[j] - expected).abs());
            }
        }
        assert!(worst <= 1e-9, "invariant defect {worst:e}");
    }
}

#[test]
fn balance_residual_tracks_solver_tolerance() {
    let base = system(100, Nonlinearity::cubic(), BoundaryNonlinearity::zero());
    let sampler = SmoothSampler::new(&base.mesh).unwrap();
    let z0 = sampler.state_a(&mut rng(8), 2.0, 0.5, 0.1).unwrap();
    for tol in [1e-8, 1e-10, 1e-12] {
        let sys = base.with_solver(SolverOptions { tol, max_iter: 50 });
        let rec = sys
            .simulate(Problem::Acoustic { eps: 0.1 }, &State::A(z0.clone()), 1.0, 1e-2, 10)
            .unwrap();
        let bal = rec.max_balance_residual();
        assert!(bal <= 10.0 * tol, "tol {tol:e}: balance {bal:e}");
        assert!(rec.newton_residuals.iter().all(|r| *r <= tol));
    }
}

#[test]
fn energy_nonincreasing_over_long_run() {
    let sys = system(80, Nonlinearity::cubic(), BoundaryNonlinearity::zero());
    let sampler = SmoothSampler::new(&sys.mesh).unwrap();
    let x0 = State::R(sampler.state_r(&mut rng(2), 3.0));
    let rec = sys.simulate(Problem::Robin, &x0, 10.0, 1e-2, 1).unwrap();
    assert!(rec.energy_nonincreasing(1e-10));
    assert!(rec.dissipation.iter().all(|d| *d >= 0.0));
    assert!(rec.times.windows(2).all(|w| w[1] > w[0]));
    assert_eq!(rec.balance_residuals.len(), 1000);
}

#[test]
fn decomposition_of_zero_and_linear_data() {
    let sys = system(40, Nonlinearity::cubic(), BoundaryNonlinearity::zero());
    let n = sys.mesh.n_nodes();
    let rec = sys.decomposition_run(&StateA::zeros(n), 0.5, 1.0, 1.0, 1e-2, 10).unwrap();
    assert!(rec.chi_norms.iter().chain(&rec.xi_norms).all(|v| *v == 0.0));

    let lin = system(40, Nonlinearity::zero(), BoundaryNonlinearity::zero());
    let sampler = SmoothSampler::new(&lin.mesh).unwrap();
    let z0 = sampler.state_a(&mut rng(1), 1.0, 0.3, 0.5).unwrap();
    let rec = lin.decomposition_run(&z0, 0.5, 0.0, 5.0, 1e-2, 10).unwrap();
    // with ψ = 0 and no source, χ stays at zero and ξ is the full solution
    assert!(rec.chi_norms.iter().all(|v| *v == 0.0));
    assert!(rec.xi_norms.last().unwrap() < &rec.xi_norms[0]);

    let soft = system(40, Nonlinearity::cubic_minus_linear(0.5).unwrap(), BoundaryNonlinearity::zero());
    assert!(soft.decomposition_run(&StateA::zeros(n), 0.5, 0.2, 1.0, 1e-2, 1).is_err());
    assert!(soft.decomposition_run(&StateA::zeros(n), 0.5, 0.5, 1.0, 1e-2, 1).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn balance_identity_holds_for_every_builtin(
        seed in 0u64..1000,
        eps in 0.01f64..=1.0,
        lambda in 0.0f64..0.9,
        which in 0usize..3,
        rho in 0.0f64..2.0,
    ) {
        let nl = match which {
            0 => Nonlinearity::zero(),
            1 => Nonlinearity::cubic(),
            _ => Nonlinearity::cubic_minus_linear(lambda).unwrap(),
        };
        let sys = system(30, nl, BoundaryNonlinearity::bounded_sine(rho).unwrap());
        let sampler = SmoothSampler::new(&sys.mesh).unwrap();
        let mut r = rng(seed);
        let tol = sys.solver.tol;
        let xr = State::R(sampler.state_r(&mut r, 2.0));
        let rec = sys.simulate(Problem::Robin, &xr, 0.2, 1e-2, 5).unwrap();
        prop_assert!(rec.max_balance_residual() <= 10.0 * tol);
        let xa = State::A(sampler.state_a(&mut r, 2.0, 0.5, eps).unwrap());
        let rec = sys.simulate(Problem::Acoustic { eps }, &xa, 0.2, 1e-2, 5).unwrap();
        prop_assert!(rec.max_balance_residual() <= 10.0 * tol);
        prop_assert!(rec.dissipation.iter().all(|d| *d >= 0.0));
    }

    #[test]
    fn initial_wiring_matches_formula(
        u in proptest::collection::vec(-2.0f64..2.0, 11),
        d1 in proptest::array::uniform2(-1.0f64..1.0),
        eps in 1e-3f64..=1.0,
    ) {
        let mesh = Mesh::new(10, 1.0).unwrap();
        let u0 = Field(u);
        let z = initial_data_a(&mesh, &u0, &Field::zeros(11), BoundaryField::default(), BoundaryField(d1), eps).unwrap();
        let tr = [u0.0[0], u0.0[10]];
        for j in 0..2 {
            prop_assert!((z.gamma.0[j] - (eps * d1[j] - (1.0 - eps) * tr[j])).abs() <= 1e-15);
        }
    }
}
