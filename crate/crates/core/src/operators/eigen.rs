//! Generalized eigenpairs of `(K + B) w = λ M w` for the lumped mass `M`.
//!
//! The pencil is symmetrized to `M^{-1/2}(K + B)M^{-1/2}`, a symmetric
//! tridiagonal matrix. Each eigenvalue is bracketed by Sturm-count bisection,
//! then refined together with its eigenvector by shifted inverse iteration,
//! deflating against the vectors already found.

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::mesh::{Field, Mesh};

use super::RobinLaplacian;

const MAX_ITERATIONS: usize = 50;
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EigenResult {
    /// Ascending eigenvalues of `-Δ_R`.
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Field>,
    /// `‖(K + B)w − λMw‖₂ / λ` per pair.
    pub residuals: Vec<f64>,
}

impl EigenResult {
    pub fn lambda1(&self) -> f64 {
        self.values[0]
    }

    /// Constant in `‖u‖ ≤ C (‖∇u‖² + ‖u‖²_Γ)^{1/2}`.
    pub fn poincare_constant(&self) -> f64 {
        1.0 / self.values[0].sqrt()
    }
}

/// Number of eigenvalues of the symmetric tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = d[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..d.len() {
        let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = d[i] - x - e2[i - 1] / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect(d: &[f64], e2: &[f64], index: usize, mut lo: f64, mut hi: f64) -> f64 {
    // invariant: count(lo) <= index < count(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e2, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) -> f64 {
    let n = dot(x, x).sqrt();
    if n > 0.0 {
        x.iter_mut().for_each(|v| *v /= n);
    }
    n
}

pub fn eigenpairs(mesh: &Mesh, k: usize) -> Result<EigenResult> {
    let n = mesh.n_nodes();
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must lie in 1..={n}, got {k}")));
    }
    let lap = RobinLaplacian::assemble(mesh);
    let s: Vec<f64> = lap.mass.iter().map(|w| 1.0 / w.sqrt()).collect();
    let sym = Tridiagonal {
        lower: (0..n - 1).map(|i| lap.form.lower[i] * s[i] * s[i + 1]).collect(),
        diag: (0..n).map(|i| lap.form.diag[i] * s[i] * s[i]).collect(),
        upper: (0..n - 1).map(|i| lap.form.upper[i] * s[i] * s[i + 1]).collect(),
    };
    let e2: Vec<f64> = sym.upper.iter().map(|e| e * e).collect();

    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { sym.lower[i - 1].abs() } else { 0.0 }
            + if i + 1 < n { sym.upper[i].abs() } else { 0.0 };
        lo = lo.min(sym.diag[i] - r);
        hi = hi.max(sym.diag[i] + r);
    }
    let pad = 1e-8 * (hi - lo).abs().max(1.0);
    lo -= pad;
    hi += pad;

    let scale = hi.abs().max(lo.abs());
    let mut values = Vec::with_capacity(k);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);

    for j in 0..k {
        let guess = bisect(&sym.diag, &e2, j, lo, hi);
        // nudge off the eigenvalue so the shifted matrix stays invertible
        let sigma = guess + 1e3 * f64::EPSILON * scale;
        let mut shifted = sym.clone();
        shifted.diag.iter_mut().for_each(|d| *d -= sigma);

        let mut y: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * ((i * 7919 + j * 104729) % 97) as f64 / 97.0)
            .collect();
        normalize(&mut y);
        let mut lambda = guess;
        let mut resid = f64::INFINITY;
        let mut converged = false;
        for _ in 0..MAX_ITERATIONS {
            let mut z = shifted.solve_pivoted(&y, f64::MIN_POSITIVE * 1e10);
            for b in &basis {
                let c = dot(&z, b);
                z.iter_mut().zip(b).for_each(|(zi, bi)| *zi -= c * bi);
            }
            if normalize(&mut z) == 0.0 || z.iter().any(|v| !v.is_finite()) {
                break;
            }
            let tz = sym.matvec(&z);
            lambda = dot(&z, &tz);
            let r: f64 = tz
                .iter()
                .zip(&z)
                .map(|(a, b)| (a - lambda * b).powi(2))
                .sum::<f64>()
                .sqrt();
            y = z;
            resid = r / lambda.abs().max(f64::MIN_POSITIVE);
            if resid <= RESIDUAL_TOL {
                converged = true;
                break;
            }
        }
        // the symmetric residual measures ‖M^{-1/2}(A w − λ M w)‖; report the
        // unscaled generalized residual alongside
        let w: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a * b).collect();
        let aw = lap.form.matvec(&w);
        let gen_res = aw
            .iter()
            .zip(w.iter().zip(&lap.mass))
            .map(|(a, (wi, m))| (a - lambda * m * wi).powi(2))
            .sum::<f64>()
            .sqrt()
            / lambda;
        if !converged && gen_res > 1e-10 {
            return Err(Error::EigenNoConvergence {
                mode: j + 1,
                iterations: MAX_ITERATIONS,
                residual: resid,
            });
        }
        values.push(lambda);
        residuals.push(gen_res);
        basis.push(y);
    }

    // fix signs so the first nonzero entry is positive (deterministic output)
    let vectors = basis
        .into_iter()
        .map(|y| {
            let mut w: Vec<f64> = y.iter().zip(&s).map(|(a, b)| a * b).collect();
            let lead = w.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0);
            if lead < 0.0 {
                w.iter_mut().for_each(|v| *v = -*v);
            }
            Field(w)
        })
        .collect();

    Ok(EigenResult {
        values,
        vectors,
        residuals,
    })
}

/// First eigenvalue `k²` of the continuous Robin Laplacian on `[0, L]`,
/// where `k` is the first root of `(k² − 1) sin kL = 2k cos kL`.
pub fn robin_lambda1_exact(length: f64) -> f64 {
    let h = |k: f64| (k * k - 1.0) * (k * length).sin() - 2.0 * k * (k * length).cos();
    let (mut a, mut b) = (1e-12 / length, std::f64::consts::PI / length);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if h(m) < 0.0 {
            a = m
        } else {
            b = m
        }
    }
    (0.5 * (a + b)).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// First root of `tan k = 2k/(k² − 1)` by bisection on
    /// `(k² − 1) sin k − 2k cos k`, which changes sign on `(1, π/2)`.
    fn robin_root() -> f64 {
        let h = |k: f64| (k * k - 1.0) * k.sin() - 2.0 * k * k.cos();
        let (mut a, mut b) = (1.0, std::f64::consts::FRAC_PI_2);
        assert!(h(a) < 0.0 && h(b) > 0.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if h(m) < 0.0 {
                a = m
            } else {
                b = m
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn first_eigenvalue_matches_transcendental_root() {
        let exact = robin_root().powi(2);
        assert!((exact - 1.708).abs() < 1e-3);
        assert!((robin_lambda1_exact(1.0) - exact).abs() < 1e-12);
        let m = Mesh::new(999, 1.0).unwrap();
        let r = eigenpairs(&m, 1).unwrap();
        assert!(((r.lambda1() - exact) / exact).abs() < 1e-3);
        assert!(r.residuals[0] <= 1e-10);
    }

    #[test]
    fn second_order_convergence() {
        let exact = robin_root().powi(2);
        let errs: Vec<f64> = [25, 50, 100, 200]
            .iter()
            .map(|&n| {
                let m = Mesh::new(n, 1.0).unwrap();
                (eigenpairs(&m, 1).unwrap().lambda1() - exact).abs()
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(order >= 1.9, "order {order} from {errs:?}");
        }
    }

    #[test]
    fn spectrum_is_ascending_positive_and_orthonormal() {
        let m = Mesh::new(60, 1.0).unwrap();
        let r = eigenpairs(&m, 12).unwrap();
        assert!(r.values[0] > 0.0);
        for w in r.values.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..12 {
            assert!(r.residuals[i] <= 1e-10, "mode {i}: {}", r.residuals[i]);
            for j in 0..12 {
                let g = m.l2(&r.vectors[i], &r.vectors[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-9, "({i},{j}) = {g}");
            }
        }
    }

    #[test]
    fn full_spectrum_on_small_mesh() {
        let m = Mesh::new(6, 1.0).unwrap();
        let r = eigenpairs(&m, 7).unwrap();
        assert_eq!(r.values.len(), 7);
        assert!(eigenpairs(&m, 8).is_err());
        assert!(eigenpairs(&m, 0).is_err());
    }
}
