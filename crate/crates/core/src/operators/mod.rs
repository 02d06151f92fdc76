//! Discrete Robin Laplacian and the phase-space generators R and A(ε).
//!
//! Stacked state vectors are ordered `[u, v]` for Problem (R) and
//! `[u, v, δ, γ]` for Problem (A), with `δ, γ` holding the two boundary nodes
//! `x = 0` then `x = L`.
//!
//! The acoustic generator comes from the weak form: integrating `Δu` by parts
//! leaves the boundary flux `∂ₙu`, which is replaced by `γ`. The volume row
//! therefore reads `v_t = M⁻¹(-(K + M)u + Tᵀγ) - v` with `T` the trace.

mod eigen;

use std::io::Write;

use nalgebra::DMatrix;

pub use eigen::{eigenpairs, robin_lambda1_exact, EigenResult};

use crate::error::{check_epsilon, Result};
use crate::linalg::Tridiagonal;
use crate::mesh::Mesh;

/// `⟨∇a, ∇b⟩ = aᵀ K b` for the cellwise-constant gradient.
pub fn stiffness(mesh: &Mesh) -> Tridiagonal {
    let n = mesh.n_nodes();
    let ih = 1.0 / mesh.spacing();
    let mut k = Tridiagonal::zeros(n);
    for c in 0..n - 1 {
        k.diag[c] += ih;
        k.diag[c + 1] += ih;
        k.lower[c] = -ih;
        k.upper[c] = -ih;
    }
    k
}

/// Bilinear form of `-Δ_R`: `⟨∇u, ∇w⟩ + ⟨u, w⟩_Γ`, plus the lumped mass.
#[derive(Debug, Clone)]
pub struct RobinLaplacian {
    pub form: Tridiagonal,
    pub mass: Vec<f64>,
}

impl RobinLaplacian {
    pub fn assemble(mesh: &Mesh) -> Self {
        let mut form = stiffness(mesh);
        for b in mesh.boundary_indices() {
            form.diag[b] += 1.0;
        }
        RobinLaplacian {
            form,
            mass: mesh.weights().to_vec(),
        }
    }

    /// `(K + B) u`, the weak action of `-Δ_R`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.form.matvec(u)
    }

    /// Strong action `Δ_R u = -M⁻¹(K + B)u`.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        self.apply(u)
            .iter()
            .zip(&self.mass)
            .map(|(a, w)| -a / w)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    Robin,
    Acoustic { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    RobinLaplacian,
    GeneratorR,
    GeneratorA(f64),
}

#[derive(Debug, Clone)]
pub enum Assembled {
    Laplacian(RobinLaplacian),
    Generator(Generator),
}

pub fn assemble(mesh: &Mesh, kind: OperatorKind) -> Result<Assembled> {
    Ok(match kind {
        OperatorKind::RobinLaplacian => Assembled::Laplacian(RobinLaplacian::assemble(mesh)),
        OperatorKind::GeneratorR => Assembled::Generator(Generator::robin(mesh)),
        OperatorKind::GeneratorA(eps) => Assembled::Generator(Generator::acoustic(mesh, eps)?),
    })
}

/// Dense generator over the stacked state vector.
#[derive(Debug, Clone)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub matrix: DMatrix<f64>,
    n_nodes: usize,
}

fn put_tridiag(m: &mut DMatrix<f64>, t: &Tridiagonal, r0: usize, c0: usize, scale: f64) {
    let n = t.dim();
    for i in 0..n {
        m[(r0 + i, c0 + i)] += scale * t.diag[i];
        if i + 1 < n {
            m[(r0 + i, c0 + i + 1)] += scale * t.upper[i];
            m[(r0 + i + 1, c0 + i)] += scale * t.lower[i];
        }
    }
}

fn put_identity(m: &mut DMatrix<f64>, len: usize, r0: usize, c0: usize, scale: f64) {
    for i in 0..len {
        m[(r0 + i, c0 + i)] += scale;
    }
}

impl Generator {
    pub fn robin(mesh: &Mesh) -> Self {
        let n = mesh.n_nodes();
        let lap = RobinLaplacian::assemble(mesh);
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        put_identity(&mut m, n, 0, n, 1.0);
        // Δ_R - 1 = -M⁻¹(K + B) - I
        put_tridiag(&mut m, &lap.form.row_scaled(&lap.mass), n, 0, -1.0);
        put_identity(&mut m, n, n, 0, -1.0);
        put_identity(&mut m, n, n, n, -1.0);
        Generator {
            kind: GeneratorKind::Robin,
            matrix: m,
            n_nodes: n,
        }
    }

    pub fn acoustic(mesh: &Mesh, eps: f64) -> Result<Self> {
        check_epsilon(eps)?;
        let n = mesh.n_nodes();
        let w = mesh.weights();
        let k = stiffness(mesh);
        let (d0, g0) = (2 * n, 2 * n + 2);
        let mut m = DMatrix::zeros(2 * n + 4, 2 * n + 4);
        put_identity(&mut m, n, 0, n, 1.0);
        // (Δ - 1)u with the flux ∂ₙu = γ: M⁻¹(-K u + Tᵀγ) - u
        put_tridiag(&mut m, &k.row_scaled(w), n, 0, -1.0);
        put_identity(&mut m, n, n, 0, -1.0);
        put_identity(&mut m, n, n, n, -1.0);
        for (j, b) in mesh.boundary_indices().into_iter().enumerate() {
            m[(n + b, g0 + j)] += 1.0 / w[b];
            m[(d0 + j, g0 + j)] = 1.0;
            m[(g0 + j, n + b)] = -1.0;
            m[(g0 + j, d0 + j)] = -eps;
            m[(g0 + j, g0 + j)] = -eps;
        }
        Ok(Generator {
            kind: GeneratorKind::Acoustic { eps },
            matrix: m,
            n_nodes: n,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(x);
        (&self.matrix * v).as_slice().to_vec()
    }

    /// Gram matrix of the phase-space product the generator lives in.
    pub fn gram(&self, mesh: &Mesh) -> DMatrix<f64> {
        gram(mesh, self.kind)
    }

    /// `⟨Gζ, ζ⟩ - (-‖v‖² - ε‖γ‖²_Γ)`; the second term is dropped for R.
    pub fn dissipativity_defect(&self, mesh: &Mesh, x: &[f64]) -> f64 {
        let n = self.n_nodes;
        let w = gram(mesh, self.kind);
        let xv = nalgebra::DVector::from_column_slice(x);
        let lhs = xv.dot(&(&w * (&self.matrix * &xv)));
        let v = &x[n..2 * n];
        let mut expected = -mesh.l2_raw(v, v);
        if let GeneratorKind::Acoustic { eps } = self.kind {
            let g = &x[2 * n + 2..];
            expected -= eps * (g[0] * g[0] + g[1] * g[1]);
        }
        lhs - expected
    }

    /// Discrete Hilbert adjoint `W⁻¹ Gᵀ W`.
    pub fn gram_adjoint(&self, mesh: &Mesh) -> DMatrix<f64> {
        let w = self.gram(mesh);
        let rhs = self.matrix.transpose() * &w;
        let chol = w
            .clone()
            .cholesky()
            .expect("phase-space Gram matrix is SPD on a valid mesh");
        chol.solve(&rhs)
    }

    /// Direct discretization of the adjoint block pattern:
    /// `R* = -[[0, 1], [Δ_R - 1, 1]]` and
    /// `A* = -[[0, 1, 0, 0], [Δ - 1, 1, 0, 0], [0, 0, 0, 1], [0, -1, -ε, ε]]`,
    /// where the adjoint's Laplacian carries the flux `∂ₙχ = ξ`.
    pub fn expected_adjoint(&self, mesh: &Mesh) -> DMatrix<f64> {
        let n = self.n_nodes;
        let w = mesh.weights();
        match self.kind {
            GeneratorKind::Robin => {
                let lap = RobinLaplacian::assemble(mesh);
                let mut m = DMatrix::zeros(2 * n, 2 * n);
                put_identity(&mut m, n, 0, n, -1.0);
                put_tridiag(&mut m, &lap.form.row_scaled(w), n, 0, 1.0);
                put_identity(&mut m, n, n, 0, 1.0);
                put_identity(&mut m, n, n, n, -1.0);
                m
            }
            GeneratorKind::Acoustic { eps } => {
                let k = stiffness(mesh);
                let (d0, g0) = (2 * n, 2 * n + 2);
                let mut m = DMatrix::zeros(2 * n + 4, 2 * n + 4);
                put_identity(&mut m, n, 0, n, -1.0);
                put_tridiag(&mut m, &k.row_scaled(w), n, 0, 1.0);
                put_identity(&mut m, n, n, 0, 1.0);
                put_identity(&mut m, n, n, n, -1.0);
                for (j, b) in mesh.boundary_indices().into_iter().enumerate() {
                    m[(n + b, g0 + j)] -= 1.0 / w[b];
                    m[(d0 + j, g0 + j)] = -1.0;
                    m[(g0 + j, n + b)] = 1.0;
                    m[(g0 + j, d0 + j)] = eps;
                    m[(g0 + j, g0 + j)] = -eps;
                }
                m
            }
        }
    }

    /// Frobenius norm of `W⁻¹GᵀW` minus the expected adjoint pattern.
    pub fn adjoint_defect(&self, mesh: &Mesh) -> f64 {
        (self.gram_adjoint(mesh) - self.expected_adjoint(mesh)).norm()
    }
}

pub fn gram(mesh: &Mesh, kind: GeneratorKind) -> DMatrix<f64> {
    let n = mesh.n_nodes();
    let w = mesh.weights();
    let mut h1 = stiffness(mesh);
    for (d, wi) in h1.diag.iter_mut().zip(w) {
        *d += wi;
    }
    match kind {
        GeneratorKind::Robin => {
            for b in mesh.boundary_indices() {
                h1.diag[b] += 1.0;
            }
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            put_tridiag(&mut m, &h1, 0, 0, 1.0);
            for i in 0..n {
                m[(n + i, n + i)] = w[i];
            }
            m
        }
        GeneratorKind::Acoustic { eps } => {
            let mut m = DMatrix::zeros(2 * n + 4, 2 * n + 4);
            put_tridiag(&mut m, &h1, 0, 0, 1.0);
            for i in 0..n {
                m[(n + i, n + i)] = w[i];
            }
            put_identity(&mut m, 2, 2 * n, 2 * n, eps);
            put_identity(&mut m, 2, 2 * n + 2, 2 * n + 2, 1.0);
            m
        }
    }
}

/// Writes the nonzero entries as `row col value` lines.
pub fn write_triplets<W: Write>(m: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# {} {}", m.nrows(), m.ncols())?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            if v != 0.0 {
                writeln!(out, "{i} {j} {v:.17e}")?;
            }
        }
    }
    Ok(())
}

pub fn tridiagonal_to_dense(t: &Tridiagonal) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(t.dim(), t.dim());
    put_tridiag(&mut m, t, 0, 0, 1.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    #[test]
    fn robin_form_on_constant() {
        let m = Mesh::new(2, 1.0).unwrap();
        let lap = RobinLaplacian::assemble(&m);
        let one = [1.0; 3];
        let au = lap.apply(&one);
        let q: f64 = au.iter().zip(&one).map(|(a, b)| a * b).sum();
        assert!((q - 2.0).abs() < 1e-15);
    }

    #[test]
    fn robin_form_is_symmetric() {
        let m = Mesh::new(9, 1.0).unwrap();
        let d = tridiagonal_to_dense(&RobinLaplacian::assemble(&m).form);
        assert_eq!(d.clone(), d.transpose());
    }

    #[test]
    fn generator_r_block_pattern() {
        let m = Mesh::new(10, 1.0).unwrap();
        let n = m.n_nodes();
        let g = Generator::robin(&m);
        let u: Vec<f64> = m.coords().iter().map(|x| (2.0 * x).sin() + 0.3).collect();
        let mut x = u.clone();
        x.extend(std::iter::repeat(0.0).take(n));
        let y = g.apply(&x);
        let lap = RobinLaplacian::assemble(&m).laplacian(&u);
        for i in 0..n {
            assert_eq!(y[i], 0.0);
            assert!((y[n + i] - (lap[i] - u[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn dissipativity_identities() {
        let m = Mesh::new(32, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Generator::robin(&m);
        for _ in 0..50 {
            let x = random_vec(&mut rng, r.dim());
            assert!(r.dissipativity_defect(&m, &x).abs() < 1e-10);
        }
        let a = Generator::acoustic(&m, 0.5).unwrap();
        for _ in 0..50 {
            let x = random_vec(&mut rng, a.dim());
            assert!(a.dissipativity_defect(&m, &x).abs() < 1e-10);
        }
    }

    #[test]
    fn adjoints_match_block_patterns() {
        let m = Mesh::new(32, 1.0).unwrap();
        assert!(Generator::robin(&m).adjoint_defect(&m) < 1e-10);
        for eps in [1.0, 0.5, 0.01] {
            let g = Generator::acoustic(&m, eps).unwrap();
            let d = g.adjoint_defect(&m);
            assert!(d < 1e-10, "eps={eps}: defect {d}");
        }
    }

    #[test]
    fn adjoint_gamma_block_is_minus_eps() {
        // -A* has +ε in the (γ, γ) slot where A has -ε
        let m = Mesh::new(8, 1.0).unwrap();
        let eps = 0.3;
        let g = Generator::acoustic(&m, eps).unwrap();
        let adj = g.gram_adjoint(&m);
        let i = 2 * m.n_nodes() + 2;
        assert!((-adj[(i, i)] - eps).abs() < 1e-12);
        assert!((g.matrix[(i, i)] + eps).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_eps() {
        let m = Mesh::new(4, 1.0).unwrap();
        assert!(Generator::acoustic(&m, 0.0).is_err());
        assert!(Generator::acoustic(&m, 1.01).is_err());
        assert!(assemble(&m, OperatorKind::GeneratorA(-1.0)).is_err());
    }

    #[test]
    fn triplet_dump_lists_nonzeros() {
        let m = Mesh::new(2, 1.0).unwrap();
        let g = Generator::robin(&m);
        let mut buf = Vec::new();
        write_triplets(&g.matrix, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let nnz = g.matrix.iter().filter(|v| **v != 0.0).count();
        assert_eq!(text.lines().count(), nnz + 1);
        assert!(text.starts_with("# 6 6"));
    }
}
