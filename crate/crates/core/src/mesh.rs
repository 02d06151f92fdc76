//! Uniform 1D grid on Ω = (0, L) with boundary Γ = {0, L}.
//!
//! All phase-space inner products are evaluated here: the lumped (trapezoid)
//! L² product, the H¹ product with a piecewise-constant gradient, and the
//! counting-measure product on the two boundary nodes.

use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};
use crate::integrate::{StateA, StateR};

/// Nodal samples of a function on Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field(pub Vec<f64>);

/// Values on the two boundary nodes, ordered `[x = 0, x = L]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryField(pub [f64; 2]);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn constant(n: usize, value: f64) -> Self {
        Field(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field(self.0.iter().map(|x| s * x).collect())
    }

    pub fn sub(&self, other: &Field) -> Field {
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &Field) -> Field {
        Field(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl BoundaryField {
    pub fn constant(value: f64) -> Self {
        BoundaryField([value; 2])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn scaled(&self, s: f64) -> BoundaryField {
        BoundaryField([s * self.0[0], s * self.0[1]])
    }

    pub fn sub(&self, other: &BoundaryField) -> BoundaryField {
        BoundaryField([self.0[0] - other.0[0], self.0[1] - other.0[1]])
    }

    pub fn add(&self, other: &BoundaryField) -> BoundaryField {
        BoundaryField([self.0[0] + other.0[0], self.0[1] + other.0[1]])
    }

    pub fn dot(&self, other: &BoundaryField) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InnerKind {
    L2,
    H1,
    L2Gamma,
}

/// Phase space selector for [`Mesh::norm_phase`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PhaseSpace {
    /// `‖u‖₁² + ‖u|Γ‖²_Γ + ‖v‖²`
    H0,
    /// `‖u‖₁² + ‖v‖² + ε‖δ‖²_Γ + ‖γ‖²_Γ`
    Heps(f64),
}

/// A phase-space point of either problem.
#[derive(Debug, Clone, Copy)]
pub enum PhasePoint<'a> {
    R(&'a StateR),
    A(&'a StateA),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    n_nodes: usize,
    length: f64,
    h: f64,
    coords: Vec<f64>,
    weights: Vec<f64>,
}

impl Mesh {
    /// Uniform mesh with `n_cells + 1` nodes on `[0, length]`.
    pub fn new(n_cells: usize, length: f64) -> Result<Self> {
        if n_cells < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 cells, got {n_cells}"
            )));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::InvalidMesh(format!(
                "length must be finite and positive, got {length}"
            )));
        }
        let n_nodes = n_cells + 1;
        let h = length / n_cells as f64;
        let coords = (0..n_nodes)
            .map(|i| if i == n_cells { length } else { i as f64 * h })
            .collect();
        let mut weights = vec![h; n_nodes];
        weights[0] = 0.5 * h;
        weights[n_cells] = 0.5 * h;
        Ok(Mesh {
            n_nodes,
            length,
            h,
            coords,
            weights,
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn n_cells(&self) -> usize {
        self.n_nodes - 1
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Lumped L² quadrature weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn boundary_indices(&self) -> [usize; 2] {
        [0, self.n_nodes - 1]
    }

    pub fn field_from_fn(&self, f: impl Fn(f64) -> f64) -> Field {
        Field(self.coords.iter().map(|&x| f(x)).collect())
    }

    pub fn trace(&self, u: &Field) -> BoundaryField {
        BoundaryField([u.0[0], u.0[self.n_nodes - 1]])
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.n_nodes {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n_nodes,
                got: len,
            })
        }
    }

    /// Generic inner product over raw slices; `L2Gamma` expects 2-vectors.
    pub fn inner(&self, kind: InnerKind, a: &[f64], b: &[f64]) -> Result<f64> {
        match kind {
            InnerKind::L2 | InnerKind::H1 => {
                self.check_len(a.len())?;
                self.check_len(b.len())?;
                Ok(match kind {
                    InnerKind::L2 => self.l2_raw(a, b),
                    _ => self.grad_raw(a, b) + self.l2_raw(a, b),
                })
            }
            InnerKind::L2Gamma => {
                for len in [a.len(), b.len()] {
                    if len != 2 {
                        return Err(Error::DimensionMismatch {
                            expected: 2,
                            got: len,
                        });
                    }
                }
                Ok(a[0] * b[0] + a[1] * b[1])
            }
        }
    }

    pub(crate) fn l2_raw(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    pub(crate) fn grad_raw(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = a
            .windows(2)
            .zip(b.windows(2))
            .map(|(x, y)| (x[1] - x[0]) * (y[1] - y[0]))
            .sum();
        s / self.h
    }

    pub fn l2(&self, a: &Field, b: &Field) -> f64 {
        debug_assert_eq!(a.len(), self.n_nodes);
        self.l2_raw(&a.0, &b.0)
    }

    /// `⟨∇a, ∇b⟩` with cellwise-constant gradients.
    pub fn grad(&self, a: &Field, b: &Field) -> f64 {
        self.grad_raw(&a.0, &b.0)
    }

    pub fn h1(&self, a: &Field, b: &Field) -> f64 {
        self.grad(a, b) + self.l2(a, b)
    }

    pub fn gamma(&self, a: &BoundaryField, b: &BoundaryField) -> f64 {
        a.dot(b)
    }

    /// `∫ F(u)` by the lumped quadrature.
    pub fn integrate_with(&self, u: &Field, f: impl Fn(f64) -> f64) -> f64 {
        self.weights.iter().zip(&u.0).map(|(w, &x)| w * f(x)).sum()
    }

    pub fn norm_h0(&self, s: &StateR) -> f64 {
        self.norm_h0_sq(s).sqrt()
    }

    pub(crate) fn norm_h0_sq(&self, s: &StateR) -> f64 {
        let tr = self.trace(&s.u);
        self.h1(&s.u, &s.u) + tr.dot(&tr) + self.l2(&s.v, &s.v)
    }

    pub fn norm_heps(&self, s: &StateA, eps: f64) -> Result<f64> {
        check_epsilon(eps)?;
        Ok(self.norm_heps_sq(s, eps).sqrt())
    }

    pub(crate) fn norm_heps_sq(&self, s: &StateA, eps: f64) -> f64 {
        self.h1(&s.u, &s.u)
            + self.l2(&s.v, &s.v)
            + eps * s.delta.dot(&s.delta)
            + s.gamma.dot(&s.gamma)
    }

    /// Phase-space norm; the state kind has to match the space.
    pub fn norm_phase(&self, space: PhaseSpace, state: PhasePoint<'_>) -> Result<f64> {
        match (space, state) {
            (PhaseSpace::H0, PhasePoint::R(s)) => Ok(self.norm_h0(s)),
            (PhaseSpace::Heps(eps), PhasePoint::A(s)) => self.norm_heps(s, eps),
            (PhaseSpace::H0, PhasePoint::A(_)) => Err(Error::KindMismatch(
                "H0 norm requires a Robin state".into(),
            )),
            (PhaseSpace::Heps(_), PhasePoint::R(_)) => Err(Error::KindMismatch(
                "H_eps norm requires an acoustic state".into(),
            )),
        }
    }

    /// Coordinates in which the H₀ norm is the Euclidean norm.
    pub fn embed_h0(&self, s: &StateR) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.n_nodes + 1);
        self.push_h1_coords(&s.u, &mut out);
        let tr = self.trace(&s.u);
        out.extend_from_slice(&tr.0);
        self.push_l2_coords(&s.v, &mut out);
        out
    }

    /// Coordinates in which the H_ε norm is the Euclidean norm.
    pub fn embed_heps(&self, s: &StateA, eps: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.n_nodes + 3);
        self.push_h1_coords(&s.u, &mut out);
        self.push_l2_coords(&s.v, &mut out);
        let se = eps.sqrt();
        out.extend(s.delta.0.iter().map(|d| se * d));
        out.extend_from_slice(&s.gamma.0);
        out
    }

    fn push_h1_coords(&self, u: &Field, out: &mut Vec<f64>) {
        let ih = 1.0 / self.h.sqrt();
        out.extend(u.0.windows(2).map(|x| (x[1] - x[0]) * ih));
        self.push_l2_coords(u, out);
    }

    fn push_l2_coords(&self, u: &Field, out: &mut Vec<f64>) {
        out.extend(self.weights.iter().zip(&u.0).map(|(w, x)| w.sqrt() * x));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_node_mesh() {
        let m = Mesh::new(2, 1.0).unwrap();
        assert_eq!(m.coords(), &[0.0, 0.5, 1.0]);
        assert_eq!(m.weights(), &[0.25, 0.5, 0.25]);
        assert_eq!(m.boundary_indices(), [0, 2]);
    }

    #[test]
    fn rejects_bad_meshes() {
        assert!(Mesh::new(1, 1.0).is_err());
        assert!(Mesh::new(10, f64::NAN).is_err());
        assert!(Mesh::new(10, -1.0).is_err());
        assert!(Mesh::new(10, f64::INFINITY).is_err());
    }

    #[test]
    fn weights_sum_to_length() {
        let m = Mesh::new(100, 1.0).unwrap();
        let s: f64 = m.weights().iter().sum();
        assert!((s - 1.0).abs() < 1e-14);
        assert!((m.spacing() - 0.01).abs() < 1e-16);
    }

    #[test]
    fn inner_products_on_simple_fields() {
        let m = Mesh::new(100, 1.0).unwrap();
        let one = Field::constant(m.n_nodes(), 1.0);
        assert!((m.inner(InnerKind::L2, &one.0, &one.0).unwrap() - 1.0).abs() < 1e-14);
        let b = [1.0, 1.0];
        assert_eq!(m.inner(InnerKind::L2Gamma, &b, &b).unwrap(), 2.0);
        let x = m.field_from_fn(|x| x);
        let h1 = m.inner(InnerKind::H1, &x.0, &x.0).unwrap();
        assert!((h1 - 4.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let m = Mesh::new(4, 1.0).unwrap();
        assert!(m.inner(InnerKind::L2, &[1.0; 5], &[1.0; 4]).is_err());
        assert!(m.inner(InnerKind::L2Gamma, &[1.0; 3], &[1.0; 2]).is_err());
    }

    #[test]
    fn phase_norms_on_constants() {
        let m = Mesh::new(50, 1.0).unwrap();
        let n = m.n_nodes();
        let r = StateR {
            u: Field::constant(n, 1.0),
            v: Field::zeros(n),
        };
        let h0 = m.norm_phase(PhaseSpace::H0, PhasePoint::R(&r)).unwrap();
        assert!((h0 - 3f64.sqrt()).abs() < 1e-13);

        let a = StateA {
            u: Field::zeros(n),
            v: Field::zeros(n),
            delta: BoundaryField::constant(2.0),
            gamma: BoundaryField::default(),
        };
        let he = m.norm_phase(PhaseSpace::Heps(0.25), PhasePoint::A(&a)).unwrap();
        assert!((he - 2f64.sqrt()).abs() < 1e-14);

        let z = StateA::zeros(n);
        assert_eq!(m.norm_heps(&z, 1.0).unwrap(), 0.0);
        assert!(m.norm_heps(&z, 0.0).is_err());
        assert!(m.norm_heps(&z, 1.5).is_err());
        assert!(m.norm_phase(PhaseSpace::H0, PhasePoint::A(&a)).is_err());
    }

    #[test]
    fn embedding_reproduces_norms() {
        let m = Mesh::new(17, 2.0).unwrap();
        let u = m.field_from_fn(|x| (3.0 * x).sin() + x * x);
        let v = m.field_from_fn(|x| x.cos());
        let r = StateR { u: u.clone(), v: v.clone() };
        let e: f64 = m.embed_h0(&r).iter().map(|x| x * x).sum();
        assert!((e - m.norm_h0(&r).powi(2)).abs() < 1e-12);
        let a = StateA {
            u,
            v,
            delta: BoundaryField([0.3, -1.2]),
            gamma: BoundaryField([2.0, 0.1]),
        };
        let e: f64 = m.embed_heps(&a, 0.3).iter().map(|x| x * x).sum();
        assert!((e - m.norm_heps(&a, 0.3).unwrap().powi(2)).abs() < 1e-12);
    }

    fn field_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (
            proptest::collection::vec(-5.0f64..5.0, n),
            proptest::collection::vec(-5.0f64..5.0, n),
        )
    }

    proptest! {
        #[test]
        fn products_symmetric_and_cauchy_schwarz((a, b) in field_pair(21)) {
            let m = Mesh::new(20, 1.3).unwrap();
            for kind in [InnerKind::L2, InnerKind::H1] {
                let ab = m.inner(kind, &a, &b).unwrap();
                let ba = m.inner(kind, &b, &a).unwrap();
                prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
                let aa = m.inner(kind, &a, &a).unwrap();
                let bb = m.inner(kind, &b, &b).unwrap();
                prop_assert!(ab.abs() <= (aa.sqrt() * bb.sqrt()) * (1.0 + 1e-12));
            }
            let ga = [a[0], a[20]];
            let gb = [b[0], b[20]];
            let g = m.inner(InnerKind::L2Gamma, &ga, &gb).unwrap();
            let gaa = m.inner(InnerKind::L2Gamma, &ga, &ga).unwrap();
            let gbb = m.inner(InnerKind::L2Gamma, &gb, &gb).unwrap();
            prop_assert!(g.abs() <= (gaa * gbb).sqrt() * (1.0 + 1e-12));
        }

        #[test]
        fn h1_dominates_l2(a in proptest::collection::vec(-5.0f64..5.0, 31)) {
            let m = Mesh::new(30, 0.7).unwrap();
            let h1 = m.inner(InnerKind::H1, &a, &a).unwrap();
            let l2 = m.inner(InnerKind::L2, &a, &a).unwrap();
            prop_assert!(h1 >= l2);
        }

        #[test]
        fn bilinear_in_first_slot((a, b) in field_pair(11), s in -3.0f64..3.0) {
            let m = Mesh::new(10, 1.0).unwrap();
            let sa: Vec<f64> = a.iter().zip(&b).map(|(x, y)| s * x + y).collect();
            for kind in [InnerKind::L2, InnerKind::H1] {
                let lhs = m.inner(kind, &sa, &b).unwrap();
                let rhs = s * m.inner(kind, &a, &b).unwrap() + m.inner(kind, &b, &b).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn heps_norm_monotone_in_eps(
            u in proptest::collection::vec(-2.0f64..2.0, 9),
            d0 in -2.0f64..2.0, d1 in -2.0f64..2.0,
            e1 in 0.01f64..1.0, e2 in 0.01f64..1.0,
        ) {
            let m = Mesh::new(8, 1.0).unwrap();
            let s = StateA {
                u: Field(u.clone()),
                v: Field(u),
                delta: BoundaryField([d0, d1]),
                gamma: BoundaryField([d1, d0]),
            };
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(m.norm_heps(&s, lo).unwrap() <= m.norm_heps(&s, hi).unwrap() + 1e-15);
        }
    }
}
