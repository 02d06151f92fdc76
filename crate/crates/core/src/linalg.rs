//! Tridiagonal storage and solvers.

/// Square tridiagonal matrix. `lower[i]` sits at `(i+1, i)`, `upper[i]` at `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Tridiagonal {
            lower: vec![0.0; n.saturating_sub(1)],
            diag: vec![0.0; n],
            upper: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.diag[i]
        } else if j == i + 1 {
            self.upper[i]
        } else if i == j + 1 {
            self.lower[j]
        } else {
            0.0
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.dim();
        debug_assert_eq!(x.len(), n);
        for i in 0..n {
            let mut s = self.diag[i] * x[i];
            if i > 0 {
                s += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.upper[i] * x[i + 1];
            }
            y[i] = s;
        }
    }

    /// `x·(A y)`
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Rows scaled by `1/w`, i.e. `diag(w)⁻¹ A`.
    pub fn row_scaled(&self, w: &[f64]) -> Tridiagonal {
        let n = self.dim();
        Tridiagonal {
            lower: (0..n - 1).map(|i| self.lower[i] / w[i + 1]).collect(),
            diag: (0..n).map(|i| self.diag[i] / w[i]).collect(),
            upper: (0..n - 1).map(|i| self.upper[i] / w[i]).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Tridiagonal {
        Tridiagonal {
            lower: self.lower.iter().map(|x| s * x).collect(),
            diag: self.diag.iter().map(|x| s * x).collect(),
            upper: self.upper.iter().map(|x| s * x).collect(),
        }
    }

    /// Thomas algorithm. Requires a matrix that is safe without pivoting
    /// (diagonally dominant in practice); returns `None` on a zero pivot.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut piv = self.diag[0];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        if n > 1 {
            c[0] = self.upper[0] / piv;
        }
        d[0] = rhs[0] / piv;
        for i in 1..n {
            piv = self.diag[i] - self.lower[i - 1] * c[i - 1];
            if piv == 0.0 || !piv.is_finite() {
                return None;
            }
            if i + 1 < n {
                c[i] = self.upper[i] / piv;
            }
            d[i] = (rhs[i] - self.lower[i - 1] * d[i - 1]) / piv;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        Some(d)
    }

    /// Gaussian elimination with partial pivoting (the `gttrf`/`gtts2`
    /// scheme). Safe for indefinite, nearly singular shifted systems; an
    /// exactly zero pivot is replaced by `tiny`.
    pub fn solve_pivoted(&self, rhs: &[f64], tiny: f64) -> Vec<f64> {
        let n = self.dim();
        let mut dl = self.lower.clone();
        let mut d = self.diag.clone();
        let mut du = self.upper.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        let mut b = rhs.to_vec();
        for i in 0..n.saturating_sub(1) {
            if swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= dl[i] * b[i];
        }
        b[n - 1] /= d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Tridiagonal {
        Tridiagonal {
            lower: vec![1.0, -2.0, 0.5, 3.0],
            diag: vec![4.0, 0.1, -3.0, 2.0, 7.0],
            upper: vec![2.0, 1.0, -1.0, 0.25],
        }
    }

    #[test]
    fn pivoted_solve_recovers_rhs() {
        let a = sample();
        let x = vec![1.0, -2.0, 3.0, 0.5, -1.5];
        let b = a.matvec(&x);
        let y = a.solve_pivoted(&b, 1e-300);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-12, "{p} vs {q}");
        }
    }

    #[test]
    fn thomas_on_dominant_matrix() {
        let a = Tridiagonal {
            lower: vec![-1.0; 5],
            diag: vec![4.0; 6],
            upper: vec![-1.0; 5],
        };
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let y = a.solve(&a.matvec(&x)).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-14);
        }
    }

    #[test]
    fn get_matches_storage() {
        let a = sample();
        assert_eq!(a.get(1, 0), 1.0);
        assert_eq!(a.get(0, 1), 2.0);
        assert_eq!(a.get(2, 2), -3.0);
        assert_eq!(a.get(0, 3), 0.0);
    }
}
