use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `y ≈ prefactor · g(x)^rate` fitted in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub prefactor: f64,
    pub rate: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
    pub samples: usize,
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, rms)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Fit(format!("length mismatch {} vs {}", n, y.len())));
    }
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rms = (x.iter().zip(y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum::<f64>() / nf).sqrt();
    Ok((a, b, rms))
}

/// `y ≈ M x^ρ`. Nonpositive `y` are dropped with a warning.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<RateFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&a, &b) in x.iter().zip(y) {
        if b > 0.0 && a > 0.0 {
            lx.push(a.ln());
            ly.push(b.ln());
        } else {
            log::warn!("dropping point ({a}, {b}) from power-law fit");
        }
    }
    let samples = lx.len();
    let (a, b, rms) = linear_fit(&lx, &ly)?;
    Ok(RateFit {
        prefactor: a.exp(),
        rate: b,
        residual: rms,
        samples,
    })
}

/// `d(t) ≈ C e^{−ωt}` on `window`; points with `d ≤ 0` are left out.
pub fn exp_attraction_fit(times: &[f64], d: &[f64], window: (f64, f64)) -> Result<RateFit> {
    let mut t = Vec::new();
    let mut ld = Vec::new();
    for (&ti, &di) in times.iter().zip(d) {
        if ti >= window.0 && ti <= window.1 && di > 0.0 {
            t.push(ti);
            ld.push(di.ln());
        }
    }
    let samples = t.len();
    let (a, b, rms) = linear_fit(&t, &ld)?;
    Ok(RateFit {
        prefactor: a.exp(),
        rate: -b,
        residual: rms,
        samples,
    })
}

/// Composition of exponential attraction: if `M₁` attracts at rate `α₁` with
/// constant `C₁`, and `M₂` attracts `M₁` at rate `α₂` with `C₂`, with the
/// Lipschitz growth `C e^{Kt}`, then `M₂` attracts with
/// `C′ = C·C₁ + C₂` and `α′ = α₁α₂/(K + α₁ + α₂)`.
pub fn transitivity_compose(c: f64, k: f64, c1: f64, alpha1: f64, c2: f64, alpha2: f64) -> Result<(f64, f64)> {
    for (name, v) in [("C", c), ("K", k), ("C1", c1), ("alpha1", alpha1), ("C2", c2), ("alpha2", alpha2)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
    }
    Ok((c * c1 + c2, alpha1 * alpha2 / (k + alpha1 + alpha2)))
}

/// Entry time `(r + R)/ι` of the differential inequality comparison.
pub fn comparison_entry_time(r: f64, big_r: f64, iota: f64) -> Result<f64> {
    if !(iota > 0.0) {
        return Err(Error::param("iota", format!("must be positive, got {iota}")));
    }
    Ok((r + big_r) / iota)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_power_laws() {
        let eps: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let y: Vec<f64> = eps.iter().map(|e| 3.0 * e.sqrt()).collect();
        let f = power_law_fit(&eps, &y).unwrap();
        assert!((f.rate - 0.5).abs() < 1e-12 && (f.prefactor - 3.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        let y: Vec<f64> = eps.iter().map(|e| 2.0 * e).collect();
        assert!((power_law_fit(&eps, &y).unwrap().rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_points_dropped() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 2.0, 3.0, 4.0];
        let f = power_law_fit(&x, &y).unwrap();
        assert_eq!(f.samples, 3);
        assert!((f.rate - 1.0).abs() < 1e-12);
        assert!(power_law_fit(&x, &[0.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn exponential_input() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 * 0.2).collect();
        let d: Vec<f64> = t.iter().map(|t| 5.0 * (-0.3 * t).exp()).collect();
        let f = exp_attraction_fit(&t, &d, (0.0, 100.0)).unwrap();
        assert!((f.prefactor - 5.0).abs() < 1e-10 && (f.rate - 0.3).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(exp_attraction_fit(&t, &d, (50.0, 60.0)).is_err());
    }

    #[test]
    fn compose_values() {
        assert_eq!(transitivity_compose(2.0, 1.0, 3.0, 2.0, 4.0, 3.0).unwrap(), (10.0, 1.0));
        assert!(transitivity_compose(2.0, 0.0, 3.0, 2.0, 4.0, 3.0).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let v: Vec<f64> = (0..6).map(|_| rng.gen_range(1e-3..10.0)).collect();
            let (_, a) = transitivity_compose(v[0], v[1], v[2], v[3], v[4], v[5]).unwrap();
            assert!(a < v[3].min(v[5]));
        }
        assert_eq!(comparison_entry_time(1.0, 3.0, 2.0).unwrap(), 2.0);
    }
}
