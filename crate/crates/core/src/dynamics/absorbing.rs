//! Closed-form absorbing-ball radii and entry times, and invariance scans.

use serde::{Deserialize, Serialize};

use crate::error::{check_epsilon, Error, Result};

/// Constants entering the radius and entry-time formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingParams {
    pub c1: f64,
    pub c2: f64,
    pub eta: f64,
    pub m0: f64,
    pub m1: f64,
    pub kappa_f: f64,
    pub kappa_g: f64,
    pub iota: f64,
}

impl Default for AbsorbingParams {
    fn default() -> Self {
        AbsorbingParams {
            c1: 0.25,
            c2: 1.0,
            eta: 0.25,
            m0: 0.1,
            m1: 0.1,
            kappa_f: 0.0,
            kappa_g: 0.0,
            iota: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingSpec {
    pub radius: f64,
    pub radius_sq: f64,
    /// `None` where the specialized formula is undefined.
    pub entry_time: Option<f64>,
    /// Radius of the data ball the entry time refers to.
    pub data_radius: f64,
    pub eps: Option<f64>,
    pub params: AbsorbingParams,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be nonnegative, got {v}")))
    }
}

/// `R₀²(ι) = (C₂/C₁) q^{1/2} (ηκ_f + 1 + q^{3/2})` with `q = (ηκ_f + ι)/m₀`.
pub fn robin_radius_sq(p: &AbsorbingParams) -> Result<f64> {
    positive("C1", p.c1)?;
    positive("C2", p.c2)?;
    positive("m0", p.m0)?;
    positive("iota", p.iota)?;
    nonneg("eta", p.eta)?;
    nonneg("kappa_f", p.kappa_f)?;
    let ek = p.eta * p.kappa_f;
    let q = (ek + p.iota) / p.m0;
    Ok(p.c2 / p.c1 * q.sqrt() * (ek + 1.0 + q.powf(1.5)))
}

/// `t₀ = (C₂R(1 + R³) + ηκ_f)/ι` for data of norm at most `R`.
pub fn robin_entry_time(p: &AbsorbingParams, data_radius: f64) -> Result<f64> {
    positive("iota", p.iota)?;
    nonneg("R", data_radius)?;
    let r = data_radius;
    Ok((p.c2 * r * (1.0 + r.powi(3)) + p.eta * p.kappa_f) / p.iota)
}

/// `R₁ε²(ι) = (C₂/C₁) s^{1/2}(κ + 1 + s^{3/2})` with `κ = κ_f + εκ_g` and
/// `s = κ + ι/(m₁ε)`.
pub fn acoustic_radius_sq(p: &AbsorbingParams, eps: f64) -> Result<f64> {
    check_epsilon(eps)?;
    positive("C1", p.c1)?;
    positive("C2", p.c2)?;
    positive("m1", p.m1)?;
    positive("iota", p.iota)?;
    let kappa = p.kappa_f + eps * p.kappa_g;
    let s = kappa + p.iota / (p.m1 * eps);
    Ok(p.c2 / p.c1 * s.sqrt() * (kappa + 1.0 + s.powf(1.5)))
}

/// `t₁ε(ι) = (C₂R(1 + R³) + κ_f + εκ_g)/ι`.
pub fn acoustic_entry_time(p: &AbsorbingParams, eps: f64, data_radius: f64) -> Result<f64> {
    check_epsilon(eps)?;
    positive("iota", p.iota)?;
    let r = data_radius;
    Ok((p.c2 * r * (1.0 + r.powi(3)) + p.kappa_f + eps * p.kappa_g) / p.iota)
}

/// The specialization at `ι = m₁ε`:
/// `(1/(εm₁))(1 + C₂R(1 + R³)/(κ_f + εκ_g))`; undefined when `κ_f + εκ_g = 0`.
pub fn acoustic_entry_time_specialized(p: &AbsorbingParams, eps: f64, data_radius: f64) -> Result<Option<f64>> {
    check_epsilon(eps)?;
    positive("m1", p.m1)?;
    let kappa = p.kappa_f + eps * p.kappa_g;
    if kappa == 0.0 {
        return Ok(None);
    }
    let r = data_radius;
    Ok(Some((1.0 + p.c2 * r * (1.0 + r.powi(3)) / kappa) / (eps * p.m1)))
}

/// Radius and entry time for Problem (R) (`eps = None`) or Problem (A).
/// For Problem (A) the radius and entry time use `ι = m₁ε`.
pub fn absorbing_spec(p: &AbsorbingParams, eps: Option<f64>, data_radius: f64) -> Result<AbsorbingSpec> {
    let (radius_sq, entry_time, params) = match eps {
        None => (robin_radius_sq(p)?, Some(robin_entry_time(p, data_radius)?), *p),
        Some(e) => {
            let q = AbsorbingParams { iota: p.m1 * e, ..*p };
            (
                acoustic_radius_sq(&q, e)?,
                acoustic_entry_time_specialized(&q, e, data_radius)?,
                q,
            )
        }
    };
    Ok(AbsorbingSpec {
        radius: radius_sq.sqrt(),
        radius_sq,
        entry_time,
        data_radius,
        eps,
        params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub entry_index: Option<usize>,
    pub entry_time: Option<f64>,
    /// Samples after entry with norm above `radius·(1 + 1e-9)`.
    pub violations: usize,
}

pub fn invariance_check(times: &[f64], norms: &[f64], radius: f64) -> InvarianceReport {
    let entry = norms.iter().position(|&x| x <= radius);
    let violations = match entry {
        Some(i) => norms[i..].iter().filter(|&&x| x > radius * (1.0 + 1e-9)).count(),
        None => 0,
    };
    InvarianceReport {
        entry_index: entry,
        entry_time: entry.and_then(|i| times.get(i).copied()),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> AbsorbingParams {
        AbsorbingParams {
            c1: 1.0,
            c2: 1.0,
            eta: 0.25,
            m0: 0.1,
            m1: 0.1,
            kappa_f: 0.0,
            kappa_g: 0.0,
            iota: 0.1,
        }
    }

    #[test]
    fn worked_values() {
        assert_eq!(robin_radius_sq(&unit()).unwrap(), 2.0);
        let p = AbsorbingParams { iota: 1.0, ..unit() };
        assert_eq!(robin_entry_time(&p, 1.0).unwrap(), 2.0);
        let eps = 0.5;
        let p = AbsorbingParams { iota: 0.1 * eps, ..unit() };
        assert_eq!(acoustic_radius_sq(&p, eps).unwrap(), 2.0);
        let s = absorbing_spec(&unit(), Some(eps), 1.0).unwrap();
        assert_eq!(s.radius_sq, 2.0);
        assert_eq!(s.entry_time, None);
    }

    #[test]
    fn specialization_with_positive_kappa() {
        let p = AbsorbingParams { kappa_f: 2.0, ..unit() };
        let t = acoustic_entry_time_specialized(&p, 0.5, 1.0).unwrap().unwrap();
        assert!((t - (1.0 + 2.0 / 2.0) / 0.05).abs() < 1e-12);
        // the acoustic radius at ι = m₁ε: (κ+1)^{3/2}(1 + (κ+1)^{1/2})
        let q = AbsorbingParams { iota: 0.05, ..p };
        let r = acoustic_radius_sq(&q, 0.5).unwrap();
        assert!((r - 3f64.powf(1.5) * (1.0 + 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn invariance_scan() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let r = invariance_check(&t, &[3.0, 2.0, 1.0, 1.5, 0.9], 1.0);
        assert_eq!(r.entry_index, Some(2));
        assert_eq!(r.entry_time, Some(2.0));
        assert_eq!(r.violations, 1);
        let r = invariance_check(&t, &[0.5; 5], 1.0);
        assert_eq!((r.entry_index, r.violations), (Some(0), 0));
        assert_eq!(invariance_check(&t, &[2.0; 5], 1.0).entry_index, None);
    }

    #[test]
    fn rejects_bad_constants() {
        assert!(robin_radius_sq(&AbsorbingParams { c1: 0.0, ..unit() }).is_err());
        assert!(acoustic_radius_sq(&unit(), 0.0).is_err());
    }
}
