//! Limit covariance kernels and their finite-degree approximants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::ensembles::{ensemble_kernel, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::harmonics::check_dim;
use crate::special::bessel_j;

/// Below this separation the limit kernel is evaluated by its Taylor series.
pub const SERIES_CROSSOVER: f64 = 1e-3;

/// Fourier transform of the indicator of the unit ball in Rⁿ at radius `r`.
pub fn limit_kernel(n: usize, r: f64) -> Result<f64> {
    check_dim(n)?;
    if !(r >= 0.0) {
        return Err(Error::domain(format!("separation must be nonnegative, got {r}")));
    }
    Ok(if r < SERIES_CROSSOVER {
        limit_kernel_series(n, r)
    } else {
        limit_kernel_closed(n, r)
    })
}

pub(crate) fn limit_kernel_closed(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0 * r.sin() / r,
        2 => 2.0 * PI * bessel_j(1, r) / r,
        _ => 4.0 * PI * (r.sin() - r * r.cos()) / (r * r * r),
    }
}

pub(crate) fn limit_kernel_series(n: usize, r: f64) -> f64 {
    let r2 = r * r;
    match n {
        // sin r / r
        1 => 2.0 * (1.0 - r2 / 6.0 * (1.0 - r2 / 20.0 * (1.0 - r2 / 42.0))),
        // J₁(r) / r
        2 => 2.0 * PI * 0.5 * (1.0 - r2 / 8.0 * (1.0 - r2 / 24.0 * (1.0 - r2 / 48.0))),
        // (sin r - r cos r) / r³
        _ => 4.0 * PI / 3.0 * (1.0 - r2 / 10.0 * (1.0 - r2 / 28.0 * (1.0 - r2 / 54.0))),
    }
}

/// `K∞(r) / K∞(0)`: sin r / r, 2 J₁(r) / r, 3 (sin r - r cos r) / r³.
pub fn limit_correlation(n: usize, r: f64) -> Result<f64> {
    Ok(limit_kernel(n, r)? / limit_kernel(n, 0.0)?)
}

/// Covariance of the exponentially rescaled field at separation `r`:
/// `d^{-n} K_d(cos(r / d))`.
pub fn rescaled_kernel(spec: &EnsembleSpec, r: f64) -> Result<f64> {
    if spec.kind == EnsembleKind::Kostlan {
        return Err(Error::Unsupported(
            "rescaled_kernel is defined for the harmonic ensemble".into(),
        ));
    }
    let d = spec.d as f64;
    if !(0.0..=d * PI).contains(&r) {
        return Err(Error::domain(format!("separation {r} outside [0, dπ]")));
    }
    Ok(d.powi(-(spec.n as i32)) * ensemble_kernel(spec, (r / d).cos())?)
}

/// `ρ_d(r) = K_d(cos(r/d)) / K_d(1)`.
pub fn rescaled_correlation(n: usize, d: usize, r: f64) -> Result<f64> {
    let spec = EnsembleSpec::harmonic(n, d, 0);
    Ok(rescaled_kernel(&spec, r)? / rescaled_kernel(&spec, 0.0)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub d: usize,
    pub r: f64,
    pub rho_d: f64,
    pub rho_inf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub n: usize,
    pub degrees: Vec<usize>,
    pub radii: Vec<f64>,
    pub curves: Vec<CurvePoint>,
    /// `sup_r |ρ_d(r) - ρ∞(r)|`, one entry per degree.
    pub sup_distance: Vec<f64>,
    /// `d^{-n} K_d(1) / K∞(0)`; convention dependent, informational only.
    pub raw_ratio: Vec<f64>,
    /// Whether `sup_distance` strictly decreases along `degrees`.
    pub monotone: bool,
}

pub fn convergence_report(n: usize, degrees: &[usize], radii: &[f64]) -> Result<CovarianceReport> {
    check_dim(n)?;
    if degrees.is_empty() || radii.is_empty() {
        return Err(Error::precondition("degree list and radii must be nonempty"));
    }
    let k0 = limit_kernel(n, 0.0)?;
    let mut curves = Vec::with_capacity(degrees.len() * radii.len());
    let mut sup_distance = Vec::with_capacity(degrees.len());
    let mut raw_ratio = Vec::with_capacity(degrees.len());
    for &d in degrees {
        if d == 0 {
            return Err(Error::precondition("degrees must be positive"));
        }
        let spec = EnsembleSpec::harmonic(n, d, 0);
        let kd0 = rescaled_kernel(&spec, 0.0)?;
        raw_ratio.push(kd0 / k0);
        let mut sup: f64 = 0.0;
        for &r in radii {
            let rho_d = rescaled_kernel(&spec, r)? / kd0;
            let rho_inf = limit_kernel(n, r)? / k0;
            sup = sup.max((rho_d - rho_inf).abs());
            curves.push(CurvePoint { d, r, rho_d, rho_inf });
        }
        sup_distance.push(sup);
    }
    let monotone = sup_distance.windows(2).all(|w| w[1] < w[0]);
    Ok(CovarianceReport {
        n,
        degrees: degrees.to_vec(),
        radii: radii.to_vec(),
        curves,
        sup_distance,
        raw_ratio,
        monotone,
    })
}

/// `count` evenly spaced radii on `[0, r_max]`.
pub fn radius_grid(r_max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![0.0];
    }
    (0..count)
        .map(|i| r_max * i as f64 / (count - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    /// Radial Fourier integral of the unit-ball indicator in R³:
    /// 4π ∫₀¹ s² sin(r s)/(r s) ds, by composite Simpson.
    fn ball_transform_quadrature(r: f64) -> f64 {
        let m = 2000;
        let h = 1.0 / m as f64;
        let f = |s: f64| {
            if s == 0.0 {
                0.0
            } else if r == 0.0 {
                s * s
            } else {
                s * s * (r * s).sin() / (r * s)
            }
        };
        let mut acc = f(0.0) + f(1.0);
        for i in 1..m {
            acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        4.0 * PI * acc * h / 3.0
    }

    #[test]
    fn values_at_origin() {
        assert_eq!(limit_kernel(1, 0.0).unwrap(), 2.0);
        assert!((limit_kernel(2, 0.0).unwrap() - PI).abs() < 1e-15);
        assert!((limit_kernel(3, 0.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn three_dimensional_closed_form_matches_radial_integral() {
        for r in [0.0, 0.5, 2.0, 7.3] {
            let q = ball_transform_quadrature(r);
            assert!((limit_kernel(3, r).unwrap() - q).abs() < 1e-9, "r = {r}");
        }
    }

    #[test]
    fn series_and_closed_form_agree_at_crossover() {
        // compared as correlations; the n = 3 closed form carries an f64
        // cancellation error of ~1e-19 / r³ in sin r - r cos r
        for n in 1..=3 {
            let k0 = limit_kernel_series(n, 0.0);
            let s = limit_kernel_series(n, SERIES_CROSSOVER) / k0;
            let c = limit_kernel_closed(n, SERIES_CROSSOVER) / k0;
            assert!((s - c).abs() < 1e-10, "n = {n}: {s} vs {c}");
        }
    }

    #[test]
    fn limit_kernel_is_positive_definite() {
        let pts: [[f64; 3]; 8] = [
            [0.0, 0.0, 0.0],
            [0.3, -0.2, 0.1],
            [-0.5, 0.4, 0.2],
            [0.7, 0.1, -0.6],
            [0.05, 0.9, 0.0],
            [-0.3, -0.3, -0.3],
            [0.2, 0.2, 0.8],
            [-0.8, 0.0, 0.5],
        ];
        for n in 1..=3 {
            let gram = DMatrix::from_fn(8, 8, |i, j| {
                let r = (0..n).map(|a| (pts[i][a] - pts[j][a]).powi(2)).sum::<f64>().sqrt();
                limit_kernel(n, r).unwrap()
            });
            let min = gram.symmetric_eigenvalues().min();
            assert!(min > -1e-10, "n = {n}: min eigenvalue {min}");
        }
    }

    #[test]
    fn rescaled_kernel_examples() {
        let spec = EnsembleSpec::harmonic(2, 12, 0);
        let at0 = rescaled_kernel(&spec, 0.0).unwrap();
        assert!((at0 - ensemble_kernel(&spec, 1.0).unwrap() / 144.0).abs() < 1e-15);
        for d in [10, 17, 30] {
            let s = EnsembleSpec::harmonic(2, d, 0);
            assert!(rescaled_kernel(&s, 0.5).unwrap() < rescaled_kernel(&s, 0.0).unwrap());
        }
        assert!(rescaled_kernel(&EnsembleSpec::kostlan(2, 4, 0), 0.1).is_err());
        assert!(rescaled_kernel(&spec, 100.0).is_err());
    }

    #[test]
    fn convergence_report_examples() {
        let rep = convergence_report(2, &[60], &radius_grid(4.0, 161)).unwrap();
        assert!(rep.sup_distance[0] < 0.05, "{}", rep.sup_distance[0]);
        let single = convergence_report(1, &[20], &[0.0]).unwrap();
        assert_eq!(single.sup_distance, vec![0.0]);
        let n1 = convergence_report(1, &[10, 20, 40, 80], &radius_grid(4.0, 161)).unwrap();
        assert!(n1.monotone, "{:?}", n1.sup_distance);
        assert!(convergence_report(2, &[], &[0.0]).is_err());
    }
}
