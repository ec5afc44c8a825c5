//! Gaussian ensembles of homogeneous polynomials on Sⁿ.
//!
//! * `Harmonic`: i.i.d. standard normals on an L²(Sⁿ)-orthonormal basis of
//!   harmonics of degree ℓ ≤ d with d - ℓ even, extended to R^{n+1} as
//!   `|x|^{d-ℓ} h_{ℓ,j}(x)`.
//! * `Kostlan`: `Σ_α ξ_α √(d! / α₀!⋯αₙ!) x^α` with i.i.d. standard ξ_α.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::AmbientField;
use crate::harmonics::{basis_dimension, check_dim, degree_offsets, harmonic_dim, volume, HarmonicBasis, PackedS2, QuadratureGrid};
use crate::jet::{powi, Scalar};
use crate::rng;
use crate::special::{binomial, ln_factorial, zonal_all};

pub const SAMPLE_FORMAT: &str = "richsing/polynomial-sample";
pub const SAMPLE_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    Harmonic,
    Kostlan,
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "harmonic" => Ok(EnsembleKind::Harmonic),
            "kostlan" => Ok(EnsembleKind::Kostlan),
            other => Err(Error::InvalidSpec(format!("unknown ensemble '{other}'"))),
        }
    }
}

impl std::fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnsembleKind::Harmonic => "harmonic",
            EnsembleKind::Kostlan => "kostlan",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    /// Sphere dimension.
    pub n: usize,
    /// Number of components.
    pub k: usize,
    /// Degree.
    pub d: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn harmonic(n: usize, d: usize, seed: u64) -> Self {
        EnsembleSpec { kind: EnsembleKind::Harmonic, n, k: 1, d, seed }
    }

    pub fn kostlan(n: usize, d: usize, seed: u64) -> Self {
        EnsembleSpec { kind: EnsembleKind::Kostlan, n, k: 1, d, seed }
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.n)?;
        if self.k == 0 {
            return Err(Error::InvalidSpec("codomain dimension k must be at least 1".into()));
        }
        if self.d == 0 {
            return Err(Error::InvalidSpec("degree d must be at least 1".into()));
        }
        Ok(())
    }

    /// Coefficients per component.
    pub fn coefficient_count(&self) -> Result<usize> {
        match self.kind {
            EnsembleKind::Harmonic => basis_dimension(self.n, self.d),
            EnsembleKind::Kostlan => {
                check_dim(self.n)?;
                Ok(binomial(self.d + self.n, self.n) as usize)
            }
        }
    }

    fn stream_key(&self) -> [u64; 4] {
        let kind = match self.kind {
            EnsembleKind::Harmonic => 1,
            EnsembleKind::Kostlan => 2,
        };
        [kind, self.n as u64, self.k as u64, self.d as u64]
    }
}

#[derive(Debug, Clone)]
enum Layout {
    Harmonic {
        basis: Arc<HarmonicBasis>,
        offsets: Vec<usize>,
    },
    Kostlan {
        exponents: Vec<Vec<u32>>,
        weights: Vec<f64>,
    },
}

impl Layout {
    fn new(spec: &EnsembleSpec) -> Result<Self> {
        Ok(match spec.kind {
            EnsembleKind::Harmonic => Layout::Harmonic {
                basis: HarmonicBasis::shared(spec.n, spec.d)?,
                offsets: degree_offsets(spec.n, spec.d, Some(spec.d)),
            },
            EnsembleKind::Kostlan => {
                let exponents = kostlan_exponents(spec.n, spec.d);
                let ln_d = ln_factorial(spec.d);
                let weights = exponents
                    .iter()
                    .map(|a| {
                        let ln_den: f64 = a.iter().map(|&e| ln_factorial(e as usize)).sum();
                        (0.5 * (ln_d - ln_den)).exp()
                    })
                    .collect();
                Layout::Kostlan { exponents, weights }
            }
        })
    }
}

/// Exponent vectors α with |α| = d in n + 1 variables, α₀ descending first.
pub fn kostlan_exponents(n: usize, d: usize) -> Vec<Vec<u32>> {
    fn rec(prefix: &mut Vec<u32>, remaining: u32, vars_left: usize, out: &mut Vec<Vec<u32>>) {
        if vars_left == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for a in (0..=remaining).rev() {
            prefix.push(a);
            rec(prefix, remaining - a, vars_left - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), d as u32, n + 1, &mut out);
    out
}

/// One draw from an ensemble.
#[derive(Debug, Clone)]
pub struct PolynomialSample {
    spec: EnsembleSpec,
    index: u64,
    coefficients: Vec<Vec<f64>>,
    layout: Layout,
    /// Per-component fast evaluators for f64 values at unit points.
    fast: Vec<FastEval>,
}

#[derive(Debug, Clone)]
enum FastEval {
    S2(PackedS2),
    /// Flat exponent table (n + 1 per term) with weight·coefficient.
    Monomial { exponents: Vec<u32>, weighted: Vec<f64> },
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleRecord {
    pub format: String,
    pub version: u32,
    pub spec: EnsembleSpec,
    pub index: u64,
    pub coefficients: Vec<Vec<f64>>,
}

/// Draws sample number `index`; a pure function of `(spec, index)`.
pub fn sample(spec: &EnsembleSpec, index: u64) -> Result<PolynomialSample> {
    spec.validate()?;
    let count = spec.coefficient_count()?;
    let normals = rng::standard_normals(spec.seed, &spec.stream_key(), index, count * spec.k);
    let coefficients = normals.chunks(count).map(|c| c.to_vec()).collect();
    PolynomialSample::assemble(*spec, index, coefficients)
}

impl PolynomialSample {
    /// Builds a sample with given coefficients (ξ_{ℓ,j} or ξ_α) per component.
    pub fn from_coefficients(spec: EnsembleSpec, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        let count = spec.coefficient_count()?;
        if coefficients.len() != spec.k || coefficients.iter().any(|c| c.len() != count) {
            return Err(Error::InvalidSpec(format!(
                "expected {} components of {count} coefficients",
                spec.k
            )));
        }
        Self::assemble(spec, 0, coefficients)
    }

    fn assemble(spec: EnsembleSpec, index: u64, coefficients: Vec<Vec<f64>>) -> Result<Self> {
        let layout = Layout::new(&spec)?;
        let fast = coefficients
            .iter()
            .map(|c| match &layout {
                Layout::Harmonic { basis, offsets } if spec.n == 2 => {
                    let d = spec.d;
                    FastEval::S2(PackedS2::new(basis.clone(), |ell, j| {
                        if (d - ell) % 2 == 0 {
                            c[offsets[ell] + j]
                        } else {
                            0.0
                        }
                    }))
                }
                Layout::Kostlan { exponents, weights } => FastEval::Monomial {
                    exponents: exponents.iter().flatten().copied().collect(),
                    weighted: weights.iter().zip(c).map(|(w, c)| w * c).collect(),
                },
                _ => FastEval::None,
            })
            .collect();
        Ok(PolynomialSample {
            spec,
            index,
            coefficients,
            layout,
            fast,
        })
    }

    /// f64 value of component `i`, using the fast evaluator where possible.
    fn value_of(&self, i: usize, x: &[f64]) -> f64 {
        match &self.fast[i] {
            FastEval::S2(packed) => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if (r2 - 1.0).abs() <= 1e-12 {
                    return packed.eval_unit(x);
                }
            }
            FastEval::Monomial { exponents, weighted } => {
                let d = self.spec.d;
                let vars = x.len();
                let mut pw = vec![1.0; vars * (d + 1)];
                for (v, &xv) in x.iter().enumerate() {
                    for e in 1..=d {
                        pw[v * (d + 1) + e] = pw[v * (d + 1) + e - 1] * xv;
                    }
                }
                let mut acc = 0.0;
                if vars == 3 {
                    // exponents run α₀ descending, then α₁ descending
                    let (p0, rest) = pw.split_at(d + 1);
                    let (p1, p2) = rest.split_at(d + 1);
                    let mut t = 0;
                    for a0 in (0..=d).rev() {
                        let mut inner = 0.0;
                        let m = d - a0;
                        for a1 in (0..=m).rev() {
                            inner += weighted[t] * p1[a1] * p2[m - a1];
                            t += 1;
                        }
                        acc += inner * p0[a0];
                    }
                    return acc;
                }
                for (t, &w) in weighted.iter().enumerate() {
                    let mut m = w;
                    for v in 0..vars {
                        m *= pw[v * (d + 1) + exponents[t * vars + v] as usize];
                    }
                    acc += m;
                }
                return acc;
            }
            FastEval::None => {}
        }
        let c = self.coefficients[i].as_slice();
        self.eval_with(&[c], x)[0]
    }

    /// A harmonic-ensemble polynomial equal to the single harmonic `h_{ℓ,j}`
    /// times `|x|^{d-ℓ}`.
    pub fn single_harmonic(n: usize, d: usize, ell: usize, j: usize, seed: u64) -> Result<Self> {
        if ell > d || (d - ell) % 2 != 0 || j >= harmonic_dim(n, ell) {
            return Err(Error::domain(format!("h_({ell},{j}) is not in the degree-{d} ensemble")));
        }
        let spec = EnsembleSpec::harmonic(n, d, seed);
        let offsets = degree_offsets(n, d, Some(d));
        let mut c = vec![0.0; spec.coefficient_count()?];
        c[offsets[ell] + j] = 1.0;
        Self::from_coefficients(spec, vec![c])
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn coefficients(&self) -> &[Vec<f64>] {
        &self.coefficients
    }

    /// Euclidean norm of the coefficient table.
    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().flatten().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Kostlan monomial weights `√(d!/α!)`, `None` for harmonic samples.
    pub fn kostlan_weights(&self) -> Option<(&[Vec<u32>], &[f64])> {
        match &self.layout {
            Layout::Kostlan { exponents, weights } => Some((exponents, weights)),
            Layout::Harmonic { .. } => None,
        }
    }

    pub fn to_record(&self) -> SampleRecord {
        SampleRecord {
            format: SAMPLE_FORMAT.to_string(),
            version: SAMPLE_VERSION,
            spec: self.spec,
            index: self.index,
            coefficients: self.coefficients.clone(),
        }
    }

    pub fn from_record(record: SampleRecord) -> Result<Self> {
        if record.format != SAMPLE_FORMAT || record.version != SAMPLE_VERSION {
            return Err(Error::InvalidSpec(format!(
                "unsupported sample record {} v{}",
                record.format, record.version
            )));
        }
        let mut s = Self::from_coefficients(record.spec, record.coefficients)?;
        s.index = record.index;
        Ok(s)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(serde_json::from_str(s)?)
    }

    /// All k components at an ambient point (homogeneous degree-d extension).
    pub fn eval_components<T: Scalar>(&self, x: &[T]) -> Vec<T> {
        let coeffs: Vec<&[f64]> = self.coefficients.iter().map(|c| c.as_slice()).collect();
        self.eval_with(&coeffs, x)
    }

    fn eval_with<T: Scalar>(&self, coeffs: &[&[f64]], x: &[T]) -> Vec<T> {
        let mut acc = vec![T::constant(0.0); coeffs.len()];
        match &self.layout {
            Layout::Harmonic { basis, offsets } => {
                let d = self.spec.d;
                let r2 = x.iter().fold(T::constant(0.0), |a, &v| a + v * v);
                let mut rpow = Vec::with_capacity(d / 2 + 1);
                rpow.push(T::constant(1.0));
                for m in 1..=d / 2 {
                    rpow.push(rpow[m - 1] * r2);
                }
                basis.visit(x, Some(d), &mut |ell, j, v| {
                    let idx = offsets[ell] + j;
                    let vv = if ell == d { v } else { v * rpow[(d - ell) / 2] };
                    for (c, a) in coeffs.iter().zip(acc.iter_mut()) {
                        *a += vv * c[idx];
                    }
                });
            }
            Layout::Kostlan { exponents, weights } => {
                let d = self.spec.d;
                let pw: Vec<Vec<T>> = x
                    .iter()
                    .map(|&xi| {
                        let mut p = Vec::with_capacity(d + 1);
                        p.push(T::constant(1.0));
                        for e in 1..=d {
                            p.push(p[e - 1] * xi);
                        }
                        p
                    })
                    .collect();
                for (i, (a, w)) in exponents.iter().zip(weights).enumerate() {
                    let mut mono = pw[0][a[0] as usize];
                    for v in 1..a.len() {
                        mono = mono * pw[v][a[v] as usize];
                    }
                    let mono = mono * *w;
                    for (c, s) in coeffs.iter().zip(acc.iter_mut()) {
                        *s += mono * c[i];
                    }
                }
            }
        }
        acc
    }

    pub fn component(&self, i: usize) -> Component<'_> {
        assert!(i < self.spec.k, "component {i} out of range");
        Component { sample: self, index: i }
    }
}

/// Evaluates the first component; use [`PolynomialSample::component`] for k > 1.
impl AmbientField for PolynomialSample {
    fn ambient_dim(&self) -> usize {
        self.spec.n + 1
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        self.eval_with(&[self.coefficients[0].as_slice()], x)[0]
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.value_of(0, x)
    }
    fn degree_hint(&self) -> usize {
        self.spec.d
    }
    fn parity(&self) -> Option<usize> {
        Some(self.spec.d % 2)
    }
}

/// One component of a vector-valued sample.
#[derive(Clone, Copy, Debug)]
pub struct Component<'a> {
    sample: &'a PolynomialSample,
    index: usize,
}

impl AmbientField for Component<'_> {
    fn ambient_dim(&self) -> usize {
        self.sample.spec.n + 1
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let c = self.sample.coefficients[self.index].as_slice();
        self.sample.eval_with(&[c], x)[0]
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.sample.value_of(self.index, x)
    }
    fn degree_hint(&self) -> usize {
        self.sample.spec.d
    }
    fn parity(&self) -> Option<usize> {
        Some(self.sample.spec.d % 2)
    }
}

/// L² norm `(∫_{Sⁿ} Σᵢ pᵢ²)^{1/2}` by quadrature.
pub fn l2_norm(p: &PolynomialSample, grid: &QuadratureGrid) -> Result<f64> {
    let spec = p.spec();
    if grid.n != spec.n {
        return Err(Error::precondition(format!("grid is on S^{}, sample on S^{}", grid.n, spec.n)));
    }
    if grid.exactness < 2 * spec.d {
        return Err(Error::precondition(format!(
            "grid exact to degree {}, need {}",
            grid.exactness,
            2 * spec.d
        )));
    }
    let total: f64 = grid
        .points
        .iter()
        .zip(&grid.weights)
        .map(|(x, w)| w * p.eval_components(x.as_slice()).iter().map(|v| v * v).sum::<f64>())
        .sum();
    Ok(total.sqrt())
}

/// Scalar part of the covariance `E p(x) p(y)ᵀ = K(⟨x, y⟩) · I_k` of the
/// harmonic ensemble.
pub fn ensemble_kernel(spec: &EnsembleSpec, t: f64) -> Result<f64> {
    spec.validate()?;
    if spec.kind == EnsembleKind::Kostlan {
        return Err(Error::Unsupported(
            "ensemble_kernel is for the harmonic ensemble; use kostlan_kernel".into(),
        ));
    }
    if t.abs() > 1.0 + 1e-12 {
        return Err(Error::domain(format!("|t| = {} exceeds 1", t.abs())));
    }
    let t = t.clamp(-1.0, 1.0);
    let vol = volume(spec.n);
    let zon = zonal_all(spec.n, spec.d, t);
    Ok((0..=spec.d)
        .filter(|l| (spec.d - l) % 2 == 0)
        .map(|l| harmonic_dim(spec.n, l) as f64 / vol * zon[l])
        .sum())
}

/// Kostlan covariance `E p(x) p(y) = ⟨x, y⟩^d`.
pub fn kostlan_kernel(d: usize, t: f64) -> f64 {
    powi(t, d as u32)
}

/// Correlation `K(t) / K(1)` for either ensemble.
pub fn normalized_correlation(spec: &EnsembleSpec, t: f64) -> Result<f64> {
    match spec.kind {
        EnsembleKind::Kostlan => Ok(kostlan_kernel(spec.d, t)),
        EnsembleKind::Harmonic => Ok(ensemble_kernel(spec, t)? / ensemble_kernel(spec, 1.0)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sampling_is_deterministic() {
        let spec = EnsembleSpec::harmonic(2, 4, 11);
        let a = sample(&spec, 0).unwrap();
        let b = sample(&spec, 0).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        assert_ne!(a.coefficients(), sample(&spec, 1).unwrap().coefficients());
    }

    #[test]
    fn coefficient_counts() {
        let h = sample(&EnsembleSpec::harmonic(2, 5, 0), 0).unwrap();
        assert_eq!(h.coefficients()[0].len(), basis_dimension(2, 5).unwrap());
        let mut spec = EnsembleSpec::kostlan(3, 4, 0);
        spec.k = 2;
        let k = sample(&spec, 0).unwrap();
        assert_eq!(k.coefficients().len(), 2);
        assert_eq!(k.coefficients()[1].len(), 35);
    }

    #[test]
    fn kostlan_extreme_weight_is_one() {
        let s = sample(&EnsembleSpec::kostlan(1, 9, 0), 0).unwrap();
        let (exps, w) = s.kostlan_weights().unwrap();
        assert_eq!(exps[0], vec![9, 0]);
        assert!((w[0] - 1.0).abs() < 1e-14);
        // middle weight √C(9,4)
        let mid = exps.iter().position(|e| e == &vec![5, 4]).unwrap();
        assert!((w[mid] - 126f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(sample(&EnsembleSpec::harmonic(4, 3, 0), 0).is_err());
        assert!(sample(&EnsembleSpec::harmonic(2, 0, 0), 0).is_err());
        let mut s = EnsembleSpec::harmonic(2, 3, 0);
        s.k = 0;
        assert!(sample(&s, 0).is_err());
    }

    #[test]
    fn l2_norm_of_single_harmonic_and_pythagoras() {
        let grid = QuadratureGrid::for_degree(2, 8).unwrap();
        let h = PolynomialSample::single_harmonic(2, 4, 2, 3, 0).unwrap();
        assert!((l2_norm(&h, &grid).unwrap() - 1.0).abs() < 1e-12);

        let spec = EnsembleSpec::harmonic(2, 4, 0);
        let mut c = vec![0.0; 15];
        c[0] = 3.0;
        c[7] = 4.0;
        let p = PolynomialSample::from_coefficients(spec, vec![c]).unwrap();
        assert!((l2_norm(&p, &grid).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn l2_norm_of_kostlan_power_matches_wallis() {
        // p = x₀^d on S¹; ∫ cos^{2d} θ dθ = 2π (2d-1)!! / (2d)!!
        let d = 6;
        let spec = EnsembleSpec::kostlan(1, d, 0);
        let mut c = vec![0.0; d + 1];
        c[0] = 1.0;
        let p = PolynomialSample::from_coefficients(spec, vec![c]).unwrap();
        let mut wallis = 2.0 * PI;
        for i in 1..=d {
            wallis *= (2 * i - 1) as f64 / (2 * i) as f64;
        }
        let got = l2_norm(&p, &QuadratureGrid::circle(64)).unwrap();
        assert!((got - wallis.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn harmonic_norm_equals_coefficient_norm() {
        let spec = EnsembleSpec::harmonic(3, 5, 2);
        let grid = QuadratureGrid::for_degree(3, 10).unwrap();
        for i in 0..3 {
            let p = sample(&spec, i).unwrap();
            let rel = (l2_norm(&p, &grid).unwrap() - p.coefficient_norm()).abs() / p.coefficient_norm();
            assert!(rel < 1e-8);
        }
    }

    #[test]
    fn insufficient_grid_rejected() {
        let p = sample(&EnsembleSpec::harmonic(1, 5, 0), 0).unwrap();
        assert!(matches!(l2_norm(&p, &QuadratureGrid::circle(8)), Err(Error::Precondition(_))));
    }

    #[test]
    fn kernel_values_at_one() {
        let k = ensemble_kernel(&EnsembleSpec::harmonic(2, 4, 0), 1.0).unwrap();
        assert!((k - 15.0 / (4.0 * PI)).abs() < 1e-13);
        let k = ensemble_kernel(&EnsembleSpec::harmonic(1, 3, 0), 1.0).unwrap();
        assert!((k - 4.0 / (2.0 * PI)).abs() < 1e-13);
        assert!(matches!(
            ensemble_kernel(&EnsembleSpec::kostlan(2, 4, 0), 0.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn antipodal_parity() {
        for d in [3, 4] {
            let p = sample(&EnsembleSpec::harmonic(2, d, 5), 0).unwrap();
            let x = [0.6, 0.0, 0.8];
            let mx = [-0.6, 0.0, -0.8];
            let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(p.value(&mx), sign * p.value(&x));
        }
    }

    #[test]
    fn json_record_roundtrip() {
        let p = sample(&EnsembleSpec::kostlan(2, 3, 9), 4).unwrap();
        let back = PolynomialSample::from_json(&p.to_json().unwrap()).unwrap();
        assert_eq!(back.coefficients(), p.coefficients());
        assert_eq!(back.index(), 4);
        assert_eq!(back.spec(), p.spec());
    }

    #[test]
    fn fast_values_match_generic_evaluation() {
        let pts = [[0.6, 0.0, 0.8], [-0.2, 0.3, 0.5f64.sqrt()], [0.0, 1.0, 0.0]];
        for spec in [EnsembleSpec::harmonic(2, 13, 1), EnsembleSpec::kostlan(2, 9, 1), EnsembleSpec::kostlan(3, 5, 2)] {
            let p = sample(&spec, 2).unwrap();
            for x in &pts {
                let mut y = x.to_vec();
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                y.iter_mut().for_each(|v| *v /= norm);
                y.resize(spec.n + 1, 0.0);
                let generic: f64 = p.eval(&y);
                assert!((p.value(&y) - generic).abs() < 1e-12 * (1.0 + generic.abs()));
            }
        }
    }
}
