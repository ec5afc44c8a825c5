//! Real orthonormal spherical harmonics on S¹, S² and S³.
//!
//! Harmonics are built inductively. On S¹ they are the real and imaginary
//! parts of `(x₀ + i x₁)^ℓ`. On Sⁿ (n = 2, 3) a harmonic of degree ℓ is
//!
//! ```text
//! h(x) = Ĝ_{ℓ-k}^{(λ)}(x₀, |x|²) · g(x₁, …, xₙ),   λ = k + (n-1)/2,
//! ```
//!
//! where `g` is a degree-k harmonic on S^{n-1} (as a homogeneous polynomial)
//! and `Ĝ_j(x₀, r²) = r^j Ĉ_j(x₀ / r)` is the homogenized, L²-normalized
//! Gegenbauer polynomial. All evaluations are polynomial arithmetic, so
//! running them on [`Jet`](crate::jet::Jet) inputs yields exact ambient
//! gradients and Hessians of the homogeneous extension.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar};
use crate::special::{gauss_chebyshev_second, gauss_legendre, ln_factorial, ln_gamma_half, sphere_volume};

/// Inputs further than this from the unit sphere are rejected.
pub const UNIT_REJECT_TOL: f64 = 1e-9;

/// Dimension of the space of degree-ℓ harmonics on Sⁿ.
pub fn harmonic_dim(n: usize, ell: usize) -> usize {
    match n {
        1 => {
            if ell == 0 {
                1
            } else {
                2
            }
        }
        2 => 2 * ell + 1,
        3 => (ell + 1) * (ell + 1),
        _ => 0,
    }
}

/// Number of ensemble basis functions: harmonics of degree ℓ ≤ d with d - ℓ even.
pub fn basis_dimension(n: usize, d: usize) -> Result<usize> {
    check_dim(n)?;
    Ok((0..=d).filter(|l| (d - l) % 2 == 0).map(|l| harmonic_dim(n, l)).sum())
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=3).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// Renormalizes `x` onto the unit sphere if it is within
/// [`UNIT_REJECT_TOL`]; rejects it otherwise.
pub fn check_unit(x: &[f64]) -> Result<Vec<f64>> {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > UNIT_REJECT_TOL || !norm.is_finite() {
        return Err(Error::domain(format!("point has norm {norm}, expected a unit vector")));
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicIndex {
    pub n: usize,
    pub ell: usize,
    pub j: usize,
}

impl HarmonicIndex {
    pub fn new(n: usize, ell: usize, j: usize) -> Result<Self> {
        check_dim(n)?;
        if j >= harmonic_dim(n, ell) {
            return Err(Error::domain(format!(
                "index j = {j} out of range for degree {ell} on S^{n}"
            )));
        }
        Ok(HarmonicIndex { n, ell, j })
    }
}

/// Recurrence coefficients of the normalized Gegenbauer family for one λ.
#[derive(Debug)]
struct GegenbauerTable {
    c0: f64,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl GegenbauerTable {
    /// `twice_lambda` is 2λ, so half-integer λ stays exact.
    fn new(twice_lambda: usize, jmax: usize) -> Self {
        let lam = twice_lambda as f64 / 2.0;
        // ln of ∫ C_j^λ(t)² (1-t²)^{λ-1/2} dt
        //   = π 2^{1-2λ} Γ(j+2λ) / (j! (j+λ) Γ(λ)²)
        let ln_h = |j: usize| {
            PI.ln() + (1.0 - 2.0 * lam) * 2f64.ln() + ln_gamma_half(2 * j + 2 * twice_lambda)
                - ln_factorial(j)
                - (j as f64 + lam).ln()
                - 2.0 * ln_gamma_half(twice_lambda)
        };
        let mut alpha = vec![0.0; jmax + 1];
        let mut beta = vec![0.0; jmax + 1];
        for j in 1..=jmax {
            let jf = j as f64;
            alpha[j] = 2.0 * (jf + lam - 1.0) / jf * (0.5 * (ln_h(j - 1) - ln_h(j))).exp();
            if j >= 2 {
                beta[j] = (jf + 2.0 * lam - 2.0) / jf * (0.5 * (ln_h(j - 2) - ln_h(j))).exp();
            }
        }
        GegenbauerTable {
            c0: (-0.5 * ln_h(0)).exp(),
            alpha,
            beta,
        }
    }
}

/// Precomputed recurrence tables for all harmonics of degree ≤ `lmax` on
/// Sⁿ. Immutable after construction; share it freely across threads.
#[derive(Debug)]
pub struct HarmonicBasis {
    n: usize,
    lmax: usize,
    lift: Vec<GegenbauerTable>,
    sub: Option<Box<HarmonicBasis>>,
}

impl HarmonicBasis {
    pub fn new(n: usize, lmax: usize) -> Result<Self> {
        check_dim(n)?;
        let (lift, sub) = if n == 1 {
            (Vec::new(), None)
        } else {
            let lift = (0..=lmax)
                .map(|k| GegenbauerTable::new(2 * k + n - 1, lmax - k))
                .collect();
            (lift, Some(Box::new(HarmonicBasis::new(n - 1, lmax)?)))
        };
        Ok(HarmonicBasis { n, lmax, lift, sub })
    }

    /// Process-wide cache, keyed by `(n, lmax)`.
    pub fn shared(n: usize, lmax: usize) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<HarmonicBasis>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(b) = cache.lock().expect("basis cache poisoned").get(&(n, lmax)) {
            return Ok(b.clone());
        }
        let basis = Arc::new(HarmonicBasis::new(n, lmax)?);
        cache
            .lock()
            .expect("basis cache poisoned")
            .insert((n, lmax), basis.clone());
        Ok(basis)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    /// Calls `f(ℓ, j, h_{ℓ,j}(x))` for every harmonic with ℓ ≤ lmax and, if
    /// `parity` is set, ℓ ≡ parity (mod 2). `x` has `n + 1` coordinates and
    /// the values are those of the homogeneous degree-ℓ polynomials.
    pub fn visit<T: Scalar>(&self, x: &[T], parity: Option<usize>, f: &mut impl FnMut(usize, usize, T)) {
        self.visit_dyn(x, parity, f)
    }

    fn visit_dyn<T: Scalar>(&self, x: &[T], parity: Option<usize>, f: &mut dyn FnMut(usize, usize, T)) {
        debug_assert_eq!(x.len(), self.n + 1);
        let keep = |ell: usize| parity.is_none_or(|p| ell % 2 == p % 2);
        if self.n == 1 {
            let inv_sqrt_pi = 1.0 / PI.sqrt();
            if keep(0) {
                f(0, 0, T::constant(1.0 / (2.0 * PI).sqrt()));
            }
            let (mut re, mut im) = (T::constant(1.0), T::constant(0.0));
            for m in 1..=self.lmax {
                let next_re = re * x[0] - im * x[1];
                im = re * x[1] + im * x[0];
                re = next_re;
                if keep(m) {
                    f(m, 0, re * inv_sqrt_pi);
                    f(m, 1, im * inv_sqrt_pi);
                }
            }
            return;
        }

        let sub = self.sub.as_ref().expect("lifted basis has a sub-basis");
        let mut sub_vals: Vec<Vec<T>> = (0..=self.lmax)
            .map(|k| Vec::with_capacity(harmonic_dim(self.n - 1, k)))
            .collect();
        sub.visit_dyn(&x[1..], None, &mut |k, _, v| sub_vals[k].push(v));

        let r2 = x.iter().fold(T::constant(0.0), |acc, &xi| acc + xi * xi);
        let x0 = x[0];
        for (k, table) in self.lift.iter().enumerate() {
            let mut g_prev = T::constant(0.0);
            let mut g = T::constant(table.c0);
            for jj in 0..=(self.lmax - k) {
                if jj >= 1 {
                    let mut next = x0 * g * table.alpha[jj];
                    if jj >= 2 {
                        next = next - r2 * g_prev * table.beta[jj];
                    }
                    g_prev = g;
                    g = next;
                }
                let ell = k + jj;
                if keep(ell) {
                    for (s, &gv) in sub_vals[k].iter().enumerate() {
                        f(ell, self.sub_offset(k) + s, g * gv);
                    }
                }
            }
        }
    }

    /// Position of the first harmonic built on a degree-k sub-harmonic
    /// within its degree-ℓ eigenspace.
    fn sub_offset(&self, k: usize) -> usize {
        match self.n {
            2 => {
                if k == 0 {
                    0
                } else {
                    2 * k - 1
                }
            }
            3 => k * k,
            _ => 0,
        }
    }

    /// Values of every harmonic of degree ≤ lmax, in (ℓ, j) order.
    pub fn eval_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        let x = check_unit(x)?;
        let offsets = degree_offsets(self.n, self.lmax, None);
        let mut out = vec![0.0; offsets[self.lmax + 1]];
        self.visit(&x, None, &mut |ell, j, v| out[offsets[ell] + j] = v);
        Ok(out)
    }

    /// Value, ambient gradient and ambient Hessian of `h_{ℓ,j}` (as a
    /// homogeneous degree-ℓ polynomial) at the unit point `x`.
    pub fn eval_harmonic_jet(&self, idx: HarmonicIndex, x: &[f64]) -> Result<HarmonicJet> {
        if idx.n != self.n || idx.ell > self.lmax {
            return Err(Error::domain(format!("{idx:?} is not covered by this basis")));
        }
        HarmonicIndex::new(idx.n, idx.ell, idx.j)?;
        let x = check_unit(x)?;
        let mut out = None;
        match self.n {
            1 => self.visit_jets::<2>(&x, &mut |e, j, jet| {
                if (e, j) == (idx.ell, idx.j) {
                    out = Some(HarmonicJet::from_jet(&jet));
                }
            }),
            2 => self.visit_jets::<3>(&x, &mut |e, j, jet| {
                if (e, j) == (idx.ell, idx.j) {
                    out = Some(HarmonicJet::from_jet(&jet));
                }
            }),
            _ => self.visit_jets::<4>(&x, &mut |e, j, jet| {
                if (e, j) == (idx.ell, idx.j) {
                    out = Some(HarmonicJet::from_jet(&jet));
                }
            }),
        }
        Ok(out.expect("index validated above"))
    }

    fn visit_jets<const N: usize>(&self, x: &[f64], f: &mut impl FnMut(usize, usize, Jet<N>)) {
        let mut xa = [0.0; N];
        xa.copy_from_slice(x);
        let seeded = Jet::<N>::seed(&xa);
        self.visit(&seeded, None, f);
    }
}

/// A fixed combination of S² harmonics, regrouped by the S¹ factor so that
/// evaluation at unit points is one Gegenbauer sweep per k with no
/// per-harmonic dispatch.
#[derive(Debug, Clone)]
pub(crate) struct PackedS2 {
    basis: Arc<HarmonicBasis>,
    /// `coef[k][jj] = [weight of the cos-type, weight of the sin-type]`
    /// harmonic of degree `k + jj` built on the degree-k circle harmonic.
    coef: Vec<Vec<[f64; 2]>>,
}

impl PackedS2 {
    pub(crate) fn new(basis: Arc<HarmonicBasis>, weight: impl Fn(usize, usize) -> f64) -> Self {
        assert_eq!(basis.n, 2);
        let lmax = basis.lmax;
        let coef = (0..=lmax)
            .map(|k| {
                (0..=lmax - k)
                    .map(|jj| {
                        let ell = k + jj;
                        let j0 = basis.sub_offset(k);
                        if k == 0 {
                            [weight(ell, j0), 0.0]
                        } else {
                            [weight(ell, j0), weight(ell, j0 + 1)]
                        }
                    })
                    .collect()
            })
            .collect();
        PackedS2 { basis, coef }
    }

    /// Value at a point with `|x| = 1` (the r² factors are dropped).
    pub(crate) fn eval_unit(&self, x: &[f64]) -> f64 {
        let (x0, x1, x2) = (x[0], x[1], x[2]);
        let inv_sqrt_pi = 1.0 / PI.sqrt();
        let (mut re, mut im) = (1.0, 0.0);
        let mut total = 0.0;
        for (k, (table, coef)) in self.basis.lift.iter().zip(&self.coef).enumerate() {
            if k > 0 {
                let next = re * x1 - im * x2;
                im = re * x2 + im * x1;
                re = next;
            }
            let mut g_prev = 0.0;
            let mut g = table.c0;
            let [mut sa, mut sb] = [coef[0][0] * g, coef[0][1] * g];
            for jj in 1..coef.len() {
                let mut next = table.alpha[jj] * x0 * g;
                if jj >= 2 {
                    next -= table.beta[jj] * g_prev;
                }
                g_prev = g;
                g = next;
                sa += coef[jj][0] * g;
                sb += coef[jj][1] * g;
            }
            total += if k == 0 {
                sa / (2.0 * PI).sqrt()
            } else {
                (sa * re + sb * im) * inv_sqrt_pi
            };
        }
        total
    }
}

/// `offsets[ℓ]` is the flat index of `h_{ℓ,0}`; entries of skipped
/// parity repeat the next offset. `offsets[lmax + 1]` is the total count.
pub(crate) fn degree_offsets(n: usize, lmax: usize, parity: Option<usize>) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(lmax + 2);
    let mut acc = 0;
    for ell in 0..=lmax {
        offsets.push(acc);
        if parity.is_none_or(|p| ell % 2 == p % 2) {
            acc += harmonic_dim(n, ell);
        }
    }
    offsets.push(acc);
    offsets
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HarmonicJet {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

impl HarmonicJet {
    fn from_jet<const N: usize>(j: &Jet<N>) -> Self {
        HarmonicJet {
            value: j.v,
            gradient: j.g.to_vec(),
            hessian: j.h.iter().map(|r| r.to_vec()).collect(),
        }
    }
}

/// Convenience wrapper around [`HarmonicBasis::eval_harmonic_jet`].
pub fn eval_harmonic_jet(idx: HarmonicIndex, x: &[f64]) -> Result<HarmonicJet> {
    HarmonicBasis::shared(idx.n, idx.ell)?.eval_harmonic_jet(idx, x)
}

/// Quadrature rule on Sⁿ with positive weights summing to vol(Sⁿ).
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub n: usize,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Polynomials of total degree ≤ `exactness` are integrated exactly.
    pub exactness: usize,
}

impl QuadratureGrid {
    /// Trapezoid rule with `m` equispaced points on S¹ (exact to degree m - 1).
    pub fn circle(m: usize) -> Self {
        let w = 2.0 * PI / m as f64;
        let points = (0..m)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / m as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
        QuadratureGrid {
            n: 1,
            points,
            weights: vec![w; m],
            exactness: m.saturating_sub(1),
        }
    }

    /// Gauss–Legendre in x₀ times a uniform azimuth in (x₁, x₂).
    pub fn sphere2(m_polar: usize, m_azimuth: usize) -> Self {
        let (t, wt) = gauss_legendre(m_polar);
        let ring = Self::circle(m_azimuth);
        let mut points = Vec::with_capacity(m_polar * m_azimuth);
        let mut weights = Vec::with_capacity(m_polar * m_azimuth);
        for (ti, wi) in t.iter().zip(&wt) {
            let s = (1.0 - ti * ti).sqrt();
            for (p, wa) in ring.points.iter().zip(&ring.weights) {
                points.push(vec![*ti, s * p[0], s * p[1]]);
                weights.push(wi * wa);
            }
        }
        QuadratureGrid {
            n: 2,
            points,
            weights,
            exactness: (2 * m_polar - 1).min(ring.exactness),
        }
    }

    /// Gauss–Chebyshev (second kind) in x₀ times a [`sphere2`](Self::sphere2) grid.
    pub fn sphere3(m_polar: usize, inner: &QuadratureGrid) -> Self {
        assert_eq!(inner.n, 2);
        let (t, wt) = gauss_chebyshev_second(m_polar);
        let mut points = Vec::with_capacity(m_polar * inner.points.len());
        let mut weights = Vec::with_capacity(m_polar * inner.points.len());
        for (ti, wi) in t.iter().zip(&wt) {
            let s = (1.0 - ti * ti).sqrt();
            for (p, w2) in inner.points.iter().zip(&inner.weights) {
                points.push(vec![*ti, s * p[0], s * p[1], s * p[2]]);
                weights.push(wi * w2);
            }
        }
        QuadratureGrid {
            n: 3,
            points,
            weights,
            exactness: (2 * m_polar - 1).min(inner.exactness),
        }
    }

    /// Smallest product grid of this family exact to `degree`.
    pub fn for_degree(n: usize, degree: usize) -> Result<Self> {
        check_dim(n)?;
        let polar = degree / 2 + 1;
        Ok(match n {
            1 => Self::circle(degree + 1),
            2 => Self::sphere2(polar, degree + 1),
            _ => Self::sphere3(polar, &Self::sphere2(polar, degree + 1)),
        })
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Largest deviation of the Gram matrix of the ensemble basis (ℓ ≤ d,
/// d - ℓ even) from the identity, under `grid`.
pub fn orthonormality_check(n: usize, d: usize, grid: &QuadratureGrid) -> Result<f64> {
    check_dim(n)?;
    if grid.n != n {
        return Err(Error::precondition(format!("grid is on S^{}, expected S^{n}", grid.n)));
    }
    if grid.exactness < 2 * d {
        return Err(Error::precondition(format!(
            "grid exact to degree {} but degree {} is required",
            grid.exactness,
            2 * d
        )));
    }
    let basis = HarmonicBasis::shared(n, d)?;
    let offsets = degree_offsets(n, d, Some(d));
    let dim = offsets[d + 1];
    let mut gram = vec![0.0; dim * dim];
    let mut vals = vec![0.0; dim];
    for (x, w) in grid.points.iter().zip(&grid.weights) {
        basis.visit(x.as_slice(), Some(d), &mut |ell, j, v| vals[offsets[ell] + j] = v);
        for a in 0..dim {
            let wa = w * vals[a];
            for b in a..dim {
                gram[a * dim + b] += wa * vals[b];
            }
        }
    }
    let mut worst = 0.0f64;
    for a in 0..dim {
        for b in a..dim {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((gram[a * dim + b] - target).abs());
        }
    }
    Ok(worst)
}

/// vol(Sⁿ), re-exported for callers that work with raw kernels.
pub fn volume(n: usize) -> f64 {
    sphere_volume(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_unit(n: usize, seed: u64) -> Vec<f64> {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..=n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        v.into_iter().map(|a| a / norm).collect()
    }

    #[test]
    fn basis_dimension_examples() {
        assert_eq!(basis_dimension(1, 3).unwrap(), 4);
        assert_eq!(basis_dimension(2, 4).unwrap(), 15);
        assert_eq!(basis_dimension(2, 0).unwrap(), 1);
        assert!(matches!(basis_dimension(4, 2), Err(Error::UnsupportedDimension(4))));
    }

    #[test]
    fn basis_dimension_counts_monomials() {
        for n in 1..=3 {
            for d in 0..=30 {
                let monomials = crate::special::binomial(d + n, n) as usize;
                assert_eq!(basis_dimension(n, d).unwrap(), monomials, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn constant_harmonic_on_s2() {
        let x = random_unit(2, 3);
        let jet = eval_harmonic_jet(HarmonicIndex::new(2, 0, 0).unwrap(), &x).unwrap();
        assert!((jet.value - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!(jet.gradient.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn top_harmonics_on_circle_are_trig() {
        let d = 7;
        let theta: f64 = 0.37;
        let x = [theta.cos(), theta.sin()];
        let c = eval_harmonic_jet(HarmonicIndex::new(1, d, 0).unwrap(), &x).unwrap();
        let s = eval_harmonic_jet(HarmonicIndex::new(1, d, 1).unwrap(), &x).unwrap();
        let k = 1.0 / PI.sqrt();
        assert!((c.value - k * (d as f64 * theta).cos()).abs() < 1e-14);
        assert!((s.value - k * (d as f64 * theta).sin()).abs() < 1e-14);
    }

    #[test]
    fn non_unit_input_is_rejected() {
        let idx = HarmonicIndex::new(2, 1, 0).unwrap();
        assert!(matches!(eval_harmonic_jet(idx, &[1.0, 1.0, 0.0]), Err(Error::Domain(_))));
        // tiny rounding is renormalized
        assert!(eval_harmonic_jet(idx, &[1.0 + 1e-12, 0.0, 0.0]).is_ok());
    }

    #[test]
    fn orthonormality_examples() {
        assert!(orthonormality_check(1, 5, &QuadratureGrid::circle(64)).unwrap() < 1e-12);
        let g2 = QuadratureGrid::sphere2(7, 13);
        assert!(orthonormality_check(2, 6, &g2).unwrap() < 1e-10);
        let g0 = QuadratureGrid::sphere2(1, 1);
        assert!(orthonormality_check(2, 0, &g0).unwrap() < 1e-14);
        let g3 = QuadratureGrid::for_degree(3, 10).unwrap();
        assert!(orthonormality_check(3, 5, &g3).unwrap() < 1e-10);
        assert!(orthonormality_check(3, 4, &g3).unwrap() < 1e-10);
    }

    #[test]
    fn insufficient_grid_is_a_precondition_error() {
        let g = QuadratureGrid::circle(8);
        assert!(matches!(orthonormality_check(1, 5, &g), Err(Error::Precondition(_))));
    }

    #[test]
    fn grid_weights_sum_to_sphere_volume() {
        for n in 1..=3 {
            let g = QuadratureGrid::for_degree(n, 9).unwrap();
            let vol = sphere_volume(n);
            assert!((g.total_weight() - vol).abs() / vol < 1e-12);
        }
    }

    #[test]
    fn all_degrees_orthonormal_on_s3() {
        // not only the parity-restricted ensemble: cross-degree products too
        let lmax = 4;
        let grid = QuadratureGrid::for_degree(3, 2 * lmax).unwrap();
        let basis = HarmonicBasis::new(3, lmax).unwrap();
        let vals: Vec<Vec<f64>> = grid.points.iter().map(|x| basis.eval_all(x).unwrap()).collect();
        let dim = vals[0].len();
        assert_eq!(dim, (1..=lmax + 1).map(|k| k * k).sum::<usize>());
        for a in 0..dim {
            for b in 0..dim {
                let g: f64 = vals.iter().zip(&grid.weights).map(|(v, w)| w * v[a] * v[b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                assert!((g - target).abs() < 1e-11, "({a},{b}) -> {g}");
            }
        }
    }
}
