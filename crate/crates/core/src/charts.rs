//! Charts on Sⁿ and the covariant 2-jet calculus.
//!
//! A [`ChartPoint`] fixes a base point `z` and an orthonormal frame of
//! `T_z Sⁿ`, identifying the tangent space with Rⁿ. Two charts hang off it:
//! the Riemannian exponential map and the half-scaled inverse stereographic
//! map `φ_z(y) = σ(y / 2)`, where σ is the usual inverse stereographic
//! projection from `z`. `φ_z(0) = -z`, `d₀φ_z` is an isometry and
//! `φ_z* g = (1 + |y|²/4)⁻² g_eucl`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{ambient_jet, AmbientField};
use crate::harmonics::check_unit;
use crate::jet::Scalar;

/// Angular margin to the cut locus below which τ is refused.
pub const CUT_LOCUS_MARGIN: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct ChartPoint {
    z: DVector<f64>,
    /// Columns form an orthonormal basis of `T_z Sⁿ`.
    frame: DMatrix<f64>,
}

impl ChartPoint {
    /// Frame by Gram–Schmidt over the coordinate axes, taken in order of
    /// increasing |z_i| (ties by index).
    pub fn new(z: &[f64]) -> Result<Self> {
        let z = DVector::from_vec(check_unit(z)?);
        let dim = z.len();
        let mut axes: Vec<usize> = (0..dim).collect();
        axes.sort_by(|&a, &b| z[a].abs().total_cmp(&z[b].abs()).then(a.cmp(&b)));
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(dim - 1);
        for &a in &axes {
            if cols.len() == dim - 1 {
                break;
            }
            let mut v = DVector::zeros(dim);
            v[a] = 1.0;
            v -= &z * z[a];
            for c in &cols {
                let proj = c.dot(&v);
                v -= c * proj;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                cols.push(v / norm);
            }
        }
        Ok(ChartPoint {
            frame: DMatrix::from_columns(&cols),
            z,
        })
    }

    /// Explicit frame; columns must be orthonormal and orthogonal to `z`.
    pub fn with_frame(z: &[f64], frame: DMatrix<f64>) -> Result<Self> {
        let z = DVector::from_vec(check_unit(z)?);
        if frame.nrows() != z.len() || frame.ncols() + 1 != z.len() {
            return Err(Error::domain("frame has the wrong shape"));
        }
        let gram = frame.transpose() * &frame;
        let ortho = (gram - DMatrix::identity(frame.ncols(), frame.ncols())).amax();
        let tangent = (frame.transpose() * &z).amax();
        if ortho > 1e-12 || tangent > 1e-12 {
            return Err(Error::domain("frame is not an orthonormal tangent frame"));
        }
        Ok(ChartPoint { z, frame })
    }

    /// Same frame, base point `-z`.
    pub fn antipodal(&self) -> Self {
        ChartPoint {
            z: -&self.z,
            frame: self.frame.clone(),
        }
    }

    pub fn z(&self) -> &DVector<f64> {
        &self.z
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    /// Sphere dimension n.
    pub fn n(&self) -> usize {
        self.frame.ncols()
    }

    pub fn tangent(&self, v: &[f64]) -> DVector<f64> {
        &self.frame * DVector::from_column_slice(v)
    }
}

pub fn exp_map(c: &ChartPoint, v: &[f64]) -> Result<DVector<f64>> {
    let t = c.tangent(v);
    let r = t.norm();
    if r >= PI {
        return Err(Error::domain(format!("|v| = {r} is beyond the injectivity radius π")));
    }
    if r == 0.0 {
        return Ok(c.z.clone());
    }
    Ok(&c.z * r.cos() + t * (r.sin() / r))
}

/// Inverse of [`exp_map`]; fails at the antipode of the base point.
pub fn log_map(c: &ChartPoint, x: &[f64]) -> Result<DVector<f64>> {
    let x = DVector::from_vec(check_unit(x)?);
    let cos = c.z.dot(&x);
    let perp = &x - &c.z * cos;
    let sin = perp.norm();
    let theta = sin.atan2(cos);
    if theta > PI - CUT_LOCUS_MARGIN {
        return Err(Error::domain("point lies on the cut locus of the base point"));
    }
    if sin == 0.0 {
        return Ok(DVector::zeros(c.n()));
    }
    Ok(c.frame.transpose() * perp * (theta / sin))
}

/// Half-scaled inverse stereographic map from `z`, on any [`Scalar`].
pub fn stereo_map_generic<T: Scalar>(c: &ChartPoint, y: &[T]) -> Vec<T> {
    let dim = c.z.len();
    let mut s2 = T::constant(0.0);
    for &yi in y {
        s2 += yi * yi * 0.25;
    }
    let inv = (s2 + T::constant(1.0)).recip();
    (0..dim)
        .map(|a| {
            // (2 s + (|s|² - 1) z) / (|s|² + 1), with s = y / 2
            let mut num = (s2 - T::constant(1.0)) * c.z[a];
            for (i, &yi) in y.iter().enumerate() {
                num += yi * c.frame[(a, i)];
            }
            num * inv
        })
        .collect()
}

pub fn stereo_map(c: &ChartPoint, y: &[f64]) -> DVector<f64> {
    DVector::from_vec(stereo_map_generic(c, y))
}

/// Conformal factor of [`stereo_map`]: `φ* g = λ(y)² g_eucl`, returns λ(y).
pub fn stereo_conformal_factor(y: &[f64]) -> f64 {
    1.0 / (1.0 + 0.25 * y.iter().map(|v| v * v).sum::<f64>())
}

/// Stereographic coordinates of a sphere point (inverse of [`stereo_map`]).
pub fn stereo_inverse(c: &ChartPoint, x: &[f64]) -> Result<DVector<f64>> {
    let x = DVector::from_column_slice(x);
    let denom = 1.0 - c.z.dot(&x);
    if denom <= 1e-14 {
        return Err(Error::domain("the chart pole has no stereographic coordinates"));
    }
    // s = P_T x / (1 - ⟨z, x⟩), y = 2 s
    Ok(c.frame.transpose() * x * (2.0 / denom))
}

/// `τ = exp_{-z}⁻¹ ∘ φ_z`, both charts sharing the frame of `c`.
pub fn tau_map(c: &ChartPoint, u: &[f64]) -> Result<DVector<f64>> {
    let x = stereo_map(c, u);
    log_map(&c.antipodal(), x.as_slice())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Exp,
    Stereo,
}

impl std::str::FromStr for ChartKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp" => Ok(ChartKind::Exp),
            "stereo" => Ok(ChartKind::Stereo),
            other => Err(Error::domain(format!("unknown chart '{other}'"))),
        }
    }
}

/// `d^{-n/2} p(χ(v / d))` with χ the exponential or stereographic chart.
///
/// Note `stereo_map(c, 0) = -z`: the stereographic field based at `c`
/// matches the exponential field based at `c.antipodal()`.
pub fn rescaled_field<F: AmbientField>(p: &F, c: &ChartPoint, d: usize, v: &[f64], which: ChartKind) -> Result<f64> {
    let vnorm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if vnorm > 1.0 + 1e-12 {
        return Err(Error::domain(format!("|v| = {vnorm} lies outside the unit disk")));
    }
    let df = d as f64;
    let scaled: Vec<f64> = v.iter().map(|a| a / df).collect();
    let x = match which {
        ChartKind::Exp => exp_map(c, &scaled)?,
        ChartKind::Stereo => stereo_map(c, &scaled),
    };
    Ok(df.powf(-(c.n() as f64) / 2.0) * p.value(x.as_slice()))
}

/// Point, value, covariant gradient and covariant Hessian of a field on Sⁿ.
///
/// `u` and `q` are expressed in ambient coordinates: `u ⟂ x`, and `q` is
/// the symmetric (n+1)×(n+1) matrix of the Hessian form extended by zero
/// along `x`.
#[derive(Clone, Debug)]
pub struct JetSample {
    pub x: DVector<f64>,
    pub a: f64,
    pub u: DVector<f64>,
    pub q: DMatrix<f64>,
}

impl JetSample {
    /// `u` and `q` in the frame of `T_x Sⁿ` given by the columns of `frame`.
    pub fn in_frame(&self, frame: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
        (frame.transpose() * &self.u, frame.transpose() * &self.q * frame)
    }
}

/// Covariant jet: `u = P ∇F`, `q = P ∇²F P - ⟨x, ∇F⟩ P` with `P = I - x xᵀ`.
/// For a degree-d homogeneous `F`, `⟨x, ∇F⟩ = d F(x)`.
pub fn covariant_jet<F: AmbientField>(p: &F, x: &[f64]) -> Result<JetSample> {
    let x = DVector::from_vec(check_unit(x)?);
    Ok(covariant_jet_unchecked(p, &x))
}

pub(crate) fn covariant_jet_unchecked<F: AmbientField>(p: &F, x: &DVector<f64>) -> JetSample {
    let aj = ambient_jet(p, x.as_slice());
    let dim = x.len();
    let proj = DMatrix::identity(dim, dim) - x * x.transpose();
    let radial = x.dot(&aj.gradient);
    let u = &proj * &aj.gradient;
    let mut q = &proj * &aj.hessian * &proj - &proj * radial;
    q = (&q + q.transpose()) * 0.5;
    JetSample { x: x.clone(), a: aj.value, u, q }
}

/// Orthonormal basis (columns) of the complement of `span(normals)` in
/// R^dim, by Gram–Schmidt over the coordinate axes.
pub(crate) fn complement_frame(dim: usize, normals: &[&DVector<f64>]) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for nv in normals {
        let mut v = (*nv).clone();
        for b in &basis {
            let p = b.dot(&v);
            v -= b * p;
        }
        let nn = v.norm();
        if nn > 1e-12 {
            basis.push(v / nn);
        }
    }
    let fixed = basis.len();
    let mut axes: Vec<(f64, usize)> = (0..dim)
        .map(|a| (basis.iter().map(|b| b[a] * b[a]).sum::<f64>(), a))
        .collect();
    axes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for (_, a) in axes {
        if basis.len() == dim {
            break;
        }
        let mut v = DVector::zeros(dim);
        v[a] = 1.0;
        for b in &basis {
            let p = b.dot(&v);
            v -= b * p;
        }
        let nn = v.norm();
        if nn > 1e-6 {
            basis.push(v / nn);
        }
    }
    DMatrix::from_columns(&basis[fixed..])
}

/// Default regularity threshold for a gradient of typical size `scale`.
pub fn regularity_threshold(scale: f64) -> f64 {
    1e-8 * scale
}

/// Second fundamental form of the level set `{p = p(x)}` through `x`,
/// `h = -q|_{u⊥} / |u|`, as an (n-1)×(n-1) matrix in an orthonormal frame
/// of `u⊥ ⊂ T_x Sⁿ`. Defined up to the sign of the normal.
pub fn second_fundamental_form(j: &JetSample, threshold: f64) -> Result<DMatrix<f64>> {
    let norm = j.u.norm();
    if norm <= threshold {
        return Err(Error::NonRegularPoint { norm, threshold });
    }
    if j.a.abs() > 1e-6 * norm.max(1.0) {
        return Err(Error::precondition(format!(
            "point is not on the zero set (value {:e})",
            j.a
        )));
    }
    Ok(shape_form(j))
}

pub(crate) fn shape_form(j: &JetSample) -> DMatrix<f64> {
    let norm = j.u.norm();
    let e = complement_frame(j.x.len(), &[&j.x, &j.u]);
    let h = -(e.transpose() * &j.q * &e) / norm;
    (&h + h.transpose()) * 0.5
}
