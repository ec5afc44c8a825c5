//! Eigenvalue-multiplicity strata of symmetric matrices and umbilic points
//! of zero surfaces in S³ (and of implicit surfaces in R³).
//!
//! Surfaces are extracted by marching tetrahedra, seeded at local minima of
//! the discriminant `δ = (k₁ - k₂)²` over the extracted vertices and refined
//! by Gauss–Newton on `(p, T)`, where `T` is the traceless part of the shape
//! operator written as an ambient matrix (so no tangent frame enters the
//! residual).

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{complement_frame, exp_map, stereo_inverse, stereo_map, stereo_map_generic, ChartPoint};
use crate::error::{Error, Result};
use crate::field::{ambient_jet, AmbientField};
use crate::jet::Scalar;

/// Default relative eigenvalue clustering tolerance.
pub const GAP_TOL: f64 = 1e-6;
/// Candidates closer than this (geodesic, or Euclidean in R³) are merged.
pub const MERGE_RADIUS: f64 = 1e-5;
/// Surfaces with more umbilical samples than this fraction are degenerate.
pub const DEGENERATE_FRACTION: f64 = 0.10;
pub const VALUE_TOL: f64 = 1e-9;
pub const TRACELESS_TOL: f64 = 1e-7;
/// Partner probes sit on rings of these radii (length units) around a found
/// umbilic.
const PROBE_RADII: [f64; 2] = [0.15, 0.5];
const PROBE_DIRECTIONS: usize = 6;
/// Local re-extraction: cells per local block axis and nesting depth.
const LOCAL_CELLS: usize = 8;
const REFINE_DEPTH: usize = 3;
/// The surface is sharp where one cell spans more than this many curvature
/// radii.
const SHARP_LIMIT: f64 = 1.0;

/// `w = (w₁, …, w_m)`: `wᵢ` eigenvalues of multiplicity `i` in an m×m
/// symmetric matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiplicityPattern {
    w: Vec<usize>,
}

impl MultiplicityPattern {
    /// Requires `Σ i·wᵢ = m` where `m = w.len()`.
    pub fn new(w: Vec<usize>) -> Result<Self> {
        let m = w.len();
        let mu: usize = w.iter().enumerate().map(|(i, wi)| (i + 1) * wi).sum();
        if m == 0 || mu != m {
            return Err(Error::InvalidPattern { expected: m, found: mu });
        }
        Ok(MultiplicityPattern { w })
    }

    /// `(0, 1)`: a 2×2 matrix with a double eigenvalue.
    pub fn umbilic() -> Self {
        MultiplicityPattern { w: vec![0, 1] }
    }

    pub fn w(&self) -> &[usize] {
        &self.w
    }

    pub fn m(&self) -> usize {
        self.w.len()
    }

    /// `k(w) = Σ (i-1)(i+2)/2 · wᵢ`.
    pub fn codim(&self) -> usize {
        self.w
            .iter()
            .enumerate()
            .map(|(i, wi)| {
                let i = i + 1;
                (i - 1) * (i + 2) / 2 * wi
            })
            .sum()
    }
}

impl std::fmt::Display for MultiplicityPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.w.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumClass {
    pub pattern: MultiplicityPattern,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub gap_tol: f64,
}

/// Clusters the sorted spectrum: consecutive eigenvalues closer than
/// `gap_tol · max|λ|` share a cluster. The zero matrix is one cluster.
pub fn classify_spectrum(m: &DMatrix<f64>, gap_tol: f64) -> Result<SpectrumClass> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::precondition("matrix must be square and nonempty"));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-10 * m.amax().max(1.0) {
        return Err(Error::precondition(format!("matrix is not symmetric (defect {asym:e})")));
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(SpectrumClass {
        pattern: pattern_of_sorted(&ev, gap_tol, 0.0),
        eigenvalues: ev,
        gap_tol,
    })
}

/// `floor` is an absolute gap below which eigenvalues always merge.
fn pattern_of_sorted(ev: &[f64], gap_tol: f64, floor: f64) -> MultiplicityPattern {
    let radius = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let merge = gap_tol * radius + floor;
    let mut w = vec![0usize; ev.len()];
    let mut run = 1;
    for i in 1..=ev.len() {
        if i < ev.len() && ev[i] - ev[i - 1] <= merge {
            run += 1;
        } else {
            w[run - 1] += 1;
            run = 1;
        }
    }
    MultiplicityPattern { w }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UmbilicChart {
    /// Cubed-sphere grid on S³, round metric.
    Sphere,
    /// Exponential chart grid, round metric.
    Exp,
    /// Stereographic chart grid, flat metric of the chart.
    Stereo,
    /// A surface given directly in R³.
    Euclidean,
}

impl std::str::FromStr for UmbilicChart {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" | "ambient-sphere" => Ok(UmbilicChart::Sphere),
            "exp" => Ok(UmbilicChart::Exp),
            "stereo" => Ok(UmbilicChart::Stereo),
            other => Err(Error::domain(format!("unknown umbilic chart '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmbilicOptions {
    pub cells_per_wavelength: f64,
    pub gap_tol: f64,
    pub max_iterations: usize,
    pub merge_radius: f64,
}

impl Default for UmbilicOptions {
    fn default() -> Self {
        UmbilicOptions {
            cells_per_wavelength: 10.0,
            gap_tol: GAP_TOL,
            max_iterations: 50,
            merge_radius: MERGE_RADIUS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmbilicPoint {
    /// Point on S³, or in R³ for Euclidean surfaces.
    pub x: Vec<f64>,
    /// Chart coordinates when the search ran in a chart.
    pub chart_coords: Option<Vec<f64>>,
    /// `|p| / rms` at the refined point.
    pub value_residual: f64,
    /// Traceless part of the shape operator in units of the curvature scale.
    pub traceless_residual: f64,
    /// Principal curvatures, ascending, for the normal `∇p / |∇p|`.
    pub curvatures: [f64; 2],
    pub pattern: MultiplicityPattern,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UmbilicReport {
    pub degree: usize,
    pub chart: UmbilicChart,
    /// Chart base point on S³ (the point sent to infinity by the stereo chart,
    /// the cut point of the exponential chart).
    pub far_point: Option<Vec<f64>>,
    pub gap_tol: f64,
    pub cells_per_wavelength: f64,
    pub grid_nodes: usize,
    pub surface_samples: usize,
    pub nonregular_samples: usize,
    pub umbilical_fraction: f64,
    pub seeds: usize,
    pub unconverged_seeds: usize,
    pub points: Vec<UmbilicPoint>,
    pub count: usize,
    /// Number of antipodal pairs among the points, for fields with a parity.
    pub antipodal_pairs: Option<usize>,
    pub degenerate: bool,
}

/// Axis-aligned box grid for surfaces in R³.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EuclideanBox {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub cells: [usize; 3],
}

/// `p ∘ φ_z` on R³.
struct StereoPullback<'a, F> {
    p: &'a F,
    chart: &'a ChartPoint,
}

impl<F: AmbientField> AmbientField for StereoPullback<'_, F> {
    fn ambient_dim(&self) -> usize {
        3
    }
    fn eval<T: Scalar>(&self, y: &[T]) -> T {
        self.p.eval(&stereo_map_generic(self.chart, y))
    }
    fn value(&self, y: &[f64]) -> f64 {
        self.p.value(stereo_map(self.chart, y).as_slice())
    }
    fn degree_hint(&self) -> usize {
        self.p.degree_hint()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Geometry {
    /// Points on the unit sphere of the ambient space, round metric.
    Sphere,
    /// Points of R³, flat metric.
    Flat,
}

/// Shape data of the level set through a point.
struct LevelShape {
    value: f64,
    grad_norm: f64,
    /// Ascending principal curvatures.
    k: [f64; 2],
    /// Traceless shape operator as an ambient matrix.
    traceless: DMatrix<f64>,
}

fn level_shape<F: AmbientField>(f: &F, geom: Geometry, x: &DVector<f64>) -> LevelShape {
    let aj = ambient_jet(f, x.as_slice());
    let dim = x.len();
    let (u, q, mut normals) = match geom {
        Geometry::Sphere => {
            let proj = DMatrix::identity(dim, dim) - x * x.transpose();
            let radial = x.dot(&aj.gradient);
            let u = &proj * &aj.gradient;
            let q = &proj * &aj.hessian * &proj - &proj * radial;
            (u, q, vec![x.clone()])
        }
        Geometry::Flat => (aj.gradient.clone(), aj.hessian.clone(), vec![]),
    };
    let grad_norm = u.norm();
    normals.push(u.clone());
    let refs: Vec<&DVector<f64>> = normals.iter().collect();
    let e = complement_frame(dim, &refs);
    let scale = if grad_norm > 0.0 { grad_norm } else { 1.0 };
    let mut h = -(e.transpose() * &q * &e) / scale;
    h = (&h + h.transpose()) * 0.5;
    let mean = 0.5 * (h[(0, 0)] + h[(1, 1)]);
    let half = (0.25 * (h[(0, 0)] - h[(1, 1)]).powi(2) + h[(0, 1)].powi(2)).sqrt();
    let mut t = h.clone();
    t[(0, 0)] -= mean;
    t[(1, 1)] -= mean;
    LevelShape {
        value: aj.value,
        grad_norm,
        k: [mean - half, mean + half],
        traceless: &e * t * e.transpose(),
    }
}

/// Marching-tetrahedra output: crossing points, triangles and adjacency.
struct SurfaceSamples {
    points: Vec<DVector<f64>>,
    triangles: Vec<[u32; 3]>,
    neighbors: Vec<Vec<u32>>,
}

impl SurfaceSamples {
    fn new() -> Self {
        SurfaceSamples { points: Vec::new(), triangles: Vec::new(), neighbors: Vec::new() }
    }

    fn append(&mut self, other: SurfaceSamples) {
        let off = self.points.len() as u32;
        self.points.extend(other.points);
        self.triangles.extend(other.triangles.into_iter().map(|t| t.map(|v| v + off)));
        self.neighbors
            .extend(other.neighbors.into_iter().map(|v| v.into_iter().map(|i| i + off).collect()));
    }

    fn add_triangle(&mut self, t: [u32; 3]) {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            self.neighbors[a as usize].push(b);
            self.neighbors[b as usize].push(a);
        }
        self.triangles.push(t);
    }
}

/// Kuhn decomposition of the unit cube into six tetrahedra.
const KUHN: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Marches one `(n+1)³` node block. `nodes[i]` is `None` outside the domain.
fn march_block(n: usize, nodes: &[Option<DVector<f64>>], values: &[f64], geom: Geometry) -> SurfaceSamples {
    let m = n + 1;
    let id = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let mut out = SurfaceSamples::new();
    let mut edge_vertex: HashMap<(u32, u32), u32> = HashMap::new();
    let mut vertex_of = |a: usize, b: usize, out: &mut SurfaceSamples| -> u32 {
        let key = (a.min(b) as u32, a.max(b) as u32);
        *edge_vertex.entry(key).or_insert_with(|| {
            let (pa, pb) = (nodes[a].as_ref().unwrap(), nodes[b].as_ref().unwrap());
            let (fa, fb) = (values[a], values[b]);
            let t = fa / (fa - fb);
            let mut p = pa * (1.0 - t) + pb * t;
            if geom == Geometry::Sphere {
                p /= p.norm();
            }
            out.points.push(p);
            out.neighbors.push(Vec::new());
            (out.points.len() - 1) as u32
        })
    };
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for perm in KUHN {
                    let mut c = [i, j, k];
                    let mut tet = [0usize; 4];
                    tet[0] = id(c[0], c[1], c[2]);
                    for (s, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        tet[s + 1] = id(c[0], c[1], c[2]);
                    }
                    if tet.iter().any(|&v| nodes[v].is_none()) {
                        continue;
                    }
                    let (pos, neg): (Vec<usize>, Vec<usize>) = tet.iter().partition(|&&v| values[v] > 0.0);
                    match (pos.len(), neg.len()) {
                        (1, 3) | (3, 1) => {
                            let (lone, rest) = if pos.len() == 1 { (pos[0], &neg) } else { (neg[0], &pos) };
                            let t = [
                                vertex_of(lone, rest[0], &mut out),
                                vertex_of(lone, rest[1], &mut out),
                                vertex_of(lone, rest[2], &mut out),
                            ];
                            out.add_triangle(t);
                        }
                        (2, 2) => {
                            // cycle a-c, a-d, b-d, b-c
                            let ac = vertex_of(pos[0], neg[0], &mut out);
                            let ad = vertex_of(pos[0], neg[1], &mut out);
                            let bd = vertex_of(pos[1], neg[1], &mut out);
                            let bc = vertex_of(pos[1], neg[0], &mut out);
                            out.add_triangle([ac, ad, bd]);
                            out.add_triangle([ac, bd, bc]);
                        }
                        _ => {}
                    }
                }
            }
        }
    }
    out
}

/// Barycentric zero of the spin-2 field `ψ = (T₁₁ - T₂₂) + 2i T₁₂`,
/// interpolated linearly, if ψ winds around the triangle (read in the
/// triangle's own plane).
fn psi_zero(pts: [&DVector<f64>; 3], ts: [&DMatrix<f64>; 3]) -> Option<[f64; 3]> {
    let e1 = pts[1] - pts[0];
    let n1 = e1.norm();
    if n1 == 0.0 {
        return None;
    }
    let e1 = e1 / n1;
    let mut e2 = pts[2] - pts[0];
    e2 -= &e1 * e1.dot(&e2);
    let n2 = e2.norm();
    if n2 == 0.0 {
        return None;
    }
    let e2 = e2 / n2;
    let psi: Vec<(f64, f64)> = ts
        .iter()
        .map(|t| {
            let a = e1.dot(&(*t * &e1));
            let b = e2.dot(&(*t * &e2));
            let c = e1.dot(&(*t * &e2));
            (a - b, 2.0 * c)
        })
        .collect();
    let mut turn = 0.0;
    for i in 0..3 {
        let (p, q) = (psi[i], psi[(i + 1) % 3]);
        let cross = p.0 * q.1 - p.1 * q.0;
        let dot = p.0 * q.0 + p.1 * q.1;
        turn += cross.atan2(dot);
    }
    if (turn / (2.0 * PI)).round() == 0.0 {
        return None;
    }
    // ψ₀ + l₁(ψ₁ - ψ₀) + l₂(ψ₂ - ψ₀) = 0
    let (a, b) = ((psi[1].0 - psi[0].0, psi[1].1 - psi[0].1), (psi[2].0 - psi[0].0, psi[2].1 - psi[0].1));
    let det = a.0 * b.1 - a.1 * b.0;
    if det == 0.0 {
        return Some([1.0 / 3.0; 3]);
    }
    let l1 = (-psi[0].0 * b.1 + psi[0].1 * b.0) / det;
    let l2 = (-a.0 * psi[0].1 + a.1 * psi[0].0) / det;
    let l = [1.0 - l1 - l2, l1, l2].map(|v| v.clamp(0.0, 1.0));
    let s: f64 = l.iter().sum();
    Some(l.map(|v| v / s))
}

/// A search problem: a field, its geometry, grid blocks and length scales.
struct Problem<'a, F> {
    field: &'a F,
    geom: Geometry,
    degree: usize,
    /// Metric-to-coordinate length unit at a point (≈ 1/d on the sphere).
    length_scale: Box<dyn Fn(&DVector<f64>) -> f64 + Sync + 'a>,
    /// Coarse grid spacing in length units.
    cell_scale: f64,
    /// Antipodal map in problem coordinates, for fields with a parity.
    antipode: Option<Box<dyn Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync + 'a>>,
}

struct Candidate {
    x: DVector<f64>,
    value_residual: f64,
    traceless_residual: f64,
    k: [f64; 2],
}

impl<F: AmbientField> Problem<'_, F> {
    fn retract(&self, x: &DVector<f64>, e: &DMatrix<f64>, s: &DVector<f64>) -> DVector<f64> {
        let y = x + e * s;
        match self.geom {
            Geometry::Sphere => {
                let n = y.norm();
                y / n
            }
            Geometry::Flat => y,
        }
    }

    fn tangent_frame(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match self.geom {
            Geometry::Sphere => complement_frame(x.len(), &[x]),
            Geometry::Flat => DMatrix::identity(x.len(), x.len()),
        }
    }

    fn residual(&self, x: &DVector<f64>, vs: f64) -> DVector<f64> {
        let s = level_shape(self.field, self.geom, x);
        let l = (self.length_scale)(x);
        let t = &s.traceless;
        let dim = t.nrows();
        let mut r = DVector::zeros(1 + dim * (dim + 1) / 2);
        r[0] = s.value / vs;
        let mut idx = 1;
        for a in 0..dim {
            for b in a..dim {
                r[idx] = t[(a, b)] * l * if a == b { 1.0 } else { std::f64::consts::SQRT_2 };
                idx += 1;
            }
        }
        r
    }

    /// Orthonormal frame of the tangent plane of the level set through `x`.
    fn surface_frame(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let aj = ambient_jet(self.field, x.as_slice());
        match self.geom {
            Geometry::Sphere => {
                let u = &aj.gradient - x * x.dot(&aj.gradient);
                complement_frame(x.len(), &[x, &u])
            }
            Geometry::Flat => complement_frame(x.len(), &[&aj.gradient]),
        }
    }

    /// Levenberg–Marquardt from a seed, with forward steps capped at half a
    /// length unit.
    fn refine(&self, seed: &DVector<f64>, vs: f64, max_iterations: usize) -> Option<Candidate> {
        let mut x = seed.clone();
        let mut r = self.residual(&x, vs);
        let mut mu = -1.0;
        for _ in 0..max_iterations {
            if r.norm() < 1e-15 {
                break;
            }
            let e = self.tangent_frame(&x);
            let l = (self.length_scale)(&x);
            let h = 1e-6 * l;
            let k = e.ncols();
            let mut jac = DMatrix::zeros(r.len(), k);
            for c in 0..k {
                let mut s = DVector::zeros(k);
                s[c] = h;
                let plus = self.residual(&self.retract(&x, &e, &s), vs);
                let minus = self.residual(&self.retract(&x, &e, &(-&s)), vs);
                jac.set_column(c, &((plus - minus) / (2.0 * h)));
            }
            let jt = jac.transpose();
            let normal = &jt * &jac;
            let grad = &jt * &r;
            if mu < 0.0 {
                mu = 1e-6 * normal.diagonal().max();
            }
            let limit = 0.5 * l;
            let mut accepted = false;
            let mut last_step = f64::INFINITY;
            for _ in 0..16 {
                let damped = &normal + DMatrix::identity(k, k) * mu;
                let Some(mut step) = damped.cholesky().map(|c| c.solve(&(-&grad))) else {
                    mu = mu.max(1e-300) * 10.0;
                    continue;
                };
                if step.norm() > limit {
                    step *= limit / step.norm();
                }
                last_step = step.norm();
                let xn = self.retract(&x, &e, &step);
                let rn = self.residual(&xn, vs);
                if rn.norm() < r.norm() {
                    x = xn;
                    r = rn;
                    mu = (mu / 5.0).max(1e-300);
                    accepted = true;
                    break;
                }
                mu *= 8.0;
            }
            if !accepted || last_step < 1e-15 * l {
                break;
            }
        }
        let s = level_shape(self.field, self.geom, &x);
        let l = (self.length_scale)(&x);
        let value_residual = (s.value / vs).abs();
        let traceless_residual = s.traceless.norm() * l;
        let regular = s.grad_norm > 1e-8 * vs / l;
        (regular && value_residual < VALUE_TOL && traceless_residual < TRACELESS_TOL).then_some(Candidate {
            x,
            value_residual,
            traceless_residual,
            k: s.k,
        })
    }
}

struct ScanOutcome {
    candidates: Vec<Candidate>,
    grid_nodes: usize,
    surface_samples: usize,
    nonregular_samples: usize,
    umbilical_fraction: f64,
    seeds: usize,
    unconverged: usize,
}

/// Extracted surface with per-vertex shape data.
struct Level {
    surface: SurfaceSamples,
    /// (δ in length units, regular, umbilical within tolerance)
    shapes: Vec<(f64, bool, bool)>,
    /// Largest |principal curvature| in length units.
    sharpness: Vec<f64>,
    traceless: Vec<DMatrix<f64>>,
}

fn extract<F: AmbientField>(
    problem: &Problem<'_, F>,
    blocks: &[(usize, Vec<Option<DVector<f64>>>)],
    values: &[Vec<f64>],
    vs: f64,
    gap_tol: f64,
) -> Level {
    let mut surface = SurfaceSamples::new();
    for ((n, nodes), vals) in blocks.iter().zip(values) {
        surface.append(march_block(*n, nodes, vals, problem.geom));
    }
    let (shapes, rest): (Vec<_>, Vec<_>) = surface
        .points
        .par_iter()
        .map(|x| {
            let s = level_shape(problem.field, problem.geom, x);
            let l = (problem.length_scale)(x);
            let regular = s.grad_norm > 1e-8 * vs / l;
            let ev = s.k;
            let umbilical = pattern_of_sorted(&ev, gap_tol, 1e-9 / l) == MultiplicityPattern::umbilic();
            let sharp = ev[0].abs().max(ev[1].abs()) * l;
            ((((ev[1] - ev[0]) * l).powi(2), regular, umbilical), (sharp, s.traceless))
        })
        .unzip();
    let (sharpness, traceless) = rest.into_iter().unzip();
    Level { surface, shapes, sharpness, traceless }
}

fn block_values<F: AmbientField>(field: &F, blocks: &[(usize, Vec<Option<DVector<f64>>>)]) -> Vec<Vec<f64>> {
    blocks
        .par_iter()
        .map(|(_, nodes)| {
            nodes
                .iter()
                .map(|x| x.as_ref().map_or(0.0, |x| field.value(x.as_slice())))
                .collect()
        })
        .collect()
}

/// Seeds from winding triangles and from local minima of δ, and suspect
/// points for finer local grids. A close pair of zeros is invisible to the
/// winding test; it leaves a δ minimum with no winding zero within one cell,
/// or sits in a neck whose curvature radius is below the grid spacing.
fn seeds_of(
    level: &Level,
    geom: Geometry,
    cell: f64,
    length_scale: &dyn Fn(&DVector<f64>) -> f64,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let Level { surface, shapes, sharpness, traceless } = level;
    let mut zeros = Vec::new();
    for t in &surface.triangles {
        if t.iter().any(|&v| !shapes[v as usize].1) {
            continue;
        }
        let pts = t.map(|v| &surface.points[v as usize]);
        if let Some(l) = psi_zero(pts, t.map(|v| &traceless[v as usize])) {
            let mut x = pts[0] * l[0] + pts[1] * l[1] + pts[2] * l[2];
            if geom == Geometry::Sphere {
                x /= x.norm();
            }
            zeros.push(x);
        }
    }
    let minima: Vec<DVector<f64>> = (0..surface.points.len())
        .filter(|&i| {
            let (di, ok, _) = shapes[i];
            ok && surface.neighbors[i].iter().all(|&j| {
                let (dj, okj, _) = shapes[j as usize];
                !okj || di < dj || (di == dj && i < j as usize)
            })
        })
        .map(|i| surface.points[i].clone())
        .collect();
    let mut suspects: Vec<DVector<f64>> = minima
        .iter()
        .filter(|m| zeros.iter().all(|z| distance(geom, z, m) > cell * length_scale(m)))
        .cloned()
        .collect();
    suspects.extend(
        (0..surface.points.len())
            .filter(|&i| shapes[i].1 && sharpness[i] * cell > SHARP_LIMIT)
            .map(|i| surface.points[i].clone()),
    );
    zeros.extend(minima);
    (zeros, suspects)
}

/// Small node block of half-width `half` around `c` (tangent box projected
/// to the sphere in the round geometry).
fn local_block(geom: Geometry, c: &DVector<f64>, half: f64, n: usize) -> (usize, Vec<Option<DVector<f64>>>) {
    let e = match geom {
        Geometry::Sphere => complement_frame(c.len(), &[c]),
        Geometry::Flat => DMatrix::identity(c.len(), c.len()),
    };
    let coord = |i: usize| -half + 2.0 * half * i as f64 / n as f64;
    let mut nodes = Vec::with_capacity((n + 1).pow(3));
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let v = DVector::from_vec(vec![coord(i), coord(j), coord(k)]);
                let mut x = c + &e * v;
                if geom == Geometry::Sphere {
                    x /= x.norm();
                }
                nodes.push(Some(x));
            }
        }
    }
    (n, nodes)
}

fn run_scan<F: AmbientField>(
    problem: &Problem<'_, F>,
    blocks: &[(usize, Vec<Option<DVector<f64>>>)],
    opts: &UmbilicOptions,
) -> ScanOutcome {
    let values = block_values(problem.field, blocks);
    let grid_nodes: usize = blocks.iter().map(|(_, b)| b.iter().filter(|x| x.is_some()).count()).sum();
    let sumsq: f64 = values.iter().flatten().map(|v| v * v).sum();
    let vs = (sumsq / grid_nodes.max(1) as f64).sqrt().max(f64::MIN_POSITIVE);

    let coarse = extract(problem, blocks, &values, vs, opts.gap_tol);
    let shapes = &coarse.shapes;
    let nonregular_samples = shapes.iter().filter(|s| !s.1).count();
    let regular_count = shapes.len() - nonregular_samples;
    let umbilical = shapes.iter().filter(|s| s.1 && s.2).count();
    let umbilical_fraction = if regular_count == 0 { 0.0 } else { umbilical as f64 / regular_count as f64 };

    let mut outcome = ScanOutcome {
        candidates: Vec::new(),
        grid_nodes,
        surface_samples: coarse.surface.points.len(),
        nonregular_samples,
        umbilical_fraction,
        seeds: 0,
        unconverged: 0,
    };
    if umbilical_fraction > DEGENERATE_FRACTION {
        return outcome;
    }

    // a lonely δ minimum may hide a close pair of zeros; re-extract on
    // finer local grids around it
    let mut cell = problem.cell_scale;
    let (mut seeds, mut suspects) = seeds_of(&coarse, problem.geom, cell, &*problem.length_scale);
    for _ in 0..REFINE_DEPTH {
        if suspects.is_empty() {
            break;
        }
        let mut centres: Vec<(DVector<f64>, f64)> = Vec::new();
        for c in suspects {
            let half = cell * (problem.length_scale)(&c);
            if centres.iter().all(|(o, _)| distance(problem.geom, o, &c) > 0.5 * half) {
                centres.push((c, half));
            }
        }
        let local: Vec<_> = centres
            .iter()
            .map(|(c, half)| local_block(problem.geom, c, *half, LOCAL_CELLS))
            .collect();
        outcome.grid_nodes += local.iter().map(|b| b.1.len()).sum::<usize>();
        let vals = block_values(problem.field, &local);
        let level = extract(problem, &local, &vals, vs, opts.gap_tol);
        outcome.surface_samples += level.surface.points.len();
        cell *= 2.0 / LOCAL_CELLS as f64;
        let (more, next) = seeds_of(&level, problem.geom, cell, &*problem.length_scale);
        seeds.extend(more);
        // only minima well inside a block; the rim is an artefact of the cut
        suspects = next
            .into_iter()
            .filter(|x| centres.iter().any(|(c, half)| distance(problem.geom, c, x) < 0.5 * half))
            .collect();
    }

    outcome.seeds = seeds.len();
    let refined: Vec<Option<Candidate>> = seeds
        .par_iter()
        .map(|x| problem.refine(x, vs, opts.max_iterations))
        .collect();
    outcome.unconverged = refined.iter().filter(|c| c.is_none()).count();
    let mut found = dedupe(problem.geom, refined.into_iter().flatten().collect(), opts.merge_radius, |x| x.clone());

    // umbilics come in close pairs near their births; probe a small ring
    // around every point found for a partner the grid could not separate
    let mut frontier: Vec<DVector<f64>> = found.iter().map(|c| c.x.clone()).collect();
    while !frontier.is_empty() {
        let probes: Vec<DVector<f64>> = frontier
            .iter()
            .flat_map(|x| {
                let e = problem.surface_frame(x);
                let l = (problem.length_scale)(x);
                (0..PROBE_DIRECTIONS * PROBE_RADII.len()).map(move |i| {
                    let rho = PROBE_RADII[i / PROBE_DIRECTIONS] * l;
                    let a = 2.0 * PI * i as f64 / PROBE_DIRECTIONS as f64;
                    let mut y = x + (e.column(0) * a.cos() + e.column(1) * a.sin()) * rho;
                    if problem.geom == Geometry::Sphere {
                        y /= y.norm();
                    }
                    y
                })
            })
            .chain(frontier.iter().filter_map(|x| problem.antipode.as_ref().and_then(|a| a(x))))
            .collect();
        outcome.seeds += probes.len();
        let refined: Vec<Option<Candidate>> = probes
            .par_iter()
            .map(|x| problem.refine(x, vs, opts.max_iterations))
            .collect();
        outcome.unconverged += refined.iter().filter(|c| c.is_none()).count();
        frontier.clear();
        for c in refined.into_iter().flatten() {
            if found.iter().all(|f| distance(problem.geom, &f.x, &c.x) > opts.merge_radius) {
                frontier.push(c.x.clone());
                found.push(c);
            }
        }
    }
    outcome.candidates = found;
    outcome
}

fn distance(geom: Geometry, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    match geom {
        Geometry::Sphere => {
            let s = (a - b).norm();
            2.0 * (0.5 * s).min(1.0).asin()
        }
        Geometry::Flat => (a - b).norm(),
    }
}

/// Greedy merge in candidate order, then a lexicographic sort.
fn dedupe(geom: Geometry, cands: Vec<Candidate>, radius: f64, key: impl Fn(&DVector<f64>) -> DVector<f64>) -> Vec<Candidate> {
    let mut kept: Vec<(DVector<f64>, Candidate)> = Vec::new();
    for c in cands {
        let k = key(&c.x);
        if kept.iter().all(|(kk, _)| distance(geom, kk, &k) > radius) {
            kept.push((k, c));
        }
    }
    let mut out: Vec<Candidate> = kept.into_iter().map(|(_, c)| c).collect();
    out.sort_by(|a, b| {
        a.x.iter()
            .zip(b.x.iter())
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    out
}

fn check_pattern(w: &MultiplicityPattern) -> Result<()> {
    if *w != MultiplicityPattern::umbilic() {
        return Err(Error::Unsupported(format!(
            "only the pattern (0,1) is searched for on surfaces, got {w} (codimension {})",
            w.codim()
        )));
    }
    Ok(())
}

/// Point of max |p| on a coarse cubed-sphere grid.
fn far_point<F: AmbientField>(p: &F) -> DVector<f64> {
    let n = p.degree_hint().max(1) + 2;
    let mut best = (f64::NEG_INFINITY, DVector::zeros(4));
    for (_, nodes) in cubed_sphere_blocks(n) {
        for x in nodes.into_iter().flatten() {
            let v = p.value(x.as_slice()).abs();
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    best.1
}

/// Eight cube faces of `[-1, 1]⁴` projected to S³, each with `n` cells per
/// axis uniform in angle.
fn cubed_sphere_blocks(n: usize) -> Vec<(usize, Vec<Option<DVector<f64>>>)> {
    let mut blocks = Vec::with_capacity(8);
    let t = |i: usize| (-PI / 4.0 + PI / 2.0 * i as f64 / n as f64).tan();
    for axis in 0..4 {
        for sign in [1.0, -1.0] {
            let mut nodes = Vec::with_capacity((n + 1).pow(3));
            for i in 0..=n {
                for j in 0..=n {
                    for k in 0..=n {
                        let mut x = DVector::zeros(4);
                        let others: Vec<usize> = (0..4).filter(|&a| a != axis).collect();
                        x[axis] = sign;
                        x[others[0]] = t(i);
                        x[others[1]] = t(j);
                        x[others[2]] = t(k);
                        let norm = x.norm();
                        nodes.push(Some(x / norm));
                    }
                }
            }
            blocks.push((n, nodes));
        }
    }
    blocks
}

fn report_from(
    degree: usize,
    chart: UmbilicChart,
    far: Option<&DVector<f64>>,
    opts: &UmbilicOptions,
    scan: &ScanOutcome,
    points: Vec<UmbilicPoint>,
    parity: Option<usize>,
) -> UmbilicReport {
    let antipodal_pairs = parity.filter(|_| chart != UmbilicChart::Euclidean).map(|_| {
        let mut pairs = 0;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let s: f64 = a.x.iter().zip(&b.x).map(|(p, q)| (p + q) * (p + q)).sum();
                if s.sqrt() < opts.merge_radius {
                    pairs += 1;
                }
            }
        }
        pairs
    });
    UmbilicReport {
        degree,
        chart,
        far_point: far.map(|z| z.iter().copied().collect()),
        gap_tol: opts.gap_tol,
        cells_per_wavelength: opts.cells_per_wavelength,
        grid_nodes: scan.grid_nodes,
        surface_samples: scan.surface_samples,
        nonregular_samples: scan.nonregular_samples,
        umbilical_fraction: scan.umbilical_fraction,
        seeds: scan.seeds,
        unconverged_seeds: scan.unconverged,
        count: points.len(),
        points,
        antipodal_pairs,
        degenerate: scan.umbilical_fraction > DEGENERATE_FRACTION,
    }
}

fn to_point(c: &Candidate, x: Vec<f64>, chart_coords: Option<Vec<f64>>, gap_tol: f64) -> UmbilicPoint {
    UmbilicPoint {
        x,
        chart_coords,
        value_residual: c.value_residual,
        traceless_residual: c.traceless_residual,
        curvatures: c.k,
        pattern: pattern_of_sorted(&c.k, gap_tol, 0.0),
    }
}

/// Like [`find_umbilics_with`] but reports a degenerate surface through the
/// `degenerate` flag instead of an error.
pub fn umbilic_scan<F: AmbientField>(
    p: &F,
    w: &MultiplicityPattern,
    chart: UmbilicChart,
    opts: &UmbilicOptions,
) -> Result<UmbilicReport> {
    check_pattern(w)?;
    if p.ambient_dim() != 4 {
        return Err(Error::precondition("umbilic search needs a field on S³"));
    }
    let d = p.degree_hint().max(1);
    let df = d as f64;
    let cell = 2.0 * PI / (opts.cells_per_wavelength * df);
    match chart {
        UmbilicChart::Euclidean => Err(Error::precondition(
            "use find_umbilics_euclidean for surfaces in R³",
        )),
        UmbilicChart::Sphere => {
            let n = ((PI / 2.0) / cell).ceil() as usize;
            let problem = Problem {
                field: p,
                geom: Geometry::Sphere,
                degree: d,
                length_scale: Box::new(move |_| 1.0 / df),
                cell_scale: cell * df,
                antipode: sphere_antipode(p),
            };
            let scan = run_scan(&problem, &cubed_sphere_blocks(n), opts);
            let cands = dedupe(Geometry::Sphere, take(&scan), opts.merge_radius, |x| x.clone());
            let points = cands
                .iter()
                .map(|c| to_point(c, c.x.iter().copied().collect(), None, opts.gap_tol))
                .collect();
            Ok(report_from(problem.degree, chart, None, opts, &scan, points, p.parity()))
        }
        UmbilicChart::Exp => {
            let z = far_point(p);
            let base = ChartPoint::new((-&z).as_slice())?;
            let margin = 0.25 / df;
            let r = PI - margin;
            let n = (2.0 * r / cell).ceil() as usize;
            let coord = |i: usize| -r + 2.0 * r * i as f64 / n as f64;
            let mut nodes = Vec::with_capacity((n + 1).pow(3));
            let mut shell = Vec::new();
            for i in 0..=n {
                for j in 0..=n {
                    for k in 0..=n {
                        let v = [coord(i), coord(j), coord(k)];
                        let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                        if len <= r {
                            let x = exp_map(&base, &v)?;
                            if len > r - cell {
                                shell.push(x.clone());
                            }
                            nodes.push(Some(x));
                        } else {
                            nodes.push(None);
                        }
                    }
                }
            }
            check_far_side(p, &z, &shell)?;
            let problem = Problem {
                field: p,
                geom: Geometry::Sphere,
                degree: d,
                length_scale: Box::new(move |_| 1.0 / df),
                cell_scale: cell * df,
                antipode: sphere_antipode(p),
            };
            let scan = run_scan(&problem, &[(n, nodes)], opts);
            let cands = dedupe(Geometry::Sphere, take(&scan), opts.merge_radius, |x| x.clone());
            let points = cands
                .iter()
                .map(|c| {
                    let v = crate::charts::log_map(&base, c.x.as_slice())
                        .map(|v| v.iter().copied().collect())
                        .ok();
                    to_point(c, c.x.iter().copied().collect(), v, opts.gap_tol)
                })
                .collect();
            Ok(report_from(problem.degree, chart, Some(&z), opts, &scan, points, p.parity()))
        }
        UmbilicChart::Stereo => {
            let z = far_point(p);
            let base = ChartPoint::new(z.as_slice())?;
            let margin = 0.25 / df;
            let tmax = PI - margin;
            let n = (2.0 * tmax / cell).ceil() as usize;
            // uniform in the angle from -z along each axis
            let coord = |i: usize| 2.0 * ((-tmax + 2.0 * tmax * i as f64 / n as f64) / 2.0).tan();
            let mut nodes = Vec::with_capacity((n + 1).pow(3));
            let mut shell = Vec::new();
            for i in 0..=n {
                for j in 0..=n {
                    for k in 0..=n {
                        let y = DVector::from_vec(vec![coord(i), coord(j), coord(k)]);
                        if [i, j, k].iter().any(|&a| a == 0 || a == n) {
                            shell.push(stereo_map(&base, y.as_slice()));
                        }
                        nodes.push(Some(y));
                    }
                }
            }
            check_far_side(p, &z, &shell)?;
            let pull = StereoPullback { p, chart: &base };
            let problem = Problem {
                field: &pull,
                geom: Geometry::Flat,
                degree: d,
                length_scale: Box::new(move |y: &DVector<f64>| (1.0 + y.norm_squared() / 4.0) / df),
                cell_scale: cell * df,
                antipode: p.parity().map(|_| {
                    let base = &base;
                    Box::new(move |y: &DVector<f64>| {
                        let x = -stereo_map(base, y.as_slice());
                        stereo_inverse(base, x.as_slice()).ok()
                    }) as Box<dyn Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync>
                }),
            };
            let scan = run_scan(&problem, &[(n, nodes)], opts);
            let cands = dedupe(Geometry::Sphere, take(&scan), opts.merge_radius, |y| {
                stereo_map(&base, y.as_slice())
            });
            let points = cands
                .iter()
                .map(|c| {
                    let x = stereo_map(&base, c.x.as_slice());
                    to_point(c, x.iter().copied().collect(), Some(c.x.iter().copied().collect()), opts.gap_tol)
                })
                .collect();
            Ok(report_from(problem.degree, chart, Some(&z), opts, &scan, points, p.parity()))
        }
    }
}

fn sphere_antipode<'a, F: AmbientField>(
    p: &F,
) -> Option<Box<dyn Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync + 'a>> {
    p.parity().map(|_| Box::new(|x: &DVector<f64>| Some(-x)) as Box<dyn Fn(&DVector<f64>) -> Option<DVector<f64>> + Sync>)
}

fn take(scan: &ScanOutcome) -> Vec<Candidate> {
    scan.candidates
        .iter()
        .map(|c| Candidate {
            x: c.x.clone(),
            value_residual: c.value_residual,
            traceless_residual: c.traceless_residual,
            k: c.k,
        })
        .collect()
}

/// The chart grids leave out a small cap around the far point; refuse if
/// the zero surface reaches the cap boundary.
fn check_far_side<F: AmbientField>(p: &F, z: &DVector<f64>, shell: &[DVector<f64>]) -> Result<()> {
    let s = p.value(z.as_slice()).signum();
    if shell.iter().any(|x| p.value(x.as_slice()).signum() != s) {
        return Err(Error::precondition(
            "zero surface reaches the excluded cap of the chart",
        ));
    }
    Ok(())
}

/// Umbilic points of the zero surface of `p` on S³ (pattern `(0,1)` only).
/// Errors with `DegenerateStratum` when more than 10% of the surface
/// samples are umbilical.
pub fn find_umbilics<F: AmbientField>(p: &F, w: &MultiplicityPattern, chart: UmbilicChart) -> Result<UmbilicReport> {
    find_umbilics_with(p, w, chart, &UmbilicOptions::default())
}

pub fn find_umbilics_with<F: AmbientField>(
    p: &F,
    w: &MultiplicityPattern,
    chart: UmbilicChart,
    opts: &UmbilicOptions,
) -> Result<UmbilicReport> {
    degenerate_to_error(umbilic_scan(p, w, chart, opts)?)
}

fn degenerate_to_error(rep: UmbilicReport) -> Result<UmbilicReport> {
    if rep.degenerate {
        return Err(Error::DegenerateStratum {
            fraction: rep.umbilical_fraction,
        });
    }
    Ok(rep)
}

/// Umbilics of the surface `{f = 0}` in R³ with the flat metric.
pub fn find_umbilics_euclidean<F: AmbientField>(
    f: &F,
    w: &MultiplicityPattern,
    grid: &EuclideanBox,
    opts: &UmbilicOptions,
) -> Result<UmbilicReport> {
    check_pattern(w)?;
    if f.ambient_dim() != 3 {
        return Err(Error::precondition("Euclidean umbilic search needs a field on R³"));
    }
    if grid.cells.iter().any(|&c| c == 0) || (0..3).any(|a| !(grid.hi[a] > grid.lo[a])) {
        return Err(Error::domain("empty grid box"));
    }
    let n = *grid.cells.iter().max().unwrap();
    let mut nodes = Vec::with_capacity((n + 1).pow(3));
    for i in 0..=n {
        for j in 0..=n {
            for k in 0..=n {
                let c = [i, j, k];
                let x: Vec<f64> = (0..3)
                    .map(|a| grid.lo[a] + (grid.hi[a] - grid.lo[a]) * c[a] as f64 / n as f64)
                    .collect();
                nodes.push(Some(DVector::from_vec(x)));
            }
        }
    }
    let extent = (0..3).map(|a| grid.hi[a] - grid.lo[a]).fold(0.0, f64::max);
    let problem = Problem {
        field: f,
        geom: Geometry::Flat,
        degree: f.degree_hint(),
        length_scale: Box::new(move |_| extent / 10.0),
        cell_scale: 10.0 / n as f64,
        antipode: None,
    };
    let scan = run_scan(&problem, &[(n, nodes)], opts);
    let cands = dedupe(Geometry::Flat, take(&scan), opts.merge_radius, |x| x.clone());
    let points = cands
        .iter()
        .map(|c| to_point(c, c.x.iter().copied().collect(), None, opts.gap_tol))
        .collect();
    degenerate_to_error(report_from(problem.degree, UmbilicChart::Euclidean, None, opts, &scan, points, None))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundCheck {
    Within,
    /// Count above `C·d³`; flagged for inspection.
    Exceeds,
    Skipped,
}

/// Compares the count with the envelope `c · d³`.
pub fn umbilic_count_bound_check(report: &UmbilicReport, d: usize, c: f64) -> BoundCheck {
    if report.degenerate {
        return BoundCheck::Skipped;
    }
    if report.count as f64 <= c * (d as f64).powi(3) {
        BoundCheck::Within
    } else {
        BoundCheck::Exceeds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Least-squares slope of log(mean count) against log d.
    pub exponent: f64,
    /// `max count / d³` over the data, a fitted envelope constant.
    pub envelope: f64,
    pub mean_counts: Vec<(usize, f64)>,
}

/// Fits count growth from `(d, count)` observations (at least two degrees
/// with a positive mean count).
pub fn fit_growth(data: &[(usize, usize)]) -> Result<GrowthFit> {
    let mut by_d: std::collections::BTreeMap<usize, (f64, usize)> = Default::default();
    for &(d, c) in data {
        let e = by_d.entry(d).or_default();
        e.0 += c as f64;
        e.1 += 1;
    }
    let means: Vec<(usize, f64)> = by_d.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect();
    let pts: Vec<(f64, f64)> = means
        .iter()
        .filter(|(d, m)| *d > 0 && *m > 0.0)
        .map(|&(d, m)| ((d as f64).ln(), m.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::precondition("need two degrees with positive counts"));
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let envelope = data
        .iter()
        .filter(|(d, _)| *d > 0)
        .map(|&(d, c)| c as f64 / (d as f64).powi(3))
        .fold(0.0, f64::max);
    Ok(GrowthFit {
        exponent: sxy / sxx,
        envelope,
        mean_counts: means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleSpec};
    use crate::field::{Negated, Polynomial, Rotated};

    fn pat(w: &[usize]) -> MultiplicityPattern {
        MultiplicityPattern::new(w.to_vec()).unwrap()
    }

    #[test]
    fn codimension_values() {
        assert_eq!(pat(&[3, 0, 0]).codim(), 0);
        assert_eq!(pat(&[0, 1]).codim(), 2);
        assert_eq!(pat(&[1, 1, 0]).codim(), 2);
        assert_eq!(pat(&[0, 0, 1]).codim(), 5);
        assert!(matches!(
            MultiplicityPattern::new(vec![1, 1]),
            Err(Error::InvalidPattern { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn spectrum_classification() {
        let c = classify_spectrum(&DMatrix::identity(2, 2), GAP_TOL).unwrap();
        assert_eq!(c.pattern, pat(&[0, 1]));
        let c = classify_spectrum(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])), GAP_TOL).unwrap();
        assert_eq!(c.pattern, pat(&[2, 0]));
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 + 1e-9, 5.0]));
        assert_eq!(classify_spectrum(&m, GAP_TOL).unwrap().pattern, pat(&[1, 1, 0]));
        assert_eq!(classify_spectrum(&DMatrix::zeros(3, 3), GAP_TOL).unwrap().pattern, pat(&[0, 0, 1]));
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(classify_spectrum(&asym, GAP_TOL).is_err());
    }

    fn ellipsoid(a: f64, b: f64, c: f64) -> Polynomial {
        Polynomial::new(
            3,
            vec![
                (vec![2, 0, 0], 1.0 / (a * a)),
                (vec![0, 2, 0], 1.0 / (b * b)),
                (vec![0, 0, 2], 1.0 / (c * c)),
                (vec![0, 0, 0], -1.0),
            ],
        )
    }

    /// `H² - K` on the ellipsoid from the classical closed forms in terms of
    /// the surface point; vanishes exactly at umbilics.
    fn ellipsoid_umbilicity(a: f64, b: f64, c: f64, x: [f64; 3]) -> f64 {
        let s = x[0] * x[0] / a.powi(4) + x[1] * x[1] / b.powi(4) + x[2] * x[2] / c.powi(4);
        let abc2 = (a * b * c).powi(2);
        let k = 1.0 / (abc2 * s * s);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let h = (r2 - a * a - b * b - c * c).abs() / (2.0 * abc2 * s.powf(1.5));
        h * h - k
    }

    #[test]
    fn triaxial_ellipsoid_has_four_umbilics() {
        let (a, b, c) = (3.0, 2.0, 1.0);
        let grid = EuclideanBox {
            lo: [-3.3, -2.3, -1.2],
            hi: [3.3, 2.3, 1.2],
            cells: [40, 40, 40],
        };
        let rep = find_umbilics_euclidean(&ellipsoid(a, b, c), &MultiplicityPattern::umbilic(), &grid, &Default::default())
            .unwrap();
        let ux = a * ((a * a - b * b) / (a * a - c * c)).sqrt();
        let uz = c * ((b * b - c * c) / (a * a - c * c)).sqrt();
        assert_eq!(rep.count, 4, "{:?}", rep.points);
        for p in &rep.points {
            assert!((p.x[0].abs() - ux).abs() < 1e-6, "{:?}", p.x);
            assert!(p.x[1].abs() < 1e-6);
            assert!((p.x[2].abs() - uz).abs() < 1e-6);
            assert_eq!(p.pattern, MultiplicityPattern::umbilic());
        }

        // dense parametric scan: the only near-zeros of H² - K are at the
        // four closed-form points
        let m = 400;
        let mut low = Vec::new();
        for i in 0..=m {
            let th = PI * i as f64 / m as f64;
            for j in 0..2 * m {
                let ph = PI * j as f64 / m as f64;
                let x = [a * th.sin() * ph.cos(), b * th.sin() * ph.sin(), c * th.cos()];
                if ellipsoid_umbilicity(a, b, c, x) < 1e-4 {
                    low.push(x);
                }
            }
        }
        assert!(!low.is_empty());
        for x in low {
            let near = rep.points.iter().any(|p| {
                let dd: f64 = (0..3).map(|k| (p.x[k] - x[k]).powi(2)).sum();
                dd.sqrt() < 0.1
            });
            assert!(near, "scan minimum at {x:?} not reported");
        }
    }

    #[test]
    fn round_slice_is_degenerate() {
        let p = Polynomial::coordinate(4, 0).add(Polynomial::constant(4, -0.5));
        for chart in [UmbilicChart::Sphere, UmbilicChart::Stereo] {
            let err = find_umbilics(&p, &MultiplicityPattern::umbilic(), chart).unwrap_err();
            assert!(matches!(err, Error::DegenerateStratum { .. }), "{chart:?}: {err}");
        }
        let rep = umbilic_scan(&p, &MultiplicityPattern::umbilic(), UmbilicChart::Sphere, &Default::default()).unwrap();
        assert!(rep.degenerate);
        assert_eq!(umbilic_count_bound_check(&rep, 1, 1.0), BoundCheck::Skipped);
    }

    #[test]
    fn unsupported_patterns_are_refused() {
        let p = Polynomial::coordinate(4, 0);
        assert!(matches!(
            find_umbilics(&p, &pat(&[2, 0]), UmbilicChart::Sphere),
            Err(Error::Unsupported(_))
        ));
    }

    fn matched(a: &UmbilicReport, b: &UmbilicReport, tol: f64) -> bool {
        a.count == b.count
            && a.points.iter().all(|p| {
                b.points.iter().any(|q| {
                    let s: f64 = p.x.iter().zip(&q.x).map(|(u, v)| (u - v).powi(2)).sum();
                    s.sqrt() < tol
                })
            })
    }

    #[test]
    fn stereo_and_sphere_agree_on_a_random_quartic() {
        let p = sample(&EnsembleSpec::harmonic(3, 4, 11), 0).unwrap();
        let w = MultiplicityPattern::umbilic();
        let sphere = find_umbilics(&p, &w, UmbilicChart::Sphere).unwrap();
        let stereo = find_umbilics(&p, &w, UmbilicChart::Stereo).unwrap();
        let exp = find_umbilics(&p, &w, UmbilicChart::Exp).unwrap();
        assert!(sphere.count > 0);
        assert!(matched(&sphere, &stereo, 1e-6), "{} vs {}", sphere.count, stereo.count);
        assert!(matched(&sphere, &exp, 1e-6), "{} vs {}", sphere.count, exp.count);
        assert_eq!(sphere.antipodal_pairs, Some(sphere.count / 2));
        for p in &sphere.points {
            assert!(p.value_residual < VALUE_TOL && p.traceless_residual < TRACELESS_TOL);
            assert_eq!(p.pattern, w);
        }
        assert_eq!(umbilic_count_bound_check(&sphere, 4, 100.0), BoundCheck::Within);
    }

    #[test]
    fn sign_and_rotation_invariance() {
        let p = sample(&EnsembleSpec::harmonic(3, 3, 5), 2).unwrap();
        let w = MultiplicityPattern::umbilic();
        let base = find_umbilics(&p, &w, UmbilicChart::Sphere).unwrap();
        let neg = find_umbilics(&Negated(&p), &w, UmbilicChart::Sphere).unwrap();
        assert!(matched(&base, &neg, 1e-9));

        let (c, s) = (0.7f64.cos(), 0.7f64.sin());
        let (c2, s2) = (0.4f64.cos(), 0.4f64.sin());
        let r1 = DMatrix::from_row_slice(4, 4, &[c, -s, 0., 0., s, c, 0., 0., 0., 0., 1., 0., 0., 0., 0., 1.]);
        let r2 = DMatrix::from_row_slice(4, 4, &[1., 0., 0., 0., 0., c2, 0., -s2, 0., 0., 1., 0., 0., s2, 0., c2]);
        let r = r1 * r2;
        let moved = Rotated { field: &p, rotation: r.clone() };
        let rot = find_umbilics(&moved, &w, UmbilicChart::Sphere).unwrap();
        assert_eq!(rot.count, base.count);
        for q in &base.points {
            let rq = &r * DVector::from_column_slice(&q.x);
            let hit = rot.points.iter().any(|t| (DVector::from_column_slice(&t.x) - &rq).norm() < 1e-6);
            assert!(hit, "rotated umbilic missing");
        }
    }

    #[test]
    fn growth_fit_recovers_cubic() {
        let data: Vec<(usize, usize)> = [3usize, 4, 5, 6].iter().map(|&d| (d, 2 * d * d * d)).collect();
        let fit = fit_growth(&data).unwrap();
        assert!((fit.exponent - 3.0).abs() < 1e-12);
        assert!((fit.envelope - 2.0).abs() < 1e-12);
        assert!(fit_growth(&[(3, 0), (4, 0)]).is_err());
    }
}
