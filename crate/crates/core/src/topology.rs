//! Zeros on S¹, nodal domains and zero curves on S², critical points on S².

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{complement_frame, covariant_jet_unchecked};
use crate::error::{Error, Result};
use crate::field::AmbientField;
use crate::jet::Scalar;
use crate::mesh::{level_for_degree, SphereMesh, UnionFind, MAX_LEVEL};

/// A vertex is ambiguous when `|f| < AMBIGUITY_TOL · rms(f)` and its
/// covariant gradient is below `AMBIGUITY_GRADIENT_TOL · d · rms(f)`: the
/// zero set passes through (numerically) a singular point there.
pub const AMBIGUITY_TOL: f64 = 1e-8;
pub const AMBIGUITY_GRADIENT_TOL: f64 = 1e-4;
/// Offset used to resolve exact zeros at vertices.
pub const ZERO_OFFSET: f64 = 1e-7;
/// Mesh resolution for nodal counts, in vertices per wavelength 2π/d.
pub const NODAL_PER_WAVELENGTH: f64 = 8.0;
/// Mesh resolution for critical-point seeding.
pub const CRITICAL_PER_WAVELENGTH: f64 = 12.0;
/// Critical points closer than this (geodesic) are merged.
pub const CRITICAL_MERGE_RADIUS: f64 = 1e-6;

const PERTURB_DIRECTION: [f64; 3] = [0.381_966, 0.723_607, 0.577_350];

/// Zero count of a field on S¹.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleZeros {
    pub count: usize,
    /// Zero angles in `[0, 2π)`, refined by bisection.
    pub angles: Vec<f64>,
    pub grid_points: usize,
}

/// Counts sign changes on a uniform grid of at least 64·d angles and
/// isolates each zero by bisection.
pub fn circle_zeros<F: AmbientField>(p: &F) -> Result<CircleZeros> {
    if p.ambient_dim() != 2 {
        return Err(Error::precondition("circle_zeros needs a field on S¹"));
    }
    let m = 64 * p.degree_hint().max(1);
    let h = 2.0 * PI / m as f64;
    let f = |t: f64| p.value(&[t.cos(), t.sin()]);
    // grid offsets tried in turn if a grid value is exactly zero
    for offset in [0.0, 0.381_966_011_250_105, 0.723_606_797_749_979] {
        let values: Vec<f64> = (0..m).map(|i| f((i as f64 + offset) * h)).collect();
        let max = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if !(max > 1e-12) {
            return Err(Error::BelowResolution(format!(
                "max |p| on the circle grid is {max:e}"
            )));
        }
        if values.contains(&0.0) {
            continue;
        }
        let mut angles = Vec::new();
        for i in 0..m {
            let (va, vb) = (values[i], values[(i + 1) % m]);
            if (va > 0.0) != (vb > 0.0) {
                let (mut a, mut b) = ((i as f64 + offset) * h, (i as f64 + 1.0 + offset) * h);
                let mut fa = va;
                for _ in 0..60 {
                    let mid = 0.5 * (a + b);
                    let fm = f(mid);
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if (fm > 0.0) == (fa > 0.0) {
                        a = mid;
                        fa = fm;
                    } else {
                        b = mid;
                    }
                }
                angles.push((0.5 * (a + b)).rem_euclid(2.0 * PI));
            }
        }
        angles.sort_by(f64::total_cmp);
        return Ok(CircleZeros {
            count: angles.len(),
            angles,
            grid_points: m,
        });
    }
    Err(Error::BelowResolution(
        "grid values are exactly zero for every grid offset".into(),
    ))
}

/// Signs of a field at the vertices of a mesh.
#[derive(Clone, Debug)]
pub struct SignField {
    pub values: Vec<f64>,
    pub positive: Vec<bool>,
    pub ambiguous: Vec<bool>,
    pub exact_zeros: usize,
    pub rms: f64,
}

fn canonical_offset(x: &[f64; 3]) -> [f64; 3] {
    // antipodal vertices get antipodal perturbed points
    let s = match x.iter().find(|c| **c != 0.0) {
        Some(c) if *c < 0.0 => -1.0,
        _ => 1.0,
    };
    let w = PERTURB_DIRECTION;
    let y = [
        x[0] + s * ZERO_OFFSET * w[0],
        x[1] + s * ZERO_OFFSET * w[1],
        x[2] + s * ZERO_OFFSET * w[2],
    ];
    let n = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    [y[0] / n, y[1] / n, y[2] / n]
}

pub fn sign_field<F: AmbientField>(p: &F, mesh: &SphereMesh) -> SignField {
    let nv = mesh.vertices.len();
    let values: Vec<f64> = match p.parity() {
        Some(e) => {
            let sign = if e % 2 == 0 { 1.0 } else { -1.0 };
            let half: Vec<(usize, f64)> = (0..nv)
                .into_par_iter()
                .filter(|&v| v <= mesh.antipode[v] as usize)
                .map(|v| (v, p.value(&mesh.vertices[v])))
                .collect();
            let mut out = vec![0.0; nv];
            for (v, val) in half {
                out[v] = val;
                out[mesh.antipode[v] as usize] = sign * val;
            }
            out
        }
        None => mesh.vertices.par_iter().map(|x| p.value(x)).collect(),
    };
    let rms = (values.iter().map(|v| v * v).sum::<f64>() / nv as f64).sqrt();
    let grad_floor = AMBIGUITY_GRADIENT_TOL * p.degree_hint().max(1) as f64 * rms;
    let mut exact_zeros = 0;
    let mut positive = Vec::with_capacity(nv);
    let mut ambiguous = Vec::with_capacity(nv);
    for (v, &val) in values.iter().enumerate() {
        if val == 0.0 {
            exact_zeros += 1;
            let moved = p.value(&canonical_offset(&mesh.vertices[v]));
            positive.push(moved >= 0.0);
            ambiguous.push(false);
        } else {
            positive.push(val > 0.0);
            let near_zero = val.abs() < AMBIGUITY_TOL * rms;
            ambiguous.push(near_zero && {
                let x = DVector::from_column_slice(&mesh.vertices[v]);
                covariant_jet_unchecked(p, &x).u.norm() < grad_floor
            });
        }
    }
    SignField {
        values,
        positive,
        ambiguous,
        exact_zeros,
        rms,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodalReport {
    pub degree: usize,
    pub level: u32,
    pub vertices: usize,
    /// Connected components of {p ≠ 0}.
    pub domains: usize,
    /// Components of the zero curve on S², `domains - 1`.
    pub b0: usize,
    /// Components of the zero curve traced independently through
    /// sign-changing mesh edges.
    pub curve_components: usize,
    /// First Betti number of each traced component (1 for a closed curve).
    pub component_b1: Vec<usize>,
    /// Components of the image curve in RPⁿ, when the field has a parity.
    pub projective_components: Option<usize>,
    pub ambiguous_cells: usize,
    pub exact_zero_vertices: usize,
    /// Set when ambiguous cells were met or the two counts disagree.
    pub flagged: bool,
}

impl NodalReport {
    fn same_topology(&self, other: &NodalReport) -> bool {
        self.domains == other.domains
            && self.curve_components == other.curve_components
            && self.projective_components == other.projective_components
    }
}

/// Nodal analysis at a fixed mesh without the ambiguity check.
pub fn nodal_report_at<F: AmbientField>(p: &F, mesh: &SphereMesh) -> NodalReport {
    let signs = sign_field(p, mesh);
    nodal_report_from_signs(p.degree_hint(), p.parity(), mesh, &signs)
}

pub(crate) fn nodal_report_from_signs(
    degree: usize,
    parity: Option<usize>,
    mesh: &SphereMesh,
    signs: &SignField,
) -> NodalReport {
    let pos = &signs.positive;
    let mut domains = UnionFind::new(mesh.vertices.len());
    let mut crossing = vec![u32::MAX; mesh.edges.len()];
    let mut crossing_ids = Vec::new();
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        if pos[a as usize] == pos[b as usize] {
            domains.union(a, b);
        } else {
            crossing[e] = crossing_ids.len() as u32;
            crossing_ids.push(e as u32);
        }
    }

    let mut curves = UnionFind::new(crossing_ids.len());
    let mut links = 0usize;
    let mut ambiguous_cells = 0;
    let mut link_ends = Vec::new();
    for (t, te) in mesh.triangles.iter().zip(&mesh.tri_edges) {
        if t.iter().any(|&v| signs.ambiguous[v as usize]) {
            ambiguous_cells += 1;
        }
        let mut ids = [0u32; 3];
        let mut m = 0;
        for &e in te {
            let c = crossing[e as usize];
            if c != u32::MAX {
                ids[m] = c;
                m += 1;
            }
        }
        if m == 2 {
            curves.union(ids[0], ids[1]);
            links += 1;
            link_ends.push(ids[0]);
        }
    }

    // per-component cycle rank: links - nodes + 1
    let mut root_index = std::collections::HashMap::new();
    let mut nodes_per = Vec::new();
    let mut links_per = Vec::new();
    for c in 0..crossing_ids.len() as u32 {
        let r = curves.find(c);
        let k = *root_index.entry(r).or_insert_with(|| {
            nodes_per.push(0usize);
            links_per.push(0usize);
            nodes_per.len() - 1
        });
        nodes_per[k] += 1;
    }
    for &c in &link_ends {
        let r = curves.find(c);
        links_per[root_index[&r]] += 1;
    }
    debug_assert_eq!(links, links_per.iter().sum::<usize>());
    let component_b1: Vec<usize> = links_per
        .iter()
        .zip(&nodes_per)
        .map(|(l, n)| l + 1 - n)
        .collect();
    let curve_components = component_b1.len();

    let projective_components = parity.and_then(|_| {
        let mut self_dual = 0usize;
        let mut paired = 0usize;
        let mut seen = std::collections::HashSet::new();
        for &e_id in &crossing_ids {
            let r = curves.find(crossing[e_id as usize]);
            if !seen.insert(r) {
                continue;
            }
            let c = crossing[mesh.edge_antipode[e_id as usize] as usize];
            if c == u32::MAX {
                return None;
            }
            if curves.find(c) == r {
                self_dual += 1;
            } else {
                paired += 1;
            }
        }
        (paired % 2 == 0).then_some(self_dual + paired / 2)
    });

    let n_domains = domains.sets();
    let b0 = n_domains.saturating_sub(1);
    NodalReport {
        degree,
        level: mesh.level,
        vertices: mesh.vertices.len(),
        domains: n_domains,
        b0,
        curve_components,
        component_b1,
        projective_components,
        ambiguous_cells,
        exact_zero_vertices: signs.exact_zeros,
        flagged: ambiguous_cells > 0 || curve_components != b0,
    }
}

fn check_s2<F: AmbientField>(p: &F) -> Result<()> {
    if p.ambient_dim() != 3 {
        return Err(Error::precondition("nodal analysis needs a field on S²"));
    }
    Ok(())
}

/// Default mesh level for nodal counts at degree `d`.
pub fn nodal_level(d: usize) -> u32 {
    level_for_degree(d, NODAL_PER_WAVELENGTH)
}

/// Nodal domains and zero-curve components on a given mesh. Fails if any
/// cell touches a vertex whose sign is below resolution.
pub fn nodal_domains<F: AmbientField>(p: &F, mesh: &SphereMesh) -> Result<NodalReport> {
    check_s2(p)?;
    let rep = nodal_report_at(p, mesh);
    if rep.ambiguous_cells > 0 {
        return Err(Error::UnreliableCount(format!(
            "{} ambiguous cells at mesh level {}",
            rep.ambiguous_cells, rep.level
        )));
    }
    Ok(rep)
}

/// Refines the mesh from `start` until two consecutive unambiguous levels
/// agree; returns the coarser of the two.
pub fn refine_until_stable<F: AmbientField>(p: &F, start: u32, max: u32) -> Result<NodalReport> {
    check_s2(p)?;
    if start >= max || max > MAX_LEVEL {
        return Err(Error::precondition(format!(
            "need start < max ≤ {MAX_LEVEL}, got {start}..{max}"
        )));
    }
    let mut prev: Option<NodalReport> = None;
    for level in start..=max {
        let mesh = SphereMesh::shared(level)?;
        let rep = nodal_report_at(p, &mesh);
        if rep.flagged {
            prev = None;
            continue;
        }
        if let Some(pr) = prev.take() {
            if pr.same_topology(&rep) {
                return Ok(pr);
            }
        }
        prev = Some(rep);
    }
    Err(Error::UnresolvedTopology(format!(
        "counts did not stabilize between mesh levels {start} and {max}"
    )))
}

/// Bump radius around a repaired saddle, in units of 1/d.
pub const SADDLE_BUMP_RADIUS: f64 = 1.0;
/// Bump radii tried, as fractions of `SADDLE_BUMP_RADIUS / d`.
const BUMP_SCALES: [f64; 3] = [1.0, 0.5, 0.25];
const BUMP_CHECK_RINGS: usize = 24;
const BUMP_CHECK_RAYS: usize = 48;

/// Smooth bump `σ·depth·(1 - |x-c|²/r²)²` supported in the chordal ball of
/// radius `r` around `centre`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleBump {
    pub centre: [f64; 3],
    pub sign: f64,
    pub depth: f64,
    pub radius: f64,
}

impl SaddleBump {
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut d2 = T::constant(0.0);
        for (xi, ci) in x.iter().zip(&self.centre) {
            let t = *xi - T::constant(*ci);
            d2 += t * t;
        }
        let r2 = self.radius * self.radius;
        if d2.value() >= r2 {
            return T::constant(0.0);
        }
        let w = T::constant(1.0) - d2 * (1.0 / r2);
        w * w * (self.sign * self.depth)
    }
}

/// A field plus bumps at its near-zero saddles. Each bump pushes the saddle
/// value further from zero without changing the topology of the zero set,
/// so a mesh can resolve necks that are thinner than its cells.
#[derive(Clone, Debug)]
pub struct SaddleRepaired<'a, F> {
    pub field: &'a F,
    pub bumps: Vec<SaddleBump>,
}

impl<F: AmbientField> AmbientField for SaddleRepaired<'_, F> {
    fn ambient_dim(&self) -> usize {
        self.field.ambient_dim()
    }
    fn eval<T: Scalar>(&self, x: &[T]) -> T {
        let mut v = self.field.eval(x);
        for b in &self.bumps {
            v += b.eval(x);
        }
        v
    }
    fn degree_hint(&self) -> usize {
        self.field.degree_hint()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.bumps.iter().fold(self.field.value(x), |v, b| v + b.eval(x))
    }
    fn parity(&self) -> Option<usize> {
        self.field.parity()
    }
}

/// Finds saddles whose value is small against their Hessian at scale
/// `r = SADDLE_BUMP_RADIUS / d` and attaches a bump of depth `κ r² / 8`
/// (κ the smaller Hessian eigenvalue magnitude) to each.
///
/// The deformation `p + t·bump`, `t ∈ [0, 1]`, keeps the zero set's topology
/// when no zero of it is critical. That is checked on a polar grid around
/// every bump: at each grid point either `p` already has the bump's sign,
/// `|p|` exceeds the depth, or `|∇p|` beats the bump's gradient. Failure of
/// the check shrinks the bump; no safe bump or overlapping bumps give
/// `UnresolvedTopology`.
pub fn repair_saddles<F: AmbientField>(p: &F) -> Result<SaddleRepaired<'_, F>> {
    check_s2(p)?;
    let d = p.degree_hint().max(1) as f64;
    let crit = critical_points(p)?;
    let chord = |a: &[f64; 3], b: &[f64; 3]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt();
    // with a parity, work on one representative per antipodal pair and mirror at the end
    let flip = p.parity().map(|e| if e % 2 == 0 { 1.0 } else { -1.0 });
    let mut saddles: Vec<([f64; 3], f64)> = Vec::new();
    for c in crit.points.iter().filter(|c| c.kind == CriticalKind::Saddle) {
        let (mut x, mut v) = (c.x, c.value);
        if let Some(f) = flip {
            if !x.iter().find(|a| **a != 0.0).is_some_and(|a| *a > 0.0) {
                x = x.map(|a| -a);
                v *= f;
            }
        }
        if !saddles.iter().any(|(y, _)| chord(y, &x) < CRITICAL_MERGE_RADIUS) {
            saddles.push((x, v));
        }
    }
    let mut bumps: Vec<SaddleBump> = Vec::new();
    for (x, v) in saddles {
        let xv = DVector::from_column_slice(&x);
        let frame = complement_frame(3, &[&xv]);
        let (_, h) = covariant_jet_unchecked(p, &xv).in_frame(&frame);
        let kappa = h.symmetric_eigenvalues().iter().fold(f64::INFINITY, |m, l| m.min(l.abs()));
        let mut accepted = None;
        for scale in BUMP_SCALES {
            let radius = scale * SADDLE_BUMP_RADIUS / d;
            let depth = kappa * radius * radius / 8.0;
            if v.abs() >= depth {
                break;
            }
            if v == 0.0 {
                return Err(Error::UnresolvedTopology(format!("saddle exactly on the zero set at {x:?}")));
            }
            let b = SaddleBump { centre: x, sign: v.signum(), depth, radius };
            if bump_is_safe(p, &b) {
                accepted = Some(b);
                break;
            }
        }
        match accepted {
            Some(b) => bumps.push(b),
            None if v.abs() < kappa * (BUMP_SCALES[BUMP_SCALES.len() - 1] * SADDLE_BUMP_RADIUS / d).powi(2) / 8.0 => {
                return Err(Error::UnresolvedTopology(format!("no safe bump for the saddle at {x:?}")));
            }
            None => {}
        }
    }
    if let Some(f) = flip {
        let mirrored: Vec<SaddleBump> = bumps
            .iter()
            .map(|b| SaddleBump { centre: b.centre.map(|v| -v), sign: f * b.sign, ..*b })
            .collect();
        bumps.extend(mirrored);
    }
    for (i, b) in bumps.iter().enumerate() {
        if bumps[..i].iter().any(|o| chord(&o.centre, &b.centre) < o.radius + b.radius) {
            return Err(Error::UnresolvedTopology("near-zero saddles with overlapping bumps".into()));
        }
    }
    Ok(SaddleRepaired { field: p, bumps })
}

fn bump_is_safe<F: AmbientField>(p: &F, b: &SaddleBump) -> bool {
    let c = DVector::from_column_slice(&b.centre);
    let frame = complement_frame(3, &[&c]);
    for i in 1..=BUMP_CHECK_RINGS {
        // chordal radius ρ·r, reached along a great circle
        let chord = b.radius * i as f64 / (BUMP_CHECK_RINGS + 1) as f64;
        let angle = 2.0 * (0.5 * chord).asin();
        let rho = chord / b.radius;
        let bump_grad = b.depth * 4.0 * rho * (1.0 - rho * rho) / b.radius;
        for k in 0..BUMP_CHECK_RAYS {
            let t = 2.0 * PI * k as f64 / BUMP_CHECK_RAYS as f64;
            let dir = frame.column(0) * t.cos() + frame.column(1) * t.sin();
            let x = &c * angle.cos() + dir * angle.sin();
            let j = covariant_jet_unchecked(p, &x);
            let safe = j.a * b.sign > 0.0 || j.a.abs() > b.depth || j.u.norm() > bump_grad;
            if !safe {
                return false;
            }
        }
    }
    true
}

/// [`refine_until_stable`], retried on the saddle-repaired field when the
/// plain counts do not settle.
pub fn resolve_nodal_topology<F: AmbientField>(p: &F, start: u32, max: u32) -> Result<NodalReport> {
    match refine_until_stable(p, start, max) {
        Err(Error::UnresolvedTopology(first)) => {
            let repaired = repair_saddles(p)?;
            if repaired.bumps.is_empty() {
                return Err(Error::UnresolvedTopology(first));
            }
            refine_until_stable(&repaired, start, max)
        }
        other => other,
    }
}

/// Harnack's bound on the number of components of a degree-d real
/// projective plane curve.
pub fn harnack_bound(d: usize) -> usize {
    if d == 0 {
        return 0;
    }
    (d - 1) * (d.saturating_sub(2)) / 2 + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CriticalKind {
    Minimum,
    Saddle,
    Maximum,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: [f64; 3],
    pub value: f64,
    pub kind: CriticalKind,
    pub gradient_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub degree: usize,
    pub level: u32,
    pub seeds: usize,
    pub unconverged_seeds: usize,
    pub points: Vec<CriticalPoint>,
    pub count: usize,
    pub minima: usize,
    pub saddles: usize,
    pub maxima: usize,
    /// maxima - saddles + minima; equals 2 for a Morse function on S².
    pub morse_sum: i64,
    pub fully_converged: bool,
}

fn sphere_exp(x: &DVector<f64>, t: &DVector<f64>) -> DVector<f64> {
    let r = t.norm();
    if r == 0.0 {
        return x.clone();
    }
    let y = x * r.cos() + t * (r.sin() / r);
    let n = y.norm();
    y / n
}

struct Newton {
    point: DVector<f64>,
    value: f64,
    gradient_norm: f64,
    hessian: Matrix2<f64>,
}

fn newton_critical<F: AmbientField>(p: &F, seed: DVector<f64>, tol: f64, max_step: f64) -> Option<Newton> {
    let mut x = seed;
    for _ in 0..50 {
        let j = covariant_jet_unchecked(p, &x);
        let frame = complement_frame(3, &[&x]);
        let g = frame.transpose() * &j.u;
        let h = frame.transpose() * &j.q * &frame;
        let g2 = Vector2::new(g[0], g[1]);
        let h2 = Matrix2::new(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
        if g2.norm() <= tol {
            return Some(Newton {
                point: x,
                value: j.a,
                gradient_norm: g2.norm(),
                hessian: h2,
            });
        }
        let mut s = h2.lu().solve(&(-g2))?;
        let sn = s.norm();
        if !sn.is_finite() {
            return None;
        }
        if sn > max_step {
            s *= max_step / sn;
        }
        let t = &frame * DVector::from_column_slice(s.as_slice());
        x = sphere_exp(&x, &t);
    }
    None
}

/// Critical points of a field on S², seeded from mesh triangles in which the
/// covariant gradient vanishes and polished by damped Newton iteration.
pub fn critical_points<F: AmbientField>(p: &F) -> Result<CriticalReport> {
    check_s2(p)?;
    let d = p.degree_hint();
    let level = level_for_degree(d, CRITICAL_PER_WAVELENGTH).max(2);
    let mesh = SphereMesh::shared(level)?;
    let grads: Vec<DVector<f64>> = mesh
        .vertices
        .par_iter()
        .map(|v| covariant_jet_unchecked(p, &DVector::from_column_slice(v)).u)
        .collect();
    let scale = (grads.iter().map(|g| g.norm_squared()).sum::<f64>() / grads.len() as f64).sqrt();
    if !(scale > 0.0) {
        return Err(Error::BelowResolution("gradient vanishes on the whole mesh".into()));
    }
    let tol = 1e-11 * scale;

    let seeds: Vec<DVector<f64>> = mesh
        .triangles
        .iter()
        .filter_map(|t| {
            let verts: Vec<DVector<f64>> = t
                .iter()
                .map(|&v| DVector::from_column_slice(&mesh.vertices[v as usize]))
                .collect();
            let c = (&verts[0] + &verts[1] + &verts[2]).normalize();
            let frame = complement_frame(3, &[&c]);
            let g: Vec<Vector2<f64>> = t
                .iter()
                .map(|&v| {
                    let pr = frame.transpose() * &grads[v as usize];
                    Vector2::new(pr[0], pr[1])
                })
                .collect();
            let bary = barycentric_of_origin(&g)?;
            let x = &verts[0] * bary[0] + &verts[1] * bary[1] + &verts[2] * bary[2];
            Some(x.normalize())
        })
        .collect();

    let max_step = 0.5 / d.max(1) as f64;
    let polished: Vec<Option<Newton>> = seeds
        .par_iter()
        .map(|s| newton_critical(p, s.clone(), tol, max_step))
        .collect();

    let mut points: Vec<CriticalPoint> = Vec::new();
    let mut unconverged = 0;
    for n in polished {
        let Some(n) = n else {
            unconverged += 1;
            continue;
        };
        let duplicate = points.iter().any(|q| {
            let dot = q.x[0] * n.point[0] + q.x[1] * n.point[1] + q.x[2] * n.point[2];
            dot.clamp(-1.0, 1.0).acos() < CRITICAL_MERGE_RADIUS
        });
        if duplicate {
            continue;
        }
        let eig = n.hessian.symmetric_eigenvalues();
        let hs = eig.amax().max(1e-300);
        let kind = if eig.iter().any(|l| l.abs() < 1e-9 * hs) {
            CriticalKind::Degenerate
        } else if eig.iter().all(|&l| l > 0.0) {
            CriticalKind::Minimum
        } else if eig.iter().all(|&l| l < 0.0) {
            CriticalKind::Maximum
        } else {
            CriticalKind::Saddle
        };
        points.push(CriticalPoint {
            x: [n.point[0], n.point[1], n.point[2]],
            value: n.value,
            kind,
            gradient_norm: n.gradient_norm,
        });
    }
    points.sort_by(|a, b| {
        a.x.iter()
            .zip(&b.x)
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let count_kind = |k| points.iter().filter(|q| q.kind == k).count();
    let (minima, saddles, maxima) = (
        count_kind(CriticalKind::Minimum),
        count_kind(CriticalKind::Saddle),
        count_kind(CriticalKind::Maximum),
    );
    let degenerate = count_kind(CriticalKind::Degenerate);
    Ok(CriticalReport {
        degree: d,
        level,
        seeds: seeds.len(),
        unconverged_seeds: unconverged,
        count: points.len(),
        minima,
        saddles,
        maxima,
        morse_sum: maxima as i64 - saddles as i64 + minima as i64,
        fully_converged: unconverged == 0 && degenerate == 0,
        points,
    })
}

/// Barycentric coordinates of the origin in the planar triangle `g`, if it
/// lies inside (boundary included).
fn barycentric_of_origin(g: &[Vector2<f64>]) -> Option<[f64; 3]> {
    let m = DMatrix::from_row_slice(2, 2, &[g[1][0] - g[0][0], g[2][0] - g[0][0], g[1][1] - g[0][1], g[2][1] - g[0][1]]);
    let rhs = DVector::from_row_slice(&[-g[0][0], -g[0][1]]);
    let sol = m.lu().solve(&rhs)?;
    let (b1, b2) = (sol[0], sol[1]);
    let b0 = 1.0 - b1 - b2;
    let eps = -1e-12;
    (b0 >= eps && b1 >= eps && b2 >= eps).then_some([b0, b1, b2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample, EnsembleSpec, PolynomialSample};
    use crate::field::Polynomial;

    fn x2_squared_minus(c: f64) -> Polynomial {
        Polynomial::new(3, vec![(vec![0, 0, 2], 1.0), (vec![0, 0, 0], -c)])
    }

    #[test]
    fn top_harmonic_has_maximal_zero_count() {
        for d in [1, 4, 7] {
            let p = PolynomialSample::single_harmonic(1, d, d, 0, 0).unwrap();
            assert_eq!(circle_zeros(&p).unwrap().count, 2 * d);
        }
    }

    #[test]
    fn constant_has_no_zeros_and_zero_is_below_resolution() {
        let c = Polynomial::constant(2, 3.0);
        assert_eq!(circle_zeros(&c).unwrap().count, 0);
        let z = Polynomial::constant(2, 0.0);
        assert!(matches!(circle_zeros(&z), Err(Error::BelowResolution(_))));
    }

    #[test]
    fn zero_angles_are_refined() {
        // x₀ on S¹ vanishes at π/2 and 3π/2
        let p = Polynomial::coordinate(2, 0);
        let z = circle_zeros(&p).unwrap();
        assert_eq!(z.count, 2);
        assert!((z.angles[0] - PI / 2.0).abs() < 1e-12);
        assert!((z.angles[1] - 3.0 * PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn equator_and_two_latitudes() {
        let mesh = SphereMesh::icosphere(3).unwrap();
        let eq = nodal_domains(&Polynomial::coordinate(3, 2), &mesh).unwrap();
        assert_eq!((eq.domains, eq.b0, eq.curve_components), (2, 1, 1));
        assert_eq!(eq.projective_components, Some(1));
        let lat = nodal_domains(&x2_squared_minus(0.25), &mesh).unwrap();
        assert_eq!((lat.domains, lat.b0, lat.curve_components), (3, 2, 2));
        assert_eq!(lat.component_b1, vec![1, 1]);
        assert_eq!(lat.projective_components, Some(1));
    }

    #[test]
    fn near_singular_field_is_unresolved() {
        let p = x2_squared_minus(1e-9);
        assert!(matches!(refine_until_stable(&p, 2, 5), Err(Error::UnresolvedTopology(_))));
        let eq = refine_until_stable(&Polynomial::coordinate(3, 2), 0, 3).unwrap();
        assert_eq!(eq.level, 0);
    }

    #[test]
    fn thin_saddle_necks_are_repaired() {
        // x₀² - x₁² + ε x₂²: the sign of ε decides which pair of caps joins
        // through necks of width ~√ε at the poles ±e₂
        for eps in [1e-7, -1e-7] {
            let p = Polynomial::new(3, vec![(vec![2, 0, 0], 1.0), (vec![0, 2, 0], -1.0), (vec![0, 0, 2], eps)]);
            let repaired = repair_saddles(&p).unwrap();
            assert_eq!(repaired.bumps.len(), 2);
            assert!(repaired.bumps.iter().all(|b| b.sign == eps.signum() && b.centre[2].abs() > 0.999));
            let rep = resolve_nodal_topology(&p, 2, 5).unwrap();
            assert_eq!((rep.domains, rep.b0, rep.curve_components), (3, 2, 2));
            assert_eq!(rep.projective_components, Some(1));
        }
    }

    #[test]
    fn harnack_values() {
        assert_eq!(harnack_bound(1), 1);
        assert_eq!(harnack_bound(2), 1);
        assert_eq!(harnack_bound(4), 4);
        assert_eq!(harnack_bound(6), 11);
    }

    #[test]
    fn random_draws_respect_duality_and_harnack() {
        for i in 0..6 {
            let p = sample(&EnsembleSpec::harmonic(2, 7, 3), i).unwrap();
            let rep = refine_until_stable(&p, nodal_level(7), nodal_level(7) + 2).unwrap();
            assert_eq!(rep.curve_components, rep.b0);
            assert!(rep.component_b1.iter().all(|&b| b == 1));
            assert!(rep.projective_components.unwrap() <= harnack_bound(7));
        }
    }

    #[test]
    fn height_function_has_two_critical_points() {
        let r = critical_points(&Polynomial::coordinate(3, 0)).unwrap();
        assert_eq!((r.count, r.maxima, r.minima), (2, 1, 1));
        assert!(r.points.iter().any(|q| (q.x[0] - 1.0).abs() < 1e-12));
    }

    #[test]
    fn quadratic_form_has_six_critical_points() {
        let a = vec![vec![3.0, 0.5, 0.0], vec![0.5, 1.0, 0.2], vec![0.0, 0.2, -2.0]];
        let r = critical_points(&Polynomial::quadratic_form(&a)).unwrap();
        assert_eq!(r.count, 6);
        assert_eq!((r.maxima, r.saddles, r.minima), (2, 2, 2));
        // eigenvector oracle
        let am = DMatrix::from_fn(3, 3, |i, j| a[i][j]);
        let eig = am.symmetric_eigen();
        for k in 0..3 {
            let v = eig.eigenvectors.column(k);
            assert!(r.points.iter().any(|q| (q.x[0] * v[0] + q.x[1] * v[1] + q.x[2] * v[2]).abs() > 1.0 - 1e-10));
        }
    }

    #[test]
    fn random_critical_points_satisfy_morse_relation() {
        for i in 0..4 {
            let p = sample(&EnsembleSpec::harmonic(2, 6, 9), i).unwrap();
            let r = critical_points(&p).unwrap();
            assert!(r.fully_converged);
            assert_eq!(r.morse_sum, 2);
            assert_eq!(r.count % 2, 0);
        }
    }
}
