//! Geodesic icosphere meshes of S² and a small union-find.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

use crate::error::{Error, Result};

/// Deepest subdivision level served (10·4⁹ + 2 ≈ 2.6M vertices).
pub const MAX_LEVEL: u32 = 9;

/// Bound on `2^level · (longest geodesic edge)`. The scaled edge grows with
/// the level towards ≈ 1.32315 (1.25664 at level 1, 1.32315 at level 7).
const EDGE_SCALE: f64 = 1.3235;

#[derive(Debug, Serialize)]
pub struct SphereMesh {
    pub level: u32,
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[u32; 3]>,
    pub edges: Vec<[u32; 2]>,
    /// Edge ids of each triangle, `tri_edges[t][i]` joining corners i, i+1.
    #[serde(skip)]
    pub tri_edges: Vec<[u32; 3]>,
    /// `antipode[v]` is the vertex at `-vertices[v]`.
    #[serde(skip)]
    pub antipode: Vec<u32>,
    /// `edge_antipode[e]` is the edge joining the antipodes of `e`'s ends.
    #[serde(skip)]
    pub edge_antipode: Vec<u32>,
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn key(v: &[f64; 3]) -> [u64; 3] {
    // +0.0 and -0.0 must collide
    v.map(|c| (c + 0.0).to_bits())
}

impl SphereMesh {
    pub fn icosphere(level: u32) -> Result<Self> {
        if level > MAX_LEVEL {
            return Err(Error::domain(format!("mesh level {level} exceeds {MAX_LEVEL}")));
        }
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let raw = [
            [-1.0, phi, 0.0],
            [1.0, phi, 0.0],
            [-1.0, -phi, 0.0],
            [1.0, -phi, 0.0],
            [0.0, -1.0, phi],
            [0.0, 1.0, phi],
            [0.0, -1.0, -phi],
            [0.0, 1.0, -phi],
            [phi, 0.0, -1.0],
            [phi, 0.0, 1.0],
            [-phi, 0.0, -1.0],
            [-phi, 0.0, 1.0],
        ];
        let mut vertices: Vec<[f64; 3]> = raw.iter().map(|&v| normalize(v)).collect();
        let mut triangles: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut mid: HashMap<(u32, u32), u32> = HashMap::with_capacity(triangles.len() * 3 / 2);
            let mut next = Vec::with_capacity(triangles.len() * 4);
            let mut midpoint = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| -> u32 {
                let k = (a.min(b), a.max(b));
                *mid.entry(k).or_insert_with(|| {
                    let (p, q) = (verts[a as usize], verts[b as usize]);
                    verts.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                    (verts.len() - 1) as u32
                })
            };
            for &[a, b, c] in &triangles {
                let ab = midpoint(a, b, &mut vertices);
                let bc = midpoint(b, c, &mut vertices);
                let ca = midpoint(c, a, &mut vertices);
                next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            triangles = next;
        }

        let mut edge_index = HashMap::with_capacity(triangles.len() * 3 / 2);
        let mut edges = Vec::with_capacity(triangles.len() * 3 / 2);
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let mut te = [0u32; 3];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let k = (a.min(b), a.max(b));
                te[i] = *edge_index.entry(k).or_insert_with(|| {
                    edges.push([k.0, k.1]);
                    (edges.len() - 1) as u32
                });
            }
            tri_edges.push(te);
        }

        let lookup: HashMap<[u64; 3], u32> = vertices
            .iter()
            .enumerate()
            .map(|(i, v)| (key(v), i as u32))
            .collect();
        let antipode: Vec<u32> = vertices
            .iter()
            .map(|v| lookup[&key(&[-v[0], -v[1], -v[2]])])
            .collect();
        let edge_antipode = edges
            .iter()
            .map(|&[a, b]| {
                let (x, y) = (antipode[a as usize], antipode[b as usize]);
                edge_index[&(x.min(y), x.max(y))]
            })
            .collect();

        Ok(SphereMesh {
            level,
            vertices,
            triangles,
            edges,
            tri_edges,
            antipode,
            edge_antipode,
        })
    }

    /// Process-wide cache of icospheres by level.
    pub fn shared(level: u32) -> Result<Arc<SphereMesh>> {
        static CACHE: OnceLock<Mutex<HashMap<u32, Arc<SphereMesh>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("mesh cache poisoned");
        if let Some(m) = guard.get(&level) {
            return Ok(m.clone());
        }
        let m = Arc::new(SphereMesh::icosphere(level)?);
        guard.insert(level, m.clone());
        Ok(m)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (self.vertices[a as usize], self.vertices[b as usize]);
                (p[0] * q[0] + p[1] * q[1] + p[2] * q[2]).clamp(-1.0, 1.0).acos()
            })
            .fold(0.0, f64::max)
    }
}

/// Upper bound on the longest edge at `level`.
pub fn max_edge_bound(level: u32) -> f64 {
    EDGE_SCALE / 2f64.powi(level as i32)
}

/// Smallest level whose edges are at most `wavelength / per_wavelength`,
/// with wavelength `2π / d`.
pub fn level_for_degree(d: usize, per_wavelength: f64) -> u32 {
    let target = 2.0 * std::f64::consts::PI / (d.max(1) as f64 * per_wavelength);
    (0..=MAX_LEVEL)
        .find(|&l| max_edge_bound(l) <= target)
        .unwrap_or(MAX_LEVEL)
}

/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
    sets: usize,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
            sets: n,
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let gp = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = gp;
            x = gp;
        }
        x
    }

    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb as usize] = ra;
        self.size[ra as usize] += self.size[rb as usize];
        self.sets -= 1;
        true
    }

    pub fn sets(&self) -> usize {
        self.sets
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_is_a_closed_sphere() {
        for level in 0..=4 {
            let m = SphereMesh::icosphere(level).unwrap();
            assert_eq!(m.vertices.len(), 10 * 4usize.pow(level) + 2);
            assert_eq!(m.euler_characteristic(), 2);
            let mut count = vec![0usize; m.edges.len()];
            for (t, te) in m.triangles.iter().zip(&m.tri_edges) {
                for i in 0..3 {
                    let [a, b] = m.edges[te[i] as usize];
                    let (u, v) = (t[i], t[(i + 1) % 3]);
                    assert_eq!([a, b], [u.min(v), u.max(v)]);
                    count[te[i] as usize] += 1;
                }
            }
            assert!(count.iter().all(|&c| c == 2));
        }
    }

    #[test]
    fn antipode_is_an_involution() {
        let m = SphereMesh::icosphere(3).unwrap();
        for (v, &a) in m.antipode.iter().enumerate() {
            assert_eq!(m.antipode[a as usize] as usize, v);
            let (p, q) = (m.vertices[v], m.vertices[a as usize]);
            assert_eq!([p[0] + q[0], p[1] + q[1], p[2] + q[2]], [0.0; 3]);
        }
        for (e, &f) in m.edge_antipode.iter().enumerate() {
            assert_eq!(m.edge_antipode[f as usize] as usize, e);
        }
    }

    #[test]
    fn edge_bound_holds() {
        for level in 0..=6 {
            let m = SphereMesh::icosphere(level).unwrap();
            assert!(m.max_edge_length() <= max_edge_bound(level), "level {level}");
        }
    }

    #[test]
    fn level_choice_resolves_wavelength() {
        for d in [1, 5, 20, 40] {
            let l = level_for_degree(d, 8.0);
            let wl = 2.0 * std::f64::consts::PI / d as f64;
            assert!(max_edge_bound(l) * 8.0 <= wl);
            assert!(l == 0 || max_edge_bound(l - 1) * 8.0 > wl);
        }
    }

    #[test]
    fn union_find_counts_sets() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 1);
        uf.union(2, 3);
        uf.union(1, 3);
        assert!(!uf.union(0, 2));
        assert_eq!(uf.sets(), 3);
        assert_eq!(uf.find(3), uf.find(0));
    }
}
