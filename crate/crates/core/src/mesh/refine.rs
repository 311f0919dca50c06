//! Triangle refinement on the sphere: uniform 4-way subdivision and local
//! longest-edge bisection with conforming closure (used for tip grading).

use nalgebra::Vector3;
use std::collections::HashMap;

use crate::{CoreError, Result};

pub(crate) fn normalize(v: Vector3<f64>) -> Vector3<f64> {
    v / v.norm()
}

/// Canonical undirected edge key.
pub(crate) fn edge_key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// One uniform 4-way subdivision pass; midpoints are projected back onto the
/// sphere. Edges whose endpoints lie on a common great circle stay on it, so
/// arc alignment survives subdivision.
pub(crate) fn subdivide_once(
    verts: &mut Vec<Vector3<f64>>,
    tris: &[[usize; 3]],
) -> Vec<[usize; 3]> {
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut out = Vec::with_capacity(tris.len() * 4);
    let mut mid = |verts: &mut Vec<Vector3<f64>>, u: usize, v: usize| -> usize {
        *midpoint.entry(edge_key(u, v)).or_insert_with(|| {
            let p = normalize(verts[u] + verts[v]);
            verts.push(p);
            verts.len() - 1
        })
    };
    for &[a, b, c] in tris {
        let ab = mid(verts, a, b);
        let bc = mid(verts, b, c);
        let ca = mid(verts, c, a);
        out.push([a, ab, ca]);
        out.push([b, bc, ab]);
        out.push([c, ca, bc]);
        out.push([ab, bc, ca]);
    }
    out
}

/// Longest edge of a triangle by chord length, with deterministic
/// tie-breaking on the vertex indices.
fn longest_edge(verts: &[Vector3<f64>], tri: [usize; 3]) -> (usize, usize) {
    let mut best = edge_key(tri[0], tri[1]);
    let mut best_len = (verts[tri[0]] - verts[tri[1]]).norm_squared();
    for (u, v) in [(tri[1], tri[2]), (tri[2], tri[0])] {
        let len = (verts[u] - verts[v]).norm_squared();
        let key = edge_key(u, v);
        if len > best_len + 1e-15 * best_len || ((len - best_len).abs() <= 1e-15 * best_len && key < best)
        {
            best = key;
            best_len = len;
        }
    }
    best
}

/// In-place local refinement structure. Triangles are tombstoned rather than
/// removed so indices stay stable during a cascade.
pub(crate) struct Bisector {
    pub verts: Vec<Vector3<f64>>,
    pub tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edge_map: HashMap<(usize, usize), Vec<usize>>,
    max_vertices: usize,
}

impl Bisector {
    pub fn new(verts: Vec<Vector3<f64>>, tris: Vec<[usize; 3]>, max_vertices: usize) -> Self {
        let alive = vec![true; tris.len()];
        let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, t) in tris.iter().enumerate() {
            for k in 0..3 {
                edge_map
                    .entry(edge_key(t[k], t[(k + 1) % 3]))
                    .or_default()
                    .push(i);
            }
        }
        Bisector {
            verts,
            tris,
            alive,
            edge_map,
            max_vertices,
        }
    }

    fn tris_of_edge(&self, e: (usize, usize)) -> Vec<usize> {
        self.edge_map
            .get(&e)
            .map(|v| v.iter().copied().filter(|&i| self.alive[i]).collect())
            .unwrap_or_default()
    }

    fn detach(&mut self, i: usize) {
        self.alive[i] = false;
        let t = self.tris[i];
        for k in 0..3 {
            if let Some(list) = self.edge_map.get_mut(&edge_key(t[k], t[(k + 1) % 3])) {
                list.retain(|&x| x != i);
            }
        }
    }

    fn attach(&mut self, t: [usize; 3]) -> usize {
        let i = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for k in 0..3 {
            self.edge_map
                .entry(edge_key(t[k], t[(k + 1) % 3]))
                .or_default()
                .push(i);
        }
        i
    }

    /// Split triangle `i` across edge `e` using vertex `m` as the midpoint.
    fn split_across(&mut self, i: usize, e: (usize, usize), m: usize) {
        let t = self.tris[i];
        self.detach(i);
        // rotate so the split edge is (t[1], t[2])
        let apex = (0..3)
            .find(|&k| t[k] != e.0 && t[k] != e.1)
            .expect("edge not in triangle");
        let a = t[apex];
        let b = t[(apex + 1) % 3];
        let c = t[(apex + 2) % 3];
        self.attach([a, b, m]);
        self.attach([a, m, c]);
    }

    /// Bisect every triangle in `marked` (by current index) across its
    /// longest edge, recursively bisecting neighbors first when their longest
    /// edge differs, so the mesh stays conforming.
    pub fn bisect_marked(&mut self, marked: &[usize]) -> Result<()> {
        let mut stack: Vec<usize> = marked.to_vec();
        stack.reverse();
        while let Some(i) = stack.pop() {
            if !self.alive[i] {
                continue;
            }
            if self.verts.len() >= self.max_vertices {
                return Err(CoreError::MeshBudgetExceeded {
                    vertices: self.verts.len(),
                    cap: self.max_vertices,
                });
            }
            let e = longest_edge(&self.verts, self.tris[i]);
            let others = self.tris_of_edge(e);
            let neighbor = others.iter().copied().find(|&j| j != i);
            if let Some(j) = neighbor {
                if longest_edge(&self.verts, self.tris[j]) != e {
                    // refine the neighbor first, then come back
                    stack.push(i);
                    stack.push(j);
                    continue;
                }
            }
            let m = {
                let p = normalize(self.verts[e.0] + self.verts[e.1]);
                self.verts.push(p);
                self.verts.len() - 1
            };
            self.split_across(i, e, m);
            if let Some(j) = neighbor {
                self.split_across(j, e, m);
            }
        }
        Ok(())
    }

    /// Indices of live triangles with any vertex within geodesic radius
    /// `cap` of `center`.
    pub fn mark_near(&self, center: &Vector3<f64>, cap: f64) -> Vec<usize> {
        let cos_cap = cap.cos();
        let mut out = Vec::new();
        for (i, t) in self.tris.iter().enumerate() {
            if !self.alive[i] {
                continue;
            }
            if t.iter().any(|&v| self.verts[v].dot(center) >= cos_cap) {
                out.push(i);
            }
        }
        out
    }

    pub fn into_parts(self) -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
        let tris = self
            .tris
            .into_iter()
            .zip(self.alive)
            .filter_map(|(t, ok)| ok.then_some(t))
            .collect();
        (self.verts, tris)
    }
}

/// Canonical icosahedron inscribed in the unit sphere, outward-oriented.
pub(crate) fn icosahedron() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, phi, 0.0),
        (1.0, phi, 0.0),
        (-1.0, -phi, 0.0),
        (1.0, -phi, 0.0),
        (0.0, -1.0, phi),
        (0.0, 1.0, phi),
        (0.0, -1.0, -phi),
        (0.0, 1.0, -phi),
        (phi, 0.0, -1.0),
        (phi, 0.0, 1.0),
        (-phi, 0.0, -1.0),
        (-phi, 0.0, 1.0),
    ];
    let verts: Vec<Vector3<f64>> = raw
        .iter()
        .map(|&(x, y, z)| normalize(Vector3::new(x, y, z)))
        .collect();
    let tris = vec![
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
    (verts, tris)
}
