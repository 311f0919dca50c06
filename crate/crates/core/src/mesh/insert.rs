//! Constrained arc insertion for custom traces: walks each arc through an
//! existing sphere triangulation, snapping nearby vertices onto the arc and
//! splitting crossed edges, until the arc is a chain of mesh edges.
//!
//! Arcs must meet only at shared endpoints. The walk is deterministic; mesh
//! quality near inserted arcs is bounded by the snap threshold but is not
//! otherwise optimized (preset traces use the structured builders instead).

use nalgebra::Vector3;
use std::collections::{HashMap, HashSet};

use super::refine::normalize;
use crate::cone::Arc;
use crate::{CoreError, Result};

const WALK_TOL: f64 = 1e-9;
/// Fraction of the local edge length below which a crossing snaps onto an
/// existing vertex instead of splitting the edge.
const SNAP_FRACTION: f64 = 0.3;

pub(crate) struct Inserter {
    pub verts: Vec<Vector3<f64>>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    of_vertex: HashMap<usize, Vec<usize>>,
    pinned: HashSet<usize>,
    max_vertices: usize,
}

impl Inserter {
    pub fn new(verts: Vec<Vector3<f64>>, tris: Vec<[usize; 3]>, max_vertices: usize) -> Self {
        let mut of_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
        for (i, t) in tris.iter().enumerate() {
            for &v in t {
                of_vertex.entry(v).or_default().push(i);
            }
        }
        let alive = vec![true; tris.len()];
        Inserter {
            verts,
            tris,
            alive,
            of_vertex,
            pinned: HashSet::new(),
            max_vertices,
        }
    }

    fn check_budget(&self) -> Result<()> {
        if self.verts.len() >= self.max_vertices {
            return Err(CoreError::MeshBudgetExceeded {
                vertices: self.verts.len(),
                cap: self.max_vertices,
            });
        }
        Ok(())
    }

    fn incident(&self, v: usize) -> Vec<usize> {
        self.of_vertex
            .get(&v)
            .map(|list| {
                let mut out: Vec<usize> = list
                    .iter()
                    .copied()
                    .filter(|&i| self.alive[i] && self.tris[i].contains(&v))
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .unwrap_or_default()
    }

    fn attach(&mut self, t: [usize; 3]) {
        let i = self.tris.len();
        self.tris.push(t);
        self.alive.push(true);
        for &v in &t {
            self.of_vertex.entry(v).or_default().push(i);
        }
    }

    fn local_edge_scale(&self, v: usize) -> f64 {
        let mut best = f64::INFINITY;
        for ti in self.incident(v) {
            let t = self.tris[ti];
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let len = (self.verts[a] - self.verts[b]).norm();
                if len > 0.0 {
                    best = best.min(len);
                }
            }
        }
        if best.is_finite() {
            best
        } else {
            1.0
        }
    }

    fn add_vertex(&mut self, p: Vector3<f64>) -> Result<usize> {
        self.check_budget()?;
        self.verts.push(p);
        Ok(self.verts.len() - 1)
    }

    fn split_face(&mut self, ti: usize, x: usize) {
        let [a, b, c] = self.tris[ti];
        self.alive[ti] = false;
        self.attach([a, b, x]);
        self.attach([b, c, x]);
        self.attach([c, a, x]);
    }

    fn split_edge(&mut self, u: usize, v: usize, x: usize) {
        let owners: Vec<usize> = self
            .incident(u)
            .into_iter()
            .filter(|&i| self.tris[i].contains(&v))
            .collect();
        for ti in owners {
            let t = self.tris[ti];
            self.alive[ti] = false;
            let apex = t
                .iter()
                .copied()
                .find(|&w| w != u && w != v)
                .expect("degenerate triangle in split_edge");
            // preserve orientation: replace the (u, v) side by two triangles
            let (p, q) = if (t[0] == u && t[1] == v)
                || (t[1] == u && t[2] == v)
                || (t[2] == u && t[0] == v)
            {
                (u, v)
            } else {
                (v, u)
            };
            self.attach([apex, p, x]);
            self.attach([apex, x, q]);
        }
    }

    /// Vertex exactly at `p`, creating one by snapping or splitting.
    fn locate_or_insert(&mut self, p: Vector3<f64>) -> Result<usize> {
        // exact or near-exact existing vertex
        let mut best = (f64::INFINITY, usize::MAX);
        for (i, v) in self.verts.iter().enumerate() {
            let d = (v - p).norm();
            if d < best.0 {
                best = (d, i);
            }
        }
        if best.0 < WALK_TOL {
            self.pinned.insert(best.1);
            return Ok(best.1);
        }
        let scale = self.local_edge_scale(best.1);
        if best.0 < SNAP_FRACTION * scale && !self.pinned.contains(&best.1) {
            self.verts[best.1] = p;
            self.pinned.insert(best.1);
            return Ok(best.1);
        }
        // locate the containing triangle (maximize the worst side test)
        let mut tri_best = (f64::NEG_INFINITY, usize::MAX);
        for (i, t) in self.tris.iter().enumerate() {
            if !self.alive[i] {
                continue;
            }
            let m = (0..3)
                .map(|k| {
                    self.verts[t[k]]
                        .cross(&self.verts[t[(k + 1) % 3]])
                        .dot(&p)
                })
                .fold(f64::INFINITY, f64::min);
            if m > tri_best.0 {
                tri_best = (m, i);
            }
        }
        let ti = tri_best.1;
        if ti == usize::MAX {
            return Err(CoreError::UnsupportedArcConfiguration(
                "arc endpoint could not be located in the mesh".to_string(),
            ));
        }
        let x = self.add_vertex(p)?;
        self.pinned.insert(x);
        // on-edge endpoints split the edge, interior ones split the face
        let t = self.tris[ti];
        let mut on_edge = None;
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            let side = self.verts[u].cross(&self.verts[v]).dot(&p).abs();
            if side < WALK_TOL {
                on_edge = Some((u, v));
                break;
            }
        }
        match on_edge {
            Some((u, v)) => self.split_edge(u, v, x),
            None => self.split_face(ti, x),
        }
        Ok(x)
    }

    /// Insert one arc as a chain of mesh edges from its `a` endpoint to its
    /// `b` endpoint.
    fn insert_arc(&mut self, arc: &Arc) -> Result<()> {
        let n = arc.normal().ok_or_else(|| {
            CoreError::DegenerateArc("cannot insert a zero-length arc".to_string())
        })?;
        let total = arc.length();
        let start = self.locate_or_insert(arc.a)?;
        let goal = self.locate_or_insert(arc.b)?;
        // angle of q along the arc measured from a
        let angle_along = |q: &Vector3<f64>| -> f64 {
            let c = arc.a.cross(q).dot(&n);
            let d = arc.a.dot(q);
            let ang = c.atan2(d);
            if ang < -1e-12 {
                ang + 2.0 * std::f64::consts::PI
            } else {
                ang
            }
        };
        let mut current = start;
        let mut progress = 0.0f64;
        let budget = 16 * self.verts.len() + 4096;
        for _step in 0..budget {
            if current == goal {
                self.pinned.insert(goal);
                return Ok(());
            }
            self.pinned.insert(current);
            let fan = self.incident(current);
            // follow an existing edge already on the arc, if one leads ahead
            let mut best_vertex: Option<(f64, usize)> = None;
            for &ti in &fan {
                for &w in &self.tris[ti] {
                    if w == current {
                        continue;
                    }
                    let p = self.verts[w];
                    if n.dot(&p).abs() > WALK_TOL {
                        continue;
                    }
                    let ang = angle_along(&p);
                    if ang > progress + 1e-12 && ang <= total + WALK_TOL {
                        let cand = (ang, w);
                        if best_vertex.map_or(true, |b| cand < b) {
                            best_vertex = Some(cand);
                        }
                    }
                }
            }
            if let Some((ang, w)) = best_vertex {
                progress = ang;
                current = w;
                continue;
            }
            // otherwise cross the nearest opposite edge
            let mut best_cross: Option<(f64, usize, usize, Vector3<f64>)> = None;
            for &ti in &fan {
                let t = self.tris[ti];
                let k = t.iter().position(|&v| v == current).unwrap();
                let (u, v) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let (du, dv) = (n.dot(&self.verts[u]), n.dot(&self.verts[v]));
                if du == 0.0 && dv == 0.0 {
                    continue;
                }
                if (du > 0.0) == (dv > 0.0) {
                    continue;
                }
                let t_par = du / (du - dv);
                let x = normalize(self.verts[u] * (1.0 - t_par) + self.verts[v] * t_par);
                let ang = angle_along(&x);
                if ang <= progress + 1e-12 || ang > total + WALK_TOL {
                    continue;
                }
                let cand = (ang, u.min(v), u.max(v), x);
                if best_cross
                    .as_ref()
                    .map_or(true, |b| (cand.0, cand.1, cand.2) < (b.0, b.1, b.2))
                {
                    best_cross = Some(cand);
                }
            }
            let (ang, u, v, x) = best_cross.ok_or_else(|| {
                CoreError::UnsupportedArcConfiguration(format!(
                    "arc walk stalled at vertex {current}; arcs may cross or leave the mesh"
                ))
            })?;
            // snap a crossing that lands next to an endpoint of the edge
            let scale = (self.verts[u] - self.verts[v]).norm();
            let snap_u = (self.verts[u] - x).norm() < SNAP_FRACTION * scale;
            let snap_v = (self.verts[v] - x).norm() < SNAP_FRACTION * scale;
            let next = if snap_u && !self.pinned.contains(&u) {
                self.verts[u] = x;
                u
            } else if snap_v && !self.pinned.contains(&v) {
                self.verts[v] = x;
                v
            } else {
                let w = self.add_vertex(x)?;
                self.split_edge(u, v, w);
                w
            };
            self.pinned.insert(next);
            progress = ang;
            current = next;
        }
        Err(CoreError::UnsupportedArcConfiguration(
            "arc walk did not terminate".to_string(),
        ))
    }

    pub fn insert_all(&mut self, arcs: &[Arc]) -> Result<()> {
        for arc in arcs {
            if arc.is_point() {
                continue;
            }
            self.insert_arc(arc)?;
        }
        Ok(())
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

#[cfg(test)]
mod tests {
    use super::super::refine::{icosahedron, subdivide_once};
    use super::super::seam::{classify_edges, collect_edges};
    use super::*;

    fn build_base() -> (Vec<Vector3<f64>>, Vec<[usize; 3]>) {
        let (mut verts, mut tris) = icosahedron();
        for _ in 0..2 {
            tris = subdivide_once(&mut verts, &tris);
        }
        (verts, tris)
    }

    #[test]
    fn inserted_arc_becomes_edge_chain() {
        let (verts, tris) = build_base();
        let arc = Arc::new(
            Vector3::new(0.0, 0.0, 1.0),
            normalize(Vector3::new(1.0, 0.3, 0.2)),
            true,
        );
        let mut ins = Inserter::new(verts, tris, 100_000);
        ins.insert_all(std::slice::from_ref(&arc)).unwrap();
        let (verts, tris) = ins.into_parts();
        let (walls, cracks) = classify_edges(&verts, &tris, std::slice::from_ref(&arc));
        assert!(!walls.is_empty());
        assert_eq!(walls, cracks);
        // chain covers the whole arc: summed edge arc-lengths match
        let total: f64 = cracks
            .iter()
            .map(|&(u, v)| {
                verts[u]
                    .cross(&verts[v])
                    .norm()
                    .atan2(verts[u].dot(&verts[v]))
            })
            .sum();
        assert!(
            (total - arc.length()).abs() < 1e-8,
            "chain length {total} vs arc {}",
            arc.length()
        );
        // mesh stays conforming
        let edges = collect_edges(&tris);
        let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &tris {
            for k in 0..3 {
                let e = super::super::refine::edge_key(t[k], t[(k + 1) % 3]);
                *counts.entry(e).or_insert(0) += 1;
            }
        }
        assert_eq!(edges.len(), counts.len());
        assert!(counts.values().all(|&c| c == 2));
        let v = verts.len() as i64;
        let e = edges.len() as i64;
        let f = tris.len() as i64;
        assert_eq!(v - e + f, 2);
    }
}
