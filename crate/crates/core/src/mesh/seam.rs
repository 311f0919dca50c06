//! Arc-aware connectivity: classifying mesh edges as trace edges, labeling
//! wall-separated components, and duplicating crack seams.

use nalgebra::Vector3;
use std::collections::{HashMap, HashSet};

use super::refine::edge_key;
use crate::cone::{Arc, ConeSpec};
use crate::{CoreError, Result};

pub(crate) const ON_ARC_TOL: f64 = 1e-9;

/// All undirected edges of a triangle list.
pub(crate) fn collect_edges(tris: &[[usize; 3]]) -> HashSet<(usize, usize)> {
    let mut edges = HashSet::with_capacity(tris.len() * 3 / 2);
    for t in tris {
        for k in 0..3 {
            edges.insert(edge_key(t[k], t[(k + 1) % 3]));
        }
    }
    edges
}

/// Edges lying on an arc of the trace: both endpoints and the chord midpoint
/// direction must sit on the arc. Returns (all trace edges, crack edges).
pub(crate) fn classify_edges(
    verts: &[Vector3<f64>],
    tris: &[[usize; 3]],
    arcs: &[Arc],
) -> (HashSet<(usize, usize)>, HashSet<(usize, usize)>) {
    let mut walls = HashSet::new();
    let mut cracks = HashSet::new();
    let edges = collect_edges(tris);
    for &(u, v) in &edges {
        for arc in arcs {
            if arc.is_point() {
                continue;
            }
            let mid = (verts[u] + verts[v]).normalize();
            if arc.contains(&verts[u], ON_ARC_TOL)
                && arc.contains(&verts[v], ON_ARC_TOL)
                && arc.contains(&mid, ON_ARC_TOL)
            {
                walls.insert((u, v));
                if arc.crack {
                    cracks.insert((u, v));
                }
                break;
            }
        }
    }
    (walls, cracks)
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Component label per triangle; triangles are adjacent when they share an
/// edge that is not a wall. Labels are contiguous and ordered by first
/// appearance, so the labeling is deterministic.
pub(crate) fn component_labels(
    tris: &[[usize; 3]],
    walls: &HashSet<(usize, usize)>,
) -> (Vec<usize>, usize) {
    let mut uf = UnionFind::new(tris.len());
    let mut edge_to_tri: HashMap<(usize, usize), usize> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let e = edge_key(t[k], t[(k + 1) % 3]);
            if walls.contains(&e) {
                continue;
            }
            match edge_to_tri.insert(e, i) {
                Some(j) => uf.union(i, j),
                None => {}
            }
        }
    }
    let mut label_of_root: HashMap<usize, usize> = HashMap::new();
    let mut labels = Vec::with_capacity(tris.len());
    for i in 0..tris.len() {
        let r = uf.find(i);
        let next = label_of_root.len();
        let l = *label_of_root.entry(r).or_insert(next);
        labels.push(l);
    }
    (labels, label_of_root.len())
}

/// Drop triangles outside the component containing `marker` (the triangle
/// whose centroid is closest in angle to the marker decides the component).
pub(crate) fn restrict_to_marker(
    tris: Vec<[usize; 3]>,
    labels: &[usize],
    verts: &[Vector3<f64>],
    marker: &Vector3<f64>,
) -> Vec<[usize; 3]> {
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, t) in tris.iter().enumerate() {
        let c = (verts[t[0]] + verts[t[1]] + verts[t[2]]).normalize();
        let d = c.dot(marker);
        if d > best.0 {
            best = (d, labels[i]);
        }
    }
    tris.into_iter()
        .zip(labels)
        .filter_map(|(t, &l)| (l == best.1).then_some(t))
        .collect()
}

/// Drop vertices no triangle references, remapping indices. Returns the old
/// index of each kept vertex.
pub(crate) fn compact(verts: &mut Vec<Vector3<f64>>, tris: &mut [[usize; 3]]) -> Vec<usize> {
    let mut used = vec![false; verts.len()];
    for t in tris.iter() {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; verts.len()];
    let mut kept = Vec::new();
    let mut out = Vec::new();
    for (i, v) in verts.iter().enumerate() {
        if used[i] {
            remap[i] = out.len();
            out.push(*v);
            kept.push(i);
        }
    }
    for t in tris.iter_mut() {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }
    *verts = out;
    kept
}

/// Fully decouple wall-separated components by giving every vertex shared
/// between components one copy per component. The lowest incident label keeps
/// the original index. Returns the (original, copy) pairs.
///
/// Crack slits are excluded from this: a slit leaves its surroundings in one
/// component (the sides reconnect around the tips), so its vertices pass
/// through here untouched and [`duplicate_seams`] handles them.
pub(crate) fn decouple_components(
    verts: &mut Vec<Vector3<f64>>,
    tris: &mut [[usize; 3]],
    labels: &[usize],
) -> Vec<(usize, usize)> {
    let nv = verts.len();
    let mut tris_of_vertex: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for (ti, t) in tris.iter().enumerate() {
        for &v in t {
            tris_of_vertex[v].push(ti);
        }
    }
    let mut copies = Vec::new();
    for v in 0..nv {
        let mut ls: Vec<usize> = tris_of_vertex[v].iter().map(|&ti| labels[ti]).collect();
        ls.sort_unstable();
        ls.dedup();
        if ls.len() <= 1 {
            continue;
        }
        let mut assign: HashMap<usize, usize> = HashMap::new();
        for (pos, &l) in ls.iter().enumerate() {
            if pos == 0 {
                assign.insert(l, v);
            } else {
                let c = verts.len();
                verts.push(verts[v]);
                assign.insert(l, c);
                copies.push((v, c));
            }
        }
        for &ti in &tris_of_vertex[v] {
            for slot in tris[ti].iter_mut() {
                if *slot == v {
                    *slot = assign[&labels[ti]];
                }
            }
        }
    }
    copies
}

/// Duplicate the interior vertices of the crack seam. Each seam vertex keeps
/// its index on the positive side of the crack plane (the side the arc normal
/// points into) and a fresh copy takes the negative side. Tips stay shared.
///
/// Returns (seam pairs (plus, minus), tip vertex indices).
pub(crate) fn duplicate_seams(
    verts: &mut Vec<Vector3<f64>>,
    tris: &mut [[usize; 3]],
    cracks: &HashSet<(usize, usize)>,
    spec: &ConeSpec,
) -> Result<(Vec<(usize, usize)>, Vec<usize>)> {
    if cracks.is_empty() {
        return Ok((Vec::new(), Vec::new()));
    }
    let tips_coords = spec.crack_tips();
    let is_tip = |p: &Vector3<f64>| tips_coords.iter().any(|t| (t - p).norm() < 1e-8);

    let mut crack_edges_of: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(u, v) in cracks {
        crack_edges_of.entry(u).or_default().push(v);
        crack_edges_of.entry(v).or_default().push(u);
    }
    let mut tris_of_vertex: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for &v in t {
            tris_of_vertex.entry(v).or_default().push(i);
        }
    }
    let normal_for = |p: &Vector3<f64>| -> Option<Vector3<f64>> {
        spec.arcs
            .iter()
            .filter(|a| a.crack)
            .find(|a| a.contains(p, ON_ARC_TOL))
            .and_then(|a| a.normal())
    };

    let mut seam_vertices: Vec<usize> = crack_edges_of.keys().copied().collect();
    seam_vertices.sort_unstable();
    let mut seam_map = Vec::new();
    let mut tip_ids = Vec::new();

    for v in seam_vertices {
        if is_tip(&verts[v]) {
            tip_ids.push(v);
            continue;
        }
        let neighbors = &crack_edges_of[&v];
        if neighbors.len() != 2 {
            return Err(CoreError::UnsupportedArcConfiguration(format!(
                "seam vertex {v} touches {} crack edges; crossing or branching cracks \
                 are not meshable",
                neighbors.len()
            )));
        }
        let fan = tris_of_vertex
            .get(&v)
            .cloned()
            .unwrap_or_default();
        // connect fan triangles through shared non-crack edges containing v
        let mut uf = UnionFind::new(fan.len());
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, &ti) in fan.iter().enumerate() {
            let t = tris[ti];
            for k in 0..3 {
                let e = edge_key(t[k], t[(k + 1) % 3]);
                if e.0 != v && e.1 != v {
                    continue;
                }
                if cracks.contains(&e) {
                    continue;
                }
                match owner.insert(e, fi) {
                    Some(fj) => uf.union(fi, fj),
                    None => {}
                }
            }
        }
        let mut sides: HashMap<usize, Vec<usize>> = HashMap::new();
        for (fi, &ti) in fan.iter().enumerate() {
            sides.entry(uf.find(fi)).or_default().push(ti);
        }
        if sides.len() != 2 {
            return Err(CoreError::UnsupportedArcConfiguration(format!(
                "crack seam at vertex {v} does not split its triangle fan in two \
                 (got {} sides)",
                sides.len()
            )));
        }
        let n = normal_for(&verts[v]).ok_or_else(|| {
            CoreError::UnsupportedArcConfiguration(format!(
                "no crack arc found through seam vertex {v}"
            ))
        })?;
        let mut groups: Vec<Vec<usize>> = sides.into_values().collect();
        groups.sort(); // deterministic order before side assignment
        let side_sign = |group: &[usize]| -> f64 {
            group
                .iter()
                .map(|&ti| {
                    let t = tris[ti];
                    let c = verts[t[0]] + verts[t[1]] + verts[t[2]];
                    n.dot(&c)
                })
                .sum()
        };
        let s0 = side_sign(&groups[0]);
        let s1 = side_sign(&groups[1]);
        if s0 == 0.0 || s1 == 0.0 || (s0 > 0.0) == (s1 > 0.0) {
            return Err(CoreError::UnsupportedArcConfiguration(format!(
                "ambiguous seam sides at vertex {v}"
            )));
        }
        let minus_group = if s0 < 0.0 { &groups[0] } else { &groups[1] };
        let copy = verts.len();
        let coords = verts[v];
        verts.push(coords);
        for &ti in minus_group {
            for slot in tris[ti].iter_mut() {
                if *slot == v {
                    *slot = copy;
                }
            }
        }
        seam_map.push((v, copy));
    }
    tip_ids.sort_unstable();
    Ok((seam_map, tip_ids))
}
