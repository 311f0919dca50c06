//! P1 Laplace-Beltrami operators on crack meshes.
//!
//! Elements are flat triangles with vertices on the sphere (N = 3) or circle
//! segments measured by geodesic length (N = 2). Because seam vertices are
//! already duplicated in the mesh, assembly is completely local: no triangle
//! couples the two sides of a slit, and the crack tips stay shared, which is
//! exactly the Neumann crack condition.

use nalgebra::Vector3;

use crate::mesh::CrackMesh;
use crate::sparse::{SymCsr, Triplets};
use crate::{CoreError, Result};

/// Stiffness and consistent mass for one mesh.
#[derive(Debug, Clone)]
pub struct OperatorPair {
    pub n: usize,
    pub stiffness: SymCsr,
    pub mass: SymCsr,
}

/// Assemble the P1 stiffness (Dirichlet energy) and consistent mass.
pub fn assemble(mesh: &CrackMesh) -> Result<OperatorPair> {
    match mesh.dim {
        3 => assemble_surface(mesh),
        2 => assemble_circle(mesh),
        d => Err(CoreError::UnsupportedDimension {
            dim: d,
            what: "assemble".to_string(),
        }),
    }
}

fn assemble_surface(mesh: &CrackMesh) -> Result<OperatorPair> {
    let n = mesh.num_vertices();
    let mut k = Triplets::new(n);
    let mut m = Triplets::new(n);
    for (ti, t) in mesh.triangles.iter().enumerate() {
        let p = [
            mesh.vertices[t[0]],
            mesh.vertices[t[1]],
            mesh.vertices[t[2]],
        ];
        // edge opposite to vertex k
        let e = [p[2] - p[1], p[0] - p[2], p[1] - p[0]];
        let normal = e[1].cross(&e[2]);
        let double_area = normal.norm();
        if double_area < 1e-14 {
            return Err(CoreError::DegenerateTriangle {
                index: ti,
                measure: 0.5 * double_area,
            });
        }
        let area = 0.5 * double_area;
        let unit = normal / double_area;
        // in-plane barycentric gradients: grad_i = (n x e_i) / (2A)
        let grads: [Vector3<f64>; 3] = [
            unit.cross(&e[0]) / double_area,
            unit.cross(&e[1]) / double_area,
            unit.cross(&e[2]) / double_area,
        ];
        for a in 0..3 {
            for b in a..3 {
                let kv = area * grads[a].dot(&grads[b]);
                k.push_sym(t[a], t[b], kv);
                let mv = if a == b { area / 6.0 } else { area / 12.0 };
                m.push_sym(t[a], t[b], mv);
            }
        }
    }
    Ok(OperatorPair {
        n,
        stiffness: SymCsr::from_triplets(&k),
        mass: SymCsr::from_triplets(&m),
    })
}

fn assemble_circle(mesh: &CrackMesh) -> Result<OperatorPair> {
    let n = mesh.num_vertices();
    let mut k = Triplets::new(n);
    let mut m = Triplets::new(n);
    for (si, s) in mesh.segments.iter().enumerate() {
        let (a, b) = (mesh.vertices[s[0]], mesh.vertices[s[1]]);
        let len = a.cross(&b).norm().atan2(a.dot(&b));
        if len < 1e-14 {
            return Err(CoreError::DegenerateTriangle {
                index: si,
                measure: len,
            });
        }
        k.push_sym(s[0], s[0], 1.0 / len);
        k.push_sym(s[1], s[1], 1.0 / len);
        k.push_sym(s[0], s[1], -1.0 / len);
        m.push_sym(s[0], s[0], len / 3.0);
        m.push_sym(s[1], s[1], len / 3.0);
        m.push_sym(s[0], s[1], len / 6.0);
    }
    Ok(OperatorPair {
        n,
        stiffness: SymCsr::from_triplets(&k),
        mass: SymCsr::from_triplets(&m),
    })
}

/// Dirichlet energy u^T K u of a nodal vector.
pub fn energy(pair: &OperatorPair, u: &[f64]) -> f64 {
    quadratic_form(&pair.stiffness, u)
}

/// Squared L^2 norm u^T M u of a nodal vector.
pub fn mass_norm_sq(pair: &OperatorPair, u: &[f64]) -> f64 {
    quadratic_form(&pair.mass, u)
}

fn quadratic_form(a: &SymCsr, u: &[f64]) -> f64 {
    let mut au = vec![0.0; u.len()];
    a.matvec(u, &mut au);
    u.iter().zip(&au).map(|(x, y)| x * y).sum()
}

/// Matrix Market serialization (coordinate, real, symmetric; lower triangle).
pub fn matrix_market_string(a: &SymCsr) -> String {
    let mut entries = Vec::new();
    for i in 0..a.n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i && v != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    out.push_str(&format!("{} {} {}\n", a.n, a.n, entries.len()));
    for (i, j, v) in entries {
        out.push_str(&format!("{} {} {:.17e}\n", i + 1, j + 1, v));
    }
    out
}
