//! Cone descriptions and their traces on the unit sphere.
//!
//! A cone K in R^N (N = 2 or 3) is screened through its trace K on S^{N-1}.
//! The trace is stored as a list of geodesic arcs (for N = 2: points, encoded
//! as zero-length arcs). Crack-flagged arcs are slits: the domain touches
//! them from both sides and the mesh duplicates their interior vertices.
//! Unflagged arcs separate components.
//!
//! All stored arcs are strictly minor (length < pi), so an endpoint pair
//! determines its arc uniquely; semicircular traces are split in two at
//! construction time.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::{CoreError, Result};

/// Named cone families. `Custom` carries an explicit arc list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// K is empty; the domain is the whole sphere.
    Empty,
    /// K is a plane through the origin (contains the x3-axis for N = 3).
    FullPlane,
    /// K is the half-plane {x2 = 0, x1 <= 0}; its trace is a crack.
    HalfPlane,
    /// K is the boundary of the wedge {|theta| < omega} around the x3-axis;
    /// the computational domain is the lune between the two meridians.
    Lune,
    /// K is the planar sector {x3 = 0, |theta| <= omega}; its equatorial
    /// trace is a crack with two tips.
    SectorArc,
    /// K is three half-planes meeting at 120 degrees along the x3-axis
    /// (for N = 2: three rays at 120 degrees).
    Y,
    /// K is the cone over the edges of the regular tetrahedron.
    T,
    /// Explicit arc list provided by the caller.
    Custom,
}

impl Preset {
    /// Presets parametrized by an opening angle.
    pub fn requires_omega(self) -> bool {
        matches!(self, Preset::Lune | Preset::SectorArc)
    }
}

/// A geodesic arc on the unit sphere, strictly shorter than pi, or a single
/// point (a == b) for N = 2 traces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub a: Vector3<f64>,
    pub b: Vector3<f64>,
    pub crack: bool,
}

impl Arc {
    pub fn new(a: Vector3<f64>, b: Vector3<f64>, crack: bool) -> Self {
        Arc { a, b, crack }
    }

    /// Geodesic length; zero for point arcs.
    pub fn length(&self) -> f64 {
        self.a.cross(&self.b).norm().atan2(self.a.dot(&self.b))
    }

    pub fn is_point(&self) -> bool {
        (self.a - self.b).norm() < 1e-14
    }

    /// Unit normal of the supporting great circle; `None` for point arcs.
    pub fn normal(&self) -> Option<Vector3<f64>> {
        let n = self.a.cross(&self.b);
        let len = n.norm();
        if len < 1e-12 {
            None
        } else {
            Some(n / len)
        }
    }

    /// Point at parameter t in [0, 1] along the arc (constant speed).
    pub fn point_at(&self, t: f64) -> Vector3<f64> {
        let theta = self.length();
        if theta < 1e-14 {
            return self.a;
        }
        let s = theta.sin();
        (self.a * ((1.0 - t) * theta).sin() + self.b * (t * theta).sin()) / s
    }

    /// True when a unit vector lies on the closed arc within `tol` (both in
    /// distance to the supporting plane and in the between-endpoints test).
    pub fn contains(&self, p: &Vector3<f64>, tol: f64) -> bool {
        if self.is_point() {
            return (p - self.a).norm() <= tol;
        }
        let n = match self.normal() {
            Some(n) => n,
            None => return false,
        };
        if n.dot(p).abs() > tol {
            return false;
        }
        let ang = |u: &Vector3<f64>, v: &Vector3<f64>| u.cross(v).norm().atan2(u.dot(v));
        let total = self.length();
        ang(&self.a, p) + ang(p, &self.b) <= total + tol
    }
}

/// A cone given by its ambient dimension, family, opening parameter, and
/// trace arcs. Construct through [`make_cone`] or [`ConeSpec::custom`]; both
/// guarantee unit endpoints and strictly minor arcs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSpec {
    pub dim: usize,
    pub preset: Preset,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub omega: Option<f64>,
    pub arcs: Vec<Arc>,
}

/// Exact connectivity data of the spherical domain S^{N-1} \ K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainTopology {
    /// Number of connected components of the domain.
    pub component_count: usize,
    /// Crack tips: endpoints of the crack trace, where the slit stops.
    pub crack_tips: Vec<Vector3<f64>>,
    /// Total geodesic length of the trace (0 for N = 2 point traces).
    pub total_trace_length: f64,
}

fn equatorial(theta: f64) -> Vector3<f64> {
    Vector3::new(theta.cos(), theta.sin(), 0.0)
}

const NORTH: Vector3<f64> = Vector3::new(0.0, 0.0, 1.0);
const SOUTH: Vector3<f64> = Vector3::new(0.0, 0.0, -1.0);

fn check_omega(preset: Preset, omega: Option<f64>) -> Result<f64> {
    let what = format!("{preset:?}");
    match omega {
        Some(w) if w > 0.0 && w <= PI => Ok(w),
        Some(w) => Err(CoreError::OmegaOutOfRange {
            omega: w,
            what,
            range: "(0, pi]".to_string(),
        }),
        None => Err(CoreError::InvalidParameter(format!(
            "{what} requires an omega parameter"
        ))),
    }
}

/// Build a preset cone. `omega` is required exactly for [`Preset::Lune`] and
/// [`Preset::SectorArc`] (range (0, pi]); `dim` must be 2 or 3.
///
/// Deterministic: the same inputs produce a bitwise-identical arc list.
pub fn make_cone(preset: Preset, dim: usize, omega: Option<f64>) -> Result<ConeSpec> {
    if dim != 2 && dim != 3 {
        return Err(CoreError::UnsupportedDimension {
            dim,
            what: format!("{preset:?}"),
        });
    }
    if !preset.requires_omega() && omega.is_some() {
        return Err(CoreError::InvalidParameter(format!(
            "{preset:?} does not take an omega parameter"
        )));
    }
    let unsupported = || {
        Err(CoreError::UnsupportedDimension {
            dim,
            what: format!("{preset:?}"),
        })
    };
    let e1 = equatorial(0.0);
    let w = equatorial(PI);
    let arcs: Vec<Arc> = match (preset, dim) {
        (Preset::Empty, _) => vec![],
        (Preset::FullPlane, 3) => vec![
            Arc::new(NORTH, e1, false),
            Arc::new(e1, SOUTH, false),
            Arc::new(SOUTH, w, false),
            Arc::new(w, NORTH, false),
        ],
        (Preset::FullPlane, 2) => vec![Arc::new(e1, e1, false), Arc::new(w, w, false)],
        (Preset::HalfPlane, 3) => {
            vec![Arc::new(NORTH, w, true), Arc::new(w, SOUTH, true)]
        }
        (Preset::HalfPlane, 2) => vec![Arc::new(w, w, true)],
        (Preset::Lune, 3) => {
            let omega = check_omega(preset, omega)?;
            if (omega - PI).abs() < 1e-12 {
                // both wings coincide with the half-plane; the lune is the
                // slit sphere and the trace becomes a crack
                vec![Arc::new(NORTH, w, true), Arc::new(w, SOUTH, true)]
            } else {
                let p = equatorial(omega);
                let m = equatorial(-omega);
                vec![
                    Arc::new(NORTH, p, false),
                    Arc::new(p, SOUTH, false),
                    Arc::new(NORTH, m, false),
                    Arc::new(m, SOUTH, false),
                ]
            }
        }
        (Preset::Lune, 2) => {
            let omega = check_omega(preset, omega)?;
            if (omega - PI).abs() < 1e-12 {
                vec![Arc::new(w, w, true)]
            } else {
                vec![
                    Arc::new(equatorial(omega), equatorial(omega), false),
                    Arc::new(equatorial(-omega), equatorial(-omega), false),
                ]
            }
        }
        (Preset::SectorArc, 3) => {
            let omega = check_omega(preset, omega)?;
            if (omega - PI).abs() < 1e-12 {
                // the slit closes into the full equator, which separates the
                // hemispheres instead of cracking them
                let q = equatorial(PI / 2.0);
                let mq = equatorial(-PI / 2.0);
                vec![
                    Arc::new(e1, q, false),
                    Arc::new(q, w, false),
                    Arc::new(w, mq, false),
                    Arc::new(mq, e1, false),
                ]
            } else {
                vec![
                    Arc::new(equatorial(-omega), e1, true),
                    Arc::new(e1, equatorial(omega), true),
                ]
            }
        }
        (Preset::SectorArc, 2) => return unsupported(),
        (Preset::Y, 3) => {
            let mut arcs = Vec::with_capacity(6);
            for k in 0..3 {
                let p = equatorial(2.0 * PI * k as f64 / 3.0);
                arcs.push(Arc::new(NORTH, p, false));
                arcs.push(Arc::new(p, SOUTH, false));
            }
            arcs
        }
        (Preset::Y, 2) => (0..3)
            .map(|k| {
                let p = equatorial(2.0 * PI * k as f64 / 3.0);
                Arc::new(p, p, false)
            })
            .collect(),
        (Preset::T, 3) => {
            let verts = tetrahedron_vertices();
            let mut arcs = Vec::with_capacity(6);
            for i in 0..4 {
                for j in (i + 1)..4 {
                    arcs.push(Arc::new(verts[i], verts[j], false));
                }
            }
            arcs
        }
        (Preset::T, 2) => return unsupported(),
        (Preset::Custom, _) => {
            return Err(CoreError::InvalidParameter(
                "Custom cones are built from explicit arcs via ConeSpec::custom".to_string(),
            ))
        }
        _ => return unsupported(),
    };
    Ok(ConeSpec {
        dim,
        preset,
        omega: if preset.requires_omega() { omega } else { None },
        arcs,
    })
}

/// Vertices of the regular tetrahedron inscribed in the unit sphere, with
/// the first vertex on the x1-axis and one face edge in the plane x3 = 0.
pub fn tetrahedron_vertices() -> [Vector3<f64>; 4] {
    let s2 = 2.0_f64.sqrt();
    let s6 = 6.0_f64.sqrt();
    [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(-1.0 / 3.0, 2.0 * s2 / 3.0, 0.0),
        Vector3::new(-1.0 / 3.0, -s2 / 3.0, s6 / 3.0),
        Vector3::new(-1.0 / 3.0, -s2 / 3.0, -s6 / 3.0),
    ]
}

impl ConeSpec {
    /// Build a custom cone from explicit arcs. Endpoints must be unit vectors
    /// (1e-12), arcs must be strictly minor, and for N = 2 every arc must be
    /// a point on the unit circle (x3 = 0).
    pub fn custom(dim: usize, arcs: Vec<Arc>) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(CoreError::UnsupportedDimension {
                dim,
                what: "Custom".to_string(),
            });
        }
        for (i, arc) in arcs.iter().enumerate() {
            for p in [&arc.a, &arc.b] {
                if (p.norm() - 1.0).abs() > 1e-12 || !p.iter().all(|c| c.is_finite()) {
                    return Err(CoreError::InvalidParameter(format!(
                        "arc {i}: endpoint {p:?} is not a unit vector"
                    )));
                }
            }
            if dim == 2 {
                if !arc.is_point() || arc.a.z.abs() > 1e-12 {
                    return Err(CoreError::InvalidParameter(format!(
                        "arc {i}: N = 2 traces are points on the unit circle"
                    )));
                }
            } else if !arc.is_point() && arc.normal().is_none() {
                return Err(CoreError::DegenerateArc(format!(
                    "arc {i}: endpoints are antipodal; split semicircles in two"
                )));
            }
        }
        Ok(ConeSpec {
            dim,
            preset: Preset::Custom,
            omega: None,
            arcs,
        })
    }

    /// Total geodesic trace length (sum of arc lengths).
    pub fn trace_length(&self) -> f64 {
        self.arcs.iter().map(Arc::length).sum()
    }

    /// Crack tips: endpoints occurring exactly once among the crack arcs'
    /// endpoint multiset. Interior chain junctions occur twice and are seam
    /// points, not tips; point arcs contribute both endpoints and so never
    /// produce tips.
    pub fn crack_tips(&self) -> Vec<Vector3<f64>> {
        let mut endpoints: Vec<Vector3<f64>> = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let mut bump = |p: Vector3<f64>| {
            for (q, c) in endpoints.iter().zip(counts.iter_mut()) {
                if (q - p).norm() < 1e-10 {
                    *c += 1;
                    return;
                }
            }
            endpoints.push(p);
            counts.push(1);
        };
        for arc in self.arcs.iter().filter(|a| a.crack) {
            bump(arc.a);
            bump(arc.b);
        }
        endpoints
            .into_iter()
            .zip(counts)
            .filter(|&(_, c)| c == 1)
            .map(|(p, _)| p)
            .collect()
    }

    /// For presets whose computational domain is a single named component
    /// (currently the lune), a point inside that component; the mesh builder
    /// drops every other component. `None` keeps the whole complement.
    pub fn domain_marker(&self) -> Option<Vector3<f64>> {
        match self.preset {
            Preset::Lune => {
                let omega = self.omega.unwrap_or(PI);
                if (omega - PI).abs() < 1e-12 {
                    None
                } else {
                    Some(equatorial(0.0))
                }
            }
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ConeSpec = serde_json::from_str(text)?;
        // re-validate as if custom-built; presets still satisfy the checks
        let preset = spec.preset;
        let omega = spec.omega;
        let mut validated = ConeSpec::custom(spec.dim, spec.arcs)?;
        validated.preset = preset;
        validated.omega = omega;
        Ok(validated)
    }
}

/// Exact topology of the spherical domain cut by the cone's trace.
///
/// Preset counts are closed-form; `Custom` counts components on a coarse
/// internal mesh (refinement level 2) that respects the arcs.
pub fn topology(spec: &ConeSpec) -> Result<DomainTopology> {
    let component_count = match spec.preset {
        Preset::Empty => 1,
        Preset::FullPlane => 2,
        Preset::HalfPlane => 1,
        Preset::Lune => 1,
        Preset::SectorArc => {
            let omega = spec.omega.unwrap_or(0.0);
            if (omega - PI).abs() < 1e-12 {
                2
            } else {
                1
            }
        }
        Preset::Y => 3,
        Preset::T => 4,
        Preset::Custom => crate::mesh::count_components_coarse(spec)?,
    };
    Ok(DomainTopology {
        component_count,
        crack_tips: spec.crack_tips(),
        total_trace_length: spec.trace_length(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gl16_panels;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Arc length by numerical quadrature of the chordal parametrization
    /// p(t) = c(t)/|c(t)|, c(t) = (1-t) a + t b, independent of the angle
    /// formula used in production code.
    fn quadrature_length(arc: &Arc) -> f64 {
        if arc.is_point() {
            return 0.0;
        }
        let (a, b) = (arc.a, arc.b);
        gl16_panels(0.0, 1.0, 8, |t| {
            let c = a * (1.0 - t) + b * t;
            let n = c.norm();
            let d = b - a;
            let p_dot = d / n - c * (c.dot(&d)) / (n * n * n);
            p_dot.norm()
        })
    }

    fn total_quadrature_length(spec: &ConeSpec) -> f64 {
        spec.arcs.iter().map(|a| quadrature_length(a)).sum()
    }

    #[test]
    fn trace_lengths_match_closed_forms() {
        let cases: Vec<(ConeSpec, f64)> = vec![
            (make_cone(Preset::Empty, 3, None).unwrap(), 0.0),
            (make_cone(Preset::FullPlane, 3, None).unwrap(), 2.0 * PI),
            (make_cone(Preset::HalfPlane, 3, None).unwrap(), PI),
            (
                make_cone(Preset::Lune, 3, Some(PI / 2.0)).unwrap(),
                2.0 * PI,
            ),
            (
                make_cone(Preset::Lune, 3, Some(3.0 * PI / 4.0)).unwrap(),
                2.0 * PI,
            ),
            (
                make_cone(Preset::SectorArc, 3, Some(PI / 3.0)).unwrap(),
                2.0 * PI / 3.0,
            ),
            (make_cone(Preset::Y, 3, None).unwrap(), 3.0 * PI),
            (
                make_cone(Preset::T, 3, None).unwrap(),
                6.0 * (-1.0f64 / 3.0).acos(),
            ),
        ];
        for (spec, expected) in cases {
            assert_relative_eq!(spec.trace_length(), expected, epsilon = 1e-12);
            assert_relative_eq!(
                total_quadrature_length(&spec),
                expected,
                epsilon = 1e-10,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn all_endpoints_are_unit_vectors() {
        let specs = [
            make_cone(Preset::FullPlane, 3, None).unwrap(),
            make_cone(Preset::Lune, 3, Some(1.1)).unwrap(),
            make_cone(Preset::SectorArc, 3, Some(2.9)).unwrap(),
            make_cone(Preset::Y, 3, None).unwrap(),
            make_cone(Preset::T, 3, None).unwrap(),
            make_cone(Preset::Y, 2, None).unwrap(),
        ];
        for spec in &specs {
            for arc in &spec.arcs {
                assert_relative_eq!(arc.a.norm(), 1.0, epsilon = 1e-14);
                assert_relative_eq!(arc.b.norm(), 1.0, epsilon = 1e-14);
                assert!(arc.length() < PI - 1e-9);
            }
        }
    }

    #[test]
    fn half_plane_tips_are_poles() {
        let spec = make_cone(Preset::HalfPlane, 3, None).unwrap();
        let topo = topology(&spec).unwrap();
        assert_eq!(topo.component_count, 1);
        let mut tips = topo.crack_tips.clone();
        tips.sort_by(|p, q| p.z.partial_cmp(&q.z).unwrap());
        assert_eq!(tips.len(), 2);
        assert_relative_eq!((tips[0] - SOUTH).norm(), 0.0, epsilon = 1e-14);
        assert_relative_eq!((tips[1] - NORTH).norm(), 0.0, epsilon = 1e-14);
        // antipodal
        assert_relative_eq!((tips[0] + tips[1]).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sector_tips_on_equator() {
        let omega = PI / 3.0;
        let spec = make_cone(Preset::SectorArc, 3, Some(omega)).unwrap();
        assert!(spec.arcs.iter().all(|a| a.crack));
        let topo = topology(&spec).unwrap();
        assert_eq!(topo.component_count, 1);
        assert_eq!(topo.crack_tips.len(), 2);
        for tip in &topo.crack_tips {
            assert_relative_eq!(tip.z, 0.0, epsilon = 1e-14);
            assert_relative_eq!(tip.x, omega.cos(), epsilon = 1e-14);
            assert_relative_eq!(tip.y.abs(), omega.sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn preset_component_counts() {
        let table: Vec<(ConeSpec, usize)> = vec![
            (make_cone(Preset::Empty, 3, None).unwrap(), 1),
            (make_cone(Preset::FullPlane, 3, None).unwrap(), 2),
            (make_cone(Preset::HalfPlane, 3, None).unwrap(), 1),
            (make_cone(Preset::Lune, 3, Some(0.9)).unwrap(), 1),
            (make_cone(Preset::SectorArc, 3, Some(1.3)).unwrap(), 1),
            (make_cone(Preset::SectorArc, 3, Some(PI)).unwrap(), 2),
            (make_cone(Preset::Y, 3, None).unwrap(), 3),
            (make_cone(Preset::T, 3, None).unwrap(), 4),
            (make_cone(Preset::FullPlane, 2, None).unwrap(), 2),
            (make_cone(Preset::HalfPlane, 2, None).unwrap(), 1),
            (make_cone(Preset::Y, 2, None).unwrap(), 3),
        ];
        for (spec, expected) in table {
            let topo = topology(&spec).unwrap();
            assert_eq!(topo.component_count, expected, "{:?}", spec.preset);
        }
    }

    #[test]
    fn lune_at_pi_degenerates_to_slit() {
        let lune = make_cone(Preset::Lune, 3, Some(PI)).unwrap();
        let half = make_cone(Preset::HalfPlane, 3, None).unwrap();
        assert_eq!(lune.arcs, half.arcs);
        assert_eq!(topology(&lune).unwrap().crack_tips.len(), 2);
        assert!(lune.domain_marker().is_none());
    }

    #[test]
    fn t_arcs_connect_tetrahedron_vertices() {
        let spec = make_cone(Preset::T, 3, None).unwrap();
        assert_eq!(spec.arcs.len(), 6);
        let expected = (-1.0f64 / 3.0).acos();
        for arc in &spec.arcs {
            assert_relative_eq!(arc.length(), expected, epsilon = 1e-14);
            assert!(!arc.crack);
        }
        // pairwise dot products of the vertices are all -1/3
        let v = tetrahedron_vertices();
        for i in 0..4 {
            assert_relative_eq!(v[i].norm(), 1.0, epsilon = 1e-15);
            for j in (i + 1)..4 {
                assert_relative_eq!(v[i].dot(&v[j]), -1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn construction_is_bitwise_deterministic() {
        let a = make_cone(Preset::SectorArc, 3, Some(1.234567)).unwrap();
        let b = make_cone(Preset::SectorArc, 3, Some(1.234567)).unwrap();
        assert_eq!(a.arcs.len(), b.arcs.len());
        for (x, y) in a.arcs.iter().zip(&b.arcs) {
            for k in 0..3 {
                assert_eq!(x.a[k].to_bits(), y.a[k].to_bits());
                assert_eq!(x.b[k].to_bits(), y.b[k].to_bits());
            }
            assert_eq!(x.crack, y.crack);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            make_cone(Preset::Empty, 4, None),
            Err(CoreError::UnsupportedDimension { .. })
        ));
        assert!(matches!(
            make_cone(Preset::Lune, 3, Some(0.0)),
            Err(CoreError::OmegaOutOfRange { .. })
        ));
        assert!(matches!(
            make_cone(Preset::Lune, 3, Some(PI + 0.1)),
            Err(CoreError::OmegaOutOfRange { .. })
        ));
        assert!(make_cone(Preset::Lune, 3, None).is_err());
        assert!(make_cone(Preset::Empty, 3, Some(1.0)).is_err());
        assert!(matches!(
            make_cone(Preset::SectorArc, 2, Some(1.0)),
            Err(CoreError::UnsupportedDimension { .. })
        ));
        assert!(make_cone(Preset::T, 2, None).is_err());
    }

    #[test]
    fn custom_validation() {
        let ok = ConeSpec::custom(
            3,
            vec![Arc::new(NORTH, equatorial(0.3), true)],
        );
        assert!(ok.is_ok());
        let bad_norm = ConeSpec::custom(
            3,
            vec![Arc::new(Vector3::new(0.0, 0.0, 1.1), equatorial(0.0), false)],
        );
        assert!(bad_norm.is_err());
        let antipodal = ConeSpec::custom(3, vec![Arc::new(NORTH, SOUTH, false)]);
        assert!(matches!(antipodal, Err(CoreError::DegenerateArc(_))));
        let bad_2d = ConeSpec::custom(2, vec![Arc::new(NORTH, NORTH, false)]);
        assert!(bad_2d.is_err());
    }

    #[test]
    fn json_round_trip() {
        for spec in [
            make_cone(Preset::SectorArc, 3, Some(1.1)).unwrap(),
            make_cone(Preset::T, 3, None).unwrap(),
            make_cone(Preset::HalfPlane, 2, None).unwrap(),
        ] {
            let text = spec.to_json().unwrap();
            let back = ConeSpec::from_json(&text).unwrap();
            assert_eq!(spec, back);
        }
        // schema shape: omega present only for parametrized presets
        let spec = make_cone(Preset::Y, 3, None).unwrap();
        let v: serde_json::Value = serde_json::from_str(&spec.to_json().unwrap()).unwrap();
        assert!(v.get("omega").is_none());
        assert_eq!(v["preset"], "y");
        assert_eq!(v["dim"], 3);
        assert_eq!(v["arcs"].as_array().unwrap().len(), 6);
        assert!(v["arcs"][0]["a"].as_array().unwrap().len() == 3);
        assert!(v["arcs"][0]["crack"].is_boolean());
    }

    proptest! {
        #[test]
        fn lune_trace_is_two_meridians(omega in 0.05f64..3.1) {
            let spec = make_cone(Preset::Lune, 3, Some(omega)).unwrap();
            prop_assert!((spec.trace_length() - 2.0 * PI).abs() < 1e-12);
            prop_assert_eq!(spec.arcs.len(), 4);
            let topo = topology(&spec).unwrap();
            prop_assert_eq!(topo.component_count, 1);
            prop_assert!(topo.crack_tips.is_empty());
        }

        #[test]
        fn sector_trace_length_is_two_omega(omega in 0.05f64..3.1) {
            let spec = make_cone(Preset::SectorArc, 3, Some(omega)).unwrap();
            prop_assert!((spec.trace_length() - 2.0 * omega).abs() < 1e-12);
            prop_assert_eq!(topology(&spec).unwrap().crack_tips.len(), 2);
        }

        #[test]
        fn serde_round_trip_prop(omega in 0.05f64..3.1) {
            let spec = make_cone(Preset::SectorArc, 3, Some(omega)).unwrap();
            let back = ConeSpec::from_json(&spec.to_json().unwrap()).unwrap();
            prop_assert_eq!(spec, back);
        }
    }
}
