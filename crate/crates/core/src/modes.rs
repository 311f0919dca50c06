//! Eigenbasis decomposition of spherical data and the energies of the
//! homogeneous extensions.
//!
//! A nodal vector g on the meshed domain decomposes against the M-orthonormal
//! eigenvectors as g = sum c_j phi_j. Each mode extends to the cone as
//! r^alpha_j phi_j with alpha_j tied to lambda_j through the exponent map, so
//! L^2 masses and Dirichlet energies over balls and annuli reduce to closed
//! radial integrals in the coefficients.

use crate::closed_form::alpha_of_lambda;
use crate::eigen::Spectrum;
use crate::fem::{energy, mass_norm_sq, OperatorPair};
use crate::quad::gl16;
use crate::{CoreError, Result};

/// One eigenmode's share of a decomposed field.
#[derive(Debug, Clone, Copy)]
pub struct Mode {
    /// Index into the spectrum's eigenpairs.
    pub index: usize,
    pub lambda: f64,
    /// Homogeneity exponent of the mode's extension.
    pub alpha: f64,
    /// M-inner product of the data with the eigenvector.
    pub coefficient: f64,
}

/// Coefficients of a field in the eigenbasis, plus the part the basis missed.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub dim: usize,
    pub modes: Vec<Mode>,
    /// M-norm of g minus its projection onto the solved eigenvectors.
    pub residual_norm: f64,
}

/// Project `g` onto the spectrum's eigenvectors.
pub fn decompose(
    pair: &OperatorPair,
    spectrum: &Spectrum,
    g: &[f64],
    dim: usize,
) -> Result<Decomposition> {
    if g.len() != pair.n {
        return Err(CoreError::DimensionMismatch(format!(
            "data length {} does not match operator dimension {}",
            g.len(),
            pair.n
        )));
    }
    let mut mg = vec![0.0; pair.n];
    pair.mass.matvec(g, &mut mg);
    let mut modes = Vec::with_capacity(spectrum.eigenvalues.len());
    let mut captured = 0.0;
    for (index, (&lambda, phi)) in spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.eigenvectors)
        .enumerate()
    {
        let coefficient: f64 = phi.iter().zip(&mg).map(|(p, m)| p * m).sum();
        captured += coefficient * coefficient;
        // rounding can leave exact kernel eigenvalues at -1e-16
        let alpha = alpha_of_lambda(lambda.max(0.0), dim)?;
        modes.push(Mode {
            index,
            lambda,
            alpha,
            coefficient,
        });
    }
    let total = mass_norm_sq(pair, g);
    let residual_norm = (total - captured).max(0.0).sqrt();
    Ok(Decomposition {
        dim,
        modes,
        residual_norm,
    })
}

/// Nodal values of the projection sum c_j phi_j.
pub fn reconstruct(decomp: &Decomposition, spectrum: &Spectrum) -> Result<Vec<f64>> {
    let n = spectrum
        .eigenvectors
        .first()
        .map(Vec::len)
        .ok_or_else(|| CoreError::InvalidParameter("empty spectrum".to_string()))?;
    let mut out = vec![0.0; n];
    for mode in &decomp.modes {
        let phi = spectrum.eigenvectors.get(mode.index).ok_or_else(|| {
            CoreError::DimensionMismatch(format!(
                "mode index {} outside spectrum of {} vectors",
                mode.index,
                spectrum.eigenvectors.len()
            ))
        })?;
        for (o, p) in out.iter_mut().zip(phi) {
            *o += mode.coefficient * p;
        }
    }
    Ok(out)
}

/// Dirichlet energy of the extension sum c_j r^alpha_j phi_j over the annulus
/// r0 < |x| < r1 (closed form; modes are energy-orthogonal).
pub fn annulus_energy(decomp: &Decomposition, r0: f64, r1: f64) -> Result<f64> {
    if !(0.0..=r1).contains(&r0) || r1 <= 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "annulus radii {r0}, {r1}"
        )));
    }
    let n = decomp.dim as f64;
    let mut total = 0.0;
    for mode in &decomp.modes {
        let factor = mode.coefficient * mode.coefficient
            * (mode.alpha * mode.alpha + mode.lambda.max(0.0));
        if factor == 0.0 {
            continue;
        }
        let p = 2.0 * (mode.alpha - 1.0) + n;
        if p <= 0.0 && r0 == 0.0 {
            return Err(CoreError::NonIntegrable { exponent: p });
        }
        let radial = if p.abs() < 1e-12 {
            (r1 / r0).ln()
        } else {
            (r1.powf(p) - r0.powf(p)) / p
        };
        total += factor * radial;
    }
    Ok(total)
}

/// Squared L^2 mass of the extension over the ball |x| < r.
pub fn ball_mass_sq(decomp: &Decomposition, r: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(CoreError::InvalidParameter(format!("ball radius {r}")));
    }
    let n = decomp.dim as f64;
    let mut total = 0.0;
    for mode in &decomp.modes {
        let c2 = mode.coefficient * mode.coefficient;
        if c2 == 0.0 {
            continue;
        }
        let p = 2.0 * mode.alpha + n;
        total += c2 * r.powf(p) / p;
    }
    Ok(total)
}

/// The same annulus energy evaluated the long way: on each radial shell the
/// integrand splits into a radial-derivative mass term and a tangential
/// stiffness term, both measured by the assembled operators, and the shells
/// are integrated with Gauss-Legendre quadrature. Pure cross-check for
/// [`annulus_energy`].
pub fn annulus_energy_quadrature(
    pair: &OperatorPair,
    spectrum: &Spectrum,
    decomp: &Decomposition,
    r0: f64,
    r1: f64,
) -> Result<f64> {
    if r0 <= 0.0 || r1 <= r0 {
        return Err(CoreError::InvalidParameter(format!(
            "quadrature annulus radii {r0}, {r1}"
        )));
    }
    let n = decomp.dim as f64;
    let value = gl16(r0, r1, |r| {
        let mut u = vec![0.0; pair.n];
        let mut du = vec![0.0; pair.n];
        for mode in &decomp.modes {
            let phi = &spectrum.eigenvectors[mode.index];
            let scale = mode.coefficient * r.powf(mode.alpha);
            let dscale = mode.coefficient * mode.alpha * r.powf(mode.alpha - 1.0);
            for i in 0..pair.n {
                u[i] += scale * phi[i];
                du[i] += dscale * phi[i];
            }
        }
        r.powf(n - 1.0) * (mass_norm_sq(pair, &du) + energy(pair, &u) / (r * r))
    });
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{mode_energy_sq, mode_l2_norm_sq, ModeParams};
    use crate::cone::{make_cone, Preset};
    use crate::eigen::{solve, SolveOptions};
    use crate::fem::assemble;
    use crate::mesh::build_mesh;
    use approx::assert_relative_eq;

    fn sphere_setup(k: usize) -> (OperatorPair, Spectrum) {
        let spec = make_cone(Preset::Empty, 3, None).unwrap();
        let mesh = build_mesh(&spec, 3, 0).unwrap();
        let pair = assemble(&mesh).unwrap();
        let spectrum = solve(
            &pair,
            &SolveOptions {
                k,
                ..Default::default()
            },
        )
        .unwrap();
        (pair, spectrum)
    }

    #[test]
    fn coefficients_of_an_exact_span_member() {
        let (pair, spectrum) = sphere_setup(9);
        let want = [2.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0, 0.5, 0.0];
        let mut g = vec![0.0; pair.n];
        for (j, &c) in want.iter().enumerate() {
            for i in 0..pair.n {
                g[i] += c * spectrum.eigenvectors[j][i];
            }
        }
        let d = decompose(&pair, &spectrum, &g, 3).unwrap();
        for (mode, &c) in d.modes.iter().zip(&want) {
            assert_relative_eq!(mode.coefficient, c, epsilon = 1e-9);
        }
        // the residual comes from the difference of two ~13.25 quantities,
        // so it cannot resolve below the square root of rounding noise
        assert!(d.residual_norm < 1e-5, "residual {}", d.residual_norm);
        let back = reconstruct(&d, &spectrum).unwrap();
        for (a, b) in back.iter().zip(&g) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn parseval_identities() {
        let (pair, spectrum) = sphere_setup(9);
        // nodal samples of a smooth function well inside the solved span:
        // a mix of constants and degree-one harmonics
        let mesh = build_mesh(&make_cone(Preset::Empty, 3, None).unwrap(), 3, 0).unwrap();
        let g: Vec<f64> = mesh
            .vertices
            .iter()
            .map(|p| 0.3 + 1.2 * p.z - 0.5 * p.x)
            .collect();
        let d = decompose(&pair, &spectrum, &g, 3).unwrap();
        let sum_sq: f64 = d.modes.iter().map(|m| m.coefficient.powi(2)).sum();
        let total = mass_norm_sq(&pair, &g);
        assert_relative_eq!(
            sum_sq + d.residual_norm.powi(2),
            total,
            max_relative = 1e-12
        );
        // the residual is pure discretization leakage into higher modes
        assert!(d.residual_norm.powi(2) / total < 1e-4);
        // gradient Parseval on the projected part
        let proj = reconstruct(&d, &spectrum).unwrap();
        let grad_sum: f64 = d
            .modes
            .iter()
            .map(|m| m.lambda.max(0.0) * m.coefficient.powi(2))
            .sum();
        assert_relative_eq!(energy(&pair, &proj), grad_sum, max_relative = 1e-9);
    }

    #[test]
    fn exponents_follow_the_map() {
        let (_, spectrum) = sphere_setup(5);
        let pair_dummy = sphere_setup(5).0;
        let g = vec![1.0; pair_dummy.n];
        let d = decompose(&pair_dummy, &spectrum, &g, 3).unwrap();
        // lambda ~ 0 -> alpha 0; lambda ~ 2 -> alpha ~ 1
        assert_relative_eq!(d.modes[0].alpha, 0.0, epsilon = 1e-6);
        for m in &d.modes[1..4] {
            assert_relative_eq!(m.alpha, 1.0, max_relative = 0.01);
        }
    }

    #[test]
    fn annulus_energy_matches_closed_form_single_mode() {
        let d = Decomposition {
            dim: 3,
            modes: vec![Mode {
                index: 0,
                lambda: 2.0,
                alpha: 1.0,
                coefficient: 1.0,
            }],
            residual_norm: 0.0,
        };
        let params = ModeParams::from_lambda(3, 2.0).unwrap();
        for r in [0.5, 1.0, 2.0] {
            assert_relative_eq!(
                annulus_energy(&d, 0.0, r).unwrap(),
                mode_energy_sq(&params, r).unwrap(),
                epsilon = 1e-14
            );
        }
        assert_relative_eq!(
            ball_mass_sq(&d, 1.5).unwrap(),
            mode_l2_norm_sq(&params, 1.5).unwrap(),
            epsilon = 1e-14
        );
        // annulus additivity
        let whole = annulus_energy(&d, 0.0, 2.0).unwrap();
        let split = annulus_energy(&d, 0.0, 0.7).unwrap() + annulus_energy(&d, 0.7, 2.0).unwrap();
        assert_relative_eq!(whole, split, epsilon = 1e-13);
    }

    #[test]
    fn quadrature_cross_check() {
        let (pair, spectrum) = sphere_setup(6);
        let mut g = vec![0.0; pair.n];
        for (j, c) in [(0usize, 0.7), (2, 1.3), (4, -0.4)] {
            for i in 0..pair.n {
                g[i] += c * spectrum.eigenvectors[j][i];
            }
        }
        let d = decompose(&pair, &spectrum, &g, 3).unwrap();
        let closed = annulus_energy(&d, 0.25, 1.75).unwrap();
        let quad = annulus_energy_quadrature(&pair, &spectrum, &d, 0.25, 1.75).unwrap();
        assert_relative_eq!(closed, quad, max_relative = 1e-9);
    }

    #[test]
    fn zero_mode_has_no_energy() {
        let d = Decomposition {
            dim: 2,
            modes: vec![Mode {
                index: 0,
                lambda: 0.0,
                alpha: 0.0,
                coefficient: 5.0,
            }],
            residual_norm: 0.0,
        };
        // a constant extends to a constant: no gradient even though the
        // radial exponent p = 2(alpha-1)+2 = 0 would not integrate
        assert_eq!(annulus_energy(&d, 0.0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(ball_mass_sq(&d, 1.0).unwrap(), 12.5, epsilon = 1e-13);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let (pair, spectrum) = sphere_setup(3);
        let g = vec![1.0; pair.n + 1];
        assert!(matches!(
            decompose(&pair, &spectrum, &g, 3),
            Err(CoreError::DimensionMismatch(_))
        ));
    }
}
