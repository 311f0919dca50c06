//! Closed-form spectral quantities used as oracles by the numerical pipeline.
//!
//! Everything here is an explicit formula: the eigenvalue/exponent map for
//! homogeneous harmonic modes, the first nonzero Neumann eigenvalue of a
//! spherical lune, the slit-sphere asymptote near the half-plane opening, the
//! weighted norms of a single homogeneous mode over a ball, and the slit-plane
//! crack-tip profile. The FEM side of the library is tested against these
//! values, never the other way around.

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

// The exponent formulas hold in any ambient dimension N >= 2; only the
// meshing pipeline is limited to N in {2, 3}.
fn check_dim(dim: usize, what: &str) -> Result<()> {
    if dim >= 2 {
        Ok(())
    } else {
        Err(CoreError::UnsupportedDimension {
            dim,
            what: what.to_string(),
        })
    }
}

/// Homogeneity exponent of the harmonic extension of a spherical eigenmode.
///
/// For a Neumann eigenvalue `lambda` of the Laplace-Beltrami operator on a
/// spherical domain in S^{N-1}, the function r^alpha f(x/r) is harmonic
/// exactly when `lambda = alpha (alpha + N - 2)`; this returns the
/// nonnegative root
///
/// alpha = ( -(N-2) + sqrt((N-2)^2 + 4 lambda) ) / 2.
///
/// Errors: [`CoreError::NegativeLambda`] for `lambda < 0`,
/// [`CoreError::UnsupportedDimension`] for `dim < 2`.
pub fn alpha_of_lambda(lambda: f64, dim: usize) -> Result<f64> {
    check_dim(dim, "alpha_of_lambda")?;
    if lambda < 0.0 {
        return Err(CoreError::NegativeLambda(lambda));
    }
    let m = dim as f64 - 2.0;
    Ok(0.5 * (-m + (m * m + 4.0 * lambda).sqrt()))
}

/// Inverse of [`alpha_of_lambda`]: `lambda = alpha (alpha + N - 2)`.
///
/// Requires `alpha >= 0` (the nonnegative branch; negative exponents are not
/// square integrable near the origin and never arise in the pipeline).
pub fn lambda_of_alpha(alpha: f64, dim: usize) -> Result<f64> {
    check_dim(dim, "lambda_of_alpha")?;
    if alpha < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "alpha = {alpha} must be nonnegative"
        )));
    }
    Ok(alpha * (alpha + dim as f64 - 2.0))
}

/// The eigenvalue whose exponent is exactly 1/2, i.e. `(2N - 3) / 4`.
///
/// A cone can carry a non-constant minimizer only if this value lies in the
/// Neumann spectrum of its spherical complement; the sign convention is the
/// nonnegative root of `alpha (alpha + N - 2) = lambda` at `alpha = 1/2`.
pub fn critical_lambda(dim: usize) -> Result<f64> {
    check_dim(dim, "critical_lambda")?;
    Ok((2.0 * dim as f64 - 3.0) / 4.0)
}

/// Ratio of tangential to radial derivative mass for a balanced
/// 1/2-homogeneous harmonic function on the unit sphere: `2N - 3`.
///
/// For u = r^{1/2} f with f a unit eigenfunction at the critical eigenvalue,
/// the tangential gradient carries (2N-3) times the L^2 mass of d/dr u on
/// the unit sphere (3 for N = 3, 1 for N = 2).
pub fn derivative_identity_factor(dim: usize) -> Result<f64> {
    check_dim(dim, "derivative_identity_factor")?;
    Ok(2.0 * dim as f64 - 3.0)
}

/// First nonzero Neumann eigenvalue of the spherical lune of half-opening
/// `omega`, i.e. the sector {(theta, z): |theta| < omega} of S^2.
///
/// lambda_1 = min(2, lambda_omega), with
/// lambda_omega = (pi/(2 omega) + 1/2)^2 - 1/4.
///
/// The `2` branch is the polar harmonic z restricted to the lune; the
/// `lambda_omega` branch is the lowest azimuthal mode. At `omega = pi` the
/// lune degenerates to the slit sphere and the value is 3/4.
///
/// Errors: [`CoreError::OmegaOutOfRange`] unless `omega` lies in (0, pi].
pub fn lune_lambda1(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= std::f64::consts::PI) {
        return Err(CoreError::OmegaOutOfRange {
            omega,
            what: "lune_lambda1".to_string(),
            range: "(0, pi]".to_string(),
        });
    }
    let nu = std::f64::consts::PI / (2.0 * omega) + 0.5;
    Ok((nu * nu - 0.25).min(2.0))
}

/// Leading expansion of the slit-sphere eigenvalue near the half-plane
/// opening: lambda(omega) ~ 3/4 + (2/pi) cos(omega).
///
/// `omega` is the half-length of the equatorial slit; the expansion is exact
/// to first order in cos(omega) around omega = pi/2 and is used as the sweep
/// reference, not as a validated eigenvalue.
pub fn sector_lambda_asymptote(omega: f64) -> f64 {
    0.75 + (2.0 / std::f64::consts::PI) * omega.cos()
}

/// A single homogeneous mode: an eigenvalue, its exponent, and the ambient
/// dimension they refer to.
///
/// Invariant: `lambda = alpha (alpha + dim - 2)` within 1e-9 and
/// `alpha >= 0`; enforced at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub dim: usize,
    pub lambda: f64,
    pub alpha: f64,
}

impl ModeParams {
    /// Build from an eigenvalue, deriving the exponent.
    pub fn from_lambda(dim: usize, lambda: f64) -> Result<Self> {
        let alpha = alpha_of_lambda(lambda, dim)?;
        Ok(ModeParams { dim, lambda, alpha })
    }

    /// Build from an explicit pair, validating consistency to 1e-9.
    pub fn new(dim: usize, alpha: f64, lambda: f64) -> Result<Self> {
        check_dim(dim, "ModeParams")?;
        if alpha < 0.0 || lambda < 0.0 {
            return Err(CoreError::InconsistentPair { alpha, lambda, dim });
        }
        let expected = alpha * (alpha + dim as f64 - 2.0);
        if (expected - lambda).abs() > 1e-9 * lambda.abs().max(1.0) {
            return Err(CoreError::InconsistentPair { alpha, lambda, dim });
        }
        Ok(ModeParams { dim, lambda, alpha })
    }
}

/// Squared L^2 norm over the ball of radius `r` of the homogeneous mode
/// r^alpha f(x/r) with unit-L^2 spherical part:
///
/// ||g||^2_{L^2(A(r))} = r^{2 alpha + N} / (2 alpha + N).
pub fn mode_l2_norm_sq(params: &ModeParams, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "radius = {r} must be nonnegative"
        )));
    }
    let p = 2.0 * params.alpha + params.dim as f64;
    Ok(r.powf(p) / p)
}

/// Squared gradient (Dirichlet) norm over the ball of radius `r` of the same
/// mode:
///
/// ||grad g||^2 = (alpha^2 + lambda) r^{2(alpha-1)+N} / (2(alpha-1)+N).
///
/// The radial part contributes alpha^2 and the tangential part lambda, both
/// against the unit spherical L^2 norm. A zero mode (alpha = 0) has zero
/// gradient and returns 0 even where the bare radial exponent would diverge.
///
/// Errors: [`CoreError::NonIntegrable`] when `2(alpha-1)+N <= 0` with a
/// nonzero gradient factor.
pub fn mode_energy_sq(params: &ModeParams, r: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "radius = {r} must be nonnegative"
        )));
    }
    let factor = params.alpha * params.alpha + params.lambda;
    if factor == 0.0 {
        return Ok(0.0);
    }
    let p = 2.0 * (params.alpha - 1.0) + params.dim as f64;
    if p <= 0.0 {
        return Err(CoreError::NonIntegrable { exponent: p });
    }
    Ok(factor * r.powf(p) / p)
}

/// The normalized slit-plane crack-tip profile
///
/// u(r, theta) = sqrt(2/pi) r^{1/2} sin(theta/2),  theta in (-pi, pi),
///
/// whose Dirichlet energy over the slit disc of radius R is exactly R. The
/// branch cut lies along theta = +-pi; evaluate one-sided limits by passing
/// theta slightly inside the interval.
///
/// Errors: [`CoreError::ThetaOutOfRange`] for |theta| >= pi,
/// [`CoreError::InvalidParameter`] for r < 0.
pub fn cracktip_value(r: f64, theta: f64) -> Result<f64> {
    if r < 0.0 {
        return Err(CoreError::InvalidParameter(format!(
            "radius = {r} must be nonnegative"
        )));
    }
    if !(theta > -std::f64::consts::PI && theta < std::f64::consts::PI) {
        return Err(CoreError::ThetaOutOfRange(theta));
    }
    Ok((2.0 / std::f64::consts::PI).sqrt() * r.sqrt() * (0.5 * theta).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn exponent_map_known_values() {
        assert_relative_eq!(alpha_of_lambda(0.75, 3).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(alpha_of_lambda(0.25, 2).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(alpha_of_lambda(2.0, 3).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(alpha_of_lambda(0.0, 3).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(lambda_of_alpha(0.5, 3).unwrap(), 0.75, epsilon = 1e-15);
        assert_relative_eq!(lambda_of_alpha(0.5, 2).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn exponent_map_rejects_bad_input() {
        assert!(matches!(
            alpha_of_lambda(-0.1, 3),
            Err(CoreError::NegativeLambda(_))
        ));
        assert!(matches!(
            alpha_of_lambda(1.0, 1),
            Err(CoreError::UnsupportedDimension { .. })
        ));
        assert!(lambda_of_alpha(-0.5, 3).is_err());
    }

    #[test]
    fn critical_values() {
        assert_relative_eq!(critical_lambda(3).unwrap(), 0.75);
        assert_relative_eq!(critical_lambda(2).unwrap(), 0.25);
        assert_relative_eq!(derivative_identity_factor(3).unwrap(), 3.0);
        assert_relative_eq!(derivative_identity_factor(2).unwrap(), 1.0);
    }

    #[test]
    fn critical_lambda_matches_exponent_half() {
        for dim in [2usize, 3] {
            let lam = critical_lambda(dim).unwrap();
            assert_relative_eq!(
                alpha_of_lambda(lam, dim).unwrap(),
                0.5,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn lune_formula_values() {
        assert_relative_eq!(lune_lambda1(PI / 4.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(lune_lambda1(PI / 3.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(lune_lambda1(PI / 2.0).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(
            lune_lambda1(3.0 * PI / 4.0).unwrap(),
            10.0 / 9.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(lune_lambda1(PI).unwrap(), 0.75, epsilon = 1e-14);
    }

    #[test]
    fn lune_formula_azimuthal_branch_is_monotone() {
        // The unclipped branch decreases in omega; the min with 2 switches
        // branches exactly at omega = pi/2.
        let mut prev = f64::INFINITY;
        for i in 1..100 {
            let omega = PI * i as f64 / 100.0;
            let nu = PI / (2.0 * omega) + 0.5;
            let raw = nu * nu - 0.25;
            assert!(raw < prev);
            prev = raw;
            let clipped = lune_lambda1(omega).unwrap();
            if omega <= PI / 2.0 {
                assert_relative_eq!(clipped, 2.0);
            } else {
                assert!(clipped < 2.0);
            }
        }
    }

    #[test]
    fn lune_rejects_out_of_range() {
        assert!(matches!(
            lune_lambda1(0.0),
            Err(CoreError::OmegaOutOfRange { .. })
        ));
        assert!(lune_lambda1(PI + 1e-12).is_err());
        assert!(lune_lambda1(-1.0).is_err());
    }

    #[test]
    fn asymptote_at_half_pi() {
        assert_relative_eq!(sector_lambda_asymptote(PI / 2.0), 0.75, epsilon = 1e-15);
        // symmetric secant through pi/2 reproduces the analytic slope
        let h = 1e-6;
        let slope =
            (sector_lambda_asymptote(PI / 2.0 + h) - sector_lambda_asymptote(PI / 2.0 - h))
                / (2.0 * h);
        assert_relative_eq!(slope, -2.0 / PI, epsilon = 1e-9);
    }

    #[test]
    fn mode_norms_at_critical_exponent() {
        let p = ModeParams::new(3, 0.5, 0.75).unwrap();
        assert_relative_eq!(mode_l2_norm_sq(&p, 1.0).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(mode_energy_sq(&p, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        // scaling in r follows the stated exponents
        assert_relative_eq!(
            mode_l2_norm_sq(&p, 2.0).unwrap(),
            2.0_f64.powi(4) / 4.0,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            mode_energy_sq(&p, 2.0).unwrap(),
            2.0 * 2.0 / 2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn zero_mode_has_zero_energy() {
        let p = ModeParams::new(3, 0.0, 0.0).unwrap();
        assert_eq!(mode_energy_sq(&p, 1.0).unwrap(), 0.0);
        assert_relative_eq!(mode_l2_norm_sq(&p, 1.0).unwrap(), 1.0 / 3.0);
        // In the plane the constant's L^2 norm is fine but a nonzero-gradient
        // mode at alpha = 0 would not be integrable.
        let q = ModeParams {
            dim: 2,
            lambda: 0.1,
            alpha: 0.0,
        };
        assert!(matches!(
            mode_energy_sq(&q, 1.0),
            Err(CoreError::NonIntegrable { .. })
        ));
    }

    #[test]
    fn inconsistent_pair_rejected() {
        assert!(matches!(
            ModeParams::new(3, 0.5, 0.8),
            Err(CoreError::InconsistentPair { .. })
        ));
        assert!(ModeParams::new(3, 0.5, 0.75 + 5e-10).is_ok());
    }

    #[test]
    fn cracktip_profile() {
        let c = (2.0 / PI).sqrt();
        assert_relative_eq!(cracktip_value(1.0, PI - 1e-12).unwrap(), c, epsilon = 1e-9);
        assert_relative_eq!(cracktip_value(4.0, 0.5).unwrap(), 2.0 * c * 0.25f64.sin());
        assert_eq!(cracktip_value(0.0, 0.3).unwrap(), 0.0);
        assert!(matches!(
            cracktip_value(1.0, PI),
            Err(CoreError::ThetaOutOfRange(_))
        ));
        assert!(cracktip_value(1.0, -PI).is_err());
        assert!(cracktip_value(-1.0, 0.0).is_err());
    }

    #[test]
    fn cracktip_antisymmetric_in_theta() {
        for i in 1..50 {
            let theta = PI * (i as f64 / 50.0 - 0.5);
            let a = cracktip_value(2.0, theta).unwrap();
            let b = cracktip_value(2.0, -theta).unwrap();
            assert_relative_eq!(a, -b, epsilon = 1e-15);
        }
    }

    proptest! {
        #[test]
        fn exponent_map_round_trips(lambda in 0.0f64..500.0, dim in 2usize..4) {
            let alpha = alpha_of_lambda(lambda, dim).unwrap();
            let back = lambda_of_alpha(alpha, dim).unwrap();
            prop_assert!((back - lambda).abs() <= 1e-12 * lambda.max(1.0));
        }

        #[test]
        fn alpha_is_monotone_in_lambda(a in 0.0f64..400.0, b in 0.0f64..400.0, dim in 2usize..4) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let alo = alpha_of_lambda(lo, dim).unwrap();
            let ahi = alpha_of_lambda(hi, dim).unwrap();
            prop_assert!(alo <= ahi + 1e-12);
        }

        #[test]
        fn mode_norms_scale(alpha in 0.0f64..3.0, r in 0.01f64..10.0) {
            let lambda = lambda_of_alpha(alpha, 3).unwrap();
            let p = ModeParams::new(3, alpha, lambda).unwrap();
            let n1 = mode_l2_norm_sq(&p, r).unwrap();
            let n2 = mode_l2_norm_sq(&p, 2.0 * r).unwrap();
            let ratio = 2.0f64.powf(2.0 * alpha + 3.0);
            prop_assert!((n2 / n1 - ratio).abs() < 1e-9 * ratio);
        }
    }
}
