//! Spectral screening of conical singular sets.
//!
//! The library decides which cones K in R^N (N = 2 or 3) can support a
//! non-constant energy-minimizing function that is smooth away from K. The
//! pipeline meshes the unit sphere minus the cone's trace, assembles a
//! Laplace-Beltrami operator pair with crack seams, solves the Neumann
//! eigenproblem, maps eigenvalues to homogeneity exponents, and filters the
//! exponents through the growth bounds that every blow-up limit must satisfy.
//!
//! Modules, roughly bottom-up:
//! - [`cone`]: cone descriptions and their traces on the unit sphere
//! - [`mesh`]: crack-aware sphere meshing with seam duplication and grading
//! - [`fem`]: P1 stiffness/mass assembly on the meshed domain
//! - [`sparse`]: symmetric sparse storage and a skyline LDL^T factorization
//! - [`eigen`]: generalized symmetric eigensolver and Richardson extrapolation
//! - [`closed_form`]: analytic spectra and norms used as oracles
//! - [`modes`]: eigenbasis decomposition and homogeneous reconstruction
//! - [`screening`]: the admissible-exponent filter and per-cone verdicts
//! - [`measure`]: harmonic-measure band quadrature and extrusion areas

pub mod closed_form;
pub mod cone;
pub mod eigen;
mod error;
pub mod fem;
pub mod measure;
pub mod mesh;
pub mod modes;
pub mod pipeline;
pub(crate) mod quad;
pub mod screening;
pub mod sparse;

pub use closed_form::{
    alpha_of_lambda, critical_lambda, cracktip_value, derivative_identity_factor,
    lambda_of_alpha, lune_lambda1, mode_energy_sq, mode_l2_norm_sq, sector_lambda_asymptote,
    ModeParams,
};
pub use cone::{make_cone, tetrahedron_vertices, topology, Arc, ConeSpec, DomainTopology, Preset};
pub use eigen::{
    extrapolate, first_positive, solve, ExtrapolatedValue, SolveOptions, Spectrum, ZERO_TOL,
};
pub use error::CoreError;
pub use fem::{assemble, energy, mass_norm_sq, matrix_market_string, OperatorPair};
pub use measure::{
    extruded_area, poisson_band_mass, poisson_kernel, poisson_zone_mass, strip_mesh_area,
    zone_area, zone_area_projected, BAND_MASS_RATIO_BOUND,
};
pub use mesh::{build_mesh, build_mesh_with, BuildOptions, CrackMesh, QualityReport};
pub use modes::{
    annulus_energy, annulus_energy_quadrature, ball_mass_sq, decompose, reconstruct,
    Decomposition, Mode,
};
pub use pipeline::{
    cache_dir_from_env, run_levels, run_levels_with_cache, solve_level, LevelRun, RunPlan,
    CACHE_ENV,
};
pub use screening::{
    cracktip_certificate, cracktip_certificate_with, filter_modes, hit_tolerance, screen_cone,
    screen_cone_with, sector_sweep, sector_sweep_with, wing_sweep, wing_sweep_with,
    CertificateReport, EigenTrace, ModeReport, ScreeningVerdict, SweepRow, SweepTable, Verdict,
    ANTISYMMETRY_MAX, CORRELATION_MIN, CSV_VERSION_HEADER, FEM_MODE_TOL, ORACLE_MODE_TOL,
    SWEEP_CSV_COLUMNS,
};

/// Library result alias; every fallible operation reports a [`CoreError`].
pub type Result<T> = std::result::Result<T, CoreError>;
