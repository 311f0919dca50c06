//! Level-sweep orchestration: build graded meshes across refinement levels,
//! assemble operators, solve the eigenproblem, and (optionally) reuse spectra
//! from an on-disk cache keyed by mesh content and solver options.
//!
//! Cache entries are plain JSON spectra named by a SHA-256 key, so two runs
//! on identical meshes with identical solver settings read back bit-identical
//! eigenpairs. The cache directory comes from the `CONE_SPECTRA_CACHE`
//! environment variable or an explicit path; no variable means no caching.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::cone::ConeSpec;
use crate::eigen::{solve, SolveOptions, Spectrum};
use crate::fem::assemble;
use crate::mesh::{build_mesh, CrackMesh};
use crate::Result;

/// Environment variable naming the spectrum cache directory.
pub const CACHE_ENV: &str = "CONE_SPECTRA_CACHE";

/// Version tag mixed into every cache key; bump when the on-disk format or
/// any solver default that affects results changes.
const CACHE_VERSION: &str = "cone-spectra-cache-v1";

/// A multi-level solve request.
#[derive(Debug, Clone)]
pub struct RunPlan {
    /// Refinement levels to visit, typically increasing.
    pub levels: Vec<u32>,
    /// Grading depth toward crack tips, applied at every level.
    pub grading: u32,
    /// Eigensolver controls shared by all levels.
    pub opts: SolveOptions,
}

impl Default for RunPlan {
    fn default() -> Self {
        RunPlan {
            levels: vec![2, 3, 4],
            grading: 0,
            opts: SolveOptions::default(),
        }
    }
}

/// Outcome of one level: the mesh scale actually achieved and the spectrum.
#[derive(Debug, Clone)]
pub struct LevelRun {
    pub level: u32,
    pub grading: u32,
    /// Longest mesh edge, the `h` used for extrapolation.
    pub h: f64,
    pub vertices: usize,
    pub elements: usize,
    pub spectrum: Spectrum,
    /// True when the spectrum came from the cache rather than a solve.
    pub from_cache: bool,
}

/// Cache directory from the environment, if configured and non-empty.
pub fn cache_dir_from_env() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
}

/// Key identifying one solve: mesh content plus every solver option that can
/// change the returned numbers.
fn cache_key(mesh: &CrackMesh, opts: &SolveOptions) -> String {
    let mut h = Sha256::new();
    h.update(CACHE_VERSION.as_bytes());
    h.update(mesh.content_hash().as_bytes());
    h.update((opts.k as u64).to_le_bytes());
    h.update((opts.dense_threshold as u64).to_le_bytes());
    h.update(opts.shift.to_bits().to_le_bytes());
    h.update(opts.tol.to_bits().to_le_bytes());
    h.update((opts.max_iter as u64).to_le_bytes());
    h.update(opts.seed.to_le_bytes());
    h.update(opts.cluster_rel_tol.to_bits().to_le_bytes());
    h.update([opts.verify_inertia as u8]);
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn cache_read(dir: &Path, key: &str) -> Option<Spectrum> {
    let text = std::fs::read_to_string(dir.join(format!("{key}.json"))).ok()?;
    serde_json::from_str(&text).ok()
}

fn cache_write(dir: &Path, key: &str, spectrum: &Spectrum) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{key}.json"));
    let tmp = dir.join(format!("{key}.json.tmp"));
    std::fs::write(&tmp, serde_json::to_string(spectrum)?)?;
    std::fs::rename(&tmp, &path)?;
    Ok(())
}

/// Build, assemble and solve one level, consulting `cache` when given.
pub fn solve_level(
    spec: &ConeSpec,
    level: u32,
    grading: u32,
    opts: &SolveOptions,
    cache: Option<&Path>,
) -> Result<LevelRun> {
    let mesh = build_mesh(spec, level, grading)?;
    let key = cache_key(&mesh, opts);
    if let Some(dir) = cache {
        if let Some(spectrum) = cache_read(dir, &key) {
            return Ok(LevelRun {
                level,
                grading,
                h: mesh.mesh_size(),
                vertices: mesh.num_vertices(),
                elements: mesh.num_elements(),
                spectrum,
                from_cache: true,
            });
        }
    }
    let pair = assemble(&mesh)?;
    let spectrum = solve(&pair, opts)?;
    if let Some(dir) = cache {
        cache_write(dir, &key, &spectrum)?;
    }
    Ok(LevelRun {
        level,
        grading,
        h: mesh.mesh_size(),
        vertices: mesh.num_vertices(),
        elements: mesh.num_elements(),
        spectrum,
        from_cache: false,
    })
}

/// Run every level in the plan against an explicit cache directory.
pub fn run_levels_with_cache(
    spec: &ConeSpec,
    plan: &RunPlan,
    cache: Option<&Path>,
) -> Result<Vec<LevelRun>> {
    plan.levels
        .iter()
        .map(|&level| solve_level(spec, level, plan.grading, &plan.opts, cache))
        .collect()
}

/// Run every level in the plan, caching wherever `CONE_SPECTRA_CACHE` points.
pub fn run_levels(spec: &ConeSpec, plan: &RunPlan) -> Result<Vec<LevelRun>> {
    run_levels_with_cache(spec, plan, cache_dir_from_env().as_deref())
}
