//! Command-line driver for the cone-spectra toolkit.
//!
//! Subcommands cover the whole pipeline: `spectrum` and `convergence` run the
//! mesh/assemble/solve ladder, `screen` renders the admissibility verdict for
//! a cone, `sweep` scans an opening-angle family, `decompose` projects data
//! onto the computed eigenbasis, `oracle` prints closed-form reference
//! values, and `measure` evaluates harmonic-measure bounds.
//!
//! Conventions shared by every subcommand:
//! - success exits 0 and prints JSON (or CSV for sweeps) on stdout;
//! - computational failures exit 1 with a one-line JSON object on stderr;
//! - usage errors exit 2 (clap's default);
//! - `--dry-run` prints the resolved run configuration without computing;
//! - `--degrees` converts every angle argument from degrees;
//! - `CONE_SPECTRA_CACHE` points spectra memoization at a directory.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use serde_json::json;

use cone_spectra::{
    alpha_of_lambda, assemble, build_mesh, cache_dir_from_env, cracktip_value, critical_lambda,
    decompose, derivative_identity_factor, extrapolate, lambda_of_alpha, lune_lambda1, make_cone,
    matrix_market_string, poisson_band_mass, poisson_zone_mass, run_levels, screen_cone_with,
    sector_lambda_asymptote, sector_sweep_with, solve, wing_sweep_with, zone_area,
    zone_area_projected, ConeSpec, CoreError, LevelRun, Preset, RunPlan, SolveOptions,
    BAND_MASS_RATIO_BOUND, ZERO_TOL,
};

#[derive(Parser)]
#[command(
    name = "cone-spectra",
    version,
    about = "Spectral screening of conical singular sets via Neumann spectra on S^{N-1}",
    propagate_version = true
)]
struct Cli {
    /// Print the resolved run configuration as JSON and exit without computing.
    #[arg(long, global = true)]
    dry_run: bool,

    /// Interpret every angle argument as degrees instead of radians.
    #[arg(long, global = true)]
    degrees: bool,

    /// Worker threads for sweeps; 1 is fully sequential, 0 uses all cores.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the eigenproblem across refinement levels and print per-level spectra.
    Spectrum(SpectrumArgs),
    /// Decide whether a cone admits a nonzero admissible homogeneity exponent.
    Screen(ScreenArgs),
    /// Scan an opening-angle family and print the tracked eigenvalue branch.
    Sweep(SweepArgs),
    /// Project nodal data onto the computed eigenbasis.
    Decompose(DecomposeArgs),
    /// Print closed-form reference values.
    Oracle(OracleArgs),
    /// Evaluate harmonic-measure masses of boundary zones of a ball.
    Measure(MeasureArgs),
    /// Extrapolate each eigenvalue branch across levels and report orders.
    Convergence(ConvergenceArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PresetArg {
    Empty,
    FullPlane,
    HalfPlane,
    Lune,
    SectorArc,
    Y,
    T,
}

impl PresetArg {
    fn to_preset(self) -> Preset {
        match self {
            PresetArg::Empty => Preset::Empty,
            PresetArg::FullPlane => Preset::FullPlane,
            PresetArg::HalfPlane => Preset::HalfPlane,
            PresetArg::Lune => Preset::Lune,
            PresetArg::SectorArc => Preset::SectorArc,
            PresetArg::Y => Preset::Y,
            PresetArg::T => Preset::T,
        }
    }
}

#[derive(Args)]
struct ConeArgs {
    /// Singular-set preset.
    #[arg(long, value_enum, required_unless_present = "cone_file")]
    cone: Option<PresetArg>,

    /// JSON file holding an explicit cone description instead of a preset.
    #[arg(long, conflicts_with = "cone")]
    cone_file: Option<PathBuf>,

    /// Ambient dimension N; the mesh lives on S^{N-1}.
    #[arg(long, default_value_t = 3)]
    dim: usize,

    /// Opening angle for the lune and sector presets.
    #[arg(long)]
    omega: Option<f64>,
}

impl ConeArgs {
    fn resolve(&self, degrees: bool) -> Result<ConeSpec, CoreError> {
        if let Some(path) = &self.cone_file {
            return ConeSpec::from_json(&fs::read_to_string(path)?);
        }
        let preset = self.cone.expect("clap enforces cone or cone-file").to_preset();
        make_cone(preset, self.dim, self.omega.map(|w| to_radians(w, degrees)))
    }
}

#[derive(Args)]
struct LevelArgs {
    /// Refinement levels to visit, e.g. --levels 3,4,5.
    #[arg(long, value_delimiter = ',', default_values_t = [3u32, 4, 5])]
    levels: Vec<u32>,

    /// Bisection depth toward crack tips on top of uniform refinement.
    #[arg(long, default_value_t = 0)]
    grading: u32,
}

#[derive(Args)]
struct SolveArgs {
    /// Number of eigenpairs per level.
    #[arg(short, long, default_value_t = 12)]
    k: usize,

    /// Seed for the deterministic eigensolver start block.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

impl SolveArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            k: self.k,
            seed: self.seed,
            ..SolveOptions::default()
        }
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    cone: ConeArgs,
    #[command(flatten)]
    levels: LevelArgs,
    #[command(flatten)]
    solve: SolveArgs,

    /// Write the finest mesh as base.off plus a base.seams.json sidecar.
    #[arg(long)]
    export_off: Option<PathBuf>,

    /// Write the finest stiffness matrix in Matrix Market format.
    #[arg(long)]
    export_stiffness: Option<PathBuf>,

    /// Write the finest mass matrix in Matrix Market format.
    #[arg(long)]
    export_mass: Option<PathBuf>,

    /// Write stdout output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScreenArgs {
    #[command(flatten)]
    cone: ConeArgs,
    #[command(flatten)]
    levels: LevelArgs,
    #[command(flatten)]
    solve: SolveArgs,

    /// Write stdout output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepFamily {
    /// Planar sector crack of half-opening omega (N = 3).
    Sector,
    /// Lune between two meridian walls at longitude +-omega (N = 3).
    Wing,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct SweepArgs {
    /// Which opening-angle family to scan.
    #[arg(value_enum)]
    family: SweepFamily,

    /// First opening angle of the scan.
    #[arg(long)]
    from: f64,

    /// Last opening angle of the scan.
    #[arg(long)]
    to: f64,

    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 5)]
    steps: usize,

    #[command(flatten)]
    levels: LevelArgs,
    #[command(flatten)]
    solve: SolveArgs,

    /// Table format on stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,

    /// Write stdout output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProbeArg {
    /// Constant one at every vertex.
    One,
    /// First Cartesian coordinate of each vertex.
    X,
    /// Second Cartesian coordinate of each vertex.
    Y,
    /// Third Cartesian coordinate of each vertex.
    Z,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    cone: ConeArgs,

    /// Refinement level of the single mesh to decompose on.
    #[arg(long, default_value_t = 4)]
    level: u32,

    /// Bisection depth toward crack tips.
    #[arg(long, default_value_t = 0)]
    grading: u32,

    #[command(flatten)]
    solve: SolveArgs,

    /// Built-in probe data sampled at the mesh vertices.
    #[arg(long, value_enum, default_value_t = ProbeArg::One)]
    probe: ProbeArg,

    /// Whitespace-separated nodal values, one per mesh vertex.
    #[arg(long, conflicts_with = "probe")]
    data: Option<PathBuf>,

    /// Write stdout output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(subcommand)]
    what: OracleCommand,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Lune eigenvalue branches at an opening angle.
    Lune {
        #[arg(long)]
        omega: f64,
    },
    /// Slit-sphere eigenvalue asymptote near the half-plane opening.
    Sector {
        #[arg(long)]
        omega: f64,
    },
    /// Critical eigenvalue and derivative identity data for a dimension.
    Critical {
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Map an eigenvalue to its homogeneity exponent.
    Exponent {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
    },
    /// Crack-tip profile value at polar coordinates.
    Cracktip {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        theta: f64,
    },
}

#[derive(Args)]
struct MeasureArgs {
    /// Ball radius.
    #[arg(long, default_value_t = 1.0)]
    radius: f64,

    /// Zone half-width along the boundary sphere.
    #[arg(long)]
    lambda: f64,

    /// Interior viewpoint as x,y,z; defaults to the center.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    viewpoint: Option<Vec<f64>>,

    /// Write stdout output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    cone: ConeArgs,
    #[command(flatten)]
    levels: LevelArgs,
    #[command(flatten)]
    solve: SolveArgs,

    /// Write stdout output to a file instead.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Everything a subcommand resolved from its arguments, angles already in
/// radians. `--dry-run` prints this and exits; the round trip through JSON is
/// checked so the printed plan is guaranteed to be replayable.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct RunConfig {
    command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cone: Option<ConeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    levels: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    level: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grading: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    viewpoint: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // A one-thread pool keeps sweep evaluation order-independent of load;
    // rayon treats 0 as "use every core".
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "kind": error_kind(&e), "error": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CoreError> {
    match &cli.command {
        Command::Spectrum(args) => run_spectrum(cli, args),
        Command::Screen(args) => run_screen(cli, args),
        Command::Sweep(args) => run_sweep(cli, args),
        Command::Decompose(args) => run_decompose(cli, args),
        Command::Oracle(args) => run_oracle(cli, args),
        Command::Measure(args) => run_measure(cli, args),
        Command::Convergence(args) => run_convergence(cli, args),
    }
}

fn to_radians(angle: f64, degrees: bool) -> f64 {
    if degrees {
        angle.to_radians()
    } else {
        angle
    }
}

fn linspace(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CoreError> {
    if steps == 0 {
        return Err(CoreError::InvalidParameter(
            "sweep needs at least one grid point".to_string(),
        ));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    let span = to - from;
    Ok((0..steps)
        .map(|i| from + span * i as f64 / (steps - 1) as f64)
        .collect())
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), CoreError> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Serialize the config, parse it back, and require equality before printing,
/// so a dry run never advertises a plan that would deserialize differently.
fn emit_dry_run(config: &RunConfig, out: Option<&Path>) -> Result<(), CoreError> {
    let text = serde_json::to_string_pretty(config)?;
    let back: RunConfig = serde_json::from_str(&text)?;
    if back != *config {
        return Err(CoreError::InvalidParameter(
            "dry-run configuration does not round-trip through JSON".to_string(),
        ));
    }
    write_output(&text, out)
}

/// Extrapolate one eigenvalue branch across levels; a branch pinned at zero
/// reports no order, and a branch that resists the fit falls back to the
/// finest value with a two-level error gap.
fn branch_limit(samples: &[(f64, f64)]) -> (f64, Option<f64>, f64) {
    let finest = samples.last().expect("at least one level").1;
    if finest.abs() < ZERO_TOL {
        return (0.0, None, 0.0);
    }
    match extrapolate(samples) {
        Ok(e) => (e.value, Some(e.observed_order), e.error_estimate),
        Err(_) => {
            let previous = samples[samples.len().saturating_sub(2)].1;
            (finest, None, (finest - previous).abs())
        }
    }
}

fn level_json(run: &LevelRun) -> serde_json::Value {
    json!({
        "level": run.level,
        "grading": run.grading,
        "h": run.h,
        "vertices": run.vertices,
        "elements": run.elements,
        "from_cache": run.from_cache,
        "eigenvalues": run.spectrum.eigenvalues,
        "zero_multiplicity": run.spectrum.zero_multiplicity,
    })
}

fn run_spectrum(cli: &Cli, args: &SpectrumArgs) -> Result<(), CoreError> {
    let spec = args.cone.resolve(cli.degrees)?;
    if cli.dry_run {
        let config = RunConfig {
            command: "spectrum".to_string(),
            cone: Some(spec),
            levels: Some(args.levels.levels.clone()),
            grading: Some(args.levels.grading),
            k: Some(args.solve.k),
            seed: Some(args.solve.seed),
            ..RunConfig::default()
        };
        return emit_dry_run(&config, args.out.as_deref());
    }
    let plan = RunPlan {
        levels: args.levels.levels.clone(),
        grading: args.levels.grading,
        opts: args.solve.options(),
    };
    let runs = run_levels(&spec, &plan)?;

    let finest_level = *plan.levels.last().expect("nonempty levels");
    if args.export_off.is_some() || args.export_stiffness.is_some() || args.export_mass.is_some() {
        let mesh = build_mesh(&spec, finest_level, plan.grading)?;
        if let Some(base) = &args.export_off {
            mesh.export_off(base)?;
        }
        if args.export_stiffness.is_some() || args.export_mass.is_some() {
            let pair = assemble(&mesh)?;
            if let Some(path) = &args.export_stiffness {
                fs::write(path, matrix_market_string(&pair.stiffness))?;
            }
            if let Some(path) = &args.export_mass {
                fs::write(path, matrix_market_string(&pair.mass))?;
            }
        }
    }

    let finest_mesh_quality = build_mesh(&spec, finest_level, plan.grading)?.quality();
    let output = json!({
        "cone": spec,
        "critical_lambda": critical_lambda(spec.dim)?,
        "levels": runs.iter().map(level_json).collect::<Vec<_>>(),
        "finest_quality": finest_mesh_quality,
    });
    write_output(&serde_json::to_string_pretty(&output)?, args.out.as_deref())
}

fn run_screen(cli: &Cli, args: &ScreenArgs) -> Result<(), CoreError> {
    let spec = args.cone.resolve(cli.degrees)?;
    if cli.dry_run {
        let config = RunConfig {
            command: "screen".to_string(),
            cone: Some(spec),
            levels: Some(args.levels.levels.clone()),
            grading: Some(args.levels.grading),
            k: Some(args.solve.k),
            seed: Some(args.solve.seed),
            ..RunConfig::default()
        };
        return emit_dry_run(&config, args.out.as_deref());
    }
    let verdict = screen_cone_with(
        &spec,
        &args.levels.levels,
        args.levels.grading,
        &args.solve.options(),
        cache_dir_from_env().as_deref(),
    )?;
    write_output(
        &serde_json::to_string_pretty(&verdict)?,
        args.out.as_deref(),
    )
}

fn run_sweep(cli: &Cli, args: &SweepArgs) -> Result<(), CoreError> {
    let from = to_radians(args.from, cli.degrees);
    let to = to_radians(args.to, cli.degrees);
    let grid = linspace(from, to, args.steps)?;
    if cli.dry_run {
        let config = RunConfig {
            command: match args.family {
                SweepFamily::Sector => "sweep-sector".to_string(),
                SweepFamily::Wing => "sweep-wing".to_string(),
            },
            levels: Some(args.levels.levels.clone()),
            grading: Some(args.levels.grading),
            k: Some(args.solve.k),
            seed: Some(args.solve.seed),
            grid: Some(grid),
            format: Some(
                match args.format {
                    OutputFormat::Json => "json",
                    OutputFormat::Csv => "csv",
                }
                .to_string(),
            ),
            ..RunConfig::default()
        };
        return emit_dry_run(&config, args.out.as_deref());
    }
    let opts = args.solve.options();
    let cache = cache_dir_from_env();
    let table = match args.family {
        SweepFamily::Sector => sector_sweep_with(
            &grid,
            &args.levels.levels,
            args.levels.grading,
            &opts,
            cache.as_deref(),
        )?,
        SweepFamily::Wing => {
            wing_sweep_with(&grid, &args.levels.levels, &opts, cache.as_deref())?
        }
    };
    let text = match args.format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => serde_json::to_string_pretty(&table)?,
    };
    write_output(text.trim_end(), args.out.as_deref())
}

fn run_decompose(cli: &Cli, args: &DecomposeArgs) -> Result<(), CoreError> {
    let spec = args.cone.resolve(cli.degrees)?;
    if cli.dry_run {
        let config = RunConfig {
            command: "decompose".to_string(),
            cone: Some(spec),
            level: Some(args.level),
            grading: Some(args.grading),
            k: Some(args.solve.k),
            seed: Some(args.solve.seed),
            probe: Some(
                match (&args.data, args.probe) {
                    (Some(path), _) => format!("file:{}", path.display()),
                    (None, ProbeArg::One) => "one".to_string(),
                    (None, ProbeArg::X) => "x".to_string(),
                    (None, ProbeArg::Y) => "y".to_string(),
                    (None, ProbeArg::Z) => "z".to_string(),
                },
            ),
            ..RunConfig::default()
        };
        return emit_dry_run(&config, args.out.as_deref());
    }

    let mesh = build_mesh(&spec, args.level, args.grading)?;
    let pair = assemble(&mesh)?;
    let g: Vec<f64> = match &args.data {
        Some(path) => fs::read_to_string(path)?
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>().map_err(|e| {
                    CoreError::InvalidParameter(format!("data value {t:?}: {e}"))
                })
            })
            .collect::<Result<_, _>>()?,
        None => mesh
            .vertices
            .iter()
            .map(|v| match args.probe {
                ProbeArg::One => 1.0,
                ProbeArg::X => v.x,
                ProbeArg::Y => v.y,
                ProbeArg::Z => v.z,
            })
            .collect(),
    };
    let opts = SolveOptions {
        k: args.solve.k.min(pair.n),
        ..args.solve.options()
    };
    let spectrum = solve(&pair, &opts)?;
    let decomp = decompose(&pair, &spectrum, &g, spec.dim)?;

    let output = json!({
        "cone": spec,
        "level": args.level,
        "n": pair.n,
        "residual_norm": decomp.residual_norm,
        "modes": decomp.modes.iter().map(|m| json!({
            "index": m.index,
            "lambda": m.lambda,
            "alpha": m.alpha,
            "coefficient": m.coefficient,
        })).collect::<Vec<_>>(),
    });
    write_output(&serde_json::to_string_pretty(&output)?, args.out.as_deref())
}

fn run_oracle(cli: &Cli, args: &OracleArgs) -> Result<(), CoreError> {
    let output = match &args.what {
        OracleCommand::Lune { omega } => {
            let omega = to_radians(*omega, cli.degrees);
            if cli.dry_run {
                return emit_dry_run(
                    &RunConfig {
                        command: "oracle-lune".to_string(),
                        omega: Some(omega),
                        ..RunConfig::default()
                    },
                    None,
                );
            }
            // The azimuthal branch is the (pi/2 omega)-homogeneous mode; the
            // reported eigenvalue takes the min with the polar harmonic at 2.
            let azimuthal = lambda_of_alpha(std::f64::consts::PI / (2.0 * omega), 3)?;
            json!({
                "omega": omega,
                "lambda_omega": azimuthal,
                "lambda1": lune_lambda1(omega)?,
            })
        }
        OracleCommand::Sector { omega } => {
            let omega = to_radians(*omega, cli.degrees);
            if cli.dry_run {
                return emit_dry_run(
                    &RunConfig {
                        command: "oracle-sector".to_string(),
                        omega: Some(omega),
                        ..RunConfig::default()
                    },
                    None,
                );
            }
            json!({
                "omega": omega,
                "asymptote": sector_lambda_asymptote(omega),
                "critical_lambda": 0.75,
            })
        }
        OracleCommand::Critical { dim } => {
            if cli.dry_run {
                return emit_dry_run(
                    &RunConfig {
                        command: "oracle-critical".to_string(),
                        dim: Some(*dim),
                        ..RunConfig::default()
                    },
                    None,
                );
            }
            json!({
                "dim": dim,
                "critical_lambda": critical_lambda(*dim)?,
                "alpha": alpha_of_lambda(critical_lambda(*dim)?, *dim)?,
                "derivative_factor": derivative_identity_factor(*dim)?,
            })
        }
        OracleCommand::Exponent { lambda, dim } => {
            if cli.dry_run {
                return emit_dry_run(
                    &RunConfig {
                        command: "oracle-exponent".to_string(),
                        lambda: Some(*lambda),
                        dim: Some(*dim),
                        ..RunConfig::default()
                    },
                    None,
                );
            }
            let alpha = alpha_of_lambda(*lambda, *dim)?;
            json!({
                "lambda": lambda,
                "dim": dim,
                "alpha": alpha,
                "round_trip": lambda_of_alpha(alpha, *dim)?,
            })
        }
        OracleCommand::Cracktip { r, theta } => {
            let theta = to_radians(*theta, cli.degrees);
            if cli.dry_run {
                return emit_dry_run(
                    &RunConfig {
                        command: "oracle-cracktip".to_string(),
                        r: Some(*r),
                        theta: Some(theta),
                        ..RunConfig::default()
                    },
                    None,
                );
            }
            json!({
                "r": r,
                "theta": theta,
                "value": cracktip_value(*r, theta)?,
            })
        }
    };
    write_output(&serde_json::to_string_pretty(&output)?, None)
}

fn run_measure(cli: &Cli, args: &MeasureArgs) -> Result<(), CoreError> {
    let x = match &args.viewpoint {
        Some(v) if v.len() == 3 => Vector3::new(v[0], v[1], v[2]),
        Some(v) => {
            return Err(CoreError::InvalidParameter(format!(
                "viewpoint needs three coordinates, got {}",
                v.len()
            )))
        }
        None => Vector3::zeros(),
    };
    if cli.dry_run {
        let config = RunConfig {
            command: "measure".to_string(),
            radius: Some(args.radius),
            lambda: Some(args.lambda),
            viewpoint: Some([x.x, x.y, x.z]),
            ..RunConfig::default()
        };
        return emit_dry_run(&config, args.out.as_deref());
    }
    let band = poisson_band_mass(&x, args.radius, args.lambda)?;
    let zone = poisson_zone_mass(&x, args.radius, args.lambda)?;
    let output = json!({
        "radius": args.radius,
        "lambda": args.lambda,
        "viewpoint": [x.x, x.y, x.z],
        "band_mass": band,
        "zone_mass": zone,
        "center_value": args.lambda / args.radius,
        "bound_ratio": band * args.radius / args.lambda,
        "ratio_bound": BAND_MASS_RATIO_BOUND,
        "zone_area": zone_area(args.radius, args.lambda)?,
        "zone_area_projected": zone_area_projected(args.radius, args.lambda)?,
    });
    write_output(&serde_json::to_string_pretty(&output)?, args.out.as_deref())
}

fn run_convergence(cli: &Cli, args: &ConvergenceArgs) -> Result<(), CoreError> {
    let spec = args.cone.resolve(cli.degrees)?;
    if cli.dry_run {
        let config = RunConfig {
            command: "convergence".to_string(),
            cone: Some(spec),
            levels: Some(args.levels.levels.clone()),
            grading: Some(args.levels.grading),
            k: Some(args.solve.k),
            seed: Some(args.solve.seed),
            ..RunConfig::default()
        };
        return emit_dry_run(&config, args.out.as_deref());
    }
    let plan = RunPlan {
        levels: args.levels.levels.clone(),
        grading: args.levels.grading,
        opts: args.solve.options(),
    };
    let runs = run_levels(&spec, &plan)?;
    let count = runs
        .iter()
        .map(|r| r.spectrum.eigenvalues.len())
        .min()
        .unwrap_or(0);

    let mut table = Vec::with_capacity(count);
    for j in 0..count {
        let samples: Vec<(f64, f64)> = runs
            .iter()
            .map(|r| (r.h, r.spectrum.eigenvalues[j]))
            .collect();
        let (lambda, order, error) = branch_limit(&samples);
        table.push(json!({
            "index": j,
            "per_level": runs.iter().map(|r| json!({
                "level": r.level,
                "h": r.h,
                "lambda": r.spectrum.eigenvalues[j],
            })).collect::<Vec<_>>(),
            "lambda": lambda,
            "order": order,
            "error_estimate": error,
            "alpha": alpha_of_lambda(lambda.max(0.0), spec.dim)?,
        }));
    }
    let output = json!({
        "cone": spec,
        "critical_lambda": critical_lambda(spec.dim)?,
        "table": table,
    });
    write_output(&serde_json::to_string_pretty(&output)?, args.out.as_deref())
}

fn error_kind(e: &CoreError) -> &'static str {
    match e {
        CoreError::UnsupportedDimension { .. } => "unsupported-dimension",
        CoreError::OmegaOutOfRange { .. } => "omega-out-of-range",
        CoreError::InvalidParameter(_) => "invalid-parameter",
        CoreError::MeshBudgetExceeded { .. } => "mesh-budget-exceeded",
        CoreError::DegenerateArc(_) => "degenerate-arc",
        CoreError::UnsupportedArcConfiguration(_) => "unsupported-arc-configuration",
        CoreError::DegenerateTriangle { .. } => "degenerate-triangle",
        CoreError::DimensionMismatch(_) => "dimension-mismatch",
        CoreError::SingularMass(_) => "singular-mass",
        CoreError::ConvergenceFailure(_) => "convergence-failure",
        CoreError::AllZero => "all-zero",
        CoreError::NegativeLambda(_) => "negative-lambda",
        CoreError::InconsistentPair { .. } => "inconsistent-pair",
        CoreError::NonIntegrable { .. } => "non-integrable",
        CoreError::ThetaOutOfRange(_) => "theta-out-of-range",
        CoreError::LambdaOutOfRange { .. } => "lambda-out-of-range",
        CoreError::QuadratureFailure(_) => "quadrature-failure",
        CoreError::NonMonotoneSequence(_) => "non-monotone-sequence",
        CoreError::NonPlanarInput(_) => "non-planar-input",
        CoreError::Io(_) => "io",
        CoreError::Json(_) => "json",
    }
}
