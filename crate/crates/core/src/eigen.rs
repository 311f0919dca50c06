//! Generalized symmetric eigensolver for the pencil (K, M).
//!
//! Small problems reduce to a standard symmetric eigenproblem through a
//! Cholesky factorization of the mass matrix. Large problems run shift-invert
//! block subspace iteration on a skyline LDL^T of K - sigma M, followed by a
//! Sylvester inertia count that certifies no eigenvalue below the reported
//! ones was missed. Both paths return ascending eigenvalues with
//! M-orthonormal eigenvectors.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fem::OperatorPair;
use crate::sparse::{eigenvalue_count_below, rcm, SkylineLdl, SymCsr};
use crate::{CoreError, Result};

/// Eigenvalues below this absolute threshold count as zero modes (constants
/// on components). Discrete constants are exact kernel vectors, so their
/// computed eigenvalues sit at rounding level, far below this.
pub const ZERO_TOL: f64 = 1e-7;

/// Eigensolver controls.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Number of eigenpairs wanted.
    pub k: usize,
    /// At or below this matrix dimension the dense path runs.
    pub dense_threshold: usize,
    /// Spectral shift for the sparse factorization; negative keeps K - sigma M
    /// positive definite for Neumann pencils.
    pub shift: f64,
    /// Relative residual target ||Kx - lambda Mx|| <= tol (1 + lambda) ||Mx||.
    pub tol: f64,
    /// Subspace iteration cap; 0 picks a size-based default.
    pub max_iter: usize,
    /// Seed for the deterministic random starting block.
    pub seed: u64,
    /// Relative gap below which adjacent eigenvalues belong to one cluster.
    pub cluster_rel_tol: f64,
    /// Cross-check the sparse result against an inertia count.
    pub verify_inertia: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            k: 12,
            dense_threshold: 2000,
            shift: -0.1,
            tol: 1e-8,
            max_iter: 0,
            seed: 7,
            cluster_rel_tol: 1e-6,
            verify_inertia: true,
        }
    }
}

/// Sorted eigenpairs plus derived structure.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Row-major: `eigenvectors[j]` belongs to `eigenvalues[j]`; vectors are
    /// M-orthonormal.
    pub eigenvectors: Vec<Vec<f64>>,
    /// Indices grouped into clusters of nearly equal eigenvalues.
    pub clusters: Vec<Vec<usize>>,
    /// Count of eigenvalues below [`ZERO_TOL`].
    pub zero_multiplicity: usize,
}

/// Solve for the lowest eigenpairs of K x = lambda M x.
pub fn solve(pair: &OperatorPair, opts: &SolveOptions) -> Result<Spectrum> {
    if opts.k == 0 {
        return Err(CoreError::InvalidParameter("k = 0 eigenpairs".to_string()));
    }
    let n = pair.n;
    let k = opts.k.min(n);
    let (values, vectors) = if n <= opts.dense_threshold {
        solve_dense(pair, k)?
    } else {
        solve_sparse(pair, k, opts)?
    };
    if values[0] < -1e-6 {
        return Err(CoreError::NegativeLambda(values[0]));
    }
    let clusters = cluster_indices(&values, opts.cluster_rel_tol);
    let zero_multiplicity = values.iter().filter(|&&v| v.abs() < ZERO_TOL).count();
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
        clusters,
        zero_multiplicity,
    })
}

fn cluster_indices(values: &[f64], rel_tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (v - values[*c.last().unwrap()]).abs() <= rel_tol * v.abs().max(1.0) => {
                c.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    clusters
}

fn solve_dense(pair: &OperatorPair, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = pair.n;
    let kd = pair.stiffness.to_dense();
    let md = pair.mass.to_dense();
    let chol = nalgebra::Cholesky::new(md).ok_or_else(|| {
        CoreError::SingularMass("mass matrix is not positive definite".to_string())
    })?;
    // C = L^-1 K L^-T, dense symmetric
    let l = chol.l();
    let mut c = kd;
    // solve L X = K (column block), then L Y^T = X^T
    l.solve_lower_triangular_mut(&mut c);
    c.transpose_mut();
    l.solve_lower_triangular_mut(&mut c);
    // enforce symmetry lost to rounding
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
    });
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for &j in order.iter().take(k) {
        values.push(eig.eigenvalues[j]);
        let y = eig.eigenvectors.column(j).into_owned();
        // x = L^-T y is M-orthonormal
        let mut x = y;
        l.transpose().solve_upper_triangular_mut(&mut x);
        vectors.push(x.iter().cloned().collect());
    }
    Ok((values, vectors))
}

fn solve_sparse(
    pair: &OperatorPair,
    k: usize,
    opts: &SolveOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = pair.n;
    let q = (k + 8).min(n);
    let sigma = opts.shift;
    let shifted = pair.stiffness.add_scaled(-sigma, &pair.mass);
    let perm = rcm(&shifted);
    let factor = SkylineLdl::factor(&shifted, perm)?;
    if factor.negative_pivots() > 0 {
        return Err(CoreError::ConvergenceFailure(format!(
            "shifted operator K - ({sigma}) M is indefinite; lower the shift"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = (0..q)
        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let max_iter = if opts.max_iter == 0 {
        300
    } else {
        opts.max_iter
    };

    let mut theta = vec![0.0f64; q];
    let mut converged = false;
    let mut scratch = vec![0.0f64; n];
    for _iter in 0..max_iter {
        // power step: X <- (K - sigma M)^-1 M X
        for col in x.iter_mut() {
            pair.mass.matvec(col, &mut scratch);
            *col = factor.solve(&scratch);
        }
        m_orthonormalize(&pair.mass, &mut x, &mut rng)?;
        // Rayleigh-Ritz on (K, M): with X M-orthonormal, H = X^T K X
        let mut h = DMatrix::zeros(q, q);
        let mut kx: Vec<Vec<f64>> = Vec::with_capacity(q);
        for col in &x {
            let mut out = vec![0.0; n];
            pair.stiffness.matvec(col, &mut out);
            kx.push(out);
        }
        for a in 0..q {
            for b in a..q {
                let s = dot(&x[a], &kx[b]);
                h[(a, b)] = s;
                h[(b, a)] = s;
            }
        }
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..q).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap()
        });
        // rotate the block
        let mut rotated: Vec<Vec<f64>> = vec![vec![0.0; n]; q];
        for (new_j, &j) in order.iter().enumerate() {
            theta[new_j] = eig.eigenvalues[j];
            let coeffs = eig.eigenvectors.column(j);
            for a in 0..q {
                let c = coeffs[a];
                if c != 0.0 {
                    for i in 0..n {
                        rotated[new_j][i] += c * x[a][i];
                    }
                }
            }
        }
        x = rotated;
        // residual check on the wanted eigenpairs
        let mut worst = 0.0f64;
        for j in 0..k {
            pair.stiffness.matvec(&x[j], &mut scratch);
            let mut mx = vec![0.0; n];
            pair.mass.matvec(&x[j], &mut mx);
            let mut res = 0.0;
            let mut mnorm = 0.0;
            for i in 0..n {
                let r = scratch[i] - theta[j] * mx[i];
                res += r * r;
                mnorm += mx[i] * mx[i];
            }
            let rel = res.sqrt() / ((1.0 + theta[j].abs()) * mnorm.sqrt().max(1e-300));
            worst = worst.max(rel);
        }
        if worst <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(CoreError::ConvergenceFailure(format!(
            "subspace iteration stalled after {max_iter} iterations (n = {n}, k = {k})"
        )));
    }

    if opts.verify_inertia && k < n {
        verify_no_missed_eigenvalues(pair, &theta, k)?;
    }

    Ok((theta[..k].to_vec(), x.into_iter().take(k).collect()))
}

/// Confirm through a Sylvester inertia count that exactly `j` eigenvalues lie
/// below a cut placed in the first sufficiently open gap at or before `k`.
fn verify_no_missed_eigenvalues(pair: &OperatorPair, theta: &[f64], k: usize) -> Result<()> {
    let mut j = k;
    while j > 0 {
        let gap = theta[j] - theta[j - 1];
        if gap > 1e-6 * theta[j].abs().max(1.0) {
            break;
        }
        j -= 1;
    }
    if j == 0 {
        // the whole window is one cluster; nothing can be certified
        return Ok(());
    }
    let tau = 0.5 * (theta[j - 1] + theta[j]);
    let count = eigenvalue_count_below(&pair.stiffness, &pair.mass, tau)?;
    if count != j {
        return Err(CoreError::ConvergenceFailure(format!(
            "inertia count found {count} eigenvalues below {tau:.6e}, solver returned {j}"
        )));
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Modified Gram-Schmidt in the M-inner product, two passes, replacing any
/// collapsed column with fresh random data.
fn m_orthonormalize(m: &SymCsr, x: &mut [Vec<f64>], rng: &mut ChaCha8Rng) -> Result<()> {
    let n = m.n;
    let q = x.len();
    let mut mx = vec![0.0; n];
    for j in 0..q {
        for _attempt in 0..3 {
            for _pass in 0..2 {
                for i in 0..j {
                    m.matvec(&x[i], &mut mx);
                    let c = dot(&x[j], &mx);
                    for t in 0..n {
                        x[j][t] -= c * x[i][t];
                    }
                }
            }
            m.matvec(&x[j], &mut mx);
            let norm = dot(&x[j], &mx).max(0.0).sqrt();
            if norm > 1e-12 {
                for t in 0..n {
                    x[j][t] /= norm;
                }
                break;
            }
            // collapsed: reseed the column
            for t in 0..n {
                x[j][t] = rng.random_range(-1.0..1.0);
            }
        }
        m.matvec(&x[j], &mut mx);
        let norm = dot(&x[j], &mx).sqrt();
        if !(0.5..2.0).contains(&norm) {
            return Err(CoreError::ConvergenceFailure(
                "orthonormalization failed to produce a unit vector".to_string(),
            ));
        }
    }
    Ok(())
}

/// First eigenvalue above [`ZERO_TOL`], with its index.
pub fn first_positive(spectrum: &Spectrum) -> Result<(usize, f64)> {
    spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .find(|(_, &v)| v > ZERO_TOL)
        .map(|(i, &v)| (i, v))
        .ok_or(CoreError::AllZero)
}

/// Result of a Richardson fit lambda_h = lambda + C h^p.
#[derive(Debug, Clone, Copy)]
pub struct ExtrapolatedValue {
    pub value: f64,
    /// Magnitude of the correction applied to the finest sample; a
    /// conservative error estimate.
    pub error_estimate: f64,
    pub observed_order: f64,
}

/// Fit lambda_h = lambda + C h^p through the finest samples.
///
/// `samples` holds (h, lambda_h) pairs; at least two are required. With two
/// samples the order is pinned at 2; with three or more the order is fitted
/// on the three finest. The lambda sequence must approach its limit
/// monotonically, otherwise the fit is meaningless and
/// [`CoreError::NonMonotoneSequence`] is returned.
pub fn extrapolate(samples: &[(f64, f64)]) -> Result<ExtrapolatedValue> {
    if samples.len() < 2 {
        return Err(CoreError::InvalidParameter(
            "extrapolation needs at least two (h, lambda) samples".to_string(),
        ));
    }
    let mut s = samples.to_vec();
    s.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for w in s.windows(2) {
        if w[0].0 <= w[1].0 {
            return Err(CoreError::InvalidParameter(format!(
                "duplicate mesh size h = {}",
                w[0].0
            )));
        }
    }
    let fine = &s[s.len().saturating_sub(3)..];
    if fine.len() == 2 {
        let (h1, l1) = fine[0];
        let (h2, l2) = fine[1];
        let r = (h1 / h2).powi(2);
        let value = l2 + (l2 - l1) / (r - 1.0);
        return Ok(ExtrapolatedValue {
            value,
            error_estimate: (value - l2).abs(),
            observed_order: 2.0,
        });
    }
    let (h1, l1) = fine[0];
    let (h2, l2) = fine[1];
    let (h3, l3) = fine[2];
    let d12 = l1 - l2;
    let d23 = l2 - l3;
    if d23 == 0.0 {
        return Ok(ExtrapolatedValue {
            value: l3,
            error_estimate: d12.abs(),
            observed_order: 2.0,
        });
    }
    if d12 * d23 <= 0.0 || d12.abs() <= d23.abs() {
        return Err(CoreError::NonMonotoneSequence(format!(
            "lambda steps {d12:.3e} then {d23:.3e} do not contract monotonically"
        )));
    }
    // solve (h1^p - h2^p) / (h2^p - h3^p) = d12 / d23 by bisection; the left
    // side is continuous in p and spans the target on [0.05, 8]
    let target = d12 / d23;
    let ratio = |p: f64| (h1.powf(p) - h2.powf(p)) / (h2.powf(p) - h3.powf(p));
    let (mut lo, mut hi) = (0.05, 8.0);
    let (rlo, rhi) = (ratio(lo), ratio(hi));
    if !((rlo - target) * (rhi - target) <= 0.0) {
        return Err(CoreError::NonMonotoneSequence(format!(
            "no convergence order in [0.05, 8] matches step ratio {target:.3}"
        )));
    }
    let increasing = rhi > rlo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (ratio(mid) > target) == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = 0.5 * (lo + hi);
    let c = d23 / (h2.powf(p) - h3.powf(p));
    let value = l3 - c * h3.powf(p);
    Ok(ExtrapolatedValue {
        value,
        error_estimate: (value - l3).abs(),
        observed_order: p,
    })
}
