//! Symmetric sparse matrices and a skyline LDL^T factorization.
//!
//! The eigensolver needs two things from a sparse direct method: solves with
//! the shifted operator K - sigma M for inverse iteration, and the inertia
//! (count of negative pivots) of K - tau M for Sylvester eigenvalue counts.
//! A reverse Cuthill-McKee reordering followed by an envelope ("skyline")
//! LDL^T delivers both without pivoting, which keeps the pivot signs
//! meaningful.

use nalgebra::DMatrix;

use crate::{CoreError, Result};

/// Unordered coordinate-format accumulator; duplicates sum on conversion.
#[derive(Debug, Clone)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Triplets {
            n,
            entries: Vec::new(),
        }
    }

    /// Add `v` at (i, j). Symmetric matrices should push both (i, j) and
    /// (j, i) or use [`Triplets::push_sym`].
    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Add `v` at (i, j) and, when off-diagonal, at (j, i).
    pub fn push_sym(&mut self, i: usize, j: usize, v: f64) {
        self.push(i, j, v);
        if i != j {
            self.push(j, i, v);
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Compressed sparse rows holding the full (both triangles) pattern of a
/// symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymCsr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SymCsr {
    pub fn from_triplets(t: &Triplets) -> Self {
        let n = t.n;
        let mut sorted: Vec<(usize, usize, f64)> = t.entries.clone();
        sorted.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut rows: Vec<usize> = Vec::with_capacity(sorted.len());
        for &(i, j, v) in &sorted {
            if rows.last() == Some(&i) && col_idx.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SymCsr {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut s = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                s += v * x[j];
            }
            y[i] = s;
        }
    }

    /// A + c B, matching or merging sparsity patterns.
    pub fn add_scaled(&self, c: f64, b: &SymCsr) -> SymCsr {
        debug_assert_eq!(self.n, b.n);
        let mut t = Triplets::new(self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                t.push(i, j, v);
            }
            let (cols, vals) = b.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                t.push(i, j, c * v);
            }
        }
        SymCsr::from_triplets(&t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[(i, j)] += v;
            }
        }
        m
    }
}

/// Reverse Cuthill-McKee ordering; returns `perm` with `perm[new] = old`.
/// Handles disconnected graphs component by component.
pub fn rcm(a: &SymCsr) -> Vec<usize> {
    let n = a.n;
    let degree = |v: usize| a.row_ptr[v + 1] - a.row_ptr[v];
    let mut visited = vec![false; n];
    let mut order: Vec<usize> = Vec::with_capacity(n);

    // BFS returning (levels, last level's members), used for the
    // pseudo-peripheral search and the CM sweep itself
    let bfs_levels = |start: usize, visited: &[bool]| -> Vec<Vec<usize>> {
        let mut seen = vec![false; n];
        let mut levels = vec![vec![start]];
        seen[start] = true;
        loop {
            let mut next = Vec::new();
            for &v in levels.last().unwrap() {
                let (cols, _) = a.row(v);
                for &w in cols {
                    if w != v && !seen[w] && !visited[w] {
                        seen[w] = true;
                        next.push(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    };

    while order.len() < n {
        // smallest-degree unvisited vertex as initial guess
        let mut start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| degree(v))
            .unwrap();
        // George-Liu: walk to a vertex of maximal eccentricity
        let mut ecc = 0usize;
        loop {
            let levels = bfs_levels(start, &visited);
            if levels.len() <= ecc + 1 {
                break;
            }
            ecc = levels.len() - 1;
            start = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| degree(v))
                .unwrap();
        }
        // Cuthill-McKee sweep
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let (cols, _) = a.row(v);
            let mut nb: Vec<usize> = cols
                .iter()
                .copied()
                .filter(|&w| w != v && !visited[w])
                .collect();
            nb.sort_by_key(|&w| (degree(w), w));
            for w in nb {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Envelope bandwidth profile of `a` under `perm` (sum of row envelopes).
pub fn envelope_size(a: &SymCsr, perm: &[usize]) -> usize {
    let n = a.n;
    let mut iperm = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        iperm[old] = new;
    }
    let mut total = 0;
    for new_i in 0..n {
        let old_i = perm[new_i];
        let (cols, _) = a.row(old_i);
        let first = cols
            .iter()
            .map(|&j| iperm[j])
            .filter(|&j| j <= new_i)
            .min()
            .unwrap_or(new_i);
        total += new_i - first;
    }
    total
}

/// Envelope LDL^T factorization of a permuted symmetric matrix.
///
/// No pivoting: pivot signs then count eigenvalues by Sylvester's law, and
/// solves implement inverse iteration. Factorization fails with
/// [`CoreError::SingularMass`] when a pivot collapses (matrix singular or
/// severely indefinite inside the envelope).
#[derive(Debug)]
pub struct SkylineLdl {
    n: usize,
    perm: Vec<usize>,
    /// first[i]: lowest column index of row i's envelope
    first: Vec<usize>,
    /// offsets[i]: start of row i's strictly-lower entries in `low`
    offsets: Vec<usize>,
    low: Vec<f64>,
    d: Vec<f64>,
}

impl SkylineLdl {
    /// Factor `a` under the ordering `perm` (`perm[new] = old`).
    pub fn factor(a: &SymCsr, perm: Vec<usize>) -> Result<Self> {
        let n = a.n;
        debug_assert_eq!(perm.len(), n);
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        // envelope profile
        let mut first = vec![0usize; n];
        for new_i in 0..n {
            let (cols, _) = a.row(perm[new_i]);
            first[new_i] = cols
                .iter()
                .map(|&j| iperm[j])
                .filter(|&j| j <= new_i)
                .min()
                .unwrap_or(new_i);
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + (i - first[i]);
        }
        let mut low = vec![0.0f64; offsets[n]];
        let mut d = vec![0.0f64; n];
        // scatter initial values
        for new_i in 0..n {
            let (cols, vals) = a.row(perm[new_i]);
            for (&j, &v) in cols.iter().zip(vals) {
                let new_j = iperm[j];
                if new_j == new_i {
                    d[new_i] = v;
                } else if new_j < new_i {
                    low[offsets[new_i] + (new_j - first[new_i])] = v;
                }
            }
        }
        // factor: l_ij = (a_ij - sum_k l_ik d_k l_jk) / d_j, then
        // d_i -= sum_k l_ik^2 d_k
        for i in 0..n {
            let fi = first[i];
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let mut s = low[offsets[i] + (j - fi)];
                let ri = offsets[i] + (start - fi);
                let rj = offsets[j] + (start - fj);
                for k in 0..(j - start) {
                    s -= low[ri + k] * d[start + k] * low[rj + k];
                }
                if d[j] == 0.0 {
                    return Err(CoreError::SingularMass(format!(
                        "zero pivot at column {j} during LDL^T"
                    )));
                }
                low[offsets[i] + (j - fi)] = s / d[j];
            }
            let mut s = d[i];
            let ri = offsets[i];
            for k in fi..i {
                let l = low[ri + (k - fi)];
                s -= l * l * d[k];
            }
            if s == 0.0 || !s.is_finite() {
                return Err(CoreError::SingularMass(format!(
                    "pivot {s:e} at row {i} during LDL^T"
                )));
            }
            d[i] = s;
        }
        Ok(SkylineLdl {
            n,
            perm,
            first,
            offsets,
            low,
            d,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Negative-pivot count; by Sylvester's law of inertia this equals the
    /// number of negative eigenvalues of the factored matrix.
    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Solve A x = b in the original (unpermuted) numbering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        // permute
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        // forward: L y' = y
        for i in 0..n {
            let fi = self.first[i];
            let ri = self.offsets[i];
            let mut s = y[i];
            for k in fi..i {
                s -= self.low[ri + (k - fi)] * y[k];
            }
            y[i] = s;
        }
        // diagonal
        for i in 0..n {
            y[i] /= self.d[i];
        }
        // backward: L^T x = y
        for i in (0..n).rev() {
            let fi = self.first[i];
            let ri = self.offsets[i];
            let yi = y[i];
            for k in fi..i {
                y[k] -= self.low[ri + (k - fi)] * yi;
            }
        }
        // unpermute
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }
}

/// Count eigenvalues of the pencil (K, M) strictly below `tau` by factoring
/// K - tau M.
pub fn eigenvalue_count_below(k: &SymCsr, m: &SymCsr, tau: f64) -> Result<usize> {
    let shifted = k.add_scaled(-tau, m);
    let perm = rcm(&shifted);
    let f = SkylineLdl::factor(&shifted, perm)?;
    Ok(f.negative_pivots())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, seed: u64) -> SymCsr {
        let mut rng = StdRng::seed_from_u64(seed);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let spd = &b * b.transpose() + DMatrix::identity(n, n) * n as f64;
        dense_to_csr(&spd)
    }

    fn dense_to_csr(m: &DMatrix<f64>) -> SymCsr {
        let n = m.nrows();
        let mut t = Triplets::new(n);
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != 0.0 {
                    t.push(i, j, m[(i, j)]);
                }
            }
        }
        SymCsr::from_triplets(&t)
    }

    #[test]
    fn triplets_accumulate_duplicates() {
        let mut t = Triplets::new(3);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push_sym(0, 2, 5.0);
        t.push(1, 1, 4.0);
        let a = SymCsr::from_triplets(&t);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(0, 2), 5.0);
        assert_eq!(a.get(2, 0), 5.0);
        assert_eq!(a.get(1, 1), 4.0);
        assert_eq!(a.get(1, 2), 0.0);
        assert_eq!(a.nnz(), 4);
    }

    #[test]
    fn matvec_matches_dense() {
        let a = random_spd(20, 7);
        let dense = a.to_dense();
        let x: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let mut y = vec![0.0; 20];
        a.matvec(&x, &mut y);
        let xd = nalgebra::DVector::from_column_slice(&x);
        let yd = &dense * xd;
        for i in 0..20 {
            assert_relative_eq!(y[i], yd[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn skyline_solves_spd_system() {
        let a = random_spd(50, 42);
        let perm = rcm(&a);
        let f = SkylineLdl::factor(&a, perm).unwrap();
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).cos()).collect();
        let x = f.solve(&b);
        // residual check against the matrix itself
        let mut ax = vec![0.0; 50];
        a.matvec(&x, &mut ax);
        for i in 0..50 {
            assert_relative_eq!(ax[i], b[i], epsilon = 1e-9);
        }
        assert_eq!(f.negative_pivots(), 0);
    }

    #[test]
    fn inertia_counts_eigenvalues() {
        let n = 40;
        let mut rng = StdRng::seed_from_u64(3);
        let b = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sym = (&b + b.transpose()) * 0.5;
        let a = dense_to_csr(&sym);
        let mut eig: Vec<f64> = sym
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .collect();
        eig.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for cut in [5usize, 17, 33] {
            let tau = 0.5 * (eig[cut - 1] + eig[cut]);
            let ident = dense_to_csr(&DMatrix::identity(n, n));
            let count = eigenvalue_count_below(&a, &ident, tau).unwrap();
            assert_eq!(count, cut, "tau between eig {} and {}", cut - 1, cut);
        }
    }

    #[test]
    fn rcm_shrinks_path_graph_envelope() {
        // path graph 0-1-2-...-99 presented in shuffled labels
        let n = 100;
        let mut rng = StdRng::seed_from_u64(11);
        let mut label: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            label.swap(i, j);
        }
        let mut t = Triplets::new(n);
        for v in 0..n {
            t.push(v, v, 2.0);
        }
        for k in 0..n - 1 {
            t.push_sym(label[k], label[k + 1], -1.0);
        }
        let a = SymCsr::from_triplets(&t);
        let identity: Vec<usize> = (0..n).collect();
        let before = envelope_size(&a, &identity);
        let after = envelope_size(&a, &rcm(&a));
        assert_eq!(after, n - 1, "a path graph has unit envelope under RCM");
        assert!(before > 4 * after);
    }

    #[test]
    fn disconnected_graph_is_ordered_completely() {
        let mut t = Triplets::new(6);
        for v in 0..6 {
            t.push(v, v, 1.0);
        }
        t.push_sym(0, 1, -1.0);
        t.push_sym(3, 4, -1.0);
        let a = SymCsr::from_triplets(&t);
        let mut perm = rcm(&a);
        perm.sort_unstable();
        assert_eq!(perm, vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn add_scaled_shifts_matrix() {
        let a = random_spd(10, 1);
        let ident = dense_to_csr(&DMatrix::identity(10, 10));
        let shifted = a.add_scaled(-2.5, &ident);
        let want = a.to_dense() - DMatrix::identity(10, 10) * 2.5;
        assert_relative_eq!(
            (shifted.to_dense() - want).norm(),
            0.0,
            epsilon = 1e-13
        );
    }

    proptest! {
        #[test]
        fn skyline_round_trip(seed in 0u64..200) {
            let n = 30;
            let a = random_spd(n, seed);
            let perm = rcm(&a);
            let f = SkylineLdl::factor(&a, perm).unwrap();
            let mut rng = StdRng::seed_from_u64(seed ^ 0xabcd);
            let x_true: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut b = vec![0.0; n];
            a.matvec(&x_true, &mut b);
            let x = f.solve(&b);
            for i in 0..n {
                prop_assert!((x[i] - x_true[i]).abs() < 1e-8);
            }
        }
    }
}
