//! Lowest eigenpairs of [`TransverseIsingOperator`].
//!
//! Small operators go through a dense symmetric eigendecomposition. Larger ones
//! use a thick-restart block Krylov method: the search space is grown by the
//! residuals of the current Ritz block (optionally scaled by the inverse
//! shifted diagonal), every new direction is fully reorthogonalized against the
//! stored basis, and when the basis is full it collapses onto the current Ritz
//! block. The block is wider than the number of wanted pairs, so exactly
//! degenerate levels are captured with their multiplicity.

use nalgebra::{DMatrix, DMatrixView, DVectorView, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::operator::TransverseIsingOperator;
use super::SpectrumError;

#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOptions {
    /// Converged when `‖H y - θ y‖ <= tolerance · max(1, |θ|)`.
    pub tolerance: f64,
    /// Extra Ritz vectors carried beyond the wanted ones.
    pub guard: usize,
    /// Basis size that triggers a restart; `0` picks `max(3·block, block + 14)`.
    pub max_basis: usize,
    pub max_iterations: usize,
    /// Scale residuals by `(diag - θ)^-1` before expanding.
    pub precondition: bool,
    pub seed: u64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { tolerance: 1e-8, guard: 2, max_basis: 0, max_iterations: 2000, precondition: true, seed: 0x6d6b_6373 }
    }
}

/// Ascending eigenvalues with unit eigenvectors.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// All eigenpairs of a small operator, ascending.
pub fn dense_eigenpairs(op: &TransverseIsingOperator) -> Eigenpairs {
    let eig = SymmetricEigen::new(op.to_dense());
    let mut order: Vec<usize> = (0..op.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    Eigenpairs {
        values: order.iter().map(|&i| eig.eigenvalues[i]).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
    }
}

/// The `nev` lowest eigenpairs (more may be returned: the full Ritz block, for
/// warm-starting a nearby operator).
pub fn lowest_eigenpairs(
    op: &TransverseIsingOperator,
    nev: usize,
    opts: &KrylovOptions,
    warm: &[Vec<f64>],
) -> Result<Eigenpairs, SpectrumError> {
    let dim = op.dim();
    let nev = nev.min(dim);
    if op.driver() == 0.0 {
        return Ok(diagonal_eigenpairs(op, nev));
    }
    let block = (nev + opts.guard).min(dim);
    let max_basis = if opts.max_basis == 0 { (3 * block).max(block + 14) } else { opts.max_basis.max(2 * block) };
    if dim <= 2 * max_basis {
        return Ok(dense_eigenpairs(op));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut random = |cols: usize| DMatrix::from_fn(dim, cols, |_, _| rng.gen_range(-1.0..1.0));
    let mut space = Subspace::new(op, max_basis);
    let seeds: Vec<&Vec<f64>> = warm.iter().filter(|w| w.len() == dim).take(block).collect();
    if !seeds.is_empty() {
        space.push(DMatrix::from_fn(dim, seeds.len(), |i, j| seeds[j][i]));
    }
    while space.len() < block {
        space.push(random(block - space.len()));
    }

    let mut worst = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let ritz = space.ritz(block);
        let mut open = Vec::new();
        let mut converged = true;
        worst = 0.0;
        for (l, &theta) in ritz.values.iter().enumerate() {
            let rnorm = ritz.residuals.column(l).norm();
            let scale = theta.abs().max(1.0);
            if l < nev {
                worst = worst.max(rnorm / scale);
                converged &= rnorm <= opts.tolerance * scale;
            }
            if rnorm > opts.tolerance * scale {
                open.push(l);
            }
        }
        if converged {
            let vectors = (0..block).map(|l| ritz.vectors.column(l).iter().copied().collect()).collect();
            return Ok(Eigenpairs { values: ritz.values, vectors });
        }
        let mut expansion = DMatrix::zeros(dim, open.len());
        for (c, &l) in open.iter().enumerate() {
            let theta = ritz.values[l];
            let mut col = expansion.column_mut(c);
            col.copy_from(&ritz.residuals.column(l));
            if opts.precondition {
                for (x, d) in col.iter_mut().zip(op.diagonal()) {
                    let den = d - theta;
                    *x /= if den.abs() < 1e-8 { 1e-8f64.copysign(den) } else { den };
                }
            }
        }
        if space.len() + open.len() > max_basis {
            space.restart(ritz);
        }
        if space.push(expansion) == 0 {
            space.push(random(1));
        }
    }
    Err(SpectrumError::NotConverged { residual: worst })
}

fn diagonal_eigenpairs(op: &TransverseIsingOperator, nev: usize) -> Eigenpairs {
    let diag = op.diagonal();
    let mut order: Vec<usize> = (0..diag.len()).collect();
    order.sort_by(|&a, &b| diag[a].total_cmp(&diag[b]).then(a.cmp(&b)));
    order.truncate(nev);
    let vectors = order
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; diag.len()];
            e[i] = 1.0;
            e
        })
        .collect();
    Eigenpairs { values: order.iter().map(|&i| diag[i]).collect(), vectors }
}

struct Ritz {
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    images: DMatrix<f64>,
    residuals: DMatrix<f64>,
}

/// Orthonormal basis `V` and its image `W = H V`, stored column-major in
/// preallocated buffers, with the projection `T = Vᵀ H V`.
struct Subspace<'a> {
    op: &'a TransverseIsingOperator,
    dim: usize,
    cols: usize,
    basis: Vec<f64>,
    image: Vec<f64>,
    projected: DMatrix<f64>,
}

impl<'a> Subspace<'a> {
    fn new(op: &'a TransverseIsingOperator, capacity: usize) -> Self {
        let dim = op.dim();
        Self {
            op,
            dim,
            cols: 0,
            basis: vec![0.0; dim * capacity],
            image: vec![0.0; dim * capacity],
            projected: DMatrix::zeros(capacity, capacity),
        }
    }

    fn len(&self) -> usize {
        self.cols
    }

    fn v(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.basis[..self.dim * self.cols], self.dim, self.cols)
    }

    fn w(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.image[..self.dim * self.cols], self.dim, self.cols)
    }

    /// Orthogonalizes the columns of `c` against the basis and each other
    /// (classical Gram-Schmidt, twice) and appends the independent ones.
    /// Returns how many were added.
    fn push(&mut self, mut c: DMatrix<f64>) -> usize {
        let start: Vec<f64> = c.column_iter().map(|col| col.norm()).collect();
        if self.cols > 0 {
            for _ in 0..2 {
                let coef = self.v().tr_mul(&c);
                c.gemm(-1.0, &self.v(), &coef, 1.0);
            }
        }
        let first = self.cols;
        for (j, &s0) in start.iter().enumerate() {
            if self.cols == self.projected.nrows() {
                break;
            }
            let mut col = c.column(j).into_owned();
            for _ in 0..2 {
                for k in first..self.cols {
                    let prev = DVectorView::from_slice(&self.basis[k * self.dim..(k + 1) * self.dim], self.dim);
                    let d = prev.dot(&col);
                    col.axpy(-d, &prev, 1.0);
                }
            }
            let left = col.norm();
            if !(s0 > 0.0 && left.is_finite() && left > 1e-10 * s0) {
                continue;
            }
            col /= left;
            let range = self.cols * self.dim..(self.cols + 1) * self.dim;
            self.basis[range.clone()].copy_from_slice(col.as_slice());
            let (src, dst) = (&self.basis[range.clone()], &mut self.image[range]);
            self.op.apply(src, dst);
            self.cols += 1;
        }
        let added = self.cols - first;
        if added > 0 {
            let fresh = DMatrixView::from_slice(&self.image[first * self.dim..self.cols * self.dim], self.dim, added);
            let block = self.v().tr_mul(&fresh);
            for j in 0..added {
                for i in 0..self.cols {
                    self.projected[(i, first + j)] = block[(i, j)];
                    self.projected[(first + j, i)] = block[(i, j)];
                }
            }
        }
        added
    }

    /// Collapses the basis onto the Ritz block.
    fn restart(&mut self, ritz: Ritz) {
        let cols = ritz.values.len();
        let len = self.dim * cols;
        self.basis[..len].copy_from_slice(ritz.vectors.as_slice());
        self.image[..len].copy_from_slice(ritz.images.as_slice());
        self.cols = cols;
        self.projected.fill(0.0);
        for (l, &theta) in ritz.values.iter().enumerate() {
            self.projected[(l, l)] = theta;
        }
    }

    fn ritz(&self, count: usize) -> Ritz {
        let m = self.cols;
        let eig = SymmetricEigen::new(self.projected.view((0, 0), (m, m)).into_owned());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        order.truncate(count);
        let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let coef = DMatrix::from_fn(m, order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
        let vectors = self.v() * &coef;
        let images = self.w() * &coef;
        let mut residuals = images.clone();
        for (l, &theta) in values.iter().enumerate() {
            residuals.column_mut(l).axpy(-theta, &vectors.column(l), 1.0);
        }
        Ritz { values, vectors, images, residuals }
    }
}
