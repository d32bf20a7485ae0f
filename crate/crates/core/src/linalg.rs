//! Numerical kernels of dense matrices.

use nalgebra::{DMatrix, DVector};

/// Singular values at or below this fraction of the largest count as zero.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// Orthonormal bases of `ker(G)` and `ker(G′)` from one SVD.
#[derive(Debug, Clone)]
pub struct DenseKernels {
    pub rank: usize,
    pub kernel: Vec<DVector<f64>>,
    pub adjoint_kernel: Vec<DVector<f64>>,
    pub singular_values: Vec<f64>,
}

pub fn numerical_kernels(matrix: &DMatrix<f64>) -> DenseKernels {
    let svd = matrix.clone().svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_THRESHOLD * sigma_max;
    let mut kernel = Vec::new();
    let mut adjoint_kernel = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        if sigma_max == 0.0 || s <= cutoff {
            kernel.push(v_t.row(i).transpose());
            adjoint_kernel.push(u.column(i).into_owned());
        }
    }
    DenseKernels {
        rank: sigma.len() - kernel.len(),
        kernel,
        adjoint_kernel,
        singular_values: sigma,
    }
}

pub fn numerical_rank(matrix: &DMatrix<f64>) -> usize {
    if matrix.is_empty() {
        return 0;
    }
    let sigma = matrix.singular_values();
    let sigma_max = sigma.max();
    if sigma_max == 0.0 {
        return 0;
    }
    sigma
        .iter()
        .filter(|&&s| s > RANK_THRESHOLD * sigma_max)
        .count()
}

/// Whether `kernel` separates `adjoint_kernel`: every nonzero element of the
/// adjoint kernel pairs nontrivially with some kernel element. Equivalent to
/// the cross-Gram matrix `⟨x′_i, x_j⟩` having full row rank.
pub fn separates(kernel: &[DVector<f64>], adjoint_kernel: &[DVector<f64>]) -> bool {
    if adjoint_kernel.is_empty() {
        return true;
    }
    if kernel.is_empty() {
        return false;
    }
    let gram = DMatrix::from_fn(adjoint_kernel.len(), kernel.len(), |i, j| {
        adjoint_kernel[i].dot(&kernel[j])
    });
    // bases are orthonormal, so an absolute threshold is meaningful
    let sigma = gram.singular_values();
    sigma.iter().filter(|&&s| s > RANK_THRESHOLD).count() == adjoint_kernel.len()
}
