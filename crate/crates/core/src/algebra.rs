//! Weighted block algebras: finite models of a semifinite von Neumann
//! algebra with trace.
//!
//! An algebra is a direct sum of full matrix blocks `M_{n_k}(C)` carrying
//! positive trace weights `lambda_k`; the trace of a block operator is
//! `sum_k lambda_k * Tr(A_k)`. Non-integer weights produce the real-valued
//! ("type II") index and flow values the toolkit is built around.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SfError};

pub type CMatrix = DMatrix<Complex64>;

/// Entrywise Hermiticity tolerance used by [`BlockOperator::is_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Direct sum of matrix blocks with positive trace weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBlockAlgebra {
    dims: Vec<usize>,
    weights: Vec<f64>,
}

impl WeightedBlockAlgebra {
    pub fn new(dims: Vec<usize>, weights: Vec<f64>) -> Result<Arc<Self>> {
        if dims.is_empty() {
            return Err(SfError::structural("algebra needs at least one block"));
        }
        if dims.len() != weights.len() {
            return Err(SfError::structural(format!(
                "{} block dims but {} weights",
                dims.len(),
                weights.len()
            )));
        }
        if dims.iter().any(|&n| n == 0) {
            return Err(SfError::structural("block dimensions must be >= 1"));
        }
        if weights.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(SfError::structural("trace weights must be positive and finite"));
        }
        Ok(Arc::new(WeightedBlockAlgebra { dims, weights }))
    }

    /// Single block of size `dim` with weight 1: the plain type I case.
    pub fn type_i(dim: usize) -> Arc<Self> {
        WeightedBlockAlgebra::new(vec![dim], vec![1.0]).expect("valid")
    }

    /// One 1x1 block per grid point, weighted by the cell measure. This is
    /// the discretized-multiplier model used throughout.
    pub fn diagonal_model(weights: Vec<f64>) -> Result<Arc<Self>> {
        let n = weights.len();
        WeightedBlockAlgebra::new(vec![1; n], weights)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn n_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// tau(1) = sum_k lambda_k * n_k.
    pub fn trace_of_identity(&self) -> f64 {
        self.dims
            .iter()
            .zip(&self.weights)
            .map(|(&n, &w)| w * n as f64)
            .sum()
    }
}

/// An element of the algebra: one complex matrix per block.
#[derive(Debug, Clone)]
pub struct BlockOperator {
    algebra: Arc<WeightedBlockAlgebra>,
    blocks: Vec<CMatrix>,
}

impl BlockOperator {
    pub fn new(algebra: Arc<WeightedBlockAlgebra>, blocks: Vec<CMatrix>) -> Result<Self> {
        if blocks.len() != algebra.n_blocks() {
            return Err(SfError::structural(format!(
                "expected {} blocks, got {}",
                algebra.n_blocks(),
                blocks.len()
            )));
        }
        for (k, (b, &n)) in blocks.iter().zip(algebra.dims()).enumerate() {
            if b.nrows() != n || b.ncols() != n {
                return Err(SfError::structural(format!(
                    "block {} has shape {}x{}, algebra wants {}x{}",
                    k,
                    b.nrows(),
                    b.ncols(),
                    n,
                    n
                )));
            }
        }
        Ok(BlockOperator { algebra, blocks })
    }

    pub fn zeros(algebra: &Arc<WeightedBlockAlgebra>) -> Self {
        let blocks = algebra
            .dims()
            .iter()
            .map(|&n| CMatrix::zeros(n, n))
            .collect();
        BlockOperator {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    pub fn identity(algebra: &Arc<WeightedBlockAlgebra>) -> Self {
        let blocks = algebra
            .dims()
            .iter()
            .map(|&n| CMatrix::identity(n, n))
            .collect();
        BlockOperator {
            algebra: Arc::clone(algebra),
            blocks,
        }
    }

    /// Diagonal operator on a `diagonal_model` algebra (all blocks 1x1).
    pub fn from_diagonal(algebra: &Arc<WeightedBlockAlgebra>, values: &[f64]) -> Result<Self> {
        if values.len() != algebra.n_blocks() || algebra.dims().iter().any(|&n| n != 1) {
            return Err(SfError::structural(
                "from_diagonal requires an all-1x1 algebra matching the value count",
            ));
        }
        let blocks = values
            .iter()
            .map(|&v| CMatrix::from_element(1, 1, Complex64::new(v, 0.0)))
            .collect();
        Ok(BlockOperator {
            algebra: Arc::clone(algebra),
            blocks,
        })
    }

    pub fn algebra(&self) -> &Arc<WeightedBlockAlgebra> {
        &self.algebra
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, k: usize) -> &CMatrix {
        &self.blocks[k]
    }

    pub fn same_algebra(&self, other: &BlockOperator) -> bool {
        Arc::ptr_eq(&self.algebra, &other.algebra) || *self.algebra == *other.algebra
    }

    fn check_same_algebra(&self, other: &BlockOperator, what: &str) {
        assert!(
            self.same_algebra(other),
            "{what}: operators live in different algebras"
        );
    }

    pub fn map_blocks(&self, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        BlockOperator {
            algebra: Arc::clone(&self.algebra),
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &BlockOperator) -> Self {
        self.check_same_algebra(other, "add");
        BlockOperator {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &BlockOperator) -> Self {
        self.check_same_algebra(other, "sub");
        BlockOperator {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &BlockOperator) -> Self {
        self.check_same_algebra(other, "mul");
        BlockOperator {
            algebra: Arc::clone(&self.algebra),
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(Complex64::new(s, 0.0))
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        self.map_blocks(|b| b.map(|z| z * s))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    /// tau(A) = sum_k lambda_k * Tr(A_k).
    pub fn trace(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &w) in self.blocks.iter().zip(self.algebra.weights()) {
            let mut tr = Complex64::new(0.0, 0.0);
            for i in 0..b.nrows() {
                tr += b[(i, i)];
            }
            acc += tr * Complex64::new(w, 0.0);
        }
        acc
    }

    /// Real part of the trace; the imaginary part must be negligible.
    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    /// Largest entry magnitude across blocks.
    pub fn max_abs_entry(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Operator norm: max over blocks of the largest singular value,
    /// computed as sqrt(lambda_max(A* A)). The Hermitian eigenroute stays
    /// accurate on clustered spectra where bidiagonal SVDs can drift.
    pub fn op_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| {
                if b.nrows() == 1 {
                    b[(0, 0)].norm()
                } else {
                    let g = b.adjoint() * b;
                    let herm = (&g + g.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
                    herm.symmetric_eigenvalues()
                        .iter()
                        .fold(0.0f64, |m, &x| m.max(x))
                        .max(0.0)
                        .sqrt()
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn fro_norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| {
            let n = b.nrows();
            for i in 0..n {
                for j in i..n {
                    if (b[(i, j)] - b[(j, i)].conj()).norm() > tol {
                        return false;
                    }
                }
            }
            true
        })
    }

    /// (A + A*)/2, removing eigensolver-scale asymmetries.
    pub fn hermitize(&self) -> Self {
        self.map_blocks(|b| (b + b.adjoint()).map(|z| z * Complex64::new(0.5, 0.0)))
    }
}

/// A validated orthogonal projection in the algebra.
#[derive(Debug, Clone)]
pub struct Projection {
    op: BlockOperator,
}

/// Validation thresholds from the projection contract: idempotency to
/// 1e-10, self-adjointness to 1e-12, eigenvalues in {0,1} to 1e-8.
pub const PROJ_IDEMPOTENT_TOL: f64 = 1e-10;
pub const PROJ_ADJOINT_TOL: f64 = 1e-12;
pub const PROJ_EIGEN_TOL: f64 = 1e-8;

impl Projection {
    pub fn try_new(op: BlockOperator) -> Result<Self> {
        let sq = op.mul(&op);
        let idem = sq.sub(&op).op_norm();
        if idem > PROJ_IDEMPOTENT_TOL {
            return Err(SfError::domain(format!(
                "not idempotent: ||P^2 - P|| = {idem:.3e}"
            )));
        }
        let sa = op.sub(&op.adjoint()).op_norm();
        if sa > PROJ_ADJOINT_TOL {
            return Err(SfError::domain(format!(
                "not self-adjoint: ||P - P*|| = {sa:.3e}"
            )));
        }
        for b in op.blocks() {
            let herm = (b + b.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
            let eigs = herm.symmetric_eigenvalues();
            for ev in eigs.iter() {
                if ev.abs() > PROJ_EIGEN_TOL && (ev - 1.0).abs() > PROJ_EIGEN_TOL {
                    return Err(SfError::domain(format!(
                        "projection eigenvalue {ev} is not in {{0,1}}"
                    )));
                }
            }
        }
        Ok(Projection { op })
    }

    /// Wrap without validating. For operators produced by exact spectral
    /// constructions where validity holds by construction.
    pub fn new_unchecked(op: BlockOperator) -> Self {
        Projection { op }
    }

    pub fn op(&self) -> &BlockOperator {
        &self.op
    }

    pub fn into_op(self) -> BlockOperator {
        self.op
    }

    pub fn algebra(&self) -> &Arc<WeightedBlockAlgebra> {
        self.op.algebra()
    }

    pub fn identity(algebra: &Arc<WeightedBlockAlgebra>) -> Self {
        Projection {
            op: BlockOperator::identity(algebra),
        }
    }

    pub fn zero(algebra: &Arc<WeightedBlockAlgebra>) -> Self {
        Projection {
            op: BlockOperator::zeros(algebra),
        }
    }

    /// 1 - P.
    pub fn complement(&self) -> Self {
        Projection {
            op: BlockOperator::identity(self.op.algebra()).sub(&self.op),
        }
    }

    /// tau(P).
    pub fn trace(&self) -> f64 {
        self.op.trace_re()
    }

    /// Rank of each block, read off the spectrum.
    pub fn block_ranks(&self) -> Vec<usize> {
        self.op
            .blocks()
            .iter()
            .map(|b| {
                let herm = (b + b.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
                herm.symmetric_eigenvalues()
                    .iter()
                    .filter(|ev| **ev > 0.5)
                    .count()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg23() -> Arc<WeightedBlockAlgebra> {
        WeightedBlockAlgebra::new(vec![2, 3], vec![1.0, 0.5]).unwrap()
    }

    #[test]
    fn trace_of_identity_is_weighted_dim() {
        let a = alg23();
        let id = BlockOperator::identity(&a);
        assert_eq!(id.trace(), Complex64::new(3.5, 0.0));
        assert_eq!(a.trace_of_identity(), 3.5);
    }

    #[test]
    fn trace_of_zero_is_zero() {
        let a = alg23();
        assert_eq!(BlockOperator::zeros(&a).trace(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rejects_bad_shapes() {
        let a = alg23();
        let blocks = vec![CMatrix::zeros(2, 2), CMatrix::zeros(2, 2)];
        assert!(matches!(
            BlockOperator::new(Arc::clone(&a), blocks),
            Err(SfError::Structural(_))
        ));
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(WeightedBlockAlgebra::new(vec![2], vec![0.0]).is_err());
        assert!(WeightedBlockAlgebra::new(vec![2], vec![-1.0]).is_err());
        assert!(WeightedBlockAlgebra::new(vec![0], vec![1.0]).is_err());
    }

    #[test]
    fn projection_validation() {
        let a = alg23();
        assert!(Projection::try_new(BlockOperator::identity(&a)).is_ok());
        assert!(Projection::try_new(BlockOperator::zeros(&a)).is_ok());
        let half = BlockOperator::identity(&a).scale(0.5);
        assert!(Projection::try_new(half).is_err());
    }

    #[test]
    fn complement_trace() {
        let a = alg23();
        let p = Projection::identity(&a);
        assert_eq!(p.complement().trace(), 0.0);
        assert_eq!(p.trace(), 3.5);
    }
}
