//! Spectral machinery on block operators: Hermitian eigendecomposition,
//! functional calculus, nonnegative spectral projections, polar parts.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DVector;
use num_complex::Complex64;

use crate::algebra::{BlockOperator, CMatrix, Projection, HERMITIAN_TOL};
use crate::error::{Result, SfError};

/// Default tolerances for kernel and rank decisions.
///
/// `kernel_tol` is absolute on eigenvalues; `rank_tol` is relative to the
/// largest singular value. Both sit four orders of magnitude above the
/// ~1e-12 resolution of double-precision eigensolvers and may be
/// overridden per call. Values exactly at a threshold count as zero
/// (kernel inclusion, matching chi(0) = 1).
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub kernel_tol: f64,
    pub rank_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            kernel_tol: 1e-8,
            rank_tol: 1e-8,
        }
    }
}

/// Eigendecomposition of one Hermitian block.
#[derive(Debug, Clone)]
pub struct BlockEigen {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: CMatrix,
}

/// Per-block eigendecomposition of a Hermitian block operator.
pub fn eigh(a: &BlockOperator) -> Result<Vec<BlockEigen>> {
    let scale = a.max_abs_entry().max(1.0);
    if !a.is_hermitian(HERMITIAN_TOL * scale) {
        return Err(SfError::domain("operator is not Hermitian"));
    }
    Ok(a.blocks()
        .iter()
        .map(|b| {
            if b.nrows() == 1 {
                BlockEigen {
                    eigenvalues: DVector::from_element(1, b[(0, 0)].re),
                    eigenvectors: CMatrix::identity(1, 1),
                }
            } else {
                let herm = (b + b.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
                let se = SymmetricEigen::new(herm);
                BlockEigen {
                    eigenvalues: se.eigenvalues,
                    eigenvectors: se.eigenvectors,
                }
            }
        })
        .collect())
}

/// Eigenvalues of a Hermitian operator, sorted ascending within each block.
pub fn eigenvalues(a: &BlockOperator) -> Result<Vec<Vec<f64>>> {
    Ok(eigh(a)?
        .into_iter()
        .map(|e| {
            let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
            v.sort_by(|x, y| x.partial_cmp(y).unwrap());
            v
        })
        .collect())
}

/// Smallest eigenvalue magnitude: the spectral gap at zero.
pub fn min_abs_eigenvalue(a: &BlockOperator) -> Result<f64> {
    let mut m = f64::INFINITY;
    for evs in eigenvalues(a)? {
        for ev in evs {
            m = m.min(ev.abs());
        }
    }
    Ok(m)
}

/// Apply a real function to a Hermitian operator by functional calculus.
pub fn apply_fn(a: &BlockOperator, f: impl Fn(f64) -> f64) -> Result<BlockOperator> {
    let decomps = eigh(a)?;
    let blocks = decomps
        .into_iter()
        .map(|d| rebuild(&d, |x| Complex64::new(f(x), 0.0)))
        .collect();
    BlockOperator::new(a.algebra().clone(), blocks)
}

/// tau(X * f(H)) for Hermitian `h`; avoids materializing f(H) twice.
pub fn trace_of_product_fn(
    x: &BlockOperator,
    h: &BlockOperator,
    f: impl Fn(f64) -> f64,
) -> Result<Complex64> {
    let fh = apply_fn(h, f)?;
    Ok(x.mul(&fh).trace())
}

fn rebuild(d: &BlockEigen, f: impl Fn(f64) -> Complex64) -> CMatrix {
    let n = d.eigenvalues.len();
    let mut scaled = d.eigenvectors.clone();
    for j in 0..n {
        let fv = f(d.eigenvalues[j]);
        for i in 0..n {
            scaled[(i, j)] *= fv;
        }
    }
    &scaled * d.eigenvectors.adjoint()
}

/// chi_[0,inf)(B): the nonnegative spectral projection.
///
/// Eigenvalues with |ev| < kernel_tol are treated as 0 and included in the
/// range, so chi(0) = 1.
pub fn spectral_projection_nonneg(b: &BlockOperator, tols: &Tolerances) -> Result<Projection> {
    let decomps = eigh(b)?;
    let blocks = decomps
        .iter()
        .map(|d| {
            rebuild(d, |x| {
                if x >= -tols.kernel_tol {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
        })
        .collect();
    Ok(Projection::new_unchecked(BlockOperator::new(
        b.algebra().clone(),
        blocks,
    )?))
}

/// tau(chi_[0,inf)(B)) without building the projection.
pub fn nonneg_trace(b: &BlockOperator, tols: &Tolerances) -> Result<f64> {
    Ok(nonneg_trace_and_gap(b, tols)?.0)
}

/// (tau(chi(B)), min |eigenvalue|) in one values-only pass; never builds
/// eigenvectors, with a scalar fast path for 1x1 blocks.
pub fn nonneg_trace_and_gap(b: &BlockOperator, tols: &Tolerances) -> Result<(f64, f64)> {
    let scale = b.max_abs_entry().max(1.0);
    if !b.is_hermitian(HERMITIAN_TOL * scale) {
        return Err(SfError::domain("operator is not Hermitian"));
    }
    let mut trace = 0.0;
    let mut gap = f64::INFINITY;
    for (blk, &w) in b.blocks().iter().zip(b.algebra().weights()) {
        if blk.nrows() == 1 {
            let x = blk[(0, 0)].re;
            if x >= -tols.kernel_tol {
                trace += w;
            }
            gap = gap.min(x.abs());
        } else {
            let herm = (blk + blk.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
            for x in herm.symmetric_eigenvalues().iter() {
                if *x >= -tols.kernel_tol {
                    trace += w;
                }
                gap = gap.min(x.abs());
            }
        }
    }
    Ok((trace, gap))
}

/// Per-block singular values (unordered), via the Gram eigenproblem.
pub fn singular_values(a: &BlockOperator) -> Vec<Vec<f64>> {
    a.blocks()
        .iter()
        .map(|b| {
            if b.nrows() == 1 {
                vec![b[(0, 0)].norm()]
            } else {
                let g = b.adjoint() * b;
                let herm = (&g + g.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
                herm.symmetric_eigenvalues()
                    .iter()
                    .map(|&x| x.max(0.0).sqrt())
                    .collect()
            }
        })
        .collect()
}

/// The partial isometry V of the polar decomposition T = V|T|, via
/// V = T (T* T)^{-1/2} on the support.
///
/// V vanishes on ker(T) and V*V is the support projection of |T|.
/// Singular values below `rank_tol` relative to the largest singular value
/// of the whole operator (with an optional external scale floor) count as
/// kernel; the global scale keeps blocks of rounding noise out of the
/// support.
pub fn polar_partial_isometry(t: &BlockOperator, tols: &Tolerances) -> BlockOperator {
    polar_partial_isometry_scaled(t, tols, 0.0)
}

/// Polar part with an external scale floor: directions with singular value
/// below rank_tol * max(sigma_max, scale_floor) are treated as kernel.
pub fn polar_partial_isometry_scaled(
    t: &BlockOperator,
    tols: &Tolerances,
    scale_floor: f64,
) -> BlockOperator {
    // Hermitian inputs: the polar part is the sign function, computed
    // without Gram squaring so small singular values keep full accuracy
    let scale = t.max_abs_entry().max(1.0);
    if t.is_hermitian(HERMITIAN_TOL * scale) {
        let decomps = eigh(t).expect("checked Hermitian");
        let sigma_max = decomps
            .iter()
            .flat_map(|d| d.eigenvalues.iter().map(|x| x.abs()))
            .fold(0.0f64, f64::max);
        let cut = tols.rank_tol * sigma_max.max(scale_floor);
        let blocks = decomps
            .iter()
            .map(|d| {
                rebuild(d, |x| {
                    if x > cut {
                        Complex64::new(1.0, 0.0)
                    } else if x < -cut {
                        Complex64::new(-1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
            })
            .collect();
        return BlockOperator::new(t.algebra().clone(), blocks).expect("shape preserved");
    }

    let gram = t.map_blocks(|b| b.adjoint() * b);
    let grams = eigh(&gram).expect("T*T is Hermitian by construction");
    let lam_max = grams
        .iter()
        .flat_map(|g| g.eigenvalues.iter().copied())
        .fold(0.0f64, f64::max);
    let sigma_cut = tols.rank_tol * lam_max.max(0.0).sqrt().max(scale_floor);
    let lam_cut = sigma_cut * sigma_cut;
    let blocks = grams
        .iter()
        .zip(t.blocks())
        .map(|(g, b)| {
            let n = b.nrows();
            // (T*T)^{-1/2} restricted to the support
            let mut scaled = g.eigenvectors.clone();
            for j in 0..n {
                let lam = g.eigenvalues[j];
                let f = if lam > lam_cut {
                    Complex64::new(1.0 / lam.sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                for i in 0..n {
                    scaled[(i, j)] *= f;
                }
            }
            let inv_sqrt = &scaled * g.eigenvectors.adjoint();
            b * inv_sqrt
        })
        .collect();
    BlockOperator::new(t.algebra().clone(), blocks).expect("shape preserved")
}

/// Orthonormal basis (as an n x r isometry) of the range of a projection,
/// per block. Eigenvectors with eigenvalue near 1 are selected.
pub fn range_bases(p: &Projection) -> Vec<CMatrix> {
    let decomps = eigh(p.op()).expect("projections are Hermitian");
    decomps
        .into_iter()
        .map(|d| {
            let cols: Vec<usize> = (0..d.eigenvalues.len())
                .filter(|&j| d.eigenvalues[j] > 0.5)
                .collect();
            let n = d.eigenvectors.nrows();
            let mut basis = CMatrix::zeros(n, cols.len());
            for (out_j, &j) in cols.iter().enumerate() {
                for i in 0..n {
                    basis[(i, out_j)] = d.eigenvectors[(i, j)];
                }
            }
            basis
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WeightedBlockAlgebra;
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn diag_op(values: &[f64], weights: &[f64]) -> BlockOperator {
        let alg = WeightedBlockAlgebra::diagonal_model(weights.to_vec()).unwrap();
        BlockOperator::from_diagonal(&alg, values).unwrap()
    }

    #[test]
    fn chi_of_identity_is_identity() {
        let alg = WeightedBlockAlgebra::type_i(3);
        let id = BlockOperator::identity(&alg);
        let p = spectral_projection_nonneg(&id, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(p.op().sub(&id).op_norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn chi_splits_signs() {
        let b = diag_op(&[1.0, -1.0], &[1.0, 1.0]);
        let p = spectral_projection_nonneg(&b, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(p.op().block(0)[(0, 0)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.op().block(1)[(0, 0)].re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn chi_of_zero_is_one() {
        let b = diag_op(&[0.0], &[1.0]);
        let p = spectral_projection_nonneg(&b, &Tolerances::default()).unwrap();
        assert_abs_diff_eq!(p.trace(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn chi_rejects_non_hermitian() {
        let alg = WeightedBlockAlgebra::type_i(2);
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        let b = BlockOperator::new(alg, vec![m]).unwrap();
        assert!(spectral_projection_nonneg(&b, &Tolerances::default()).is_err());
    }

    #[test]
    fn polar_of_positive_invertible_is_identity() {
        let b = diag_op(&[2.0, 0.5, 3.0], &[1.0, 1.0, 1.0]);
        let v = polar_partial_isometry(&b, &Tolerances::default());
        let id = BlockOperator::identity(b.algebra());
        assert_abs_diff_eq!(v.sub(&id).op_norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn polar_of_zero_is_zero() {
        let alg = WeightedBlockAlgebra::type_i(3);
        let z = BlockOperator::zeros(&alg);
        let v = polar_partial_isometry(&z, &Tolerances::default());
        assert_eq!(v.op_norm(), 0.0);
    }

    #[test]
    fn polar_reconstructs() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let alg = WeightedBlockAlgebra::new(vec![4, 3], vec![1.0, 0.5]).unwrap();
        let blocks: Vec<CMatrix> = alg
            .dims()
            .iter()
            .map(|&n| {
                CMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                })
            })
            .collect();
        let t = BlockOperator::new(Arc::clone(&alg), blocks).unwrap();
        // |T| = (T*T)^{1/2}
        let tt = t.adjoint().mul(&t);
        let abs_t = apply_fn(&tt, |x| x.max(0.0).sqrt()).unwrap();
        let v = polar_partial_isometry(&t, &Tolerances::default());
        let resid = v.mul(&abs_t).sub(&t).op_norm();
        assert!(resid <= 1e-9 * t.op_norm().max(1.0), "residual {resid}");
        // V*V is the support projection of |T|
        let vv = v.adjoint().mul(&v);
        let supp = apply_fn(&tt, |x| if x.sqrt() > 1e-8 { 1.0 } else { 0.0 }).unwrap();
        assert!(vv.sub(&supp).op_norm() <= 1e-9);
    }

    #[test]
    fn functional_calculus_matches_scalar() {
        let b = diag_op(&[0.3, -1.2, 2.0], &[1.0, 1.0, 1.0]);
        let e = apply_fn(&b, |x| x.exp()).unwrap();
        for (k, &v) in [0.3f64, -1.2, 2.0].iter().enumerate() {
            assert_abs_diff_eq!(e.block(k)[(0, 0)].re, v.exp(), epsilon = 1e-14);
        }
    }
}
