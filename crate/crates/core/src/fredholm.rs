//! Index theory in the skew corner P*N*Q: weighted kernel dimensions,
//! the corner index, and essential codimension of projection pairs.

use crate::algebra::{BlockOperator, CMatrix, Projection};
use crate::error::{Result, SfError};
use crate::spectral::{range_bases, Tolerances};

/// Corner membership tolerance: T must equal PTQ to within this times
/// max(1, ||T||).
pub const CORNER_TOL: f64 = 1e-10;

/// Weighted dimension of ker(T) restricted to ran(Q):
/// sum_k lambda_k * dim { v in ran(Q_k) : T_k v = 0 }.
///
/// The rank cutoff is relative to the largest singular value across all
/// restricted blocks, so blocks consisting of rounding noise do not get
/// counted as full rank.
pub fn kernel_dim_in_range(t: &BlockOperator, q: &Projection, tols: &Tolerances) -> f64 {
    let bases = range_bases(q);
    let restricted: Vec<Option<Vec<f64>>> = t
        .blocks()
        .iter()
        .zip(&bases)
        .map(|(tb, basis)| {
            if basis.ncols() == 0 {
                None
            } else {
                let m: CMatrix = tb * basis;
                Some(m.singular_values().iter().copied().collect())
            }
        })
        .collect();
    let global_max = restricted
        .iter()
        .flatten()
        .flatten()
        .copied()
        .fold(0.0f64, f64::max);
    // values exactly at the threshold are classified as zero
    let cut = tols.rank_tol * global_max;
    let mut acc = 0.0;
    for ((svs, basis), &w) in restricted.iter().zip(&bases).zip(t.algebra().weights()) {
        if let Some(svs) = svs {
            let rank = svs.iter().filter(|&&s| s > cut).count();
            acc += w * (basis.ncols() - rank) as f64;
        }
    }
    acc
}

/// The corner index of T in P*N*Q:
/// tau[ker_Q(T)] - tau[ker_P(T*)].
///
/// T must already lie in the corner, i.e. T = P T Q.
pub fn skew_corner_index(
    t: &BlockOperator,
    p: &Projection,
    q: &Projection,
    tols: &Tolerances,
) -> Result<f64> {
    let compressed = p.op().mul(t).mul(q.op());
    let dev = compressed.sub(t).op_norm();
    if dev > CORNER_TOL * t.op_norm().max(1.0) {
        return Err(SfError::domain(format!(
            "operator is not in the P·Q corner: ||PTQ - T|| = {dev:.3e}"
        )));
    }
    let ker_q = kernel_dim_in_range(t, q, tols);
    let ker_p = kernel_dim_in_range(&t.adjoint(), p, tols);
    Ok(ker_q - ker_p)
}

/// Essential codimension ec(P, Q): the corner index of PQ.
///
/// In the finite model this always equals tau(Q) - tau(P) by rank-nullity;
/// the value is assembled from per-block integer rank differences times the
/// weights, so equalities like ec(P,Q) = -ec(Q,P) hold to the last bit.
pub fn essential_codimension(p: &Projection, q: &Projection, tols: &Tolerances) -> Result<f64> {
    let pq = p.op().mul(q.op());
    skew_corner_index(&pq, p, q, tols)
}

/// ec with default tolerances.
pub fn ec(p: &Projection, q: &Projection) -> Result<f64> {
    essential_codimension(p, q, &Tolerances::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WeightedBlockAlgebra;
    use crate::models;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn tols() -> Tolerances {
        Tolerances::default()
    }

    /// Independent null-space dimension oracle: Gaussian row reduction
    /// with partial pivoting on the compressed matrix.
    fn row_reduction_nullity(m: &CMatrix, tol: f64) -> usize {
        let mut a = m.clone();
        let (rows, cols) = (a.nrows(), a.ncols());
        let mut rank = 0;
        let mut row = 0;
        for col in 0..cols {
            // find pivot
            let mut piv = row;
            let mut best = 0.0;
            for r in row..rows {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= tol {
                continue;
            }
            a.swap_rows(row, piv);
            let pivot = a[(row, col)];
            for r in 0..rows {
                if r != row {
                    let factor = a[(r, col)] / pivot;
                    for c in col..cols {
                        let sub = factor * a[(row, c)];
                        a[(r, c)] -= sub;
                    }
                }
            }
            rank += 1;
            row += 1;
            if row == rows {
                break;
            }
        }
        cols - rank
    }

    #[test]
    fn zero_corner_operator_index_is_trace_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alg = WeightedBlockAlgebra::new(vec![3, 4], vec![1.0, 0.5]).unwrap();
        let p = models::random_projection(&alg, &mut rng);
        let q = models::random_projection(&alg, &mut rng);
        let z = BlockOperator::zeros(&alg);
        let idx = skew_corner_index(&z, &p, &q, &tols()).unwrap();
        assert_abs_diff_eq!(idx, q.trace() - p.trace(), epsilon = 1e-12);
    }

    #[test]
    fn unitary_on_range_has_index_zero() {
        // P = Q = identity, T unitary
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alg = WeightedBlockAlgebra::new(vec![4], vec![std::f64::consts::SQRT_2]).unwrap();
        let u = models::random_unitary_op(&alg, &mut rng);
        let p = Projection::identity(&alg);
        let idx = skew_corner_index(&u, &p, &p, &tols()).unwrap();
        assert_eq!(idx, 0.0);
    }

    #[test]
    fn rejects_operator_outside_corner() {
        let alg = WeightedBlockAlgebra::type_i(2);
        let p = Projection::zero(&alg);
        let q = Projection::zero(&alg);
        let id = BlockOperator::identity(&alg);
        assert!(skew_corner_index(&id, &p, &q, &tols()).is_err());
    }

    #[test]
    fn corner_index_matches_row_reduction_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..20 {
            let alg = WeightedBlockAlgebra::new(vec![5, 3], vec![1.0, 2.0]).unwrap();
            let p = models::random_projection(&alg, &mut rng);
            let q = models::random_projection(&alg, &mut rng);
            let t = p.op().mul(q.op());
            let idx = skew_corner_index(&t, &p, &q, &tols()).unwrap();

            // oracle: per block, nullity of T restricted to ran Q and of T*
            // restricted to ran P, via explicit row reduction
            let mut expect = 0.0;
            let qb = range_bases(&q);
            let pb = range_bases(&p);
            for k in 0..alg.n_blocks() {
                let w = alg.weights()[k];
                let tq = t.block(k) * &qb[k];
                let tp = t.block(k).adjoint() * &pb[k];
                let null_q = row_reduction_nullity(&tq, 1e-9);
                let null_p = row_reduction_nullity(&tp, 1e-9);
                expect += w * (null_q as f64 - null_p as f64);
            }
            assert_abs_diff_eq!(idx, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn ec_of_equal_projections_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = WeightedBlockAlgebra::new(vec![4], vec![0.7]).unwrap();
        let p = models::random_projection(&alg, &mut rng);
        assert_eq!(ec(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn ec_of_nested_projections_is_codimension() {
        // P <= Q built from coordinate projections on one block
        let alg = WeightedBlockAlgebra::type_i(5);
        let mut pm = CMatrix::zeros(5, 5);
        let mut qm = CMatrix::zeros(5, 5);
        for i in 0..2 {
            pm[(i, i)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..4 {
            qm[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let p = Projection::try_new(BlockOperator::new(Arc::clone(&alg), vec![pm]).unwrap()).unwrap();
        let q = Projection::try_new(BlockOperator::new(Arc::clone(&alg), vec![qm]).unwrap()).unwrap();
        let v = ec(&p, &q).unwrap();
        assert_abs_diff_eq!(v, q.trace() - p.trace(), epsilon = 1e-12);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ec_random_pairs_equal_trace_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let alg =
                WeightedBlockAlgebra::new(vec![3, 2, 4], vec![1.0, 0.5, std::f64::consts::SQRT_2])
                    .unwrap();
            let p = models::random_projection(&alg, &mut rng);
            let q = models::random_projection(&alg, &mut rng);
            let v = essential_codimension(&p, &q, &tols()).unwrap();
            assert_abs_diff_eq!(v, q.trace() - p.trace(), epsilon = 1e-10);
        }
    }

    #[test]
    fn ec_antisymmetry_and_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let alg = WeightedBlockAlgebra::new(vec![4, 3], vec![0.5, 1.0]).unwrap();
        for _ in 0..10 {
            let p1 = models::random_projection(&alg, &mut rng);
            let p2 = models::random_projection(&alg, &mut rng);
            let p3 = models::random_projection(&alg, &mut rng);
            let e12 = ec(&p1, &p2).unwrap();
            let e21 = ec(&p2, &p1).unwrap();
            let e23 = ec(&p2, &p3).unwrap();
            let e13 = ec(&p1, &p3).unwrap();
            assert_abs_diff_eq!(e12 + e21, 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(e13, e12 + e23, epsilon = 1e-10);
        }
    }

    #[test]
    fn close_projections_have_zero_ec() {
        // ||P - Q|| < 1 forces equal block ranks, hence ec = 0
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let alg = WeightedBlockAlgebra::new(vec![4, 2], vec![1.3, 0.25]).unwrap();
            let (p, q) = models::nearby_projection_pair(&alg, &mut rng, 0.4);
            assert!(p.op().sub(q.op()).op_norm() < 1.0);
            assert_eq!(ec(&p, &q).unwrap(), 0.0);
        }
    }

    #[test]
    fn index_invariant_under_small_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let alg = WeightedBlockAlgebra::new(vec![5], vec![1.0]).unwrap();
        let p = models::random_projection_with_ranks(&alg, &[3], &mut rng);
        let q = models::random_projection_with_ranks(&alg, &[4], &mut rng);
        let t = p.op().mul(q.op());
        let idx = skew_corner_index(&t, &p, &q, &tols()).unwrap();

        // delta = smallest nonzero singular value of T / 2
        let svs = crate::spectral::singular_values(&t);
        let min_nonzero = svs
            .iter()
            .flatten()
            .copied()
            .filter(|s| *s > 1e-8)
            .fold(f64::INFINITY, f64::min);
        let delta = min_nonzero / 2.0;

        // perturb within the corner by a scaled compression of a random op
        let r = models::random_hermitian(&alg, &mut rng, 1.0);
        let pert = p.op().mul(&r).mul(q.op());
        let pert_norm = pert.op_norm();
        if pert_norm > 0.0 {
            let s = t.add(&pert.scale(0.9 * delta / pert_norm));
            let idx2 = skew_corner_index(&s, &p, &q, &tols()).unwrap();
            assert_eq!(idx, idx2);
        }
    }
}
