//! Instance builders: seeded random operators, projections and paths, and
//! the named grid models the scenarios use.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BlockOperator, CMatrix, Projection, WeightedBlockAlgebra};
use crate::error::Result;
use crate::path::OperatorPath;

/// Haar-like random unitary: QR of a complex Gaussian matrix with the
/// R-diagonal phases absorbed.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| {
        Complex64::new(gaussian(rng), gaussian(rng))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; uniform draws are from the seeded stream, so instances
    // are reproducible across platforms.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_unitary_op(alg: &Arc<WeightedBlockAlgebra>, rng: &mut ChaCha8Rng) -> BlockOperator {
    let blocks = alg.dims().iter().map(|&n| haar_unitary(n, rng)).collect();
    BlockOperator::new(Arc::clone(alg), blocks).expect("shapes match")
}

pub fn random_hermitian(
    alg: &Arc<WeightedBlockAlgebra>,
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> BlockOperator {
    let blocks = alg
        .dims()
        .iter()
        .map(|&n| {
            let g = CMatrix::from_fn(n, n, |_, _| {
                Complex64::new(gaussian(rng), gaussian(rng))
            });
            (&g + g.adjoint()).map(|z| z * Complex64::new(0.5 * scale, 0.0))
        })
        .collect();
    BlockOperator::new(Arc::clone(alg), blocks).expect("shapes match")
}

/// Random projection: a coordinate projection of random rank conjugated by
/// a Haar unitary, per block.
pub fn random_projection(alg: &Arc<WeightedBlockAlgebra>, rng: &mut ChaCha8Rng) -> Projection {
    let ranks: Vec<usize> = alg.dims().iter().map(|&n| rng.gen_range(0..=n)).collect();
    random_projection_with_ranks(alg, &ranks, rng)
}

pub fn random_projection_with_ranks(
    alg: &Arc<WeightedBlockAlgebra>,
    ranks: &[usize],
    rng: &mut ChaCha8Rng,
) -> Projection {
    let blocks = alg
        .dims()
        .iter()
        .zip(ranks)
        .map(|(&n, &r)| {
            let u = haar_unitary(n, rng);
            let mut d = CMatrix::zeros(n, n);
            for i in 0..r.min(n) {
                d[(i, i)] = Complex64::new(1.0, 0.0);
            }
            &u * d * u.adjoint()
        })
        .collect();
    Projection::new_unchecked(BlockOperator::new(Arc::clone(alg), blocks).expect("shapes match"))
}

/// A pair (P, Q) with ||P - Q|| < 1: Q conjugated by exp(i * strength * H)
/// with ||H|| <= 1. Their essential codimension is zero and the straight
/// involution path has trivial kernel.
pub fn nearby_projection_pair(
    alg: &Arc<WeightedBlockAlgebra>,
    rng: &mut ChaCha8Rng,
    strength: f64,
) -> (Projection, Projection) {
    let q = random_projection(alg, rng);
    let h = random_hermitian(alg, rng, 1.0);
    let hn = h.op_norm();
    let h = if hn > 0.0 { h.scale(1.0 / hn) } else { h };
    // exp(i s H) per block via eigendecomposition
    let decomps = crate::spectral::eigh(&h).expect("Hermitian");
    let blocks: Vec<CMatrix> = decomps
        .iter()
        .map(|d| {
            let n = d.eigenvalues.len();
            let mut scaled = d.eigenvectors.clone();
            for j in 0..n {
                let phase = Complex64::from_polar(1.0, strength * d.eigenvalues[j]);
                for i in 0..n {
                    scaled[(i, j)] *= phase;
                }
            }
            &scaled * d.eigenvectors.adjoint()
        })
        .collect();
    let u = BlockOperator::new(Arc::clone(alg), blocks).expect("shapes match");
    let p = Projection::new_unchecked(u.mul(q.op()).mul(&u.adjoint()).hermitize());
    (p, q)
}

/// Random piecewise-linear Hermitian path with `knots` interior knots.
pub fn random_piecewise_path(
    alg: &Arc<WeightedBlockAlgebra>,
    rng: &mut ChaCha8Rng,
    knots: usize,
    scale: f64,
) -> OperatorPath {
    let k = knots.max(2);
    let times: Vec<f64> = (0..k).map(|i| i as f64 / (k - 1) as f64).collect();
    let ops: Vec<BlockOperator> = (0..k).map(|_| random_hermitian(alg, rng, scale)).collect();
    OperatorPath::piecewise_linear(times, ops).expect("valid knots")
}

/// Gauge path D + t(uDu* - D) for a random Hermitian D and Haar unitary u.
/// Endpoints are exactly conjugate.
pub fn random_gauge_path(
    alg: &Arc<WeightedBlockAlgebra>,
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> (OperatorPath, BlockOperator, BlockOperator) {
    let d = random_hermitian(alg, rng, scale);
    let u = random_unitary_op(alg, rng);
    let conj = u.mul(&d).mul(&u.adjoint()).hermitize();
    let b = conj.sub(&d);
    let path = OperatorPath::linear(d.clone(), conj, (0.0, 1.0)).expect("valid");
    (path, d, b)
}

/// Like `random_gauge_path`, with the spectrum of D pushed away from zero
/// so both endpoints are invertible with gap at least `gap`.
pub fn random_invertible_gauge_path(
    alg: &Arc<WeightedBlockAlgebra>,
    rng: &mut ChaCha8Rng,
    scale: f64,
    gap: f64,
) -> (OperatorPath, BlockOperator, BlockOperator) {
    let d0 = random_hermitian(alg, rng, scale);
    let d = crate::spectral::apply_fn(&d0, |x| {
        if x >= 0.0 {
            x + gap
        } else {
            x - gap
        }
    })
    .expect("Hermitian");
    let u = random_unitary_op(alg, rng);
    let conj = u.mul(&d).mul(&u.adjoint()).hermitize();
    let b = conj.sub(&d);
    let path = OperatorPath::linear(d.clone(), conj, (0.0, 1.0)).expect("valid");
    (path, d, b)
}

/// The translated-step model: the clamped-identity profile sampled on a
/// uniform grid with cell weights equal to the step, translated by `shift`
/// as t runs over [0, 1].
pub fn step_translation_path(
    lo: f64,
    hi: f64,
    step: f64,
    shift: f64,
) -> Result<(Arc<WeightedBlockAlgebra>, OperatorPath)> {
    let n = ((hi - lo) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let alg = WeightedBlockAlgebra::diagonal_model(vec![step; n])?;
    let alg2 = Arc::clone(&alg);
    let path = OperatorPath::from_fn(Arc::clone(&alg), (0.0, 1.0), move |t| {
        let vals: Vec<f64> = grid
            .iter()
            .map(|&r| (r + t * shift).clamp(-1.0, 1.0))
            .collect();
        BlockOperator::from_diagonal(&alg2, &vals).expect("diagonal model")
    })?;
    Ok((alg, path.mark_piecewise_c1()))
}

/// Truncated circle model: Fourier modes m in [-mmax, mmax], multiplier
/// m + offset, and the gauge shift by `shift` induced by the basic loop.
/// The path is B_u = B_0 + u * shift * 1.
pub fn circle_model_path(
    mmax: i64,
    offset: f64,
    shift: f64,
) -> Result<(Arc<WeightedBlockAlgebra>, OperatorPath)> {
    let n = (2 * mmax + 1) as usize;
    let alg = WeightedBlockAlgebra::diagonal_model(vec![1.0; n])?;
    let values: Vec<f64> = (-mmax..=mmax).map(|m| m as f64 + offset).collect();
    let b0 = BlockOperator::from_diagonal(&alg, &values)?;
    let b1 = b0.add(&BlockOperator::identity(&alg).scale(shift));
    let path = OperatorPath::linear(b0, b1, (0.0, 1.0))?;
    Ok((alg, path))
}

/// Uniform grid multiplier model D = diag(r_i) with cell weights h,
/// together with the path D + t*theta on [0, 1].
pub fn grid_multiplier_path(
    lo: f64,
    hi: f64,
    step: f64,
    theta: f64,
) -> Result<(Arc<WeightedBlockAlgebra>, OperatorPath, BlockOperator, BlockOperator)> {
    let n = ((hi - lo) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
    let alg = WeightedBlockAlgebra::diagonal_model(vec![step; n])?;
    let d0 = BlockOperator::from_diagonal(&alg, &grid)?;
    let b = BlockOperator::identity(&alg).scale(theta);
    let d1 = d0.add(&b);
    let path = OperatorPath::linear(d0.clone(), d1, (0.0, 1.0))?;
    Ok((alg, path, d0, b))
}

/// Seeded random SU(2) constant.
pub fn random_su2(rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    // Euler-like parametrization keeps the determinant exactly 1.
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    let b = rng.gen_range(0.0..std::f64::consts::PI);
    let c = rng.gen_range(0.0..std::f64::consts::TAU);
    let (cb, sb) = ((b / 2.0).cos(), (b / 2.0).sin());
    let mut m = DMatrix::zeros(2, 2);
    m[(0, 0)] = Complex64::from_polar(cb, (a + c) / 2.0);
    m[(0, 1)] = Complex64::from_polar(sb, (a - c) / 2.0);
    m[(1, 0)] = -Complex64::from_polar(sb, -(a - c) / 2.0);
    m[(1, 1)] = Complex64::from_polar(cb, -(a + c) / 2.0);
    m
}
