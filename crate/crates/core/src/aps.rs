//! Index of the boundary-value operator d/dt + B(t) with spectral
//! boundary conditions, computed from the monodromy of the first-order
//! system and principal angles between boundary subspaces.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{BlockOperator, CMatrix, Projection};
use crate::error::{Result, SfError};
use crate::path::OperatorPath;
use crate::spectral::range_bases;

/// Convergence target for the step-halving monodromy check.
pub const MONODROMY_TOL: f64 = 1e-8;

/// Principal-angle thresholds: containment when the cosine exceeds
/// 1 - 1e-9; cosines between the two thresholds are ambiguous.
pub const ANGLE_ACCEPT: f64 = 1e-9;
pub const ANGLE_REJECT: f64 = 1e-6;

/// Boundary-value problem for w' + B(t) w = 0 with w(a) in ker(Q) and
/// w(b) in ran(P).
pub struct BoundaryValueProblem {
    pub path: OperatorPath,
    /// final condition: w(b) must land in ran(P)
    pub p: Projection,
    /// initial condition: w(a) must start in ker(Q)
    pub q: Projection,
    pub steps: usize,
}

fn rk4_step(path: &OperatorPath, t: f64, h: f64, phi: &BlockOperator) -> BlockOperator {
    // Phi' = -B(t) Phi
    let k1 = path.at(t).mul(phi).scale(-1.0);
    let k2 = path
        .at(t + 0.5 * h)
        .mul(&phi.add(&k1.scale(0.5 * h)))
        .scale(-1.0);
    let k3 = path
        .at(t + 0.5 * h)
        .mul(&phi.add(&k2.scale(0.5 * h)))
        .scale(-1.0);
    let k4 = path.at(t + h).mul(&phi.add(&k3.scale(h))).scale(-1.0);
    phi.add(
        &k1.add(&k2.scale(2.0))
            .add(&k3.scale(2.0))
            .add(&k4)
            .scale(h / 6.0),
    )
}

fn integrate_once(path: &OperatorPath, steps: usize) -> BlockOperator {
    let (a, b) = path.interval();
    let h = (b - a) / steps as f64;
    let mut phi = BlockOperator::identity(path.algebra());
    for i in 0..steps {
        let t = a + h * i as f64;
        phi = rk4_step(path, t, h, &phi);
    }
    phi
}

/// Fundamental solution Phi(b) of Phi' = -B(t) Phi, Phi(a) = 1, with
/// automatic step doubling until halving changes the result by less than
/// `MONODROMY_TOL`.
pub fn monodromy(path: &OperatorPath, steps: usize) -> Result<BlockOperator> {
    if steps < 64 {
        return Err(SfError::domain("monodromy needs at least 64 steps"));
    }
    let mut n = steps;
    let mut coarse = integrate_once(path, n);
    for _ in 0..8 {
        let fine = integrate_once(path, 2 * n);
        let diff = fine.sub(&coarse).op_norm();
        if diff < MONODROMY_TOL {
            return Ok(fine);
        }
        coarse = fine;
        n *= 2;
    }
    Err(SfError::Convergence {
        message: format!("monodromy did not stabilize with {n} steps"),
        achieved: f64::NAN,
        requested: MONODROMY_TOL,
    })
}

/// Checkpointed evolution: Phi(t_k) at n_checkpoints+1 evenly spaced
/// parameters, for solution-residual tests.
pub fn monodromy_checkpoints(
    path: &OperatorPath,
    steps: usize,
    n_checkpoints: usize,
) -> Vec<(f64, BlockOperator)> {
    let (a, b) = path.interval();
    let h = (b - a) / steps as f64;
    let every = (steps / n_checkpoints.max(1)).max(1);
    let mut phi = BlockOperator::identity(path.algebra());
    let mut out = vec![(a, phi.clone())];
    for i in 0..steps {
        let t = a + h * i as f64;
        phi = rk4_step(path, t, h, &phi);
        if (i + 1) % every == 0 || i + 1 == steps {
            out.push((t + h, phi.clone()));
        }
    }
    out
}

/// Orthonormalize the columns of a matrix, dropping numerically dependent
/// directions.
fn orthonormalize(m: &CMatrix) -> CMatrix {
    if m.ncols() == 0 {
        return m.clone();
    }
    let qr = m.clone().qr();
    let q = qr.q();
    let r = qr.r();
    let keep: Vec<usize> = (0..r.nrows().min(r.ncols()))
        .filter(|&j| r[(j, j)].norm() > 1e-12)
        .collect();
    let mut out = CMatrix::zeros(m.nrows(), keep.len());
    for (oj, &j) in keep.iter().enumerate() {
        for i in 0..m.nrows() {
            out[(i, oj)] = q[(i, j)];
        }
    }
    out
}

/// dim(span(u1) ∩ span(u2)) via principal angles, for orthonormal inputs.
/// Cosines come from the Gram eigenvalues of the overlap matrix; values
/// inside the dead zone raise a precision error.
fn intersection_dim(u1: &CMatrix, u2: &CMatrix) -> Result<usize> {
    if u1.ncols() == 0 || u2.ncols() == 0 {
        return Ok(0);
    }
    let overlap: DMatrix<Complex64> = u1.adjoint() * u2;
    let g = overlap.adjoint() * &overlap;
    let herm = (&g + g.adjoint()).map(|z| z * Complex64::new(0.5, 0.0));
    let cosines: Vec<f64> = if herm.nrows() == 1 {
        vec![herm[(0, 0)].re.max(0.0).sqrt()]
    } else {
        herm.symmetric_eigenvalues()
            .iter()
            .map(|&x| x.max(0.0).sqrt())
            .collect()
    };
    let mut count = 0usize;
    for s in cosines {
        let gap = 1.0 - s;
        if gap < ANGLE_ACCEPT {
            count += 1;
        } else if gap < ANGLE_REJECT {
            return Err(SfError::precision(format!(
                "principal angle cosine {s} is ambiguous (gap {gap:.3e}); \
                 the boundary subspaces meet non-generically"
            )));
        }
    }
    Ok(count)
}

/// Basis of a subspace after removing a contained subspace: the orthogonal
/// complement of span(small) inside span(big). Both inputs orthonormal.
pub fn complement_within(big: &CMatrix, small: &CMatrix) -> CMatrix {
    if small.ncols() == 0 {
        return big.clone();
    }
    // project the small basis out of the big one, then re-orthonormalize
    let proj = small * (small.adjoint() * big);
    let residual = big - proj;
    orthonormalize(&residual)
}

/// Weighted index of the boundary-value problem: forward solution count
/// minus adjoint solution count.
///
/// The adjoint equation -v' + B(t) v = 0 is solved with the same
/// integrator applied to the time-reversed path, with the boundary
/// subspaces ker(P) (start) and ran(Q) (end).
pub fn aps_index(bvp: &BoundaryValueProblem) -> Result<f64> {
    let phi = monodromy(&bvp.path, bvp.steps)?;

    let (a, b) = bvp.path.interval();
    let reversed = {
        let inner = bvp.path.clone();
        OperatorPath::from_fn(bvp.path.algebra().clone(), (a, b), move |t| {
            inner.at(a + b - t)
        })?
    };
    let psi = monodromy(&reversed, bvp.steps)?;

    let ker_q = range_bases(&bvp.q.complement());
    let ran_p = range_bases(&bvp.p);
    let ker_p = range_bases(&bvp.p.complement());
    let ran_q = range_bases(&bvp.q);

    let weights = bvp.path.algebra().weights();
    let mut index = 0.0;
    for k in 0..bvp.path.algebra().n_blocks() {
        let fwd_image = orthonormalize(&(phi.block(k) * &ker_q[k]));
        let fwd = intersection_dim(&fwd_image, &ran_p[k])?;
        let adj_image = orthonormalize(&(psi.block(k) * &ker_p[k]));
        let adj = intersection_dim(&adj_image, &ran_q[k])?;
        index += weights[k] * (fwd as f64 - adj as f64);
    }
    Ok(index)
}
