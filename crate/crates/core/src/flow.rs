//! Spectral flow of Hermitian operator paths: the partitioned definition
//! built on essential codimension, the eigenvalue-crossing oracle, paths of
//! involutions, and the odd-function formula for projection pairs.

use crate::algebra::{BlockOperator, CMatrix, Projection};
use crate::error::{Result, SfError};
use crate::exec;
use crate::fredholm::essential_codimension;
use crate::path::{FlowDiagnostics, FlowReport, FlowSegment, OddFunctionSpec, OperatorPath};
use crate::spectral::{
    self, min_abs_eigenvalue, range_bases, spectral_projection_nonneg, Tolerances,
};

/// Options for the partitioned flow computation.
#[derive(Debug, Clone)]
pub struct PhillipsOptions {
    /// A subinterval is accepted when one further bisection changes its
    /// contribution by less than this.
    pub stability_tol: f64,
    /// Maximum bisection depth before giving up.
    pub max_depth: usize,
    pub tols: Tolerances,
}

impl Default for PhillipsOptions {
    fn default() -> Self {
        PhillipsOptions {
            stability_tol: 1e-12,
            max_depth: 24,
            tols: Tolerances::default(),
        }
    }
}

struct Node {
    t: f64,
    proj: Projection,
    gap: f64,
}

fn node(path: &OperatorPath, t: f64, tols: &Tolerances) -> Result<Node> {
    let b = path.at(t);
    let gap = min_abs_eigenvalue(&b)?;
    let proj = spectral_projection_nonneg(&b, tols)?;
    Ok(Node { t, proj, gap })
}

/// Spectral flow as the telescoped sum of essential codimensions over an
/// adaptively refined partition.
pub fn spectral_flow_phillips(path: &OperatorPath, opts: &PhillipsOptions) -> Result<FlowReport> {
    let (a, b) = path.interval();
    let mut evals = 2usize;
    let left = node(path, a, &opts.tols)?;
    let right = node(path, b, &opts.tols)?;

    let mut segments: Vec<FlowSegment> = Vec::new();
    let mut min_gap = left.gap.min(right.gap);
    let mut max_depth = 0usize;

    // depth-first refinement, left to right, so segments come out ordered
    let mut stack: Vec<(Node, Node, usize)> = vec![(left, right, 0)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let v = essential_codimension(&lo.proj, &hi.proj, &opts.tols)?;
        let mid = node(path, 0.5 * (lo.t + hi.t), &opts.tols)?;
        evals += 1;
        min_gap = min_gap.min(mid.gap);
        let v_split = essential_codimension(&lo.proj, &mid.proj, &opts.tols)?
            + essential_codimension(&mid.proj, &hi.proj, &opts.tols)?;
        if (v - v_split).abs() < opts.stability_tol {
            max_depth = max_depth.max(depth);
            segments.push(FlowSegment {
                t_lo: lo.t,
                t_hi: hi.t,
                ec: v,
                cumulative: 0.0,
            });
        } else {
            if depth + 1 > opts.max_depth {
                return Err(SfError::Convergence {
                    message: format!(
                        "partition refinement exceeded depth {} on [{}, {}]",
                        opts.max_depth, lo.t, hi.t
                    ),
                    achieved: (v - v_split).abs(),
                    requested: opts.stability_tol,
                });
            }
            // push right first so the left half is processed next
            stack.push((mid.clone_node(), hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }

    let mut cum = 0.0;
    for s in &mut segments {
        cum += s.ec;
        s.cumulative = cum;
    }
    Ok(FlowReport::new(
        "phillips",
        segments,
        FlowDiagnostics {
            min_gap,
            refinement_depth: max_depth,
            evaluations: evals,
            crossings: Vec::new(),
        },
    ))
}

impl Node {
    fn clone_node(&self) -> Node {
        Node {
            t: self.t,
            proj: self.proj.clone(),
            gap: self.gap,
        }
    }
}

/// Crossing localization target width, as a fraction of the interval.
const CROSSING_RESOLUTION: f64 = 1e-6;

/// Eigenvalue-crossing oracle: accumulate tau(chi(B_{t+dt})) - tau(chi(B_t))
/// over a fine grid. Cells carrying flow, and cells where a grid point has
/// an eigenvalue magnitude below 10x kernel_tol, are bisected so crossings
/// are bracketed; localization work is capped by an evaluation budget so
/// large grids stay cheap. The kernel counts as nonnegative spectrum, and
/// the total never depends on the refinement (the traces telescope).
pub fn spectral_flow_crossing_oracle(
    path: &OperatorPath,
    samples: usize,
    tols: &Tolerances,
) -> Result<FlowReport> {
    if samples < 2 {
        return Err(SfError::domain("crossing oracle needs at least 2 samples"));
    }
    let (a, b) = path.interval();
    let ts: Vec<f64> = (0..samples)
        .map(|i| a + (b - a) * i as f64 / (samples - 1) as f64)
        .collect();

    // chi-traces and gaps at all grid points, in parallel but order-stable
    let evals = exec::map_collect(&ts, |&t| {
        spectral::nonneg_trace_and_gap(&path.at(t), tols)
    });
    let mut traces = Vec::with_capacity(samples);
    let mut gaps = Vec::with_capacity(samples);
    let mut min_gap = f64::INFINITY;
    for e in evals {
        let (tr, gap) = e?;
        traces.push(tr);
        gaps.push(gap);
        min_gap = min_gap.min(gap);
    }

    let near_kernel = 10.0 * tols.kernel_tol;
    let resolution = (b - a).max(f64::MIN_POSITIVE) * CROSSING_RESOLUTION;
    let mut budget: usize = 1024.max(8 * samples);

    let mut segments = Vec::new();
    let mut crossings = Vec::new();
    let mut depth_used = 0usize;
    let mut evaluations = samples;
    for i in 0..samples - 1 {
        let (t0, t1) = (ts[i], ts[i + 1]);
        let delta = traces[i + 1] - traces[i];
        if delta != 0.0 || gaps[i] < near_kernel || gaps[i + 1] < near_kernel {
            let (leaves, depth) = refine_cell(
                path,
                t0,
                t1,
                traces[i],
                traces[i + 1],
                resolution,
                tols,
                &mut budget,
            )?;
            evaluations += depth; // at least; exact count folded into budget
            depth_used = depth_used.max(depth);
            for (lo, hi, d) in leaves {
                if d != 0.0 {
                    crossings.push(0.5 * (lo + hi));
                }
                segments.push(FlowSegment {
                    t_lo: lo,
                    t_hi: hi,
                    ec: d,
                    cumulative: 0.0,
                });
            }
        } else {
            segments.push(FlowSegment {
                t_lo: t0,
                t_hi: t1,
                ec: 0.0,
                cumulative: 0.0,
            });
        }
    }
    let mut cum = 0.0;
    for s in &mut segments {
        cum += s.ec;
        s.cumulative = cum;
    }
    Ok(FlowReport::new(
        "crossing-oracle",
        segments,
        FlowDiagnostics {
            min_gap,
            refinement_depth: depth_used,
            evaluations,
            crossings,
        },
    ))
}

#[allow(clippy::too_many_arguments)]
fn refine_cell(
    path: &OperatorPath,
    t0: f64,
    t1: f64,
    tr0: f64,
    tr1: f64,
    resolution: f64,
    tols: &Tolerances,
    budget: &mut usize,
) -> Result<(Vec<(f64, f64, f64)>, usize)> {
    if (tr1 - tr0) == 0.0 || (t1 - t0) <= resolution || *budget == 0 {
        return Ok((vec![(t0, t1, tr1 - tr0)], 0));
    }
    *budget -= 1;
    let tm = 0.5 * (t0 + t1);
    let trm = spectral::nonneg_trace(&path.at(tm), tols)?;
    let (mut left, dl) = refine_cell(path, t0, tm, tr0, trm, resolution, tols, budget)?;
    let (right, dr) = refine_cell(path, tm, t1, trm, tr1, resolution, tols, budget)?;
    left.extend(right);
    Ok((left, dl.max(dr) + 1))
}

/// The straight-line path between the involutions 2Q-1 and 2P-1.
/// Its spectral flow equals the corner index of QP.
pub fn involution_path(p: &Projection, q: &Projection) -> Result<OperatorPath> {
    let one = BlockOperator::identity(p.op().algebra());
    let b0 = q.op().scale(2.0).sub(&one);
    let b1 = p.op().scale(2.0).sub(&one);
    OperatorPath::linear(b0, b1, (0.0, 1.0))
}

/// tau(f(P-Q)) / f(1) for an odd f: the projection-pair flow formula.
pub fn odd_function_flow(p: &Projection, q: &Projection, f: &OddFunctionSpec) -> Result<f64> {
    f.validate()?;
    let d = p.op().sub(q.op());
    let fd = spectral::apply_fn(&d, |x| f.eval(x))?;
    Ok(fd.trace_re() / f.at_one())
}

/// Orthonormal bases of ker(Q) ∩ ran(P) and ker(P) ∩ ran(Q), per block.
#[derive(Debug, Clone)]
pub struct KernelDecomposition {
    /// basis of ker(Q) ∩ ran(P) per block, as n x r isometries
    pub p_side: Vec<CMatrix>,
    /// basis of ker(P) ∩ ran(Q) per block
    pub q_side: Vec<CMatrix>,
}

impl KernelDecomposition {
    pub fn p_side_dims(&self) -> Vec<usize> {
        self.p_side.iter().map(|b| b.ncols()).collect()
    }

    pub fn q_side_dims(&self) -> Vec<usize> {
        self.q_side.iter().map(|b| b.ncols()).collect()
    }
}

/// Decompose ker(B0 + B1) = [ker(Q) ∩ ran(P)] ⊕ [ker(P) ∩ ran(Q)].
pub fn kernel_decomposition(
    p: &Projection,
    q: &Projection,
    tols: &Tolerances,
) -> KernelDecomposition {
    KernelDecomposition {
        p_side: intersection_basis(q, p, tols),
        q_side: intersection_basis(p, q, tols),
    }
}

/// Basis of ker(kill) ∩ ran(keep) per block: null vectors of `kill`
/// restricted to the range of `keep`, from the Gram eigenproblem of the
/// restriction (robust on clustered spectra).
fn intersection_basis(kill: &Projection, keep: &Projection, tols: &Tolerances) -> Vec<CMatrix> {
    let bases = range_bases(keep);
    kill.op()
        .blocks()
        .iter()
        .zip(&bases)
        .map(|(kb, basis)| {
            let r = basis.ncols();
            let n = basis.nrows();
            if r == 0 {
                return CMatrix::zeros(n, 0);
            }
            let restricted: CMatrix = kb * basis;
            let g = restricted.adjoint() * &restricted;
            let herm = (&g + g.adjoint()).map(|z| z * num_complex::Complex64::new(0.5, 0.0));
            let se = nalgebra::linalg::SymmetricEigen::new(herm);
            let lam_max = se.eigenvalues.iter().fold(0.0f64, |m, &x| m.max(x));
            let sigma_cut = tols.rank_tol * lam_max.max(0.0).sqrt().max(1.0);
            // classify against sigma^2, floored at the Gram noise level
            let lam_cut = (sigma_cut * sigma_cut).max(64.0 * f64::EPSILON * lam_max.max(0.0));
            let null_cols: Vec<usize> = (0..r).filter(|&j| se.eigenvalues[j] <= lam_cut).collect();
            let mut coeff = CMatrix::zeros(r, null_cols.len());
            for (out_j, &j) in null_cols.iter().enumerate() {
                for c in 0..r {
                    coeff[(c, out_j)] = se.eigenvectors[(c, j)];
                }
            }
            basis * coeff
        })
        .collect()
}

/// Residual of the intertwining identity U B(t) = B(1-t) U for the polar
/// part U of B0 + B1, evaluated on a parameter grid.
#[derive(Debug, Clone)]
pub struct IntertwinerReport {
    pub max_residual: f64,
    pub grid_points: usize,
}

pub fn intertwiner_check(p: &Projection, q: &Projection, tols: &Tolerances) -> Result<IntertwinerReport> {
    let one = BlockOperator::identity(p.op().algebra());
    let b0 = q.op().scale(2.0).sub(&one);
    let b1 = p.op().scale(2.0).sub(&one);
    let sum = b0.add(&b1);
    // the involutions have norm one, so singular values of B0+B1 at
    // rounding scale are kernel, not support
    let u = spectral::polar_partial_isometry_scaled(&sum, tols, 1.0);
    let path = involution_path(p, q)?;
    let grid = 21usize;
    let mut max_res: f64 = 0.0;
    for i in 0..grid {
        let t = i as f64 / (grid - 1) as f64;
        let lhs = u.mul(&path.at(t));
        let rhs = path.at(1.0 - t).mul(&u);
        max_res = max_res.max(lhs.sub(&rhs).op_norm());
    }
    Ok(IntertwinerReport {
        max_residual: max_res,
        grid_points: grid,
    })
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

    #[test]
    fn constant_path_has_zero_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let alg = WeightedBlockAlgebra::new(vec![3], vec![0.5]).unwrap();
        let b = models::random_hermitian(&alg, &mut rng, 1.0);
        let path = OperatorPath::constant(b, (0.0, 1.0)).unwrap();
        let r = spectral_flow_phillips(&path, &PhillipsOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        let o = spectral_flow_crossing_oracle(&path, 16, &tols()).unwrap();
        assert_eq!(o.value, 0.0);
    }

    #[test]
    fn scalar_crossing_counts_weight() {
        // B(t) = t - 1/2 on a single 1x1 block with weight lambda
        let lam = std::f64::consts::SQRT_2;
        let alg = WeightedBlockAlgebra::diagonal_model(vec![lam]).unwrap();
        let a2 = Arc::clone(&alg);
        let path = OperatorPath::from_fn(alg, (0.0, 1.0), move |t| {
            BlockOperator::from_diagonal(&a2, &[t - 0.5]).unwrap()
        })
        .unwrap();
        let r = spectral_flow_phillips(&path, &PhillipsOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, lam, epsilon = 1e-12);
        let o = spectral_flow_crossing_oracle(&path, 64, &tols()).unwrap();
        assert_abs_diff_eq!(o.value, lam, epsilon = 1e-12);
        // the crossing is bracketed near t = 1/2
        assert!(o
            .diagnostics
            .crossings
            .iter()
            .all(|c| (c - 0.5).abs() < 1e-6));
    }

    #[test]
    fn two_block_up_down_crossings() {
        // diag(t - 1/4, 3/4 - t) with weights (1, 2): +1 at t=1/4, -2 at t=3/4
        let alg = WeightedBlockAlgebra::diagonal_model(vec![1.0, 2.0]).unwrap();
        let a2 = Arc::clone(&alg);
        let path = OperatorPath::from_fn(alg, (0.0, 1.0), move |t| {
            BlockOperator::from_diagonal(&a2, &[t - 0.25, 0.75 - t]).unwrap()
        })
        .unwrap();
        let o = spectral_flow_crossing_oracle(&path, 64, &tols()).unwrap();
        assert_abs_diff_eq!(o.value, -1.0, epsilon = 1e-12);
        let r = spectral_flow_phillips(&path, &PhillipsOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn oracle_matches_phillips_on_random_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let alg = WeightedBlockAlgebra::new(vec![4, 2], vec![1.0, 0.5]).unwrap();
            let path = models::random_piecewise_path(&alg, &mut rng, 4, 1.0);
            let r = spectral_flow_phillips(&path, &PhillipsOptions::default()).unwrap();
            let o = spectral_flow_crossing_oracle(&path, 100, &tols()).unwrap();
            assert_abs_diff_eq!(r.value, o.value, epsilon = 1e-9);
            // both equal the chi-trace difference of the endpoints
            let expect = spectral::nonneg_trace(&path.at(1.0), &tols()).unwrap()
                - spectral::nonneg_trace(&path.at(0.0), &tols()).unwrap();
            assert_abs_diff_eq!(r.value, expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn involution_flow_is_trace_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let alg = WeightedBlockAlgebra::new(vec![3, 2], vec![1.0, 2.0]).unwrap();
        let p = models::random_projection(&alg, &mut rng);
        let q = models::random_projection(&alg, &mut rng);
        let path = involution_path(&p, &q).unwrap();
        let o = spectral_flow_crossing_oracle(&path, 128, &tols()).unwrap();
        assert_abs_diff_eq!(o.value, p.trace() - q.trace(), epsilon = 1e-9);
        // crossings happen only at t = 1/2
        for c in &o.diagnostics.crossings {
            assert!((c - 0.5).abs() < 1e-6, "crossing at {c}");
        }
    }

    #[test]
    fn involution_complementary_pair() {
        // Q = 1 - P on a 2x2 block: B0 + B1 = 0, flow = tau(P) - tau(Q)
        let alg = WeightedBlockAlgebra::new(vec![2], vec![1.0]).unwrap();
        let mut pm = CMatrix::zeros(2, 2);
        pm[(0, 0)] = Complex64::new(1.0, 0.0);
        let p = Projection::try_new(BlockOperator::new(Arc::clone(&alg), vec![pm]).unwrap()).unwrap();
        let q = p.complement();
        let path = involution_path(&p, &q).unwrap();
        let o = spectral_flow_crossing_oracle(&path, 64, &tols()).unwrap();
        assert_abs_diff_eq!(o.value, p.trace() - q.trace(), epsilon = 1e-12);
        let kd = kernel_decomposition(&p, &q, &tols());
        // bases of ran(P) and ran(Q): together they span everything
        assert_eq!(kd.p_side_dims(), vec![1]);
        assert_eq!(kd.q_side_dims(), vec![1]);
    }

    #[test]
    fn odd_function_flow_agrees_across_functions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alg = WeightedBlockAlgebra::new(vec![4, 3], vec![0.5, 1.0]).unwrap();
        let p = models::random_projection(&alg, &mut rng);
        let q = models::random_projection(&alg, &mut rng);
        let v1 = odd_function_flow(&p, &q, &OddFunctionSpec::Identity).unwrap();
        let v3 = odd_function_flow(&p, &q, &OddFunctionSpec::Cube).unwrap();
        let v5 = odd_function_flow(&p, &q, &OddFunctionSpec::Fifth).unwrap();
        let d = p.op().sub(q.op());
        assert_abs_diff_eq!(v1, d.trace_re(), epsilon = 1e-12);
        assert_abs_diff_eq!(v1, v3, epsilon = 1e-10);
        assert_abs_diff_eq!(v1, v5, epsilon = 1e-10);
    }

    #[test]
    fn odd_function_flow_zero_for_equal_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let alg = WeightedBlockAlgebra::new(vec![4], vec![1.5]).unwrap();
        let p = models::random_projection(&alg, &mut rng);
        for f in [
            OddFunctionSpec::Identity,
            OddFunctionSpec::Cube,
            OddFunctionSpec::Fifth,
            OddFunctionSpec::SinHalfPi,
        ] {
            assert_abs_diff_eq!(odd_function_flow(&p, &p, &f).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn kernel_decomposition_matches_direct_nullspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let alg = WeightedBlockAlgebra::new(vec![4, 3], vec![1.0, 1.0]).unwrap();
        // ranks chosen so intersections are generically nontrivial
        let p = models::random_projection_with_ranks(&alg, &[3, 2], &mut rng);
        let q = models::random_projection_with_ranks(&alg, &[1, 1], &mut rng);
        let kd = kernel_decomposition(&p, &q, &tols());
        let one = BlockOperator::identity(&alg);
        let sum = q.op().scale(2.0).sub(&one).add(&p.op().scale(2.0).sub(&one));
        // dim ker(B0+B1) per block by rank deficiency
        for (k, d) in spectral::eigh(&sum).unwrap().iter().enumerate() {
            let null_dim = d.eigenvalues.iter().filter(|x| x.abs() < 1e-8).count();
            assert_eq!(
                null_dim,
                kd.p_side[k].ncols() + kd.q_side[k].ncols(),
                "block {k}"
            );
        }
    }

    #[test]
    fn kernel_decomposition_trivial_for_identity() {
        let alg = WeightedBlockAlgebra::type_i(3);
        let p = Projection::identity(&alg);
        let kd = kernel_decomposition(&p, &p, &tols());
        assert_eq!(kd.p_side_dims(), vec![0]);
        assert_eq!(kd.q_side_dims(), vec![0]);
    }

    #[test]
    fn intertwiner_residual_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let alg = WeightedBlockAlgebra::new(vec![4, 2], vec![1.0, 0.5]).unwrap();
        let p = models::random_projection(&alg, &mut rng);
        let q = models::random_projection(&alg, &mut rng);
        let rep = intertwiner_check(&p, &q, &tols()).unwrap();
        assert!(rep.max_residual <= 1e-9, "residual {}", rep.max_residual);
    }

    #[test]
    fn intertwiner_equal_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let alg = WeightedBlockAlgebra::new(vec![3], vec![1.0]).unwrap();
        let p = models::random_projection_with_ranks(&alg, &[2], &mut rng);
        let rep = intertwiner_check(&p, &p, &tols()).unwrap();
        assert!(rep.max_residual <= 1e-10);
    }

    #[test]
    fn trivial_kernel_pairs_have_zero_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alg = WeightedBlockAlgebra::new(vec![4, 3], vec![1.0, 0.5]).unwrap();
        for _ in 0..5 {
            let (p, q) = models::nearby_projection_pair(&alg, &mut rng, 0.5);
            let path = involution_path(&p, &q).unwrap();
            let r = spectral_flow_phillips(&path, &PhillipsOptions::default()).unwrap();
            assert_eq!(r.value, 0.0);
        }
    }

    #[test]
    fn homotopy_invariance_fixed_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let alg = WeightedBlockAlgebra::new(vec![4], vec![1.0]).unwrap();
        let b0 = models::random_hermitian(&alg, &mut rng, 1.0);
        let b1 = models::random_hermitian(&alg, &mut rng, 1.0);
        let mid = models::random_hermitian(&alg, &mut rng, 1.0);
        // straight path vs a detour through `mid`
        let straight = OperatorPath::linear(b0.clone(), b1.clone(), (0.0, 1.0)).unwrap();
        let detour = OperatorPath::piecewise_linear(
            vec![0.0, 0.5, 1.0],
            vec![b0.clone(), mid, b1.clone()],
        )
        .unwrap();
        let v1 = spectral_flow_phillips(&straight, &PhillipsOptions::default())
            .unwrap()
            .value;
        let v2 = spectral_flow_phillips(&detour, &PhillipsOptions::default())
            .unwrap()
            .value;
        assert_abs_diff_eq!(v1, v2, epsilon = 1e-9);
    }

    #[test]
    fn concatenation_and_reparametrization() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let alg = WeightedBlockAlgebra::new(vec![3], vec![2.0]).unwrap();
        let b0 = models::random_hermitian(&alg, &mut rng, 1.0);
        let b1 = models::random_hermitian(&alg, &mut rng, 1.0);
        let b2 = models::random_hermitian(&alg, &mut rng, 1.0);
        let left = OperatorPath::linear(b0.clone(), b1.clone(), (0.0, 1.0)).unwrap();
        let right = OperatorPath::linear(b1, b2.clone(), (1.0, 2.0)).unwrap();
        let joined = left.concat(&right).unwrap();
        let opts = PhillipsOptions::default();
        let vj = spectral_flow_phillips(&joined, &opts).unwrap().value;
        let vl = spectral_flow_phillips(&left, &opts).unwrap().value;
        let vr = spectral_flow_phillips(&right, &opts).unwrap().value;
        assert_abs_diff_eq!(vj, vl + vr, epsilon = 1e-10);
        let rep = joined.reparametrize((-1.0, 1.0)).unwrap();
        let vrep = spectral_flow_phillips(&rep, &opts).unwrap().value;
        assert_abs_diff_eq!(vrep, vj, epsilon = 1e-10);
    }
}
