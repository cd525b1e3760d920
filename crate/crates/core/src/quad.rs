//! Adaptive Gauss-Kronrod quadrature (7-15 pair) with worst-interval
//! refinement. Node batches are evaluated in parallel; interval sums are
//! accumulated in a fixed order so results do not depend on thread count.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SfError};
use crate::exec;

// 15-point Kronrod abscissae on [0, 1] side (symmetric), with the embedded
// 7-point Gauss rule at the odd indices.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureOptions {
    /// Absolute tolerance on the total integral.
    pub abs_tol: f64,
    /// Maximum number of subdivisions.
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-9,
            max_subdivisions: 1 << 14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub nodes_used: usize,
    /// Interval midpoints in ascending order, for reporting.
    pub node_points: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let xs: Vec<f64> = (0..15)
        .map(|i| {
            if i < 7 {
                c - h * XGK[i]
            } else if i == 7 {
                c
            } else {
                c + h * XGK[14 - i]
            }
        })
        .collect();
    let ys = exec::map_collect(&xs, |&x| f(x));
    let mut kron = WGK[7] * ys[7];
    let mut gauss = WG[3] * ys[7];
    for i in 0..7 {
        let pair = ys[i] + ys[14 - i];
        kron += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kron * h;
    // conservative estimate: the Gauss/Kronrod discrepancy itself
    let err = ((kron - gauss) * h).abs();
    Panel {
        a,
        b,
        value,
        error: err,
    }
}

/// Integrate `f` over [a, b] to the requested absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64 + Sync>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    integrate_with_breakpoints(f, &[a, b], opts)
}

/// Integrate over [pts[0], pts.last()] with an initial panel between each
/// pair of breakpoints. Needed when features (a Gaussian bump on a huge
/// domain) would be invisible to a single coarse panel.
pub fn integrate_with_breakpoints<F: Fn(f64) -> f64 + Sync>(
    f: F,
    pts: &[f64],
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    if pts.len() < 2 || pts.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(SfError::structural(
            "breakpoints must be strictly increasing with at least two entries",
        ));
    }
    let mut panels: Vec<Panel> = pts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut nodes = 15usize * panels.len();
    loop {
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if total_err <= opts.abs_tol {
            break;
        }
        if panels.len() >= opts.max_subdivisions {
            return Err(SfError::Convergence {
                message: "quadrature did not reach tolerance".into(),
                achieved: total_err,
                requested: opts.abs_tol,
            });
        }
        // split the worst panel
        let (worst_idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .expect("nonempty");
        let worst = panels.swap_remove(worst_idx);
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            return Err(SfError::Convergence {
                message: "interval too small to split further".into(),
                achieved: total_err,
                requested: opts.abs_tol,
            });
        }
        panels.push(gk15(&f, worst.a, m));
        panels.push(gk15(&f, m, worst.b));
        nodes += 30;
    }
    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let value = panels.iter().map(|p| p.value).sum();
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(QuadratureResult {
        value,
        error_estimate,
        nodes_used: nodes,
        node_points: panels.iter().map(|p| 0.5 * (p.a + p.b)).collect(),
    })
}

/// Integrate over [a, +inf) for integrands with fast decay, by mapping
/// t = a + s/(1-s) onto s in [0, 1).
pub fn integrate_to_infinity<F: Fn(f64) -> f64 + Sync>(
    f: F,
    a: f64,
    opts: &QuadratureOptions,
) -> Result<QuadratureResult> {
    let g = move |s: f64| {
        let t = a + s / (1.0 - s);
        let jac = 1.0 / ((1.0 - s) * (1.0 - s));
        f(t) * jac
    };
    // stop just short of 1 to avoid the singular jacobian; the integrand
    // must decay fast enough that the tail beyond is negligible
    integrate(g, 0.0, 1.0 - 1e-12, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x * x - 2.0 * x + 1.0, 0.0, 2.0, &QuadratureOptions::default())
            .unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn gaussian_integral() {
        let r = integrate(|x| (-x * x).exp(), -8.0, 8.0, &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(r.value, std::f64::consts::PI.sqrt(), epsilon = 1e-10);
    }

    #[test]
    fn lorentzian_tail_to_infinity() {
        let r = integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, &QuadratureOptions::default())
            .unwrap();
        assert_abs_diff_eq!(r.value, std::f64::consts::FRAC_PI_2, epsilon = 1e-8);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        let r = integrate(|x| (10.0 * x).sin(), 0.0, 1.0, &QuadratureOptions::default()).unwrap();
        let expect = (1.0 - (10.0f64).cos()) / 10.0;
        assert_abs_diff_eq!(r.value, expect, epsilon = 1e-10);
    }

    #[test]
    fn impossible_tolerance_errors() {
        let opts = QuadratureOptions {
            abs_tol: 1e-30,
            max_subdivisions: 8,
        };
        let res = integrate(|x| (x.abs()).sqrt().sin() + x.cos(), 0.0, 10.0, &opts);
        assert!(matches!(res, Err(SfError::Convergence { .. })));
    }
}
