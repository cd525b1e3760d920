//! Almost periodic pseudodifferential symbols at desk scale: separable
//! x/zeta terms, the Dixmier-trace density over the sphere, the sublevel
//! counting check, and the Weyl trace for integrable orders.

use std::sync::Arc;

use crate::error::{Result, SfError};
use crate::exec;
use crate::quad::{self, QuadratureOptions};
use crate::trig::TrigPolynomial;

pub type ZetaFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// One separable term a(x, zeta) = x_part(x) * zeta_part(zeta); the x part
/// is a scalar trig polynomial so its Bohr mean is exact.
pub struct SymbolTerm {
    pub x_part: TrigPolynomial,
    pub zeta_part: ZetaFn,
}

/// Symbol of an almost periodic operator of the given order.
pub struct ApSymbol {
    pub ambient: usize,
    pub order: f64,
    pub terms: Vec<SymbolTerm>,
    /// The -n homogeneous principal part, as a callable on R^n \ {0}.
    pub principal: Option<ZetaFn>,
    /// Decay bound |a(zeta)| <= c (1 + |zeta|)^m for the Weyl trace tail.
    pub bound: Option<(f64, f64)>,
}

impl ApSymbol {
    /// x-independent symbol from a callable in zeta.
    pub fn multiplier(ambient: usize, order: f64, f: ZetaFn) -> Self {
        ApSymbol {
            ambient,
            order,
            terms: vec![SymbolTerm {
                x_part: TrigPolynomial::one(ambient, 1),
                zeta_part: f,
            }],
            principal: None,
            bound: None,
        }
    }

    pub fn with_principal(mut self, p: ZetaFn) -> Self {
        self.principal = Some(p);
        self
    }

    pub fn with_bound(mut self, c: f64, m: f64) -> Self {
        self.bound = Some((c, m));
        self
    }
}

/// Fixed quadrature over the unit sphere S^{n-1}: two points for n = 1,
/// Gauss-Legendre x uniform azimuth for n = 3.
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

pub fn sphere_rule(n: usize) -> Result<SphereRule> {
    match n {
        1 => Ok(SphereRule {
            points: vec![vec![1.0], vec![-1.0]],
            weights: vec![1.0, 1.0],
        }),
        3 => {
            let m_polar = 48;
            let m_azimuth = 96;
            let (nodes, wts) = gauss_legendre(m_polar);
            let mut points = Vec::with_capacity(m_polar * m_azimuth);
            let mut weights = Vec::with_capacity(m_polar * m_azimuth);
            for (u, wu) in nodes.iter().zip(&wts) {
                let s = (1.0 - u * u).sqrt();
                for k in 0..m_azimuth {
                    let phi = std::f64::consts::TAU * k as f64 / m_azimuth as f64;
                    points.push(vec![s * phi.cos(), s * phi.sin(), *u]);
                    weights.push(wu * std::f64::consts::TAU / m_azimuth as f64);
                }
            }
            Ok(SphereRule { points, weights })
        }
        _ => Err(SfError::domain(format!(
            "sphere quadrature implemented for n = 1 and n = 3, not {n}"
        ))),
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            // P_m(x) and P'_m(x) by recurrence
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0f64, x);
        for k in 2..=m {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// Verify a_{-n}(r zeta) = r^{-n} a_{-n}(zeta) on sample directions.
fn check_homogeneity(p: &ZetaFn, n: usize, rule: &SphereRule) -> Result<()> {
    for (idx, pt) in rule.points.iter().enumerate().step_by(rule.points.len() / 8 + 1) {
        let base = p(pt);
        for r in [0.5f64, 2.0] {
            let scaled_pt: Vec<f64> = pt.iter().map(|x| x * r).collect();
            let scaled = p(&scaled_pt);
            let expect = base * r.powi(-(n as i32));
            if (scaled - expect).abs() > 1e-9 * expect.abs().max(1e-9) {
                return Err(SfError::domain(format!(
                    "principal part is not homogeneous of degree -{n} at sample {idx}"
                )));
            }
        }
    }
    Ok(())
}

/// Dixmier-trace density: (1/n) * BohrMean_x of the sphere integral of the
/// -n homogeneous principal part.
pub fn dixmier_density(a: &ApSymbol, n: usize) -> Result<f64> {
    if a.ambient != n {
        return Err(SfError::structural("ambient dimension mismatch"));
    }
    let principal = a
        .principal
        .as_ref()
        .ok_or_else(|| SfError::domain("symbol carries no principal part"))?;
    let rule = sphere_rule(n)?;
    check_homogeneity(principal, n, &rule)?;
    let sphere_integral: f64 = {
        let vals = exec::map_collect(&rule.points, |p| principal(p));
        vals.iter()
            .zip(&rule.weights)
            .map(|(v, w)| v * w)
            .sum()
    };
    // the principal callable carries the zeta profile; any x-dependence
    // sits in the (single) separable term and enters through its exact
    // Bohr mean
    let x_scale = match a.terms.len() {
        0 | 1 => {
            let m = a
                .terms
                .first()
                .map(|t| t.x_part.bohr_mean()[(0, 0)])
                .unwrap_or_else(|| num_complex::Complex64::new(1.0, 0.0));
            if m.im.abs() > 1e-10 {
                return Err(SfError::domain("x-profile must have a real Bohr mean"));
            }
            m.re
        }
        _ => {
            return Err(SfError::domain(
                "density of a multi-term symbol: pass one term per principal part and sum",
            ));
        }
    };
    Ok(x_scale * sphere_integral / n as f64)
}

/// Lebesgue volume of the sublevel set { zeta : a(zeta) > 1/lambda } for a
/// radially decreasing x-independent symbol, by bisection on the radius.
pub fn sublevel_volume_radial(
    a: &ZetaFn,
    n: usize,
    lambda: f64,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(SfError::domain("lambda must be positive"));
    }
    let thr = 1.0 / lambda;
    let dir: Vec<f64> = {
        let mut d = vec![0.0; n];
        d[0] = 1.0;
        d
    };
    let at = |r: f64| -> f64 {
        let p: Vec<f64> = dir.iter().map(|x| x * r).collect();
        a(&p)
    };
    if at(0.0).max(at(1e-12)) <= thr {
        return Ok(0.0);
    }
    // bracket the radius where a(r) = 1/lambda
    let mut hi = 1.0;
    while at(hi) > thr {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(SfError::domain("sublevel set appears unbounded"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid) > thr {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = 0.5 * (lo + hi);
    let ball = match n {
        1 => 2.0 * r,
        3 => 4.0 / 3.0 * std::f64::consts::PI * r.powi(3),
        _ => {
            return Err(SfError::domain("sublevel volume implemented for n = 1, 3"));
        }
    };
    Ok(ball)
}

/// The lambda-scaled spectral counting value vol{a > 1/lambda} / lambda,
/// which tends to the Dixmier density as lambda grows.
pub fn scaled_counting(a: &ZetaFn, n: usize, lambda: f64) -> Result<f64> {
    Ok(sublevel_volume_radial(a, n, lambda)? / lambda)
}

fn radial_breakpoints(r_max: f64) -> Vec<f64> {
    let mut pts = vec![0.0, 0.5, 1.0];
    let mut r = 2.0;
    while r < r_max {
        pts.push(r);
        r *= 2.0;
    }
    pts.push(r_max);
    pts
}

fn symmetric_breakpoints(r_max: f64) -> Vec<f64> {
    let right = radial_breakpoints(r_max);
    let mut pts: Vec<f64> = right.iter().skip(1).map(|x| -x).rev().collect();
    pts.extend(right);
    pts
}

/// Weyl trace of an integrable-order symbol: exact Bohr mean in x times
/// the zeta integral, summed over separable terms.
pub fn weyl_trace(a: &ApSymbol, opts: &QuadratureOptions) -> Result<f64> {
    let n = a.ambient;
    if !(a.order < -(n as f64)) {
        return Err(SfError::domain(format!(
            "Weyl trace needs order < -n = -{n}, got {}",
            a.order
        )));
    }
    let (c_bound, m_bound) = a.bound.unwrap_or((1.0, a.order));
    // choose the radial cutoff so the tail of c (1+r)^m r^{n-1} is tiny
    let mut r_max = 10.0f64;
    let tail = |r: f64| -> f64 {
        let surf = match n {
            1 => 2.0,
            3 => 4.0 * std::f64::consts::PI,
            _ => 2.0,
        };
        c_bound * surf * (1.0 + r).powf(m_bound + n as f64) / (-(m_bound + n as f64))
    };
    while tail(r_max) > 1e-12 && r_max < 1e9 {
        r_max *= 2.0;
    }

    let mut total = 0.0;
    for term in &a.terms {
        let mean = term.x_part.bohr_mean()[(0, 0)];
        if mean.norm() == 0.0 {
            continue;
        }
        if mean.im.abs() > 1e-10 {
            return Err(SfError::domain("x-profile must have a real Bohr mean"));
        }
        let zeta_integral = match n {
            1 => {
                let f = &term.zeta_part;
                let pts = symmetric_breakpoints(r_max);
                quad::integrate_with_breakpoints(|x| f(&[x]), &pts, opts)?.value
            }
            3 => {
                let rule = sphere_rule(3)?;
                let f = &term.zeta_part;
                let pts = radial_breakpoints(r_max);
                quad::integrate_with_breakpoints(
                    |r| {
                        let shell: f64 = rule
                            .points
                            .iter()
                            .zip(&rule.weights)
                            .map(|(p, w)| {
                                let q: Vec<f64> = p.iter().map(|x| x * r).collect();
                                f(&q) * w
                            })
                            .sum();
                        shell * r * r
                    },
                    &pts,
                    opts,
                )?
                .value
            }
            _ => {
                return Err(SfError::domain("Weyl trace implemented for n = 1, 3"));
            }
        };
        total += mean.re * zeta_integral;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num::bigint::BigInt;
    use num::rational::Ratio;

    #[test]
    fn sphere_areas() {
        let r1 = sphere_rule(1).unwrap();
        let a1: f64 = r1.weights.iter().sum();
        assert_abs_diff_eq!(a1, 2.0, epsilon = 1e-14);
        let r3 = sphere_rule(3).unwrap();
        let a3: f64 = r3.weights.iter().sum();
        assert_abs_diff_eq!(a3, 4.0 * std::f64::consts::PI, epsilon = 1e-10);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre(16);
        let v: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(6))
            .sum();
        assert_abs_diff_eq!(v, 2.0 / 7.0, epsilon = 1e-13);
    }

    #[test]
    fn density_of_inverse_power_is_sphere_volume_over_n() {
        for n in [1usize, 3] {
            let principal: ZetaFn = Arc::new(move |z: &[f64]| {
                let r2: f64 = z.iter().map(|x| x * x).sum();
                r2.sqrt().powi(-(n as i32))
            });
            let a = ApSymbol::multiplier(n, -(n as f64), principal.clone())
                .with_principal(principal);
            let d = dixmier_density(&a, n).unwrap();
            let expect = match n {
                1 => 2.0 / 1.0,
                3 => 4.0 * std::f64::consts::PI / 3.0,
                _ => unreachable!(),
            };
            assert_abs_diff_eq!(d, expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn density_is_linear_in_the_symbol() {
        let c = 2.75;
        let p1: ZetaFn = Arc::new(|z: &[f64]| {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            r2.sqrt().powi(-3)
        });
        let p2: ZetaFn = Arc::new(move |z: &[f64]| {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            c * r2.sqrt().powi(-3)
        });
        let a1 = ApSymbol::multiplier(3, -3.0, p1.clone()).with_principal(p1);
        let a2 = ApSymbol::multiplier(3, -3.0, p2.clone()).with_principal(p2);
        let d1 = dixmier_density(&a1, 3).unwrap();
        let d2 = dixmier_density(&a2, 3).unwrap();
        assert_abs_diff_eq!(d2, c * d1, epsilon = 1e-9);
    }

    #[test]
    fn homogeneity_violation_is_rejected() {
        let bad: ZetaFn = Arc::new(|z: &[f64]| {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            (1.0 + r2).powf(-1.5)
        });
        let a = ApSymbol::multiplier(3, -3.0, bad.clone()).with_principal(bad);
        assert!(dixmier_density(&a, 3).is_err());
    }

    #[test]
    fn counting_limit_matches_density() {
        // a = (1 + |zeta|^2)^{-3/2}: density of the principal part is 4 pi / 3
        let a: ZetaFn = Arc::new(|z: &[f64]| {
            let r2: f64 = z.iter().map(|x| x * x).sum();
            (1.0 + r2).powf(-1.5)
        });
        let target = 4.0 * std::f64::consts::PI / 3.0;
        let scaled = scaled_counting(&a, 3, 1e4).unwrap();
        assert!(
            (scaled - target).abs() <= 0.02 * target,
            "scaled counting {scaled} vs {target}"
        );
    }

    #[test]
    fn weyl_trace_gaussian() {
        let g: ZetaFn = Arc::new(|z: &[f64]| (-z[0] * z[0]).exp());
        let a = ApSymbol::multiplier(1, -2.0, g).with_bound(1.0, -2.0);
        let v = weyl_trace(&a, &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn weyl_trace_oscillating_x_vanishes() {
        let g: ZetaFn = Arc::new(|z: &[f64]| (-z[0] * z[0]).exp());
        let xpart = TrigPolynomial::scalar_monomial_1d(Ratio::new(
            BigInt::from(1),
            BigInt::from(2),
        ));
        let a = ApSymbol {
            ambient: 1,
            order: -2.0,
            terms: vec![SymbolTerm {
                x_part: xpart,
                zeta_part: g,
            }],
            principal: None,
            bound: Some((1.0, -2.0)),
        };
        let v = weyl_trace(&a, &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn weyl_trace_is_additive_over_terms() {
        let g1: ZetaFn = Arc::new(|z: &[f64]| (-z[0] * z[0]).exp());
        let g2: ZetaFn = Arc::new(|z: &[f64]| (-2.0 * z[0] * z[0]).exp());
        let one = TrigPolynomial::one(1, 1);
        let a = ApSymbol {
            ambient: 1,
            order: -2.0,
            terms: vec![
                SymbolTerm {
                    x_part: one.clone(),
                    zeta_part: g1.clone(),
                },
                SymbolTerm {
                    x_part: one,
                    zeta_part: g2.clone(),
                },
            ],
            principal: None,
            bound: Some((1.0, -2.0)),
        };
        let v = weyl_trace(&a, &QuadratureOptions::default()).unwrap();
        let a1 = ApSymbol::multiplier(1, -2.0, g1).with_bound(1.0, -2.0);
        let a2 = ApSymbol::multiplier(1, -2.0, g2).with_bound(1.0, -2.0);
        let v1 = weyl_trace(&a1, &QuadratureOptions::default()).unwrap();
        let v2 = weyl_trace(&a2, &QuadratureOptions::default()).unwrap();
        assert_abs_diff_eq!(v, v1 + v2, epsilon = 1e-9);
    }

    #[test]
    fn weyl_trace_rejects_nonintegrable_order() {
        let g: ZetaFn = Arc::new(|z: &[f64]| 1.0 / (1.0 + z[0] * z[0]));
        let a = ApSymbol::multiplier(1, -0.5, g);
        assert!(weyl_trace(&a, &QuadratureOptions::default()).is_err());
    }
}
