//! Almost periodic spectral flow from the coefficient algebra: the
//! antisymmetrized log-derivative form Omega and its Bohr-mean pairing
//! with the closed-form top-degree constant.

use num_complex::Complex64;

use crate::coeff::top_term_constant;
use crate::error::{Result, SfError};
use crate::exec;
use crate::trig::TrigPolynomial;

/// Unitarity tolerance for symbols entering the Omega construction.
pub const UNITARY_TOL: f64 = 1e-12;

fn check_omega_input(u: &TrigPolynomial, n: usize) -> Result<()> {
    if n % 2 == 0 || n == 0 {
        return Err(SfError::domain("ambient dimension n must be odd"));
    }
    if u.ambient() != n {
        return Err(SfError::structural(format!(
            "symbol lives in {} variables, requested n = {n}",
            u.ambient()
        )));
    }
    if !u.is_unitary(UNITARY_TOL) {
        return Err(SfError::domain(format!(
            "Omega needs an exactly unitary symbol (defect {:.3e})",
            u.unitarity_defect()
        )));
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    // Heap's algorithm with sign tracking
    let mut items: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    let mut c = vec![0usize; n];
    let mut sign = 1.0;
    out.push((items.clone(), sign));
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            sign = -sign;
            out.push((items.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Omega = sum over permutations of sgn(sigma) f_{sigma(1)} ... f_{sigma(n)}
/// with f_j = (d_j u) u*.
pub fn omega_form(u: &TrigPolynomial, n: usize) -> Result<TrigPolynomial> {
    check_omega_input(u, n)?;
    let ustar = u.adjoint();
    let mut fs = Vec::with_capacity(n);
    for j in 0..n {
        fs.push(u.derivative(j)?.mul(&ustar)?);
    }
    let perms = permutations(n);
    let products = exec::map_collect(&perms, |(perm, sign)| {
        let mut acc = fs[perm[0]].clone();
        for &j in &perm[1..] {
            acc = acc.mul(&fs[j]).expect("compatible dimensions");
        }
        acc.scale(Complex64::new(*sign, 0.0))
    });
    let mut omega = TrigPolynomial::zero(u.ambient(), u.dim());
    for p in products {
        omega = omega.add(&p)?;
    }
    Ok(omega)
}

/// Result of the top-degree pairing; the value is the real part and the
/// imaginary residual is a diagnostic that must stay below 1e-10.
#[derive(Debug, Clone, Copy)]
pub struct ApFlow {
    pub value: f64,
    pub imaginary_residual: f64,
}

/// Spectral flow from the Dirac multiplier to its gauge transform by `u`:
/// the top-degree constant times the Bohr mean of tr(Omega).
pub fn ap_spectral_flow(u: &TrigPolynomial, n: usize) -> Result<ApFlow> {
    let omega = omega_form(u, n)?;
    let mean = omega.trace_poly().bohr_mean()[(0, 0)];
    let c = top_term_constant(n as u32);
    let v = c * mean;
    if v.im.abs() > 1e-10 {
        return Err(SfError::precision(format!(
            "pairing has imaginary residual {:.3e}",
            v.im
        )));
    }
    Ok(ApFlow {
        value: v.re,
        imaginary_residual: v.im.abs(),
    })
}

/// Numeric mapping-degree oracle for n = 3 periodic symbols:
/// (1/24 pi^2) * integral over the period cell of
/// sum over permutations of sgn(sigma) tr(g_{sigma(1)} g_{sigma(2)} g_{sigma(3)}),
/// with g_j = u* d_j u evaluated pointwise on a sample grid.
///
/// This is an independent route: it never touches the coefficient algebra.
pub fn degree_oracle_n3(u: &TrigPolynomial, samples_per_axis: usize) -> f64 {
    let m = samples_per_axis.max(4);
    let tau = std::f64::consts::TAU;
    let h = 1e-6;
    let totals = exec::map_range(m, |i0| {
        let mut acc = 0.0;
        for i1 in 0..m {
            for i2 in 0..m {
                let x = [
                    tau * (i0 as f64 + 0.5) / m as f64,
                    tau * (i1 as f64 + 0.5) / m as f64,
                    tau * (i2 as f64 + 0.5) / m as f64,
                ];
                let um = u.eval(&x);
                let uinv = um.adjoint();
                let mut gs = Vec::with_capacity(3);
                for j in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[j] += h;
                    xm[j] -= h;
                    let du = (u.eval(&xp) - u.eval(&xm)).map(|z| z / (2.0 * h));
                    gs.push(&uinv * du);
                }
                let mut local = Complex64::new(0.0, 0.0);
                for (perm, sign) in permutations(3) {
                    let prod = &gs[perm[0]] * &gs[perm[1]] * &gs[perm[2]];
                    let mut tr = Complex64::new(0.0, 0.0);
                    for d in 0..prod.nrows() {
                        tr += prod[(d, d)];
                    }
                    local += tr * sign;
                }
                // the antisymmetrized product of the three anti-Hermitian
                // g_j is Hermitian, so the density is real
                acc += local.re;
            }
        }
        acc
    });
    let mean: f64 = totals.into_iter().sum::<f64>() / (m * m * m) as f64;
    // integral over the period cell = mean * (2 pi)^3
    mean * tau.powi(3) / (24.0 * std::f64::consts::PI.powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::random_su2;
    use crate::trig::{freq_from_ratios, CMatrix};
    use approx::assert_abs_diff_eq;
    use num::bigint::BigInt;
    use num::rational::Ratio;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_phase(num: i64, den: i64) -> TrigPolynomial {
        TrigPolynomial::scalar_monomial_1d(Ratio::new(BigInt::from(num), BigInt::from(den)))
    }

    #[test]
    fn permutation_signs() {
        let p = permutations(3);
        assert_eq!(p.len(), 6);
        let total: f64 = p.iter().map(|(_, s)| s).sum();
        assert_eq!(total, 0.0);
    }

    #[test]
    fn omega_n1_is_log_derivative() {
        let u = scalar_phase(3, 2);
        let omega = omega_form(&u, 1).unwrap();
        // u' u* = i * 3/2
        let mean = omega.bohr_mean()[(0, 0)];
        assert_abs_diff_eq!(mean.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(mean.im, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn ap_flow_n1_is_minus_lambda() {
        for (num, den) in [(1i64, 3i64), (2, 1), (-5, 7)] {
            let u = scalar_phase(num, den);
            let f = ap_spectral_flow(&u, 1).unwrap();
            let lambda = num as f64 / den as f64;
            assert_abs_diff_eq!(f.value, -lambda, epsilon = 1e-12);
            assert!(f.imaginary_residual <= 1e-12);
        }
    }

    #[test]
    fn constant_symbol_has_zero_flow() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_su2(&mut rng);
        let u = TrigPolynomial::constant(1, c).unwrap();
        let f = ap_spectral_flow(&u, 1).unwrap();
        assert_abs_diff_eq!(f.value, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn scalar_omega_vanishes_for_n3() {
        // scalar symbols have commuting f_j, so the antisymmetrization dies
        let mut u = TrigPolynomial::zero(3, 1);
        u.add_term(
            freq_from_ratios(&[(1, 1), (2, 1), (-1, 1)]),
            CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        )
        .unwrap();
        let omega = omega_form(&u, 3).unwrap();
        assert!(omega.max_coeff_norm() <= 1e-12);
        let f = ap_spectral_flow(&u, 3).unwrap();
        assert_abs_diff_eq!(f.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn omega_invariant_under_unimodular_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = su2_monomial_symbol(&mut rng);
        let omega = omega_form(&u, 3).unwrap();
        let c = Complex64::from_polar(1.0, 1.234);
        let omega2 = omega_form(&u.scale(c), 3).unwrap();
        assert!(omega.sub(&omega2).unwrap().max_coeff_norm() <= 1e-10);
    }

    /// diag-phase times constant SU(2) rotations in each variable.
    fn su2_monomial_symbol(rng: &mut ChaCha8Rng) -> TrigPolynomial {
        let mut u = TrigPolynomial::one(3, 2);
        for j in 0..3 {
            let mut freq_p = [(0i64, 1i64); 3];
            freq_p[j] = (1, 1);
            let mut freq_m = [(0i64, 1i64); 3];
            freq_m[j] = (-1, 1);
            let mut dp = TrigPolynomial::zero(3, 2);
            let mut cp = CMatrix::zeros(2, 2);
            cp[(0, 0)] = Complex64::new(1.0, 0.0);
            dp.add_term(freq_from_ratios(&freq_p), cp).unwrap();
            let mut cm = CMatrix::zeros(2, 2);
            cm[(1, 1)] = Complex64::new(1.0, 0.0);
            dp.add_term(freq_from_ratios(&freq_m), cm).unwrap();
            let r = TrigPolynomial::constant(3, random_su2(rng)).unwrap();
            u = u.mul(&dp).unwrap().mul(&r).unwrap();
        }
        u
    }

    #[test]
    fn su2_symbol_is_unitary_and_pairs_with_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = su2_monomial_symbol(&mut rng);
        assert!(u.is_unitary(1e-12));
        let f = ap_spectral_flow(&u, 3).unwrap();
        let deg = degree_oracle_n3(&u, 12);
        assert!(
            (f.value - deg).abs() <= 0.01 * deg.abs().max(1.0),
            "pairing {} vs degree oracle {deg}",
            f.value
        );
    }
}
