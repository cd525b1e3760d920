//! Exact coefficient algebra for the odd local index formula: the
//! multi-index weights alpha(k), the elementary-symmetric numbers
//! sigma_{m,j}, and the closed-form constant of the top-degree term.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::rational::Ratio;
use num::{One, Zero};
use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Result, SfError};

pub type Rational = Ratio<BigInt>;

fn rat(n: i64, d: i64) -> Rational {
    Ratio::new(BigInt::from(n), BigInt::from(d))
}

fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

fn double_factorial(n: i64) -> BigInt {
    // (-1)!! = 1 by convention
    let mut acc = BigInt::one();
    let mut k = n;
    while k > 1 {
        acc *= BigInt::from(k);
        k -= 2;
    }
    acc
}

/// Exact residuals of the half-integer Gamma identities, evaluated with a
/// floating Gamma as a cross-check on the rational route.
#[derive(Debug, Clone, Copy)]
pub struct GammaIdentityResiduals {
    /// | sigma_{(n-1)/2,0} - Gamma(n/2)/sqrt(pi) |
    pub sigma_vs_gamma: f64,
    /// | Gamma(n/2) Gamma(n/2 + 1/2) - sqrt(pi) (n-1)! 2^(1-n) | (relative)
    pub duplication: f64,
}

/// Exact rational coefficient tables for odd n.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub n: u32,
    /// alpha(k) for every multi-index k with 1 <= len(k) and |k| + len(k) <= n.
    pub alpha: BTreeMap<Vec<u32>, Rational>,
    /// sigma_{m,j} for 0 <= j <= m <= n.
    pub sigma: BTreeMap<(u32, u32), Rational>,
    /// The top-term constant -i^{-[(n+1)/2]} pi^{n/2} / (Gamma(1+n/2) 2^{(n+1)/2}).
    pub theorem_constant: Complex64,
    pub residuals: GammaIdentityResiduals,
}

impl CoefficientTable {
    /// alpha of the zero multi-index of length n: equals 1/n!.
    pub fn alpha_zero(&self) -> &Rational {
        self.alpha
            .get(&vec![0; self.n as usize])
            .expect("zero multi-index is always tabulated")
    }

    pub fn sigma(&self, m: u32, j: u32) -> &Rational {
        self.sigma.get(&(m, j)).expect("tabulated range")
    }
}

/// alpha(k) = 1 / (k_1! ... k_m! (k_1+1)(k_1+k_2+2)...(|k|+m)).
pub fn alpha_of(k: &[u32]) -> Rational {
    let mut denom = BigInt::one();
    for &ki in k {
        denom *= factorial(ki as u64);
    }
    let mut partial = 0u64;
    for (i, &ki) in k.iter().enumerate() {
        partial += ki as u64;
        denom *= BigInt::from(partial + (i as u64) + 1);
    }
    Ratio::new(BigInt::one(), denom)
}

/// Coefficients of prod_{l=0}^{m-1} (z + l + 1/2): the elementary symmetric
/// functions of 1/2, 3/2, ..., m - 1/2, with sigma_{0,0} = 1.
pub fn sigma_row(m: u32) -> Vec<Rational> {
    let mut poly = vec![Rational::one()];
    for l in 0..m {
        let root = rat(2 * l as i64 + 1, 2);
        // multiply by (z + root)
        let mut next = vec![Rational::zero(); poly.len() + 1];
        for (j, c) in poly.iter().enumerate() {
            next[j] += c * &root;
            next[j + 1] += c;
        }
        poly = next;
    }
    poly
}

fn i_power(k: i64) -> Complex64 {
    match k.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// The constant multiplying the mean of tr(Omega) in the top-degree flow
/// formula: -i^{-[(n+1)/2]} pi^{n/2} / (Gamma(1+n/2) 2^{(n+1)/2}).
pub fn top_term_constant(n: u32) -> Complex64 {
    let half = (n as i64 + 1) / 2;
    let magnitude = std::f64::consts::PI.powf(n as f64 / 2.0)
        / (gamma(1.0 + n as f64 / 2.0) * 2f64.powf((n as f64 + 1.0) / 2.0));
    -i_power(-half) * Complex64::new(magnitude, 0.0)
}

fn enumerate_multi_indices(n: u32) -> Vec<Vec<u32>> {
    // all k with len(k) = m in 1..=n and |k| <= n - m
    let mut out = Vec::new();
    for m in 1..=n {
        let budget = n - m;
        let mut cur = vec![0u32; m as usize];
        loop {
            out.push(cur.clone());
            // next composition with sum <= budget, odometer-style
            let mut pos = 0usize;
            loop {
                if pos == cur.len() {
                    break;
                }
                cur[pos] += 1;
                if cur.iter().sum::<u32>() <= budget {
                    break;
                }
                cur[pos] = 0;
                pos += 1;
            }
            if pos == cur.len() {
                break;
            }
        }
    }
    out
}

/// Build the exact coefficient tables for odd n between 1 and 15, and
/// verify the half-integer Gamma identities they encode.
pub fn local_index_coefficients(n: u32) -> Result<CoefficientTable> {
    if n % 2 == 0 || n < 1 || n > 15 {
        return Err(SfError::domain(format!(
            "coefficient table needs odd n in [1, 15], got {n}"
        )));
    }
    let mut alpha = BTreeMap::new();
    for k in enumerate_multi_indices(n) {
        let a = alpha_of(&k);
        alpha.insert(k, a);
    }
    let mut sigma = BTreeMap::new();
    for m in 0..=n {
        for (j, c) in sigma_row(m).into_iter().enumerate() {
            sigma.insert((m, j as u32), c);
        }
    }

    // sigma_{(n-1)/2,0} = Gamma(n/2)/sqrt(pi) = (n-2)!!/2^{(n-1)/2}, exactly
    let h = (n - 1) / 2;
    let expect = Ratio::new(
        double_factorial(n as i64 - 2),
        BigInt::from(2u64).pow(h),
    );
    let got = sigma.get(&(h, 0)).expect("tabulated").clone();
    if got != expect {
        return Err(SfError::structural(format!(
            "sigma identity violated at n = {n}: {got} != {expect}"
        )));
    }
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let sigma_vs_gamma = (ratio_to_f64(&got) - gamma(n as f64 / 2.0) / sqrt_pi).abs();

    // duplication: Gamma(n/2) Gamma(n/2 + 1/2) = sqrt(pi) (n-1)! 2^{1-n}
    let lhs = gamma(n as f64 / 2.0) * gamma(n as f64 / 2.0 + 0.5);
    let fact: f64 = ratio_to_f64(&Ratio::from_integer(factorial(n as u64 - 1)));
    let rhs = sqrt_pi * fact * 2f64.powi(1 - n as i32);
    let duplication = ((lhs - rhs) / rhs).abs();

    Ok(CoefficientTable {
        n,
        alpha,
        sigma,
        theorem_constant: top_term_constant(n),
        residuals: GammaIdentityResiduals {
            sigma_vs_gamma,
            duplication,
        },
    })
}

pub fn ratio_to_f64(r: &Rational) -> f64 {
    use num::ToPrimitive;
    r.to_f64().expect("rational fits in f64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sigma_first_row() {
        // (z + 1/2): sigma_{1,0} = 1/2, sigma_{1,1} = 1
        let row = sigma_row(1);
        assert_eq!(row[0], rat(1, 2));
        assert_eq!(row[1], rat(1, 1));
    }

    #[test]
    fn sigma_zero_is_one() {
        assert_eq!(sigma_row(0), vec![Rational::one()]);
    }

    #[test]
    fn sigma_are_elementary_symmetric() {
        // m = 3: roots 1/2, 3/2, 5/2
        let row = sigma_row(3);
        assert_eq!(row[3], rat(1, 1));
        assert_eq!(row[2], rat(1, 2) + rat(3, 2) + rat(5, 2));
        assert_eq!(
            row[1],
            rat(1, 2) * rat(3, 2) + rat(1, 2) * rat(5, 2) + rat(3, 2) * rat(5, 2)
        );
        assert_eq!(row[0], rat(15, 8));
    }

    #[test]
    fn alpha_zero_is_reciprocal_factorial() {
        for n in [1u32, 3, 5, 7] {
            let t = local_index_coefficients(n).unwrap();
            let expect = Ratio::new(BigInt::one(), factorial(n as u64));
            assert_eq!(*t.alpha_zero(), expect);
        }
    }

    #[test]
    fn alpha_examples() {
        // alpha((1)) = 1/(1! * (1+1)) = 1/2
        assert_eq!(alpha_of(&[1]), rat(1, 2));
        // alpha((1,1)) = 1/(1!1! * (1+1)(1+1+2)) = 1/8
        assert_eq!(alpha_of(&[1, 1]), rat(1, 8));
        // alpha((2,0,1)) = 1/(2!0!1! * (2+1)(2+0+2)(2+0+1+3)) = 1/(2*3*4*6)
        assert_eq!(alpha_of(&[2, 0, 1]), rat(1, 144));
    }

    #[test]
    fn gamma_identities_hold() {
        for n in [1u32, 3, 5, 7, 9] {
            let t = local_index_coefficients(n).unwrap();
            assert!(t.residuals.sigma_vs_gamma <= 1e-12, "n = {n}");
            assert!(t.residuals.duplication <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn n3_sigma_matches_gamma_value() {
        let t = local_index_coefficients(3).unwrap();
        assert_eq!(*t.sigma(1, 0), rat(1, 2));
        assert_abs_diff_eq!(
            ratio_to_f64(t.sigma(1, 0)),
            gamma(1.5) / std::f64::consts::PI.sqrt(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn constant_n1_is_i() {
        let c = top_term_constant(1);
        assert_abs_diff_eq!(c.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.im, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn constant_n3_is_pi_over_three() {
        let c = top_term_constant(3);
        assert_abs_diff_eq!(c.re, std::f64::consts::PI / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn rejects_even_or_out_of_range() {
        assert!(local_index_coefficients(2).is_err());
        assert!(local_index_coefficients(17).is_err());
    }

    #[test]
    fn multi_index_counts() {
        // number of k with len + |k| <= n is 2^n - 1
        let t = local_index_coefficients(7).unwrap();
        assert_eq!(t.alpha.len(), (1 << 7) - 1);
    }
}
