//! Exact matrix-valued trigonometric polynomials: finite frequency support
//! with exact rational frequency arithmetic, so products, adjoints and Bohr
//! means are computed in the coefficient algebra without sampling error.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::rational::Ratio;
use num::ToPrimitive;
use num_complex::Complex64;

use crate::coeff::Rational;
use crate::error::{Result, SfError};
use crate::exec;

pub type CMatrix = DMatrix<Complex64>;

/// A frequency vector in R^n with exact rational coordinates. Floats are
/// converted exactly (every f64 is dyadic), so repeated sums of the same
/// supplied frequency always collide onto one key.
pub type Frequency = Vec<Rational>;

pub fn freq_from_f64(xs: &[f64]) -> Result<Frequency> {
    xs.iter()
        .map(|&x| {
            Ratio::from_float(x)
                .ok_or_else(|| SfError::structural(format!("non-finite frequency component {x}")))
        })
        .collect()
}

pub fn freq_from_ratios(xs: &[(i64, i64)]) -> Frequency {
    xs.iter()
        .map(|&(p, q)| Ratio::new(BigInt::from(p), BigInt::from(q)))
        .collect()
}

pub fn freq_to_f64(f: &Frequency) -> Vec<f64> {
    f.iter().map(|r| r.to_f64().expect("fits f64")).collect()
}

fn freq_neg(f: &Frequency) -> Frequency {
    f.iter().map(|r| -r.clone()).collect()
}

fn freq_add(a: &Frequency, b: &Frequency) -> Frequency {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

fn freq_is_zero(f: &Frequency) -> bool {
    f.iter().all(|r| r.numer() == &BigInt::from(0))
}

/// Merge tolerance when distinct supplied frequencies should be identified.
pub const FREQ_MERGE_TOL: f64 = 1e-12;

/// Coefficients below this magnitude are dropped after arithmetic; exact
/// cancellations leave only float dust well under this level.
pub const COEFF_PRUNE_TOL: f64 = 1e-14;

/// Matrix-valued trigonometric polynomial sum_xi c_xi e^{i<x, xi>}.
#[derive(Debug, Clone)]
pub struct TrigPolynomial {
    /// matrix size N
    dim: usize,
    /// ambient dimension n
    ambient: usize,
    terms: BTreeMap<Frequency, CMatrix>,
}

impl TrigPolynomial {
    pub fn zero(ambient: usize, dim: usize) -> Self {
        TrigPolynomial {
            dim,
            ambient,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ambient: usize, coeff: CMatrix) -> Result<Self> {
        if coeff.nrows() != coeff.ncols() {
            return Err(SfError::structural("coefficients must be square"));
        }
        let mut p = TrigPolynomial::zero(ambient, coeff.nrows());
        p.add_term(vec![Ratio::from_integer(BigInt::from(0)); ambient], coeff)?;
        Ok(p)
    }

    pub fn one(ambient: usize, dim: usize) -> Self {
        TrigPolynomial::constant(ambient, CMatrix::identity(dim, dim)).expect("square")
    }

    /// c * e_xi.
    pub fn monomial(ambient: usize, freq: Frequency, coeff: CMatrix) -> Result<Self> {
        if freq.len() != ambient {
            return Err(SfError::structural(format!(
                "frequency has {} components, ambient dimension is {ambient}",
                freq.len()
            )));
        }
        if coeff.nrows() != coeff.ncols() {
            return Err(SfError::structural("coefficients must be square"));
        }
        let mut p = TrigPolynomial::zero(ambient, coeff.nrows());
        p.add_term(freq, coeff)?;
        Ok(p)
    }

    /// Scalar monomial e^{i lambda x} in one variable.
    pub fn scalar_monomial_1d(lambda: Rational) -> Self {
        TrigPolynomial::monomial(
            1,
            vec![lambda],
            CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)),
        )
        .expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn terms(&self) -> &BTreeMap<Frequency, CMatrix> {
        &self.terms
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    /// Insert a term, merging with any existing frequency closer than
    /// `FREQ_MERGE_TOL` in the sup norm.
    pub fn add_term(&mut self, freq: Frequency, coeff: CMatrix) -> Result<()> {
        if freq.len() != self.ambient {
            return Err(SfError::structural("frequency dimension mismatch"));
        }
        if coeff.nrows() != self.dim || coeff.ncols() != self.dim {
            return Err(SfError::structural("coefficient shape mismatch"));
        }
        let key = match self.find_mergeable(&freq) {
            Some(k) => k,
            None => freq,
        };
        match self.terms.get_mut(&key) {
            Some(existing) => *existing += coeff,
            None => {
                self.terms.insert(key, coeff);
            }
        }
        Ok(())
    }

    fn find_mergeable(&self, freq: &Frequency) -> Option<Frequency> {
        if self.terms.contains_key(freq) {
            return Some(freq.clone());
        }
        let f = freq_to_f64(freq);
        for k in self.terms.keys() {
            let g = freq_to_f64(k);
            if f.iter()
                .zip(&g)
                .all(|(a, b)| (a - b).abs() <= FREQ_MERGE_TOL)
            {
                return Some(k.clone());
            }
        }
        None
    }

    fn check_compatible(&self, other: &TrigPolynomial, what: &str) -> Result<()> {
        if self.dim != other.dim || self.ambient != other.ambient {
            return Err(SfError::structural(format!(
                "{what}: dimension mismatch (N {} vs {}, n {} vs {})",
                self.dim, other.dim, self.ambient, other.ambient
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.check_compatible(other, "add")?;
        let mut out = self.clone();
        for (f, c) in &other.terms {
            out.add_term(f.clone(), c.clone())?;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> TrigPolynomial {
        TrigPolynomial {
            dim: self.dim,
            ambient: self.ambient,
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (f.clone(), c.map(|z| z * s)))
                .collect(),
        }
    }

    /// Exact coefficient convolution: (uv)_xi = sum over eta of
    /// u_eta v_{xi - eta}.
    pub fn mul(&self, other: &TrigPolynomial) -> Result<TrigPolynomial> {
        self.check_compatible(other, "mul")?;
        let mut out = TrigPolynomial::zero(self.ambient, self.dim);
        for (f1, c1) in &self.terms {
            for (f2, c2) in &other.terms {
                out.add_term(freq_add(f1, f2), c1 * c2)?;
            }
        }
        out.prune();
        Ok(out)
    }

    /// u*: coefficients of the adjoint are c_{-xi}^*.
    pub fn adjoint(&self) -> TrigPolynomial {
        TrigPolynomial {
            dim: self.dim,
            ambient: self.ambient,
            terms: self
                .terms
                .iter()
                .map(|(f, c)| (freq_neg(f), c.adjoint()))
                .collect(),
        }
    }

    /// d/dx_j: scales each term by i xi_j.
    pub fn derivative(&self, j: usize) -> Result<TrigPolynomial> {
        if j >= self.ambient {
            return Err(SfError::structural(format!(
                "derivative direction {j} out of range for ambient dimension {}",
                self.ambient
            )));
        }
        let terms = self
            .terms
            .iter()
            .map(|(f, c)| {
                let xi_j = f[j].to_f64().expect("fits f64");
                (f.clone(), c.map(|z| z * Complex64::new(0.0, xi_j)))
            })
            .collect();
        let mut out = TrigPolynomial {
            dim: self.dim,
            ambient: self.ambient,
            terms,
        };
        out.prune();
        Ok(out)
    }

    /// The Bohr mean: exactly the zero-frequency coefficient.
    pub fn bohr_mean(&self) -> CMatrix {
        for (f, c) in &self.terms {
            if freq_is_zero(f) {
                return c.clone();
            }
        }
        CMatrix::zeros(self.dim, self.dim)
    }

    /// Numeric cross-check of the Bohr mean: average over a uniform grid
    /// on [-T, T]^n. Agreement with the exact mean is O(1/T).
    pub fn bohr_mean_numeric(&self, t_max: f64, samples_per_axis: usize) -> CMatrix {
        let n = self.ambient;
        let m = samples_per_axis.max(2);
        let total: usize = m.pow(n as u32);
        let rows = exec::map_range(total, |flat| {
            let mut x = vec![0.0; n];
            let mut rem = flat;
            for xi in x.iter_mut() {
                let idx = rem % m;
                rem /= m;
                // midpoint rule on [-T, T]
                *xi = -t_max + (2.0 * t_max) * (idx as f64 + 0.5) / m as f64;
            }
            self.eval(&x)
        });
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for r in rows {
            acc += r;
        }
        acc.map(|z| z / total as f64)
    }

    /// Evaluate at a point x in R^n.
    pub fn eval(&self, x: &[f64]) -> CMatrix {
        assert_eq!(x.len(), self.ambient, "evaluation point dimension");
        let mut acc = CMatrix::zeros(self.dim, self.dim);
        for (f, c) in &self.terms {
            let fr = freq_to_f64(f);
            let phase: f64 = fr.iter().zip(x).map(|(a, b)| a * b).sum();
            let e = Complex64::from_polar(1.0, phase);
            acc += c.map(|z| z * e);
        }
        acc
    }

    /// Pointwise matrix trace as a scalar trig polynomial.
    pub fn trace_poly(&self) -> TrigPolynomial {
        let terms = self
            .terms
            .iter()
            .map(|(f, c)| {
                let mut tr = Complex64::new(0.0, 0.0);
                for i in 0..c.nrows() {
                    tr += c[(i, i)];
                }
                (f.clone(), CMatrix::from_element(1, 1, tr))
            })
            .collect();
        let mut out = TrigPolynomial {
            dim: 1,
            ambient: self.ambient,
            terms,
        };
        out.prune();
        out
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Drop numerically-zero coefficients left by cancellations.
    pub fn prune(&mut self) {
        self.terms
            .retain(|_, c| c.iter().any(|z| z.norm() > COEFF_PRUNE_TOL));
    }

    /// ||u u* - 1|| in the coefficient algebra, the unitarity defect.
    pub fn unitarity_defect(&self) -> f64 {
        let uu = self
            .mul(&self.adjoint())
            .expect("self-compatible")
            .sub(&TrigPolynomial::one(self.ambient, self.dim))
            .expect("same shape");
        uu.max_coeff_norm()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// All frequencies are integers (periodic symbol on the circle/torus).
    pub fn has_integer_frequencies(&self) -> bool {
        self.terms
            .keys()
            .all(|f| f.iter().all(|r| r.is_integer()))
    }

    /// Integer frequency range along axis `j`.
    pub fn integer_frequency_span(&self, j: usize) -> Result<(i64, i64)> {
        if !self.has_integer_frequencies() {
            return Err(SfError::domain("symbol has non-integer frequencies"));
        }
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for f in self.terms.keys() {
            let v = f[j].to_integer().to_i64().ok_or_else(|| {
                SfError::structural("frequency exceeds i64 range")
            })?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if self.terms.is_empty() {
            return Ok((0, 0));
        }
        Ok((lo, hi))
    }

    /// Coefficient at an integer frequency (scalar symbols, axis 0).
    pub fn fourier_coeff_1d(&self, k: i64) -> Complex64 {
        let key: Frequency = vec![Ratio::from_integer(BigInt::from(k))];
        match self.terms.get(&key) {
            Some(c) => c[(0, 0)],
            None => Complex64::new(0.0, 0.0),
        }
    }
}
