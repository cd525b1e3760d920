//! Winding-number and Toeplitz index computations for (almost) periodic
//! scalar symbols, the Lesch-style trace pairing, and the discretized
//! multiplier shift model.

use num_complex::Complex64;

use crate::error::{Result, SfError};
use crate::quad::{self, QuadratureOptions};
use crate::trig::{CMatrix, Frequency, TrigPolynomial};

/// Minimum symbol magnitude before a winding computation refuses to run.
pub const SYMBOL_FLOOR: f64 = 1e-9;

fn check_scalar_circle_symbol(u: &TrigPolynomial) -> Result<()> {
    if u.dim() != 1 || u.ambient() != 1 {
        return Err(SfError::domain("winding numbers need scalar symbols in one variable"));
    }
    if !u.has_integer_frequencies() {
        return Err(SfError::domain(
            "circle winding needs integer frequencies (periodic symbol)",
        ));
    }
    Ok(())
}

fn check_nonvanishing_on(u: &TrigPolynomial, lo: f64, hi: f64, samples: usize) -> Result<()> {
    for i in 0..samples {
        let x = lo + (hi - lo) * i as f64 / samples as f64;
        let v = u.eval(&[x])[(0, 0)].norm();
        if v <= SYMBOL_FLOOR {
            return Err(SfError::domain(format!(
                "symbol nearly vanishes: |u({x:.6})| = {v:.3e}"
            )));
        }
    }
    Ok(())
}

/// Winding integral -(1/2 pi i) * integral over one period of u'/u.
///
/// For a nonvanishing periodic symbol the value is within 1e-8 of the
/// integer -(classical winding number).
pub fn winding_number_circle(u: &TrigPolynomial, opts: &QuadratureOptions) -> Result<f64> {
    check_scalar_circle_symbol(u)?;
    check_nonvanishing_on(u, 0.0, std::f64::consts::TAU, 4096)?;
    let du = u.derivative(0)?;
    // -(1/2 pi i) (a + ib) integrated; the real part of u'/u integrates to
    // zero over a period, leaving -(1/2 pi) * integral of Im(u'/u)
    let r = quad::integrate(
        |x| {
            let uv = u.eval(&[x])[(0, 0)];
            let dv = du.eval(&[x])[(0, 0)];
            (dv / uv).im
        },
        0.0,
        std::f64::consts::TAU,
        opts,
    )?;
    Ok(-r.value / std::f64::consts::TAU)
}

/// Mean winding of an almost periodic symbol:
/// lim over T of -(1/4 pi i T) * integral over [-T, T] of u'/u.
pub enum MeanWindingMode {
    /// Frequency arithmetic; requires a single-monomial (product) symbol.
    Exact,
    /// Large-T quadrature of the defining integral.
    Numeric { t_max: f64 },
}

pub fn mean_winding_ap(u: &TrigPolynomial, mode: MeanWindingMode) -> Result<f64> {
    if u.dim() != 1 || u.ambient() != 1 {
        return Err(SfError::domain("mean winding needs scalar symbols in one variable"));
    }
    match mode {
        MeanWindingMode::Exact => {
            if u.n_terms() != 1 {
                return Err(SfError::domain(
                    "exact mean winding applies to monomial products; use the numeric mode",
                ));
            }
            let (f, c) = u.terms().iter().next().expect("one term");
            if c[(0, 0)].norm() <= SYMBOL_FLOOR {
                return Err(SfError::domain("symbol is not invertible"));
            }
            let lambda = crate::trig::freq_to_f64(f)[0];
            Ok(-lambda / std::f64::consts::TAU)
        }
        MeanWindingMode::Numeric { t_max } => {
            check_nonvanishing_on(u, -t_max, t_max, 8192)?;
            let du = u.derivative(0)?;
            let r = quad::integrate(
                |x| {
                    let uv = u.eval(&[x])[(0, 0)];
                    let dv = du.eval(&[x])[(0, 0)];
                    (dv / uv).im
                },
                -t_max,
                t_max,
                &QuadratureOptions {
                    abs_tol: 1e-6 * t_max,
                    max_subdivisions: 1 << 16,
                },
            )?;
            // -(1/(4 pi T)) * integral of Im(u'/u); 4 pi = 2 tau
            Ok(-r.value / (2.0 * std::f64::consts::TAU * t_max))
        }
    }
}

/// Trace pairing (1/2 pi i) tr_N(BohrMean(u * d_dir(u*))) for a unitary
/// almost periodic symbol.
pub fn trace_pairing(u: &TrigPolynomial, direction: &[f64]) -> Result<Complex64> {
    if direction.len() != u.ambient() {
        return Err(SfError::structural("direction dimension mismatch"));
    }
    if !u.is_unitary(1e-12) {
        return Err(SfError::domain(format!(
            "trace pairing needs a unitary symbol (defect {:.3e})",
            u.unitarity_defect()
        )));
    }
    let ustar = u.adjoint();
    let mut dir_deriv = TrigPolynomial::zero(u.ambient(), u.dim());
    for (j, &dj) in direction.iter().enumerate() {
        if dj != 0.0 {
            dir_deriv = dir_deriv.add(&ustar.derivative(j)?.scale(Complex64::new(dj, 0.0)))?;
        }
    }
    let prod = u.mul(&dir_deriv)?;
    let mean = prod.trace_poly().bohr_mean()[(0, 0)];
    Ok(mean / Complex64::new(0.0, std::f64::consts::TAU))
}

/// Discretized Fourier multiplier: a finite grid of spectral values with
/// positive cell weights.
#[derive(Debug, Clone)]
pub struct MultiplierModel {
    grid: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl MultiplierModel {
    pub fn new(grid: Vec<f64>, weights: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != weights.len() || grid.len() != values.len() || grid.is_empty() {
            return Err(SfError::structural("grid/weights/values must have equal nonzero length"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SfError::structural("grid must be strictly increasing"));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(SfError::structural("cell weights must be positive"));
        }
        Ok(MultiplierModel {
            grid,
            weights,
            values,
        })
    }

    /// Uniform grid on [lo, hi] with step h; the multiplier is the identity
    /// function, the basic translation model.
    pub fn uniform(lo: f64, hi: f64, step: f64) -> Result<Self> {
        let n = ((hi - lo) / step).round() as usize + 1;
        let grid: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
        let weights = vec![step; n];
        let values = grid.clone();
        MultiplierModel::new(grid, weights, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Debug, Clone)]
pub struct MultiplierFlow {
    pub value: f64,
    /// Set when the grid resolves the shift window with fewer than 10 cells.
    pub coarse_grid_warning: Option<String>,
}

/// Spectral flow of the shifted multiplier path D + t*theta: the weighted
/// measure of grid values entering or leaving [0, inf), with the kernel
/// counted as nonnegative spectrum.
pub fn multiplier_spectral_flow(model: &MultiplierModel, theta: f64) -> Result<MultiplierFlow> {
    let lo_needed = -theta.abs() - 1.0;
    if model.grid[0] > lo_needed || *model.grid.last().unwrap() < 1.0 {
        return Err(SfError::domain(format!(
            "grid [{}, {}] does not cover [{lo_needed}, 1]",
            model.grid[0],
            model.grid.last().unwrap()
        )));
    }
    let mut value = 0.0;
    let mut cells_in_window = 0usize;
    for (&v, &w) in model.values.iter().zip(&model.weights) {
        let before = v >= 0.0;
        let after = v + theta >= 0.0;
        match (before, after) {
            (false, true) => {
                value += w;
                cells_in_window += 1;
            }
            (true, false) => {
                value -= w;
                cells_in_window += 1;
            }
            _ => {}
        }
    }
    let coarse_grid_warning = if theta != 0.0 && cells_in_window < 10 {
        Some(format!(
            "only {cells_in_window} grid cells resolve the shift window; refine the grid"
        ))
    } else {
        None
    };
    Ok(MultiplierFlow {
        value,
        coarse_grid_warning,
    })
}

/// Thresholds for singular-value kernel counting in the finite sections.
pub const SECTION_KERNEL_TOL: f64 = 1e-8;
pub const SECTION_DEAD_ZONE: (f64, f64) = (1e-10, 1e-6);

/// Index of the half-line Toeplitz operator T_u by rectangular finite
/// sections: rows [0, M) and columns [0, M + b) of the matrix [u^(j - k)].
///
/// Small singular values of the section of T_v count dim ker T_{v*}, so the
/// index dim ker T_u - dim ker T_{u*} is the adjoint-section count minus
/// the section count.
pub fn toeplitz_index_halfline(u: &TrigPolynomial, window: usize, band: Option<usize>) -> Result<f64> {
    check_scalar_circle_symbol(u)?;
    check_nonvanishing_on(u, 0.0, std::f64::consts::TAU, 4096)?;
    let (lo, hi) = u.integer_frequency_span(0)?;
    let b = band.unwrap_or_else(|| (lo.unsigned_abs().max(hi.unsigned_abs()) as usize).max(1));
    if window < 20 * b {
        return Err(SfError::domain(format!(
            "window M = {window} too small for band b = {b}; need M >= 20 b"
        )));
    }
    let ker_adjoint = small_singular_values(&section_matrix(u, window, b))?;
    let ustar = u.adjoint();
    let ker_direct = small_singular_values(&section_matrix(&ustar, window, b))?;
    Ok(ker_direct as f64 - ker_adjoint as f64)
}

fn section_matrix(u: &TrigPolynomial, rows: usize, band: usize) -> CMatrix {
    let cols = rows + band;
    CMatrix::from_fn(rows, cols, |j, k| u.fourier_coeff_1d(j as i64 - k as i64))
}

fn small_singular_values(m: &CMatrix) -> Result<usize> {
    let sv = m.clone().singular_values();
    let mut count = 0usize;
    for &s in sv.iter() {
        if s >= SECTION_DEAD_ZONE.0 && s <= SECTION_DEAD_ZONE.1 {
            return Err(SfError::precision(format!(
                "singular value {s:.3e} falls in the dead zone [{:.0e}, {:.0e}]; enlarge the window",
                SECTION_DEAD_ZONE.0, SECTION_DEAD_ZONE.1
            )));
        }
        if s < SECTION_KERNEL_TOL {
            count += 1;
        }
    }
    Ok(count)
}

/// Helper: scalar periodic symbol from integer-frequency coefficients.
pub fn circle_symbol(coeffs: &[(i64, Complex64)]) -> TrigPolynomial {
    let mut p = TrigPolynomial::zero(1, 1);
    for &(k, c) in coeffs {
        let f: Frequency = vec![num::rational::Ratio::from_integer(num::BigInt::from(k))];
        p.add_term(f, CMatrix::from_element(1, 1, c)).expect("scalar term");
    }
    p
}
