//! Paths of Hermitian block operators and the reports the flow engines
//! produce.

use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{BlockOperator, WeightedBlockAlgebra};
use crate::error::{Result, SfError};

type Evaluator = Arc<dyn Fn(f64) -> BlockOperator + Send + Sync>;

/// A continuously sampled family t -> B_t of Hermitian operators on [a, b].
#[derive(Clone)]
pub struct OperatorPath {
    algebra: Arc<WeightedBlockAlgebra>,
    eval: Evaluator,
    interval: (f64, f64),
    piecewise_c1: bool,
    deriv: Option<Evaluator>,
}

impl OperatorPath {
    pub fn from_fn(
        algebra: Arc<WeightedBlockAlgebra>,
        interval: (f64, f64),
        eval: impl Fn(f64) -> BlockOperator + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(interval.0 < interval.1) || !interval.0.is_finite() || !interval.1.is_finite() {
            return Err(SfError::structural(format!(
                "invalid interval [{}, {}]",
                interval.0, interval.1
            )));
        }
        Ok(OperatorPath {
            algebra,
            eval: Arc::new(eval),
            interval,
            piecewise_c1: false,
            deriv: None,
        })
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(f64) -> BlockOperator + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self.piecewise_c1 = true;
        self
    }

    pub fn mark_piecewise_c1(mut self) -> Self {
        self.piecewise_c1 = true;
        self
    }

    /// Constant path.
    pub fn constant(op: BlockOperator, interval: (f64, f64)) -> Result<Self> {
        let algebra = op.algebra().clone();
        let frozen = op.clone();
        let zero = BlockOperator::zeros(op.algebra());
        Ok(Self::from_fn(algebra, interval, move |_| frozen.clone())?
            .with_derivative(move |_| zero.clone()))
    }

    /// Straight line from `b0` at `interval.0` to `b1` at `interval.1`.
    pub fn linear(b0: BlockOperator, b1: BlockOperator, interval: (f64, f64)) -> Result<Self> {
        if !b0.same_algebra(&b1) {
            return Err(SfError::structural("endpoints live in different algebras"));
        }
        let algebra = b0.algebra().clone();
        let (a, b) = interval;
        let len = b - a;
        let slope = b1.sub(&b0).scale(1.0 / len);
        let base = b0.clone();
        let slope2 = slope.clone();
        Ok(
            Self::from_fn(algebra, interval, move |t| base.add(&slope.scale(t - a)))?
                .with_derivative(move |_| slope2.clone()),
        )
    }

    /// Piecewise-linear interpolation through samples at increasing times.
    pub fn piecewise_linear(times: Vec<f64>, ops: Vec<BlockOperator>) -> Result<Self> {
        if times.len() < 2 || times.len() != ops.len() {
            return Err(SfError::structural(
                "piecewise path needs matching times/ops with at least two knots",
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SfError::structural("knot times must be strictly increasing"));
        }
        let algebra = ops[0].algebra().clone();
        if ops.iter().any(|o| !o.same_algebra(&ops[0])) {
            return Err(SfError::structural("knots live in different algebras"));
        }
        let interval = (times[0], *times.last().unwrap());
        let times2 = times.clone();
        let ops2 = ops.clone();
        Ok(Self::from_fn(algebra, interval, move |t| {
            let i = match times2.windows(2).position(|w| t <= w[1]) {
                Some(i) => i,
                None => times2.len() - 2,
            };
            let (t0, t1) = (times2[i], times2[i + 1]);
            let s = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
            ops2[i]
                .scale(1.0 - s)
                .add(&ops2[i + 1].scale(s))
        })?
        .mark_piecewise_c1())
    }

    pub fn algebra(&self) -> &Arc<WeightedBlockAlgebra> {
        &self.algebra
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn is_piecewise_c1(&self) -> bool {
        self.piecewise_c1
    }

    pub fn at(&self, t: f64) -> BlockOperator {
        (self.eval)(t)
    }

    /// Derivative along the path: the supplied evaluator when present,
    /// otherwise a central difference with step 1e-5 * (b - a).
    pub fn derivative_at(&self, t: f64) -> BlockOperator {
        if let Some(d) = &self.deriv {
            return d(t);
        }
        let (a, b) = self.interval;
        let h = 1e-5 * (b - a);
        let lo = (t - h).max(a);
        let hi = (t + h).min(b);
        self.at(hi).sub(&self.at(lo)).scale(1.0 / (hi - lo))
    }

    /// Lipschitz estimate max ||B_t - B_s|| / |t - s| over a sample grid.
    pub fn lipschitz_estimate(&self, samples: usize) -> f64 {
        let (a, b) = self.interval;
        let n = samples.max(2);
        let mut prev = self.at(a);
        let mut best: f64 = 0.0;
        for i in 1..n {
            let t = a + (b - a) * i as f64 / (n - 1) as f64;
            let cur = self.at(t);
            let dt = (b - a) / (n - 1) as f64;
            best = best.max(cur.sub(&prev).op_norm() / dt);
            prev = cur;
        }
        best
    }

    /// Concatenate with another path starting where this one ends.
    pub fn concat(&self, other: &OperatorPath) -> Result<OperatorPath> {
        let (a, b) = self.interval;
        let (c, d) = other.interval;
        if (b - c).abs() > 1e-12 {
            return Err(SfError::structural(
                "concatenation requires matching junction times",
            ));
        }
        let left = self.clone();
        let right = other.clone();
        OperatorPath::from_fn(self.algebra.clone(), (a, d), move |t| {
            if t <= b {
                left.at(t)
            } else {
                right.at(t)
            }
        })
    }

    /// Affine reparametrization onto a new interval.
    pub fn reparametrize(&self, new_interval: (f64, f64)) -> Result<OperatorPath> {
        let (a, b) = self.interval;
        let (c, d) = new_interval;
        let inner = self.clone();
        OperatorPath::from_fn(self.algebra.clone(), new_interval, move |t| {
            let s = a + (b - a) * (t - c) / (d - c);
            inner.at(s)
        })
    }
}

/// One partition cell of a flow computation.
#[derive(Debug, Clone, Serialize)]
pub struct FlowSegment {
    pub t_lo: f64,
    pub t_hi: f64,
    pub ec: f64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct FlowDiagnostics {
    /// Smallest |eigenvalue| seen at any sampled parameter.
    pub min_gap: f64,
    /// Deepest bisection level used.
    pub refinement_depth: usize,
    /// Number of operator evaluations.
    pub evaluations: usize,
    /// Parameter values of detected crossings (oracle method only).
    pub crossings: Vec<f64>,
}

/// Spectral flow value plus the partition evidence behind it.
#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub value: f64,
    pub method: String,
    pub segments: Vec<FlowSegment>,
    pub diagnostics: FlowDiagnostics,
}

impl FlowReport {
    pub fn new(method: &str, segments: Vec<FlowSegment>, diagnostics: FlowDiagnostics) -> Self {
        let value = segments.iter().map(|s| s.ec).sum();
        FlowReport {
            value,
            method: method.to_string(),
            segments,
            diagnostics,
        }
    }

    /// Partition points, ascending.
    pub fn partition(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.segments.iter().map(|s| s.t_lo).collect();
        if let Some(last) = self.segments.last() {
            pts.push(last.t_hi);
        }
        pts
    }

    /// Contributions must sum to the value; returns the residual.
    pub fn consistency_residual(&self) -> f64 {
        (self.segments.iter().map(|s| s.ec).sum::<f64>() - self.value).abs()
    }

    /// CSV rows `t_lo,t_hi,ec,cumulative`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_lo,t_hi,ec,cumulative\n");
        for s in &self.segments {
            out.push_str(&format!("{},{},{},{}\n", s.t_lo, s.t_hi, s.ec, s.cumulative));
        }
        out
    }
}

/// An odd scalar function with f(1) != 0, used in the projection-pair
/// flow formula.
#[derive(Debug, Clone)]
pub enum OddFunctionSpec {
    /// f(x) = x
    Identity,
    /// f(x) = x^3
    Cube,
    /// f(x) = x^5
    Fifth,
    /// f(x) = sin(pi x / 2)
    SinHalfPi,
    /// Polynomial sum c_k x^k given by its full coefficient list; must be
    /// odd (even coefficients vanish).
    Poly(Vec<f64>),
}

impl OddFunctionSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            OddFunctionSpec::Identity => x,
            OddFunctionSpec::Cube => x * x * x,
            OddFunctionSpec::Fifth => x.powi(5),
            OddFunctionSpec::SinHalfPi => (std::f64::consts::FRAC_PI_2 * x).sin(),
            OddFunctionSpec::Poly(coeffs) => {
                let mut acc = 0.0;
                for &c in coeffs.iter().rev() {
                    acc = acc * x + c;
                }
                acc
            }
        }
    }

    pub fn at_one(&self) -> f64 {
        self.eval(1.0)
    }

    /// Oddness on a symmetric test grid and |f(1)| > 1e-12.
    pub fn validate(&self) -> Result<()> {
        let mut scale: f64 = 0.0;
        for i in 0..=32 {
            let x = -1.0 + 2.0 * i as f64 / 32.0;
            scale = scale.max(self.eval(x).abs());
        }
        let tol = 1e-12 * scale.max(1.0);
        for i in 0..=32 {
            let x = -1.0 + 2.0 * i as f64 / 32.0;
            if (self.eval(x) + self.eval(-x)).abs() > tol {
                return Err(SfError::domain(format!(
                    "function is not odd at x = {x}: f(x) + f(-x) = {}",
                    self.eval(x) + self.eval(-x)
                )));
            }
        }
        if self.at_one().abs() <= 1e-12 {
            return Err(SfError::domain("f(1) vanishes"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::WeightedBlockAlgebra;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_path_hits_endpoints() {
        let alg = WeightedBlockAlgebra::type_i(2);
        let b0 = BlockOperator::zeros(&alg);
        let b1 = BlockOperator::identity(&alg);
        let p = OperatorPath::linear(b0.clone(), b1.clone(), (0.0, 2.0)).unwrap();
        assert_abs_diff_eq!(p.at(0.0).sub(&b0).op_norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.at(2.0).sub(&b1).op_norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.at(1.0).op_norm(), 0.5, epsilon = 1e-12);
        // exact derivative
        assert_abs_diff_eq!(p.derivative_at(0.7).op_norm(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn central_difference_derivative() {
        let alg = WeightedBlockAlgebra::type_i(1);
        let a2 = alg.clone();
        let p = OperatorPath::from_fn(alg, (0.0, 1.0), move |t| {
            BlockOperator::identity(&a2).scale(t * t)
        })
        .unwrap();
        let d = p.derivative_at(0.5);
        assert_abs_diff_eq!(d.block(0)[(0, 0)].re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn odd_function_validation() {
        assert!(OddFunctionSpec::Identity.validate().is_ok());
        assert!(OddFunctionSpec::SinHalfPi.validate().is_ok());
        assert!(OddFunctionSpec::Poly(vec![0.0, 2.0, 0.0, -1.0]).validate().is_ok());
        // x^2 is even
        assert!(OddFunctionSpec::Poly(vec![0.0, 0.0, 1.0]).validate().is_err());
        // f(1) = 0
        assert!(OddFunctionSpec::Poly(vec![0.0, 1.0, 0.0, -1.0]).validate().is_err());
    }

    #[test]
    fn report_consistency() {
        let segs = vec![
            FlowSegment {
                t_lo: 0.0,
                t_hi: 0.5,
                ec: 1.0,
                cumulative: 1.0,
            },
            FlowSegment {
                t_lo: 0.5,
                t_hi: 1.0,
                ec: -0.5,
                cumulative: 0.5,
            },
        ];
        let r = FlowReport::new("test", segs, FlowDiagnostics::default());
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-15);
        assert!(r.consistency_residual() < 1e-12);
        assert_eq!(r.partition(), vec![0.0, 0.5, 1.0]);
    }
}
