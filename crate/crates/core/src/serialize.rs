//! JSON wire formats: block operators, path scenarios, trig polynomials.

use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::Ratio;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{BlockOperator, CMatrix, Projection, WeightedBlockAlgebra};
use crate::error::{Result, SfError};
use crate::models;
use crate::path::OperatorPath;
use crate::trig::{Frequency, TrigPolynomial};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlgebraJson {
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
}

impl AlgebraJson {
    pub fn build(&self) -> Result<Arc<WeightedBlockAlgebra>> {
        WeightedBlockAlgebra::new(self.dims.clone(), self.weights.clone())
    }

    pub fn of(alg: &WeightedBlockAlgebra) -> Self {
        AlgebraJson {
            dims: alg.dims().to_vec(),
            weights: alg.weights().to_vec(),
        }
    }
}

/// Block operator as dims/weights plus one row-major [re, im] list per block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockOperatorJson {
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
    pub blocks: Vec<Vec<[f64; 2]>>,
}

impl BlockOperatorJson {
    pub fn of(op: &BlockOperator) -> Self {
        let alg = op.algebra();
        let blocks = op
            .blocks()
            .iter()
            .map(|b| {
                let n = b.nrows();
                let mut flat = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        let z = b[(i, j)];
                        flat.push([z.re, z.im]);
                    }
                }
                flat
            })
            .collect();
        BlockOperatorJson {
            dims: alg.dims().to_vec(),
            weights: alg.weights().to_vec(),
            blocks,
        }
    }

    pub fn build(&self) -> Result<BlockOperator> {
        let alg = WeightedBlockAlgebra::new(self.dims.clone(), self.weights.clone())?;
        self.build_on(&alg)
    }

    pub fn build_on(&self, alg: &Arc<WeightedBlockAlgebra>) -> Result<BlockOperator> {
        if self.blocks.len() != alg.n_blocks() {
            return Err(SfError::structural(format!(
                "operator has {} blocks, algebra has {}",
                self.blocks.len(),
                alg.n_blocks()
            )));
        }
        let mut blocks = Vec::with_capacity(self.blocks.len());
        for (flat, &n) in self.blocks.iter().zip(alg.dims()) {
            if flat.len() != n * n {
                return Err(SfError::structural(format!(
                    "block needs {} entries, got {}",
                    n * n,
                    flat.len()
                )));
            }
            blocks.push(CMatrix::from_fn(n, n, |i, j| {
                let [re, im] = flat[i * n + j];
                Complex64::new(re, im)
            }));
        }
        BlockOperator::new(Arc::clone(alg), blocks)
    }
}

/// Path description for scenarios.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PathJson {
    /// straight line between two operators
    Linear {
        b0: BlockOperatorJson,
        b1: BlockOperatorJson,
    },
    /// piecewise-linear interpolation through knots
    Piecewise {
        times: Vec<f64>,
        ops: Vec<BlockOperatorJson>,
    },
    /// explicit samples, interpolated linearly
    CustomSamples {
        times: Vec<f64>,
        ops: Vec<BlockOperatorJson>,
    },
    /// the translated clamped-step model on a uniform grid
    StepTranslation {
        grid: [f64; 2],
        step: f64,
        shift: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathScenarioJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algebra: Option<AlgebraJson>,
    pub path: PathJson,
    pub interval: [f64; 2],
}

impl PathScenarioJson {
    pub fn build(&self) -> Result<(Arc<WeightedBlockAlgebra>, OperatorPath)> {
        match &self.path {
            PathJson::Linear { b0, b1 } => {
                let alg = self.algebra_or(&b0.dims, &b0.weights)?;
                let op0 = b0.build_on(&alg)?;
                let op1 = b1.build_on(&alg)?;
                let path = OperatorPath::linear(op0, op1, (self.interval[0], self.interval[1]))?;
                Ok((alg, path))
            }
            PathJson::Piecewise { times, ops } | PathJson::CustomSamples { times, ops } => {
                if ops.is_empty() {
                    return Err(SfError::structural("path needs at least one sample"));
                }
                let alg = self.algebra_or(&ops[0].dims, &ops[0].weights)?;
                let built: Result<Vec<BlockOperator>> =
                    ops.iter().map(|o| o.build_on(&alg)).collect();
                let path = OperatorPath::piecewise_linear(times.clone(), built?)?;
                Ok((alg, path))
            }
            PathJson::StepTranslation { grid, step, shift } => {
                models::step_translation_path(grid[0], grid[1], *step, *shift)
            }
        }
    }

    fn algebra_or(&self, dims: &[usize], weights: &[f64]) -> Result<Arc<WeightedBlockAlgebra>> {
        match &self.algebra {
            Some(a) => a.build(),
            None => WeightedBlockAlgebra::new(dims.to_vec(), weights.to_vec()),
        }
    }
}

/// Frequency component: a plain number or an exact "p/q" string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FreqComponentJson {
    Number(f64),
    Exact(String),
}

impl FreqComponentJson {
    pub fn to_rational(&self) -> Result<Ratio<BigInt>> {
        match self {
            FreqComponentJson::Number(x) => Ratio::from_float(*x)
                .ok_or_else(|| SfError::structural(format!("non-finite frequency {x}"))),
            FreqComponentJson::Exact(s) => {
                let mut it = s.splitn(2, '/');
                let p: i64 = it
                    .next()
                    .unwrap_or("")
                    .trim()
                    .parse()
                    .map_err(|_| SfError::structural(format!("bad rational '{s}'")))?;
                let q: i64 = match it.next() {
                    Some(d) => d
                        .trim()
                        .parse()
                        .map_err(|_| SfError::structural(format!("bad rational '{s}'")))?,
                    None => 1,
                };
                if q == 0 {
                    return Err(SfError::structural("zero denominator"));
                }
                Ok(Ratio::new(BigInt::from(p), BigInt::from(q)))
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigTermJson {
    pub freq: Vec<FreqComponentJson>,
    /// N rows of N [re, im] pairs
    pub coeff: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrigPolynomialJson {
    #[serde(rename = "N")]
    pub dim: usize,
    pub n: usize,
    pub terms: Vec<TrigTermJson>,
}

impl TrigPolynomialJson {
    pub fn build(&self) -> Result<TrigPolynomial> {
        let mut p = TrigPolynomial::zero(self.n, self.dim);
        for term in &self.terms {
            let freq: Result<Frequency> =
                term.freq.iter().map(|c| c.to_rational()).collect();
            if term.coeff.len() != self.dim
                || term.coeff.iter().any(|row| row.len() != self.dim)
            {
                return Err(SfError::structural("coefficient matrix shape mismatch"));
            }
            let c = CMatrix::from_fn(self.dim, self.dim, |i, j| {
                let [re, im] = term.coeff[i][j];
                Complex64::new(re, im)
            });
            p.add_term(freq?, c)?;
        }
        Ok(p)
    }

    pub fn of(p: &TrigPolynomial) -> Self {
        let terms = p
            .terms()
            .iter()
            .map(|(f, c)| {
                let freq = crate::trig::freq_to_f64(f)
                    .into_iter()
                    .map(FreqComponentJson::Number)
                    .collect();
                let coeff = (0..p.dim())
                    .map(|i| {
                        (0..p.dim())
                            .map(|j| {
                                let z = c[(i, j)];
                                [z.re, z.im]
                            })
                            .collect()
                    })
                    .collect();
                TrigTermJson { freq, coeff }
            })
            .collect();
        TrigPolynomialJson {
            dim: p.dim(),
            n: p.ambient(),
            terms,
        }
    }
}

/// Projection wire form: its operator, validated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectionJson(pub BlockOperatorJson);

impl ProjectionJson {
    pub fn build_on(&self, alg: &Arc<WeightedBlockAlgebra>) -> Result<Projection> {
        Projection::try_new(self.0.build_on(alg)?)
    }

    pub fn of(p: &Projection) -> Self {
        ProjectionJson(BlockOperatorJson::of(p.op()))
    }
}
