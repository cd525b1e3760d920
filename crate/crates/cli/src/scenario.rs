//! Scenario schema and dispatch: parses `sfkit-scenario/1` JSON files and
//! runs the requested computation, returning a JSON result value plus any
//! CSV artifacts to write.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use sfkit_core::algebra::{Projection, WeightedBlockAlgebra};
use sfkit_core::apflow;
use sfkit_core::aps::{self, BoundaryValueProblem};
use sfkit_core::coeff;
use sfkit_core::error::{Result, SfError};
use sfkit_core::flow::{self, PhillipsOptions};
use sfkit_core::integrals;
use sfkit_core::models;
use sfkit_core::path::{OddFunctionSpec, OperatorPath};
use sfkit_core::quad::QuadratureOptions;
use sfkit_core::serialize::{PathScenarioJson, ProjectionJson, TrigPolynomialJson};
use sfkit_core::spectral::{self, Tolerances};
use sfkit_core::symbol::{self, ApSymbol, ZetaFn};
use sfkit_core::toeplitz::{self, MeanWindingMode, MultiplierModel};
use sfkit_core::trig::TrigPolynomial;

pub const SCENARIO_VERSION: &str = "sfkit-scenario/1";
pub const RESULT_VERSION: &str = "sfkit-result/1";

/// Runtime configuration from CLI flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed_override: Option<u64>,
    pub tol_override: Option<f64>,
}

impl RunConfig {
    pub fn tolerances(&self) -> Tolerances {
        match self.tol_override {
            Some(t) => Tolerances {
                kernel_tol: t,
                rank_tol: t,
            },
            None => Tolerances::default(),
        }
    }

    pub fn quad(&self, requested: Option<QuadratureOptions>) -> QuadratureOptions {
        let mut q = requested.unwrap_or_default();
        if let Some(t) = self.tol_override {
            q.abs_tol = t;
        }
        q
    }
}

/// A CSV artifact to be written next to the result.
pub struct CsvArtifact {
    pub name: String,
    pub content: String,
}

pub struct RunOutput {
    pub result: Value,
    pub artifacts: Vec<CsvArtifact>,
}

#[derive(Debug, Deserialize)]
pub struct ScenarioFile {
    pub version: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(flatten)]
    pub spec: ScenarioSpec,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ScenarioSpec {
    PathFlow(PathFlowScenario),
    Involution(InvolutionScenario),
    Integral(IntegralScenario),
    Toeplitz(ToeplitzScenario),
    Ap(ApScenario),
    Aps(ApsScenario),
    Dixmier(DixmierScenario),
    Coefficients(CoefficientsScenario),
    Conventions(ConventionsScenario),
}

#[derive(Debug, Deserialize)]
pub struct PathFlowScenario {
    #[serde(flatten)]
    pub source: PathSource,
    #[serde(default = "default_method")]
    pub method: String,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub emit_plot: bool,
    #[serde(default = "default_plot_samples")]
    pub plot_samples: usize,
}

fn default_method() -> String {
    "both".into()
}

fn default_samples() -> usize {
    100
}

fn default_plot_samples() -> usize {
    64
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum PathSource {
    Random {
        random: RandomPathSpec,
    },
    Explicit {
        #[serde(flatten)]
        scenario: PathScenarioJson,
    },
}

#[derive(Debug, Deserialize)]
pub struct RandomPathSpec {
    pub count: usize,
    pub dims: Vec<usize>,
    pub weights: Vec<f64>,
    #[serde(default = "default_knots")]
    pub knots: usize,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_knots() -> usize {
    4
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
pub struct InvolutionScenario {
    pub dims: Option<Vec<usize>>,
    pub weights: Option<Vec<f64>>,
    #[serde(default)]
    pub count: usize,
    pub p: Option<ProjectionJson>,
    pub q: Option<ProjectionJson>,
    /// construct pairs with ||P - Q|| < 1 (trivial kernel)
    #[serde(default)]
    pub trivial_kernel: bool,
    #[serde(default)]
    pub odd_functions: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct IntegralScenario {
    pub model: IntegralModel,
    #[serde(default = "default_integral_method")]
    pub method: String,
    #[serde(default = "default_orders")]
    pub n: Vec<f64>,
    #[serde(default)]
    pub eps: Vec<f64>,
    #[serde(default)]
    pub t: Vec<f64>,
    #[serde(default)]
    pub quad: Option<QuadratureOptions>,
    #[serde(default = "default_samples")]
    pub oracle_samples: usize,
}

fn default_integral_method() -> String {
    "all".into()
}

fn default_orders() -> Vec<f64> {
    vec![2.0]
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum IntegralModel {
    GridMultiplier {
        lo: f64,
        hi: f64,
        step: f64,
        theta: f64,
    },
    Circle {
        mmax: i64,
        offset: f64,
        shift: f64,
    },
    RandomGauge {
        dims: Vec<usize>,
        weights: Vec<f64>,
        #[serde(default = "default_scale")]
        scale: f64,
        #[serde(default = "default_one")]
        count: usize,
        #[serde(default)]
        invertible_gap: Option<f64>,
    },
    Path {
        #[serde(flatten)]
        scenario: PathScenarioJson,
    },
}

fn default_one() -> usize {
    1
}

#[derive(Debug, Deserialize)]
pub struct ToeplitzScenario {
    #[serde(default)]
    pub symbol: Option<SymbolSpec>,
    /// run winding + half-line index for u = e^{ikx}, k in this range
    #[serde(default)]
    pub monomial_range: Option<[i64; 2]>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub band: Option<usize>,
    #[serde(default)]
    pub ops: Vec<String>,
    /// shifted multiplier model evaluation
    #[serde(default)]
    pub multiplier: Option<MultiplierSpec>,
    /// trace pairing for the monomial e^{i lambda x}
    #[serde(default)]
    pub lesch_lambda: Option<String>,
}

#[derive(Debug, Deserialize)]
pub struct MultiplierSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub theta: f64,
}

fn default_window() -> usize {
    200
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    Coeffs { coeffs: Vec<(i64, f64, f64)> },
    Trig { trig: TrigPolynomialJson },
}

impl SymbolSpec {
    fn build(&self) -> Result<TrigPolynomial> {
        match self {
            SymbolSpec::Coeffs { coeffs } => Ok(toeplitz::circle_symbol(
                &coeffs
                    .iter()
                    .map(|&(k, re, im)| (k, num_complex::Complex64::new(re, im)))
                    .collect::<Vec<_>>(),
            )),
            SymbolSpec::Trig { trig } => trig.build(),
        }
    }
}

#[derive(Debug, Deserialize)]
pub struct ApScenario {
    pub n: usize,
    /// n = 1 monomials e^{i lambda x}; exact rationals as "p/q"
    #[serde(default)]
    pub lambdas: Vec<String>,
    /// seeded SU(2)-monomial symbol with this many factors (n = 3)
    #[serde(default)]
    pub su2_factors: Option<usize>,
    /// explicit symbol
    #[serde(default)]
    pub trig: Option<TrigPolynomialJson>,
    #[serde(default)]
    pub oracle: bool,
    /// grid step for the n = 1 multiplier oracle
    #[serde(default)]
    pub oracle_grid_step: Option<f64>,
}

#[derive(Debug, Deserialize)]
pub struct ApsScenario {
    #[serde(default)]
    pub count: usize,
    pub dims: Option<Vec<usize>>,
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// explicit problem: path scenario plus boundary data
    #[serde(flatten)]
    pub explicit: Option<ExplicitBvp>,
    #[serde(default)]
    pub check_solution_profile: bool,
}

fn default_steps() -> usize {
    512
}

#[derive(Debug, Deserialize)]
pub struct ExplicitBvp {
    #[serde(flatten)]
    pub scenario: PathScenarioJson,
    pub bvp: BvpJson,
}

#[derive(Debug, Deserialize)]
pub struct BvpJson {
    #[serde(rename = "P")]
    pub p: ProjectionJson,
    #[serde(rename = "Q")]
    pub q: ProjectionJson,
    #[serde(default = "default_steps")]
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
pub struct DixmierScenario {
    pub n: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    1e4
}

#[derive(Debug, Deserialize)]
pub struct CoefficientsScenario {
    pub orders: Vec<u32>,
}

#[derive(Debug, Deserialize)]
pub struct ConventionsScenario {}

fn parse_odd_function(name: &str) -> Result<OddFunctionSpec> {
    match name {
        "x" => Ok(OddFunctionSpec::Identity),
        "x3" | "x^3" => Ok(OddFunctionSpec::Cube),
        "x5" | "x^5" => Ok(OddFunctionSpec::Fifth),
        "sin" | "sin(pi x/2)" => Ok(OddFunctionSpec::SinHalfPi),
        other => Err(SfError::structural(format!("unknown odd function '{other}'"))),
    }
}

fn need_seed(seed: Option<u64>, what: &str) -> Result<u64> {
    seed.ok_or_else(|| {
        SfError::structural(format!("scenario requests random {what} but carries no seed"))
    })
}

pub fn run_scenario(file: &ScenarioFile, cfg: &RunConfig) -> Result<RunOutput> {
    if file.version != SCENARIO_VERSION {
        return Err(SfError::structural(format!(
            "unsupported scenario version '{}'; expected '{SCENARIO_VERSION}'",
            file.version
        )));
    }
    let seed = cfg.seed_override.or(file.seed);
    match &file.spec {
        ScenarioSpec::PathFlow(s) => run_path_flow(s, seed, cfg),
        ScenarioSpec::Involution(s) => run_involution(s, seed, cfg),
        ScenarioSpec::Integral(s) => run_integral(s, seed, cfg),
        ScenarioSpec::Toeplitz(s) => run_toeplitz(s, cfg),
        ScenarioSpec::Ap(s) => run_ap(s, seed, cfg),
        ScenarioSpec::Aps(s) => run_aps(s, seed, cfg),
        ScenarioSpec::Dixmier(s) => run_dixmier(s),
        ScenarioSpec::Coefficients(s) => run_coefficients(s),
        ScenarioSpec::Conventions(_) => crate::report::run_conventions(cfg),
    }
}

fn plot_csv(path: &OperatorPath, samples: usize) -> Result<CsvArtifact> {
    let (a, b) = path.interval();
    let mut content = String::from("t,branch_id,eigenvalue,weight\n");
    for i in 0..samples {
        let t = a + (b - a) * i as f64 / (samples - 1).max(1) as f64;
        let evs = spectral::eigenvalues(&path.at(t))?;
        let mut branch = 0usize;
        for (k, block_evs) in evs.iter().enumerate() {
            let w = path.algebra().weights()[k];
            for ev in block_evs {
                content.push_str(&format!("{t},{branch},{ev},{w}\n"));
                branch += 1;
            }
        }
    }
    Ok(CsvArtifact {
        name: "eigenvalue_trajectories.csv".into(),
        content,
    })
}

fn run_path_flow(s: &PathFlowScenario, seed: Option<u64>, cfg: &RunConfig) -> Result<RunOutput> {
    let tols = cfg.tolerances();
    let phopts = PhillipsOptions {
        tols,
        ..PhillipsOptions::default()
    };
    match &s.source {
        PathSource::Explicit { scenario } => {
            let (_, path) = scenario.build()?;
            let mut result = json!({
                "version": RESULT_VERSION,
                "kind": "path-flow",
            });
            let mut artifacts = Vec::new();
            if s.method == "phillips" || s.method == "both" {
                let rep = flow::spectral_flow_phillips(&path, &phopts)?;
                result["phillips"] = serde_json::to_value(&rep)
                    .map_err(|e| SfError::structural(e.to_string()))?;
                result["value"] = json!(rep.value);
                artifacts.push(CsvArtifact {
                    name: "phillips_segments.csv".into(),
                    content: rep.to_csv(),
                });
            }
            if s.method == "oracle" || s.method == "both" {
                let rep = flow::spectral_flow_crossing_oracle(&path, s.samples, &tols)?;
                if result.get("value").is_none() {
                    result["value"] = json!(rep.value);
                }
                result["oracle"] = serde_json::to_value(&rep)
                    .map_err(|e| SfError::structural(e.to_string()))?;
            }
            if s.emit_plot {
                artifacts.push(plot_csv(&path, s.plot_samples)?);
            }
            Ok(RunOutput { result, artifacts })
        }
        PathSource::Random { random } => {
            let seed = need_seed(seed, "paths")?;
            let alg = WeightedBlockAlgebra::new(random.dims.clone(), random.weights.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rows = Vec::new();
            let mut max_discrepancy: f64 = 0.0;
            let mut max_endpoint_dev: f64 = 0.0;
            for i in 0..random.count {
                let path = models::random_piecewise_path(&alg, &mut rng, random.knots, random.scale);
                let ph = flow::spectral_flow_phillips(&path, &phopts)?;
                let or = flow::spectral_flow_crossing_oracle(&path, s.samples, &tols)?;
                let endpoint = spectral::nonneg_trace(&path.at(path.interval().1), &tols)?
                    - spectral::nonneg_trace(&path.at(path.interval().0), &tols)?;
                max_discrepancy = max_discrepancy.max((ph.value - or.value).abs());
                max_endpoint_dev = max_endpoint_dev
                    .max((ph.value - endpoint).abs())
                    .max((or.value - endpoint).abs());
                rows.push(json!({
                    "index": i,
                    "phillips": ph.value,
                    "oracle": or.value,
                    "endpoint_trace_delta": endpoint,
                }));
            }
            Ok(RunOutput {
                result: json!({
                    "version": RESULT_VERSION,
                    "kind": "path-flow",
                    "count": random.count,
                    "max_method_discrepancy": max_discrepancy,
                    "max_endpoint_deviation": max_endpoint_dev,
                    "paths": rows,
                }),
                artifacts: Vec::new(),
            })
        }
    }
}

fn run_involution(s: &InvolutionScenario, seed: Option<u64>, cfg: &RunConfig) -> Result<RunOutput> {
    let tols = cfg.tolerances();
    let phopts = PhillipsOptions {
        tols,
        ..PhillipsOptions::default()
    };
    let odd: Vec<(String, OddFunctionSpec)> = s
        .odd_functions
        .iter()
        .map(|n| parse_odd_function(n).map(|f| (n.clone(), f)))
        .collect::<Result<_>>()?;

    let mut pairs: Vec<(Projection, Projection)> = Vec::new();
    if let (Some(p), Some(q)) = (&s.p, &s.q) {
        let alg = WeightedBlockAlgebra::new(
            p.0.dims.clone(),
            p.0.weights.clone(),
        )?;
        pairs.push((p.build_on(&alg)?, q.build_on(&alg)?));
    } else {
        let dims = s
            .dims
            .clone()
            .ok_or_else(|| SfError::structural("involution scenario needs dims or explicit P/Q"))?;
        let weights = s
            .weights
            .clone()
            .ok_or_else(|| SfError::structural("involution scenario needs weights"))?;
        let alg = WeightedBlockAlgebra::new(dims, weights)?;
        let mut rng = ChaCha8Rng::seed_from_u64(need_seed(seed, "projection pairs")?);
        for _ in 0..s.count.max(1) {
            if s.trivial_kernel {
                pairs.push(models::nearby_projection_pair(&alg, &mut rng, 0.5));
            } else {
                let p = models::random_projection(&alg, &mut rng);
                let q = models::random_projection(&alg, &mut rng);
                pairs.push((p, q));
            }
        }
    }

    let mut rows = Vec::new();
    let mut max_odd_spread: f64 = 0.0;
    let mut max_odd_vs_sf: f64 = 0.0;
    let mut max_intertwiner: f64 = 0.0;
    for (i, (p, q)) in pairs.iter().enumerate() {
        let path = flow::involution_path(p, q)?;
        let sf = flow::spectral_flow_phillips(&path, &phopts)?.value;
        let trace_delta = p.trace() - q.trace();
        let mut odd_values = serde_json::Map::new();
        let mut vals = Vec::new();
        for (name, f) in &odd {
            let v = flow::odd_function_flow(p, q, f)?;
            vals.push(v);
            odd_values.insert(name.clone(), json!(v));
        }
        if !vals.is_empty() {
            let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
            let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
            max_odd_spread = max_odd_spread.max(hi - lo);
            for v in &vals {
                max_odd_vs_sf = max_odd_vs_sf.max((v - sf).abs());
            }
        }
        let inter = flow::intertwiner_check(p, q, &tols)?;
        max_intertwiner = max_intertwiner.max(inter.max_residual);
        rows.push(json!({
            "index": i,
            "sf": sf,
            "trace_delta": trace_delta,
            "odd_function_values": odd_values,
            "intertwiner_residual": inter.max_residual,
        }));
    }
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "involution",
            "count": rows.len(),
            "max_odd_function_spread": max_odd_spread,
            "max_odd_vs_sf": max_odd_vs_sf,
            "max_intertwiner_residual": max_intertwiner,
            "pairs": rows,
        }),
        artifacts: Vec::new(),
    })
}

fn run_integral(s: &IntegralScenario, seed: Option<u64>, cfg: &RunConfig) -> Result<RunOutput> {
    let tols = cfg.tolerances();
    let quad = cfg.quad(s.quad.clone());
    let mut instances: Vec<(String, OperatorPath, Option<(sfkit_core::BlockOperator, sfkit_core::BlockOperator)>)> =
        Vec::new();
    match &s.model {
        IntegralModel::GridMultiplier { lo, hi, step, theta } => {
            let (_, path, d0, b) = models::grid_multiplier_path(*lo, *hi, *step, *theta)?;
            instances.push(("grid-multiplier".into(), path, Some((d0, b))));
        }
        IntegralModel::Circle { mmax, offset, shift } => {
            let (_, path) = models::circle_model_path(*mmax, *offset, *shift)?;
            instances.push(("circle".into(), path, None));
        }
        IntegralModel::RandomGauge {
            dims,
            weights,
            scale,
            count,
            invertible_gap,
        } => {
            let alg = WeightedBlockAlgebra::new(dims.clone(), weights.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(need_seed(seed, "gauge paths")?);
            for i in 0..*count {
                let (path, d0, b) = match invertible_gap {
                    Some(gap) => models::random_invertible_gauge_path(&alg, &mut rng, *scale, *gap),
                    None => models::random_gauge_path(&alg, &mut rng, *scale),
                };
                instances.push((format!("random-gauge-{i}"), path, Some((d0, b))));
            }
        }
        IntegralModel::Path { scenario } => {
            let (_, path) = scenario.build()?;
            instances.push(("path".into(), path, None));
        }
    }

    let mut rows = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut max_vs_oracle: f64 = 0.0;
    for (name, path, pair) in &instances {
        let oracle = flow::spectral_flow_crossing_oracle(path, s.oracle_samples, &tols)?.value;
        let mut entry = serde_json::Map::new();
        entry.insert("instance".into(), json!(name));
        entry.insert("oracle".into(), json!(oracle));
        let run_ps = s.method == "psummable" || s.method == "all";
        let run_theta = s.method == "theta" || s.method == "all";
        let run_getzler = s.method == "getzler" || s.method == "all";
        let run_eaf = s.method == "eaf" || s.method == "all";
        if run_ps || run_theta {
            let (d0, b) = match pair {
                Some((d0, b)) => (d0.clone(), b.clone()),
                None => {
                    let d0 = path.at(path.interval().0);
                    let d1 = path.at(path.interval().1);
                    let b = d1.sub(&d0);
                    (d0, b)
                }
            };
            if !integrals::is_gauge_pair(&d0, &b)? {
                warnings.push(format!(
                    "{name}: endpoints are not conjugate; correction terms omitted"
                ));
            }
            if run_ps {
                for &order in &s.n {
                    let v = integrals::psummable_flow_integral(&d0, &b, order, &quad)?;
                    entry.insert(format!("psummable_n{order}"), json!(v));
                    max_vs_oracle = max_vs_oracle.max((v - oracle).abs());
                }
            }
            if run_theta {
                let v = integrals::theta_flow_integral(&d0, &b, &quad)?;
                entry.insert("theta".into(), json!(v));
                max_vs_oracle = max_vs_oracle.max((v - oracle).abs());
            }
        }
        if run_getzler {
            let eps_list = if s.eps.is_empty() { vec![0.5] } else { s.eps.clone() };
            for eps in eps_list {
                let v = integrals::getzler_flow(path, eps, &quad)?;
                entry.insert(format!("getzler_eps{eps}"), json!(v));
                max_vs_oracle = max_vs_oracle.max((v - oracle).abs());
            }
        }
        if run_eaf {
            let t_list = if s.t.is_empty() { vec![1.0] } else { s.t.clone() };
            for t in t_list {
                let v = integrals::heat_trace_flow(path, t, &quad)?;
                entry.insert(format!("eaf_t{t}"), json!(v));
                max_vs_oracle = max_vs_oracle.max((v - oracle).abs());
            }
        }
        rows.push(Value::Object(entry));
    }
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "integral",
            "max_abs_deviation_from_oracle": max_vs_oracle,
            "instances": rows,
            "warnings": warnings,
        }),
        artifacts: Vec::new(),
    })
}

fn run_toeplitz(s: &ToeplitzScenario, cfg: &RunConfig) -> Result<RunOutput> {
    let quad = cfg.quad(None);
    let mut entry = serde_json::Map::new();
    entry.insert("version".into(), json!(RESULT_VERSION));
    entry.insert("kind".into(), json!("toeplitz"));

    if let Some([lo_k, hi_k]) = s.monomial_range {
        let mut rows = Vec::new();
        let mut max_dev: f64 = 0.0;
        for k in lo_k..=hi_k {
            let u = toeplitz::circle_symbol(&[(k, num_complex::Complex64::new(1.0, 0.0))]);
            let w = toeplitz::winding_number_circle(&u, &quad)?;
            let idx = toeplitz::toeplitz_index_halfline(&u, s.window, s.band)?;
            max_dev = max_dev.max((w - (-(k as f64))).abs()).max((idx - w).abs());
            rows.push(json!({"k": k, "winding": w, "halfline_index": idx}));
        }
        entry.insert("monomials".into(), json!(rows));
        entry.insert("max_deviation".into(), json!(max_dev));
    }

    if let Some(sym) = &s.symbol {
        let u = sym.build()?;
        let ops: Vec<String> = if s.ops.is_empty() {
            vec!["winding".into(), "halfline".into()]
        } else {
            s.ops.clone()
        };
        for op in &ops {
            match op.as_str() {
                "winding" => {
                    entry.insert(
                        "winding".into(),
                        json!(toeplitz::winding_number_circle(&u, &quad)?),
                    );
                }
                "halfline" => {
                    entry.insert(
                        "halfline_index".into(),
                        json!(toeplitz::toeplitz_index_halfline(&u, s.window, s.band)?),
                    );
                }
                "mean-winding" => {
                    let mode = if u.n_terms() == 1 {
                        MeanWindingMode::Exact
                    } else {
                        MeanWindingMode::Numeric { t_max: 500.0 }
                    };
                    entry.insert(
                        "mean_winding".into(),
                        json!(toeplitz::mean_winding_ap(&u, mode)?),
                    );
                }
                "lesch" => {
                    let v = toeplitz::trace_pairing(&u, &[1.0])?;
                    entry.insert("lesch_pairing".into(), json!([v.re, v.im]));
                }
                other => {
                    return Err(SfError::structural(format!("unknown toeplitz op '{other}'")));
                }
            }
        }
    }

    if let Some(m) = &s.multiplier {
        let model = MultiplierModel::uniform(m.lo, m.hi, m.step)?;
        let f = toeplitz::multiplier_spectral_flow(&model, m.theta)?;
        entry.insert("multiplier_flow".into(), json!(f.value));
        entry.insert("multiplier_theta".into(), json!(m.theta));
        if let Some(w) = f.coarse_grid_warning {
            entry.insert("multiplier_warning".into(), json!(w));
        }
    }

    if let Some(lam) = &s.lesch_lambda {
        let r = sfkit_core::serialize::FreqComponentJson::Exact(lam.clone()).to_rational()?;
        let lam_f = coeff::ratio_to_f64(&r);
        let u = TrigPolynomial::scalar_monomial_1d(r);
        let v = toeplitz::trace_pairing(&u, &[1.0])?;
        entry.insert("lesch_lambda".into(), json!(lam_f));
        entry.insert("lesch_pairing".into(), json!([v.re, v.im]));
        entry.insert(
            "lesch_expected".into(),
            json!(-lam_f / std::f64::consts::TAU),
        );
    }

    Ok(RunOutput {
        result: Value::Object(entry),
        artifacts: Vec::new(),
    })
}

/// Seeded SU(2)-monomial symbol: alternating diagonal-phase factors and
/// random constant SU(2) rotations.
pub fn su2_monomial_symbol(factors: usize, rng: &mut ChaCha8Rng) -> Result<TrigPolynomial> {
    use sfkit_core::trig::freq_from_ratios;
    let mut u = TrigPolynomial::one(3, 2);
    for j in 0..factors.max(3) {
        let axis = j % 3;
        let mut fp = [(0i64, 1i64); 3];
        fp[axis] = (1, 1);
        let mut fm = [(0i64, 1i64); 3];
        fm[axis] = (-1, 1);
        let mut d = TrigPolynomial::zero(3, 2);
        let mut cp = sfkit_core::trig::CMatrix::zeros(2, 2);
        cp[(0, 0)] = num_complex::Complex64::new(1.0, 0.0);
        d.add_term(freq_from_ratios(&fp), cp)?;
        let mut cm = sfkit_core::trig::CMatrix::zeros(2, 2);
        cm[(1, 1)] = num_complex::Complex64::new(1.0, 0.0);
        d.add_term(freq_from_ratios(&fm), cm)?;
        let r = TrigPolynomial::constant(3, models::random_su2(rng))?;
        u = u.mul(&d)?.mul(&r)?;
    }
    Ok(u)
}

fn run_ap(s: &ApScenario, seed: Option<u64>, _cfg: &RunConfig) -> Result<RunOutput> {
    let mut symbols: Vec<(String, TrigPolynomial, Option<f64>)> = Vec::new();
    for lam in &s.lambdas {
        let r = sfkit_core::serialize::FreqComponentJson::Exact(lam.clone()).to_rational()?;
        let lam_f = coeff::ratio_to_f64(&r);
        symbols.push((
            format!("monomial[{lam}]"),
            TrigPolynomial::scalar_monomial_1d(r),
            Some(lam_f),
        ));
    }
    if let Some(factors) = s.su2_factors {
        let mut rng = ChaCha8Rng::seed_from_u64(need_seed(seed, "SU(2) symbol")?);
        symbols.push((
            format!("su2[{factors}]"),
            su2_monomial_symbol(factors, &mut rng)?,
            None,
        ));
    }
    if let Some(trig) = &s.trig {
        symbols.push(("explicit".into(), trig.build()?, None));
    }
    if symbols.is_empty() {
        return Err(SfError::structural(
            "ap scenario needs lambdas, su2_factors, or an explicit symbol",
        ));
    }

    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    for (name, u, lambda) in &symbols {
        let f = apflow::ap_spectral_flow(u, s.n)?;
        let mut row = serde_json::Map::new();
        row.insert("symbol".into(), json!(name));
        row.insert("value".into(), json!(f.value));
        row.insert("imaginary_residual".into(), json!(f.imaginary_residual));
        if s.oracle {
            let oracle = match s.n {
                1 => {
                    let lam = lambda.ok_or_else(|| {
                        SfError::structural("multiplier oracle needs a monomial symbol")
                    })?;
                    let step = s.oracle_grid_step.unwrap_or(1e-3);
                    let model =
                        MultiplierModel::uniform(-lam.abs() - 2.0, lam.abs() + 2.0, step)?;
                    // e^{i lambda x} conjugates the multiplier by a shift of -lambda
                    toeplitz::multiplier_spectral_flow(&model, -lam)?.value
                }
                3 => apflow::degree_oracle_n3(u, 16),
                other => {
                    return Err(SfError::domain(format!("no oracle for n = {other}")));
                }
            };
            let dev = (f.value - oracle).abs();
            max_dev = max_dev.max(dev);
            row.insert("oracle".into(), json!(oracle));
            row.insert("deviation".into(), json!(dev));
        }
        rows.push(Value::Object(row));
    }
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "ap",
            "n": s.n,
            "max_oracle_deviation": max_dev,
            "symbols": rows,
        }),
        artifacts: Vec::new(),
    })
}

fn run_aps(s: &ApsScenario, seed: Option<u64>, cfg: &RunConfig) -> Result<RunOutput> {
    let tols = cfg.tolerances();
    let phopts = PhillipsOptions {
        tols,
        ..PhillipsOptions::default()
    };
    let mut rows = Vec::new();
    let mut max_dev: f64 = 0.0;
    let mut max_profile_residual: f64 = 0.0;

    if let Some(explicit) = &s.explicit {
        let (alg, path) = explicit.scenario.build()?;
        let p = explicit.bvp.p.build_on(&alg)?;
        let q = explicit.bvp.q.build_on(&alg)?;
        let sf = flow::spectral_flow_phillips(&path, &phopts)?.value;
        let bvp = BoundaryValueProblem {
            path,
            p,
            q,
            steps: explicit.bvp.steps,
        };
        let idx = aps::aps_index(&bvp)?;
        max_dev = (idx - sf).abs();
        rows.push(json!({"aps_index": idx, "sf": sf, "deviation": max_dev}));
    } else {
        let dims = s
            .dims
            .clone()
            .ok_or_else(|| SfError::structural("aps scenario needs dims or an explicit bvp"))?;
        let weights = s
            .weights
            .clone()
            .ok_or_else(|| SfError::structural("aps scenario needs weights"))?;
        let alg = WeightedBlockAlgebra::new(dims, weights)?;
        let mut rng = ChaCha8Rng::seed_from_u64(need_seed(seed, "BVP instances")?);
        for i in 0..s.count.max(1) {
            let p = models::random_projection(&alg, &mut rng);
            let q = models::random_projection(&alg, &mut rng);
            let path = flow::involution_path(&p, &q)?;
            let sf = flow::spectral_flow_phillips(&path, &phopts)?.value;
            let mut profile_residual: Option<f64> = None;
            if s.check_solution_profile {
                let kd = flow::kernel_decomposition(&p, &q, &tols);
                let mut worst: f64 = 0.0;
                for (k, basis) in kd.p_side.iter().enumerate() {
                    if basis.ncols() == 0 {
                        continue;
                    }
                    let w0 = basis.column(0).into_owned();
                    for (tt, phi) in aps::monodromy_checkpoints(&path, 2048, 8) {
                        let wt = phi.block(k) * &w0;
                        let expect = &w0
                            * num_complex::Complex64::new((-(tt * tt - tt)).exp(), 0.0);
                        worst = worst.max((&wt - &expect).norm());
                    }
                }
                max_profile_residual = max_profile_residual.max(worst);
                profile_residual = Some(worst);
            }
            let bvp = BoundaryValueProblem {
                path,
                p,
                q,
                steps: s.steps,
            };
            let idx = aps::aps_index(&bvp)?;
            max_dev = max_dev.max((idx - sf).abs());
            rows.push(json!({
                "index": i,
                "aps_index": idx,
                "sf": sf,
                "deviation": (idx - sf).abs(),
                "solution_profile_residual": profile_residual,
            }));
        }
    }
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "aps",
            "max_deviation": max_dev,
            "max_solution_profile_residual": max_profile_residual,
            "instances": rows,
        }),
        artifacts: Vec::new(),
    })
}

fn run_dixmier(s: &DixmierScenario) -> Result<RunOutput> {
    let n = s.n;
    let principal: ZetaFn = Arc::new(move |z: &[f64]| {
        let r2: f64 = z.iter().map(|x| x * x).sum();
        r2.sqrt().powi(-(n as i32))
    });
    let full: ZetaFn = Arc::new(move |z: &[f64]| {
        let r2: f64 = z.iter().map(|x| x * x).sum();
        (1.0 + r2).powf(-(n as f64) / 2.0)
    });
    let a = ApSymbol::multiplier(n, -(n as f64), full.clone()).with_principal(principal);
    let density = symbol::dixmier_density(&a, n)?;
    let scaled = symbol::scaled_counting(&full, n, s.lambda)?;
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "dixmier",
            "n": n,
            "density": density,
            "lambda": s.lambda,
            "scaled_counting": scaled,
            "relative_deviation": (scaled - density).abs() / density.abs().max(1e-300),
        }),
        artifacts: Vec::new(),
    })
}

fn run_coefficients(s: &CoefficientsScenario) -> Result<RunOutput> {
    let mut rows = Vec::new();
    for &n in &s.orders {
        let t = coeff::local_index_coefficients(n)?;
        rows.push(json!({
            "n": n,
            "alpha_zero": coeff::ratio_to_f64(t.alpha_zero()),
            "sigma_h0": coeff::ratio_to_f64(t.sigma((n - 1) / 2, 0)),
            "theorem_constant": [t.theorem_constant.re, t.theorem_constant.im],
            "sigma_vs_gamma_residual": t.residuals.sigma_vs_gamma,
            "duplication_residual": t.residuals.duplication,
        }));
    }
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "coefficients",
            "orders": rows,
        }),
        artifacts: Vec::new(),
    })
}
