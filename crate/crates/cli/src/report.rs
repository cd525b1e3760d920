//! The conventions report: each index/winding formula evaluated verbatim on
//! a reference symbol, next to the authoritative crossing/multiplier oracle
//! value, with the measured ratio.

use serde_json::json;

use sfkit_core::error::Result;
use sfkit_core::quad::QuadratureOptions;
use sfkit_core::toeplitz::{self, MeanWindingMode, MultiplierModel};
use sfkit_core::trig::TrigPolynomial;

use crate::scenario::{CsvArtifact, RunConfig, RunOutput, RESULT_VERSION};

pub struct ConventionRow {
    pub formula: &'static str,
    pub reference: &'static str,
    pub raw_value: f64,
    pub oracle_value: f64,
}

impl ConventionRow {
    fn ratio(&self) -> f64 {
        if self.oracle_value == 0.0 {
            f64::NAN
        } else {
            self.raw_value / self.oracle_value
        }
    }
}

/// Evaluate every formula on its reference symbol.
///
/// Reference conventions: the unitary e^{i k x} conjugates the line
/// multiplier by a shift of -k, so the oracle flow is -k; the integer
/// winding integral is the reference for the periodic routes.
pub fn conventions_rows(cfg: &RunConfig) -> Result<Vec<ConventionRow>> {
    let quad = cfg.quad(Some(QuadratureOptions::default()));
    let mut rows = Vec::new();

    // periodic symbol u = e^{i x}
    let k = 1i64;
    let u = toeplitz::circle_symbol(&[(k, num_complex::Complex64::new(1.0, 0.0))]);
    let oracle_periodic = {
        // integer multiplier grid, unit weights, shift by -k
        let model = MultiplierModel::uniform(-3.0, 3.0, 0.05)?;
        toeplitz::multiplier_spectral_flow(&model, -(k as f64))?.value
    };
    let winding = toeplitz::winding_number_circle(&u, &quad)?;
    rows.push(ConventionRow {
        formula: "winding_number_circle",
        reference: "Gohberg-Krein winding integral",
        raw_value: winding,
        oracle_value: oracle_periodic,
    });
    let section = toeplitz::toeplitz_index_halfline(&u, 200, None)?;
    rows.push(ConventionRow {
        formula: "toeplitz_index_halfline",
        reference: "finite-section kernel counting",
        raw_value: section,
        oracle_value: oracle_periodic,
    });
    let mean_w = toeplitz::mean_winding_ap(&u, MeanWindingMode::Exact)?;
    rows.push(ConventionRow {
        formula: "mean_winding_ap",
        reference: "mean-motion integral (almost periodic)",
        raw_value: mean_w,
        oracle_value: oracle_periodic,
    });
    let lesch = toeplitz::trace_pairing(&u, &[1.0])?;
    rows.push(ConventionRow {
        formula: "lesch_pairing",
        reference: "trace pairing with the derivation",
        raw_value: lesch.re,
        oracle_value: oracle_periodic,
    });

    // almost periodic monomial u = e^{i lambda x}, lambda = 1/3
    let lam_num = 1i64;
    let lam_den = 3i64;
    let lam = lam_num as f64 / lam_den as f64;
    let uap = TrigPolynomial::scalar_monomial_1d(num::rational::Ratio::new(
        num::BigInt::from(lam_num),
        num::BigInt::from(lam_den),
    ));
    let oracle_ap = {
        let model = MultiplierModel::uniform(-2.0, 2.0, 1e-3)?;
        toeplitz::multiplier_spectral_flow(&model, -lam)?.value
    };
    rows.push(ConventionRow {
        formula: "mean_winding_ap[lambda=1/3]",
        reference: "mean-motion integral (almost periodic)",
        raw_value: toeplitz::mean_winding_ap(&uap, MeanWindingMode::Exact)?,
        oracle_value: oracle_ap,
    });
    rows.push(ConventionRow {
        formula: "lesch_pairing[lambda=1/3]",
        reference: "trace pairing with the derivation",
        raw_value: toeplitz::trace_pairing(&uap, &[1.0])?.re,
        oracle_value: oracle_ap,
    });
    let ap_flow = sfkit_core::apflow::ap_spectral_flow(&uap, 1)?;
    rows.push(ConventionRow {
        formula: "ap_spectral_flow[n=1]",
        reference: "top-degree pairing constant",
        raw_value: ap_flow.value,
        oracle_value: oracle_ap,
    });

    // multiplier shift model itself
    let theta = 0.1416;
    let model = MultiplierModel::uniform(-2.0, 2.0, 1e-3)?;
    rows.push(ConventionRow {
        formula: "multiplier_spectral_flow",
        reference: "shift model chi-trace difference",
        raw_value: toeplitz::multiplier_spectral_flow(&model, theta)?.value,
        oracle_value: theta,
    });

    Ok(rows)
}

pub fn conventions_csv(rows: &[ConventionRow]) -> String {
    let mut out = String::from("formula,paper_ref,raw_value,oracle_value,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.formula,
            r.reference,
            r.raw_value,
            r.oracle_value,
            r.ratio()
        ));
    }
    out
}

pub fn run_conventions(cfg: &RunConfig) -> Result<RunOutput> {
    let rows = conventions_rows(cfg)?;
    let csv = conventions_csv(&rows);
    let json_rows: Vec<serde_json::Value> = rows
        .iter()
        .map(|r| {
            json!({
                "formula": r.formula,
                "paper_ref": r.reference,
                "raw_value": r.raw_value,
                "oracle_value": r.oracle_value,
                "ratio": r.ratio(),
            })
        })
        .collect();
    Ok(RunOutput {
        result: json!({
            "version": RESULT_VERSION,
            "kind": "conventions",
            "rows": json_rows,
        }),
        artifacts: vec![CsvArtifact {
            name: "conventions.csv".into(),
            content: csv,
        }],
    })
}
