use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use lane_emden_core::solver::TailProfile;
use lane_emden_core::{CriticalExponent, PohozaevReport, Regime, RegimeRefusal};
use serde::Serialize;

use crate::config::Experiment;
use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    NotConverged,
    Refused,
}

/// Variational solution compared with the shooting profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub sigma_star: f64,
    pub amplitude: f64,
    pub energy: f64,
    pub c0: f64,
    pub amplitude_rel_diff: f64,
    pub pointwise_rel_diff: f64,
    pub profile_pohozaev_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorDiagnostics {
    pub k: u32,
    pub sector_c0: f64,
    pub equivariance_defect: f64,
    pub residual_away_from_seams: f64,
    pub nodal_component_sizes_min: usize,
    pub nodal_component_sizes_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub config_digest: String,
    pub status: Status,
    /// Set when the run ignored a nonexistence-regime refusal.
    pub forced: bool,
    #[serde(rename = "N")]
    pub n: u32,
    pub m: u32,
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub n_r: usize,
    pub n_s: usize,
    #[serde(rename = "Z")]
    pub z_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<usize>,
    pub regime: Regime,
    pub critical_exponent: CriticalExponent,
    pub kappa: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pde_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constraint_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fallback_steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pohozaev: Option<PohozaevReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pohozaev_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_share: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_evenness_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodal_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorDiagnostics>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refusal: Option<RegimeRefusal>,
    pub seconds: f64,
}

impl ResultRecord {
    /// Nonconvergence only counts against the exit code for runs that were
    /// expected to have a solution.
    pub fn failed(&self) -> bool {
        self.status == Status::NotConverged && !(self.forced && self.regime != Regime::Subcritical)
    }
}

/// Extra CSV file written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file_name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub experiment: Experiment,
    pub config_digest: String,
    pub config: serde_json::Value,
    pub records: Vec<ResultRecord>,
    /// Observed convergence orders (`refine`) keyed by quantity.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub orders: BTreeMap<String, Vec<f64>>,
    /// Ratios of successive truncation shares (`pohozaev`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_decay: Option<Vec<f64>>,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    /// 0 success, 3 nonconvergence, 4 refusal.
    pub fn exit_code(&self) -> i32 {
        if self.records.iter().any(ResultRecord::failed) {
            3
        } else if self.records.iter().any(|r| r.status == Status::Refused) {
            4
        } else {
            0
        }
    }

    /// Sorted-key JSON of the whole report.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        let mut text = serde_json::to_string_pretty(&value).expect("value serializes");
        text.push('\n');
        text
    }

    /// The report with every `seconds` field removed.
    pub fn payload(&self) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(records) = value.get_mut("records").and_then(|r| r.as_array_mut()) {
            for r in records {
                if let Some(obj) = r.as_object_mut() {
                    obj.remove("seconds");
                }
            }
        }
        value
    }
}

pub const SUMMARY_COLUMNS: [&str; 16] = [
    "N",
    "m",
    "a",
    "b",
    "p",
    "n_r",
    "n_s",
    "Z",
    "c0",
    "pde_residual",
    "pohozaev_residual",
    "kappa",
    "shell_flux",
    "trunc_flux",
    "nodal_count",
    "seconds",
];

/// Shortest round-trip form, matching `results.json`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float serializes")
    } else {
        x.to_string()
    }
}

fn opt_f64(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn summary_row(r: &ResultRecord) -> [String; 16] {
    [
        r.n.to_string(),
        r.m.to_string(),
        fmt_f64(r.a),
        fmt_f64(r.b),
        fmt_f64(r.p),
        r.n_r.to_string(),
        r.n_s.to_string(),
        fmt_f64(r.z_max),
        opt_f64(r.c0),
        opt_f64(r.pde_residual),
        opt_f64(r.pohozaev_residual),
        fmt_f64(r.kappa),
        opt_f64(r.pohozaev.map(|p| p.shell_flux)),
        opt_f64(r.pohozaev.map(|p| p.trunc_flux)),
        r.nodal_count.map(|c| c.to_string()).unwrap_or_default(),
        fmt_f64(r.seconds),
    ]
}

/// Writes `results.json`, `summary.csv` and any extra tables into `out_dir`.
pub fn emit_report(report: &Report, out_dir: &Path) -> Result<(), HarnessError> {
    if report.records.is_empty() {
        return Err(HarnessError::config("records", "nothing to write"));
    }
    fs::create_dir_all(out_dir).map_err(|e| HarnessError::io(out_dir, e))?;

    let json_path = out_dir.join("results.json");
    fs::write(&json_path, report.to_json()).map_err(|e| HarnessError::io(&json_path, e))?;

    let csv_path = out_dir.join("summary.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(SUMMARY_COLUMNS)?;
    for r in &report.records {
        w.write_record(summary_row(r))?;
    }
    w.flush().map_err(|e| HarnessError::io(&csv_path, e))?;

    for table in &report.tables {
        let path = out_dir.join(&table.file_name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&table.header)?;
        for row in &table.rows {
            w.write_record(row.iter().map(|&x| fmt_f64(x)))?;
        }
        w.flush().map_err(|e| HarnessError::io(&path, e))?;
    }
    Ok(())
}
