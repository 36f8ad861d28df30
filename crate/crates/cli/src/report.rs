//! Run reports: per-probe rows plus a spec echo, serialized as CSV or JSON.
//!
//! CSV prints floats with 17 significant digits so values round-trip exactly;
//! the CSV body contains no timing, so identical specs produce byte-identical
//! bodies. JSON mirrors every field and additionally carries timing and the
//! tool version.

use serde::Serialize;

use crate::spec::ProblemSpec;

/// CSV column order; frozen as part of the external contract.
pub const CSV_HEADER: &str = "x,g,iterations,certified_bound,eps_star,dist_f_g,verdict";

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub x: f64,
    pub g: f64,
    pub iterations: usize,
    pub certified_bound: f64,
    pub eps_star: f64,
    pub dist_f_g: f64,
    pub verdict: String,
}

impl Row {
    /// A row for a probe that produced no value (divergence, domain escape).
    pub fn failed(x: f64, verdict: impl Into<String>) -> Self {
        Row {
            x,
            g: f64::NAN,
            iterations: 0,
            certified_bound: f64::NAN,
            eps_star: f64::NAN,
            dist_f_g: f64::NAN,
            verdict: verdict.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginEntry {
    pub probe: f64,
    pub n: usize,
    pub margin: f64,
}

/// Above this many margin records the full list is elided from the JSON
/// report and only the count and minimum are kept.
pub const MARGIN_ELISION_THRESHOLD: usize = 2000;

#[derive(Debug, Clone, Serialize)]
pub struct CertificateSummary {
    pub condition: String,
    pub verdict: String,
    pub horizon: usize,
    pub margin_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_margin: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub margins: Vec<MarginEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<MarginEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub spec: ProblemSpec,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificates: Option<Vec<CertificateSummary>>,
    /// Wall-clock duration of the run; excluded from CSV output so CSV
    /// bodies stay deterministic.
    pub timing_ms: f64,
    pub version: &'static str,
}

impl RunReport {
    pub fn new(spec: ProblemSpec, rows: Vec<Row>, timing_ms: f64) -> Self {
        RunReport {
            spec,
            rows,
            certificates: None,
            timing_ms,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn with_certificates(mut self, certs: Vec<CertificateSummary>) -> Self {
        self.certificates = Some(certs);
        self
    }
}

/// 17 significant digits: enough to reconstruct the exact double.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv(report: &RunReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_f64(r.x),
            fmt_f64(r.g),
            r.iterations,
            fmt_f64(r.certified_bound),
            fmt_f64(r.eps_star),
            fmt_f64(r.dist_f_g),
            r.verdict,
        ));
    }
    out
}

pub fn to_json(report: &RunReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}
