//! Machine-readable result rows and the self-checking verification report.

use serde::{Deserialize, Serialize};

use crate::sphere::{OperatorKind, SpectrumTable};

pub const SCHEMA_VERSION: u32 = 1;

/// Sphere-side inequality row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereRow {
    pub theorem: String,
    pub n: usize,
    pub k: usize,
    pub constant: f64,
    pub min_ratio: f64,
    pub extremal_gap: f64,
    pub trials: usize,
    pub ratio_tolerance: f64,
    pub extremal_tolerance: f64,
    pub trivial: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl SphereRow {
    /// Recomputes the pass flag from the stored numbers.
    pub fn recompute_pass(&self) -> bool {
        if self.trivial {
            return true;
        }
        self.min_ratio >= self.constant * (1.0 - self.ratio_tolerance)
            && self.extremal_gap <= self.extremal_tolerance
    }
}

/// Euclidean differential-inequality row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EuclidRow {
    pub theorem: String,
    pub n: usize,
    pub k: usize,
    pub constant: f64,
    pub ratio_min: f64,
    pub ratio_extremal: f64,
    pub quadrature_error: f64,
    pub trials: usize,
    pub ratio_tolerance: f64,
    pub extremal_tolerance: f64,
    pub trivial: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl EuclidRow {
    pub fn recompute_pass(&self) -> bool {
        if self.trivial {
            return true;
        }
        let one_sided = self.ratio_min >= self.constant * (1.0 - self.ratio_tolerance);
        let extremal = self.ratio_extremal.is_nan()
            || (self.ratio_extremal - self.constant).abs() <= self.extremal_tolerance;
        one_sided && extremal
    }
}

/// Kernel-bound row (convolution inequalities).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelRow {
    pub theorem: String,
    pub n: usize,
    pub k: usize,
    pub bound: f64,
    pub ratio_max: f64,
    pub quadrature_error: f64,
    pub trials: usize,
    pub trivial: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl KernelRow {
    pub fn recompute_pass(&self) -> bool {
        if self.trivial {
            return true;
        }
        self.ratio_max <= self.bound * (1.0 + self.quadrature_error)
    }
}

/// Operator-identity row (residual battery).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: String,
    pub n: usize,
    pub k: usize,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub detail: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl IdentityRow {
    pub fn recompute_pass(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportRow {
    Sphere(SphereRow),
    Euclid(EuclidRow),
    Kernel(KernelRow),
    Identity(IdentityRow),
}

impl ReportRow {
    pub fn pass(&self) -> bool {
        match self {
            ReportRow::Sphere(r) => r.pass,
            ReportRow::Euclid(r) => r.pass,
            ReportRow::Kernel(r) => r.pass,
            ReportRow::Identity(r) => r.pass,
        }
    }

    pub fn recompute_pass(&self) -> bool {
        match self {
            ReportRow::Sphere(r) => r.recompute_pass(),
            ReportRow::Euclid(r) => r.recompute_pass(),
            ReportRow::Kernel(r) => r.recompute_pass(),
            ReportRow::Identity(r) => r.recompute_pass(),
        }
    }

    pub fn strip_timing(&mut self) {
        match self {
            ReportRow::Sphere(r) => r.wall_ms = None,
            ReportRow::Euclid(r) => r.wall_ms = None,
            ReportRow::Kernel(r) => r.wall_ms = None,
            ReportRow::Identity(r) => r.wall_ms = None,
        }
    }
}

/// Top-level verification report: `schema`, tool identity, the config echo,
/// rows, and an aggregate pass flag. Wall-clock data lives only in the
/// per-row `wall_ms` fields and `total_wall_ms`, so determinism comparisons
/// can strip timing without touching results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub tool: ToolInfo,
    pub config: serde_json::Value,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl VerificationReport {
    pub fn new(config: serde_json::Value, rows: Vec<ReportRow>) -> Self {
        let pass = rows.iter().all(|r| r.pass());
        VerificationReport {
            schema: SCHEMA_VERSION,
            tool: ToolInfo {
                name: "dirac-sharp".to_string(),
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            config,
            rows,
            pass,
            total_wall_ms: None,
        }
        .validated()
    }

    /// Re-derives every pass flag from stored numbers; panics on mismatch so
    /// a report can never claim pass with failing numbers.
    fn validated(self) -> Self {
        for row in &self.rows {
            assert_eq!(
                row.pass(),
                row.recompute_pass(),
                "report row pass flag inconsistent with stored numbers"
            );
        }
        self
    }

    /// True when every row's stored pass flag matches its recomputation and
    /// the aggregate flag matches the rows.
    pub fn self_check(&self) -> bool {
        self.rows.iter().all(|r| r.pass() == r.recompute_pass())
            && self.pass == self.rows.iter().all(|r| r.pass())
    }

    pub fn strip_timing(&mut self) {
        self.total_wall_ms = None;
        for r in &mut self.rows {
            r.strip_timing();
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

pub fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// RFC-4180 CSV for a spectrum table: m, lambda_plus, lambda_minus,
/// multiplicity.
pub fn spectrum_to_csv(table: &SpectrumTable) -> String {
    let mut out = String::from("m,lambda_plus,lambda_minus,multiplicity\r\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{},{},{},{}\r\n",
            row.m, row.lambda_plus, row.lambda_minus, row.multiplicity
        ));
    }
    out
}

pub fn spectrum_to_json(table: &SpectrumTable) -> String {
    let op = match &table.operator {
        OperatorKind::Dsk(k) => serde_json::json!({"kind": "dsk", "k": k}),
        OperatorKind::AlphaChain(a) => serde_json::json!({"kind": "alpha_chain", "alphas": a}),
    };
    let rows: Vec<serde_json::Value> = table
        .rows
        .iter()
        .map(|r| {
            serde_json::json!({
                "m": r.m,
                "lambda_plus": r.lambda_plus,
                "lambda_minus": r.lambda_minus,
                "multiplicity": r.multiplicity,
            })
        })
        .collect();
    serde_json::to_string_pretty(&serde_json::json!({
        "schema": SCHEMA_VERSION,
        "operator": op,
        "n": table.n,
        "rows": rows,
    }))
    .expect("spectrum serialization")
}

/// Plain-text table for terminal output.
pub fn spectrum_to_text(table: &SpectrumTable) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>4} {:>18} {:>18} {:>14}\n",
        "m", "lambda_plus", "lambda_minus", "multiplicity"
    ));
    for r in &table.rows {
        out.push_str(&format!(
            "{:>4} {:>18.10} {:>18.10} {:>14}\n",
            r.m, r.lambda_plus, r.lambda_minus, r.multiplicity
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{spectrum_table, OperatorKind};

    #[test]
    fn csv_is_rfc4180() {
        let t = spectrum_table(OperatorKind::Dsk(1), 3, 2);
        let csv = spectrum_to_csv(&t);
        assert!(csv.starts_with("m,lambda_plus,lambda_minus,multiplicity\r\n"));
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(csv_escape("a,b"), "\"a,b\"");
        assert_eq!(csv_escape("plain"), "plain");
        assert_eq!(csv_escape("q\"q"), "\"q\"\"q\"");
    }

    #[test]
    fn report_self_check() {
        let row = ReportRow::Sphere(SphereRow {
            theorem: "dirac_lower_bound".into(),
            n: 2,
            k: 1,
            constant: 1.0,
            min_ratio: 1.2,
            extremal_gap: 1e-12,
            trials: 10,
            ratio_tolerance: 1e-9,
            extremal_tolerance: 1e-9,
            trivial: false,
            pass: true,
            note: String::new(),
            wall_ms: Some(3.0),
        });
        let mut rep = VerificationReport::new(serde_json::json!({"seed": 7}), vec![row]);
        assert!(rep.pass);
        assert!(rep.self_check());
        rep.strip_timing();
        let s = rep.to_json_pretty();
        assert!(!s.contains("wall_ms"));
    }

    #[test]
    #[should_panic(expected = "inconsistent")]
    fn inconsistent_rows_rejected() {
        let row = ReportRow::Sphere(SphereRow {
            theorem: "dirac_lower_bound".into(),
            n: 2,
            k: 1,
            constant: 1.0,
            min_ratio: 0.5,
            extremal_gap: 0.0,
            trials: 1,
            ratio_tolerance: 1e-9,
            extremal_tolerance: 1e-9,
            trivial: false,
            pass: true,
            note: String::new(),
            wall_ms: None,
        });
        let _ = VerificationReport::new(serde_json::json!({}), vec![row]);
    }
}
