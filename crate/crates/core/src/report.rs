//! Report rows and run manifests.
//!
//! Every contingency — screened or brute-forced — flattens to one record
//! with a fixed column set:
//!
//! ```text
//!   x,branches,overflow,undervoltage,overvoltage,reserve_limit,unsolved,
//!   islanded_load_mw,gbc_score,runtime_ms
//! ```
//!
//! The `branches` cell lists the outage as `[from,to]` bus-id pairs. CSV
//! and JSON carry the same fields; JSON wraps them in an object that also
//! names the run manifest, CSV references it in a `#` preamble line.
//!
//! Reports must be byte-identical across runs and thread counts, so
//! wall-clock durations stay out of them by default: `runtime_ms` is
//! emitted empty unless explicitly populated, and all timing detail lives
//! in the manifest, which is written as a separate artifact.

use serde::Serialize;

use crate::validation::ViolationReport;

/// One outage set and its validated outcome, in report-column form.
#[derive(Debug, Clone, Serialize)]
pub struct ContingencyRecord {
    pub x: usize,
    /// Outage as [from,to] bus-id pairs, in branch-index order.
    pub branches: Vec<(i64, i64)>,
    pub overflow: usize,
    pub undervoltage: usize,
    pub overvoltage: usize,
    pub reserve_limit: bool,
    pub unsolved: bool,
    pub islanded_load_mw: f64,
    /// Final group score for screened candidates; absent for brute force.
    pub gbc_score: Option<f64>,
    /// Populated only when timing output is requested (it breaks
    /// byte-for-byte reproducibility).
    pub runtime_ms: Option<f64>,
    /// Positions of the outaged branches in the parent case.
    #[serde(skip)]
    pub branch_indices: Vec<usize>,
    /// Full classification, including per-element details.
    #[serde(skip)]
    pub report: ViolationReport,
}

impl ContingencyRecord {
    pub fn new(
        branch_indices: Vec<usize>,
        branches: Vec<(i64, i64)>,
        report: ViolationReport,
        gbc_score: Option<f64>,
        runtime_ms: Option<f64>,
    ) -> ContingencyRecord {
        assert_eq!(branch_indices.len(), branches.len());
        ContingencyRecord {
            x: branches.len(),
            branches,
            overflow: report.overflow,
            undervoltage: report.undervoltage,
            overvoltage: report.overvoltage,
            reserve_limit: report.reserve_limit,
            unsolved: report.unsolved,
            islanded_load_mw: report.islanded_load_mw,
            gbc_score,
            runtime_ms,
            branch_indices,
            report,
        }
    }
}

/// Wall-clock per stage, milliseconds.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct StageTimings {
    pub metrics_ms: f64,
    pub subgraph_ms: f64,
    pub gbc_ms: f64,
    pub validation_ms: f64,
}

impl StageTimings {
    pub fn total_ms(&self) -> f64 {
        self.metrics_ms + self.subgraph_ms + self.gbc_ms + self.validation_ms
    }
}

/// Timing point of an `--sweep-x` run.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub x: usize,
    pub stages: StageTimings,
}

/// Everything needed to reproduce and audit a run. Reports reference the
/// manifest by file name; the manifest is the only artifact allowed to
/// differ between otherwise identical runs (it holds the timings).
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub case_path: String,
    /// SHA-256 of the case file bytes.
    pub case_sha256: String,
    /// Echo of the effective configuration, flag by flag.
    pub config: serde_json::Value,
    pub stages: StageTimings,
    /// Per-x timings when sweeping contingency order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Vec<SweepPoint>>,
    pub records_written: usize,
}

pub const CSV_HEADER: &str = "x,branches,overflow,undervoltage,overvoltage,reserve_limit,\
unsolved,islanded_load_mw,gbc_score,runtime_ms";

/// `{}` float formatting: shortest string that round-trips.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

fn branch_cell(pairs: &[(i64, i64)]) -> String {
    let body: Vec<String> = pairs.iter().map(|(f, t)| format!("[{f},{t}]")).collect();
    // The pairs contain commas, so the cell is always quoted.
    format!("\"{}\"", body.join(","))
}

fn csv_row(r: &ContingencyRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        r.x,
        branch_cell(&r.branches),
        r.overflow,
        r.undervoltage,
        r.overvoltage,
        r.reserve_limit,
        r.unsolved,
        fmt_f64(r.islanded_load_mw),
        r.gbc_score.map(fmt_f64).unwrap_or_default(),
        r.runtime_ms.map(fmt_f64).unwrap_or_default(),
    )
}

/// Renders records as CSV. `manifest` is the file name of the run manifest
/// the report belongs to, referenced in the preamble.
pub fn to_csv(records: &[ContingencyRecord], manifest: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(m) = manifest {
        out.push_str(&format!("# manifest: {m}\n"));
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

/// Renders records as JSON mirroring the CSV columns.
pub fn to_json(records: &[ContingencyRecord], manifest: Option<&str>) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        #[serde(skip_serializing_if = "Option::is_none")]
        manifest: Option<&'a str>,
        records: &'a [ContingencyRecord],
    }
    let mut s = serde_json::to_string_pretty(&Doc { manifest, records })
        .expect("report serialization cannot fail");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::validation::ViolationReport;

    fn sample_report() -> ViolationReport {
        ViolationReport {
            overflow: 2,
            undervoltage: 18,
            overvoltage: 0,
            reserve_limit: true,
            unsolved: false,
            islanded_load_mw: 0.0,
            reserve_margin_mw: 120.5,
            reserve_req_mw: 495.0,
            details: Vec::new(),
        }
    }

    #[test]
    fn csv_matches_golden_layout() {
        let rec = ContingencyRecord::new(
            vec![7, 9, 11],
            vec![(136, 133), (135, 133), (125, 123)],
            sample_report(),
            Some(5.25),
            None,
        );
        let csv = to_csv(&[rec], Some("manifest.json"));
        let expected = "\
# manifest: manifest.json
x,branches,overflow,undervoltage,overvoltage,reserve_limit,unsolved,islanded_load_mw,gbc_score,runtime_ms
3,\"[136,133],[135,133],[125,123]\",2,18,0,true,false,0,5.25,
";
        assert_eq!(csv, expected);
    }

    #[test]
    fn json_mirrors_csv_fields() {
        let rec = ContingencyRecord::new(
            vec![3],
            vec![(189, 187)],
            sample_report(),
            None,
            None,
        );
        let json = to_json(&[rec], Some("m.json"));
        let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(doc["manifest"], "m.json");
        let row = &doc["records"][0];
        assert_eq!(row["x"], 1);
        assert_eq!(row["branches"][0][0], 189);
        assert_eq!(row["branches"][0][1], 187);
        assert_eq!(row["overflow"], 2);
        assert_eq!(row["undervoltage"], 18);
        assert_eq!(row["reserve_limit"], true);
        assert_eq!(row["unsolved"], false);
        assert_eq!(row["gbc_score"], serde_json::Value::Null);
        assert_eq!(row["runtime_ms"], serde_json::Value::Null);
        // Internal plumbing stays out of the mirror.
        assert!(row.get("branch_indices").is_none());
        assert!(row.get("report").is_none());
    }

    #[test]
    fn floats_use_shortest_roundtrip_form() {
        let mut report = sample_report();
        report.islanded_load_mw = 62.400000000000006;
        let rec = ContingencyRecord::new(vec![0], vec![(1, 2)], report, Some(0.1), Some(3.0));
        let row = csv_row(&rec);
        assert!(row.ends_with(",62.400000000000006,0.1,3"), "{row}");
    }

    #[test]
    fn manifest_serializes_without_sweep_when_absent() {
        let m = RunManifest {
            tool: "gridscreen".into(),
            version: "0.1.0".into(),
            case_path: "fixtures/case200.m".into(),
            case_sha256: "ab".repeat(32),
            config: serde_json::json!({"x": 3, "d": 4, "sl": 4}),
            stages: StageTimings::default(),
            sweep: None,
            records_written: 4,
        };
        let v: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert!(v.get("sweep").is_none());
        assert_eq!(v["config"]["x"], 3);
        assert_eq!(v["stages"]["metrics_ms"], 0.0);
    }
}
