//! Run reports: target-versus-estimate rows per snapshot, a summary and
//! provenance, stored as pretty-printed JSON with a schema version.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::fsutil::write_atomic;
use crate::{Error, Mode, Result};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Absolute-error tolerances. Missing keys in a tolerance file keep these
/// defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub range_m: f64,
    pub velocity_mps: f64,
    pub angle_deg: f64,
    pub power_db: f64,
    pub satr_range_m: f64,
    pub satr_angle_deg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            range_m: 1.9,
            velocity_mps: 0.25,
            angle_deg: 1.0,
            power_db: 1.0,
            satr_range_m: 0.02,
            satr_angle_deg: 0.25,
        }
    }
}

impl Tolerances {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| text[..s.start].matches('\n').count() + 1).unwrap_or(0),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parameter {
    RangeM,
    VelocityMps,
    ElevationDeg,
    AzimuthDeg,
    AngleDeg,
    PowerDb,
}

impl Parameter {
    pub fn label(self) -> &'static str {
        match self {
            Parameter::RangeM => "range (m)",
            Parameter::VelocityMps => "velocity (m/s)",
            Parameter::ElevationDeg => "elevation (deg)",
            Parameter::AzimuthDeg => "azimuth (deg)",
            Parameter::AngleDeg => "angle (deg)",
            Parameter::PowerDb => "power (dB)",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotEstimable,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::NotEstimable => "not estimable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRow {
    pub parameter: Parameter,
    pub target: f64,
    pub estimated: Option<f64>,
    pub abs_error: Option<f64>,
    pub tolerance: f64,
    pub status: Status,
}

impl ParameterRow {
    /// Compares `estimated` against `target`; `None` means no matching
    /// detection and fails.
    pub fn compare(parameter: Parameter, target: f64, estimated: Option<f64>, tolerance: f64) -> Self {
        let abs_error = estimated.map(|e| (e - target).abs());
        let status = match abs_error {
            // grid estimates can land exactly one tolerance away; absorb float noise there
            Some(err) if err <= tolerance + 1e-9 * tolerance.abs().max(1.0) => Status::Pass,
            _ => Status::Fail,
        };
        Self { parameter, target, estimated, abs_error, tolerance, status }
    }

    pub fn not_estimable(parameter: Parameter, target: f64, tolerance: f64) -> Self {
        Self { parameter, target, estimated: None, abs_error: None, tolerance, status: Status::NotEstimable }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetReport {
    /// Index of the target within its snapshot.
    pub target: usize,
    pub detected: bool,
    pub rows: Vec<ParameterRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotReport {
    pub label: String,
    pub targets: Vec<TargetReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    pub not_estimable: usize,
    pub all_pass: bool,
    pub worst_power_error_db: Option<f64>,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario_name: String,
    /// SHA-256 of the scenario's canonical TOML serialization.
    pub scenario_sha256: String,
    pub tool_version: String,
    pub mode: Mode,
    pub quantization: String,
    pub n_time: usize,
    pub n_freq: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub provenance: Provenance,
    pub tolerances: Tolerances,
    pub snapshots: Vec<SnapshotReport>,
    pub summary: Summary,
}

impl RunReport {
    pub fn new(provenance: Provenance, tolerances: Tolerances, snapshots: Vec<SnapshotReport>, runtime_s: f64) -> Self {
        let rows = || snapshots.iter().flat_map(|s| &s.targets).flat_map(|t| &t.rows);
        let count = |st: Status| rows().filter(|r| r.status == st).count();
        let worst_power_error_db = rows()
            .filter(|r| r.parameter == Parameter::PowerDb)
            .filter_map(|r| r.abs_error)
            .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
        let summary = Summary {
            checks: rows().count(),
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            not_estimable: count(Status::NotEstimable),
            all_pass: count(Status::Fail) == 0,
            worst_power_error_db,
            runtime_s,
        };
        Self { schema_version: REPORT_SCHEMA_VERSION, provenance, tolerances, snapshots, summary }
    }

    pub fn all_pass(&self) -> bool {
        self.summary.all_pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), message: e.to_string() })?;
        let found = value.get("schema_version").and_then(|v| v.as_u64());
        if found != Some(REPORT_SCHEMA_VERSION as u64) {
            return Err(Error::SchemaVersion { expected: REPORT_SCHEMA_VERSION, found: found.map_or(0, |v| v as u32) });
        }
        serde_json::from_value(value).map_err(|e| Error::Parse { line: 0, message: e.to_string() })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json().as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Aligned text table, one line per parameter check. The row with the
    /// largest error-to-tolerance ratio is marked with `*`.
    pub fn render(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        writeln!(out, "scenario  {} ({}, sha256 {})", p.scenario_name, p.mode, short(&p.scenario_sha256)).unwrap();
        writeln!(out, "sweep     N_t={} N_f={}  quantization {}", p.n_time, p.n_freq, p.quantization).unwrap();
        writeln!(out, "tool      {}", p.tool_version).unwrap();
        out.push('\n');

        let header = ["", "snapshot", "target", "parameter", "target", "estimated", "|error|", "tolerance", "status"];
        let mut lines: Vec<[String; 9]> = Vec::new();
        let mut worst: Option<(usize, f64)> = None;
        for snap in &self.snapshots {
            for t in &snap.targets {
                for r in &t.rows {
                    if let Some(e) = r.abs_error {
                        let ratio = if r.tolerance > 0.0 { e / r.tolerance } else { e };
                        if worst.is_none_or(|(_, w)| ratio > w) {
                            worst = Some((lines.len(), ratio));
                        }
                    } else if r.status == Status::Fail && worst.is_none_or(|(_, w)| w.is_finite()) {
                        worst = Some((lines.len(), f64::INFINITY));
                    }
                    lines.push([
                        String::new(),
                        snap.label.clone(),
                        format!("#{}", t.target + 1),
                        r.parameter.label().to_string(),
                        fmt_num(Some(r.target)),
                        fmt_num(r.estimated),
                        fmt_num(r.abs_error),
                        fmt_num(Some(r.tolerance)),
                        r.status.as_str().to_string(),
                    ]);
                }
            }
        }
        if let Some((i, _)) = worst {
            lines[i][0] = "*".into();
        }
        let mut widths = header.map(str::len);
        for l in &lines {
            for (w, c) in widths.iter_mut().zip(l) {
                *w = (*w).max(c.len());
            }
        }
        let fmt_line = |cells: [&str; 9]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                // text columns left-aligned, numbers right-aligned
                if (4..8).contains(&i) {
                    write!(s, "{c:>w$}  ").unwrap();
                } else {
                    write!(s, "{c:<w$}  ").unwrap();
                }
            }
            s.trim_end().to_string()
        };
        writeln!(out, "{}", fmt_line(header)).unwrap();
        writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 2 * (widths.len() - 1))).unwrap();
        for l in &lines {
            writeln!(out, "{}", fmt_line(l.each_ref().map(String::as_str))).unwrap();
        }
        out.push('\n');
        let s = &self.summary;
        write!(out, "{}/{} checks passed", s.passed, s.checks).unwrap();
        if s.not_estimable > 0 {
            write!(out, ", {} not estimable", s.not_estimable).unwrap();
        }
        if let Some(w) = s.worst_power_error_db {
            write!(out, ", worst power error {w:.3} dB").unwrap();
        }
        writeln!(out, ", {:.2} s", s.runtime_s).unwrap();
        writeln!(out, "{}", if s.all_pass { "RESULT: PASS" } else { "RESULT: FAIL" }).unwrap();
        out
    }
}

fn short(h: &str) -> &str {
    &h[..h.len().min(12)]
}

fn fmt_num(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3}"),
        None => "-".into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn provenance() -> Provenance {
        Provenance {
            scenario_name: "demo".into(),
            scenario_sha256: "ab".repeat(32),
            tool_version: "0.1.0".into(),
            mode: Mode::Adtr,
            quantization: "ideal".into(),
            n_time: 256,
            n_freq: 251,
        }
    }

    fn sample() -> RunReport {
        let rows = vec![
            ParameterRow::compare(Parameter::RangeM, 50.0, Some(50.4), 1.9),
            ParameterRow::compare(Parameter::PowerDb, -5.0, Some(-5.6), 1.0),
            ParameterRow::compare(Parameter::AzimuthDeg, -20.0, Some(-20.0), 1.0),
            ParameterRow::not_estimable(Parameter::VelocityMps, 7.0, 0.25),
        ];
        RunReport::new(
            provenance(),
            Tolerances::default(),
            vec![SnapshotReport { label: "t1".into(), targets: vec![TargetReport { target: 0, detected: true, rows }] }],
            1.5,
        )
    }

    #[test]
    fn boundary_error_passes() {
        let est = 2.5 + 6.0 * 0.02;
        let row = ParameterRow::compare(Parameter::RangeM, 2.6, Some(est), 0.02);
        assert!(row.abs_error.unwrap() > 0.02);
        assert_eq!(row.status, Status::Pass);
        assert_eq!(ParameterRow::compare(Parameter::RangeM, 2.6, Some(2.621), 0.02).status, Status::Fail);
    }

    #[test]
    fn summary_counts() {
        let r = sample();
        assert_eq!((r.summary.checks, r.summary.passed, r.summary.not_estimable), (4, 3, 1));
        assert!(r.all_pass());
        assert!((r.summary.worst_power_error_db.unwrap() - 0.6).abs() < 1e-12);
        let fail = ParameterRow::compare(Parameter::RangeM, 1.0, Some(4.0), 1.9);
        assert_eq!(fail.status, Status::Fail);
        assert_eq!(ParameterRow::compare(Parameter::RangeM, 1.0, None, 1.9).status, Status::Fail);
    }

    #[test]
    fn json_round_trip_and_render_are_stable() {
        let r = sample();
        let back = RunReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.render(), r.render());
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn schema_version_checked() {
        let text = sample().to_json().replace("\"schema_version\": 1", "\"schema_version\": 9");
        assert!(matches!(RunReport::from_json(&text), Err(Error::SchemaVersion { found: 9, .. })));
    }

    #[test]
    fn worst_row_marked() {
        let text = sample().render();
        let marked: Vec<&str> = text.lines().filter(|l| l.starts_with('*')).collect();
        assert_eq!(marked.len(), 1);
        assert!(marked[0].contains("power (dB)"), "{text}");
    }

    #[test]
    fn empty_report_is_header_only() {
        let r = RunReport::new(provenance(), Tolerances::default(), vec![], 0.0);
        let text = r.render();
        assert!(text.contains("parameter"));
        assert!(!text.lines().any(|l| l.starts_with('*')));
        assert_eq!(r.summary.checks, 0);
    }

    #[test]
    fn tolerance_file_defaults() {
        let t = Tolerances::from_toml_str("power_db = 0.5\n").unwrap();
        assert_eq!(t.power_db, 0.5);
        assert_eq!(t.range_m, 1.9);
        let err = Tolerances::from_toml_str("range_m = 1.0\nbogus = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }
}
