//! CSV tables derived from artifacts. Floats are written in shortest
//! round-trip scientific notation, so parsing a cell gives back the exact
//! value stored in the report.

use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use slowhom::dirichlet::DemoReport;
use slowhom::family::FamilyReport;
use slowhom::halfspace::ScheduleCertificate;
use slowhom::lattice::DirectionCertificate;
use slowhom::LogValue;

use crate::output::{write_atomic, Artifact};
use crate::report::{DirectionOutput, FamilyOutput, HalfspaceOutput, KIND_DEMO, KIND_DIRECTION, KIND_FAMILY, KIND_HALFSPACE};
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    /// k, ln_norm, ln_gap, check_lhs_ln, check_rhs_ln
    Stages,
    /// k, ln_t_k, ln_S, ln_omega, margin
    Schedule,
    /// ln_t, ln_S
    Curve,
    /// k, ln_lambda, ln_phase_product, ln_main, ln_sigma1_bound, ln_sigma2_bound, ln_omega_lambda, margin_ratio, verdict
    Family,
    /// eps, lambda, abs_u, abs_flat, abs_curved, flat_bound, resolved
    Trend,
    /// k, point, lambda, abs_curved
    Decay,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Stages => "stages",
            TableKind::Schedule => "schedule",
            TableKind::Curve => "curve",
            TableKind::Family => "family",
            TableKind::Trend => "trend",
            TableKind::Decay => "decay",
        }
    }

    pub fn default_for(kind: &str) -> Option<TableKind> {
        match kind {
            KIND_DIRECTION => Some(TableKind::Stages),
            KIND_HALFSPACE => Some(TableKind::Schedule),
            KIND_FAMILY => Some(TableKind::Family),
            KIND_DEMO => Some(TableKind::Trend),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| CliError::Report(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(err)?;
        }
        w.into_inner().map_err(|e| CliError::Report(e.to_string()))
    }
}

fn ln(v: &LogValue) -> f64 {
    v.ln_abs()
}

pub fn schedule_table(schedule: Option<&ScheduleCertificate>) -> Table {
    let rows = schedule
        .map(|s| {
            s.rows
                .iter()
                .map(|r| vec![Cell::Int(r.k as i64), Cell::Float(r.ln_t), Cell::Float(r.ln_s), Cell::Float(r.ln_omega), Cell::Float(r.margin)])
                .collect()
        })
        .unwrap_or_default();
    Table { header: vec!["k", "ln_t_k", "ln_S", "ln_omega", "margin"], rows }
}

pub fn curve_table(points: &[(f64, f64)]) -> Table {
    Table { header: vec!["ln_t", "ln_S"], rows: points.iter().map(|&(t, s)| vec![Cell::Float(t), Cell::Float(s)]).collect() }
}

pub fn stages_table(cert: &DirectionCertificate) -> Table {
    let rows = cert
        .stages
        .iter()
        .enumerate()
        .map(|(i, xi)| {
            let k = i + 1;
            let gap = cert.gap_sq(k).map(|g| 0.5 * LogValue::from_ratio(&g).ln_abs()).unwrap_or(f64::NAN);
            let check = cert.checks.iter().find(|c| c.stage == k);
            vec![
                Cell::Int(k as i64),
                Cell::Float(xi.ln_norm()),
                Cell::Float(gap),
                Cell::Float(check.map_or(f64::NAN, |c| c.lhs_ln)),
                Cell::Float(check.map_or(f64::NAN, |c| c.rhs_ln)),
            ]
        })
        .collect();
    Table { header: vec!["k", "ln_norm", "ln_gap", "check_lhs_ln", "check_rhs_ln"], rows }
}

pub fn family_table(report: Option<&FamilyReport>) -> Table {
    let rows = report
        .map(|r| {
            r.rows
                .iter()
                .map(|row| {
                    vec![
                        Cell::Int(row.k as i64),
                        Cell::Float(ln(&row.lambda)),
                        Cell::Float(ln(&row.phase_product)),
                        Cell::Float(ln(&row.main)),
                        Cell::Float(ln(&row.sigma1_bound)),
                        Cell::Float(ln(&row.sigma2_bound)),
                        Cell::Float(ln(&row.omega_lambda)),
                        Cell::Float(row.margin_ratio),
                        Cell::Text(verdict_name(row.verdict).into()),
                    ]
                })
                .collect()
        })
        .unwrap_or_default();
    Table {
        header: vec!["k", "ln_lambda", "ln_phase_product", "ln_main", "ln_sigma1_bound", "ln_sigma2_bound", "ln_omega_lambda", "margin_ratio", "verdict"],
        rows,
    }
}

pub fn trend_table(report: &DemoReport) -> Table {
    let rows = report
        .trend
        .iter()
        .map(|r| {
            vec![
                Cell::Float(r.eps),
                Cell::Float(r.lambda),
                Cell::Float(r.abs_u),
                Cell::Float(r.abs_flat),
                Cell::Float(r.abs_curved),
                Cell::Float(r.flat_bound),
                Cell::Text(r.resolved.to_string()),
            ]
        })
        .collect();
    Table { header: vec!["eps", "lambda", "abs_u", "abs_flat", "abs_curved", "flat_bound", "resolved"], rows }
}

pub fn decay_table(report: &DemoReport) -> Table {
    let rows = report
        .decay
        .iter()
        .map(|r| vec![Cell::Int(r.k as i64), Cell::Int(r.point as i64), Cell::Float(r.lambda), Cell::Float(r.abs_curved)])
        .collect();
    Table { header: vec!["k", "point", "lambda", "abs_curved"], rows }
}

fn verdict_name(v: slowhom::family::Verdict) -> &'static str {
    match v {
        slowhom::family::Verdict::Pass => "pass",
        slowhom::family::Verdict::Fail => "fail",
        slowhom::family::Verdict::Inconclusive => "inconclusive",
    }
}

fn payload<T: for<'de> Deserialize<'de>>(a: &Artifact) -> Result<T, CliError> {
    serde_json::from_value(a.report.clone()).map_err(|e| CliError::Usage(format!("malformed {} report: {e}", a.kind)))
}

/// Builds the requested table from an artifact; `None` picks the kind's default.
pub fn table_for(artifact: &Artifact, kind: Option<TableKind>) -> Result<Table, CliError> {
    let kind = kind
        .or_else(|| TableKind::default_for(&artifact.kind))
        .ok_or_else(|| CliError::Usage(format!("no tables for artifact kind `{}`", artifact.kind)))?;
    let mismatch = || CliError::Usage(format!("table `{}` is not available for `{}`", kind.name(), artifact.kind));
    match (artifact.kind.as_str(), kind) {
        (KIND_DIRECTION, TableKind::Stages) => Ok(stages_table(&payload::<DirectionOutput>(artifact)?.certificate)),
        (KIND_HALFSPACE, TableKind::Stages) => Ok(stages_table(&payload::<HalfspaceOutput>(artifact)?.direction.certificate)),
        (KIND_HALFSPACE, TableKind::Schedule) => Ok(schedule_table(payload::<HalfspaceOutput>(artifact)?.schedule.as_ref())),
        (KIND_HALFSPACE, TableKind::Curve) => Ok(curve_table(&payload::<HalfspaceOutput>(artifact)?.decay_curve)),
        (KIND_FAMILY, TableKind::Stages) => Ok(stages_table(&payload::<FamilyOutput>(artifact)?.direction.certificate)),
        (KIND_FAMILY, TableKind::Family) => Ok(family_table(payload::<FamilyOutput>(artifact)?.family.as_ref())),
        (KIND_DEMO, TableKind::Stages) => Ok(stages_table(&payload::<DemoReport>(artifact)?.certificate)),
        (KIND_DEMO, TableKind::Trend) => Ok(trend_table(&payload::<DemoReport>(artifact)?)),
        (KIND_DEMO, TableKind::Decay) => Ok(decay_table(&payload::<DemoReport>(artifact)?)),
        _ => Err(mismatch()),
    }
}

pub fn write_table(table: &Table, path: &Path) -> Result<(), CliError> {
    write_atomic(path, &table.to_csv()?)
}

pub fn emit_plot_data(artifact: &Artifact, kind: Option<TableKind>, path: &Path) -> Result<(), CliError> {
    write_table(&table_for(artifact, kind)?, path)
}

/// Header and raw cells of a CSV file.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<String>>), CliError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::Io(path.display().to_string(), io),
        other => CliError::Report(format!("{other:?}")),
    })?;
    let header = r.headers().map_err(|e| CliError::Report(e.to_string()))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        rows.push(rec.map_err(|e| CliError::Report(e.to_string()))?.iter().map(str::to_string).collect());
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use slowhom::halfspace::ScheduleRow;
    use slowhom::Modulus;

    fn schedule() -> ScheduleCertificate {
        let rows = (1..=3)
            .map(|k| ScheduleRow {
                k,
                ln_t: 0.1 * k as f64 + 1.0 / 3.0,
                ln_s: -(k as f64).powf(1.7) * std::f64::consts::PI,
                ln_omega: -1e-17 * k as f64,
                margin: 2.0f64.sqrt() * 1e300,
                analytic_margin: 0.0,
                pass: true,
            })
            .collect();
        ScheduleCertificate { omega: Modulus::power(0.5).unwrap(), rows, passed: true }
    }

    #[test]
    fn schedule_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        let s = schedule();
        write_table(&schedule_table(Some(&s)), &path).unwrap();
        let (header, rows) = read_csv(&path).unwrap();
        assert_eq!(header, ["k", "ln_t_k", "ln_S", "ln_omega", "margin"]);
        assert_eq!(rows.len(), s.rows.len());
        for (cells, r) in rows.iter().zip(&s.rows) {
            assert_eq!(cells[0].parse::<usize>().unwrap(), r.k);
            let f: Vec<f64> = cells[1..].iter().map(|c| c.parse().unwrap()).collect();
            assert_eq!(f, [r.ln_t, r.ln_s, r.ln_omega, r.margin]);
            assert!(cells[1].contains('e'));
        }
    }

    #[test]
    fn empty_report_gives_header_only() {
        let bytes = schedule_table(None).to_csv().unwrap();
        assert_eq!(String::from_utf8(bytes).unwrap(), "k,ln_t_k,ln_S,ln_omega,margin\n");
    }

    #[test]
    fn non_finite_cells_parse_back() {
        let t = curve_table(&[(f64::NEG_INFINITY, f64::NAN), (f64::INFINITY, -0.0)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        let vals: Vec<f64> = text.lines().skip(1).flat_map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect::<Vec<_>>()).collect();
        assert_eq!(vals[0], f64::NEG_INFINITY);
        assert!(vals[1].is_nan());
        assert_eq!(vals[2], f64::INFINITY);
        assert!(vals[3] == 0.0 && vals[3].is_sign_negative());
    }
}
