use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{SweepCell, SweepError};

pub const CSV_HEADER: &str = "param,value,dt,mean_reward,crash_count,failed_runs,mean_runtime_s,realtime_pct";

const SEPARATOR: char = '|';

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Svg,
}

/// One CSV row. Cells of a Cartesian sweep list their parameter names and
/// values separated by `|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub param: String,
    pub value: String,
    pub dt: f64,
    pub mean_reward: f64,
    pub crash_count: usize,
    pub failed_runs: usize,
    pub mean_runtime_s: f64,
    pub realtime_pct: f64,
}

impl From<&SweepCell> for ReportRow {
    fn from(cell: &SweepCell) -> Self {
        let join = |f: &dyn Fn(&(String, f64)) -> String| {
            cell.params
                .iter()
                .map(f)
                .collect::<Vec<_>>()
                .join(&SEPARATOR.to_string())
        };
        Self {
            param: join(&|(name, _)| name.clone()),
            value: join(&|(_, v)| v.to_string()),
            dt: cell.dt,
            mean_reward: cell.mean_reward,
            crash_count: cell.crash_count,
            failed_runs: cell.failed_runs,
            mean_runtime_s: cell.mean_runtime,
            realtime_pct: cell.realtime_pct,
        }
    }
}

pub fn emit_report(cells: &[SweepCell], format: ReportFormat) -> Result<Vec<u8>, SweepError> {
    if cells.is_empty() {
        return Err(SweepError::EmptyReport);
    }
    let rows: Vec<ReportRow> = cells.iter().map(ReportRow::from).collect();
    Ok(match format {
        ReportFormat::Csv => csv_bytes(&rows)?,
        ReportFormat::Svg => svg(&rows).into_bytes(),
    })
}

fn csv_bytes(rows: &[ReportRow]) -> Result<Vec<u8>, SweepError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| SweepError::Parse(e.to_string()))?;
    }
    writer.into_inner().map_err(|e| SweepError::Parse(e.to_string()))
}

pub fn parse_csv(bytes: &[u8]) -> Result<Vec<ReportRow>, SweepError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let header = reader.headers().map_err(|e| SweepError::Parse(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(SweepError::Parse(format!("unexpected header {header:?}")));
    }
    reader
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| SweepError::Parse(e.to_string()))
}

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 320.0;
const MARGIN: f64 = 60.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// One panel per swept parameter: mean reward against the parameter value,
/// one line per time step. Values are spaced evenly in grid order.
fn svg(rows: &[ReportRow]) -> String {
    let mut params: Vec<&str> = Vec::new();
    for row in rows {
        if !params.contains(&row.param.as_str()) {
            params.push(&row.param);
        }
    }
    let mut dts: Vec<f64> = Vec::new();
    for row in rows {
        if !dts.contains(&row.dt) {
            dts.push(row.dt);
        }
    }
    let width = PANEL_W + 2.0 * MARGIN;
    let height = params.len() as f64 * (PANEL_H + 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (panel, param) in params.iter().enumerate() {
        let top = panel as f64 * (PANEL_H + 2.0 * MARGIN) + MARGIN;
        let panel_rows: Vec<&ReportRow> = rows.iter().filter(|r| r.param == *param).collect();
        let mut values: Vec<&str> = Vec::new();
        for row in &panel_rows {
            if !values.contains(&row.value.as_str()) {
                values.push(&row.value);
            }
        }
        let finite = panel_rows.iter().map(|r| r.mean_reward).filter(|r| r.is_finite());
        let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
        if !lo.is_finite() {
            (lo, hi) = (-1.0, 0.0);
        }
        if hi - lo < 1e-9 {
            (lo, hi) = (lo - 1.0, hi + 1.0);
        }
        let x = |i: usize| {
            if values.len() == 1 {
                MARGIN + 0.5 * PANEL_W
            } else {
                MARGIN + PANEL_W * i as f64 / (values.len() - 1) as f64
            }
        };
        let y = |r: f64| top + PANEL_H * (hi - r) / (hi - lo);

        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{top}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            MARGIN + 0.5 * PANEL_W,
            top + PANEL_H + 40.0,
            escape(param)
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">mean reward</text>"#,
            MARGIN - 45.0,
            top + 0.5 * PANEL_H,
            MARGIN - 45.0,
            top + 0.5 * PANEL_H
        );
        for (label, r) in [(hi, hi), (lo, lo)] {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="end">{label:.0}</text>"#,
                MARGIN - 5.0,
                y(r) + 4.0
            );
        }
        for (i, value) in values.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
                x(i),
                top + PANEL_H + 18.0,
                escape(value)
            );
        }
        for (s, dt) in dts.iter().enumerate() {
            let color = COLORS[s % COLORS.len()];
            let points: Vec<(f64, f64)> = values
                .iter()
                .enumerate()
                .filter_map(|(i, v)| {
                    panel_rows
                        .iter()
                        .find(|r| r.value == *v && r.dt == *dt && r.mean_reward.is_finite())
                        .map(|r| (x(i), y(r.mean_reward)))
                })
                .collect();
            if points.is_empty() {
                continue;
            }
            let coords: Vec<String> = points.iter().map(|(px, py)| format!("{px:.1},{py:.1}")).collect();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                coords.join(" ")
            );
            for (px, py) in &points {
                let _ = writeln!(out, r#"<circle cx="{px:.1}" cy="{py:.1}" r="3" fill="{color}"/>"#);
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}">dt = {dt}</text>"#,
                MARGIN + PANEL_W - 80.0,
                top + 16.0 * (s + 1) as f64
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
