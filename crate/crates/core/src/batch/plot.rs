//! CSV plot data extracted from JSON reports.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot")]
    NothingToPlot,
    #[error("invalid report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed report: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One CSV file's worth of columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotTable {
    pub name: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl PlotTable {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>, PlotError> {
    v.as_array()
        .ok_or_else(|| PlotError::Malformed(format!("{what} is not an array")))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| PlotError::Malformed(format!("{what} holds a non-number"))))
        .collect()
}

/// Angle of a planar graph direction; unoriented (in `[0, π)`) for BTC cones.
fn theta(d: &[f64], symmetric: bool) -> f64 {
    let t = d[1].atan2(d[0]);
    if !symmetric {
        return t;
    }
    let t = t.rem_euclid(PI);
    if PI - t < 1e-12 {
        0.0
    } else {
        t
    }
}

fn cone_table(name: String, cone: &Value) -> Result<Option<PlotTable>, PlotError> {
    let dirs = cone["directions"].as_array().ok_or_else(|| PlotError::Malformed("cone without directions".into()))?;
    let persistence = numbers(&cone["persistence"], "persistence")?;
    let finest =
        cone["finest_radius"].as_f64().ok_or_else(|| PlotError::Malformed("cone without finest_radius".into()))?;
    let symmetric = cone["symmetric"].as_bool().unwrap_or(false);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (d, p) in dirs.iter().zip(persistence) {
        let d = numbers(d, "direction")?;
        if d.len() != 2 {
            // Directions of a several-variable graph have no single angle.
            return Ok(None);
        }
        let t = theta(&d, symmetric);
        match rows.iter_mut().find(|r| (r[0] - t).abs() < 1e-12) {
            Some(r) => r[1] = r[1].max(p),
            None => rows.push(vec![t, p, finest]),
        }
    }
    rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    Ok((!rows.is_empty()).then(|| PlotTable { name, header: vec!["theta", "persistence", "finest_radius"], rows }))
}

fn subdiff_table(name: String, est: &Value) -> Result<Option<PlotTable>, PlotError> {
    let levels =
        est["levels"].as_array().ok_or_else(|| PlotError::Malformed("subdifferential without levels".into()))?;
    let mut rows = Vec::new();
    for l in levels {
        let get = |k: &str| l[k].as_f64().ok_or_else(|| PlotError::Malformed(format!("level without {k}")));
        rows.push(vec![get("level")?, get("min_slope")?, get("max_slope")?]);
    }
    Ok((!rows.is_empty()).then(|| PlotTable { name, header: vec!["level", "min_slope", "max_slope"], rows }))
}

/// Tables for every cone and one-variable subdifferential in a report (an
/// object) or a batch of reports (an array).
pub fn plot_tables(report: &Value) -> Result<Vec<PlotTable>, PlotError> {
    let (items, batch) = match report {
        Value::Array(items) => (items.iter().collect::<Vec<_>>(), true),
        Value::Object(_) => (vec![report], false),
        _ => return Err(PlotError::Malformed("a report is a JSON object or array".into())),
    };
    let mut tables = Vec::new();
    for (i, item) in items.into_iter().enumerate() {
        let prefix = if batch { format!("item{i}_") } else { String::new() };
        let result = &item["result"];
        if !result["cone"].is_null() {
            tables.extend(cone_table(format!("{prefix}cone"), &result["cone"])?);
        }
        if !result["subdifferential"].is_null() {
            tables.extend(subdiff_table(format!("{prefix}subdiff"), &result["subdifferential"])?);
        }
    }
    if tables.is_empty() {
        return Err(PlotError::NothingToPlot);
    }
    Ok(tables)
}

/// Writes one `<name>.csv` per table into `dir` (created if needed).
pub fn write_plot_data(report_json: &str, dir: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let value: Value = serde_json::from_str(report_json)?;
    let tables = plot_tables(&value)?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for t in tables {
        let path = dir.join(format!("{}.csv", t.name));
        std::fs::write(&path, t.to_csv())?;
        written.push(path);
    }
    Ok(written)
}
